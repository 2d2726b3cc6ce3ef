//! Atomic data for Ca⁺: level scheme, transitions, isotopes and physical
//! constants.
//!
//! The data lives in a TOML file (see `data/ca_plus.toml` for the bundled
//! copy). Frequencies in the file are ordinary Hz; everything exposed here is
//! converted to SI with angular frequencies.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::HalfInt;

/// Physical constants in SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub h: f64,
    pub hbar: f64,
    pub c: f64,
    pub alpha: f64,
    pub mu_b: f64,
    pub e: f64,
    pub amu: f64,
    pub m_e: f64,
}

/// CODATA 2018.
pub const CODATA: Constants = Constants {
    h: 6.626_070_15e-34,
    hbar: 6.626_070_15e-34 / TAU,
    c: 299_792_458.0,
    alpha: 7.297_352_569_3e-3,
    mu_b: 9.274_010_078_3e-24,
    e: 1.602_176_634e-19,
    amu: 1.660_539_066_60e-27,
    m_e: 9.109_383_701_5e-31,
};

pub const BUNDLED_DATA: &str = include_str!("../data/ca_plus.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Lower,
    Upper,
}

/// A fine-structure term, i.e. all magnetic sublevels of one (n, L, J).
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub name: String,
    pub j: HalfInt,
    /// Centroid energy as an angular frequency above 4S1/2 (rad/s).
    pub energy: f64,
    pub manifold: Manifold,
}

impl Term {
    /// Orbital angular momentum read off the spectroscopic letter.
    pub fn orbital_l(&self) -> Result<u32> {
        let letter = self
            .name
            .chars()
            .find(|c| c.is_ascii_alphabetic())
            .ok_or_else(|| Error::Data(format!("term {:?} has no orbital letter", self.name)))?;
        "SPDFGH"
            .find(letter.to_ascii_uppercase())
            .map(|l| l as u32)
            .ok_or_else(|| Error::Data(format!("unknown orbital letter in {:?}", self.name)))
    }

    /// Landé g-factor in LS coupling with S = 1/2, g_s = 2.
    pub fn lande_g(&self) -> Result<f64> {
        let l = f64::from(self.orbital_l()?);
        let s = 0.5;
        let j = self.j.value();
        if j == 0.0 {
            return Ok(0.0);
        }
        let jj = j * (j + 1.0);
        Ok(1.0 + (jj - l * (l + 1.0) + s * (s + 1.0)) / (2.0 * jj))
    }

    pub fn sublevels(&self) -> impl Iterator<Item = LevelState> + '_ {
        self.j.projections().map(move |mj| LevelState {
            term: self.name.clone(),
            j: self.j,
            mj,
            energy: self.energy,
            manifold: self.manifold,
        })
    }
}

/// One magnetic sublevel.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelState {
    pub term: String,
    pub j: HalfInt,
    pub mj: HalfInt,
    /// Angular frequency above the 4S1/2 centroid (rad/s).
    pub energy: f64,
    pub manifold: Manifold,
}

impl LevelState {
    pub fn new(term: &str, j: HalfInt, mj: HalfInt, energy: f64, manifold: Manifold) -> Result<Self> {
        if mj.twice().abs() > j.twice() || (j.twice() - mj.twice()) % 2 != 0 {
            return Err(Error::arg(format!("m_J = {mj} is not a projection of J = {j}")));
        }
        Ok(LevelState { term: term.to_string(), j, mj, energy, manifold })
    }
}

impl std::fmt::Display for LevelState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(m={})", self.term, self.mj)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub name: String,
    pub lower: String,
    pub upper: String,
    /// Vacuum wavelength (m).
    pub wavelength: f64,
    /// Radiative lifetime of the channel (s).
    pub lifetime: f64,
    /// Where the lifetime came from (`reference` or `literature`).
    pub source: String,
    /// Required laser bandwidth carried as reference data (rad/s).
    pub bandwidth: f64,
}

impl Transition {
    pub fn decay_rate(&self) -> f64 {
        1.0 / self.lifetime
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    pub fn angular_frequency(&self, consts: &Constants) -> f64 {
        TAU * consts.c / self.wavelength
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Isotope {
    pub mass_number: u32,
    pub decay_mode: String,
    /// Half-life as tabulated, e.g. "162 days"; "-" for stable.
    pub half_life_label: String,
    /// Half-life in seconds; `None` when stable.
    pub half_life: Option<f64>,
    pub nuclear_spin: HalfInt,
    /// Neutral atomic mass (kg).
    pub mass: f64,
}

impl Isotope {
    pub fn is_stable(&self) -> bool {
        self.half_life.is_none()
    }
}

// On-disk schema.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicFile {
    pub ion: IonRecord,
    pub levels: Vec<LevelRecord>,
    pub transitions: Vec<TransitionRecord>,
    #[serde(default)]
    pub isotopes: Vec<IsotopeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonRecord {
    pub species: String,
    pub mass_amu: f64,
    pub charge_state: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRecord {
    pub term: String,
    pub twice_j: i32,
    pub energy_hz: f64,
    pub manifold: Manifold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub name: String,
    pub lower: String,
    pub upper: String,
    pub wavelength_m: f64,
    pub lifetime_s: f64,
    pub source: String,
    pub bandwidth_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopeRecord {
    pub mass_number: u32,
    pub decay_mode: String,
    pub half_life: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_life_s: Option<f64>,
    pub twice_spin: i32,
    pub mass_amu: f64,
}

impl IsotopeRecord {
    fn to_isotope(&self, consts: &Constants) -> Isotope {
        Isotope {
            mass_number: self.mass_number,
            decay_mode: self.decay_mode.clone(),
            half_life_label: self.half_life.clone(),
            half_life: self.half_life_s,
            nuclear_spin: HalfInt::from_twice(self.twice_spin),
            mass: self.mass_amu * consts.amu,
        }
    }

    fn from_isotope(iso: &Isotope, consts: &Constants) -> Self {
        IsotopeRecord {
            mass_number: iso.mass_number,
            decay_mode: iso.decay_mode.clone(),
            half_life: iso.half_life_label.clone(),
            half_life_s: iso.half_life,
            twice_spin: iso.nuclear_spin.twice(),
            mass_amu: iso.mass / consts.amu,
        }
    }
}

/// Loaded, validated atomic data. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicData {
    pub species: String,
    /// Mass of the ion (neutral atom minus the stripped electrons), kg.
    pub ion_mass: f64,
    pub terms: Vec<Term>,
    pub transitions: Vec<Transition>,
    pub isotopes: Vec<Isotope>,
    pub constants: Constants,
}

impl AtomicData {
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_DATA).expect("bundled atomic data is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` if given, otherwise the bundled Ca⁺ data.
    pub fn load_or_bundled(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::bundled()),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: AtomicFile = toml::from_str(text).map_err(|e| Error::Data(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &AtomicFile) -> Result<Self> {
        let consts = CODATA;
        let terms: Vec<Term> = file
            .levels
            .iter()
            .map(|l| {
                if l.twice_j < 0 {
                    return Err(Error::Data(format!("{}: negative J", l.term)));
                }
                Ok(Term {
                    name: l.term.clone(),
                    j: HalfInt::from_twice(l.twice_j),
                    energy: TAU * l.energy_hz,
                    manifold: l.manifold,
                })
            })
            .collect::<Result<_>>()?;

        for (i, t) in terms.iter().enumerate() {
            if terms[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Data(format!("duplicate term {}", t.name)));
            }
            t.orbital_l()?;
        }
        let max_lower = terms
            .iter()
            .filter(|t| t.manifold == Manifold::Lower)
            .map(|t| t.energy)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_upper = terms
            .iter()
            .filter(|t| t.manifold == Manifold::Upper)
            .map(|t| t.energy)
            .fold(f64::INFINITY, f64::min);
        if max_lower >= min_upper {
            return Err(Error::Data(
                "every lower-manifold level must lie below every upper-manifold level".into(),
            ));
        }

        let transitions: Vec<Transition> = file
            .transitions
            .iter()
            .map(|t| {
                for term in [&t.lower, &t.upper] {
                    if !terms.iter().any(|x| &x.name == term) {
                        return Err(Error::Data(format!("transition {} names unknown term {term}", t.name)));
                    }
                }
                if !(t.wavelength_m > 0.0 && t.lifetime_s > 0.0 && t.bandwidth_hz >= 0.0) {
                    return Err(Error::Data(format!("transition {}: non-positive parameter", t.name)));
                }
                Ok(Transition {
                    name: t.name.clone(),
                    lower: t.lower.clone(),
                    upper: t.upper.clone(),
                    wavelength: t.wavelength_m,
                    lifetime: t.lifetime_s,
                    source: t.source.clone(),
                    bandwidth: TAU * t.bandwidth_hz,
                })
            })
            .collect::<Result<_>>()?;

        if !(file.ion.mass_amu > 0.0) {
            return Err(Error::Data("ion mass must be positive".into()));
        }
        let ion_mass = file.ion.mass_amu * consts.amu - f64::from(file.ion.charge_state) * consts.m_e;

        Ok(AtomicData {
            species: file.ion.species.clone(),
            ion_mass,
            terms,
            transitions,
            isotopes: file.isotopes.iter().map(|r| r.to_isotope(&consts)).collect(),
            constants: consts,
        })
    }

    pub fn to_file(&self) -> AtomicFile {
        let c = &self.constants;
        AtomicFile {
            ion: IonRecord {
                species: self.species.clone(),
                mass_amu: (self.ion_mass + c.m_e) / c.amu,
                charge_state: 1,
            },
            levels: self
                .terms
                .iter()
                .map(|t| LevelRecord {
                    term: t.name.clone(),
                    twice_j: t.j.twice(),
                    energy_hz: t.energy / TAU,
                    manifold: t.manifold,
                })
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionRecord {
                    name: t.name.clone(),
                    lower: t.lower.clone(),
                    upper: t.upper.clone(),
                    wavelength_m: t.wavelength,
                    lifetime_s: t.lifetime,
                    source: t.source.clone(),
                    bandwidth_hz: t.bandwidth / TAU,
                })
                .collect(),
            isotopes: self.isotopes.iter().map(|i| IsotopeRecord::from_isotope(i, c)).collect(),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(&self.to_file()).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn term(&self, name: &str) -> Result<&Term> {
        self.terms
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::arg(format!("unknown term {name:?}")))
    }

    /// Looks a transition up by name ("397") or by either term it connects
    /// spelled as "4S1/2-4P1/2".
    pub fn transition(&self, name: &str) -> Result<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.name == name || format!("{}-{}", t.lower, t.upper) == name)
            .ok_or_else(|| Error::arg(format!("unknown transition {name:?}")))
    }

    pub fn sublevel(&self, term: &str, mj: HalfInt) -> Result<LevelState> {
        let t = self.term(term)?;
        LevelState::new(&t.name, t.j, mj, t.energy, t.manifold)
    }

    /// Parses "4S1/2:-1/2" into a sublevel.
    pub fn parse_sublevel(&self, label: &str) -> Result<LevelState> {
        let (term, mj) = label
            .split_once(':')
            .ok_or_else(|| Error::arg(format!("expected TERM:mJ, got {label:?}")))?;
        self.sublevel(term, mj.parse()?)
    }

    /// Sublevel with its linear Zeeman shift g_J m_J μ_B B/ħ added.
    pub fn zeeman_shifted(&self, level: &LevelState, field_gauss: f64) -> Result<LevelState> {
        let g = self.term(&level.term)?.lande_g()?;
        let shift = g * level.mj.value() * self.constants.mu_b * field_gauss * 1e-4 / self.constants.hbar;
        Ok(LevelState { energy: level.energy + shift, ..level.clone() })
    }

    pub fn level_scheme(&self) -> (Vec<LevelState>, Vec<Transition>) {
        let levels = self.terms.iter().flat_map(|t| t.sublevels()).collect();
        (levels, self.transitions.clone())
    }

    pub fn upper_sublevels(&self, term: &str) -> Result<Vec<LevelState>> {
        Ok(self.term(term)?.sublevels().collect())
    }
}

/// All Zeeman sublevels and transitions of the bundled Ca⁺ data.
pub fn ca_level_scheme() -> (Vec<LevelState>, Vec<Transition>) {
    AtomicData::bundled().level_scheme()
}

/// The odd calcium isotopes with non-zero nuclear spin.
pub fn isotope_table() -> Vec<Isotope> {
    AtomicData::bundled().isotopes
}
