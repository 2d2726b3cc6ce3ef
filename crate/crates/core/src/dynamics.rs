//! Time evolution: the closed-form two-level propagator, pulse sequences on
//! a qubit ⊗ phonon register, the controlled-phase gate, and a direct
//! integration of the full lower/upper manifold equations.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, Options};
use crate::raman::{LambDicke, RamanCoupling, StarkShifts};
use crate::specfun::{displacement_element, Xi};
use crate::trapmodes::ModeSystem;

/// Default phonon truncation per mode.
pub const DEFAULT_N_MAX: u32 = 4;
/// Largest truncation representable in single-digit basis labels.
pub const MAX_N_MAX: u32 = 9;
/// Bus population outside the vacuum tolerated on entry to the CZ gate.
pub const BUS_VACUUM_TOLERANCE: f64 = 1e-6;
/// Amplitudes below this magnitude count as unoccupied.
const OCCUPIED: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseKind {
    /// Carrier: phonon occupations unchanged.
    V,
    /// Red sideband on the bus mode.
    U,
}

impl FromStr for PulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "V" | "v" => Ok(PulseKind::V),
            "U" | "u" => Ok(PulseKind::U),
            _ => Err(Error::arg(format!("pulse kind must be V or U, got {s:?}"))),
        }
    }
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseKind::V => "V",
            PulseKind::U => "U",
        })
    }
}

/// One square pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub kind: PulseKind,
    /// Rotation angle θ = 2|Ω_eff|t.
    pub theta: f64,
    /// φ (rad).
    pub phase: f64,
    /// |Ω_eff| of the reference pair (rad/s).
    pub rabi: f64,
    /// t (s).
    pub duration: f64,
    /// Stark phase χ = tδ/2.
    pub chi: f64,
    /// Common phase (A + D)t/2.
    pub common_phase: f64,
    /// Internal level paired with |0⟩: 1 for the qubit, higher for an
    /// auxiliary level.
    #[serde(default = "default_excited")]
    pub excited_level: u8,
}

fn default_excited() -> u8 {
    1
}

impl PulseSpec {
    /// Stark-free pulse with unit Rabi frequency.
    pub fn ideal(kind: PulseKind, theta: f64, phase: f64) -> Self {
        PulseSpec {
            kind,
            theta,
            phase,
            rabi: 1.0,
            duration: theta / 2.0,
            chi: 0.0,
            common_phase: 0.0,
            excited_level: 1,
        }
    }

    /// Pulse of angle θ driven by the Raman coupling `shifts` with phonon
    /// factor `f`, on resonance (δ = A − D).
    pub fn from_coupling(kind: PulseKind, theta: f64, shifts: &StarkShifts, f: C64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::arg(format!("pulse angle must be non-negative, got {theta}")));
        }
        let omega_eff = shifts.b * f;
        let rabi = omega_eff.norm();
        if rabi == 0.0 {
            return Err(Error::Singularity("effective Rabi frequency vanishes".into()));
        }
        let duration = theta / (2.0 * rabi);
        let delta = shifts.a - shifts.d;
        let chi = duration * delta / 2.0;
        Ok(PulseSpec {
            kind,
            theta,
            phase: omega_eff.arg() + chi,
            rabi,
            duration,
            chi,
            common_phase: (shifts.a + shifts.d) * duration / 2.0,
            excited_level: 1,
        })
    }

    pub fn on_level(mut self, level: u8) -> Self {
        self.excited_level = level;
        self
    }

    /// Same pulse with θ scaled by `(1 + error)`, as from a timing error;
    /// the duration and Stark phases scale along.
    pub fn with_theta_error(mut self, error: f64) -> Self {
        let s = 1.0 + error;
        self.theta *= s;
        self.duration *= s;
        self.chi *= s;
        self.common_phase *= s;
        self
    }

    /// The same pulse with θ and the time-linear phases rescaled for a pair
    /// whose coupling is `ratio` times the reference; φ shifts by `dphi`.
    fn scaled(&self, ratio: f64, dphi: f64) -> Self {
        PulseSpec { theta: self.theta * ratio, phase: self.phase + dphi, ..*self }
    }
}

/// exp[i(A+D)t/2] [[e^{iχ} cos θ/2, i e^{iφ} sin θ/2], [i e^{−iφ} sin θ/2, e^{−iχ} cos θ/2]]
/// acting on (a_I, a_J).
pub fn two_level_propagator(pulse: &PulseSpec) -> Matrix2<C64> {
    let (s, c) = (pulse.theta / 2.0).sin_cos();
    let i = C64::i();
    let global = C64::from_polar(1.0, pulse.common_phase);
    Matrix2::new(
        C64::from_polar(c, pulse.chi),
        i * C64::from_polar(s, pulse.phase),
        i * C64::from_polar(s, -pulse.phase),
        C64::from_polar(c, -pulse.chi),
    ) * global
}

/// ‖U†U − I‖ (Frobenius).
pub fn unitarity_defect(u: &Matrix2<C64>) -> f64 {
    (u.adjoint() * u - Matrix2::identity()).norm()
}

/// Ions' internal levels ⊗ truncated Fock spaces of the collective modes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n_ions: usize,
    /// Internal levels per ion (2 for a bare qubit, 3 with an auxiliary).
    pub levels: u8,
    pub n_modes: usize,
    pub n_max: u32,
    amps: Vec<C64>,
}

/// One basis state: internal level per ion and occupation per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub internal: Vec<u8>,
    pub phonons: Vec<u32>,
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("q:")?;
        for q in &self.internal {
            write!(f, "{q}")?;
        }
        f.write_str("|ph:")?;
        for n in &self.phonons {
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for BasisState {
    type Err = Error;

    /// Parses labels like `q:01|ph:100`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::arg(format!("cannot parse basis label {s:?}; expected e.g. \"q:01|ph:100\""));
        let (q, ph) = s.trim().split_once('|').ok_or_else(bad)?;
        let q = q.strip_prefix("q:").ok_or_else(bad)?;
        let ph = ph.strip_prefix("ph:").ok_or_else(bad)?;
        let digits = |t: &str| -> Result<Vec<u32>> {
            t.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect()
        };
        let internal = digits(q)?.into_iter().map(|d| d as u8).collect();
        Ok(BasisState { internal, phonons: digits(ph)? })
    }
}

impl StateVector {
    pub fn zeros(n_ions: usize, levels: u8, n_modes: usize, n_max: u32) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::arg("a register needs at least one ion"));
        }
        if !(2..=10).contains(&levels) {
            return Err(Error::arg(format!("internal levels per ion must be in 2..=10, got {levels}")));
        }
        if n_max > MAX_N_MAX {
            return Err(Error::arg(format!("phonon truncation must be ≤ {MAX_N_MAX}, got {n_max}")));
        }
        let dim = (levels as usize)
            .checked_pow(n_ions as u32)
            .and_then(|q| (n_max as usize + 1).checked_pow(n_modes as u32).and_then(|p| q.checked_mul(p)))
            .filter(|&d| d <= 1 << 26)
            .ok_or_else(|| Error::arg("register dimension too large"))?;
        Ok(StateVector { n_ions, levels, n_modes, n_max, amps: vec![C64::new(0.0, 0.0); dim] })
    }

    /// A single basis state with unit amplitude.
    pub fn basis(n_ions: usize, levels: u8, n_modes: usize, n_max: u32, state: &BasisState) -> Result<Self> {
        let mut v = Self::zeros(n_ions, levels, n_modes, n_max)?;
        let i = v.index_of(state)?;
        v.amps[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    /// Qubits in `bits` (ion 0 first), all modes in the vacuum.
    pub fn computational(bits: &[u8], n_modes: usize, n_max: u32, levels: u8) -> Result<Self> {
        let state = BasisState { internal: bits.to_vec(), phonons: vec![0; n_modes] };
        Self::basis(bits.len(), levels, n_modes, n_max, &state)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn phonon_dim(&self) -> usize {
        (self.n_max as usize + 1).pow(self.n_modes as u32)
    }

    pub fn index_of(&self, s: &BasisState) -> Result<usize> {
        if s.internal.len() != self.n_ions || s.phonons.len() != self.n_modes {
            return Err(Error::arg(format!(
                "basis state {s} does not match a register of {} ions and {} modes",
                self.n_ions, self.n_modes
            )));
        }
        let mut q = 0;
        for &l in &s.internal {
            if l >= self.levels {
                return Err(Error::arg(format!("internal level {l} out of range in {s}")));
            }
            q = q * self.levels as usize + l as usize;
        }
        let mut p = 0;
        for &n in &s.phonons {
            if n > self.n_max {
                return Err(Error::Truncation(format!("{s} exceeds n_max = {}", self.n_max)));
            }
            p = p * (self.n_max as usize + 1) + n as usize;
        }
        Ok(q * self.phonon_dim() + p)
    }

    pub fn state_at(&self, index: usize) -> BasisState {
        let pd = self.phonon_dim();
        let (mut q, mut p) = (index / pd, index % pd);
        let mut internal = vec![0; self.n_ions];
        for slot in internal.iter_mut().rev() {
            *slot = (q % self.levels as usize) as u8;
            q /= self.levels as usize;
        }
        let mut phonons = vec![0; self.n_modes];
        for slot in phonons.iter_mut().rev() {
            *slot = (p % (self.n_max as usize + 1)) as u32;
            p /= self.n_max as usize + 1;
        }
        BasisState { internal, phonons }
    }

    pub fn amplitude(&self, s: &BasisState) -> Result<C64> {
        Ok(self.amps[self.index_of(s)?])
    }

    pub fn set_amplitude(&mut self, s: &BasisState, a: C64) -> Result<()> {
        let i = self.index_of(s)?;
        self.amps[i] = a;
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() || self.levels != other.levels || self.n_max != other.n_max {
            return Err(Error::arg("states live in different registers"));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Population of states whose mode `mode` is not in its ground state.
    pub fn excited_population(&self, mode: usize) -> f64 {
        (0..self.dim())
            .filter(|&i| self.state_at(i).phonons[mode] != 0)
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    /// Non-zero amplitudes in basis order.
    pub fn nonzero(&self) -> impl Iterator<Item = (BasisState, C64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != C64::new(0.0, 0.0))
            .map(|(i, a)| (self.state_at(i), *a))
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            n_ions: self.n_ions,
            levels: self.levels,
            n_modes: self.n_modes,
            n_max: self.n_max,
            amplitudes: self
                .nonzero()
                .map(|(s, a)| AmplitudeRecord { state: s.to_string(), amp: [a.re, a.im] })
                .collect(),
        }
    }

    pub fn from_file(file: &StateFile) -> Result<Self> {
        let mut v = Self::zeros(file.n_ions, file.levels, file.n_modes, file.n_max)?;
        for rec in &file.amplitudes {
            let s: BasisState = rec.state.parse()?;
            let i = v.index_of(&s)?;
            if v.amps[i] != C64::new(0.0, 0.0) {
                return Err(Error::arg(format!("duplicate amplitude for {}", rec.state)));
            }
            v.amps[i] = C64::new(rec.amp[0], rec.amp[1]);
        }
        Ok(v)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }
}

/// Serialized state: only non-zero amplitudes, complex numbers as [re, im].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_ions: usize,
    #[serde(default = "default_levels")]
    pub levels: u8,
    pub n_modes: usize,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    pub amplitudes: Vec<AmplitudeRecord>,
}

fn default_levels() -> u8 {
    2
}

fn default_n_max() -> u32 {
    DEFAULT_N_MAX
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeRecord {
    pub state: String,
    pub amp: [f64; 2],
}

/// Lamb-Dicke amplitudes ξ for every ion and mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainCoupling {
    /// `xi[ion][mode]`
    pub xi: Vec<Vec<f64>>,
    /// Mode driven by U pulses.
    pub bus: usize,
}

impl ChainCoupling {
    pub fn new(eta: f64, modes: &ModeSystem) -> Result<Self> {
        let xi = (0..modes.n_modes())
            .map(|s| LambDicke::new(eta, modes, s).map(|ld| ld.xi))
            .collect::<Result<_>>()?;
        Ok(ChainCoupling { xi, bus: 0 })
    }

    /// f({m},{n}) for ion `ion`.
    pub fn factor(&self, ion: usize, m: &[u32], n: &[u32]) -> Result<C64> {
        let mut f = C64::new(1.0, 0.0);
        for ((&mp, &np), &xi) in m.iter().zip(n).zip(&self.xi[ion]) {
            f *= displacement_element(mp, np, Xi::new(xi)?);
        }
        Ok(f)
    }
}

/// Applies `pulse` to ion `ion`. Pairs are (|0⟩|n⟩, |e⟩|n⟩) for V pulses
/// and (|0⟩|n + 1_bus⟩, |e⟩|n⟩) for U pulses, e = `pulse.excited_level`.
/// With a chain coupling each pair's angle and phase follow its phonon
/// factor relative to the reference pair (vacuum for V, one bus phonon for
/// U); without one every pair rotates by θ. Unpaired states pick up the
/// θ = 0 diagonal phases.
pub fn apply_pulse(
    state: &StateVector,
    pulse: &PulseSpec,
    ion: usize,
    coupling: Option<&ChainCoupling>,
) -> Result<StateVector> {
    if ion >= state.n_ions {
        return Err(Error::arg(format!("ion {ion} out of range for {} ions", state.n_ions)));
    }
    let e = pulse.excited_level;
    if e == 0 || e >= state.levels {
        return Err(Error::arg(format!(
            "excited level {e} out of range for {} internal levels",
            state.levels
        )));
    }
    let bus = coupling.map_or(0, |c| c.bus);
    if pulse.kind == PulseKind::U && bus >= state.n_modes {
        return Err(Error::arg("a U pulse needs at least one phonon mode"));
    }
    if let Some(c) = coupling {
        if c.xi.len() != state.n_ions || c.xi.iter().any(|x| x.len() != state.n_modes) {
            return Err(Error::arg("chain coupling does not match the register"));
        }
    }

    let (ref_m, ref_n) = match pulse.kind {
        PulseKind::V => (vec![0; state.n_modes], vec![0; state.n_modes]),
        PulseKind::U => {
            let mut m = vec![0; state.n_modes];
            m[bus] = 1;
            (m, vec![0; state.n_modes])
        }
    };
    let f_ref = match coupling {
        Some(c) => {
            let f = c.factor(ion, &ref_m, &ref_n)?;
            if f.norm() == 0.0 {
                return Err(Error::Singularity("reference pair has zero phonon coupling".into()));
            }
            Some(f)
        }
        None => None,
    };

    let mut out = state.clone();
    let idle = two_level_propagator(&PulseSpec { theta: 0.0, ..*pulse });
    let mut cache: BTreeMap<(Vec<u32>, Vec<u32>), Matrix2<C64>> = BTreeMap::new();

    for i in 0..state.dim() {
        let s = state.state_at(i);
        let level = s.internal[ion];
        if level == 0 {
            // |0⟩ partner is |e⟩ with one fewer bus phonon (U) or the same (V)
            let mut partner = s.clone();
            partner.internal[ion] = e;
            let has_partner = match pulse.kind {
                PulseKind::V => true,
                PulseKind::U => {
                    if partner.phonons[bus] == 0 {
                        false
                    } else {
                        partner.phonons[bus] -= 1;
                        true
                    }
                }
            };
            if !has_partner {
                out.amps[i] = idle[(0, 0)] * state.amps[i];
                continue;
            }
            let j = state.index_of(&partner)?;
            let u = match (coupling, f_ref) {
                (Some(c), Some(f_ref)) => {
                    let key = (s.phonons.clone(), partner.phonons.clone());
                    match cache.get(&key) {
                        Some(u) => *u,
                        None => {
                            let f = c.factor(ion, &s.phonons, &partner.phonons)?;
                            let u = two_level_propagator(&pulse.scaled(f.norm() / f_ref.norm(), f.arg() - f_ref.arg()));
                            cache.insert(key, u);
                            u
                        }
                    }
                }
                _ => two_level_propagator(pulse),
            };
            let (a0, a1) = (state.amps[i], state.amps[j]);
            out.amps[i] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            out.amps[j] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        } else if level == e {
            let mut partner = s.clone();
            partner.internal[ion] = 0;
            if pulse.kind == PulseKind::U {
                if s.phonons[bus] >= state.n_max {
                    if state.amps[i].norm() > OCCUPIED {
                        return Err(Error::Truncation(format!(
                            "{s} would need {} phonons in mode {bus}, beyond n_max = {}",
                            s.phonons[bus] + 1,
                            state.n_max
                        )));
                    }
                    out.amps[i] = idle[(1, 1)] * state.amps[i];
                }
                // paired states are written from the |0⟩ side
            }
        }
    }
    Ok(out)
}

/// Controlled-phase gate between `control` and `target` through the bus
/// mode: U π on the control, U 2π on the target through its
/// (|0⟩|1⟩, |aux⟩|0⟩) pair, U π on the control.
pub fn cz_gate_sequence(
    state: &StateVector,
    control: usize,
    target: usize,
    aux_level: u8,
    coupling: Option<&ChainCoupling>,
) -> Result<StateVector> {
    if control == target {
        return Err(Error::arg("control and target must be different ions"));
    }
    if control >= state.n_ions || target >= state.n_ions {
        return Err(Error::arg("control or target ion out of range"));
    }
    if aux_level < 2 || aux_level >= state.levels {
        return Err(Error::arg(format!(
            "auxiliary level {aux_level} needs a register with more than {aux_level} internal levels"
        )));
    }
    let bus = coupling.map_or(0, |c| c.bus);
    if state.n_modes == 0 {
        return Err(Error::arg("the gate needs a phonon bus mode"));
    }
    let excited = state.excited_population(bus);
    if excited > BUS_VACUUM_TOLERANCE {
        return Err(Error::Precondition(format!(
            "phonon bus must start in the vacuum; population {excited:.3e} is outside it"
        )));
    }
    let swap = PulseSpec::ideal(PulseKind::U, PI, 0.0);
    let loop_ = PulseSpec::ideal(PulseKind::U, 2.0 * PI, 0.0).on_level(aux_level);
    let s = apply_pulse(state, &swap, control, coupling)?;
    let s = apply_pulse(&s, &loop_, target, coupling)?;
    apply_pulse(&s, &swap, control, coupling)
}

/// Coupling of lower level `lower` to upper level `upper` by one beam.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamTerm {
    pub lower: usize,
    pub upper: usize,
    /// Ω^(a)_jk (rad/s).
    pub rabi: C64,
    /// Δ^(a)_jk = ω_k − ω_j − ω_a (rad/s).
    pub detuning: f64,
}

/// Lower amplitudes a_j and upper amplitudes b_k in the interaction picture.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiLevelSystem {
    pub lower: Vec<C64>,
    pub upper: Vec<C64>,
    pub terms: Vec<BeamTerm>,
    pub time: f64,
}

impl MultiLevelSystem {
    /// Builds the couplings from level energies, beam frequencies and a
    /// Rabi matrix per beam (rows: lower levels, columns: upper levels).
    pub fn new(
        lower_energies: &[f64],
        upper_energies: &[f64],
        beams: &[(f64, DMatrix<C64>)],
        lower: Vec<C64>,
    ) -> Result<Self> {
        if lower.len() != lower_energies.len() {
            return Err(Error::arg("initial amplitudes do not match the lower levels"));
        }
        let mut terms = Vec::new();
        for (freq, rabi) in beams {
            if rabi.nrows() != lower_energies.len() || rabi.ncols() != upper_energies.len() {
                return Err(Error::arg("Rabi matrix shape does not match the level counts"));
            }
            for (j, wj) in lower_energies.iter().enumerate() {
                for (k, wk) in upper_energies.iter().enumerate() {
                    let r = rabi[(j, k)];
                    if r != C64::new(0.0, 0.0) {
                        terms.push(BeamTerm { lower: j, upper: k, rabi: r, detuning: wk - wj - freq });
                    }
                }
            }
        }
        Ok(MultiLevelSystem {
            lower,
            upper: vec![C64::new(0.0, 0.0); upper_energies.len()],
            terms,
            time: 0.0,
        })
    }

    /// Three-level Λ system: the pump couples |I⟩ and the Stokes beam |J⟩ to
    /// one upper level, both detuned by `detuning`, two-photon detuning
    /// `delta`.
    pub fn lambda(pump: C64, stokes: C64, detuning: f64, delta: f64, lower: [C64; 2]) -> Self {
        MultiLevelSystem {
            lower: lower.to_vec(),
            upper: vec![C64::new(0.0, 0.0)],
            terms: vec![
                BeamTerm { lower: 0, upper: 0, rabi: pump, detuning: detuning - delta / 2.0 },
                BeamTerm { lower: 1, upper: 0, rabi: stokes, detuning: detuning + delta / 2.0 },
            ],
            time: 0.0,
        }
    }

    /// Full system behind a Raman coupling, including the off-resonant
    /// cross couplings (Stokes on |I⟩, pump on |J⟩). `splitting` is
    /// ω_J − ω_I.
    pub fn from_coupling(coupling: &RamanCoupling, splitting: f64, lower: [C64; 2]) -> Self {
        let delta = coupling.delta;
        let diff = splitting + delta; // ω_p − ω_s
        let mut terms = Vec::new();
        for (k, l) in coupling.levels.iter().enumerate() {
            let pump_i = l.detuning - delta / 2.0;
            let stokes_j = l.detuning + delta / 2.0;
            for (lower, rabi, det) in [
                (0, l.pump_i, pump_i),
                (0, l.stokes_i, pump_i + diff),
                (1, l.pump_j, stokes_j - diff),
                (1, l.stokes_j, stokes_j),
            ] {
                if rabi != C64::new(0.0, 0.0) {
                    terms.push(BeamTerm { lower, upper: k, rabi, detuning: det });
                }
            }
        }
        MultiLevelSystem {
            lower: lower.to_vec(),
            upper: vec![C64::new(0.0, 0.0); coupling.levels.len()],
            terms,
            time: 0.0,
        }
    }

    pub fn max_detuning(&self) -> f64 {
        self.terms.iter().map(|t| t.detuning.abs()).fold(0.0, f64::max)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.lower.iter().chain(&self.upper).map(|a| a.norm_sqr()).sum()
    }

    pub fn upper_population(&self) -> f64 {
        self.upper.iter().map(|a| a.norm_sqr()).sum()
    }

    fn pack(&self) -> Vec<C64> {
        self.lower.iter().chain(&self.upper).copied().collect()
    }

    fn with_packed(&self, y: &[C64], time: f64) -> Self {
        let nl = self.lower.len();
        MultiLevelSystem {
            lower: y[..nl].to_vec(),
            upper: y[nl..].to_vec(),
            terms: self.terms.clone(),
            time,
        }
    }

    /// ȧ_j = (i/2) Σ Ω_jk e^{−iΔ_jk t} b_k, ḃ_k = (i/2) Σ Ω*_jk e^{iΔ_jk t} a_j.
    fn rhs(&self) -> impl FnMut(f64, &[C64], &mut [C64]) + '_ {
        let nl = self.lower.len();
        let t0 = self.time;
        move |t, y, dy| {
            dy.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
            for term in &self.terms {
                let phase = C64::from_polar(0.5, -term.detuning * (t0 + t));
                let k = nl + term.upper;
                dy[term.lower] += C64::i() * term.rabi * phase * y[k];
                dy[k] += C64::i() * (term.rabi * phase).conj() * y[term.lower];
            }
        }
    }
}

/// Integrates the full equations for a time `t` with initial step `dt`.
/// Requires dt·max|Δ| ≤ 0.1.
pub fn integrate_full(system: &MultiLevelSystem, t: f64, dt: f64) -> Result<MultiLevelSystem> {
    let opts = Options { initial_step: Some(dt), ..Options::default() };
    integrate_full_sampled(system, &[t], dt, &opts).map(|mut v| v.pop().expect("one sample"))
}

/// Like [`integrate_full`] but returns the system at each time in `times`
/// (measured from `system.time`, ascending).
pub fn integrate_full_sampled(
    system: &MultiLevelSystem,
    times: &[f64],
    dt: f64,
    opts: &Options,
) -> Result<Vec<MultiLevelSystem>> {
    if !(dt > 0.0) {
        return Err(Error::arg("time step must be positive"));
    }
    if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::arg("integration times must be non-negative"));
    }
    let max_det = system.max_detuning();
    if dt * max_det > 0.1 {
        return Err(Error::Precondition(format!(
            "time step {dt:.3e} s does not resolve the largest detuning {max_det:.3e} rad/s (dt·|Δ| = {:.3} > 0.1)",
            dt * max_det
        )));
    }
    let opts = Options { initial_step: opts.initial_step.or(Some(dt)), ..*opts };
    let (ys, _) = integrator::integrate(system.rhs(), 0.0, &system.pack(), times, &opts)?;
    Ok(ys
        .iter()
        .zip(times)
        .map(|(y, &t)| system.with_packed(y, system.time + t))
        .collect())
}

/// Result of comparing the full integration with the closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EliminationCheck {
    /// Largest |P_full − P_closed| over the lower levels and sample times.
    pub max_population_error: f64,
    /// Largest upper-manifold population seen at the samples.
    pub max_upper_population: f64,
    /// Largest |norm² − 1| seen at the samples.
    pub max_norm_drift: f64,
    /// Pulse duration (s).
    pub duration: f64,
}

/// Runs the Λ system with equal single-photon Rabi frequencies `rabi` and
/// detuning `rabi·ratio` from |I⟩ for a θ = π pulse and compares the
/// lower-level populations with the two-level propagator at `samples`
/// evenly spaced times.
pub fn adiabatic_elimination_check(
    rabi: f64,
    ratio: f64,
    samples: usize,
    opts: &Options,
) -> Result<EliminationCheck> {
    if samples == 0 {
        return Err(Error::arg("need at least one sample"));
    }
    let detuning = rabi * ratio;
    let coupling = RamanCoupling::lambda(C64::from(rabi), C64::from(rabi), detuning);
    let shifts = crate::raman::stark_shifts(&coupling)?;
    let pulse = PulseSpec::from_coupling(PulseKind::V, PI, &shifts, C64::new(1.0, 0.0))?;
    let delta = shifts.a - shifts.d;
    let system = MultiLevelSystem::lambda(
        C64::from(rabi),
        C64::from(rabi),
        detuning,
        delta,
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    );
    let times: Vec<f64> = (1..=samples).map(|i| pulse.duration * i as f64 / samples as f64).collect();
    let dt = 0.05 / system.max_detuning();
    let snapshots = integrate_full_sampled(&system, &times, dt, opts)?;

    let mut check = EliminationCheck {
        max_population_error: 0.0,
        max_upper_population: 0.0,
        max_norm_drift: 0.0,
        duration: pulse.duration,
    };
    for (snap, &t) in snapshots.iter().zip(&times) {
        let partial = PulseSpec {
            theta: pulse.theta * t / pulse.duration,
            duration: t,
            chi: pulse.chi * t / pulse.duration,
            common_phase: pulse.common_phase * t / pulse.duration,
            ..pulse
        };
        let u = two_level_propagator(&partial);
        let closed = [u[(0, 0)].norm_sqr(), u[(1, 0)].norm_sqr()];
        for (a, p) in snap.lower.iter().zip(closed) {
            check.max_population_error = check.max_population_error.max((a.norm_sqr() - p).abs());
        }
        check.max_upper_population = check.max_upper_population.max(snap.upper_population());
        check.max_norm_drift = check.max_norm_drift.max((snap.norm_sqr() - 1.0).abs());
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raman::stark_shifts;
    use crate::trapmodes::modes_for;
    use approx::assert_abs_diff_eq;

    fn vac_state(bits: &[u8], n_modes: usize) -> StateVector {
        StateVector::computational(bits, n_modes, DEFAULT_N_MAX, 2).unwrap()
    }

    fn bs(label: &str) -> BasisState {
        label.parse().unwrap()
    }

    #[test]
    fn propagator_special_angles() {
        let id = two_level_propagator(&PulseSpec::ideal(PulseKind::V, 0.0, 0.3));
        assert_abs_diff_eq!((id - Matrix2::identity()).norm(), 0.0, epsilon = 1e-15);

        let swap = two_level_propagator(&PulseSpec::ideal(PulseKind::V, PI, 0.0));
        assert_abs_diff_eq!(swap[(1, 0)].norm_sqr(), 1.0, epsilon = 1e-15);

        let p = PulseSpec { chi: 0.2, common_phase: 0.7, ..PulseSpec::ideal(PulseKind::V, 2.0 * PI, 0.4) };
        let u = two_level_propagator(&p);
        let g = C64::from_polar(1.0, 0.7);
        assert_abs_diff_eq!((u[(0, 0)] + g * C64::from_polar(1.0, 0.2)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((u[(1, 1)] + g * C64::from_polar(1.0, -0.2)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn propagator_solves_effective_hamiltonian() {
        // integrate ∂ₜa = iH(t)a with δ = A − D and compare with the closed form
        let shifts = StarkShifts {
            a: 2.0e5,
            d: -1.1e5,
            b: C64::from_polar(3.0e5, 0.8),
            b_reverse: C64::from_polar(3.0e5, -0.8),
            delta: 3.1e5,
        };
        let pulse = PulseSpec::from_coupling(PulseKind::V, 1.3 * PI, &shifts, C64::new(1.0, 0.0)).unwrap();
        for a0 in [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]] {
            let (ys, _) = integrator::integrate(
                |t, y, dy| {
                    let h = shifts.effective_hamiltonian(t);
                    dy[0] = C64::i() * (h[(0, 0)] * y[0] + h[(0, 1)] * y[1]);
                    dy[1] = C64::i() * (h[(1, 0)] * y[0] + h[(1, 1)] * y[1]);
                },
                0.0,
                &a0,
                &[pulse.duration],
                &Options { atol: 1e-14, rtol: 1e-14, ..Options::default() },
            )
            .unwrap();
            let u = two_level_propagator(&pulse);
            let closed = [u[(0, 0)] * a0[0] + u[(0, 1)] * a0[1], u[(1, 0)] * a0[0] + u[(1, 1)] * a0[1]];
            for (y, c) in ys[0].iter().zip(closed) {
                assert_abs_diff_eq!((y - c).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn stark_phase_is_linear_in_time() {
        let shifts = StarkShifts {
            a: 4.0e4,
            d: 1.0e4,
            b: C64::new(2.0e5, 0.0),
            b_reverse: C64::new(2.0e5, 0.0),
            delta: 3.0e4,
        };
        let full = PulseSpec::from_coupling(PulseKind::V, PI, &shifts, C64::new(1.0, 0.0)).unwrap();
        let half = PulseSpec::from_coupling(PulseKind::V, PI / 2.0, &shifts, C64::new(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(half.chi, full.chi / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(full.duration, PI / (2.0 * 2.0e5), epsilon = 1e-18);
    }

    #[test]
    fn composition_of_pulses() {
        for (t1, t2, phi) in [(0.3, 1.1, 0.0), (PI / 2.0, PI / 2.0, 1.2), (2.0, 4.5, -0.7)] {
            let u1 = two_level_propagator(&PulseSpec::ideal(PulseKind::V, t1, phi));
            let u2 = two_level_propagator(&PulseSpec::ideal(PulseKind::V, t2, phi));
            let u12 = two_level_propagator(&PulseSpec::ideal(PulseKind::V, t1 + t2, phi));
            assert_abs_diff_eq!((u2 * u1 - u12).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn labels_round_trip() {
        let v = StateVector::zeros(2, 3, 3, 4).unwrap();
        for i in 0..v.dim() {
            let s = v.state_at(i);
            assert_eq!(v.index_of(&s).unwrap(), i);
            assert_eq!(s.to_string().parse::<BasisState>().unwrap(), s);
        }
        assert_eq!(bs("q:01|ph:100").to_string(), "q:01|ph:100");
        assert!("q01|ph:1".parse::<BasisState>().is_err());
        assert!(v.index_of(&bs("q:01|ph:500")).is_err());
    }

    #[test]
    fn v_pi_pulse_flips_qubit() {
        let phi = 0.6;
        let s = vac_state(&[0], 1);
        let out = apply_pulse(&s, &PulseSpec::ideal(PulseKind::V, PI, phi), 0, None).unwrap();
        let a = out.amplitude(&bs("q:1|ph:0")).unwrap();
        assert_abs_diff_eq!((a - C64::i() * C64::from_polar(1.0, -phi)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn u_pi_pulse_moves_phonon_into_qubit() {
        let phi = -0.4;
        let s = StateVector::basis(1, 2, 1, 4, &bs("q:0|ph:1")).unwrap();
        let out = apply_pulse(&s, &PulseSpec::ideal(PulseKind::U, PI, phi), 0, None).unwrap();
        let a = out.amplitude(&bs("q:1|ph:0")).unwrap();
        assert_abs_diff_eq!((a - C64::i() * C64::from_polar(1.0, -phi)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn u_pulse_leaves_unpaired_state() {
        let s = vac_state(&[0], 1);
        let out = apply_pulse(&s, &PulseSpec::ideal(PulseKind::U, PI, 0.3), 0, None).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn u_pulse_truncation_error() {
        let s = StateVector::basis(1, 2, 1, 2, &bs("q:1|ph:2")).unwrap();
        let r = apply_pulse(&s, &PulseSpec::ideal(PulseKind::U, PI, 0.0), 0, None);
        assert!(matches!(r, Err(Error::Truncation(_))));
    }

    #[test]
    fn eta_dependent_sideband_rates() {
        let modes = modes_for(1).unwrap();
        let c = ChainCoupling::new(0.1, &modes).unwrap();
        // |0⟩|2⟩ ↔ |1⟩|1⟩ rotates faster than the reference pair by ≈ √2
        let s = StateVector::basis(1, 2, 1, 4, &bs("q:0|ph:2")).unwrap();
        let pulse = PulseSpec::ideal(PulseKind::U, PI / 4.0, 0.0);
        let out = apply_pulse(&s, &pulse, 0, Some(&c)).unwrap();
        let f_ref = c.factor(0, &[1], &[0]).unwrap();
        let f = c.factor(0, &[2], &[1]).unwrap();
        let theta = PI / 4.0 * f.norm() / f_ref.norm();
        assert_abs_diff_eq!(out.amplitude(&bs("q:1|ph:1")).unwrap().norm(), (theta / 2.0).sin(), epsilon = 1e-14);
        assert!((f.norm() / f_ref.norm() - 2f64.sqrt()).abs() < 0.05);
    }

    fn cz_input(bits: [u8; 2]) -> StateVector {
        StateVector::computational(&bits, 2, DEFAULT_N_MAX, 3).unwrap()
    }

    #[test]
    fn cz_truth_table() {
        let modes = modes_for(2).unwrap();
        let c = ChainCoupling::new(0.1, &modes).unwrap();
        let mut phases = [0.0; 4];
        for (k, bits) in [[0, 0], [0, 1], [1, 0], [1, 1]].into_iter().enumerate() {
            let input = cz_input(bits);
            let out = cz_gate_sequence(&input, 0, 1, 2, Some(&c)).unwrap();
            let overlap = input.inner(&out).unwrap();
            assert_abs_diff_eq!(overlap.norm_sqr(), 1.0, epsilon = 1e-12);
            assert!(out.excited_population(0) < 1e-12);
            phases[k] = overlap.arg();
        }
        let conditional = phases[3] - phases[2] - phases[1] + phases[0];
        assert_abs_diff_eq!(C64::from_polar(1.0, conditional).re, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn cz_is_an_involution() {
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let input = cz_input(bits);
            let once = cz_gate_sequence(&input, 0, 1, 2, None).unwrap();
            let twice = cz_gate_sequence(&once, 0, 1, 2, None).unwrap();
            assert!(1.0 - input.inner(&twice).unwrap().norm_sqr() < 1e-8);
        }
    }

    #[test]
    fn cz_requires_vacuum_bus() {
        let s = StateVector::basis(2, 3, 2, 4, &bs("q:10|ph:10")).unwrap();
        assert!(matches!(cz_gate_sequence(&s, 0, 1, 2, None), Err(Error::Precondition(_))));
        let two_level = vac_state(&[1, 1], 2);
        assert!(cz_gate_sequence(&two_level, 0, 1, 2, None).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut s = cz_input([1, 0]);
        s = apply_pulse(&s, &PulseSpec::ideal(PulseKind::U, PI / 3.0, 0.2), 0, None).unwrap();
        let text = s.to_json().unwrap();
        let back = StateVector::from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn zero_fields_leave_state_unchanged() {
        let sys = MultiLevelSystem::lambda(
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            1e9,
            0.0,
            [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
        );
        let out = integrate_full(&sys, 1e-6, 1e-11).unwrap();
        assert_eq!(out.lower, sys.lower);
        assert_eq!(out.upper, sys.upper);
    }

    #[test]
    fn integrate_full_checks_step() {
        let sys = MultiLevelSystem::lambda(
            C64::new(1e6, 0.0),
            C64::new(1e6, 0.0),
            1e9,
            0.0,
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(matches!(integrate_full(&sys, 1e-6, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn full_integration_matches_closed_form() {
        let check = adiabatic_elimination_check(1.0, 100.0, 200, &Options::default()).unwrap();
        assert!(check.max_population_error <= 1e-3, "{check:?}");
        assert!(check.max_upper_population <= 2.5 * 1e-4, "{check:?}");
        assert!(check.max_norm_drift <= 1e-8, "{check:?}");
    }

    #[test]
    fn from_coupling_reduces_to_lambda() {
        let c = RamanCoupling::lambda(C64::new(2.0, 0.0), C64::new(2.0, 0.0), 300.0);
        let sys = MultiLevelSystem::from_coupling(&c, 50.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let lambda = MultiLevelSystem::lambda(C64::new(2.0, 0.0), C64::new(2.0, 0.0), 300.0, 0.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(sys.terms, lambda.terms);
        let s = stark_shifts(&c).unwrap();
        assert_abs_diff_eq!(s.a, 4.0 / 1200.0, epsilon = 1e-15);
    }
}
