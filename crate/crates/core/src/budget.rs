//! Laser power estimates, the sideband-cooling trap-frequency bound and the
//! ground-state Zeeman splitting.

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atomic::{AtomicData, Constants};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerMode {
    /// One laser driving a carrier transition directly.
    SingleLaserV,
    RamanV,
    RamanU,
    /// Saturation power of a single laser.
    Saturation,
}

impl FromStr for PowerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-laser-v" => Ok(PowerMode::SingleLaserV),
            "raman-v" => Ok(PowerMode::RamanV),
            "raman-u" => Ok(PowerMode::RamanU),
            "saturation" => Ok(PowerMode::Saturation),
            _ => Err(Error::arg(format!("unknown power mode {s:?}"))),
        }
    }
}

impl fmt::Display for PowerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerMode::SingleLaserV => "single-laser-v",
            PowerMode::RamanV => "raman-v",
            PowerMode::RamanU => "raman-u",
            PowerMode::Saturation => "saturation",
        })
    }
}

/// Inputs of one power estimate. Frequencies are angular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerScenario {
    pub mode: PowerMode,
    /// Ω (rad/s); unused for saturation.
    pub rabi: Option<f64>,
    /// Δ (rad/s); Raman modes only.
    pub detuning: Option<f64>,
    /// λ (m).
    pub wavelength: f64,
    /// τ (s).
    pub lifetime: f64,
    /// Beam diameter d (m).
    pub diameter: f64,
    /// η; Raman U only.
    pub eta: Option<f64>,
    /// N; Raman U only.
    pub n_ions: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::arg(format!("{name} must be positive, got {v}")))
    }
}

fn required(name: &str, mode: PowerMode, v: Option<f64>) -> Result<f64> {
    positive(name, v.ok_or_else(|| Error::arg(format!("{mode} power needs {name}")))?)
}

/// Laser power for the scenario (W):
/// single-laser V: Ω²hcd²τ/λ³; Raman V: ΩΔhcd²τ/λ³; Raman U: Raman V × √N/η;
/// saturation: 4hcd²/(τλ³).
pub fn required_power(sc: &PowerScenario, consts: &Constants) -> Result<f64> {
    let lambda = positive("wavelength", sc.wavelength)?;
    let tau = positive("lifetime", sc.lifetime)?;
    let d = positive("beam diameter", sc.diameter)?;
    let base = consts.h * consts.c * d * d / lambda.powi(3);
    match sc.mode {
        PowerMode::SingleLaserV => {
            let rabi = required("Rabi frequency", sc.mode, sc.rabi)?;
            Ok(rabi * rabi * base * tau)
        }
        PowerMode::RamanV => {
            let rabi = required("Rabi frequency", sc.mode, sc.rabi)?;
            let det = required("detuning", sc.mode, sc.detuning)?;
            Ok(rabi * det * base * tau)
        }
        PowerMode::RamanU => {
            let rabi = required("Rabi frequency", sc.mode, sc.rabi)?;
            let det = required("detuning", sc.mode, sc.detuning)?;
            let eta = required("Lamb-Dicke parameter", sc.mode, sc.eta)?;
            if eta >= 1.0 {
                return Err(Error::arg(format!("Lamb-Dicke parameter must be below 1, got {eta}")));
            }
            let n = sc.n_ions.ok_or_else(|| Error::arg("raman-u power needs the ion count"))?;
            if n == 0 {
                return Err(Error::arg("ion count must be at least 1"));
            }
            Ok(rabi * det * base * tau * (n as f64).sqrt() / eta)
        }
        PowerMode::Saturation => Ok(4.0 * base / tau),
    }
}

/// Lower bound on ω_x for sideband cooling to n̄ with N ions:
/// n̄ (ħk²/2M) / N (rad/s).
pub fn sideband_bound(n_ions: usize, nbar: f64, wavelength: f64, mass: f64, consts: &Constants) -> Result<f64> {
    if n_ions == 0 {
        return Err(Error::arg("ion count must be at least 1"));
    }
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::arg(format!("mean phonon number must be non-negative, got {nbar}")));
    }
    positive("wavelength", wavelength)?;
    positive("mass", mass)?;
    Ok(nbar * recoil_frequency(wavelength, mass, consts) / n_ions as f64)
}

/// ħk²/2M (rad/s).
pub fn recoil_frequency(wavelength: f64, mass: f64, consts: &Constants) -> f64 {
    let k = TAU / wavelength;
    consts.hbar * k * k / (2.0 * mass)
}

/// Splitting μ_B B/ħ (rad/s) for a field in gauss.
pub fn zeeman_splitting(gauss: f64, consts: &Constants) -> Result<f64> {
    if !(gauss >= 0.0 && gauss.is_finite()) {
        return Err(Error::arg(format!("magnetic field must be non-negative, got {gauss}")));
    }
    Ok(consts.mu_b * gauss * 1e-4 / consts.hbar)
}

/// One way a laser is used, with the scenario setting its power.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaserRole {
    /// Transition name in the atomic data.
    pub transition: String,
    pub role: String,
    pub scenario: PowerScenario,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub transition: String,
    /// λ (nm).
    pub wavelength_nm: f64,
    /// W.
    pub power: f64,
    /// Bandwidth requirement from the atomic data (rad/s).
    pub bandwidth: f64,
    /// Role that needs the most power.
    pub driving_role: String,
}

/// Shared parameters of the standard budget. Frequencies are angular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    pub rabi: f64,
    pub detuning: f64,
    pub eta: f64,
    pub n_ions: usize,
    /// Diameter of beams addressing single ions (m).
    pub addressing_diameter: f64,
    /// Diameter of beams covering the whole chain (m).
    pub global_diameter: f64,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams {
            rabi: TAU * 1.0e6,
            detuning: TAU * 10.0e9,
            eta: 0.1,
            n_ions: 10,
            addressing_diameter: 10e-6,
            global_diameter: 100e-6,
        }
    }
}

/// The roles of the 397, 866 and 729 nm lasers: Raman logic (U and V,
/// addressed), sideband cooling (U, global), Doppler cooling and
/// repumping at saturation, and shelving on the quadrupole line.
pub fn standard_roles(data: &AtomicData, p: &BudgetParams) -> Result<Vec<LaserRole>> {
    let t397 = data.transition("397")?;
    let t866 = data.transition("866")?;
    let t729 = data.transition("729")?;
    let raman = |mode, d| PowerScenario {
        mode,
        rabi: Some(p.rabi),
        detuning: Some(p.detuning),
        wavelength: t397.wavelength,
        lifetime: t397.lifetime,
        diameter: d,
        eta: Some(p.eta),
        n_ions: Some(p.n_ions),
    };
    let saturation = |t: &crate::atomic::Transition| PowerScenario {
        mode: PowerMode::Saturation,
        rabi: None,
        detuning: None,
        wavelength: t.wavelength,
        lifetime: t.lifetime,
        diameter: p.global_diameter,
        eta: None,
        n_ions: None,
    };
    let role = |t: &crate::atomic::Transition, name: &str, scenario| LaserRole {
        transition: t.name.clone(),
        role: name.to_string(),
        scenario,
    };
    Ok(vec![
        role(t397, "logic U", raman(PowerMode::RamanU, p.addressing_diameter)),
        role(t397, "logic V", raman(PowerMode::RamanV, p.addressing_diameter)),
        role(t397, "sideband cooling U", raman(PowerMode::RamanU, p.global_diameter)),
        role(t397, "Doppler cooling", saturation(t397)),
        role(t866, "repump", saturation(t866)),
        role(
            t729,
            "shelving V",
            PowerScenario {
                mode: PowerMode::SingleLaserV,
                rabi: Some(p.rabi),
                detuning: None,
                wavelength: t729.wavelength,
                lifetime: t729.lifetime,
                diameter: p.global_diameter,
                eta: None,
                n_ions: None,
            },
        ),
    ])
}

/// One row per transition with at least one role, in atomic-data order,
/// holding the largest power over that transition's roles.
pub fn budget_table(data: &AtomicData, roles: &[LaserRole]) -> Result<Vec<BudgetRow>> {
    let mut rows = Vec::new();
    for t in &data.transitions {
        let mut best: Option<(f64, &str)> = None;
        for r in roles.iter().filter(|r| r.transition == t.name) {
            let p = required_power(&r.scenario, &data.constants)?;
            let better = match best {
                None => true,
                Some((bp, bname)) => match p.total_cmp(&bp) {
                    Ordering::Greater => true,
                    Ordering::Equal => r.role.as_str() < bname,
                    Ordering::Less => false,
                },
            };
            if better {
                best = Some((p, &r.role));
            }
        }
        if let Some((power, role)) = best {
            rows.push(BudgetRow {
                transition: t.name.clone(),
                wavelength_nm: t.wavelength * 1e9,
                power,
                bandwidth: t.bandwidth,
                driving_role: role.to_string(),
            });
        }
    }
    if let Some(r) = roles.iter().find(|r| data.transitions.iter().all(|t| t.name != r.transition)) {
        return Err(Error::Data(format!("role {:?} names unknown transition {:?}", r.role, r.transition)));
    }
    Ok(rows)
}
