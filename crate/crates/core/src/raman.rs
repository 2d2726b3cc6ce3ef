//! Raman coupling: single-photon Rabi frequencies, AC Stark shifts, the
//! effective two-photon Rabi frequency, Lamb-Dicke factors and the phonon
//! coupling factor f({m},{n},η).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomic::{Constants, LevelState, Manifold, Transition};
use crate::error::{Error, Result};
use crate::specfun::{displacement_element, wigner3j, HalfInt, Xi};
use crate::trapmodes::{modes_for, ModeSystem, TrapConfig};

/// Above this |Ω/Δ̄| the adiabatic elimination is no longer trustworthy.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;
/// Above this ω_x / min|Δ̄| phonon energies in the denominators matter.
pub const PHONON_DENOMINATOR_LIMIT: f64 = 1e-2;

/// Spherical basis vector ε_q for q ∈ {−1, 0, 1}:
/// ε₊₁ = (−1, i, 0)/√2, ε₀ = (0, 0, 1), ε₋₁ = (1, i, 0)/√2.
pub fn spherical_basis(q: i32) -> Vector3<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        1 => Vector3::new(C64::new(-r, 0.0), C64::new(0.0, r), C64::new(0.0, 0.0)),
        0 => Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        -1 => Vector3::new(C64::new(r, 0.0), C64::new(0.0, r), C64::new(0.0, 0.0)),
        _ => panic!("spherical index out of range: {q}"),
    }
}

/// Bilinear (non-conjugating) dot product.
fn bdot(a: &Vector3<C64>, b: &Vector3<C64>) -> C64 {
    a.x * b.x + a.y * b.y + a.z * b.z
}

/// Unit polarization vector, stored in Cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct Polarization(Vector3<C64>);

impl Polarization {
    pub fn sigma_plus() -> Self {
        Polarization(spherical_basis(1))
    }

    pub fn sigma_minus() -> Self {
        Polarization(spherical_basis(-1))
    }

    pub fn pi() -> Self {
        Polarization(spherical_basis(0))
    }

    pub fn from_cartesian(v: Vector3<C64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::arg("polarization vector must be non-zero"));
        }
        Ok(Polarization(v / C64::from(norm)))
    }

    /// Builds Σ_q c_q ε_q from components `[c₊₁, c₀, c₋₁]` and normalises.
    pub fn from_spherical(c: [C64; 3]) -> Result<Self> {
        let v = spherical_basis(1) * c[0] + spherical_basis(0) * c[1] + spherical_basis(-1) * c[2];
        Self::from_cartesian(v)
    }

    pub fn cartesian(&self) -> &Vector3<C64> {
        &self.0
    }

    pub fn conj(&self) -> Self {
        Polarization(self.0.map(|z| z.conj()))
    }

    /// ε_q · ε, the factor entering the dipole matrix element.
    pub fn projection(&self, q: i32) -> C64 {
        bdot(&spherical_basis(q), &self.0)
    }
}

impl FromStr for Polarization {
    type Err = Error;

    /// `sigma+`, `sigma-`, `pi`, or an explicit spherical triple
    /// `re,im;re,im;re,im` ordered (+1, 0, −1).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma+" | "s+" | "σ+" => Ok(Self::sigma_plus()),
            "sigma-" | "s-" | "σ-" => Ok(Self::sigma_minus()),
            "pi" | "π" => Ok(Self::pi()),
            other => {
                let parts: Vec<&str> = other.split(';').collect();
                if parts.len() != 3 {
                    return Err(Error::arg(format!("cannot parse polarization {s:?}")));
                }
                let mut c = [C64::new(0.0, 0.0); 3];
                for (slot, part) in c.iter_mut().zip(parts) {
                    let nums: Vec<f64> = part
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::arg(format!("cannot parse polarization {s:?}")))?;
                    *slot = match nums.as_slice() {
                        [re] => C64::new(*re, 0.0),
                        [re, im] => C64::new(*re, *im),
                        _ => return Err(Error::arg(format!("cannot parse polarization {s:?}"))),
                    };
                }
                Self::from_spherical(c)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamRole {
    Pump,
    Stokes,
}

impl fmt::Display for BeamRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BeamRole::Pump => "pump",
            BeamRole::Stokes => "stokes",
        })
    }
}

/// Peak field of a TEM00 beam of power `power` and 1/e² intensity diameter
/// `diameter`: E₀² = 64 P α ħ / (e² d²).
pub fn field_amplitude_from_power(power: f64, diameter: f64, consts: &Constants) -> f64 {
    (64.0 * power * consts.alpha * consts.hbar / (consts.e * consts.e * diameter * diameter)).sqrt()
}

/// A classical plane-wave beam.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserBeam {
    pub role: BeamRole,
    /// Optical angular frequency (rad/s).
    pub frequency: f64,
    /// Peak field amplitude E₀ (V/m).
    pub amplitude: f64,
    pub power: Option<f64>,
    pub diameter: Option<f64>,
    pub polarization: Polarization,
    /// Unit propagation direction.
    pub direction: Vector3<f64>,
    /// Optical phase (rad).
    pub phase: f64,
}

impl LaserBeam {
    pub fn new(
        role: BeamRole,
        frequency: f64,
        amplitude: f64,
        polarization: Polarization,
        direction: Vector3<f64>,
    ) -> Result<Self> {
        if !(frequency > 0.0) {
            return Err(Error::arg(format!("{role} frequency must be positive")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::arg(format!("{role} amplitude must be non-negative")));
        }
        let norm = direction.norm();
        if !(norm > 0.0) {
            return Err(Error::arg(format!("{role} direction must be non-zero")));
        }
        Ok(LaserBeam {
            role,
            frequency,
            amplitude,
            power: None,
            diameter: None,
            polarization,
            direction: direction / norm,
            phase: 0.0,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_power(
        role: BeamRole,
        frequency: f64,
        power: f64,
        diameter: f64,
        polarization: Polarization,
        direction: Vector3<f64>,
        consts: &Constants,
    ) -> Result<Self> {
        if !(power >= 0.0) {
            return Err(Error::arg(format!("{role} power must be non-negative")));
        }
        if !(diameter > 0.0) {
            return Err(Error::arg(format!("{role} beam diameter must be positive")));
        }
        let amplitude = field_amplitude_from_power(power, diameter, consts);
        let mut beam = Self::new(role, frequency, amplitude, polarization, direction)?;
        beam.power = Some(power);
        beam.diameter = Some(diameter);
        Ok(beam)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn complex_amplitude(&self) -> C64 {
        C64::from_polar(self.amplitude, self.phase)
    }

    pub fn wavevector(&self, consts: &Constants) -> Vector3<f64> {
        self.direction * (self.frequency / consts.c)
    }
}

/// ⟨ν| d̂·ε |λ⟩ / e for lower sublevel ν and upper sublevel λ, in metres:
/// √(3A(2J_λ+1)/(4cαk³)) Σ_q 3j(J_ν 1 J_λ; −m_ν q m_λ) ε_q·ε.
pub fn dipole_element(
    lower: &LevelState,
    upper: &LevelState,
    pol: &Polarization,
    trans: &Transition,
    consts: &Constants,
) -> Result<C64> {
    if lower.manifold != Manifold::Lower {
        return Err(Error::arg(format!("{lower} is not in the lower manifold")));
    }
    if upper.manifold != Manifold::Upper {
        return Err(Error::arg(format!("{upper} is not in the upper manifold")));
    }
    let k = trans.wavenumber();
    let two_j = f64::from(upper.j.twice() + 1);
    let scale = (3.0 * trans.decay_rate() * two_j / (4.0 * consts.c * consts.alpha * k.powi(3))).sqrt();
    Ok(angular_sum(lower, upper, pol)? * scale)
}

/// Σ_q 3j(J_ν 1 J_λ; −m_ν q m_λ) ε_q·ε.
fn angular_sum(lower: &LevelState, upper: &LevelState, pol: &Polarization) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for q in -1..=1 {
        let w = wigner3j(lower.j, HalfInt::ONE, upper.j, -lower.mj, HalfInt::from_int(q), upper.mj)?;
        if w != 0.0 {
            sum += pol.projection(q) * w;
        }
    }
    Ok(sum)
}

/// Single-photon Rabi frequency Ω = e⟨ν|d̂·ε|λ⟩E₀/ħ (rad/s).
pub fn single_photon_rabi(
    lower: &LevelState,
    upper: &LevelState,
    beam: &LaserBeam,
    trans: &Transition,
    consts: &Constants,
) -> Result<C64> {
    let d = dipole_element(lower, upper, &beam.polarization, trans, consts)?;
    Ok(d * beam.complex_amplitude() * (consts.e / consts.hbar))
}

/// Couplings of |I⟩ and |J⟩ to one upper level k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperCoupling {
    /// Ω^(p)_Ik
    pub pump_i: C64,
    /// Ω^(s)_Ik
    pub stokes_i: C64,
    /// Ω^(p)_Jk
    pub pump_j: C64,
    /// Ω^(s)_Jk
    pub stokes_j: C64,
    /// Δ̄_k (rad/s)
    pub detuning: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RamanCoupling {
    pub levels: Vec<UpperCoupling>,
    /// Pump–Stokes frequency difference minus the |I⟩–|J⟩ splitting (rad/s).
    pub delta: f64,
}

impl RamanCoupling {
    /// One upper level with symmetric pump/Stokes couplings as in the
    /// textbook Λ system: pump couples only I, Stokes only J.
    pub fn lambda(pump: C64, stokes: C64, detuning: f64) -> Self {
        RamanCoupling {
            levels: vec![UpperCoupling {
                pump_i: pump,
                stokes_i: C64::new(0.0, 0.0),
                pump_j: C64::new(0.0, 0.0),
                stokes_j: stokes,
                detuning,
            }],
            delta: 0.0,
        }
    }

    fn check_detunings(&self) -> Result<()> {
        match self.levels.iter().position(|l| l.detuning == 0.0) {
            Some(k) => Err(Error::Singularity(format!(
                "intermediate level {k} is driven on resonance (Δ̄ = 0)"
            ))),
            None => Ok(()),
        }
    }

    pub fn min_abs_detuning(&self) -> f64 {
        self.levels.iter().map(|l| l.detuning.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Warnings for couplings outside the perturbative regime.
    pub fn validity_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, l) in self.levels.iter().enumerate() {
            let largest = [l.pump_i, l.stokes_i, l.pump_j, l.stokes_j]
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let ratio = largest / l.detuning.abs();
            if ratio > PERTURBATIVE_LIMIT {
                out.push(format!(
                    "upper level {k}: |Ω/Δ̄| = {ratio:.3} exceeds {PERTURBATIVE_LIMIT}; adiabatic elimination is unreliable"
                ));
            }
        }
        out
    }

    /// Warning when trap frequencies are not negligible next to Δ̄.
    pub fn phonon_warning(&self, omega_x: f64) -> Option<String> {
        let ratio = omega_x / self.min_abs_detuning();
        (ratio > PHONON_DENOMINATOR_LIMIT).then(|| {
            format!("ω_x/min|Δ̄| = {ratio:.3e} exceeds {PHONON_DENOMINATOR_LIMIT:.0e}; phonon energies in the denominators are not negligible")
        })
    }
}

/// Phonon energy offset ω^(ph)_ℓ = ω_x Σ_p √μ_p (ℓ_p − (m_p + n_p)/2) of an
/// intermediate vibrational state {ℓ}.
pub fn phonon_offset(
    ell: &PhononRegister,
    m: &PhononRegister,
    n: &PhononRegister,
    modes: &ModeSystem,
    omega_x: f64,
) -> f64 {
    omega_x
        * modes
            .eigenvalues
            .iter()
            .zip(&ell.occupations)
            .zip(m.occupations.iter().zip(&n.occupations))
            .map(|((mu, &l), (&mm, &nn))| mu.sqrt() * (f64::from(l) - 0.5 * f64::from(mm + nn)))
            .sum::<f64>()
}

/// Pump and Stokes beams driving one Raman transition.
#[derive(Clone, Debug, PartialEq)]
pub struct RamanPair {
    pub pump: LaserBeam,
    pub stokes: LaserBeam,
}

impl RamanPair {
    pub fn new(pump: LaserBeam, stokes: LaserBeam) -> Self {
        RamanPair { pump, stokes }
    }

    /// Pump/Stokes frequencies placing the pump `detuning` below
    /// `upper_energy` as seen from |I⟩, with the two-photon difference equal
    /// to the bare |I⟩–|J⟩ splitting.
    pub fn resonant_frequencies(
        level_i: &LevelState,
        level_j: &LevelState,
        upper_energy: f64,
        detuning: f64,
    ) -> (f64, f64) {
        let pump = upper_energy - level_i.energy - detuning;
        let stokes = pump - (level_j.energy - level_i.energy);
        (pump, stokes)
    }

    /// Shifts the Stokes frequency so that δ = A − D.
    pub fn impose_resonance(&mut self, coupling: &RamanCoupling, shifts: &StarkShifts) {
        let target = resonance_delta(shifts.a, shifts.d);
        self.stokes.frequency -= target - coupling.delta;
    }

    /// Couplings of |I⟩ (via the pump) and |J⟩ (via the Stokes beam) through
    /// every level in `uppers`, with Δ̄_λ = ω_λ − (ω_I + ω_J + ω_p + ω_s)/2.
    pub fn coupling(
        &self,
        level_i: &LevelState,
        level_j: &LevelState,
        uppers: &[LevelState],
        trans: &Transition,
        consts: &Constants,
    ) -> Result<RamanCoupling> {
        let mean = 0.5 * (level_i.energy + level_j.energy + self.pump.frequency + self.stokes.frequency);
        let levels = uppers
            .iter()
            .map(|k| {
                Ok(UpperCoupling {
                    pump_i: single_photon_rabi(level_i, k, &self.pump, trans, consts)?,
                    stokes_i: single_photon_rabi(level_i, k, &self.stokes, trans, consts)?,
                    pump_j: single_photon_rabi(level_j, k, &self.pump, trans, consts)?,
                    stokes_j: single_photon_rabi(level_j, k, &self.stokes, trans, consts)?,
                    detuning: k.energy - mean,
                })
            })
            .collect::<Result<_>>()?;
        let delta = (self.pump.frequency - self.stokes.frequency) - (level_j.energy - level_i.energy);
        Ok(RamanCoupling { levels, delta })
    }
}

/// AC Stark shifts and the off-diagonal Raman coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarkShifts {
    /// A: shift of |I⟩ (rad/s).
    pub a: f64,
    /// D: shift of |J⟩ (rad/s).
    pub d: f64,
    /// B: |I⟩–|J⟩ coupling amplitude (rad/s).
    pub b: C64,
    /// β_JI amplitude, Σ_k Ω^(s)_Jk Ω^(p)*_Ik / 4Δ̄_k, summed independently.
    pub b_reverse: C64,
    /// Pump–Stokes detuning δ carried over from the coupling.
    pub delta: f64,
}

pub fn stark_shifts(coupling: &RamanCoupling) -> Result<StarkShifts> {
    coupling.check_detunings()?;
    let mut a = 0.0;
    let mut d = 0.0;
    let mut b = C64::new(0.0, 0.0);
    let mut b_reverse = C64::new(0.0, 0.0);
    for l in &coupling.levels {
        let denom = 4.0 * l.detuning;
        a += (l.pump_i.norm_sqr() + l.stokes_i.norm_sqr()) / denom;
        d += (l.pump_j.norm_sqr() + l.stokes_j.norm_sqr()) / denom;
        b += l.pump_i * l.stokes_j.conj() / denom;
        b_reverse += l.stokes_j * l.pump_i.conj() / denom;
    }
    Ok(StarkShifts { a, d, b, b_reverse, delta: coupling.delta })
}

impl StarkShifts {
    /// Effective two-level generator H(t) with ∂ₜa = iH(t)a:
    /// [[A, B e^{iδt}], [β_JI e^{−iδt}, D]].
    pub fn effective_hamiltonian(&self, t: f64) -> Matrix2<C64> {
        let phase = C64::from_polar(1.0, self.delta * t);
        Matrix2::new(
            C64::from(self.a),
            self.b * phase,
            self.b_reverse * phase.conj(),
            C64::from(self.d),
        )
    }
}

/// The two-photon detuning δ = A − D that keeps the Raman transition on
/// resonance.
pub fn resonance_delta(a: f64, d: f64) -> f64 {
    a - d
}

/// Lamb-Dicke parameter η = (k_s − k_p)·x̂ √(ħ/2Mω_x).
pub fn lamb_dicke_parameter(
    pump: &LaserBeam,
    stokes: &LaserBeam,
    cfg: &TrapConfig,
    consts: &Constants,
) -> f64 {
    let dk = stokes.wavevector(consts) - pump.wavevector(consts);
    dk.x * (consts.hbar / (2.0 * cfg.mass * cfg.omega_x)).sqrt()
}

/// η together with the per-mode amplitudes ξ_p = η b^(p)_s / μ_p^{1/4} for
/// the addressed ion s.
#[derive(Clone, Debug, PartialEq)]
pub struct LambDicke {
    pub eta: f64,
    pub ion: usize,
    pub xi: Vec<f64>,
}

impl LambDicke {
    pub fn new(eta: f64, modes: &ModeSystem, ion: usize) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::arg("Lamb-Dicke parameter must be finite"));
        }
        if ion >= modes.n_modes() {
            return Err(Error::arg(format!(
                "ion index {ion} out of range for a {}-ion chain",
                modes.n_modes()
            )));
        }
        let xi = (0..modes.n_modes())
            .map(|p| eta * modes.b(p, ion) / modes.eigenvalues[p].powf(0.25))
            .collect();
        Ok(LambDicke { eta, ion, xi })
    }
}

/// Lamb-Dicke factors for the beam pair acting on ion `ion` (default: the
/// center ion).
pub fn lamb_dicke(
    pump: &LaserBeam,
    stokes: &LaserBeam,
    cfg: &TrapConfig,
    ion: Option<usize>,
    consts: &Constants,
) -> Result<LambDicke> {
    let eta = lamb_dicke_parameter(pump, stokes, cfg, consts);
    let modes = modes_for(cfg.n_ions)?;
    LambDicke::new(eta, &modes, ion.unwrap_or_else(|| cfg.center_ion()))
}

/// Occupation numbers over the collective modes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhononRegister {
    pub occupations: Vec<u32>,
}

impl PhononRegister {
    pub fn new(occupations: Vec<u32>) -> Self {
        PhononRegister { occupations }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        PhononRegister { occupations: vec![0; n_modes] }
    }

    /// One phonon in `mode`, all others empty.
    pub fn single(n_modes: usize, mode: usize) -> Self {
        let mut occupations = vec![0; n_modes];
        occupations[mode] = 1;
        PhononRegister { occupations }
    }

    pub fn n_modes(&self) -> usize {
        self.occupations.len()
    }
}

/// f({m},{n},η) = Π_p ⟨m_p| exp[iξ_p(a†_p + a_p)] |n_p⟩.
pub fn coupling_factor(m: &PhononRegister, n: &PhononRegister, ld: &LambDicke) -> Result<C64> {
    if m.n_modes() != n.n_modes() || m.n_modes() != ld.xi.len() {
        return Err(Error::arg(format!(
            "phonon registers ({} and {} modes) do not match the {} Lamb-Dicke modes",
            m.n_modes(),
            n.n_modes(),
            ld.xi.len()
        )));
    }
    let mut f = C64::new(1.0, 0.0);
    for ((&mp, &np), &xi) in m.occupations.iter().zip(&n.occupations).zip(&ld.xi) {
        f *= displacement_element(mp, np, Xi::new(xi)?);
    }
    Ok(f)
}

/// Dimensionless geometric factor
/// β_λ = ¾(2J_λ+1) Σ_{q,q'} 3j(J₀ 1 J_λ; −M₀ q M_λ) 3j(J₁ 1 J_λ; −M₁ q' M_λ)
///       (ε_q·ε^(p)) (ε*_{q'}·ε^(s)*).
pub fn beta_factor(
    level0: &LevelState,
    level1: &LevelState,
    upper: &LevelState,
    pump_pol: &Polarization,
    stokes_pol: &Polarization,
) -> Result<C64> {
    let pump = angular_sum(level0, upper, pump_pol)?;
    let stokes = angular_sum(level1, upper, stokes_pol)?;
    Ok(0.75 * f64::from(upper.j.twice() + 1) * pump * stokes.conj())
}

/// Ω_eff = f Σ_k Ω^(p)_Ik Ω^(s)*_Jk / 4Δ̄_k.
pub fn effective_rabi(coupling: &RamanCoupling, f: C64) -> Result<C64> {
    coupling.check_detunings()?;
    let sum: C64 = coupling
        .levels
        .iter()
        .map(|l| l.pump_i * l.stokes_j.conj() / (4.0 * l.detuning))
        .sum();
    Ok(sum * f)
}

/// Ω_eff = e²A E₀^(p) E₀^(s)* / (4ħ²cαk³) Σ_λ β_λ/Δ̄_λ f, with
/// `terms` = [(β_λ, Δ̄_λ)].
pub fn effective_rabi_from_fields(
    pump_field: C64,
    stokes_field: C64,
    trans: &Transition,
    terms: &[(C64, f64)],
    f: C64,
    consts: &Constants,
) -> Result<C64> {
    if terms.iter().any(|(_, det)| *det == 0.0) {
        return Err(Error::Singularity("Δ̄_λ = 0 in the β sum".into()));
    }
    let k = trans.wavenumber();
    let prefactor = consts.e * consts.e * trans.decay_rate()
        / (4.0 * consts.hbar * consts.hbar * consts.c * consts.alpha * k.powi(3));
    let sum: C64 = terms.iter().map(|(beta, det)| beta / det).sum();
    Ok(pump_field * stokes_field.conj() * prefactor * sum * f)
}

/// Ω_eff = P λ³ / (h c τ d² Δ) Υ f, for equal pump and Stokes powers `power`.
pub fn effective_rabi_from_power(
    power: f64,
    trans: &Transition,
    diameter: f64,
    detuning: f64,
    upsilon: C64,
    f: C64,
    consts: &Constants,
) -> Result<C64> {
    if detuning == 0.0 {
        return Err(Error::Singularity("Raman detuning Δ = 0".into()));
    }
    let scale = power * trans.wavelength.powi(3)
        / (consts.h * consts.c * trans.lifetime * diameter * diameter * detuning);
    Ok(upsilon * f * scale)
}

/// The order-unity factor Υ linking the two Ω_eff expressions when every
/// Δ̄_λ ≈ Δ: Υ = (4/π²) Σ_λ β_λ.
pub fn power_form_upsilon(betas: &[C64]) -> C64 {
    betas.iter().sum::<C64>() * (4.0 / (PI * PI))
}
