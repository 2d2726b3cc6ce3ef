//! Command-line front end.
//!
//! Frequencies on the command line and in scenario files are ordinary
//! frequencies in Hz; they are converted to angular units on parsing.

use std::ffi::OsString;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomic::AtomicData;
use crate::budget::{
    budget_table, sideband_bound, standard_roles, zeeman_splitting, BudgetParams, BudgetRow,
};
use crate::dynamics::{
    apply_pulse, cz_gate_sequence, ChainCoupling, PulseKind, PulseSpec, StateFile, StateVector,
    DEFAULT_N_MAX,
};
use crate::error::{Error, Result};
use crate::oracle::{displacement_check, elimination_scan, SCAN_OPTIONS};
use crate::raman::{
    effective_rabi, lamb_dicke, stark_shifts, BeamRole, LaserBeam, Polarization, RamanPair,
};
use crate::trapmodes::{modes_for, TrapConfig};

pub const ATOMIC_DATA_ENV: &str = "IONRAMAN_ATOMIC_DATA";

#[derive(Parser, Debug)]
#[command(name = "ionraman", version, about = "Stimulated-Raman quantum logic in trapped ions")]
pub struct Cli {
    /// Atomic data file (TOML); the bundled Ca+ data is used when absent.
    #[arg(long, global = true, env = ATOMIC_DATA_ENV, value_name = "PATH")]
    pub atomic_data: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Raman couplings, Stark shifts and pulse times for a scenario.
    Rabi(RabiArgs),
    /// Apply one pulse (or a scenario's pulse sequence) to a state.
    Pulse(PulseArgs),
    /// Controlled-phase gate between two ions.
    Gate(GateArgs),
    /// Axial normal modes of an N-ion chain.
    Modes(ModesArgs),
    /// Laser power budget.
    Budget(BudgetArgs),
    /// Minimum trap frequency for sideband cooling.
    Cool(CoolArgs),
    /// Ground-state Zeeman splitting.
    Zeeman(ZeemanArgs),
    /// Run the oracle checks and report the largest errors.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct RabiArgs {
    /// Scenario file (JSON); a built-in two-ion example is used when absent.
    /// The flags below override its fields.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub n_ions: Option<usize>,
    /// Axial trap frequency (Hz).
    #[arg(long)]
    pub trap_frequency: Option<f64>,
    /// Ion used for ξ.
    #[arg(long)]
    pub ion: Option<usize>,
    /// Pump detuning from the upper term (Hz).
    #[arg(long, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    /// Magnetic field (G).
    #[arg(long)]
    pub gauss: Option<f64>,
    /// Pump power (W).
    #[arg(long)]
    pub pump_power: Option<f64>,
    /// Stokes power (W).
    #[arg(long)]
    pub stokes_power: Option<f64>,
    /// Diameter of both beams (m).
    #[arg(long)]
    pub diameter: Option<f64>,
    /// sigma+, sigma-, pi or "re,im;re,im;re,im" in the (+1, 0, -1) basis.
    #[arg(long, allow_hyphen_values = true)]
    pub pump_polarization: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub stokes_polarization: Option<String>,
    /// Pump propagation direction "x,y,z".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub pump_direction: Option<[f64; 3]>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub stokes_direction: Option<[f64; 3]>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

fn parse_vector(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| e.to_string())?;
    v.try_into().map_err(|_| format!("expected three components, got {s:?}"))
}

impl RabiArgs {
    fn apply(&self, sc: &mut Scenario) {
        if let Some(n) = self.n_ions {
            sc.trap.n_ions = n;
        }
        if let Some(f) = self.trap_frequency {
            sc.trap.axial_frequency_hz = f;
        }
        if self.ion.is_some() {
            sc.trap.ion = self.ion;
        }
        if let Some(d) = self.detuning {
            sc.raman.detuning_hz = d;
        }
        if let Some(b) = self.gauss {
            sc.raman.magnetic_field_gauss = b;
        }
        for beam in &mut sc.beams {
            let (power, pol, dir) = match beam.role {
                BeamRole::Pump => (self.pump_power, &self.pump_polarization, self.pump_direction),
                BeamRole::Stokes => (self.stokes_power, &self.stokes_polarization, self.stokes_direction),
            };
            if let Some(p) = power {
                beam.power_w = Some(p);
                beam.field_v_per_m = None;
            }
            if let Some(d) = self.diameter {
                beam.diameter_m = Some(d);
                beam.field_v_per_m = None;
            }
            if let Some(p) = pol {
                beam.polarization = p.clone();
            }
            if let Some(d) = dir {
                beam.direction = d;
            }
        }
    }
}

#[derive(Args, Debug)]
pub struct PulseArgs {
    /// Scenario whose pulse list is applied with physical couplings.
    #[arg(long, conflicts_with_all = ["kind", "theta", "phase"])]
    pub scenario: Option<PathBuf>,
    /// Pulse type.
    #[arg(long, default_value = "V")]
    pub kind: String,
    /// Rotation angle: radians or multiples of pi ("pi", "pi/2", "2pi").
    #[arg(long, default_value = "pi", allow_hyphen_values = true)]
    pub theta: String,
    /// Phase φ (rad).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phase: f64,
    /// Addressed ion.
    #[arg(long, default_value_t = 0)]
    pub ion: usize,
    /// Internal level paired with |0⟩.
    #[arg(long, default_value_t = 1)]
    pub level: u8,
    /// Fractional pulse-area error, θ → θ(1 + e).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_error: f64,
    #[command(flatten)]
    pub register: RegisterArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RegisterArgs {
    /// Input state (JSON); defaults to all ions in |0⟩ and the modes in the vacuum.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Ions in the default register.
    #[arg(long, default_value_t = 1)]
    pub n_ions: usize,
    /// Internal levels per ion in the default register.
    #[arg(long, default_value_t = 2)]
    pub levels: u8,
    /// Phonon truncation of the default register.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: u32,
    /// Lamb-Dicke parameter; pairs rotate at their phonon-dependent rates
    /// when given.
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GateArgs {
    #[arg(long, default_value_t = 0)]
    pub control: usize,
    #[arg(long, default_value_t = 1)]
    pub target: usize,
    /// Auxiliary internal level of the target used for the 2π loop.
    #[arg(long, default_value_t = 2)]
    pub aux_level: u8,
    /// Qubit values of the default input, e.g. "11".
    #[arg(long, conflicts_with = "state")]
    pub bits: Option<String>,
    /// Input state (JSON).
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: u32,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ModesArgs {
    /// Number of ions.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Rabi frequency of every operation (Hz).
    #[arg(long, default_value_t = 1.0e6)]
    pub rabi: f64,
    /// Raman detuning (Hz).
    #[arg(long, default_value_t = 10.0e9)]
    pub detuning: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 10)]
    pub n_ions: usize,
    /// Diameter of single-ion addressing beams (m).
    #[arg(long, default_value_t = 10e-6)]
    pub addressing_diameter: f64,
    /// Diameter of beams covering the chain (m).
    #[arg(long, default_value_t = 100e-6)]
    pub global_diameter: f64,
}

#[derive(Args, Debug)]
pub struct CoolArgs {
    /// Number of ions.
    #[arg(long)]
    pub n: usize,
    /// Target mean phonon number.
    #[arg(long)]
    pub nbar: f64,
    /// Cooling transition.
    #[arg(long, default_value = "397")]
    pub transition: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ZeemanArgs {
    /// Magnetic field (G).
    #[arg(long)]
    pub gauss: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Skip the slow Δ/Ω = 400 integration.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Parses "pi", "pi/2", "3pi/2", "2*pi", "-pi/4" or a plain number of radians.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::arg(format!("cannot parse angle {s:?}"));
    let t: String = s.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.replace('π', "pi");
    if let Some(pos) = t.find("pi") {
        let coef = t[..pos].trim_end_matches('*');
        let coef = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let rest = &t[pos + 2..];
        let div = match rest {
            "" => 1.0,
            r => r.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
        };
        Ok(coef * PI / div)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}

/// An angle given as radians or as a string understood by [`parse_angle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Radians(f64),
    Text(String),
}

impl Angle {
    pub fn radians(&self) -> Result<f64> {
        match self {
            Angle::Radians(r) => Ok(*r),
            Angle::Text(s) => parse_angle(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSpec {
    pub n_ions: usize,
    pub axial_frequency_hz: f64,
    /// Ion used for single-ion quantities; defaults to the center ion.
    #[serde(default)]
    pub ion: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanSpec {
    pub transition: String,
    /// |I⟩, e.g. "4S1/2:-1/2".
    pub level_i: String,
    pub level_j: String,
    /// Upper term whose sublevels are summed over.
    pub upper: String,
    /// Pump detuning below the upper term as seen from |I⟩ (Hz).
    pub detuning_hz: f64,
    #[serde(default)]
    pub magnetic_field_gauss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    pub role: BeamRole,
    #[serde(default)]
    pub power_w: Option<f64>,
    #[serde(default)]
    pub diameter_m: Option<f64>,
    /// Peak field (V/m), instead of power and diameter.
    #[serde(default)]
    pub field_v_per_m: Option<f64>,
    pub polarization: String,
    pub direction: [f64; 3],
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseStep {
    pub kind: PulseKind,
    pub theta: Angle,
    /// Overrides the phase set by the beams.
    #[serde(default)]
    pub phase: Option<f64>,
    pub ion: usize,
    #[serde(default)]
    pub level: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub trap: TrapSpec,
    pub raman: RamanSpec,
    pub beams: Vec<BeamSpec>,
    #[serde(default)]
    pub pulses: Vec<PulseStep>,
    #[serde(default)]
    pub initial_state: Option<StateFile>,
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default)]
    pub levels: Option<u8>,
}

pub const DEFAULT_SCENARIO: &str = r#"{
  "trap": { "n_ions": 2, "axial_frequency_hz": 1.0e6 },
  "raman": {
    "transition": "397",
    "level_i": "4S1/2:-1/2",
    "level_j": "4S1/2:1/2",
    "upper": "4P1/2",
    "detuning_hz": 10.0e9,
    "magnetic_field_gauss": 1.0
  },
  "beams": [
    { "role": "pump", "power_w": 1.0e-3, "diameter_m": 1.0e-4,
      "polarization": "sigma+", "direction": [-0.7071067811865476, 0.7071067811865476, 0.0] },
    { "role": "stokes", "power_w": 1.0e-3, "diameter_m": 1.0e-4,
      "polarization": "pi", "direction": [0.7071067811865476, 0.7071067811865476, 0.0] }
  ],
  "pulses": [
    { "kind": "V", "theta": "pi/2", "ion": 0 }
  ]
}"#;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.check()?;
        Ok(sc)
    }

    /// Beam roles and ion indices are consistent.
    pub fn check(&self) -> Result<()> {
        let sc = self;
        if sc.beams.iter().filter(|b| b.role == BeamRole::Pump).count() != 1
            || sc.beams.iter().filter(|b| b.role == BeamRole::Stokes).count() != 1
        {
            return Err(Error::arg("scenario needs exactly one pump and one Stokes beam"));
        }
        if let Some(ion) = sc.trap.ion {
            if ion >= sc.trap.n_ions {
                return Err(Error::arg(format!("ion {ion} out of range for {} ions", sc.trap.n_ions)));
            }
        }
        if let Some(p) = sc.pulses.iter().find(|p| p.ion >= sc.trap.n_ions) {
            return Err(Error::arg(format!("pulse addresses ion {} of {}", p.ion, sc.trap.n_ions)));
        }
        Ok(())
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_json(&std::fs::read_to_string(p)?),
            None => Self::from_json(DEFAULT_SCENARIO),
        }
    }
}

/// Physical quantities derived from a scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RabiReport {
    pub pump_frequency_hz: f64,
    pub stokes_frequency_hz: f64,
    pub upper_levels: Vec<UpperReport>,
    pub stark_a_hz: f64,
    pub stark_d_hz: f64,
    pub coupling_b_hz: [f64; 2],
    pub two_photon_detuning_hz: f64,
    pub eta: f64,
    pub ion: usize,
    pub xi: Vec<f64>,
    pub carrier_rabi_hz: f64,
    pub sideband_rabi_hz: f64,
    pub carrier_pi_time_s: f64,
    pub sideband_pi_time_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperReport {
    pub level: String,
    pub detuning_hz: f64,
    pub pump_rabi_i_hz: [f64; 2],
    pub stokes_rabi_j_hz: [f64; 2],
}

/// Everything needed to turn a scenario into pulses.
pub struct Setup {
    pub coupling: ChainCoupling,
    pub shifts: crate::raman::StarkShifts,
    pub report: RabiReport,
}

fn hz(w: f64) -> f64 {
    w / TAU
}

fn chz(z: C64) -> [f64; 2] {
    [z.re / TAU, z.im / TAU]
}

fn beam(spec: &BeamSpec, frequency: f64, data: &AtomicData) -> Result<LaserBeam> {
    let pol: Polarization = spec.polarization.parse()?;
    let dir = Vector3::from(spec.direction);
    let b = match (spec.field_v_per_m, spec.power_w, spec.diameter_m) {
        (Some(e0), None, None) => LaserBeam::new(spec.role, frequency, e0, pol, dir)?,
        (None, Some(p), Some(d)) => LaserBeam::from_power(spec.role, frequency, p, d, pol, dir, &data.constants)?,
        _ => {
            return Err(Error::arg(format!(
                "{} beam needs either field_v_per_m or both power_w and diameter_m",
                spec.role
            )))
        }
    };
    Ok(b.with_phase(spec.phase))
}

pub fn setup(sc: &Scenario, data: &AtomicData) -> Result<Setup> {
    let c = &data.constants;
    let r = &sc.raman;
    let trans = data.transition(&r.transition)?;
    let level_i = data.zeeman_shifted(&data.parse_sublevel(&r.level_i)?, r.magnetic_field_gauss)?;
    let level_j = data.zeeman_shifted(&data.parse_sublevel(&r.level_j)?, r.magnetic_field_gauss)?;
    let uppers = data
        .upper_sublevels(&r.upper)?
        .iter()
        .map(|u| data.zeeman_shifted(u, r.magnetic_field_gauss))
        .collect::<Result<Vec<_>>>()?;
    let upper_energy = data.term(&r.upper)?.energy;
    let (wp, ws) = RamanPair::resonant_frequencies(&level_i, &level_j, upper_energy, TAU * r.detuning_hz);
    let spec = |role| sc.beams.iter().find(|b| b.role == role).expect("validated on load");
    let mut pair = RamanPair::new(beam(spec(BeamRole::Pump), wp, data)?, beam(spec(BeamRole::Stokes), ws, data)?);

    // A and D move slightly with the Stokes frequency; a few fixed-point
    // steps settle δ = A − D.
    let mut coupling = pair.coupling(&level_i, &level_j, &uppers, trans, c)?;
    let mut shifts = stark_shifts(&coupling)?;
    for _ in 0..8 {
        let miss = shifts.a - shifts.d - coupling.delta;
        if miss.abs() <= 1e-12 * shifts.a.abs().max(shifts.d.abs()).max(1.0) {
            break;
        }
        pair.impose_resonance(&coupling, &shifts);
        coupling = pair.coupling(&level_i, &level_j, &uppers, trans, c)?;
        shifts = stark_shifts(&coupling)?;
    }

    let cfg = TrapConfig::new(sc.trap.n_ions, TAU * sc.trap.axial_frequency_hz, data.ion_mass)?;
    let ld = lamb_dicke(&pair.pump, &pair.stokes, &cfg, sc.trap.ion, c)?;
    let modes = modes_for(cfg.n_ions)?;
    let chain = ChainCoupling::new(ld.eta, &modes)?;

    let n = cfg.n_ions;
    let vac = vec![0; n];
    let mut one = vec![0; n];
    one[0] = 1;
    let fv = chain.factor(ld.ion, &vac, &vac)?;
    let fu = chain.factor(ld.ion, &one, &vac)?;
    let carrier = effective_rabi(&coupling, fv)?.norm();
    let sideband = effective_rabi(&coupling, fu)?.norm();

    let mut warnings = coupling.validity_warnings();
    warnings.extend(coupling.phonon_warning(cfg.omega_x));

    let report = RabiReport {
        pump_frequency_hz: hz(pair.pump.frequency),
        stokes_frequency_hz: hz(pair.stokes.frequency),
        upper_levels: uppers
            .iter()
            .zip(&coupling.levels)
            .map(|(u, l)| UpperReport {
                level: u.to_string(),
                detuning_hz: hz(l.detuning),
                pump_rabi_i_hz: chz(l.pump_i),
                stokes_rabi_j_hz: chz(l.stokes_j),
            })
            .collect(),
        stark_a_hz: hz(shifts.a),
        stark_d_hz: hz(shifts.d),
        coupling_b_hz: chz(shifts.b),
        two_photon_detuning_hz: hz(coupling.delta),
        eta: ld.eta,
        ion: ld.ion,
        xi: ld.xi.clone(),
        carrier_rabi_hz: hz(carrier),
        sideband_rabi_hz: hz(sideband),
        carrier_pi_time_s: if carrier > 0.0 { PI / (2.0 * carrier) } else { f64::INFINITY },
        sideband_pi_time_s: if sideband > 0.0 { PI / (2.0 * sideband) } else { f64::INFINITY },
        warnings,
    };
    Ok(Setup { coupling: chain, shifts, report })
}

fn rabi_text(r: &RabiReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "pump frequency      {:.6e} Hz", r.pump_frequency_hz);
    let _ = writeln!(s, "stokes frequency    {:.6e} Hz", r.stokes_frequency_hz);
    let _ = writeln!(s, "{:<14} {:>14} {:>24} {:>24}", "upper level", "detuning (Hz)", "pump Rabi |I> (Hz)", "stokes Rabi |J> (Hz)");
    for u in &r.upper_levels {
        let _ = writeln!(
            s,
            "{:<14} {:>14.6e} {:>24} {:>24}",
            u.level,
            u.detuning_hz,
            format!("{:.4e}{:+.4e}i", u.pump_rabi_i_hz[0], u.pump_rabi_i_hz[1]),
            format!("{:.4e}{:+.4e}i", u.stokes_rabi_j_hz[0], u.stokes_rabi_j_hz[1]),
        );
    }
    let _ = writeln!(s, "Stark shift A       {:.6e} Hz", r.stark_a_hz);
    let _ = writeln!(s, "Stark shift D       {:.6e} Hz", r.stark_d_hz);
    let _ = writeln!(s, "coupling B          {:.6e}{:+.6e}i Hz", r.coupling_b_hz[0], r.coupling_b_hz[1]);
    let _ = writeln!(s, "two-photon delta    {:.6e} Hz", r.two_photon_detuning_hz);
    let _ = writeln!(s, "Lamb-Dicke eta      {:.6}", r.eta);
    let xi: Vec<String> = r.xi.iter().map(|x| format!("{x:.6}")).collect();
    let _ = writeln!(s, "xi (ion {})          [{}]", r.ion, xi.join(", "));
    let _ = writeln!(s, "carrier Rabi        {:.6e} Hz, pi time {:.6e} s", r.carrier_rabi_hz, r.carrier_pi_time_s);
    let _ = writeln!(s, "sideband Rabi       {:.6e} Hz, pi time {:.6e} s", r.sideband_rabi_hz, r.sideband_pi_time_s);
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn state_text(state: &StateVector) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:>22} {:>22} {:>14}", "basis", "re", "im", "population");
    for (b, a) in state.nonzero() {
        if a.norm_sqr() < 1e-30 {
            continue;
        }
        let _ = writeln!(s, "{:<20} {:>22.15e} {:>22.15e} {:>14.10}", b.to_string(), a.re, a.im, a.norm_sqr());
    }
    let _ = writeln!(s, "norm {:.15}", state.norm());
    s
}

fn emit_state(state: &StateVector, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(state.to_json()? + "\n"),
        Format::Text => Ok(state_text(state)),
        Format::Csv => {
            let mut s = String::from("state,re,im,population\n");
            for (b, a) in state.nonzero() {
                let _ = writeln!(s, "{b},{:e},{:e},{:e}", a.re, a.im, a.norm_sqr());
            }
            Ok(s)
        }
    }
}

fn read_state(path: &Path) -> Result<StateVector> {
    StateVector::from_json(&std::fs::read_to_string(path)?)
}

fn chain_for(eta: Option<f64>, n_ions: usize) -> Result<Option<ChainCoupling>> {
    match eta {
        None => Ok(None),
        Some(eta) => {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::arg(format!("eta must be in (0, 1), got {eta}")));
            }
            Ok(Some(ChainCoupling::new(eta, &modes_for(n_ions)?)?))
        }
    }
}

fn run_pulse(args: &PulseArgs, data: &AtomicData) -> Result<String> {
    if let Some(path) = &args.scenario {
        let sc = Scenario::load(Some(path))?;
        let st = setup(&sc, data)?;
        let n = sc.trap.n_ions;
        let mut state = match (&args.register.state, &sc.initial_state) {
            (Some(p), _) => read_state(p)?,
            (None, Some(f)) => StateVector::from_file(f)?,
            (None, None) => StateVector::computational(
                &vec![0; n],
                n,
                sc.n_max.unwrap_or(DEFAULT_N_MAX),
                sc.levels.unwrap_or(2),
            )?,
        };
        let vac = vec![0; n];
        let mut one = vec![0; n];
        one[st.coupling.bus] = 1;
        for step in &sc.pulses {
            let f = match step.kind {
                PulseKind::V => st.coupling.factor(step.ion, &vac, &vac)?,
                PulseKind::U => st.coupling.factor(step.ion, &one, &vac)?,
            };
            let mut pulse = PulseSpec::from_coupling(step.kind, step.theta.radians()?, &st.shifts, f)?;
            if let Some(phi) = step.phase {
                pulse.phase = phi;
            }
            if let Some(level) = step.level {
                pulse = pulse.on_level(level);
            }
            pulse = pulse.with_theta_error(args.theta_error);
            state = apply_pulse(&state, &pulse, step.ion, Some(&st.coupling))?;
        }
        return emit_state(&state, args.format);
    }
    let kind: PulseKind = args.kind.parse()?;
    let theta = parse_angle(&args.theta)?;
    let reg = &args.register;
    let state = match &reg.state {
        Some(p) => read_state(p)?,
        None => StateVector::computational(&vec![0; reg.n_ions], reg.n_ions, reg.n_max, reg.levels)?,
    };
    let chain = chain_for(reg.eta, state.n_ions)?;
    if chain.is_some() && state.n_modes != state.n_ions {
        return Err(Error::arg("--eta needs a register with one mode per ion"));
    }
    let pulse = PulseSpec::ideal(kind, theta, args.phase).on_level(args.level).with_theta_error(args.theta_error);
    let out = apply_pulse(&state, &pulse, args.ion, chain.as_ref())?;
    emit_state(&out, args.format)
}

fn run_gate(args: &GateArgs) -> Result<String> {
    let state = match (&args.state, &args.bits) {
        (Some(p), _) => read_state(p)?,
        (None, bits) => {
            let bits: Vec<u8> = bits
                .as_deref()
                .unwrap_or("00")
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::arg(format!("qubit values must be 0 or 1, got {c:?}"))),
                })
                .collect::<Result<_>>()?;
            let levels = args.aux_level.max(1) + 1;
            StateVector::computational(&bits, bits.len(), args.n_max, levels)?
        }
    };
    let chain = chain_for(args.eta, state.n_ions)?;
    let out = cz_gate_sequence(&state, args.control, args.target, args.aux_level, chain.as_ref())?;
    emit_state(&out, args.format)
}

fn run_modes(args: &ModesArgs) -> Result<String> {
    let m = modes_for(args.n)?;
    let n = m.n_modes();
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct ModesOut {
                positions: Vec<f64>,
                mu: Vec<f64>,
                vectors: Vec<Vec<f64>>,
            }
            let out = ModesOut {
                positions: m.positions.clone(),
                mu: m.eigenvalues.clone(),
                vectors: (0..n).map(|p| (0..n).map(|s| m.b(p, s)).collect()).collect(),
            };
            Ok(serde_json::to_string_pretty(&out)? + "\n")
        }
        Format::Csv | Format::Text => {
            let sep = if args.format == Format::Csv { "," } else { "  " };
            let mut header = vec!["mode".to_string(), "mu".into(), "frequency_ratio".into()];
            header.extend((0..n).map(|s| format!("b_{s}")));
            let mut s = header.join(sep) + "\n";
            for p in 0..n {
                let mut row = vec![
                    (p + 1).to_string(),
                    format!("{:.12}", m.eigenvalues[p]),
                    format!("{:.12}", m.eigenvalues[p].sqrt()),
                ];
                row.extend((0..n).map(|ion| format!("{:.12}", m.b(p, ion))));
                s += &(row.join(sep) + "\n");
            }
            Ok(s)
        }
    }
}

fn budget_out(rows: &[BudgetRow], format: Format) -> Result<String> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                transition: &'a str,
                wavelength_nm: f64,
                power_w: f64,
                bandwidth_hz: f64,
                driving_role: &'a str,
            }
            let out: Vec<Row> = rows
                .iter()
                .map(|r| Row {
                    transition: &r.transition,
                    wavelength_nm: r.wavelength_nm,
                    power_w: r.power,
                    bandwidth_hz: hz(r.bandwidth),
                    driving_role: &r.driving_role,
                })
                .collect();
            Ok(serde_json::to_string_pretty(&out)? + "\n")
        }
        Format::Csv => {
            let mut s = String::from("wavelength_nm,power_w,bandwidth_hz,driving_role\n");
            for r in rows {
                let _ = writeln!(s, "{:.3},{:.4e},{:.4e},{}", r.wavelength_nm, r.power, hz(r.bandwidth), r.driving_role);
            }
            Ok(s)
        }
        Format::Text => {
            let mut s = format!("{:<12} {:>12} {:>14}  {}\n", "wavelength", "power", "bandwidth", "driving role");
            for r in rows {
                let _ = writeln!(
                    s,
                    "{:<12} {:>12} {:>14}  {}",
                    format!("{:.0} nm", r.wavelength_nm),
                    si(r.power, "W"),
                    si(hz(r.bandwidth), "Hz"),
                    r.driving_role
                );
            }
            Ok(s)
        }
    }
}

/// Formats with an SI prefix, three significant digits.
fn si(v: f64, unit: &str) -> String {
    const PREFIXES: [(f64, &str); 7] =
        [(1e9, "G"), (1e6, "M"), (1e3, "k"), (1.0, ""), (1e-3, "m"), (1e-6, "u"), (1e-9, "n")];
    for (scale, p) in PREFIXES {
        if v.abs() >= scale {
            return format!("{:.3} {p}{unit}", v / scale);
        }
    }
    format!("{v:.3e} {unit}")
}

fn run_budget(args: &BudgetArgs, data: &AtomicData) -> Result<String> {
    let params = BudgetParams {
        rabi: TAU * args.rabi,
        detuning: TAU * args.detuning,
        eta: args.eta,
        n_ions: args.n_ions,
        addressing_diameter: args.addressing_diameter,
        global_diameter: args.global_diameter,
    };
    let rows = budget_table(data, &standard_roles(data, &params)?)?;
    budget_out(&rows, args.format)
}

fn scalar_out(name: &str, angular: f64, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&serde_json::json!({
            name: { "hz": hz(angular), "rad_per_s": angular }
        }))? + "\n"),
        Format::Csv => Ok(format!("quantity,hz,rad_per_s\n{name},{:e},{:e}\n", hz(angular), angular)),
        Format::Text => Ok(format!("{name} = 2pi x {} ({angular:.6e} rad/s)\n", si(hz(angular), "Hz"))),
    }
}

fn run_validate(args: &ValidateArgs) -> Result<(String, bool)> {
    let xis: Vec<f64> = (-10..=10).map(|i| 0.05 * f64::from(i)).collect();
    let disp = displacement_check(10, &xis)?;
    let ratios: &[f64] = if args.quick { &[25.0, 50.0, 100.0] } else { &[50.0, 100.0, 200.0, 400.0] };
    let elim = elimination_scan(ratios, 400, &SCAN_OPTIONS)?;
    let at100 = elim.points.iter().find(|p| p.ratio == 100.0).map_or(f64::NAN, |p| p.max_population_error);
    let disp_ok = disp.max_element_error <= 1e-9 && disp.max_row_unitarity_error <= 1e-9;
    let elim_ok = (elim.slope - 2.0).abs() <= 0.4 && at100 <= 1e-3;
    let out = match args.format {
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({
                "displacement": disp,
                "elimination": elim,
                "passed": disp_ok && elim_ok,
            }))? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("check,value\n");
            let _ = writeln!(s, "displacement_max_element_error,{:e}", disp.max_element_error);
            let _ = writeln!(s, "displacement_max_row_unitarity_error,{:e}", disp.max_row_unitarity_error);
            for p in &elim.points {
                let _ = writeln!(s, "elimination_error_ratio_{},{:e}", p.ratio, p.max_population_error);
            }
            let _ = writeln!(s, "elimination_slope,{}", elim.slope);
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "displacement vs matrix exponential: max element error {:.3e}, max row unitarity error {:.3e} [{}]",
                disp.max_element_error,
                disp.max_row_unitarity_error,
                if disp_ok { "ok" } else { "FAILED" }
            );
            for p in &elim.points {
                let _ = writeln!(
                    s,
                    "full integration, Delta/Omega = {:>5}: max population error {:.3e}, max upper population {:.3e}, norm drift {:.1e}",
                    p.ratio, p.max_population_error, p.max_upper_population, p.max_norm_drift
                );
            }
            let _ = writeln!(
                s,
                "error scaling slope {:.3} (expected 2) [{}]",
                elim.slope,
                if elim_ok { "ok" } else { "FAILED" }
            );
            s
        }
    };
    Ok((out, disp_ok && elim_ok))
}

/// Runs the parsed command and returns its output and whether all
/// checks passed (only `validate` can report false).
pub fn execute(cli: &Cli) -> Result<(String, bool)> {
    let data = || AtomicData::load_or_bundled(cli.atomic_data.as_deref());
    match &cli.command {
        Command::Rabi(a) => {
            let mut sc = Scenario::load(a.scenario.as_deref())?;
            a.apply(&mut sc);
            sc.check()?;
            let st = setup(&sc, &data()?)?;
            let out = match a.format {
                Format::Json => serde_json::to_string_pretty(&st.report)? + "\n",
                Format::Text => rabi_text(&st.report),
                Format::Csv => {
                    let mut s = String::from("level,detuning_hz,pump_rabi_i_re_hz,pump_rabi_i_im_hz,stokes_rabi_j_re_hz,stokes_rabi_j_im_hz\n");
                    for u in &st.report.upper_levels {
                        let _ = writeln!(
                            s,
                            "{},{:e},{:e},{:e},{:e},{:e}",
                            u.level, u.detuning_hz, u.pump_rabi_i_hz[0], u.pump_rabi_i_hz[1], u.stokes_rabi_j_hz[0], u.stokes_rabi_j_hz[1]
                        );
                    }
                    s
                }
            };
            Ok((out, true))
        }
        Command::Pulse(a) => Ok((run_pulse(a, &data()?)?, true)),
        Command::Gate(a) => Ok((run_gate(a)?, true)),
        Command::Modes(a) => Ok((run_modes(a)?, true)),
        Command::Budget(a) => Ok((run_budget(a, &data()?)?, true)),
        Command::Cool(a) => {
            let d = data()?;
            let t = d.transition(&a.transition)?;
            let bound = sideband_bound(a.n, a.nbar, t.wavelength, d.ion_mass, &d.constants)?;
            Ok((scalar_out("sideband_cooling_bound", bound, a.format)?, true))
        }
        Command::Zeeman(a) => {
            let d = data()?;
            Ok((scalar_out("zeeman_splitting", zeeman_splitting(a.gauss, &d.constants)?, a.format)?, true))
        }
        Command::Validate(a) => run_validate(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 for physics or data errors (and failed validation), 2 for
/// usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, passed)) => {
            let _ = write!(out, "{text}");
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Argument(_) => 2,
                _ => 1,
            }
        }
    }
}
