//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ionraman::atomic::{AtomicData, CODATA};
use ionraman::budget::{budget_table, sideband_bound, standard_roles, zeeman_splitting, BudgetParams};
use ionraman::dynamics::{
    apply_pulse, cz_gate_sequence, two_level_propagator, unitarity_defect, ChainCoupling, PulseKind,
    PulseSpec, StateVector,
};
use ionraman::oracle::{displacement_check, elimination_scan, SCAN_OPTIONS};
use ionraman::raman::{coupling_factor, LambDicke, PhononRegister};
use ionraman::trapmodes::{equilibrium_positions, modes_for};
use ionraman::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn table_reproduction() -> Outcome {
    let data = AtomicData::bundled();
    let roles = match standard_roles(&data, &BudgetParams::default()) {
        Ok(r) => r,
        Err(e) => return check(false, e.to_string()),
    };
    let rows = match budget_table(&data, &roles) {
        Ok(r) => r,
        Err(e) => return check(false, e.to_string()),
    };
    let power = |name: &str| rows.iter().find(|r| r.transition == name).map_or(f64::NAN, |r| r.power);
    let (p397, p866, p729) = (power("397"), power("866"), power("729"));
    let ok729 = (p729 / 0.2 - 1.0).abs() <= 0.3;
    let ok397 = (p397 / 0.5e-3).log10().abs() <= 1.0;
    let ok866 = (p866 / 0.1e-6).log10().abs() <= 1.0;
    check(
        ok729 && ok397 && ok866 && rows.len() == 3,
        format!("397 nm {:.3} mW, 866 nm {:.3} uW, 729 nm {:.3} W", p397 * 1e3, p866 * 1e6, p729),
    )
}

fn elimination_validation() -> Outcome {
    let ratios = [50.0, 100.0, 200.0, 400.0];
    match elimination_scan(&ratios, 400, &SCAN_OPTIONS) {
        Ok(report) => {
            let at100 = report.points[1].max_population_error;
            let errs: Vec<String> =
                report.points.iter().map(|p| format!("{:.0}:{:.2e}", p.ratio, p.max_population_error)).collect();
            check(
                (report.slope - 2.0).abs() <= 0.4 && at100 <= 1e-3,
                format!("slope {:.3}, errors [{}]", report.slope, errs.join(", ")),
            )
        }
        Err(e) => check(false, e.to_string()),
    }
}

fn displacement_oracle() -> Outcome {
    let xis: Vec<f64> = (-10..=10).map(|i| 0.05 * i as f64).collect();
    match displacement_check(10, &xis) {
        Ok(r) => check(
            r.max_element_error <= 1e-9 && r.max_row_unitarity_error <= 1e-9,
            format!(
                "max element error {:.2e}, max row unitarity error {:.2e}",
                r.max_element_error, r.max_row_unitarity_error
            ),
        ),
        Err(e) => check(false, e.to_string()),
    }
}

fn coupling_asymptotics() -> Outcome {
    let mut worst_v: f64 = 0.0;
    let mut worst_u: f64 = 0.0;
    let mut ok = true;
    for n in [1usize, 2, 10] {
        let modes = match modes_for(n) {
            Ok(m) => m,
            Err(e) => return check(false, e.to_string()),
        };
        for eta in [0.05, 0.1, 0.2] {
            for ion in 0..n {
                let ld = LambDicke::new(eta, &modes, ion).expect("valid ion");
                let vac = PhononRegister::vacuum(n);
                let one = PhononRegister::single(n, 0);
                let fv = coupling_factor(&vac, &vac, &ld).expect("matching registers");
                let fu = coupling_factor(&one, &vac, &ld).expect("matching registers");
                let dv = (fv - 1.0).norm() / (eta * eta);
                let du = (fu.norm() - eta / (n as f64).sqrt()).abs() / (eta * eta);
                worst_v = worst_v.max(dv);
                worst_u = worst_u.max(du);
                ok &= dv <= 2.0 && du <= 2.0;
            }
        }
    }
    check(ok, format!("max |f-1|/eta^2 = {worst_v:.3}, max ||f|-eta/sqrt(N)|/eta^2 = {worst_u:.3}"))
}

fn cz_gate() -> Outcome {
    let modes = modes_for(2).expect("two-ion modes");
    let coupling = ChainCoupling::new(0.1, &modes).expect("coupling");
    let mut min_fidelity: f64 = 1.0;
    let mut min_vacuum: f64 = 1.0;
    let mut phases = [0.0; 4];
    for (k, bits) in [[0u8, 0], [0, 1], [1, 0], [1, 1]].into_iter().enumerate() {
        let input = StateVector::computational(&bits, 2, 4, 3).expect("basis state");
        let out = match cz_gate_sequence(&input, 0, 1, 2, Some(&coupling)) {
            Ok(s) => s,
            Err(e) => return check(false, e.to_string()),
        };
        let overlap = input.inner(&out).expect("same register");
        min_fidelity = min_fidelity.min(overlap.norm_sqr());
        let excited: f64 = (0..out.n_modes).map(|m| out.excited_population(m)).sum();
        min_vacuum = min_vacuum.min(1.0 - excited);
        phases[k] = overlap.arg();
    }
    let conditional = C64::from_polar(1.0, phases[3] - phases[2] - phases[1] + phases[0]);
    check(
        min_fidelity >= 0.999 && min_vacuum >= 1.0 - 1e-9 && (conditional + 1.0).norm() < 1e-9,
        format!(
            "min fidelity {min_fidelity:.12}, min vacuum return {min_vacuum:.12}, conditional phase {:.6} rad",
            conditional.arg()
        ),
    )
}

fn mode_structure() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=20 {
        match modes_for(n) {
            Ok(m) => {
                worst = worst.max((m.eigenvalues[0] - 1.0).abs()).max((m.eigenvalues[1] - 3.0).abs());
            }
            Err(e) => return check(false, e.to_string()),
        }
    }
    let u = equilibrium_positions(2).expect("two ions");
    let expected = 2f64.powf(-2.0 / 3.0);
    let pos_err = (u[0] + expected).abs().max((u[1] - expected).abs());
    check(
        worst <= 1e-10 && pos_err <= 1e-12,
        format!("max |mu - exact| {worst:.2e}, N=2 position error {pos_err:.2e}"),
    )
}

fn sideband_and_zeeman() -> Outcome {
    let data = AtomicData::bundled();
    let bound = sideband_bound(10, 1.0, 397e-9, data.ion_mass, &CODATA).expect("valid inputs");
    let zeeman = zeeman_splitting(1.0, &CODATA).expect("valid field");
    let rb = bound / (TAU * 3.16e3) - 1.0;
    let rz = zeeman / (TAU * 1.4e6) - 1.0;
    check(
        rb.abs() <= 0.01 && rz.abs() <= 0.01,
        format!("bound 2pi x {:.4} kHz, Zeeman 2pi x {:.5} MHz/G", bound / TAU / 1e3, zeeman / TAU / 1e6),
    )
}

fn random_pulse(rng: &mut ChaCha8Rng, kind: PulseKind) -> PulseSpec {
    PulseSpec {
        chi: rng.random_range(-PI..PI),
        common_phase: rng.random_range(-10.0..10.0),
        ..PulseSpec::ideal(kind, rng.random_range(0.0..4.0 * PI), rng.random_range(-PI..PI))
    }
}

fn unitarity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_u: f64 = 0.0;
    for _ in 0..1000 {
        let kind = if rng.random_bool(0.5) { PulseKind::U } else { PulseKind::V };
        worst_u = worst_u.max(unitarity_defect(&two_level_propagator(&random_pulse(&mut rng, kind))));
    }

    let modes = modes_for(2).expect("two-ion modes");
    let coupling = ChainCoupling::new(0.1, &modes).expect("coupling");
    let mut worst_norm: f64 = 0.0;
    for _ in 0..100 {
        let mut state = StateVector::zeros(2, 2, 2, 9).expect("register");
        for q0 in 0..2u8 {
            for q1 in 0..2u8 {
                for n in 0..2u32 {
                    let label = format!("q:{q0}{q1}|ph:{n}0").parse().expect("label");
                    state
                        .set_amplitude(&label, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .expect("in range");
                }
            }
        }
        let norm = state.norm();
        let scaled: Vec<(_, _)> = state.nonzero().map(|(s, a)| (s, a / norm)).collect();
        for (s, a) in scaled {
            state.set_amplitude(&s, a).expect("in range");
        }
        for _ in 0..6 {
            let kind = if rng.random_bool(0.5) { PulseKind::U } else { PulseKind::V };
            let ion = rng.random_range(0..2);
            state = match apply_pulse(&state, &random_pulse(&mut rng, kind), ion, Some(&coupling)) {
                Ok(s) => s,
                Err(e) => return check(false, e.to_string()),
            };
        }
        worst_norm = worst_norm.max((state.norm() - 1.0).abs());
    }
    check(
        worst_u <= 1e-12 && worst_norm <= 1e-9,
        format!("max ||U^dag U - I|| {worst_u:.2e}, max norm drift {worst_norm:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("1 power budget table", table_reproduction, Duration::from_secs(1)),
        ("2 adiabatic elimination vs full integration", elimination_validation, Duration::from_secs(60)),
        ("3 displacement element oracle", displacement_oracle, Duration::from_secs(10)),
        ("4 coupling factor asymptotics", coupling_asymptotics, Duration::from_secs(1)),
        ("5 controlled-phase gate", cz_gate, Duration::from_secs(10)),
        ("6 mode structure", mode_structure, Duration::from_secs(5)),
        ("7 sideband bound and Zeeman splitting", sideband_and_zeeman, Duration::from_secs(1)),
        ("8 unitarity suite", unitarity_suite, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let ok = outcome.ok && elapsed <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} ({:.3} s, limit {} s)",
            if ok { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
