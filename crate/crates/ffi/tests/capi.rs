use std::ffi::{c_char, CStr, CString};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ionraman_ffi::*;

fn last_error() -> String {
    let n = ir_last_error_length();
    let mut buf = vec![0 as c_char; n + 1];
    let full = unsafe { ir_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(full, n);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    // (1/2 1/2 1; 1/2 -1/2 0) = 1/√6
    assert_eq!(unsafe { ir_wigner3j(1, 1, 2, 1, -1, 0, &mut v) }, IrStatus::Ok);
    assert!((v - 1.0 / 6f64.sqrt()).abs() < 1e-14);
    assert_eq!(unsafe { ir_wigner3j(1, 1, 2, 2, -1, 0, &mut v) }, IrStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    assert!((ir_laguerre(1, 2, 0.5) - 1.625).abs() < 1e-14);

    let mut z = IrComplex::default();
    assert_eq!(unsafe { ir_displacement_element(0, 0, 0.3, &mut z) }, IrStatus::Ok);
    assert!((z.re - (-0.045f64).exp()).abs() < 1e-14 && z.im.abs() < 1e-15);
    assert_eq!(unsafe { ir_displacement_element(0, 0, f64::NAN, &mut z) }, IrStatus::InvalidArgument);

    assert_eq!(unsafe { ir_zeeman_splitting(1.0, &mut v) }, IrStatus::Ok);
    assert!((v / (2.0 * PI * 1.4e6) - 1.0).abs() < 0.01);
    assert_eq!(unsafe { ir_sideband_bound(10, 1.0, 397e-9, 40.0 * 1.66054e-27, &mut v) }, IrStatus::Ok);
    assert!((v / (2.0 * PI * 3.16e3) - 1.0).abs() < 0.01);
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(unsafe { ir_zeeman_splitting(1.0, ptr::null_mut()) }, IrStatus::NullPointer);
    assert!(last_error().contains("result"));
    assert_eq!(unsafe { ir_required_power(ptr::null(), ptr::null_mut()) }, IrStatus::NullPointer);
    assert_eq!(unsafe { ir_state_norm(ptr::null()) }.is_nan(), true);
    unsafe {
        ir_state_free(ptr::null_mut());
        ir_modes_free(ptr::null_mut());
    }
}

#[test]
fn power_scenario() {
    let sc = IrPowerScenario {
        mode: IrPowerMode::RamanU,
        rabi: 2.0 * PI * 1e6,
        detuning: 2.0 * PI * 10e9,
        wavelength: 396.959e-9,
        lifetime: 7.1e-9,
        diameter: 100e-6,
        eta: 0.1,
        n_ions: 10,
    };
    let mut p = 0.0;
    assert_eq!(unsafe { ir_required_power(&sc, &mut p) }, IrStatus::Ok);
    assert!(p > 1e-3 && p < 5e-3, "{p}");
    let missing = IrPowerScenario { eta: f64::NAN, ..sc };
    assert_eq!(unsafe { ir_required_power(&missing, &mut p) }, IrStatus::InvalidArgument);
}

#[test]
fn propagator_is_unitary() {
    let pulse = IrPulse { kind: IrPulseKind::U, theta: 1.3, phase: 0.4, chi: -0.2, common_phase: 3.0, excited_level: 1 };
    let mut m = [IrComplex::default(); 4];
    assert_eq!(unsafe { ir_two_level_propagator(&pulse, m.as_mut_ptr()) }, IrStatus::Ok);
    for col in 0..2 {
        let n: f64 = (0..2).map(|r| m[2 * r + col].re.powi(2) + m[2 * r + col].im.powi(2)).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }
    assert!(((m[0].re.powi(2) + m[0].im.powi(2)).sqrt() - (0.65f64).cos()).abs() < 1e-14);
}

#[test]
fn mode_handles() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ir_modes_new(3, &mut h) }, IrStatus::Ok);
    assert_eq!(unsafe { ir_modes_count(h) }, 3);
    let mut mu = 0.0;
    let mut b = 0.0;
    unsafe {
        assert_eq!(ir_modes_eigenvalue(h, 2, &mut mu), IrStatus::Ok);
        assert!((mu - 5.8).abs() < 1e-10);
        assert_eq!(ir_modes_vector(h, 0, 1, &mut b), IrStatus::Ok);
        assert!((b.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(ir_modes_eigenvalue(h, 3, &mut mu), IrStatus::InvalidArgument);
        ir_modes_free(h);
    }
    assert_eq!(unsafe { ir_modes_new(0, &mut h) }, IrStatus::InvalidArgument);
}

#[test]
fn state_handles() {
    let bits = [1u8, 1];
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(ir_state_computational(bits.as_ptr(), 2, 3, 3, &mut s), IrStatus::Ok);
        assert_eq!(ir_state_dim(s), 9 * 16);
        assert_eq!(ir_state_cz(s, 0, 1, 2, 0.1), IrStatus::Ok);
        assert!((ir_state_norm(s) - 1.0).abs() < 1e-12);

        let mut needed = 0;
        assert_eq!(ir_state_to_json(s, ptr::null_mut(), 0, &mut needed), IrStatus::Ok);
        let mut buf = vec![0 as c_char; needed + 1];
        assert_eq!(ir_state_to_json(s, buf.as_mut_ptr(), buf.len(), ptr::null_mut()), IrStatus::Ok);
        let json = CStr::from_ptr(buf.as_ptr()).to_owned();
        ir_state_free(s);

        let mut t = ptr::null_mut();
        assert_eq!(ir_state_from_json(json.as_ptr(), &mut t), IrStatus::Ok);
        let mut amps = vec![IrComplex::default(); ir_state_dim(t)];
        assert_eq!(ir_state_amplitudes(t, amps.as_mut_ptr(), amps.len()), IrStatus::Ok);
        // |11⟩|00⟩ picks up the sign
        let big: Vec<&IrComplex> = amps.iter().filter(|a| a.re.abs() > 0.5).collect();
        assert_eq!(big.len(), 1);
        assert!((big[0].re + 1.0).abs() < 1e-9);
        assert_eq!(ir_state_amplitudes(t, amps.as_mut_ptr(), 3), IrStatus::InvalidArgument);

        let u = IrPulse { kind: IrPulseKind::U, theta: PI, phase: 0.0, chi: 0.0, common_phase: 0.0, excited_level: 1 };
        assert_eq!(ir_state_apply_pulse(t, &u, 0, f64::NAN), IrStatus::Ok);
        assert_eq!(ir_state_apply_pulse(t, &u, 0, f64::NAN), IrStatus::Ok);
        assert_eq!(ir_state_apply_pulse(t, &u, 5, f64::NAN), IrStatus::InvalidArgument);
        ir_state_free(t);

        let bad = CString::new("{\"n_ions\": 1}").unwrap();
        assert_eq!(ir_state_from_json(bad.as_ptr(), &mut t), IrStatus::Json);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ir_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ionraman.h")).unwrap();
    for name in [
        "IrStatus ir_wigner3j(",
        "double ir_laguerre(",
        "IrStatus ir_state_cz(",
        "typedef struct IrState IrState;",
        "typedef struct IrModes IrModes;",
        "IR_STATUS_TRUNCATION = 5",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles and runs a small C program against the static library.
#[test]
fn c_program_links() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libionraman_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "ionraman.h"
int main(void) {
    double v = 0.0;
    if (ir_wigner3j(1, 1, 2, 1, -1, 0, &v) != IR_STATUS_OK) return 1;
    if (fabs(v - 1.0 / sqrt(6.0)) > 1e-14) return 2;
    IrModes *m = NULL;
    if (ir_modes_new(2, &m) != IR_STATUS_OK) return 3;
    double mu = 0.0;
    ir_modes_eigenvalue(m, 1, &mu);
    ir_modes_free(m);
    if (fabs(mu - 3.0) > 1e-10) return 4;
    if (ir_zeeman_splitting(-1.0, &v) == IR_STATUS_OK) return 5;
    char msg[256];
    ir_last_error_message(msg, sizeof msg);
    printf("%s\n", msg);
    return 0;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
