//! C interface to `ionraman`.
//!
//! Every fallible function returns an [`IrStatus`]; on failure the message is
//! kept per thread and can be read with [`ir_last_error_message`]. Mode
//! systems and state vectors are opaque handles released with their `_free`
//! function. Optional `f64` inputs are NaN when absent.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ionraman::atomic::CODATA;
use ionraman::budget::{required_power, sideband_bound, zeeman_splitting, PowerMode, PowerScenario};
use ionraman::dynamics::{
    apply_pulse, cz_gate_sequence, two_level_propagator, ChainCoupling, PulseKind, PulseSpec, StateVector,
};
use ionraman::specfun::{displacement_element, laguerre, wigner3j, HalfInt, Xi};
use ionraman::trapmodes::{modes_for, ModeSystem};
use ionraman::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrStatus {
    Ok = 0,
    InvalidArgument = 1,
    Singularity = 2,
    Numerical = 3,
    Precondition = 4,
    Truncation = 5,
    Data = 6,
    Io = 7,
    Json = 8,
    NullPointer = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IrComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for IrComplex {
    fn from(z: Complex64) -> Self {
        IrComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrPulseKind {
    V = 0,
    U = 1,
}

/// Pulse parameters; `theta`, `phase`, `chi` and `common_phase` in radians.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IrPulse {
    pub kind: IrPulseKind,
    pub theta: f64,
    pub phase: f64,
    pub chi: f64,
    pub common_phase: f64,
    /// Internal level paired with |0⟩ (1 for the qubit).
    pub excited_level: u8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IrPowerMode {
    SingleLaserV = 0,
    RamanV = 1,
    RamanU = 2,
    Saturation = 3,
}

/// SI units, angular frequencies in rad/s. Unused fields are NaN (or 0 for
/// `n_ions`).
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct IrPowerScenario {
    pub mode: IrPowerMode,
    pub rabi: f64,
    pub detuning: f64,
    pub wavelength: f64,
    pub lifetime: f64,
    pub diameter: f64,
    pub eta: f64,
    pub n_ions: usize,
}

/// Opaque axial mode system.
pub struct IrModes(ModeSystem);

/// Opaque register state.
pub struct IrState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IrStatus {
    match e {
        Error::Argument(_) => IrStatus::InvalidArgument,
        Error::Singularity(_) => IrStatus::Singularity,
        Error::Numerical(_) => IrStatus::Numerical,
        Error::Precondition(_) => IrStatus::Precondition,
        Error::Truncation(_) => IrStatus::Truncation,
        Error::Data(_) => IrStatus::Data,
        Error::Io(_) => IrStatus::Io,
        Error::Json(_) => IrStatus::Json,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IrStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer passed as {name}"));
            IrStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            IrStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

fn optional(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

fn pulse_spec(p: &IrPulse) -> PulseSpec {
    let kind = match p.kind {
        IrPulseKind::V => PulseKind::V,
        IrPulseKind::U => PulseKind::U,
    };
    PulseSpec { chi: p.chi, common_phase: p.common_phase, ..PulseSpec::ideal(kind, p.theta, p.phase) }
        .on_level(p.excited_level)
}

fn chain(eta: f64, n_ions: usize) -> Result<Option<ChainCoupling>, Fail> {
    match optional(eta) {
        None => Ok(None),
        Some(eta) => Ok(Some(ChainCoupling::new(eta, &modes_for(n_ions)?)?)),
    }
}

/// Length in bytes of the last error message of this thread, excluding the
/// terminating NUL; 0 when there is none.
#[no_mangle]
pub extern "C" fn ir_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length excluding the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ir_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ir_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Wigner 3j symbol; all arguments are twice the angular momentum.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ir_wigner3j(
    two_j1: i32,
    two_j2: i32,
    two_j3: i32,
    two_m1: i32,
    two_m2: i32,
    two_m3: i32,
    result: *mut f64,
) -> IrStatus {
    guard(|| {
        let r = out(result, "result")?;
        let h = HalfInt::from_twice;
        *r = wigner3j(h(two_j1), h(two_j2), h(two_j3), h(two_m1), h(two_m2), h(two_m3))?;
        Ok(())
    })
}

/// Generalised Laguerre polynomial L^a_n(x).
#[no_mangle]
pub extern "C" fn ir_laguerre(a: u32, n: u32, x: f64) -> f64 {
    laguerre(a, n, x)
}

/// ⟨m| exp[iξ(a† + a)] |n⟩.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ir_displacement_element(m: u32, n: u32, xi: f64, result: *mut IrComplex) -> IrStatus {
    guard(|| {
        let r = out(result, "result")?;
        *r = displacement_element(m, n, Xi::new(xi)?).into();
        Ok(())
    })
}

/// Laser power (W) for a scenario.
///
/// # Safety
/// `scenario` must be readable and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ir_required_power(scenario: *const IrPowerScenario, result: *mut f64) -> IrStatus {
    guard(|| {
        let s = input(scenario, "scenario")?;
        let r = out(result, "result")?;
        let sc = PowerScenario {
            mode: match s.mode {
                IrPowerMode::SingleLaserV => PowerMode::SingleLaserV,
                IrPowerMode::RamanV => PowerMode::RamanV,
                IrPowerMode::RamanU => PowerMode::RamanU,
                IrPowerMode::Saturation => PowerMode::Saturation,
            },
            rabi: optional(s.rabi),
            detuning: optional(s.detuning),
            wavelength: s.wavelength,
            lifetime: s.lifetime,
            diameter: s.diameter,
            eta: optional(s.eta),
            n_ions: (s.n_ions > 0).then_some(s.n_ions),
        };
        *r = required_power(&sc, &CODATA)?;
        Ok(())
    })
}

/// Minimum axial frequency (rad/s) for sideband cooling to `nbar`.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ir_sideband_bound(
    n_ions: usize,
    nbar: f64,
    wavelength: f64,
    mass: f64,
    result: *mut f64,
) -> IrStatus {
    guard(|| {
        let r = out(result, "result")?;
        *r = sideband_bound(n_ions, nbar, wavelength, mass, &CODATA)?;
        Ok(())
    })
}

/// Ground-state Zeeman splitting (rad/s) at `gauss`.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ir_zeeman_splitting(gauss: f64, result: *mut f64) -> IrStatus {
    guard(|| {
        let r = out(result, "result")?;
        *r = zeeman_splitting(gauss, &CODATA)?;
        Ok(())
    })
}

/// Two-level propagator of a pulse, row-major into `matrix[4]`.
///
/// # Safety
/// `pulse` must be readable and `matrix` writable for four elements.
#[no_mangle]
pub unsafe extern "C" fn ir_two_level_propagator(pulse: *const IrPulse, matrix: *mut IrComplex) -> IrStatus {
    guard(|| {
        let p = input(pulse, "pulse")?;
        if matrix.is_null() {
            return Err(Fail::Null("matrix"));
        }
        let u = two_level_propagator(&pulse_spec(p));
        let m = std::slice::from_raw_parts_mut(matrix, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[2 * i + j] = u[(i, j)].into();
            }
        }
        Ok(())
    })
}

/// Axial modes of an `n_ions` chain.
///
/// # Safety
/// `modes` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ir_modes_new(n_ions: usize, modes: *mut *mut IrModes) -> IrStatus {
    guard(|| {
        let m = out(modes, "modes")?;
        *m = Box::into_raw(Box::new(IrModes(modes_for(n_ions)?)));
        Ok(())
    })
}

/// # Safety
/// `modes` must be null or a handle from [`ir_modes_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ir_modes_free(modes: *mut IrModes) {
    if !modes.is_null() {
        drop(Box::from_raw(modes));
    }
}

/// # Safety
/// `modes` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ir_modes_count(modes: *const IrModes) -> usize {
    modes.as_ref().map_or(0, |m| m.0.n_modes())
}

/// μ_p, the squared frequency of mode `mode` in units of ω_x².
///
/// # Safety
/// `modes` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ir_modes_eigenvalue(modes: *const IrModes, mode: usize, result: *mut f64) -> IrStatus {
    guard(|| {
        let m = &input(modes, "modes")?.0;
        let r = out(result, "result")?;
        if mode >= m.n_modes() {
            return Err(Error::Argument(format!("mode {mode} out of range")).into());
        }
        *r = m.eigenvalues[mode];
        Ok(())
    })
}

/// Component b^(p)_s of the normalised eigenvector of mode p at ion s.
///
/// # Safety
/// `modes` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ir_modes_vector(
    modes: *const IrModes,
    mode: usize,
    ion: usize,
    result: *mut f64,
) -> IrStatus {
    guard(|| {
        let m = &input(modes, "modes")?.0;
        let r = out(result, "result")?;
        if mode >= m.n_modes() || ion >= m.n_modes() {
            return Err(Error::Argument(format!("mode {mode} or ion {ion} out of range")).into());
        }
        *r = m.b(mode, ion);
        Ok(())
    })
}

/// Computational basis state with every mode in the vacuum. `bits` holds
/// one internal level per ion.
///
/// # Safety
/// `bits` must be readable for `n_ions` bytes and `state` writable.
#[no_mangle]
pub unsafe extern "C" fn ir_state_computational(
    bits: *const u8,
    n_ions: usize,
    n_max: u32,
    levels: u8,
    state: *mut *mut IrState,
) -> IrStatus {
    guard(|| {
        let s = out(state, "state")?;
        if bits.is_null() {
            return Err(Fail::Null("bits"));
        }
        let bits = std::slice::from_raw_parts(bits, n_ions);
        *s = Box::into_raw(Box::new(IrState(StateVector::computational(bits, n_ions, n_max, levels)?)));
        Ok(())
    })
}

/// Parses a state from its JSON representation.
///
/// # Safety
/// `json` must be a NUL-terminated string and `state` writable.
#[no_mangle]
pub unsafe extern "C" fn ir_state_from_json(json: *const c_char, state: *mut *mut IrState) -> IrStatus {
    guard(|| {
        let s = out(state, "state")?;
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Error::Argument("state JSON is not UTF-8".into()))?;
        *s = Box::into_raw(Box::new(IrState(StateVector::from_json(text)?)));
        Ok(())
    })
}

/// Writes the JSON representation into `buf` (NUL-terminated, truncated to
/// `len`) and its full length excluding the NUL into `needed`.
///
/// # Safety
/// `state` must be a live handle, `buf` null or valid for `len` bytes,
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ir_state_to_json(
    state: *const IrState,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> IrStatus {
    guard(|| {
        let s = &input(state, "state")?.0;
        let text = s.to_json()?;
        if let Some(n) = needed.as_mut() {
            *n = text.len();
        }
        if !buf.is_null() && len > 0 {
            let n = text.len().min(len - 1);
            ptr::copy_nonoverlapping(text.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ir_state_free(state: *mut IrState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ir_state_dim(state: *const IrState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ir_state_norm(state: *const IrState) -> f64 {
    state.as_ref().map_or(f64::NAN, |s| s.0.norm())
}

/// Copies the amplitudes (ordered with ion 0 and mode 0 most significant)
/// into `buf`, which must hold [`ir_state_dim`] elements.
///
/// # Safety
/// `state` must be a live handle and `buf` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn ir_state_amplitudes(state: *const IrState, buf: *mut IrComplex, len: usize) -> IrStatus {
    guard(|| {
        let s = &input(state, "state")?.0;
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if len < s.dim() {
            return Err(Error::Argument(format!("buffer holds {len} of {} amplitudes", s.dim())).into());
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for (d, a) in dst.iter_mut().zip(s.amplitudes()) {
            *d = (*a).into();
        }
        Ok(())
    })
}

/// Applies a pulse to ion `ion` in place. With a finite `eta` each pair
/// rotates at its phonon-dependent rate; NaN gives the ideal pulse.
///
/// # Safety
/// `state` must be a live handle and `pulse` readable.
#[no_mangle]
pub unsafe extern "C" fn ir_state_apply_pulse(
    state: *mut IrState,
    pulse: *const IrPulse,
    ion: usize,
    eta: f64,
) -> IrStatus {
    guard(|| {
        let p = pulse_spec(input(pulse, "pulse")?);
        let s = out(state, "state")?;
        let c = chain(eta, s.0.n_ions)?;
        s.0 = apply_pulse(&s.0, &p, ion, c.as_ref())?;
        Ok(())
    })
}

/// Controlled-phase gate between `control` and `target` in place, using
/// internal level `aux_level` of the target.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ir_state_cz(
    state: *mut IrState,
    control: usize,
    target: usize,
    aux_level: u8,
    eta: f64,
) -> IrStatus {
    guard(|| {
        let s = out(state, "state")?;
        let c = chain(eta, s.0.n_ions)?;
        s.0 = cz_gate_sequence(&s.0, control, target, aux_level, c.as_ref())?;
        Ok(())
    })
}
