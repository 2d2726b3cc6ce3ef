//! Stimulated-Raman quantum logic for trapped Ca⁺-like ions.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] – Wigner 3j symbols, associated Laguerre polynomials and
//!   oscillator displacement matrix elements.
//! * [`atomic`] – level scheme, transitions, isotopes and physical constants.
//! * [`trapmodes`] – linear ion-chain equilibrium and axial normal modes.
//! * [`raman`] – single-photon and effective two-photon couplings, Stark
//!   shifts, Lamb-Dicke factors.
//! * [`dynamics`] – closed-form pulse propagators, qubit⊗phonon state
//!   vectors, the Cirac–Zoller phase gate and a full multi-level integrator.
//! * [`budget`] – laser power estimates, sideband-cooling bound and Zeeman
//!   splittings.
//! * [`oracle`] – brute-force reference computations used by `validate`.

pub mod atomic;
pub mod budget;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod oracle;
pub mod raman;
pub mod specfun;
pub mod trapmodes;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
