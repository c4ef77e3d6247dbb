//! Design and simulation toolkit for heralded photon-pair sources built from
//! four-wave mixing in germanium-doped photonic crystal fibre.
//!
//! The crate follows the physical chain of such a source:
//!
//! - [`dispersion`]: material and waveguide index models, measured GVD
//!   ingestion and the gauge-fixed propagation constant β(ω).
//! - [`phasematch`]: energy conservation and phase matching for a
//!   degenerately pumped FWM process, including the pump-tuning contour.
//! - [`jsa`]: joint spectral intensity, stimulated-emission tomography scans
//!   and heralded marginals behind a spectral filter.
//! - [`fbg`]: uniform fibre Bragg gratings (coupled-mode closed form and a
//!   transfer-matrix cross-check) and their use as an idler filter.
//! - [`counting`]: Monte Carlo and closed-form coincidence counting, CAR and
//!   pump-power sweeps.

pub mod counting;
pub mod dispersion;
mod error;
pub mod fbg;
pub mod jsa;
pub mod phasematch;
mod numeric;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
