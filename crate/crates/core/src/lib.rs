//! Third-order four-wave-mixing signals for few-level excitonic systems.
//!
//! The crate enumerates the Liouville pathways that survive the rotating-wave
//! and phase-matching selection rules for rephasing, nonrephasing and
//! two-quantum pulse orderings, reduces each one to a complex amplitude with
//! three interval frequencies, and assembles time-domain signals, stick
//! spectra and broadened 2D spectra from them.
//!
//! Two independent routes check the pathway sum: [`dense`] propagates the full
//! density matrix with explicit matrix products, and [`dimer_oracle`] holds
//! the closed-form heterodimer spectra.

pub mod config;
pub mod dense;
pub mod dimer_oracle;
pub mod error;
pub mod exec;
pub mod model;
pub mod output;
pub mod pathway;
pub mod response;
pub mod run;
pub mod spectra;
pub mod triangle;
pub mod units;

pub use error::{Error, Result};
pub use model::{ExcitonSystem, MixingAngleReport, SiteDimerParams};
pub use pathway::{ExperimentKind, Pathway, PathwayClass};
pub use response::{FieldSet, PathwayAmplitude};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
