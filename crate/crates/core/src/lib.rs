//! Orbits under the J2 zonal harmonic.
//!
//! * [`main_problem`]: the J2 ("main problem") Hamiltonian in Cartesian and
//!   polar-nodal variables, its vector field and a Dormand–Prince propagator
//!   used as the reference solution.
//! * [`intermediary`]: Deprit's radial intermediary and its closed-form flow.
//! * [`parallax`]: the first-order elimination of the parallax linking the
//!   two, and the resulting semi-analytic propagator.
//! * [`resonance`]: closed-form relations between inclination and the
//!   apsidal, latitude and radial frequencies, including the critical
//!   inclination and rational-resonance scans.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.
//!
//! ```
//! use incres::resonance::critical_inclination;
//!
//! let ic: f64 = critical_inclination(0.1).unwrap();
//! assert!((ic.to_degrees() - 63.444).abs() < 1e-3);
//! ```

// `!(x > 0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod elements;
pub mod error;
pub mod integrator;
pub mod intermediary;
pub mod kepler;
pub mod main_problem;
pub mod parallax;
pub mod rational;
pub mod resonance;
pub mod scalar;
pub mod table;
pub mod validation;

pub use elements::{AnomalyKind, CartesianState, KeplerianElements, PhysicalModel, PolarNodalState, SigmaParameter};
pub use error::{Error, Result};
pub use intermediary::{IntermediaryConstants, QuasiKeplerElements};
pub use main_problem::{PropagationOptions, PropagationResult, TrajectorySamples};
pub use rational::RationalRatio;
pub use resonance::{FrequencyRatio, RatioKind, ResonantInclination};
pub use scalar::Scalar;

pub type PhysicalModelF64 = PhysicalModel<f64>;
pub type PolarNodalStateF64 = PolarNodalState<f64>;
pub type CartesianStateF64 = CartesianState<f64>;
pub type KeplerianElementsF64 = KeplerianElements<f64>;
pub type IntermediaryConstantsF64 = IntermediaryConstants<f64>;
pub type QuasiKeplerElementsF64 = QuasiKeplerElements<f64>;
pub type TrajectorySamplesF64 = TrajectorySamples<f64>;
pub type ResonantInclinationF64 = ResonantInclination<f64>;
