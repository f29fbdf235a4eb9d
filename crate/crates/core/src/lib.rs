//! Simulation and diagnostics for classical hidden-variable models of a
//! spin-½ measurement: a charged particle on a great circle probed by pairs of
//! antipodal charges.
//!
//! * [`model`]: the hidden-variable space, device response and collapse.
//! * [`variations`]: measurement protocols and their closed-form laws.
//! * [`pitowsky`]: frequency experiments on random sphere colorings.
//! * [`bell`]: CHSH estimates, postselection, and three-variable feasibility.
//! * [`mc`]: seeded substreams and streaming estimators.
//! * [`cli`]: experiment configs, dispatch and result files.

pub mod angle;
pub mod bell;
pub mod cli;
pub mod error;
pub mod mc;
pub mod model;
pub mod pitowsky;
pub mod variations;

pub use angle::Angle;
pub use error::{Error, Result};
pub use model::{Outcome, ParticleState};
