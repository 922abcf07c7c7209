//! Analysis and design toolkit for diffusive molecular communication links
//! between mobile nanomachines with a fully absorbing spherical receiver.
//!
//! The crate is organized bottom-up:
//! - [`numerics`]: special functions, quadrature, root finding, LP solver
//! - [`channel`]: geometry, diffusion parameters, impulse response, distance law
//! - [`stats`]: moments and distribution of the time-variant impulse response
//! - [`sim`]: Brownian Monte Carlo reference simulations
//! - [`drug`]: release-rate design for targeted drug delivery
//! - [`link`]: on-off-keying link design under imperfect channel knowledge

pub mod channel;
pub mod drug;
pub mod error;
pub mod link;
pub mod numerics;
pub mod sim;
pub mod stats;

pub use channel::{DistanceLaw, EnvParams};
pub use drug::{DrugDesignProblem, DrugDesignResult, ReleaseSchedule};
pub use error::{Error, Result};
pub use link::{FrameDuration, McDesignResult, McLinkConfig};
pub use numerics::QuadratureSpec;
pub use sim::{SimConfig, SimMode};
pub use stats::CirStatistics;
