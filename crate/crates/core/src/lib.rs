//! Coverage analysis for ground users served by millimeter-wave UAV base
//! stations: closed-form coverage probability, a Monte Carlo simulator of the
//! same scenario, and sweep tooling.

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use analytic::{coverage_probability, optimal_height, CoverageBreakdown, CoverageModel, NetworkConfig};
pub use channel::{ChannelParams, Geometry, LinkState, LosModel};
pub use error::{Error, Result};
pub use montecarlo::{estimate_coverage, McEstimate};
pub use quadrature::QuadratureSettings;
pub use special::NakagamiParams;
