//! Welfare-optimal mobile data offloading between one network operator and
//! many access-point owners, with Nash-bargaining payoff division.
//!
//! The pipeline is: build a [`model::Scenario`], find the social optimum with
//! [`optimizer::socially_optimal`], then split the welfare with one of the
//! protocols in [`bargaining`]. [`stackelberg`] gives the non-cooperative
//! pricing benchmark, and [`oracle`] holds slow brute-force cross-checks.

pub mod bargaining;
pub mod cli;
pub mod error;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod stackelberg;
pub mod welfare;

pub use error::{Infeasible, ModelError, SolveError};
pub use model::{
    ApoParams, BargainOutcome, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Protocol,
    Scenario,
};
