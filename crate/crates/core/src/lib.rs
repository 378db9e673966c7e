//! Open-loop Nash equilibria of the networked opinion-dynamics game.
//!
//! Agent `i` steers its opinion `x^i` with `ẋ^i = u^i` and minimises
//!
//! ```text
//! ½ ∫_0^T [ Σ_j w_ij (x^i − x^j)² + k_i (x^i − x0^i)² + (u^i)² ] dt
//! ```
//!
//! The crate assembles the coupling matrices of a network ([`graph`]),
//! solves the state/costate boundary value problem ([`solver`]), evaluates
//! the analytic solutions of the complete uniform graph and the
//! single-leader star ([`closed_form`]), and certifies the Nash property
//! independently ([`verify`]).
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! `f64`.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod graph;
pub mod kernels;
pub mod linalg;
pub mod presets;
pub mod scalar;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use closed_form::{ClosedForm, CompleteUniformParams, LeaderParams};
pub use error::{Error, Result};
pub use graph::{build_matrices, classify_topology, Diagnostic, Edge, GameMatrices, InfluenceNetwork, Severity, Topology};
pub use linalg::{DenseMatrix, LinalgConfig};
pub use scalar::Real;
pub use solver::{solve_equilibrium, BlockTransition, EquilibriumTrajectory, SolverConfig, SpectralData, StateCostateSystem};
pub use verify::{BestResponseResult, CostBreakdown};

pub type Network = InfluenceNetwork<f64>;
pub type Matrices = GameMatrices<f64>;
pub type Matrix = DenseMatrix<f64>;
pub type Blocks = BlockTransition<f64>;
pub type Spectral = SpectralData<f64>;
pub type Trajectory = EquilibriumTrajectory<f64>;
pub type Costs = CostBreakdown<f64>;
pub type BestResponse = BestResponseResult<f64>;
pub type CompleteParams = CompleteUniformParams<f64>;
pub type StarParams = LeaderParams<f64>;
