//! Sampling-based solvers for matrices that are only available through
//! matrix-vector products.
//!
//! The crate covers least squares and `l_p` regression, rank-`k`
//! approximation, scalar autoregression through Toeplitz operators, and kernel
//! autoregression. Every randomized routine takes an explicit RNG and is
//! deterministic given its seed; [`oracle`] holds the dense references used to
//! check them.

pub mod config;
pub mod error;
pub mod fft;
pub mod kernel_ar;
pub mod leverage;
pub mod linalg;
pub mod lowrank;
pub mod lp;
pub mod ops;
pub mod oracle;
pub mod regression;
pub mod rng;
pub mod sketch;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use kernel_ar::{Kernel, KernelARProblem, KernelSolution, PointSeries, Poly2Solution, TargetAccess};
pub use leverage::{LeverageEstimates, SamplingMatrix};
pub use linalg::DenseMatrix;
pub use lowrank::LowRankResult;
pub use lp::{LewisState, LpSolution};
pub use ops::{
    AugmentedOperator, ComposedOperator, DenseOperator, DiagonalOperator, DifferenceOperator,
    IdentityOperator, LinearOperator, OpCounters, ToeplitzOperator,
};
pub use regression::L2Solution;
