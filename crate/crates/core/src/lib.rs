//! Regularized spectral solver for the ill-posed Cauchy problem
//!
//! u_tt = A u + f(t, u),  u(0) = phi,  u_t(0) = g,
//!
//! where A is a positive self-adjoint operator with known eigenpairs
//! (the default is -d^2/dx^2 on (0,1) with Dirichlet conditions).
//! Forward-in-time evaluation of the mild solution amplifies every data
//! error by exp(sqrt(lambda_p) t), so the problem is ill-posed; the library
//! replaces the growing hyperbolic kernels with damped variants whose gain
//! is capped at eps^(-t/T) and solves the resulting integral equation by
//! time marching or Picard iteration.

pub mod error;
pub mod harness;
pub mod kernels;
pub mod model;
pub mod noise;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use harness::{ErrorReport, ExperimentConfig, NoiseSetting, OutputFormat, SolverChoice};
pub use kernels::RegParams;
pub use model::{BenchmarkProblem, CauchyData, SourceKind, SourceSpec};
pub use noise::{NoiseKind, NoiseModel, SplitMix64};
pub use solver::{Grid, RegularizedSolution, TerminalSolution};
pub use spectral::{EigenBasis, QuadratureRule};
