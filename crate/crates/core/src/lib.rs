//! Nonlinear AMLI-cycle multigrid for sparse SPD systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: CSR storage, vector kernels, Galerkin triple products, the
//!   dense coarsest-level solver and power iteration.
//! - [`problems`]: linear finite-element discretisations of the Poisson and
//!   jump-coefficient diffusion problems on the unit square.
//! - [`hierarchy`]: geometric (nested mesh) and unsmoothed-aggregation
//!   multilevel hierarchies.
//! - [`smoothers`]: Gauss-Seidel, Jacobi and Richardson smoothers with their
//!   adjoints and symmetrised composites.
//! - [`cycles`]: the linear `\`-cycle and V-cycle.
//! - [`amli`]: nonlinear preconditioned CG, the nonlinear AMLI cycles and the
//!   outer stationary iteration.
//! - [`verify`]: executable checks of the convergence theory on small dense
//!   instances.
//! - [`experiment`]: table-producing experiment runner used by the CLI.
//!
//! With the default `parallel` feature, sparse products and independent
//! sample or table evaluations run on the rayon thread pool. Results are
//! identical with the feature disabled.

pub mod amli;
pub mod cycles;
pub mod error;
pub mod experiment;
pub mod hierarchy;
pub mod linalg;
pub mod par;
pub mod problems;
pub mod rng;
pub mod smoothers;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CsrMatrix;
