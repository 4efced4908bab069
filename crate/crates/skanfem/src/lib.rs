//! An h-adaptive finite element solver for the Falkner-Skan boundary-layer
//! equation `f''' + f f'' + beta (1 - (f')^2) = 0` on a truncated domain
//! `[0, eta_inf]`, with an independent shooting-method reference solver.
//!
//! The third-order problem is split into the coupled first-order pair
//! `(f, u = f')`, linearized by a Picard-type iteration, and discretized
//! with linear Lagrange elements. Per-element gradient-jump indicators
//! drive marked bisection of the mesh; the converged wall gradient `f''(0)`
//! is the headline output.
//!
//! Typical use:
//!
//! ```
//! use skanfem::adapt::{run_adaptive, AmrConfig};
//! use skanfem::model::{BcVariant, FlowParams};
//! use skanfem::oracle::solve_shooting;
//!
//! let params = FlowParams::from_m(1.0, 8.0, BcVariant::Wedge).unwrap();
//! let report = run_adaptive(&params, &AmrConfig::default()).unwrap();
//! let reference = solve_shooting(&params, 1e-10).unwrap();
//! assert!((report.fpp0_final() - reference.alpha).abs() < 5e-3);
//! ```

pub mod adapt;
pub mod assembly;
pub mod error;
pub mod kelly;
pub mod linsolve;
pub mod mesh;
pub mod model;
pub mod oracle;
pub mod picard;
pub mod postproc;

pub use adapt::{run_adaptive, AdaptiveRunReport, AmrConfig, TerminationReason};
pub use error::{Result, SkanError};
pub use mesh::{Mesh1D, NodalField, RefinementFlags};
pub use model::{bc_values, beta_from_m, m_from_beta, BcValues, BcVariant, FlowParams};
pub use oracle::{solve_shooting, ShootingResult};
pub use postproc::RunSummary;
