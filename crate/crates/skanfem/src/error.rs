//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum SkanError {
    /// The map m -> beta = 2m/(m+1) has a pole at m = -1.
    #[error("pressure-gradient parameter beta is undefined at m = -1")]
    BetaUndefined,

    /// A constructor or configuration precondition failed.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The stretching-wall boundary conditions are only consistent with the
    /// strong form when beta = 0.
    #[error("stretching boundary conditions require beta = 0, got beta = {beta}")]
    StretchingRequiresZeroBeta { beta: f64 },

    /// A field or vector does not match the mesh it is paired with.
    #[error("mesh/field mismatch: {0}")]
    Mismatch(String),

    /// Evaluation coordinate outside [0, eta_inf].
    #[error("coordinate {eta} lies outside the domain [{start}, {end}]")]
    OutOfDomain { eta: f64, start: f64, end: f64 },

    /// An element or node index beyond the valid range.
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// The direct solver hit a (numerically) singular pivot.
    #[error("zero pivot in row {row}: matrix is singular to working precision")]
    ZeroPivot { row: usize },

    /// The Krylov iteration did not reach its tolerance.
    #[error(
        "Krylov solver did not converge in {iterations} iterations \
         (relative residual {residual:.3e}, target {tol:.3e})"
    )]
    KrylovStall {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// Picard non-convergence, reported with the adaptive-cycle context.
    #[error(
        "Picard iteration stalled in cycle {cycle} after {iterations} iterations \
         (last relative update {last_update:.3e})"
    )]
    PicardStall {
        cycle: usize,
        iterations: usize,
        last_update: f64,
    },

    /// The initial-value integration diverged before reaching eta_inf.
    #[error("IVP state blew up at eta = {eta:.4} (f = {f:.3e}, u = {u:.3e}, w = {w:.3e})")]
    IvpBlowup { eta: f64, f: f64, u: f64, w: f64 },

    /// The shooting residual has the same sign at both ends of the bracket.
    #[error(
        "no sign change for the shooting residual on [{lo}, {hi}] \
         (F(lo) = {f_lo:.3e}, F(hi) = {f_hi:.3e})"
    )]
    BracketFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// The secant polish could not push the terminal mismatch below tolerance.
    #[error("shooting polish stalled at alpha = {alpha} with residual {residual:.3e}")]
    ShootingStall { alpha: f64, residual: f64 },

    /// File output failure, with the offending path.
    #[error("failed writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SkanError>;
