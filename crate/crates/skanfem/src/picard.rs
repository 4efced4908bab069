//! Outer nonlinear iteration on a fixed mesh.
//!
//! Each sweep solves the linearized velocity system with the previous
//! iterate frozen, then the stream-function system with the fresh velocity,
//! and stops once the relative update of the stacked `(f, u)` vector drops
//! below tolerance. The two blocks stay tridiagonal because the solve is
//! staggered rather than monolithic.

use crate::assembly::{assemble_f_system, assemble_u_system, Linearization};
use crate::error::{Result, SkanError};
use crate::linsolve::{solve_direct, solve_krylov, KrylovConfig};
use crate::mesh::{Mesh1D, NodalField};
use crate::model::{bc_values, BcValues, FlowParams};

/// Settings for the outer iteration.
#[derive(Debug, Clone)]
pub struct PicardConfig {
    pub max_iters: usize,
    /// Relative update tolerance on the stacked nodal vector.
    pub tol: f64,
    /// Under-relaxation of the update, in (0, 1]. 1 disables damping.
    pub damping: f64,
    pub linearization: Linearization,
    /// Solve the velocity block iteratively (the default) or directly.
    pub use_krylov: bool,
    pub krylov: KrylovConfig,
    /// Solve each velocity system both ways and record the worst relative
    /// disagreement. Diagnostic only; off by default.
    pub solver_cross_check: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tol: 1e-12,
            damping: 1.0,
            linearization: Linearization::default(),
            use_krylov: true,
            krylov: KrylovConfig::default(),
            solver_cross_check: false,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(SkanError::InvalidParameter {
                name: "tol",
                reason: format!("must be positive, got {}", self.tol),
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SkanError::InvalidParameter {
                name: "damping",
                reason: format!("must lie in (0, 1], got {}", self.damping),
            });
        }
        if self.max_iters == 0 {
            return Err(SkanError::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        self.krylov.validate()
    }
}

/// Outcome of a fixed-mesh solve. `converged = false` is a stall report,
/// not an error; the caller decides what to do with the last iterate.
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub iterations: usize,
    pub converged: bool,
    /// Relative update norm per iteration, length `iterations`.
    pub update_history: Vec<f64>,
    /// Total inner Krylov iterations across the run.
    pub krylov_iterations: usize,
    /// Worst relative Krylov-vs-direct disagreement, when cross-checking.
    pub max_solver_rel_diff: Option<f64>,
}

/// Linear velocity ramp between the boundary values, with the stream
/// function its exact antiderivative vanishing at the wall.
pub fn initial_guess(mesh: &Mesh1D, bc: &BcValues) -> NodalField {
    let span = mesh.end() - mesh.start();
    let slope = (bc.u_at_inf - bc.u_at_0) / span;
    let mut f = Vec::with_capacity(mesh.node_count());
    let mut u = Vec::with_capacity(mesh.node_count());
    for &x in mesh.nodes() {
        let t = x - mesh.start();
        u.push(bc.u_at_0 + slope * t);
        f.push(bc.f_at_0 + bc.u_at_0 * t + 0.5 * slope * t * t);
    }
    NodalField::new(mesh.clone(), f, u).expect("lengths match by construction")
}

/// Alternate velocity and stream-function solves until the combined update
/// stalls below `cfg.tol`. Boundary conditions are re-imposed exactly every
/// iteration.
pub fn picard_solve(
    params: &FlowParams,
    init: &NodalField,
    cfg: &PicardConfig,
) -> Result<(NodalField, PicardReport)> {
    cfg.validate()?;
    let bc = bc_values(params);
    let beta = params.beta();
    let mesh = init.mesh().clone();
    let last = mesh.node_count() - 1;

    let mut cur = init.clone();
    let mut history = Vec::new();
    let mut krylov_total = 0usize;
    let mut cross_worst: Option<f64> = None;

    for iter in 1..=cfg.max_iters {
        // velocity block with frozen coefficients
        let mut sys_u = assemble_u_system(&cur, beta, cfg.linearization);
        sys_u.apply_dirichlet(0, bc.u_at_0)?;
        sys_u.apply_dirichlet(last, bc.u_at_inf)?;
        let u_new = if cfg.use_krylov {
            let sol = solve_krylov(&sys_u, cur.u_vals(), &cfg.krylov)?;
            krylov_total += sol.iterations;
            if cfg.solver_cross_check {
                let direct = solve_direct(&sys_u)?;
                let scale = direct
                    .iter()
                    .fold(0.0f64, |m, &v| m.max(v.abs()))
                    .max(f64::MIN_POSITIVE);
                let diff = sol
                    .x
                    .iter()
                    .zip(&direct)
                    .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
                    / scale;
                cross_worst = Some(cross_worst.map_or(diff, |w: f64| w.max(diff)));
            }
            sol.x
        } else {
            solve_direct(&sys_u)?
        };

        // stream-function block with the fresh velocity
        let mut sys_f = assemble_f_system(&mesh, &u_new)?;
        sys_f.apply_dirichlet(0, bc.f_at_0)?;
        let f_new = solve_direct(&sys_f)?;

        // damped update and stacked relative norm
        let w = cfg.damping;
        let mut num = 0.0;
        let mut den = 0.0;
        let mut f_next = Vec::with_capacity(mesh.node_count());
        let mut u_next = Vec::with_capacity(mesh.node_count());
        for i in 0..mesh.node_count() {
            let fv = (1.0 - w) * cur.f_vals()[i] + w * f_new[i];
            let uv = (1.0 - w) * cur.u_vals()[i] + w * u_new[i];
            let df = fv - cur.f_vals()[i];
            let du = uv - cur.u_vals()[i];
            num += df * df + du * du;
            den += fv * fv + uv * uv;
            f_next.push(fv);
            u_next.push(uv);
        }
        // constrained nodes carry the exact boundary data
        u_next[0] = bc.u_at_0;
        u_next[last] = bc.u_at_inf;
        f_next[0] = bc.f_at_0;

        cur = cur.with_values(f_next, u_next)?;
        let rel = if den > 0.0 {
            (num / den).sqrt()
        } else if num == 0.0 {
            0.0
        } else {
            num.sqrt()
        };
        history.push(rel);

        if rel < cfg.tol {
            return Ok((
                cur,
                PicardReport {
                    iterations: iter,
                    converged: true,
                    update_history: history,
                    krylov_iterations: krylov_total,
                    max_solver_rel_diff: cross_worst,
                },
            ));
        }
    }

    let report = PicardReport {
        iterations: cfg.max_iters,
        converged: false,
        update_history: history,
        krylov_iterations: krylov_total,
        max_solver_rel_diff: cross_worst,
    };
    Ok((cur, report))
}
