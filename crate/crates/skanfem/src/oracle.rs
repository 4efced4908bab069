//! Independent shooting-method reference solver.
//!
//! The boundary-value problem is recast as an initial-value problem in the
//! state `(f, u, w) = (f, f', f'')` with unknown wall curvature
//! `alpha = f''(0)`, integrated by the classical fourth-order Runge-Kutta
//! scheme at a fixed step, and root-found so the far-field condition holds.
//! The dynamics are evaluated here directly from the strong form, sharing
//! no code with the finite element path, so agreement between the two is
//! evidence rather than tautology.
//!
//! Bracketing note: away from the physical branch the finite-domain
//! trajectories dive or rebound violently, so the raw terminal value is a
//! poor bracketing function (it oscillates and admits spurious roots). The
//! bracketing map therefore classifies a trajectory as soon as `u` leaves
//! the band spanned by the two boundary values: an exit below saturates to a
//! large negative value, an exit above to a large positive one. Near the
//! root no exit happens and the map equals the smooth terminal mismatch.

use crate::error::{Result, SkanError};
use crate::model::{bc_values, FlowParams};

/// Default fixed integration step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Saturation value of the classified shooting map.
const SATURATION: f64 = 1e6;
/// How far `u` may leave the boundary-value band before classification.
const BAND_MARGIN: f64 = 1e-4;
/// State magnitude treated as divergence.
const BLOWUP_LIMIT: f64 = 1e8;

/// Integration state `(f, u, w) = (f, f', f'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpState {
    pub f: f64,
    pub u: f64,
    pub w: f64,
}

/// One sampled point of the converged profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub eta: f64,
    pub f: f64,
    pub u: f64,
    pub w: f64,
}

/// Converged shooting solve.
#[derive(Debug, Clone)]
pub struct ShootingResult {
    /// Wall curvature `f''(0)`.
    pub alpha: f64,
    /// Terminal mismatch `|u(eta_inf) - u_inf|` at the returned alpha.
    pub residual: f64,
    /// Shooting-map evaluations spent (bracketing, bisection and polish).
    pub iterations: usize,
    /// State at every integration step of the final trajectory.
    pub profile: Vec<ProfilePoint>,
}

impl ShootingResult {
    fn sample(&self, eta: f64, pick: impl Fn(&ProfilePoint) -> f64) -> f64 {
        let pts = &self.profile;
        let last = pts.len() - 1;
        let k = pts
            .partition_point(|p| p.eta <= eta)
            .saturating_sub(1)
            .min(last - 1);
        let (a, b) = (&pts[k], &pts[k + 1]);
        let t = (eta - a.eta) / (b.eta - a.eta);
        (1.0 - t) * pick(a) + t * pick(b)
    }

    /// Linear interpolation of the velocity profile.
    pub fn u_at(&self, eta: f64) -> f64 {
        self.sample(eta, |p| p.u)
    }

    /// Linear interpolation of the stream function.
    pub fn f_at(&self, eta: f64) -> f64 {
        self.sample(eta, |p| p.f)
    }
}

#[inline]
fn rhs(beta: f64, s: [f64; 3]) -> [f64; 3] {
    let [f, u, w] = s;
    [u, w, -(f * w + beta * (1.0 - u * u))]
}

#[inline]
fn rk4_step(beta: f64, s: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs(beta, s);
    let k2 = rhs(beta, [
        s[0] + 0.5 * h * k1[0],
        s[1] + 0.5 * h * k1[1],
        s[2] + 0.5 * h * k1[2],
    ]);
    let k3 = rhs(beta, [
        s[0] + 0.5 * h * k2[0],
        s[1] + 0.5 * h * k2[1],
        s[2] + 0.5 * h * k2[2],
    ]);
    let k4 = rhs(beta, [
        s[0] + h * k3[0],
        s[1] + h * k3[1],
        s[2] + h * k3[2],
    ]);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        s[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

fn step_count(eta_inf: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(SkanError::InvalidParameter {
            name: "step",
            reason: format!("must be positive, got {step}"),
        });
    }
    let n = (eta_inf / step).round();
    if n < 1.0 || (n * step - eta_inf).abs() > 1e-9 * eta_inf.max(1.0) {
        return Err(SkanError::InvalidParameter {
            name: "step",
            reason: format!("eta_inf/step = {} is not an integer", eta_inf / step),
        });
    }
    Ok(n as usize)
}

/// Fixed-step integration from the wall to `eta_inf`; flags divergence early
/// with the coordinate where it happened.
pub fn integrate_ivp(params: &FlowParams, alpha: f64, step: f64) -> Result<IvpState> {
    let n = step_count(params.eta_inf(), step)?;
    let beta = params.beta();
    let bc = bc_values(params);
    let mut s = [bc.f_at_0, bc.u_at_0, alpha];
    for k in 0..n {
        s = rk4_step(beta, s, step);
        if s.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_LIMIT) {
            return Err(SkanError::IvpBlowup {
                eta: (k + 1) as f64 * step,
                f: s[0],
                u: s[1],
                w: s[2],
            });
        }
    }
    Ok(IvpState {
        f: s[0],
        u: s[1],
        w: s[2],
    })
}

/// Bracketing function of the root finder: the terminal mismatch
/// `u(eta_inf) - u_inf` where the trajectory stays inside the band spanned
/// by the boundary values, saturating to +/-1e6 on the side through which
/// `u` escapes. Monotone (non-decreasing) in alpha over the bracket, which
/// is what justifies bisection.
pub fn shooting_map(params: &FlowParams, alpha: f64, step: f64) -> Result<f64> {
    let n = step_count(params.eta_inf(), step)?;
    let beta = params.beta();
    let bc = bc_values(params);
    let band_lo = bc.u_at_0.min(bc.u_at_inf) - BAND_MARGIN;
    let band_hi = bc.u_at_0.max(bc.u_at_inf) + BAND_MARGIN;

    let mut s = [bc.f_at_0, bc.u_at_0, alpha];
    for _ in 0..n {
        s = rk4_step(beta, s, step);
        if !s[1].is_finite() {
            // NaN from overflow: classify by the curvature sign at the wall
            return Ok(if alpha >= 0.0 { SATURATION } else { -SATURATION });
        }
        if s[1] > band_hi {
            return Ok(SATURATION);
        }
        if s[1] < band_lo {
            return Ok(-SATURATION);
        }
        if s.iter().any(|v| v.abs() > BLOWUP_LIMIT) {
            return Ok(if s[1] > bc.u_at_inf {
                SATURATION
            } else {
                -SATURATION
            });
        }
    }
    Ok(s[1] - bc.u_at_inf)
}

fn is_saturated(v: f64) -> bool {
    v.abs() >= SATURATION
}

/// Find the wall curvature by bracketing bisection plus a secant polish.
///
/// The initial bracket is `[0, 5]`; if the map does not change sign there it
/// is widened once to `[-2, 10]` (which covers the stretching-wall branch)
/// before failing with diagnostics. Bisection continues until the bracket is
/// tight and both endpoint values are off the saturation plateaus, so the
/// secant only ever sees the smooth part of the map.
pub fn solve_shooting(params: &FlowParams, tol: f64) -> Result<ShootingResult> {
    solve_shooting_with_step(params, tol, DEFAULT_STEP)
}

/// `solve_shooting` with an explicit integration step (used by the
/// self-convergence checks).
pub fn solve_shooting_with_step(
    params: &FlowParams,
    tol: f64,
    step: f64,
) -> Result<ShootingResult> {
    if !(tol > 0.0) {
        return Err(SkanError::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let mut evals = 0usize;
    let mut eval = |alpha: f64| -> Result<f64> {
        evals += 1;
        shooting_map(params, alpha, step)
    };

    let (mut lo, mut hi) = (0.0f64, 5.0f64);
    let mut f_lo = eval(lo)?;
    let mut f_hi = eval(hi)?;
    if (f_lo > 0.0) == (f_hi > 0.0) {
        lo = -2.0;
        hi = 10.0;
        f_lo = eval(lo)?;
        f_hi = eval(hi)?;
        if (f_lo > 0.0) == (f_hi > 0.0) {
            return Err(SkanError::BracketFailure {
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
    }

    // bisect until the bracket is tight and clear of the saturated plateaus
    let mut rounds = 0;
    while (hi - lo > 1e-9 || is_saturated(f_lo) || is_saturated(f_hi)) && rounds < 200 {
        rounds += 1;
        let mid = 0.5 * (lo + hi);
        let f_mid = eval(mid)?;
        if (f_lo <= 0.0) != (f_mid <= 0.0) {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }

    // secant polish on the smooth segment
    let (mut a0, mut a1) = (lo, hi);
    let (mut v0, mut v1) = (f_lo, f_hi);
    for _ in 0..60 {
        if v1.abs() <= tol {
            break;
        }
        if v1 == v0 {
            break;
        }
        let a2 = a1 - v1 * (a1 - a0) / (v1 - v0);
        a0 = a1;
        v0 = v1;
        a1 = a2;
        v1 = eval(a1)?;
    }
    if v1.abs() > tol {
        return Err(SkanError::ShootingStall {
            alpha: a1,
            residual: v1.abs(),
        });
    }

    // final trajectory with the profile recorded at every step
    let alpha = a1;
    let n = step_count(params.eta_inf(), step)?;
    let beta = params.beta();
    let bc = bc_values(params);
    let mut s = [bc.f_at_0, bc.u_at_0, alpha];
    let mut profile = Vec::with_capacity(n + 1);
    profile.push(ProfilePoint {
        eta: 0.0,
        f: s[0],
        u: s[1],
        w: s[2],
    });
    for k in 0..n {
        s = rk4_step(beta, s, step);
        if s.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP_LIMIT) {
            return Err(SkanError::IvpBlowup {
                eta: (k + 1) as f64 * step,
                f: s[0],
                u: s[1],
                w: s[2],
            });
        }
        profile.push(ProfilePoint {
            eta: (k + 1) as f64 * step,
            f: s[0],
            u: s[1],
            w: s[2],
        });
    }

    Ok(ShootingResult {
        alpha,
        residual: (s[1] - bc.u_at_inf).abs(),
        iterations: evals,
        profile,
    })
}
