//! Similarity parameters and boundary-condition variants for wedge-flow
//! boundary layers.
//!
//! The family is parameterized either by the wedge exponent `m` or by the
//! pressure-gradient parameter `beta = 2m/(m+1)`: `beta = 0` is the flat
//! plate, `beta > 0` an accelerating (favorable-gradient) flow and
//! `beta < 0` a decelerating one.

use serde::Serialize;

use crate::error::{Result, SkanError};

/// Which pair of wall/far-field velocity conditions closes the problem.
///
/// `Wedge` is the classical similarity problem (`u(0) = 0`, `u(inf) = 1`).
/// `Stretching` models a wall moving under quiescent fluid (`u(0) = 1`,
/// `u(inf) = 0`); it is consistent with the strong form only for `beta = 0`
/// and is rejected otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BcVariant {
    Wedge,
    Stretching,
}

/// Validated similarity parameters. Immutable after construction and freely
/// shareable across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    m: f64,
    beta: f64,
    eta_inf: f64,
    bc_variant: BcVariant,
}

/// The Dirichlet data `(f(0), u(0), u(eta_inf))` for a given variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcValues {
    pub f_at_0: f64,
    pub u_at_0: f64,
    pub u_at_inf: f64,
}

/// beta = 2m/(m+1). Fails on the pole m = -1.
pub fn beta_from_m(m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(SkanError::InvalidParameter {
            name: "m",
            reason: format!("must be finite, got {m}"),
        });
    }
    if m == -1.0 {
        return Err(SkanError::BetaUndefined);
    }
    Ok(2.0 * m / (m + 1.0))
}

/// Inverse map m = beta/(2 - beta). Fails on the pole beta = 2.
pub fn m_from_beta(beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(SkanError::InvalidParameter {
            name: "beta",
            reason: format!("must be finite, got {beta}"),
        });
    }
    if beta == 2.0 {
        return Err(SkanError::InvalidParameter {
            name: "beta",
            reason: "m is unbounded at beta = 2".into(),
        });
    }
    Ok(beta / (2.0 - beta))
}

impl FlowParams {
    /// Build parameters from the wedge exponent `m`.
    pub fn from_m(m: f64, eta_inf: f64, bc_variant: BcVariant) -> Result<Self> {
        let beta = beta_from_m(m)?;
        Self::validated(m, beta, eta_inf, bc_variant)
    }

    /// Build parameters from `beta` directly, back-solving `m = beta/(2-beta)`.
    pub fn from_beta(beta: f64, eta_inf: f64, bc_variant: BcVariant) -> Result<Self> {
        let m = m_from_beta(beta)?;
        Self::validated(m, beta, eta_inf, bc_variant)
    }

    fn validated(m: f64, beta: f64, eta_inf: f64, bc_variant: BcVariant) -> Result<Self> {
        if !(eta_inf.is_finite() && eta_inf > 0.0) {
            return Err(SkanError::InvalidParameter {
                name: "eta_inf",
                reason: format!("must be positive and finite, got {eta_inf}"),
            });
        }
        if bc_variant == BcVariant::Stretching && beta != 0.0 {
            return Err(SkanError::StretchingRequiresZeroBeta { beta });
        }
        Ok(Self {
            m,
            beta,
            eta_inf,
            bc_variant,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta_inf(&self) -> f64 {
        self.eta_inf
    }

    pub fn bc_variant(&self) -> BcVariant {
        self.bc_variant
    }
}

/// The Dirichlet triple of the variant: Wedge gives (0, 0, 1), Stretching
/// gives (0, 1, 0).
pub fn bc_values(params: &FlowParams) -> BcValues {
    match params.bc_variant() {
        BcVariant::Wedge => BcValues {
            f_at_0: 0.0,
            u_at_0: 0.0,
            u_at_inf: 1.0,
        },
        BcVariant::Stretching => BcValues {
            f_at_0: 0.0,
            u_at_0: 1.0,
            u_at_inf: 0.0,
        },
    }
}
