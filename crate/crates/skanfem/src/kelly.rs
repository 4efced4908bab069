//! Per-element a-posteriori error indicators.
//!
//! For an element `K` of length `h` the squared indicator is
//!
//! ```text
//!   eta_K^2 = c1 h^2 ||R||_{L2(K)}^2 + c2 sum_xi h |[[u_h']](xi)|^2,
//! ```
//!
//! with `R = f_h u_h' + beta (1 - u_h^2)` (the second derivative of a linear
//! element vanishes) and the sum running over the element endpoints that
//! have a neighbor; the two domain endpoints contribute no jump. Each
//! interior node feeds both adjacent elements, which is why the default
//! `c2 = 1/2` halves the jump weight.

use crate::assembly::GAUSS_3;
use crate::error::{Result, SkanError};
use crate::mesh::NodalField;
use crate::model::FlowParams;

/// Indicators and their root-sum-of-squares global value.
#[derive(Debug, Clone)]
pub struct KellyReport {
    /// Per-element values `eta_K >= 0`.
    pub indicators: Vec<f64>,
    /// `sqrt(sum eta_K^2)`.
    pub global: f64,
    pub c1: f64,
    pub c2: f64,
}

impl KellyReport {
    pub fn max_indicator(&self) -> f64 {
        self.indicators.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Jump of the piecewise-linear derivative across an interior node:
/// right-element slope minus left-element slope.
pub fn jump_of_derivative(field: &NodalField, node: usize) -> Result<f64> {
    let n = field.mesh().node_count();
    if node == 0 || node + 1 >= n {
        return Err(SkanError::IndexOutOfRange {
            index: node,
            len: n,
        });
    }
    Ok(field.u_slope(node) - field.u_slope(node - 1))
}

/// L2 norm over one element of the strong residual
/// `R = f_h u_h' + beta (1 - u_h^2)`. The integrand is a quartic, so the
/// three-point rule is exact here.
pub fn element_residual_norm(
    field: &NodalField,
    params: &FlowParams,
    element: usize,
) -> Result<f64> {
    let mesh = field.mesh();
    if element >= mesh.element_count() {
        return Err(SkanError::IndexOutOfRange {
            index: element,
            len: mesh.element_count(),
        });
    }
    let beta = params.beta();
    let (a, b) = mesh.element(element);
    let du = field.u_slope(element);
    let sq = GAUSS_3.integrate(a, b, |x| {
        let (f, u) = field.eval(x).expect("quadrature point inside element");
        let r = f * du + beta * (1.0 - u * u);
        r * r
    });
    Ok(sq.max(0.0).sqrt())
}

/// Evaluate the indicator on every element and reduce sequentially so runs
/// are bit-reproducible.
pub fn estimate(field: &NodalField, params: &FlowParams, c1: f64, c2: f64) -> KellyReport {
    let mesh = field.mesh();
    let nel = mesh.element_count();
    let slopes: Vec<f64> = (0..nel).map(|e| field.u_slope(e)).collect();

    let mut indicators = Vec::with_capacity(nel);
    let mut total = 0.0;
    for e in 0..nel {
        let h = mesh.h(e);
        let rn = element_residual_norm(field, params, e).expect("element index in range");
        let mut sq = c1 * h * h * rn * rn;
        if e > 0 {
            let j = slopes[e] - slopes[e - 1];
            sq += c2 * h * j * j;
        }
        if e + 1 < nel {
            let j = slopes[e + 1] - slopes[e];
            sq += c2 * h * j * j;
        }
        indicators.push(sq.max(0.0).sqrt());
        total += sq;
    }
    KellyReport {
        indicators,
        global: total.max(0.0).sqrt(),
        c1,
        c2,
    }
}
