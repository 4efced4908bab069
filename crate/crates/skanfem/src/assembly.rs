//! Galerkin assembly over linear hat functions.
//!
//! The third-order problem is split into the pair `f' = u` and
//! `u'' + f u' + beta (1 - u^2) = 0`. With test functions `v` vanishing at
//! the Dirichlet nodes, the velocity equation in weak form reads
//!
//! ```text
//!   integral( -u' v' + f u' v + beta (1 - u^2) v ) = 0,
//! ```
//!
//! and the outer iteration freezes `f = f_n` while linearizing the `u^2`
//! term in one of two ways that share the same fixed point:
//!
//! * `PicardProduct`: `u^2 ~ u_n u_{n+1}`, right-hand side `-beta`;
//! * `NewtonTerm`: `u^2 ~ 2 u_n u_{n+1} - u_n^2`, right-hand side
//!   `-beta (1 + u_n^2)`.
//!
//! The stream-function block tests `f' - u = 0` against hats, giving
//! matrix entries `integral(phi_j' phi_i)` and load `integral(u_h phi_i)`.
//! All element integrals use the two-point Gauss rule, which is exact for
//! every integrand above (degree <= 3 for piecewise-linear `f_n`, `u_n`).

use crate::error::{Result, SkanError};
use crate::mesh::{Mesh1D, NodalField};

/// Points and weights on the reference element [-1, 1].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureRule {
    pub points: &'static [f64],
    pub weights: &'static [f64],
    /// Highest polynomial degree integrated exactly.
    pub exact_degree: usize,
}

const GAUSS_2_PT: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
const GAUSS_3_PT: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)

/// Two-point Gauss rule, exact through degree 3.
pub const GAUSS_2: QuadratureRule = QuadratureRule {
    points: &[-GAUSS_2_PT, GAUSS_2_PT],
    weights: &[1.0, 1.0],
    exact_degree: 3,
};

/// Three-point Gauss rule, exact through degree 5 (used for the quartic
/// residual integrand in the error estimator).
pub const GAUSS_3: QuadratureRule = QuadratureRule {
    points: &[-GAUSS_3_PT, 0.0, GAUSS_3_PT],
    weights: &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
    exact_degree: 5,
};

impl QuadratureRule {
    /// Integrate `g` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, g: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&p, &w) in self.points.iter().zip(self.weights) {
            acc += w * g(mid + half * p);
        }
        acc * half
    }
}

/// How the `u^2` nonlinearity is frozen between outer iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linearization {
    /// Keeps the stronger reaction term and the consistent load
    /// `-beta (1 + u_n^2)`.
    #[default]
    NewtonTerm,
    /// Plain product freezing with load `-beta`.
    PicardProduct,
}

/// Tridiagonal matrix plus right-hand side from element assembly.
///
/// `sub[i]` is entry `(i+1, i)`, `main[i]` entry `(i, i)` and `sup[i]` entry
/// `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSystem {
    pub sub: Vec<f64>,
    pub main: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl BandedSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            main: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
            rhs: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.main.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.main[i] * x[i];
            if i > 0 {
                acc += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.sup[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// Pin `x[node] = value`: the row becomes an identity row and the
    /// matching column is eliminated into the neighbors' right-hand sides,
    /// which keeps the matrix tridiagonal and the constraint exact.
    pub fn apply_dirichlet(&mut self, node: usize, value: f64) -> Result<()> {
        let n = self.n();
        if node >= n {
            return Err(SkanError::IndexOutOfRange {
                index: node,
                len: n,
            });
        }
        self.main[node] = 1.0;
        self.rhs[node] = value;
        if node > 0 {
            self.sub[node - 1] = 0.0;
            self.rhs[node - 1] -= self.sup[node - 1] * value;
            self.sup[node - 1] = 0.0;
        }
        if node + 1 < n {
            self.sup[node] = 0.0;
            self.rhs[node + 1] -= self.sub[node] * value;
            self.sub[node] = 0.0;
        }
        Ok(())
    }

    fn scatter(&mut self, e: usize, local: [[f64; 2]; 2], load: [f64; 2]) {
        self.main[e] += local[0][0];
        self.main[e + 1] += local[1][1];
        self.sup[e] += local[0][1];
        self.sub[e] += local[1][0];
        self.rhs[e] += load[0];
        self.rhs[e + 1] += load[1];
    }
}

/// Assemble the linearized velocity system on the mesh of `prev`, freezing
/// `f_n` and `u_n` at the previous iterate. Boundary rows are assembled like
/// any other and are meant to be overwritten by `apply_dirichlet`.
pub fn assemble_u_system(prev: &NodalField, beta: f64, lin: Linearization) -> BandedSystem {
    let mesh = prev.mesh();
    let mut sys = BandedSystem::zeros(mesh.node_count());
    let (react_scale, newton_load) = match lin {
        Linearization::PicardProduct => (1.0, false),
        Linearization::NewtonTerm => (2.0, true),
    };
    for e in 0..mesh.element_count() {
        let h = mesh.h(e);
        let half = 0.5 * h;
        let f_n = [prev.f_vals()[e], prev.f_vals()[e + 1]];
        let u_n = [prev.u_vals()[e], prev.u_vals()[e + 1]];
        let dn = [-1.0 / h, 1.0 / h];

        let mut local = [[0.0; 2]; 2];
        let mut load = [0.0; 2];
        for (&p, &wq) in GAUSS_2.points.iter().zip(GAUSS_2.weights) {
            let w = wq * half;
            let shape = [0.5 * (1.0 - p), 0.5 * (1.0 + p)];
            let fq = f_n[0] * shape[0] + f_n[1] * shape[1];
            let uq = u_n[0] * shape[0] + u_n[1] * shape[1];
            let gq = if newton_load { 1.0 + uq * uq } else { 1.0 };
            for i in 0..2 {
                for j in 0..2 {
                    local[i][j] += w
                        * (-dn[j] * dn[i] + fq * dn[j] * shape[i]
                            - react_scale * beta * uq * shape[j] * shape[i]);
                }
                load[i] += w * (-beta * gq) * shape[i];
            }
        }
        sys.scatter(e, local, load);
    }
    sys
}

/// Assemble the stream-function system `integral(f' v) = integral(u_h v)`
/// for a given nodal velocity. Row 0 is reserved for the `f(0) = 0`
/// constraint.
pub fn assemble_f_system(mesh: &Mesh1D, u_new: &[f64]) -> Result<BandedSystem> {
    if u_new.len() != mesh.node_count() {
        return Err(SkanError::Mismatch(format!(
            "{} velocity values vs {} nodes",
            u_new.len(),
            mesh.node_count()
        )));
    }
    let mut sys = BandedSystem::zeros(mesh.node_count());
    for e in 0..mesh.element_count() {
        let h = mesh.h(e);
        let half = 0.5 * h;
        let dn = [-1.0 / h, 1.0 / h];
        let u_e = [u_new[e], u_new[e + 1]];

        let mut local = [[0.0; 2]; 2];
        let mut load = [0.0; 2];
        for (&p, &wq) in GAUSS_2.points.iter().zip(GAUSS_2.weights) {
            let w = wq * half;
            let shape = [0.5 * (1.0 - p), 0.5 * (1.0 + p)];
            let uq = u_e[0] * shape[0] + u_e[1] * shape[1];
            for i in 0..2 {
                for j in 0..2 {
                    local[i][j] += w * dn[j] * shape[i];
                }
                load[i] += w * uq * shape[i];
            }
        }
        sys.scatter(e, local, load);
    }
    Ok(sys)
}

/// Galerkin residual of the nonlinear velocity equation at the given iterate:
/// `r_i = integral( -u' phi_i' + f u' phi_i + beta (1 - u^2) phi_i )` for
/// interior test functions; the entries at the two Dirichlet ends are zero.
///
/// Both linearizations satisfy `A(w) w - L(w) = r(w)` on interior rows, which
/// is what makes the converged iterate a solution of the nonlinear problem.
pub fn nonlinear_residual(field: &NodalField, beta: f64) -> Vec<f64> {
    let mesh = field.mesh();
    let n = mesh.node_count();
    let mut r = vec![0.0; n];
    for e in 0..mesh.element_count() {
        let h = mesh.h(e);
        let half = 0.5 * h;
        let f_e = [field.f_vals()[e], field.f_vals()[e + 1]];
        let u_e = [field.u_vals()[e], field.u_vals()[e + 1]];
        let dn = [-1.0 / h, 1.0 / h];
        let du = u_e[0] * dn[0] + u_e[1] * dn[1];
        for (&p, &wq) in GAUSS_2.points.iter().zip(GAUSS_2.weights) {
            let w = wq * half;
            let shape = [0.5 * (1.0 - p), 0.5 * (1.0 + p)];
            let fq = f_e[0] * shape[0] + f_e[1] * shape[1];
            let uq = u_e[0] * shape[0] + u_e[1] * shape[1];
            for i in 0..2 {
                r[e + i] += w * (-du * dn[i] + fq * du * shape[i]
                    + beta * (1.0 - uq * uq) * shape[i]);
            }
        }
    }
    r[0] = 0.0;
    r[n - 1] = 0.0;
    r
}
