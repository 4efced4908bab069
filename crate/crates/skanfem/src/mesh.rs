//! One-dimensional conforming meshes on `[0, eta_inf]` and piecewise-linear
//! nodal fields.
//!
//! Meshes and fields are value-like: every operation returns a new instance,
//! so read-only sharing across threads is safe. Refinement bisects marked
//! elements; coarsening greedily merges adjacent element pairs whose combined
//! indicator falls below a threshold (flat pairs, no refinement tree — enough
//! in one dimension).

use crate::error::{Result, SkanError};

/// Strictly increasing node coordinates partitioning `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// `n` equally spaced elements spanning `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(SkanError::InvalidParameter {
                name: "range",
                reason: format!("need a < b, got [{a}, {b}]"),
            });
        }
        if n == 0 {
            return Err(SkanError::InvalidParameter {
                name: "n",
                reason: "need at least one element".into(),
            });
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        // Pin the endpoints exactly regardless of rounding in the midpoints.
        nodes[0] = a;
        nodes[n] = b;
        Ok(Self { nodes })
    }

    /// Wrap an existing coordinate list, validating the mesh invariants.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(SkanError::InvalidParameter {
                name: "nodes",
                reason: "need at least 2 nodes".into(),
            });
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(SkanError::InvalidParameter {
                name: "nodes",
                reason: "coordinates must be finite and strictly increasing".into(),
            });
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Endpoints of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Length of element `e`.
    pub fn h(&self, e: usize) -> f64 {
        self.nodes[e + 1] - self.nodes[e]
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect()
    }

    /// Index of the element containing `eta` (rightmost element whose left
    /// node is <= eta), clamped so the end point maps to the last element.
    fn locate(&self, eta: f64) -> Result<usize> {
        if !(eta >= self.start() && eta <= self.end()) {
            return Err(SkanError::OutOfDomain {
                eta,
                start: self.start(),
                end: self.end(),
            });
        }
        let k = self.nodes.partition_point(|&x| x <= eta);
        Ok(k.saturating_sub(1).min(self.element_count() - 1))
    }

    /// Bisect every marked element, keeping all existing nodes.
    pub fn refine(&self, flags: &RefinementFlags) -> Result<Mesh1D> {
        flags.check(self.element_count())?;
        let mut nodes = Vec::with_capacity(self.node_count() + flags.count());
        for e in 0..self.element_count() {
            nodes.push(self.nodes[e]);
            if flags.is_marked(e) {
                nodes.push(0.5 * (self.nodes[e] + self.nodes[e + 1]));
            }
        }
        nodes.push(self.end());
        Ok(Mesh1D { nodes })
    }
}

/// Elements queued for bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementFlags {
    marked: Vec<bool>,
}

impl RefinementFlags {
    pub fn none(element_count: usize) -> Self {
        Self {
            marked: vec![false; element_count],
        }
    }

    pub fn all(element_count: usize) -> Self {
        Self {
            marked: vec![true; element_count],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        indices: I,
        element_count: usize,
    ) -> Result<Self> {
        let mut marked = vec![false; element_count];
        for i in indices {
            if i >= element_count {
                return Err(SkanError::IndexOutOfRange {
                    index: i,
                    len: element_count,
                });
            }
            marked[i] = true;
        }
        Ok(Self { marked })
    }

    pub(crate) fn from_mask(marked: Vec<bool>) -> Self {
        Self { marked }
    }

    pub fn element_count(&self) -> usize {
        self.marked.len()
    }

    pub fn is_marked(&self, e: usize) -> bool {
        self.marked[e]
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.marked.len()).filter(|&e| self.marked[e]).collect()
    }

    fn check(&self, element_count: usize) -> Result<()> {
        if self.marked.len() != element_count {
            return Err(SkanError::Mismatch(format!(
                "flags cover {} elements, mesh has {}",
                self.marked.len(),
                element_count
            )));
        }
        Ok(())
    }
}

/// Paired nodal vectors `(f, u)` over a mesh; `u` approximates `f'`. The
/// piecewise-linear interpolant is C0 by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    mesh: Mesh1D,
    f: Vec<f64>,
    u: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: Mesh1D, f: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if f.len() != mesh.node_count() || u.len() != mesh.node_count() {
            return Err(SkanError::Mismatch(format!(
                "field lengths ({}, {}) vs {} nodes",
                f.len(),
                u.len(),
                mesh.node_count()
            )));
        }
        Ok(Self { mesh, f, u })
    }

    pub fn zeros(mesh: Mesh1D) -> Self {
        let n = mesh.node_count();
        Self {
            mesh,
            f: vec![0.0; n],
            u: vec![0.0; n],
        }
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn f_vals(&self) -> &[f64] {
        &self.f
    }

    pub fn u_vals(&self) -> &[f64] {
        &self.u
    }

    /// Replace the nodal vectors, keeping the mesh.
    pub fn with_values(&self, f: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        Self::new(self.mesh.clone(), f, u)
    }

    /// Slope of the piecewise-linear `u` on element `e`.
    pub fn u_slope(&self, e: usize) -> f64 {
        (self.u[e + 1] - self.u[e]) / self.mesh.h(e)
    }

    /// Piecewise-linear evaluation of `(f, u)`; exact at nodes.
    pub fn eval(&self, eta: f64) -> Result<(f64, f64)> {
        let e = self.mesh.locate(eta)?;
        let (xl, xr) = self.mesh.element(e);
        let t = (eta - xl) / (xr - xl);
        Ok((
            (1.0 - t) * self.f[e] + t * self.f[e + 1],
            (1.0 - t) * self.u[e] + t * self.u[e + 1],
        ))
    }

    /// Interpolate this field onto `target`, which must span the same
    /// interval. Values at nodes shared with the source mesh are preserved
    /// exactly.
    pub fn transfer(&self, target: &Mesh1D) -> Result<NodalField> {
        if target.start() != self.mesh.start() || target.end() != self.mesh.end() {
            return Err(SkanError::Mismatch(format!(
                "target spans [{}, {}], source spans [{}, {}]",
                target.start(),
                target.end(),
                self.mesh.start(),
                self.mesh.end()
            )));
        }
        let mut f = Vec::with_capacity(target.node_count());
        let mut u = Vec::with_capacity(target.node_count());
        for &x in target.nodes() {
            let (fv, uv) = self.eval(x)?;
            f.push(fv);
            u.push(uv);
        }
        NodalField::new(target.clone(), f, u)
    }
}

/// Greedily merge adjacent element pairs whose combined indicator (root sum
/// of squares) falls below `keep_threshold`. Walks left to right; a merged
/// pair is skipped over, so each element joins at most one merge. Boundary
/// nodes are never removed, and the surviving nodes keep their field values.
pub fn coarsen(
    field: &NodalField,
    indicators: &[f64],
    keep_threshold: f64,
) -> Result<NodalField> {
    let mesh = field.mesh();
    let nel = mesh.element_count();
    if nel < 2 {
        return Err(SkanError::InvalidParameter {
            name: "mesh",
            reason: "coarsening needs more than one element".into(),
        });
    }
    if indicators.len() != nel {
        return Err(SkanError::Mismatch(format!(
            "{} indicators vs {} elements",
            indicators.len(),
            nel
        )));
    }

    // keep[i]: node i survives.
    let mut keep = vec![true; mesh.node_count()];
    let mut e = 0;
    while e + 1 < nel {
        let combined = (indicators[e] * indicators[e] + indicators[e + 1] * indicators[e + 1])
            .sqrt();
        if combined < keep_threshold {
            keep[e + 1] = false; // the node shared by the pair
            e += 2;
        } else {
            e += 1;
        }
    }

    let mut nodes = Vec::new();
    let mut f = Vec::new();
    let mut u = Vec::new();
    for i in 0..mesh.node_count() {
        if keep[i] {
            nodes.push(mesh.nodes()[i]);
            f.push(field.f_vals()[i]);
            u.push(field.u_vals()[i]);
        }
    }
    NodalField::new(Mesh1D::from_nodes(nodes)?, f, u)
}
