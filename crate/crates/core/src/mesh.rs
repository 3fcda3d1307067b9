//! Uniform meshes of `[0, L]` and continuous piecewise-linear functions on them.

use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    length: f64,
    n_elems: usize,
    nodes: Vec<f64>,
}

impl Mesh {
    /// Uniform partition of `[0, length]` into `n_elems` elements.
    pub fn uniform(length: f64, n_elems: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidMesh(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if n_elems == 0 {
            return Err(Error::InvalidMesh("need at least one element".into()));
        }
        let h = length / n_elems as f64;
        let mut nodes: Vec<f64> = (0..=n_elems).map(|i| i as f64 * h).collect();
        nodes[n_elems] = length;
        Ok(Self {
            length,
            n_elems,
            nodes,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elems + 1
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_elems as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Left endpoint of element `e`.
    #[inline]
    pub fn left(&self, e: usize) -> f64 {
        self.nodes[e]
    }

    /// Index of the element containing `x`; points outside `[0, L]` are
    /// clamped to the first/last element.
    pub fn locate(&self, x: f64) -> usize {
        let e = (x / self.h()).floor();
        if e < 0.0 || e.is_nan() {
            0
        } else {
            (e as usize).min(self.n_elems - 1)
        }
    }

    /// Physical coordinates of all quadrature points, element by element.
    pub fn quadrature_points(&self, ref_points: &[f64]) -> Vec<f64> {
        let h = self.h();
        let mut xs = Vec::with_capacity(self.n_elems * ref_points.len());
        for e in 0..self.n_elems {
            let x0 = self.nodes[e];
            xs.extend(ref_points.iter().map(|xi| x0 + h * xi));
        }
        xs
    }

    pub(crate) fn same_as(&self, other: &Mesh) -> bool {
        self.n_elems == other.n_elems && self.length == other.length
    }
}

/// Continuous piecewise-linear function given by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    mesh: Mesh,
    values: Vec<f64>,
}

impl NodalFunction {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::Dimension(format!(
                "{} nodal values for a mesh with {} nodes",
                values.len(),
                mesh.n_nodes()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.n_nodes();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Nodal interpolant of `field`.
    pub fn interpolate(mesh: Mesh, field: &ScalarField) -> Self {
        let values = field.eval_ascending(mesh.nodes());
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Constant derivative on element `e`.
    #[inline]
    pub fn slope(&self, e: usize) -> f64 {
        (self.values[e + 1] - self.values[e]) / self.mesh.h()
    }

    pub fn slopes(&self) -> Vec<f64> {
        let h = self.mesh.h();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// Value at local coordinate `xi in [0, 1]` of element `e`.
    #[inline]
    pub fn eval_local(&self, e: usize, xi: f64) -> f64 {
        self.values[e] * (1.0 - xi) + self.values[e + 1] * xi
    }

    pub fn eval(&self, x: f64) -> f64 {
        let e = self.mesh.locate(x);
        if x == self.mesh.nodes[e] {
            return self.values[e];
        }
        if x == self.mesh.nodes[e + 1] {
            return self.values[e + 1];
        }
        let xi = (x - self.mesh.left(e)) / self.mesh.h();
        self.eval_local(e, xi)
    }

    /// Wraps a copy of this function as a [`ScalarField`].
    pub fn to_field(&self) -> ScalarField {
        let me = self.clone();
        ScalarField::new("nodal", move |x| me.eval(x))
    }

    pub fn max_abs_diff(&self, other: &NodalFunction) -> Result<f64> {
        if !self.mesh.same_as(&other.mesh) {
            return Err(Error::MeshMismatch {
                expected: self.mesh.n_elems(),
                found: other.mesh.n_elems(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub(crate) fn add_assign(&mut self, other: &NodalFunction) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}
