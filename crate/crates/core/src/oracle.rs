//! Mesh-free reference solutions built from the flux identity
//! `kappa(x) u'(x) = -beta + int_x^L f`.
//!
//! Both field types evaluate pointwise by adaptive quadrature from the left
//! endpoint. When asked for many ascending points they integrate piece by
//! piece instead, which keeps dense error evaluation on fine meshes cheap.

use crate::error::Result;
use crate::field::{Field, ScalarField};
use crate::quadrature::{integrate, Integral};
use crate::Error;

/// Smallest per-piece tolerance used in cumulative evaluation.
const PIECE_TOL_FLOOR: f64 = 1e-18;

fn value_or_estimate(r: Result<Integral>) -> f64 {
    match r {
        Ok(i) => i.value,
        Err(Error::Accuracy { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    }
}

/// `x -> start + int_0^x integrand(s) ds`.
#[derive(Clone)]
pub struct Antiderivative {
    integrand: ScalarField,
    start: f64,
    length: f64,
    tol: f64,
}

impl Antiderivative {
    pub fn new(integrand: ScalarField, start: f64, length: f64, tol: f64) -> Self {
        Self {
            integrand,
            start,
            length,
            tol,
        }
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let g = &self.integrand;
        Ok(self.start + integrate(|s| g.eval(s), 0.0, x, self.tol)?.value)
    }
}

impl Field for Antiderivative {
    fn eval(&self, x: f64) -> f64 {
        let g = &self.integrand;
        self.start + value_or_estimate(integrate(|s| g.eval(s), 0.0, x, self.tol))
    }

    fn eval_ascending(&self, xs: &[f64]) -> Vec<f64> {
        let g = &self.integrand;
        let mut acc = self.start;
        let mut prev = 0.0;
        xs.iter()
            .map(|&x| {
                let tol = (self.tol * (x - prev).abs() / self.length).max(PIECE_TOL_FLOOR);
                acc += value_or_estimate(integrate(|s| g.eval(s), prev, x, tol));
                prev = x;
                acc
            })
            .collect()
    }
}

/// `x -> alpha + int_0^x weight(s) * F(s) ds` with `F(s) = -beta + int_s^L f`.
///
/// With `weight = 1/kappa` this is the exact solution; with `weight = G_M` it
/// is the continuous truncated approximation of order `M`. The inner flux
/// integral is computed to `tol / 10`.
#[derive(Clone)]
pub struct FluxAntiderivative {
    weight: ScalarField,
    f: ScalarField,
    alpha: f64,
    beta: f64,
    length: f64,
    tol: f64,
}

impl FluxAntiderivative {
    pub fn new(
        weight: ScalarField,
        f: ScalarField,
        alpha: f64,
        beta: f64,
        length: f64,
        tol: f64,
    ) -> Self {
        Self {
            weight,
            f,
            alpha,
            beta,
            length,
            tol,
        }
    }

    fn inner_tol(&self) -> f64 {
        self.tol / 10.0
    }

    /// `F(s) = -beta + int_s^L f`.
    pub fn try_flux(&self, s: f64) -> Result<f64> {
        let f = &self.f;
        Ok(-self.beta + integrate(|t| f.eval(t), s, self.length, self.inner_tol())?.value)
    }

    pub fn flux(&self, s: f64) -> f64 {
        let f = &self.f;
        -self.beta + value_or_estimate(integrate(|t| f.eval(t), s, self.length, self.inner_tol()))
    }

    /// `weight(s) * F(s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        self.weight.eval(s) * self.flux(s)
    }

    pub fn try_eval(&self, x: f64) -> Result<f64> {
        // Surface inner failures too: probe the widest inner integral first.
        self.try_flux(0.0)?;
        Ok(self.alpha + integrate(|s| self.derivative(s), 0.0, x, self.tol)?.value)
    }

    /// `x -> weight(x) * F(x)`, with cumulative evaluation on ascending points.
    pub fn derivative_field(&self) -> ScalarField {
        ScalarField::from_field("flux-derivative", FluxDerivative(self.clone()))
    }
}

struct FluxDerivative(FluxAntiderivative);

impl Field for FluxDerivative {
    fn eval(&self, x: f64) -> f64 {
        self.0.derivative(x)
    }

    fn eval_ascending(&self, xs: &[f64]) -> Vec<f64> {
        let o = &self.0;
        let f = &o.f;
        let mut out = vec![0.0; xs.len()];
        let mut right = o.length;
        let mut flux = -o.beta;
        for (k, &x) in xs.iter().enumerate().rev() {
            let tol = (o.inner_tol() * (right - x).abs() / o.length).max(PIECE_TOL_FLOOR);
            flux += value_or_estimate(integrate(|t| f.eval(t), x, right, tol));
            out[k] = o.weight.eval(x) * flux;
            right = x;
        }
        out
    }
}

impl Field for FluxAntiderivative {
    fn eval(&self, x: f64) -> f64 {
        self.alpha + value_or_estimate(integrate(|s| self.derivative(s), 0.0, x, self.tol))
    }

    fn eval_ascending(&self, xs: &[f64]) -> Vec<f64> {
        if xs.is_empty() {
            return Vec::new();
        }
        let f = &self.f;
        let w = &self.weight;
        let piece_tol =
            |a: f64, b: f64| (self.tol * (b - a).abs() / self.length).max(PIECE_TOL_FLOOR);

        // Flux at every breakpoint, accumulated from the right end.
        let mut flux_at = vec![0.0; xs.len()];
        let mut right = self.length;
        let mut flux = -self.beta;
        for (k, &x) in xs.iter().enumerate().rev() {
            flux += value_or_estimate(integrate(|t| f.eval(t), x, right, piece_tol(x, right)));
            flux_at[k] = flux;
            right = x;
        }

        let mut acc = self.alpha;
        let mut prev = 0.0;
        xs.iter()
            .zip(&flux_at)
            .map(|(&x, &fx)| {
                let tol = piece_tol(prev, x);
                let integrand = |s: f64| {
                    let local = value_or_estimate(integrate(|t| f.eval(t), s, x, tol / 10.0));
                    w.eval(s) * (fx + local)
                };
                acc += value_or_estimate(integrate(integrand, prev, x, tol));
                prev = x;
                acc
            })
            .collect()
    }
}
