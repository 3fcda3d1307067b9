//! Real-valued functions on the problem interval.
//!
//! A [`ScalarField`] is a cheap-to-clone handle around anything implementing
//! [`Field`]. Most fields are closures; oracle fields defined by integrals
//! override [`Field::eval_ascending`] to integrate cumulatively instead of
//! restarting from the left endpoint for every point.

use std::fmt;
use std::sync::Arc;

pub trait Field: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    /// Evaluates at points given in nondecreasing order.
    fn eval_ascending(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

struct FnField<F>(F);

impl<F> Field for FnField<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

#[derive(Clone)]
pub struct ScalarField {
    inner: Arc<dyn Field>,
    label: Arc<str>,
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_field(label, FnField(f))
    }

    pub fn from_field(label: impl Into<String>, field: impl Field + 'static) -> Self {
        Self {
            inner: Arc::new(field),
            label: Arc::from(label.into()),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    pub fn eval_ascending(&self, xs: &[f64]) -> Vec<f64> {
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        self.inner.eval_ascending(xs)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Pointwise composition `g(self(x))`.
    pub fn map<G>(&self, label: impl Into<String>, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.clone();
        Self::new(label, move |x| g(inner.eval(x)))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("({})*({})", a.label(), b.label()), move |x| {
            a.eval(x) * b.eval(x)
        })
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScalarField").field(&self.label).finish()
    }
}
