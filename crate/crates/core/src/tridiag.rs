//! Tridiagonal systems and the Thomas algorithm.
//!
//! The factorization is kept separate from the back-substitution so that a
//! matrix shared by many right-hand sides is eliminated once.

use crate::error::{Error, Result};

/// `sub[i] = A[i+1][i]`, `diag[i] = A[i][i]`, `sup[i] = A[i][i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.diag.len();
        if n == 0 {
            return Err(Error::Dimension("empty system".into()));
        }
        if self.sub.len() + 1 != n || self.sup.len() + 1 != n || self.rhs.len() != n {
            return Err(Error::Dimension(format!(
                "sub/diag/sup/rhs lengths {}/{}/{}/{}",
                self.sub.len(),
                n,
                self.sup.len(),
                self.rhs.len()
            )));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// `||A x - b||_inf`.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Forward-elimination data of the Thomas algorithm (no pivoting).
#[derive(Debug, Clone)]
pub struct ThomasFactorization {
    sub: Vec<f64>,
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl ThomasFactorization {
    pub fn new(system: &TridiagonalSystem) -> Result<Self> {
        system.check()?;
        let n = system.diag.len();
        let mut pivots = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        let mut prev_upper = 0.0;
        for i in 0..n {
            let p = if i == 0 {
                system.diag[0]
            } else {
                system.diag[i] - system.sub[i - 1] * prev_upper
            };
            if p == 0.0 || !p.is_finite() {
                return Err(Error::Singular { row: i });
            }
            pivots.push(p);
            if i + 1 < n {
                prev_upper = system.sup[i] / p;
                upper.push(prev_upper);
            }
        }
        Ok(Self {
            sub: system.sub.clone(),
            pivots,
            upper,
        })
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Forward and back substitution for one right-hand side.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.pivots.len();
        if rhs.len() != n {
            return Err(Error::Dimension(format!(
                "rhs has {} entries, system has {n} rows",
                rhs.len()
            )));
        }
        let mut x = Vec::with_capacity(n);
        x.push(rhs[0] / self.pivots[0]);
        for i in 1..n {
            let v = (rhs[i] - self.sub[i - 1] * x[i - 1]) / self.pivots[i];
            x.push(v);
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
        Ok(x)
    }
}

/// Solves `system` by the Thomas algorithm.
pub fn solve_tridiagonal(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    ThomasFactorization::new(system)?.solve(&system.rhs)
}
