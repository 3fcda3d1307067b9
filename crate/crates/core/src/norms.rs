//! Error norms between discrete and reference functions, and the
//! convergence-bound evaluators of the series expansion.

use std::fmt;

use crate::decomposition::{semi_analytic_oracle, Method};
use crate::error::{Error, Result};
use crate::fem::fem_solve;
use crate::field::ScalarField;
use crate::mesh::NodalFunction;
use crate::oracle::FluxAntiderivative;
use crate::problem::{flux_oracle, g_m_value, Problem, ReferenceKind, KAPPA_SAMPLES};
use crate::quadrature::{integrate, QuadratureRule};

/// Elements of the fine-grid reference solution.
pub const FINE_GRID_ELEMS: usize = 1 << 15;
/// Gauss points per element used for error integrals.
pub const ERROR_QUAD_POINTS: usize = 5;
/// Tolerance of mesh-free oracle references.
pub const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub problem: String,
    pub method: Method,
    pub n_elems: usize,
    pub m: usize,
    pub l2_error: f64,
    pub h1_error: f64,
    pub reference: ReferenceKind,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "problem,N,M,method,l2_error,h1_error,reference";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.16e},{:.16e},{}",
            self.problem,
            self.n_elems,
            self.m,
            self.method,
            self.l2_error,
            self.h1_error,
            self.reference.as_str()
        )
    }
}

impl fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv_row())
    }
}

/// `sqrt(sum_e h sum_q w_q (approx - reference)^2)`.
pub fn l2_error(approx: &NodalFunction, reference: &ScalarField, quad: &QuadratureRule) -> f64 {
    let mesh = approx.mesh();
    let xs = mesh.quadrature_points(quad.points());
    let rv = reference.eval_ascending(&xs);
    let q = quad.n_points();
    let sum: f64 = (0..mesh.n_elems())
        .map(|e| {
            quad.iter()
                .enumerate()
                .map(|(k, (xi, w))| {
                    let d = approx.eval_local(e, xi) - rv[e * q + k];
                    w * d * d
                })
                .sum::<f64>()
        })
        .sum();
    (sum * mesh.h()).sqrt()
}

/// `sqrt(sum_e h sum_q w_q (approx' - reference')^2)` with `approx'` piecewise constant.
pub fn h1_seminorm_error(
    approx: &NodalFunction,
    reference_derivative: &ScalarField,
    quad: &QuadratureRule,
) -> f64 {
    let mesh = approx.mesh();
    let xs = mesh.quadrature_points(quad.points());
    let rv = reference_derivative.eval_ascending(&xs);
    let q = quad.n_points();
    let sum: f64 = (0..mesh.n_elems())
        .map(|e| {
            let s = approx.slope(e);
            quad.weights()
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let d = s - rv[e * q + k];
                    w * d * d
                })
                .sum::<f64>()
        })
        .sum();
    (sum * mesh.h()).sqrt()
}

/// `|u|_{H1}` of a nodal function, exact for piecewise linears.
pub fn h1_seminorm(u: &NodalFunction) -> f64 {
    let h = u.mesh().h();
    (u.slopes().iter().map(|s| s * s).sum::<f64>() * h).sqrt()
}

/// L2 and H1-seminorm errors of `coarse` against a nested finer discrete
/// solution, integrating on the fine elements.
pub fn fine_grid_errors(coarse: &NodalFunction, fine: &NodalFunction) -> Result<(f64, f64)> {
    let (cm, fm) = (coarse.mesh(), fine.mesh());
    if cm.length() != fm.length() || fm.n_elems() % cm.n_elems() != 0 {
        return Err(Error::MeshMismatch {
            expected: fm.n_elems(),
            found: cm.n_elems(),
        });
    }
    let ratio = fm.n_elems() / cm.n_elems();
    // The difference is linear on each fine element: two points are exact.
    let quad = QuadratureRule::gauss_legendre(2)?;
    let (mut l2, mut h1) = (0.0, 0.0);
    for e in 0..fm.n_elems() {
        let ce = e / ratio;
        let offset = (e % ratio) as f64;
        for (xi, w) in quad.iter() {
            let d = coarse.eval_local(ce, (offset + xi) / ratio as f64) - fine.eval_local(e, xi);
            l2 += w * d * d;
        }
        let ds = coarse.slope(ce) - fine.slope(e);
        h1 += ds * ds;
    }
    let h = fm.h();
    Ok(((l2 * h).sqrt(), (h1 * h).sqrt()))
}

/// Reference solution against which errors of a problem are measured.
#[derive(Debug, Clone)]
pub enum Reference {
    Analytic {
        u: ScalarField,
        du: ScalarField,
        kind: ReferenceKind,
    },
    FineGrid(NodalFunction),
}

impl Reference {
    /// Builds the reference selected by the problem's [`ReferenceKind`].
    pub fn for_problem(problem: &Problem) -> Result<Self> {
        match problem.reference() {
            ReferenceKind::ClosedForm => match (problem.exact(), problem.exact_derivative()) {
                (Some(u), Some(du)) => Ok(Reference::Analytic {
                    u: u.clone(),
                    du: du.clone(),
                    kind: ReferenceKind::ClosedForm,
                }),
                _ => Err(Error::InvalidProblem(format!(
                    "{} has no closed-form solution",
                    problem.name()
                ))),
            },
            ReferenceKind::FluxOracle => {
                let oracle = flux_oracle(problem, ORACLE_TOL);
                oracle.try_eval(problem.length())?;
                Ok(Reference::oracle(oracle, ReferenceKind::FluxOracle))
            }
            ReferenceKind::FineGrid => {
                let quad = QuadratureRule::default();
                Ok(Reference::FineGrid(fem_solve(
                    problem,
                    FINE_GRID_ELEMS,
                    &quad,
                )?))
            }
        }
    }

    /// The continuous truncated approximation `U_M` as a reference.
    pub fn semi_analytic(problem: &Problem, m: usize) -> Result<Self> {
        let oracle = semi_analytic_oracle(problem, m, ORACLE_TOL);
        oracle.try_eval(problem.length())?;
        Ok(Reference::oracle(oracle, ReferenceKind::FluxOracle))
    }

    /// The exact solution from the flux identity, whatever the problem's kind.
    pub fn flux(problem: &Problem) -> Result<Self> {
        let oracle = flux_oracle(problem, ORACLE_TOL);
        oracle.try_eval(problem.length())?;
        Ok(Reference::oracle(oracle, ReferenceKind::FluxOracle))
    }

    fn oracle(oracle: FluxAntiderivative, kind: ReferenceKind) -> Self {
        Reference::Analytic {
            du: oracle.derivative_field(),
            u: ScalarField::from_field("oracle", oracle),
            kind,
        }
    }

    pub fn kind(&self) -> ReferenceKind {
        match self {
            Reference::Analytic { kind, .. } => *kind,
            Reference::FineGrid(_) => ReferenceKind::FineGrid,
        }
    }

    /// `(l2, h1)` errors of `approx`.
    pub fn errors(&self, approx: &NodalFunction) -> Result<(f64, f64)> {
        let (l2, h1) = match self {
            Reference::Analytic { u, du, .. } => {
                let quad = QuadratureRule::gauss_legendre(ERROR_QUAD_POINTS)?;
                (
                    l2_error(approx, u, &quad),
                    h1_seminorm_error(approx, du, &quad),
                )
            }
            Reference::FineGrid(fine) => fine_grid_errors(approx, fine)?,
        };
        if !l2.is_finite() || !h1.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite error norm (l2 = {l2}, h1 = {h1})"
            )));
        }
        Ok((l2, h1))
    }
}

/// Largest `|field|` over `n_samples` equispaced points of `[0, L]`,
/// endpoints included. A lower estimate of the true supremum.
pub fn sup_norm(field: &ScalarField, length: f64, n_samples: usize) -> f64 {
    let n = n_samples.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                length
            } else {
                length * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    field
        .eval_ascending(&xs)
        .into_iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// `x^{M+1} / (M+1)! * e^x`, bounding the exponential tail `sum_{j>M} x^j/j!`.
pub fn tail_bound(psi_sup: f64, m: usize) -> f64 {
    let mut term = 1.0;
    for j in 1..=m + 1 {
        term *= psi_sup / j as f64;
    }
    term * psi_sup.exp()
}

/// `sum_{j=M+1}^{J} x^j / j!`.
pub fn tail_sum(x: f64, m: usize, j_max: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 1..=j_max {
        term *= x / j as f64;
        if j > m {
            sum += term;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub m: usize,
    pub h1_error: f64,
    pub bound: f64,
}

/// Continuous-level `|u - U_M|_{H1}` for `M = 1..=m_max` together with the
/// bound `tail_bound(||psi||, M) |u0|_{H1}`.
///
/// Returns [`Error::BoundViolation`] listing every `M` where the error exceeds
/// the bound.
pub fn theorem_bound_check(problem: &Problem, m_max: usize, tol: f64) -> Result<Vec<BoundCheck>> {
    let checks = theorem_bound_table(problem, m_max, tol)?;
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| c.h1_error > c.bound)
        .map(|c| format!("M={} error={:e} bound={:e}", c.m, c.h1_error, c.bound))
        .collect();
    if bad.is_empty() {
        Ok(checks)
    } else {
        Err(Error::BoundViolation(format!(
            "{}: {}",
            problem.name(),
            bad.join("; ")
        )))
    }
}

/// The triples of [`theorem_bound_check`] without the final assertion.
pub fn theorem_bound_table(problem: &Problem, m_max: usize, tol: f64) -> Result<Vec<BoundCheck>> {
    if m_max == 0 {
        return Err(Error::Config("M_max must be at least 1".into()));
    }
    let (a, b) = (0.0, problem.length());
    let psi = problem.psi();
    let psi_sup = sup_norm(&psi, b, KAPPA_SAMPLES);
    // u0' = F(x) = -beta + int_x^L f
    let u0 = FluxAntiderivative::new(
        ScalarField::constant(1.0),
        problem.f().clone(),
        problem.alpha(),
        problem.beta(),
        b,
        tol * 1e-2,
    );
    u0.try_flux(a)?;
    let u0_h1 = integrate(
        |s| {
            let v = u0.flux(s);
            v * v
        },
        a,
        b,
        tol * tol,
    )?
    .value
    .sqrt();

    (1..=m_max)
        .map(|m| {
            let err2 = integrate(
                |s| {
                    let p = psi.eval(s);
                    let d = ((-p).exp() - g_m_value(p, m)) * u0.flux(s);
                    d * d
                },
                a,
                b,
                tol * tol,
            )?
            .value;
            Ok(BoundCheck {
                m,
                h1_error: err2.max(0.0).sqrt(),
                bound: tail_bound(psi_sup, m) * u0_h1,
            })
        })
        .collect()
}
