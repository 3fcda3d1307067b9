//! Model problem `-(kappa u')' = f` on `(0, L)` with `u(0) = alpha` and
//! `-kappa(L) u'(L) = beta`, the log-coefficient transforms, and the four
//! builtin test problems.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::oracle::{Antiderivative, FluxAntiderivative};

/// Number of samples used to certify `kappa > 0` and record `kappa_min`.
pub const KAPPA_SAMPLES: usize = 65_536;

/// Stable public problem ids.
pub const BUILTIN_IDS: [&str; 4] = ["ex1", "ex2", "ex3", "ex4"];

/// What the tabulated errors of a problem are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceKind {
    ClosedForm,
    FluxOracle,
    FineGrid,
}

impl ReferenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceKind::ClosedForm => "closed_form",
            ReferenceKind::FluxOracle => "flux_oracle",
            ReferenceKind::FineGrid => "fine_grid",
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    length: f64,
    kappa: ScalarField,
    f: ScalarField,
    alpha: f64,
    beta: f64,
    exact: Option<ScalarField>,
    exact_derivative: Option<ScalarField>,
    reference: ReferenceKind,
    kappa_min: f64,
}

impl Problem {
    pub fn builder(name: impl Into<String>) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            length: 1.0,
            kappa: ScalarField::constant(1.0),
            f: ScalarField::constant(0.0),
            alpha: 0.0,
            beta: 0.0,
            exact: None,
            exact_derivative: None,
            reference: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn kappa(&self) -> &ScalarField {
        &self.kappa
    }
    pub fn f(&self) -> &ScalarField {
        &self.f
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn exact(&self) -> Option<&ScalarField> {
        self.exact.as_ref()
    }
    pub fn exact_derivative(&self) -> Option<&ScalarField> {
        self.exact_derivative.as_ref()
    }
    pub fn reference(&self) -> ReferenceKind {
        self.reference
    }
    /// Minimum of kappa over the validation grid.
    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    /// `psi = ln kappa` for this problem (positivity already certified).
    pub fn psi(&self) -> ScalarField {
        psi_unchecked(&self.kappa)
    }

    /// Same data with `kappa` replaced.
    pub fn with_kappa(&self, kappa: ScalarField) -> Result<Problem> {
        Problem::builder(format!("{}-k", self.name))
            .length(self.length)
            .kappa(kappa)
            .f(self.f.clone())
            .alpha(self.alpha)
            .beta(self.beta)
            .build()
    }
}

pub struct ProblemBuilder {
    name: String,
    length: f64,
    kappa: ScalarField,
    f: ScalarField,
    alpha: f64,
    beta: f64,
    exact: Option<ScalarField>,
    exact_derivative: Option<ScalarField>,
    reference: Option<ReferenceKind>,
}

impl ProblemBuilder {
    pub fn length(mut self, length: f64) -> Self {
        self.length = length;
        self
    }
    pub fn kappa(mut self, kappa: ScalarField) -> Self {
        self.kappa = kappa;
        self
    }
    pub fn f(mut self, f: ScalarField) -> Self {
        self.f = f;
        self
    }
    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
    pub fn exact(mut self, u: ScalarField, du: ScalarField) -> Self {
        self.exact = Some(u);
        self.exact_derivative = Some(du);
        self
    }
    pub fn reference(mut self, r: ReferenceKind) -> Self {
        self.reference = Some(r);
        self
    }

    pub fn build(self) -> Result<Problem> {
        let l = self.length;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "length must be positive, got {l}"
            )));
        }
        let xs: Vec<f64> = (0..KAPPA_SAMPLES)
            .map(|i| l * i as f64 / (KAPPA_SAMPLES - 1) as f64)
            .collect();
        let mut kappa_min = f64::INFINITY;
        for (&x, k) in xs.iter().zip(self.kappa.eval_ascending(&xs)) {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "kappa must be positive and finite, kappa({x}) = {k}"
                )));
            }
            kappa_min = kappa_min.min(k);
        }
        if let (Some(u), Some(du)) = (&self.exact, &self.exact_derivative) {
            let u0 = u.eval(0.0);
            if (u0 - self.alpha).abs() > 1e-10 {
                return Err(Error::InvalidProblem(format!(
                    "exact solution violates u(0) = alpha: u(0) = {u0}, alpha = {}",
                    self.alpha
                )));
            }
            let flux = -self.kappa.eval(l) * du.eval(l);
            if (flux - self.beta).abs() > 1e-8 {
                return Err(Error::InvalidProblem(format!(
                    "exact solution violates the flux condition: -kappa u'(L) = {flux}, beta = {}",
                    self.beta
                )));
            }
        }
        let reference = self.reference.unwrap_or(if self.exact.is_some() {
            ReferenceKind::ClosedForm
        } else {
            ReferenceKind::FluxOracle
        });
        Ok(Problem {
            name: self.name,
            length: l,
            kappa: self.kappa,
            f: self.f,
            alpha: self.alpha,
            beta: self.beta,
            exact: self.exact,
            exact_derivative: self.exact_derivative,
            reference,
            kappa_min,
        })
    }
}

fn psi_unchecked(kappa: &ScalarField) -> ScalarField {
    kappa.map(format!("ln({})", kappa.label()), f64::ln)
}

/// `psi = ln kappa`. Positivity is checked on [`KAPPA_SAMPLES`] points of
/// `[0, length]`; points where `kappa <= 0` evaluate to NaN.
pub fn psi_of(kappa: &ScalarField, length: f64) -> Result<ScalarField> {
    for i in 0..KAPPA_SAMPLES {
        let x = length * i as f64 / (KAPPA_SAMPLES - 1) as f64;
        let k = kappa.eval(x);
        if k <= 0.0 || k.is_nan() {
            return Err(Error::Domain(format!(
                "ln kappa undefined: kappa({x}) = {k}"
            )));
        }
    }
    Ok(psi_unchecked(kappa))
}

/// `sum_{j=0}^{M} (-psi)^j / j!` at a single value of `psi`.
#[inline]
pub fn g_m_value(psi: f64, m: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=m {
        term *= -psi / j as f64;
        sum += term;
    }
    sum
}

/// Truncated exponential `G_M = sum_{j=0}^{M} (-psi)^j / j!`.
pub fn g_m(psi: &ScalarField, m: usize) -> ScalarField {
    psi.map(format!("G_{m}[{}]", psi.label()), move |p| g_m_value(p, m))
}

/// Closed-form-free exact solution through the flux identity:
/// `u(x) = alpha + int_0^x kappa^{-1}(s) (-beta + int_s^L f) ds`.
pub fn exact_solution_via_flux(problem: &Problem, tol: f64) -> Result<ScalarField> {
    let oracle = flux_oracle(problem, tol);
    oracle.try_eval(problem.length())?;
    Ok(ScalarField::from_field(
        format!("flux-oracle[{}]", problem.name()),
        oracle,
    ))
}

pub(crate) fn flux_oracle(problem: &Problem, tol: f64) -> FluxAntiderivative {
    let inv = problem.kappa().map("1/kappa", |k| 1.0 / k);
    FluxAntiderivative::new(
        inv,
        problem.f().clone(),
        problem.alpha(),
        problem.beta(),
        problem.length(),
        tol,
    )
}

/// Tolerance of the semi-analytic reference attached to `ex4`.
const EX4_TOL: f64 = 1e-13;

pub fn builtin_problem(id: &str) -> Result<Problem> {
    match id {
        "ex1" => Problem::builder("ex1")
            .kappa(ScalarField::new("1+x^2", |x| 1.0 + x * x))
            .f(ScalarField::constant(1.0))
            .exact(
                ScalarField::new("atan(x)-ln(1+x^2)/2", |x: f64| {
                    x.atan() - 0.5 * (1.0 + x * x).ln()
                }),
                ScalarField::new("(1-x)/(1+x^2)", |x| (1.0 - x) / (1.0 + x * x)),
            )
            .build(),
        "ex2" => {
            let w = 10.0 * PI;
            Problem::builder("ex2")
                .kappa(ScalarField::new("1/(1-sin(10pi x)/2)", move |x: f64| {
                    1.0 / (1.0 - 0.5 * (w * x).sin())
                }))
                .f(ScalarField::constant(1.0))
                .exact(
                    // Constant term fixed by u(0) = 0.
                    ScalarField::new("ex2-exact", move |x: f64| {
                        ((w * x).sin()
                            + w * (1.0 - x) * (w * x).cos()
                            + 100.0 * PI * PI * x * (2.0 - x))
                            / (200.0 * PI * PI)
                            - 1.0 / (20.0 * PI)
                    }),
                    ScalarField::new("(1-x)(1-sin(10pi x)/2)", move |x: f64| {
                        (1.0 - x) * (1.0 - 0.5 * (w * x).sin())
                    }),
                )
                .build()
        }
        "ex3" => Problem::builder("ex3")
            .kappa(ScalarField::new("(x+1)^2", |x| (x + 1.0) * (x + 1.0)))
            .f(ScalarField::new("x/(x+1)", |x| x / (x + 1.0)))
            .exact(
                ScalarField::new("ex3-exact", |x: f64| {
                    ((3.0 - LN_2) * x - (2.0 + x) * x.ln_1p()) / (1.0 + x)
                }),
                // kappa u' = int_x^1 t/(t+1) dt = 1 - ln 2 - x + ln(1+x)
                ScalarField::new("ex3-exact'", |x: f64| {
                    (1.0 - LN_2 - x + x.ln_1p()) / ((1.0 + x) * (1.0 + x))
                }),
            )
            .build(),
        "ex4" => {
            let kappa = |x: f64| x.powi(4) + (-x).exp();
            let du = move |s: f64| 2.0 * (PI * s).sin() / (PI * kappa(s));
            let u = Antiderivative::new(ScalarField::new("ex4-exact'", du), 0.0, 1.0, EX4_TOL);
            Problem::builder("ex4")
                .kappa(ScalarField::new("x^4+exp(-x)", kappa))
                .f(ScalarField::new("-2cos(pi x)", |x: f64| {
                    -2.0 * (PI * x).cos()
                }))
                .exact(
                    ScalarField::from_field("ex4-semi-analytic", u),
                    ScalarField::new("ex4-exact'", du),
                )
                .reference(ReferenceKind::FineGrid)
                .build()
        }
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn psi_examples() {
        let one = psi_of(&ScalarField::constant(1.0), 1.0).unwrap();
        assert_eq!(one.eval(0.3), 0.0);
        let e = psi_of(&ScalarField::constant(std::f64::consts::E), 1.0).unwrap();
        assert_abs_diff_eq!(e.eval(0.9), 1.0, epsilon = 1e-15);
        let k = psi_of(&ScalarField::new("1+x^2", |x| 1.0 + x * x), 1.0).unwrap();
        assert_abs_diff_eq!(k.eval(1.0), std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn psi_rejects_nonpositive_kappa() {
        let k = ScalarField::new("x-0.5", |x| x - 0.5);
        assert!(matches!(psi_of(&k, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn g_m_examples() {
        let zero = g_m(&ScalarField::constant(0.0), 7);
        assert_eq!(zero.eval(0.4), 1.0);
        let ln2 = ScalarField::constant(LN_2);
        assert_abs_diff_eq!(g_m(&ln2, 1).eval(0.0), 1.0 - LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(g_m(&ln2, 30).eval(0.0), 0.5, epsilon = 1e-12);
        // Large orders do not overflow.
        assert!(g_m_value(3.0, 400).is_finite());
        assert_abs_diff_eq!(g_m_value(3.0, 400), (-3.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn g_m_of_negated_psi_is_exp_partial_sum() {
        for &p in &[0.0, 0.3, -0.7, 1.2] {
            for m in 0..12 {
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..=m {
                    term *= p / j as f64;
                    sum += term;
                }
                assert_abs_diff_eq!(g_m_value(-p, m), sum, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn g_m_taylor_remainder() {
        for id in BUILTIN_IDS {
            let p = builtin_problem(id).unwrap();
            let psi = p.psi();
            let sup = (0..=1000)
                .map(|i| psi.eval(i as f64 / 1000.0).abs())
                .fold(0.0, f64::max);
            for m in 0..10usize {
                let mut fact = 1.0;
                for j in 1..=(m + 1) {
                    fact *= j as f64;
                }
                let bound = sup.powi(m as i32 + 1) / fact * sup.exp();
                for i in 0..=1000 {
                    let x = i as f64 / 1000.0;
                    let gap = (g_m_value(psi.eval(x), m) - 1.0 / p.kappa().eval(x)).abs();
                    assert!(gap <= bound * (1.0 + 1e-12) + 1e-15, "{id} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn exp_log_round_trip() {
        for id in BUILTIN_IDS {
            let p = builtin_problem(id).unwrap();
            let psi = p.psi();
            for i in 0..1000 {
                let x = i as f64 / 999.0;
                let k = p.kappa().eval(x);
                assert_relative_eq!(psi.eval(x).exp(), k, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn builtin_values() {
        let ex1 = builtin_problem("ex1").unwrap();
        let u = ex1.exact().unwrap();
        assert_abs_diff_eq!(u.eval(1.0), 0.438_824_6, epsilon = 1e-7);
        assert_eq!(u.eval(0.0), 0.0);
        let ex3 = builtin_problem("ex3").unwrap();
        assert_abs_diff_eq!(
            ex3.exact().unwrap().eval(1.0),
            ((3.0 - LN_2) - 3.0 * LN_2) / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ex3.exact().unwrap().eval(1.0), 0.113_705_6, epsilon = 1e-7);
        for id in BUILTIN_IDS {
            let p = builtin_problem(id).unwrap();
            assert_eq!((p.length(), p.alpha(), p.beta()), (1.0, 0.0, 0.0));
            assert!(p.kappa_min() > 0.0);
        }
        assert_eq!(
            builtin_problem("ex4").unwrap().reference(),
            ReferenceKind::FineGrid
        );
    }

    #[test]
    fn unknown_id_lists_valid_ids() {
        let e = builtin_problem("ex9").unwrap_err();
        assert!(e.to_string().contains("ex1, ex2, ex3, ex4"));
    }

    #[test]
    fn builder_validation() {
        assert!(Problem::builder("neg")
            .kappa(ScalarField::new("x-0.5", |x| x - 0.5))
            .build()
            .is_err());
        // Exact solution that violates u(0) = alpha.
        assert!(Problem::builder("bad-exact")
            .f(ScalarField::constant(1.0))
            .exact(
                ScalarField::new("1+x", |x| 1.0 + x),
                ScalarField::constant(1.0)
            )
            .build()
            .is_err());
    }

    #[test]
    fn flux_oracle_examples() {
        let ex1 = builtin_problem("ex1").unwrap();
        let u = exact_solution_via_flux(&ex1, 1e-10).unwrap();
        assert_abs_diff_eq!(u.eval(1.0), ex1.exact().unwrap().eval(1.0), epsilon = 1e-9);

        let poisson = Problem::builder("poisson")
            .f(ScalarField::constant(1.0))
            .build()
            .unwrap();
        let u = exact_solution_via_flux(&poisson, 1e-10).unwrap();
        assert_abs_diff_eq!(u.eval(0.5), 0.375, epsilon = 1e-10);
    }

    #[test]
    fn ex4_oracle_matches_independent_semi_analytic_form() {
        let ex4 = builtin_problem("ex4").unwrap();
        let u = exact_solution_via_flux(&ex4, 1e-10).unwrap();
        // Independent route: closed-form flux, plain composite Simpson on a fine grid.
        let g = |s: f64| 2.0 * (PI * s).sin() / (PI * (s.powi(4) + (-s).exp()));
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut simpson = g(0.0) + g(1.0);
        for i in 1..n {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        simpson *= h / 3.0;
        assert_abs_diff_eq!(u.eval(1.0), simpson, epsilon = 1e-8);
        assert_abs_diff_eq!(ex4.exact().unwrap().eval(1.0), simpson, epsilon = 1e-8);
    }

    #[test]
    fn closed_forms_agree_with_flux_oracle() {
        let tol = 1e-10;
        for id in ["ex1", "ex2", "ex3"] {
            let p = builtin_problem(id).unwrap();
            let oracle = exact_solution_via_flux(&p, tol).unwrap();
            let xs: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
            let ys = oracle.eval_ascending(&xs);
            for (x, y) in xs.iter().zip(ys) {
                let exact = p.exact().unwrap().eval(*x);
                assert!(
                    (exact - y).abs() <= 10.0 * tol,
                    "{id} x={x}: {exact} vs {y}"
                );
            }
        }
    }

    #[test]
    fn ex2_closed_form_constant() {
        // The variant with constant -1/(200 pi) misses u(0) = 0 by 9/(200 pi).
        let p = builtin_problem("ex2").unwrap();
        let oracle = exact_solution_via_flux(&p, 1e-11).unwrap();
        let exact = p.exact().unwrap();
        let offset = 1.0 / (20.0 * PI) - 1.0 / (200.0 * PI);
        assert_abs_diff_eq!(offset, 9.0 / (200.0 * PI), epsilon = 1e-16);
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let printed_variant = exact.eval(x) + offset;
            assert!((printed_variant - oracle.eval(x)).abs() > 1e-6);
            assert_abs_diff_eq!(exact.eval(x), oracle.eval(x), epsilon = 1e-9);
        }
    }

    #[test]
    fn flux_identity_residual() {
        // kappa(x) u'(x) = -beta + int_x^L f for the attached derivatives.
        for id in BUILTIN_IDS {
            let p = builtin_problem(id).unwrap();
            let du = p.exact_derivative().unwrap();
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                let rhs = -p.beta() + integrate(|t| p.f().eval(t), x, 1.0, 1e-13).unwrap().value;
                assert_abs_diff_eq!(p.kappa().eval(x) * du.eval(x), rhs, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn attached_derivatives_match_closed_forms() {
        for id in ["ex1", "ex2", "ex3"] {
            let p = builtin_problem(id).unwrap();
            let (u, du) = (p.exact().unwrap(), p.exact_derivative().unwrap());
            let d = 1e-5;
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let fd = (u.eval(x + d) - u.eval(x - d)) / (2.0 * d);
                assert_abs_diff_eq!(fd, du.eval(x), epsilon = 1e-7);
            }
        }
    }
}
