//! Log-coefficient series decomposition of `-(kappa u')' = f`.
//!
//! Writing `kappa = exp(psi)` and `u = sum_j u_j` gives a family of Poisson
//! problems sharing the unit-coefficient operator:
//!
//! * original recursion: `(u_m', v') = -sum_{j=1}^{m} (psi^j/j! u_{m-j}', v')`,
//!   one back-substitution per term;
//! * improved form: `(U_M', v') = (G_M u0', v')` with the truncated exponential
//!   `G_M = sum_{j<=M} (-psi)^j/j!`, two back-substitutions for any `M`.
//!
//! Every solve here reuses a single factorization of the unit stiffness
//! matrix. Flux conditions of the subproblems are natural and need no
//! boundary assembly.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_load, assemble_stiffness, fem_solve, scatter_gradient_load,
};
use crate::field::ScalarField;
use crate::mesh::{Mesh, NodalFunction};
use crate::oracle::FluxAntiderivative;
use crate::problem::{g_m, g_m_value, Problem};
use crate::quadrature::QuadratureRule;
use crate::tridiag::ThomasFactorization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Original,
    Improved,
    DirectFem,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Original, Method::Improved, Method::DirectFem];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Original => "original",
            Method::Improved => "improved",
            Method::DirectFem => "direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Method::Original),
            "improved" => Ok(Method::Improved),
            "direct" => Ok(Method::DirectFem),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected original, improved or direct)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub m: usize,
    pub n_elems: usize,
    pub quad_points: usize,
}

impl MethodConfig {
    pub fn new(method: Method, n_elems: usize, m: usize, quad_points: usize) -> Result<Self> {
        if n_elems == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if matches!(method, Method::Original | Method::Improved) && m == 0 {
            return Err(Error::Config(format!(
                "{method} needs M >= 1 (M = 0 is the plain u0 solve)"
            )));
        }
        QuadratureRule::gauss_legendre(quad_points)?;
        Ok(Self {
            method,
            m,
            n_elems,
            quad_points,
        })
    }

    pub fn quadrature(&self) -> QuadratureRule {
        QuadratureRule::gauss_legendre(self.quad_points).expect("validated in new")
    }
}

/// Work done by one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub factorizations: usize,
    /// Forward/back substitutions against a factorized matrix.
    pub solves: usize,
    /// Weighted-gradient right-hand-side assemblies.
    pub assemblies: usize,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub u0: NodalFunction,
    /// `u_1 .. u_M`, only for the original recursion.
    pub terms: Option<Vec<NodalFunction>>,
    pub u_m: NodalFunction,
    pub counts: OpCounts,
    pub wall_time: Duration,
}

impl DecompositionResult {
    pub fn solve_count(&self) -> usize {
        self.counts.solves
    }
    pub fn assembly_count(&self) -> usize {
        self.counts.assemblies
    }
}

/// Result of any of the three methods.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub solution: NodalFunction,
    pub counts: OpCounts,
    pub wall_time: Duration,
}

/// Unit-coefficient operator with Dirichlet row, factorized once.
struct LaplaceOperator {
    mesh: Mesh,
    factor: ThomasFactorization,
    /// `A[1][0]` before the Dirichlet row was imposed.
    coupling: f64,
}

impl LaplaceOperator {
    fn new(mesh: Mesh, quad: &QuadratureRule, counts: &mut OpCounts) -> Result<Self> {
        let sys = assemble_stiffness(&mesh, &ScalarField::constant(1.0), quad)?;
        let coupling = sys.sub[0];
        let sys = apply_dirichlet(sys, 0.0);
        let factor = ThomasFactorization::new(&sys)?;
        counts.factorizations += 1;
        Ok(Self {
            mesh,
            factor,
            coupling,
        })
    }

    /// Solves with `u(0) = alpha`, lifting the boundary value into row 1.
    fn solve(&self, mut rhs: Vec<f64>, alpha: f64, counts: &mut OpCounts) -> Result<NodalFunction> {
        rhs[0] = alpha;
        if rhs.len() > 1 {
            rhs[1] -= self.coupling * alpha;
        }
        let values = self.factor.solve(&rhs)?;
        counts.solves += 1;
        NodalFunction::new(self.mesh.clone(), values)
    }

    fn solve_u0(
        &self,
        problem: &Problem,
        quad: &QuadratureRule,
        counts: &mut OpCounts,
    ) -> Result<NodalFunction> {
        let rhs = assemble_load(&self.mesh, problem.f(), quad, problem.beta())?;
        self.solve(rhs, problem.alpha(), counts)
    }
}

/// `psi` at every quadrature point, element-major.
fn psi_at_quadrature_points(
    problem: &Problem,
    mesh: &Mesh,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    let xs = mesh.quadrature_points(quad.points());
    let psi = problem.psi().eval_ascending(&xs);
    let q = quad.n_points();
    if let Some(k) = psi.iter().position(|v| !v.is_finite()) {
        return Err(Error::Assembly {
            element: k / q,
            x: xs[k],
        });
    }
    Ok(psi)
}

/// Poisson problem with the same `f`, `alpha`, `beta` and unit coefficient.
pub fn solve_u0(problem: &Problem, n_elems: usize, quad: &QuadratureRule) -> Result<NodalFunction> {
    let mesh = Mesh::uniform(problem.length(), n_elems)?;
    let mut counts = OpCounts::default();
    LaplaceOperator::new(mesh, quad, &mut counts)?.solve_u0(problem, quad, &mut counts)
}

/// Original recursion: `M + 1` back-substitutions and `M` gradient assemblies.
pub fn solve_original(
    problem: &Problem,
    n_elems: usize,
    m: usize,
    quad: &QuadratureRule,
) -> Result<DecompositionResult> {
    let start = Instant::now();
    let mesh = Mesh::uniform(problem.length(), n_elems)?;
    let mut counts = OpCounts::default();
    let op = LaplaceOperator::new(mesh.clone(), quad, &mut counts)?;
    let u0 = op.solve_u0(problem, quad, &mut counts)?;
    if m == 0 {
        return Ok(DecompositionResult {
            u_m: u0.clone(),
            u0,
            terms: Some(Vec::new()),
            counts,
            wall_time: start.elapsed(),
        });
    }

    let psi = psi_at_quadrature_points(problem, &mesh, quad)?;
    let q = quad.n_points();
    let weights = quad.weights();
    // slopes[k][e] = u_k' on element e
    let mut slopes: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    slopes.push(u0.slopes());
    let mut terms = Vec::with_capacity(m);

    for order in 1..=m {
        let weighted: Vec<f64> = (0..n_elems)
            .map(|e| {
                let mut s = 0.0;
                for (k, &w) in weights.iter().enumerate() {
                    let p = psi[e * q + k];
                    let mut coeff = 1.0;
                    let mut acc = 0.0;
                    for j in 1..=order {
                        coeff *= p / j as f64;
                        acc += coeff * slopes[order - j][e];
                    }
                    s += w * acc;
                }
                -s
            })
            .collect();
        counts.assemblies += 1;
        let term = op.solve(scatter_gradient_load(&weighted), 0.0, &mut counts)?;
        slopes.push(term.slopes());
        terms.push(term);
    }

    let mut u_m = u0.clone();
    for t in &terms {
        u_m.add_assign(t);
    }
    Ok(DecompositionResult {
        u0,
        terms: Some(terms),
        u_m,
        counts,
        wall_time: start.elapsed(),
    })
}

/// Two-solve form: `u0`, then `U_M` from `(U_M', v') = (G_M u0', v')`.
pub fn solve_improved(
    problem: &Problem,
    n_elems: usize,
    m: usize,
    quad: &QuadratureRule,
) -> Result<DecompositionResult> {
    let start = Instant::now();
    let mesh = Mesh::uniform(problem.length(), n_elems)?;
    let mut counts = OpCounts::default();
    let op = LaplaceOperator::new(mesh.clone(), quad, &mut counts)?;
    let u0 = op.solve_u0(problem, quad, &mut counts)?;

    let psi = psi_at_quadrature_points(problem, &mesh, quad)?;
    let q = quad.n_points();
    let weights = quad.weights();
    let weighted: Vec<f64> = (0..n_elems)
        .map(|e| {
            let mean: f64 = weights
                .iter()
                .enumerate()
                .map(|(k, &w)| w * g_m_value(psi[e * q + k], m))
                .sum();
            mean * u0.slope(e)
        })
        .collect();
    counts.assemblies += 1;
    let u_m = op.solve(
        scatter_gradient_load(&weighted),
        problem.alpha(),
        &mut counts,
    )?;
    Ok(DecompositionResult {
        u0,
        terms: None,
        u_m,
        counts,
        wall_time: start.elapsed(),
    })
}

/// Runs any method; `m` is ignored for the direct solve.
pub fn run_method(problem: &Problem, cfg: &MethodConfig) -> Result<MethodRun> {
    let quad = cfg.quadrature();
    match cfg.method {
        Method::Original | Method::Improved => {
            let r = if cfg.method == Method::Original {
                solve_original(problem, cfg.n_elems, cfg.m, &quad)?
            } else {
                solve_improved(problem, cfg.n_elems, cfg.m, &quad)?
            };
            Ok(MethodRun {
                solution: r.u_m,
                counts: r.counts,
                wall_time: r.wall_time,
            })
        }
        Method::DirectFem => {
            let start = Instant::now();
            let solution = fem_solve(problem, cfg.n_elems, &quad)?;
            Ok(MethodRun {
                solution,
                counts: OpCounts {
                    factorizations: 1,
                    solves: 1,
                    assemblies: 0,
                },
                wall_time: start.elapsed(),
            })
        }
    }
}

/// `u_j' = (-psi)^j / j! * u0'`.
pub fn term_gradient(j: usize, psi: &ScalarField, u0_prime: &ScalarField) -> ScalarField {
    if j == 0 {
        return u0_prime.clone();
    }
    let (psi, du) = (psi.clone(), u0_prime.clone());
    ScalarField::new(format!("u_{j}'"), move |x| {
        let p = psi.eval(x);
        let mut c = 1.0;
        for i in 1..=j {
            c *= -p / i as f64;
        }
        c * du.eval(x)
    })
}

/// Mesh-free truncated approximation
/// `U_M(x) = alpha + int_0^x G_M(s) (-beta + int_s^L f) ds`.
pub fn semi_analytic_u_m(problem: &Problem, m: usize, tol: f64) -> Result<ScalarField> {
    let oracle = semi_analytic_oracle(problem, m, tol);
    oracle.try_eval(problem.length())?;
    Ok(ScalarField::from_field(
        format!("U_{m}[{}]", problem.name()),
        oracle,
    ))
}

pub(crate) fn semi_analytic_oracle(problem: &Problem, m: usize, tol: f64) -> FluxAntiderivative {
    FluxAntiderivative::new(
        g_m(&problem.psi(), m),
        problem.f().clone(),
        problem.alpha(),
        problem.beta(),
        problem.length(),
        tol,
    )
}
