//! P1 Galerkin assembly on a uniform mesh.
//!
//! Hat function `phi_i` has slope `-1/h` on element `i` and `+1/h` on element
//! `i - 1`. All element integrals use the supplied Gauss rule; derivatives of
//! nodal functions are the exact per-element constants.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{Mesh, NodalFunction};
use crate::problem::Problem;
use crate::quadrature::QuadratureRule;
use crate::tridiag::{solve_tridiagonal, TridiagonalSystem};

/// Per-element integrals `int_ref weight(x0 + h*xi) d xi`, i.e. the element
/// mean of `weight` as seen by the quadrature rule.
pub(crate) fn element_means(
    mesh: &Mesh,
    weight: &ScalarField,
    quad: &QuadratureRule,
    on_bad: impl Fn(usize, f64) -> Error,
) -> Result<Vec<f64>> {
    let xs = mesh.quadrature_points(quad.points());
    let vals = weight.eval_ascending(&xs);
    let q = quad.n_points();
    let mut means = Vec::with_capacity(mesh.n_elems());
    for (e, chunk) in vals.chunks_exact(q).enumerate() {
        let mut s = 0.0;
        for (k, (&v, &w)) in chunk.iter().zip(quad.weights()).enumerate() {
            if !v.is_finite() {
                return Err(on_bad(e, xs[e * q + k]));
            }
            s += w * v;
        }
        means.push(s);
    }
    Ok(means)
}

/// Stiffness matrix of `a(u, v) = int coeff u' v'`.
pub fn assemble_stiffness(
    mesh: &Mesh,
    coeff: &ScalarField,
    quad: &QuadratureRule,
) -> Result<TridiagonalSystem> {
    let means = element_means(mesh, coeff, quad, |element, x| Error::Assembly {
        element,
        x,
    })?;
    Ok(stiffness_from_means(mesh, &means))
}

fn stiffness_from_means(mesh: &Mesh, means: &[f64]) -> TridiagonalSystem {
    let h = mesh.h();
    let mut sys = TridiagonalSystem::zeros(mesh.n_nodes());
    for (e, &m) in means.iter().enumerate() {
        let k = m / h;
        sys.diag[e] += k;
        sys.diag[e + 1] += k;
        sys.sub[e] = -k;
        sys.sup[e] = -k;
    }
    sys
}

/// Load vector `int f phi_i`, with `-beta` added at the last node.
pub fn assemble_load(
    mesh: &Mesh,
    f: &ScalarField,
    quad: &QuadratureRule,
    beta: f64,
) -> Result<Vec<f64>> {
    let h = mesh.h();
    let q = quad.n_points();
    let xs = mesh.quadrature_points(quad.points());
    let vals = f.eval_ascending(&xs);
    let mut b = vec![0.0; mesh.n_nodes()];
    for (e, chunk) in vals.chunks_exact(q).enumerate() {
        let (mut left, mut right) = (0.0, 0.0);
        for (k, ((&v, &w), &xi)) in chunk
            .iter()
            .zip(quad.weights())
            .zip(quad.points())
            .enumerate()
        {
            if !v.is_finite() {
                return Err(Error::Load {
                    element: e,
                    x: xs[e * q + k],
                });
            }
            left += w * v * (1.0 - xi);
            right += w * v * xi;
        }
        b[e] += h * left;
        b[e + 1] += h * right;
    }
    let last = b.len() - 1;
    b[last] -= beta;
    Ok(b)
}

/// `r_i = int weight * w' * phi_i'`, given per-element weighted slopes
/// `s_e = slope_e * mean_e(weight)`.
pub(crate) fn scatter_gradient_load(weighted_slopes: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; weighted_slopes.len() + 1];
    for (e, &s) in weighted_slopes.iter().enumerate() {
        r[e] -= s;
        r[e + 1] += s;
    }
    r
}

/// `int weight * w' * phi_i'` for every node `i`.
pub fn assemble_gradient_load(
    mesh: &Mesh,
    weight: &ScalarField,
    w: &NodalFunction,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    if !w.mesh().same_as(mesh) {
        return Err(Error::MeshMismatch {
            expected: mesh.n_elems(),
            found: w.mesh().n_elems(),
        });
    }
    let means = element_means(mesh, weight, quad, |element, x| Error::Assembly {
        element,
        x,
    })?;
    let ws: Vec<f64> = means
        .iter()
        .enumerate()
        .map(|(e, m)| m * w.slope(e))
        .collect();
    Ok(scatter_gradient_load(&ws))
}

/// Replaces row 0 by `u_0 = alpha` and moves the column-0 coupling of row 1
/// into its right-hand side, keeping the matrix symmetric.
pub fn apply_dirichlet(mut system: TridiagonalSystem, alpha: f64) -> TridiagonalSystem {
    system.diag[0] = 1.0;
    system.rhs[0] = alpha;
    if !system.sub.is_empty() {
        system.rhs[1] -= system.sub[0] * alpha;
        system.sub[0] = 0.0;
        system.sup[0] = 0.0;
    }
    system
}

/// Direct Galerkin solution of the full variable-coefficient problem.
pub fn fem_solve(
    problem: &Problem,
    n_elems: usize,
    quad: &QuadratureRule,
) -> Result<NodalFunction> {
    let mesh = Mesh::uniform(problem.length(), n_elems)?;
    let mut sys = assemble_stiffness(&mesh, problem.kappa(), quad)?;
    sys.rhs = assemble_load(&mesh, problem.f(), quad, problem.beta())?;
    let sys = apply_dirichlet(sys, problem.alpha());
    let values = solve_tridiagonal(&sys)?;
    NodalFunction::new(mesh, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use approx::assert_abs_diff_eq;

    fn q(n: usize) -> QuadratureRule {
        QuadratureRule::gauss_legendre(n).unwrap()
    }

    fn hat(mesh: &Mesh, i: usize) -> impl Fn(f64) -> f64 + '_ {
        move |x| {
            let h = mesh.h();
            let xi = mesh.nodes()[i];
            (1.0 - (x - xi).abs() / h).max(0.0)
        }
    }

    fn hat_slope(mesh: &Mesh, i: usize, x: f64) -> f64 {
        let h = mesh.h();
        let xi = mesh.nodes()[i];
        if x > xi - h && x < xi {
            1.0 / h
        } else if x > xi && x < xi + h {
            -1.0 / h
        } else {
            0.0
        }
    }

    /// Adaptive integral over the support of `phi_i` split at the node.
    fn support_integral(mesh: &Mesh, i: usize, g: impl Fn(f64) -> f64) -> f64 {
        let h = mesh.h();
        let xi = mesh.nodes()[i];
        let mut s = 0.0;
        if i > 0 {
            s += integrate(&g, xi - h, xi, 1e-15).unwrap().value;
        }
        if i < mesh.n_elems() {
            s += integrate(&g, xi, xi + h, 1e-15).unwrap().value;
        }
        s
    }

    #[test]
    fn unit_coefficient_stencil() {
        let mesh = Mesh::uniform(1.0, 2).unwrap();
        let s = assemble_stiffness(&mesh, &ScalarField::constant(1.0), &q(3)).unwrap();
        for (a, b) in s.diag.iter().zip([2.0, 4.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        for (a, b) in s.sub.iter().zip([-2.0, -2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        assert!(s.is_symmetric());
    }

    #[test]
    fn constant_coefficient_scales() {
        let mesh = Mesh::uniform(1.0, 7).unwrap();
        let one = assemble_stiffness(&mesh, &ScalarField::constant(1.0), &q(3)).unwrap();
        let c = assemble_stiffness(&mesh, &ScalarField::constant(3.5), &q(3)).unwrap();
        for (a, b) in c.diag.iter().zip(&one.diag) {
            assert_abs_diff_eq!(*a, 3.5 * b, epsilon = 1e-12);
        }
        for (a, b) in c.sub.iter().zip(&one.sub) {
            assert_abs_diff_eq!(*a, 3.5 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn variable_coefficient_matches_adaptive_oracle() {
        let mesh = Mesh::uniform(1.0, 64).unwrap();
        let kappa = |x: f64| 1.0 + x * x;
        let s = assemble_stiffness(&mesh, &ScalarField::new("k", kappa), &q(3)).unwrap();
        for i in 0..mesh.n_nodes() {
            let d = support_integral(&mesh, i, |x| kappa(x) * hat_slope(&mesh, i, x).powi(2));
            assert_abs_diff_eq!(s.diag[i], d, epsilon = 1e-12 * d.abs().max(1.0));
            if i + 1 < mesh.n_nodes() {
                let x0 = mesh.nodes()[i];
                let o = integrate(
                    |x| kappa(x) * hat_slope(&mesh, i, x) * hat_slope(&mesh, i + 1, x),
                    x0,
                    x0 + mesh.h(),
                    1e-15,
                )
                .unwrap()
                .value;
                assert_abs_diff_eq!(s.sup[i], o, epsilon = 1e-12 * o.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nonfinite_coefficient_names_element() {
        let mesh = Mesh::uniform(1.0, 4).unwrap();
        let k = ScalarField::new("bad", |x: f64| if x > 0.5 { f64::NAN } else { 1.0 });
        match assemble_stiffness(&mesh, &k, &q(2)) {
            Err(Error::Assembly { element, .. }) => assert_eq!(element, 2),
            other => panic!("{other:?}"),
        }
        match assemble_load(&mesh, &k, &q(2), 0.0) {
            Err(Error::Load { element, .. }) => assert_eq!(element, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn load_examples() {
        let mesh = Mesh::uniform(1.0, 2).unwrap();
        let b = assemble_load(&mesh, &ScalarField::constant(1.0), &q(3), 0.0).unwrap();
        for (a, e) in b.iter().zip([0.25, 0.5, 0.25]) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }
        let b = assemble_load(&mesh, &ScalarField::constant(0.0), &q(3), 1.0).unwrap();
        assert_eq!(b, vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn linear_load_matches_hat_moments() {
        // int x phi_i = x_i h for interior nodes, h^2/6 at x=0, L h/2 - h^2/6 at x=L.
        let mesh = Mesh::uniform(1.0, 4).unwrap();
        let h = mesh.h();
        let b = assemble_load(&mesh, &ScalarField::new("x", |x| x), &q(2), 0.0).unwrap();
        let mut expected: Vec<f64> = mesh.nodes().iter().map(|x| x * h).collect();
        expected[0] = h * h / 6.0;
        expected[4] = h / 2.0 - h * h / 6.0;
        for (a, e) in b.iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn cubic_load_exact_with_three_points() {
        let mesh = Mesh::uniform(1.0, 5).unwrap();
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x * x * x;
        let b = assemble_load(&mesh, &ScalarField::new("cubic", f), &q(3), 0.0).unwrap();
        for (i, bi) in b.iter().enumerate() {
            let exact = support_integral(&mesh, i, |x| f(x) * hat(&mesh, i)(x));
            assert_abs_diff_eq!(*bi, exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn gradient_load_examples() {
        let mesh = Mesh::uniform(1.0, 8).unwrap();
        let id = NodalFunction::interpolate(mesh.clone(), &ScalarField::new("x", |x| x));
        let r = assemble_gradient_load(&mesh, &ScalarField::constant(0.0), &id, &q(3)).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));

        let r = assemble_gradient_load(&mesh, &ScalarField::constant(1.0), &id, &q(3)).unwrap();
        assert_abs_diff_eq!(r[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[8], 1.0, epsilon = 1e-14);
        for v in &r[1..8] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }

        let other = Mesh::uniform(1.0, 4).unwrap();
        assert!(matches!(
            assemble_gradient_load(&other, &ScalarField::constant(1.0), &id, &q(3)),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn gradient_load_matches_adaptive_oracle() {
        let p = crate::problem::builtin_problem("ex1").unwrap();
        let q3 = q(3);
        let u0 = crate::decomposition::solve_u0(&p, 128, &q3).unwrap();
        let mesh = u0.mesh().clone();
        let weight = |x: f64| (1.0 + x * x).ln();
        let r = assemble_gradient_load(&mesh, &ScalarField::new("psi", weight), &u0, &q3).unwrap();
        for (i, ri) in r.iter().enumerate() {
            let exact = support_integral(&mesh, i, |x| {
                let e = mesh.locate(x);
                weight(x) * u0.slope(e) * hat_slope(&mesh, i, x)
            });
            // 3-point Gauss is not exact for ln(1+x^2); per-element error ~ h^7.
            assert_abs_diff_eq!(*ri, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn dirichlet_row() {
        let mesh = Mesh::uniform(1.0, 4).unwrap();
        let mut s = assemble_stiffness(&mesh, &ScalarField::constant(1.0), &q(3)).unwrap();
        s.rhs = vec![1.0; 5];
        let s = apply_dirichlet(s, 0.0);
        assert_eq!((s.diag[0], s.sup[0], s.rhs[0]), (1.0, 0.0, 0.0));
        assert!(s.is_symmetric());
    }

    fn solve_simple(alpha: f64, beta: f64, f: f64, n: usize) -> NodalFunction {
        let p = Problem::builder("simple")
            .kappa(ScalarField::constant(1.0))
            .f(ScalarField::constant(f))
            .alpha(alpha)
            .beta(beta)
            .build()
            .unwrap();
        fem_solve(&p, n, &q(3)).unwrap()
    }

    #[test]
    fn dirichlet_constant_solution() {
        let u = solve_simple(3.0, 0.0, 0.0, 16);
        for v in u.values() {
            assert_abs_diff_eq!(*v, 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn flux_gives_unit_slope() {
        let u = solve_simple(1.0, 1.0, 0.0, 16);
        for (x, v) in u.mesh().nodes().iter().zip(u.values()) {
            assert_abs_diff_eq!(*v, 1.0 - x, epsilon = 1e-13);
        }
    }

    #[test]
    fn poisson_nodally_exact() {
        let u = solve_simple(0.0, 0.0, 1.0, 1024);
        for (x, v) in u.mesh().nodes().iter().zip(u.values()) {
            assert_abs_diff_eq!(*v, x - x * x / 2.0, epsilon = 1e-12);
        }
    }
}
