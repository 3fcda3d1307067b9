use decomp1d::bench::run_benchmark;
use decomp1d::norms::{l2_error, theorem_bound_check, ERROR_QUAD_POINTS};
use decomp1d::sweep::{error_table, Execution};
use decomp1d::{
    builtin_problem, fem_solve, run_method, semi_analytic_u_m, solve_improved, solve_original,
    Mesh, Method, MethodConfig, NodalFunction, Problem, QuadratureRule, ScalarField,
};
use proptest::prelude::*;

fn q3() -> QuadratureRule {
    QuadratureRule::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn l2_triangle_inequality(
        a in prop::collection::vec(-5.0f64..5.0, 17),
        b in prop::collection::vec(-5.0f64..5.0, 17),
        c in prop::collection::vec(-5.0f64..5.0, 17),
    ) {
        let mesh = Mesh::uniform(1.0, 16).unwrap();
        let q = QuadratureRule::gauss_legendre(ERROR_QUAD_POINTS).unwrap();
        let fa = NodalFunction::new(mesh.clone(), a).unwrap();
        let fb = NodalFunction::new(mesh.clone(), b).unwrap();
        let fc = NodalFunction::new(mesh, c).unwrap();
        let ac = l2_error(&fa, &fc.to_field(), &q);
        let ab = l2_error(&fa, &fb.to_field(), &q);
        let bc = l2_error(&fb, &fc.to_field(), &q);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn unit_kappa_methods_coincide(
        n in 1usize..64,
        m in 1usize..8,
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        w in 0.5f64..6.0,
    ) {
        let p = Problem::builder("unit")
            .f(ScalarField::new("f", move |x: f64| (w * x).sin()))
            .alpha(alpha)
            .beta(beta)
            .build()
            .unwrap();
        let d = fem_solve(&p, n, &q3()).unwrap();
        let o = solve_original(&p, n, m, &q3()).unwrap();
        let i = solve_improved(&p, n, m, &q3()).unwrap();
        prop_assert!(o.u_m.max_abs_diff(&d).unwrap() <= 1e-12);
        prop_assert!(i.u_m.max_abs_diff(&d).unwrap() <= 1e-12);
    }

    #[test]
    fn m1_equivalence_any_mesh(n in 1usize..200, id in 0usize..4) {
        let p = builtin_problem(["ex1", "ex2", "ex3", "ex4"][id]).unwrap();
        let o = solve_original(&p, n, 1, &q3()).unwrap();
        let i = solve_improved(&p, n, 1, &q3()).unwrap();
        prop_assert!(o.u_m.max_abs_diff(&i.u_m).unwrap() <= 1e-12);
    }
}

#[test]
fn counters_hold_for_every_run() {
    for id in ["ex1", "ex2", "ex3", "ex4"] {
        let p = builtin_problem(id).unwrap();
        for n in [1, 7, 64] {
            for m in 1..=10 {
                for method in Method::ALL {
                    let cfg = MethodConfig::new(method, n, m, 3).unwrap();
                    let r = run_method(&p, &cfg).unwrap();
                    let expected = match method {
                        Method::Original => (m + 1, m),
                        Method::Improved => (2, 1),
                        Method::DirectFem => (1, 0),
                    };
                    assert_eq!((r.counts.solves, r.counts.assemblies), expected);
                    assert_eq!(r.counts.factorizations, 1);
                }
            }
        }
    }
}

#[test]
fn improved_converges_to_semi_analytic() {
    // The discrete U_M approaches the mesh-free U_M at second order.
    let p = builtin_problem("ex3").unwrap();
    let oracle = semi_analytic_u_m(&p, 3, 1e-12).unwrap();
    let q = QuadratureRule::gauss_legendre(5).unwrap();
    let errs: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| l2_error(&solve_improved(&p, n, 3, &q3()).unwrap().u_m, &oracle, &q))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.9..=2.1).contains(&order), "{errs:?}");
    }
}

#[test]
fn errors_decrease_in_m_at_fine_mesh() {
    // At N = 2^11 the truncation error dominates for small M.
    for id in ["ex1", "ex3"] {
        let p = builtin_problem(id).unwrap();
        let rows = error_table(
            &p,
            Method::Improved,
            &[2048],
            &[1, 2, 3, 4],
            3,
            Execution::Sequential,
        )
        .unwrap();
        for w in rows.windows(2) {
            assert!(w[1].l2_error < w[0].l2_error, "{id}: {:?}", rows);
        }
    }
}

#[test]
fn theorem_bound_on_all_builtins() {
    for id in ["ex1", "ex2", "ex3", "ex4"] {
        let p = builtin_problem(id).unwrap();
        let checks = theorem_bound_check(&p, 8, 1e-10).unwrap();
        assert_eq!(checks.len(), 8);
        assert!(checks.windows(2).all(|w| w[1].h1_error < w[0].h1_error));
    }
}

#[test]
fn doubling_kappa_halves_solution() {
    // ex1 has zero boundary data, so the solution is linear in 1/kappa scaling.
    let p = builtin_problem("ex1").unwrap();
    let doubled = p.with_kappa(p.kappa().map("2k", |k| 2.0 * k)).unwrap();
    let u = fem_solve(&p, 256, &q3()).unwrap();
    let v = fem_solve(&doubled, 256, &q3()).unwrap();
    for (a, b) in u.values().iter().zip(v.values()) {
        assert!((a - 2.0 * b).abs() <= 1e-12);
    }
}

#[test]
fn wall_time_scales_with_n() {
    let p = builtin_problem("ex2").unwrap();
    let small = run_benchmark(&p, 1 << 14, 6, 5).unwrap();
    let large = run_benchmark(&p, 1 << 15, 6, 5).unwrap();
    for (s, l) in small.methods.iter().zip(&large.methods) {
        let ratio = l.wall_ns_median as f64 / s.wall_ns_median as f64;
        assert!(ratio >= 1.5, "{}: ratio {ratio}", s.method);
    }
}
