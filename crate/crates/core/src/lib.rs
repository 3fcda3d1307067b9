//! One-dimensional elliptic solver for `-(kappa u')' = f` on `(0, L)` with
//! `u(0) = alpha` and `-kappa(L) u'(L) = beta`.
//!
//! The coefficient is handled through `psi = ln kappa`: the solution is
//! expanded into a series of Poisson problems that all share the
//! unit-coefficient stiffness matrix. Two variants are provided, the term by
//! term recursion and a two-solve form built on the truncated exponential
//! `G_M = sum_{j<=M} (-psi)^j / j!`. A direct P1 finite element solve, error
//! norms against mesh-free references, and a timing harness complete the
//! crate.

pub mod bench;
pub mod decomposition;
pub mod error;
pub mod fem;
pub mod field;
pub mod mesh;
pub mod norms;
pub mod oracle;
pub mod problem;
pub mod quadrature;
pub mod sweep;
pub mod tridiag;

pub use decomposition::{
    run_method, semi_analytic_u_m, solve_improved, solve_original, solve_u0, term_gradient,
    DecompositionResult, Method, MethodConfig, MethodRun, OpCounts,
};
pub use error::{Error, Result};
pub use fem::fem_solve;
pub use field::{Field, ScalarField};
pub use mesh::{Mesh, NodalFunction};
pub use problem::{builtin_problem, g_m, psi_of, Problem, ReferenceKind, BUILTIN_IDS};
pub use quadrature::QuadratureRule;
