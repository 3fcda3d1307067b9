//! Error tables over `(N, M)` grids.
//!
//! Cells are independent, so with the `parallel` feature they are evaluated
//! on the rayon pool. Output order is always row-major in `(N, M)` and does
//! not depend on the execution mode.

use crate::decomposition::{run_method, Method, MethodConfig};
use crate::error::Result;
use crate::norms::{ErrorReport, Reference};
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, keeping input order. `Parallel` falls back to a
/// plain loop when the crate is built without the `parallel` feature.
pub fn map_cells<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs one configuration and measures it against `reference`.
pub fn compute_error_report(
    problem: &Problem,
    reference: &Reference,
    cfg: &MethodConfig,
) -> Result<ErrorReport> {
    let run = run_method(problem, cfg)?;
    let (l2_error, h1_error) = reference.errors(&run.solution)?;
    Ok(ErrorReport {
        problem: problem.name().to_string(),
        method: cfg.method,
        n_elems: cfg.n_elems,
        m: cfg.m,
        l2_error,
        h1_error,
        reference: reference.kind(),
    })
}

/// Errors for every `(N, M)` pair, rows in the order of `ns`, columns in the
/// order of `ms`, against the problem's own reference.
pub fn error_table(
    problem: &Problem,
    method: Method,
    ns: &[usize],
    ms: &[usize],
    quad_points: usize,
    exec: Execution,
) -> Result<Vec<ErrorReport>> {
    let reference = Reference::for_problem(problem)?;
    error_table_against(problem, &reference, method, ns, ms, quad_points, exec)
}

/// [`error_table`] with a caller-supplied reference.
pub fn error_table_against(
    problem: &Problem,
    reference: &Reference,
    method: Method,
    ns: &[usize],
    ms: &[usize],
    quad_points: usize,
    exec: Execution,
) -> Result<Vec<ErrorReport>> {
    let cells: Vec<MethodConfig> = ns
        .iter()
        .flat_map(|&n| ms.iter().map(move |&m| (n, m)))
        .map(|(n, m)| MethodConfig::new(method, n, m, quad_points))
        .collect::<Result<_>>()?;
    map_cells(&cells, exec, |cfg| {
        compute_error_report(problem, reference, cfg)
    })
    .into_iter()
    .collect()
}
