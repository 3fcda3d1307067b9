//! Cost and wall-time comparison of the three solvers on one configuration.
//!
//! Runs are strictly sequential. Each method gets one untimed warmup run and
//! `reps` timed runs, of which the median is reported.

use std::time::Duration;

use crate::decomposition::{run_method, Method, MethodConfig, OpCounts};
use crate::error::{Error, Result};
use crate::norms::Reference;
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodBench {
    pub method: Method,
    pub counts: OpCounts,
    pub wall_ns_median: u128,
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub problem: String,
    pub n_elems: usize,
    pub m: usize,
    pub methods: Vec<MethodBench>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str =
        "problem,N,M,method,solves,assemblies,factorizations,wall_ns_median,l2_error";

    pub fn get(&self, method: Method) -> Option<&MethodBench> {
        self.methods.iter().find(|b| b.method == method)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.methods
            .iter()
            .map(|b| {
                format!(
                    "{},{},{},{},{},{},{},{},{:.16e}",
                    self.problem,
                    self.n_elems,
                    self.m,
                    b.method,
                    b.counts.solves,
                    b.counts.assemblies,
                    b.counts.factorizations,
                    b.wall_ns_median,
                    b.l2_error
                )
            })
            .collect()
    }
}

/// Median of the durations; the mean of the two middle values for even counts.
pub fn median(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    let n = times.len();
    if n == 0 {
        return Duration::ZERO;
    }
    if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2
    }
}

/// Benchmarks Original, Improved and the direct solve with 3-point quadrature.
pub fn run_benchmark(
    problem: &Problem,
    n_elems: usize,
    m: usize,
    reps: usize,
) -> Result<BenchReport> {
    run_benchmark_with(problem, n_elems, m, reps, 3)
}

/// [`run_benchmark`] with a chosen element quadrature.
///
/// Errors of the decomposition methods are measured against the continuous
/// truncated approximation of the same `M`, the direct solve against the
/// exact solution.
pub fn run_benchmark_with(
    problem: &Problem,
    n_elems: usize,
    m: usize,
    reps: usize,
    quad_points: usize,
) -> Result<BenchReport> {
    if reps < 3 {
        return Err(Error::Config(format!(
            "reps must be at least 3, got {reps}"
        )));
    }
    let truncated = Reference::semi_analytic(problem, m)?;
    let exact = Reference::flux(problem)?;

    let mut methods = Vec::with_capacity(3);
    for method in Method::ALL {
        let cfg = MethodConfig::new(method, n_elems, m, quad_points)?;
        let warm = run_method(problem, &cfg)?;
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps {
            let run = run_method(problem, &cfg)?;
            if run.counts != warm.counts {
                return Err(Error::Domain(format!(
                    "{method}: operation counters changed between repetitions"
                )));
            }
            times.push(run.wall_time);
        }
        let reference = if method == Method::DirectFem {
            &exact
        } else {
            &truncated
        };
        let (l2_error, _) = reference.errors(&warm.solution)?;
        methods.push(MethodBench {
            method,
            counts: warm.counts,
            wall_ns_median: median(&mut times).as_nanos(),
            l2_error,
        });
    }
    Ok(BenchReport {
        problem: problem.name().to_string(),
        n_elems,
        m,
        methods,
    })
}
