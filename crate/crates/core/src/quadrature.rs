//! Fixed Gauss–Legendre rules on the reference element and a globally
//! adaptive Gauss–Kronrod integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on the reference element `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n_points` must be in `2..=5`.
    pub fn gauss_legendre(n_points: usize) -> Result<Self> {
        // Nodes/weights on [-1, 1], ascending.
        let (t, w): (&[f64], &[f64]) = match n_points {
            2 => (
                &[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
                &[1.0, 1.0],
            ),
            3 => (
                &[-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4],
                &[5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
            ),
            4 => (
                &[
                    -0.861_136_311_594_052_6,
                    -0.339_981_043_584_856_3,
                    0.339_981_043_584_856_3,
                    0.861_136_311_594_052_6,
                ],
                &[
                    0.347_854_845_137_453_8,
                    0.652_145_154_862_546_1,
                    0.652_145_154_862_546_1,
                    0.347_854_845_137_453_8,
                ],
            ),
            5 => (
                &[
                    -0.906_179_845_938_664,
                    -0.538_469_310_105_683_1,
                    0.0,
                    0.538_469_310_105_683_1,
                    0.906_179_845_938_664,
                ],
                &[
                    0.236_926_885_056_189_1,
                    0.478_628_670_499_366_5,
                    0.568_888_888_888_888_9,
                    0.478_628_670_499_366_5,
                    0.236_926_885_056_189_1,
                ],
            ),
            n => {
                return Err(Error::Config(format!(
                    "quadrature order must be in 2..=5, got {n}"
                )))
            }
        };
        Ok(Self {
            points: t.iter().map(|t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|w| 0.5 * w).collect(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterator of `(xi, weight)` pairs on `[0, 1]`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_legendre(3).expect("3-point rule")
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error,
        abs: res_abs,
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Subinterval budget for [`integrate`].
pub const MAX_SUBINTERVALS: usize = 1_000_000;

/// Globally adaptive Gauss–Kronrod (7/15) integration with absolute error
/// control. The panel with the largest error estimate is bisected until the
/// summed estimate drops below `tol` (or below the roundoff floor of the
/// integrand), or the subinterval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    integrate_with_budget(f, a, b, tol, MAX_SUBINTERVALS)
}

pub fn integrate_with_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut abs = first.abs;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let floor = |abs: f64| 100.0 * f64::EPSILON * abs;

    while error > tol.max(floor(abs)) {
        if heap.len() >= max_intervals {
            return Err(Error::Accuracy {
                a,
                b,
                estimate: value,
                error,
                tolerance: tol,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            // Cannot bisect further in floating point.
            return Err(Error::Accuracy {
                a,
                b,
                estimate: value,
                error,
                tolerance: tol,
                intervals: heap.len() + 1,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
        if !value.is_finite() {
            return Err(Error::Accuracy {
                a,
                b,
                estimate: value,
                error,
                tolerance: tol,
                intervals: heap.len(),
            });
        }
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Integral {
        value,
        error,
        intervals: heap.len(),
    })
}
