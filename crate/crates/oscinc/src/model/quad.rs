//! Quadrature kernels and cumulative tables behind the oscillatory
//! primitives.
//!
//! Both built-in density primitives reduce to `s^{3/2}/3` plus an
//! oscillatory integral. The integrals are served from cumulative
//! Gauss-Legendre tables over a bounded range, a convergent power series
//! near the singular end, and an integration-by-parts asymptotic series
//! at the far end, so a single evaluation costs a table lookup plus one
//! partial-cell quadrature rather than an adaptive-quadrature call.

use std::sync::OnceLock;

/// 5-point Gauss-Legendre abscissae on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_663_9,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_663_9,
];

/// Matching Gauss-Legendre weights.
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Integrates `f` over `[a, b]` with the fixed 5-point rule.
///
/// Exact for polynomials through degree 9. Cell widths are chosen so the
/// truncation error of every table below sits far under 1e-20.
pub(crate) fn gl5<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let rad = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..5 {
        acc += GL5_W[i] * f(mid + rad * GL5_X[i]);
    }
    acc * rad
}

/// Tail integral `int_x^inf sin(u) u^{-a} du` by repeated integration by
/// parts, valid for large `x` (callers stay at `x >= 79`).
///
/// Each level contributes `cos(x) x^{-a} + a sin(x) x^{-(a+1)}` against the
/// running sign/coefficient and leaves a remainder bounded by
/// `|coeff| x^{1-a}/(a-1)`; the loop stops once that bound is below 1e-17.
pub(crate) fn sin_tail_asymptotic(x: f64, a0: f64) -> f64 {
    debug_assert!(x >= 70.0, "asymptotic tail needs large x");
    let (sin_x, cos_x) = x.sin_cos();
    let mut total = 0.0;
    let mut coeff = 1.0_f64;
    let mut a = a0;
    loop {
        total += coeff * x.powf(-a) * (cos_x + a * sin_x / x);
        coeff *= -(a * (a + 1.0));
        a += 2.0;
        let remainder = coeff.abs() * x.powf(1.0 - a) / (a - 1.0);
        if remainder < 1e-17 || a > a0 + 30.0 {
            break;
        }
    }
    total
}

/// Number of terms of the singular power series kept below `TAIL_X_LO`.
const SERIES_TERMS: usize = 14;

const TAIL_X_LO: f64 = 2.5;
const TAIL_X_HI: f64 = 80.0;
const TAIL_CELLS: usize = 3_875;
const TAIL_H: f64 = (TAIL_X_HI - TAIL_X_LO) / TAIL_CELLS as f64;

fn tail_integrand(u: f64) -> f64 {
    u.sin() * u.powf(-2.5)
}

/// Cumulative table for `T(x) = int_x^inf sin(u) u^{-5/2} du` over all
/// `x > 0`.
///
/// Three regimes: the asymptotic series above `TAIL_X_HI`, stored nodal
/// values plus a partial-cell quadrature on `[TAIL_X_LO, TAIL_X_HI]`, and
/// `2 x^{-1/2} + c0 + series(x)` below, with `c0` anchored to the table so
/// the branches agree to machine precision.
pub(crate) struct OscTail {
    nodes: Vec<f64>,
    c0: f64,
    series_coeff: [f64; SERIES_TERMS],
}

impl OscTail {
    fn build() -> Self {
        // Coefficient of x^{(4j-1)/2} is 1/((2j+1)! (4j-1)/2), alternating
        // sign starting positive at j = 1.
        let mut series_coeff = [0.0_f64; SERIES_TERMS];
        let mut factorial = 1.0_f64;
        for (idx, slot) in series_coeff.iter_mut().enumerate() {
            let j = (idx + 1) as f64;
            factorial *= (2.0 * j) * (2.0 * j + 1.0);
            let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign / (factorial * (4.0 * j - 1.0) / 2.0);
        }

        let mut nodes = vec![0.0_f64; TAIL_CELLS + 1];
        nodes[TAIL_CELLS] = sin_tail_asymptotic(TAIL_X_HI, 2.5);
        // Backward compensated accumulation keeps the rounding error at the
        // small-x end near one ulp of the stored values.
        let mut sum = nodes[TAIL_CELLS];
        let mut comp = 0.0_f64;
        for i in (0..TAIL_CELLS).rev() {
            // Both endpoints come from the same rounding of `LO + j h` so
            // adjacent cells tile exactly; an `x0 + H` upper endpoint would
            // leave ulp-sized gaps that accumulate across the table.
            let x0 = TAIL_X_LO + i as f64 * TAIL_H;
            let x1 = TAIL_X_LO + (i + 1) as f64 * TAIL_H;
            let cell = gl5(tail_integrand, x0, x1);
            let y = cell - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            nodes[i] = sum;
        }

        let mut tail = OscTail {
            nodes,
            c0: 0.0,
            series_coeff,
        };
        tail.c0 = tail.nodes[0] - 2.0 / TAIL_X_LO.sqrt() - tail.series(TAIL_X_LO);
        tail
    }

    fn series(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut power = x * x.sqrt();
        let mut acc = 0.0;
        for c in self.series_coeff {
            acc += c * power;
            power *= x2;
        }
        acc
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        debug_assert!(x > 0.0);
        if x >= TAIL_X_HI {
            sin_tail_asymptotic(x, 2.5)
        } else if x >= TAIL_X_LO {
            let i = (((x - TAIL_X_LO) / TAIL_H) as usize).min(TAIL_CELLS - 1);
            let xi = TAIL_X_LO + i as f64 * TAIL_H;
            self.nodes[i] - gl5(tail_integrand, xi, x)
        } else {
            2.0 / x.sqrt() + self.c0 + self.series(x)
        }
    }
}

pub(crate) fn osc_tail() -> &'static OscTail {
    static TABLE: OnceLock<OscTail> = OnceLock::new();
    TABLE.get_or_init(OscTail::build)
}

/// `sqrt(pi/2)`, the full cosine Fresnel integral `int_0^inf cos(t)/sqrt(t) dt`.
const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;

const SQRT_SIN_V_CELLS: usize = 9_000;
const SQRT_SIN_V_H: f64 = 1.0e-3;
/// Table covers `s` up to 81; the asymptotic branch takes over at 80.5.
const SQRT_SIN_SPLIT: f64 = 80.5;

fn sqrt_sin_integrand(w: f64) -> f64 {
    2.0 * w * w * (w * w).sin()
}

/// Cumulative table for `P(s) = int_0^s sqrt(t) sin(t) dt`.
///
/// Stored in the substituted variable `v = sqrt(s)`, where the integrand
/// `2 v^2 sin(v^2)` is smooth through the origin. Beyond the split the
/// closed form `P(s) = -sqrt(s) cos(s) + (sqrt(pi/2) - U(s))/2` is used,
/// with `U(s) = -sin(s)/sqrt(s) + T_{3/2}(s)/2` served by the asymptotic
/// tail series.
pub(crate) struct SqrtSinTable {
    nodes: Vec<f64>,
}

impl SqrtSinTable {
    fn build() -> Self {
        let mut nodes = vec![0.0_f64; SQRT_SIN_V_CELLS + 1];
        let mut sum = 0.0_f64;
        let mut comp = 0.0_f64;
        for i in 0..SQRT_SIN_V_CELLS {
            // Matching endpoint formulas keep adjacent cells tiling exactly,
            // as in the tail table above.
            let v0 = i as f64 * SQRT_SIN_V_H;
            let v1 = (i + 1) as f64 * SQRT_SIN_V_H;
            let cell = gl5(sqrt_sin_integrand, v0, v1);
            let y = cell - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            nodes[i + 1] = sum;
        }
        SqrtSinTable { nodes }
    }

    pub(crate) fn value(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0);
        if s >= SQRT_SIN_SPLIT {
            let u = -s.sin() / s.sqrt() + 0.5 * sin_tail_asymptotic(s, 1.5);
            -s.sqrt() * s.cos() + 0.5 * (SQRT_HALF_PI - u)
        } else {
            let v = s.sqrt();
            let i = ((v / SQRT_SIN_V_H) as usize).min(SQRT_SIN_V_CELLS - 1);
            let vi = i as f64 * SQRT_SIN_V_H;
            self.nodes[i] + gl5(sqrt_sin_integrand, vi, v)
        }
    }
}

pub(crate) fn sqrt_sin_table() -> &'static SqrtSinTable {
    static TABLE: OnceLock<SqrtSinTable> = OnceLock::new();
    TABLE.get_or_init(SqrtSinTable::build)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl5_integrates_degree_nine_exactly() {
        let val = gl5(|x| x.powi(8), 0.0, 1.0);
        assert!((val - 1.0 / 9.0).abs() < 1e-15);
        let val = gl5(|x| 3.0 * x.powi(2) - x.powi(9), -1.0, 2.0);
        let exact = (8.0 + 1.0) - (1024.0 - 1.0) / 10.0;
        assert!((val - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn tail_branches_agree_at_their_seams() {
        let tail = osc_tail();
        // Series extension versus the table inside the table's range.
        for x in [2.5_f64, 2.6, 3.0] {
            let series = 2.0 / x.sqrt() + tail.c0 + tail.series(x);
            assert!(
                (series - tail.value(x)).abs() < 1e-13,
                "series/table mismatch at {x}"
            );
        }
        // Asymptotic form versus the table near the upper end.
        for x in [79.0_f64, 79.5, 79.97] {
            let asym = sin_tail_asymptotic(x, 2.5);
            assert!(
                (asym - tail.value(x)).abs() < 1e-13,
                "asymptotic/table mismatch at {x}"
            );
        }
    }

    #[test]
    fn tail_matches_direct_quadrature_midrange() {
        // Independent check: brute-force composite quadrature from x to
        // a far cutoff plus the asymptotic remainder there.
        let tail = osc_tail();
        for x in [0.7_f64, 1.0, 4.0, 10.0, 31.4] {
            let cutoff = 200.0;
            let mut acc = sin_tail_asymptotic(cutoff, 2.5);
            let cells = 40_000;
            let h = (cutoff - x) / cells as f64;
            for i in 0..cells {
                acc += gl5(tail_integrand, x + i as f64 * h, x + (i + 1) as f64 * h);
            }
            assert!(
                (acc - tail.value(x)).abs() < 1e-12,
                "tail mismatch at {x}: {} vs {}",
                acc,
                tail.value(x)
            );
        }
    }

    #[test]
    fn sqrt_sin_branches_agree_at_the_split() {
        let table = sqrt_sin_table();
        for s in [78.0_f64, 79.3, 80.4] {
            let v = s.sqrt();
            let i = ((v / SQRT_SIN_V_H) as usize).min(SQRT_SIN_V_CELLS - 1);
            let vi = i as f64 * SQRT_SIN_V_H;
            let tabled = table.nodes[i] + gl5(sqrt_sin_integrand, vi, v);
            let u = -s.sin() / s.sqrt() + 0.5 * sin_tail_asymptotic(s, 1.5);
            let closed = -s.sqrt() * s.cos() + 0.5 * (SQRT_HALF_PI - u);
            assert!(
                (tabled - closed).abs() < 1e-12,
                "split mismatch at {s}: {tabled} vs {closed}"
            );
        }
    }

    #[test]
    fn sqrt_sin_matches_small_closed_form() {
        // int_0^s sqrt(t) sin(t) dt for tiny s behaves as (2/5) s^{5/2},
        // with corrections -s^{9/2}/27 + s^{13/2}/780 (from the Taylor
        // series of sin); the next term is below 1e-20 at s = 0.01.
        let table = sqrt_sin_table();
        for s in [1e-4_f64, 1e-3, 1e-2] {
            let lead = 0.4 * s.powf(2.5) - s.powf(4.5) / 27.0 + s.powf(6.5) / 780.0;
            assert!(
                (table.value(s) - lead).abs() < 1e-12 * lead.max(1e-30) + 1e-18,
                "small-s mismatch at {s}"
            );
        }
    }
}
