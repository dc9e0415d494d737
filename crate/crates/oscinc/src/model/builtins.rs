//! The four built-in oscillating nonlinearities.
//!
//! `F0`/`Finf` are primitives of square-root densities with oscillation
//! accumulating at the origin respectively at infinity; both are C^1 with
//! a single-valued gradient. `G0`/`Ginf` switch a smooth amplitude on and
//! off through a `max{0, trig}` gate, so their gradients are genuine
//! intervals at the gate's kink points.

use super::GradInterval;
use crate::model::quad::{osc_tail, sqrt_sin_table};

/// Relative snap distance for detecting gate kinks. A point within this
/// relative distance of a kink abscissa gets the full interval hull.
pub(crate) const KINK_SNAP_REL: f64 = 1e-9;

/// Density `sqrt(t) (1/2 + sin(1/t))`, `t > 0`.
pub(crate) fn osc_origin_density(t: f64) -> f64 {
    t.sqrt() * (0.5 + (1.0 / t).sin())
}

/// Primitive `int_0^s` of the origin density.
///
/// Evaluated as `s^{3/2}/3 + T(1/s)` with `T` the cumulative oscillatory
/// tail; absolute accuracy is near machine precision for all `s > 0`.
pub(crate) fn osc_origin_primitive(s: f64) -> f64 {
    s * s.sqrt() / 3.0 + osc_tail().value(1.0 / s)
}

/// Bound on the derivative of the origin density over `[a, b]`, `a > 0`.
pub(crate) fn osc_origin_lipschitz(a: f64) -> f64 {
    0.75 / a.sqrt() + a.powf(-1.5)
}

/// Density `sqrt(t) (1/2 + sin(t))`, `t > 0`.
pub(crate) fn osc_infinity_density(t: f64) -> f64 {
    t.sqrt() * (0.5 + t.sin())
}

/// Primitive `int_0^s` of the infinity density.
pub(crate) fn osc_infinity_primitive(s: f64) -> f64 {
    s * s.sqrt() / 3.0 + sqrt_sin_table().value(s)
}

/// Bound on the derivative of the infinity density over `[a, b]`.
pub(crate) fn osc_infinity_lipschitz(a: f64, b: f64) -> f64 {
    0.75 / a.sqrt() + b.sqrt()
}

/// Gate value `ln(1 + s^{p+2}) max{0, cos(1/s)}`, `s > 0`.
pub(crate) fn gate_origin_value(s: f64, p: f64) -> f64 {
    let c = (1.0 / s).cos();
    if c <= 0.0 {
        0.0
    } else {
        s.powf(p + 2.0).ln_1p() * c
    }
}

/// Smooth branch derivative of the origin gate, extended across the
/// switched-off region. Equals the true derivative wherever the gate is
/// on, and the one-sided branch limit at each kink.
pub(crate) fn gate_origin_branch(s: f64, p: f64) -> f64 {
    let q = p + 2.0;
    let sq = s.powf(q);
    let amp = sq.ln_1p();
    let amp_deriv = q * s.powf(q - 1.0) / (1.0 + sq);
    let inv = 1.0 / s;
    amp_deriv * inv.cos() + amp * inv.sin() / (s * s)
}

/// Index of the nearest gate kink for the origin gate, if the point snaps
/// to one. Kinks sit where `cos(1/s)` changes sign: `1/s = pi/2 + k pi`.
fn gate_origin_kink(s: f64) -> Option<i64> {
    let phase = 1.0 / s;
    let k = (phase / std::f64::consts::PI - 0.5).round();
    if k < 0.0 {
        return None;
    }
    let kink_phase = (k + 0.5) * std::f64::consts::PI;
    if (phase - kink_phase).abs() <= KINK_SNAP_REL * phase.max(1.0) {
        Some(k as i64)
    } else {
        None
    }
}

/// Gradient interval of the origin gate at `s > 0`.
pub(crate) fn gate_origin_grad(s: f64, p: f64) -> GradInterval {
    if let Some(k) = gate_origin_kink(s) {
        // cos term vanishes at the kink; the surviving branch limit is
        // ln(1+s^q) sin(1/s) / s^2 with sin(pi/2 + k pi) = (-1)^k.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let limit = s.powf(p + 2.0).ln_1p() * sign / (s * s);
        return GradInterval::hull_with_zero(limit);
    }
    if (1.0 / s).cos() > 0.0 {
        GradInterval::point(gate_origin_branch(s, p))
    } else {
        GradInterval::point(0.0)
    }
}

/// Continuous outer bounds for the origin gate's gradient.
///
/// `max(0, branch)` and `min(0, branch)` dominate the true upper and lower
/// gradient everywhere, agree with it on the active branch and at kinks,
/// and stay Lipschitz where the true upper bound jumps.
pub(crate) fn gate_origin_envelopes(s: f64, p: f64) -> (f64, f64) {
    let g = gate_origin_branch(s, p);
    (g.min(0.0), g.max(0.0))
}

/// Origin-gate kinks inside `[a, b]`, ascending, at most `cap` of them
/// (keeping the largest abscissae, which dominate gradient magnitude).
pub(crate) fn gate_origin_kinks(a: f64, b: f64, cap: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if a <= 0.0 || b <= a {
        return out;
    }
    let pi = std::f64::consts::PI;
    let mut k = ((1.0 / b) / pi - 0.5).ceil().max(0.0);
    loop {
        let s = 1.0 / ((k + 0.5) * pi);
        if s < a || out.len() >= cap {
            break;
        }
        if s <= b {
            out.push(s);
        }
        k += 1.0;
    }
    out.reverse();
    out
}

/// Bound on the derivative of the origin gate's branch over `[a, b]`.
pub(crate) fn gate_origin_lipschitz(a: f64, b: f64, p: f64) -> f64 {
    let q = p + 2.0;
    let amp_max = b.powf(q).ln_1p();
    let amp_deriv_max = q * b.powf(q - 1.0);
    let amp_dd_max = q * (q - 1.0) * b.powf(q - 2.0) + q * q * b.powf(2.0 * q - 2.0);
    amp_dd_max + 2.0 * amp_deriv_max / (a * a) + amp_max * (a.powf(-4.0) + 2.0 * a.powf(-3.0))
}

/// Gate value `s^p max{0, sin s}`, `s > 0`.
pub(crate) fn gate_infinity_value(s: f64, p: f64) -> f64 {
    let si = s.sin();
    if si <= 0.0 {
        0.0
    } else {
        s.powf(p) * si
    }
}

/// Smooth branch derivative of the infinity gate.
pub(crate) fn gate_infinity_branch(s: f64, p: f64) -> f64 {
    p * s.powf(p - 1.0) * s.sin() + s.powf(p) * s.cos()
}

fn gate_infinity_kink(s: f64) -> Option<i64> {
    let pi = std::f64::consts::PI;
    let k = (s / pi).round();
    if k < 1.0 {
        return None;
    }
    if (s - k * pi).abs() <= KINK_SNAP_REL * s.max(1.0) {
        Some(k as i64)
    } else {
        None
    }
}

/// Gradient interval of the infinity gate at `s > 0`.
pub(crate) fn gate_infinity_grad(s: f64, p: f64) -> GradInterval {
    if let Some(k) = gate_infinity_kink(s) {
        // sin term vanishes at the kink; the branch limit is s^p cos(k pi).
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        return GradInterval::hull_with_zero(s.powf(p) * sign);
    }
    if s.sin() > 0.0 {
        GradInterval::point(gate_infinity_branch(s, p))
    } else {
        GradInterval::point(0.0)
    }
}

/// Continuous outer bounds for the infinity gate's gradient.
pub(crate) fn gate_infinity_envelopes(s: f64, p: f64) -> (f64, f64) {
    let g = gate_infinity_branch(s, p);
    (g.min(0.0), g.max(0.0))
}

/// Infinity-gate kinks inside `[a, b]`, ascending, at most `cap`.
pub(crate) fn gate_infinity_kinks(a: f64, b: f64, cap: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if b <= a {
        return out;
    }
    let pi = std::f64::consts::PI;
    let mut k = (a / pi).ceil().max(1.0);
    while k * pi <= b && out.len() < cap {
        if k * pi >= a {
            out.push(k * pi);
        }
        k += 1.0;
    }
    out
}

/// Bound on the derivative of the infinity gate's branch over `[a, b]`.
pub(crate) fn gate_infinity_lipschitz(a: f64, b: f64, p: f64) -> f64 {
    let endpoint_max = |e: f64| a.powf(e).max(b.powf(e));
    p * (p - 1.0).abs() * endpoint_max(p - 2.0) + 2.0 * p * endpoint_max(p - 1.0) + endpoint_max(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 60-digit arithmetic and exhaustive
    // oscillation-aware quadrature, frozen here verbatim.
    const ORIGIN_PRIMITIVE_REF: &[(f64, f64)] = &[
        (0.01, 0.0003418226026132628275),
        (0.05, 0.0040116691502815173997),
        (0.25, 0.017822499977947328472),
        (0.5, 0.14987938279783438045),
        (1.0, 0.77101368587113323085),
        (2.0, 2.1392247066537804528),
        (5.0, 6.5377599677848971668),
        (10.0, 15.19790822684613621),
        (0.2122, 0.025253245899152684081),
    ];

    const INFINITY_PRIMITIVE_REF: &[(f64, f64)] = &[
        (0.25, 0.054094485026138989342),
        (1.0, 0.69755526536546569741),
        (2.0, 2.4754540586129487823),
        (5.0, 3.5041513645991604769),
        (10.0, 13.741955785029382576),
        (20.0, 28.716650942526929775),
        (3.6652, 4.5240749300342840387),
    ];

    #[test]
    fn origin_primitive_matches_reference_values() {
        for &(s, want) in ORIGIN_PRIMITIVE_REF {
            let got = osc_origin_primitive(s);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "origin primitive at {s}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn infinity_primitive_matches_reference_values() {
        for &(s, want) in INFINITY_PRIMITIVE_REF {
            let got = osc_infinity_primitive(s);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "infinity primitive at {s}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn origin_gate_matches_reference_values() {
        // cos(2) < 0, so the gate is off at s = 0.5 for any p.
        assert_eq!(gate_origin_value(0.5, 2.0), 0.0);
        let grad = gate_origin_grad(0.18, 2.0);
        let want = -0.004136001193582673988;
        assert_eq!(grad.lo, grad.hi);
        assert!(
            (grad.lo - want).abs() <= 1e-12 * want.abs(),
            "origin gate gradient at 0.18: got {}, want {want}",
            grad.lo
        );
    }

    #[test]
    fn infinity_gate_kink_hull_at_pi() {
        let pi = std::f64::consts::PI;
        let grad = gate_infinity_grad(pi, 2.0);
        assert!((grad.lo + pi * pi).abs() < 1e-9);
        assert_eq!(grad.hi, 0.0);
        // Just off the kink the gradient collapses to a point again.
        let off = gate_infinity_grad(pi + 1e-4, 2.0);
        assert_eq!(off.lo, off.hi);
    }

    #[test]
    fn origin_gate_kink_hull_contains_branch_limits() {
        // First few kinks of cos(1/s): s = 1/((k + 1/2) pi).
        let pi = std::f64::consts::PI;
        for k in 0..6 {
            let s = 1.0 / ((k as f64 + 0.5) * pi);
            let grad = gate_origin_grad(s, 2.0);
            assert!(grad.lo <= 0.0 && grad.hi >= 0.0, "kink hull misses zero at {s}");
            assert!(grad.hi - grad.lo > 0.0, "kink not detected at {s}");
        }
    }

    #[test]
    fn gate_kink_enumeration_is_ascending_and_complete() {
        let pi = std::f64::consts::PI;
        let kinks = gate_infinity_kinks(1.0, 20.0, 64);
        let expect: Vec<f64> = (1..=6).map(|k| k as f64 * pi).collect();
        assert_eq!(kinks.len(), expect.len());
        for (a, b) in kinks.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }

        let kinks = gate_origin_kinks(0.05, 0.7, 64);
        assert!(kinks.windows(2).all(|w| w[0] < w[1]));
        for s in &kinks {
            let phase = 1.0 / s;
            let k = (phase / pi - 0.5).round();
            assert!((phase - (k + 0.5) * pi).abs() < 1e-9);
        }
        // Largest kink below 0.7 is 1/(pi/2) ~ 0.6366, inside the window.
        assert!((kinks.last().unwrap() - 2.0 / pi).abs() < 1e-12);
    }

    #[test]
    fn envelopes_dominate_sampled_gradients() {
        for i in 1..2000 {
            let s = i as f64 * 5e-4 + 1e-4;
            let g = gate_origin_grad(s, 2.0);
            let (lo, hi) = gate_origin_envelopes(s, 2.0);
            assert!(lo <= g.lo + 1e-14 && g.hi <= hi + 1e-14, "origin envelope fails at {s}");
            let s2 = s * 30.0;
            let g = gate_infinity_grad(s2, 2.0);
            let (lo, hi) = gate_infinity_envelopes(s2, 2.0);
            assert!(lo <= g.lo + 1e-12 && g.hi <= hi + 1e-12, "infinity envelope fails at {s2}");
        }
    }

    #[test]
    fn lipschitz_bounds_dominate_observed_slopes() {
        let a = 0.11;
        let b = 0.9;
        let bound = gate_origin_lipschitz(a, b, 2.0);
        let mut worst: f64 = 0.0;
        let n = 40_000;
        let h = (b - a) / n as f64;
        for i in 0..n {
            let s0 = a + i as f64 * h;
            let d = (gate_origin_branch(s0 + h, 2.0) - gate_origin_branch(s0, 2.0)) / h;
            worst = worst.max(d.abs());
        }
        assert!(worst <= bound, "origin gate slope {worst} exceeds bound {bound}");

        let bound = osc_origin_lipschitz(a);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s0 = a + i as f64 * h;
            let d = (osc_origin_density(s0 + h) - osc_origin_density(s0)) / h;
            worst = worst.max(d.abs());
        }
        assert!(worst <= bound, "origin density slope {worst} exceeds bound {bound}");
    }
}
