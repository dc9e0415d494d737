//! Function models with interval-valued gradients.
//!
//! A model represents a scalar potential on the real line, extended by
//! zero over the negatives, whose gradient at a point is a closed interval
//! (a point interval wherever the function is differentiable). Models are
//! immutable trees: built-in nonlinearities at the leaves, sums, scalings,
//! quadratic shifts, and level truncations above them. All gradient
//! arithmetic on composite nodes is exact interval arithmetic, so tests
//! can compare composite gradients bit-for-bit against hand-built ones.

mod builtins;
mod quad;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::Error;

/// Closed interval of subgradient values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradInterval {
    pub lo: f64,
    pub hi: f64,
}

impl GradInterval {
    /// Degenerate interval holding a single value.
    pub fn point(v: f64) -> Self {
        GradInterval { lo: v, hi: v }
    }

    /// Interval from unordered endpoints.
    pub fn new(a: f64, b: f64) -> Self {
        if a <= b {
            GradInterval { lo: a, hi: b }
        } else {
            GradInterval { lo: b, hi: a }
        }
    }

    /// Convex hull of `{0, v}`.
    pub fn hull_with_zero(v: f64) -> Self {
        GradInterval::new(0.0f64.min(v), 0.0f64.max(v))
    }

    /// Minkowski sum.
    pub fn add(self, other: Self) -> Self {
        GradInterval {
            lo: self.lo + other.lo,
            hi: self.hi + other.hi,
        }
    }

    /// Scalar multiple; a negative factor swaps the endpoints.
    pub fn scale(self, factor: f64) -> Self {
        GradInterval::new(factor * self.lo, factor * self.hi)
    }

    /// Translation of both endpoints.
    pub fn shift(self, t: f64) -> Self {
        GradInterval {
            lo: self.lo + t,
            hi: self.hi + t,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the interval, zero inside.
    pub fn distance_to(self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Largest absolute value attained over the interval.
    pub fn magnitude(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug)]
enum Node {
    Zero,
    Linear { slope: f64 },
    OscOrigin,
    OscInfinity,
    GateOrigin { p: f64 },
    GateInfinity { p: f64 },
    Sum(Vec<FunctionModel>),
    Scale { factor: f64, inner: FunctionModel },
    AddQuadratic { coeff: f64, inner: FunctionModel },
    Truncate { eta: f64, inner: FunctionModel },
}

/// Immutable, cheaply clonable potential model.
#[derive(Clone, Debug)]
pub struct FunctionModel {
    node: Arc<Node>,
}

fn require_finite(name: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("{name} must be finite, got {v}")))
    }
}

impl FunctionModel {
    fn from_node(node: Node) -> Self {
        FunctionModel { node: Arc::new(node) }
    }

    /// Identically zero potential.
    pub fn zero() -> Self {
        Self::from_node(Node::Zero)
    }

    /// Potential `slope * s` on the positive axis.
    pub fn linear(slope: f64) -> Result<Self, Error> {
        Ok(Self::from_node(Node::Linear {
            slope: require_finite("linear slope", slope)?,
        }))
    }

    /// Built-in `F0`: primitive of `sqrt(t) (1/2 + sin(1/t))`, whose
    /// gradient-to-line ratio oscillates without settling near the origin.
    pub fn osc_origin() -> Self {
        Self::from_node(Node::OscOrigin)
    }

    /// Built-in `Finf`: primitive of `sqrt(t) (1/2 + sin t)`, oscillating
    /// at infinity.
    pub fn osc_infinity() -> Self {
        Self::from_node(Node::OscInfinity)
    }

    /// Built-in `G0`: `ln(1 + s^{p+2}) max{0, cos(1/s)}`; the gate kinks
    /// accumulate at the origin.
    pub fn gate_origin(p: f64) -> Result<Self, Error> {
        let p = require_finite("gate exponent p", p)?;
        if p <= 0.0 {
            return Err(Error::Config(format!("gate exponent p must be positive, got {p}")));
        }
        Ok(Self::from_node(Node::GateOrigin { p }))
    }

    /// Built-in `Ginf`: `s^p max{0, sin s}`; the gate kinks march out to
    /// infinity.
    pub fn gate_infinity(p: f64) -> Result<Self, Error> {
        let p = require_finite("gate exponent p", p)?;
        if p <= 0.0 {
            return Err(Error::Config(format!("gate exponent p must be positive, got {p}")));
        }
        Ok(Self::from_node(Node::GateInfinity { p }))
    }

    /// Pointwise sum of the given models.
    pub fn sum(terms: Vec<FunctionModel>) -> Self {
        match terms.len() {
            0 => Self::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Self::from_node(Node::Sum(terms)),
        }
    }

    /// Scalar multiple of a model.
    pub fn scale(factor: f64, inner: FunctionModel) -> Result<Self, Error> {
        Ok(Self::from_node(Node::Scale {
            factor: require_finite("scale factor", factor)?,
            inner,
        }))
    }

    /// Adds `coeff/2 * s^2` on the positive axis.
    pub fn add_quadratic(coeff: f64, inner: FunctionModel) -> Result<Self, Error> {
        Ok(Self::from_node(Node::AddQuadratic {
            coeff: require_finite("quadratic coefficient", coeff)?,
            inner,
        }))
    }

    /// Freezes the potential at its level-`eta` value: `s > eta` evaluates
    /// as `eta`. The gradient above `eta` is zero; at `eta` it is the hull
    /// of zero and the inner gradient.
    pub fn truncate(eta: f64, inner: FunctionModel) -> Result<Self, Error> {
        let eta = require_finite("truncation level", eta)?;
        if eta <= 0.0 {
            return Err(Error::Config(format!("truncation level must be positive, got {eta}")));
        }
        Ok(Self::from_node(Node::Truncate { eta, inner }))
    }

    /// Potential value, zero for `s <= 0`.
    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            self.value_pos(s)
        }
    }

    fn value_pos(&self, s: f64) -> f64 {
        match &*self.node {
            Node::Zero => 0.0,
            Node::Linear { slope } => slope * s,
            Node::OscOrigin => builtins::osc_origin_primitive(s),
            Node::OscInfinity => builtins::osc_infinity_primitive(s),
            Node::GateOrigin { p } => builtins::gate_origin_value(s, *p),
            Node::GateInfinity { p } => builtins::gate_infinity_value(s, *p),
            Node::Sum(terms) => terms.iter().map(|t| t.value_pos(s)).sum(),
            Node::Scale { factor, inner } => factor * inner.value_pos(s),
            Node::AddQuadratic { coeff, inner } => inner.value_pos(s) + 0.5 * coeff * s * s,
            Node::Truncate { eta, inner } => inner.value_pos(s.min(*eta)),
        }
    }

    /// Gradient interval. Exactly `[0, 0]` for `s < 0`; at `s = 0` the
    /// hull of zero and the one-sided limit from the right.
    pub fn grad(&self, s: f64) -> GradInterval {
        if s < 0.0 {
            GradInterval::point(0.0)
        } else if s == 0.0 {
            let r = self.right_limit_at_zero();
            GradInterval::new(r.lo.min(0.0), r.hi.max(0.0))
        } else {
            self.grad_pos(s)
        }
    }

    fn right_limit_at_zero(&self) -> GradInterval {
        match &*self.node {
            Node::Zero => GradInterval::point(0.0),
            Node::Linear { slope } => GradInterval::point(*slope),
            // All four built-ins have gradients vanishing as s -> 0+.
            Node::OscOrigin | Node::OscInfinity => GradInterval::point(0.0),
            Node::GateOrigin { .. } | Node::GateInfinity { .. } => GradInterval::point(0.0),
            Node::Sum(terms) => terms
                .iter()
                .map(|t| t.right_limit_at_zero())
                .fold(GradInterval::point(0.0), GradInterval::add),
            Node::Scale { factor, inner } => inner.right_limit_at_zero().scale(*factor),
            Node::AddQuadratic { inner, .. } => inner.right_limit_at_zero(),
            Node::Truncate { inner, .. } => inner.right_limit_at_zero(),
        }
    }

    fn grad_pos(&self, s: f64) -> GradInterval {
        match &*self.node {
            Node::Zero => GradInterval::point(0.0),
            Node::Linear { slope } => GradInterval::point(*slope),
            Node::OscOrigin => GradInterval::point(builtins::osc_origin_density(s)),
            Node::OscInfinity => GradInterval::point(builtins::osc_infinity_density(s)),
            Node::GateOrigin { p } => builtins::gate_origin_grad(s, *p),
            Node::GateInfinity { p } => builtins::gate_infinity_grad(s, *p),
            Node::Sum(terms) => terms
                .iter()
                .map(|t| t.grad_pos(s))
                .fold(GradInterval::point(0.0), GradInterval::add),
            Node::Scale { factor, inner } => inner.grad_pos(s).scale(*factor),
            Node::AddQuadratic { coeff, inner } => inner.grad_pos(s).shift(coeff * s),
            Node::Truncate { eta, inner } => {
                if s < *eta {
                    inner.grad_pos(s)
                } else if s > *eta {
                    GradInterval::point(0.0)
                } else {
                    let g = inner.grad_pos(*eta);
                    GradInterval::new(g.lo.min(0.0), g.hi.max(0.0))
                }
            }
        }
    }

    /// Continuous outer bounds `(lower, upper)` on the gradient interval
    /// at `s > 0`.
    ///
    /// The bounds dominate the true interval everywhere and are Lipschitz
    /// away from truncation levels, which makes them certifiable by
    /// finite sampling where the true upper gradient jumps at gate kinks.
    pub fn grad_envelopes(&self, s: f64) -> (f64, f64) {
        debug_assert!(s > 0.0);
        match &*self.node {
            Node::Zero => (0.0, 0.0),
            Node::Linear { slope } => (*slope, *slope),
            Node::OscOrigin => {
                let d = builtins::osc_origin_density(s);
                (d, d)
            }
            Node::OscInfinity => {
                let d = builtins::osc_infinity_density(s);
                (d, d)
            }
            Node::GateOrigin { p } => builtins::gate_origin_envelopes(s, *p),
            Node::GateInfinity { p } => builtins::gate_infinity_envelopes(s, *p),
            Node::Sum(terms) => terms.iter().fold((0.0, 0.0), |(lo, hi), t| {
                let (l, h) = t.grad_envelopes(s);
                (lo + l, hi + h)
            }),
            Node::Scale { factor, inner } => {
                let (lo, hi) = inner.grad_envelopes(s);
                if *factor >= 0.0 {
                    (factor * lo, factor * hi)
                } else {
                    (factor * hi, factor * lo)
                }
            }
            Node::AddQuadratic { coeff, inner } => {
                let (lo, hi) = inner.grad_envelopes(s);
                (lo + coeff * s, hi + coeff * s)
            }
            Node::Truncate { eta, inner } => {
                if s < *eta {
                    inner.grad_envelopes(s)
                } else {
                    let (lo, hi) = inner.grad_envelopes(*eta);
                    (lo.min(0.0), hi.max(0.0))
                }
            }
        }
    }

    /// Lipschitz bound for the gradient envelopes over `[a, b]`,
    /// `0 < a <= b`, when one is available.
    ///
    /// `None` means the envelopes may jump inside the window (a truncation
    /// level is reached); callers must then subdivide or fall back to
    /// sampled slope estimates.
    pub fn grad_lipschitz_hint(&self, a: f64, b: f64) -> Option<f64> {
        debug_assert!(0.0 < a && a <= b);
        match &*self.node {
            Node::Zero | Node::Linear { .. } => Some(0.0),
            Node::OscOrigin => Some(builtins::osc_origin_lipschitz(a)),
            Node::OscInfinity => Some(builtins::osc_infinity_lipschitz(a, b)),
            Node::GateOrigin { p } => Some(builtins::gate_origin_lipschitz(a, b, *p)),
            Node::GateInfinity { p } => Some(builtins::gate_infinity_lipschitz(a, b, *p)),
            Node::Sum(terms) => {
                let mut total = 0.0;
                for t in terms {
                    total += t.grad_lipschitz_hint(a, b)?;
                }
                Some(total)
            }
            Node::Scale { factor, inner } => {
                Some(inner.grad_lipschitz_hint(a, b)? * factor.abs())
            }
            Node::AddQuadratic { coeff, inner } => {
                Some(inner.grad_lipschitz_hint(a, b)? + coeff.abs())
            }
            Node::Truncate { eta, inner } => {
                if b < *eta {
                    inner.grad_lipschitz_hint(a, b)
                } else {
                    None
                }
            }
        }
    }

    /// Points in `[a, b]` where the gradient is a nondegenerate interval,
    /// ascending, at most `cap` of them.
    pub fn breakpoints_in(&self, a: f64, b: f64, cap: usize) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(a, b, cap, &mut out);
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * x.abs().max(1.0));
        out.truncate(cap);
        out
    }

    fn collect_breakpoints(&self, a: f64, b: f64, cap: usize, out: &mut Vec<f64>) {
        if out.len() >= cap.saturating_mul(4) {
            return;
        }
        match &*self.node {
            Node::Zero | Node::Linear { .. } | Node::OscOrigin | Node::OscInfinity => {}
            Node::GateOrigin { .. } => out.extend(builtins::gate_origin_kinks(a, b, cap)),
            Node::GateInfinity { .. } => out.extend(builtins::gate_infinity_kinks(a, b, cap)),
            Node::Sum(terms) => {
                for t in terms {
                    t.collect_breakpoints(a, b, cap, out);
                }
            }
            Node::Scale { inner, .. } | Node::AddQuadratic { inner, .. } => {
                inner.collect_breakpoints(a, b, cap, out)
            }
            Node::Truncate { eta, inner } => {
                inner.collect_breakpoints(a, b.min(*eta), cap, out);
                if a <= *eta && *eta <= b {
                    out.push(*eta);
                }
            }
        }
    }

    /// Compact textual form for reports, e.g.
    /// `add_quadratic(0.3, sum(F0, scale(0.5, G0(p=2))))`.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        self.write_summary(&mut s);
        s
    }

    fn write_summary(&self, out: &mut String) {
        match &*self.node {
            Node::Zero => out.push_str("zero"),
            Node::Linear { slope } => {
                let _ = write!(out, "linear({slope})");
            }
            Node::OscOrigin => out.push_str("F0"),
            Node::OscInfinity => out.push_str("Finf"),
            Node::GateOrigin { p } => {
                let _ = write!(out, "G0(p={p})");
            }
            Node::GateInfinity { p } => {
                let _ = write!(out, "Ginf(p={p})");
            }
            Node::Sum(terms) => {
                out.push_str("sum(");
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    t.write_summary(out);
                }
                out.push(')');
            }
            Node::Scale { factor, inner } => {
                let _ = write!(out, "scale({factor}, ");
                inner.write_summary(out);
                out.push(')');
            }
            Node::AddQuadratic { coeff, inner } => {
                let _ = write!(out, "add_quadratic({coeff}, ");
                inner.write_summary(out);
                out.push(')');
            }
            Node::Truncate { eta, inner } => {
                let _ = write!(out, "truncate({eta}, ");
                inner.write_summary(out);
                out.push(')');
            }
        }
    }
}

/// Outcome of randomized mean-value containment checks.
#[derive(Clone, Debug)]
pub struct LebourgReport {
    pub pairs: usize,
    pub failures: usize,
    /// Largest distance from a difference quotient to the sampled
    /// gradient hull, over all pairs (0 when every quotient landed inside).
    pub worst_violation: f64,
    pub worst_pair: (f64, f64),
}

/// Deterministic generator for the randomized checks; keeps the library
/// free of a runtime RNG dependency.
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Samples `pairs` random pairs in `[lo, hi]` and checks that each
/// difference quotient of the potential lies in the sampled gradient hull
/// over the pair's interval, padded by the observed sample-to-sample
/// gradient variation.
pub fn lebourg_check(
    model: &FunctionModel,
    lo: f64,
    hi: f64,
    pairs: usize,
    seed: u64,
) -> LebourgReport {
    assert!(lo < hi && lo >= 0.0, "lebourg window must be ordered and nonnegative");
    let mut rng = SplitMix64::new(seed);
    let span = hi - lo;
    let min_sep = 1e-4 * span;
    let mut failures = 0usize;
    let mut worst_violation = 0.0f64;
    let mut worst_pair = (lo, hi);

    for _ in 0..pairs {
        let (x, y) = loop {
            let a = lo + span * rng.next_f64();
            let b = lo + span * rng.next_f64();
            if (a - b).abs() >= min_sep {
                break (a.min(b), a.max(b));
            }
        };
        let slope = (model.value(y) - model.value(x)) / (y - x);

        const UNIFORM: usize = 48;
        let mut samples: Vec<f64> = (0..UNIFORM)
            .map(|i| x + (y - x) * i as f64 / (UNIFORM - 1) as f64)
            .collect();
        samples.extend(model.breakpoints_in(x, y, 160));
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut hull_lo = f64::INFINITY;
        let mut hull_hi = f64::NEG_INFINITY;
        let mut max_jump = 0.0f64;
        let mut prev: Option<GradInterval> = None;
        for &s in &samples {
            let g = model.grad(s);
            hull_lo = hull_lo.min(g.lo);
            hull_hi = hull_hi.max(g.hi);
            if let Some(pg) = prev {
                max_jump = max_jump
                    .max((g.lo - pg.lo).abs())
                    .max((g.hi - pg.hi).abs());
            }
            prev = Some(g);
        }

        let tol = max_jump + 1e-9 * (1.0 + slope.abs());
        let violation = (hull_lo - slope).max(slope - hull_hi).max(0.0);
        if violation > tol {
            failures += 1;
        }
        if violation > worst_violation {
            worst_violation = violation;
            worst_pair = (x, y);
        }
    }

    LebourgReport {
        pairs,
        failures,
        worst_violation,
        worst_pair,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin_set() -> Vec<FunctionModel> {
        vec![
            FunctionModel::osc_origin(),
            FunctionModel::osc_infinity(),
            FunctionModel::gate_origin(2.0).unwrap(),
            FunctionModel::gate_infinity(2.0).unwrap(),
        ]
    }

    #[test]
    fn zero_extension_is_identically_zero_on_the_negatives() {
        for m in builtin_set() {
            for i in 1..=40 {
                let s = -(i as f64) * 0.37;
                assert_eq!(m.value(s), 0.0);
                assert_eq!(m.grad(s), GradInterval::point(0.0));
            }
            assert_eq!(m.value(0.0), 0.0);
            assert_eq!(m.grad(0.0), GradInterval::point(0.0));
        }
    }

    #[test]
    fn grad_at_zero_hulls_the_right_limit() {
        let m = FunctionModel::linear(3.0).unwrap();
        assert_eq!(m.grad(0.0), GradInterval { lo: 0.0, hi: 3.0 });
        let m = FunctionModel::linear(-2.0).unwrap();
        assert_eq!(m.grad(0.0), GradInterval { lo: -2.0, hi: 0.0 });
    }

    #[test]
    fn composite_gradients_are_exact_interval_arithmetic() {
        let f = FunctionModel::osc_origin();
        let g = FunctionModel::gate_origin(1.5).unwrap();
        let sum = FunctionModel::sum(vec![f.clone(), g.clone()]);
        let scaled = FunctionModel::scale(-0.75, g.clone()).unwrap();
        let shifted = FunctionModel::add_quadratic(0.3, f.clone()).unwrap();

        for i in 1..400 {
            let s = i as f64 * 0.002 + 1e-4;
            let gf = f.grad(s);
            let gg = g.grad(s);
            assert_eq!(sum.grad(s), gf.add(gg));
            assert_eq!(scaled.grad(s), gg.scale(-0.75));
            assert_eq!(shifted.grad(s), gf.shift(0.3 * s));
        }
    }

    #[test]
    fn truncation_gradient_cases() {
        let inner = FunctionModel::linear(2.0).unwrap();
        let t = FunctionModel::truncate(0.5, inner.clone()).unwrap();
        assert_eq!(t.grad(0.25), GradInterval::point(2.0));
        assert_eq!(t.grad(0.75), GradInterval::point(0.0));
        // At the level, the hull of zero and the inner gradient.
        assert_eq!(t.grad(0.5), GradInterval { lo: 0.0, hi: 2.0 });

        let neg = FunctionModel::scale(-1.0, inner).unwrap();
        let t = FunctionModel::truncate(0.5, neg).unwrap();
        assert_eq!(t.grad(0.5), GradInterval { lo: -2.0, hi: 0.0 });
    }

    #[test]
    fn truncation_is_idempotent_pointwise() {
        let base = FunctionModel::sum(vec![
            FunctionModel::osc_origin(),
            FunctionModel::gate_origin(2.0).unwrap(),
        ]);
        let a = FunctionModel::truncate(
            0.3,
            FunctionModel::truncate(0.7, base.clone()).unwrap(),
        )
        .unwrap();
        let b = FunctionModel::truncate(
            0.7,
            FunctionModel::truncate(0.3, base.clone()).unwrap(),
        )
        .unwrap();
        let c = FunctionModel::truncate(0.3, base).unwrap();
        for i in 0..1000 {
            let s = i as f64 * 0.001 + 5e-4;
            assert_eq!(a.value(s), c.value(s));
            assert_eq!(b.value(s), c.value(s));
        }
    }

    #[test]
    fn envelopes_contain_gradients_for_composites() {
        let model = FunctionModel::add_quadratic(
            0.4,
            FunctionModel::sum(vec![
                FunctionModel::osc_origin(),
                FunctionModel::scale(0.5, FunctionModel::gate_origin(2.0).unwrap()).unwrap(),
            ]),
        )
        .unwrap();
        for i in 1..3000 {
            let s = i as f64 * 3e-4;
            let g = model.grad(s);
            let (lo, hi) = model.grad_envelopes(s);
            assert!(lo <= g.lo + 1e-12 && g.hi <= hi + 1e-12, "envelope fails at {s}");
        }
    }

    #[test]
    fn lipschitz_hint_denied_across_truncation() {
        let t = FunctionModel::truncate(0.5, FunctionModel::osc_origin()).unwrap();
        assert!(t.grad_lipschitz_hint(0.1, 0.4).is_some());
        assert!(t.grad_lipschitz_hint(0.1, 0.5).is_none());
        assert!(t.grad_lipschitz_hint(0.6, 0.9).is_none());
    }

    #[test]
    fn breakpoints_merge_across_composites() {
        let model = FunctionModel::sum(vec![
            FunctionModel::gate_infinity(2.0).unwrap(),
            FunctionModel::truncate(5.0, FunctionModel::osc_origin()).unwrap(),
        ]);
        let pts = model.breakpoints_in(3.0, 7.0, 32);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        let pi = std::f64::consts::PI;
        assert!(pts.iter().any(|&s| (s - pi).abs() < 1e-12 || (s - 2.0 * pi).abs() < 1e-12));
        assert!(pts.iter().any(|&s| s == 5.0));
    }

    #[test]
    fn lebourg_passes_on_the_builtins() {
        for m in builtin_set() {
            let report = lebourg_check(&m, 0.0, 10.0, 200, 7);
            assert_eq!(
                report.failures, 0,
                "mean-value containment failed on {} at {:?}",
                m.summary(),
                report.worst_pair
            );
        }
    }
}
