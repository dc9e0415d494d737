//! Limit-ratio estimation and certified stability intervals.
//!
//! A stability interval `[delta, eta]` is a slab where the upper gradient
//! envelope of the potential stays at or below a negative margin. The
//! certificate is finite: samples at spacing `h = margin/(2 Lambda)` with
//! `Lambda` a Lipschitz bound for the envelope, so the sampled maximum
//! plus `Lambda h` bounds the true maximum. Everything downstream (ball
//! localization, clipping, threshold caps) leans on these slabs.

use crate::error::Error;
use crate::model::FunctionModel;

/// Which end of the axis the oscillation accumulates at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Origin,
    Infinity,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Origin => "origin",
            Regime::Infinity => "infinity",
        }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        match text {
            "origin" => Ok(Regime::Origin),
            "infinity" => Ok(Regime::Infinity),
            other => Err(Error::Config(format!(
                "unknown regime {other:?} (expected origin or infinity)"
            ))),
        }
    }
}

/// Geometric sampling grid for the limit estimates.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// First abscissa; the grid walks from here toward 0 or infinity.
    pub start: f64,
    pub decades: usize,
    pub per_decade: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            start: 1.0,
            decades: 6,
            per_decade: 400,
        }
    }
}

/// Finite-grid estimates of the asymptotic ratios, with divergence flags.
///
/// Estimates are raw window extrema, never clamped; `*_divergent` marks a
/// ratio that either crossed the 1e6 floor or kept deepening geometrically
/// across the sampled decades, the finite-grid signature of an infinite
/// limit.
#[derive(Clone, Debug)]
pub struct LimitEstimates {
    /// liminf of `max grad F(s) / s`.
    pub l: f64,
    pub l_divergent: bool,
    /// liminf of `min grad G(s) / s^p`.
    pub c_lo: f64,
    pub c_lo_divergent: bool,
    /// limsup of `max grad G(s) / s^p`.
    pub c_hi: f64,
    pub c_hi_divergent: bool,
    /// liminf of `F(s) / s^2`.
    pub ratio_liminf: f64,
    pub ratio_liminf_divergent: bool,
    /// limsup of `F(s) / s^2`.
    pub ratio_limsup: f64,
    pub ratio_limsup_divergent: bool,
}

fn window_trend_divergent(windows: &[f64]) -> bool {
    let d = windows.len();
    if d < 3 {
        return false;
    }
    let a = windows[d - 3];
    let b = windows[d - 1];
    a.signum() == b.signum() && b.abs() >= 2.5 * a.abs() && b.abs() >= 10.0
}

fn summarize_liminf(windows: &[f64]) -> (f64, bool) {
    let d = windows.len();
    let est = if d >= 2 {
        windows[d - 1].min(windows[d - 2])
    } else {
        windows[d - 1]
    };
    // Divergence is flagged in either direction; the sign of the estimate
    // says which infinity the window extrema are heading toward.
    let divergent = est.abs() >= 1e6 || window_trend_divergent(windows);
    (est, divergent)
}

fn summarize_limsup(windows: &[f64]) -> (f64, bool) {
    let d = windows.len();
    let est = if d >= 2 {
        windows[d - 1].max(windows[d - 2])
    } else {
        windows[d - 1]
    };
    let divergent = est.abs() >= 1e6 || window_trend_divergent(windows);
    (est, divergent)
}

/// Estimates the asymptotic ratios of `f` (against `s` and `s^2`) and of
/// the gate `g` (against `s^p`) over the geometric grid, windowed per
/// decade.
pub fn estimate_limits(
    f: &FunctionModel,
    g: &FunctionModel,
    p: f64,
    regime: Regime,
    grid: GridSpec,
) -> LimitEstimates {
    let d = grid.decades.max(1);
    let n = grid.per_decade.max(8);
    let mut grad_min = vec![f64::INFINITY; d];
    let mut gate_min = vec![f64::INFINITY; d];
    let mut gate_max = vec![f64::NEG_INFINITY; d];
    let mut val_min = vec![f64::INFINITY; d];
    let mut val_max = vec![f64::NEG_INFINITY; d];

    for t in 0..=d * n {
        let exponent = t as f64 / n as f64;
        let s = match regime {
            Regime::Origin => grid.start * 10f64.powf(-exponent),
            Regime::Infinity => grid.start * 10f64.powf(exponent),
        };
        let w = (t / n).min(d - 1);
        let gf = f.grad(s);
        grad_min[w] = grad_min[w].min(gf.hi / s);
        let gg = g.grad(s);
        let sp = s.powf(p);
        gate_min[w] = gate_min[w].min(gg.lo / sp);
        gate_max[w] = gate_max[w].max(gg.hi / sp);
        let r = f.value(s) / (s * s);
        val_min[w] = val_min[w].min(r);
        val_max[w] = val_max[w].max(r);
    }

    let (l, l_divergent) = summarize_liminf(&grad_min);
    let (c_lo, c_lo_divergent) = summarize_liminf(&gate_min);
    let (c_hi, c_hi_divergent) = summarize_limsup(&gate_max);
    let (ratio_liminf, ratio_liminf_divergent) = summarize_liminf(&val_min);
    let (ratio_limsup, ratio_limsup_divergent) = summarize_limsup(&val_max);

    LimitEstimates {
        l,
        l_divergent,
        c_lo,
        c_lo_divergent,
        c_hi,
        c_hi_divergent,
        ratio_liminf,
        ratio_liminf_divergent,
        ratio_limsup,
        ratio_limsup_divergent,
    }
}

/// Certified slab of nonincreasing potential.
#[derive(Clone, Debug)]
pub struct StabilityInterval {
    pub delta: f64,
    pub eta: f64,
    /// Sample point of deepest envelope value inside the slab.
    pub witness: f64,
    /// Certified bound: the upper envelope stays at or below `-margin`
    /// on the whole slab.
    pub margin: f64,
    /// The requirement the certificate was run against.
    pub margin_req: f64,
}

/// Result of a multi-interval scan; `shortfall` marks fewer intervals
/// than requested without turning the partial result into an error.
#[derive(Clone, Debug)]
pub struct IntervalScan {
    pub intervals: Vec<StabilityInterval>,
    pub shortfall: bool,
}

/// Margin requirement: a fixed value, or relative to the local gradient
/// scale of each scanned chunk.
#[derive(Clone, Copy, Debug)]
pub enum MarginSpec {
    Absolute(f64),
    Relative(f64),
}

fn sampled_lipschitz(model: &FunctionModel, a: f64, b: f64) -> f64 {
    let n = 128;
    let mut worst = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let s = a + (b - a) * i as f64 / n as f64;
        let (_, hi) = model.grad_envelopes(s);
        if let Some((ps, phi)) = prev {
            if s > ps {
                worst = worst.max((hi - phi).abs() / (s - ps));
            }
        }
        prev = Some((s, hi));
    }
    8.0 * worst + 1e-6
}

fn lipschitz_for(model: &FunctionModel, a: f64, b: f64) -> f64 {
    model
        .grad_lipschitz_hint(a, b)
        .unwrap_or_else(|| sampled_lipschitz(model, a, b))
        .max(1e-12)
}

fn chunk_gradient_scale(model: &FunctionModel, a: f64, b: f64) -> f64 {
    let n = 64;
    let ratio = (b / a).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..=n {
        let s = a * ratio.powf(i as f64 / n as f64);
        let (lo, hi) = model.grad_envelopes(s);
        worst = worst.max(lo.abs()).max(hi.abs());
    }
    worst
}

fn resolve_margin(model: &FunctionModel, a: f64, b: f64, margin: MarginSpec) -> f64 {
    match margin {
        MarginSpec::Absolute(v) => v,
        MarginSpec::Relative(r) => r * chunk_gradient_scale(model, a, b),
    }
}

/// Finds the envelope's crossing of `level` between an inside point
/// (envelope at or below the level) and an outside point, returning the
/// inside-side endpoint so the reported edge stays on the certified side.
fn bisect_crossing(model: &FunctionModel, inside: f64, outside: f64, level: f64) -> f64 {
    let mut a = inside;
    let mut b = outside;
    for _ in 0..80 {
        if (a - b).abs() <= 1e-15 * a.abs().max(b.abs()) {
            break;
        }
        let mid = 0.5 * (a + b);
        let (_, hi) = model.grad_envelopes(mid);
        if hi <= level {
            a = mid;
        } else {
            b = mid;
        }
    }
    a
}

struct RunState {
    samples: Vec<(f64, f64)>,
    deepest: (f64, f64),
}

impl RunState {
    fn new() -> Self {
        RunState {
            samples: Vec::new(),
            deepest: (0.0, f64::INFINITY),
        }
    }

    fn push(&mut self, s: f64, env: f64) {
        if env < self.deepest.1 {
            self.deepest = (s, env);
        }
        self.samples.push((s, env));
    }

    fn clear(&mut self) {
        self.samples.clear();
        self.deepest = (0.0, f64::INFINITY);
    }
}

fn finish_interval(
    model: &FunctionModel,
    run: &RunState,
    outside_hi: Option<f64>,
    outside_lo: Option<f64>,
    m_req: f64,
    lam: f64,
) -> Option<StabilityInterval> {
    let first = run.samples.first()?.0;
    let last = run.samples.last()?.0;
    let (lo_sample, hi_sample) = if first <= last { (first, last) } else { (last, first) };
    let eta = match outside_hi {
        Some(out) => bisect_crossing(model, hi_sample, out, -m_req),
        None => hi_sample,
    };
    let delta = match outside_lo {
        Some(out) => bisect_crossing(model, lo_sample, out, -m_req),
        None => lo_sample,
    };
    if !(delta > 0.0 && delta < eta) {
        return None;
    }
    // Chain of depth-checked nodes spanning the slab: the bisected endpoints
    // and every run sample all sit at envelope <= -m_req. Between adjacent
    // nodes a < b the Lipschitz cones from both sides meet at
    // (e_a + e_b)/2 + lam (b - a)/2, so the worst gap bounds the true
    // envelope maximum over the whole slab.
    let (_, env_delta) = model.grad_envelopes(delta);
    let (_, env_eta) = model.grad_envelopes(eta);
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(run.samples.len() + 2);
    chain.push((delta, env_delta));
    chain.extend(run.samples.iter().copied());
    chain.push((eta, env_eta));
    chain.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut certified_max = f64::NEG_INFINITY;
    for pair in chain.windows(2) {
        let (a, e_a) = pair[0];
        let (b, e_b) = pair[1];
        certified_max = certified_max.max(0.5 * (e_a + e_b) + 0.5 * lam * (b - a));
    }
    if certified_max > -0.5 * m_req {
        return None;
    }
    let mut witness = run.deepest.0;
    if !(witness > delta && witness < eta) {
        witness = 0.5 * (delta + eta);
    }
    Some(StabilityInterval {
        delta,
        eta,
        witness,
        margin: -certified_max,
        margin_req: m_req,
    })
}

/// Width cap per scanned chunk, in samples, to keep one call bounded.
const CHUNK_SAMPLE_CAP: f64 = 2.0e5;

/// First certified slab strictly below `upper`, scanning down to `floor`.
pub fn next_interval_below(
    model: &FunctionModel,
    upper: f64,
    floor: f64,
    margin: MarginSpec,
) -> Option<StabilityInterval> {
    let mut cursor = upper;
    let mut chunks = 0;
    while cursor > floor * (1.0 + 1e-12) && cursor > 0.0 && chunks < 10_000 {
        chunks += 1;
        let probe_lo = (cursor * 0.7).max(floor);
        let mut lam = lipschitz_for(model, probe_lo, cursor);
        let m_req = resolve_margin(model, probe_lo, cursor, margin);
        if !(m_req > 0.0) {
            // A vanishing gradient scale has nothing to certify against.
            return None;
        }
        let h = (0.5 * m_req / lam)
            .min((cursor - probe_lo) / 64.0)
            .max(cursor * 1e-14);
        let mut chunk_lo = (cursor - CHUNK_SAMPLE_CAP * h).max(probe_lo);

        let mut run = RunState::new();
        let mut outside_above: Option<f64> = None;
        let mut s = cursor;
        loop {
            let (_, env) = model.grad_envelopes(s);
            if env <= -m_req {
                run.push(s, env);
            } else {
                if run.samples.len() >= 3 {
                    if let Some(iv) =
                        finish_interval(model, &run, outside_above, Some(s), m_req, lam)
                    {
                        return Some(iv);
                    }
                }
                run.clear();
                outside_above = Some(s);
            }
            if s <= chunk_lo {
                if run.samples.is_empty() || chunk_lo <= floor {
                    break;
                }
                // A slab is open at the chunk boundary; keep descending in
                // short batches until it closes. The certificate's Lipschitz
                // bound must cover the extension, and batching keeps that
                // bound tied to ground the run actually reaches instead of
                // the whole remaining window.
                let next_lo = (chunk_lo - 1_024.0 * h).max(floor);
                lam = lam.max(lipschitz_for(model, next_lo, chunk_lo));
                chunk_lo = next_lo;
            }
            s = (s - h).max(if s > chunk_lo { chunk_lo } else { floor });
            if s <= 0.0 {
                break;
            }
        }
        // Slab still open at the floor.
        if run.samples.len() >= 3 {
            if let Some(iv) = finish_interval(model, &run, outside_above, None, m_req, lam) {
                return Some(iv);
            }
        }
        if chunk_lo >= cursor * (1.0 - 1e-12) {
            // Degenerate step size: no progress possible.
            return None;
        }
        cursor = chunk_lo;
    }
    None
}

/// First certified slab strictly above `lower`, scanning up to `cap`.
pub fn next_interval_above(
    model: &FunctionModel,
    lower: f64,
    cap: f64,
    margin: MarginSpec,
) -> Option<StabilityInterval> {
    let mut cursor = lower;
    let mut chunks = 0;
    while cursor < cap * (1.0 - 1e-12) && chunks < 10_000 {
        chunks += 1;
        let probe_hi = (cursor * 1.42).min(cap);
        let mut lam = lipschitz_for(model, cursor, probe_hi);
        let m_req = resolve_margin(model, cursor, probe_hi, margin);
        if !(m_req > 0.0) {
            return None;
        }
        let h = (0.5 * m_req / lam)
            .min((probe_hi - cursor) / 64.0)
            .max(cursor * 1e-14);
        let mut chunk_hi = (cursor + CHUNK_SAMPLE_CAP * h).min(probe_hi);

        let mut run = RunState::new();
        let mut outside_below: Option<f64> = None;
        let mut s = cursor;
        loop {
            let (_, env) = model.grad_envelopes(s);
            if env <= -m_req {
                run.push(s, env);
            } else {
                if run.samples.len() >= 3 {
                    if let Some(iv) =
                        finish_interval(model, &run, Some(s), outside_below, m_req, lam)
                    {
                        return Some(iv);
                    }
                }
                run.clear();
                outside_below = Some(s);
            }
            if s >= chunk_hi {
                if run.samples.is_empty() || chunk_hi >= cap {
                    break;
                }
                // Same batched extension as the descending scan.
                let next_hi = (chunk_hi + 1_024.0 * h).min(cap);
                lam = lam.max(lipschitz_for(model, chunk_hi, next_hi));
                chunk_hi = next_hi;
            }
            s = (s + h).min(if s < chunk_hi { chunk_hi } else { cap });
        }
        if run.samples.len() >= 3 {
            if let Some(iv) = finish_interval(model, &run, None, outside_below, m_req, lam) {
                return Some(iv);
            }
        }
        if chunk_hi <= cursor * (1.0 + 1e-12) {
            return None;
        }
        cursor = chunk_hi;
    }
    None
}

/// Collects up to `count` disjoint certified slabs, walking toward the
/// regime's accumulation end. Fewer than requested is reported through
/// `shortfall`, not an error.
pub fn find_stability_intervals(
    model: &FunctionModel,
    window: (f64, f64),
    count: usize,
    margin: MarginSpec,
    regime: Regime,
) -> IntervalScan {
    let mut intervals = Vec::new();
    match regime {
        Regime::Origin => {
            let mut upper = window.1;
            while intervals.len() < count {
                match next_interval_below(model, upper, window.0, margin) {
                    Some(iv) => {
                        upper = iv.delta * (1.0 - 1e-9);
                        intervals.push(iv);
                    }
                    None => break,
                }
            }
        }
        Regime::Infinity => {
            let mut lower = window.0;
            while intervals.len() < count {
                match next_interval_above(model, lower, window.1, margin) {
                    Some(iv) => {
                        lower = iv.eta * (1.0 + 1e-9);
                        intervals.push(iv);
                    }
                    None => break,
                }
            }
        }
    }
    let shortfall = intervals.len() < count;
    IntervalScan { intervals, shortfall }
}

/// Re-certifies a fixed slab against `m_req`; returns the certified
/// margin, or `None` when the certificate fails.
pub fn certify_window(model: &FunctionModel, lo: f64, hi: f64, m_req: f64) -> Option<f64> {
    if !(lo > 0.0 && lo < hi && m_req > 0.0) {
        return None;
    }
    let lam = lipschitz_for(model, lo, hi);
    let mut h = (0.5 * m_req / lam).min((hi - lo) / 8.0);
    h = h.max((hi - lo) / 4.0e6);
    let steps = ((hi - lo) / h).ceil() as usize;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=steps {
        let s = (lo + i as f64 * h).min(hi);
        let (_, env) = model.grad_envelopes(s);
        worst = worst.max(env);
    }
    // Both endpoints are sampled, so every point of the window lies within
    // h/2 of some sample and the Lipschitz cone bounds the true maximum.
    let certified_max = worst + 0.5 * lam * h;
    if certified_max <= -0.5 * m_req {
        Some(-certified_max)
    } else {
        None
    }
}

/// Smallest quadratic-growth constant (plus 10% headroom) that makes the
/// plateau-bump energy negative: the inequality balances half the bump
/// gradient constant plus `(k/2 + l) m(domain)` against the plateau
/// measure `(r/2)^n omega_n`.
pub fn compute_l0(
    l_bound: f64,
    k: f64,
    mesh_measure: f64,
    radius: f64,
    dim: usize,
    bump_constant: f64,
) -> f64 {
    let omega = match dim {
        1 => 2.0,
        _ => std::f64::consts::PI,
    };
    let plateau = (0.5 * radius).powi(dim as i32) * omega;
    let x = (0.5 * bump_constant + (0.5 * k + l_bound) * mesh_measure) / plateau;
    x + 0.1 * x.abs()
}

/// Smallest `c >= 0` with `A(s) >= -c s^2` over the scanned window, and
/// the window end the bound was certified up to.
pub fn negative_quadratic_bound(model: &FunctionModel, lo: f64, hi: f64) -> (f64, f64) {
    let n = 4000;
    let ratio = hi / lo;
    let mut c = 0.0f64;
    for i in 0..=n {
        let s = lo * ratio.powf(i as f64 / n as f64);
        c = c.max(-model.value(s) / (s * s));
    }
    (c.max(0.0), hi)
}

/// Largest-`s`-first search for test amplitudes: for each slab, the first
/// `s <= min(delta, zeta)` with `A(s) > L0 s^2` on a descending geometric
/// grid. Levels without one produce an error naming the level.
pub fn find_test_amplitudes(
    model: &FunctionModel,
    intervals: &[StabilityInterval],
    l0: f64,
    zeta: f64,
) -> Result<Vec<f64>, Error> {
    let per_decade = 2000;
    let decades = 12;
    let mut out = Vec::with_capacity(intervals.len());
    for (level, iv) in intervals.iter().enumerate() {
        let start = iv.delta.min(zeta);
        let mut found = None;
        'scan: for t in 0..=decades * per_decade {
            let s = start * 10f64.powf(-(t as f64) / per_decade as f64);
            if model.value(s) > l0 * s * s {
                found = Some(s);
                break 'scan;
            }
        }
        match found {
            Some(s) => out.push(s),
            None => {
                return Err(Error::NoTestAmplitude {
                    level,
                    detail: format!(
                        "no s <= {start:.6e} with A(s) > {l0:.6e} s^2 within {decades} decades"
                    ),
                })
            }
        }
    }
    Ok(out)
}

/// Bound on `max |value|` over `[0, hi]` by dense sampling with a
/// derivative-envelope pad.
pub fn value_sup_bound(model: &FunctionModel, hi: f64) -> f64 {
    let n = 10_000;
    let spacing = hi / n as f64;
    let mut max_val = 0.0f64;
    let mut max_grad = 0.0f64;
    for i in 1..=n {
        let s = i as f64 * spacing;
        max_val = max_val.max(model.value(s).abs());
        let (lo, hi_env) = model.grad_envelopes(s);
        max_grad = max_grad.max(lo.abs()).max(hi_env.abs());
    }
    max_val + spacing * max_grad
}

/// Threshold data for one cascade run.
#[derive(Clone, Debug)]
pub struct ThresholdReport {
    pub l0: f64,
    pub zeta: f64,
    pub s_tilde: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub lambda_dprime: Vec<f64>,
    /// Largest gate weights under which each slab stays certified.
    pub interval_caps: Vec<f64>,
    pub g_sup: f64,
    pub lambda_k: f64,
}

/// Combines witness and minimizer energies with the separating levels
/// into the admissible gate-weight threshold.
///
/// The interleaving precondition is strict and checked: origin regime
/// `theta[i] < T_i(min) <= T_i(witness) < theta[i+1]`, infinity regime
/// with the two levels swapped.
#[allow(clippy::too_many_arguments)]
pub fn compute_lambda_thresholds(
    l0: f64,
    zeta: f64,
    s_tilde: Vec<f64>,
    witness_energies: &[f64],
    minimizer_energies: &[f64],
    theta: Vec<f64>,
    g_sup: f64,
    mesh_measure: f64,
    regime: Regime,
    interval_caps: Vec<f64>,
) -> Result<ThresholdReport, Error> {
    let k = minimizer_energies.len();
    if k == 0 {
        return Err(Error::Config("thresholds need at least one level".into()));
    }
    if witness_energies.len() != k || theta.len() != k + 1 || interval_caps.len() != k {
        return Err(Error::Config(format!(
            "threshold inputs disagree: {k} levels, {} witnesses, {} separators, {} caps",
            witness_energies.len(),
            theta.len(),
            interval_caps.len()
        )));
    }
    for i in 0..k {
        let (below, above) = match regime {
            Regime::Origin => (theta[i], theta[i + 1]),
            Regime::Infinity => (theta[i + 1], theta[i]),
        };
        let ok = below < minimizer_energies[i]
            && minimizer_energies[i] <= witness_energies[i]
            && witness_energies[i] < above;
        if !ok {
            return Err(Error::Hypothesis(format!(
                "threshold interleaving fails at level {i}: need {below:.6e} < \
                 {:.6e} <= {:.6e} < {above:.6e}",
                minimizer_energies[i], witness_energies[i]
            )));
        }
    }

    let denom = mesh_measure * g_sup + 1.0;
    let mut lambda_prime = Vec::with_capacity(k);
    let mut lambda_dprime = Vec::with_capacity(k);
    for i in 0..k {
        match regime {
            Regime::Origin => {
                lambda_prime.push((theta[i + 1] - witness_energies[i]) / denom);
                lambda_dprime.push((minimizer_energies[i] - theta[i]) / denom);
            }
            Regime::Infinity => {
                lambda_prime.push((theta[i] - witness_energies[i]) / denom);
                lambda_dprime.push((minimizer_energies[i] - theta[i + 1]) / denom);
            }
        }
    }

    let mut lambda_k = 1.0f64;
    for &c in &interval_caps {
        lambda_k = lambda_k.min(c);
    }
    for &c in lambda_prime.iter().chain(lambda_dprime.iter()) {
        lambda_k = lambda_k.min(c);
    }

    Ok(ThresholdReport {
        l0,
        zeta,
        s_tilde,
        theta,
        lambda_prime,
        lambda_dprime,
        interval_caps,
        g_sup,
        lambda_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_constant_matches_the_worked_example() {
        let got = compute_l0(1.0, 0.1, 1.0, 0.25, 2, 3.0 * std::f64::consts::PI);
        let want = 129.12946678670580644;
        assert!(
            (got - want).abs() < 1e-12 * want,
            "growth constant: got {got}, want {want}"
        );
    }

    #[test]
    fn growth_constant_degenerate_limit() {
        let got = compute_l0(0.0, 1e-12, 1.0, 0.25, 1, 1e-12);
        assert!(got >= 0.0 && got < 1e-9);
    }

    #[test]
    fn origin_ratios_of_the_builtin_pair() {
        let f = FunctionModel::osc_origin();
        let g = FunctionModel::gate_origin(2.0).unwrap();
        let est = estimate_limits(&f, &g, 2.0, Regime::Origin, GridSpec::default());
        assert!(est.l_divergent, "gradient ratio should be flagged, got {}", est.l);
        assert!(est.l < -100.0);
        assert!((est.c_lo + 1.0).abs() < 0.05, "c_lo = {}", est.c_lo);
        assert!((est.c_hi - 1.0).abs() < 0.05, "c_hi = {}", est.c_hi);
        // F0(s)/s^2 grows like s^{-1/2}/3, so both value ratios head to
        // +infinity.
        assert!(est.ratio_limsup_divergent && est.ratio_limsup > 0.0);
        assert!(est.ratio_liminf_divergent && est.ratio_liminf > 0.0);
    }

    #[test]
    fn infinity_ratios_settle_for_the_infinity_pair() {
        let f = FunctionModel::osc_infinity();
        let g = FunctionModel::gate_infinity(2.0).unwrap();
        let est = estimate_limits(&f, &g, 2.0, Regime::Infinity, GridSpec::default());
        assert!(!est.l_divergent, "l = {} unexpectedly flagged", est.l);
        assert!(est.l < 0.0 && est.l > -0.01, "l = {}", est.l);
        assert!((est.c_lo + 1.0).abs() < 0.05, "c_lo = {}", est.c_lo);
        assert!((est.c_hi - 1.0).abs() < 0.05, "c_hi = {}", est.c_hi);
        // The value ratio shrinks like 1/(3 sqrt(s)); finite and positive.
        assert!(!est.ratio_limsup_divergent);
        assert!(est.ratio_limsup > 0.0 && est.ratio_limsup < 0.01);
    }

    #[test]
    fn first_origin_slab_is_certified_and_ordered() {
        let model = FunctionModel::osc_origin();
        let iv = next_interval_below(&model, 1.0, 1e-6, MarginSpec::Absolute(1e-5)).unwrap();
        assert!(0.0 < iv.delta && iv.delta < iv.witness && iv.witness < iv.eta);
        assert!(iv.margin > 0.0 && iv.margin >= 0.5 * iv.margin_req);
        // Tenfold-finer resampling stays below the certified level.
        let n = 20_000;
        for i in 0..=n {
            let s = iv.delta + (iv.eta - iv.delta) * i as f64 / n as f64;
            let (_, env) = model.grad_envelopes(s);
            assert!(
                env <= -iv.margin + 1e-12,
                "resample at {s} breaks the certificate: {env} vs {}",
                -iv.margin
            );
        }
    }

    #[test]
    fn slabs_walk_disjointly_toward_the_origin() {
        let model = FunctionModel::osc_origin();
        let scan = find_stability_intervals(
            &model,
            (1e-8, 1.0),
            3,
            MarginSpec::Relative(1e-3),
            Regime::Origin,
        );
        assert!(!scan.shortfall);
        assert_eq!(scan.intervals.len(), 3);
        for w in scan.intervals.windows(2) {
            assert!(w[1].eta < w[0].delta, "slabs overlap: {w:?}");
        }
    }

    #[test]
    fn infinity_slabs_walk_upward() {
        let model = FunctionModel::osc_infinity();
        let scan = find_stability_intervals(
            &model,
            (1.0, 60.0),
            3,
            MarginSpec::Relative(1e-3),
            Regime::Infinity,
        );
        assert!(!scan.shortfall);
        for w in scan.intervals.windows(2) {
            assert!(w[1].delta > w[0].eta);
        }
        // Slabs live where sin is deep negative: around 2k pi + 3 pi/2.
        let pi = std::f64::consts::PI;
        for (i, iv) in scan.intervals.iter().enumerate() {
            let center = 2.0 * i as f64 * pi + 1.5 * pi;
            assert!(
                iv.delta < center && center < iv.eta,
                "slab {i} misses its plateau center {center}: {iv:?}"
            );
        }
    }

    #[test]
    fn recertification_matches_fresh_scan() {
        let model = FunctionModel::osc_origin();
        let iv = next_interval_below(&model, 1.0, 1e-6, MarginSpec::Absolute(1e-5)).unwrap();
        let margin = certify_window(&model, iv.delta, iv.eta, iv.margin_req).unwrap();
        assert!(margin >= 0.5 * iv.margin_req);
    }

    #[test]
    fn threshold_outputs_scale_linearly_in_the_energies() {
        let witness = vec![-0.8e-3, -0.2e-3];
        let minimizer = vec![-1.0e-3, -0.25e-3];
        let theta = vec![-1.2e-3, -0.4e-3, -0.05e-3];
        let base = compute_lambda_thresholds(
            10.0,
            1.0,
            vec![1e-2, 1e-3],
            &witness,
            &minimizer,
            theta.clone(),
            0.4,
            1.0,
            Regime::Origin,
            vec![1.0, 1.0],
        )
        .unwrap();
        let c = 4.0;
        let scaled = compute_lambda_thresholds(
            10.0,
            1.0,
            vec![1e-2, 1e-3],
            &witness.iter().map(|e| c * e).collect::<Vec<_>>(),
            &minimizer.iter().map(|e| c * e).collect::<Vec<_>>(),
            theta.iter().map(|e| c * e).collect(),
            0.4,
            1.0,
            Regime::Origin,
            vec![c, c],
        )
        .unwrap();
        for i in 0..2 {
            assert_eq!(scaled.lambda_prime[i], c * base.lambda_prime[i]);
            assert_eq!(scaled.lambda_dprime[i], c * base.lambda_dprime[i]);
        }
    }

    #[test]
    fn threshold_interleaving_is_enforced() {
        let err = compute_lambda_thresholds(
            1.0,
            1.0,
            vec![1e-2],
            &[-0.5e-3],
            &[-0.4e-3], // minimizer above witness: violates T(min) <= T(witness)
            vec![-1e-3, -0.1e-3],
            0.4,
            1.0,
            Regime::Origin,
            vec![1.0],
        );
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }
}
