//! Projected descent for the nonsmooth discrete energy
//! `T(u) = |grad u|^2/2 + k |u|^2/2 - int A(u)` over truncation balls
//! `{ |u|_inf <= eta }`.
//!
//! Directions come from a selected subgradient field, preconditioned by
//! the stiffness-plus-mass operator augmented with the clamped negative
//! curvature of the selected branch; without the curvature term the deep
//! narrow wells of the oscillating models force step counts in the
//! hundreds of thousands. Steps are Armijo backtracked and projected, so
//! the accepted energy sequence never increases.

use rayon::prelude::*;

use crate::error::Error;
use crate::mesh::Mesh;
use crate::model::{FunctionModel, GradInterval};

/// Rule for picking a representative from a gradient interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubgradStrategy {
    /// The branch value: the endpoint of larger magnitude.
    SmoothPoint,
    /// The interval midpoint.
    IntervalMidpoint,
    /// Zero whenever the interval allows it, else the nearest endpoint.
    ZeroIfContainsZero,
}

impl SubgradStrategy {
    pub fn select(self, g: GradInterval) -> f64 {
        if g.lo == g.hi {
            return g.lo;
        }
        match self {
            SubgradStrategy::SmoothPoint => {
                if g.hi.abs() >= g.lo.abs() {
                    g.hi
                } else {
                    g.lo
                }
            }
            SubgradStrategy::IntervalMidpoint => 0.5 * (g.lo + g.hi),
            SubgradStrategy::ZeroIfContainsZero => {
                if g.contains(0.0) {
                    0.0
                } else if g.lo > 0.0 {
                    g.lo
                } else {
                    g.hi
                }
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubgradStrategy::SmoothPoint => "smooth_point",
            SubgradStrategy::IntervalMidpoint => "interval_midpoint",
            SubgradStrategy::ZeroIfContainsZero => "zero_if_contains_zero",
        }
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        match text {
            "smooth_point" => Ok(SubgradStrategy::SmoothPoint),
            "interval_midpoint" => Ok(SubgradStrategy::IntervalMidpoint),
            "zero_if_contains_zero" => Ok(SubgradStrategy::ZeroIfContainsZero),
            other => Err(Error::Config(format!(
                "unknown subgradient strategy {other:?} (expected smooth_point, \
                 interval_midpoint, or zero_if_contains_zero)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Initial Armijo step; `None` uses 1 preconditioned and an inverse
    /// Hessian-scale bound otherwise.
    pub step_init: Option<f64>,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// Normalized inclusion-residual target.
    pub stop_tol: f64,
    /// Relative projected-step size at which the iteration is declared
    /// collapsed.
    pub step_tol: f64,
    /// Armijo iterations allowed per descent round before the run hands
    /// off to the stationarity polish; zero lifts the cap.
    pub explore_iters: usize,
    pub strategy: SubgradStrategy,
    pub precondition: bool,
    /// Clip level for the truncation rounds between descents; `None`
    /// skips clipping.
    pub gamma_delta: Option<f64>,
    /// Starting fields; an empty list means the zero field alone.
    pub restarts: Vec<Vec<f64>>,
    /// Restarts run in parallel when above 1; results do not depend on it.
    pub workers: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 40_000,
            step_init: None,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            stop_tol: 1e-8,
            step_tol: 1e-12,
            explore_iters: 400,
            strategy: SubgradStrategy::ZeroIfContainsZero,
            precondition: true,
            gamma_delta: None,
            restarts: Vec::new(),
            workers: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// Residual reached `stop_tol`.
    Converged,
    /// Projected steps shrank below `step_tol` before the residual target.
    StepCollapse,
    /// `max_iters` spent.
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::StepCollapse => "step_collapse",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub values: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Index into the restart list that produced this field.
    pub restart_index: usize,
    /// Accepted energies, one per iteration, for monotonicity checks.
    pub energy_history: Vec<f64>,
}

/// Mesh, truncated potential, and quadratic shift bound together.
pub struct EnergyContext<'a> {
    pub mesh: &'a Mesh,
    pub model: &'a FunctionModel,
    pub k: f64,
}

impl<'a> EnergyContext<'a> {
    pub fn new(mesh: &'a Mesh, model: &'a FunctionModel, k: f64) -> Result<Self, Error> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Config(format!(
                "quadratic shift k must be positive and finite, got {k}"
            )));
        }
        Ok(EnergyContext { mesh, model, k })
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.mesh.h01_norm_sq(u) + 0.5 * self.k * self.mesh.l2_norm_sq(u)
            - self.mesh.integrate_composed(self.model, u)
    }

    /// Selected subgradient of the energy in nodal coordinates:
    /// `Ku + k w u - w xi(u)`.
    pub fn subgradient_field(&self, u: &[f64], strategy: SubgradStrategy) -> Vec<f64> {
        let w = self.mesh.weight();
        let mut g = vec![0.0; u.len()];
        self.mesh.stiffness_apply(u, &mut g);
        for (gj, &uj) in g.iter_mut().zip(u) {
            *gj += self.k * w * uj - w * strategy.select(self.model.grad(uj));
        }
        g
    }

    /// Weighted distance of the discrete flux to the gradient intervals,
    /// normalized by the scale of both sides. Exactly zero at the zero
    /// field.
    pub fn residual(&self, u: &[f64]) -> f64 {
        let (raw, sigma) = self.residual_parts(u);
        raw / sigma
    }

    pub fn residual_parts(&self, u: &[f64]) -> (f64, f64) {
        let w = self.mesh.weight();
        let mut ku = vec![0.0; u.len()];
        self.mesh.stiffness_apply(u, &mut ku);
        let mut r2 = 0.0;
        let mut flux2 = 0.0;
        let mut grad2 = 0.0;
        for (j, &uj) in u.iter().enumerate() {
            let flux = ku[j] / w + self.k * uj;
            let g = self.model.grad(uj);
            let d = g.distance_to(flux);
            r2 += w * d * d;
            flux2 += w * flux * flux;
            let m = g.magnitude();
            grad2 += w * m * m;
        }
        (r2.sqrt(), 1.0 + flux2.sqrt() + grad2.sqrt())
    }
}

/// Clip to `[0, delta]`: negative parts to zero, overshoot to the level.
pub fn gamma_truncate(u: &[f64], delta: f64) -> Vec<f64> {
    u.iter().map(|&v| v.clamp(0.0, delta)).collect()
}

fn project_ball(u: &mut [f64], eta: f64) {
    for v in u.iter_mut() {
        *v = v.clamp(-eta, eta);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Clamped negative curvature of the selected branch at each node, the
/// diagonal the preconditioner adds to stiffness plus mass. A node whose
/// curvature magnitude exceeds the stiffness trust scale sits in an
/// oscillation band narrower than the global step can track; once the
/// tuning sweeps have settled such a node, a huge diagonal entry freezes
/// it so the global step stops knocking it out of its band. Unsettled
/// nodes stay free regardless, otherwise the approach phase could never
/// move a profile through the fragile scales.
fn curvature_diagonal(
    ctx: &EnergyContext,
    u: &[f64],
    g: &[f64],
    strategy: SubgradStrategy,
) -> Vec<f64> {
    let w = ctx.mesh.weight();
    let stiff_diag = match ctx.mesh.dim() {
        1 => 2.0 / ctx.mesh.h(),
        _ => 4.0,
    };
    let trust = 0.5 * stiff_diag / w;
    let freeze = 1e9 * trust;
    let phi_scale = stiff_diag / w + ctx.k;
    u.iter()
        .zip(g)
        .map(|(&uj, &gj)| {
            let h = (1e-3 * uj.abs()).max(1e-8);
            let gp = strategy.select(ctx.model.grad(uj + h));
            let gm = strategy.select(ctx.model.grad(uj - h));
            let second = (gp - gm) / (2.0 * h);
            let settled = (gj / w).abs() <= 1e-7 * (1.0 + phi_scale * uj.abs());
            if second.abs() > trust && settled {
                freeze
            } else {
                (-second).clamp(0.0, 1e15)
            }
        })
        .collect()
}

/// One in-place sweep of scalar nodal solves for the 1D stationarity
/// system. The density derivative grows without bound toward the origin,
/// so near-zero nodes live in oscillation bands far narrower than any
/// global step; solving each nodal equation by bracketed bisection along
/// the downhill coordinate direction tunes those nodes exactly. Every
/// accepted move lowers the nodal energy, so sweeps keep the descent
/// monotone.
fn tune_sweep_1d(
    ctx: &EnergyContext,
    u: &mut [f64],
    eta: f64,
    strategy: SubgradStrategy,
    skip_tol: f64,
) -> bool {
    let n = u.len();
    let hh = ctx.mesh.h() * ctx.mesh.h();
    let k = ctx.k;
    let phi = |v: f64, rhs: f64| (2.0 / hh + k) * v - strategy.select(ctx.model.grad(v)) - rhs;
    let psi = |v: f64, rhs: f64| (1.0 / hh + 0.5 * k) * v * v - ctx.model.value(v) - rhs * v;
    let mut moved = false;
    for j in 0..n {
        let left = if j == 0 { 0.0 } else { u[j - 1] };
        let right = if j + 1 == n { 0.0 } else { u[j + 1] };
        let rhs = (left + right) / hh;
        let v0 = u[j];
        let f0 = phi(v0, rhs);
        if f0.abs() <= skip_tol {
            continue;
        }
        let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
        let mut r = (v0.abs() * 1e-12).max(1e-18);
        let mut a = v0;
        let mut bracket = None;
        for _ in 0..44 {
            let b = (v0 + dir * r).clamp(-eta, eta);
            let fb = phi(b, rhs);
            if (fb >= 0.0) != (f0 > 0.0) {
                bracket = Some((a.min(b), a.max(b)));
                break;
            }
            if b == -eta || b == eta {
                break;
            }
            a = b;
            r *= 4.0;
        }
        let Some((mut lo, mut hi)) = bracket else {
            continue;
        };
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if phi(mid, rhs) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = 0.5 * (lo + hi);
        // The radius ladder can leap over a stationary pair, so confirm the
        // nodal energy did not rise before keeping the move. The comparison
        // needs slack at the rounding scale of the quadratic term, else
        // small corrections whose true decrease sits below one ulp of the
        // nodal energy get rejected.
        let p0 = psi(v0, rhs);
        let slack = 4.0 * f64::EPSILON * (1.0 + p0.abs());
        if v != v0 && psi(v, rhs) <= p0 + slack {
            u[j] = v;
            moved = true;
        }
    }
    moved
}

/// Runs tuning sweeps until the residual target is met, the sweeps stop
/// moving nodes, or the budget runs out. Returns the sweeps spent; `u`
/// keeps the best tuned field, which never has higher energy than the
/// entry field.
fn tune_until_quiet(
    ctx: &EnergyContext,
    u: &mut Vec<f64>,
    eta: f64,
    opts: &MinimizeOptions,
    budget: usize,
) -> usize {
    if ctx.mesh.dim() != 1 {
        return 0;
    }
    let skip_tol = 0.1 * opts.stop_tol;
    let mut best = u.clone();
    let mut best_res = ctx.residual(u);
    let mut spent = 0usize;
    while spent < budget && best_res > opts.stop_tol {
        let tuned = tune_sweep_1d(ctx, u, eta, opts.strategy, skip_tol);
        spent += 1;
        let res = ctx.residual(u);
        if res < best_res {
            best_res = res;
            best = u.clone();
        }
        if !tuned {
            break;
        }
    }
    *u = best;
    spent
}

/// Solves `(K + k w I + w diag(c)) x = rhs` for the 1D tridiagonal case.
fn solve_tridiag_1d(mesh: &Mesh, k: f64, c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let h = mesh.h();
    let off = -1.0 / h;
    let w = mesh.weight();
    let mut diag: Vec<f64> = c.iter().map(|cj| 2.0 / h + k * w + w * cj).collect();
    let mut x = rhs.to_vec();
    // Thomas elimination with the constant off-diagonal.
    for i in 1..n {
        let m = off / diag[i - 1];
        diag[i] -= m * off;
        x[i] -= m * x[i - 1];
    }
    x[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = (x[i] - off * x[i + 1]) / diag[i];
    }
    x
}

/// Jacobi-preconditioned conjugate gradients for the 2D operator.
fn solve_cg_2d(mesh: &Mesh, k: f64, c: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let w = mesh.weight();
    let apply = |v: &[f64], out: &mut Vec<f64>| {
        mesh.stiffness_apply(v, out);
        for j in 0..n {
            out[j] += (k * w + w * c[j]) * v[j];
        }
    };
    let inv_diag: Vec<f64> = c.iter().map(|cj| 1.0 / (4.0 + k * w + w * cj)).collect();

    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let rhs_norm2 = dot(rhs, rhs);
    let mut ap = vec![0.0; n];
    for _ in 0..400 {
        if rz.abs() <= 1e-24 * rhs_norm2 {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for j in 0..n {
            x[j] += alpha * p[j];
            r[j] -= alpha * ap[j];
        }
        if dot(&r, &r) <= 1e-20 * rhs_norm2 {
            break;
        }
        for j in 0..n {
            z[j] = r[j] * inv_diag[j];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for j in 0..n {
            p[j] = z[j] + beta * p[j];
        }
    }
    x
}

fn descent_direction(
    ctx: &EnergyContext,
    u: &[f64],
    g: &[f64],
    strategy: SubgradStrategy,
) -> Vec<f64> {
    let c = curvature_diagonal(ctx, u, g, strategy);
    let neg: Vec<f64> = g.iter().map(|x| -x).collect();
    match ctx.mesh.dim() {
        1 => solve_tridiag_1d(ctx.mesh, ctx.k, &c, &neg),
        _ => solve_cg_2d(ctx.mesh, ctx.k, &c, &neg),
    }
}

struct Descent {
    values: Vec<f64>,
    energy: f64,
    residual: f64,
    iterations: usize,
    status: SolveStatus,
    energy_history: Vec<f64>,
}

fn descend(
    ctx: &EnergyContext,
    start: &[f64],
    eta: f64,
    opts: &MinimizeOptions,
) -> Result<Descent, Error> {
    let n = ctx.mesh.num_nodes();
    if start.len() != n {
        return Err(Error::Config(format!(
            "restart field has {} nodes, mesh has {n}",
            start.len()
        )));
    }
    let mut u = start.to_vec();
    project_ball(&mut u, eta);
    let mut e = ctx.energy(&u);
    if !e.is_finite() {
        return Err(Error::Numerical("starting energy is not finite".into()));
    }

    let plain_scale = 4.0 * ctx.mesh.dim() as f64 * ctx.mesh.h().powi(ctx.mesh.dim() as i32 - 2)
        + ctx.k * ctx.mesh.weight();
    let mut use_precond = opts.precondition;
    let mut iterations = 0usize;
    let mut status = SolveStatus::IterationLimit;
    let mut history = Vec::new();
    let mut gamma_rounds = 0usize;

    'outer: loop {
        // Global steps and nodal tuning alternate: the preconditioned
        // descent settles the modes spanning many nodes, the sweeps tune
        // the nodes whose oscillation bands are too narrow for any global
        // step. Either phase alone stalls short of the residual target.
        let mut cycle_res: Option<f64> = None;
        for cycle in 0..12 {
            let cap = if opts.explore_iters == 0 {
                0
            } else if cycle == 0 {
                opts.explore_iters
            } else {
                (opts.explore_iters / 4).max(100)
            };
            let mut round_iters = 0usize;
            let mut window_anchor = e;
            let mut window_res = f64::INFINITY;
            let mut window_count = 0usize;
            loop {
                if iterations >= opts.max_iters {
                    status = SolveStatus::IterationLimit;
                    break;
                }
                if cap > 0 && round_iters >= cap {
                    status = SolveStatus::IterationLimit;
                    break;
                }
                if round_iters % 4 == 0 {
                    let res = ctx.residual(&u);
                    if res <= opts.stop_tol {
                        status = SolveStatus::Converged;
                        break;
                    }
                }
                let g = ctx.subgradient_field(&u, opts.strategy);
                let (d, gtd, step0) = if use_precond {
                    let d = descent_direction(ctx, &u, &g, opts.strategy);
                    let gtd = dot(&g, &d);
                    if gtd < 0.0 {
                        (d, gtd, opts.step_init.unwrap_or(1.0))
                    } else {
                        // An indefinite probe can spoil the solve; fall back to
                        // the raw negative subgradient for this iteration.
                        let d: Vec<f64> = g.iter().map(|x| -x).collect();
                        let gtd = -dot(&g, &g);
                        (d, gtd, opts.step_init.unwrap_or(1.0 / plain_scale))
                    }
                } else {
                    let d: Vec<f64> = g.iter().map(|x| -x).collect();
                    let gtd = -dot(&g, &g);
                    (d, gtd, opts.step_init.unwrap_or(1.0 / plain_scale))
                };

                let mut t = step0;
                let mut accepted = false;
                while t >= 1e-18 {
                    let mut trial: Vec<f64> =
                        u.iter().zip(&d).map(|(uj, dj)| uj + t * dj).collect();
                    project_ball(&mut trial, eta);
                    let et = ctx.energy(&trial);
                    if et.is_finite() && et <= e + opts.armijo_c * t * gtd {
                        let step_inf: f64 = trial
                            .iter()
                            .zip(&u)
                            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                        u = trial;
                        e = et;
                        iterations += 1;
                        round_iters += 1;
                        history.push(e);
                        accepted = true;
                        if step_inf <= opts.step_tol * (1.0 + ctx.mesh.linf_norm(&u)) {
                            status = SolveStatus::StepCollapse;
                        }
                        break;
                    }
                    t *= opts.armijo_shrink;
                }

                if !accepted {
                    if use_precond {
                        // The preconditioned direction stalled; finish the run
                        // with plain projected subgradient steps.
                        use_precond = false;
                        continue;
                    }
                    status = SolveStatus::StepCollapse;
                    break;
                }
                // A global step detunes the nodes living in narrow
                // oscillation bands, which would poison the next direction.
                // Retuning right away keeps consecutive preconditioned steps
                // effective on the wide coupled modes.
                if ctx.mesh.dim() == 1 {
                    let tuned =
                        tune_sweep_1d(ctx, &mut u, eta, opts.strategy, 0.1 * opts.stop_tol);
                    if tuned {
                        let e2 = ctx.energy(&u);
                        if e2 <= e {
                            history.push(e2);
                        }
                        e = e2;
                    }
                }
                if status == SolveStatus::StepCollapse {
                    break;
                }
                window_count += 1;
                if window_count >= 30 {
                    // Abort only when the energy stalls and the residual has
                    // stopped contracting. Near a minimum the energy decrement
                    // scales like the squared residual and sits below any
                    // fixed energy tolerance while the run is still closing
                    // in, so the energy test alone must not end the run.
                    let res = ctx.residual(&u);
                    if window_anchor - e <= 1e-13 * (1.0 + e.abs()) && res > 0.97 * window_res {
                        status = SolveStatus::StepCollapse;
                        break;
                    }
                    window_anchor = e;
                    window_res = res;
                    window_count = 0;
                }
            }
            use_precond = opts.precondition;

            if status == SolveStatus::Converged || iterations >= opts.max_iters {
                break;
            }
            let budget = (opts.max_iters - iterations).min(25);
            let spent = tune_until_quiet(ctx, &mut u, eta, opts, budget);
            iterations += spent;
            let e_tuned = ctx.energy(&u);
            if e_tuned <= e {
                history.push(e_tuned);
            }
            e = e_tuned;
            let res_now = ctx.residual(&u);
            if res_now <= opts.stop_tol {
                status = SolveStatus::Converged;
                break;
            }
            if spent == 0 {
                break;
            }
            if let Some(prev) = cycle_res {
                if cycle >= 3 && res_now > 0.97 * prev {
                    break;
                }
            }
            cycle_res = Some(res_now);
        }

        if let Some(delta) = opts.gamma_delta {
            let clipped = gamma_truncate(&u, delta);
            if clipped != u {
                // Clipping never raises the energy on certified contexts;
                // re-descend from the clipped field while rounds remain.
                u = clipped;
                e = ctx.energy(&u);
                history.push(e);
                if gamma_rounds < 8 {
                    gamma_rounds += 1;
                    if status == SolveStatus::StepCollapse {
                        status = SolveStatus::IterationLimit;
                    }
                    continue 'outer;
                }
                // Out of rounds: keep the clipped field so the returned
                // iterate always lies in [0, delta], and report the run
                // as unconverged.
                status = SolveStatus::IterationLimit;
            }
        }
        break;
    }

    let residual = ctx.residual(&u);
    if residual <= opts.stop_tol {
        status = SolveStatus::Converged;
    }
    Ok(Descent {
        values: u,
        energy: e,
        residual,
        iterations,
        status,
        energy_history: history,
    })
}

/// Minimizes the context energy over the ball `{ |u|_inf <= eta }` from
/// every restart, returning the restart with the lowest energy (ties to
/// the earlier restart, which keeps reruns bit-stable).
pub fn minimize_over_ball(
    ctx: &EnergyContext,
    eta: f64,
    opts: &MinimizeOptions,
) -> Result<SolveOutcome, Error> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Config(format!("ball radius must be positive, got {eta}")));
    }
    let zero_start = vec![vec![0.0; ctx.mesh.num_nodes()]];
    let starts: &[Vec<f64>] = if opts.restarts.is_empty() {
        &zero_start
    } else {
        &opts.restarts
    };

    let runs: Vec<Result<Descent, Error>> = if opts.workers > 1 {
        starts.par_iter().map(|s| descend(ctx, s, eta, opts)).collect()
    } else {
        starts.iter().map(|s| descend(ctx, s, eta, opts)).collect()
    };

    let mut best: Option<(usize, Descent)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let run = run?;
        let better = match &best {
            None => true,
            Some((_, b)) => run.energy < b.energy,
        };
        if better {
            best = Some((i, run));
        }
    }
    let (restart_index, d) = best.expect("at least one restart");
    Ok(SolveOutcome {
        values: d.values,
        energy: d.energy,
        residual: d.residual,
        iterations: d.iterations,
        status: d.status,
        restart_index,
        energy_history: d.energy_history,
    })
}
