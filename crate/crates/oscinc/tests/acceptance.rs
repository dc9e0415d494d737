//! End-to-end acceptance gate. Each test covers one headline behavior
//! and prints a single `criterion N (<label>): pass` or `FAIL` line so a
//! log scan shows the whole gate at a glance; details follow on failure.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oscinc::oscillation::{next_interval_above, next_interval_below};
use oscinc::{
    lebourg_check, minimize_over_ball, run_cascade, verify_family, CascadeOutcome, CascadeParams,
    EnergyContext, FunctionModel, GradInterval, MarginSpec, Mesh, MinimizeOptions, Regime,
    SolveStatus,
};

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

fn conclude(number: usize, label: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {number} ({label}): pass");
    } else {
        println!("criterion {number} ({label}): FAIL");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {number} ({label}): {}", failures.join("; "));
    }
}

#[test]
fn criterion_1_bump_gradient_norm() {
    let mut failures = Vec::new();
    let exact = 3.0 * PI;
    let mut errors = Vec::new();
    for resolution in [256usize, 512] {
        let mesh = Mesh::new(2, &[0.0, 1.0, 0.0, 1.0], resolution).unwrap();
        let bump = mesh.bump(&[0.5, 0.5], 0.25, 1.0).unwrap();
        errors.push((mesh.h01_norm_sq(&bump) - exact).abs());
    }
    check(&mut failures, errors[0] <= 0.02 * exact, || {
        format!(
            "coarse norm error {:.3e} above 2% of {:.6} ",
            errors[0], exact
        )
    });
    check(&mut failures, errors[1] <= 0.5 * errors[0], || {
        format!(
            "halving the cell size dropped the error only {:.3e} -> {:.3e}",
            errors[0], errors[1]
        )
    });
    conclude(1, "bump gradient norm", failures);
}

#[test]
fn criterion_2_slab_endpoints() {
    let mut failures = Vec::new();
    let tol = 1e-4;

    let origin = FunctionModel::osc_origin();
    match next_interval_below(&origin, 1.0, 0.01, MarginSpec::Absolute(1e-5)) {
        Some(iv) => {
            let (lo, hi) = (6.0 / (11.0 * PI), 6.0 / (7.0 * PI));
            check(&mut failures, (iv.delta - lo).abs() <= tol, || {
                format!("origin slab floor {:.8} vs expected {:.8}", iv.delta, lo)
            });
            check(&mut failures, (iv.eta - hi).abs() <= tol, || {
                format!("origin slab ceiling {:.8} vs expected {:.8}", iv.eta, hi)
            });
        }
        None => failures.push("no origin slab found below 1".into()),
    }

    let infinity = FunctionModel::osc_infinity();
    match next_interval_above(&infinity, 1.0, 10.0, MarginSpec::Absolute(1e-5)) {
        Some(iv) => {
            let (lo, hi) = (7.0 * PI / 6.0, 11.0 * PI / 6.0);
            check(&mut failures, (iv.delta - lo).abs() <= tol, || {
                format!("infinity slab floor {:.8} vs expected {:.8}", iv.delta, lo)
            });
            check(&mut failures, (iv.eta - hi).abs() <= tol, || {
                format!("infinity slab ceiling {:.8} vs expected {:.8}", iv.eta, hi)
            });
        }
        None => failures.push("no infinity slab found above 1".into()),
    }
    conclude(2, "slab endpoints", failures);
}

/// Shared profile for the shrinking origin families: distinct nonzero
/// records, amplitudes strictly decreasing inside their boxes, energies
/// strictly climbing while staying negative, residuals within tolerance.
fn origin_family_failures(
    mesh: &Mesh,
    out: &CascadeOutcome,
    params: &CascadeParams,
    want: usize,
) -> Vec<String> {
    let mut failures = Vec::new();
    check(&mut failures, out.records.len() >= want, || {
        format!("only {} of {} records", out.records.len(), want)
    });
    for r in &out.records {
        check(&mut failures, r.linf > 0.0, || {
            format!("level {} is the zero field", r.index)
        });
        check(&mut failures, r.linf <= r.delta, || {
            format!(
                "level {} amplitude {:.6e} above its box {:.6e}",
                r.index, r.linf, r.delta
            )
        });
        check(&mut failures, r.energy < 0.0, || {
            format!("level {} energy {:.6e} not negative", r.index, r.energy)
        });
        check(&mut failures, r.residual <= params.residual_tol, || {
            format!(
                "level {} residual {:.3e} above {:.1e}",
                r.index, r.residual, params.residual_tol
            )
        });
    }
    for pair in out.records.windows(2) {
        check(&mut failures, pair[1].linf < pair[0].linf, || {
            format!(
                "amplitudes {:.6e} -> {:.6e} fail to shrink",
                pair[0].linf, pair[1].linf
            )
        });
        check(&mut failures, pair[1].energy > pair[0].energy, || {
            format!(
                "energies {:.6e} -> {:.6e} fail to climb",
                pair[0].energy, pair[1].energy
            )
        });
    }
    let report = verify_family(mesh, out, params);
    check(&mut failures, report.passed(), || {
        format!("family audit: {}", report.failures.join("; "))
    });
    failures
}

#[test]
fn criterion_3_origin_family_gate_off() {
    let mesh = Mesh::new(1, &[0.0, 1.0], 2048).unwrap();
    let f = FunctionModel::osc_origin();
    let g = FunctionModel::gate_origin(1.0).unwrap();
    let mut params = CascadeParams::new(4, 0.0, 1.0, Regime::Origin);
    params.residual_tol = 1e-7;
    let failures = match run_cascade(&mesh, &f, &g, &params) {
        Ok(out) => origin_family_failures(&mesh, &out, &params, 4),
        Err(e) => vec![format!("run failed: {e}")],
    };
    conclude(3, "origin family, gate off", failures);
}

#[test]
fn criterion_4_origin_family_with_gate() {
    let mesh = Mesh::new(1, &[0.0, 1.0], 2048).unwrap();
    let f = FunctionModel::osc_origin();
    let g = FunctionModel::gate_origin(2.0).unwrap();
    let mut params = CascadeParams::new(3, 0.5, 2.0, Regime::Origin);
    params.residual_tol = 1e-7;
    let failures = match run_cascade(&mesh, &f, &g, &params) {
        Ok(out) => origin_family_failures(&mesh, &out, &params, 3),
        Err(e) => vec![format!("run failed: {e}")],
    };
    conclude(4, "origin family under a quadratic gate", failures);
}

#[test]
fn criterion_5_small_exponent_thresholds() {
    let mut failures = Vec::new();
    let mesh = Mesh::new(1, &[0.0, 1.0], 2048).unwrap();
    let f = FunctionModel::osc_origin();
    let g = FunctionModel::gate_origin(0.5).unwrap();

    let mut params = CascadeParams::new(3, 0.0, 0.5, Regime::Origin);
    params.residual_tol = 1e-7;
    params.compute_thresholds = true;
    let lambda_k = match run_cascade(&mesh, &f, &g, &params) {
        Ok(out) => match out.thresholds {
            Some(th) => {
                check(&mut failures, th.lambda_k > 0.0, || {
                    format!("admissible weight {:.6e} not positive", th.lambda_k)
                });
                th.lambda_k
            }
            None => {
                failures.push("no thresholds computed".into());
                0.0
            }
        },
        Err(e) => {
            failures.push(format!("threshold run failed: {e}"));
            0.0
        }
    };

    if failures.is_empty() {
        params.compute_thresholds = false;
        params.lambda = 0.5 * lambda_k;
        match run_cascade(&mesh, &f, &g, &params) {
            Ok(out) => {
                failures.extend(origin_family_failures(&mesh, &out, &params, 3));
                for r in &out.records {
                    let bound = 1.0 / (r.index + 1) as f64;
                    check(&mut failures, r.h01 < bound && r.linf < bound, || {
                        format!(
                            "level {}: norms {:.6e} / {:.6e} reach the 1/{} bound",
                            r.index,
                            r.h01,
                            r.linf,
                            r.index + 1
                        )
                    });
                }
            }
            Err(e) => failures.push(format!("perturbed run failed: {e}")),
        }
    }
    conclude(5, "small-exponent weight thresholds", failures);
}

#[test]
fn criterion_6_infinity_family() {
    let mut failures = Vec::new();
    let mesh = Mesh::new(1, &[0.0, 20.0], 2048).unwrap();
    let f = FunctionModel::osc_infinity();
    let g = FunctionModel::gate_infinity(2.0).unwrap();

    let mut params = CascadeParams::new(3, 0.0, 2.0, Regime::Infinity);
    params.residual_tol = 1e-7;
    match run_cascade(&mesh, &f, &g, &params) {
        Ok(out) => {
            check(&mut failures, out.records.len() >= 3, || {
                format!("only {} of 3 records", out.records.len())
            });
            for pair in out.records.windows(2) {
                check(&mut failures, pair[1].linf > pair[0].linf, || {
                    format!(
                        "amplitudes {:.6e} -> {:.6e} fail to grow",
                        pair[0].linf, pair[1].linf
                    )
                });
                check(&mut failures, pair[1].energy <= pair[0].energy, || {
                    format!(
                        "energies {:.6e} -> {:.6e} increase",
                        pair[0].energy, pair[1].energy
                    )
                });
            }
            let report = verify_family(&mesh, &out, &params);
            check(&mut failures, report.passed(), || {
                format!("family audit: {}", report.failures.join("; "))
            });
        }
        Err(e) => failures.push(format!("gate-off run failed: {e}")),
    }

    // The same family must survive a gate at an admissible weight, with
    // every level's amplitude clearing the level count below it.
    if failures.is_empty() {
        params.compute_thresholds = true;
        let lambda_k = match run_cascade(&mesh, &f, &g, &params) {
            Ok(out) => match out.thresholds {
                Some(th) => {
                    check(&mut failures, th.lambda_k > 0.0, || {
                        format!("admissible weight {:.6e} not positive", th.lambda_k)
                    });
                    th.lambda_k
                }
                None => {
                    failures.push("no thresholds computed".into());
                    0.0
                }
            },
            Err(e) => {
                failures.push(format!("threshold run failed: {e}"));
                0.0
            }
        };
        if failures.is_empty() {
            params.compute_thresholds = false;
            params.lambda = 0.5 * lambda_k;
            match run_cascade(&mesh, &f, &g, &params) {
                Ok(out) => {
                    check(&mut failures, out.records.len() >= 3, || {
                        format!("only {} of 3 gated records", out.records.len())
                    });
                    for r in &out.records {
                        check(&mut failures, r.linf > r.index as f64, || {
                            format!(
                                "level {}: amplitude {:.6e} not above {}",
                                r.index, r.linf, r.index
                            )
                        });
                    }
                }
                Err(e) => failures.push(format!("gated run failed: {e}")),
            }
        }
    }
    conclude(6, "growing infinity family", failures);
}

#[test]
fn criterion_7_gradient_calculus() {
    let mut failures = Vec::new();

    // Randomized mean-value inclusion on every built-in model.
    let windows: [(FunctionModel, f64, f64); 6] = [
        (FunctionModel::osc_origin(), 1e-4, 2.0),
        (FunctionModel::osc_infinity(), 1e-3, 50.0),
        (FunctionModel::gate_origin(0.5).unwrap(), 1e-4, 2.0),
        (FunctionModel::gate_origin(2.0).unwrap(), 1e-4, 2.0),
        (FunctionModel::gate_infinity(0.5).unwrap(), 1e-3, 50.0),
        (FunctionModel::gate_infinity(2.0).unwrap(), 1e-3, 50.0),
    ];
    for (i, (model, lo, hi)) in windows.iter().enumerate() {
        let rep = lebourg_check(model, *lo, *hi, 1000, 0xACC0 + i as u64);
        check(&mut failures, rep.failures == 0, || {
            format!(
                "model {i}: {} of {} mean-value checks failed (worst {:.3e} at {:?})",
                rep.failures, rep.pairs, rep.worst_violation, rep.worst_pair
            )
        });
    }

    // Freezing a potential at a level: identical below, the zero-joined
    // hull at the level, flat above; all equalities bitwise.
    let inner = FunctionModel::add_quadratic(1.0, FunctionModel::osc_origin()).unwrap();
    let eta = 0.4;
    let frozen = FunctionModel::truncate(eta, inner.clone()).unwrap();
    let below = 0.5 * eta;
    check(
        &mut failures,
        frozen.grad(below) == inner.grad(below) && frozen.value(below) == inner.value(below),
        || "frozen potential deviates below its level".into(),
    );
    let at = inner.grad(eta);
    let expected_at = GradInterval::new(at.lo.min(0.0), at.hi.max(0.0));
    check(&mut failures, frozen.grad(eta) == expected_at, || {
        format!(
            "hull at the level: {:?} vs expected {:?}",
            frozen.grad(eta),
            expected_at
        )
    });
    let above = 1.5 * eta;
    check(
        &mut failures,
        frozen.grad(above) == GradInterval::point(0.0) && frozen.value(above) == inner.value(eta),
        || "frozen potential not flat above its level".into(),
    );

    // Combinator gradients are the exact interval arithmetic of their
    // parts.
    let a = FunctionModel::osc_origin();
    let b = FunctionModel::gate_origin(2.0).unwrap();
    for &s in &[0.05, 0.31, 0.97, 1.7] {
        let ga = a.grad(s);
        let gb = b.grad(s);
        let sum = FunctionModel::sum(vec![a.clone(), b.clone()]).grad(s);
        check(&mut failures, sum == ga.add(gb), || {
            format!("sum gradient at {s}: {sum:?} vs {:?}", ga.add(gb))
        });
        let scaled = FunctionModel::scale(2.5, a.clone()).unwrap().grad(s);
        check(&mut failures, scaled == ga.scale(2.5), || {
            format!("scaled gradient at {s}: {scaled:?} vs {:?}", ga.scale(2.5))
        });
        let shifted = FunctionModel::add_quadratic(3.0, a.clone()).unwrap().grad(s);
        check(&mut failures, shifted == ga.shift(3.0 * s), || {
            format!(
                "quadratic-shifted gradient at {s}: {shifted:?} vs {:?}",
                ga.shift(3.0 * s)
            )
        });
    }

    // One-sided difference quotients converge at first order at smooth
    // points.
    let model = FunctionModel::osc_origin();
    let points = [0.3, 0.7, 1.1];
    let mut err_coarse = 0.0;
    let mut err_fine = 0.0;
    for &s in &points {
        let d = model.grad(s);
        assert_eq!(d.lo, d.hi, "expected a smooth point at {s}");
        let h = 1e-4;
        err_coarse += ((model.value(s + h) - model.value(s)) / h - d.lo).abs();
        let h = 1e-5;
        err_fine += ((model.value(s + h) - model.value(s)) / h - d.lo).abs();
    }
    check(&mut failures, err_fine <= 0.25 * err_coarse, || {
        format!(
            "difference-quotient errors {:.3e} -> {:.3e} not first order",
            err_coarse, err_fine
        )
    });
    conclude(7, "gradient calculus", failures);
}

#[test]
fn criterion_8_clipping_and_localization() {
    let mut failures = Vec::new();
    let mesh = Mesh::new(1, &[0.0, 1.0], 256).unwrap();

    // One certified slab per regime, clipping levels taken from it.
    let origin_model = FunctionModel::add_quadratic(1.0, FunctionModel::osc_origin()).unwrap();
    let origin_slab = next_interval_below(&origin_model, 1.0, 1e-4, MarginSpec::Relative(1e-3))
        .expect("origin slab");
    let infinity_model =
        FunctionModel::add_quadratic(1e-3, FunctionModel::osc_infinity()).unwrap();
    let infinity_slab = next_interval_above(&infinity_model, 1.0, 100.0, MarginSpec::Relative(1e-3))
        .expect("infinity slab");

    let mut rng = ChaCha8Rng::seed_from_u64(0x0C11_F0ED);
    for (name, model, slab) in [
        ("origin", &origin_model, &origin_slab),
        ("infinity", &infinity_model, &infinity_slab),
    ] {
        let ctx = EnergyContext::new(&mesh, model, 1.0).unwrap();
        for trial in 0..100 {
            let u: Vec<f64> = (0..mesh.num_nodes())
                .map(|_| rng.gen_range(-slab.eta..=slab.eta))
                .collect();
            let before = ctx.energy(&u);
            let after = ctx.energy(&oscinc::gamma_truncate(&u, slab.delta));
            check(
                &mut failures,
                after <= before + 1e-9 * (1.0 + before.abs()),
                || {
                    format!(
                        "{name} trial {trial}: clipping raised the energy {:.9e} -> {:.9e}",
                        before, after
                    )
                },
            );
        }

        // Converged minimizers sit inside the clipped box nodewise.
        let mut opts = MinimizeOptions::default();
        opts.gamma_delta = Some(slab.delta);
        let center = mesh.center();
        opts.restarts = vec![
            vec![0.0; mesh.num_nodes()],
            mesh.bump(&center[..1], 0.2, slab.witness).unwrap(),
            mesh.bump(&center[..1], 0.4, 0.5 * slab.eta).unwrap(),
        ];
        let sol = minimize_over_ball(&ctx, slab.eta, &opts).unwrap();
        if sol.status == SolveStatus::Converged {
            let lo = -1e-8 * slab.delta;
            let hi = slab.delta * (1.0 + 1e-8);
            let inside = sol.values.iter().all(|&v| v >= lo && v <= hi);
            check(&mut failures, inside, || {
                format!("{name}: a converged minimizer leaves [0, {:.6e}]", slab.delta)
            });
        } else {
            failures.push(format!("{name}: minimizer did not converge ({:?})", sol.status));
        }
    }
    conclude(8, "clipping and localization", failures);
}

#[test]
fn criterion_9_zero_field_certificate() {
    let mut failures = Vec::new();
    let line = Mesh::new(1, &[0.0, 1.0], 64).unwrap();
    let square = Mesh::new(2, &[0.0, 1.0, 0.0, 1.0], 16).unwrap();

    let mut models: Vec<(String, FunctionModel, f64)> = vec![
        ("plain origin density".into(), FunctionModel::osc_origin(), 1.0),
        ("plain infinity density".into(), FunctionModel::osc_infinity(), 1.0),
        ("origin gate p=0.5".into(), FunctionModel::gate_origin(0.5).unwrap(), 1.0),
        ("infinity gate p=2".into(), FunctionModel::gate_infinity(2.0).unwrap(), 1.0),
    ];
    let combos: [(FunctionModel, FunctionModel, f64, f64, Regime); 5] = [
        (
            FunctionModel::osc_origin(),
            FunctionModel::gate_origin(1.0).unwrap(),
            1.0,
            0.0,
            Regime::Origin,
        ),
        (
            FunctionModel::osc_origin(),
            FunctionModel::gate_origin(2.0).unwrap(),
            2.0,
            0.5,
            Regime::Origin,
        ),
        (
            FunctionModel::osc_origin(),
            FunctionModel::gate_origin(0.5).unwrap(),
            0.5,
            1e-3,
            Regime::Origin,
        ),
        (
            FunctionModel::osc_infinity(),
            FunctionModel::gate_infinity(1.0).unwrap(),
            1.0,
            0.0,
            Regime::Infinity,
        ),
        (
            FunctionModel::osc_infinity(),
            FunctionModel::gate_infinity(2.0).unwrap(),
            2.0,
            1e-3,
            Regime::Infinity,
        ),
    ];
    for (f, g, p, lambda, regime) in combos {
        let eff = oscinc::build_effective_model(
            &f,
            &g,
            p,
            lambda,
            regime,
            None,
            oscinc::GridSpec::default(),
        )
        .unwrap();
        models.push((
            format!("effective model {} weight {lambda}", eff.case.as_str()),
            eff.a,
            eff.k,
        ));
    }

    for (name, model, k) in &models {
        for mesh in [&line, &square] {
            let ctx = EnergyContext::new(mesh, model, *k).unwrap();
            let zero = vec![0.0; mesh.num_nodes()];
            let r = ctx.residual(&zero);
            check(&mut failures, r == 0.0, || {
                format!("{name} on {}d mesh: residual {r:.3e} at the zero field", mesh.dim())
            });
        }
    }
    conclude(9, "zero-field certificate", failures);
}
