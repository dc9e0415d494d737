//! Command-line front end: loads a TOML run configuration, drives the
//! library, and writes reproducible artifacts into the output directory.
//!
//! Exit codes: 0 on success, 2 when a structural verification fails on
//! otherwise completed output, 3 for configuration or hypothesis
//! rejections, 4 for numerical or IO breakdowns.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oscinc::cascade::{run_cascade, verify_family};
use oscinc::config::Config;
use oscinc::error::Error;
use oscinc::minimize::{gamma_truncate, minimize_over_ball, EnergyContext};
use oscinc::model::lebourg_check;
use oscinc::oscillation::{find_stability_intervals, Regime};
use oscinc::report;

#[derive(Parser)]
#[command(
    name = "oscinc",
    version,
    about = "Families of localized minimizers for oscillating differential inclusions"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory artifacts are written into.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for restart batches; overrides the config value.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print per-level progress.
    #[arg(long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy once over a fixed amplitude ball.
    Solve,
    /// Build the family of localized minimizers, with thresholds when a
    /// gate weight is in play.
    Cascade,
    /// Scan for certified stability slabs.
    Intervals,
    /// Compute the admissible gate-weight threshold only.
    LambdaThreshold,
    /// Audit the gradient calculus of a model over a window.
    CalculusCheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> Result<(Config, Vec<u8>), Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let (mut config, bytes) = Config::from_path(path)?;
    if let Some(w) = cli.workers {
        config.workers = Some(w);
    }
    Ok((config, bytes))
}

fn out_path(cli: &Cli, name: &str) -> PathBuf {
    cli.out.join(name)
}

fn output_names(config: &Config) -> (String, String, String, bool) {
    let out = config.output.clone().unwrap_or_default();
    (
        out.family_csv.unwrap_or_else(|| "family.csv".into()),
        out.intervals_csv.unwrap_or_else(|| "intervals.csv".into()),
        out.manifest.unwrap_or_else(|| "manifest.json".into()),
        out.dump_fields.unwrap_or(false),
    )
}

fn write_manifest(
    path: &Path,
    config_bytes: &[u8],
    outputs: &[(&str, &str)],
    results: serde_json::Value,
) -> Result<(), Error> {
    report::write_text(path, &report::manifest_json(config_bytes, outputs, results))
}

fn run(cli: &Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve => run_solve(cli),
        Command::Cascade => run_cascade_cmd(cli),
        Command::Intervals => run_intervals(cli),
        Command::LambdaThreshold => run_lambda_threshold(cli),
        Command::CalculusCheck => run_calculus_check(cli),
    }
}

fn run_solve(cli: &Cli) -> Result<u8, Error> {
    let (config, bytes) = load_config(cli)?;
    let section = config
        .solve
        .clone()
        .ok_or_else(|| Error::Config("missing [solve] section".into()))?;
    let mesh = config.require_mesh()?;
    let model = config.require_standalone_model()?;
    let mut opts = config.solver_options()?;
    opts.gamma_delta = Some(section.gamma_delta.unwrap_or(section.eta));

    let mut restarts = vec![vec![0.0; mesh.num_nodes()]];
    if let Some(amp) = section.bump_amplitude {
        let radius = section
            .bump_radius
            .unwrap_or_else(|| 0.5 * mesh.max_bump_radius());
        let center = mesh.center();
        restarts.push(mesh.bump(&center[..mesh.dim()], radius, amp)?);
        restarts.push(gamma_truncate(&restarts[1], section.eta));
    }
    opts.restarts = restarts;

    let ctx = EnergyContext::new(&mesh, &model, section.k)?;
    let sol = minimize_over_ball(&ctx, section.eta, &opts)?;
    let linf = mesh.linf_norm(&sol.values);
    println!(
        "solve: energy {:.10e}, residual {:.3e}, |u|_inf {:.6e}, {} after {} iterations",
        sol.energy,
        sol.residual,
        linf,
        sol.status.as_str(),
        sol.iterations
    );

    let (_, _, manifest_name, dump) = output_names(&config);
    let mut outputs: Vec<(String, String)> = Vec::new();
    if dump {
        let name = "field_000.csv".to_string();
        report::write_text(&out_path(cli, &name), &report::field_csv(&mesh, &sol.values))?;
        outputs.push(("field_000".into(), name));
    }
    let results = serde_json::json!({
        "energy": sol.energy,
        "residual": sol.residual,
        "linf": linf,
        "iterations": sol.iterations,
        "status": sol.status.as_str(),
        "restart_index": sol.restart_index,
    });
    let refs: Vec<(&str, &str)> = outputs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    write_manifest(&out_path(cli, &manifest_name), &bytes, &refs, results)?;
    Ok(0)
}

fn run_cascade_cmd(cli: &Cli) -> Result<u8, Error> {
    let (config, bytes) = load_config(cli)?;
    let mesh = config.require_mesh()?;
    let (f, g) = config.require_model_pair()?;
    let params = config.cascade_params()?;

    let outcome = run_cascade(&mesh, &f, &g, &params)?;
    if cli.verbose {
        for r in &outcome.records {
            println!(
                "level {}: energy {:.10e}, |u|_inf {:.6e}, ball [{:.6e}, {:.6e}], \
                 residual {:.3e}",
                r.index, r.energy, r.linf, r.delta, r.eta, r.residual
            );
        }
        for note in &outcome.notes {
            println!("note: {note}");
        }
    }
    println!(
        "cascade: {} of {} levels, case {}, lambda {:.6e}, k {:.6e}{}",
        outcome.records.len(),
        params.levels,
        outcome.case.as_str(),
        outcome.lambda,
        outcome.k,
        if outcome.partial { " (partial)" } else { "" }
    );
    if let Some(th) = &outcome.thresholds {
        println!("admissible weight: lambda_k {:.10e}", th.lambda_k);
    }

    let (family_name, intervals_name, manifest_name, dump) = output_names(&config);
    report::write_text(&out_path(cli, &family_name), &report::family_csv(&outcome.records))?;
    report::write_text(
        &out_path(cli, &intervals_name),
        &report::intervals_csv(&outcome.intervals),
    )?;
    let mut outputs: Vec<(String, String)> = vec![
        ("family".into(), family_name),
        ("intervals".into(), intervals_name),
    ];
    if dump {
        for r in &outcome.records {
            let name = format!("field_{:03}.csv", r.index);
            report::write_text(&out_path(cli, &name), &report::field_csv(&mesh, &r.values))?;
            outputs.push((format!("field_{:03}", r.index), name));
        }
    }

    let verification = verify_family(&mesh, &outcome, &params);
    let mut results = report::cascade_results(&outcome);
    if let Some(obj) = results.as_object_mut() {
        obj.insert("verification_checks".into(), verification.checks_run.into());
        obj.insert(
            "verification_failures".into(),
            verification
                .failures
                .iter()
                .map(|s| serde_json::Value::String(s.clone()))
                .collect::<Vec<_>>()
                .into(),
        );
    }
    let refs: Vec<(&str, &str)> = outputs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    write_manifest(&out_path(cli, &manifest_name), &bytes, &refs, results)?;

    if !verification.passed() {
        for failure in &verification.failures {
            eprintln!("verification: {failure}");
        }
        return Ok(2);
    }
    Ok(0)
}

fn run_intervals(cli: &Cli) -> Result<u8, Error> {
    let (config, bytes) = load_config(cli)?;
    let section = config
        .intervals
        .clone()
        .ok_or_else(|| Error::Config("missing [intervals] section".into()))?;
    let model = config.require_standalone_model()?;
    let regime = Regime::parse(&section.regime)?;
    let margin = config.interval_margin()?;

    let scan = find_stability_intervals(
        &model,
        (section.window[0], section.window[1]),
        section.count,
        margin,
        regime,
    );
    println!(
        "intervals: found {} of {} requested{}",
        scan.intervals.len(),
        section.count,
        if scan.shortfall { " (shortfall)" } else { "" }
    );
    for (i, iv) in scan.intervals.iter().enumerate() {
        println!(
            "slab {}: [{:.10e}, {:.10e}], margin {:.3e}",
            i, iv.delta, iv.eta, iv.margin
        );
    }

    let (_, intervals_name, manifest_name, _) = output_names(&config);
    report::write_text(
        &out_path(cli, &intervals_name),
        &report::intervals_csv(&scan.intervals),
    )?;
    let results = serde_json::json!({
        "requested": section.count,
        "found": scan.intervals.len(),
        "shortfall": scan.shortfall,
    });
    write_manifest(
        &out_path(cli, &manifest_name),
        &bytes,
        &[("intervals", intervals_name.as_str())],
        results,
    )?;
    Ok(0)
}

fn run_lambda_threshold(cli: &Cli) -> Result<u8, Error> {
    let (config, bytes) = load_config(cli)?;
    let mesh = config.require_mesh()?;
    let (f, g) = config.require_model_pair()?;
    let mut params = config.cascade_params()?;
    // The threshold is a property of the gate-off family.
    params.lambda = 0.0;
    params.compute_thresholds = true;

    let outcome = run_cascade(&mesh, &f, &g, &params)?;
    let th = outcome
        .thresholds
        .as_ref()
        .expect("threshold path always produces thresholds");
    println!("lambda_k: {:.10e}", th.lambda_k);
    if cli.verbose {
        for i in 0..th.lambda_prime.len() {
            println!(
                "level {}: lambda' {:.6e}, lambda'' {:.6e}, cap {:.6e}",
                i, th.lambda_prime[i], th.lambda_dprime[i], th.interval_caps[i]
            );
        }
    }

    let (_, _, manifest_name, _) = output_names(&config);
    let results = report::cascade_results(&outcome);
    write_manifest(&out_path(cli, &manifest_name), &bytes, &[], results)?;
    Ok(0)
}

fn run_calculus_check(cli: &Cli) -> Result<u8, Error> {
    let (config, bytes) = load_config(cli)?;
    let section = config
        .calculus
        .clone()
        .ok_or_else(|| Error::Config("missing [calculus] section".into()))?;
    let model = config.require_standalone_model()?;
    let pairs = section.pairs.unwrap_or(500);
    let seed = config.seed.unwrap_or(0);

    let audit = lebourg_check(&model, section.lo, section.hi, pairs, seed);
    println!(
        "calculus: {} pairs, {} failures, worst violation {:.3e}",
        audit.pairs,
        audit.failures,
        audit.worst_violation
    );

    let (_, _, manifest_name, _) = output_names(&config);
    let results = serde_json::json!({
        "pairs": audit.pairs,
        "failures": audit.failures,
        "worst_violation": audit.worst_violation,
    });
    write_manifest(&out_path(cli, &manifest_name), &bytes, &[], results)?;
    if audit.failures > 0 {
        eprintln!(
            "calculus: mean-value containment failed on {} of {} pairs",
            audit.failures, audit.pairs
        );
        return Ok(2);
    }
    Ok(0)
}
