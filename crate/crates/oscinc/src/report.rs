//! Run artifacts: CSV tables, nodal field dumps, and the JSON manifest.
//!
//! Floats are written with 17 significant digits so files round-trip
//! bit-for-bit, and nothing here depends on the clock or the machine;
//! rerunning the same config must reproduce the artifacts byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::cascade::{CascadeOutcome, SolutionRecord};
use crate::error::Error;
use crate::mesh::Mesh;
use crate::oscillation::StabilityInterval;

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn family_csv(records: &[SolutionRecord]) -> String {
    let mut out = String::from(
        "index,case_id,lambda,p,eta,delta,energy,linf,h01,l2,residual,iterations\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.case_id.as_str(),
            fmt_float(r.lambda),
            fmt_float(r.p),
            fmt_float(r.eta),
            fmt_float(r.delta),
            fmt_float(r.energy),
            fmt_float(r.linf),
            fmt_float(r.h01),
            fmt_float(r.l2),
            fmt_float(r.residual),
            r.iterations,
        );
    }
    out
}

pub fn intervals_csv(intervals: &[StabilityInterval]) -> String {
    let mut out = String::from("index,delta,eta,witness,margin\n");
    for (i, iv) in intervals.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i,
            fmt_float(iv.delta),
            fmt_float(iv.eta),
            fmt_float(iv.witness),
            fmt_float(iv.margin),
        );
    }
    out
}

/// Nodal dump of one field: node index, coordinates, value.
pub fn field_csv(mesh: &Mesh, values: &[f64]) -> String {
    let mut out = String::from("node,x,y,value\n");
    for (j, v) in values.iter().enumerate() {
        let c = mesh.node_coord(j);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            j,
            fmt_float(c[0]),
            fmt_float(c[1]),
            fmt_float(*v),
        );
    }
    out
}

pub fn config_sha256(config_bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config_bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Manifest tying artifacts to the config they came from. `results` is
/// the subcommand's own summary object; keys are sorted on output so the
/// bytes are stable.
pub fn manifest_json(
    config_bytes: &[u8],
    outputs: &[(&str, &str)],
    results: serde_json::Value,
) -> String {
    let mut output_map = serde_json::Map::new();
    for (kind, file) in outputs {
        output_map.insert((*kind).to_string(), serde_json::Value::String((*file).to_string()));
    }
    let manifest = serde_json::json!({
        "config_sha256": config_sha256(config_bytes),
        "outputs": output_map,
        "results": results,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    text.push('\n');
    text
}

/// Summary object for a cascade manifest.
pub fn cascade_results(outcome: &CascadeOutcome) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("case".into(), outcome.case.as_str().into());
    obj.insert("lambda".into(), outcome.lambda.into());
    obj.insert("k".into(), outcome.k.into());
    obj.insert("shift".into(), outcome.shift.into());
    obj.insert("levels".into(), outcome.records.len().into());
    obj.insert("partial".into(), outcome.partial.into());
    obj.insert(
        "energies".into(),
        outcome.records.iter().map(|r| r.energy).collect::<Vec<_>>().into(),
    );
    obj.insert(
        "notes".into(),
        outcome
            .notes
            .iter()
            .map(|n| serde_json::Value::String(n.clone()))
            .collect::<Vec<_>>()
            .into(),
    );
    if let Some(th) = &outcome.thresholds {
        obj.insert("lambda_k".into(), th.lambda_k.into());
        obj.insert("l0".into(), th.l0.into());
        obj.insert("theta".into(), th.theta.clone().into());
        obj.insert("lambda_prime".into(), th.lambda_prime.clone().into());
        obj.insert("lambda_dprime".into(), th.lambda_dprime.clone().into());
        obj.insert("interval_caps".into(), th.interval_caps.clone().into());
        obj.insert("g_sup".into(), th.g_sup.into());
        if !th.s_tilde.is_empty() {
            obj.insert("s_tilde".into(), th.s_tilde.clone().into());
        }
    }
    serde_json::Value::Object(obj)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{CaseId, LevelChecks};
    use crate::minimize::SolveStatus;

    fn sample_record() -> SolutionRecord {
        SolutionRecord {
            index: 0,
            case_id: CaseId::OriginPEq1,
            lambda: 0.0,
            p: 1.0,
            delta: 0.2,
            eta: 0.25,
            values: vec![0.1, 0.2],
            energy: -1.25e-3,
            linf: 0.2,
            h01: 0.5,
            l2: 0.1,
            residual: 1e-9,
            iterations: 42,
            status: SolveStatus::Converged,
            checks: LevelChecks {
                energy_negative: true,
                distinct_from_previous: true,
                residual_ok: true,
                localized: true,
            },
        }
    }

    #[test]
    fn family_rows_carry_full_precision() {
        let text = family_csv(&[sample_record()]);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,case_id,lambda,p,eta,delta,energy,linf,h01,l2,residual,iterations"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("0,origin_p_eq_1,"));
        assert!(row.contains("-1.2500000000000000e-3"));
        let energy: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert_eq!(energy, -1.25e-3);
    }

    #[test]
    fn interval_rows_parse_back_exactly() {
        let iv = StabilityInterval {
            delta: 0.2002,
            eta: 0.2257,
            witness: 0.212,
            margin: 3.5e-5,
            margin_req: 1e-5,
        };
        let text = intervals_csv(&[iv.clone()]);
        let row = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], "0");
        let back: f64 = cols[1].parse().unwrap();
        assert_eq!(back, iv.delta);
    }

    #[test]
    fn manifest_is_stable_and_hash_tracks_bytes() {
        let bytes = b"levels = 3\n";
        let a = manifest_json(bytes, &[("family", "family.csv")], serde_json::json!({"x": 1}));
        let b = manifest_json(bytes, &[("family", "family.csv")], serde_json::json!({"x": 1}));
        assert_eq!(a, b);
        let c = manifest_json(b"levels = 4\n", &[], serde_json::json!({}));
        assert_ne!(
            a.lines().find(|l| l.contains("config_sha256")),
            c.lines().find(|l| l.contains("config_sha256"))
        );
        assert!(!a.contains("time"), "manifest must not carry timestamps");
    }
}
