use std::time::Instant;

use oscinc::oscillation::next_interval_below;
use oscinc::{
    EnergyContext, FunctionModel, MarginSpec, Mesh, MinimizeOptions,
};

fn main() {
    let res: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(256);
    let mesh = Mesh::new(1, &[0.0, 1.0], res).unwrap();
    let model = FunctionModel::add_quadratic(1.0, FunctionModel::osc_origin()).unwrap();
    let iv = next_interval_below(&model, 1.0, 1e-9, MarginSpec::Relative(1e-3)).unwrap();
    println!("slab [{:.6e}, {:.6e}] witness {:.6e}", iv.delta, iv.eta, iv.witness);
    let ctx = EnergyContext::new(&mesh, &model, 1.0).unwrap();
    let center = mesh.center();
    let radius = 0.5 * mesh.max_bump_radius();

    let mut starts: Vec<(String, Vec<f64>)> = vec![("zero".into(), vec![0.0; mesh.num_nodes()])];
    starts.push((
        format!("witness {:.3e}", iv.witness),
        mesh.bump(&center[..1], radius, iv.witness).unwrap(),
    ));
    for factor in [1.0 - 1e-9, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3] {
        let a = iv.eta * factor;
        starts.push((
            format!("bump {:.3e}", a),
            mesh.bump(&center[..1], radius, a).unwrap(),
        ));
    }

    for (name, start) in starts {
        let mut opts = MinimizeOptions::default();
        opts.gamma_delta = Some(iv.delta);
        opts.restarts = vec![start];
        let t0 = Instant::now();
        let sol = oscinc::minimize_over_ball(&ctx, iv.eta, &opts).unwrap();
        println!(
            "start {name:>14}: {:>8.1?} iters {:>6} status {:?} residual {:.3e} energy {:.9e} linf {:.6e}",
            t0.elapsed(),
            sol.iterations,
            sol.status,
            sol.residual,
            sol.energy,
            mesh.linf_norm(&sol.values)
        );
        if std::env::var_os("OSCINC_NODES").is_some() {
            let u = &sol.values;
            let n = u.len();
            let h = 1.0 / (n as f64 + 1.0);
            let mut parts: Vec<(f64, usize)> = (0..n)
                .map(|j| {
                    let left = if j == 0 { 0.0 } else { u[j - 1] };
                    let right = if j + 1 == n { 0.0 } else { u[j + 1] };
                    let flux = (2.0 * u[j] - left - right) / (h * h) + u[j];
                    let d = model.grad(u[j]).distance_to(flux);
                    (d, j)
                })
                .collect();
            parts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            for &(d, j) in parts.iter().take(6) {
                println!("    node {j:>4} u {:+.6e} mismatch {d:.3e}", u[j]);
            }
        }
    }
}
