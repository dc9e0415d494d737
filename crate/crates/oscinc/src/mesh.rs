//! Uniform Dirichlet grids on an interval or a square, with the discrete
//! norms and quadrature the energy functional is built from.
//!
//! Nodes are the interior lattice points; boundary values are identically
//! zero and are represented implicitly. The stiffness operator is the
//! standard (2d+1)-point Laplacian scaled by `h^{dim-2}`, so `u'Ku` equals
//! the edge-difference form of the squared gradient seminorm, boundary
//! edges included.

use crate::error::Error;
use crate::model::FunctionModel;

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    lo: [f64; 2],
    hi: [f64; 2],
    /// Cells per side; interior nodes per side is one less.
    resolution: usize,
    h: f64,
}

impl Mesh {
    /// Builds a mesh over `extent`, which is `[a, b]` in one dimension and
    /// `[a, b, c, d]` (a square `[a,b] x [c,d]`) in two.
    pub fn new(dim: usize, extent: &[f64], resolution: usize) -> Result<Self, Error> {
        if dim != 1 && dim != 2 {
            return Err(Error::Config(format!(
                "mesh dimension must be 1 or 2, got {dim}"
            )));
        }
        if resolution < 8 {
            return Err(Error::Config(format!(
                "mesh resolution must be at least 8, got {resolution}"
            )));
        }
        let expect = 2 * dim;
        if extent.len() != expect {
            return Err(Error::Config(format!(
                "mesh extent needs {expect} entries for dim {dim}, got {}",
                extent.len()
            )));
        }
        let mut lo = [0.0f64; 2];
        let mut hi = [0.0f64; 2];
        for d in 0..dim {
            lo[d] = extent[2 * d];
            hi[d] = extent[2 * d + 1];
            if !(lo[d] < hi[d]) || !lo[d].is_finite() || !hi[d].is_finite() {
                return Err(Error::Config(format!(
                    "mesh extent for axis {d} must be an increasing finite pair"
                )));
            }
        }
        let span = hi[0] - lo[0];
        if dim == 2 {
            let span_y = hi[1] - lo[1];
            if (span - span_y).abs() > 1e-12 * span.max(span_y) {
                return Err(Error::Config(
                    "2D meshes must be square (equal side lengths)".into(),
                ));
            }
        }
        Ok(Mesh {
            dim,
            lo,
            hi,
            resolution,
            h: span / resolution as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Domain midpoint, zero-padded past `dim`.
    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ]
    }

    /// Largest bump radius that fits around the domain midpoint.
    pub fn max_bump_radius(&self) -> f64 {
        let mut r = 0.5 * (self.hi[0] - self.lo[0]);
        if self.dim == 2 {
            r = r.min(0.5 * (self.hi[1] - self.lo[1]));
        }
        r
    }

    /// Interior nodes per side.
    pub fn side(&self) -> usize {
        self.resolution - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    /// Quadrature weight of one node.
    pub fn weight(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Total quadrature measure; within `O(h)` of the analytic volume.
    pub fn measure(&self) -> f64 {
        self.weight() * self.num_nodes() as f64
    }

    pub fn node_coord(&self, j: usize) -> [f64; 2] {
        let side = self.side();
        match self.dim {
            1 => [self.lo[0] + (j + 1) as f64 * self.h, 0.0],
            _ => {
                let ix = j % side;
                let iy = j / side;
                [
                    self.lo[0] + (ix + 1) as f64 * self.h,
                    self.lo[1] + (iy + 1) as f64 * self.h,
                ]
            }
        }
    }

    /// Applies the scaled Dirichlet Laplacian: `out = K u`.
    pub fn stiffness_apply(&self, u: &[f64], out: &mut [f64]) {
        let side = self.side();
        match self.dim {
            1 => {
                let scale = 1.0 / self.h;
                for j in 0..side {
                    let left = if j > 0 { u[j - 1] } else { 0.0 };
                    let right = if j + 1 < side { u[j + 1] } else { 0.0 };
                    out[j] = scale * (2.0 * u[j] - left - right);
                }
            }
            _ => {
                // h^{dim-2} = 1 in two dimensions.
                for iy in 0..side {
                    for ix in 0..side {
                        let j = iy * side + ix;
                        let left = if ix > 0 { u[j - 1] } else { 0.0 };
                        let right = if ix + 1 < side { u[j + 1] } else { 0.0 };
                        let down = if iy > 0 { u[j - side] } else { 0.0 };
                        let up = if iy + 1 < side { u[j + side] } else { 0.0 };
                        out[j] = 4.0 * u[j] - left - right - down - up;
                    }
                }
            }
        }
    }

    /// Squared gradient seminorm as the sum of squared edge differences
    /// (boundary edges included) scaled by `h^{dim-2}`.
    pub fn h01_norm_sq(&self, u: &[f64]) -> f64 {
        let side = self.side();
        match self.dim {
            1 => {
                let mut acc = u[0] * u[0] + u[side - 1] * u[side - 1];
                for j in 0..side - 1 {
                    let d = u[j + 1] - u[j];
                    acc += d * d;
                }
                acc / self.h
            }
            _ => {
                let mut acc = 0.0;
                for iy in 0..side {
                    let row = iy * side;
                    acc += u[row] * u[row] + u[row + side - 1] * u[row + side - 1];
                    for ix in 0..side - 1 {
                        let d = u[row + ix + 1] - u[row + ix];
                        acc += d * d;
                    }
                }
                for ix in 0..side {
                    acc += u[ix] * u[ix];
                    let top = (side - 1) * side + ix;
                    acc += u[top] * u[top];
                    for iy in 0..side - 1 {
                        let d = u[(iy + 1) * side + ix] - u[iy * side + ix];
                        acc += d * d;
                    }
                }
                acc
            }
        }
    }

    pub fn l2_norm_sq(&self, u: &[f64]) -> f64 {
        self.weight() * u.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn linf_norm(&self, u: &[f64]) -> f64 {
        u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Nodal quadrature of `model(u(x))`.
    pub fn integrate_composed(&self, model: &FunctionModel, u: &[f64]) -> f64 {
        self.weight() * u.iter().map(|&v| model.value(v)).sum::<f64>()
    }

    /// Plateau bump of amplitude `s`: full height inside `|x - c| <= r/2`,
    /// linear decay to zero at `|x - c| = r`.
    ///
    /// The ball must fit inside the domain (touching the boundary is
    /// allowed, since the profile vanishes there).
    pub fn bump(&self, center: &[f64], radius: f64, s: f64) -> Result<Vec<f64>, Error> {
        if center.len() != self.dim {
            return Err(Error::Config(format!(
                "bump center needs {} coordinates, got {}",
                self.dim,
                center.len()
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("bump radius must be positive, got {radius}")));
        }
        let slack = 1e-12 * (self.hi[0] - self.lo[0]);
        for d in 0..self.dim {
            if center[d] - radius < self.lo[d] - slack || center[d] + radius > self.hi[d] + slack {
                return Err(Error::Config(format!(
                    "bump ball of radius {radius} around {:?} leaves the domain",
                    &center[..self.dim]
                )));
            }
        }
        let mut out = vec![0.0f64; self.num_nodes()];
        for (j, slot) in out.iter_mut().enumerate() {
            let x = self.node_coord(j);
            let mut d2 = 0.0;
            for d in 0..self.dim {
                let t = x[d] - center[d];
                d2 += t * t;
            }
            let t = (2.0 / radius) * (radius - d2.sqrt());
            *slot = s * t.clamp(0.0, 1.0);
        }
        Ok(out)
    }
}

/// Gradient-seminorm constant of the unit-amplitude plateau bump:
/// `|grad w|^2` integrates to this times the squared amplitude.
pub fn bump_h01_constant(radius: f64, dim: usize) -> f64 {
    let omega = match dim {
        1 => 2.0,
        _ => std::f64::consts::PI,
    };
    4.0 * radius.powi(dim as i32 - 2) * (1.0 - 0.5f64.powi(dim as i32)) * omega
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mesh::new(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0], 16).is_err());
        assert!(Mesh::new(2, &[0.0, 1.0, 0.0, 2.0], 16).is_err());
        assert!(Mesh::new(1, &[0.0, 1.0], 4).is_err());
        assert!(Mesh::new(1, &[1.0, 0.0], 16).is_err());
    }

    #[test]
    fn stiffness_quadratic_form_matches_edge_sum() {
        for (dim, extent) in [(1usize, vec![0.0, 1.0]), (2, vec![0.0, 1.0, 0.0, 1.0])] {
            let mesh = Mesh::new(dim, &extent, 24).unwrap();
            let n = mesh.num_nodes();
            let u: Vec<f64> = (0..n)
                .map(|j| ((j * 2654435761) % 1000) as f64 / 1000.0 - 0.3)
                .collect();
            let mut ku = vec![0.0; n];
            mesh.stiffness_apply(&u, &mut ku);
            let quad: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
            let edge = mesh.h01_norm_sq(&u);
            assert!(
                (quad - edge).abs() <= 1e-12 * edge.abs().max(1.0),
                "dim {dim}: {quad} vs {edge}"
            );
        }
    }

    #[test]
    fn bump_profile_hits_documented_values() {
        // Every probe point below lands exactly on a node at this width.
        let mesh = Mesh::new(1, &[0.0, 1.0], 1600).unwrap();
        let w = mesh.bump(&[0.5], 0.25, 2.0).unwrap();
        let at = |x: f64| w[(x / mesh.h()).round() as usize - 1];
        assert_eq!(at(0.5), 2.0);
        assert_eq!(at(0.45), 2.0);
        // Half height midway down the ramp, |x - c| = 3r/4.
        assert!((at(0.5 + 0.1875) - 1.0).abs() < 1e-9);
        assert_eq!(at(0.8), 0.0);
    }

    #[test]
    fn bump_must_fit_in_the_domain() {
        let mesh = Mesh::new(2, &[0.0, 1.0, 0.0, 1.0], 32).unwrap();
        assert!(mesh.bump(&[0.9, 0.5], 0.25, 1.0).is_err());
        assert!(mesh.bump(&[0.5, 0.5], 0.25, 1.0).is_ok());
    }

    #[test]
    fn measure_approaches_the_analytic_volume() {
        let coarse = Mesh::new(2, &[0.0, 2.0, 0.0, 2.0], 32).unwrap();
        let fine = Mesh::new(2, &[0.0, 2.0, 0.0, 2.0], 256).unwrap();
        assert!((coarse.measure() - 4.0).abs() < 4.0 * 2.0 / 32.0);
        assert!((fine.measure() - 4.0).abs() < 4.0 * 2.0 / 256.0);
    }

    #[test]
    fn bump_constant_matches_both_dimensions() {
        assert!((bump_h01_constant(0.25, 1) - 16.0).abs() < 1e-12);
        assert!((bump_h01_constant(0.25, 2) - 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
