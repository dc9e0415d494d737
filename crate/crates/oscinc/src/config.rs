//! TOML run configuration.
//!
//! Unknown keys are rejected everywhere so a typo cannot silently fall
//! back to a default. Sections are optional; each subcommand checks for
//! the ones it needs and reports which section is missing by name.

use std::path::Path;

use serde::Deserialize;

use crate::cascade::CascadeParams;
use crate::error::Error;
use crate::mesh::Mesh;
use crate::minimize::{MinimizeOptions, SubgradStrategy};
use crate::model::FunctionModel;
use crate::oscillation::{GridSpec, MarginSpec, Regime};

/// One node of a model expression: either a named builtin or an operator
/// over child specs. Exactly one of `builtin` and `op` must be present;
/// the remaining fields belong to specific variants and are rejected
/// elsewhere.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub builtin: Option<String>,
    pub op: Option<String>,
    pub p: Option<f64>,
    pub slope: Option<f64>,
    pub factor: Option<f64>,
    pub coeff: Option<f64>,
    pub eta: Option<f64>,
    pub inner: Option<Box<ModelSpec>>,
    pub terms: Option<Vec<ModelSpec>>,
}

impl ModelSpec {
    fn reject_extras(&self, context: &str, allowed: &[&str]) -> Result<(), Error> {
        let fields: [(&str, bool); 7] = [
            ("p", self.p.is_some()),
            ("slope", self.slope.is_some()),
            ("factor", self.factor.is_some()),
            ("coeff", self.coeff.is_some()),
            ("eta", self.eta.is_some()),
            ("inner", self.inner.is_some()),
            ("terms", self.terms.is_some()),
        ];
        for (name, present) in fields {
            if present && !allowed.contains(&name) {
                return Err(Error::Config(format!(
                    "model field {name:?} does not apply to {context}"
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<FunctionModel, Error> {
        match (&self.builtin, &self.op) {
            (Some(_), Some(_)) => Err(Error::Config(
                "model node sets both builtin and op; pick one".into(),
            )),
            (None, None) => Err(Error::Config(
                "model node needs either builtin or op".into(),
            )),
            (Some(name), None) => self.build_builtin(name),
            (None, Some(op)) => self.build_op(op),
        }
    }

    fn build_builtin(&self, name: &str) -> Result<FunctionModel, Error> {
        match name {
            "F0" => {
                self.reject_extras("builtin F0", &[])?;
                Ok(FunctionModel::osc_origin())
            }
            "Finf" => {
                self.reject_extras("builtin Finf", &[])?;
                Ok(FunctionModel::osc_infinity())
            }
            "G0" => {
                self.reject_extras("builtin G0", &["p"])?;
                let p = self
                    .p
                    .ok_or_else(|| Error::Config("builtin G0 needs an exponent p".into()))?;
                FunctionModel::gate_origin(p)
            }
            "Ginf" => {
                self.reject_extras("builtin Ginf", &["p"])?;
                let p = self
                    .p
                    .ok_or_else(|| Error::Config("builtin Ginf needs an exponent p".into()))?;
                FunctionModel::gate_infinity(p)
            }
            other => Err(Error::Config(format!(
                "unknown builtin {other:?} (expected F0, Finf, G0, or Ginf)"
            ))),
        }
    }

    fn build_op(&self, op: &str) -> Result<FunctionModel, Error> {
        match op {
            "zero" => {
                self.reject_extras("op zero", &[])?;
                Ok(FunctionModel::zero())
            }
            "linear" => {
                self.reject_extras("op linear", &["slope"])?;
                let slope = self
                    .slope
                    .ok_or_else(|| Error::Config("op linear needs a slope".into()))?;
                FunctionModel::linear(slope)
            }
            "sum" => {
                self.reject_extras("op sum", &["terms"])?;
                let terms = self
                    .terms
                    .as_ref()
                    .ok_or_else(|| Error::Config("op sum needs terms".into()))?;
                let built: Result<Vec<_>, _> = terms.iter().map(|t| t.build()).collect();
                Ok(FunctionModel::sum(built?))
            }
            "scale" => {
                self.reject_extras("op scale", &["factor", "inner"])?;
                let factor = self
                    .factor
                    .ok_or_else(|| Error::Config("op scale needs a factor".into()))?;
                let inner = self
                    .inner
                    .as_ref()
                    .ok_or_else(|| Error::Config("op scale needs an inner model".into()))?;
                FunctionModel::scale(factor, inner.build()?)
            }
            "add_quadratic" => {
                self.reject_extras("op add_quadratic", &["coeff", "inner"])?;
                let coeff = self
                    .coeff
                    .ok_or_else(|| Error::Config("op add_quadratic needs a coeff".into()))?;
                let inner = self
                    .inner
                    .as_ref()
                    .ok_or_else(|| Error::Config("op add_quadratic needs an inner model".into()))?;
                FunctionModel::add_quadratic(coeff, inner.build()?)
            }
            "truncate" => {
                self.reject_extras("op truncate", &["eta", "inner"])?;
                let eta = self
                    .eta
                    .ok_or_else(|| Error::Config("op truncate needs an eta".into()))?;
                let inner = self
                    .inner
                    .as_ref()
                    .ok_or_else(|| Error::Config("op truncate needs an inner model".into()))?;
                FunctionModel::truncate(eta, inner.build()?)
            }
            other => Err(Error::Config(format!(
                "unknown op {other:?} (expected zero, linear, sum, scale, \
                 add_quadratic, or truncate)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Oscillating part for cascade runs.
    pub f: Option<ModelSpec>,
    /// Gate part for cascade runs.
    pub g: Option<ModelSpec>,
    /// Standalone potential for solve, interval, and calculus runs.
    pub a: Option<ModelSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub dim: usize,
    pub extent: Vec<f64>,
    pub resolution: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub levels: usize,
    pub lambda: f64,
    pub p: f64,
    pub regime: String,
    pub shift: Option<f64>,
    pub compute_thresholds: Option<bool>,
    pub max_level_attempts: Option<usize>,
    pub residual_tol: Option<f64>,
    pub distinct_tol: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub step_init: Option<f64>,
    pub armijo_c: Option<f64>,
    pub armijo_shrink: Option<f64>,
    pub stop_tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub strategy: Option<String>,
    pub precondition: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalsSection {
    pub window: [f64; 2],
    pub count: usize,
    pub regime: String,
    pub margin_rel: Option<f64>,
    pub margin_abs: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: Option<f64>,
    pub decades: Option<usize>,
    pub per_decade: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub family_csv: Option<String>,
    pub intervals_csv: Option<String>,
    pub manifest: Option<String>,
    pub dump_fields: Option<bool>,
}

/// Single-ball minimization inputs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub eta: f64,
    pub k: f64,
    /// Clip level between descents; defaults to `eta`.
    pub gamma_delta: Option<f64>,
    /// Optional bump restart besides the zero field.
    pub bump_amplitude: Option<f64>,
    pub bump_radius: Option<f64>,
}

/// Gradient-calculus audit inputs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalculusSection {
    pub lo: f64,
    pub hi: f64,
    pub pairs: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub model: ModelSection,
    pub mesh: Option<MeshSection>,
    pub cascade: Option<CascadeSection>,
    pub solver: Option<SolverSection>,
    pub intervals: Option<IntervalsSection>,
    pub grid: Option<GridSection>,
    pub output: Option<OutputSection>,
    pub solve: Option<SolveSection>,
    pub calculus: Option<CalculusSection>,
}

impl Config {
    /// Parses a config file, returning the raw bytes alongside for
    /// manifest hashing.
    pub fn from_path(path: &Path) -> Result<(Config, Vec<u8>), Error> {
        let bytes = std::fs::read(path)?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Error::Config(format!("config is not UTF-8: {e}")))?;
        let config: Config = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse failure: {e}")))?;
        Ok((config, bytes))
    }

    pub fn require_mesh(&self) -> Result<Mesh, Error> {
        let section = self
            .mesh
            .as_ref()
            .ok_or_else(|| Error::Config("missing [mesh] section".into()))?;
        Mesh::new(section.dim, &section.extent, section.resolution)
    }

    pub fn grid_spec(&self) -> GridSpec {
        let defaults = GridSpec::default();
        match &self.grid {
            None => defaults,
            Some(g) => GridSpec {
                start: g.start.unwrap_or(defaults.start),
                decades: g.decades.unwrap_or(defaults.decades),
                per_decade: g.per_decade.unwrap_or(defaults.per_decade),
            },
        }
    }

    pub fn solver_options(&self) -> Result<MinimizeOptions, Error> {
        let mut opts = MinimizeOptions::default();
        if let Some(s) = &self.solver {
            if let Some(v) = s.max_iters {
                opts.max_iters = v;
            }
            if s.step_init.is_some() {
                opts.step_init = s.step_init;
            }
            if let Some(v) = s.armijo_c {
                opts.armijo_c = v;
            }
            if let Some(v) = s.armijo_shrink {
                opts.armijo_shrink = v;
            }
            if let Some(v) = s.stop_tol {
                opts.stop_tol = v;
            }
            if let Some(v) = s.step_tol {
                opts.step_tol = v;
            }
            if let Some(name) = &s.strategy {
                opts.strategy = SubgradStrategy::parse(name)?;
            }
            if let Some(v) = s.precondition {
                opts.precondition = v;
            }
        }
        opts.workers = self.workers.unwrap_or(1).max(1);
        Ok(opts)
    }

    fn margin_from(rel: Option<f64>, abs: Option<f64>) -> Result<MarginSpec, Error> {
        match (rel, abs) {
            (Some(_), Some(_)) => Err(Error::Config(
                "margin_rel and margin_abs are mutually exclusive".into(),
            )),
            (None, Some(a)) if a > 0.0 => Ok(MarginSpec::Absolute(a)),
            (Some(r), None) if r > 0.0 => Ok(MarginSpec::Relative(r)),
            (None, None) => Ok(MarginSpec::Relative(1e-3)),
            _ => Err(Error::Config("margins must be positive".into())),
        }
    }

    pub fn interval_margin(&self) -> Result<MarginSpec, Error> {
        let section = self
            .intervals
            .as_ref()
            .ok_or_else(|| Error::Config("missing [intervals] section".into()))?;
        Self::margin_from(section.margin_rel, section.margin_abs)
    }

    pub fn cascade_params(&self) -> Result<CascadeParams, Error> {
        let section = self
            .cascade
            .as_ref()
            .ok_or_else(|| Error::Config("missing [cascade] section".into()))?;
        let regime = Regime::parse(&section.regime)?;
        let mut params = CascadeParams::new(section.levels, section.lambda, section.p, regime);
        params.shift = section.shift;
        if let Some(v) = section.compute_thresholds {
            params.compute_thresholds = v;
        }
        if let Some(v) = section.max_level_attempts {
            params.max_level_attempts = v;
        }
        if let Some(v) = section.residual_tol {
            params.residual_tol = v;
        }
        if let Some(v) = section.distinct_tol {
            params.distinct_tol = v;
        }
        params.radius = section.radius;
        if let Some(iv) = &self.intervals {
            let iv_regime = Regime::parse(&iv.regime)?;
            if iv_regime != regime {
                return Err(Error::Config(format!(
                    "[intervals] regime {} disagrees with [cascade] regime {}",
                    iv.regime, section.regime
                )));
            }
            params.window = (iv.window[0], iv.window[1]);
            params.margin = Self::margin_from(iv.margin_rel, iv.margin_abs)?;
        }
        params.grid = self.grid_spec();
        params.solver = self.solver_options()?;
        Ok(params)
    }

    pub fn require_model_pair(&self) -> Result<(FunctionModel, FunctionModel), Error> {
        let f = self
            .model
            .f
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model.f]".into()))?
            .build()?;
        let g = self
            .model
            .g
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model.g]".into()))?
            .build()?;
        Ok((f, g))
    }

    pub fn require_standalone_model(&self) -> Result<FunctionModel, Error> {
        self.model
            .a
            .as_ref()
            .ok_or_else(|| Error::Config("missing [model.a]".into()))?
            .build()
    }
}
