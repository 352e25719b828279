//! Run configuration: a single TOML file with documented defaults.
//! Unknown keys are hard errors; validation reports every problem at once.

use crate::lattice::{build_lattice, LatticeGeometry, SeparationVector};
use crate::model::{fnv1a, Model, ModelKind, ModelParams};
use serde::{Deserialize, Serialize};

/// Axis of a parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// One of: delta, lambda, lambda_rel, beta, h_x, h_stag.
    pub parameter: String,
    pub values: Vec<f64>,
    /// Critical coupling used to resolve `lambda_rel` values into absolute
    /// lambda.
    #[serde(default = "default_lambda_c")]
    pub lambda_c: f64,
}

fn default_lambda_c() -> f64 {
    0.32841
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "xxz" or "tfim".
    #[serde(default = "d_model")]
    pub model: String,
    /// XXZ anisotropy.
    #[serde(default = "d_zero")]
    pub delta: f64,
    /// Ising coupling (transverse field fixed at 1).
    #[serde(default = "d_zero")]
    pub lambda: f64,
    /// Longitudinal field for the Ising model.
    #[serde(default = "d_zero")]
    pub h_x: f64,
    /// Staggered z field for XXZ.
    #[serde(default = "d_zero")]
    pub h_stag: f64,
    /// Diagonal weight offset.
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    /// Inverse temperature.
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_four")]
    pub lx: usize,
    #[serde(default = "d_one")]
    pub ly: usize,
    /// Site-pair separations, as [dx, dy] displacements.
    #[serde(default = "d_seps")]
    pub separations: Vec<[i64; 2]>,
    /// Measurement sweeps per chain (must be divisible by `bins`).
    #[serde(default = "d_sweeps")]
    pub sweeps: u64,
    /// Thermalization sweeps; defaults to sweeps / 10.
    #[serde(default)]
    pub thermalization: Option<u64>,
    /// Bins per chain.
    #[serde(default = "d_bins")]
    pub bins: u64,
    /// Independent Markov chains (parallelized over the worker pool).
    #[serde(default = "d_one_u64")]
    pub chains: u64,
    /// Master seed; chain c uses RNG stream c.
    #[serde(default = "d_seed")]
    pub seed: u64,
    /// Imaginary-time slices sampled for diagonal channels.
    #[serde(default = "d_levels")]
    pub meas_levels: usize,
    /// Output directory.
    #[serde(default = "d_out")]
    pub out_dir: String,
    /// Checkpoint interval in measurement sweeps; 0 checkpoints only at
    /// the end of the run.
    #[serde(default = "d_zero_u64")]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub axis: Option<SweepAxis>,
}

fn d_model() -> String {
    "xxz".into()
}
fn d_zero() -> f64 {
    0.0
}
fn d_epsilon() -> f64 {
    0.1
}
fn d_beta() -> f64 {
    1.0
}
fn d_four() -> usize {
    4
}
fn d_one() -> usize {
    1
}
fn d_seps() -> Vec<[i64; 2]> {
    vec![[1, 0]]
}
fn d_sweeps() -> u64 {
    10_000
}
fn d_bins() -> u64 {
    100
}
fn d_one_u64() -> u64 {
    1
}
fn d_seed() -> u64 {
    1
}
fn d_levels() -> usize {
    crate::estimators::DEFAULT_MEAS_LEVELS
}
fn d_out() -> String {
    "out".into()
}
fn d_zero_u64() -> u64 {
    0
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn kind(&self) -> Result<ModelKind, String> {
        match self.model.as_str() {
            "xxz" => Ok(ModelKind::Xxz),
            "tfim" => Ok(ModelKind::Tfim),
            other => Err(format!("unknown model '{other}' (expected xxz or tfim)")),
        }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            delta: self.delta,
            lambda: self.lambda,
            h_x: self.h_x,
            h_stag: self.h_stag,
            beta: self.beta,
            epsilon: self.epsilon,
        }
    }

    pub fn thermalization_sweeps(&self) -> u64 {
        self.thermalization.unwrap_or(self.sweeps / 10)
    }

    /// Geometry, model, and separation list; all validation errors are
    /// collected rather than stopping at the first.
    pub fn build(&self) -> Result<(LatticeGeometry, Model, Vec<SeparationVector>), Vec<String>> {
        let mut errors = Vec::new();
        let kind = self.kind().map_err(|e| vec![e])?;
        let geom = match build_lattice(self.lx, self.ly, true) {
            Ok(g) => Some(g),
            Err(e) => {
                errors.push(format!("geometry: {e}"));
                None
            }
        };
        let mut seps = Vec::new();
        if let Some(g) = &geom {
            if self.separations.is_empty() {
                errors.push("separations: at least one separation required".into());
            }
            for &[dx, dy] in &self.separations {
                match SeparationVector::canonical(dx, dy, g.lx(), g.ly()) {
                    Ok(s) => {
                        if seps.contains(&s) {
                            errors.push(format!(
                                "separations: ({dx},{dy}) duplicates an earlier entry after canonicalization"
                            ));
                        } else {
                            seps.push(s);
                        }
                    }
                    Err(e) => errors.push(format!("separations: ({dx},{dy}): {e}")),
                }
            }
        }
        let model = geom.as_ref().and_then(|g| match Model::build(kind, self.params(), g) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(format!("model: {e}"));
                None
            }
        });
        if self.sweeps == 0 {
            errors.push("sweeps: must be positive".into());
        }
        if self.bins < 2 {
            errors.push("bins: need at least 2 for jackknife errors".into());
        }
        if self.bins > 0 && self.sweeps % self.bins != 0 {
            errors.push(format!(
                "sweeps: {} not divisible by bins {}",
                self.sweeps, self.bins
            ));
        }
        if self.chains == 0 {
            errors.push("chains: must be at least 1".into());
        }
        if self.meas_levels == 0 {
            errors.push("meas_levels: must be at least 1".into());
        }
        if let Some(axis) = &self.axis {
            if axis.values.is_empty() {
                errors.push("axis.values: must be nonempty".into());
            }
            match axis.parameter.as_str() {
                "delta" | "lambda" | "lambda_rel" | "beta" | "h_x" | "h_stag" => {}
                p => errors.push(format!("axis.parameter: unknown parameter '{p}'")),
            }
        }
        match (errors.is_empty(), geom, model) {
            (true, Some(g), Some(m)) => Ok((g, m, seps)),
            _ => Err(errors),
        }
    }

    /// Copy with one swept parameter substituted.
    pub fn with_axis_value(&self, axis: &SweepAxis, value: f64) -> RunConfig {
        let mut cfg = self.clone();
        cfg.axis = None;
        match axis.parameter.as_str() {
            "delta" => cfg.delta = value,
            "lambda" => cfg.lambda = value,
            "lambda_rel" => cfg.lambda = value * axis.lambda_c,
            "beta" => cfg.beta = value,
            "h_x" => cfg.h_x = value,
            "h_stag" => cfg.h_stag = value,
            _ => unreachable!("validated in build()"),
        }
        cfg
    }

    /// Stable hash over the physics- and sampling-relevant fields, written
    /// into output headers.
    pub fn config_hash(&self) -> u64 {
        let canon = format!(
            "{}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{}x{}|{:?}|{}|{}|{}|{}|{}|{}",
            self.model,
            self.delta,
            self.lambda,
            self.h_x,
            self.h_stag,
            self.epsilon,
            self.beta,
            self.lx,
            self.ly,
            self.separations,
            self.sweeps,
            self.thermalization_sweeps(),
            self.bins,
            self.chains,
            self.seed,
            self.meas_levels,
        );
        fnv1a(canon.as_bytes())
    }

    pub fn header_pairs(&self) -> Vec<(String, String)> {
        vec![
            ("model".into(), self.model.clone()),
            ("delta".into(), format!("{:.17e}", self.delta)),
            ("lambda".into(), format!("{:.17e}", self.lambda)),
            ("h_x".into(), format!("{:.17e}", self.h_x)),
            ("h_stag".into(), format!("{:.17e}", self.h_stag)),
            ("epsilon".into(), format!("{:.17e}", self.epsilon)),
            ("beta".into(), format!("{:.17e}", self.beta)),
            ("lx".into(), self.lx.to_string()),
            ("ly".into(), self.ly.to_string()),
            (
                "separations".into(),
                self.separations
                    .iter()
                    .map(|s| format!("{},{}", s[0], s[1]))
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            ("sweeps".into(), self.sweeps.to_string()),
            (
                "thermalization".into(),
                self.thermalization_sweeps().to_string(),
            ),
            ("bins".into(), self.bins.to_string()),
            ("chains".into(), self.chains.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("meas_levels".into(), self.meas_levels.to_string()),
            ("config_hash".into(), format!("{:#018x}", self.config_hash())),
            ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_build() {
        let cfg = RunConfig::from_toml("lx = 4\nly = 1\nbeta = 2.0\nsweeps = 100\nbins = 10").unwrap();
        let (g, m, seps) = cfg.build().unwrap();
        assert_eq!(g.num_sites(), 4);
        assert_eq!(m.kind, ModelKind::Xxz);
        assert_eq!(seps.len(), 1);
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let err = RunConfig::from_toml("sweps = 100").unwrap_err();
        assert!(err.contains("sweps"), "{err}");
    }

    #[test]
    fn all_errors_enumerated() {
        let cfg = RunConfig::from_toml(
            "lx = 0\nly = 0\nsweeps = 7\nbins = 3\nchains = 0\nseparations = [[0,0]]",
        )
        .unwrap();
        let errors = cfg.build().unwrap_err();
        assert!(errors.len() >= 3, "got {errors:?}");
        assert!(errors.iter().any(|e| e.contains("geometry")));
        assert!(errors.iter().any(|e| e.contains("divisible")));
        assert!(errors.iter().any(|e| e.contains("chains")));
    }

    #[test]
    fn lambda_rel_resolves_against_critical_coupling() {
        let cfg = RunConfig::from_toml(
            "model = \"tfim\"\nlambda = 0.0\n[axis]\nparameter = \"lambda_rel\"\nvalues = [0.5, 1.0, 2.0]",
        )
        .unwrap();
        let axis = cfg.axis.clone().unwrap();
        let resolved = cfg.with_axis_value(&axis, 2.0);
        assert!((resolved.lambda - 2.0 * 0.32841).abs() < 1e-15);
    }

    #[test]
    fn hash_stable_and_sensitive() {
        let a = RunConfig::from_toml("delta = 1.0").unwrap();
        let b = RunConfig::from_toml("delta = 1.0").unwrap();
        let c = RunConfig::from_toml("delta = 0.5").unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
    }
}
