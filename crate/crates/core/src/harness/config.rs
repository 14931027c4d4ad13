//! Experiment configuration files.
//!
//! Configs are TOML. Top-level keys set the run shape, `[measure]` and
//! `[environment]` describe the problem, an optional `[policy]` table holds
//! tunings shared by every algorithm, and each `[[algorithm]]` entry names an
//! algorithm plus per-algorithm overrides of the same tunings.
//!
//! ```toml
//! replications = 60
//! base_seed = 1
//! output_dir = "results"
//!
//! [measure]
//! kind = "cvar"            # or "mean_variance"
//! level = 0.45             # alpha for cvar, gamma for mean_variance
//!
//! [environment]
//! kind = "synthetic"       # or "file" with `path = "instance.csv"`
//! arms = 5
//! horizon = 40000
//! changes = 6
//! lambda = 0.2
//!
//! [policy]
//! bonus_scale = 0.004
//!
//! [[algorithm]]
//! name = "rbocpd_risk_lcb"
//! beta = "auto"            # "auto", "decaying" or a number
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::env::GeneratorParams;
use crate::error::{io_error, Error, Result};
use crate::policies::{default_beta, default_gamma, default_tau, Algorithm, BetaMode, PolicyConfig};
use crate::risk::RiskMeasure;

/// A fully validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub replications: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub measure: RiskMeasure,
    pub environment: EnvironmentSpec,
    pub defaults: PolicyOverrides,
    pub algorithms: Vec<AlgorithmSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentSpec {
    /// A fresh random instance per replication.
    Synthetic(GeneratorParams),
    /// One instance read from an instance CSV, shared by all replications.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    pub overrides: PolicyOverrides,
}

/// A tuning that can be left to the horizon-aware default.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Tuning<T> {
    Value(T),
    Keyword(Keyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyword {
    Auto,
    Decaying,
}

/// Optional policy tunings; unset fields fall back to the next layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyOverrides {
    pub lipschitz: Option<f64>,
    pub sigma: Option<f64>,
    pub bonus_scale: Option<f64>,
    pub beta: Option<Tuning<f64>>,
    pub n0: Option<usize>,
    pub s0: Option<f64>,
    pub delta: Option<f64>,
    pub gamma_discount: Option<Tuning<f64>>,
    pub tau_window: Option<Tuning<usize>>,
    pub detector_cap: Option<usize>,
}

impl PolicyOverrides {
    /// Fields set in `self` win over those in `base`.
    pub fn or(&self, base: &PolicyOverrides) -> PolicyOverrides {
        PolicyOverrides {
            lipschitz: self.lipschitz.or(base.lipschitz),
            sigma: self.sigma.or(base.sigma),
            bonus_scale: self.bonus_scale.or(base.bonus_scale),
            beta: self.beta.or(base.beta),
            n0: self.n0.or(base.n0),
            s0: self.s0.or(base.s0),
            delta: self.delta.or(base.delta),
            gamma_discount: self.gamma_discount.or(base.gamma_discount),
            tau_window: self.tau_window.or(base.tau_window),
            detector_cap: self.detector_cap.or(base.detector_cap),
        }
    }

    /// Concrete tunings for `algorithm` on an instance of the given shape.
    ///
    /// `auto` (also the default when unset) means: `β = √(A K_T / T)` for
    /// the detector-based algorithms and 0 otherwise, and the horizon-aware
    /// defaults for the discount factor and window length.
    pub fn resolve(
        &self,
        algorithm: Algorithm,
        measure: RiskMeasure,
        arms: usize,
        changes: usize,
        horizon: usize,
    ) -> Result<PolicyConfig> {
        let mut cfg = PolicyConfig::new(measure);
        cfg.lipschitz = self.lipschitz;
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.bonus_scale {
            cfg.bonus_scale = v;
        }
        if let Some(v) = self.n0 {
            cfg.n0 = v;
        }
        if let Some(v) = self.s0 {
            cfg.s0 = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        cfg.detector_cap = self.detector_cap;
        let auto_beta = if algorithm.uses_detector() {
            default_beta(arms, changes, horizon)
        } else {
            0.0
        };
        cfg.beta = match self.beta {
            None | Some(Tuning::Keyword(Keyword::Auto)) => BetaMode::Fixed(auto_beta),
            Some(Tuning::Keyword(Keyword::Decaying)) => BetaMode::Decaying,
            Some(Tuning::Value(b)) => BetaMode::Fixed(b),
        };
        cfg.gamma_discount = match self.gamma_discount {
            None | Some(Tuning::Keyword(Keyword::Auto)) => default_gamma(changes, horizon),
            Some(Tuning::Value(g)) => g,
            Some(Tuning::Keyword(k)) => return Err(Error::Config(format!("gamma_discount cannot be `{k:?}`"))),
        };
        cfg.tau_window = match self.tau_window {
            None | Some(Tuning::Keyword(Keyword::Auto)) => default_tau(changes, horizon),
            Some(Tuning::Value(t)) => t,
            Some(Tuning::Keyword(k)) => return Err(Error::Config(format!("tau_window cannot be `{k:?}`"))),
        };
        cfg.validate()
            .map_err(|e| Error::Config(format!("{algorithm}: {e}")))?;
        Ok(cfg)
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_replications")]
    replications: usize,
    #[serde(default)]
    base_seed: u64,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    measure: RawMeasure,
    environment: RawEnvironment,
    #[serde(default)]
    policy: PolicyOverrides,
    #[serde(default)]
    algorithm: Vec<RawAlgorithm>,
}

fn default_replications() -> usize {
    60
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawMeasure {
    Cvar { level: f64 },
    MeanVariance { level: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawEnvironment {
    Synthetic {
        arms: usize,
        horizon: usize,
        changes: usize,
        lambda: f64,
        min_segment: Option<usize>,
        #[serde(default)]
        global_switch: bool,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
struct RawAlgorithm {
    name: String,
    #[serde(flatten)]
    overrides: PolicyOverrides,
}

impl ExperimentConfig {
    /// Read a config file. Relative instance paths are resolved against the
    /// config file's directory; `output_dir` is left as written.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let measure = match raw.measure {
            RawMeasure::Cvar { level } => RiskMeasure::cvar(level),
            RawMeasure::MeanVariance { level } => RiskMeasure::mean_variance(level),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        let environment = match raw.environment {
            RawEnvironment::Synthetic {
                arms,
                horizon,
                changes,
                lambda,
                min_segment,
                global_switch,
            } => EnvironmentSpec::Synthetic(GeneratorParams {
                arms,
                horizon,
                changes,
                lambda,
                min_segment,
                global_switch,
            }),
            RawEnvironment::File { path } => EnvironmentSpec::File(base_dir.join(path)),
        };
        let algorithms = raw
            .algorithm
            .into_iter()
            .map(|a| {
                Ok(AlgorithmSpec {
                    algorithm: a.name.parse()?,
                    overrides: a.overrides,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            replications: raw.replications,
            base_seed: raw.base_seed,
            output_dir: raw.output_dir,
            measure,
            environment,
            defaults: raw.policy,
            algorithms,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Config("at least one [[algorithm]] is required".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        let mut seen = Vec::new();
        for spec in &self.algorithms {
            if seen.contains(&spec.algorithm) {
                return Err(Error::Config(format!("algorithm `{}` listed twice", spec.algorithm)));
            }
            seen.push(spec.algorithm);
        }
        Ok(())
    }

    /// Tunings of one algorithm: its own overrides, then `[policy]`, then
    /// the built-in defaults.
    pub fn policy_config(&self, spec: &AlgorithmSpec, arms: usize, changes: usize, horizon: usize) -> Result<PolicyConfig> {
        spec.overrides
            .or(&self.defaults)
            .resolve(spec.algorithm, self.measure, arms, changes, horizon)
    }
}
