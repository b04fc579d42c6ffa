//! TOML experiment files.
//!
//! ```toml
//! seed = 42
//! replications = 500
//!
//! [[scenario]]
//! name = "balanced-frechet"
//! k_fraction = 0.05
//! p_per_n = [5.0]
//! estimators = ["hill_combined", "distributed_variance", "weissman_combined"]
//! tests = ["homogeneity"]
//!
//! [scenario.model]
//! sizes = [2000, 2000, 2000]
//! marginal = { family = "frechet", gamma = 1.0 }
//! copula = { family = "independence" }
//! ```

use serde::{Deserialize, Serialize};

use super::experiment::{EstimatorKind, TestKind};
use super::model::ModelSpec;
use crate::error::{Error, Result};
use crate::tail::default_k;

fn default_level() -> f64 {
    0.95
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelSpec,
    /// Common sample fraction: `k_j = floor(f n_j)`.
    #[serde(default)]
    pub k_fraction: Option<f64>,
    /// One sample fraction per sample.
    #[serde(default)]
    pub k_fractions: Option<Vec<f64>>,
    /// Explicit `k_j`.
    #[serde(default)]
    pub k_values: Option<Vec<usize>>,
    /// Absolute tail probabilities for quantile estimators.
    #[serde(default)]
    pub p: Vec<f64>,
    /// Tail probabilities given as `c / n` with `n` the total sample size.
    #[serde(default)]
    pub p_per_n: Vec<f64>,
    #[serde(default)]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub tests: Vec<TestKind>,
    /// Confidence level of reported intervals.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Test size.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Estimate cross-sample tail dependence instead of assuming independence.
    #[serde(default)]
    pub tail_copula: bool,
    /// Tuning parameter of the second-order estimator.
    #[serde(default)]
    pub tau: f64,
    /// Project AMSE-optimal weights onto the simplex.
    #[serde(default)]
    pub project_simplex: bool,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, model: ModelSpec) -> Self {
        ExperimentConfig {
            name: name.into(),
            model,
            k_fraction: None,
            k_fractions: None,
            k_values: None,
            p: Vec::new(),
            p_per_n: Vec::new(),
            estimators: Vec::new(),
            tests: Vec::new(),
            level: default_level(),
            alpha: default_alpha(),
            tail_copula: false,
            tau: 0.0,
            project_simplex: false,
            replications: None,
            seed: None,
        }
    }

    /// Resolved `k_j`, defaulting to `floor(n_j^0.7)`.
    pub fn k_list(&self) -> Result<Vec<usize>> {
        let sizes = &self.model.sizes;
        let given = [
            self.k_fraction.is_some(),
            self.k_fractions.is_some(),
            self.k_values.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if given > 1 {
            return Err(Error::invalid(format!(
                "scenario {}: give at most one of k_fraction, k_fractions, k_values",
                self.name
            )));
        }
        let ks: Vec<usize> = if let Some(f) = self.k_fraction {
            sizes
                .iter()
                .map(|&n| (f * n as f64).floor() as usize)
                .collect()
        } else if let Some(fs) = &self.k_fractions {
            if fs.len() != sizes.len() {
                return Err(Error::LengthMismatch {
                    expected: sizes.len(),
                    got: fs.len(),
                });
            }
            sizes
                .iter()
                .zip(fs)
                .map(|(&n, f)| (f * n as f64).floor() as usize)
                .collect()
        } else if let Some(ks) = &self.k_values {
            if ks.len() != sizes.len() {
                return Err(Error::LengthMismatch {
                    expected: sizes.len(),
                    got: ks.len(),
                });
            }
            ks.clone()
        } else {
            sizes.iter().map(|&n| default_k(n)).collect()
        };
        for (&k, &n) in ks.iter().zip(sizes) {
            if k == 0 || k + 1 > n {
                return Err(Error::KOutOfRange { k, n });
            }
        }
        Ok(ks)
    }

    /// Absolute tail probabilities, `p` first and then `p_per_n`.
    pub fn p_levels(&self) -> Vec<f64> {
        let n: usize = self.model.sizes.iter().sum();
        self.p
            .iter()
            .copied()
            .chain(self.p_per_n.iter().map(|c| c / n as f64))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.k_list()?;
        if self.estimators.is_empty() && self.tests.is_empty() {
            return Err(Error::invalid(format!(
                "scenario {}: nothing to compute (no estimators or tests)",
                self.name
            )));
        }
        let needs_p = self.estimators.iter().any(|e| e.is_quantile())
            || self.tests.contains(&TestKind::Homoskedasticity);
        let ps = self.p_levels();
        if needs_p && ps.is_empty() {
            return Err(Error::invalid(format!(
                "scenario {}: quantile estimators and tests need p or p_per_n",
                self.name
            )));
        }
        if ps.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::invalid("tail probabilities must lie in (0, 1)"));
        }
        for (l, what) in [(self.level, "level"), (self.alpha, "alpha")] {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::invalid(format!("{what} must lie in (0, 1)")));
            }
        }
        if self.replications == Some(0) {
            return Err(Error::invalid("replications must be at least 1"));
        }
        Ok(())
    }
}

/// A file of scenarios with shared defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub replications: Option<usize>,
    pub scenario: Vec<ExperimentConfig>,
}

/// Replications used when neither the scenario nor the file sets a count.
pub const DEFAULT_REPLICATIONS: usize = 200;
pub const DEFAULT_SEED: u64 = 20_240_601;

impl SimulationFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: SimulationFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if f.scenario.is_empty() {
            return Err(Error::invalid("configuration defines no [[scenario]]"));
        }
        for sc in &f.scenario {
            sc.validate()?;
        }
        if f.replications == Some(0) {
            return Err(Error::invalid("replications must be at least 1"));
        }
        Ok(f)
    }

    /// `(scenario, replications, seed)` with file defaults applied; a seed
    /// override replaces every seed.
    pub fn resolve(&self, seed_override: Option<u64>) -> Vec<(ExperimentConfig, usize, u64)> {
        self.scenario
            .iter()
            .map(|sc| {
                let reps = sc
                    .replications
                    .or(self.replications)
                    .unwrap_or(DEFAULT_REPLICATIONS);
                let seed = seed_override
                    .or(sc.seed)
                    .or(self.seed)
                    .unwrap_or(DEFAULT_SEED);
                (sc.clone(), reps, seed)
            })
            .collect()
    }
}
