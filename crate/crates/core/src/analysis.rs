//! Whole-dataset pipelines: pooled estimation and tests on several samples
//! held in memory.

use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dependence::{tail_copula_matrix, Dependence};
use crate::error::{Error, Result};
use crate::inference::{
    gamma_confidence_interval, homogeneity_test, homoskedasticity_test,
    quantile_confidence_interval, v_bar, IntervalEstimate, TestResult,
};
use crate::io::Series;
use crate::pooling::{
    amse_optimal_weights, arithmetic_pooled_weissman, bias_reduced_gamma, estimate_moments,
    geometric_pooled_weissman, pooled_estimate, variance_optimal_weights, PooledEstimate,
    WeightScheme, WeightVector,
};
use crate::tail::{
    default_k, extrapolation_log, hill_estimate, second_order_estimate, weissman_quantile,
    SecondOrderFit, SortedSample, TailFit, SECOND_ORDER_MIN_N,
};

/// How `k_j` is chosen for each sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum KSpec {
    /// `floor(n_j^0.7)`.
    #[default]
    Default,
    /// `floor(f n_j)`.
    Fraction(f64),
    /// Per-sample values; unlisted samples use the default.
    PerSample(HashMap<String, usize>),
}

impl KSpec {
    pub fn resolve(&self, series: &[Series]) -> Result<Vec<usize>> {
        if let KSpec::PerSample(map) = self {
            if let Some(id) = map.keys().find(|id| !series.iter().any(|s| &s.id == *id)) {
                return Err(Error::invalid(format!("k given for unknown sample `{id}`")));
            }
        }
        if let KSpec::Fraction(f) = self {
            if !(*f > 0.0 && *f < 1.0) {
                return Err(Error::invalid("k fraction must lie in (0, 1)"));
            }
        }
        series
            .iter()
            .map(|s| {
                let n = s.values.len();
                let k = match self {
                    KSpec::Default => default_k(n),
                    KSpec::Fraction(f) => (f * n as f64).floor() as usize,
                    KSpec::PerSample(map) => {
                        map.get(&s.id).copied().unwrap_or_else(|| default_k(n))
                    }
                };
                if k == 0 || k + 1 > n {
                    return Err(Error::KOutOfRange { k, n });
                }
                Ok(k)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceMode {
    #[default]
    Independent,
    TailCopula,
}

impl DependenceMode {
    fn build(self, samples: &[Vec<f64>], ks: &[usize]) -> Result<Dependence> {
        Ok(match self {
            DependenceMode::Independent => Dependence::Independent,
            DependenceMode::TailCopula => Dependence::TailCopula(tail_copula_matrix(samples, ks)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolOptions {
    pub k: KSpec,
    pub scheme: WeightScheme,
    pub dependence: DependenceMode,
    pub level: f64,
    pub p_levels: Vec<f64>,
    pub tau: f64,
    pub project_simplex: bool,
}

impl Default for PoolOptions {
    fn default() -> Self {
        PoolOptions {
            k: KSpec::Default,
            scheme: WeightScheme::VarianceOptimal,
            dependence: DependenceMode::Independent,
            level: 0.95,
            p_levels: Vec::new(),
            tau: 0.0,
            project_simplex: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFit {
    pub sample_id: String,
    pub n: usize,
    pub k: usize,
    pub gamma_hat: f64,
    pub threshold: f64,
    pub rho_hat: f64,
    pub beta_hat: f64,
    pub second_order_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledQuantile {
    pub p: f64,
    pub extrapolation_log: f64,
    pub geometric: f64,
    pub interval: IntervalEstimate,
    /// Arithmetic mean of the per-sample Weissman estimates, for comparison.
    pub arithmetic_naive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolReport {
    pub samples: Vec<SampleFit>,
    pub k_total: usize,
    pub n_total: usize,
    pub dependence: DependenceMode,
    pub estimate: PooledEstimate,
    pub interval: IntervalEstimate,
    pub bias_reduced: PooledEstimate,
    pub bias_reduced_interval: IntervalEstimate,
    pub quantiles: Vec<PooledQuantile>,
}

struct Fitted {
    raw: Vec<Vec<f64>>,
    fits: Vec<TailFit>,
    so: Vec<SecondOrderFit>,
}

fn fit_all(series: &[Series], ks: &[usize], tau: f64, second_order: bool) -> Result<Fitted> {
    let mut fits = Vec::with_capacity(series.len());
    let mut so = Vec::with_capacity(series.len());
    for (s, &k) in series.iter().zip(ks) {
        let sample = SortedSample::new(s.id.clone(), s.values.clone())?;
        fits.push(hill_estimate(&sample, k)?);
        so.push(if second_order && sample.n() >= SECOND_ORDER_MIN_N {
            second_order_estimate(&sample, tau)?
        } else {
            SecondOrderFit::degenerate(sample.n() - 1)
        });
    }
    Ok(Fitted {
        raw: series.iter().map(|s| s.values.clone()).collect(),
        fits,
        so,
    })
}

fn check_series(series: &[Series]) -> Result<()> {
    if series.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    Ok(())
}

/// Pooled tail index, its bias-reduced version, intervals, and pooled
/// Weissman quantiles at every requested `p`.
pub fn pool_estimate(series: &[Series], opts: &PoolOptions) -> Result<PoolReport> {
    check_series(series)?;
    let ks = opts.k.resolve(series)?;
    let f = fit_all(series, &ks, opts.tau, true)?;
    let m = series.len();
    let gammas: Vec<f64> = f.fits.iter().map(|x| x.gamma_hat).collect();
    let plugin = gammas.iter().sum::<f64>() / m as f64;
    let dep = opts.dependence.build(&f.raw, &ks)?;
    let mo = estimate_moments(&f.fits, &f.so, &dep, plugin)?;
    let w = match opts.scheme {
        WeightScheme::Naive => WeightVector::naive(m)?,
        WeightScheme::VarianceOptimal => variance_optimal_weights(&mo.cov)?,
        WeightScheme::AmseOptimal => {
            let w = amse_optimal_weights(&mo)?;
            if opts.project_simplex {
                w.project_to_simplex()
            } else {
                w
            }
        }
        WeightScheme::Custom => {
            return Err(Error::invalid("custom weights are not available here"))
        }
    };
    let estimate = pooled_estimate(&gammas, w, &mo, opts.scheme)?;
    let interval = gamma_confidence_interval(&estimate, opts.level)?;
    let bias_reduced = bias_reduced_gamma(&estimate, &mo);
    let bias_reduced_interval = gamma_confidence_interval(&bias_reduced, opts.level)?;
    let k_total: usize = ks.iter().sum();
    let n_total: usize = f.fits.iter().map(|x| x.n).sum();
    let mut quantiles = Vec::with_capacity(opts.p_levels.len());
    for &p in &opts.p_levels {
        let xlog = extrapolation_log(k_total, n_total, p);
        let q = geometric_pooled_weissman(&f.fits, &estimate.weights, p)?;
        quantiles.push(PooledQuantile {
            p,
            extrapolation_log: xlog,
            geometric: q,
            interval: quantile_confidence_interval(
                q,
                &estimate.weights,
                &mo.cov,
                k_total,
                xlog,
                opts.level,
            )?,
            arithmetic_naive: arithmetic_pooled_weissman(&f.fits, &WeightVector::naive(m)?, p)?,
        });
    }
    Ok(PoolReport {
        samples: series
            .iter()
            .zip(f.fits.iter().zip(&f.so))
            .map(|(s, (fit, so))| SampleFit {
                sample_id: s.id.clone(),
                n: fit.n,
                k: fit.k,
                gamma_hat: fit.gamma_hat,
                threshold: fit.threshold,
                rho_hat: so.rho_hat,
                beta_hat: so.beta_hat,
                second_order_degenerate: so.degenerate,
            })
            .collect(),
        k_total,
        n_total,
        dependence: opts.dependence,
        estimate,
        interval,
        bias_reduced,
        bias_reduced_interval,
        quantiles,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestChoice {
    Homogeneity,
    Homoskedasticity,
}

impl FromStr for TestChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneity" => Ok(TestChoice::Homogeneity),
            "homoskedasticity" => Ok(TestChoice::Homoskedasticity),
            other => Err(Error::invalid(format!("unknown test `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolTestReport {
    pub test: TestChoice,
    pub p: Option<f64>,
    pub dependence: DependenceMode,
    pub sample_ids: Vec<String>,
    pub k: Vec<usize>,
    /// Per-sample tail indices, or log Weissman quantiles for the quantile test.
    pub inputs: Vec<f64>,
    pub result: TestResult,
}

/// Homogeneity (no `p`) or homoskedasticity at `p`.
pub fn pool_test(
    series: &[Series],
    k: &KSpec,
    test: TestChoice,
    p: Option<f64>,
    dependence: DependenceMode,
) -> Result<PoolTestReport> {
    check_series(series)?;
    if series.len() < 2 {
        return Err(Error::invalid("tests need at least two samples"));
    }
    let ks = k.resolve(series)?;
    let f = fit_all(series, &ks, 0.0, false)?;
    let dep = dependence.build(&f.raw, &ks)?;
    let vb = v_bar(&f.fits, &dep)?;
    let k_total: usize = ks.iter().sum();
    let (inputs, result) = match test {
        TestChoice::Homogeneity => {
            let g: Vec<f64> = f.fits.iter().map(|x| x.gamma_hat).collect();
            let r = homogeneity_test(&g, &vb, k_total)?;
            (g, r)
        }
        TestChoice::Homoskedasticity => {
            let p =
                p.ok_or_else(|| Error::invalid("the quantile test needs a tail probability p"))?;
            let logs: Vec<f64> = f
                .fits
                .iter()
                .map(|x| weissman_quantile(x, p, None).map(f64::ln))
                .collect::<Result<_>>()?;
            let n_total: usize = f.fits.iter().map(|x| x.n).sum();
            let r =
                homoskedasticity_test(&logs, &vb, k_total, extrapolation_log(k_total, n_total, p))?;
            (logs, r)
        }
    };
    Ok(PoolTestReport {
        test,
        p: if test == TestChoice::Homoskedasticity {
            p
        } else {
            None
        },
        dependence,
        sample_ids: series.iter().map(|s| s.id.clone()).collect(),
        k: ks,
        inputs,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto(id: &str, n: usize, gamma: f64, scale: f64) -> Series {
        Series {
            id: id.into(),
            values: (1..=n)
                .map(|i| scale * (((i * 7919) % n + 1) as f64 / (n + 1) as f64).powf(-gamma))
                .collect(),
        }
    }

    #[test]
    fn single_sample_matches_hill() {
        let s = pareto("a", 500, 0.5, 1.0);
        let opts = PoolOptions {
            p_levels: vec![1e-3],
            ..PoolOptions::default()
        };
        let r = pool_estimate(std::slice::from_ref(&s), &opts).unwrap();
        let sorted = SortedSample::new("a", s.values.clone()).unwrap();
        let fit = hill_estimate(&sorted, default_k(500)).unwrap();
        assert_eq!(r.estimate.gamma, fit.gamma_hat);
        let q = weissman_quantile(&fit, 1e-3, None).unwrap();
        assert!((r.quantiles[0].geometric - q).abs() <= 1e-12 * q);
    }

    #[test]
    fn duplicated_samples() {
        let s = pareto("a", 400, 1.0, 1.0);
        let mut t = s.clone();
        t.id = "b".into();
        let both = [s.clone(), t];
        let opts = PoolOptions {
            scheme: WeightScheme::Naive,
            ..PoolOptions::default()
        };
        let r = pool_estimate(&both, &opts).unwrap();
        let alone = pool_estimate(std::slice::from_ref(&s), &opts).unwrap();
        assert!((r.estimate.gamma - alone.estimate.gamma).abs() < 1e-15);
        for dep in [DependenceMode::Independent, DependenceMode::TailCopula] {
            let h = pool_test(&both, &KSpec::Default, TestChoice::Homogeneity, None, dep).unwrap();
            assert!(h.result.p_value > 0.999, "{h:?}");
            let q = pool_test(
                &both,
                &KSpec::Default,
                TestChoice::Homoskedasticity,
                Some(1e-3),
                dep,
            )
            .unwrap();
            assert!(q.result.p_value > 0.999, "{q:?}");
        }
    }

    #[test]
    fn k_specs() {
        let s = [pareto("a", 100, 1.0, 1.0), pareto("b", 200, 1.0, 1.0)];
        assert_eq!(KSpec::Fraction(0.1).resolve(&s).unwrap(), vec![10, 20]);
        let map = HashMap::from([("b".to_string(), 5)]);
        assert_eq!(
            KSpec::PerSample(map).resolve(&s).unwrap(),
            vec![default_k(100), 5]
        );
        let bad = HashMap::from([("z".to_string(), 5)]);
        assert!(KSpec::PerSample(bad).resolve(&s).is_err());
        let big = HashMap::from([("a".to_string(), 100)]);
        assert!(matches!(
            KSpec::PerSample(big).resolve(&s),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(pool_test(
            &s[..1],
            &KSpec::Default,
            TestChoice::Homogeneity,
            None,
            DependenceMode::Independent
        )
        .is_err());
    }
}
