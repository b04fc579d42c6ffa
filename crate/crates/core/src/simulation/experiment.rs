//! Monte Carlo runner: repeated sampling, every configured estimator and
//! test per replication, then MSE, bias, coverage and rejection rates.

use std::cell::OnceCell;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::model::{replication_rng, sample_model};
use crate::dependence::{tail_copula_matrix, Dependence};
use crate::distributed::{
    aggregate_amse_optimal, aggregate_variance_optimal, distributed_moments, distributed_quantile,
    lambda0_threshold, pooled_second_order, MachineSummary, PoolingSchemes,
};
use crate::error::{Error, Result};
use crate::inference::{
    gamma_confidence_interval, homogeneity_test, homoskedasticity_test,
    quantile_confidence_interval, v_bar, IntervalEstimate,
};
use crate::io::format_sig;
use crate::numerics::normal_quantile;
use crate::parallel::{map_indexed, Execution};
use crate::pooling::{
    amse_optimal_weights, arithmetic_pooled_weissman, bias_reduced_gamma, estimate_moments,
    geometric_pooled_weissman, pooled_estimate, variance_optimal_weights, PooledEstimate,
    PooledMoments, WeightScheme, WeightVector,
};
use crate::tail::{
    extrapolation_log, hill_estimate, second_order_estimate, weissman_quantile, SecondOrderFit,
    SortedSample, TailFit, SECOND_ORDER_MIN_N,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Hill on all samples merged, `k = sum k_j`.
    HillCombined,
    Naive,
    VarianceOptimal,
    AmseOptimal,
    BiasReducedVariance,
    BiasReducedAmse,
    DistributedVariance,
    DistributedAmse,
    DistributedBiasReducedVariance,
    DistributedBiasReducedAmse,
    /// Weissman on all samples merged.
    WeissmanCombined,
    GeometricNaive,
    GeometricVariance,
    GeometricAmse,
    ArithmeticNaive,
    DistributedGeometricVariance,
    DistributedGeometricAmse,
}

impl EstimatorKind {
    pub fn is_quantile(self) -> bool {
        use EstimatorKind::*;
        matches!(
            self,
            WeissmanCombined
                | GeometricNaive
                | GeometricVariance
                | GeometricAmse
                | ArithmeticNaive
                | DistributedGeometricVariance
                | DistributedGeometricAmse
        )
    }

    fn needs_second_order(self) -> bool {
        use EstimatorKind::*;
        matches!(
            self,
            AmseOptimal
                | BiasReducedVariance
                | BiasReducedAmse
                | DistributedAmse
                | DistributedBiasReducedVariance
                | DistributedBiasReducedAmse
                | GeometricAmse
                | DistributedGeometricAmse
        )
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Homogeneity,
    Homoskedasticity,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Homogeneity => "homogeneity",
            TestKind::Homoskedasticity => "homoskedasticity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    pub p: Option<f64>,
    pub truth: f64,
    pub mse: f64,
    pub bias: f64,
    pub coverage: Option<f64>,
    pub n_ok: usize,
    /// Per-replication estimates (`NaN` where the estimator failed).
    #[serde(skip)]
    pub draws: Vec<f64>,
}

impl EstimatorSummary {
    /// Per-replication squared errors (`NaN` where the estimator failed).
    pub fn squared_errors(&self) -> Vec<f64> {
        self.draws
            .iter()
            .map(|x| (x - self.truth).powi(2))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub test: TestKind,
    pub p: Option<f64>,
    pub alpha: f64,
    pub rejection_rate: f64,
    pub mean_statistic: f64,
    pub n_ok: usize,
}

/// Deterministic design quantities and averaged plug-ins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignInfo {
    pub k: Vec<usize>,
    pub k_total: usize,
    pub n_total: usize,
    /// `sqrt(k) A(n/k)` of the merged sample, when the model has a known `A`.
    pub lambda_true: Option<f64>,
    /// Comparison threshold at the true parameters (unequal fractions only).
    pub lambda0_true: Option<f64>,
    /// Mean of the pooled plug-in bias magnitude, when computed.
    pub lambda_hat_mean: Option<f64>,
    /// Mean of the plug-in comparison threshold, over replications where it
    /// is defined.
    pub lambda0_hat_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub seed: u64,
    pub replications: usize,
    /// Replications in which the data could not be generated or fitted.
    pub failures: usize,
    pub design: DesignInfo,
    pub estimators: Vec<EstimatorSummary>,
    pub tests: Vec<TestSummary>,
}

impl ExperimentResult {
    pub fn estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == kind)
    }

    pub fn estimator_at(&self, kind: EstimatorKind, p: f64) -> Option<&EstimatorSummary> {
        self.estimators
            .iter()
            .find(|e| e.estimator == kind && e.p.is_some_and(|q| (q - p).abs() <= 1e-15 * p))
    }

    pub fn test(&self, kind: TestKind) -> Option<&TestSummary> {
        self.tests.iter().find(|t| t.test == kind)
    }
}

struct Slot {
    estimator: EstimatorKind,
    p: Option<f64>,
}

struct TestSlot {
    test: TestKind,
    p: Option<f64>,
}

type Estimate = Option<(f64, Option<IntervalEstimate>)>;

struct Outcome {
    estimates: Vec<Estimate>,
    tests: Vec<Option<(f64, bool)>>,
    lambda_hat: Option<f64>,
    lambda0_hat: Option<f64>,
}

/// Runs `replications` independent replications of the scenario. Replication
/// `r` draws from stream `r` of the seeded generator, and results are reduced
/// in replication order, so the output is identical for every [`Execution`].
pub fn run_experiment(
    cfg: &ExperimentConfig,
    replications: usize,
    seed: u64,
    exec: Execution,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    if replications == 0 {
        return Err(Error::invalid("replications must be at least 1"));
    }
    let ks = cfg.k_list()?;
    let ps = cfg.p_levels();
    let mut slots = Vec::new();
    for &e in &cfg.estimators {
        if e.is_quantile() {
            slots.extend(ps.iter().map(|&p| Slot {
                estimator: e,
                p: Some(p),
            }));
        } else {
            slots.push(Slot {
                estimator: e,
                p: None,
            });
        }
    }
    let mut test_slots = Vec::new();
    for &t in &cfg.tests {
        match t {
            TestKind::Homogeneity => test_slots.push(TestSlot { test: t, p: None }),
            TestKind::Homoskedasticity => test_slots.extend(ps.iter().map(|&p| TestSlot {
                test: t,
                p: Some(p),
            })),
        }
    }
    let z = normal_quantile(0.5 + cfg.level / 2.0)?;

    let outcomes: Vec<Option<Outcome>> = map_indexed(exec, replications, |r| {
        let mut rng = replication_rng(seed, r as u64);
        replicate(cfg, &ks, &slots, &test_slots, z, &mut rng).ok()
    });

    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    let gamma_true = cfg.model.marginal.gamma();
    let mut estimators = Vec::with_capacity(slots.len());
    for (i, slot) in slots.iter().enumerate() {
        let truth = match slot.p {
            Some(p) => cfg.model.true_quantile(p)?,
            None => gamma_true,
        };
        let draws: Vec<f64> = outcomes
            .iter()
            .map(|o| {
                o.as_ref()
                    .and_then(|o| o.estimates[i].map(|e| e.0))
                    .unwrap_or(f64::NAN)
            })
            .collect();
        let ok: Vec<f64> = draws.iter().copied().filter(|x| x.is_finite()).collect();
        let n_ok = ok.len();
        let nf = n_ok as f64;
        let bias = ok.iter().map(|x| x - truth).sum::<f64>() / nf;
        let mse = ok.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / nf;
        let intervals: Vec<IntervalEstimate> = outcomes
            .iter()
            .filter_map(|o| o.as_ref().and_then(|o| o.estimates[i].and_then(|e| e.1)))
            .collect();
        let coverage = (!intervals.is_empty()).then(|| {
            intervals.iter().filter(|ci| ci.contains(truth)).count() as f64 / intervals.len() as f64
        });
        estimators.push(EstimatorSummary {
            estimator: slot.estimator,
            p: slot.p,
            truth,
            mse,
            bias,
            coverage,
            n_ok,
            draws,
        });
    }
    let mut tests = Vec::with_capacity(test_slots.len());
    for (i, slot) in test_slots.iter().enumerate() {
        let res: Vec<(f64, bool)> = outcomes
            .iter()
            .filter_map(|o| o.as_ref().and_then(|o| o.tests[i]))
            .collect();
        let nf = res.len() as f64;
        tests.push(TestSummary {
            test: slot.test,
            p: slot.p,
            alpha: cfg.alpha,
            rejection_rate: res.iter().filter(|r| r.1).count() as f64 / nf,
            mean_statistic: res.iter().map(|r| r.0).sum::<f64>() / nf,
            n_ok: res.len(),
        });
    }

    let lambdas: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().and_then(|o| o.lambda_hat))
        .collect();
    let lambda0s: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.as_ref().and_then(|o| o.lambda0_hat))
        .collect();
    Ok(ExperimentResult {
        name: cfg.name.clone(),
        seed,
        replications,
        failures,
        design: design_info(cfg, &ks, &lambdas, &lambda0s),
        estimators,
        tests,
    })
}

fn mean(x: &[f64]) -> Option<f64> {
    (!x.is_empty()).then(|| x.iter().sum::<f64>() / x.len() as f64)
}

fn design_info(
    cfg: &ExperimentConfig,
    ks: &[usize],
    lambdas: &[f64],
    lambda0s: &[f64],
) -> DesignInfo {
    let k_total: usize = ks.iter().sum();
    let n_total: usize = cfg.model.sizes.iter().sum();
    let mg = cfg.model.marginal;
    let lambda_true = mg
        .second_order()
        .map(|_| (k_total as f64).sqrt() * mg.a_function(n_total as f64 / k_total as f64));
    let lambda0_true = mg
        .second_order()
        .and_then(|(rho, _)| lambda0_threshold(mg.gamma(), rho, ks, &cfg.model.sizes).ok());
    DesignInfo {
        k: ks.to_vec(),
        k_total,
        n_total,
        lambda_true,
        lambda0_true,
        lambda_hat_mean: mean(lambdas),
        lambda0_hat_mean: mean(lambda0s),
    }
}

fn replicate<R: Rng>(
    cfg: &ExperimentConfig,
    ks: &[usize],
    slots: &[Slot],
    test_slots: &[TestSlot],
    z: f64,
    rng: &mut R,
) -> Result<Outcome> {
    let cols = sample_model(&cfg.model, rng)?;
    let m = cols.len();
    let samples: Vec<SortedSample> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| SortedSample::new(format!("s{j:04}"), c.clone()))
        .collect::<Result<_>>()?;
    let fits: Vec<TailFit> = samples
        .iter()
        .zip(ks)
        .map(|(s, &k)| hill_estimate(s, k))
        .collect::<Result<_>>()?;
    let gammas: Vec<f64> = fits.iter().map(|f| f.gamma_hat).collect();
    let k_total: usize = ks.iter().sum();
    let n_total: usize = cfg.model.sizes.iter().sum();

    let needs_so = cfg.estimators.iter().any(|e| e.needs_second_order());
    let so: Vec<SecondOrderFit> = if needs_so {
        samples
            .iter()
            .map(|s| {
                if s.n() < SECOND_ORDER_MIN_N {
                    Ok(SecondOrderFit::degenerate(s.n() - 1))
                } else {
                    second_order_estimate(s, cfg.tau)
                }
            })
            .collect::<Result<_>>()?
    } else {
        samples
            .iter()
            .map(|s| SecondOrderFit::degenerate(s.n() - 1))
            .collect()
    };

    let dependence = OnceCell::new();
    let dep = || -> Result<&Dependence> {
        if let Some(d) = dependence.get() {
            return Ok(d);
        }
        let d = if cfg.tail_copula {
            Dependence::TailCopula(tail_copula_matrix(&cols, ks)?)
        } else {
            Dependence::Independent
        };
        Ok(dependence.get_or_init(|| d))
    };
    let moments_cell: OnceCell<Option<PooledMoments>> = OnceCell::new();
    let moments = || -> Result<&PooledMoments> {
        let mo = moments_cell.get_or_init(|| {
            let plugin = gammas.iter().sum::<f64>() / m as f64;
            dep()
                .and_then(|d| estimate_moments(&fits, &so, d, plugin))
                .ok()
        });
        mo.as_ref()
            .ok_or_else(|| Error::Degenerate("covariance estimate failed".into()))
    };
    let pooled = |scheme: WeightScheme| -> Result<PooledEstimate> {
        let mo = moments()?;
        let w = match scheme {
            WeightScheme::Naive => WeightVector::naive(m)?,
            WeightScheme::VarianceOptimal => variance_optimal_weights(&mo.cov)?,
            _ => {
                let w = amse_optimal_weights(mo)?;
                if cfg.project_simplex {
                    w.project_to_simplex()
                } else {
                    w
                }
            }
        };
        pooled_estimate(&gammas, w, mo, scheme)
    };
    let summaries: Vec<MachineSummary> = samples
        .iter()
        .zip(&fits)
        .zip(&so)
        .map(|((s, f), so)| MachineSummary {
            machine_id: s.origin_id().to_string(),
            n: f.n,
            k: f.k,
            gamma_hat: f.gamma_hat,
            threshold: f.threshold,
            beta_hat: so.beta_hat,
            rho_hat: so.rho_hat,
        })
        .collect();
    let schemes = PoolingSchemes::default();
    let dist_var = OnceCell::new();
    let dist_var = || dist_var.get_or_init(|| aggregate_variance_optimal(&summaries).ok());
    let dist_amse = OnceCell::new();
    let dist_amse = || {
        dist_amse.get_or_init(|| {
            aggregate_amse_optimal(&summaries, schemes)
                .ok()
                .map(|mut e| {
                    if cfg.project_simplex {
                        e.weights = e.weights.project_to_simplex();
                        e.gamma = e
                            .weights
                            .as_slice()
                            .iter()
                            .zip(&gammas)
                            .map(|(w, g)| w * g)
                            .sum();
                    }
                    e
                })
        })
    };
    let dist_moments = OnceCell::new();
    let dist_moments =
        || dist_moments.get_or_init(|| distributed_moments(&summaries, schemes).ok());
    let combined = OnceCell::new();
    let combined = || {
        combined.get_or_init(|| {
            let all: Vec<f64> = cols.iter().flatten().copied().collect();
            SortedSample::new("combined", all)
                .and_then(|s| hill_estimate(&s, k_total))
                .ok()
        })
    };
    let need = |x: Option<PooledEstimate>| {
        x.ok_or_else(|| Error::Degenerate("estimate unavailable".into()))
    };
    let gamma_interval = |e: &PooledEstimate| gamma_confidence_interval(e, cfg.level).ok();

    let mut estimates = Vec::with_capacity(slots.len());
    for slot in slots {
        use EstimatorKind::*;
        let res: Result<(f64, Option<IntervalEstimate>)> = (|| match (slot.estimator, slot.p) {
            (HillCombined, _) => {
                let f =
                    combined().ok_or_else(|| Error::Degenerate("combined fit failed".into()))?;
                let h = z * f.gamma_hat / (f.k as f64).sqrt();
                Ok((
                    f.gamma_hat,
                    Some(IntervalEstimate {
                        center: f.gamma_hat,
                        lower: f.gamma_hat - h,
                        upper: f.gamma_hat + h,
                        level: cfg.level,
                    }),
                ))
            }
            (Naive, _) => pooled(WeightScheme::Naive).map(|e| (e.gamma, gamma_interval(&e))),
            (VarianceOptimal, _) => {
                pooled(WeightScheme::VarianceOptimal).map(|e| (e.gamma, gamma_interval(&e)))
            }
            (AmseOptimal, _) => {
                pooled(WeightScheme::AmseOptimal).map(|e| (e.gamma, gamma_interval(&e)))
            }
            (BiasReducedVariance, _) => {
                let e = bias_reduced_gamma(&pooled(WeightScheme::VarianceOptimal)?, moments()?);
                Ok((e.gamma, gamma_interval(&e)))
            }
            (BiasReducedAmse, _) => {
                let e = bias_reduced_gamma(&pooled(WeightScheme::AmseOptimal)?, moments()?);
                Ok((e.gamma, gamma_interval(&e)))
            }
            (DistributedVariance, _) => {
                need(dist_var().clone()).map(|e| (e.gamma, gamma_interval(&e)))
            }
            (DistributedAmse, _) => {
                need(dist_amse().clone()).map(|e| (e.gamma, gamma_interval(&e)))
            }
            (DistributedBiasReducedVariance, _) => {
                let mo = dist_moments()
                    .as_ref()
                    .ok_or_else(|| Error::Degenerate("moments".into()))?;
                let e = bias_reduced_gamma(&need(dist_var().clone())?, mo);
                Ok((e.gamma, gamma_interval(&e)))
            }
            (DistributedBiasReducedAmse, _) => {
                let mo = dist_moments()
                    .as_ref()
                    .ok_or_else(|| Error::Degenerate("moments".into()))?;
                let e = bias_reduced_gamma(&need(dist_amse().clone())?, mo);
                Ok((e.gamma, gamma_interval(&e)))
            }
            (WeissmanCombined, Some(p)) => {
                let f =
                    combined().ok_or_else(|| Error::Degenerate("combined fit failed".into()))?;
                let q = weissman_quantile(&f, p, None)?;
                let h = z * extrapolation_log(f.k, f.n, p) * f.gamma_hat / (f.k as f64).sqrt();
                Ok((
                    q,
                    Some(IntervalEstimate {
                        center: q,
                        lower: q * (-h).exp(),
                        upper: q * h.exp(),
                        level: cfg.level,
                    }),
                ))
            }
            (GeometricNaive | GeometricVariance | GeometricAmse, Some(p)) => {
                let scheme = match slot.estimator {
                    GeometricNaive => WeightScheme::Naive,
                    GeometricVariance => WeightScheme::VarianceOptimal,
                    _ => WeightScheme::AmseOptimal,
                };
                let e = pooled(scheme)?;
                let q = geometric_pooled_weissman(&fits, &e.weights, p)?;
                let ci = quantile_confidence_interval(
                    q,
                    &e.weights,
                    &moments()?.cov,
                    k_total,
                    extrapolation_log(k_total, n_total, p),
                    cfg.level,
                )
                .ok();
                Ok((q, ci))
            }
            (ArithmeticNaive, Some(p)) => Ok((
                arithmetic_pooled_weissman(&fits, &WeightVector::naive(m)?, p)?,
                None,
            )),
            (DistributedGeometricVariance | DistributedGeometricAmse, Some(p)) => {
                let e = if slot.estimator == DistributedGeometricVariance {
                    need(dist_var().clone())?
                } else {
                    need(dist_amse().clone())?
                };
                let q = distributed_quantile(&summaries, &e.weights, p)?;
                let mo = dist_moments()
                    .as_ref()
                    .ok_or_else(|| Error::Degenerate("moments".into()))?;
                let ci = quantile_confidence_interval(
                    q,
                    &e.weights,
                    &mo.cov,
                    k_total,
                    extrapolation_log(k_total, n_total, p),
                    cfg.level,
                )
                .ok();
                Ok((q, ci))
            }
            (_, None) => Err(Error::invalid("quantile estimator without p")),
        })();
        estimates.push(res.ok().filter(|(x, _)| x.is_finite()));
    }

    let mut tests = Vec::with_capacity(test_slots.len());
    if !test_slots.is_empty() {
        let vb = dep().and_then(|d| v_bar(&fits, d));
        for slot in test_slots {
            let r = vb.as_ref().ok().and_then(|vb| match (slot.test, slot.p) {
                (TestKind::Homogeneity, _) => homogeneity_test(&gammas, vb, k_total).ok(),
                (TestKind::Homoskedasticity, Some(p)) => {
                    let logs: Option<Vec<f64>> = fits
                        .iter()
                        .map(|f| weissman_quantile(f, p, None).ok().map(f64::ln))
                        .collect();
                    logs.and_then(|l| {
                        homoskedasticity_test(
                            &l,
                            vb,
                            k_total,
                            extrapolation_log(k_total, n_total, p),
                        )
                        .ok()
                    })
                }
                _ => None,
            });
            tests.push(r.map(|t| (t.statistic, t.rejects_at(cfg.alpha))));
        }
    }

    let (lambda_hat, lambda0_hat) = match needs_so
        .then(|| pooled_second_order(&summaries, schemes).ok())
        .flatten()
    {
        Some(so) => {
            let ns: Vec<usize> = summaries.iter().map(|s| s.n).collect();
            let l0 = (so.rho < 0.0)
                .then(|| lambda0_threshold(so.gamma, so.rho, ks, &ns).ok())
                .flatten();
            (Some(so.lambda), l0)
        }
        None => (None, None),
    };
    Ok(Outcome {
        estimates,
        tests,
        lambda_hat,
        lambda0_hat,
    })
}

/// Mean of `a_i - b_i` over pairs where both are finite, with a percentile
/// bootstrap interval at `level`.
pub fn paired_bootstrap_mean_diff(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| x - y)
        .collect();
    if d.is_empty() || resamples == 0 {
        return Err(Error::invalid(
            "bootstrap needs data and at least one resample",
        ));
    }
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n as f64;
    let mut rng = replication_rng(seed, u64::MAX);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| d[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let idx = |q: f64| ((q * resamples as f64).floor() as usize).min(resamples - 1);
    Ok((mean, means[idx(tail)], means[idx(1.0 - tail)]))
}

const CSV_HEADER: [&str; 14] = [
    "scenario",
    "kind",
    "name",
    "p",
    "truth",
    "mse",
    "bias",
    "coverage",
    "rejection_rate",
    "mean_statistic",
    "n_ok",
    "replications",
    "failures",
    "seed",
];

/// One row per estimator and per test, numbers at ten significant digits.
pub fn write_results_csv<W: Write>(results: &[ExperimentResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
    for r in results {
        for e in &r.estimators {
            w.write_record([
                r.name.clone(),
                "estimator".into(),
                e.estimator.name(),
                opt(e.p),
                format_sig(e.truth),
                format_sig(e.mse),
                format_sig(e.bias),
                opt(e.coverage),
                String::new(),
                String::new(),
                e.n_ok.to_string(),
                r.replications.to_string(),
                r.failures.to_string(),
                r.seed.to_string(),
            ])?;
        }
        for t in &r.tests {
            w.write_record([
                r.name.clone(),
                "test".into(),
                t.test.name().into(),
                opt(t.p),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format_sig(t.rejection_rate),
                format_sig(t.mean_statistic),
                t.n_ok.to_string(),
                r.replications.to_string(),
                r.failures.to_string(),
                r.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
