use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use tailpool::analysis::{
    pool_estimate as run_pool, pool_test as run_test, DependenceMode, PoolOptions,
};
use tailpool::distributed::{
    aggregate as run_aggregate, machine_summarize as summarize, AggregationConfig,
    AggregationReport, MachineSummary,
};
use tailpool::error::{Error, Result};
use tailpool::inference::{gamma_confidence_interval, IntervalEstimate};
use tailpool::io::{read_long_csv, round_json, Series};
use tailpool::parallel::Execution;
use tailpool::pooling::{PooledEstimate, WeightScheme};
use tailpool::simulation::{run_experiment, write_results_csv, SimulationFile};
use tailpool::tail::SortedSample;

use crate::args::{
    AggregateArgs, MachineSummarizeArgs, PoolEstimateArgs, PoolTestArgs, SimulateArgs,
};
use crate::output::{envelope, io_error, write_json, write_text};

/// Environment variable that replaces `--seed`.
pub const SEED_ENV: &str = "TAILPOOL_SEED";

fn read_series(path: &Path) -> Result<Vec<Series>> {
    read_long_csv(File::open(path).map_err(|e| io_error(path, e))?)
}

fn dependence(independence: bool) -> DependenceMode {
    if independence {
        DependenceMode::Independent
    } else {
        DependenceMode::TailCopula
    }
}

pub fn pool_estimate(a: PoolEstimateArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let opts = PoolOptions {
        k: a.k.spec()?,
        scheme: a.scheme.into(),
        dependence: dependence(a.independence),
        level: a.level,
        p_levels: a.p,
        tau: a.tau,
        project_simplex: a.project_simplex,
    };
    let report = run_pool(&series, &opts)?;
    write_json(&envelope("pool-estimate", &report)?, a.output.as_deref())
}

pub fn pool_test(a: PoolTestArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let report = run_test(
        &series,
        &a.k.spec()?,
        a.test.into(),
        a.p,
        dependence(a.independence),
    )?;
    write_json(&envelope("pool-test", &report)?, a.output.as_deref())
}

pub fn machine_summarize(a: MachineSummarizeArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let ks = a.k.spec()?.resolve(&series)?;
    let summaries = series
        .into_iter()
        .zip(ks)
        .map(|(s, k)| summarize(&SortedSample::new(s.id, s.values)?, k, a.tau))
        .collect::<Result<Vec<_>>>()?;
    let value = if summaries.len() == 1 {
        serde_json::to_value(&summaries[0])?
    } else {
        serde_json::to_value(&summaries)?
    };
    write_json(&round_json(value), Some(&a.output))
}

fn is_pattern(s: &str) -> bool {
    s.contains(['*', '?', '['])
}

fn expand(inputs: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if !is_pattern(input) {
            out.push(PathBuf::from(input));
            continue;
        }
        let paths = glob::glob(input)
            .map_err(|e| Error::InvalidInput(format!("bad pattern `{input}`: {e}")))?;
        let before = out.len();
        for p in paths {
            out.push(p.map_err(|e| Error::Io(e.to_string()))?);
        }
        if out.len() == before {
            return Err(Error::InvalidInput(format!("`{input}` matches no files")));
        }
    }
    Ok(out)
}

/// A summary file holds one object or an array of objects.
pub fn read_summaries(path: &Path) -> Result<Vec<MachineSummary>> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let parsed: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let parse = |v: Value| {
        serde_json::from_value::<MachineSummary>(v)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    };
    match parsed {
        Value::Array(items) => items.into_iter().map(parse).collect(),
        other => Ok(vec![parse(other)?]),
    }
}

#[derive(Serialize)]
struct SelectedQuantile {
    p: f64,
    estimate: f64,
    interval: IntervalEstimate,
}

#[derive(Serialize)]
struct Selected {
    scheme: WeightScheme,
    estimate: PooledEstimate,
    interval: IntervalEstimate,
    bias_reduced: Option<PooledEstimate>,
    bias_reduced_interval: Option<IntervalEstimate>,
    quantiles: Vec<SelectedQuantile>,
}

#[derive(Serialize)]
struct AggregateOutput {
    selected: Selected,
    full: AggregationReport,
}

fn select(full: &AggregationReport, scheme: WeightScheme, level: f64) -> Result<Selected> {
    let (estimate, bias_reduced) = match scheme {
        WeightScheme::Naive => (&full.gamma_naive, None),
        WeightScheme::VarianceOptimal => (&full.gamma_var_opt, Some(&full.gamma_bias_reduced_var)),
        _ => (&full.gamma_amse_opt, Some(&full.gamma_bias_reduced_amse)),
    };
    let quantiles = full
        .quantiles
        .iter()
        .filter_map(|q| {
            q.estimates
                .iter()
                .find(|e| e.scheme == estimate.scheme)
                .map(|e| SelectedQuantile {
                    p: q.p,
                    estimate: e.estimate,
                    interval: e.interval,
                })
        })
        .collect();
    Ok(Selected {
        scheme: estimate.scheme,
        estimate: estimate.clone(),
        interval: gamma_confidence_interval(estimate, level)?,
        bias_reduced_interval: bias_reduced
            .map(|b| gamma_confidence_interval(b, level))
            .transpose()?,
        bias_reduced: bias_reduced.cloned(),
        quantiles,
    })
}

pub fn aggregate(a: AggregateArgs) -> Result<()> {
    let mut summaries = Vec::new();
    for path in expand(&a.summaries)? {
        summaries.extend(read_summaries(&path)?);
    }
    let cfg = AggregationConfig {
        p_levels: a.p,
        level: a.level,
        project_simplex: a.project_simplex,
        ..AggregationConfig::default()
    };
    let full = run_aggregate(&summaries, &cfg)?;
    let out = AggregateOutput {
        selected: select(&full, a.scheme.into(), a.level)?,
        full,
    };
    write_json(&envelope("aggregate", &out)?, a.output.as_deref())
}

/// `TAILPOOL_SEED` if set, else `--seed`.
pub fn effective_seed(flag: Option<u64>, env: Option<&str>) -> Result<Option<u64>> {
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s.parse().map(Some).map_err(|_| {
            Error::InvalidInput(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))
        }),
        None => Ok(flag),
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| io_error(&a.config, e))?;
    let file = SimulationFile::from_toml_str(&text)?;
    let env = std::env::var(SEED_ENV).ok();
    let seed = effective_seed(a.seed, env.as_deref())?;
    if a.replications == Some(0) {
        return Err(Error::InvalidInput(
            "replications must be at least 1".into(),
        ));
    }
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut results = Vec::new();
    for (cfg, reps, seed) in file.resolve(seed) {
        results.push(run_experiment(
            &cfg,
            a.replications.unwrap_or(reps),
            seed,
            exec,
        )?);
    }
    let mut buf = Vec::new();
    write_results_csv(&results, &mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;
    write_text(&text, a.output.as_deref())
}
