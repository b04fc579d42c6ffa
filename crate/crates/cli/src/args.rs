use std::collections::HashMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tailpool::analysis::{KSpec, TestChoice};
use tailpool::error::{Error, Result};
use tailpool::pooling::WeightScheme;

/// Pooled and distributed tail index and extreme quantile estimation.
#[derive(Debug, Parser)]
#[command(name = "tailpool", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pooled tail index, intervals and extreme quantiles from a long CSV.
    PoolEstimate(PoolEstimateArgs),
    /// Tail homogeneity or homoskedasticity test from a long CSV.
    PoolTest(PoolTestArgs),
    /// Per-machine summaries from a long CSV, one per sample.
    MachineSummarize(MachineSummarizeArgs),
    /// Distributed estimates from machine summary files.
    Aggregate(AggregateArgs),
    /// Run a Monte Carlo experiment file and write results as CSV.
    Simulate(SimulateArgs),
}

/// `k_j` selection shared by the data commands.
#[derive(Debug, Args)]
pub struct KArgs {
    /// Common sample fraction: k_j = floor(f n_j).
    #[arg(long = "k-frac", value_name = "F", conflicts_with = "k")]
    pub k_frac: Option<f64>,
    /// Explicit k for a sample, as SAMPLE_ID=VALUE; repeatable or comma separated.
    #[arg(long = "k", value_name = "ID=K", value_delimiter = ',')]
    pub k: Vec<String>,
}

impl KArgs {
    pub fn spec(&self) -> Result<KSpec> {
        if let Some(f) = self.k_frac {
            return Ok(KSpec::Fraction(f));
        }
        if self.k.is_empty() {
            return Ok(KSpec::Default);
        }
        let mut map = HashMap::new();
        for pair in &self.k {
            let (id, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("--k expects ID=K, got `{pair}`")))?;
            let k: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("--k value `{v}` is not an integer")))?;
            if map.insert(id.trim().to_string(), k).is_some() {
                return Err(Error::InvalidInput(format!("--k given twice for `{id}`")));
            }
        }
        Ok(KSpec::PerSample(map))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Scheme {
    Naive,
    VarianceOptimal,
    AmseOptimal,
}

impl From<Scheme> for WeightScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Naive => WeightScheme::Naive,
            Scheme::VarianceOptimal => WeightScheme::VarianceOptimal,
            Scheme::AmseOptimal => WeightScheme::AmseOptimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Homogeneity,
    Homoskedasticity,
}

impl From<TestArg> for TestChoice {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Homogeneity => TestChoice::Homogeneity,
            TestArg::Homoskedasticity => TestChoice::Homoskedasticity,
        }
    }
}

#[derive(Debug, Args)]
pub struct PoolEstimateArgs {
    /// Long-format CSV with header `sample_id,value`.
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, value_enum, default_value = "variance_optimal")]
    pub scheme: Scheme,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Tail probabilities for extreme quantiles; repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Treat samples as independent instead of estimating tail dependence.
    #[arg(long)]
    pub independence: bool,
    /// Project AMSE-optimal weights onto the simplex.
    #[arg(long)]
    pub project_simplex: bool,
    /// Second-order tuning parameter.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoolTestArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    #[arg(long, value_enum)]
    pub test: TestArg,
    /// Tail probability for the homoskedasticity test.
    #[arg(long)]
    pub p: Option<f64>,
    /// Treat samples as independent instead of estimating tail dependence.
    #[arg(long)]
    pub independence: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MachineSummarizeArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    /// Second-order tuning parameter.
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Summary file; a single object for one sample, an array otherwise.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Summary files or glob patterns.
    #[arg(required = true)]
    pub summaries: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Scheme reported as the headline estimate; all schemes are included.
    #[arg(long, value_enum, default_value = "variance_optimal")]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long)]
    pub project_simplex: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML experiment file.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Seed for every scenario; the TAILPOOL_SEED environment variable wins.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications for every scenario, overriding the file.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Run replications on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Results CSV; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
