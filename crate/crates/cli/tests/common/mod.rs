#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use tailpool::io::format_sig;
use tailpool::simulation::{sample_model_seeded, ColumnOverride, Copula, Marginal, ModelSpec};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tailpool"));
    c.env_remove("TAILPOOL_SEED");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

pub fn fixture(name: &str) -> PathBuf {
    dir().join("fixtures").join(name)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Compares `actual` with a stored file, or rewrites the file when
/// `TAILPOOL_BLESS` is set.
pub fn check_golden(path: &Path, actual: &str) {
    if std::env::var_os("TAILPOOL_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with TAILPOOL_BLESS=1", path.display()));
    assert_eq!(expected, actual, "{} is stale", path.display());
}

pub fn long_csv(ids: &[&str], cols: &[Vec<f64>]) -> String {
    let mut s = String::from("sample_id,value\n");
    for (id, col) in ids.iter().zip(cols) {
        for v in col {
            s.push_str(&format!("{id},{}\n", format_sig(*v)));
        }
    }
    s
}

/// Three tail-dependent samples of unequal length.
pub fn pool_fixture() -> String {
    let spec = ModelSpec::new(
        Marginal::Burr {
            gamma: 0.5,
            rho: -1.0,
        },
        Copula::Gumbel { theta: 1.5 },
        vec![800, 600, 400],
    );
    long_csv(&["a", "b", "c"], &sample_model_seeded(&spec, 101).unwrap())
}

/// Five independent machines with a strong second-order bias.
pub fn machines_fixture() -> String {
    let spec = ModelSpec::new(
        Marginal::Burr {
            gamma: 1.0,
            rho: -0.5,
        },
        Copula::Independence,
        vec![3000, 2500, 2000, 1500, 1000],
    );
    long_csv(
        &["node-1", "node-2", "node-3", "node-4", "node-5"],
        &sample_model_seeded(&spec, 102).unwrap(),
    )
}

/// Independent Frechet samples; `alt` alters the last one.
pub fn frechet_csv(alt: Option<ColumnOverride>, seed: u64) -> String {
    let mut spec = ModelSpec::balanced(
        Marginal::Frechet { gamma: 1.0 },
        Copula::Independence,
        3,
        2000,
    );
    if let Some(o) = alt {
        spec = spec.with_override(o);
    }
    long_csv(&["x", "y", "z"], &sample_model_seeded(&spec, seed).unwrap())
}
