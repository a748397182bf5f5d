//! Benchmark harness over a directory of `.cfm` instance files.
//!
//! Each `name.cfm` may have a sidecar `name.expect.toml`:
//!
//! ```toml
//! cells = 3          # solve with exactly this many cells
//! pe = 9.52          # expected percentages (any subset)
//! mu = 76.00
//! ge = 70.37
//! tolerance = 0.01   # overrides --tolerance for this instance
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cellform_core::{parse_instance, score, solve, ClusterConfig, MetricsReport};
use serde::Deserialize;

/// Default absolute tolerance, in percentage points.
pub const DEFAULT_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub cells: Option<usize>,
    pub pe: Option<f64>,
    pub mu: Option<f64>,
    pub ge: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub metric: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn delta(&self) -> f64 {
        self.actual - self.expected
    }

    pub fn passed(&self) -> bool {
        self.delta().abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub machines: usize,
    pub parts: usize,
    pub n_cells: usize,
    pub metrics: MetricsReport,
    pub checks: Vec<Check>,
}

impl BenchRow {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub skipped: Vec<String>,
}

impl BenchReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:>8} {:>5} {:>9} {:>5} {:>7} {:>7} {:>7}  checks",
            "instance", "machines", "parts", "size(mxp)", "NCell", "PE", "MU", "GE"
        );
        for row in &self.rows {
            let checks: Vec<String> = row
                .checks
                .iter()
                .map(|c| {
                    format!(
                        "{} {:+.2} {}",
                        c.metric,
                        c.delta(),
                        if c.passed() { "ok" } else { "FAIL" }
                    )
                })
                .collect();
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>5} {:>9} {:>5} {:>7.2} {:>7.2} {:>7.2}  {}",
                row.name,
                row.machines,
                row.parts,
                format!("{}x{}", row.machines, row.parts),
                row.n_cells,
                cellform_core::scalar::round_half_away(row.metrics.pe, 2),
                cellform_core::scalar::round_half_away(row.metrics.mu, 2),
                cellform_core::scalar::round_half_away(row.metrics.ge, 2),
                if checks.is_empty() {
                    "-".to_owned()
                } else {
                    checks.join(", ")
                }
            );
        }
        out
    }
}

fn sidecar_path(instance: &Path) -> PathBuf {
    let stem = instance.file_stem().unwrap_or_default().to_string_lossy();
    instance.with_file_name(format!("{stem}.expect.toml"))
}

fn bench_one(path: &Path, tolerance: f64) -> Result<BenchRow> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    let sidecar = sidecar_path(path);
    let expect: Expectation = if sidecar.exists() {
        let raw = fs::read_to_string(&sidecar).with_context(|| format!("cannot read {}", sidecar.display()))?;
        toml::from_str(&raw).with_context(|| format!("cannot parse {}", sidecar.display()))?
    } else {
        Expectation::default()
    };
    let cfg = ClusterConfig {
        n_cells: expect.cells,
        ..ClusterConfig::default()
    };
    let sol = solve(&inst, &cfg).with_context(|| format!("cannot solve {}", path.display()))?;
    let metrics = score::<f64>(&inst, &sol.assignment)?;
    let tol = expect.tolerance.unwrap_or(tolerance);
    let checks = [
        ("PE", expect.pe, metrics.pe),
        ("MU", expect.mu, metrics.mu),
        ("GE", expect.ge, metrics.ge),
    ]
    .into_iter()
    .filter_map(|(metric, expected, actual)| {
        expected.map(|expected| Check {
            metric,
            expected,
            actual,
            tolerance: tol,
        })
    })
    .collect();
    Ok(BenchRow {
        name: path.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
        machines: inst.machine_count(),
        parts: inst.part_count(),
        n_cells: sol.n_cells(),
        metrics,
        checks,
    })
}

/// Solves every `.cfm` file in `dir`, in file-name order.
pub fn run_bench(dir: &Path, tolerance: f64) -> Result<BenchReport> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfm"))
        .collect();
    paths.sort();

    let mut report = BenchReport::default();
    for path in paths {
        match bench_one(&path, tolerance) {
            Ok(row) => report.rows.push(row),
            Err(e) => {
                log::warn!("skipping {}: {e:#}", path.display());
                report.skipped.push(format!("{e:#}"));
            }
        }
    }
    Ok(report)
}
