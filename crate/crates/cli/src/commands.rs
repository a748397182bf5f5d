//! Command-line definitions and the command runners behind them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use cellform_core::{
    analyze, block_view, builtin_instance, builtin_instances, parse_instance, score, Analysis, ClusterConfig, Instance,
    MetricsReport,
};
use clap::{Args, Parser, Subcommand};

use crate::assignment_file::{parse_assignment, serialize_assignment};
use crate::bench::{run_bench, DEFAULT_TOLERANCE};
use crate::export::SolutionExport;
use crate::server::{self, AppState};

#[derive(Debug, Parser)]
#[command(
    name = "cellform",
    version,
    about = "Machine-part cell formation by principal component analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Form cells for one instance and print the block-diagonal view.
    Solve(SolveArgs),
    /// Solve every `.cfm` file in a directory and tabulate the metrics.
    Bench(BenchArgs),
    /// Score an externally supplied assignment.
    Score(ScoreArgs),
    /// Serve the solution and scoring endpoints over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct InstanceSource {
    /// Instance file in `.cfm` format.
    pub file: Option<PathBuf>,
    /// Use an embedded instance instead of a file.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
}

impl InstanceSource {
    /// Loads the instance and a display name for it.
    pub fn load(&self) -> Result<(String, Instance)> {
        if let Some(name) = &self.builtin {
            let inst = builtin_instance(name).ok_or_else(|| {
                let known: Vec<&str> = builtin_instances().into_iter().map(|(n, _)| n).collect();
                anyhow!("unknown builtin instance {name:?} (available: {})", known.join(", "))
            })?;
            return Ok((name.clone(), inst));
        }
        let path = self.file.as_deref().expect("clap requires a source");
        load_instance_file(path)
    }
}

pub fn load_instance_file(path: &Path) -> Result<(String, Instance)> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok((name, inst))
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    /// Form exactly N cells instead of splitting at wide gaps.
    #[arg(long, value_name = "N")]
    pub cells: Option<usize>,
    /// Angular gap, in degrees, that separates two cells.
    #[arg(long, value_name = "DEG", default_value_t = 60.0)]
    pub gap_threshold: f64,
    /// Spread within a cell, in degrees, beyond which an end machine is exceptional.
    #[arg(long, value_name = "DEG", default_value_t = 90.0)]
    pub independence: f64,
}

impl ClusterArgs {
    pub fn config(&self) -> ClusterConfig {
        ClusterConfig {
            n_cells: self.cells,
            gap_threshold_deg: self.gap_threshold,
            independence_deg: self.independence,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    /// Write the JSON solution document here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write the solution in assignment-file format here.
    #[arg(long, value_name = "PATH")]
    pub assignment_out: Option<PathBuf>,
    /// Write the similarity matrix as CSV here.
    #[arg(long, value_name = "PATH")]
    pub similarity_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of `.cfm` files with optional `.expect.toml` sidecars.
    pub dir: PathBuf,
    /// Allowed absolute deviation from expected percentages.
    #[arg(long, value_name = "T", default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    /// Assignment file with `machine <label> <cell>` and `part <label> <family>` lines.
    #[arg(long, value_name = "FILE")]
    pub assignment: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub source: InstanceSource,
    #[command(flatten)]
    pub cluster: ClusterArgs,
    #[arg(long, value_name = "P")]
    pub port: u16,
    /// Static UI assets served at `/`.
    #[arg(long, value_name = "PATH")]
    pub ui_dir: Option<PathBuf>,
}

fn solve_instance(name: &str, inst: &Instance, cfg: &ClusterConfig) -> Result<(Analysis, SolutionExport)> {
    let analysis = analyze(inst, cfg).with_context(|| format!("cannot solve {name}"))?;
    let export = SolutionExport::build(name, inst, &analysis)?;
    Ok((analysis, export))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn print_report(out: &mut dyn Write, report: &MetricsReport) -> Result<()> {
    writeln!(
        out,
        "UE {} | EE {} | VE {} | block area {}",
        report.ue, report.ee, report.ve, report.denominator_mu
    )?;
    writeln!(out, "{}", report.summary())?;
    Ok(())
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_owned()
    } else {
        items.join(", ")
    }
}

pub fn run_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let (name, inst) = args.source.load()?;
    let (analysis, export) = solve_instance(&name, &inst, &args.cluster.config())?;
    let sol = &analysis.solution;

    writeln!(
        out,
        "instance {name}: {} machines, {} parts",
        inst.machine_count(),
        inst.part_count()
    )?;
    writeln!(
        out,
        "explained variance {:.2}%",
        100.0 * analysis.plane.explained_variance
    )?;
    writeln!(out)?;
    write!(out, "{}", block_view(&inst, &sol.assignment)?.render())?;
    writeln!(out)?;
    for c in 1..=sol.n_cells() {
        let members = |cells: &[usize], labels: &[String]| -> String {
            let v: Vec<&str> = cells
                .iter()
                .zip(labels)
                .filter(|(&k, _)| k == c)
                .map(|(_, l)| l.as_str())
                .collect();
            if v.is_empty() {
                "-".to_owned()
            } else {
                v.join(" ")
            }
        };
        writeln!(
            out,
            "cell {c}: machines {} | parts {}",
            members(sol.machine_cell(), inst.machine_labels()),
            members(sol.part_family(), inst.part_labels())
        )?;
    }
    writeln!(out, "exceptional machines: {}", list_or_none(&sol.exceptional_machines))?;
    writeln!(out, "exceptional parts: {}", list_or_none(&sol.exceptional_parts))?;
    print_report(out, &export.metrics)?;
    print_warnings(&export.warnings);

    if let Some(path) = &args.out {
        write_file(path, &export.to_json())?;
    }
    if let Some(path) = &args.assignment_out {
        write_file(path, &serialize_assignment(&inst, &sol.assignment))?;
    }
    if let Some(path) = &args.similarity_csv {
        write_file(path, &analysis.similarity.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run_bench_cmd(args: &BenchArgs, out: &mut dyn Write) -> Result<ExitCode> {
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        bail!("tolerance must be non-negative, got {}", args.tolerance);
    }
    let report = run_bench(&args.dir, args.tolerance)?;
    write!(out, "{}", report.render())?;
    for s in &report.skipped {
        eprintln!("warning: skipped {s}");
    }
    let failures = report.failures();
    if failures > 0 {
        eprintln!("{failures} instance(s) outside tolerance");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

/// Scores the assignment file against the instance.
pub fn score_files(args: &ScoreArgs) -> Result<MetricsReport> {
    let (_, inst) = args.source.load()?;
    let text =
        fs::read_to_string(&args.assignment).with_context(|| format!("cannot read {}", args.assignment.display()))?;
    let labeled = parse_assignment(&text)?;
    let assignment = labeled.resolve(&inst)?;
    Ok(score::<f64>(&inst, &assignment)?)
}

pub fn run_score(args: &ScoreArgs, out: &mut dyn Write) -> Result<ExitCode> {
    let report = score_files(args)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        print_report(out, &report)?;
    }
    print_warnings(&report.warnings);
    Ok(ExitCode::SUCCESS)
}

pub fn run_serve(args: &ServeArgs) -> Result<ExitCode> {
    let (name, inst) = args.source.load()?;
    let (_, export) = solve_instance(&name, &inst, &args.cluster.config())?;
    print_warnings(&export.warnings);
    let state = Arc::new(AppState { instance: inst, export });
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(state, args.port, args.ui_dir.clone()))?;
    Ok(ExitCode::SUCCESS)
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match &cli.command {
        Command::Solve(a) => run_solve(a, &mut out),
        Command::Bench(a) => run_bench_cmd(a, &mut out),
        Command::Score(a) => run_score(a, &mut out),
        Command::Serve(a) => run_serve(a),
    }
}
