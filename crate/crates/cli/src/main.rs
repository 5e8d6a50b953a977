//! `portsim`: run terminal simulations and paired comparisons.
//!
//! Replication `i` uses seed `seed + i`. Replications run in parallel but
//! every file is written in replication order, so output bytes depend only
//! on the flags and the scenario file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use portsim::kpi::KpiReport;
use portsim::policies::{CompareError, PairedComparison};
use portsim::scenario::{
    berth_plan_entries, emit_berth_plan, emit_report, ReportFormat, ScenarioConfig, ScenarioError,
    SCHEMA_VERSION,
};
use portsim::terminal::{run_simulation, SimError};

#[derive(Parser, Debug)]
#[command(name = "portsim", version, about = "Container terminal simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario for one or more replications.
    Run(RunArgs),
    /// Run two scenarios on the same seeds and report paired differences.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 1)]
    reps: u32,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Scenario A, then scenario B.
    #[arg(long, num_args = 1, required = true)]
    scenario: Vec<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
    /// Replications; give once for both sides or once per side.
    #[arg(long, num_args = 1, default_values_t = [30])]
    reps: Vec<u32>,
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the scenario's horizon.
    #[arg(long)]
    horizon_hours: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Report formats; the berth plan is always written.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    format: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Scenario {
        path: String,
        #[source]
        source: ScenarioError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation failed: {0}")]
    Sim(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Scenario { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Sim(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e.to_string())
    }
}

impl From<portsim::kpi::KpiError> for CliError {
    fn from(e: portsim::kpi::KpiError) -> Self {
        CliError::Sim(e.to_string())
    }
}

impl From<CompareError> for CliError {
    fn from(e: CompareError) -> Self {
        match e {
            CompareError::TooFewSeeds(_) | CompareError::Unpaired { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Sim(other.to_string()),
        }
    }
}

fn load(path: &Path, horizon_hours: Option<f64>) -> Result<ScenarioConfig, CliError> {
    let wrap = |source| CliError::Scenario {
        path: path.display().to_string(),
        source,
    };
    let mut config = ScenarioConfig::load(path).map_err(wrap)?;
    if let Some(h) = horizon_hours {
        config.horizon_hours = h;
        config = config.validated().map_err(wrap)?;
    }
    Ok(config)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn mkdir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Documents for one replication.
struct RepOutput {
    report: KpiReport,
    reports: Vec<(ReportFormat, String)>,
    plan_json: String,
    plan_grid: String,
}

fn run_rep(config: &ScenarioConfig, seed: u64, formats: &[Format]) -> Result<RepOutput, CliError> {
    let outcome = run_simulation(config, seed, config.horizon())?;
    let report = KpiReport::from_outcome(&outcome)?;
    let reports = formats
        .iter()
        .map(|&f| (f.into(), emit_report(&report, f.into())))
        .collect();
    let plan = emit_berth_plan(
        &berth_plan_entries(&outcome.state),
        config.terminal.quay_length_m,
        outcome.horizon,
        report.teu.weekly_teu,
    );
    Ok(RepOutput {
        report,
        reports,
        plan_json: plan.json,
        plan_grid: plan.grid,
    })
}

fn run_reps(
    config: &ScenarioConfig,
    seed: u64,
    reps: u32,
    formats: &[Format],
) -> Result<Vec<RepOutput>, CliError> {
    (0..reps)
        .into_par_iter()
        .map(|i| run_rep(config, seed.wrapping_add(u64::from(i)), formats))
        .collect()
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    kpi: String,
    mean: f64,
    min: f64,
    max: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    schema_version: u32,
    scenario: String,
    seeds: Vec<u64>,
    horizon_hours: f64,
    kpis: Vec<SummaryRow>,
}

fn summarize(config: &ScenarioConfig, reports: &[KpiReport]) -> Summary {
    let columns: Vec<Vec<(String, f64)>> = reports.iter().map(KpiReport::scalars).collect();
    let n = reports.len() as f64;
    let kpis = columns[0]
        .iter()
        .enumerate()
        .map(|(i, (kpi, _))| {
            let values = columns.iter().map(|c| c[i].1);
            SummaryRow {
                kpi: kpi.clone(),
                mean: values.clone().sum::<f64>() / n,
                min: values.clone().fold(f64::INFINITY, f64::min),
                max: values.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    Summary {
        schema_version: SCHEMA_VERSION,
        scenario: config.name.clone(),
        seeds: reports.iter().map(|r| r.seed).collect(),
        horizon_hours: config.horizon_hours,
        kpis,
    }
}

fn summary_csv(summary: &Summary) -> String {
    let mut out = String::from("kpi,mean,min,max\n");
    for row in &summary.kpis {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            row.kpi, row.mean, row.min, row.max
        ));
    }
    out
}

fn run(args: RunArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let config = load(&args.scenario, args.common.horizon_hours)?;
    let outputs = run_reps(&config, args.common.seed, args.reps, &args.common.format)?;

    let out = &args.common.out;
    mkdir(out)?;
    for (i, rep) in outputs.iter().enumerate() {
        let dir = out.join(format!("rep-{i:03}"));
        mkdir(&dir)?;
        for (format, body) in &rep.reports {
            write(&dir.join(format!("report.{}", format.extension())), body)?;
        }
        write(&dir.join("berth_plan.json"), &rep.plan_json)?;
        write(&dir.join("berth_plan.txt"), &rep.plan_grid)?;
    }
    let reports: Vec<KpiReport> = outputs.into_iter().map(|o| o.report).collect();
    let summary = summarize(&config, &reports);
    write(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;
    write(&out.join("summary.csv"), &summary_csv(&summary))?;

    let weekly = summary
        .kpis
        .iter()
        .find(|k| k.kpi == "weekly_teu")
        .map_or(0.0, |k| k.mean);
    println!(
        "{}: {} replication(s) from seed {}, mean weekly TEU {:.0}, annual {:.0}; wrote {}",
        config.name,
        args.reps,
        args.common.seed,
        weekly,
        weekly * 52.0,
        out.display()
    );
    Ok(())
}

fn comparison_csv(c: &PairedComparison) -> String {
    let mut out = String::from("kpi,mean_a,mean_b,mean_delta,b_higher,b_lower\n");
    for d in &c.deltas {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{},{}\n",
            d.kpi, d.mean_a, d.mean_b, d.mean_delta, d.positive, d.negative
        ));
    }
    out
}

fn compare(args: CompareArgs) -> Result<(), CliError> {
    let [a_path, b_path] = args.scenario.as_slice() else {
        return Err(CliError::Usage(format!(
            "compare takes exactly two --scenario flags, got {}",
            args.scenario.len()
        )));
    };
    let reps = match args.reps.as_slice() {
        [r] => *r,
        [ra, rb] if ra == rb => *ra,
        [ra, rb] => {
            return Err(CliError::Usage(format!(
                "replication counts differ: {ra} for A, {rb} for B"
            )))
        }
        _ => return Err(CliError::Usage("--reps given more than twice".into())),
    };
    if reps < 2 {
        return Err(CliError::Usage(
            "a paired comparison needs --reps of at least 2".into(),
        ));
    }
    let a = load(a_path, args.common.horizon_hours)?;
    let b = load(b_path, args.common.horizon_hours)?;
    let seed = args.common.seed;
    let pairs: Vec<(KpiReport, KpiReport)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(u64::from(i));
            let ra = KpiReport::from_outcome(&run_simulation(&a, s, a.horizon())?)?;
            let rb = KpiReport::from_outcome(&run_simulation(&b, s, b.horizon())?)?;
            Ok::<_, CliError>((ra, rb))
        })
        .collect::<Result<_, _>>()?;
    let (ra, rb): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let comparison = PairedComparison::from_reports(&ra, &rb)?;

    let out = &args.common.out;
    mkdir(out)?;
    for f in &args.common.format {
        match f {
            Format::Json => write(
                &out.join("comparison.json"),
                &(serde_json::to_string_pretty(&comparison).expect("comparison serializes") + "\n"),
            )?,
            Format::Csv => write(&out.join("comparison.csv"), &comparison_csv(&comparison))?,
        }
    }
    let annual = comparison.delta("annual_teu");
    println!(
        "{} vs {}: {} paired seeds from {}, mean annual TEU {:.0} -> {:.0} (delta {:+.0}); wrote {}",
        comparison.scenario_a,
        comparison.scenario_b,
        reps,
        seed,
        annual.map_or(0.0, |d| d.mean_a),
        annual.map_or(0.0, |d| d.mean_b),
        annual.map_or(0.0, |d| d.mean_delta),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("portsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
