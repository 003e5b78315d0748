use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cliffgr::einstein::mass::MIN_QUAD_ORDER;
use cliffgr::metric::MetricSpec;
use cliffgr::report::CheckReport;
use cliffgr::suite::{self, Tolerances};

/// Numerical identity checks for Clifford-valued forms on curved spacetimes.
#[derive(Parser)]
#[command(name = "cliffgr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the geometry, field-equation and Dirac-operator battery on sample points.
    Check {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the random-input algebra and commutator suites.
    Identities {
        #[arg(long, visible_alias = "points", default_value_t = 1000)]
        count: usize,
        /// Add a check that is built to fail.
        #[arg(long, hide = true)]
        inject_fault: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Inertial mass from surface integrals at the given radii.
    Energy {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, value_delimiter = ',', default_values_t = [50.0, 100.0, 200.0, 400.0, 800.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        quad_order: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Equivalence, vacuum field and refutation-witness verdicts.
    Claims {
        #[command(flatten)]
        metric: MetricArg,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct MetricArg {
    /// Metric file (TOML).
    #[arg(long)]
    metric: PathBuf,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance override: a class (algebra, first, second, quadrature) or a check name.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

impl Common {
    fn tolerances(&self) -> Result<Tolerances> {
        let mut t = Tolerances::default();
        for item in &self.tol {
            let (k, v) = item.split_once('=').with_context(|| format!("--tol expects NAME=VALUE, got `{item}`"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("bad tolerance value in `{item}`"))?;
            t.set(k.trim(), v).map_err(anyhow::Error::msg)?;
        }
        Ok(t)
    }
}

fn load(path: &Path) -> Result<MetricSpec> {
    MetricSpec::load(path).with_context(|| format!("reading metric file {}", path.display()))
}

fn run(cmd: &Command) -> Result<(CheckReport, &Common)> {
    let report = match cmd {
        Command::Check { metric, points, common } => {
            let spec = load(&metric.metric)?;
            suite::check_report(&spec, *points, common.seed, &common.tolerances()?)?
        }
        Command::Identities { count, inject_fault, common } => {
            suite::identities_report(common.seed, *count, &common.tolerances()?, *inject_fault)
        }
        Command::Energy { metric, radii, quad_order, common } => {
            let spec = load(&metric.metric)?;
            if *quad_order < MIN_QUAD_ORDER {
                bail!("--quad-order must be at least {MIN_QUAD_ORDER}");
            }
            suite::energy_report(&spec, radii, *quad_order, &common.tolerances()?)?
        }
        Command::Claims { metric, points, common } => {
            let spec = load(&metric.metric)?;
            suite::claims_report(&spec, *points, common.seed, &common.tolerances()?)?
        }
    };
    let common = match cmd {
        Command::Check { common, .. }
        | Command::Identities { common, .. }
        | Command::Energy { common, .. }
        | Command::Claims { common, .. } => common,
    };
    Ok((report, common))
}

fn emit(mut report: CheckReport, common: &Common) -> Result<bool> {
    if !common.no_timestamp {
        report.metadata.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    let json = report.to_json();
    match &common.json {
        Some(path) => std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{json}"),
    }
    let s = report.summary;
    eprintln!("{}: {} checks, {} passed, {} failed", report.metadata.command, s.total, s.passed, s.failed);
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("  FAIL {} at {:?}: residual {:e}, tolerance {:e}", c.name, c.point, c.residual, c.tolerance);
    }
    for n in &report.metadata.notes {
        eprintln!("  note: {n}");
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // input problems exit with 2, failed checks with 1
    match run(&cli.command).and_then(|(r, common)| emit(r, common)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
