use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use region_ode::error::Error;
use region_ode::output::write_run;
use region_ode::pipeline::{self, Which};
use region_ode::scenario::ScenarioConfig;

#[derive(Parser)]
#[command(
    name = "region-ode",
    version,
    about = "Solution-region integration of discontinuous ODEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the region, integrate and certify the trajectory.
    Run {
        scenario: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Run one checker and print its report.
    Check {
        scenario: PathBuf,
        /// region, transversality, classify, lower or upper.
        #[arg(long)]
        which: String,
    },
    /// Repeat `run` over values of one parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Also write each run's outputs under this directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the scenario in canonical form.
    Canon { scenario: PathBuf },
}

enum Failure {
    Certificate(String),
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Scenario(_)
            | Error::Usage(_)
            | Error::Io { .. }
            | Error::Dimension { .. }
            | Error::NonFiniteInput { .. } => Failure::Usage(e),
            other => Failure::Certificate(other.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Error> {
    let mut cfg = ScenarioConfig::load(path)?;
    cfg.apply_env()?;
    Ok(cfg)
}

fn cmd_run(scenario: &Path, output: &Path) -> Result<(), Failure> {
    let cfg = load(scenario)?;
    let out = pipeline::run(&cfg)?;
    write_run(output, &out)?;
    let r = &out.report;
    println!("scenario        {}", r.scenario);
    println!(
        "solution_region {} (worst {:e})",
        r.region.verdict(),
        r.region.worst_value
    );
    if let Some(t) = &r.transversality {
        println!(
            "transversality  {} (worst {:e})",
            t.verdict(),
            t.worst_value
        );
    }
    println!("max_h           {:e}", r.certificate.max_h);
    println!("residual        {:e}", r.certificate.residual);
    println!("surface_time    {:e}", r.certificate.surface_time_fraction);
    println!("events          {}", r.events);
    info!("outputs written to {}", output.display());
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Certificate(format!(
            "failed: {}",
            r.failed.join(", ")
        )))
    }
}

fn cmd_check(scenario: &Path, which: &str) -> Result<(), Failure> {
    let which: Which = which.parse()?;
    let cfg = load(scenario)?;
    let outcome = pipeline::check(&cfg, which)?;
    print!("{}", outcome.to_text()?);
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::Certificate(format!(
            "failed: {}",
            outcome.report.condition
        )))
    }
}

fn cmd_sweep(
    scenario: &Path,
    param: &str,
    values: &[f64],
    output: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = load(scenario)?;
    if values.is_empty() {
        return Err(Error::Usage("sweep needs at least one value".into()).into());
    }
    let rows = match output {
        None => pipeline::sweep(&cfg, param, values)?,
        Some(dir) => {
            let mut rows = Vec::new();
            for (i, &v) in values.iter().enumerate() {
                let mut c = cfg.clone();
                c.set_param(param, v)?;
                let out = pipeline::run(&c)?;
                write_run(&dir.join(format!("{param}_{i}")), &out)?;
                rows.push(pipeline::SweepRow::from_report(v, &out.report));
            }
            rows
        }
    };
    print!("{}", pipeline::sweep_table(param, &rows));
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.value.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Certificate(format!(
            "runs failed for {param} = {}",
            failed.join(", ")
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { scenario, output } => cmd_run(scenario, output),
        Command::Check { scenario, which } => cmd_check(scenario, which),
        Command::Sweep {
            scenario,
            param,
            values,
            output,
        } => cmd_sweep(scenario, param, values, output.as_deref()),
        Command::Canon { scenario } => load(scenario)
            .and_then(|c| c.to_canonical())
            .map(|text| print!("{text}"))
            .map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Certificate(msg)) => {
            eprintln!("certificate failure: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
