use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use maxbound::config::{GridDefaults, EXPERTS_DEFAULTS, PRECEDENCE, SWEEP_DEFAULTS};
use maxbound::experts::cmd_experts;
use maxbound::report::{sink, write_json, Table};
use maxbound::tails::cmd_tails;
use maxbound::verify::cmd_verify;
use maxbound::{Format, SweepArgs, SweepConfig};
use serde_json::Value;

const EXIT_HELP: &str = "\
Exit status: 0 when every check passes, 1 when a bound is violated,
2 on a usage or configuration error.";

#[derive(Parser)]
#[command(
    name = "maxbound",
    version,
    about = "Check lower <= exact <= upper for maxima of Gaussians and random walks"
)]
#[command(after_help = format!("{PRECEDENCE}\n\n{EXIT_HELP}"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the selected families and classify every grid point as
    /// pass, fail, vacuous or out_of_scope. A JSON summary goes to stderr
    /// when the report is CSV.
    Verify(SweepArgs),
    /// Tabulate exact binomial tails and their lower bounds for each n in
    /// --n-grid.
    Tails(SweepArgs),
    /// Simulate exponential weights on random losses for one n (--n-grid)
    /// and one integer d (--d-grid) [defaults: n = 20, d = 4]. Writes JSON.
    Experts(SweepArgs),
}

fn config(args: SweepArgs, defaults: GridDefaults) -> Result<SweepConfig> {
    SweepConfig::resolve_with(args, defaults)
}

fn emit(config: &SweepConfig, table: Table, json: Value, summary: Value) -> Result<()> {
    let out = sink(config.out.as_deref())?;
    match config.format {
        Format::Csv => {
            table.write_csv(out)?;
            let mut err = std::io::stderr().lock();
            writeln!(err, "{summary}")?;
        }
        Format::Json => write_json(out, &json)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify(args) => {
            let config = config(args, SWEEP_DEFAULTS)?;
            let report = cmd_verify(&config)?;
            emit(&config, report.table(), report.to_json(), report.summary.to_json())?;
            Ok(report.passed())
        }
        Command::Tails(args) => {
            let config = config(args, SWEEP_DEFAULTS)?;
            let report = cmd_tails(&config)?;
            emit(&config, report.table(), report.to_json(), report.summary.to_json())?;
            Ok(report.passed())
        }
        Command::Experts(args) => {
            let config = config(args, EXPERTS_DEFAULTS)?;
            let report = cmd_experts(&config)?;
            write_json(sink(config.out.as_deref())?, &report.to_json())?;
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
