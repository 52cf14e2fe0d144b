use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use condevo::Method;
use condevo_cli::{load_config, run_compare, run_scenario, run_sweep, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "condevo", version, about = "Conditional photodetection scenarios: CSV and JSON for plotting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario on its time grid.
    Run(Overrides),
    /// Tabulate deviations between two runs of one scenario. With a single
    /// --config the second run uses --method.
    Compare(Overrides),
    /// Repeat a scenario over d = 2, 4, 6 (mixed) or n = 1, 3, 5 (fock:n).
    Sweep(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Scenario file (compare accepts two).
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Output prefix, replacing out_prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver, replacing method.
    #[arg(long)]
    method: Option<Method>,
}

fn usage(msg: &str) -> CliError {
    CliError::Invalid { key: "arguments".into(), msg: msg.into() }
}

impl Overrides {
    fn single(&self) -> Result<ScenarioConfig, CliError> {
        let [path] = self.config.as_slice() else {
            return Err(usage("expected exactly one --config"));
        };
        let mut cfg = load_config(path)?;
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(out) = &self.out {
            cfg.out_prefix = out.clone();
        }
        Ok(cfg)
    }

    fn pair(&self) -> Result<(ScenarioConfig, ScenarioConfig), CliError> {
        let (mut a, mut b) = match (self.config.as_slice(), self.method) {
            ([a], Some(m)) => {
                let a = load_config(a)?;
                let b = ScenarioConfig { method: m, ..a.clone() };
                (a, b)
            }
            ([_], None) => return Err(usage("compare with one --config needs --method")),
            ([a, b], m) => {
                let mut b = load_config(b)?;
                if let Some(m) = m {
                    b.method = m;
                }
                (load_config(a)?, b)
            }
            _ => return Err(usage("compare takes one or two --config")),
        };
        if let Some(out) = &self.out {
            a.out_prefix = out.clone();
            b.out_prefix = out.clone();
        }
        Ok((a, b))
    }
}

fn execute(cmd: Command) -> Result<(), CliError> {
    let written = match cmd {
        Command::Run(o) => run_scenario(&o.single()?)?,
        Command::Sweep(o) => run_sweep(&o.single()?)?,
        Command::Compare(o) => {
            let (a, b) = o.pair()?;
            let (report, path) = run_compare(&a, &b)?;
            for (name, c) in condevo_cli::compare::COLUMNS.iter().zip(&report.columns) {
                println!("{name}: max {:e}, rms {:e}", c.max_abs, c.rms);
            }
            vec![path]
        }
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
