use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinring_cli::bundle::{default_root, output_dir, run_to_dir};
use spinring_cli::config::ExperimentConfig;
use spinring_cli::error::Result;
use spinring_cli::presets::Figure;
use spinring_cli::sweep::{parse_values, sweep, Axis};
use spinring_cli::{run_figure, validate};
use spinring_core::Execution;

/// Exact dynamics of XY spin rings under a global phase.
#[derive(Parser)]
#[command(name = "spinring", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one config and write its bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config leaf, e.g. `--set ring.b_field=1.9`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (default: outputs.dir, then $SPINRING_OUT/<config stem>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the data behind one figure.
    Figure {
        #[arg(value_name = "fig1..fig8")]
        figure: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config once per value of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// harmonics, sigma_eta, sigma_delta, B_over_lambda or theta0.
        #[arg(long)]
        axis: String,
        /// Comma-separated; accepts multiples of pi such as `pi/2`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config and print sector sizes and revival diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn stem(path: &std::path::Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, overrides, out } => {
            let c = ExperimentConfig::load(&config, &overrides)?;
            let dir = output_dir(out.as_deref(), &c, &stem(&config));
            run_to_dir(&c, &dir, None)?;
            println!("{}", dir.display());
        }
        Command::Figure { figure, out } => {
            let fig: Figure = figure.parse()?;
            let dir = out.unwrap_or_else(|| default_root().join(fig.name()));
            run_figure(fig, &dir)?;
            println!("{}", dir.display());
        }
        Command::Sweep { config, axis, values, overrides, out } => {
            let axis: Axis = axis.parse()?;
            let values = parse_values(&values)?;
            let c = ExperimentConfig::load(&config, &overrides)?;
            let dir = out.unwrap_or_else(|| default_root().join(format!("{}-{}", stem(&config), axis)));
            sweep(&c, axis, &values, &dir, Execution::Parallel)?;
            println!("{}", dir.display());
        }
        Command::Validate { config, overrides } => {
            let c = ExperimentConfig::load(&config, &overrides)?;
            print!("{}", validate::validate(&c)?.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinring: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
