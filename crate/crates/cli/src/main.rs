use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homoclinic_cli::commands::{self, Outcome, SweepTask};
use homoclinic_cli::config::{FileConfig, Format, GridKind, Overrides, RunConfig};
use homoclinic_cli::CliError;

/// Transversality of invariant manifolds along homoclinic loops.
#[derive(Parser)]
#[command(name = "homoclinic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// neumann, pendula_identical or pendula_weak
    #[arg(long, global = true)]
    model: Option<String>,

    /// Model parameters as k=v, lists comma-separated (f=0.25,-0.125)
    #[arg(long, global = true, num_args = 1.., value_name = "K=V")]
    params: Vec<String>,

    /// Grid a:b:n; q1 for riccati, s for melnikov
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    #[arg(long, global = true)]
    rtol: Option<f64>,

    #[arg(long, global = true)]
    atol: Option<f64>,

    /// Start offset from the singular point
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// |T| beyond which the solve reports a blow-up
    #[arg(long, global = true)]
    cap: Option<f64>,

    /// Relative gap above which the verdict is transversal
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Relative gap below which the verdict is tangent
    #[arg(long, global = true)]
    tangent_tol: Option<f64>,

    /// Matching point; defaults to the model's own
    #[arg(long, global = true)]
    q1_star: Option<f64>,

    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the hypotheses on the model
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate the unstable curvature along the loop
    Riccati {
        #[command(flatten)]
        common: Common,
    },
    /// Compare stable and unstable curvature at the matching point
    Transversality {
        #[command(flatten)]
        common: Common,
    },
    /// Reduced Mel'nikov potential and the persistence verdict
    Melnikov {
        #[command(flatten)]
        common: Common,
        /// Check the distinguished loop instead of the family
        #[arg(long)]
        special_loop: bool,
    },
    /// Run a task over a parameter grid in parallel
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter and grid, key=a:b:n
        #[arg(long, allow_hyphen_values = true)]
        sweep: String,
        #[arg(long, value_enum, default_value = "transversality")]
        task: SweepTask,
    },
}

impl Common {
    fn resolve(&self, kind: GridKind) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let o = Overrides {
            model: self.model.clone(),
            params: self.params.clone(),
            rtol: self.rtol,
            atol: self.atol,
            epsilon: self.epsilon,
            cap: self.cap,
            tol: self.tol,
            tangent_tol: self.tangent_tol,
            q1_star: self.q1_star,
            grid: self.grid.clone(),
            out: self.out.clone(),
            format: self.format,
        };
        RunConfig::resolve(file, &o, kind)
    }
}

fn run(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let (common, kind) = match &cli.command {
        Command::Melnikov { common, .. } => (common, GridKind::S),
        Command::Sweep { common, task: SweepTask::Melnikov, .. } => (common, GridKind::S),
        Command::Validate { common } | Command::Riccati { common } | Command::Transversality { common } => (common, GridKind::Q),
        Command::Sweep { common, .. } => (common, GridKind::Q),
    };
    let cfg = common.resolve(kind)?;
    let out = match &cli.command {
        Command::Validate { .. } => commands::validate(&cfg)?,
        Command::Riccati { .. } => commands::riccati(&cfg)?,
        Command::Transversality { .. } => commands::transversality(&cfg)?,
        Command::Melnikov { special_loop, .. } => commands::melnikov(&cfg, *special_loop)?,
        Command::Sweep { sweep, task, .. } => commands::sweep(&cfg, sweep, *task)?,
    };
    Ok((out, cfg.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, path)) => {
            for n in &out.notes {
                eprintln!("note: {n}");
            }
            let written = match path {
                Some(p) => std::fs::write(&p, &out.body).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => std::io::stdout().write_all(out.body.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
