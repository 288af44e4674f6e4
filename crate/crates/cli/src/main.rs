use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use transcrit::charts::ChartId;
use transcrit_cli::commands::{self, Outcome};
use transcrit_cli::{CliError, Format, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "transcrit", version, about = "Euler-discretized transcritical passage: simulation, chart orbits, sweeps and claim checks")]
struct Cli {
    /// Flat key = value config file (TOML).
    #[arg(long, global = true, env = "TCRIT_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "TCRIT_LAMBDA", allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, env = "TCRIT_EPS")]
    eps: Option<f64>,
    #[arg(long, global = true, env = "TCRIT_H")]
    h: Option<f64>,
    #[arg(long, global = true, env = "TCRIT_RHO")]
    rho: Option<f64>,
    #[arg(long, global = true, env = "TCRIT_DELTA")]
    delta: Option<f64>,
    #[arg(long, global = true, env = "TCRIT_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "TCRIT_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "TCRIT_FORMAT", value_enum)]
    format: Option<Format>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, env = "TCRIT_THREADS")]
    threads: Option<usize>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Chart {
    K1,
    K2,
    K3,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate the original map and write trajectory.csv.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Iterate one chart map and write its coordinates with the conjugacy residual.
    Chart {
        #[arg(long, value_enum)]
        chart: Chart,
        /// Four chart coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Sweep one parameter of the global passage and fit scaling laws.
    Sweep {
        /// eps, h, delta, nu or lambda.
        #[arg(long)]
        axis: Option<String>,
        /// Explicit grid, comma separated; otherwise a log grid from the config.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every claim check and write report.csv and report.txt.
    Verify,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.apply(&Overrides {
        lambda: cli.lambda,
        eps: cli.eps,
        h: cli.h,
        rho: cli.rho,
        delta: cli.delta,
        out: cli.out.clone(),
        format: cli.format,
        threads: cli.threads,
        seed: cli.seed,
    });
    if let Some(Command::Sweep { axis, values, samples }) = &cli.command {
        if let Some(a) = axis {
            cfg.sweep_axis = a.clone();
        }
        if let Some(v) = values {
            cfg.sweep_values = Some(v.clone());
        }
        if let Some(s) = samples {
            cfg.sweep_samples = *s;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command.as_ref().expect("checked by caller") {
        Command::Simulate { x0, y0, n } => commands::simulate(cfg, *x0, *y0, *n),
        Command::Chart { chart, point, n } => {
            if point.len() != 4 {
                return Err(CliError::Usage(format!("--point needs 4 coordinates, got {}", point.len())));
            }
            let id = match chart {
                Chart::K1 => ChartId::K1,
                Chart::K2 => ChartId::K2,
                Chart::K3 => ChartId::K3,
            };
            commands::chart(cfg, id, [point[0], point[1], point[2], point[3]], *n)
        }
        Command::Sweep { .. } => commands::sweep(cfg),
        Command::Verify => commands::verify(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    if cli.command.is_none() {
        eprintln!("error: a subcommand is required (simulate, chart, sweep, verify)");
        return ExitCode::from(transcrit_cli::EXIT_USAGE);
    }
    match run(&cli, &cfg) {
        Ok(o) => {
            print!("{}", o.summary);
            if !o.summary.ends_with('\n') {
                println!();
            }
            for f in &o.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
