use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use swe_afc::benchmarks;
use swe_afc::{RawFluxMode, Scheme, SspOrder, WaveSpeed, WetDryStrategy};
use swe_afc_cli::{convergence_study, exact_csv, run, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "swe-afc",
    version,
    about = "Shallow water solver with algebraic flux correction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more schemes and write solution and diagnostics CSVs.
    Run(RunArgs),
    /// Error/EOC table against an exact solution on a doubling mesh sequence.
    Convergence(RunArgs),
    /// Write a benchmark's exact solution sampled at the mesh nodes.
    Exact {
        #[arg(long)]
        benchmark: String,
        #[arg(long, default_value_t = 512)]
        elements: usize,
        #[arg(long)]
        t: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered benchmarks.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration, or any CSV artifact of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    benchmark: Option<String>,
    /// LOW, MCL or MCL-SDE; repeat or use `all` for several.
    #[arg(long, value_parser = parse_schemes)]
    scheme: Vec<Vec<Scheme>>,
    /// Mesh resolutions, comma separated.
    #[arg(long, value_delimiter = ',')]
    elements: Vec<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    rk: Option<u8>,
    #[arg(long)]
    wetdry: Option<WetDryArg>,
    #[arg(long, conflicts_with = "steady")]
    t_end: Option<f64>,
    /// Run to steady state with this tolerance on the normalized residual.
    #[arg(long)]
    steady: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Additional output times for solution snapshots, comma separated.
    #[arg(long, value_delimiter = ',')]
    output_times: Vec<f64>,
    /// Evaluate the entropy residual every step.
    #[arg(long)]
    diagnostics: bool,
    #[arg(long)]
    raw_flux_mode: Option<RawFluxArg>,
    #[arg(long)]
    wave_speed: Option<WaveSpeedArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WetDryArg {
    None,
    #[value(alias = "zero")]
    ZeroVelocity,
    Azerad,
    #[value(alias = "kp")]
    KurganovPetrova,
    #[value(alias = "entropy")]
    EntropyBased,
    #[value(alias = "friction-boundary-layer")]
    Friction,
}

#[derive(Clone, Copy, ValueEnum)]
enum RawFluxArg {
    Full,
    Steady,
    Simple,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveSpeedArg {
    Nodal,
    Gms,
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Scheme::ALL.to_vec());
    }
    s.split(',')
        .map(|p| p.trim().parse::<Scheme>().map_err(|e| e.to_string()))
        .collect()
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match (&self.config, &self.benchmark) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => RunConfig::for_benchmark(name),
            (None, None) => {
                return Err(CliError::config(
                    "benchmark",
                    "pass --benchmark or --config",
                ))
            }
        };
        if let (Some(_), Some(name)) = (&self.config, &self.benchmark) {
            c.benchmark = Some(name.clone());
            c.problem = None;
        }
        if !self.scheme.is_empty() {
            c.scheme = self.scheme.concat();
        }
        if !self.elements.is_empty() {
            c.elements = self.elements.clone();
        }
        if let Some(nu) = self.nu {
            c.time.nu = Some(nu);
        }
        if let Some(k) = self.rk {
            c.time.rk_order = Some(SspOrder::try_from(k).map_err(|e| CliError::config("rk", e))?);
        }
        if let Some(t) = self.t_end {
            c.time.t_end = Some(t);
            c.time.steady_tol = None;
        }
        if let Some(tol) = self.steady {
            c.time.steady_tol = Some(tol);
            c.time.t_end = None;
        }
        if let Some(m) = self.max_steps {
            c.time.max_steps = Some(m);
        }
        if let Some(w) = self.wetdry {
            let strategy = match w {
                WetDryArg::None => WetDryStrategy::None,
                WetDryArg::ZeroVelocity => WetDryStrategy::ZeroVelocity,
                WetDryArg::Azerad => WetDryStrategy::Azerad,
                WetDryArg::KurganovPetrova => WetDryStrategy::KurganovPetrova,
                WetDryArg::EntropyBased => WetDryStrategy::EntropyBased,
                WetDryArg::Friction => WetDryStrategy::FrictionBoundaryLayer,
            };
            let mut w = c.wet_dry.unwrap_or_default();
            w.strategy = strategy;
            c.wet_dry = Some(w);
        }
        if let Some(m) = self.raw_flux_mode {
            c.raw_flux_mode = Some(match m {
                RawFluxArg::Full => RawFluxMode::Full,
                RawFluxArg::Steady => RawFluxMode::Steady,
                RawFluxArg::Simple => RawFluxMode::Simple,
            });
        }
        if let Some(w) = self.wave_speed {
            c.wave_speed = match w {
                WaveSpeedArg::Nodal => WaveSpeed::Nodal,
                WaveSpeedArg::Gms => WaveSpeed::Gms,
            };
        }
        if let Some(d) = &self.out_dir {
            c.output.dir = d.clone();
        }
        if !self.output_times.is_empty() {
            c.output.times = self.output_times.clone();
        }
        if self.diagnostics {
            c.output.diagnostics = true;
        }
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let config = args.config()?;
            for r in run(&config)? {
                println!("{r}");
            }
            println!("artifacts in {}", config.output.dir.display());
        }
        Command::Convergence(args) => {
            let mut config = args.config()?;
            if args.elements.is_empty() && config.elements.len() < 2 {
                config.elements = vec![32, 64, 128, 256, 512];
            }
            if args.scheme.is_empty() && args.config.is_none() {
                config.scheme = Scheme::ALL.to_vec();
            }
            let table = convergence_study(&config)?;
            print!("{table}");
            println!("table in {}", config.output.dir.join("eoc.csv").display());
        }
        Command::Exact {
            benchmark,
            elements,
            t,
            out,
        } => {
            let csv = exact_csv(&benchmark, elements, t)?;
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?,
                None => print!("{csv}"),
            }
        }
        Command::List => {
            for name in benchmarks::NAMES {
                let c = benchmarks::benchmark(name).map_err(|e| CliError::solver(name, e))?;
                println!("{name:<22} {}", c.description);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
