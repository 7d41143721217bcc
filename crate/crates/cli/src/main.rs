//! `measchain`: command-line front end for the measurement-chain simulator.
//!
//! Exit codes: 0 success, 2 invalid arguments or configuration, 3 GMM
//! search failure, 4 input ingestion failure, 5 simulation or output failure.
//! Flags take precedence over config-file values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use measchain::distributions::fit_gmm_random_search;
use measchain::pipeline::{
    pmu_summary, run_pmu, run_scada, scada_summary, write_pmu_outputs, write_scada_outputs, FitSection, FrameFormat,
    RunConfig, Summary,
};
use measchain::pmu::{make_filter, FilterOverrides};
use measchain::rng::stage_stream;
use measchain::{Error, Stage};

#[derive(Parser, Debug)]
#[command(name = "measchain", version, about = "Synthetic SCADA and PMU measurement streams")]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (simulations) or file (fit-gmm, make-filter).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print progress to stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a GMM to a target mean and standard deviation by random search.
    FitGmm(FitArgs),
    /// Run the SCADA chain and write scada.csv and delay_schedule.csv.
    SimulateScada(ScadaArgs),
    /// Run the PMU chain and write pmu.csv or pmu.jsonl.
    SimulatePmu(PmuArgs),
    /// Run the SCADA network stage and write delay_schedule.csv.
    SimulateCn,
    /// Print the M-class filter coefficient table for a configuration.
    MakeFilter(FilterArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Number of mixture components.
    #[arg(long)]
    k: Option<usize>,
    /// Target total standard deviation.
    #[arg(long)]
    std: Option<f64>,
    /// Target total mean (default 0).
    #[arg(long)]
    mean: Option<f64>,
    /// KLD acceptance threshold.
    #[arg(long)]
    eta: Option<f64>,
    /// Monte Carlo samples per KLD estimate (default 100000).
    #[arg(long)]
    samples: Option<usize>,
    /// Candidate budget (default 10000).
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct ScadaArgs {
    /// Add per-stage columns to scada.csv.
    #[arg(long)]
    debug_columns: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args, Debug)]
struct PmuArgs {
    /// Frame output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct FilterArgs {
    /// Reporting rate, frames per second.
    #[arg(long, default_value_t = 60.0)]
    rate: f64,
    /// Nominal frequency, Hz.
    #[arg(long, default_value_t = 60.0)]
    f0: f64,
    /// Filter order N (even).
    #[arg(long)]
    order: Option<usize>,
    /// Filter reference frequency, Hz.
    #[arg(long)]
    ffr: Option<f64>,
    /// Sampling frequency, Hz.
    #[arg(long)]
    fs: Option<f64>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let code = match (error.stage(), error.root()) {
            (_, Error::FitBudgetExhausted(_)) => 3,
            (_, Error::Config(_) | Error::UnsupportedFilter { .. }) => 2,
            (Some(Stage::Ingestion), _) | (_, Error::Ingest { .. } | Error::Series { .. }) => 4,
            (None, Error::InvalidParams(_)) => 2,
            _ => 5,
        };
        Failure { code, error }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error);
            if let Error::FitBudgetExhausted(fail) = f.error.root() {
                if let Some(best) = &fail.best {
                    eprintln!("best candidate: {best:?}");
                }
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::FitGmm(args) => fit_gmm(cli, args),
        Command::SimulateScada(args) => {
            let mut config = load_config(cli)?;
            config.output.debug_columns |= args.debug_columns;
            simulate_scada(cli, &config)
        }
        Command::SimulatePmu(args) => {
            let mut config = load_config(cli)?;
            if let Some(f) = args.format {
                config.output.pmu_format = match f {
                    Format::Csv => FrameFormat::Csv,
                    Format::Jsonl => FrameFormat::Jsonl,
                };
            }
            simulate_pmu(cli, &config)
        }
        Command::SimulateCn => simulate_cn(cli, &load_config(cli)?),
        Command::MakeFilter(args) => make_filter_table(cli, args),
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required for simulations".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.output {
        config.output.dir = dir.clone();
    }
    Ok(config)
}

fn note(cli: &Cli, msg: impl AsRef<str>) {
    if cli.verbose > 0 {
        eprintln!("{}", msg.as_ref());
    }
}

fn report(cli: &Cli, dir: &Path, summary: &Summary) -> CliResult<()> {
    let path = dir.join("summary.txt");
    fs::write(&path, summary.to_string()).map_err(|e| stage_io(&path, e))?;
    note(cli, format!("wrote {}", path.display()));
    print!("{summary}");
    Ok(())
}

fn stage_io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
    .in_stage(Stage::Output)
}

fn simulate_scada(cli: &Cli, config: &RunConfig) -> CliResult<()> {
    note(cli, format!("scada: truth {}", config.truth_path.display()));
    let run = run_scada(config)?;
    let dir = &config.output.dir;
    for p in write_scada_outputs(dir, &run, config.output.debug_columns).map_err(|e| e.in_stage(Stage::Output))? {
        note(cli, format!("wrote {}", p.display()));
    }
    report(cli, dir, &scada_summary(&run))
}

fn simulate_pmu(cli: &Cli, config: &RunConfig) -> CliResult<()> {
    note(cli, format!("pmu: truth {}", config.truth_path.display()));
    let run = run_pmu(config)?;
    let dir = &config.output.dir;
    let p = write_pmu_outputs(dir, &run, config.output.pmu_format).map_err(|e| e.in_stage(Stage::Output))?;
    note(cli, format!("wrote {}", p.display()));
    report(cli, dir, &pmu_summary(&run))
}

fn simulate_cn(cli: &Cli, config: &RunConfig) -> CliResult<()> {
    let run = run_scada(config)?;
    let dir = &config.output.dir;
    let path = dir.join("delay_schedule.csv");
    fs::create_dir_all(dir).map_err(|e| stage_io(dir, e))?;
    let file = fs::File::create(&path).map_err(|e| stage_io(&path, e))?;
    run.schedule
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| e.in_stage(Stage::Output))?;
    note(cli, format!("wrote {}", path.display()));
    let full = scada_summary(&run);
    let mut summary = Summary::default();
    for (k, v) in full.entries() {
        if k == "scada.samples"
            || k == "scada.discarded"
            || k.starts_with("scada.cn.")
            || k.starts_with("scada.total_delay")
        {
            summary.push(k.clone(), v);
        }
    }
    report(cli, dir, &summary)
}

fn fit_gmm(cli: &Cli, args: &FitArgs) -> CliResult<()> {
    let from_config = match &cli.config {
        Some(path) => FitSection::load(path)?,
        None => FitSection::default(),
    };
    let flags = FitSection {
        k_components: args.k,
        total_std: args.std,
        total_mean: args.mean,
        similarity_threshold: args.eta,
        sample_count: args.samples,
        max_iterations: args.max_iters,
    };
    let target = from_config.overlay(flags).target()?;
    let seed = cli.seed.unwrap_or(0);
    note(cli, format!("fit-gmm: {target:?}, seed {seed}"));
    let mut rng = stage_stream(seed, "fit", 0);
    let report = fit_gmm_random_search(&target, &mut rng)?;

    let out = cli.output.clone().unwrap_or_else(|| PathBuf::from("gmm.toml"));
    let text =
        toml::to_string(&report.params).map_err(|e| Error::InvalidParams(e.to_string()).in_stage(Stage::Output))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| stage_io(dir, e))?;
    }
    fs::write(&out, text).map_err(|e| stage_io(&out, e))?;
    note(cli, format!("wrote {}", out.display()));

    let mut s = Summary::default();
    s.push("k", report.params.weights().len());
    s.push("total_mean", report.total_mean);
    s.push("total_std", report.total_std);
    s.push("kld", report.kld);
    s.push("iterations", report.iterations);
    print!("{s}");
    Ok(())
}

fn make_filter_table(cli: &Cli, args: &FilterArgs) -> CliResult<()> {
    let overrides = FilterOverrides {
        order: args.order,
        filter_ref_freq: args.ffr,
        sampling_freq: args.fs,
    };
    let spec = make_filter(args.rate, args.f0, &overrides)?;
    let table = spec.coefficient_table();
    match &cli.output {
        Some(path) => {
            fs::write(path, &table).map_err(|e| stage_io(path, e))?;
            note(cli, format!("wrote {}", path.display()));
        }
        None => print!("{table}"),
    }
    Ok(())
}
