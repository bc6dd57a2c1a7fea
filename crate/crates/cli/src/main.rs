//! `nvspec`: CPMG spin-detection pipeline as composable batch commands.
//!
//! Each invocation reads an optional TOML config, applies flag overrides,
//! creates a fresh run directory, echoes the effective config there, and
//! writes its artifacts plus a manifest. Exit codes: 0 success, 2 usage,
//! 3 missing prerequisite, 4 reuse-key mismatch, 5 numerical failure.

mod commands;
mod config;
mod rundir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nvspec_core::CoreError;

use config::{parse_cells, parse_family, parse_regime, parse_spins, RunConfig};

#[derive(Parser)]
#[command(
    name = "nvspec",
    about = "Simulate CPMG spectroscopy of an NV center and detect nuclear spins",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Parent directory for run directories (env: NVSPEC_RUN_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Run directory name (default: the command name plus the seed).
    #[arg(long, global = true)]
    name: Option<String>,
    /// Worker threads; 0 uses every core (env: NVSPEC_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// External magnetic field in gauss.
    #[arg(long, global = true)]
    field_gauss: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Render pure, decohered, and noisy CPMG traces of a spin scene.
    Simulate(SimulateArgs),
    /// Materialize training datasets as shard files.
    GenData(GenDataArgs),
    /// Train classifier banks, regressors, and denoisers from datasets.
    Train(TrainArgs),
    /// Run the detection pipeline on a pair of traces.
    Detect(DetectArgs),
    /// Score a detection report against scene ground truth.
    Eval(EvalArgs),
    /// Emit plot-ready CSV and PGM bundles from run artifacts.
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Inline spins as "A:B;A:B" in Hz, appended to the configured list.
    #[arg(long)]
    spins: Option<String>,
    /// JSON file with a spin list.
    #[arg(long)]
    spin_file: Option<PathBuf>,
    /// Comma-separated pulse numbers.
    #[arg(long)]
    n_pulses: Option<String>,
}

#[derive(Args)]
struct GenDataArgs {
    /// Comma-separated regimes (n32-high-b, n32-low-b, n256).
    #[arg(long)]
    regimes: Option<String>,
    /// Inclusive dictionary-cell range "LO:HI".
    #[arg(long)]
    cells: Option<String>,
    /// Comma-separated families (hpc, regress, denoise).
    #[arg(long)]
    families: Option<String>,
    /// Classifier samples per class.
    #[arg(long)]
    samples_per_class: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Run directory of a gen-data invocation.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated families to train.
    #[arg(long)]
    families: Option<String>,
    /// Training epochs (applies to every family).
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct DetectArgs {
    /// Run directory of a train invocation.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Run directory of a simulate invocation (uses its noisy traces).
    #[arg(long)]
    sim: Option<PathBuf>,
    /// Explicit N = 32 trace CSV.
    #[arg(long)]
    n32: Option<PathBuf>,
    /// Explicit N = 256 trace CSV.
    #[arg(long)]
    n256: Option<PathBuf>,
    /// Cells to sweep, "LO:HI"; defaults to the banks' coverage.
    #[arg(long)]
    cells: Option<String>,
    /// Skip the fine-tuning stage.
    #[arg(long)]
    no_fine_tune: bool,
    /// JSON file with known bath spins.
    #[arg(long)]
    bath_file: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// report.json of a detect run (or the run directory).
    #[arg(long)]
    report: Option<PathBuf>,
    /// scene.json of a simulate run (or the run directory).
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    tol_a_hz: Option<f64>,
    #[arg(long)]
    tol_b_hz: Option<f64>,
}

#[derive(Args)]
struct PlotdataArgs {
    /// Measured trace CSV for the overlay bundle.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Detection report supplying the reproduced spins.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Confidence-curve CSV (repeatable).
    #[arg(long)]
    curve: Vec<PathBuf>,
    /// Dictionary cell to render a period image for.
    #[arg(long)]
    image_cell: Option<usize>,
}

fn exit_code_of(err: &CoreError) -> u8 {
    match err {
        CoreError::Config(_) | CoreError::Parse { .. } | CoreError::InsufficientTrace => 2,
        CoreError::MissingPrerequisite(_) | CoreError::CoverageGap(_) => 3,
        CoreError::Io { source, .. } => {
            if source.kind() == std::io::ErrorKind::NotFound {
                3
            } else {
                1
            }
        }
        CoreError::ReuseKey(_) | CoreError::Shape { .. } => 4,
        CoreError::Numerical(_) => 5,
    }
}

fn parse_list<T, F: Fn(&str) -> nvspec_core::Result<T>>(
    s: &str,
    parse: F,
) -> nvspec_core::Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse(p.trim()))
        .collect()
}

/// Merge config file, environment, and flags into the effective config.
fn effective_config(cli: &Cli) -> nvspec_core::Result<RunConfig> {
    let mut cfg = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var("NVSPEC_RUN_DIR") {
        if !dir.is_empty() {
            cfg.run.out_dir = PathBuf::from(dir);
        }
    }
    if let Ok(w) = std::env::var("NVSPEC_WORKERS") {
        if !w.is_empty() {
            cfg.run.workers = w
                .parse()
                .map_err(|_| CoreError::Config(format!("NVSPEC_WORKERS '{w}' is not a number")))?;
        }
    }
    let g = &cli.global;
    if let Some(v) = &g.out_dir {
        cfg.run.out_dir = v.clone();
    }
    if let Some(v) = &g.name {
        cfg.run.name = v.clone();
    }
    if let Some(v) = g.workers {
        cfg.run.workers = v;
    }
    if let Some(v) = g.seed {
        cfg.run.seed = v;
    }
    if let Some(v) = g.field_gauss {
        cfg.run.field_gauss = v;
    }

    match &cli.command {
        Command::Simulate(a) => {
            if let Some(s) = &a.spins {
                cfg.simulate.spins.extend(parse_spins(s)?);
            }
            if let Some(f) = &a.spin_file {
                cfg.simulate.spin_file = Some(f.clone());
            }
            if let Some(n) = &a.n_pulses {
                cfg.simulate.n_pulses = parse_list(n, |p| {
                    p.parse::<u32>()
                        .map_err(|_| CoreError::Config(format!("pulse count '{p}'")))
                })?;
            }
        }
        Command::GenData(a) => {
            if let Some(r) = &a.regimes {
                cfg.gen_data.regimes = parse_list(r, parse_regime)?;
            }
            if let Some(c) = &a.cells {
                cfg.gen_data.cells = parse_cells(c)?;
            }
            if let Some(f) = &a.families {
                cfg.gen_data.families = parse_list(f, parse_family)?;
            }
            if let Some(n) = a.samples_per_class {
                cfg.gen_data.hpc.samples_per_class = n;
            }
        }
        Command::Train(a) => {
            if let Some(d) = &a.data {
                cfg.train.data = Some(d.clone());
            }
            if let Some(f) = &a.families {
                cfg.train.families = parse_list(f, parse_family)?;
            }
            if let Some(e) = a.epochs {
                cfg.train.hpc.epochs = e;
                cfg.train.regress.epochs = e;
                cfg.train.denoise.epochs = e;
            }
        }
        Command::Detect(a) => {
            if let Some(m) = &a.models {
                cfg.detect.models = Some(m.clone());
            }
            if let Some(s) = &a.sim {
                cfg.detect.sim = Some(s.clone());
            }
            if let Some(t) = &a.n32 {
                cfg.detect.n32_trace = Some(t.clone());
            }
            if let Some(t) = &a.n256 {
                cfg.detect.n256_trace = Some(t.clone());
            }
            if let Some(c) = &a.cells {
                cfg.detect.cells = parse_cells(c)?;
            }
            if a.no_fine_tune {
                cfg.detect.options.run_fine_tune = false;
            }
            if let Some(b) = &a.bath_file {
                cfg.detect.bath_file = Some(b.clone());
            }
        }
        Command::Eval(a) => {
            if let Some(r) = &a.report {
                cfg.eval.report = Some(r.clone());
            }
            if let Some(s) = &a.scene {
                cfg.eval.scene = Some(s.clone());
            }
            if let Some(t) = a.tol_a_hz {
                cfg.eval.tol_a_hz = t;
            }
            if let Some(t) = a.tol_b_hz {
                cfg.eval.tol_b_hz = t;
            }
        }
        Command::Plotdata(a) => {
            if let Some(t) = &a.trace {
                cfg.plotdata.trace = Some(t.clone());
            }
            if let Some(r) = &a.report {
                cfg.plotdata.report = Some(r.clone());
            }
            if !a.curve.is_empty() {
                cfg.plotdata.curves = a.curve.clone();
            }
            if let Some(c) = a.image_cell {
                cfg.plotdata.image_cell = Some(c);
            }
        }
    }
    Ok(cfg)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate(_) => "simulate",
        Command::GenData(_) => "gen-data",
        Command::Train(_) => "train",
        Command::Detect(_) => "detect",
        Command::Eval(_) => "eval",
        Command::Plotdata(_) => "plotdata",
    }
}

fn run(cli: &Cli) -> nvspec_core::Result<PathBuf> {
    let cfg = effective_config(cli)?;
    if cfg.run.workers > 0 {
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build_global();
    }
    let name = if cfg.run.name.is_empty() {
        format!("{}-{}", command_name(&cli.command), cfg.run.seed)
    } else {
        cfg.run.name.clone()
    };
    let mut dir = rundir::RunDir::create(&cfg.run.out_dir, &name, command_name(&cli.command))?;
    dir.echo_config(&cfg)?;
    match &cli.command {
        Command::Simulate(_) => commands::simulate::run(&cfg, &mut dir)?,
        Command::GenData(_) => commands::gen_data::run(&cfg, &mut dir)?,
        Command::Train(_) => commands::train::run(&cfg, &mut dir)?,
        Command::Detect(_) => commands::detect::run(&cfg, &mut dir)?,
        Command::Eval(_) => commands::eval::run(&cfg, &mut dir)?,
        Command::Plotdata(_) => commands::plotdata::run(&cfg, &mut dir)?,
    }
    dir.write_manifest()?;
    Ok(dir.path.clone())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(path) => {
            println!("run directory: {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}
