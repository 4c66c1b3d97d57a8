use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bosetunnel::experiments::{
    export, load_config, read_document, run_scenario, run_sweep, write_document,
    write_sweep_summary, ExperimentError, ExportFormat, Mode, ScenarioConfig, ScenarioResult,
};
use bosetunnel::oracle::{self, AncillaAmplitudes};

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bosetunnel",
    version,
    about = "Ancilla-assisted boson tunneling: simulate, optimize, sweep"
)]
struct Cli {
    /// Scenario file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the scenario seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(
        long,
        global = true,
        env = "BOSETUNNEL_OUT_DIR",
        default_value = "results"
    )]
    out_dir: PathBuf,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ExportFormat::Csv,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured model without learning anything
    Simulate,
    /// Learn the learnable parameters, then evaluate
    Optimize,
    /// Run every (N_S, N_A) cell of the [sweep] grid
    Sweep,
    /// Closed-form probabilities of the solvable cases
    Oracle(OracleArgs),
    /// Rewrite a result.json in the requested format
    Export {
        /// result.json written with --format json
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    case: OracleCase,
    /// Evaluation times, comma separated
    #[arg(
        long,
        value_delimiter = ',',
        global = true,
        allow_hyphen_values = true,
        conflicts_with = "t_max"
    )]
    times: Vec<f64>,
    /// Uniform grid on [0, t_max] instead of --times
    #[arg(long, global = true)]
    t_max: Option<f64>,
    /// Grid size used with --t-max
    #[arg(long, global = true, default_value_t = 101)]
    points: usize,
}

impl OracleArgs {
    fn grid(&self) -> Result<Vec<f64>, String> {
        match self.t_max {
            Some(t_max) if self.points >= 2 && t_max.is_finite() => Ok((0..self.points)
                .map(|i| t_max * i as f64 / (self.points - 1) as f64)
                .collect()),
            Some(_) => Err("--t-max needs a finite value and --points >= 2".into()),
            None if self.times.is_empty() => Err("give --times or --t-max".into()),
            None => Ok(self.times.clone()),
        }
    }
}

#[derive(Subcommand)]
enum OracleCase {
    /// One boson, no ancilla
    TwoLevel {
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
    },
    /// One boson, asymmetric trap, frozen ancilla in number state k
    Asymmetric {
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        n_a: usize,
        #[arg(long)]
        k: usize,
    },
    /// One boson, symmetric trap, sigma_x coupling, ancilla in number state k
    Symmetric {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        n_a: usize,
        #[arg(long)]
        k: usize,
    },
    /// Coupling that makes ancilla branch k resonant
    Coupling {
        #[arg(long)]
        n_a: usize,
        #[arg(long)]
        k: usize,
    },
    /// Long-time probability under dephasing
    Stationary {
        #[arg(long)]
        n_s: usize,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn exit_for(e: &ExperimentError) -> u8 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, ExitCode> {
    let Some(path) = &cli.config else {
        return Err(fail(EXIT_CONFIG, "--config is required for this command"));
    };
    let cfg = load_config(path).map_err(|e| fail(EXIT_CONFIG, e))?;
    Ok(match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn report(r: &ScenarioResult) {
    let m = &r.metrics;
    println!(
        "{}: max P = {:.6} at t = {:.4}; P(t_hat = {:.4}) = {:.6}; baseline max P = {:.6}",
        r.name, m.max_prob, m.t_at_max, r.learned.t_hat, m.prob_at_t_hat, m.baseline_max_prob
    );
    println!(
        "  eta_a = {:.6}, gamma_a = {:.6}, delta_a = {:.6}, alpha = {:.6}, iterations = {}",
        r.learned.eta_a,
        r.learned.gamma_a,
        r.learned.delta_a,
        r.learned.alpha,
        r.learning_curve.len()
    );
    if let Some(u) = m.unoptimized_max_prob {
        println!("  unoptimized max P = {u:.6}");
    }
}

fn run_one(cli: &Cli, mode: Mode) -> ExitCode {
    let mut cfg = match load(cli) {
        Ok(c) => c,
        Err(code) => return code,
    };
    cfg.mode = mode;
    let result = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(exit_for(&e), e),
    };
    report(&result);
    let dir = cli.out_dir.join(&cfg.name);
    match export(&result, &dir, cli.format.into()) {
        Ok(files) => {
            for f in files {
                println!("  wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn sweep(cli: &Cli) -> ExitCode {
    let cfg = match load(cli) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let root = cli.out_dir.join(&cfg.name);
    let format = cli.format.into();
    let mut write_errors = 0;
    let cells = run_sweep(&cfg, |cell| match &cell.outcome {
        Ok(r) => {
            report(r);
            if let Err(e) = export(
                r,
                &root.join(format!("ns{}_na{}", cell.n_s, cell.n_a)),
                format,
            ) {
                eprintln!("error: {e}");
                write_errors += 1;
            }
        }
        Err(e) => eprintln!("cell N_S = {}, N_A = {} failed: {e}", cell.n_s, cell.n_a),
    });
    let summary = root.join("summary.csv");
    if let Err(e) = std::fs::create_dir_all(&root)
        .map_err(|e| e.to_string())
        .and_then(|_| write_sweep_summary(&summary, &cells).map_err(|e| e.to_string()))
    {
        return fail(EXIT_RUNTIME, e);
    }
    println!("wrote {}", summary.display());
    let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
    if failed + write_errors > 0 {
        return fail(
            EXIT_RUNTIME,
            format!("{failed} of {} cells failed", cells.len()),
        );
    }
    ExitCode::SUCCESS
}

fn oracle_cmd(args: &OracleArgs, format: Format) -> ExitCode {
    let times = || args.grid();
    let values: Result<Vec<(f64, f64)>, String> = match &args.case {
        OracleCase::TwoLevel { delta, gamma } => times().map(|ts| {
            ts.into_iter()
                .map(|t| (t, oracle::p_two_level(*delta, *gamma, t)))
                .collect()
        }),
        OracleCase::Asymmetric {
            gamma,
            alpha,
            n_a,
            k,
        } => {
            if k > n_a {
                return fail(EXIT_CONFIG, format!("k = {k} exceeds n_a = {n_a}"));
            }
            let psi = AncillaAmplitudes::number_state(*n_a, *k);
            times().map(|ts| {
                ts.into_iter()
                    .map(|t| {
                        (
                            t,
                            oracle::p_asymmetric_with_ancilla(*gamma, *alpha, &psi, t),
                        )
                    })
                    .collect()
            })
        }
        OracleCase::Symmetric { alpha, n_a, k } => {
            if k > n_a {
                return fail(EXIT_CONFIG, format!("k = {k} exceeds n_a = {n_a}"));
            }
            let psi = AncillaAmplitudes::number_state(*n_a, *k);
            times().map(|ts| {
                ts.into_iter()
                    .map(|t| (t, oracle::p_symmetric_with_ancilla(*alpha, &psi, t)))
                    .collect()
            })
        }
        OracleCase::Coupling { n_a, k } => {
            return match oracle::optimal_coupling_asymmetric(*n_a, *k) {
                Ok(a) => {
                    println!("{a}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_CONFIG, e),
            };
        }
        OracleCase::Stationary { n_s } => {
            return match oracle::stationary_probability(*n_s) {
                Ok(p) => {
                    println!("{p}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_CONFIG, e),
            };
        }
    };
    let values = match values {
        Ok(v) => v,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match format {
        Format::Csv => {
            println!("t,prob");
            for (t, p) in values {
                println!("{t},{p}");
            }
        }
        Format::Json => {
            let rows: Vec<String> = values
                .iter()
                .map(|(t, p)| format!("{{\"t\":{t},\"prob\":{p}}}"))
                .collect();
            println!("[{}]", rows.join(","));
        }
    }
    ExitCode::SUCCESS
}

fn export_cmd(input: &Path, out_dir: &Path, format: Format) -> ExitCode {
    let doc = match read_document(input) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    match write_document(&doc, &out_dir.join(&doc.scenario.name), format.into()) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Simulate => run_one(&cli, Mode::Simulate),
        Command::Optimize => run_one(&cli, Mode::Optimize),
        Command::Sweep => sweep(&cli),
        Command::Oracle(args) => oracle_cmd(args, cli.format),
        Command::Export { input } => export_cmd(input, &cli.out_dir, cli.format),
    }
}
