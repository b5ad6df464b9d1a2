mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::Failure;
use config::{parse_suite, parse_tolerance, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

const OUTPUTS: &str = "\
Outputs (written to --out, else $PMECH_OUTDIR, else ./pmech-out):
  verify          verify.json: array of {check, residual, tolerance, pass[, runtime_ms]} sorted by check
  oscillator      oscillator.csv: t, l2_norm, max_abs, transport, heisenberg, hamilton, alternative, recurrence
                    transport    relative L2 distance of the RK4 state to the exact rotation
                    heisenberg   operator-norm residual of the Heisenberg equation (interior snapshots)
                    hamilton     max-norm residual of the Hamilton equation (interior snapshots)
                    alternative  residual of the s-derivative form of the equation (interior snapshots)
                    recurrence   relative L2 distance to the initial state
                  the equation residuals use centred differences between snapshots, so they
                  scale with the square of the snapshot spacing
                  oscillator.json: run summary; snapshots/snap_NNNN.bin with --write-snapshots
  quantize        quantize_NAME_weyl.bin, quantize_NAME_rep.bin (+ .json headers), quantize_NAME.json
  correspondence  correspondence.csv: hbar, residual; correspondence.json with the log-log slope

Exit codes: 0 success, 1 a check failed, 2 invalid configuration, 3 numerical abort.
Config files hold `key = value` lines; flags override them.";

#[derive(Parser)]
#[command(name = "pmech", version, about = "Numerical p-mechanics on the Heisenberg group", after_help = OUTPUTS)]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override NAME=VALUE, repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Record per-check runtimes in verify.json.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites.
    Verify {
        /// Restrict to a suite, repeatable.
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
    },
    /// Evolve the oscillator test signal with RK4.
    Oscillator(OscillatorArgs),
    /// Quantize a named signal by both routes and compare.
    Quantize {
        #[arg(long)]
        signal: Option<String>,
        #[arg(long)]
        hbar: Option<f64>,
        /// plus or minus
        #[arg(long)]
        branch: Option<String>,
    },
    /// Residual of the quantum bracket against the Poisson bracket as hbar shrinks.
    Correspondence {
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_name = "H1,H2,...")]
        hbars: Option<String>,
        /// Two named signals, e.g. gauss,asym.
        #[arg(long, value_name = "A,B")]
        pair: Option<String>,
    },
}

#[derive(Args)]
struct OscillatorArgs {
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Planck constant for the Heisenberg-equation residual.
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    write_snapshots: bool,
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_text(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    for t in &cli.tol {
        let (name, v) = parse_tolerance(t)?;
        cfg.tolerances.insert(name, v);
    }
    cfg.timings |= cli.timings;
    let set = |cfg: &mut RunConfig, key: &str, v: Option<String>| match v {
        Some(v) => cfg.set(key, &v),
        None => Ok(()),
    };
    match &cli.command {
        Command::Verify { suites } => {
            if !suites.is_empty() {
                cfg.suites = suites.iter().map(|s| parse_suite(s)).collect::<Result<_, _>>()?;
            }
        }
        Command::Oscillator(a) => {
            set(&mut cfg, "oscillator.t_end", a.t_end.map(|v| v.to_string()))?;
            set(&mut cfg, "oscillator.dt", a.dt.map(|v| v.to_string()))?;
            set(&mut cfg, "oscillator.hbar", a.hbar.map(|v| v.to_string()))?;
            set(&mut cfg, "oscillator.snapshots", a.snapshots.map(|v| v.to_string()))?;
        }
        Command::Quantize { signal, hbar, branch } => {
            set(&mut cfg, "quantize.signal", signal.clone())?;
            set(&mut cfg, "quantize.hbar", hbar.map(|v| v.to_string()))?;
            set(&mut cfg, "quantize.branch", branch.clone())?;
        }
        Command::Correspondence { hbars, pair } => {
            set(&mut cfg, "correspondence.hbars", hbars.clone())?;
            set(&mut cfg, "correspondence.pair", pair.clone())?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = build_config(cli).map_err(Failure::Config)?;
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out).map_err(|e| Failure::Config(format!("{}: {e}", out.display())))?;
    match &cli.command {
        Command::Verify { .. } => commands::verify(&cfg, &out),
        Command::Oscillator(a) => commands::oscillator(&cfg, &out, a.write_snapshots),
        Command::Quantize { .. } => commands::quantize(&cfg, &out),
        Command::Correspondence { .. } => commands::correspondence(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Checks(n) => eprintln!("pmech: {n} check(s) failed"),
                Failure::Config(m) => eprintln!("pmech: configuration error: {m}"),
                Failure::Numerical(m) => eprintln!("pmech: numerical error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
