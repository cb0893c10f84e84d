use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trilevel_sweep::{run, AxisRange, Mode, RunConfig, Severity};

/// Ground-state sweeps for three-level atoms in a single-mode cavity.
#[derive(Parser, Debug)]
#[command(name = "trilevel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coherent-state minimum, Mandel parameter and separatrix margin.
    Semiclassical(Flags),
    /// Exact ground state by block diagonalization.
    Quantum(Flags),
    /// Excitation-projected coherent state.
    Projected(Flags),
    /// Semiclassical, exact and projected results side by side.
    Compare(Flags),
    /// Points on the separatrix along rays from the origin.
    Separatrix(Flags),
    /// Excitation-number distribution of the coherent state.
    Distribution(Flags),
    /// Transition order at sampled separatrix points.
    TransitionOrder(Flags),
    /// Check a configuration without running it.
    Validate(Flags),
}

/// Flags override the corresponding fields of the JSON file.
#[derive(Args, Debug)]
struct Flags {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 runs serially).
    #[arg(long)]
    threads: Option<usize>,
    /// Number of atoms.
    #[arg(long)]
    na: Option<usize>,
    /// Field frequency.
    #[arg(long)]
    omega: Option<f64>,
    /// Atomic configuration: xi, lambda or v.
    #[arg(long = "configuration")]
    configuration: Option<String>,
    /// Detuning, e.g. d21=0.2.
    #[arg(long = "detuning", value_parser = parse_pair)]
    detunings: Vec<(String, f64)>,
    /// Fixed coupling, e.g. mu23=0.5.
    #[arg(long = "mu", value_parser = parse_pair)]
    couplings: Vec<(String, f64)>,
    /// Swept coupling, e.g. mu12=0:2:0.01.
    #[arg(long = "grid", value_parser = parse_axis)]
    grid: Vec<(String, AxisRange)>,
}

fn parse_pair(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v = v
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("bad number in '{s}': {e}"))?;
    Ok((k.trim().to_ascii_lowercase(), v))
}

fn parse_axis(s: &str) -> Result<(String, AxisRange), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected axis=min:max:step, got '{s}'"))?;
    let parts: Vec<f64> = v
        .split(':')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number in '{s}': {e}"))
        })
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [min, max, step] => Ok((k.trim().to_ascii_lowercase(), AxisRange { min, max, step })),
        _ => Err(format!("expected axis=min:max:step, got '{s}'")),
    }
}

fn load(flags: &Flags, mode: Option<Mode>) -> Result<RunConfig, String> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if mode.is_some() {
        cfg.mode = mode;
    }
    if flags.out.is_some() {
        cfg.output = flags.out.clone();
    }
    if flags.threads.is_some() {
        cfg.threads = flags.threads;
    }
    if flags.na.is_some() {
        cfg.atoms = flags.na;
    }
    if flags.omega.is_some() {
        cfg.omega = flags.omega;
    }
    if flags.configuration.is_some() {
        cfg.configuration = flags.configuration.clone();
    }
    if !flags.detunings.is_empty() {
        let d = cfg.detunings.get_or_insert_with(Default::default);
        d.extend(flags.detunings.iter().cloned());
    }
    cfg.couplings.extend(flags.couplings.iter().cloned());
    cfg.grid.extend(flags.grid.iter().cloned());
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (flags, mode) = match &cli.command {
        Command::Semiclassical(f) => (f, Some(Mode::Semiclassical)),
        Command::Quantum(f) => (f, Some(Mode::Quantum)),
        Command::Projected(f) => (f, Some(Mode::Projected)),
        Command::Compare(f) => (f, Some(Mode::Compare)),
        Command::Separatrix(f) => (f, Some(Mode::Separatrix)),
        Command::Distribution(f) => (f, Some(Mode::Distribution)),
        Command::TransitionOrder(f) => (f, Some(Mode::TransitionOrder)),
        Command::Validate(f) => (f, None),
    };
    let cfg = match load(flags, mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    if matches!(cli.command, Command::Validate(_)) {
        let diagnostics = cfg.validate();
        for d in &diagnostics {
            println!("{d}");
        }
        let failed = diagnostics.iter().any(|d| d.severity == Severity::Error);
        return ExitCode::from(if failed { 1 } else { 0 });
    }

    let plan = match cfg.plan() {
        Ok((plan, warnings)) => {
            for w in warnings {
                eprintln!("{w}");
            }
            plan
        }
        Err(diagnostics) => {
            for d in diagnostics {
                eprintln!("{d}");
            }
            return ExitCode::from(1);
        }
    };

    let outcome = run(&plan);
    let written = match &plan.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.table.write_csv(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            outcome
                .table
                .write_csv(&mut lock)
                .and_then(|_| lock.flush())
        }
    };
    eprint!("{}", outcome.summary);
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(if outcome.summary.failed() { 2 } else { 0 })
}
