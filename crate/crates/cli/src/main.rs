use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ehlab::sequences::CycleConvention;
use ehlab_cli::config::{kind_list, ExperimentConfig, ExperimentKind, MajorantSpec, RateClass, SequenceSpec};
use ehlab_cli::{describe::describe, run_experiment, CliError};

#[derive(Parser)]
#[command(name = "ehlab", version, about = "Batch experiments on modulated ergodic Hilbert transforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its report and traces.
    Run(Box<RunArgs>),
    /// Print the parameters and output schema of an experiment kind.
    Describe {
        /// rates | transform | counterexample | prop27 | spectral | process | sweep
        kind: String,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// rates | transform | counterexample | prop27 | spectral | process | sweep
    kind: String,
    /// JSON config; defaults for the kind are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for Monte-Carlo experiments; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// counterexample: largest n of H_{3n+1} (accepts 1e6).
    #[arg(long = "N", value_parser = parse_count)]
    n: Option<u64>,
    /// counterexample: symmetric | odd_extension
    #[arg(long)]
    convention: Option<String>,
    /// rates: hardy_littlewood | sparse_dyadic | one_sided | constant
    #[arg(long)]
    seq: Option<String>,
    /// rates: star | star_star | M | A | raw
    #[arg(long)]
    class: Option<String>,
    /// rates, process: α ∈ (1, 2]
    #[arg(long)]
    alpha: Option<f64>,
    /// prop27: majorant h (inverse-log)
    #[arg(long)]
    h: Option<String>,
    /// prop27: number of breakpoints K
    #[arg(long = "K")]
    k: Option<usize>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(63) {
        Ok(f as u64)
    } else {
        Err(format!("`{s}` is not a nonnegative integer"))
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn apply_flags(cfg: &mut ExperimentConfig, a: &RunArgs) -> Result<(), CliError> {
    let name = cfg.kind().name();
    let unused = |flag: &str| schema(format!("--{flag} does not apply to `{name}`"));
    match cfg {
        ExperimentConfig::Counterexample(c) => {
            if let Some(n) = a.n {
                c.n = n;
            }
            if let Some(conv) = &a.convention {
                c.convention = match conv.as_str() {
                    "symmetric" => CycleConvention::Symmetric,
                    "odd_extension" | "odd-extension" => CycleConvention::OddExtension,
                    other => return Err(schema(format!("unknown convention `{other}`"))),
                };
            }
        }
        _ if a.n.is_some() => return Err(unused("N")),
        _ if a.convention.is_some() => return Err(unused("convention")),
        _ => {}
    }
    match cfg {
        ExperimentConfig::Rates(c) => {
            if let Some(s) = &a.seq {
                c.sequence = match s.as_str() {
                    "hardy_littlewood" => SequenceSpec::HardyLittlewood,
                    "sparse_dyadic" => SequenceSpec::SparseDyadic,
                    "one_sided" => SequenceSpec::OneSided,
                    "constant" => SequenceSpec::Constant { re: 1.0, im: 0.0 },
                    other => return Err(schema(format!("unknown sequence `{other}`"))),
                };
            }
            if let Some(cl) = &a.class {
                c.class = RateClass::parse(cl)?;
            }
            if let Some(al) = a.alpha {
                c.alpha = al;
            }
        }
        ExperimentConfig::Process(c) => {
            if let Some(al) = a.alpha {
                c.alpha = al;
            }
        }
        _ if a.seq.is_some() => return Err(unused("seq")),
        _ if a.class.is_some() => return Err(unused("class")),
        _ if a.alpha.is_some() => return Err(unused("alpha")),
        _ => {}
    }
    match cfg {
        ExperimentConfig::Prop27(c) => {
            if let Some(h) = &a.h {
                if h != "inverse-log" && h != "inverse_log" {
                    return Err(schema(format!("unknown majorant `{h}` (inverse-log)")));
                }
                c.h = MajorantSpec::InverseLog { shift: 3 };
            }
            if let Some(k) = a.k {
                c.k = k;
            }
        }
        _ if a.h.is_some() => return Err(unused("h")),
        _ if a.k.is_some() => return Err(unused("K")),
        _ => {}
    }
    if let Some(seed) = a.seed {
        cfg.set_seed(seed);
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<(), CliError> {
    let kind = ExperimentKind::parse(&a.kind)?;
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| schema(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default_for(kind),
    };
    if cfg.kind() != kind {
        return Err(schema(format!("config describes `{}`, not `{}`", cfg.kind().name(), kind.name())));
    }
    apply_flags(&mut cfg, &a)?;
    if let Some(t) = a.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?;
    }
    let out = run_experiment(&cfg)?;
    for p in out.write_to(&a.out_dir)? {
        println!("{}", p.display());
    }
    println!("{}", serde_json::to_string(&out.report["verdicts"]).expect("verdicts serialize"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(*a),
        Command::Describe { kind } => ExperimentKind::parse(&kind).map(|k| print!("{}", describe(k))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Schema(_)) {
                eprintln!("kinds: {}", kind_list());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
