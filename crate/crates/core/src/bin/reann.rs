//! Command-line front end. Exit codes: 0 ok, 1 usage or config error,
//! 2 a pipeline stage failed, 3 `evaluate` fell below `--min-accuracy`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reann::network::Network;
use reann::pipeline::{
    extract_phases, run_reann, train_phases, DatasetRef, ExperimentConfig, ExperimentReport,
    ReportFormat,
};
use reann::rex::{evaluate_rules, SymbolicRuleSet};
use reann::trainer::render_epoch_log;
use reann::Error;

// stdout may be a closed pipe (`reann report r.json | head`); ignore write errors
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "reann",
    version,
    about = "Extract if-then rules from trained networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Bundled dataset name or a data file (schema next to it).
    #[arg(long, conflicts_with = "config")]
    dataset: Option<String>,
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// text or structured (JSON).
    #[arg(long, default_value = "text")]
    format: ReportFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Train, prune, discretize, extract and evaluate for every seed.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        runs: Option<usize>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Constructive training and pruning for one seed.
    Train {
        #[command(flatten)]
        source: Source,
        /// Network checkpoint path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the per-epoch error log (tab separated).
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Discretize a trained checkpoint and extract rules.
    Extract {
        checkpoint: PathBuf,
        #[command(flatten)]
        source: Source,
        /// Rules JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Score a rules file on the train and test split.
    Evaluate {
        rules: PathBuf,
        #[command(flatten)]
        source: Source,
        /// Percent; exit 3 when test accuracy is lower.
        #[arg(long)]
        min_accuracy: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Render a saved JSON report.
    Report {
        report: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

enum Failure {
    Usage(String),
    Stage(String),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. }
            | Error::Load { .. }
            | Error::Schema(_)
            | Error::NoPatterns
            | Error::DegenerateSplit { .. }
            | Error::Config(_)
            | Error::Format(_)
            | Error::EmptyReport => Failure::Usage(e.to_string()),
            _ => Failure::Stage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("stage failed: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Acceptance(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
    }
}

fn config_for(src: &Source) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&src.config, &src.dataset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(arg)) => match DatasetRef::parse(arg) {
            r if r.name.is_some() => ExperimentConfig::bundled(arg)?,
            r => ExperimentConfig::for_dataset(r),
        },
        (None, None) => return Err(Failure::Usage("pass --dataset or --config".into())),
    };
    if let Some(seed) = src.seed {
        let runs = cfg.runs;
        cfg = cfg.with_seeds(seed, runs);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            source,
            runs,
            out,
            output,
        } => {
            let mut cfg = config_for(&source)?;
            if let Some(runs) = runs {
                if runs == 0 {
                    return Err(Failure::Usage("--runs must be at least 1".into()));
                }
                let seed = cfg.seed;
                cfg = cfg.with_seeds(seed, runs);
            }
            let report = run_reann(&cfg)?;
            if let Some(path) = out {
                report.save(&path)?;
            }
            out!("{}", ensure_newline(report.render(output.format)?));
            let failed: Vec<String> = report
                .runs
                .iter()
                .filter_map(|r| {
                    r.failure
                        .as_ref()
                        .map(|f| format!("seed {}: {} ({})", r.seed, f.stage, f.message))
                })
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Stage(failed.join("; ")))
            }
        }
        Command::Train {
            source,
            out,
            log,
            output,
        } => {
            let cfg = config_for(&source)?;
            let (train, test, _) = cfg.load_split()?;
            let trained = train_phases(&cfg, cfg.seed, &train)?;
            let net = trained.network();
            if let Some(path) = out {
                net.save(&path)?;
            }
            if let Some(path) = log {
                write(&path, &render_epoch_log(&trained.trainer.log))?;
            }
            let trace = trained.trace();
            let (acc_train, acc_test) = (net.accuracy(&train)?, net.accuracy(&test)?);
            match output.format {
                ReportFormat::Structured => {
                    let v = serde_json::json!({
                        "seed": cfg.seed,
                        "architecture": trace,
                        "inputs_pruned": net.input_count() - net.active_input_count(),
                        "accuracy": { "train": acc_train, "test": acc_test },
                    });
                    outln!("{}", serde_json::to_string_pretty(&v).expect("json value"));
                }
                ReportFormat::Text => {
                    outln!("seed {}", cfg.seed);
                    outln!("initial      {}", trace.initial);
                    outln!("constructed  {}", trace.intermediate);
                    outln!("pruned       {}", trace.final_);
                    outln!(
                        "epochs       {} constructive, {} total",
                        trace.constructive_epochs,
                        trace.total_epochs
                    );
                    outln!(
                        "accuracy     {:.2}% train, {:.2}% test",
                        acc_train * 100.0,
                        acc_test * 100.0
                    );
                }
            }
            Ok(())
        }
        Command::Extract {
            checkpoint,
            source,
            out,
            output,
        } => {
            let cfg = config_for(&source)?;
            let net = Network::load(&checkpoint)?;
            let (train, _, schema) = cfg.load_split()?;
            let ex = extract_phases(&cfg, &net, &train, &schema)?;
            let json = ex.symbolic.to_json()?;
            if let Some(path) = out {
                write(&path, &json)?;
            }
            match output.format {
                ReportFormat::Structured => outln!("{json}"),
                ReportFormat::Text => {
                    if ex.shortfall {
                        outln!(
                            "note: clustering kept its best attempt below the required accuracy"
                        );
                    }
                    out!("{}", ensure_newline(ex.symbolic.render_text()));
                }
            }
            Ok(())
        }
        Command::Evaluate {
            rules,
            source,
            min_accuracy,
            output,
        } => {
            let text = std::fs::read_to_string(&rules)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", rules.display())))?;
            let rs = SymbolicRuleSet::from_json(&text)?;
            let cfg = config_for(&source)?;
            let (train, test, _) = cfg.load_split()?;
            let on_train = evaluate_rules(&rs, &train)?;
            let on_test = evaluate_rules(&rs, &test)?;
            match output.format {
                ReportFormat::Structured => {
                    let v = serde_json::json!({ "train": on_train, "test": on_test });
                    outln!("{}", serde_json::to_string_pretty(&v).expect("json value"));
                }
                ReportFormat::Text => {
                    for (name, e) in [("train", &on_train), ("test", &on_test)] {
                        outln!(
                            "{name:<6}{:>7.2}%  {}/{} correct, {} conflicts, {} by default",
                            e.accuracy * 100.0,
                            e.correct,
                            e.total,
                            e.conflicts,
                            e.defaulted
                        );
                    }
                }
            }
            match min_accuracy {
                Some(min) if on_test.accuracy * 100.0 < min => Err(Failure::Acceptance(format!(
                    "test accuracy {:.2}% below {min}%",
                    on_test.accuracy * 100.0
                ))),
                _ => Ok(()),
            }
        }
        Command::Report { report, output } => {
            let rep = ExperimentReport::load(&report)?;
            out!("{}", ensure_newline(rep.render(output.format)?));
            Ok(())
        }
    }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}
