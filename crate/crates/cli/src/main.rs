use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lpgnn_lab::gnn::Architecture;
use lpgnn_lab::graph::{generate_synthetic, save_dataset, SyntheticConfig};
use lpgnn_lab::harness::{
    run_experiment, run_sweep_rows, summarize_csv, to_csv, AttackSpec, DatasetSource, ExperimentConfig, HarnessError,
    ResultRow, SweepAxis,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

/// Locally private GNN experiments: baselines, attacks, sweeps and reports.
///
/// Run options left unset fall back to the `--config` file, then to the
/// built-in defaults listed with each option.
#[derive(Debug, Parser)]
#[command(name = "lpgnn", version)]
struct Cli {
    /// Root seed for every random stream (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (dataset directory for gen-data); stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON experiment config; see ExperimentConfig for the fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic planted-partition dataset directory (requires --out)
    GenData(GenData),
    /// Run the private pipeline without an attack
    Baseline(RunArgs),
    /// Run one attack
    Attack {
        #[command(subcommand)]
        attack: AttackCmd,
    },
    /// Run one experiment per value of a config field
    Sweep {
        /// rate, eps_x, eps_y, k_x or k_y (rate varies the attack's own knob)
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 1,2,4,8
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Attack for the base config (default: the config file's, else none)
        #[arg(long, value_enum)]
        attack: Option<AttackKind>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Aggregate a results CSV into a per-config mean ± std table
    Report {
        csv: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenData {
    /// Number of nodes (default 1000)
    #[arg(long)]
    nodes: Option<usize>,
    /// Number of classes (default 4)
    #[arg(long)]
    classes: Option<usize>,
    /// Feature dimension, a multiple of --classes (default 512)
    #[arg(long)]
    dim: Option<usize>,
    /// Same-class edge probability (default 0.05)
    #[arg(long)]
    intra: Option<f64>,
    /// Cross-class edge probability (default 0.005)
    #[arg(long)]
    inter: Option<f64>,
    /// Probability that a class-block feature is on (default 0.9)
    #[arg(long)]
    signal: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttackKind {
    None,
    Inject,
    Flip,
    Infer,
    Poison,
}

#[derive(Debug, Subcommand)]
enum AttackCmd {
    /// Add fake nodes wired to the highest-degree nodes
    Inject {
        /// Injected nodes per original node (default 0.1)
        #[arg(long)]
        rate: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Flip the labels of the highest-degree nodes before privatization
    Flip {
        /// Fraction of nodes flipped (default 0.1)
        #[arg(long)]
        rate: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Infer features of the highest-degree nodes from their neighborhoods
    Infer {
        /// Number of target nodes (default 10)
        #[arg(long)]
        targets: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Poison random nodes' features and read values off their responses
    Poison {
        /// Fraction of nodes poisoned (default 0.1)
        #[arg(long)]
        fraction: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    /// One JSON result row per line, with the full config echo
    Jsonl,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    /// Dataset directory (default: synthetic, 1000 nodes, 4 classes, 512 features)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// gcn or sage (default gcn)
    #[arg(long)]
    arch: Option<Architecture>,
    /// Feature privacy budget (default 8)
    #[arg(long)]
    eps_x: Option<f64>,
    /// Label privacy budget (default 4)
    #[arg(long)]
    eps_y: Option<f64>,
    /// Dimensions each node reports (default 16)
    #[arg(long)]
    m: Option<usize>,
    /// Feature propagation hops (default 4)
    #[arg(long)]
    k_x: Option<usize>,
    /// Label propagation hops (default 4)
    #[arg(long)]
    k_y: Option<usize>,
    /// Repeats per experiment (default 5)
    #[arg(long)]
    repeats: Option<usize>,
    /// Skip both privacy mechanisms
    #[arg(long)]
    non_private: bool,
    /// Check the feature domain before encoding
    #[arg(long)]
    defense: bool,
    /// Training epochs (default 300)
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate (default 0.05)
    #[arg(long)]
    lr: Option<f64>,
    /// Output format (default csv)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<HarnessError>() {
            Some(HarnessError::Config(_)) => USAGE_ERROR,
            _ => RUNTIME_ERROR,
        };
        Failure { code, error }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: USAGE_ERROR, error: anyhow::anyhow!(msg.into()) }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file_config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{} is not a valid experiment config: {e}", path.display())))?;
            Some(cfg)
        }
        None => None,
    };
    let mut base = file_config.unwrap_or_default();
    if let Some(seed) = cli.seed {
        base.seed = seed;
    }

    match cli.command {
        Command::GenData(g) => gen_data(&g, &base, cli.out.as_deref()),
        Command::Baseline(run) => {
            base.attack = AttackSpec::None;
            execute(&apply(base, &run), &run, cli.out.as_deref())
        }
        Command::Attack { attack } => {
            let (spec, run) = match attack {
                AttackCmd::Inject { rate, run } => {
                    let prev = match base.attack {
                        AttackSpec::Inject { rate } => Some(rate),
                        _ => None,
                    };
                    (AttackSpec::Inject { rate: rate.or(prev).unwrap_or(0.1) }, run)
                }
                AttackCmd::Flip { rate, run } => {
                    let prev = match base.attack {
                        AttackSpec::Flip { rate } => Some(rate),
                        _ => None,
                    };
                    (AttackSpec::Flip { rate: rate.or(prev).unwrap_or(0.1) }, run)
                }
                AttackCmd::Infer { targets, run } => {
                    let prev = match base.attack {
                        AttackSpec::Infer { targets } => Some(targets),
                        _ => None,
                    };
                    (AttackSpec::Infer { targets: targets.or(prev).unwrap_or(10) }, run)
                }
                AttackCmd::Poison { fraction, run } => {
                    let prev = match base.attack {
                        AttackSpec::Poison { fraction } => Some(fraction),
                        _ => None,
                    };
                    (AttackSpec::Poison { fraction: fraction.or(prev).unwrap_or(0.1) }, run)
                }
            };
            base.attack = spec;
            execute(&apply(base, &run), &run, cli.out.as_deref())
        }
        Command::Sweep { axis, values, attack, run } => {
            let axis: SweepAxis = axis.parse().map_err(|e: HarnessError| usage(e.to_string()))?;
            if let Some(kind) = attack {
                base.attack = match kind {
                    AttackKind::None => AttackSpec::None,
                    AttackKind::Inject => AttackSpec::Inject { rate: 0.1 },
                    AttackKind::Flip => AttackSpec::Flip { rate: 0.1 },
                    AttackKind::Infer => AttackSpec::Infer { targets: 10 },
                    AttackKind::Poison => AttackSpec::Poison { fraction: 0.1 },
                };
            }
            let cfg = apply(base, &run);
            let rows = run_sweep_rows(&cfg, axis, &values).map_err(anyhow::Error::from)?;
            emit(&rows, run.format, cli.out.as_deref())
        }
        Command::Report { csv } => {
            let text = fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let report = summarize_csv(&text).map_err(anyhow::Error::from)?;
            write_out(cli.out.as_deref(), &report.to_string())
        }
    }
}

fn apply(mut cfg: ExperimentConfig, run: &RunArgs) -> ExperimentConfig {
    if let Some(p) = &run.dataset {
        cfg.dataset = DatasetSource::Path(p.clone());
    }
    if let Some(a) = run.arch {
        cfg.architecture = a;
    }
    macro_rules! set {
        ($($field:ident <- $flag:ident),*) => { $(if let Some(v) = run.$flag { cfg.$field = v; })* };
    }
    set!(eps_x <- eps_x, eps_y <- eps_y, m <- m, k_x <- k_x, k_y <- k_y, repeats <- repeats);
    if let Some(e) = run.epochs {
        cfg.train.max_epochs = e;
    }
    if let Some(lr) = run.lr {
        cfg.train.learning_rate = lr;
    }
    if run.non_private {
        cfg.private = false;
    }
    if run.defense {
        cfg.defense_enabled = true;
    }
    cfg
}

fn execute(cfg: &ExperimentConfig, run: &RunArgs, out: Option<&Path>) -> Result<(), Failure> {
    let rows = run_experiment(cfg).map_err(anyhow::Error::from)?;
    emit(&rows, run.format, out)
}

fn emit(rows: &[ResultRow], format: Option<Format>, out: Option<&Path>) -> Result<(), Failure> {
    let text = match format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(rows).map_err(anyhow::Error::from)?,
        Format::Jsonl => {
            let mut s = String::new();
            for r in rows {
                s.push_str(&r.to_json().map_err(anyhow::Error::from)?);
                s.push('\n');
            }
            s
        }
    };
    write_out(out, &text)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(())
        }
    }
}

fn gen_data(g: &GenData, base: &ExperimentConfig, out: Option<&Path>) -> Result<(), Failure> {
    let out = out.ok_or_else(|| usage("gen-data needs --out <DIR>"))?;
    let mut cfg = match &base.dataset {
        DatasetSource::Synthetic(s) => s.clone(),
        DatasetSource::Path(_) => SyntheticConfig::default(),
    };
    macro_rules! set {
        ($($field:ident <- $flag:ident),*) => { $(if let Some(v) = g.$flag { cfg.$field = v; })* };
    }
    set!(num_nodes <- nodes, num_classes <- classes, d <- dim, intra_edge_prob <- intra, inter_edge_prob <- inter, feature_signal <- signal);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let ds = generate_synthetic(&cfg, base.seed).map_err(anyhow::Error::from)?;
    save_dataset(&ds, out).map_err(anyhow::Error::from)?;
    eprintln!("wrote {} nodes, {} edges to {}", ds.num_nodes(), ds.graph().num_edges(), out.display());
    Ok(())
}
