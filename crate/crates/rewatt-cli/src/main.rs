use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rewatt_cli::config::{parse_budgets, ExperimentConfig, Variant};
use rewatt_cli::pipeline::{
    self, AttackCmdOptions, CompareSource,
};
use rewatt_core::error::Result;

#[derive(Parser)]
#[command(
    name = "rewatt",
    about = "Rewiring-based black-box attacks on GCN graph classifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Extra key=value config overrides, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path)?;
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                rewatt_core::error::Error::Config(format!("--set expects KEY=VALUE, got '{kv}'"))
            })?;
            cfg.apply_kv(k.trim(), v.trim())?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the planted-community synthetic dataset.
    GenSynth {
        #[command(flatten)]
        common: Common,
        /// Output dataset file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the GCN victim on the classifier split and save a checkpoint.
    TrainClassifier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        /// Output directory for checkpoint, trace and manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one attacker variant on the attacker split.
    TrainAttacker {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        /// rewatt, rewatt-a or rewatt-n.
        #[arg(long)]
        variant: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate attacker variants over the test split.
    Attack {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        /// Comma-separated variants (rewatt,rewatt-a,rewatt-n,random,random-s) or 'all'.
        #[arg(long, default_value = "all")]
        variant: String,
        /// Comma-separated budget ratios, e.g. "0.01,0.02,0.03".
        #[arg(long)]
        budget_p: Option<String>,
        /// Comma-separated fixed budgets, e.g. "1,2,3".
        #[arg(long)]
        budget_k: Option<String>,
        /// Policy checkpoints as variant=path, repeatable.
        #[arg(long = "policy", value_name = "VARIANT=PATH")]
        policy: Vec<String>,
        /// Train any missing policies on the attacker split.
        #[arg(long)]
        train_missing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute embedding/logit drift and spectra for recorded attacks.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        /// trajectories.json produced by the attack command.
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the rewiring operator against random edge adds/deletes.
    SpectralCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
        /// Recorded trajectories to take rewired graphs from.
        #[arg(long)]
        trajectories: Option<PathBuf>,
        /// Variant whose successful episodes are compared (with --trajectories).
        #[arg(long, default_value = "rewatt")]
        variant: String,
        /// Apply this many random rewirings per test graph instead.
        #[arg(long)]
        ops: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_variant_list(s: &str) -> Result<Vec<Variant>> {
    if s == "all" {
        return Ok(vec![
            Variant::Rewatt,
            Variant::RewattA,
            Variant::RewattN,
            Variant::Random,
            Variant::RandomS,
        ]);
    }
    s.split(',').map(|v| Variant::parse(v.trim())).collect()
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::GenSynth { common, out } => {
            let cfg = common.build()?;
            pipeline::cmd_gen_synth(&cfg, &out)
        }
        Cmd::TrainClassifier {
            common,
            dataset,
            out,
        } => {
            let cfg = common.build()?;
            pipeline::cmd_train_classifier(&cfg, &dataset, &out)
        }
        Cmd::TrainAttacker {
            common,
            dataset,
            classifier,
            variant,
            out,
        } => {
            let cfg = common.build()?;
            pipeline::cmd_train_attacker(&cfg, &dataset, &classifier, Variant::parse(&variant)?, &out)
        }
        Cmd::Attack {
            common,
            dataset,
            classifier,
            variant,
            budget_p,
            budget_k,
            policy,
            train_missing,
            out,
        } => {
            let cfg = common.build()?;
            let variants = parse_variant_list(&variant)?;
            let budgets = parse_budgets(budget_p.as_deref(), budget_k.as_deref())?;
            let mut policy_paths = BTreeMap::new();
            for spec in &policy {
                let (v, path) = spec.split_once('=').ok_or_else(|| {
                    rewatt_core::error::Error::Config(format!(
                        "--policy expects VARIANT=PATH, got '{spec}'"
                    ))
                })?;
                policy_paths.insert(Variant::parse(v.trim())?, PathBuf::from(path.trim()));
            }
            let opts = AttackCmdOptions {
                variants,
                budgets,
                policy_paths,
                train_missing,
            };
            pipeline::cmd_attack(&cfg, &dataset, &classifier, &opts, &out)
        }
        Cmd::Analyze {
            common,
            dataset,
            classifier,
            trajectories,
            out,
        } => {
            let cfg = common.build()?;
            pipeline::cmd_analyze(&cfg, &dataset, &classifier, &trajectories, &out)
        }
        Cmd::SpectralCompare {
            common,
            dataset,
            trajectories,
            variant,
            ops,
            out,
        } => {
            let cfg = common.build()?;
            let source = match (trajectories, ops) {
                (Some(path), None) => CompareSource::Trajectories {
                    path,
                    variant: Variant::parse(&variant)?,
                },
                (None, Some(ops)) => CompareSource::RandomOps(ops),
                _ => {
                    return Err(rewatt_core::error::Error::Config(
                        "give exactly one of --trajectories or --ops".into(),
                    ))
                }
            };
            pipeline::cmd_spectral_compare(&cfg, &dataset, &source, &out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
