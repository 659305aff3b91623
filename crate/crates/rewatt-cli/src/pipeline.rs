//! Experiment pipelines: dataset generation, victim and attacker training,
//! the multi-variant attack suite, post-hoc analysis, and the operator
//! comparison. Everything is driven by one master seed fanned out into
//! per-task streams, so a run is reproducible byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use rewatt_core::analysis::{analyze_attack, compare_operators, OperatorCase};
use rewatt_core::attack::{
    compute_budget, random_attack, random_s_attack, BudgetMode, Outcome, Trajectory,
    TrajectoryStep,
};
use rewatt_core::checkpoint;
use rewatt_core::classifier::{predict, train_classifier, ClassifierModel, LabelOracle};
use rewatt_core::data::{gen_synthetic, load_dataset, split_indices};
use rewatt_core::error::{Error, Result};
use rewatt_core::graph::{apply_rewiring, random_rewirings, Graph, RewiringAction};
use rewatt_core::policy::{policy_rollout, train_attacker, PolicyModel};

use crate::config::{budget_label, ExperimentConfig, Variant};
use crate::report;

/// Fan one master seed into independent named streams (FNV-1a mix).
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in master.to_le_bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn rng_for(master: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag))
}

// ---------------------------------------------------------------------------
// Recorded attack outcomes
// ---------------------------------------------------------------------------

/// One evaluated episode, as persisted to the attack report and
/// trajectory files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub graph_id: usize,
    pub variant: String,
    pub budget: String,
    pub k: usize,
    pub m: usize,
    pub outcome: String,
    pub oracle_queries: usize,
    pub actions: Vec<(usize, usize, usize)>,
}

impl EpisodeRecord {
    pub fn success(&self) -> bool {
        self.outcome == "success"
    }
}

#[derive(Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub version: u32,
    pub dataset: String,
    pub entries: Vec<EpisodeRecord>,
}

/// Per-variant per-budget success summary.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub variant: String,
    pub budget: String,
    pub total: usize,
    pub succeeded: usize,
    pub budget_exhausted: usize,
    pub no_valid_action: usize,
}

impl SummaryRow {
    pub fn success_rate(&self) -> f64 {
        self.succeeded as f64 / self.total as f64
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuccessRateReport {
    pub rows: Vec<SummaryRow>,
}

pub struct SuiteResult {
    pub episodes: Vec<EpisodeRecord>,
    pub summary: SuccessRateReport,
    /// (variant, budget, wall milliseconds)
    pub timings: Vec<(String, String, u128)>,
}

fn record_episode(
    graph_id: usize,
    variant: Variant,
    budget: &BudgetMode,
    k: usize,
    traj: &Trajectory,
) -> EpisodeRecord {
    EpisodeRecord {
        graph_id,
        variant: variant.as_str().to_string(),
        budget: budget_label(budget),
        k,
        m: traj.num_steps(),
        outcome: traj.outcome.as_str().to_string(),
        oracle_queries: traj.oracle_queries,
        actions: traj
            .steps
            .iter()
            .map(|s| (s.action.fir, s.action.sec, s.action.thi))
            .collect(),
    }
}

/// Evaluate the requested variants over the test graphs at each budget.
///
/// `test` carries (dataset id, graph) pairs; clean labels are queried once
/// per graph up front. The matched-step baseline consumes the step counts
/// recorded for the trained two-hop attacker at the same budget, so that
/// variant must be present whenever the matched baseline is.
pub fn run_attack_suite(
    cfg: &ExperimentConfig,
    test: &[(usize, Graph)],
    classifier: &ClassifierModel,
    policies: &BTreeMap<Variant, PolicyModel>,
    variants: &[Variant],
    budgets: &[BudgetMode],
) -> Result<SuiteResult> {
    if test.is_empty() {
        return Err(Error::Config("empty test split".into()));
    }
    if variants.is_empty() {
        return Err(Error::Config("no variants requested".into()));
    }
    if variants.contains(&Variant::RandomS) && !variants.contains(&Variant::Rewatt) {
        return Err(Error::Config(
            "random-s needs the rewatt variant in the same run to match step counts".into(),
        ));
    }
    for v in variants {
        if let Some(kind) = v.policy_kind() {
            if !policies.contains_key(&kind) {
                return Err(Error::Config(format!(
                    "variant {} has no trained policy",
                    v.as_str()
                )));
            }
        }
    }

    // order: every variant except the matched baseline first, then random-s
    let mut ordered: Vec<Variant> = variants
        .iter()
        .copied()
        .filter(|v| *v != Variant::RandomS)
        .collect();
    if variants.contains(&Variant::RandomS) {
        ordered.push(Variant::RandomS);
    }

    let clean_labels: Vec<usize> = test
        .iter()
        .map(|(_, g)| predict(g, classifier).map(|p| p.label))
        .collect::<Result<_>>()?;

    let mut episodes = Vec::new();
    let mut summary = SuccessRateReport::default();
    let mut timings = Vec::new();

    for budget in budgets {
        let blabel = budget_label(budget);
        // step counts of the trained two-hop attacker, for the matched baseline
        let mut rewatt_steps: BTreeMap<usize, usize> = BTreeMap::new();

        for &variant in &ordered {
            let started = Instant::now();
            let attack_cfg = variant.attack_config(*budget, cfg.penalty_value);
            let mut row = SummaryRow {
                variant: variant.as_str().to_string(),
                budget: blabel.clone(),
                total: 0,
                succeeded: 0,
                budget_exhausted: 0,
                no_valid_action: 0,
            };
            for ((gid, g), &clean) in test.iter().zip(&clean_labels) {
                let mut rng = rng_for(
                    cfg.seed,
                    &format!("eval/{}/{}/{}", variant.as_str(), blabel, gid),
                );
                let traj = match variant {
                    Variant::Random => random_attack(g, clean, classifier, &attack_cfg, &mut rng)?,
                    Variant::RandomS => {
                        let steps = *rewatt_steps.get(gid).expect("rewatt evaluated first");
                        random_s_attack(g, clean, classifier, &attack_cfg, steps, &mut rng)?
                    }
                    Variant::Rewatt | Variant::RewattA | Variant::RewattN => {
                        let policy = &policies[&variant];
                        policy_rollout(g, clean, classifier, policy, &attack_cfg, &mut rng)?
                    }
                };
                if variant == Variant::Rewatt {
                    rewatt_steps.insert(*gid, traj.num_steps());
                }
                let k = compute_budget(g, &attack_cfg)?;
                row.total += 1;
                match traj.outcome {
                    Outcome::Success => row.succeeded += 1,
                    Outcome::BudgetExhausted => row.budget_exhausted += 1,
                    Outcome::NoValidAction => row.no_valid_action += 1,
                }
                episodes.push(record_episode(*gid, variant, budget, k, &traj));
            }
            summary.rows.push(row);
            timings.push((
                variant.as_str().to_string(),
                blabel.clone(),
                started.elapsed().as_millis(),
            ));
        }
    }

    Ok(SuiteResult {
        episodes,
        summary,
        timings,
    })
}

/// Train the policy a variant needs, on the attacker-train split.
pub fn train_variant_policy(
    cfg: &ExperimentConfig,
    variant: Variant,
    train_graphs: &[Graph],
    oracle: &dyn LabelOracle,
) -> Result<(PolicyModel, Vec<f64>)> {
    let attack_cfg = variant.attack_config(BudgetMode::Ratio(cfg.train_budget_p), cfg.penalty_value);
    let mut rng = rng_for(cfg.seed, &format!("train-attacker/{}", variant.as_str()));
    train_attacker(
        train_graphs,
        oracle,
        &attack_cfg,
        &cfg.attacker_config(),
        &mut rng,
    )
}

// ---------------------------------------------------------------------------
// Commands (filesystem in, filesystem out)
// ---------------------------------------------------------------------------

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_manifest(
    dir: &Path,
    cfg: &ExperimentConfig,
    command: &str,
    extra: &BTreeMap<String, String>,
) -> Result<()> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        version: u32,
        command: &'a str,
        master_seed: u64,
        config: BTreeMap<String, String>,
        artifacts: &'a BTreeMap<String, String>,
    }
    let manifest = Manifest {
        version: 1,
        command,
        master_seed: cfg.seed,
        config: cfg.echo(),
        artifacts: extra,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

pub fn cmd_gen_synth(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let graphs = gen_synthetic(&cfg.synth, derive_seed(cfg.seed, "synth"))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    rewatt_core::data::save_dataset(out, &graphs, cfg.synth.feature_mode)?;
    Ok(())
}

pub struct LoadedDataset {
    pub graphs: Vec<Graph>,
    pub path: PathBuf,
}

pub fn load_dataset_file(path: &Path) -> Result<LoadedDataset> {
    let (graphs, _) = load_dataset(path)?;
    if graphs.is_empty() {
        return Err(Error::Config("dataset is empty".into()));
    }
    Ok(LoadedDataset {
        graphs,
        path: path.to_path_buf(),
    })
}

pub fn cmd_train_classifier(cfg: &ExperimentConfig, dataset: &Path, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    let data = load_dataset_file(dataset)?;
    let (ia, ib, ic) = split_indices(
        data.graphs.len(),
        cfg.split_a,
        cfg.split_b,
        cfg.split_c,
        derive_seed(cfg.seed, "split"),
    )?;
    let train: Vec<Graph> = ia.iter().map(|&i| data.graphs[i].clone()).collect();
    let holdout: Vec<Graph> = ib.iter().chain(&ic).map(|&i| data.graphs[i].clone()).collect();

    let mut rng = rng_for(cfg.seed, "train-classifier");
    let (model, trace) = train_classifier(&train, &cfg.classifier_config(), &mut rng)?;
    let holdout_acc = rewatt_core::classifier::accuracy(&model, &holdout)?;

    ensure_dir(out_dir)?;
    checkpoint::save_classifier(&out_dir.join("classifier.json"), &model)?;
    report::write_classifier_trace(&out_dir.join("classifier_trace.csv"), &trace)?;
    let mut extra = BTreeMap::new();
    extra.insert("classifier".into(), "classifier.json".into());
    extra.insert("dataset".into(), data.path.display().to_string());
    extra.insert("holdout_accuracy".into(), holdout_acc.to_string());
    write_manifest(out_dir, cfg, "train-classifier", &extra)?;
    Ok(())
}

pub fn cmd_train_attacker(
    cfg: &ExperimentConfig,
    dataset: &Path,
    classifier_path: &Path,
    variant: Variant,
    out_dir: &Path,
) -> Result<()> {
    cfg.validate()?;
    if variant.policy_kind().is_none() {
        return Err(Error::Config(format!(
            "variant {} does not use a trained policy",
            variant.as_str()
        )));
    }
    let data = load_dataset_file(dataset)?;
    let classifier = checkpoint::load_classifier(classifier_path)?;
    let (_, ib, _) = split_indices(
        data.graphs.len(),
        cfg.split_a,
        cfg.split_b,
        cfg.split_c,
        derive_seed(cfg.seed, "split"),
    )?;
    let train: Vec<Graph> = ib.iter().map(|&i| data.graphs[i].clone()).collect();

    let (policy, curve) = train_variant_policy(cfg, variant, &train, &classifier)?;

    ensure_dir(out_dir)?;
    let name = format!("policy_{}.json", variant.as_str());
    checkpoint::save_policy(&out_dir.join(&name), &policy)?;
    report::write_attacker_curve(&out_dir.join("attacker_curve.csv"), &curve)?;
    let mut extra = BTreeMap::new();
    extra.insert("policy".into(), name);
    extra.insert("classifier".into(), classifier_path.display().to_string());
    extra.insert("dataset".into(), data.path.display().to_string());
    write_manifest(out_dir, cfg, "train-attacker", &extra)?;
    Ok(())
}

pub struct AttackCmdOptions {
    pub variants: Vec<Variant>,
    pub budgets: Vec<BudgetMode>,
    pub policy_paths: BTreeMap<Variant, PathBuf>,
    pub train_missing: bool,
}

pub fn cmd_attack(
    cfg: &ExperimentConfig,
    dataset: &Path,
    classifier_path: &Path,
    opts: &AttackCmdOptions,
    out_dir: &Path,
) -> Result<()> {
    cfg.validate()?;
    let data = load_dataset_file(dataset)?;
    let classifier = checkpoint::load_classifier(classifier_path)?;
    let (_, ib, ic) = split_indices(
        data.graphs.len(),
        cfg.split_a,
        cfg.split_b,
        cfg.split_c,
        derive_seed(cfg.seed, "split"),
    )?;

    // resolve policies before touching the output directory
    let mut policies: BTreeMap<Variant, PolicyModel> = BTreeMap::new();
    let needed: Vec<Variant> = {
        let mut v: Vec<Variant> = opts
            .variants
            .iter()
            .filter_map(|v| v.policy_kind())
            .collect();
        v.sort();
        v.dedup();
        v
    };
    let attacker_train: Vec<Graph> = ib.iter().map(|&i| data.graphs[i].clone()).collect();
    for kind in needed {
        if let Some(path) = opts.policy_paths.get(&kind) {
            let policy = checkpoint::load_policy(path)?;
            if policy.config.mode != kind.third_node_mode() {
                return Err(Error::Config(format!(
                    "policy checkpoint {} was trained for a different third-node rule",
                    path.display()
                )));
            }
            policies.insert(kind, policy);
        } else if opts.train_missing {
            let (policy, _) = train_variant_policy(cfg, kind, &attacker_train, &classifier)?;
            policies.insert(kind, policy);
        } else {
            return Err(Error::Config(format!(
                "no checkpoint given for {} (pass --policy {}=PATH or --train-missing)",
                kind.as_str(),
                kind.as_str()
            )));
        }
    }

    let test: Vec<(usize, Graph)> = ic.iter().map(|&i| (i, data.graphs[i].clone())).collect();
    let result = run_attack_suite(cfg, &test, &classifier, &policies, &opts.variants, &opts.budgets)?;

    ensure_dir(out_dir)?;
    report::write_attack_report(&out_dir.join("attack_report.csv"), &result.episodes)?;
    report::write_summary(&out_dir.join("summary.csv"), &result.summary)?;
    report::write_timings(&out_dir.join("timings.csv"), &result.timings)?;
    let traj_file = TrajectoryFile {
        version: 1,
        dataset: data.path.display().to_string(),
        entries: result.episodes.clone(),
    };
    std::fs::write(
        out_dir.join("trajectories.json"),
        serde_json::to_string(&traj_file)?,
    )?;
    let mut extra = BTreeMap::new();
    extra.insert("classifier".into(), classifier_path.display().to_string());
    extra.insert("dataset".into(), data.path.display().to_string());
    for (variant, policy) in &policies {
        let name = format!("policy_{}.json", variant.as_str());
        checkpoint::save_policy(&out_dir.join(&name), policy)?;
        extra.insert(format!("policy_{}", variant.as_str()), name);
    }
    write_manifest(out_dir, cfg, "attack", &extra)?;
    Ok(())
}

/// Rebuild a trajectory from a recorded action list by replaying it on the
/// clean graph. Rewards and log-probabilities are not recorded; analysis
/// never reads them.
pub fn replay_trajectory(g: &Graph, rec: &EpisodeRecord) -> Result<Trajectory> {
    let mut current = g.clone();
    let mut steps = Vec::with_capacity(rec.actions.len());
    for &(fir, sec, thi) in &rec.actions {
        let action = RewiringAction { fir, sec, thi };
        let next = apply_rewiring(&current, &action).map_err(|e| {
            Error::Integrity(format!(
                "recorded action replay failed on graph {}: {e}",
                rec.graph_id
            ))
        })?;
        steps.push(TrajectoryStep {
            state: current,
            action,
            reward: 0.0,
            log_prob: 0.0,
        });
        current = next;
    }
    let outcome = match rec.outcome.as_str() {
        "success" => Outcome::Success,
        "budget_exhausted" => Outcome::BudgetExhausted,
        "no_valid_action" => Outcome::NoValidAction,
        other => {
            return Err(Error::Integrity(format!(
                "unknown recorded outcome '{other}'"
            )))
        }
    };
    Ok(Trajectory {
        steps,
        outcome,
        final_graph: current,
        original_label: 0,
        oracle_queries: rec.oracle_queries,
    })
}

pub fn load_trajectories(path: &Path) -> Result<TrajectoryFile> {
    let file: TrajectoryFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if file.version != 1 {
        return Err(Error::invalid("unsupported trajectory file version"));
    }
    Ok(file)
}

pub fn cmd_analyze(
    cfg: &ExperimentConfig,
    dataset: &Path,
    classifier_path: &Path,
    trajectories: &Path,
    out_dir: &Path,
) -> Result<()> {
    let data = load_dataset_file(dataset)?;
    let classifier = checkpoint::load_classifier(classifier_path)?;
    let traj_file = load_trajectories(trajectories)?;

    let mut rows = Vec::new();
    for rec in &traj_file.entries {
        let g = data.graphs.get(rec.graph_id).ok_or_else(|| {
            Error::Integrity(format!("graph id {} beyond dataset", rec.graph_id))
        })?;
        let traj = replay_trajectory(g, rec)?;
        let record = analyze_attack(rec.graph_id, g, &traj, &classifier)?;
        rows.push((rec.variant.clone(), rec.budget.clone(), record));
    }

    ensure_dir(out_dir)?;
    report::write_analysis(&out_dir.join("analysis.csv"), &rows)?;
    let mut extra = BTreeMap::new();
    extra.insert("classifier".into(), classifier_path.display().to_string());
    extra.insert("dataset".into(), data.path.display().to_string());
    extra.insert("trajectories".into(), trajectories.display().to_string());
    write_manifest(out_dir, cfg, "analyze", &extra)?;
    Ok(())
}

pub enum CompareSource {
    /// Recorded successful episodes of this variant (trajectory file).
    Trajectories { path: PathBuf, variant: Variant },
    /// Apply this many uniform random rewirings per test graph.
    RandomOps(usize),
}

pub fn cmd_spectral_compare(
    cfg: &ExperimentConfig,
    dataset: &Path,
    source: &CompareSource,
    out_dir: &Path,
) -> Result<()> {
    cfg.validate()?;
    let data = load_dataset_file(dataset)?;
    let mut cases = Vec::new();
    match source {
        CompareSource::Trajectories { path, variant } => {
            let traj_file = load_trajectories(path)?;
            for rec in &traj_file.entries {
                if rec.variant != variant.as_str() || !rec.success() || rec.m == 0 {
                    continue;
                }
                let g = data.graphs.get(rec.graph_id).ok_or_else(|| {
                    Error::Integrity(format!("graph id {} beyond dataset", rec.graph_id))
                })?;
                let traj = replay_trajectory(g, rec)?;
                cases.push(OperatorCase {
                    id: rec.graph_id,
                    original: g.clone(),
                    rewired: traj.final_graph,
                    ops: rec.m,
                });
            }
            if cases.is_empty() {
                return Err(Error::Config(
                    "no successful recorded episodes to compare".into(),
                ));
            }
        }
        CompareSource::RandomOps(ops) => {
            if *ops == 0 {
                return Err(Error::Config("ops must be at least 1".into()));
            }
            let (_, _, ic) = split_indices(
                data.graphs.len(),
                cfg.split_a,
                cfg.split_b,
                cfg.split_c,
                derive_seed(cfg.seed, "split"),
            )?;
            for &gid in &ic {
                let g = &data.graphs[gid];
                let mut rng = rng_for(cfg.seed, &format!("compare-rewire/{gid}"));
                let (rewired, applied) = random_rewirings(g, *ops, &mut rng);
                if applied == 0 {
                    continue;
                }
                cases.push(OperatorCase {
                    id: gid,
                    original: g.clone(),
                    rewired,
                    ops: applied,
                });
            }
            if cases.is_empty() {
                return Err(Error::Config("no graph admitted any rewiring".into()));
            }
        }
    }

    let mut rng = rng_for(cfg.seed, "compare-add-delete");
    let report_data = compare_operators(&cases, &mut rng)?;

    ensure_dir(out_dir)?;
    report::write_spectral_compare(&out_dir.join("spectral_compare.csv"), &report_data)?;
    report::write_ratio_summary(&out_dir.join("ratio_summary.csv"), &report_data)?;
    report::write_operator_summary(&out_dir.join("operator_summary.csv"), &report_data)?;
    let mut extra = BTreeMap::new();
    extra.insert("dataset".into(), data.path.display().to_string());
    write_manifest(out_dir, cfg, "spectral-compare", &extra)?;
    Ok(())
}
