//! Experiment configuration: a flat key = value text file with typed
//! validation, overridable by CLI flags. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rewatt_core::attack::{AttackConfig, BudgetMode, PenaltyMode};
use rewatt_core::classifier::ClassifierTrainConfig;
use rewatt_core::data::{FeatureMode, SyntheticSpec};
use rewatt_core::error::{Error, Result};
use rewatt_core::graph::ThirdNodeMode;
use rewatt_core::policy::AttackerTrainConfig;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub split_a: u32,
    pub split_b: u32,
    pub split_c: u32,
    pub feature_mode: FeatureMode,
    pub self_loops: bool,

    pub classifier_layers: usize,
    pub classifier_hidden: usize,
    pub classifier_lr: f64,
    pub classifier_momentum: f64,
    pub classifier_epochs: usize,
    pub classifier_batch: usize,

    pub attacker_epochs: usize,
    pub attacker_batch_graphs: usize,
    pub attacker_episodes_per_graph: usize,
    pub attacker_lr: f64,
    pub attacker_embed_dim: usize,
    pub literal_third_rep: bool,
    /// Budget ratio used while training attackers.
    pub train_budget_p: f64,

    pub penalty_value: f64,

    pub synth: SyntheticSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            split_a: 50,
            split_b: 30,
            split_c: 20,
            feature_mode: FeatureMode::DegreeBuckets,
            self_loops: false,
            classifier_layers: 3,
            classifier_hidden: 32,
            classifier_lr: 0.01,
            classifier_momentum: 0.9,
            classifier_epochs: 200,
            classifier_batch: 32,
            attacker_epochs: 30,
            attacker_batch_graphs: 8,
            attacker_episodes_per_graph: 2,
            attacker_lr: 0.05,
            attacker_embed_dim: 32,
            literal_third_rep: true,
            train_budget_p: 0.03,
            penalty_value: -0.5,
            synth: SyntheticSpec::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::Config(format!("bad value for {key}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean for {key}: '{value}'"))),
    }
}

impl ExperimentConfig {
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "split_a" => self.split_a = parse(key, value)?,
            "split_b" => self.split_b = parse(key, value)?,
            "split_c" => self.split_c = parse(key, value)?,
            "feature_mode" => self.feature_mode = FeatureMode::parse(value)?,
            "self_loops" => self.self_loops = parse_bool(key, value)?,
            "classifier_layers" => self.classifier_layers = parse(key, value)?,
            "classifier_hidden" => self.classifier_hidden = parse(key, value)?,
            "classifier_lr" => self.classifier_lr = parse(key, value)?,
            "classifier_momentum" => self.classifier_momentum = parse(key, value)?,
            "classifier_epochs" => self.classifier_epochs = parse(key, value)?,
            "classifier_batch" => self.classifier_batch = parse(key, value)?,
            "attacker_epochs" => self.attacker_epochs = parse(key, value)?,
            "attacker_batch_graphs" => self.attacker_batch_graphs = parse(key, value)?,
            "attacker_episodes_per_graph" => {
                self.attacker_episodes_per_graph = parse(key, value)?
            }
            "attacker_lr" => self.attacker_lr = parse(key, value)?,
            "attacker_embed_dim" => self.attacker_embed_dim = parse(key, value)?,
            "literal_third_rep" => self.literal_third_rep = parse_bool(key, value)?,
            "train_budget_p" => self.train_budget_p = parse(key, value)?,
            "penalty_value" => self.penalty_value = parse(key, value)?,
            "synth_classes" => self.synth.classes = parse(key, value)?,
            "synth_per_class" => self.synth.graphs_per_class = parse(key, value)?,
            "synth_min_nodes" => self.synth.min_nodes = parse(key, value)?,
            "synth_max_nodes" => self.synth.max_nodes = parse(key, value)?,
            "synth_intra_prob" => self.synth.intra_prob = parse(key, value)?,
            "synth_intra_jitter" => self.synth.intra_jitter = parse(key, value)?,
            "synth_inter_prob" => self.synth.inter_prob = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Parse a flat key = value file ('#' starts a comment).
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let content = std::fs::read_to_string(path)?;
        for (i, raw) in content.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                file: path.display().to_string(),
                line: i + 1,
                msg: "expected 'key = value'".into(),
            })?;
            self.apply_kv(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    file: path.display().to_string(),
                    line: i + 1,
                    msg: e.to_string(),
                })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.split_a + self.split_b + self.split_c != 100
            || self.split_a == 0
            || self.split_b == 0
            || self.split_c == 0
        {
            return Err(Error::Config(format!(
                "split {}/{}/{} must be positive and sum to 100",
                self.split_a, self.split_b, self.split_c
            )));
        }
        if !(self.train_budget_p > 0.0 && self.train_budget_p < 1.0) {
            return Err(Error::Config("train_budget_p must lie in (0,1)".into()));
        }
        if self.penalty_value >= 0.0 {
            return Err(Error::Config("penalty_value must be negative".into()));
        }
        self.synth.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn classifier_config(&self) -> ClassifierTrainConfig {
        ClassifierTrainConfig {
            num_layers: self.classifier_layers,
            hidden_dim: self.classifier_hidden,
            learning_rate: self.classifier_lr,
            momentum: self.classifier_momentum,
            epochs: self.classifier_epochs,
            batch_size: self.classifier_batch,
            self_loops: self.self_loops,
        }
    }

    pub fn attacker_config(&self) -> AttackerTrainConfig {
        AttackerTrainConfig {
            epochs: self.attacker_epochs,
            batch_graphs: self.attacker_batch_graphs,
            episodes_per_graph: self.attacker_episodes_per_graph,
            learning_rate: self.attacker_lr,
            embed_dim: self.attacker_embed_dim,
            literal_third_rep: self.literal_third_rep,
            self_loops: self.self_loops,
        }
    }

    /// Flat echo of every key, for the run manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("seed", self.seed.to_string());
        put("split_a", self.split_a.to_string());
        put("split_b", self.split_b.to_string());
        put("split_c", self.split_c.to_string());
        put("feature_mode", self.feature_mode.as_str().to_string());
        put("self_loops", self.self_loops.to_string());
        put("classifier_layers", self.classifier_layers.to_string());
        put("classifier_hidden", self.classifier_hidden.to_string());
        put("classifier_lr", self.classifier_lr.to_string());
        put("classifier_momentum", self.classifier_momentum.to_string());
        put("classifier_epochs", self.classifier_epochs.to_string());
        put("classifier_batch", self.classifier_batch.to_string());
        put("attacker_epochs", self.attacker_epochs.to_string());
        put("attacker_batch_graphs", self.attacker_batch_graphs.to_string());
        put(
            "attacker_episodes_per_graph",
            self.attacker_episodes_per_graph.to_string(),
        );
        put("attacker_lr", self.attacker_lr.to_string());
        put("attacker_embed_dim", self.attacker_embed_dim.to_string());
        put("literal_third_rep", self.literal_third_rep.to_string());
        put("train_budget_p", self.train_budget_p.to_string());
        put("penalty_value", self.penalty_value.to_string());
        put("synth_classes", self.synth.classes.to_string());
        put("synth_per_class", self.synth.graphs_per_class.to_string());
        put("synth_min_nodes", self.synth.min_nodes.to_string());
        put("synth_max_nodes", self.synth.max_nodes.to_string());
        put("synth_intra_prob", self.synth.intra_prob.to_string());
        put("synth_intra_jitter", self.synth.intra_jitter.to_string());
        put("synth_inter_prob", self.synth.inter_prob.to_string());
        m
    }
}

/// Attacker variants exposed by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Rewatt,
    RewattA,
    RewattN,
    Random,
    RandomS,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rewatt" => Ok(Variant::Rewatt),
            "rewatt-a" => Ok(Variant::RewattA),
            "rewatt-n" => Ok(Variant::RewattN),
            "random" => Ok(Variant::Random),
            "random-s" => Ok(Variant::RandomS),
            other => Err(Error::Config(format!(
                "unknown variant '{other}' (expected rewatt, rewatt-a, rewatt-n, random, random-s)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Rewatt => "rewatt",
            Variant::RewattA => "rewatt-a",
            Variant::RewattN => "rewatt-n",
            Variant::Random => "random",
            Variant::RandomS => "random-s",
        }
    }

    /// Which trained policy this variant needs, if any.
    pub fn policy_kind(&self) -> Option<Variant> {
        match self {
            Variant::Rewatt | Variant::RewattA | Variant::RewattN => Some(*self),
            Variant::Random | Variant::RandomS => None,
        }
    }

    pub fn third_node_mode(&self) -> ThirdNodeMode {
        match self {
            Variant::RewattA => ThirdNodeMode::AnyNode,
            _ => ThirdNodeMode::TwoHop,
        }
    }

    /// Attack configuration for this variant at an evaluation budget.
    pub fn attack_config(&self, budget: BudgetMode, penalty_value: f64) -> AttackConfig {
        AttackConfig {
            budget,
            penalty: match self {
                Variant::RewattN => PenaltyMode::Fixed(penalty_value),
                _ => PenaltyMode::Flexible,
            },
            third_node_mode: self.third_node_mode(),
        }
    }
}

/// Parse "0.01,0.02,0.03" into ratio budgets or "1,2,3" into fixed budgets.
pub fn parse_budgets(p_list: Option<&str>, k_list: Option<&str>) -> Result<Vec<BudgetMode>> {
    match (p_list, k_list) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give either --budget-p or --budget-k, not both".into(),
        )),
        (None, None) => Ok(vec![BudgetMode::Ratio(0.03)]),
        (Some(ps), None) => ps
            .split(',')
            .map(|s| {
                let p: f64 = parse("budget-p", s.trim())?;
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Config(format!("budget ratio {p} not in (0,1)")));
                }
                Ok(BudgetMode::Ratio(p))
            })
            .collect(),
        (None, Some(ks)) => ks
            .split(',')
            .map(|s| {
                let k: usize = parse("budget-k", s.trim())?;
                if k == 0 {
                    return Err(Error::Config("fixed budget must be at least 1".into()));
                }
                Ok(BudgetMode::Fixed(k))
            })
            .collect(),
    }
}

/// Stable text form of a budget, used in CSV rows and map keys.
pub fn budget_label(b: &BudgetMode) -> String {
    let mut s = String::new();
    match b {
        BudgetMode::Ratio(p) => write!(s, "p,{p}").unwrap(),
        BudgetMode::Fixed(k) => write!(s, "k,{k}").unwrap(),
    }
    s
}
