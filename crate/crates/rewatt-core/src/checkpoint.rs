//! Model checkpoints: structured JSON with weights as decimal strings
//! (shortest-roundtrip formatting, so save/load is bit-exact). Loading
//! re-validates every dimension invariant.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierModel, GcnConfig};
use crate::error::{Error, Result};
use crate::graph::ThirdNodeMode;
use crate::numeric::DenseMatrix;
use crate::policy::{PolicyConfig, PolicyModel};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    data: Vec<String>,
}

impl MatrixRecord {
    fn from_matrix(m: &DenseMatrix) -> Self {
        MatrixRecord {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|v| format!("{v}")).collect(),
        }
    }

    fn to_matrix(&self) -> Result<DenseMatrix> {
        let data = self
            .data
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad weight '{s}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite weight in checkpoint"));
        }
        DenseMatrix::from_vec(self.rows, self.cols, data)
    }
}

#[derive(Serialize, Deserialize)]
struct ClassifierCheckpoint {
    version: u32,
    kind: String,
    feature_dim: usize,
    num_classes: usize,
    hidden_dims: Vec<usize>,
    self_loops: bool,
    layer_weights: Vec<MatrixRecord>,
    mlp_weights: Vec<MatrixRecord>,
}

pub fn save_classifier(path: &Path, model: &ClassifierModel) -> Result<()> {
    let ckpt = ClassifierCheckpoint {
        version: CHECKPOINT_VERSION,
        kind: "classifier".into(),
        feature_dim: model.feature_dim(),
        num_classes: model.num_classes,
        hidden_dims: model.hidden_dims.clone(),
        self_loops: model.config.self_loops,
        layer_weights: model.layer_weights.iter().map(MatrixRecord::from_matrix).collect(),
        mlp_weights: model.mlp_weights.iter().map(MatrixRecord::from_matrix).collect(),
    };
    fs::write(path, serde_json::to_string(&ckpt)?)?;
    Ok(())
}

pub fn load_classifier(path: &Path) -> Result<ClassifierModel> {
    let ckpt: ClassifierCheckpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if ckpt.version != CHECKPOINT_VERSION || ckpt.kind != "classifier" {
        return Err(Error::invalid(format!(
            "not a v{CHECKPOINT_VERSION} classifier checkpoint"
        )));
    }
    let model = ClassifierModel {
        layer_weights: ckpt
            .layer_weights
            .iter()
            .map(MatrixRecord::to_matrix)
            .collect::<Result<_>>()?,
        mlp_weights: ckpt
            .mlp_weights
            .iter()
            .map(MatrixRecord::to_matrix)
            .collect::<Result<_>>()?,
        num_classes: ckpt.num_classes,
        hidden_dims: ckpt.hidden_dims,
        config: GcnConfig {
            self_loops: ckpt.self_loops,
        },
    };
    model.validate(ckpt.feature_dim)?;
    Ok(model)
}

#[derive(Serialize, Deserialize)]
struct PolicyCheckpoint {
    version: u32,
    kind: String,
    feature_dim: usize,
    embed_dim: usize,
    third_node_mode: String,
    literal_third_rep: bool,
    self_loops: bool,
    embedder: Vec<MatrixRecord>,
    edge_head: Vec<MatrixRecord>,
    first_head: Vec<MatrixRecord>,
    third_head: Vec<MatrixRecord>,
}

fn mode_str(mode: ThirdNodeMode) -> &'static str {
    match mode {
        ThirdNodeMode::TwoHop => "two_hop",
        ThirdNodeMode::AnyNode => "any_node",
    }
}

pub fn parse_mode(s: &str) -> Result<ThirdNodeMode> {
    match s {
        "two_hop" => Ok(ThirdNodeMode::TwoHop),
        "any_node" => Ok(ThirdNodeMode::AnyNode),
        other => Err(Error::Config(format!("unknown third-node mode '{other}'"))),
    }
}

pub fn save_policy(path: &Path, model: &PolicyModel) -> Result<()> {
    let pair = |m: &[DenseMatrix; 2]| vec![MatrixRecord::from_matrix(&m[0]), MatrixRecord::from_matrix(&m[1])];
    let ckpt = PolicyCheckpoint {
        version: CHECKPOINT_VERSION,
        kind: "policy".into(),
        feature_dim: model.feature_dim,
        embed_dim: model.config.embed_dim,
        third_node_mode: mode_str(model.config.mode).into(),
        literal_third_rep: model.config.literal_third_rep,
        self_loops: model.config.self_loops,
        embedder: pair(&model.embedder),
        edge_head: pair(&model.edge_head),
        first_head: pair(&model.first_head),
        third_head: pair(&model.third_head),
    };
    fs::write(path, serde_json::to_string(&ckpt)?)?;
    Ok(())
}

pub fn load_policy(path: &Path) -> Result<PolicyModel> {
    let ckpt: PolicyCheckpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    if ckpt.version != CHECKPOINT_VERSION || ckpt.kind != "policy" {
        return Err(Error::invalid(format!(
            "not a v{CHECKPOINT_VERSION} policy checkpoint"
        )));
    }
    let pair = |v: &[MatrixRecord]| -> Result<[DenseMatrix; 2]> {
        if v.len() != 2 {
            return Err(Error::invalid("each policy block stores two matrices"));
        }
        Ok([v[0].to_matrix()?, v[1].to_matrix()?])
    };
    let model = PolicyModel {
        embedder: pair(&ckpt.embedder)?,
        edge_head: pair(&ckpt.edge_head)?,
        first_head: pair(&ckpt.first_head)?,
        third_head: pair(&ckpt.third_head)?,
        feature_dim: ckpt.feature_dim,
        config: PolicyConfig {
            embed_dim: ckpt.embed_dim,
            mode: parse_mode(&ckpt.third_node_mode)?,
            literal_third_rep: ckpt.literal_third_rep,
            self_loops: ckpt.self_loops,
        },
    };
    model.validate()?;
    Ok(model)
}
