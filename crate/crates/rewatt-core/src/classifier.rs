//! The GCN graph classifier under attack: symmetric-normalized graph
//! convolutions, column-wise max pooling, and an MLP + softmax head.
//!
//! Attackers never see this module directly; they get a [`LabelOracle`],
//! which exposes nothing but the predicted label.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{softmax, DenseMatrix, Tape, Var};

/// Normalization switches for the convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[derive(Default)]
pub struct GcnConfig {
    /// Add self-loops before degree normalization. Off by default: the
    /// aggregation is D^{-1/2} A D^{-1/2} with A as-is.
    pub self_loops: bool,
}


/// Trained victim model: J convolution weight matrices and a two-matrix MLP
/// head (hidden + output).
#[derive(Clone, Debug)]
pub struct ClassifierModel {
    pub layer_weights: Vec<DenseMatrix>,
    pub mlp_weights: Vec<DenseMatrix>,
    pub num_classes: usize,
    pub hidden_dims: Vec<usize>,
    pub config: GcnConfig,
}

/// Output of [`predict`]: the label is the argmax of the class distribution
/// with ties broken toward the lowest index.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub label: usize,
    /// Post-softmax class distribution.
    pub logits: Vec<f64>,
    pub graph_embedding: Vec<f64>,
}

impl ClassifierModel {
    /// Validates the dimension chain feature -> conv layers -> MLP -> classes.
    pub fn validate(&self, feature_dim: usize) -> Result<()> {
        if self.layer_weights.is_empty() || self.mlp_weights.len() != 2 {
            return Err(Error::invalid(
                "model needs at least one conv layer and a 2-matrix MLP head",
            ));
        }
        let mut width = feature_dim;
        for (j, w) in self.layer_weights.iter().enumerate() {
            if w.rows() != width {
                return Err(Error::invalid(format!(
                    "conv layer {j} expects input width {}, got {width}",
                    w.rows()
                )));
            }
            width = w.cols();
        }
        if self.mlp_weights[0].rows() != width {
            return Err(Error::invalid("MLP hidden input width mismatch"));
        }
        if self.mlp_weights[1].rows() != self.mlp_weights[0].cols() {
            return Err(Error::invalid("MLP hidden/output width mismatch"));
        }
        if self.mlp_weights[1].cols() != self.num_classes {
            return Err(Error::invalid("MLP output width must equal class count"));
        }
        Ok(())
    }

    pub fn feature_dim(&self) -> usize {
        self.layer_weights[0].rows()
    }
}

/// Node embeddings after all convolution layers:
/// F^j = ReLU(D^{-1/2} A D^{-1/2} F^{j-1} W^j), starting from the features.
pub fn gcn_forward(g: &Graph, model: &ClassifierModel) -> Result<DenseMatrix> {
    model.validate(g.features().cols())?;
    let agg = g.normalized_adjacency(model.config.self_loops);
    let mut f = g.features().clone();
    for w in &model.layer_weights {
        let mixed = agg.matmul(&f).matmul(w);
        let mut out = DenseMatrix::zeros(mixed.rows(), mixed.cols());
        for (d, s) in out.as_mut_slice().iter_mut().zip(mixed.as_slice()) {
            *d = s.max(0.0);
        }
        f = out;
    }
    Ok(f)
}

/// Column-wise max pooling over node embeddings.
pub fn graph_embedding(f: &DenseMatrix) -> Result<Vec<f64>> {
    if f.rows() == 0 {
        return Err(Error::invalid("cannot pool an empty node matrix"));
    }
    let mut u = Vec::with_capacity(f.cols());
    for c in 0..f.cols() {
        let mut best = f.get(0, c);
        for r in 1..f.rows() {
            let v = f.get(r, c);
            if v > best {
                best = v;
            }
        }
        u.push(best);
    }
    Ok(u)
}

fn mlp_logits(u: &[f64], model: &ClassifierModel) -> Vec<f64> {
    let urow = DenseMatrix::row_vector(u);
    let hidden = urow.matmul(&model.mlp_weights[0]);
    let mut act = DenseMatrix::zeros(1, hidden.cols());
    for (d, s) in act.as_mut_slice().iter_mut().zip(hidden.as_slice()) {
        *d = s.max(0.0);
    }
    act.matmul(&model.mlp_weights[1]).row(0).to_vec()
}

pub fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Deterministic full prediction for one graph.
pub fn predict(g: &Graph, model: &ClassifierModel) -> Result<Prediction> {
    let f = gcn_forward(g, model)?;
    let u = graph_embedding(&f)?;
    let probs = softmax(&mlp_logits(&u, model))?;
    Ok(Prediction {
        label: argmax_lowest(&probs),
        logits: probs,
        graph_embedding: u,
    })
}

/// Relative change of the pooled embedding: ||u_a - u_o|| / ||u_o||.
pub fn relative_embedding_change(u_o: &[f64], u_a: &[f64]) -> Result<f64> {
    if u_o.len() != u_a.len() {
        return Err(Error::invalid("embedding dimensions differ"));
    }
    let norm_o: f64 = u_o.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_o == 0.0 {
        return Err(Error::Domain(
            "relative change undefined for a zero reference embedding".into(),
        ));
    }
    let diff: f64 = u_o
        .iter()
        .zip(u_a)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm_o)
}

// ---------------------------------------------------------------------------
// Label oracle: the only surface the attack side may touch.
// ---------------------------------------------------------------------------

/// Black-box access to a classifier: label queries only.
pub trait LabelOracle: Sync {
    fn query_label(&self, g: &Graph) -> Result<usize>;
}

impl LabelOracle for ClassifierModel {
    fn query_label(&self, g: &Graph) -> Result<usize> {
        Ok(predict(g, self)?.label)
    }
}

/// Wraps any oracle and counts queries; used to audit black-box access.
pub struct CountingOracle<'a, O: LabelOracle + ?Sized> {
    inner: &'a O,
    count: AtomicUsize,
}

impl<'a, O: LabelOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        CountingOracle {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn queries(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

impl<'a, O: LabelOracle + ?Sized> LabelOracle for CountingOracle<'a, O> {
    fn query_label(&self, g: &Graph) -> Result<usize> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.query_label(g)
    }
}

/// Scripted oracle built from a plain function; handy for tests and
/// environment simulations.
pub struct FnOracle<F: Fn(&Graph) -> usize + Sync>(pub F);

impl<F: Fn(&Graph) -> usize + Sync> LabelOracle for FnOracle<F> {
    fn query_label(&self, g: &Graph) -> Result<usize> {
        Ok((self.0)(g))
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ClassifierTrainConfig {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub self_loops: bool,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        ClassifierTrainConfig {
            num_layers: 3,
            hidden_dim: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 200,
            batch_size: 32,
            self_loops: false,
        }
    }
}

/// Per-epoch training diagnostics.
#[derive(Clone, Debug, Default)]
pub struct TrainTrace {
    pub epoch_loss: Vec<f64>,
    pub epoch_accuracy: Vec<f64>,
}

/// Tape handles for one staged copy of the model weights.
pub(crate) struct ClassifierVars {
    pub layers: Vec<Var>,
    pub mlp: Vec<Var>,
}

pub(crate) fn stage_classifier(tape: &mut Tape, model: &ClassifierModel) -> ClassifierVars {
    ClassifierVars {
        layers: model
            .layer_weights
            .iter()
            .map(|w| tape.leaf(w.clone()))
            .collect(),
        mlp: model
            .mlp_weights
            .iter()
            .map(|w| tape.leaf(w.clone()))
            .collect(),
    }
}

/// Forward pass on the tape up to the 1 x C logit row (pre-softmax).
pub(crate) fn forward_logits_on_tape(
    tape: &mut Tape,
    g: &Graph,
    vars: &ClassifierVars,
    self_loops: bool,
) -> Var {
    let agg = tape.leaf(g.normalized_adjacency(self_loops));
    let mut f = tape.leaf(g.features().clone());
    for &w in &vars.layers {
        let mixed = tape.matmul(agg, f);
        let pre = tape.matmul(mixed, w);
        f = tape.relu(pre);
    }
    let u = tape.max_pool_rows(f);
    let hidden = tape.matmul(u, vars.mlp[0]);
    let act = tape.relu(hidden);
    tape.matmul(act, vars.mlp[1])
}

fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let lim = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-lim..lim)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn init_classifier<R: Rng>(
    feature_dim: usize,
    num_classes: usize,
    cfg: &ClassifierTrainConfig,
    rng: &mut R,
) -> ClassifierModel {
    let mut layer_weights = Vec::new();
    let mut width = feature_dim;
    for _ in 0..cfg.num_layers {
        layer_weights.push(glorot(width, cfg.hidden_dim, rng));
        width = cfg.hidden_dim;
    }
    let mlp_weights = vec![
        glorot(width, cfg.hidden_dim, rng),
        glorot(cfg.hidden_dim, num_classes, rng),
    ];
    ClassifierModel {
        layer_weights,
        mlp_weights,
        num_classes,
        hidden_dims: vec![cfg.hidden_dim; cfg.num_layers],
        config: GcnConfig {
            self_loops: cfg.self_loops,
        },
    }
}

/// Mini-batch gradient descent (with momentum) on the cross-entropy loss.
/// Deterministic given the seeded random source.
pub fn train_classifier<R: Rng>(
    dataset: &[Graph],
    cfg: &ClassifierTrainConfig,
    rng: &mut R,
) -> Result<(ClassifierModel, TrainTrace)> {
    if dataset.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let mut labels = Vec::with_capacity(dataset.len());
    let feature_dim = dataset[0].features().cols();
    for g in dataset {
        let l = g
            .label()
            .ok_or_else(|| Error::invalid("every training graph needs a label"))?;
        if g.features().cols() != feature_dim {
            return Err(Error::invalid("feature widths differ across the dataset"));
        }
        labels.push(l);
    }
    let num_classes = labels.iter().max().unwrap() + 1;
    {
        let mut seen = vec![false; num_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if seen.iter().filter(|s| **s).count() < 2 {
            return Err(Error::invalid(
                "training needs at least two distinct classes",
            ));
        }
    }

    let mut model = init_classifier(feature_dim, num_classes, cfg, rng);
    let mut velocity: Vec<DenseMatrix> = model
        .layer_weights
        .iter()
        .chain(&model.mlp_weights)
        .map(|w| DenseMatrix::zeros(w.rows(), w.cols()))
        .collect();

    let mut trace = TrainTrace::default();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let batch = cfg.batch_size.max(1);

    for _epoch in 0..cfg.epochs {
        // seeded Fisher-Yates shuffle
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let mut tape = Tape::new();
            let vars = stage_classifier(&mut tape, &model);
            let inv = 1.0 / chunk.len() as f64;
            let terms: Vec<(Var, f64)> = chunk
                .iter()
                .map(|&i| {
                    let logits =
                        forward_logits_on_tape(&mut tape, &dataset[i], &vars, cfg.self_loops);
                    let loss = tape.cross_entropy_from_logits(logits, labels[i]);
                    (loss, inv)
                })
                .collect();
            let batch_loss = tape.weighted_sum(&terms);
            epoch_loss += tape.scalar(batch_loss) * chunk.len() as f64;
            let grads = tape.backward(batch_loss);

            let all_vars: Vec<Var> = vars.layers.iter().chain(&vars.mlp).copied().collect();
            let all_weights: Vec<&mut DenseMatrix> = model
                .layer_weights
                .iter_mut()
                .chain(model.mlp_weights.iter_mut())
                .collect();
            for ((w, v), var) in all_weights.into_iter().zip(&mut velocity).zip(all_vars) {
                let g = grads.get(var, &tape);
                *v = v.scale(cfg.momentum).sub(&g.scale(cfg.learning_rate));
                *w = w.add(v);
            }
        }
        trace.epoch_loss.push(epoch_loss / dataset.len() as f64);

        let correct = dataset
            .iter()
            .zip(&labels)
            .filter(|(g, &l)| predict(g, &model).map(|p| p.label == l).unwrap_or(false))
            .count();
        trace
            .epoch_accuracy
            .push(correct as f64 / dataset.len() as f64);
    }

    Ok((model, trace))
}

/// Accuracy of a model against graphs' stored labels.
pub fn accuracy(model: &ClassifierModel, graphs: &[Graph]) -> Result<f64> {
    if graphs.is_empty() {
        return Err(Error::invalid("empty evaluation set"));
    }
    let mut correct = 0;
    for g in graphs {
        let l = g
            .label()
            .ok_or_else(|| Error::invalid("evaluation graph missing label"))?;
        if predict(g, model)?.label == l {
            correct += 1;
        }
    }
    Ok(correct as f64 / graphs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_diff_gradient, max_relative_deviation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph_with_features(
        n: usize,
        edges: &[(usize, usize)],
        feats: &[Vec<f64>],
        label: Option<usize>,
    ) -> Graph {
        Graph::new(
            n,
            edges,
            DenseMatrix::from_rows(feats).unwrap(),
            label,
        )
        .unwrap()
    }

    fn tiny_model(feature_dim: usize, num_classes: usize, seed: u64) -> ClassifierModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ClassifierTrainConfig {
            num_layers: 2,
            hidden_dim: 4,
            ..Default::default()
        };
        init_classifier(feature_dim, num_classes, &cfg, &mut rng)
    }

    #[test]
    fn forward_edgeless_is_zero() {
        let g = graph_with_features(3, &[], &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]], None);
        let model = tiny_model(2, 2, 1);
        let f = gcn_forward(&g, &model).unwrap();
        assert!(f.as_slice().iter().all(|v| *v == 0.0));
        // pooled embedding is zero, head gives uniform-ish but deterministic output
        let p = predict(&g, &model).unwrap();
        assert!((p.logits.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_single_edge_aggregates_neighbor_only() {
        // without self-loops, node 0 aggregates exactly X[1] (normalized)
        let g = graph_with_features(2, &[(0, 1)], &[vec![1.0, 0.0], vec![0.0, 1.0]], None);
        let model = ClassifierModel {
            layer_weights: vec![DenseMatrix::identity(2)],
            mlp_weights: vec![DenseMatrix::identity(2), DenseMatrix::identity(2)],
            num_classes: 2,
            hidden_dims: vec![2],
            config: GcnConfig { self_loops: false },
        };
        let f = gcn_forward(&g, &model).unwrap();
        // degree 1 each: normalization factor 1; F[0] = X[1], F[1] = X[0]
        assert_eq!(f.row(0), &[0.0, 1.0]);
        assert_eq!(f.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn pooling_examples() {
        let f = DenseMatrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(graph_embedding(&f).unwrap(), vec![3.0, 5.0]);
        let single = DenseMatrix::from_rows(&[vec![7.0, -2.0]]).unwrap();
        assert_eq!(graph_embedding(&single).unwrap(), vec![7.0, -2.0]);
        assert!(graph_embedding(&DenseMatrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn predict_zero_head_is_uniform_label_zero() {
        let g = graph_with_features(2, &[(0, 1)], &[vec![1.0], vec![2.0]], None);
        let model = ClassifierModel {
            layer_weights: vec![DenseMatrix::from_vec(1, 2, vec![0.5, -0.5]).unwrap()],
            mlp_weights: vec![DenseMatrix::zeros(2, 3), DenseMatrix::zeros(3, 3)],
            num_classes: 3,
            hidden_dims: vec![2],
            config: GcnConfig::default(),
        };
        let p = predict(&g, &model).unwrap();
        assert_eq!(p.label, 0);
        for l in &p.logits {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn predict_is_pure() {
        let g = graph_with_features(3, &[(0, 1), (1, 2)], &[vec![1.0], vec![2.0], vec![3.0]], None);
        let model = tiny_model(1, 2, 3);
        let a = predict(&g, &model).unwrap();
        let b = predict(&g, &model).unwrap();
        assert_eq!(a.label, b.label);
        assert_eq!(a.logits, b.logits);
        assert_eq!(a.graph_embedding, b.graph_embedding);
    }

    #[test]
    fn prediction_invariant_to_relabeling() {
        // permute nodes: prediction identical, node embeddings permuted
        let feats = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.2]];
        let g = graph_with_features(4, &[(0, 1), (1, 2), (2, 3)], &feats, None);
        // permutation: 0->2, 1->0, 2->3, 3->1
        let perm = [2usize, 0, 3, 1];
        let mut pfeats = vec![vec![0.0; 2]; 4];
        for (i, row) in feats.iter().enumerate() {
            pfeats[perm[i]] = row.clone();
        }
        let pedges: Vec<(usize, usize)> = [(0usize, 1usize), (1, 2), (2, 3)]
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        let gp = graph_with_features(4, &pedges, &pfeats, None);

        let model = tiny_model(2, 3, 5);
        let f = gcn_forward(&g, &model).unwrap();
        let fp = gcn_forward(&gp, &model).unwrap();
        for i in 0..4 {
            assert_eq!(f.row(i), fp.row(perm[i]), "row {i} should move to {}", perm[i]);
        }
        let a = predict(&g, &model).unwrap();
        let b = predict(&gp, &model).unwrap();
        assert_eq!(a.label, b.label);
        for (x, y) in a.logits.iter().zip(&b.logits) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_change_cases() {
        assert_eq!(relative_embedding_change(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((relative_embedding_change(&[3.0, 4.0], &[6.0, 8.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((relative_embedding_change(&[3.0, 4.0], &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(relative_embedding_change(&[0.0], &[1.0]).is_err());
        assert!(relative_embedding_change(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for seed in 0..3u64 {
            let g = {
                let mut edges = Vec::new();
                for u in 0..5usize {
                    for v in (u + 1)..5 {
                        if rng.gen_bool(0.5) {
                            edges.push((u, v));
                        }
                    }
                }
                let feats: Vec<Vec<f64>> = (0..5)
                    .map(|_| (0..3).map(|_| rng.gen_range(0.1..1.0)).collect())
                    .collect();
                graph_with_features(5, &edges, &feats, Some(1))
            };
            let model = tiny_model(3, 2, seed + 100);
            // check gradient w.r.t. the first conv layer
            let theta0 = model.layer_weights[0].clone();
            let eval = |theta: &[f64]| {
                let mut m = model.clone();
                m.layer_weights[0] =
                    DenseMatrix::from_vec(theta0.rows(), theta0.cols(), theta.to_vec()).unwrap();
                let p = predict(&g, &m).unwrap();
                crate::numeric::cross_entropy(&p.logits, 1).unwrap()
            };
            let numeric = finite_diff_gradient(eval, theta0.as_slice(), 1e-5).unwrap();

            let mut tape = Tape::new();
            let vars = stage_classifier(&mut tape, &model);
            let logits = forward_logits_on_tape(&mut tape, &g, &vars, false);
            let loss = tape.cross_entropy_from_logits(logits, 1);
            let grads = tape.backward(loss);
            let analytic = grads.get(vars.layers[0], &tape);

            let dev = max_relative_deviation(analytic.as_slice(), &numeric);
            assert!(dev < 1e-4, "seed {seed}: deviation {dev}");
        }
    }

    fn two_class_pair() -> Vec<Graph> {
        // one sparse path vs one dense clique, distinct degree patterns
        let path = graph_with_features(
            4,
            &[(0, 1), (1, 2), (2, 3)],
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            Some(0),
        );
        let clique = graph_with_features(
            4,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            &[vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.5]],
            Some(1),
        );
        vec![path, clique]
    }

    #[test]
    fn memorizes_a_two_graph_dataset() {
        let data = two_class_pair();
        let cfg = ClassifierTrainConfig {
            epochs: 900,
            batch_size: 2,
            hidden_dim: 8,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (model, trace) = train_classifier(&data, &cfg, &mut rng).unwrap();
        assert!(
            *trace.epoch_loss.last().unwrap() < 1e-2,
            "final loss {}",
            trace.epoch_loss.last().unwrap()
        );
        assert_eq!(accuracy(&model, &data).unwrap(), 1.0);
    }

    #[test]
    fn rejects_single_class_dataset() {
        let mut data = two_class_pair();
        data[1] = data[1].clone().with_label(Some(0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(train_classifier(&data, &ClassifierTrainConfig::default(), &mut rng).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let data = two_class_pair();
        let cfg = ClassifierTrainConfig {
            epochs: 30,
            ..Default::default()
        };
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            train_classifier(&data, &cfg, &mut rng).unwrap().0
        };
        let (a, b) = (run(11), run(11));
        for (wa, wb) in a.layer_weights.iter().zip(&b.layer_weights) {
            assert_eq!(wa, wb);
        }
        for (wa, wb) in a.mlp_weights.iter().zip(&b.mlp_weights) {
            assert_eq!(wa, wb);
        }
    }

    #[test]
    fn counting_oracle_counts() {
        let data = two_class_pair();
        let model = tiny_model(2, 2, 40);
        let oracle = CountingOracle::new(&model);
        let direct = predict(&data[0], &model).unwrap().label;
        assert_eq!(oracle.query_label(&data[0]).unwrap(), direct);
        oracle.query_label(&data[1]).unwrap();
        assert_eq!(oracle.queries(), 2);
    }
}
