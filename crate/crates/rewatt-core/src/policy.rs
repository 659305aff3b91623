//! The learned attacker: a 2-layer GCN state embedder and three MLP heads
//! factorizing the action distribution into edge choice, first-node choice,
//! and third-node choice. Trained with REINFORCE over attack episodes.

use rand::Rng;

use crate::attack::{run_episode, AttackConfig, Trajectory};
use crate::classifier::LabelOracle;
use crate::error::{Error, Result};
use crate::graph::{third_candidates, Graph, RewiringAction, ThirdNodeMode};
use crate::numeric::{masked_softmax, DenseMatrix, Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicyConfig {
    /// Width d_F of the state embedding (also the MLP hidden width).
    pub embed_dim: usize,
    /// Third-node rule this policy is trained for.
    pub mode: ThirdNodeMode,
    /// Represent third-node candidates against the first stored endpoint of
    /// the sampled edge (the printed formula). When false, the representation
    /// follows whichever endpoint was chosen as the first node.
    pub literal_third_rep: bool,
    /// Self-loop switch for the embedder's normalization.
    pub self_loops: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            embed_dim: 32,
            mode: ThirdNodeMode::TwoHop,
            literal_third_rep: true,
            self_loops: false,
        }
    }
}

/// Attacker parameters: 2 embedder layers plus (hidden, output) matrices for
/// each of the three heads. Head input widths are 2 d_F (edge), 3 d_F
/// (first node) and 4 d_F (third node).
#[derive(Clone, Debug)]
pub struct PolicyModel {
    pub embedder: [DenseMatrix; 2],
    pub edge_head: [DenseMatrix; 2],
    pub first_head: [DenseMatrix; 2],
    pub third_head: [DenseMatrix; 2],
    pub feature_dim: usize,
    pub config: PolicyConfig,
}

impl PolicyModel {
    pub fn validate(&self) -> Result<()> {
        let d = self.config.embed_dim;
        let checks = [
            (self.embedder[0].rows(), self.feature_dim, "embedder input"),
            (self.embedder[0].cols(), d, "embedder hidden"),
            (self.embedder[1].rows(), d, "embedder layer 2 input"),
            (self.embedder[1].cols(), d, "embedder output"),
            (self.edge_head[0].rows(), 2 * d, "edge head input"),
            (self.first_head[0].rows(), 3 * d, "first-node head input"),
            (self.third_head[0].rows(), 4 * d, "third-node head input"),
        ];
        for (got, want, what) in checks {
            if got != want {
                return Err(Error::invalid(format!(
                    "{what} width {got}, expected {want}"
                )));
            }
        }
        for head in [&self.edge_head, &self.first_head, &self.third_head] {
            if head[1].rows() != head[0].cols() || head[1].cols() != 1 {
                return Err(Error::invalid("head output stage must map hidden -> 1"));
            }
        }
        Ok(())
    }
}

/// One sampled action with its factorized probability.
#[derive(Clone, Debug)]
pub struct ActionSample {
    pub action: RewiringAction,
    /// Sum of the three stage log-probabilities.
    pub log_prob: f64,
    /// (edge, first-node, third-node) stage probabilities.
    pub stage_probs: [f64; 3],
}

/// Structural action space of one state: per-edge third-node candidates for
/// each endpoint playing the first-node role, and the edge admissibility
/// mask (an edge is admissible iff some endpoint still has candidates).
#[derive(Clone, Debug)]
pub struct ActionSpace {
    pub edges: Vec<(usize, usize)>,
    pub cand: Vec<[Vec<usize>; 2]>,
    pub edge_mask: Vec<bool>,
}

impl ActionSpace {
    pub fn build(g: &Graph, mode: ThirdNodeMode) -> Self {
        let per_node: Vec<Vec<usize>> = (0..g.num_nodes())
            .map(|v| third_candidates(g, v, mode))
            .collect();
        let edges = g.edges().to_vec();
        let cand: Vec<[Vec<usize>; 2]> = edges
            .iter()
            .map(|&(u, v)| [per_node[u].clone(), per_node[v].clone()])
            .collect();
        let edge_mask = cand
            .iter()
            .map(|c| !c[0].is_empty() || !c[1].is_empty())
            .collect();
        ActionSpace {
            edges,
            cand,
            edge_mask,
        }
    }

    pub fn has_action(&self) -> bool {
        self.edge_mask.iter().any(|&b| b)
    }
}

/// Tape handles for one staged copy of the policy weights.
pub(crate) struct PolicyVars {
    pub emb: [Var; 2],
    pub edge: [Var; 2],
    pub fir: [Var; 2],
    pub thi: [Var; 2],
}

pub(crate) fn stage_policy(tape: &mut Tape, model: &PolicyModel) -> PolicyVars {
    PolicyVars {
        emb: [
            tape.leaf(model.embedder[0].clone()),
            tape.leaf(model.embedder[1].clone()),
        ],
        edge: [
            tape.leaf(model.edge_head[0].clone()),
            tape.leaf(model.edge_head[1].clone()),
        ],
        fir: [
            tape.leaf(model.first_head[0].clone()),
            tape.leaf(model.first_head[1].clone()),
        ],
        thi: [
            tape.leaf(model.third_head[0].clone()),
            tape.leaf(model.third_head[1].clone()),
        ],
    }
}

/// Per-row MLP: relu(X W1) W2.
fn head(tape: &mut Tape, x: Var, w: &[Var; 2]) -> Var {
    let h = tape.matmul(x, w[0]);
    let a = tape.relu(h);
    tape.matmul(a, w[1])
}

/// One state's forward pass, shared by sampling and the REINFORCE replay.
pub(crate) struct PolicyForward {
    pub space: ActionSpace,
    pub f: Var,
    pub edge_reps: Var,
    pub edge_scores: Var,
}

pub(crate) fn forward_state(
    tape: &mut Tape,
    g: &Graph,
    vars: &PolicyVars,
    model: &PolicyModel,
) -> Result<PolicyForward> {
    model.validate()?;
    if g.features().cols() != model.feature_dim {
        return Err(Error::invalid(format!(
            "graph features have width {}, embedder expects {}",
            g.features().cols(),
            model.feature_dim
        )));
    }
    let space = ActionSpace::build(g, model.config.mode);
    if !space.has_action() {
        return Err(Error::EmptyActionSpace);
    }

    // 2-layer convolution embedder, then max-pool for the state vector.
    let agg = tape.leaf(g.normalized_adjacency(model.config.self_loops));
    let mut f = tape.leaf(g.features().clone());
    for w in &vars.emb {
        let mixed = tape.matmul(agg, f);
        let pre = tape.matmul(mixed, *w);
        f = tape.relu(pre);
    }
    let u = tape.max_pool_rows(f);

    // Edge representations: concat(u, mean(F[e1], F[e2])); the elementwise
    // mean keeps the edge feature at d_F and is endpoint-order symmetric.
    let m = space.edges.len();
    let firsts: Vec<usize> = space.edges.iter().map(|e| e.0).collect();
    let seconds: Vec<usize> = space.edges.iter().map(|e| e.1).collect();
    let fa = tape.gather_rows(f, &firsts);
    let fb = tape.gather_rows(f, &seconds);
    let summed = tape.add(fa, fb);
    let mean = tape.scale(summed, 0.5);
    let tiled_u = tape.repeat_rows(u, m);
    let edge_reps = tape.concat_cols(tiled_u, mean);
    let edge_scores = head(tape, edge_reps, &vars.edge);

    Ok(PolicyForward {
        space,
        f,
        edge_reps,
        edge_scores,
    })
}

/// First-node scores for a sampled edge. Returns the 2 x 1 score column and
/// the two endpoint representations v_{e_1}, v_{e_2}.
pub(crate) fn first_scores(
    tape: &mut Tape,
    fwd: &PolicyForward,
    vars: &PolicyVars,
    edge_idx: usize,
) -> (Var, [Var; 2]) {
    let (e1, e2) = fwd.space.edges[edge_idx];
    let e_rep = tape.gather_rows(fwd.edge_reps, &[edge_idx]);
    let f1 = tape.gather_rows(fwd.f, &[e1]);
    let f2 = tape.gather_rows(fwd.f, &[e2]);
    let v1 = tape.concat_cols(e_rep, f1);
    let v2 = tape.concat_cols(e_rep, f2);
    let stacked = tape.concat_rows(v1, v2);
    (head(tape, stacked, &vars.fir), [v1, v2])
}

/// Third-node scores over the candidate set of the chosen first endpoint.
pub(crate) fn third_scores(
    tape: &mut Tape,
    fwd: &PolicyForward,
    vars: &PolicyVars,
    endpoint_reps: &[Var; 2],
    edge_idx: usize,
    fir_endpoint: usize,
    literal_third_rep: bool,
) -> Var {
    let cands = &fwd.space.cand[edge_idx][fir_endpoint];
    debug_assert!(!cands.is_empty());
    let base = if literal_third_rep {
        endpoint_reps[0]
    } else {
        endpoint_reps[fir_endpoint]
    };
    let tiled = tape.repeat_rows(base, cands.len());
    let fc = tape.gather_rows(fwd.f, cands);
    let reps = tape.concat_cols(tiled, fc);
    head(tape, reps, &vars.thi)
}

fn endpoint_mask(space: &ActionSpace, edge_idx: usize) -> [bool; 2] {
    [
        !space.cand[edge_idx][0].is_empty(),
        !space.cand[edge_idx][1].is_empty(),
    ]
}

// ---------------------------------------------------------------------------
// Value-level distributions (inference path)
// ---------------------------------------------------------------------------

/// Node embeddings and pooled state vector of the policy embedder.
pub fn embed_state(g: &Graph, model: &PolicyModel) -> Result<(DenseMatrix, Vec<f64>)> {
    model.validate()?;
    if g.features().cols() != model.feature_dim {
        return Err(Error::invalid("feature width mismatch"));
    }
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let agg = tape.leaf(g.normalized_adjacency(model.config.self_loops));
    let mut f = tape.leaf(g.features().clone());
    for w in &vars.emb {
        let mixed = tape.matmul(agg, f);
        let pre = tape.matmul(mixed, *w);
        f = tape.relu(pre);
    }
    let u = tape.max_pool_rows(f);
    Ok((tape.value(f).clone(), tape.value(u).row(0).to_vec()))
}

/// Probability over the edges of `g` (masked to edges that admit at least
/// one complete action). Zero for inadmissible edges.
pub fn edge_distribution(g: &Graph, model: &PolicyModel) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let fwd = forward_state(&mut tape, g, &vars, model)?;
    let scores = tape.value(fwd.edge_scores).as_slice().to_vec();
    Ok(masked_softmax(&scores, &fwd.space.edge_mask))
}

/// Probability pair over the two endpoints of one edge; endpoints with no
/// remaining third-node candidate are masked to zero.
pub fn first_node_distribution(
    g: &Graph,
    model: &PolicyModel,
    edge_idx: usize,
) -> Result<[f64; 2]> {
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let fwd = forward_state(&mut tape, g, &vars, model)?;
    if edge_idx >= fwd.space.edges.len() {
        return Err(Error::invalid("edge index out of range"));
    }
    let mask = endpoint_mask(&fwd.space, edge_idx);
    if !mask[0] && !mask[1] {
        return Err(Error::EmptyActionSpace);
    }
    let (scores, _) = first_scores(&mut tape, &fwd, &vars, edge_idx);
    let p = masked_softmax(tape.value(scores).as_slice(), &mask);
    Ok([p[0], p[1]])
}

/// Probability over the third-node candidates of (edge, first endpoint);
/// paired with the candidate list itself.
pub fn third_node_distribution(
    g: &Graph,
    model: &PolicyModel,
    edge_idx: usize,
    fir_endpoint: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let fwd = forward_state(&mut tape, g, &vars, model)?;
    if edge_idx >= fwd.space.edges.len() || fir_endpoint > 1 {
        return Err(Error::invalid("edge or endpoint index out of range"));
    }
    let cands = fwd.space.cand[edge_idx][fir_endpoint].clone();
    if cands.is_empty() {
        return Err(Error::EmptyActionSpace);
    }
    let (_, endpoint_reps) = first_scores(&mut tape, &fwd, &vars, edge_idx);
    let scores = third_scores(
        &mut tape,
        &fwd,
        &vars,
        &endpoint_reps,
        edge_idx,
        fir_endpoint,
        model.config.literal_third_rep,
    );
    let flat = tape.value(scores).as_slice().to_vec();
    let mask = vec![true; flat.len()];
    Ok((cands, masked_softmax(&flat, &mask)))
}

fn sample_index<R: Rng>(probs: &[f64], mask: &[bool], rng: &mut R) -> usize {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_legal = 0;
    for (i, (&p, &ok)) in probs.iter().zip(mask).enumerate() {
        if !ok {
            continue;
        }
        last_legal = i;
        acc += p;
        if draw < acc {
            return i;
        }
    }
    last_legal
}

/// Sample a full rewiring action: edge, then first node, then third node.
/// Every returned action is valid for the model's third-node mode.
pub fn sample_action<R: Rng>(
    g: &Graph,
    model: &PolicyModel,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<ActionSample> {
    if cfg.third_node_mode != model.config.mode {
        return Err(Error::invalid(
            "attack config and policy disagree on the third-node rule",
        ));
    }
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let fwd = forward_state(&mut tape, g, &vars, model)?;

    let edge_probs = masked_softmax(
        tape.value(fwd.edge_scores).as_slice(),
        &fwd.space.edge_mask,
    );
    let edge_idx = sample_index(&edge_probs, &fwd.space.edge_mask, rng);

    let fmask = endpoint_mask(&fwd.space, edge_idx);
    let (fscores, endpoint_reps) = first_scores(&mut tape, &fwd, &vars, edge_idx);
    let first_probs = masked_softmax(tape.value(fscores).as_slice(), &fmask);
    let fir_endpoint = sample_index(&first_probs, &fmask, rng);

    let cands = &fwd.space.cand[edge_idx][fir_endpoint];
    let tscores = third_scores(
        &mut tape,
        &fwd,
        &vars,
        &endpoint_reps,
        edge_idx,
        fir_endpoint,
        model.config.literal_third_rep,
    );
    let tmask = vec![true; cands.len()];
    let third_probs = masked_softmax(tape.value(tscores).as_slice(), &tmask);
    let third_idx = sample_index(&third_probs, &tmask, rng);

    let (e1, e2) = fwd.space.edges[edge_idx];
    let (fir, sec) = if fir_endpoint == 0 { (e1, e2) } else { (e2, e1) };
    let stage_probs = [
        edge_probs[edge_idx],
        first_probs[fir_endpoint],
        third_probs[third_idx],
    ];
    Ok(ActionSample {
        action: RewiringAction {
            fir,
            sec,
            thi: cands[third_idx],
        },
        log_prob: stage_probs.iter().map(|p| p.ln()).sum(),
        stage_probs,
    })
}

// ---------------------------------------------------------------------------
// REINFORCE
// ---------------------------------------------------------------------------

pub const GRAD_CLIP_NORM: f64 = 1.0;

#[derive(Clone, Debug)]
pub struct ReinforceDiagnostics {
    pub loss: f64,
    pub grad_norm: f64,
    pub baseline: f64,
    pub steps: usize,
}

/// Locate the stage indices of a recorded action within a state's action
/// space: (edge index, endpoint index, candidate index).
fn locate_action(space: &ActionSpace, action: &RewiringAction) -> Result<(usize, usize, usize)> {
    let key = (action.fir.min(action.sec), action.fir.max(action.sec));
    let edge_idx = space
        .edges
        .binary_search(&key)
        .map_err(|_| Error::RejectedAction("recorded action's edge not in state".into()))?;
    let fir_endpoint = usize::from(action.fir != space.edges[edge_idx].0);
    let cand_idx = space.cand[edge_idx][fir_endpoint]
        .binary_search(&action.thi)
        .map_err(|_| Error::RejectedAction("recorded third node not a candidate".into()))?;
    Ok((edge_idx, fir_endpoint, cand_idx))
}

/// One policy-gradient step over a batch of trajectories:
/// loss = -sum_t log pi(a_t | s_t) (G_t - b) with undiscounted returns-to-go,
/// the batch-mean baseline, and a global gradient-norm clip at 1.
pub fn reinforce_update(
    trajectories: &[Trajectory],
    model: &PolicyModel,
    lr: f64,
) -> Result<(PolicyModel, ReinforceDiagnostics)> {
    let total_steps: usize = trajectories.iter().map(|t| t.num_steps()).sum();
    if total_steps == 0 {
        return Err(Error::invalid(
            "reinforce update needs at least one step in the batch",
        ));
    }

    let mut returns: Vec<Vec<f64>> = trajectories.iter().map(|t| t.returns_to_go()).collect();
    let baseline =
        returns.iter().flatten().sum::<f64>() / total_steps as f64;
    for r in &mut returns {
        for g in r.iter_mut() {
            *g -= baseline;
        }
    }

    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let mut terms: Vec<(Var, f64)> = Vec::new();
    for (traj, advs) in trajectories.iter().zip(&returns) {
        for (step, &adv) in traj.steps.iter().zip(advs) {
            let fwd = forward_state(&mut tape, &step.state, &vars, model)?;
            let (edge_idx, fir_endpoint, cand_idx) = locate_action(&fwd.space, &step.action)?;

            let lp_edge =
                tape.log_prob_masked_softmax(fwd.edge_scores, &fwd.space.edge_mask, edge_idx);
            let fmask = endpoint_mask(&fwd.space, edge_idx);
            let (fscores, endpoint_reps) = first_scores(&mut tape, &fwd, &vars, edge_idx);
            let lp_fir = tape.log_prob_masked_softmax(fscores, &fmask, fir_endpoint);
            let tscores = third_scores(
                &mut tape,
                &fwd,
                &vars,
                &endpoint_reps,
                edge_idx,
                fir_endpoint,
                model.config.literal_third_rep,
            );
            let tmask = vec![true; fwd.space.cand[edge_idx][fir_endpoint].len()];
            let lp_thi = tape.log_prob_masked_softmax(tscores, &tmask, cand_idx);

            terms.push((lp_edge, -adv));
            terms.push((lp_fir, -adv));
            terms.push((lp_thi, -adv));
        }
    }
    let loss = tape.weighted_sum(&terms);
    let loss_value = tape.scalar(loss);
    let grads = tape.backward(loss);

    let var_list = [
        vars.emb[0], vars.emb[1], vars.edge[0], vars.edge[1], vars.fir[0], vars.fir[1],
        vars.thi[0], vars.thi[1],
    ];
    let gmats: Vec<DenseMatrix> = var_list.iter().map(|&v| grads.get(v, &tape)).collect();
    let grad_norm = gmats
        .iter()
        .map(|g| {
            let n = g.frobenius_norm();
            n * n
        })
        .sum::<f64>()
        .sqrt();
    let clip = if grad_norm > GRAD_CLIP_NORM {
        GRAD_CLIP_NORM / grad_norm
    } else {
        1.0
    };

    let mut updated = model.clone();
    {
        let PolicyModel {
            embedder: [e0, e1],
            edge_head: [g0, g1],
            first_head: [f0, f1],
            third_head: [t0, t1],
            ..
        } = &mut updated;
        let weights: [&mut DenseMatrix; 8] = [e0, e1, g0, g1, f0, f1, t0, t1];
        for (w, g) in weights.into_iter().zip(&gmats) {
            *w = w.sub(&g.scale(lr * clip));
        }
    }

    Ok((
        updated,
        ReinforceDiagnostics {
            loss: loss_value,
            grad_norm,
            baseline,
            steps: total_steps,
        },
    ))
}

/// Loss value alone (no update); the replay path the gradient checks probe.
pub fn reinforce_loss(trajectories: &[Trajectory], model: &PolicyModel) -> Result<f64> {
    let total_steps: usize = trajectories.iter().map(|t| t.num_steps()).sum();
    if total_steps == 0 {
        return Err(Error::invalid("empty batch"));
    }
    let mut returns: Vec<Vec<f64>> = trajectories.iter().map(|t| t.returns_to_go()).collect();
    let baseline = returns.iter().flatten().sum::<f64>() / total_steps as f64;
    for r in &mut returns {
        for g in r.iter_mut() {
            *g -= baseline;
        }
    }
    let mut tape = Tape::new();
    let vars = stage_policy(&mut tape, model);
    let mut terms: Vec<(Var, f64)> = Vec::new();
    for (traj, advs) in trajectories.iter().zip(&returns) {
        for (step, &adv) in traj.steps.iter().zip(advs) {
            let fwd = forward_state(&mut tape, &step.state, &vars, model)?;
            let (edge_idx, fir_endpoint, cand_idx) = locate_action(&fwd.space, &step.action)?;
            let lp_edge =
                tape.log_prob_masked_softmax(fwd.edge_scores, &fwd.space.edge_mask, edge_idx);
            let fmask = endpoint_mask(&fwd.space, edge_idx);
            let (fscores, endpoint_reps) = first_scores(&mut tape, &fwd, &vars, edge_idx);
            let lp_fir = tape.log_prob_masked_softmax(fscores, &fmask, fir_endpoint);
            let tscores = third_scores(
                &mut tape,
                &fwd,
                &vars,
                &endpoint_reps,
                edge_idx,
                fir_endpoint,
                model.config.literal_third_rep,
            );
            let tmask = vec![true; fwd.space.cand[edge_idx][fir_endpoint].len()];
            let lp_thi = tape.log_prob_masked_softmax(tscores, &tmask, cand_idx);
            terms.push((lp_edge, -adv));
            terms.push((lp_fir, -adv));
            terms.push((lp_thi, -adv));
        }
    }
    let loss = tape.weighted_sum(&terms);
    Ok(tape.scalar(loss))
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AttackerTrainConfig {
    pub epochs: usize,
    /// Graphs per REINFORCE batch.
    pub batch_graphs: usize,
    /// Rollouts per graph per epoch.
    pub episodes_per_graph: usize,
    pub learning_rate: f64,
    pub embed_dim: usize,
    pub literal_third_rep: bool,
    pub self_loops: bool,
}

impl Default for AttackerTrainConfig {
    fn default() -> Self {
        AttackerTrainConfig {
            epochs: 30,
            batch_graphs: 8,
            episodes_per_graph: 2,
            learning_rate: 0.05,
            embed_dim: 32,
            literal_third_rep: true,
            self_loops: false,
        }
    }
}

fn glorot<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let lim = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-lim..lim)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn init_policy<R: Rng>(
    feature_dim: usize,
    cfg: &PolicyConfig,
    rng: &mut R,
) -> PolicyModel {
    let d = cfg.embed_dim;
    PolicyModel {
        embedder: [glorot(feature_dim, d, rng), glorot(d, d, rng)],
        edge_head: [glorot(2 * d, d, rng), glorot(d, 1, rng)],
        first_head: [glorot(3 * d, d, rng), glorot(d, 1, rng)],
        third_head: [glorot(4 * d, d, rng), glorot(d, 1, rng)],
        feature_dim,
        config: *cfg,
    }
}

/// Roll out one episode with the current policy.
pub fn policy_rollout<O: LabelOracle + ?Sized, R: Rng>(
    g: &Graph,
    original_label: usize,
    oracle: &O,
    model: &PolicyModel,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<Trajectory> {
    run_episode(g, original_label, oracle, cfg, |state| {
        let s = sample_action(state, model, cfg, rng)?;
        Ok((s.action, s.log_prob))
    })
}

/// Train the attacker with REINFORCE over the training graphs. Clean labels
/// are queried once per graph up front; after that the oracle is hit once
/// per action, as during deployment. Returns the model and the per-epoch
/// training success rate.
pub fn train_attacker<O: LabelOracle + ?Sized, R: Rng>(
    train_graphs: &[Graph],
    oracle: &O,
    cfg: &AttackConfig,
    hyper: &AttackerTrainConfig,
    rng: &mut R,
) -> Result<(PolicyModel, Vec<f64>)> {
    if train_graphs.is_empty() {
        return Err(Error::invalid("no training graphs"));
    }
    cfg.validate()?;
    let feature_dim = train_graphs[0].features().cols();
    for g in train_graphs {
        if g.features().cols() != feature_dim {
            return Err(Error::invalid("feature widths differ across graphs"));
        }
    }
    let pcfg = PolicyConfig {
        embed_dim: hyper.embed_dim,
        mode: cfg.third_node_mode,
        literal_third_rep: hyper.literal_third_rep,
        self_loops: hyper.self_loops,
    };
    let mut model = init_policy(feature_dim, &pcfg, rng);

    let clean_labels: Vec<usize> = train_graphs
        .iter()
        .map(|g| oracle.query_label(g))
        .collect::<Result<_>>()?;

    let mut curve = Vec::with_capacity(hyper.epochs);
    let mut order: Vec<usize> = (0..train_graphs.len()).collect();
    for _epoch in 0..hyper.epochs {
        for i in (1..order.len()).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut episodes = 0usize;
        let mut successes = 0usize;
        for chunk in order.chunks(hyper.batch_graphs.max(1)) {
            let mut batch: Vec<Trajectory> = Vec::new();
            for &gi in chunk {
                for _ in 0..hyper.episodes_per_graph.max(1) {
                    let traj = policy_rollout(
                        &train_graphs[gi],
                        clean_labels[gi],
                        oracle,
                        &model,
                        cfg,
                        rng,
                    )?;
                    episodes += 1;
                    if traj.succeeded() {
                        successes += 1;
                    }
                    if traj.num_steps() > 0 {
                        batch.push(traj);
                    }
                }
            }
            if batch.iter().map(|t| t.num_steps()).sum::<usize>() > 0 {
                let (updated, _) = reinforce_update(&batch, &model, hyper.learning_rate)?;
                model = updated;
            }
        }
        curve.push(if episodes > 0 {
            successes as f64 / episodes as f64
        } else {
             0.0
        });
    }
    Ok((model, curve))
}
