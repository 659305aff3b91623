//! The rewiring attack environment: budgets, step penalties, transitions,
//! rewards, termination, trajectories, and the random baselines.
//!
//! One oracle query per step: the label check on the post-action graph is
//! also the success test, so black-box access equals the number of actions.

use rand::Rng;

use crate::classifier::LabelOracle;
use crate::error::{Error, Result};
use crate::graph::{
    apply_rewiring, is_valid_rewiring_mode, rewiring_candidates_mode, Graph, RewiringAction,
    ThirdNodeMode,
};

/// How the per-graph action budget is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetMode {
    /// K = max(1, floor(p * |E|)) for a ratio p in (0,1).
    Ratio(f64),
    /// The same K for every graph.
    Fixed(usize),
}

/// How the per-step negative reward is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyMode {
    /// n_r = -1/K, scaled to the graph's own budget.
    Flexible,
    /// A fixed negative value (the fixed-penalty attacker variant uses -0.5).
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub budget: BudgetMode,
    pub penalty: PenaltyMode,
    pub third_node_mode: ThirdNodeMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            budget: BudgetMode::Ratio(0.03),
            penalty: PenaltyMode::Flexible,
            third_node_mode: ThirdNodeMode::TwoHop,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if let BudgetMode::Ratio(p) = self.budget {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::invalid(format!("budget ratio {p} not in (0,1)")));
            }
        }
        if let BudgetMode::Fixed(k) = self.budget {
            if k == 0 {
                return Err(Error::invalid("fixed budget must be at least 1"));
            }
        }
        if let PenaltyMode::Fixed(v) = self.penalty {
            if v >= 0.0 {
                return Err(Error::invalid("fixed step penalty must be negative"));
            }
        }
        Ok(())
    }
}

/// Rewiring budget for one graph. In ratio mode the floor gets a hair of
/// slack so decimal ratios like 0.03 hit their mathematical floor on exact
/// multiples, and every graph is attackable at least once.
pub fn compute_budget(g: &Graph, cfg: &AttackConfig) -> Result<usize> {
    cfg.validate()?;
    match cfg.budget {
        BudgetMode::Fixed(k) => Ok(k),
        BudgetMode::Ratio(p) => {
            if g.num_edges() == 0 {
                return Err(Error::invalid(
                    "ratio budget undefined for an edgeless graph",
                ));
            }
            let k = (p * g.num_edges() as f64 + 1e-9).floor() as usize;
            Ok(k.max(1))
        }
    }
}

/// Per-step negative reward n_r for one graph.
pub fn step_penalty(g: &Graph, cfg: &AttackConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.penalty {
        PenaltyMode::Fixed(v) => Ok(v),
        PenaltyMode::Flexible => Ok(-1.0 / compute_budget(g, cfg)? as f64),
    }
}

/// Why an episode ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The oracle's label moved away from the original prediction.
    Success,
    /// K actions spent without flipping the label.
    BudgetExhausted,
    /// The current graph admits no valid rewiring.
    NoValidAction,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::BudgetExhausted => "budget_exhausted",
            Outcome::NoValidAction => "no_valid_action",
        }
    }
}

/// Episode state: the current graph plus bookkeeping. Budget, penalty and
/// mode are frozen at episode start (|E| is rewiring-invariant, so the
/// flexible quantities never drift).
#[derive(Clone, Debug)]
pub struct EpisodeState {
    pub current_graph: Graph,
    pub original_label: usize,
    pub steps_taken: usize,
    pub budget: usize,
    pub penalty: f64,
    pub mode: ThirdNodeMode,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

impl EpisodeState {
    /// Start an episode. `original_label` is the victim's clean prediction,
    /// queried once by the caller before the attack begins.
    pub fn start(g: &Graph, original_label: usize, cfg: &AttackConfig) -> Result<Self> {
        let budget = compute_budget(g, cfg)?;
        let penalty = step_penalty(g, cfg)?;
        let mut state = EpisodeState {
            current_graph: g.clone(),
            original_label,
            steps_taken: 0,
            budget,
            penalty,
            mode: cfg.third_node_mode,
            done: false,
            outcome: None,
        };
        if rewiring_candidates_mode(g, cfg.third_node_mode).is_empty() {
            state.done = true;
            state.outcome = Some(Outcome::NoValidAction);
        }
        Ok(state)
    }

    fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        if budget == 0 && !self.done {
            self.done = true;
            self.outcome = Some(Outcome::BudgetExhausted);
        }
        self
    }
}

/// One environment transition: apply the action, query the oracle once on
/// the resulting graph, assign the reward, and settle termination.
pub fn env_step<O: LabelOracle + ?Sized>(
    state: &EpisodeState,
    action: &RewiringAction,
    oracle: &O,
) -> Result<(EpisodeState, f64)> {
    if state.done {
        return Err(Error::Protocol("step on a finished episode".into()));
    }
    if !is_valid_rewiring_mode(&state.current_graph, action, state.mode) {
        return Err(Error::RejectedAction(format!(
            "action ({},{},{}) invalid in the current state",
            action.fir, action.sec, action.thi
        )));
    }
    let next_graph = apply_rewiring(&state.current_graph, action)?;
    let new_label = oracle.query_label(&next_graph)?;

    let mut next = EpisodeState {
        current_graph: next_graph,
        original_label: state.original_label,
        steps_taken: state.steps_taken + 1,
        budget: state.budget,
        penalty: state.penalty,
        mode: state.mode,
        done: false,
        outcome: None,
    };

    let reward = if new_label != state.original_label {
        next.done = true;
        next.outcome = Some(Outcome::Success);
        1.0
    } else {
        if next.steps_taken >= next.budget {
            next.done = true;
            next.outcome = Some(Outcome::BudgetExhausted);
        } else if rewiring_candidates_mode(&next.current_graph, next.mode).is_empty() {
            next.done = true;
            next.outcome = Some(Outcome::NoValidAction);
        }
        next.penalty
    };
    Ok((next, reward))
}

/// One recorded step: the pre-action state, the action, its reward, and the
/// log-probability under the acting policy.
#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub state: Graph,
    pub action: RewiringAction,
    pub reward: f64,
    pub log_prob: f64,
}

/// Full episode record.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub outcome: Outcome,
    pub final_graph: Graph,
    pub original_label: usize,
    pub oracle_queries: usize,
}

impl Trajectory {
    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::Success
    }

    pub fn total_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    /// Undiscounted returns-to-go G_t.
    pub fn returns_to_go(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.steps.len()];
        let mut acc = 0.0;
        for (i, step) in self.steps.iter().enumerate().rev() {
            acc += step.reward;
            out[i] = acc;
        }
        out
    }
}

/// Drive one episode to termination with the given action sampler. The
/// sampler sees the current graph and returns (action, log_prob); it is only
/// called in states that admit at least one valid action.
pub fn run_episode<O, S>(
    g: &Graph,
    original_label: usize,
    oracle: &O,
    cfg: &AttackConfig,
    mut sample: S,
) -> Result<Trajectory>
where
    O: LabelOracle + ?Sized,
    S: FnMut(&Graph) -> Result<(RewiringAction, f64)>,
{
    run_episode_inner(EpisodeState::start(g, original_label, cfg)?, oracle, &mut sample)
}

fn run_episode_inner<O, S>(
    mut state: EpisodeState,
    oracle: &O,
    sample: &mut S,
) -> Result<Trajectory>
where
    O: LabelOracle + ?Sized,
    S: FnMut(&Graph) -> Result<(RewiringAction, f64)>,
{
    let mut steps = Vec::new();
    let mut queries = 0;
    while !state.done {
        let (action, log_prob) = sample(&state.current_graph)?;
        let pre_state = state.current_graph.clone();
        let (next, reward) = env_step(&state, &action, oracle)?;
        queries += 1;
        steps.push(TrajectoryStep {
            state: pre_state,
            action,
            reward,
            log_prob,
        });
        state = next;
    }
    Ok(Trajectory {
        steps,
        outcome: state.outcome.expect("finished episode has an outcome"),
        final_graph: state.current_graph,
        original_label: state.original_label,
        oracle_queries: queries,
    })
}

/// Uniform sampler over the valid action set of the current state.
pub fn uniform_sampler<'r, R: Rng>(
    mode: ThirdNodeMode,
    rng: &'r mut R,
) -> impl FnMut(&Graph) -> Result<(RewiringAction, f64)> + 'r {
    move |g: &Graph| {
        let cands = rewiring_candidates_mode(g, mode);
        if cands.is_empty() {
            return Err(Error::EmptyActionSpace);
        }
        let a = cands[rng.gen_range(0..cands.len())];
        Ok((a, -(cands.len() as f64).ln()))
    }
}

/// The Random baseline: uniform rewirings until success, budget exhaustion,
/// or an empty action space.
pub fn random_attack<O: LabelOracle + ?Sized, R: Rng>(
    g: &Graph,
    original_label: usize,
    oracle: &O,
    cfg: &AttackConfig,
    rng: &mut R,
) -> Result<Trajectory> {
    let state = EpisodeState::start(g, original_label, cfg)?;
    run_episode_inner(state, oracle, &mut uniform_sampler(cfg.third_node_mode, rng))
}

/// The matched-step baseline: uniform rewirings with the budget overridden
/// to a recorded step count (stopping early on success, like every
/// attacker). `step_count == 0` yields an empty failed trajectory.
pub fn random_s_attack<O: LabelOracle + ?Sized, R: Rng>(
    g: &Graph,
    original_label: usize,
    oracle: &O,
    cfg: &AttackConfig,
    step_count: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    let state = EpisodeState::start(g, original_label, cfg)?.with_budget(step_count);
    run_episode_inner(state, oracle, &mut uniform_sampler(cfg.third_node_mode, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::FnOracle;
    use crate::numeric::DenseMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(n, edges, DenseMatrix::zeros(n, 1), None).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        unlabeled(n, &edges)
    }

    fn grid_graph() -> Graph {
        // 3x3 grid: plenty of 2-hop structure
        let mut edges = Vec::new();
        for r in 0..3usize {
            for c in 0..3usize {
                let v = r * 3 + c;
                if c + 1 < 3 {
                    edges.push((v, v + 1));
                }
                if r + 1 < 3 {
                    edges.push((v, v + 3));
                }
            }
        }
        unlabeled(9, &edges)
    }

    fn ratio_cfg(p: f64) -> AttackConfig {
        AttackConfig {
            budget: BudgetMode::Ratio(p),
            penalty: PenaltyMode::Flexible,
            third_node_mode: ThirdNodeMode::TwoHop,
        }
    }

    #[test]
    fn budget_arithmetic() {
        let g100 = {
            // 100-edge graph: a long cycle with chords
            let mut edges: Vec<(usize, usize)> = (0..99).map(|i| (i, i + 1)).collect();
            edges.push((0, 99));
            unlabeled(100, &edges)
        };
        assert_eq!(g100.num_edges(), 100);
        assert_eq!(compute_budget(&g100, &ratio_cfg(0.02)).unwrap(), 2);
        assert_eq!(compute_budget(&g100, &ratio_cfg(0.03)).unwrap(), 3);

        let g10 = path(11);
        assert_eq!(g10.num_edges(), 10);
        assert_eq!(compute_budget(&g10, &ratio_cfg(0.03)).unwrap(), 1);

        let fixed = AttackConfig {
            budget: BudgetMode::Fixed(3),
            ..Default::default()
        };
        assert_eq!(compute_budget(&g10, &fixed).unwrap(), 3);
        assert_eq!(compute_budget(&g100, &fixed).unwrap(), 3);

        assert!(compute_budget(&unlabeled(3, &[]), &ratio_cfg(0.02)).is_err());
        assert!(compute_budget(&g10, &ratio_cfg(1.5)).is_err());
    }

    #[test]
    fn penalty_arithmetic() {
        let g100 = {
            let mut edges: Vec<(usize, usize)> = (0..99).map(|i| (i, i + 1)).collect();
            edges.push((0, 99));
            unlabeled(100, &edges)
        };
        assert_eq!(step_penalty(&g100, &ratio_cfg(0.02)).unwrap(), -0.5);

        let fixed = AttackConfig {
            penalty: PenaltyMode::Fixed(-0.5),
            ..Default::default()
        };
        assert_eq!(step_penalty(&g100, &fixed).unwrap(), -0.5);
        assert_eq!(step_penalty(&path(3), &fixed).unwrap(), -0.5);

        // K = 1 -> n_r = -1
        let g = path(11);
        assert_eq!(step_penalty(&g, &ratio_cfg(0.03)).unwrap(), -1.0);

        let bad = AttackConfig {
            penalty: PenaltyMode::Fixed(0.1),
            ..Default::default()
        };
        assert!(step_penalty(&g, &bad).is_err());
    }

    #[test]
    fn env_step_success_on_first_action() {
        let g = grid_graph();
        let oracle = FnOracle(|graph: &Graph| if graph.edges() == g.edges() { 0 } else { 1 });
        let state = EpisodeState::start(&g, 0, &ratio_cfg(0.2)).unwrap();
        let cands = rewiring_candidates_mode(&g, ThirdNodeMode::TwoHop);
        let (next, reward) = env_step(&state, &cands[0], &oracle).unwrap();
        assert_eq!(reward, 1.0);
        assert!(next.done);
        assert_eq!(next.outcome, Some(Outcome::Success));
        assert_eq!(next.steps_taken, 1);

        // stepping a finished episode is a protocol error
        assert!(matches!(
            env_step(&next, &cands[0], &oracle),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn constant_oracle_exhausts_budget() {
        let g = grid_graph();
        let oracle = FnOracle(|_: &Graph| 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // 12 edges, p such that K = 2
        let cfg = ratio_cfg(0.2);
        assert_eq!(compute_budget(&g, &cfg).unwrap(), 2);
        let traj = random_attack(&g, 0, &oracle, &cfg, &mut rng).unwrap();
        assert_eq!(traj.outcome, Outcome::BudgetExhausted);
        assert_eq!(traj.num_steps(), 2);
        for s in &traj.steps {
            assert_eq!(s.reward, -0.5);
        }
        assert_eq!(traj.oracle_queries, 2);
    }

    #[test]
    fn complete_graph_has_no_valid_action() {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((u, v));
            }
        }
        let k4 = unlabeled(4, &edges);
        let oracle = FnOracle(|_: &Graph| 0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traj = random_attack(&k4, 0, &oracle, &ratio_cfg(0.5), &mut rng).unwrap();
        assert_eq!(traj.outcome, Outcome::NoValidAction);
        assert_eq!(traj.num_steps(), 0);
        assert_eq!(traj.oracle_queries, 0);
        assert_eq!(traj.total_return(), 0.0);
    }

    #[test]
    fn flip_sensitive_oracle_reachable_and_reproducible() {
        // flips when node 0 loses an incident edge
        let g = grid_graph();
        let oracle = FnOracle(|graph: &Graph| if graph.degree(0) < 2 { 1 } else { 0 });
        let runs: Vec<Trajectory> = (0..20)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_attack(&g, 0, &oracle, &ratio_cfg(0.3), &mut rng).unwrap()
            })
            .collect();
        assert!(runs.iter().any(|t| t.succeeded()));

        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let a = random_attack(&g, 0, &oracle, &ratio_cfg(0.3), &mut r1).unwrap();
        let b = random_attack(&g, 0, &oracle, &ratio_cfg(0.3), &mut r2).unwrap();
        assert_eq!(a.num_steps(), b.num_steps());
        assert_eq!(a.outcome, b.outcome);
        for (sa, sb) in a.steps.iter().zip(&b.steps) {
            assert_eq!(sa.action, sb.action);
        }
    }

    #[test]
    fn random_s_matches_step_counts() {
        let g = grid_graph();
        let oracle = FnOracle(|_: &Graph| 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let t0 = random_s_attack(&g, 0, &oracle, &ratio_cfg(0.3), 0, &mut rng).unwrap();
        assert_eq!(t0.num_steps(), 0);
        assert!(!t0.succeeded());

        let t3 = random_s_attack(&g, 0, &oracle, &ratio_cfg(0.3), 3, &mut rng).unwrap();
        assert_eq!(t3.num_steps(), 3);
        assert_eq!(t3.outcome, Outcome::BudgetExhausted);
    }

    #[test]
    fn episode_invariants_over_scripted_oracles() {
        // oracles: never flip, always flip, flip after node 0 isolated
        let oracles: Vec<Box<dyn Fn(&Graph) -> usize + Sync>> = vec![
            Box::new(|_| 0),
            Box::new(|_| 1),
            Box::new(|g: &Graph| usize::from(g.degree(0) == 0)),
        ];
        for (oi, f) in oracles.into_iter().enumerate() {
            let oracle = FnOracle(move |g: &Graph| f(g));
            for seed in 0..30u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let g = grid_graph();
                let cfg = ratio_cfg(0.25);
                let k = compute_budget(&g, &cfg).unwrap();
                let nr = step_penalty(&g, &cfg).unwrap();
                let traj = random_attack(&g, 0, &oracle, &cfg, &mut rng).unwrap();

                assert!(traj.num_steps() <= k, "oracle {oi}: exceeded budget");
                assert_eq!(traj.oracle_queries, traj.num_steps());
                let successes = traj.steps.iter().filter(|s| s.reward == 1.0).count();
                if traj.succeeded() {
                    assert_eq!(successes, 1);
                    assert_eq!(traj.steps.last().unwrap().reward, 1.0);
                } else {
                    assert_eq!(successes, 0);
                    if traj.num_steps() > 0 {
                        let ret = traj.total_return();
                        assert!(
                            (-1.0..0.0).contains(&ret),
                            "failed return {ret} out of [-1,0)"
                        );
                        assert_eq!(ret, traj.num_steps() as f64 * nr);
                    }
                }
            }
        }
    }

    #[test]
    fn two_hop_actions_validated_against_pre_state() {
        let g = grid_graph();
        let oracle = FnOracle(|_: &Graph| 0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut state = EpisodeState::start(&g, 0, &ratio_cfg(0.5)).unwrap();
        while !state.done {
            let cands = rewiring_candidates_mode(&state.current_graph, state.mode);
            for a in &cands {
                assert!(crate::graph::is_valid_rewiring(&state.current_graph, a));
            }
            let a = cands[rng.gen_range(0..cands.len())];
            let (next, _) = env_step(&state, &a, &oracle).unwrap();
            state = next;
        }
    }

    #[test]
    fn invalid_action_rejected() {
        let g = path(3);
        let oracle = FnOracle(|_: &Graph| 0);
        let state = EpisodeState::start(&g, 0, &ratio_cfg(0.5)).unwrap();
        let bad = RewiringAction { fir: 1, sec: 0, thi: 2 };
        assert!(matches!(
            env_step(&state, &bad, &oracle),
            Err(Error::RejectedAction(_))
        ));
    }
}
