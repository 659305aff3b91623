//! Post-hoc attack analysis: embedding and logit drift of attacked graphs,
//! and the rewiring vs add/delete operator comparison.
//!
//! Unlike the attack path, analysis is allowed to read the classifier's
//! embeddings and class distributions.

use rand::Rng;

use crate::attack::{Outcome, Trajectory};
use crate::classifier::{predict, relative_embedding_change, ClassifierModel};
use crate::error::{Error, Result};
use crate::graph::{connected_components, random_add_delete, Graph};
use crate::numeric::PROB_FLOOR;
use crate::spectral::eigenvalue_change_ratio;

/// KL divergence sum p_o log(p_o / p_a) with 0 log(0/q) = 0 and the attacked
/// distribution floored at 1e-12 (hard predictions can zero entries).
pub fn kl_logits(p_o: &[f64], p_a: &[f64]) -> Result<f64> {
    if p_o.len() != p_a.len() {
        return Err(Error::invalid("class distributions differ in length"));
    }
    let mut kl = 0.0;
    for (&po, &pa) in p_o.iter().zip(p_a) {
        if po > 0.0 {
            kl += po * (po / pa.max(PROB_FLOOR)).ln();
        }
    }
    Ok(kl)
}

/// Everything measured about one attacked graph.
#[derive(Clone, Debug)]
pub struct AttackAnalysisRecord {
    pub graph_id: usize,
    pub outcome: Outcome,
    /// Rewiring operations actually used.
    pub steps: usize,
    /// steps / |E| of the clean graph.
    pub edge_ratio: f64,
    /// Relative change of the pooled graph embedding.
    pub rc: f64,
    /// KL divergence between clean and attacked class distributions.
    pub kl: f64,
    pub components_before: usize,
    pub components_after: usize,
    /// Per-index relative eigenvalue changes (None where the clean
    /// eigenvalue is numerically zero).
    pub r_lambda: Vec<Option<f64>>,
}

/// Analyze one finished episode against the full (white-box) classifier.
pub fn analyze_attack(
    graph_id: usize,
    g_orig: &Graph,
    trajectory: &Trajectory,
    classifier: &ClassifierModel,
) -> Result<AttackAnalysisRecord> {
    let clean = predict(g_orig, classifier)?;
    let attacked = predict(&trajectory.final_graph, classifier)?;
    if trajectory.succeeded() {
        debug_assert_ne!(clean.label, attacked.label);
    }
    let rc = if trajectory.num_steps() == 0 {
        0.0
    } else {
        relative_embedding_change(&clean.graph_embedding, &attacked.graph_embedding)?
    };
    let kl = if trajectory.num_steps() == 0 {
        0.0
    } else {
        kl_logits(&clean.logits, &attacked.logits)?
    };
    Ok(AttackAnalysisRecord {
        graph_id,
        outcome: trajectory.outcome,
        steps: trajectory.num_steps(),
        edge_ratio: trajectory.num_steps() as f64 / g_orig.num_edges() as f64,
        rc,
        kl,
        components_before: connected_components(g_orig).0,
        components_after: connected_components(&trajectory.final_graph).0,
        r_lambda: eigenvalue_change_ratio(g_orig, &trajectory.final_graph)?,
    })
}

/// One input to the operator comparison: a clean graph, the graph after M
/// recorded rewirings, and M itself (the matched edit budget).
#[derive(Clone, Debug)]
pub struct OperatorCase {
    pub id: usize,
    pub original: Graph,
    pub rewired: Graph,
    pub ops: usize,
}

/// Per-graph rows of the comparison.
#[derive(Clone, Debug)]
pub struct OperatorCaseReport {
    pub id: usize,
    pub ops: usize,
    pub components_clean: usize,
    pub components_rewired: usize,
    pub components_add_delete: usize,
    pub lambda2_clean: f64,
    pub lambda2_rewired: f64,
    pub lambda2_add_delete: f64,
    pub resistance_clean: Option<f64>,
    pub resistance_rewired: Option<f64>,
    pub resistance_add_delete: Option<f64>,
}

/// Mean relative eigenvalue change per index, for both operators, plus the
/// add-delete / rewire ratio where defined.
#[derive(Clone, Debug)]
pub struct IndexRatio {
    pub index: usize,
    pub mean_rewire: f64,
    pub mean_add_delete: f64,
    pub samples: usize,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OperatorComparisonReport {
    pub cases: Vec<OperatorCaseReport>,
    pub per_index: Vec<IndexRatio>,
    pub mean_components_clean: f64,
    pub mean_components_rewired: f64,
    pub mean_components_add_delete: f64,
    pub frac_more_disconnected_rewired: f64,
    pub frac_more_disconnected_add_delete: f64,
}

/// Matched-budget comparison of the rewiring operator against random edge
/// adds/deletes: each case gets exactly `ops` add/delete edits next to its
/// `ops` recorded rewirings, then component counts and per-index eigenvalue
/// change ratios are aggregated.
pub fn compare_operators<R: Rng>(
    cases: &[OperatorCase],
    rng: &mut R,
) -> Result<OperatorComparisonReport> {
    if cases.is_empty() {
        return Err(Error::invalid("operator comparison needs at least one case"));
    }
    let mut case_reports = Vec::with_capacity(cases.len());
    // index -> (rewire sum, add/delete sum, count)
    let mut sums: Vec<(f64, f64, usize)> = Vec::new();
    let mut more_disconnected = (0usize, 0usize);

    for case in cases {
        if case.original.num_nodes() != case.rewired.num_nodes() {
            return Err(Error::invalid("rewired graph must keep the node count"));
        }
        let (edited, _) = random_add_delete(&case.original, case.ops, rng);

        let r_re = eigenvalue_change_ratio(&case.original, &case.rewired)?;
        let r_da = eigenvalue_change_ratio(&case.original, &edited)?;
        for (i, (re, da)) in r_re.iter().zip(&r_da).enumerate() {
            if let (Some(re), Some(da)) = (re, da) {
                if sums.len() <= i {
                    sums.resize(i + 1, (0.0, 0.0, 0));
                }
                sums[i].0 += re;
                sums[i].1 += da;
                sums[i].2 += 1;
            }
        }

        let cc = connected_components(&case.original).0;
        let cr = connected_components(&case.rewired).0;
        let cd = connected_components(&edited).0;
        if cr > cc {
            more_disconnected.0 += 1;
        }
        if cd > cc {
            more_disconnected.1 += 1;
        }

        let spectrum = |g: &Graph| -> Result<(f64, Option<f64>)> {
            let rep = crate::spectral::spectral_report(g, None)?;
            Ok((rep.algebraic_connectivity, rep.effective_resistance))
        };
        let (l2c, rc_) = spectrum(&case.original)?;
        let (l2r, rr) = spectrum(&case.rewired)?;
        let (l2d, rd) = spectrum(&edited)?;
        case_reports.push(OperatorCaseReport {
            id: case.id,
            ops: case.ops,
            components_clean: cc,
            components_rewired: cr,
            components_add_delete: cd,
            lambda2_clean: l2c,
            lambda2_rewired: l2r,
            lambda2_add_delete: l2d,
            resistance_clean: rc_,
            resistance_rewired: rr,
            resistance_add_delete: rd,
        });
    }

    let per_index = sums
        .iter()
        .enumerate()
        .filter(|(_, (_, _, n))| *n > 0)
        .map(|(i, &(re, da, n))| {
            let mean_rewire = re / n as f64;
            let mean_add_delete = da / n as f64;
            IndexRatio {
                index: i,
                mean_rewire,
                mean_add_delete,
                samples: n,
                ratio: if mean_rewire > 1e-12 {
                    Some(mean_add_delete / mean_rewire)
                } else {
                    None
                },
            }
        })
        .collect();

    let nf = cases.len() as f64;
    Ok(OperatorComparisonReport {
        mean_components_clean: case_reports
            .iter()
            .map(|c| c.components_clean as f64)
            .sum::<f64>()
            / nf,
        mean_components_rewired: case_reports
            .iter()
            .map(|c| c.components_rewired as f64)
            .sum::<f64>()
            / nf,
        mean_components_add_delete: case_reports
            .iter()
            .map(|c| c.components_add_delete as f64)
            .sum::<f64>()
            / nf,
        frac_more_disconnected_rewired: more_disconnected.0 as f64 / nf,
        frac_more_disconnected_add_delete: more_disconnected.1 as f64 / nf,
        cases: case_reports,
        per_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{random_attack, AttackConfig, BudgetMode, PenaltyMode};
    use crate::classifier::{init_classifier, ClassifierTrainConfig, FnOracle};
    use crate::graph::{random_rewirings, ThirdNodeMode};
    use crate::numeric::DenseMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_cases() {
        assert_eq!(kl_logits(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        let kl = kl_logits(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((kl - 2.0f64.ln()).abs() < 1e-12);
        assert!(kl_logits(&[1.0], &[0.5, 0.5]).is_err());
        // zero attacked entry is floored, stays finite
        assert!(kl_logits(&[0.5, 0.5], &[1.0, 0.0]).unwrap().is_finite());
    }

    #[test]
    fn kl_nonnegative_over_random_simplex_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let c = rng.gen_range(2..6);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let raw: Vec<f64> = (0..c).map(|_| -f64::ln(rng.gen_range(1e-9..1.0))).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            };
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let kl = kl_logits(&p, &q).unwrap();
            assert!(kl >= -1e-12, "KL {kl} negative for {p:?} vs {q:?}");
            assert_eq!(kl_logits(&p, &p).unwrap(), 0.0);
        }
    }

    fn degree_featured(n: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> Graph {
        let _ = rng;
        let g = Graph::new(n, edges, DenseMatrix::zeros(n, 2), None).unwrap();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|v| vec![1.0, g.degree(v) as f64 / n as f64])
            .collect();
        g.with_features(DenseMatrix::from_rows(&rows).unwrap()).unwrap()
    }

    fn random_connected(n: usize, extra: f64, rng: &mut ChaCha8Rng) -> Graph {
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if !edges.contains(&(u, v)) && rng.gen_bool(extra) {
                    edges.push((u, v));
                }
            }
        }
        degree_featured(n, &edges, rng)
    }

    #[test]
    fn analyze_zero_step_trajectory() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // complete graph: no candidate, zero-step trajectory
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in (u + 1)..5 {
                edges.push((u, v));
            }
        }
        let g = degree_featured(5, &edges, &mut rng);
        let oracle = FnOracle(|_: &Graph| 0);
        let cfg = AttackConfig::default();
        let traj = random_attack(&g, 0, &oracle, &cfg, &mut rng).unwrap();
        assert_eq!(traj.num_steps(), 0);

        let mut mrng = ChaCha8Rng::seed_from_u64(5);
        let model = init_classifier(
            2,
            2,
            &ClassifierTrainConfig {
                num_layers: 2,
                hidden_dim: 4,
                ..Default::default()
            },
            &mut mrng,
        );
        let rec = analyze_attack(1, &g, &traj, &model).unwrap();
        assert_eq!(rec.rc, 0.0);
        assert_eq!(rec.kl, 0.0);
        assert_eq!(rec.steps, 0);
        assert_eq!(rec.components_before, rec.components_after);
    }

    #[test]
    fn analyze_success_has_label_change_and_finite_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_connected(10, 0.2, &mut rng);
        let mut mrng = ChaCha8Rng::seed_from_u64(7);
        let model = init_classifier(
            2,
            2,
            &ClassifierTrainConfig {
                num_layers: 2,
                hidden_dim: 8,
                ..Default::default()
            },
            &mut mrng,
        );
        // attack the real classifier as a black box
        let clean = crate::classifier::predict(&g, &model).unwrap().label;
        let cfg = AttackConfig {
            budget: BudgetMode::Fixed(6),
            penalty: PenaltyMode::Flexible,
            third_node_mode: ThirdNodeMode::TwoHop,
        };
        let traj = random_attack(&g, clean, &model, &cfg, &mut rng).unwrap();
        let rec = analyze_attack(0, &g, &traj, &model).unwrap();
        assert!(rec.rc.is_finite() && rec.rc >= 0.0);
        assert!(rec.kl.is_finite() && rec.kl >= -1e-12);
        assert!(rec.edge_ratio > 0.0 || traj.num_steps() == 0);
        if traj.succeeded() {
            let after = crate::classifier::predict(&traj.final_graph, &model)
                .unwrap()
                .label;
            assert_ne!(clean, after);
        }
        // reproducible under the same seeds
        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        let g2 = random_connected(10, 0.2, &mut rng2);
        let traj2 = random_attack(&g2, clean, &model, &cfg, &mut rng2).unwrap();
        let rec2 = analyze_attack(0, &g2, &traj2, &model).unwrap();
        assert_eq!(rec.rc, rec2.rc);
        assert_eq!(rec.kl, rec2.kl);
    }

    #[test]
    fn compare_operators_rejects_empty_and_counts_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(compare_operators(&[], &mut rng).is_err());

        let g = random_connected(8, 0.3, &mut rng);
        let (rew, applied) = random_rewirings(&g, 2, &mut rng);
        assert_eq!(applied, 2);
        let cases = vec![OperatorCase {
            id: 0,
            original: g,
            rewired: rew,
            ops: 2,
        }];
        let report = compare_operators(&cases, &mut rng).unwrap();
        assert_eq!(report.cases.len(), 1);
        assert_eq!(report.cases[0].ops, 2);
    }

    #[test]
    fn rewiring_changes_eigenvalues_less_than_add_delete_on_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut cases = Vec::new();
        for id in 0..30 {
            let n = rng.gen_range(10..=14);
            let g = random_connected(n, 0.15, &mut rng);
            let (rew, applied) = random_rewirings(&g, 2, &mut rng);
            assert!(applied >= 1);
            cases.push(OperatorCase {
                id,
                original: g,
                rewired: rew,
                ops: applied,
            });
        }
        let report = compare_operators(&cases, &mut rng).unwrap();
        let defined: Vec<f64> = report.per_index.iter().filter_map(|r| r.ratio).collect();
        assert!(!defined.is_empty());
        let above = defined.iter().filter(|r| **r > 1.0).count();
        assert!(
            above * 2 > defined.len(),
            "majority of indices should favor rewiring: {above}/{}",
            defined.len()
        );
    }
}
