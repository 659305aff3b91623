//! CSV emission. Every writer assembles the whole file in memory and writes
//! once; all fields are plain tokens (no quoting needed) and numeric fields
//! use shortest-roundtrip formatting, so identical runs produce identical
//! bytes.

use std::fmt::Write as _;
use std::path::Path;

use rewatt_core::analysis::{AttackAnalysisRecord, OperatorComparisonReport};
use rewatt_core::classifier::TrainTrace;
use rewatt_core::error::Result;

use crate::pipeline::{EpisodeRecord, SuccessRateReport};

fn write_file(path: &Path, content: String) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "inf".into(),
    }
}

pub fn write_classifier_trace(path: &Path, trace: &TrainTrace) -> Result<()> {
    let mut out = String::from("epoch,loss,train_accuracy\n");
    for (i, (loss, acc)) in trace
        .epoch_loss
        .iter()
        .zip(&trace.epoch_accuracy)
        .enumerate()
    {
        writeln!(out, "{i},{loss},{acc}").unwrap();
    }
    write_file(path, out)
}

pub fn write_attacker_curve(path: &Path, curve: &[f64]) -> Result<()> {
    let mut out = String::from("epoch,success_rate\n");
    for (i, rate) in curve.iter().enumerate() {
        writeln!(out, "{i},{rate}").unwrap();
    }
    write_file(path, out)
}

pub fn write_attack_report(path: &Path, episodes: &[EpisodeRecord]) -> Result<()> {
    let mut out =
        String::from("graph_id,variant,budget_mode,budget_value,k,m,outcome,oracle_queries,success\n");
    for e in episodes {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.graph_id,
            e.variant,
            e.budget, // already "mode,value"
            e.k,
            e.m,
            e.outcome,
            e.oracle_queries,
            u8::from(e.success())
        )
        .unwrap();
    }
    write_file(path, out)
}

pub fn write_summary(path: &Path, summary: &SuccessRateReport) -> Result<()> {
    let mut out = String::from(
        "variant,budget_mode,budget_value,total,succeeded,budget_exhausted,no_valid_action,success_rate\n",
    );
    for r in &summary.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.variant,
            r.budget,
            r.total,
            r.succeeded,
            r.budget_exhausted,
            r.no_valid_action,
            r.success_rate()
        )
        .unwrap();
    }
    write_file(path, out)
}

/// Wall-clock sidecar; the only run output that is not reproducible byte for
/// byte, which is why it lives apart from the report CSVs.
pub fn write_timings(path: &Path, timings: &[(String, String, u128)]) -> Result<()> {
    let mut out = String::from("variant,budget_mode,budget_value,wall_ms\n");
    for (variant, budget, ms) in timings {
        writeln!(out, "{variant},{budget},{ms}").unwrap();
    }
    write_file(path, out)
}

pub fn write_analysis(
    path: &Path,
    rows: &[(String, String, AttackAnalysisRecord)],
) -> Result<()> {
    let mut out = String::from(
        "graph_id,variant,budget_mode,budget_value,outcome,m,ratio_m_edges,rc,kl,\
         components_before,components_after,r_lambda\n",
    );
    for (variant, budget, r) in rows {
        let r_lambda = r
            .r_lambda
            .iter()
            .map(|v| match v {
                Some(x) => format!("{x}"),
                None => "na".into(),
            })
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.graph_id,
            variant,
            budget,
            r.outcome.as_str(),
            r.steps,
            r.edge_ratio,
            r.rc,
            r.kl,
            r.components_before,
            r.components_after,
            r_lambda
        )
        .unwrap();
    }
    write_file(path, out)
}

pub fn write_spectral_compare(path: &Path, report: &OperatorComparisonReport) -> Result<()> {
    let mut out = String::from(
        "graph_id,ops,components_clean,components_rewired,components_add_delete,\
         lambda2_clean,lambda2_rewired,lambda2_add_delete,re_clean,re_rewired,re_add_delete\n",
    );
    for c in &report.cases {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.id,
            c.ops,
            c.components_clean,
            c.components_rewired,
            c.components_add_delete,
            c.lambda2_clean,
            c.lambda2_rewired,
            c.lambda2_add_delete,
            opt(c.resistance_clean),
            opt(c.resistance_rewired),
            opt(c.resistance_add_delete),
        )
        .unwrap();
    }
    write_file(path, out)
}

pub fn write_ratio_summary(path: &Path, report: &OperatorComparisonReport) -> Result<()> {
    let mut out = String::from(
        "eigen_index,mean_r_rewire,mean_r_add_delete,ratio_add_delete_over_rewire,samples\n",
    );
    for r in &report.per_index {
        let ratio = match r.ratio {
            Some(x) => format!("{x}"),
            None => "na".into(),
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            r.index, r.mean_rewire, r.mean_add_delete, ratio, r.samples
        )
        .unwrap();
    }
    write_file(path, out)
}

pub fn write_operator_summary(path: &Path, report: &OperatorComparisonReport) -> Result<()> {
    let mut out = String::from("metric,value\n");
    for (metric, value) in [
        ("mean_components_clean", report.mean_components_clean),
        ("mean_components_rewired", report.mean_components_rewired),
        (
            "mean_components_add_delete",
            report.mean_components_add_delete,
        ),
        (
            "frac_more_disconnected_rewired",
            report.frac_more_disconnected_rewired,
        ),
        (
            "frac_more_disconnected_add_delete",
            report.frac_more_disconnected_add_delete,
        ),
    ] {
        writeln!(out, "{metric},{value}").unwrap();
    }
    write_file(path, out)
}
