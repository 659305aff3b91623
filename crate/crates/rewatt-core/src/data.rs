//! Dataset plumbing: node-feature synthesis, the planted-community synthetic
//! benchmark, the TU text-format loader, splits, and dataset persistence.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::DenseMatrix;

/// How node features are synthesized for attribute-free graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMode {
    /// One-hot degree buckets [0], [1], [2], [3-4], [5-8], [9-16], [17+].
    DegreeBuckets,
    /// A single constant-1 feature.
    ConstantOne,
}

impl FeatureMode {
    pub fn width(&self) -> usize {
        match self {
            FeatureMode::DegreeBuckets => 7,
            FeatureMode::ConstantOne => 1,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureMode::DegreeBuckets => "degree_buckets",
            FeatureMode::ConstantOne => "constant_one",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "degree_buckets" => Ok(FeatureMode::DegreeBuckets),
            "constant_one" => Ok(FeatureMode::ConstantOne),
            other => Err(Error::Config(format!("unknown feature mode '{other}'"))),
        }
    }
}

fn degree_bucket(d: usize) -> usize {
    match d {
        0 => 0,
        1 => 1,
        2 => 2,
        3..=4 => 3,
        5..=8 => 4,
        9..=16 => 5,
        _ => 6,
    }
}

/// Features computed once from the clean structure; frozen thereafter.
pub fn synthesize_features(num_nodes: usize, degrees: &[usize], mode: FeatureMode) -> DenseMatrix {
    assert_eq!(degrees.len(), num_nodes);
    let mut x = DenseMatrix::zeros(num_nodes, mode.width());
    for (v, &deg) in degrees.iter().enumerate() {
        match mode {
            FeatureMode::DegreeBuckets => x.set(v, degree_bucket(deg), 1.0),
            FeatureMode::ConstantOne => x.set(v, 0, 1.0),
        }
    }
    x
}

/// Attach synthesized features to a structural graph.
pub fn with_synthesized_features(g: Graph, mode: FeatureMode) -> Graph {
    let degrees: Vec<usize> = (0..g.num_nodes()).map(|v| g.degree(v)).collect();
    let feats = synthesize_features(g.num_nodes(), &degrees, mode);
    g.with_features(feats).expect("row count matches by construction")
}

// ---------------------------------------------------------------------------
// Synthetic benchmark
// ---------------------------------------------------------------------------

/// Planted-community generator: class c gets c+1 equally sized communities,
/// dense inside and sparse across, so community count is the class signal.
/// The within-community density is drawn per graph from
/// [intra_prob - intra_jitter, intra_prob + intra_jitter], which puts some
/// graphs near the class boundaries and leaves the victim attackable.
#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub graphs_per_class: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub intra_prob: f64,
    pub intra_jitter: f64,
    pub inter_prob: f64,
    pub feature_mode: FeatureMode,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            classes: 3,
            graphs_per_class: 100,
            min_nodes: 20,
            max_nodes: 30,
            intra_prob: 0.8,
            intra_jitter: 0.15,
            inter_prob: 0.05,
            feature_mode: FeatureMode::DegreeBuckets,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::invalid("need at least 2 classes"));
        }
        if self.graphs_per_class == 0 {
            return Err(Error::invalid("need at least one graph per class"));
        }
        if self.min_nodes < 2 || self.min_nodes > self.max_nodes {
            return Err(Error::invalid("node range invalid"));
        }
        if self.min_nodes < 2 * self.classes {
            return Err(Error::invalid(
                "smallest graphs cannot hold the largest community count",
            ));
        }
        if self.intra_jitter < 0.0
            || self.intra_prob - self.intra_jitter < 0.0
            || self.intra_prob + self.intra_jitter > 1.0
        {
            return Err(Error::invalid(
                "intra_prob +/- intra_jitter must stay inside [0,1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.inter_prob) {
            return Err(Error::invalid("edge probabilities must lie in [0,1]"));
        }
        Ok(())
    }
}

/// Deterministic per seed. Output is class-major: all class-0 graphs first.
pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Graph>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::with_capacity(spec.classes * spec.graphs_per_class);
    for class in 0..spec.classes {
        let communities = class + 1;
        for _ in 0..spec.graphs_per_class {
            let n = rng.gen_range(spec.min_nodes..=spec.max_nodes);
            let intra = if spec.intra_jitter > 0.0 {
                rng.gen_range(spec.intra_prob - spec.intra_jitter
                    ..=spec.intra_prob + spec.intra_jitter)
            } else {
                spec.intra_prob
            };
            // contiguous, near-equal community blocks
            let block = |v: usize| v * communities / n;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    let p = if block(u) == block(v) {
                        intra
                    } else {
                        spec.inter_prob
                    };
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            if edges.is_empty() {
                edges.push((0, 1));
            }
            let g = Graph::new(n, &edges, DenseMatrix::zeros(n, 1), Some(class))?;
            graphs.push(with_synthesized_features(g, spec.feature_mode));
        }
    }
    Ok(graphs)
}

// ---------------------------------------------------------------------------
// TU text format
// ---------------------------------------------------------------------------

fn find_file(dir: &Path, suffix: &str) -> Result<PathBuf> {
    let mut matches: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(suffix))
        })
        .collect();
    matches.sort();
    match matches.len() {
        0 => Err(Error::Parse {
            file: dir.display().to_string(),
            line: 0,
            msg: format!("no file ending in {suffix}"),
        }),
        1 => Ok(matches.remove(0)),
        _ => Err(Error::Parse {
            file: dir.display().to_string(),
            line: 0,
            msg: format!("multiple files ending in {suffix}"),
        }),
    }
}

fn parse_lines<T, F>(path: &Path, mut parse: F) -> Result<Vec<T>>
where
    F: FnMut(&str) -> std::result::Result<T, String>,
{
    let content = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse(line).map_err(|msg| Error::Parse {
            file: path.display().to_string(),
            line: i + 1,
            msg,
        })?);
    }
    Ok(out)
}

/// Load a dataset in the TU text format: an `_A.txt` edge list of 1-based
/// "i, j" pairs, a `_graph_indicator.txt` mapping each node line to its
/// graph, and a `_graph_labels.txt` with one label per graph. Node ids are
/// remapped to dense 0-based ids per graph; labels to 0..C-1. Symmetric
/// duplicate edge lines and self-loops are dropped. When `expected` is
/// given, the loaded (graph count, label count) must match it.
pub fn load_tu_dataset(
    dir: &Path,
    feature_mode: FeatureMode,
    expected: Option<(usize, usize)>,
) -> Result<Vec<Graph>> {
    let a_path = find_file(dir, "_A.txt")?;
    let ind_path = find_file(dir, "_graph_indicator.txt")?;
    let lab_path = find_file(dir, "_graph_labels.txt")?;

    let indicator: Vec<usize> = parse_lines(&ind_path, |l| {
        l.parse::<usize>().map_err(|e| format!("bad graph id: {e}"))
    })?;
    if indicator.is_empty() {
        return Err(Error::Integrity("empty graph indicator".into()));
    }
    let num_graphs = *indicator.iter().max().unwrap();
    if indicator.contains(&0) {
        return Err(Error::Integrity("graph indicator ids are 1-based".into()));
    }

    let raw_labels: Vec<i64> = parse_lines(&lab_path, |l| {
        l.parse::<i64>().map_err(|e| format!("bad label: {e}"))
    })?;
    if raw_labels.len() != num_graphs {
        return Err(Error::Integrity(format!(
            "{} labels for {} graphs",
            raw_labels.len(),
            num_graphs
        )));
    }
    let mut classes: Vec<i64> = raw_labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let label_of = |raw: i64| classes.binary_search(&raw).unwrap();

    // local node ids per graph, in global order
    let mut local_id = vec![0usize; indicator.len()];
    let mut node_count = vec![0usize; num_graphs];
    for (global, &gid) in indicator.iter().enumerate() {
        local_id[global] = node_count[gid - 1];
        node_count[gid - 1] += 1;
    }

    let edge_pairs: Vec<(usize, usize)> = parse_lines(&a_path, |l| {
        let parts: Vec<&str> = l
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if parts.len() != 2 {
            return Err(format!("expected 'i, j', got '{l}'"));
        }
        let u = parts[0].parse::<usize>().map_err(|e| e.to_string())?;
        let v = parts[1].parse::<usize>().map_err(|e| e.to_string())?;
        if u == 0 || v == 0 {
            return Err("node ids are 1-based".into());
        }
        Ok((u, v))
    })?;

    let mut edges_per_graph: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_graphs];
    for (u, v) in edge_pairs {
        if u > indicator.len() || v > indicator.len() {
            return Err(Error::Integrity(format!(
                "edge ({u},{v}) references a node beyond the indicator"
            )));
        }
        let (gu, gv) = (indicator[u - 1], indicator[v - 1]);
        if gu != gv {
            return Err(Error::Integrity(format!(
                "edge ({u},{v}) crosses graphs {gu} and {gv}"
            )));
        }
        if u == v {
            continue;
        }
        let (a, b) = (local_id[u - 1], local_id[v - 1]);
        edges_per_graph[gu - 1].push((a.min(b), a.max(b)));
    }

    let mut graphs = Vec::with_capacity(num_graphs);
    for (gi, mut edges) in edges_per_graph.into_iter().enumerate() {
        edges.sort_unstable();
        edges.dedup();
        let n = node_count[gi];
        let g = Graph::new(n, &edges, DenseMatrix::zeros(n, 1), Some(label_of(raw_labels[gi])))?;
        graphs.push(with_synthesized_features(g, feature_mode));
    }

    if let Some((want_graphs, want_labels)) = expected {
        if graphs.len() != want_graphs || classes.len() != want_labels {
            return Err(Error::Integrity(format!(
                "loaded {} graphs / {} labels, expected {want_graphs} / {want_labels}",
                graphs.len(),
                classes.len()
            )));
        }
    }
    Ok(graphs)
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Index-level split: shuffle 0..n with the seed, then cut contiguously at
/// a% : b% : c%. The returned indices refer to the caller's graph order.
pub fn split_indices(
    n: usize,
    a: u32,
    b: u32,
    c: u32,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if a + b + c != 100 || a == 0 || b == 0 || c == 0 {
        return Err(Error::invalid(format!(
            "split {a}/{b}/{c} must be positive and sum to 100"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let na = ((n as f64) * (a as f64) / 100.0).round() as usize;
    let nb = ((n as f64) * (b as f64) / 100.0).round() as usize;
    let na = na.min(n);
    let nb = nb.min(n - na);
    let rest = order.split_off(na + nb);
    let mid = order.split_off(na);
    Ok((order, mid, rest))
}

/// Shuffle with the seed, then cut contiguously into (classifier-train,
/// attacker-train, attacker-test) at a% : b% : c%.
pub fn split_dataset(
    graphs: &[Graph],
    a: u32,
    b: u32,
    c: u32,
    seed: u64,
) -> Result<(Vec<Graph>, Vec<Graph>, Vec<Graph>)> {
    let (ia, ib, ic) = split_indices(graphs.len(), a, b, c, seed)?;
    let part = |idx: &[usize]| -> Vec<Graph> { idx.iter().map(|&i| graphs[i].clone()).collect() };
    Ok((part(&ia), part(&ib), part(&ic)))
}

// ---------------------------------------------------------------------------
// Dataset persistence (JSON structure + feature mode; features re-synthesized
// on load so they always reflect the clean structure)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    label: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    version: u32,
    feature_mode: String,
    graphs: Vec<GraphRecord>,
}

pub fn save_dataset(path: &Path, graphs: &[Graph], mode: FeatureMode) -> Result<()> {
    let file = DatasetFile {
        version: 1,
        feature_mode: mode.as_str().to_string(),
        graphs: graphs
            .iter()
            .map(|g| GraphRecord {
                num_nodes: g.num_nodes(),
                edges: g.edges().to_vec(),
                label: g.label(),
            })
            .collect(),
    };
    fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<(Vec<Graph>, FeatureMode)> {
    let content = fs::read_to_string(path)?;
    let file: DatasetFile = serde_json::from_str(&content)?;
    if file.version != 1 {
        return Err(Error::invalid(format!(
            "unsupported dataset version {}",
            file.version
        )));
    }
    let mode = FeatureMode::parse(&file.feature_mode)?;
    let graphs = file
        .graphs
        .into_iter()
        .map(|r| {
            Graph::new(
                r.num_nodes,
                &r.edges,
                DenseMatrix::zeros(r.num_nodes, 1),
                r.label,
            )
            .map(|g| with_synthesized_features(g, mode))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((graphs, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn degree_buckets_cover_ranges() {
        let cases = [
            (0, 0),
            (1, 1),
            (2, 2),
            (3, 3),
            (4, 3),
            (5, 4),
            (8, 4),
            (9, 5),
            (16, 5),
            (17, 6),
            (40, 6),
        ];
        for (deg, bucket) in cases {
            assert_eq!(degree_bucket(deg), bucket);
        }
        let x = synthesize_features(3, &[0, 4, 20], FeatureMode::DegreeBuckets);
        assert_eq!(x.get(0, 0), 1.0);
        assert_eq!(x.get(1, 3), 1.0);
        assert_eq!(x.get(2, 6), 1.0);
        for r in 0..3 {
            let s: f64 = (0..7).map(|c| x.get(r, c)).sum();
            assert_eq!(s, 1.0);
        }
    }

    #[test]
    fn synthetic_balanced_and_deterministic() {
        let spec = SyntheticSpec {
            graphs_per_class: 10,
            ..Default::default()
        };
        let a = gen_synthetic(&spec, 42).unwrap();
        assert_eq!(a.len(), 30);
        for class in 0..3 {
            let count = a
                .iter()
                .filter(|g| g.label() == Some(class))
                .count();
            assert_eq!(count, 10);
        }
        for g in &a {
            assert!((20..=30).contains(&g.num_nodes()));
            assert!(g.num_edges() > 0);
            assert_eq!(g.features().cols(), 7);
        }
        let b = gen_synthetic(&spec, 42).unwrap();
        for (ga, gb) in a.iter().zip(&b) {
            assert_eq!(ga.edges(), gb.edges());
            assert_eq!(ga.label(), gb.label());
        }
        let c = gen_synthetic(&spec, 43).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.edges() != y.edges()));
    }

    #[test]
    fn synthetic_rejects_infeasible_spec() {
        let spec = SyntheticSpec {
            classes: 12,
            min_nodes: 10,
            max_nodes: 12,
            ..Default::default()
        };
        assert!(gen_synthetic(&spec, 1).is_err());
        let spec = SyntheticSpec {
            classes: 1,
            ..Default::default()
        };
        assert!(gen_synthetic(&spec, 1).is_err());
    }

    fn write_tu_fixture(dir: &Path, prefix: &str) {
        // two graphs: a triangle (nodes 1-3) and a single edge (nodes 4-5);
        // edge lines are listed in both directions, as in the real files
        let a = "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n";
        let ind = "1\n1\n1\n2\n2\n";
        let lab = "7\n-2\n";
        for (suffix, content) in [
            ("_A.txt", a),
            ("_graph_indicator.txt", ind),
            ("_graph_labels.txt", lab),
        ] {
            let mut f = fs::File::create(dir.join(format!("{prefix}{suffix}"))).unwrap();
            f.write_all(content.as_bytes()).unwrap();
        }
    }

    #[test]
    fn tu_fixture_loads_exactly() {
        let dir = std::env::temp_dir().join(format!("tu_fixture_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        write_tu_fixture(&dir, "TOY");
        let graphs = load_tu_dataset(&dir, FeatureMode::DegreeBuckets, Some((2, 2))).unwrap();
        assert_eq!(graphs.len(), 2);
        assert_eq!(graphs[0].num_nodes(), 3);
        assert_eq!(graphs[0].edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(graphs[0].label(), Some(1)); // raw 7 -> index 1 (after -2)
        assert_eq!(graphs[1].num_nodes(), 2);
        assert_eq!(graphs[1].edges(), &[(0, 1)]);
        assert_eq!(graphs[1].label(), Some(0)); // raw -2 -> index 0

        // declared-statistics mismatch is an integrity error
        assert!(load_tu_dataset(&dir, FeatureMode::DegreeBuckets, Some((3, 2))).is_err());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn tu_loader_reports_file_and_line() {
        let dir = std::env::temp_dir().join(format!("tu_bad_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        write_tu_fixture(&dir, "TOY");
        fs::write(dir.join("TOY_A.txt"), "1, 2\nbogus\n").unwrap();
        let err = load_tu_dataset(&dir, FeatureMode::ConstantOne, None).unwrap_err();
        match err {
            Error::Parse { file, line, .. } => {
                assert!(file.ends_with("TOY_A.txt"));
                assert_eq!(line, 2);
            }
            other => panic!("expected parse error, got {other}"),
        }

        // indicator inconsistency: edge crossing graphs
        fs::write(dir.join("TOY_A.txt"), "1, 4\n").unwrap();
        let err = load_tu_dataset(&dir, FeatureMode::ConstantOne, None).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)), "{err}");

        // missing file
        fs::remove_file(dir.join("TOY_graph_labels.txt")).unwrap();
        let err = load_tu_dataset(&dir, FeatureMode::ConstantOne, None).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        fs::remove_dir_all(&dir).unwrap();
    }

    fn dummy_graphs(n: usize) -> Vec<Graph> {
        (0..n)
            .map(|i| {
                let g = Graph::new(2, &[(0, 1)], DenseMatrix::zeros(2, 1), Some(i % 2)).unwrap();
                with_synthesized_features(g, FeatureMode::ConstantOne)
            })
            .collect()
    }

    #[test]
    fn split_sizes_and_determinism() {
        let graphs = dummy_graphs(1000);
        let (a, b, c) = split_dataset(&graphs, 90, 8, 2, 7).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (900, 80, 20));

        let graphs = dummy_graphs(300);
        let (a, b, c) = split_dataset(&graphs, 50, 30, 20, 7).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (150, 90, 60));

        let (a2, ..) = split_dataset(&graphs, 50, 30, 20, 7).unwrap();
        for (x, y) in a.iter().zip(&a2) {
            assert_eq!(x.label(), y.label());
            assert_eq!(x.edges(), y.edges());
        }

        assert!(split_dataset(&graphs, 50, 30, 21, 7).is_err());
        assert!(split_dataset(&graphs, 100, 0, 0, 7).is_err());
    }

    #[test]
    fn dataset_roundtrip() {
        let spec = SyntheticSpec {
            graphs_per_class: 3,
            ..Default::default()
        };
        let graphs = gen_synthetic(&spec, 5).unwrap();
        let path = std::env::temp_dir().join(format!("ds_{}.json", std::process::id()));
        save_dataset(&path, &graphs, FeatureMode::DegreeBuckets).unwrap();
        let (loaded, mode) = load_dataset(&path).unwrap();
        assert_eq!(mode, FeatureMode::DegreeBuckets);
        assert_eq!(loaded.len(), graphs.len());
        for (a, b) in graphs.iter().zip(&loaded) {
            assert_eq!(a.edges(), b.edges());
            assert_eq!(a.label(), b.label());
            assert_eq!(a.features(), b.features());
        }
        fs::remove_file(&path).unwrap();
    }
}
