//! Minimal reverse-mode tape over dense matrices.
//!
//! Covers exactly the operations the GCN classifier and the policy heads
//! need: matrix products, ReLU, column-wise max pooling, row gather/concat,
//! and the two fused loss heads (cross-entropy from logits, log-probability
//! of one entry of a masked softmax). Values are computed eagerly at node
//! creation; `backward` walks the tape once in reverse.

use crate::numeric::matrix::DenseMatrix;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    /// 1 x cols output; per-column argmax row recorded at forward time,
    /// lowest row index on ties.
    MaxPoolRows(Var, Vec<usize>),
    /// Rows of the source selected in order; backward scatter-adds.
    GatherRows(Var, Vec<usize>),
    ConcatCols(Var, Var),
    ConcatRows(Var, Var),
    /// Tile a 1 x c row `m` times; backward sums over rows.
    RepeatRows(Var),
    /// Scalar -log softmax(logits)[label]; softmax cached from forward.
    CrossEntropyLogits {
        logits: Var,
        label: usize,
        probs: Vec<f64>,
    },
    /// Scalar log p[index] of a masked softmax over flattened scores.
    LogProbMaskedSoftmax {
        scores: Var,
        mask: Vec<bool>,
        index: usize,
        probs: Vec<f64>,
    },
    /// Sum of c_i * scalar_i; every input must be 1 x 1.
    WeightedSum(Vec<(Var, f64)>),
}

struct Node {
    value: DenseMatrix,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    fn push(&mut self, value: DenseMatrix, op: Op) -> Var {
        debug_assert!(value.all_finite(), "tape produced a non-finite value");
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &DenseMatrix {
        &self.nodes[v.0].value
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        assert_eq!((m.rows(), m.cols()), (1, 1), "expected a scalar node");
        m.get(0, 0)
    }

    pub fn leaf(&mut self, value: DenseMatrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul(self.value(b));
        self.push(value, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).add(self.value(b));
        self.push(value, Op::Add(a, b))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).scale(c);
        self.push(value, Op::Scale(a, c))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let src = self.value(a);
        let mut value = DenseMatrix::zeros(src.rows(), src.cols());
        for (d, s) in value.as_mut_slice().iter_mut().zip(src.as_slice()) {
            *d = s.max(0.0);
        }
        self.push(value, Op::Relu(a))
    }

    /// Column-wise max over rows, 1 x cols. Ties go to the lowest row index.
    pub fn max_pool_rows(&mut self, a: Var) -> Var {
        let src = self.value(a);
        assert!(src.rows() > 0, "max pool over an empty matrix");
        let mut argmax = vec![0usize; src.cols()];
        let mut value = DenseMatrix::zeros(1, src.cols());
        for (c, slot) in argmax.iter_mut().enumerate() {
            let mut best = src.get(0, c);
            let mut best_r = 0;
            for r in 1..src.rows() {
                let v = src.get(r, c);
                if v > best {
                    best = v;
                    best_r = r;
                }
            }
            *slot = best_r;
            value.set(0, c, best);
        }
        self.push(value, Op::MaxPoolRows(a, argmax))
    }

    pub fn gather_rows(&mut self, a: Var, rows: &[usize]) -> Var {
        let src = self.value(a);
        let mut value = DenseMatrix::zeros(rows.len(), src.cols());
        for (out_r, &src_r) in rows.iter().enumerate() {
            for c in 0..src.cols() {
                value.set(out_r, c, src.get(src_r, c));
            }
        }
        self.push(value, Op::GatherRows(a, rows.to_vec()))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let (ma, mb) = (self.value(a), self.value(b));
        assert_eq!(ma.rows(), mb.rows());
        let mut value = DenseMatrix::zeros(ma.rows(), ma.cols() + mb.cols());
        for r in 0..ma.rows() {
            for c in 0..ma.cols() {
                value.set(r, c, ma.get(r, c));
            }
            for c in 0..mb.cols() {
                value.set(r, ma.cols() + c, mb.get(r, c));
            }
        }
        self.push(value, Op::ConcatCols(a, b))
    }

    pub fn concat_rows(&mut self, a: Var, b: Var) -> Var {
        let (ma, mb) = (self.value(a), self.value(b));
        assert_eq!(ma.cols(), mb.cols());
        let mut value = DenseMatrix::zeros(ma.rows() + mb.rows(), ma.cols());
        for r in 0..ma.rows() {
            for c in 0..ma.cols() {
                value.set(r, c, ma.get(r, c));
            }
        }
        for r in 0..mb.rows() {
            for c in 0..mb.cols() {
                value.set(ma.rows() + r, c, mb.get(r, c));
            }
        }
        self.push(value, Op::ConcatRows(a, b))
    }

    pub fn repeat_rows(&mut self, a: Var, times: usize) -> Var {
        let src = self.value(a);
        assert_eq!(src.rows(), 1, "repeat_rows expects a 1 x c row");
        let mut value = DenseMatrix::zeros(times, src.cols());
        for r in 0..times {
            for c in 0..src.cols() {
                value.set(r, c, src.get(0, c));
            }
        }
        self.push(value, Op::RepeatRows(a))
    }

    /// Fused softmax + cross-entropy on a 1 x C logits row.
    pub fn cross_entropy_from_logits(&mut self, logits: Var, label: usize) -> Var {
        let row = self.value(logits);
        assert_eq!(row.rows(), 1, "logits must be a 1 x C row");
        assert!(label < row.cols(), "label out of range");
        let probs = stable_softmax(row.row(0));
        let loss = -probs[label].max(crate::numeric::PROB_FLOOR).ln();
        let value = DenseMatrix::from_vec(1, 1, vec![loss]).unwrap();
        self.push(
            value,
            Op::CrossEntropyLogits {
                logits,
                label,
                probs,
            },
        )
    }

    /// log p[index] where p is the softmax of `scores` restricted to `mask`.
    /// Masked entries get probability exactly zero and no gradient.
    pub fn log_prob_masked_softmax(&mut self, scores: Var, mask: &[bool], index: usize) -> Var {
        let m = self.value(scores);
        let flat: Vec<f64> = m.as_slice().to_vec();
        assert_eq!(flat.len(), mask.len(), "mask length mismatch");
        assert!(mask[index], "sampled index is masked out");
        let probs = masked_softmax(&flat, mask);
        let logp = probs[index].max(crate::numeric::PROB_FLOOR).ln();
        let value = DenseMatrix::from_vec(1, 1, vec![logp]).unwrap();
        self.push(
            value,
            Op::LogProbMaskedSoftmax {
                scores,
                mask: mask.to_vec(),
                index,
                probs,
            },
        )
    }

    pub fn weighted_sum(&mut self, terms: &[(Var, f64)]) -> Var {
        let mut total = 0.0;
        for &(v, c) in terms {
            total += c * self.scalar(v);
        }
        let value = DenseMatrix::from_vec(1, 1, vec![total]).unwrap();
        self.push(value, Op::WeightedSum(terms.to_vec()))
    }

    /// Gradient of the scalar `root` with respect to every node.
    /// Nodes the root does not depend on get a `None` entry.
    pub fn backward(&self, root: Var) -> Gradients {
        assert_eq!(
            (self.value(root).rows(), self.value(root).cols()),
            (1, 1),
            "backward root must be scalar"
        );
        let mut grads: Vec<Option<DenseMatrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap());

        for id in (0..=root.0).rev() {
            let g = match grads[id].take() {
                Some(g) => g,
                None => continue,
            };
            self.accumulate(id, &g, &mut grads);
            grads[id] = Some(g);
        }
        Gradients { grads }
    }

    fn accumulate(&self, id: usize, g: &DenseMatrix, grads: &mut [Option<DenseMatrix>]) {
        let node = &self.nodes[id];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let ga = g.matmul(&self.value(*b).transpose());
                let gb = self.value(*a).transpose().matmul(g);
                add_grad(grads, *a, ga, self);
                add_grad(grads, *b, gb, self);
            }
            Op::Add(a, b) => {
                add_grad(grads, *a, g.clone(), self);
                add_grad(grads, *b, g.clone(), self);
            }
            Op::Scale(a, c) => {
                add_grad(grads, *a, g.scale(*c), self);
            }
            Op::Relu(a) => {
                let src = self.value(*a);
                let mut ga = DenseMatrix::zeros(src.rows(), src.cols());
                for i in 0..src.as_slice().len() {
                    if src.as_slice()[i] > 0.0 {
                        ga.as_mut_slice()[i] = g.as_slice()[i];
                    }
                }
                add_grad(grads, *a, ga, self);
            }
            Op::MaxPoolRows(a, argmax) => {
                let src = self.value(*a);
                let mut ga = DenseMatrix::zeros(src.rows(), src.cols());
                for (c, &r) in argmax.iter().enumerate() {
                    ga.add_at(r, c, g.get(0, c));
                }
                add_grad(grads, *a, ga, self);
            }
            Op::GatherRows(a, rows) => {
                let src = self.value(*a);
                let mut ga = DenseMatrix::zeros(src.rows(), src.cols());
                for (out_r, &src_r) in rows.iter().enumerate() {
                    for c in 0..src.cols() {
                        ga.add_at(src_r, c, g.get(out_r, c));
                    }
                }
                add_grad(grads, *a, ga, self);
            }
            Op::ConcatCols(a, b) => {
                let (ma, mb) = (self.value(*a), self.value(*b));
                let mut ga = DenseMatrix::zeros(ma.rows(), ma.cols());
                let mut gb = DenseMatrix::zeros(mb.rows(), mb.cols());
                for r in 0..ma.rows() {
                    for c in 0..ma.cols() {
                        ga.set(r, c, g.get(r, c));
                    }
                    for c in 0..mb.cols() {
                        gb.set(r, c, g.get(r, ma.cols() + c));
                    }
                }
                add_grad(grads, *a, ga, self);
                add_grad(grads, *b, gb, self);
            }
            Op::ConcatRows(a, b) => {
                let (ma, mb) = (self.value(*a), self.value(*b));
                let mut ga = DenseMatrix::zeros(ma.rows(), ma.cols());
                let mut gb = DenseMatrix::zeros(mb.rows(), mb.cols());
                for r in 0..ma.rows() {
                    for c in 0..ma.cols() {
                        ga.set(r, c, g.get(r, c));
                    }
                }
                for r in 0..mb.rows() {
                    for c in 0..mb.cols() {
                        gb.set(r, c, g.get(ma.rows() + r, c));
                    }
                }
                add_grad(grads, *a, ga, self);
                add_grad(grads, *b, gb, self);
            }
            Op::RepeatRows(a) => {
                let src = self.value(*a);
                let mut ga = DenseMatrix::zeros(1, src.cols());
                for r in 0..g.rows() {
                    for c in 0..g.cols() {
                        ga.add_at(0, c, g.get(r, c));
                    }
                }
                add_grad(grads, *a, ga, self);
            }
            Op::CrossEntropyLogits { logits, label, probs } => {
                let up = g.get(0, 0);
                let mut gl = DenseMatrix::zeros(1, probs.len());
                for (c, p) in probs.iter().enumerate() {
                    let delta = if c == *label { 1.0 } else { 0.0 };
                    gl.set(0, c, up * (p - delta));
                }
                add_grad(grads, *logits, gl, self);
            }
            Op::LogProbMaskedSoftmax {
                scores,
                mask,
                index,
                probs,
            } => {
                let up = g.get(0, 0);
                let src = self.value(*scores);
                let mut gs = DenseMatrix::zeros(src.rows(), src.cols());
                for (i, (&masked_in, p)) in mask.iter().zip(probs).enumerate() {
                    if !masked_in {
                        continue;
                    }
                    let delta = if i == *index { 1.0 } else { 0.0 };
                    gs.as_mut_slice()[i] = up * (delta - p);
                }
                add_grad(grads, *scores, gs, self);
            }
            Op::WeightedSum(terms) => {
                let up = g.get(0, 0);
                for &(v, c) in terms {
                    let gv = DenseMatrix::from_vec(1, 1, vec![up * c]).unwrap();
                    add_grad(grads, v, gv, self);
                }
            }
        }
    }
}

fn add_grad(grads: &mut [Option<DenseMatrix>], v: Var, g: DenseMatrix, _tape: &Tape) {
    match &mut grads[v.0] {
        Some(existing) => *existing = existing.add(&g),
        slot @ None => *slot = Some(g),
    }
}

/// Result of a backward pass.
pub struct Gradients {
    grads: Vec<Option<DenseMatrix>>,
}

impl Gradients {
    /// Gradient of the root with respect to `v`; zeros if the root does not
    /// depend on it.
    pub fn get(&self, v: Var, tape: &Tape) -> DenseMatrix {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => {
                let m = tape.value(v);
                DenseMatrix::zeros(m.rows(), m.cols())
            }
        }
    }
}

fn stable_softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax restricted to unmasked entries; masked entries get exactly 0.
pub fn masked_softmax(scores: &[f64], mask: &[bool]) -> Vec<f64> {
    assert_eq!(scores.len(), mask.len());
    let max = scores
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(s, _)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        max.is_finite(),
        "masked_softmax needs at least one unmasked entry"
    );
    let mut out = vec![0.0; scores.len()];
    let mut sum = 0.0;
    for i in 0..scores.len() {
        if mask[i] {
            let e = (scores[i] - max).exp();
            out[i] = e;
            sum += e;
        }
    }
    for v in &mut out {
        *v /= sum;
    }
    out
}
