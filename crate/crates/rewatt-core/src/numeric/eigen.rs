use crate::error::{Error, Result};
use crate::numeric::DenseMatrix;

/// Full eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted ascending; column `i` of `eigenvectors` pairs with
/// `eigenvalues[i]` and the columns are orthonormal.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

const SYMMETRY_TOL: f64 = 1e-10;
const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps annihilate each off-diagonal entry in turn until the off-diagonal
/// Frobenius norm drops below `1e-12` (or stops improving, which at f64
/// precision means we hit the numerical floor).
pub fn sym_eig(m: &DenseMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "sym_eig requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m.get(i, j) - m.get(j, i)).abs() > SYMMETRY_TOL {
                return Err(Error::invalid(format!(
                    "sym_eig requires a symmetric matrix; entry ({i},{j}) differs from ({j},{i})"
                )));
            }
        }
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: DenseMatrix::zeros(0, 0),
        });
    }

    // Work on the symmetrized copy so the tiny asymmetry we tolerate above
    // cannot bias the rotations.
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, 0.5 * (m.get(i, j) + m.get(j, i)));
        }
    }
    let mut v = DenseMatrix::identity(n);

    let mut prev_off = f64::INFINITY;
    for _sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off < OFF_DIAG_TOL || off >= prev_off {
            break;
        }
        prev_off = off;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // A <- R^T A R with R the (p,q)-plane rotation.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    // Sort ascending and permute eigenvector columns to match.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors.set(r, new_col, v.get(r, old_col));
        }
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let x = a.get(i, j);
                sum += x * x;
            }
        }
    }
    sum.sqrt()
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reconstruct X diag(lambda) X^T; used by the invariance tests.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let x = &self.eigenvectors;
        let mut out = DenseMatrix::zeros(n, n);
        for k in 0..n {
            let lk = self.eigenvalues[k];
            for i in 0..n {
                let xik = x.get(i, k);
                if xik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.add_at(i, j, lk * xik * x.get(j, k));
                }
            }
        }
        out
    }
}
