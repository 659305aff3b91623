//! Laplacian spectra, the closed-form first-order eigenvalue shift of a
//! rewiring, and the connectivity measures built on them.

use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph, RewiringAction};
use crate::numeric::{sym_eig, DenseMatrix, EigenDecomposition};

/// Eigenvalues below this are treated as zero (one zero per component).
pub const ZERO_EIG_TOL: f64 = 1e-8;

/// Spectral summary of one graph plus the predicted per-eigenvalue shifts of
/// a candidate rewiring.
#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
    pub algebraic_connectivity: f64,
    pub effective_resistance: Option<f64>,
    pub predicted_shifts: Vec<f64>,
}

/// Combinatorial Laplacian L = D - A.
pub fn laplacian(g: &Graph) -> DenseMatrix {
    let n = g.num_nodes();
    let mut l = DenseMatrix::zeros(n, n);
    for v in 0..n {
        l.set(v, v, g.degree(v) as f64);
    }
    for &(u, v) in g.edges() {
        l.set(u, v, -1.0);
        l.set(v, u, -1.0);
    }
    l
}

/// First-order eigenvalue updates for a symmetric perturbation:
/// delta_i = x_i^T Delta x_i.
pub fn first_order_shift(decomp: &EigenDecomposition, delta: &DenseMatrix) -> Result<Vec<f64>> {
    let n = decomp.dim();
    if delta.rows() != n || delta.cols() != n {
        return Err(Error::invalid(format!(
            "perturbation is {}x{}, expected {n}x{n}",
            delta.rows(),
            delta.cols()
        )));
    }
    let x = &decomp.eigenvectors;
    let mut shifts = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = 0.0;
        for r in 0..n {
            let xr = x.get(r, i);
            if xr == 0.0 {
                continue;
            }
            for c in 0..n {
                let d = delta.get(r, c);
                if d != 0.0 {
                    s += xr * d * x.get(c, i);
                }
            }
        }
        shifts.push(s);
    }
    Ok(shifts)
}

/// Laplacian change of one rewiring: +1 at (fir,sec) and (sec,fir), -1 at
/// (fir,thi) and (thi,fir), -1 at (sec,sec), +1 at (thi,thi). Trace is zero.
pub fn rewiring_delta_matrix(a: &RewiringAction, n: usize) -> Result<DenseMatrix> {
    if a.fir >= n || a.sec >= n || a.thi >= n {
        return Err(Error::invalid(format!(
            "action ({},{},{}) out of range for dimension {n}",
            a.fir, a.sec, a.thi
        )));
    }
    let mut d = DenseMatrix::zeros(n, n);
    d.set(a.fir, a.sec, 1.0);
    d.set(a.sec, a.fir, 1.0);
    d.set(a.fir, a.thi, -1.0);
    d.set(a.thi, a.fir, -1.0);
    d.set(a.sec, a.sec, -1.0);
    d.set(a.thi, a.thi, 1.0);
    Ok(d)
}

/// Closed-form first-order shift of every Laplacian eigenvalue under one
/// rewiring: (2 x_i[fir] - x_i[thi] - x_i[sec]) * (x_i[sec] - x_i[thi]).
pub fn rewiring_eig_delta(decomp: &EigenDecomposition, a: &RewiringAction) -> Result<Vec<f64>> {
    let n = decomp.dim();
    if a.fir >= n || a.sec >= n || a.thi >= n {
        return Err(Error::invalid(format!(
            "action ({},{},{}) out of range for dimension {n}",
            a.fir, a.sec, a.thi
        )));
    }
    let x = &decomp.eigenvectors;
    let mut shifts = Vec::with_capacity(n);
    for i in 0..n {
        let xf = x.get(a.fir, i);
        let xs = x.get(a.sec, i);
        let xt = x.get(a.thi, i);
        shifts.push((2.0 * xf - xt - xs) * (xs - xt));
    }
    Ok(shifts)
}

/// Second-smallest Laplacian eigenvalue; zero exactly when disconnected.
pub fn algebraic_connectivity(g: &Graph) -> Result<f64> {
    if g.num_nodes() < 2 {
        return Err(Error::invalid(
            "algebraic connectivity needs at least 2 nodes",
        ));
    }
    let decomp = sym_eig(&laplacian(g))?;
    Ok(decomp.eigenvalues[1])
}

/// Effective graph resistance |V| * sum_{i>=2} 1/lambda_i, the sum of
/// pairwise effective resistances. Infinite (a domain error) when the graph
/// is disconnected.
pub fn effective_graph_resistance(g: &Graph) -> Result<f64> {
    let (components, _) = connected_components(g);
    if components != 1 {
        return Err(Error::Domain(
            "effective resistance of a disconnected graph is infinite".into(),
        ));
    }
    let decomp = sym_eig(&laplacian(g))?;
    let sum: f64 = decomp.eigenvalues[1..].iter().map(|l| 1.0 / l).sum();
    Ok(g.num_nodes() as f64 * sum)
}

/// Per-index relative eigenvalue change |l_i - l'_i| / l_i between the exact
/// spectra of two same-size graphs. Indices whose clean eigenvalue is below
/// the zero tolerance are reported as `None`.
pub fn eigenvalue_change_ratio(g_orig: &Graph, g_att: &Graph) -> Result<Vec<Option<f64>>> {
    if g_orig.num_nodes() != g_att.num_nodes() {
        return Err(Error::invalid("graphs must have the same node count"));
    }
    let d0 = sym_eig(&laplacian(g_orig))?;
    let d1 = sym_eig(&laplacian(g_att))?;
    Ok(d0
        .eigenvalues
        .iter()
        .zip(&d1.eigenvalues)
        .map(|(&l0, &l1)| {
            if l0 > ZERO_EIG_TOL {
                Some((l0 - l1).abs() / l0)
            } else {
                None
            }
        })
        .collect())
}

/// Full spectral report for a graph, with predicted shifts for one action.
pub fn spectral_report(g: &Graph, action: Option<&RewiringAction>) -> Result<SpectralReport> {
    let decomp = sym_eig(&laplacian(g))?;
    let predicted_shifts = match action {
        Some(a) => rewiring_eig_delta(&decomp, a)?,
        None => vec![0.0; decomp.dim()],
    };
    let algebraic_connectivity = if g.num_nodes() >= 2 {
        decomp.eigenvalues[1]
    } else {
        0.0
    };
    let (components, _) = connected_components(g);
    let effective_resistance = if components == 1 && g.num_nodes() >= 2 {
        let sum: f64 = decomp.eigenvalues[1..].iter().map(|l| 1.0 / l).sum();
        Some(g.num_nodes() as f64 * sum)
    } else {
        None
    };
    Ok(SpectralReport {
        eigenvalues: decomp.eigenvalues,
        eigenvectors: decomp.eigenvectors,
        algebraic_connectivity,
        effective_resistance,
        predicted_shifts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_rewiring, rewiring_candidates};
    use crate::numeric::DenseMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new(n, edges, DenseMatrix::zeros(n, 1), None).unwrap()
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        unlabeled(n, &edges)
    }

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        unlabeled(n, &edges)
    }

    /// Random connected graph: random spanning tree plus extra edges.
    pub(crate) fn random_connected(n: usize, extra_prob: f64, rng: &mut ChaCha8Rng) -> Graph {
        let mut edges = Vec::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.push((u, v));
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if !edges.contains(&(u, v)) && rng.gen_bool(extra_prob) {
                    edges.push((u, v));
                }
            }
        }
        unlabeled(n, &edges)
    }

    #[test]
    fn laplacian_examples() {
        let l = laplacian(&path(3));
        let expect = DenseMatrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(l, expect);

        assert_eq!(laplacian(&unlabeled(3, &[])), DenseMatrix::zeros(3, 3));

        let k3 = laplacian(&complete(3));
        for i in 0..3 {
            let row_sum: f64 = (0..3).map(|j| k3.get(i, j)).sum();
            assert_eq!(row_sum, 0.0);
            assert_eq!(k3.get(i, i), 2.0);
        }
    }

    #[test]
    fn delta_matrix_entries_and_trace() {
        let a = RewiringAction { fir: 0, sec: 1, thi: 2 };
        let d = rewiring_delta_matrix(&a, 3).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(d.get(1, 0), 1.0);
        assert_eq!(d.get(0, 2), -1.0);
        assert_eq!(d.get(2, 0), -1.0);
        assert_eq!(d.get(1, 1), -1.0);
        assert_eq!(d.get(2, 2), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
        assert_eq!(d.get(1, 2), 0.0);
        assert_eq!(d.get(2, 1), 0.0);
        assert_eq!(d.trace(), 0.0);
        assert!(rewiring_delta_matrix(&a, 2).is_err());
    }

    #[test]
    fn delta_matrix_matches_laplacian_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let g = random_connected(rng.gen_range(4..10), 0.25, &mut rng);
            for a in rewiring_candidates(&g) {
                let g2 = apply_rewiring(&g, &a).unwrap();
                let lhs = laplacian(&g).add(&rewiring_delta_matrix(&a, g.num_nodes()).unwrap());
                assert_eq!(lhs, laplacian(&g2));
            }
        }
    }

    #[test]
    fn first_order_shift_trivial_cases() {
        let g = path(4);
        let decomp = sym_eig(&laplacian(&g)).unwrap();
        let zero = DenseMatrix::zeros(4, 4);
        assert!(first_order_shift(&decomp, &zero)
            .unwrap()
            .iter()
            .all(|s| *s == 0.0));

        let ci = DenseMatrix::identity(4).scale(0.7);
        for s in first_order_shift(&decomp, &ci).unwrap() {
            assert!((s - 0.7).abs() < 1e-10);
        }

        assert!(first_order_shift(&decomp, &DenseMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn closed_form_matches_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let g = random_connected(6, 0.3, &mut rng);
        let decomp = sym_eig(&laplacian(&g)).unwrap();
        for a in rewiring_candidates(&g) {
            let closed = rewiring_eig_delta(&decomp, &a).unwrap();
            let delta = rewiring_delta_matrix(&a, 6).unwrap();
            let quad = first_order_shift(&decomp, &delta).unwrap();
            for (c, q) in closed.iter().zip(&quad) {
                assert!((c - q).abs() < 1e-10);
            }
            // constant eigenvector of a connected graph feels nothing
            assert!(closed[0].abs() < 1e-10);
            // shifts sum to trace(DeltaL) = 0
            let sum: f64 = closed.iter().sum();
            assert!(sum.abs() < 1e-9);
        }
    }

    #[test]
    fn connectivity_examples() {
        for n in 2..=8 {
            let l = algebraic_connectivity(&complete(n)).unwrap();
            assert!((l - n as f64).abs() < 1e-8, "K_{n}: {l}");
        }
        assert!((algebraic_connectivity(&path(3)).unwrap() - 1.0).abs() < 1e-9);
        let disconnected = unlabeled(4, &[(0, 1), (2, 3)]);
        assert!(algebraic_connectivity(&disconnected).unwrap().abs() < ZERO_EIG_TOL);
        assert!(algebraic_connectivity(&unlabeled(1, &[])).is_err());
    }

    #[test]
    fn zero_eigenvalue_multiplicity_counts_components() {
        let g = unlabeled(6, &[(0, 1), (1, 2), (3, 4)]);
        let decomp = sym_eig(&laplacian(&g)).unwrap();
        let zeros = decomp
            .eigenvalues
            .iter()
            .filter(|l| l.abs() < ZERO_EIG_TOL)
            .count();
        assert_eq!(zeros, connected_components(&g).0);
        assert!(decomp.eigenvalues[0].abs() < ZERO_EIG_TOL);
    }

    /// Pairwise effective resistance by solving L y = e_u - e_v with one node
    /// grounded (plain Gaussian elimination); independent of the eigensolver.
    pub(crate) fn resistance_oracle(g: &Graph) -> f64 {
        let n = g.num_nodes();
        let l = laplacian(g);
        let mut total = 0.0;
        for u in 0..n {
            for v in (u + 1)..n {
                // grounded system: drop last row/col
                let m = n - 1;
                let mut a = vec![vec![0.0; m + 1]; m];
                for r in 0..m {
                    for c in 0..m {
                        a[r][c] = l.get(r, c);
                    }
                }
                if u < m {
                    a[u][m] += 1.0;
                }
                if v < m {
                    a[v][m] -= 1.0;
                }
                // forward elimination with partial pivoting
                for col in 0..m {
                    let piv = (col..m)
                        .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                        .unwrap();
                    a.swap(col, piv);
                    let p = a[col][col];
                    assert!(p.abs() > 1e-12, "singular grounded Laplacian");
                    for r in (col + 1)..m {
                        let f = a[r][col] / p;
                        for c in col..=m {
                            a[r][c] -= f * a[col][c];
                        }
                    }
                }
                let mut y = vec![0.0; m];
                for r in (0..m).rev() {
                    let mut s = a[r][m];
                    for c in (r + 1)..m {
                        s -= a[r][c] * y[c];
                    }
                    y[r] = s / a[r][r];
                }
                let yu = if u < m { y[u] } else { 0.0 };
                let yv = if v < m { y[v] } else { 0.0 };
                total += yu - yv;
            }
        }
        total
    }

    #[test]
    fn resistance_closed_forms_and_oracle() {
        assert!((effective_graph_resistance(&complete(4)).unwrap() - 3.0).abs() < 1e-8);
        assert!((effective_graph_resistance(&path(2)).unwrap() - 1.0).abs() < 1e-10);
        for n in 2..=8 {
            let kn = complete(n);
            let spectral = effective_graph_resistance(&kn).unwrap();
            assert!((spectral - (n as f64 - 1.0)).abs() < 1e-7);
            let oracle = resistance_oracle(&kn);
            assert!((spectral - oracle).abs() < 1e-6, "K_{n}: {spectral} vs {oracle}");
        }
        // a non-complete sanity case too
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = random_connected(7, 0.3, &mut rng);
        let spectral = effective_graph_resistance(&g).unwrap();
        let oracle = resistance_oracle(&g);
        assert!((spectral - oracle).abs() < 1e-6 * spectral.max(1.0));

        assert!(effective_graph_resistance(&unlabeled(4, &[(0, 1), (2, 3)])).is_err());
    }

    #[test]
    fn change_ratio_cases() {
        let p3 = path(3);
        let same = eigenvalue_change_ratio(&p3, &p3).unwrap();
        assert_eq!(same.len(), 3);
        assert!(same[0].is_none()); // zero eigenvalue skipped
        assert!(same[1..].iter().all(|r| r.unwrap() == 0.0));

        // rewiring a P3 yields another P3: isospectral
        let other = apply_rewiring(&p3, &RewiringAction { fir: 0, sec: 1, thi: 2 }).unwrap();
        let ratios = eigenvalue_change_ratio(&p3, &other).unwrap();
        for r in ratios.into_iter().flatten() {
            assert!(r < 1e-9);
        }

        // spot-check one index against a direct recomputation
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_connected(10, 0.2, &mut rng);
        let cands = rewiring_candidates(&g);
        let g2 = apply_rewiring(&g, &cands[0]).unwrap();
        let ratios = eigenvalue_change_ratio(&g, &g2).unwrap();
        let d0 = sym_eig(&laplacian(&g)).unwrap();
        let d1 = sym_eig(&laplacian(&g2)).unwrap();
        let expect = (d0.eigenvalues[2] - d1.eigenvalues[2]).abs() / d0.eigenvalues[2];
        assert!((ratios[2].unwrap() - expect).abs() < 1e-12);
        for r in ratios.into_iter().flatten() {
            assert!(r.is_finite() && r >= 0.0);
        }

        assert!(eigenvalue_change_ratio(&p3, &path(4)).is_err());
    }

    #[test]
    fn report_fields_consistent() {
        let g = path(5);
        let r = spectral_report(&g, None).unwrap();
        assert!(r.eigenvalues[0].abs() < ZERO_EIG_TOL);
        assert!((r.algebraic_connectivity - r.eigenvalues[1]).abs() < 1e-15);
        assert!(r.effective_resistance.is_some());
        let disconnected = unlabeled(4, &[(0, 1), (2, 3)]);
        let r2 = spectral_report(&disconnected, None).unwrap();
        assert!(r2.effective_resistance.is_none());
        let zeros = r2
            .eigenvalues
            .iter()
            .filter(|l| l.abs() < ZERO_EIG_TOL)
            .count();
        assert_eq!(zeros, 2);
    }
}
