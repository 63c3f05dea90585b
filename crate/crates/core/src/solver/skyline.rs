//! Envelope LDL^T factorisation of a symmetric matrix after reverse Cuthill-McKee
//! reordering.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{IgaError, Result};

/// Reverse Cuthill-McKee ordering of the graph of `a`. Returns `perm` with
/// `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &root in &by_degree {
        if visited[root] {
            continue;
        }
        let start = peripheral(a, root, &degree);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral node of the component containing `root`, by repeated
/// breadth-first sweeps.
fn peripheral(a: &CsrMatrix, root: usize, degree: &[usize]) -> usize {
    let mut current = root;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(a, current);
        let max = *levels.values().max().unwrap_or(&0);
        if max <= depth && current != root {
            break;
        }
        depth = max;
        let far = levels
            .iter()
            .filter(|(_, &l)| l == max)
            .map(|(&v, _)| v)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(current);
        if far == current {
            break;
        }
        current = far;
    }
    current
}

fn bfs_levels(a: &CsrMatrix, root: usize) -> std::collections::BTreeMap<usize, usize> {
    let mut levels = std::collections::BTreeMap::new();
    levels.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let l = levels[&v];
        for &w in a.row(v).0 {
            if let std::collections::btree_map::Entry::Vacant(e) = levels.entry(w) {
                e.insert(l + 1);
                queue.push_back(w);
            }
        }
    }
    levels
}

/// `P A P^T = L D L^T` stored row-wise over the lower envelope.
#[derive(Debug, Clone)]
pub struct SkylineLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// Strict lower part of `L`, row `i` covering columns `first[i]..i`.
    lower: Vec<f64>,
    diag: Vec<f64>,
}

/// Factorisation outcome flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotReport {
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl SkylineLdl {
    /// Factors `a` in the ordering `perm` (`perm[new] = old`).
    ///
    /// With `spd_check`, the first non-positive pivot is reported as
    /// [`IgaError::NotPositiveDefinite`]; otherwise only numerically zero pivots
    /// fail. Reported dof indices are `labels[old]`.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>, spd_check: bool, labels: &[usize]) -> Result<(Self, PivotReport)> {
        let n = a.nrows();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a.row(perm[i]).0.iter().map(|&j| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        let scale = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        let mut report = PivotReport { min_pivot: f64::INFINITY, max_pivot: f64::NEG_INFINITY };
        for i in 0..n {
            let fi = first[i];
            // Scatter row i of A into the envelope row.
            let (cols, vals) = a.row(perm[i]);
            let mut aii = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn < i {
                    lower[start[i] + jn - fi] = v;
                } else if jn == i {
                    aii = v;
                }
            }
            // W[i][j] = A[i][j] - sum_k W[i][k] L[j][k], then L[i][j] = W[i][j] / D[j].
            let (done, rest) = lower.split_at_mut(start[i]);
            let row = &mut rest[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                if k0 < j {
                    let lj = &done[start[j] + k0 - fj..start[j] + j - fj];
                    let wi = &row[k0 - fi..j - fi];
                    let s: f64 = wi.iter().zip(lj).map(|(a, b)| a * b).sum();
                    row[j - fi] -= s;
                }
            }
            let mut d = aii;
            for j in fi..i {
                let w = row[j - fi];
                let l = w / diag[j];
                d -= w * l;
                row[j - fi] = l;
            }
            report.min_pivot = report.min_pivot.min(d);
            report.max_pivot = report.max_pivot.max(d);
            let dof = labels[perm[i]];
            if spd_check && !(d > 0.0) {
                return Err(IgaError::NotPositiveDefinite { dof, pivot: d });
            }
            if !(d.abs() > 1e-13 * scale) {
                return Err(IgaError::Singular { dof });
            }
            diag[i] = d;
        }
        Ok((SkylineLdl { perm, first, start, lower, diag }, report))
    }

    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            let s: f64 = l.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for (v, d) in y.iter_mut().zip(&self.diag) {
            *v /= d;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let l = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, &lv) in l.iter().enumerate() {
                y[fi + k] -= lv * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::zeros(n, n);
        for _ in 0..3 * n {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let v = rng.gen_range(-1.0..1.0);
            a[(i, j)] += v;
            a[(j, i)] += v;
        }
        for i in 0..n {
            let row: f64 = a.row(i).iter().map(|v: &f64| v.abs()).sum();
            a[(i, i)] = row + 1.0;
        }
        a
    }

    #[test]
    fn matches_dense_solve() {
        let a = random_sparse_spd(50, 5);
        let csr = CsrMatrix::from_dense(&a);
        let perm = reverse_cuthill_mckee(&csr);
        let labels: Vec<usize> = (0..50).collect();
        let (f, report) = SkylineLdl::factor(&csr, perm, true, &labels).unwrap();
        assert!(report.min_pivot > 0.0);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let oracle = a.clone().cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        let diff = (DVector::from_vec(x) - &oracle).norm() / oracle.norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_bandwidth() {
        // A path graph numbered in a scrambled order.
        let n = 40;
        let label: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(label[i], label[i])] = 4.0;
            if i + 1 < n {
                a[(label[i], label[i + 1])] = -1.0;
                a[(label[i + 1], label[i])] = -1.0;
            }
        }
        let csr = CsrMatrix::from_dense(&a);
        let perm = reverse_cuthill_mckee(&csr);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        let labels: Vec<usize> = (0..n).collect();
        let (f, _) = SkylineLdl::factor(&csr, perm, true, &labels).unwrap();
        assert_eq!(f.envelope_size(), n - 1);
    }

    #[test]
    fn indefinite_matrix_reports_pivot() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 3.0]);
        let csr = CsrMatrix::from_dense(&a);
        let labels = [10, 11, 12];
        match SkylineLdl::factor(&csr, vec![0, 1, 2], true, &labels) {
            Err(IgaError::NotPositiveDefinite { dof, pivot }) => {
                assert_eq!(dof, 11);
                assert_eq!(pivot, -1.0);
            }
            other => panic!("{other:?}"),
        }
        // Without the check the indefinite system still solves.
        let (f, report) = SkylineLdl::factor(&csr, vec![0, 1, 2], false, &labels).unwrap();
        assert_eq!(report.min_pivot, -1.0);
        assert_eq!(f.solve(&[2.0, 1.0, 3.0]), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let csr = CsrMatrix::from_dense(&a);
        assert!(matches!(
            SkylineLdl::factor(&csr, vec![0, 1], false, &[0, 1]),
            Err(IgaError::Singular { dof: 1 })
        ));
    }
}
