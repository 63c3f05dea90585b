use nalgebra::DMatrix;

/// Compressed sparse row matrix with a fixed pattern, filled by block scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Pattern of a dof-level matrix from node groups: every node of a group couples
    /// with every node of the same group, and each node carries `dim` components.
    pub fn from_node_groups<'a>(
        num_nodes: usize,
        dim: usize,
        groups: impl IntoIterator<Item = &'a [usize]>,
    ) -> Self {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for g in groups {
            for &a in g {
                adj[a].extend_from_slice(g);
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        let n = num_nodes * dim;
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz: usize = adj.iter().map(|r| r.len() * dim * dim).sum();
        let mut cols = Vec::with_capacity(nnz);
        for row in &adj {
            for _ in 0..dim {
                for &b in row {
                    cols.extend((0..dim).map(|c| b * dim + c));
                }
                row_ptr.push(cols.len());
            }
        }
        let vals = vec![0.0; cols.len()];
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    cols.push(j);
                    vals.push(a[(i, j)]);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    /// From per-row `(sorted columns, values)`.
    pub fn from_rows(n: usize, rows: Vec<(Vec<usize>, Vec<f64>)>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(|r| r.0.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for (c, v) in rows {
            debug_assert!(c.windows(2).all(|w| w[0] < w[1]));
            cols.extend(c);
            vals.extend(v);
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.vals[k])
    }

    /// Adds `k[(r, c)]` at `(dofs[r], dofs[c])`. Panics if an entry is outside the pattern.
    pub fn add_block(&mut self, dofs: &[usize], k: &DMatrix<f64>) {
        for (r, &i) in dofs.iter().enumerate() {
            let start = self.row_ptr[i];
            let row = &self.cols[start..self.row_ptr[i + 1]];
            for (c, &j) in dofs.iter().enumerate() {
                let pos = row.binary_search(&j).expect("entry outside sparsity pattern");
                self.vals[start + pos] += k[(r, c)];
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji|` over the stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                d[(i, j)] = a;
            }
        }
        d
    }
}
