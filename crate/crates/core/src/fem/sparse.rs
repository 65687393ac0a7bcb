use std::sync::Arc;

use crate::mesh::SimplicialMesh;

/// CSR sparsity pattern of the P1 vertex adjacency graph, plus the positions
/// of each cell's local matrix entries inside the value array.
#[derive(Debug)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    cell_slots: Vec<usize>,
    local_size: usize,
}

impl SparsityPattern {
    pub fn from_mesh(mesh: &SimplicialMesh) -> Self {
        let n = mesh.n_vertices();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for cell in mesh.cells() {
            for &a in cell {
                adj[a].extend_from_slice(cell);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in adj.iter_mut() {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let local_size = mesh.dim() + 1;
        let mut pattern = SparsityPattern {
            n,
            row_ptr,
            col_idx,
            cell_slots: Vec::with_capacity(mesh.n_cells() * local_size * local_size),
            local_size,
        };
        let mut slots = Vec::with_capacity(pattern.cell_slots.capacity());
        for cell in mesh.cells() {
            for &a in cell {
                for &b in cell {
                    slots.push(pattern.position(a, b).expect("cell pair in pattern"));
                }
            }
        }
        pattern.cell_slots = slots;
        pattern
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[s..e].binary_search(&col).ok().map(|k| s + k)
    }

    /// Value-array positions of the local `(d+1)×(d+1)` block of cell `c`,
    /// row-major in local vertex order.
    pub fn cell_slots(&self, c: usize) -> &[usize] {
        let l = self.local_size * self.local_size;
        &self.cell_slots[c * l..(c + 1) * l]
    }
}

/// Square sparse matrix sharing a [`SparsityPattern`].
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern
            .position(row, col)
            .map_or(0.0, |k| self.values[k])
    }

    pub fn add_at(&mut self, row: usize, col: usize, v: f64) {
        let k = self
            .pattern
            .position(row, col)
            .expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                acc += self.values[k] * x[p.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = &self.pattern;
        let mut acc = 0.0;
        for i in 0..self.n() {
            let mut row = 0.0;
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                row += self.values[k] * y[p.col_idx[k]];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let p = &self.pattern;
        (0..self.n())
            .map(|i| self.values[p.row_ptr[i]..p.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Largest `|A_ij - A_ji|` over the stored entries.
    pub fn asymmetry(&self) -> f64 {
        let p = &self.pattern;
        let mut worst: f64 = 0.0;
        for i in 0..self.n() {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[k];
                worst = worst.max((self.values[k] - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `self + other` on the same pattern.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert!(
            Arc::ptr_eq(&self.pattern, &other.pattern),
            "pattern mismatch"
        );
        CsrMatrix {
            pattern: self.pattern.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }
}
