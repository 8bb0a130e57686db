//! Sparse symmetric matrices, banded LDLᵀ factorization and eigensolvers
//! for the generalized problems K x = λ M x with diagonal M.

mod banded;
mod eigen;
pub mod tridiag;

pub use banded::{BandLdlt, BandedSym, Ordering};
pub use eigen::{
    count_below, dense_lowest, fix_sign, ground_state, lowest_eigenpairs, EigenOptions, GroundState, SolverStats,
};

/// Accumulates symmetric entries; `build` sums duplicates in insertion order,
/// so the (i, j) and (j, i) entries come out bitwise equal.
#[derive(Debug, Clone)]
pub struct SymBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.entries.push((i, i, v));
    }

    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.entries.push((i, i, v));
        } else {
            self.entries.push((i, j, v));
            self.entries.push((j, i, v));
        }
    }

    /// Adds the form c·(x_i − x_j)².
    pub fn add_edge(&mut self, i: usize, j: usize, c: f64) {
        self.add_diag(i, c);
        self.add_diag(j, c);
        self.add_sym(i, j, -c);
    }

    pub fn build(mut self) -> SymSparse {
        self.entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparse { n: self.n, row_ptr, col, val }
    }
}

/// Symmetric matrix in CSR form with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparse {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl SymSparse {
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// xᵀ K y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ky = self.apply(y);
        x.iter().zip(&ky).map(|(a, b)| a * b).sum()
    }

    /// max |K_ij − K_ji|.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Entries as (row, col, value), row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }
}

/// Σ m_i x_i y_i.
pub fn m_dot(m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    m.iter().zip(x).zip(y).map(|((a, b), c)| a * b * c).sum()
}

pub fn m_norm(m: &[f64], x: &[f64]) -> f64 {
    m_dot(m, x, x).sqrt()
}
