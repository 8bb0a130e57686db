use crate::error::{Error, Result};

use super::SymSparse;

/// A permutation placing natural indices at band positions.
#[derive(Debug, Clone)]
pub struct Ordering {
    /// pos[natural] = band position.
    pub pos: Vec<usize>,
    /// nat[position] = natural index.
    pub nat: Vec<usize>,
}

impl Ordering {
    pub fn identity(n: usize) -> Self {
        Self { pos: (0..n).collect(), nat: (0..n).collect() }
    }

    pub fn from_positions(pos: Vec<usize>) -> Self {
        let mut nat = vec![0; pos.len()];
        for (i, &p) in pos.iter().enumerate() {
            nat[p] = i;
        }
        Self { pos, nat }
    }

    pub fn bandwidth(&self, k: &SymSparse) -> usize {
        k.triplets()
            .map(|(i, j, _)| self.pos[i].abs_diff(self.pos[j]))
            .max()
            .unwrap_or(0)
    }

    pub fn to_band(&self, x: &[f64]) -> Vec<f64> {
        self.nat.iter().map(|&i| x[i]).collect()
    }

    pub fn to_natural(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; y.len()];
        for (p, &i) in self.nat.iter().enumerate() {
            x[i] = y[p];
        }
        x
    }
}

/// Lower band of a symmetric matrix in band positions; row i holds
/// entries (i, i−bw ..= i) at offsets 0 ..= bw.
#[derive(Debug, Clone)]
pub struct BandedSym {
    pub n: usize,
    pub bw: usize,
    pub data: Vec<f64>,
}

impl BandedSym {
    /// Band form of K − shift·diag(m) under `ord`.
    pub fn from_sparse(k: &SymSparse, m: &[f64], shift: f64, ord: &Ordering) -> Self {
        let n = k.n;
        let bw = ord.bandwidth(k);
        let mut data = vec![0.0; n * (bw + 1)];
        for (i, j, v) in k.triplets() {
            let (pi, pj) = (ord.pos[i], ord.pos[j]);
            if pj <= pi {
                data[pi * (bw + 1) + bw - (pi - pj)] += v;
            }
        }
        for (i, mi) in m.iter().enumerate() {
            let p = ord.pos[i];
            data[p * (bw + 1) + bw] -= shift * mi;
        }
        Self { n, bw, data }
    }

    /// LDLᵀ without pivoting. Zero pivots are reported as failures;
    /// negative pivots are allowed and counted (Sylvester inertia).
    pub fn ldlt(mut self) -> Result<BandLdlt> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut d = vec![0.0; n];
        let mut tmp = vec![0.0; w];
        let a = &mut self.data;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            // tmp[j - lo] = L_ij D_j
            for j in lo..i {
                let jlo = lo.max(j.saturating_sub(bw));
                let mut s = a[i * w + bw - (i - j)];
                let rj = j * w + bw - j;
                for k in jlo..j {
                    s -= tmp[k - lo] * a[rj + k];
                }
                tmp[j - lo] = s;
                a[i * w + bw - (i - j)] = s / d[j];
            }
            let mut di = a[i * w + bw];
            for j in lo..i {
                di -= tmp[j - lo] * a[i * w + bw - (i - j)];
            }
            if !(di.abs() > 0.0) || !di.is_finite() {
                return Err(Error::Factorization(format!("zero or invalid pivot at row {i}")));
            }
            d[i] = di;
        }
        let negative = d.iter().filter(|&&x| x < 0.0).count();
        Ok(BandLdlt { n, bw, l: self.data, d, negative })
    }
}

/// Banded LDLᵀ factors (unit lower L stored in the band, D separately).
#[derive(Debug, Clone)]
pub struct BandLdlt {
    pub n: usize,
    pub bw: usize,
    l: Vec<f64>,
    pub d: Vec<f64>,
    /// Number of negative pivots = eigenvalues below the shift.
    pub negative: usize,
}

impl BandLdlt {
    /// Solve in place (band positions).
    pub fn solve(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = i * w + bw - i;
            let mut s = x[i];
            for j in lo..i {
                s -= self.l[row + j] * x[j];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            let lo = i.saturating_sub(bw);
            let row = i * w + bw - i;
            for j in lo..i {
                x[j] -= self.l[row + j] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymBuilder;

    fn laplacian(n: usize) -> SymSparse {
        let mut b = SymBuilder::new(n);
        for i in 0..n {
            b.add_diag(i, 2.0);
            if i + 1 < n {
                b.add_sym(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn solve_matches_matvec() {
        let k = laplacian(50);
        let ord = Ordering::identity(50);
        let f = BandedSym::from_sparse(&k, &vec![1.0; 50], 0.0, &ord).ldlt().unwrap();
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = k.apply(&x);
        f.solve(&mut b);
        for (a, c) in b.iter().zip(&x) {
            assert!((a - c).abs() < 1e-11);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues() {
        let n = 40;
        let k = laplacian(n);
        let ord = Ordering::identity(n);
        // eigenvalues 2 − 2cos(jπ/(n+1))
        let shift = 0.9;
        let expected = (1..=n)
            .filter(|&j| 2.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos() < shift)
            .count();
        let f = BandedSym::from_sparse(&k, &vec![1.0; n], shift, &ord).ldlt().unwrap();
        assert_eq!(f.negative, expected);
    }
}
