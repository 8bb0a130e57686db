//! Symmetric tridiagonal eigenvalues by Sturm bisection, eigenvectors by
//! inverse iteration.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// off[i] couples i and i+1.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below x.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..self.n() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// j-th eigenvalue (0-based) to the limit of bisection.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        if j >= self.n() {
            return Err(Error::InvalidParameter(format!("index {j} out of range")));
        }
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-12 * (1.0 + lo.abs());
        hi += 1e-12 * (1.0 + hi.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unit eigenvector for an (accurate) eigenvalue λ.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.n();
        let scale = self.diag.iter().map(|d| d.abs()).fold(1.0, f64::max);
        let shift = lambda - 4.0 * f64::EPSILON * scale;
        // LU without pivoting of T − shift (Thomas).
        let mut x = vec![1.0; n];
        for _ in 0..4 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut b0 = self.diag[0] - shift;
            if b0 == 0.0 {
                b0 = f64::EPSILON * scale;
            }
            c[0] = if n > 1 { self.off[0] / b0 } else { 0.0 };
            d[0] = x[0] / b0;
            for i in 1..n {
                let mut den = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
                if den == 0.0 {
                    den = f64::EPSILON * scale;
                }
                c[i] = if i + 1 < n { self.off[i] / den } else { 0.0 };
                d[i] = (x[i] - self.off[i - 1] * d[i - 1]) / den;
            }
            let mut y = vec![0.0; n];
            y[n - 1] = d[n - 1];
            for i in (0..n - 1).rev() {
                y[i] = d[i] - c[i] * y[i + 1];
            }
            let nrm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            x = y.into_iter().map(|a| a / nrm).collect();
        }
        super::eigen::fix_sign(&mut x);
        x
    }
}
