//! The 1D Robin models across the boundary: the half-line operator, its
//! truncation to (0, T) with a Dirichlet end, and the curvature-weighted
//! version −(1−Bτ)⁻¹∂(1−Bτ)∂.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::tridiag::SymTridiagonal;

/// Ordered eigenvalues with optional sampled eigenfunctions.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum1D {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub grid: Vec<f64>,
    /// Quadrature weights of the inner product in which eigenvectors are orthonormal.
    pub inner_product: Vec<f64>,
}

/// −∂² on the half-line with u'(0) = −u(0).
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfLineModel;

impl HalfLineModel {
    pub const EIGENVALUE: f64 = -1.0;

    /// u₀(τ) = √2 e^{−τ}.
    pub fn ground(tau: f64) -> f64 {
        std::f64::consts::SQRT_2 * (-tau).exp()
    }

    pub fn ground_slope(tau: f64) -> f64 {
        -Self::ground(tau)
    }
}

pub fn halfline_modes() -> (f64, fn(f64) -> f64) {
    (HalfLineModel::EIGENVALUE, HalfLineModel::ground)
}

/// ℋ₀^T: −∂² on (0, T), u'(0) = −u(0), u(T) = 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntervalSpec {
    pub t: f64,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Lowest k eigenvalues of ℋ₀^T from the secular equations
/// tanh(ωT) = ω (negative mode) and tan(kT) = k (positive modes).
pub fn interval_spectrum_exact(spec: IntervalSpec, k: usize) -> Result<Spectrum1D> {
    let t = spec.t;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be ≥ 1".into()));
    }
    if !(t > 1.0) {
        return Err(Error::Bracketing(format!("T = {t} has no negative mode (needs T > 1)")));
    }
    // ω − tanh(ωT) is negative just above 0 and positive at 1.
    let omega = bisect(|w| w - (w * t).tanh(), 1e-12, 1.0)?;
    let mut eig = vec![-omega * omega];
    for j in 1..k {
        // x = kT solves T sin x − x cos x = 0 in ((j − ½)π, (j + ½)π).
        let jf = j as f64;
        let lo = (jf - 0.5) * std::f64::consts::PI;
        let hi = (jf + 0.5) * std::f64::consts::PI;
        let x = bisect(|x| t * x.sin() - x * x.cos(), lo, hi)?;
        eig.push((x / t).powi(2));
    }
    Ok(Spectrum1D { eigenvalues: eig, eigenvectors: None, grid: vec![], inner_product: vec![] })
}

/// Exact ground state of ℋ₀^T, L²-normalized: c·sinh(ω(T − τ)).
pub fn interval_ground_exact(spec: IntervalSpec) -> Result<(f64, impl Fn(f64) -> f64)> {
    let lam = interval_spectrum_exact(spec, 1)?.eigenvalues[0];
    let w = (-lam).sqrt();
    let t = spec.t;
    // ∫₀^T sinh²(ω(T−τ)) dτ = sinh(2ωT)/(4ω) − T/2
    let norm = ((2.0 * w * t).sinh() / (4.0 * w) - 0.5 * t).sqrt();
    Ok((lam, move |tau: f64| (w * (t - tau)).sinh() / norm))
}

/// ℋ_B^T with weight 1 − Bτ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedSpec {
    pub t: f64,
    pub b: f64,
    pub n_grid: usize,
}

impl WeightedSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 1.0) {
            return Err(Error::InvalidParameter(format!("T = {} must exceed 1", self.t)));
        }
        // weight 1 − Bτ stays in [1/2, 3/2]
        if !(self.b.abs() * self.t < 0.5) {
            return Err(Error::InvalidParameter(format!("|B|T = {} must be < 1/2", self.b.abs() * self.t)));
        }
        if self.n_grid < 8 {
            return Err(Error::InvalidParameter("n_grid must be ≥ 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedGround {
    /// Richardson extrapolation from n_grid and 2·n_grid.
    pub eigenvalue: f64,
    /// Second-order value on n_grid.
    pub raw_eigenvalue: f64,
    pub grid: Vec<f64>,
    /// Ground function in the original gauge, normalized in L²((1 − Bτ)dτ).
    pub u: Vec<f64>,
    /// Fitted slope of log|u| on the middle third of (0, T).
    pub decay_rate: f64,
}

/// Symmetrized operator −∂² − B²/(4(1 − Bτ)²) on the grid τ_i = iΔ, i < n,
/// with the Robin end eliminated through a ghost node; returned in the
/// trapezoid-weighted symmetric form together with the weights.
fn symmetrized(spec: &WeightedSpec, n: usize) -> (SymTridiagonal, Vec<f64>) {
    let (t, b) = (spec.t, spec.b);
    let h = t / n as f64;
    let beta = -1.0 - 0.5 * b;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    for i in 0..n {
        let tau = i as f64 * h;
        let q = -b * b / (4.0 * (1.0 - b * tau).powi(2));
        diag[i] = 2.0 / (h * h) + q;
    }
    diag[0] = 2.0 * (1.0 + h * beta) / (h * h) + diag[0] - 2.0 / (h * h);
    for i in 0..n - 1 {
        off[i] = -1.0 / (h * h);
    }
    off[0] *= std::f64::consts::SQRT_2;
    (SymTridiagonal { diag, off }, w)
}

fn weighted_lowest(spec: &WeightedSpec, n: usize, k: usize) -> Result<Vec<f64>> {
    let (tri, _) = symmetrized(spec, n);
    (0..k).map(|j| tri.eigenvalue(j)).collect()
}

/// Lowest k eigenvalues of ℋ_B^T (Richardson-extrapolated).
pub fn weighted_spectrum(spec: WeightedSpec, k: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let coarse = weighted_lowest(&spec, spec.n_grid, k)?;
    let fine = weighted_lowest(&spec, 2 * spec.n_grid, k)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

pub fn weighted_ground(spec: WeightedSpec) -> Result<WeightedGround> {
    spec.validate()?;
    let n = spec.n_grid;
    let (tri, w) = symmetrized(&spec, n);
    let raw = tri.eigenvalue(0)?;
    let fine = weighted_lowest(&spec, 2 * n, 1)?[0];
    let y = tri.eigenvector(raw);
    let h = spec.t / n as f64;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut u: Vec<f64> = (0..n)
        .map(|i| y[i] / w[i].sqrt() / (1.0 - spec.b * grid[i]).sqrt())
        .collect();
    u.push(0.0);
    // ∫ u² (1 − Bτ) = ∫ ũ², trapezoid
    let norm2: f64 = (0..n).map(|i| w[i] * h * u[i] * u[i] * (1.0 - spec.b * grid[i])).sum();
    let s = norm2.sqrt();
    u.iter_mut().for_each(|a| *a /= s);
    let (lo, hi) = (n / 3, 2 * n / 3);
    let xs: Vec<f64> = grid[lo..hi].to_vec();
    let ys: Vec<f64> = u[lo..hi].iter().map(|a| a.abs().ln()).collect();
    let decay_rate = crate::fit::linear_fit(&xs, &ys).slope;
    Ok(WeightedGround { eigenvalue: (4.0 * fine - raw) / 3.0, raw_eigenvalue: raw, grid, u, decay_rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn secular_roots_satisfy_equations() {
        let s = interval_spectrum_exact(IntervalSpec { t: 5.0 }, 4).unwrap();
        let w = (-s.eigenvalues[0]).sqrt();
        assert!(((5.0 * w).tanh() - w).abs() < 1e-14);
        for lam in &s.eigenvalues[1..] {
            let k = lam.sqrt();
            assert!(((5.0 * k).tan() - k).abs() < 1e-8 * (1.0 + k));
        }
        assert!(s.eigenvalues.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn weighted_symmetrization_has_second_order_convergence() {
        let exact = interval_spectrum_exact(IntervalSpec { t: 6.0 }, 1).unwrap().eigenvalues[0];
        let spec = WeightedSpec { t: 6.0, b: 0.0, n_grid: 200 };
        let e1 = (weighted_lowest(&spec, 200, 1).unwrap()[0] - exact).abs();
        let e2 = (weighted_lowest(&spec, 400, 1).unwrap()[0] - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "order {order}");
    }
}
