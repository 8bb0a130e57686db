use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{m_dot, BandLdlt, BandedSym, Ordering, SymSparse};

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Residual target ‖M⁻¹Kx − λx‖_M for M-normalized x.
    pub tol: f64,
    pub max_iter: usize,
    /// Block size is nev + block_extra (at least 2 extra vectors).
    pub block_extra: usize,
    /// Use the dense solver when n ≤ `dense_limit`.
    pub dense_fallback: bool,
    pub dense_limit: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 4000,
            block_extra: 4,
            dense_fallback: false,
            dense_limit: 5000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub bandwidth: usize,
    pub factorizations: usize,
    pub dense: bool,
}

/// Factor K − sM, lowering s until the factorization is positive definite.
fn factor_below(k: &SymSparse, m: &[f64], ord: &Ordering, mut shift: f64, step: f64) -> Result<(BandLdlt, f64, usize)> {
    let mut step = step.abs().max(1e-6);
    for attempt in 1..=60 {
        match BandedSym::from_sparse(k, m, shift, ord).ldlt() {
            Ok(f) if f.negative == 0 => return Ok((f, shift, attempt)),
            Ok(f) => debug!("shift {shift} has {} eigenvalues below; lowering", f.negative),
            Err(e) => debug!("factorization at {shift} failed ({e}); jittering"),
        }
        shift -= step;
        step *= 2.0;
    }
    Err(Error::Factorization("could not find a shift below the spectrum".into()))
}

/// Number of eigenvalues of K x = λ M x strictly below t (Sylvester inertia).
pub fn count_below(k: &SymSparse, m: &[f64], ord: &Ordering, t: f64) -> Result<usize> {
    let mut t = t;
    for _ in 0..8 {
        match BandedSym::from_sparse(k, m, t, ord).ldlt() {
            Ok(f) => return Ok(f.negative),
            Err(_) => t -= 1e-12 * t.abs().max(1.0),
        }
    }
    Err(Error::Factorization(format!("singular at threshold {t}")))
}

fn solve_natural(f: &BandLdlt, ord: &Ordering, b: &[f64]) -> Vec<f64> {
    let mut y = ord.to_band(b);
    f.solve(&mut y);
    ord.to_natural(&y)
}

fn residual(k: &SymSparse, m: &[f64], x: &[f64], lambda: f64) -> f64 {
    let kx = k.apply(x);
    let num: f64 = kx
        .iter()
        .zip(x)
        .zip(m)
        .map(|((a, b), mi)| {
            let r = a - lambda * mi * b;
            r * r / mi
        })
        .sum();
    (num / m_dot(m, x, x)).sqrt()
}

/// M-orthonormalize `vs[from..]` against all earlier vectors (two passes).
/// Vectors that collapse are replaced by fresh random ones.
fn m_orthonormalize(m: &[f64], vs: &mut [Vec<f64>], from: usize, rng: &mut ChaCha8Rng) {
    for i in from..vs.len() {
        for attempt in 0..4 {
            let before = m_dot(m, &vs[i], &vs[i]).sqrt();
            for _ in 0..2 {
                for j in 0..i {
                    let c = m_dot(m, &vs[j], &vs[i]);
                    let (head, tail) = vs.split_at_mut(i);
                    for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                        *a -= c * b;
                    }
                }
            }
            let nrm = m_dot(m, &vs[i], &vs[i]).sqrt();
            if nrm > 1e-10 * before && nrm > 0.0 {
                vs[i].iter_mut().for_each(|a| *a /= nrm);
                break;
            }
            if attempt == 3 {
                panic!("subspace basis collapsed");
            }
            vs[i] = (0..m.len()).map(|_| rng.random::<f64>() - 0.5).collect();
        }
    }
}

/// Lowest `nev` eigenpairs of K x = λ M x by shift-invert block subspace
/// iteration with Rayleigh–Ritz and locking. Vectors are M-normalized.
pub fn lowest_eigenpairs(
    k: &SymSparse,
    m: &[f64],
    ord: &Ordering,
    nev: usize,
    shift: f64,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, SolverStats)> {
    let n = k.n;
    if nev == 0 || nev > n {
        return Err(Error::InvalidParameter(format!("cannot compute {nev} eigenpairs of a {n}×{n} problem")));
    }
    if opts.dense_fallback && n <= opts.dense_limit {
        return dense_lowest(k, m, nev);
    }
    let (fact, shift, nf) = factor_below(k, m, ord, shift, 1e-3 * shift.abs().max(1.0))?;
    let p = (nev + opts.block_extra.max(2)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    m_orthonormalize(m, &mut x, 0, &mut rng);
    let mut locked = 0usize;
    let mut theta = vec![0.0; p];
    let mut res = vec![f64::INFINITY; p];
    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    for it in 1..=opts.max_iter {
        for v in x.iter_mut().skip(locked) {
            let mv: Vec<f64> = v.iter().zip(m).map(|(a, b)| a * b).collect();
            *v = solve_natural(&fact, ord, &mv);
        }
        m_orthonormalize(m, &mut x, locked, &mut rng);
        // Rayleigh–Ritz on the active block.
        let q = p - locked;
        let kx: Vec<Vec<f64>> = x[locked..].iter().map(|v| k.apply(v)).collect();
        let mut h = DMatrix::<f64>::zeros(q, q);
        for a in 0..q {
            for b in a..q {
                let val: f64 = x[locked + a].iter().zip(&kx[b]).map(|(s, t)| s * t).sum();
                h[(a, b)] = val;
                h[(b, a)] = val;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut nx = Vec::with_capacity(q);
        for (c, &o) in order.iter().enumerate() {
            let mut v = vec![0.0; n];
            for a in 0..q {
                let w = eig.eigenvectors[(a, o)];
                for (vi, xi) in v.iter_mut().zip(&x[locked + a]) {
                    *vi += w * xi;
                }
            }
            theta[locked + c] = eig.eigenvalues[o];
            nx.push(v);
        }
        for (c, v) in nx.into_iter().enumerate() {
            x[locked + c] = v;
        }
        for i in locked..nev {
            res[i] = residual(k, m, &x[i], theta[i]);
        }
        while locked < nev && res[locked] <= opts.tol {
            locked += 1;
        }
        if locked == nev {
            debug!("subspace iteration converged in {it} iterations");
            let mut vecs: Vec<Vec<f64>> = x.into_iter().take(nev).collect();
            for v in &mut vecs {
                fix_sign(v);
            }
            return Ok((
                theta[..nev].to_vec(),
                vecs,
                SolverStats {
                    iterations: it,
                    residuals: res[..nev].to_vec(),
                    shift,
                    bandwidth: fact.bw,
                    factorizations: nf,
                    dense: false,
                },
            ));
        }
        let worst = res[locked..nev].iter().cloned().fold(0.0, f64::max);
        if worst < 0.999 * best {
            best = worst;
            stall = 0;
        } else {
            stall += 1;
            if stall > 200 {
                return Err(Error::NoConvergence { iterations: it, residual: worst });
            }
        }
    }
    let worst = res[..nev].iter().cloned().fold(0.0, f64::max);
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: worst })
}

/// Largest-magnitude component made positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut big = 0.0f64;
    for &a in v.iter() {
        if a.abs() > big.abs() {
            big = a;
        }
    }
    if big < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
}

/// Dense reference solver: eigenpairs of M^{-1/2} K M^{-1/2}.
pub fn dense_lowest(k: &SymSparse, m: &[f64], nev: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>, SolverStats)> {
    let n = k.n;
    let s: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut d = k.to_dense();
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] *= s[i] * s[j];
        }
    }
    let eig = SymmetricEigen::new(d);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut vals = Vec::with_capacity(nev);
    let mut vecs = Vec::with_capacity(nev);
    let mut res = Vec::with_capacity(nev);
    for &o in order.iter().take(nev) {
        let mut v: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, o)] * s[i]).collect();
        fix_sign(&mut v);
        let lam = eig.eigenvalues[o];
        res.push(residual(k, m, &v, lam));
        vals.push(lam);
        vecs.push(v);
    }
    Ok((vals, vecs, SolverStats { iterations: 1, residuals: res, shift: 0.0, bandwidth: n, factorizations: 0, dense: true }))
}

/// Ground state of a sector problem by inverse iteration. Convergence is
/// judged on w = e^{g}u, the Agmon-weighted gauge, so exponentially small
/// tails are converged to relative accuracy rather than absolute.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub value: f64,
    /// M-normalized, positive where it is large.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Final relative change of the weighted iterate.
    pub weighted_change: f64,
    pub shift: f64,
}

pub fn ground_state(
    k: &SymSparse,
    m: &[f64],
    ord: &Ordering,
    log_weight: &[f64],
    shift: f64,
    max_iter: usize,
) -> Result<GroundState> {
    let n = k.n;
    let (fact, shift, _) = factor_below(k, m, ord, shift, 1e-4 * shift.abs().max(1.0))?;
    let gmax = log_weight.iter().cloned().fold(f64::MIN, f64::max);
    let gmin = log_weight.iter().cloned().fold(f64::MAX, f64::min);
    if gmax - gmin > 700.0 {
        return Err(Error::Underflow(format!("Agmon weight spans e^{:.0}", gmax - gmin)));
    }
    let scale: Vec<f64> = log_weight.iter().map(|g| (g - gmin).exp()).collect();
    let mut u: Vec<f64> = scale.iter().map(|s| 1.0 / s).collect();
    let nrm = m_dot(m, &u, &u).sqrt();
    u.iter_mut().for_each(|a| *a /= nrm);
    let mut change = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut stall = 0;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let mu: Vec<f64> = u.iter().zip(m).map(|(a, b)| a * b).collect();
        let mut y = solve_natural(&fact, ord, &mu);
        let nrm = m_dot(m, &y, &y).sqrt();
        y.iter_mut().for_each(|a| *a /= nrm);
        let sum: f64 = y.iter().sum();
        if sum < 0.0 {
            y.iter_mut().for_each(|a| *a = -*a);
        }
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..n {
            num = num.max(((y[i] - u[i]) * scale[i]).abs());
            den = den.max((y[i] * scale[i]).abs());
        }
        change = num / den;
        u = y;
        if change < 1e-14 {
            break;
        }
        if change < 0.9 * best {
            best = change;
            stall = 0;
        } else {
            stall += 1;
            if stall > 30 && change < 1e-11 {
                break;
            }
        }
    }
    if !(change < 1e-9) {
        return Err(Error::NoConvergence { iterations: it, residual: change });
    }
    let ku = k.apply(&u);
    let value = u.iter().zip(&ku).map(|(a, b)| a * b).sum::<f64>() / m_dot(m, &u, &u);
    let residual = residual(k, m, &u, value);
    Ok(GroundState { value, vector: u, iterations: it, residual, weighted_change: change, shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymBuilder;

    fn problem(n: usize) -> (SymSparse, Vec<f64>) {
        // −u'' + x² u on a uniform grid with a non-uniform mass.
        let h = 12.0 / (n as f64 + 1.0);
        let mut b = SymBuilder::new(n);
        let mut m = vec![0.0; n];
        for i in 0..n {
            let x = -6.0 + (i + 1) as f64 * h;
            b.add_diag(i, 2.0 / h + h * x * x);
            if i + 1 < n {
                b.add_sym(i, i + 1, -1.0 / h);
            }
            m[i] = h;
        }
        (b.build(), m)
    }

    #[test]
    fn subspace_matches_dense() {
        let (k, m) = problem(300);
        let ord = Ordering::identity(300);
        let (a, _, st) = lowest_eigenpairs(&k, &m, &ord, 4, -1.0, &EigenOptions::default()).unwrap();
        let (b, _, _) = dense_lowest(&k, &m, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        assert!(st.residuals.iter().all(|r| *r <= 1e-10));
        assert!((a[0] - 1.0).abs() < 1e-2 && (a[1] - 3.0).abs() < 2e-2);
    }

    #[test]
    fn ground_state_has_accurate_tails() {
        let (k, m) = problem(400);
        let ord = Ordering::identity(400);
        let h = 12.0 / 401.0;
        let g: Vec<f64> = (0..400).map(|i| { let x = -6.0 + (i + 1) as f64 * h; 0.5 * x * x }).collect();
        let gs = ground_state(&k, &m, &ord, &g, 0.5, 500).unwrap();
        let (d, v, _) = dense_lowest(&k, &m, 1).unwrap();
        assert!((gs.value - d[0]).abs() < 1e-10);
        // compare where the dense vector is still well above rounding
        for i in 150..250 {
            assert!((gs.vector[i] - v[0][i]).abs() < 1e-8 * v[0][i].abs());
        }
        // far tail stays positive and monotone
        assert!(gs.vector[2] > 0.0 && gs.vector[2] < gs.vector[3]);
    }

    #[test]
    fn inertia_count() {
        let (k, m) = problem(200);
        let ord = Ordering::identity(200);
        let (vals, _, _) = dense_lowest(&k, &m, 10).unwrap();
        let c = count_below(&k, &m, &ord, 0.5 * (vals[6] + vals[7])).unwrap();
        assert_eq!(c, 7);
    }
}
