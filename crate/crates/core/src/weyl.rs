//! Eigenvalue counts of the tubular operator against the two Weyl laws, and
//! the effective bracketing operators
//! −h + (1 ± C h^{1/2}) h² D² − κ h^{3/2} ± C h².

use log::info;
use serde::Serialize;

use crate::effective1d::{solve_periodic_extrapolated, EffectivePotential};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurvature, CurvatureProfile};
use crate::linalg::EigenOptions;
use crate::quadrature::GaussLegendre;
use crate::tubular2d::{self, assemble, Domain, TubularSpec};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylPrediction {
    /// |Γ|√(1 − Λ)/(π h^{1/2}).
    pub negative: f64,
    /// (1/(π h^{1/4})) ∫ √((E + κ)₊) ds.
    pub low_lying: f64,
}

/// ∫_Γ √((E + κ)₊) ds, split at the sign changes of E + κ.
pub fn kappa_integral(curv: &dyn BoundaryCurvature, e: f64, samples: usize) -> f64 {
    let l = curv.half_length();
    let f = |s: f64| e + curv.kappa(s);
    let step = 2.0 * l / samples as f64;
    let mut cuts = vec![-l];
    for i in 0..samples {
        let (a, b) = (-l + i as f64 * step, -l + (i + 1) as f64 * step);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        let (mut lo, mut hi, flo) = (a, b, fa);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if f(m).signum() == flo.signum() {
                lo = m;
            } else {
                hi = m;
            }
        }
        cuts.push(0.5 * (lo + hi));
    }
    cuts.push(l);
    let gl = GaussLegendre::new(20);
    cuts.windows(2)
        .map(|w| {
            let panels = (((w[1] - w[0]) / step).ceil() as usize).max(1);
            // s = a + (b − a)(3u² − 2u³) removes the √ zeros at the cuts
            let d = w[1] - w[0];
            gl.composite(0.0, 1.0, panels, |u| {
                let s = w[0] + d * u * u * (3.0 - 2.0 * u);
                f(s).max(0.0).sqrt() * d * 6.0 * u * (1.0 - u)
            })
        })
        .sum()
}

pub fn weyl_predictions(curv: &dyn BoundaryCurvature, h: f64, lambda: f64, e: f64) -> Result<WeylPrediction> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("Λ = {lambda} must lie in (0, 1)")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("h = {h} must lie in (0, 1)")));
    }
    let pi = std::f64::consts::PI;
    let len = 2.0 * curv.half_length();
    Ok(WeylPrediction {
        negative: len * (1.0 - lambda).sqrt() / (pi * h.sqrt()),
        low_lying: kappa_integral(curv, e, 512) / (pi * h.powf(0.25)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Threshold {
    /// μ < −Λh.
    Negative { lambda: f64 },
    /// μ < −h + E h^{3/2}.
    LowLying { e: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CountingReport {
    pub h: f64,
    pub threshold: Threshold,
    /// Threshold in rescaled units μ̂ = μ/h.
    pub rescaled_threshold: f64,
    pub observed_count: usize,
    pub predicted: f64,
    pub relative_error: f64,
}

pub const COUNT_BUDGET: usize = 200;

/// Counts by Sylvester inertia of K − tM; the τ-discretization defect of
/// the transverse ground level is removed from the threshold.
pub fn counting_check(curv: &dyn BoundaryCurvature, h: f64, threshold: Threshold, spec: &TubularSpec) -> Result<CountingReport> {
    let hbar = h.powf(0.25);
    if (spec.hbar - hbar).abs() > 1e-12 * hbar {
        return Err(Error::InvalidParameter(format!("spec ħ = {} but h^{{1/4}} = {hbar}", spec.hbar)));
    }
    let op = assemble(curv, spec, Domain::Full)?;
    let defect = op.grid.tau.transverse_defect()?;
    let (t, predicted) = match threshold {
        Threshold::Negative { lambda } => (-lambda, weyl_predictions(curv, h, lambda, 0.0)?.negative),
        Threshold::LowLying { e } => (-1.0 + e * hbar * hbar, weyl_predictions(curv, h, 0.5, e)?.low_lying),
    };
    let count = tubular2d::count_below(&op, t + defect)?;
    if count > COUNT_BUDGET {
        return Err(Error::Budget { count, budget: COUNT_BUDGET });
    }
    info!("h = {h}: {count} eigenvalues below μ̂ = {t:.6} (prediction {predicted:.3})");
    Ok(CountingReport {
        h,
        threshold,
        rescaled_threshold: t,
        observed_count: count,
        predicted,
        relative_error: (count as f64 - predicted) / predicted,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketRow {
    pub h: f64,
    /// 2D eigenvalues in h-units, transverse defect removed.
    pub mu: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub mu_minus: Vec<f64>,
    pub c_plus: f64,
    pub c_minus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub rows: Vec<BracketRow>,
    pub c_plus: f64,
    pub c_minus: f64,
}

pub const BRACKET_CAP: f64 = 1e3;

/// μ_n^±(C) for n < k: −h + h^{3/2}(λ_n(ħ√(1 ± Cħ²)) − κ_max) ± C h².
pub fn bracket_levels(pot: &EffectivePotential, h: f64, c: f64, sign: f64, k: usize, n_s: usize) -> Result<Vec<f64>> {
    let hbar = h.powf(0.25);
    let f = 1.0 + sign * c * hbar * hbar;
    if f <= 0.0 {
        return Err(Error::BracketCap(c));
    }
    let lam = solve_periodic_extrapolated(pot, hbar * f.sqrt(), n_s, k)?;
    Ok(lam.iter().map(|l| -h + h.powf(1.5) * (l - pot.kappa_max) + sign * c * h * h).collect())
}

fn smallest_constant(holds: impl Fn(f64) -> Result<bool>, cap: f64) -> Result<f64> {
    if holds(0.0)? {
        return Ok(0.0);
    }
    let top = cap * (1.0 - 1e-9);
    let mut hi = 1.0f64.min(top);
    while !holds(hi)? {
        if hi >= top {
            return Err(Error::BracketCap(cap));
        }
        hi = (2.0 * hi).min(top);
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 * hi {
        let m = 0.5 * (lo + hi);
        if holds(m)? {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(hi)
}

/// Smallest C₊, C₋ with μ_n^− ≤ μ_n ≤ μ_n^+ for n ≤ n_max at each h.
pub fn bracket_check(
    profile: &CurvatureProfile,
    hs: &[f64],
    n_max: usize,
    spec_for: impl Fn(f64) -> TubularSpec,
    opts: &EigenOptions,
) -> Result<BracketReport> {
    if n_max == 0 || n_max > 20 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} must lie in 1..=20")));
    }
    let pot = EffectivePotential::from_profile(profile);
    let n_s = 1024;
    let mut rows = Vec::new();
    for &h in hs {
        let spec = spec_for(h);
        let op = assemble(profile, &spec, Domain::Full)?;
        let defect = op.grid.tau.transverse_defect()?;
        let res = tubular2d::solve_lowest(&op, n_max, opts)?;
        let mu: Vec<f64> = res.eigenvalues.iter().map(|m| h * (m - defect)).collect();
        let c_plus = smallest_constant(
            |c| Ok(bracket_levels(&pot, h, c, 1.0, n_max, n_s)?.iter().zip(&mu).all(|(p, m)| m <= p)),
            BRACKET_CAP,
        )?;
        let cap_minus = (1.0 / spec.hbar.powi(2)).min(BRACKET_CAP);
        let c_minus = smallest_constant(
            |c| {
                if c >= cap_minus {
                    return Err(Error::BracketCap(c));
                }
                Ok(bracket_levels(&pot, h, c, -1.0, n_max, n_s)?.iter().zip(&mu).all(|(p, m)| p <= m))
            },
            cap_minus,
        )?;
        let mu_plus = bracket_levels(&pot, h, c_plus, 1.0, n_max, n_s)?;
        let mu_minus = bracket_levels(&pot, h, c_minus, -1.0, n_max, n_s)?;
        info!("h = {h}: C₊ = {c_plus:.4}, C₋ = {c_minus:.4}");
        rows.push(BracketRow { h, mu, mu_plus, mu_minus, c_plus, c_minus });
    }
    let c_plus = rows.iter().map(|r| r.c_plus).fold(0.0, f64::max);
    let c_minus = rows.iter().map(|r| r.c_minus).fold(0.0, f64::max);
    Ok(BracketReport { rows, c_plus, c_minus })
}
