//! Smooth closed boundary curves, arc-length tables, curvature profiles
//! and the curvature wells.
//!
//! Conventions: curves are traversed counter-clockwise, the curvature is
//! κ = (x'y'' − y'x'')/|M'|³ (positive on convex curves) and the arc-length
//! coordinate σ lives on (−L, L] with σ = 0 at the top point of the
//! symmetry axis and σ = L at the bottom one.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, GaussLegendre};

/// Curve description as found in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Ellipse {
        a: f64,
        b: f64,
    },
    /// x(θ) = Σ_k x_cos[k] cos kθ + x_sin[k] sin kθ, same for y.
    Fourier {
        #[serde(default)]
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        #[serde(default)]
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
    },
}

impl CurveSpec {
    pub fn circle(radius: f64) -> Self {
        CurveSpec::Fourier {
            x_cos: vec![0.0, radius],
            x_sin: vec![],
            y_cos: vec![],
            y_sin: vec![0.0, radius],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    Ellipse { a: f64, b: f64 },
    Fourier { x: FourierSeries, y: FourierSeries },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    /// Value and first three θ-derivatives.
    fn eval(&self, theta: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        let n = self.cos.len().max(self.sin.len());
        for k in 0..n {
            let c = self.cos.get(k).copied().unwrap_or(0.0);
            let s = if k == 0 { 0.0 } else { self.sin.get(k).copied().unwrap_or(0.0) };
            if c == 0.0 && s == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (sn, cs) = (kf * theta).sin_cos();
            let a = c * cs + s * sn;
            let b = -c * sn + s * cs;
            out[0] += a;
            out[1] += kf * b;
            out[2] -= kf * kf * a;
            out[3] -= kf * kf * kf * b;
        }
        out
    }

    fn negate_sines(&mut self) {
        for s in &mut self.sin {
            *s = -*s;
        }
    }

    fn only(&self, cos_odd: bool, sin_odd: bool) -> bool {
        let bad = |v: &[f64], odd: bool| {
            v.iter()
                .enumerate()
                .any(|(k, c)| k > 0 && (k % 2 == 1) != odd && *c != 0.0)
        };
        let cos0 = self.cos.first().copied().unwrap_or(0.0);
        !bad(&self.cos, cos_odd) && !bad(&self.sin, sin_odd) && (!cos_odd || cos0 == 0.0)
    }
}

/// A validated, counter-clockwise, regular closed curve M(θ), θ ∈ [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve {
    pub kind: CurveKind,
    pub samples_per_period: usize,
    /// Always true after construction; clockwise inputs are reversed.
    pub counter_clockwise: bool,
}

/// Position and derivatives of M at θ: [M, M', M'', M'''].
pub type Jet = [[f64; 2]; 4];

impl ClosedCurve {
    pub fn jet(&self, theta: f64) -> Jet {
        match &self.kind {
            CurveKind::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                [[a * c, b * s], [-a * s, b * c], [-a * c, -b * s], [a * s, -b * c]]
            }
            CurveKind::Fourier { x, y } => {
                let fx = x.eval(theta);
                let fy = y.eval(theta);
                [[fx[0], fy[0]], [fx[1], fy[1]], [fx[2], fy[2]], [fx[3], fy[3]]]
            }
        }
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        self.jet(theta)[0]
    }

    pub fn speed(&self, theta: f64) -> f64 {
        let d = self.jet(theta)[1];
        d[0].hypot(d[1])
    }

    /// Signed curvature in terms of θ.
    pub fn curvature(&self, theta: f64) -> f64 {
        let j = self.jet(theta);
        let (d1, d2) = (j[1], j[2]);
        let sp2 = d1[0] * d1[0] + d1[1] * d1[1];
        (d1[0] * d2[1] - d1[1] * d2[0]) / (sp2 * sp2.sqrt())
    }

    /// dκ/ds (arc-length derivative) at θ.
    pub fn curvature_slope(&self, theta: f64) -> f64 {
        let j = self.jet(theta);
        let (d1, d2, d3) = (j[1], j[2], j[3]);
        let sp2 = d1[0] * d1[0] + d1[1] * d1[1];
        let cross = d1[0] * d2[1] - d1[1] * d2[0];
        let dcross = d1[0] * d3[1] - d1[1] * d3[0];
        let dsp2 = 2.0 * (d1[0] * d2[0] + d1[1] * d2[1]);
        let sp = sp2.sqrt();
        let dk = dcross / (sp2 * sp) - 1.5 * cross * dsp2 / (sp2 * sp2 * sp);
        dk / sp
    }

    /// Signed enclosed area by the trapezoid rule (spectrally accurate).
    pub fn signed_area(&self) -> f64 {
        let n = self.samples_per_period;
        let mut acc = 0.0;
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let j = self.jet(t);
            acc += j[0][0] * j[1][1] - j[0][1] * j[1][0];
        }
        0.5 * acc * 2.0 * PI / n as f64
    }

    /// Mirror symmetry about the y-axis, read off the parametrization.
    pub fn is_axis_symmetric(&self) -> bool {
        match &self.kind {
            CurveKind::Ellipse { .. } => true,
            CurveKind::Fourier { x, y } => x.only(true, false) && y.only(false, true),
        }
    }

    /// Parameter of the origin p₀: the upper axis point when symmetric, else θ = π/2.
    pub fn origin_theta(&self) -> f64 {
        if self.is_axis_symmetric() {
            let up = self.point(FRAC_PI_2)[1];
            let down = self.point(1.5 * PI)[1];
            if down > up {
                return 1.5 * PI;
            }
        }
        FRAC_PI_2
    }
}

/// Validate a curve description.
pub fn build_curve(spec: &CurveSpec) -> Result<ClosedCurve> {
    let samples = 1024;
    let kind = match spec {
        CurveSpec::Ellipse { a, b } => {
            if !(a.is_finite() && b.is_finite() && *b > 0.0 && b < a) {
                return Err(Error::EllipseAxes { a: *a, b: *b });
            }
            CurveKind::Ellipse { a: *a, b: *b }
        }
        CurveSpec::Fourier { x_cos, x_sin, y_cos, y_sin } => {
            let all = x_cos.iter().chain(x_sin).chain(y_cos).chain(y_sin);
            if all.clone().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCurve("non-finite Fourier coefficient".into()));
            }
            CurveKind::Fourier {
                x: FourierSeries { cos: x_cos.clone(), sin: x_sin.clone() },
                y: FourierSeries { cos: y_cos.clone(), sin: y_sin.clone() },
            }
        }
    };
    let mut curve = ClosedCurve { kind, samples_per_period: samples, counter_clockwise: true };
    let mut scale: f64 = 0.0;
    for k in 0..samples {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let p = curve.point(t);
        scale = scale.max(p[0].hypot(p[1]));
    }
    for k in 0..samples {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let sp = curve.speed(t);
        if !(sp > 1e-10 * scale.max(1e-300)) {
            return Err(Error::NonRegular { theta: t, speed: sp });
        }
    }
    let area = curve.signed_area();
    if !(area.abs() > 1e-12 * scale * scale) {
        return Err(Error::InvalidCurve("curve encloses no area".into()));
    }
    if area < 0.0 {
        if let CurveKind::Fourier { x, y } = &mut curve.kind {
            x.negate_sines();
            y.negate_sines();
        }
    }
    Ok(curve)
}

/// Arc length as a function of θ, anchored at the origin p₀.
#[derive(Debug, Clone)]
pub struct ArcLengthTable {
    pub total_length: f64,
    pub theta0: f64,
    /// θ_k = θ₀ + 2πk/n, k = 0..=n.
    pub theta: Vec<f64>,
    /// s(θ_k), cumulative from θ₀.
    pub s: Vec<f64>,
    rule: GaussLegendre,
}

/// Tabulate s(θ) on n panels; each panel is integrated adaptively.
pub fn arclength_parametrize(curve: &ClosedCurve, n: usize) -> Result<ArcLengthTable> {
    if n < 64 {
        return Err(Error::InvalidParameter(format!("arc-length table needs n ≥ 64, got {n}")));
    }
    let theta0 = curve.origin_theta();
    let dt = 2.0 * PI / n as f64;
    let theta: Vec<f64> = (0..=n).map(|k| theta0 + k as f64 * dt).collect();
    let mut s = vec![0.0; n + 1];
    for k in 0..n {
        let piece = quadrature::adaptive(|t| curve.speed(t), theta[k], theta[k + 1], 1e-15 * dt)?;
        s[k + 1] = s[k] + piece;
    }
    Ok(ArcLengthTable { total_length: s[n], theta0, theta, s, rule: GaussLegendre::new(24) })
}

impl ArcLengthTable {
    pub fn half_length(&self) -> f64 {
        0.5 * self.total_length
    }

    fn panels(&self) -> usize {
        self.theta.len() - 1
    }

    /// s ∈ [0, 2L) of the parameter θ.
    pub fn s_of_theta(&self, curve: &ClosedCurve, theta: f64) -> f64 {
        let n = self.panels();
        let dt = 2.0 * PI / n as f64;
        let rel = (theta - self.theta0).rem_euclid(2.0 * PI);
        let k = ((rel / dt) as usize).min(n - 1);
        let t0 = self.theta[k];
        self.s[k] + self.rule.integrate(t0, self.theta0 + rel, |t| curve.speed(t))
    }

    /// θ of an arc-length position s (any real, reduced modulo 2L).
    pub fn theta_of_s(&self, curve: &ClosedCurve, s: f64) -> f64 {
        let total = self.total_length;
        let s = s.rem_euclid(total);
        let n = self.panels();
        let k = match self.s.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.theta[i.min(n)],
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let (lo, hi) = (self.theta[k], self.theta[k + 1]);
        let frac = (s - self.s[k]) / (self.s[k + 1] - self.s[k]);
        let mut t = lo + frac * (hi - lo);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let f = self.s[k] + self.rule.integrate(lo, t, |x| curve.speed(x)) - s;
            if f > 0.0 {
                b = t;
            } else {
                a = t;
            }
            let mut next = t - f / curve.speed(t);
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - t).abs() < 1e-15 * (1.0 + t.abs()) {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}

/// Curve together with its arc-length table; evaluates geometry at σ ∈ (−L, L].
#[derive(Debug, Clone)]
pub struct CurveGeometry {
    pub curve: ClosedCurve,
    pub table: ArcLengthTable,
}

impl CurveGeometry {
    pub fn new(curve: ClosedCurve, table: ArcLengthTable) -> Self {
        Self { curve, table }
    }

    pub fn from_spec(spec: &CurveSpec, n: usize) -> Result<Self> {
        let curve = build_curve(spec)?;
        let table = arclength_parametrize(&curve, n)?;
        Ok(Self { curve, table })
    }

    pub fn theta(&self, sigma: f64) -> f64 {
        self.table.theta_of_s(&self.curve, sigma)
    }

    pub fn kappa(&self, sigma: f64) -> f64 {
        self.curve.curvature(self.theta(sigma))
    }

    pub fn kappa_slope(&self, sigma: f64) -> f64 {
        self.curve.curvature_slope(self.theta(sigma))
    }

    pub fn point(&self, sigma: f64) -> [f64; 2] {
        self.curve.point(self.theta(sigma))
    }
}

/// Anything that supplies a curvature function on the circle of length 2L.
pub trait BoundaryCurvature: Send + Sync {
    fn half_length(&self) -> f64;
    fn kappa(&self, sigma: f64) -> f64;
    fn kappa_sup(&self) -> f64;
    fn kappa_inf(&self) -> f64;
}

/// The disc of radius R: κ ≡ 1/R.
#[derive(Debug, Clone, Copy)]
pub struct ConstantCurvature {
    pub radius: f64,
}

impl BoundaryCurvature for ConstantCurvature {
    fn half_length(&self) -> f64 {
        PI * self.radius
    }
    fn kappa(&self, _: f64) -> f64 {
        1.0 / self.radius
    }
    fn kappa_sup(&self) -> f64 {
        1.0 / self.radius
    }
    fn kappa_inf(&self) -> f64 {
        1.0 / self.radius
    }
}

/// A non-degenerate curvature maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Well {
    pub s: f64,
    /// κ''(s) at the well (arc-length derivative), negative.
    pub kappa_second: f64,
    /// √(−κ''/2).
    pub gamma: f64,
}

/// Sampled curvature on the uniform grid σ_i = (i − n/2)Δ, Δ = 2L/n, plus the wells.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub geometry: CurveGeometry,
    pub half_length: f64,
    pub sigma: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_max: f64,
    pub kappa_min: f64,
    /// Sorted by position; with two wells, `wells[0]` is s_r and `wells[1]` is s_ℓ.
    pub wells: Vec<Well>,
    pub gamma: f64,
    pub symmetric: bool,
}

impl CurvatureProfile {
    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_length / self.n() as f64
    }

    /// s_r (first well) and s_ℓ (second well).
    pub fn well_pair(&self) -> Result<(Well, Well)> {
        if self.wells.len() != 2 {
            return Err(Error::WellCount(self.wells.len()));
        }
        Ok((self.wells[0], self.wells[1]))
    }

    /// Exact curvature at any σ.
    pub fn kappa_at(&self, sigma: f64) -> f64 {
        self.geometry.kappa(sigma)
    }

    /// v = κ_max − κ, clamped at 0.
    pub fn v_at(&self, sigma: f64) -> f64 {
        (self.kappa_max - self.kappa_at(sigma)).max(0.0)
    }

    /// dv/dσ.
    pub fn v_slope(&self, sigma: f64) -> f64 {
        -self.geometry.kappa_slope(sigma)
    }
}

impl BoundaryCurvature for CurvatureProfile {
    fn half_length(&self) -> f64 {
        self.half_length
    }
    fn kappa(&self, sigma: f64) -> f64 {
        self.geometry.kappa(sigma)
    }
    fn kappa_sup(&self) -> f64 {
        self.kappa_max
    }
    fn kappa_inf(&self) -> f64 {
        self.kappa_min
    }
}

/// Reduce σ to (−L, L].
pub fn wrap_sigma(sigma: f64, half_length: f64) -> f64 {
    if sigma > -half_length && sigma <= half_length {
        return sigma;
    }
    let two_l = 2.0 * half_length;
    let r = (sigma + half_length).rem_euclid(two_l) - half_length;
    if r <= -half_length {
        r + two_l
    } else {
        r
    }
}

/// Second derivative by the 5-point stencil with one Richardson step.
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, delta: f64) -> (f64, f64) {
    let d = |h: f64| {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h)
    };
    let coarse = d(delta);
    let fine = d(0.5 * delta);
    ((16.0 * fine - coarse) / 15.0, (fine - coarse).abs())
}

/// Sample κ, locate the wells and compute γ.
pub fn curvature_profile(curve: &ClosedCurve, table: &ArcLengthTable, n_s: usize) -> Result<CurvatureProfile> {
    if n_s < 16 || n_s % 2 != 0 {
        return Err(Error::InvalidParameter(format!("n_s must be even and ≥ 16, got {n_s}")));
    }
    let geometry = CurveGeometry::new(curve.clone(), table.clone());
    let l = table.half_length();
    let ds = 2.0 * l / n_s as f64;
    let sigma: Vec<f64> = (0..n_s).map(|i| (i as f64 - (n_s / 2) as f64) * ds).collect();
    let kappa: Vec<f64> = sigma.iter().map(|&s| geometry.kappa(s)).collect();
    let kmax_d = kappa.iter().cloned().fold(f64::MIN, f64::max);
    let kmin = kappa.iter().cloned().fold(f64::MAX, f64::min);
    let kscale = kmax_d.abs().max(kmin.abs()).max(1e-300);
    if kmax_d - kmin <= 1e-10 * kscale {
        return Err(Error::ConstantCurvature);
    }

    // Discrete local maxima, then bisection on κ' in the neighbouring cells.
    let mut candidates = Vec::new();
    for i in 0..n_s {
        let prev = kappa[(i + n_s - 1) % n_s];
        let next = kappa[(i + 1) % n_s];
        if kappa[i] >= prev && kappa[i] > next {
            let s = refine_max(&geometry, sigma[i], ds, prev, kappa[i], next);
            candidates.push((wrap_sigma(s, l), geometry.kappa(s)));
        }
    }
    let kmax = candidates.iter().map(|c| c.1).fold(f64::MIN, f64::max);
    let mut tops: Vec<f64> = candidates
        .iter()
        .filter(|c| c.1 >= kmax - 1e-8 * kscale)
        .map(|c| c.0)
        .collect();
    tops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    tops.dedup_by(|a, b| (*a - *b).abs() < 0.5 * ds);
    if tops.is_empty() || tops.len() > 2 {
        return Err(Error::WellCount(tops.len()));
    }

    let delta = 2e-3 * l;
    let mut wells = Vec::with_capacity(tops.len());
    for &s in &tops {
        let (k2, _) = second_derivative(|x| geometry.kappa(x), s, delta);
        if !(k2 < -1e-6 * kscale / (l * l)) {
            return Err(Error::DegenerateWell { s, kappa_second: k2 });
        }
        wells.push(Well { s, kappa_second: k2, gamma: (-k2 / 2.0).sqrt() });
    }

    let mut sym_err: f64 = 0.0;
    for i in 1..n_s {
        sym_err = sym_err.max((kappa[i] - kappa[n_s - i]).abs());
    }
    let symmetric = sym_err <= 1e-8 * kscale;
    let gamma = wells[0].gamma;
    Ok(CurvatureProfile {
        geometry,
        half_length: l,
        sigma,
        kappa,
        kappa_max: kmax,
        kappa_min: kmin,
        wells,
        gamma,
        symmetric,
    })
}

fn refine_max(g: &CurveGeometry, s: f64, ds: f64, km: f64, k0: f64, kp: f64) -> f64 {
    let denom = km - 2.0 * k0 + kp;
    let guess = if denom < 0.0 { s + 0.5 * ds * (km - kp) / denom } else { s };
    let (mut a, mut b) = (s - ds, s + ds);
    let (fa, fb) = (g.kappa_slope(a), g.kappa_slope(b));
    if !(fa > 0.0 && fb < 0.0) {
        return guess;
    }
    let mut x = guess.clamp(a, b);
    for _ in 0..200 {
        let f = g.kappa_slope(x);
        if f > 0.0 {
            a = x;
        } else {
            b = x;
        }
        if b - a < 1e-15 * (1.0 + x.abs()) {
            break;
        }
        x = 0.5 * (a + b);
    }
    0.5 * (a + b)
}

/// Convenience: build curve, table and profile in one go.
pub fn profile_from_spec(spec: &CurveSpec, n_table: usize, n_s: usize) -> Result<CurvatureProfile> {
    let curve = build_curve(spec)?;
    let table = arclength_parametrize(&curve, n_table)?;
    curvature_profile(&curve, &table, n_s)
}
