//! Leading-order WKB quasimode of a single curvature well:
//! ψ = ħ^{−1/4} e^{−Φ/ħ} ξ₀(σ) u(τ), with the Agmon phase Φ, the transport
//! amplitude ξ₀ and a transverse Robin profile.

use serde::{Deserialize, Serialize};

use crate::effective1d::EffectivePotential;
use crate::error::{Error, Result};
use crate::linalg::tridiag::SymTridiagonal;
use crate::quadrature::GaussLegendre;
use crate::tubular2d::RobinOperator2D;

/// Cumulative ∫_well^σ f along the path, for σ-values in any order; f may
/// have a kink at the well, so each side is integrated outward from it.
fn cumulative_from(well: f64, sigma: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let gl = GaussLegendre::new(8);
    let mut out = vec![0.0; sigma.len()];
    let mut idx: Vec<usize> = (0..sigma.len()).collect();
    idx.sort_by(|&a, &b| sigma[a].partial_cmp(&sigma[b]).unwrap());
    let split = idx.partition_point(|&i| sigma[i] < well);
    let mut acc = 0.0;
    let mut prev = well;
    for &i in &idx[split..] {
        let s = sigma[i];
        // sub-panels keep long gaps at full order
        let panels = (((s - prev) / 0.05).ceil() as usize).max(1);
        acc += gl.composite(prev, s, panels, &f);
        out[i] = acc;
        prev = s;
    }
    let mut acc = 0.0;
    let mut prev = well;
    for &i in idx[..split].iter().rev() {
        let s = sigma[i];
        let panels = (((prev - s) / 0.05).ceil() as usize).max(1);
        acc -= gl.composite(s, prev, panels, &f);
        out[i] = acc;
        prev = s;
    }
    out
}

/// Φ(σ) = |∫_well^σ √v| along the path coordinate.
pub fn agmon_distance(pot: &EffectivePotential, well: f64, sigma: &[f64]) -> Vec<f64> {
    cumulative_from(well, sigma, |s| pot.v(s).sqrt()).into_iter().map(f64::abs).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EikonalPhase {
    pub well: f64,
    pub sigma: Vec<f64>,
    pub phi: Vec<f64>,
    /// Φ′ = sign(σ − s_ω)√v.
    pub dphi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportAmplitude {
    pub well: f64,
    pub sigma: Vec<f64>,
    pub xi0: Vec<f64>,
}

/// (Φ″ − γ)/(2Φ′) at σ; bounded near the well when γ matches the well.
fn transport_integrand(pot: &EffectivePotential, well: f64, s: f64) -> f64 {
    let v = pot.v(s);
    if v <= 0.0 || s == well {
        return 0.0;
    }
    let sgn = if s > well { 1.0 } else { -1.0 };
    let d1 = sgn * v.sqrt();
    let d2 = sgn * pot.sqrt_v_slope(s);
    (d2 - pot.gamma) / (2.0 * d1)
}

pub fn eikonal_and_transport(pot: &EffectivePotential, well: f64, sigma: &[f64]) -> Result<(EikonalPhase, TransportAmplitude)> {
    // a wrong well shows up as Φ″ ≠ γ next to it
    let eps = 1e-3 * pot.half_length;
    for d in [-eps, eps] {
        let slope = d.signum() * pot.sqrt_v_slope(well + d);
        if (slope - pot.gamma).abs() > 0.05 * pot.gamma.max(1e-12) {
            return Err(Error::AmplitudeSign(well));
        }
    }
    let phi = agmon_distance(pot, well, sigma);
    let dphi = sigma
        .iter()
        .map(|&s| if s >= well { pot.v(s).sqrt() } else { -pot.v(s).sqrt() })
        .collect();
    let integral = cumulative_from(well, sigma, |s| transport_integrand(pot, well, s));
    let c = (pot.gamma / std::f64::consts::PI).powf(0.25);
    let xi0 = integral
        .iter()
        .map(|i| {
            let x = c * (-i).exp();
            if x.is_finite() { Ok(x) } else { Err(Error::Underflow("transport amplitude overflow".into())) }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        EikonalPhase { well, sigma: sigma.to_vec(), phi, dphi },
        TransportAmplitude { well, sigma: sigma.to_vec(), xi0 },
    ))
}

/// C^∞ step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    let f = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        f(x) / (f(x) + f(1.0 - x))
    }
}

/// 1 on [lo + ramp, hi − ramp], 0 outside (lo, hi), smooth in between.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SmoothCutoff {
    pub lo: f64,
    pub hi: f64,
    pub ramp: f64,
}

impl SmoothCutoff {
    pub fn eval(&self, x: f64) -> f64 {
        smooth_step((x - self.lo) / self.ramp) * smooth_step((self.hi - x) / self.ramp)
    }

    pub fn is_plateau(&self, x: f64) -> bool {
        x >= self.lo + self.ramp && x <= self.hi - self.ramp
    }
}

/// Transverse factor of the quasimode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transverse {
    /// √2 e^{−τ} χ(τ/T), χ = 1 on [0, ½].
    Continuum,
    /// Per column, the discrete ground state of the τ-part of the operator
    /// (curvature weight included); removes τ-consistency errors.
    DiscreteColumn,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenvalueSeries {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl EigenvalueSeries {
    pub fn new(kappa_max: f64, gamma: f64) -> Self {
        Self { mu0: -1.0, mu1: 0.0, mu2: -kappa_max, mu3: gamma }
    }

    pub fn value(&self, hbar: f64) -> f64 {
        self.mu0 + self.mu1 * hbar + self.mu2 * hbar * hbar + self.mu3 * hbar.powi(3)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WkbQuasimode {
    pub hbar: f64,
    pub transverse: Transverse,
    pub cutoff: SmoothCutoff,
    pub phase: EikonalPhase,
    pub amplitude: TransportAmplitude,
    /// Values on the operator's unknowns (σ-major).
    #[serde(skip)]
    pub values: Vec<f64>,
    /// M-norm of `values`.
    pub norm: f64,
    /// Flat discrete transverse ground level (DiscreteColumn only).
    pub transverse_level: Option<f64>,
}

/// Discrete ground state of column i's τ-operator, normalized in the
/// column's lumped weight; also returns its eigenvalue.
fn column_ground(op: &RobinOperator2D, i: usize) -> Result<(f64, Vec<f64>)> {
    let rows = op.op.rows;
    let k = &op.op.stiffness;
    let base = i * rows;
    let m: Vec<f64> = op.op.mass[base..base + rows].to_vec();
    let mut diag = vec![0.0; rows];
    let mut off = vec![0.0; rows.saturating_sub(1)];
    // τ-part only: strip the σ-couplings from the diagonal
    let sigma_part: Vec<f64> = {
        let mut s = vec![0.0; rows];
        for (e, edge) in op.op.layout.edges.iter().enumerate() {
            if edge.a == Some(i) || edge.b == Some(i) {
                for (j, v) in s.iter_mut().enumerate() {
                    *v += op.op.coupling[e * rows + j];
                }
            }
        }
        s
    };
    for j in 0..rows {
        diag[j] = (k.get(base + j, base + j) - sigma_part[j]) / m[j];
        if j + 1 < rows {
            off[j] = k.get(base + j, base + j + 1) / (m[j] * m[j + 1]).sqrt();
        }
    }
    let tri = SymTridiagonal { diag, off };
    let lam = tri.eigenvalue(0)?;
    let y = tri.eigenvector(lam);
    // unit in Σ m u²  → rescale to unit in Σ w â u² (divide out the cell)
    let cell = op.op.layout.cell[i];
    let u = y.iter().zip(&m).map(|(a, mm)| a / mm.sqrt() * cell.sqrt()).collect();
    Ok((lam, u))
}

/// Build ψ on the unknowns of a single-well (or any) 2D operator.
pub fn build_quasimode(
    pot: &EffectivePotential,
    op: &RobinOperator2D,
    well: f64,
    cutoff: SmoothCutoff,
    transverse: Transverse,
) -> Result<WkbQuasimode> {
    let layout = &op.op.layout;
    if !cutoff.is_plateau(well) {
        return Err(Error::CutoffSupport(format!("well {well} outside the cutoff plateau")));
    }
    let first = layout.sigma[0];
    let last = *layout.sigma.last().unwrap();
    if cutoff.lo < first - layout.step || cutoff.hi > last + layout.step {
        return Err(Error::CutoffSupport("cutoff support leaves the domain".into()));
    }
    let others = pot.wells.iter().filter(|&&w| {
        (-2..=2).any(|k| {
            let s = w + 2.0 * pot.half_length * k as f64;
            (s - well).abs() > 1e-9 && s > cutoff.lo && s < cutoff.hi
        })
    });
    if others.count() > 0 {
        return Err(Error::CutoffSupport("cutoff support contains a second well".into()));
    }
    let hbar = op.grid.hbar;
    let (phase, amplitude) = eikonal_and_transport(pot, well, &layout.sigma)?;
    let rows = op.op.rows;
    let tg = &op.grid.tau;
    let pref = hbar.powf(-0.25);
    let mut values = vec![0.0; op.dim()];
    let mut level = None;
    let flat: Vec<f64> = tg.nodes[..rows]
        .iter()
        .map(|&t| std::f64::consts::SQRT_2 * (-t).exp() * smooth_step(2.0 * (1.0 - t / tg.t)))
        .collect();
    if transverse == Transverse::DiscreteColumn {
        level = Some(tg.flat_ground()?.0);
    }
    for i in 0..layout.len() {
        let chi = cutoff.eval(layout.sigma[i]);
        if chi == 0.0 {
            continue;
        }
        let s = pref * (-phase.phi[i] / hbar).exp() * amplitude.xi0[i] * chi;
        let col: Vec<f64> = match transverse {
            Transverse::Continuum => flat.clone(),
            Transverse::DiscreteColumn => column_ground(op, i)?.1,
        };
        for j in 0..rows {
            values[i * rows + j] = s * col[j];
        }
    }
    let norm = crate::linalg::m_norm(&op.op.mass, &values);
    Ok(WkbQuasimode { hbar, transverse, cutoff, phase, amplitude, values, norm, transverse_level: level })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualReport {
    pub hbar: f64,
    pub mu: f64,
    /// ‖M⁻¹(K − μM)ψ‖_M / ‖ψ‖_M.
    pub residual: f64,
    /// Same norm with the e^{Φ/ħ} weight, on plateau nodes only.
    pub weighted_residual: f64,
    /// Residual restricted to the cutoff ramps.
    pub cutoff_residual: f64,
    /// Rayleigh quotient minus μ.
    pub rayleigh_gap: f64,
}

/// The series used against a quasimode: for the discrete transverse
/// profile, μ₀ is the discrete flat level instead of −1.
pub fn series_for(q: &WkbQuasimode, kappa_max: f64, gamma: f64) -> EigenvalueSeries {
    let mut s = EigenvalueSeries::new(kappa_max, gamma);
    if let Some(l) = q.transverse_level {
        s.mu0 = l;
    }
    s
}

pub fn quasimode_residual(op: &RobinOperator2D, q: &WkbQuasimode, series: &EigenvalueSeries) -> Result<ResidualReport> {
    if q.values.len() != op.dim() || q.phase.sigma.len() != op.op.layout.len() {
        return Err(Error::GridMismatch("quasimode and operator grids differ".into()));
    }
    let mu = series.value(q.hbar);
    let m = &op.op.mass;
    let kpsi = op.op.stiffness.apply(&q.values);
    let rows = op.op.rows;
    let (mut all, mut weighted, mut ramp) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..op.op.layout.len() {
        let s = op.op.layout.sigma[i];
        let w = (q.phase.phi[i] / q.hbar).exp();
        let plateau = q.cutoff.is_plateau(s);
        let chi = q.cutoff.eval(s);
        for j in 0..rows {
            let idx = i * rows + j;
            let r = kpsi[idx] - mu * m[idx] * q.values[idx];
            let term = r * r / m[idx];
            all.push(term);
            if plateau {
                weighted.push(term * w * w);
            } else if chi > 0.0 {
                ramp.push(term);
            }
        }
    }
    let nrm = q.norm;
    let sum = |v: Vec<f64>| crate::quadrature::compensated_sum(v).sqrt() / nrm;
    let rq = op.op.rayleigh(&q.values);
    Ok(ResidualReport {
        hbar: q.hbar,
        mu,
        residual: sum(all),
        weighted_residual: sum(weighted),
        cutoff_residual: sum(ramp),
        rayleigh_gap: rq - mu,
    })
}
