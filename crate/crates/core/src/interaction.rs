//! Interaction matrix of the two single-well ground states: cutoff
//! quasimodes f_r = χ_r φ_r, f_ℓ = U f_r, and the flux integrals whose sum
//! w_ℓr gives the splitting 2|w_ℓr|.

use serde::{Deserialize, Serialize};

use crate::discretization::ring_reflect;
use crate::effective1d::{predicted_splitting, EffectivePotential};
use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::linalg::m_dot;
use crate::quadrature::compensated_sum;
use crate::tubular2d::{self, assemble, Domain, RobinOperator2D, TubularSpec};
use crate::wkb::SmoothCutoff;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellPairConfig {
    /// ω_r is the circle minus the η-neighbourhood of s_ℓ.
    pub eta: f64,
}

impl Default for WellPairConfig {
    fn default() -> Self {
        Self { eta: 0.5 }
    }
}

impl WellPairConfig {
    pub fn validate(&self, profile: &CurvatureProfile) -> Result<()> {
        let (_, wl) = profile.well_pair()?;
        let bound = 0.5 * wl.s.min(profile.half_length - wl.s);
        if !(self.eta > 0.0 && self.eta < bound) {
            return Err(Error::InvalidParameter(format!("η = {} must lie in (0, {bound})", self.eta)));
        }
        Ok(())
    }

    /// ω_r as a path (s_ℓ + η − 2L, s_ℓ − η).
    pub fn omega_right(&self, profile: &CurvatureProfile) -> Result<Domain> {
        tubular2d::omega_right(profile, self.eta)
    }

    /// χ_r: 1 on ω_r minus an η-collar, 0 outside ω_r.
    pub fn cutoff_right(&self, profile: &CurvatureProfile) -> Result<SmoothCutoff> {
        let (_, wl) = profile.well_pair()?;
        let l = profile.half_length;
        Ok(SmoothCutoff { lo: wl.s + self.eta - 2.0 * l, hi: wl.s - self.eta, ramp: self.eta })
    }
}

/// f_r and f_ℓ on the full ring (σ-major, same rows as the full operator).
#[derive(Debug, Clone)]
pub struct InteractionBasis {
    pub mu_r: f64,
    pub f_r: Vec<f64>,
    pub f_l: Vec<f64>,
    /// φ_r and its reflection on the full ring (zero outside ω_r).
    pub phi_r: Vec<f64>,
    pub phi_l: Vec<f64>,
    /// ⟨f_r, f_r⟩, ⟨f_ℓ, f_r⟩ in the full operator's mass.
    pub norm_rr: f64,
    pub overlap: f64,
    pub gram_det: f64,
    pub full: RobinOperator2D,
}

pub fn build_interaction_basis(profile: &CurvatureProfile, spec: &TubularSpec, config: &WellPairConfig) -> Result<InteractionBasis> {
    if !profile.symmetric {
        return Err(Error::GridMismatch("reflection needs a symmetric profile".into()));
    }
    config.validate(profile)?;
    let omega = config.omega_right(profile)?;
    let single = tubular2d::single_well_ground(profile, spec, omega, &crate::linalg::EigenOptions::default())?;
    let op_r = single.op.as_ref().unwrap();
    let full = assemble(profile, spec, Domain::Full)?;
    let rows = full.op.rows;
    if op_r.op.rows != rows {
        return Err(Error::GridMismatch("τ-grids differ".into()));
    }
    let n = full.op.layout.n_ring;
    let chi = config.cutoff_right(profile)?;
    let mut phi_r = vec![0.0; n * rows];
    let mut f_r = vec![0.0; n * rows];
    for (node, &ring) in op_r.op.layout.ring_index.iter().enumerate() {
        let c = chi.eval(op_r.op.layout.sigma[node]);
        for j in 0..rows {
            let v = single.phi[node * rows + j];
            phi_r[ring * rows + j] = v;
            f_r[ring * rows + j] = c * v;
        }
    }
    let reflect = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for i in 0..n {
            let r = ring_reflect(i, n);
            out[r * rows..(r + 1) * rows].copy_from_slice(&x[i * rows..(i + 1) * rows]);
        }
        out
    };
    let f_l = reflect(&f_r);
    let phi_l = reflect(&phi_r);
    let m = &full.op.mass;
    let norm_rr = m_dot(m, &f_r, &f_r);
    let overlap = compensated_sum((0..m.len()).map(|i| m[i] * f_l[i] * f_r[i]));
    let gram_det = norm_rr * norm_rr - overlap * overlap;
    Ok(InteractionBasis { mu_r: single.mu, f_r, f_l, phi_r, phi_l, norm_rr, overlap, gram_det, full })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionMatrix {
    pub hbar: f64,
    /// Flux at the σ = 0 column.
    pub w_u: f64,
    /// Flux at the σ = L (≡ −L) column.
    pub w_d: f64,
    pub w_lr: f64,
    /// Same fluxes from the two-point Wronskian across the σ-edge to the
    /// right of each cut column: the exact discrete counterpart.
    pub w_u_edge: f64,
    pub w_d_edge: f64,
    /// ⟨f_ℓ, (K − μM) f_r⟩ and ⟨f_r, (K − μM) f_ℓ⟩.
    pub w_bilinear_lr: f64,
    pub w_bilinear_rl: f64,
    pub overlap: f64,
    pub splitting_estimate: f64,
    /// Leading analytic value of w_ℓr from the amplitude factors.
    pub w_analytic: f64,
}

/// ∂_σ by the 4th-order centred stencil at `node` of a path of σ-nodes.
fn centred_slope(x: &[f64], rows: usize, nodes: [usize; 4], step: f64, j: usize) -> f64 {
    let [m2, m1, p1, p2] = nodes;
    (x[m2 * rows + j] - 8.0 * x[m1 * rows + j] + 8.0 * x[p1 * rows + j] - x[p2 * rows + j]) / (12.0 * step)
}

pub fn interaction_splitting(basis: &InteractionBasis, profile: &CurvatureProfile) -> Result<InteractionMatrix> {
    let op = &basis.full;
    let rows = op.op.rows;
    let n = op.op.layout.n_ring;
    let hbar = op.grid.hbar;
    let h4 = hbar.powi(4);
    let step = op.op.layout.step;
    let tg = &op.grid.tau;
    if basis.f_r.len() != op.dim() {
        return Err(Error::GridMismatch("basis and operator differ".into()));
    }
    // column flux ħ⁴ Σ_j w_j â⁻¹ (φ_ℓ ∂φ_r − φ_r ∂φ_ℓ) at ring node c
    let flux = |c: usize| -> f64 {
        let ring = |k: i64| ((c as i64 + k).rem_euclid(n as i64)) as usize;
        let nodes = [ring(-2), ring(-1), ring(1), ring(2)];
        let kappa = op.grid.kappa_node[c];
        compensated_sum((0..rows).map(|j| {
            let a = op.grid.weight(kappa, tg.nodes[j]);
            let dr = centred_slope(&basis.phi_r, rows, nodes, step, j);
            let dl = centred_slope(&basis.phi_l, rows, nodes, step, j);
            let v = basis.phi_l[c * rows + j] * dr - basis.phi_r[c * rows + j] * dl;
            h4 * tg.weights[j] / a * v
        }))
    };
    // c_j (φ_ℓ(c) φ_r(c+1) − φ_r(c) φ_ℓ(c+1)), c_j the σ-edge coupling
    let edge_flux = |c: usize| -> f64 {
        let e = op.op.layout.edges.iter().position(|e| e.a == Some(c)).unwrap();
        let b = op.op.layout.edges[e].b.unwrap();
        compensated_sum((0..rows).map(|j| {
            let cj = op.op.coupling[e * rows + j];
            cj * (basis.phi_l[c * rows + j] * basis.phi_r[b * rows + j] - basis.phi_r[c * rows + j] * basis.phi_l[b * rows + j])
        }))
    };
    let w_u_edge = edge_flux(n / 2);
    let w_d_edge = -edge_flux(0);
    let w_u = flux(n / 2);
    let w_d = -flux(0);
    let w_lr = w_u + w_d;
    let k = &op.op.stiffness;
    let m = &op.op.mass;
    let mu = basis.mu_r;
    let bil = |x: &[f64], y: &[f64]| -> f64 {
        let ky = k.apply(y);
        compensated_sum((0..m.len()).map(|i| x[i] * (ky[i] - mu * m[i] * y[i])))
    };
    let w_bilinear_lr = bil(&basis.f_l, &basis.f_r);
    let w_bilinear_rl = bil(&basis.f_r, &basis.f_l);
    let pot = EffectivePotential::from_profile(profile);
    let pred = predicted_splitting(&pot, hbar.powi(4))?;
    Ok(InteractionMatrix {
        hbar,
        w_u,
        w_d,
        w_lr,
        w_u_edge,
        w_d_edge,
        w_bilinear_lr,
        w_bilinear_rl,
        overlap: basis.overlap,
        splitting_estimate: 2.0 * w_lr.abs(),
        w_analytic: -0.5 * pred.tubular_scaled(),
    })
}
