//! The rescaled Robin operator in tubular coordinates (σ, τ),
//!
//!   Q̂(u) = ∫∫ (ħ⁴ â⁻¹ |∂_σu|² + â |∂_τu|²) dσ dτ − ∫ |u(σ, 0)|² dσ,
//!
//! â = 1 − ħ²τκ(σ), on a σ-layout × (0, T) with Dirichlet at τ = T.
//! Assembly is form based with a lumped mass, so K is symmetric by
//! construction.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::discretization::{flux_splitting, LayeredOperator, LayoutKind, SigmaLayout};
use crate::effective1d::EffectivePotential;
use crate::error::{Error, Result};
use crate::geometry::{wrap_sigma, BoundaryCurvature, CurvatureProfile};
use crate::linalg::tridiag::SymTridiagonal;
use crate::linalg::{self, EigenOptions, SolverStats, SymBuilder};
use crate::ref1d::{interval_spectrum_exact, IntervalSpec};

/// Transverse grid recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TauSpec {
    /// n equal cells on (0, T).
    Uniform { n: usize },
    /// Cells h0·growth^k capped at h_max, rescaled to end exactly at T.
    Graded { h0: f64, growth: f64, h_max: f64 },
}

impl Default for TauSpec {
    fn default() -> Self {
        TauSpec::Graded { h0: 0.01, growth: 1.06, h_max: 0.5 }
    }
}

/// Nodes 0 = τ_0 < … < τ_n = T; τ_n is the Dirichlet node.
#[derive(Debug, Clone, Serialize)]
pub struct TauGrid {
    pub t: f64,
    pub nodes: Vec<f64>,
    /// Dual cell lengths of the unknown nodes τ_0..τ_{n−1}.
    pub weights: Vec<f64>,
}

impl TauGrid {
    pub fn new(t: f64, spec: TauSpec) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("depth T = {t}")));
        }
        let steps: Vec<f64> = match spec {
            TauSpec::Uniform { n } => {
                if n < 4 {
                    return Err(Error::InvalidParameter("n_tau must be ≥ 4".into()));
                }
                vec![t / n as f64; n]
            }
            TauSpec::Graded { h0, growth, h_max } => {
                if !(h0 > 0.0 && growth >= 1.0 && h_max >= h0) {
                    return Err(Error::InvalidParameter("graded τ-grid needs 0 < h0 ≤ h_max, growth ≥ 1".into()));
                }
                let mut v = Vec::new();
                let mut sum = 0.0;
                let mut h = h0;
                while sum < t {
                    v.push(h.min(h_max));
                    sum += h.min(h_max);
                    h *= growth;
                }
                if v.len() < 4 {
                    return Err(Error::InvalidParameter("τ-grid has fewer than 4 cells".into()));
                }
                let s = t / sum;
                v.iter().map(|x| x * s).collect()
            }
        };
        let mut nodes = Vec::with_capacity(steps.len() + 1);
        nodes.push(0.0);
        for h in &steps {
            nodes.push(nodes.last().unwrap() + h);
        }
        *nodes.last_mut().unwrap() = t;
        let n = steps.len();
        let weights = (0..n)
            .map(|j| if j == 0 { 0.5 * steps[0] } else { 0.5 * (steps[j - 1] + steps[j]) })
            .collect();
        Ok(Self { t, nodes, weights })
    }

    pub fn rows(&self) -> usize {
        self.weights.len()
    }

    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    /// Same recipe with every cell halved.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len());
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.t);
        let n = nodes.len() - 1;
        let weights = (0..n)
            .map(|j| if j == 0 { 0.5 * (nodes[1] - nodes[0]) } else { 0.5 * (nodes[j + 1] - nodes[j - 1]) })
            .collect();
        Self { t: self.t, nodes, weights }
    }

    /// Lowest eigenvalue of the flat transverse problem (â ≡ 1) on this grid,
    /// with its ground vector normalized in the lumped inner product.
    pub fn flat_ground(&self) -> Result<(f64, Vec<f64>)> {
        let n = self.rows();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for j in 0..n {
            let hj = self.step(j);
            diag[j] += 1.0 / hj;
            if j > 0 {
                diag[j] += 1.0 / self.step(j - 1);
            }
            if j + 1 < n {
                off[j] = -1.0 / hj;
            }
        }
        diag[0] -= 1.0;
        // symmetric scaling by W^{-1/2}
        for j in 0..n {
            diag[j] /= self.weights[j];
            if j + 1 < n {
                off[j] /= (self.weights[j] * self.weights[j + 1]).sqrt();
            }
        }
        let tri = SymTridiagonal { diag, off };
        let lam = tri.eigenvalue(0)?;
        let y = tri.eigenvector(lam);
        let u = y.iter().zip(&self.weights).map(|(a, w)| a / w.sqrt()).collect();
        Ok((lam, u))
    }

    /// Discrete minus exact lowest eigenvalue of the flat transverse problem.
    pub fn transverse_defect(&self) -> Result<f64> {
        let exact = interval_spectrum_exact(IntervalSpec { t: self.t }, 1)?.eigenvalues[0];
        Ok(self.flat_ground()?.0 - exact)
    }
}

/// Grid and truncation parameters of a 2D solve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubularSpec {
    pub hbar: f64,
    /// Ring size (number of σ nodes on the full circle).
    pub n_sigma: usize,
    #[serde(default)]
    pub tau: TauSpec,
    /// Truncation constant D; T = D/ħ unless the weight floor caps it.
    pub depth: f64,
    /// Lower bound kept for â = 1 − ħ²τκ on the grid.
    #[serde(default = "default_a_min")]
    pub a_min: f64,
    /// Explicit T, bypassing D (still checked against the weight bounds).
    #[serde(default)]
    pub t_override: Option<f64>,
}

fn default_a_min() -> f64 {
    0.5
}

impl TubularSpec {
    pub fn new(hbar: f64, n_sigma: usize, depth: f64) -> Self {
        Self { hbar, n_sigma, tau: TauSpec::default(), depth, a_min: 0.5, t_override: None }
    }

    /// T = D/ħ, capped so that a_min ≤ â ≤ 2 − a_min on the grid.
    pub fn depth_for(&self, curv: &dyn BoundaryCurvature) -> Result<f64> {
        if !(self.hbar > 0.0 && self.hbar < 1.0) {
            return Err(Error::InvalidParameter(format!("ħ = {} must lie in (0, 1)", self.hbar)));
        }
        if !(self.a_min > 0.0 && self.a_min < 1.0) {
            return Err(Error::InvalidParameter(format!("a_min = {} must lie in (0, 1)", self.a_min)));
        }
        let h2 = self.hbar * self.hbar;
        let a_max = 2.0 - self.a_min;
        let mut cap = f64::INFINITY;
        if curv.kappa_sup() > 0.0 {
            cap = cap.min((1.0 - self.a_min) / (h2 * curv.kappa_sup()));
        }
        if curv.kappa_inf() < 0.0 {
            cap = cap.min((a_max - 1.0) / (h2 * -curv.kappa_inf()));
        }
        let t = match self.t_override {
            Some(t) => {
                if t > cap * (1.0 + 1e-12) {
                    return Err(Error::WeightOutOfRange { sigma: f64::NAN, tau: t, weight: 1.0 - h2 * t * curv.kappa_sup() });
                }
                t
            }
            None => {
                if !(self.depth > 0.0) {
                    return Err(Error::InvalidParameter("D must be positive".into()));
                }
                let t = (self.depth / self.hbar).min(cap);
                if t < self.depth / self.hbar {
                    debug!("T capped at {t:.3} (D/ħ = {:.3})", self.depth / self.hbar);
                }
                t
            }
        };
        if t <= 1.0 {
            return Err(Error::InvalidParameter(format!("T = {t} leaves no bound transverse mode")));
        }
        Ok(t)
    }
}

/// Which part of the boundary the σ-unknowns cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Full,
    /// Dirichlet path (lo, hi), path coordinates.
    Interval { lo: f64, hi: f64 },
    EvenHalf,
    OddHalf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TubularGrid {
    pub hbar: f64,
    pub layout: SigmaLayout,
    pub tau: TauGrid,
    pub kappa_node: Vec<f64>,
    pub kappa_edge: Vec<f64>,
}

impl TubularGrid {
    pub fn weight(&self, kappa: f64, tau: f64) -> f64 {
        1.0 - self.hbar * self.hbar * tau * kappa
    }
}

#[derive(Debug, Clone)]
pub struct RobinOperator2D {
    pub grid: TubularGrid,
    pub op: LayeredOperator,
    pub domain: Domain,
}

impl RobinOperator2D {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

fn layout_for(domain: Domain, l: f64, n: usize) -> Result<SigmaLayout> {
    match domain {
        Domain::Full => SigmaLayout::periodic(l, n),
        Domain::Interval { lo, hi } => SigmaLayout::interval(l, n, lo, hi),
        Domain::EvenHalf => SigmaLayout::even_half(l, n),
        Domain::OddHalf => SigmaLayout::odd_half(l, n),
    }
}

pub fn assemble(curv: &dyn BoundaryCurvature, spec: &TubularSpec, domain: Domain) -> Result<RobinOperator2D> {
    let t = spec.depth_for(curv)?;
    let tau = TauGrid::new(t, spec.tau)?;
    assemble_on(curv, spec, domain, tau)
}

/// Assembly on a given transverse grid.
pub fn assemble_on(curv: &dyn BoundaryCurvature, spec: &TubularSpec, domain: Domain, tau: TauGrid) -> Result<RobinOperator2D> {
    let l = curv.half_length();
    let layout = layout_for(domain, l, spec.n_sigma)?;
    let hbar = spec.hbar;
    let h2 = hbar * hbar;
    let h4 = h2 * h2;
    let rows = tau.rows();
    let n = layout.len();
    let kappa_node: Vec<f64> = layout.sigma.iter().map(|&s| curv.kappa(wrap_sigma(s, l))).collect();
    let kappa_edge: Vec<f64> = layout.edges.iter().map(|e| curv.kappa(e.mid)).collect();
    let grid = TubularGrid { hbar, layout, tau, kappa_node, kappa_edge };
    let a_lo = spec.a_min * (1.0 - 1e-12);
    let a_hi = (2.0 - spec.a_min) * (1.0 + 1e-12);
    let check = |sigma: f64, tau: f64, a: f64| -> Result<()> {
        if a < a_lo || a > a_hi {
            return Err(Error::WeightOutOfRange { sigma, tau, weight: a });
        }
        Ok(())
    };
    let layout = &grid.layout;
    let tg = &grid.tau;
    let mut b = SymBuilder::with_capacity(n * rows, n * rows * 5);
    let mut mass = vec![0.0; n * rows];
    for i in 0..n {
        let k = grid.kappa_node[i];
        let c = layout.cell[i];
        for j in 0..rows {
            let a = grid.weight(k, tg.nodes[j]);
            check(layout.sigma[i], tg.nodes[j], a)?;
            mass[i * rows + j] = c * tg.weights[j] * a;
            let mid = 0.5 * (tg.nodes[j] + tg.nodes[j + 1]);
            let coef = c * grid.weight(k, mid) / tg.step(j);
            if j + 1 < rows {
                b.add_edge(i * rows + j, i * rows + j + 1, coef);
            } else {
                b.add_diag(i * rows + j, coef);
            }
        }
        b.add_diag(i * rows, -c);
    }
    let mut coupling = Vec::with_capacity(layout.edges.len() * rows);
    for (e, edge) in layout.edges.iter().enumerate() {
        let k = grid.kappa_edge[e];
        for j in 0..rows {
            let a = grid.weight(k, tg.nodes[j]);
            check(edge.mid, tg.nodes[j], a)?;
            let c = h4 * tg.weights[j] / (a * layout.step);
            match (edge.a, edge.b) {
                (Some(p), Some(q)) => b.add_edge(p * rows + j, q * rows + j, c),
                (Some(p), None) | (None, Some(p)) => b.add_diag(p * rows + j, c),
                (None, None) => {}
            }
            coupling.push(c);
        }
    }
    let op = LayeredOperator { layout: grid.layout.clone(), rows, stiffness: b.build(), mass, coupling };
    Ok(RobinOperator2D { grid, op, domain })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSolveResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

/// Shift placed below the expected ground level −1 − κ_max ħ².
pub fn default_shift(op: &RobinOperator2D) -> f64 {
    let kmax = op.grid.kappa_node.iter().cloned().fold(f64::MIN, f64::max).max(0.0);
    -1.0 - kmax * op.grid.hbar.powi(2) - 0.05
}

pub fn solve_lowest(op: &RobinOperator2D, k: usize, opts: &EigenOptions) -> Result<EigenSolveResult> {
    if k == 0 || k > 64 {
        return Err(Error::InvalidParameter(format!("k = {k} must lie in 1..=64")));
    }
    let o = &op.op;
    let (eigenvalues, eigenvectors, stats) = if opts.dense_fallback && o.dim() <= opts.dense_limit {
        linalg::dense_lowest(&o.stiffness, &o.mass, k)?
    } else {
        linalg::lowest_eigenpairs(&o.stiffness, &o.mass, &o.ordering(), k, default_shift(op), opts)?
    };
    info!("2D solve: n = {}, λ₁ = {:.12}, {} iterations", o.dim(), eigenvalues[0], stats.iterations);
    Ok(EigenSolveResult { eigenvalues, eigenvectors, stats })
}

/// Number of eigenvalues of the 2D operator below t (Sylvester inertia).
pub fn count_below(op: &RobinOperator2D, t: f64) -> Result<usize> {
    linalg::count_below(&op.op.stiffness, &op.op.mass, &op.op.ordering(), t)
}

/// Agmon log-weight Φ(σ)/ħ + τ for sector ground-state iterations.
fn sector_weight(op: &RobinOperator2D, pot: &EffectivePotential, well: f64) -> Vec<f64> {
    let phi = crate::wkb::agmon_distance(pot, well, &op.grid.layout.sigma);
    let rows = op.op.rows;
    let mut g = Vec::with_capacity(op.dim());
    for p in phi {
        for j in 0..rows {
            g.push(p / op.grid.hbar + op.grid.tau.nodes[j]);
        }
    }
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubletResult {
    pub hbar: f64,
    pub mu_even: f64,
    pub mu_odd: f64,
    /// μ̂₂ − μ̂₁ from the flux identity.
    pub splitting: f64,
    pub upper: f64,
    pub lower: f64,
    pub t: f64,
    pub dim: usize,
    /// Discrete minus exact transverse ground level on the τ-grid used.
    pub transverse_defect: f64,
    #[serde(skip)]
    pub even: Option<(RobinOperator2D, Vec<f64>)>,
    #[serde(skip)]
    pub odd: Option<(RobinOperator2D, Vec<f64>)>,
}

/// Ground doublet of a symmetric profile from the even and odd half sectors.
pub fn solve_doublet(profile: &CurvatureProfile, spec: &TubularSpec, keep_vectors: bool) -> Result<DoubletResult> {
    if !profile.symmetric {
        return Err(Error::InvalidParameter("doublet sectors need a symmetric profile".into()));
    }
    let (_, wl) = profile.well_pair()?;
    let pot = EffectivePotential::from_profile(profile);
    let even = assemble(profile, spec, Domain::EvenHalf)?;
    let odd = assemble(profile, spec, Domain::OddHalf)?;
    let shift = default_shift(&even);
    let ge = sector_weight(&even, &pot, wl.s);
    let go = sector_weight(&odd, &pot, wl.s);
    let se = linalg::ground_state(&even.op.stiffness, &even.op.mass, &even.op.ordering(), &ge, shift, 4000)?;
    let so = linalg::ground_state(&odd.op.stiffness, &odd.op.mass, &odd.op.ordering(), &go, shift, 4000)?;
    let f = flux_splitting(&even.op, &se.vector, &odd.op, &so.vector)?;
    info!(
        "doublet ħ = {}: μ̂₊ = {:.12}, μ̂₋ − μ̂₊ = {:.6e} (direct {:.3e})",
        spec.hbar,
        se.value,
        f.splitting,
        so.value - se.value
    );
    let t = even.grid.tau.t;
    let defect = even.grid.tau.transverse_defect()?;
    let dim = even.dim() + odd.dim();
    Ok(DoubletResult {
        hbar: spec.hbar,
        mu_even: se.value,
        mu_odd: so.value,
        splitting: f.splitting,
        upper: f.upper,
        lower: f.lower,
        t,
        dim,
        transverse_defect: defect,
        even: keep_vectors.then_some((even, se.vector)),
        odd: keep_vectors.then_some((odd, so.vector)),
    })
}

/// The single-well domain ω_r: the circle minus an η-neighbourhood of s_ℓ,
/// as a path (s_ℓ + η − 2L, s_ℓ − η).
pub fn omega_right(profile: &CurvatureProfile, eta: f64) -> Result<Domain> {
    let (_, wl) = profile.well_pair()?;
    let l = profile.half_length;
    Ok(Domain::Interval { lo: wl.s + eta - 2.0 * l, hi: wl.s - eta })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleWellGround {
    pub mu: f64,
    pub mu2: f64,
    pub gap: f64,
    #[serde(skip)]
    pub phi: Vec<f64>,
    #[serde(skip)]
    pub op: Option<RobinOperator2D>,
}

/// The well inside an interval domain, in the domain's path coordinate.
pub fn well_in(profile: &CurvatureProfile, lo: f64, hi: f64) -> Result<f64> {
    let l = profile.half_length;
    let mut found = Vec::new();
    for w in &profile.wells {
        for k in -2..=2 {
            let s = w.s + 2.0 * l * k as f64;
            if s > lo && s < hi {
                found.push(s);
            }
        }
    }
    if found.len() != 1 {
        return Err(Error::DomainWells(found.len()));
    }
    Ok(found[0])
}

/// Lowest two levels on a single-well domain. The ground state comes from
/// Agmon-gauged inverse iteration, so its tails are accurate relative to
/// their size; it is positive.
pub fn single_well_ground(profile: &CurvatureProfile, spec: &TubularSpec, omega: Domain, opts: &EigenOptions) -> Result<SingleWellGround> {
    let Domain::Interval { lo, hi } = omega else {
        return Err(Error::InvalidParameter("single-well domain must be an interval".into()));
    };
    let well = well_in(profile, lo, hi)?;
    let op = assemble(profile, spec, omega)?;
    let pot = EffectivePotential::from_profile(profile);
    let g = sector_weight(&op, &pot, well);
    let gs = linalg::ground_state(&op.op.stiffness, &op.op.mass, &op.op.ordering(), &g, default_shift(&op), 4000)?;
    let res = solve_lowest(&op, 2, opts)?;
    let mu = gs.value;
    let mu2 = res.eigenvalues[1];
    Ok(SingleWellGround { mu, mu2, gap: mu2 - mu, phi: gs.vector, op: Some(op) })
}

/// Fitted decay of a ground vector: normal slope of log u at a column and
/// the tangential relation −ħ log f ≈ slope·Φ + c.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub normal_slope: f64,
    pub tangential_slope: f64,
    pub tangential_r2: f64,
    pub fit_points: usize,
}

/// `phi` holds Φ at the σ-nodes; `window` selects σ-nodes whose Φ lies in
/// [lo, hi]; the τ-fit uses nodes with τ in [1, min(T/2, 8)].
pub fn decay_diagnostics(op: &RobinOperator2D, u: &[f64], column: usize, phi: &[f64], window: (f64, f64)) -> Result<DecayReport> {
    let rows = op.op.rows;
    let tg = &op.grid.tau;
    let col = op.op.column(u, column);
    let tmax = (0.5 * tg.t).min(8.0);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..rows {
        let t = tg.nodes[j];
        if (1.0..=tmax).contains(&t) && col[j].abs() > 1e-14 * col[0].abs() {
            xs.push(t);
            ys.push(col[j].abs().ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Underflow("too few τ points above the noise floor".into()));
    }
    let normal = crate::fit::linear_fit(&xs, &ys).slope;
    // f(σ) = ∫ u(σ, τ) w dτ
    let f: Vec<f64> = (0..op.op.layout.len())
        .map(|i| op.op.column(u, i).iter().zip(&tg.weights).map(|(a, w)| a * w).sum::<f64>())
        .collect();
    let fmax = f.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let (mut px, mut py) = (Vec::new(), Vec::new());
    for i in 0..f.len() {
        if phi[i] >= window.0 && phi[i] <= window.1 && f[i].abs() > 1e-14 * fmax {
            px.push(phi[i]);
            py.push(-op.grid.hbar * f[i].abs().ln());
        }
    }
    if px.len() < 3 {
        return Err(Error::Underflow("too few σ points above the noise floor".into()));
    }
    let fit = crate::fit::linear_fit(&px, &py);
    Ok(DecayReport { normal_slope: normal, tangential_slope: fit.slope, tangential_r2: fit.r_squared, fit_points: px.len() })
}

/// u∘(σ → −σ) on the full ring.
pub fn reflect_full(op: &RobinOperator2D, u: &[f64]) -> Result<Vec<f64>> {
    if op.op.layout.kind != LayoutKind::Periodic {
        return Err(Error::GridMismatch("reflection needs the full ring".into()));
    }
    let n = op.op.layout.n_ring;
    let rows = op.op.rows;
    let mut out = vec![0.0; u.len()];
    for i in 0..n {
        let r = crate::discretization::ring_reflect(i, n);
        out[r * rows..(r + 1) * rows].copy_from_slice(&u[i * rows..(i + 1) * rows]);
    }
    Ok(out)
}
