//! Batch experiments driven by a JSON config: one row of numbers per ladder
//! point, written as CSV plus a JSON metadata file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective1d::{agmon_actions, fd_doublet_extrapolated, predicted_splitting, EffectivePotential};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::geometry::{profile_from_spec, CurvatureProfile, CurveSpec};
use crate::interaction::{build_interaction_basis, interaction_splitting, WellPairConfig};
use crate::linalg::EigenOptions;
use crate::tubular2d::{self, assemble, decay_diagnostics, solve_doublet, Domain, TauSpec, TubularSpec};
use crate::weyl::{counting_check, Threshold};
use crate::wkb::{agmon_distance, build_quasimode, quasimode_residual, series_for, SmoothCutoff, Transverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Splitting,
    SingleWell,
    WkbResidual,
    Weyl,
    Decay,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Splitting => "splitting",
            ExperimentKind::SingleWell => "single-well",
            ExperimentKind::WkbResidual => "wkb-residual",
            ExperimentKind::Weyl => "weyl",
            ExperimentKind::Decay => "decay",
        }
    }

    /// CSV header. The ladder variable is ħ except for `weyl`, where it is h.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Splitting => &[
                "hbar",
                "mu_1",
                "series_ratio",
                "split_2d",
                "split_eff1d",
                "split_formula",
                "split_interaction",
                "ratio_2d_eff1d",
                "ratio_formula_eff1d",
                "ratio_interaction_2d",
            ],
            ExperimentKind::SingleWell => &["hbar", "mu_1", "mu_2", "gap", "gap_ratio", "series_ratio"],
            ExperimentKind::WkbResidual => {
                &["hbar", "mu_series", "residual", "weighted_residual", "cutoff_residual", "rayleigh_gap", "norm"]
            }
            ExperimentKind::Weyl => &[
                "h",
                "lambda",
                "negative_count",
                "negative_predicted",
                "negative_rel_error",
                "e",
                "low_lying_count",
                "low_lying_predicted",
                "low_lying_difference",
            ],
            ExperimentKind::Decay => &["hbar", "normal_slope", "tangential_slope", "tangential_r2", "fit_points"],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Arc-length table size.
    pub n_table: usize,
    /// Samples of the curvature profile.
    pub n_profile: usize,
    /// σ nodes of the 2D ring.
    pub n_sigma: usize,
    /// Nodes of the coarse 1D grid (Richardson partner is 2·n_s).
    pub n_s: usize,
    pub tau: TauSpec,
    /// D = depth_factor · S.
    pub depth_factor: f64,
    pub a_min: f64,
    /// Depth used by the quasimode runs.
    pub wkb_depth: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_table: 512,
            n_profile: 2048,
            n_sigma: 1024,
            n_s: 2048,
            tau: TauSpec::default(),
            depth_factor: 1.5,
            a_min: 0.5,
            wkb_depth: 12.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffConfig {
    pub eta: f64,
    /// Quasimode cutoff: plateau s_r ± (half_width − ramp), support s_r ± half_width.
    pub wkb_half_width: f64,
    pub wkb_ramp: f64,
    /// Extra σ beyond the cutoff support kept in the quasimode domain.
    pub wkb_margin: f64,
    pub transverse: Transverse,
    /// Φ-window of the tangential fit, as fractions of S/2.
    pub decay_window: [f64; 2],
    pub weyl_lambda: f64,
    pub weyl_e: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self {
            eta: 0.5,
            wkb_half_width: 1.5,
            wkb_ramp: 0.6,
            wkb_margin: 0.1,
            transverse: Transverse::DiscreteColumn,
            decay_window: [0.2, 0.8],
            weyl_lambda: 0.5,
            weyl_e: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Keep wall-clock timings out of every output file.
    pub deterministic: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, deterministic: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub curve: CurveSpec,
    pub experiment: ExperimentKind,
    /// ħ values (h values for `weyl`), strictly decreasing.
    pub ladder: Vec<f64>,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub cutoffs: CutoffConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that need no curve.
    fn check_parameters(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ladder.is_empty() {
            return bad("ladder is empty".into());
        }
        if self.ladder.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return bad(format!("ladder values must lie in (0, 1): {:?}", self.ladder));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("ladder must be strictly decreasing: {:?}", self.ladder));
        }
        let g = &self.grids;
        if g.n_table < 16 || g.n_profile < 64 {
            return bad("n_table ≥ 16 and n_profile ≥ 64 required".into());
        }
        if g.n_sigma < 64 || g.n_sigma % 4 != 0 {
            return bad(format!("n_sigma = {} must be a multiple of 4, at least 64", g.n_sigma));
        }
        if g.n_s < 256 || g.n_s % 4 != 0 {
            return bad(format!("n_s = {} must be a multiple of 4, at least 256", g.n_s));
        }
        if !(g.depth_factor > 0.0) || !(g.wkb_depth > 1.0) {
            return bad("depth_factor > 0 and wkb_depth > 1 required".into());
        }
        if !(g.a_min > 0.0 && g.a_min < 1.0) {
            return bad(format!("a_min = {} must lie in (0, 1)", g.a_min));
        }
        let c = &self.cutoffs;
        if !(c.wkb_ramp > 0.0 && c.wkb_half_width > c.wkb_ramp && c.wkb_margin >= 0.0) {
            return bad("need 0 < wkb_ramp < wkb_half_width and wkb_margin ≥ 0".into());
        }
        let [w0, w1] = c.decay_window;
        if !(0.0 <= w0 && w0 < w1 && w1 <= 1.0) {
            return bad(format!("decay_window {:?} must satisfy 0 ≤ lo < hi ≤ 1", c.decay_window));
        }
        if !(c.weyl_lambda > 0.0 && c.weyl_lambda < 1.0) {
            return bad(format!("weyl_lambda = {} must lie in (0, 1)", c.weyl_lambda));
        }
        Ok(())
    }

    /// Full validation; builds the curvature profile.
    pub fn validate(&self) -> Result<CurvatureProfile> {
        self.check_parameters()?;
        let profile = profile_from_spec(&self.curve, self.grids.n_table, self.grids.n_profile)?;
        let needs_pair = matches!(self.experiment, ExperimentKind::Splitting | ExperimentKind::SingleWell | ExperimentKind::Decay);
        if needs_pair {
            if !profile.symmetric || profile.wells.len() != 2 {
                return Err(Error::Config(format!("{} needs a symmetric double-well curve", self.experiment.name())));
            }
            WellPairConfig { eta: self.cutoffs.eta }.validate(&profile)?;
        }
        if self.experiment == ExperimentKind::WkbResidual {
            let l = profile.half_length;
            if self.cutoffs.wkb_half_width + self.cutoffs.wkb_margin >= l {
                return Err(Error::Config("quasimode domain wraps around the circle".into()));
            }
        }
        Ok(profile)
    }
}

/// One ladder point.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub values: Vec<f64>,
    pub summary: String,
    #[serde(skip)]
    pub seconds: f64,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    profile: &'a CurvatureProfile,
    pot: EffectivePotential,
    action: f64,
    opts: EigenOptions,
}

impl Context<'_> {
    fn spec(&self, hbar: f64) -> TubularSpec {
        let g = &self.config.grids;
        let mut s = TubularSpec::new(hbar, g.n_sigma, g.depth_factor * self.action);
        s.tau = g.tau;
        s.a_min = g.a_min;
        s
    }

    fn series_ratio(&self, hbar: f64, mu: f64) -> f64 {
        (mu + 1.0 + self.profile.kappa_max * hbar * hbar) / hbar.powi(3)
    }
}

fn splitting_row(ctx: &Context, hbar: f64) -> Result<Row> {
    let spec = ctx.spec(hbar);
    let d = solve_doublet(ctx.profile, &spec, false)?;
    let mu = d.mu_even - d.transverse_defect;
    let eff = fd_doublet_extrapolated(&ctx.pot, hbar, ctx.config.grids.n_s)?;
    let pred = predicted_splitting(&ctx.pot, hbar.powi(4))?;
    let basis = build_interaction_basis(ctx.profile, &spec, &WellPairConfig { eta: ctx.config.cutoffs.eta })?;
    let w = interaction_splitting(&basis, ctx.profile)?;
    let r_2d = d.splitting / (hbar * hbar * eff.splitting);
    let r_formula = pred.circle_scaled() / eff.splitting;
    let r_int = w.splitting_estimate / d.splitting;
    Ok(Row {
        values: vec![
            hbar,
            mu,
            ctx.series_ratio(hbar, mu),
            d.splitting,
            eff.splitting,
            pred.circle_scaled(),
            w.splitting_estimate,
            r_2d,
            r_formula,
            r_int,
        ],
        summary: format!(
            "ħ = {hbar}: split_2d = {:.6e}, 2d/eff1d = {r_2d:.5}, formula/eff1d = {r_formula:.5}, interaction/2d = {r_int:.5}",
            d.splitting
        ),
        seconds: 0.0,
    })
}

fn single_well_row(ctx: &Context, hbar: f64) -> Result<Row> {
    let spec = ctx.spec(hbar);
    let omega = WellPairConfig { eta: ctx.config.cutoffs.eta }.omega_right(ctx.profile)?;
    let g = tubular2d::single_well_ground(ctx.profile, &spec, omega, &ctx.opts)?;
    let defect = assemble(ctx.profile, &spec, omega)?.grid.tau.transverse_defect()?;
    let mu = g.mu - defect;
    // harmonic approximation of the gap: 2γħ³
    let gap_ratio = g.gap / (2.0 * ctx.profile.gamma * hbar.powi(3));
    Ok(Row {
        values: vec![hbar, mu, g.mu2 - defect, g.gap, gap_ratio, ctx.series_ratio(hbar, mu)],
        summary: format!("ħ = {hbar}: μ̂₁ = {mu:.12}, gap/(2γħ³) = {gap_ratio:.5}"),
        seconds: 0.0,
    })
}

fn wkb_row(ctx: &Context, hbar: f64) -> Result<Row> {
    let c = &ctx.config.cutoffs;
    let sr = ctx.pot.wells[0];
    let mut spec = ctx.spec(hbar);
    spec.depth = ctx.config.grids.wkb_depth * hbar;
    let reach = c.wkb_half_width + c.wkb_margin;
    let op = assemble(ctx.profile, &spec, Domain::Interval { lo: sr - reach, hi: sr + reach })?;
    let cut = SmoothCutoff { lo: sr - c.wkb_half_width, hi: sr + c.wkb_half_width, ramp: c.wkb_ramp };
    let q = build_quasimode(&ctx.pot, &op, sr, cut, c.transverse)?;
    let series = series_for(&q, ctx.profile.kappa_max, ctx.profile.gamma);
    let r = quasimode_residual(&op, &q, &series)?;
    Ok(Row {
        values: vec![hbar, r.mu, r.residual, r.weighted_residual, r.cutoff_residual, r.rayleigh_gap, q.norm],
        summary: format!("ħ = {hbar}: residual = {:.6e}, residual/ħ⁴ = {:.4}", r.residual, r.residual / hbar.powi(4)),
        seconds: 0.0,
    })
}

fn weyl_row(ctx: &Context, h: f64) -> Result<Row> {
    let c = &ctx.config.cutoffs;
    let spec = ctx.spec(h.powf(0.25));
    let (neg, low) = rayon::join(
        || counting_check(ctx.profile, h, Threshold::Negative { lambda: c.weyl_lambda }, &spec),
        || counting_check(ctx.profile, h, Threshold::LowLying { e: c.weyl_e }, &spec),
    );
    let (neg, low) = (neg?, low?);
    let diff = low.observed_count as f64 - low.predicted;
    Ok(Row {
        values: vec![
            h,
            c.weyl_lambda,
            neg.observed_count as f64,
            neg.predicted,
            neg.relative_error,
            c.weyl_e,
            low.observed_count as f64,
            low.predicted,
            diff,
        ],
        summary: format!(
            "h = {h}: N(−Λh) = {} (predicted {:.3}), N(−h + Eh^{{3/2}}) = {} (predicted {:.3})",
            neg.observed_count, neg.predicted, low.observed_count, low.predicted
        ),
        seconds: 0.0,
    })
}

fn decay_row(ctx: &Context, hbar: f64) -> Result<Row> {
    let spec = ctx.spec(hbar);
    let d = solve_doublet(ctx.profile, &spec, true)?;
    let (op, u) = d.even.ok_or_else(|| Error::InvalidParameter("doublet vectors missing".into()))?;
    let (_, wl) = ctx.profile.well_pair()?;
    let sigma = &op.op.layout.sigma;
    let phi = agmon_distance(&ctx.pot, wl.s, sigma);
    let column = (0..sigma.len())
        .min_by(|&a, &b| (sigma[a] - wl.s).abs().total_cmp(&(sigma[b] - wl.s).abs()))
        .ok_or_else(|| Error::InvalidParameter("empty σ layout".into()))?;
    let [w0, w1] = ctx.config.cutoffs.decay_window;
    let half = 0.5 * ctx.action;
    let r = decay_diagnostics(&op, &u, column, &phi, (w0 * half, w1 * half))?;
    Ok(Row {
        values: vec![hbar, r.normal_slope, r.tangential_slope, r.tangential_r2, r.fit_points as f64],
        summary: format!("ħ = {hbar}: normal slope {:.5}, tangential slope {:.5}", r.normal_slope, r.tangential_slope),
        seconds: 0.0,
    })
}

/// Log–log slope of the residual column over the ladder (wkb-residual).
pub fn residual_slope(rows: &[Row]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let x: Vec<f64> = rows.iter().map(|r| r.values[0].ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.values[2].ln()).collect();
    Some(linear_fit(&x, &y).slope)
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub version: &'static str,
    pub columns: Vec<&'static str>,
    pub rows_written: usize,
    pub status: String,
    pub error: Option<String>,
    pub residual_slope: Option<f64>,
    /// Seconds per ladder point and in total; null in deterministic mode.
    pub timings: Option<Timings>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub points: Vec<f64>,
    pub total: f64,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub rows: Vec<Row>,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// 17 significant digits: enough to round-trip any f64.
pub fn format_field(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Runs every ladder point (in parallel on the current rayon pool), then
/// writes the rows in ladder order. Rows up to the first failure are
/// written before the error is returned.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path, opts: &EigenOptions, mut on_row: impl FnMut(&Row)) -> Result<RunOutcome> {
    let profile = config.validate()?;
    let pot = EffectivePotential::from_profile(&profile);
    let action = if profile.wells.len() == 2 { agmon_actions(&pot)?.s } else { profile.half_length };
    let ctx = Context { config, profile: &profile, pot, action, opts: opts.clone() };
    let kind = config.experiment;
    let start = Instant::now();
    let results: Vec<Result<Row>> = config
        .ladder
        .par_iter()
        .map(|&x| {
            let t = Instant::now();
            let row = match kind {
                ExperimentKind::Splitting => splitting_row(&ctx, x),
                ExperimentKind::SingleWell => single_well_row(&ctx, x),
                ExperimentKind::WkbResidual => wkb_row(&ctx, x),
                ExperimentKind::Weyl => weyl_row(&ctx, x),
                ExperimentKind::Decay => decay_row(&ctx, x),
            };
            row.map(|mut r| {
                r.seconds = t.elapsed().as_secs_f64();
                r
            })
        })
        .collect();
    let total = start.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", kind.name()));
    let json_path = out_dir.join(format!("{}.json", kind.name()));
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&csv_path)?;
    writer.write_record(kind.columns())?;
    let mut rows = Vec::new();
    let mut failure = None;
    for (x, r) in config.ladder.iter().zip(results) {
        match r {
            Ok(row) => {
                writer.write_record(row.values.iter().map(|v| format_field(*v)))?;
                writer.flush()?;
                info!("{} ({:.1} s)", row.summary, row.seconds);
                on_row(&row);
                rows.push(row);
            }
            Err(e) => {
                warn!("ladder point {x} failed: {e}");
                failure = Some(e);
                break;
            }
        }
    }
    writer.flush()?;
    drop(writer);

    let meta = Metadata {
        experiment: kind.name(),
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION"),
        columns: kind.columns().to_vec(),
        rows_written: rows.len(),
        status: if failure.is_some() { "failed".into() } else { "ok".into() },
        error: failure.as_ref().map(|e| e.to_string()),
        residual_slope: if kind == ExperimentKind::WkbResidual { residual_slope(&rows) } else { None },
        timings: (!config.output.deterministic).then(|| Timings { points: rows.iter().map(|r| r.seconds).collect(), total }),
    };
    let mut f = fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunOutcome { rows, csv_path, json_path }),
    }
}
