use std::f64::consts::PI;

use curvebound::effective1d::{agmon_actions, EffectivePotential};
use curvebound::fit::loglog_slope;
use curvebound::geometry::{profile_from_spec, CurvatureProfile, CurveSpec};
use curvebound::tubular2d::{assemble, Domain, RobinOperator2D, TubularSpec};
use curvebound::wkb::*;

fn ellipse() -> (CurvatureProfile, EffectivePotential) {
    let p = profile_from_spec(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 512, 2048).unwrap();
    let pot = EffectivePotential::from_profile(&p);
    (p, pot)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

fn single_well(p: &CurvatureProfile, sr: f64, hbar: f64, n_sigma: usize) -> RobinOperator2D {
    let spec = TubularSpec::new(hbar, n_sigma, 12.0 * hbar);
    assemble(p, &spec, Domain::Interval { lo: sr - 1.6, hi: sr + 1.6 }).unwrap()
}

#[test]
fn phase_and_amplitude_at_the_well() {
    let (_, pot) = ellipse();
    let sr = pot.wells[0];
    let sigma = grid(sr - 1.0, sr + 1.0, 400);
    let (phase, amp) = eikonal_and_transport(&pot, sr, &sigma).unwrap();
    let i = 200;
    assert!((sigma[i] - sr).abs() < 1e-12);
    assert!(phase.phi[i].abs() < 1e-14);
    assert!((amp.xi0[i] - (pot.gamma / PI).powf(0.25)).abs() < 1e-12);
    assert!(phase.phi.iter().all(|&x| x >= 0.0));
    assert!(amp.xi0.iter().all(|&x| x > 0.0));
    for (k, s) in sigma.iter().enumerate() {
        assert!((phase.dphi[k].powi(2) - pot.v(*s)).abs() < 1e-10);
    }
    // Φ'' = γ from both sides
    let d = 1e-3;
    let right = eikonal_and_transport(&pot, sr, &[sr + d, sr + 2.0 * d]).unwrap().0;
    let left = eikonal_and_transport(&pot, sr, &[sr - d, sr - 2.0 * d]).unwrap().0;
    // Φ ≈ γx²/2 + c x³: combine to cancel the cubic term
    let second = |p: &EikonalPhase| (8.0 * p.phi[0] - p.phi[1]) / (2.0 * d * d);
    assert!((second(&right) - pot.gamma).abs() < 1e-4, "{}", second(&right));
    assert!((second(&left) - pot.gamma).abs() < 1e-4, "{}", second(&left));
}

#[test]
fn phase_reaches_the_action_at_the_other_well() {
    let (_, pot) = ellipse();
    let (sr, sl) = pot.well_pair().unwrap();
    let (phase, _) = eikonal_and_transport(&pot, sr, &[0.0, sl]).unwrap();
    let a = agmon_actions(&pot).unwrap();
    assert!((phase.phi[1] - a.s_u).abs() < 1e-8, "{} vs {}", phase.phi[1], a.s_u);
    assert!((agmon_distance(&pot, sr, &[sl])[0] - phase.phi[1]).abs() < 1e-12);
}

#[test]
fn phase_is_grid_independent() {
    let (_, pot) = ellipse();
    let sr = pot.wells[0];
    let coarse = grid(sr - 1.5, sr + 1.5, 300);
    let fine = grid(sr - 1.5, sr + 1.5, 600);
    let (a, _) = eikonal_and_transport(&pot, sr, &coarse).unwrap();
    let (b, _) = eikonal_and_transport(&pot, sr, &fine).unwrap();
    for i in 0..coarse.len() {
        assert!((a.phi[i] - b.phi[2 * i]).abs() < 1e-8);
    }
}

#[test]
fn transport_equation_holds() {
    let (_, pot) = ellipse();
    let sr = pot.wells[0];
    let n = 4000;
    let sigma = grid(sr - 1.5, sr + 1.5, n);
    let (phase, amp) = eikonal_and_transport(&pot, sr, &sigma).unwrap();
    let step = 3.0 / n as f64;
    let max = amp.xi0.iter().cloned().fold(0.0, f64::max);
    for i in 2..n - 1 {
        if (sigma[i] - sr).abs() < 0.1 {
            continue;
        }
        let dxi = (amp.xi0[i + 1] - amp.xi0[i - 1]) / (2.0 * step);
        let ddphi = (phase.dphi[i + 1].abs() - phase.dphi[i - 1].abs()) / (2.0 * step);
        let sign = (sigma[i] - sr).signum();
        let r = 2.0 * sign * phase.dphi[i].abs() * dxi + (sign * ddphi - pot.gamma) * amp.xi0[i];
        assert!(r.abs() <= 1e-4 * max, "σ = {}: {r}", sigma[i]);
    }
}

#[test]
fn cutoff_is_smooth_and_flat() {
    let c = SmoothCutoff { lo: -1.0, hi: 1.0, ramp: 0.5 };
    assert_eq!(c.eval(0.0), 1.0);
    assert_eq!(c.eval(-0.5), 1.0);
    assert_eq!(c.eval(1.0), 0.0);
    assert_eq!(c.eval(-1.2), 0.0);
    assert!(c.is_plateau(0.4) && !c.is_plateau(0.6));
    let mut prev = 1.0;
    for k in 0..=100 {
        let x = 0.5 + 0.5 * k as f64 / 100.0;
        let v = c.eval(x);
        assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
        prev = v;
    }
    assert!((c.eval(0.75) - 0.5).abs() < 1e-12);
    assert_eq!(smooth_step(0.0), 0.0);
    assert_eq!(smooth_step(1.0), 1.0);
}

#[test]
fn series_values() {
    let s = EigenvalueSeries::new(2.0, 3.0);
    assert!((s.value(0.1) - (-1.0 - 0.02 + 0.003)).abs() < 1e-15);
    assert!(EigenvalueSeries::new(2.5, 3.0).value(0.1) < s.value(0.1));
}

#[test]
fn quasimode_shape_and_normalization() {
    let (p, pot) = ellipse();
    let sr = pot.wells[0];
    let hbar = 0.1;
    let op = single_well(&p, sr, hbar, 2048);
    let cut = SmoothCutoff { lo: sr - 1.5, hi: sr + 1.5, ramp: 0.6 };
    let q = build_quasimode(&pot, &op, sr, cut, Transverse::Continuum).unwrap();
    assert!((q.norm - 1.0).abs() <= 0.5 * hbar, "‖ψ‖ = {}", q.norm);
    let rows = op.op.rows;
    let col = (0..op.op.layout.len()).min_by(|&a, &b| (op.op.layout.sigma[a] - sr).abs().total_cmp(&(op.op.layout.sigma[b] - sr).abs())).unwrap();
    let c = &q.values[col * rows..(col + 1) * rows];
    let tau = &op.grid.tau.nodes;
    for j in 0..rows {
        if tau[j] <= 0.5 * op.grid.tau.t {
            let want = c[0] * (-tau[j]).exp();
            assert!((c[j] - want).abs() <= 1e-3 * want.abs(), "τ = {}", tau[j]);
        }
    }
    // last unknown row sits one cell below the Dirichlet node τ = T
    assert!(c[rows - 1].abs() < 1e-5 * c[0].abs());
    assert!(q.values.iter().all(|x| x.is_finite()));

    let d = build_quasimode(&pot, &op, sr, cut, Transverse::DiscreteColumn).unwrap();
    let dc = &d.values[col * rows..(col + 1) * rows];
    for j in 0..rows {
        if tau[j] <= 6.0 {
            let want = dc[0] * (-tau[j]).exp();
            assert!((dc[j] - want).abs() <= 2e-2 * want.abs(), "τ = {}: {} vs {want}", tau[j], dc[j]);
        }
    }
}

#[test]
fn quasimode_rejects_bad_cutoffs() {
    let (p, pot) = ellipse();
    let sr = pot.wells[0];
    let op = single_well(&p, sr, 0.14, 1024);
    let off = SmoothCutoff { lo: sr + 0.2, hi: sr + 1.5, ramp: 0.3 };
    assert!(build_quasimode(&pot, &op, sr, off, Transverse::Continuum).is_err());
    let wide = SmoothCutoff { lo: sr - 2.5, hi: sr + 2.5, ramp: 0.3 };
    assert!(build_quasimode(&pot, &op, sr, wide, Transverse::Continuum).is_err());
}

#[test]
fn residual_order_and_wrong_series() {
    let (p, pot) = ellipse();
    let sr = pot.wells[0];
    let ladder = [0.2, 0.14, 0.1];
    let (mut good, mut wrong, mut ramp, mut rq) = (vec![], vec![], vec![], vec![]);
    for hbar in ladder {
        let op = single_well(&p, sr, hbar, 2048);
        let cut = SmoothCutoff { lo: sr - 1.5, hi: sr + 1.5, ramp: 0.6 };
        let q = build_quasimode(&pot, &op, sr, cut, Transverse::DiscreteColumn).unwrap();
        let s = series_for(&q, p.kappa_max, p.gamma);
        let r = quasimode_residual(&op, &q, &s).unwrap();
        let mut bad = s;
        bad.mu2 = 0.0;
        bad.mu3 = 0.0;
        good.push(r.residual);
        wrong.push(quasimode_residual(&op, &q, &bad).unwrap().residual);
        ramp.push(r.cutoff_residual);
        rq.push(r.rayleigh_gap.abs());
    }
    let slope = loglog_slope(&ladder, &good);
    assert!(slope >= 3.5, "slope {slope}");
    let ws = loglog_slope(&ladder, &wrong);
    assert!((ws - 2.0).abs() < 0.3, "wrong-series slope {ws}");
    // ramp contribution is exponentially small and falls faster than any power
    assert!(ramp.iter().zip(&good).all(|(a, b)| a < b));
    assert!(ramp[2] / ramp[0] < 1e-3);
    assert!(loglog_slope(&ladder, &rq) >= 3.5);
}
