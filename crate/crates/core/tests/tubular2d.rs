use curvebound::discretization::{read_triplets, ring_reflect};
use curvebound::geometry::{profile_from_spec, ConstantCurvature, CurvatureProfile, CurveSpec};
use curvebound::linalg::EigenOptions;
use curvebound::ref1d::{weighted_ground, WeightedSpec};
use curvebound::tubular2d::*;

fn ellipse() -> CurvatureProfile {
    profile_from_spec(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 512, 2048).unwrap()
}

fn circle_level(circle: &ConstantCurvature, hbar: f64, n_tau: usize) -> f64 {
    let spec = TubularSpec { tau: TauSpec::Uniform { n: n_tau }, t_override: Some(20.0), ..TubularSpec::new(hbar, 16, 1.0) };
    let op = assemble(circle, &spec, Domain::Full).unwrap();
    solve_lowest(&op, 1, &EigenOptions::default()).unwrap().eigenvalues[0]
}

#[test]
fn circle_separates_into_the_weighted_problem() {
    let circle = ConstantCurvature { radius: 1.0 };
    for hbar in [0.1, 0.15] {
        let n = 2000;
        let coarse = circle_level(&circle, hbar, n);
        let fine = circle_level(&circle, hbar, 2 * n);
        let two_d = (4.0 * fine - coarse) / 3.0;
        let b = hbar * hbar / circle.radius;
        let one_d = weighted_ground(WeightedSpec { t: 20.0, b, n_grid: n }).unwrap().eigenvalue;
        assert!((two_d - one_d).abs() < 1e-6, "ħ = {hbar}: {two_d} vs {one_d}");
    }
}

#[test]
fn stiffness_is_exactly_symmetric() {
    let p = ellipse();
    for domain in [Domain::Full, Domain::EvenHalf, Domain::OddHalf, Domain::Interval { lo: -3.5, hi: -1.0 }] {
        let op = assemble(&p, &TubularSpec::new(0.3, 64, 1.5), domain).unwrap();
        assert_eq!(op.op.stiffness.max_asymmetry(), 0.0, "{domain:?}");
        assert!(op.op.mass.iter().all(|&m| m > 0.0));
    }
}

#[test]
fn dense_and_sparse_solvers_agree() {
    let p = ellipse();
    let spec = TubularSpec { tau: TauSpec::Uniform { n: 40 }, ..TubularSpec::new(0.3, 40, 1.5) };
    let op = assemble(&p, &spec, Domain::Full).unwrap();
    assert_eq!(op.dim(), 1600);
    let sparse = solve_lowest(&op, 4, &EigenOptions::default()).unwrap();
    let dense = solve_lowest(&op, 4, &EigenOptions { dense_fallback: true, ..EigenOptions::default() }).unwrap();
    for j in 0..4 {
        assert!((sparse.eigenvalues[j] - dense.eigenvalues[j]).abs() < 1e-9, "{j}: {} vs {}", sparse.eigenvalues[j], dense.eigenvalues[j]);
    }
    assert_eq!(count_below(&op, 0.5 * (sparse.eigenvalues[1] + sparse.eigenvalues[2])).unwrap(), 2);
}

#[test]
fn flat_transverse_rayleigh_quotient() {
    let p = ellipse();
    let hbar = 0.2;
    let op = assemble(&p, &TubularSpec::new(hbar, 128, 1.5), Domain::Full).unwrap();
    let (lam, g) = op.grid.tau.flat_ground().unwrap();
    let x: Vec<f64> = (0..op.op.layout.len()).flat_map(|_| g.iter().copied()).collect();
    let rq = op.op.rayleigh(&x);
    // κ-weighted correction is O(ħ²)
    assert!((rq - lam).abs() < 2.0 * p.kappa_max * hbar * hbar, "{rq} vs {lam}");
    assert!((lam + 1.0).abs() < 1e-3);
    assert!(op.grid.tau.transverse_defect().unwrap().abs() < 1e-3);
}

#[test]
fn graded_grid_reaches_t_and_refines() {
    let g = TauGrid::new(10.0, TauSpec::default()).unwrap();
    assert_eq!(*g.nodes.last().unwrap(), 10.0);
    assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
    let total: f64 = g.weights.iter().sum::<f64>() + 0.5 * g.step(g.rows() - 1);
    assert!((total - 10.0).abs() < 1e-12);
    let r = g.refined();
    assert_eq!(r.rows(), 2 * g.rows());
    let d0 = g.transverse_defect().unwrap();
    let d1 = r.transverse_defect().unwrap();
    assert!(d1.abs() < 0.3 * d0.abs(), "{d0} → {d1}");
}

#[test]
fn spec_validation() {
    let p = ellipse();
    let opts = |s: TubularSpec| assemble(&p, &s, Domain::Full);
    assert!(opts(TubularSpec::new(1.2, 64, 1.5)).is_err());
    assert!(opts(TubularSpec::new(0.3, 30, 1.5)).is_err());
    assert!(opts(TubularSpec { a_min: 1.5, ..TubularSpec::new(0.3, 64, 1.5) }).is_err());
    assert!(opts(TubularSpec { t_override: Some(100.0), ..TubularSpec::new(0.3, 64, 1.5) }).is_err());
    assert!(opts(TubularSpec::new(0.3, 64, 0.1)).is_err());
    assert!(opts(TubularSpec { tau: TauSpec::Uniform { n: 2 }, ..TubularSpec::new(0.3, 64, 1.5) }).is_err());
    // T is capped by the weight floor, never exceeded
    let capped = TubularSpec::new(0.3, 64, 100.0).depth_for(&p).unwrap();
    assert!((capped - 0.5 / (0.09 * p.kappa_max)).abs() < 1e-9);
    let op = assemble(&p, &TubularSpec::new(0.3, 64, 1.5), Domain::Interval { lo: -3.0, hi: 3.0 });
    assert!(op.is_ok());
    assert!(single_well_ground(&p, &TubularSpec::new(0.3, 64, 1.5), Domain::Interval { lo: -4.0, hi: 4.0 }, &EigenOptions::default()).is_err());
    let circle = profile_from_spec(&CurveSpec::circle(1.0), 256, 1024);
    assert!(circle.is_err());
}

#[test]
fn single_well_ground_is_positive_with_harmonic_gap() {
    let p = ellipse();
    let hbar = 0.2;
    let spec = TubularSpec::new(hbar, 512, 1.5 * 5.43);
    let omega = omega_right(&p, 0.5).unwrap();
    let g = single_well_ground(&p, &spec, omega, &EigenOptions::default()).unwrap();
    let m = g.phi.iter().cloned().fold(0.0, f64::max);
    assert!(g.phi.iter().all(|&x| x >= -1e-12 * m));
    let r = g.gap / (hbar.powi(3) * p.gamma);
    assert!((1.0..=4.0).contains(&r), "gap/(γħ³) = {r}");
    assert!(g.mu < -1.0 - p.kappa_max * hbar * hbar + 2.0 * p.gamma * hbar.powi(3));
}

#[test]
fn full_ring_eigenvectors_have_parities() {
    let p = ellipse();
    let hbar = 0.3;
    let n = 64;
    let op = assemble(&p, &TubularSpec::new(hbar, n, 1.5), Domain::Full).unwrap();
    let res = solve_lowest(&op, 2, &EigenOptions::default()).unwrap();
    let m = &op.op.mass;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum::<f64>();
    for (j, want) in [(0, 1.0), (1, -1.0)] {
        let u = &res.eigenvectors[j];
        let r = reflect_full(&op, u).unwrap();
        let c = dot(u, &r) / dot(u, u);
        assert!((c - want).abs() < 1e-6, "vector {j}: {c}");
    }
    assert_eq!(ring_reflect(0, n), 0);
    assert!(reflect_full(&assemble(&p, &TubularSpec::new(hbar, n, 1.5), Domain::EvenHalf).unwrap(), &res.eigenvectors[0]).is_err());
}

#[test]
fn doublet_agrees_with_full_ring() {
    let p = ellipse();
    let hbar = 0.3;
    let spec = TubularSpec::new(hbar, 128, 1.5 * 5.43);
    let d = solve_doublet(&p, &spec, false).unwrap();
    let full = solve_lowest(&assemble(&p, &spec, Domain::Full).unwrap(), 2, &EigenOptions::default()).unwrap();
    assert!((d.mu_even - full.eigenvalues[0]).abs() < 1e-9);
    assert!((d.mu_odd - full.eigenvalues[1]).abs() < 1e-9);
    let direct = full.eigenvalues[1] - full.eigenvalues[0];
    assert!((d.splitting / direct - 1.0).abs() < 1e-4, "{} vs {direct}", d.splitting);
    assert!((d.upper + d.lower - d.splitting).abs() < 1e-12 * d.splitting.abs().max(1e-300));
}

#[test]
fn matrix_dump_round_trips() {
    let p = ellipse();
    let op = assemble(&p, &TubularSpec::new(0.3, 16, 1.5), Domain::Full).unwrap();
    let mut buf = Vec::new();
    op.op.dump_stiffness(&mut buf).unwrap();
    let (n, trips) = read_triplets(&mut buf.as_slice()).unwrap();
    assert_eq!(n, op.dim());
    let back: Vec<_> = op.op.stiffness.triplets().collect();
    assert_eq!(trips, back);
    let mut mbuf = Vec::new();
    op.op.dump_mass(&mut mbuf).unwrap();
    let (_, mt) = read_triplets(&mut mbuf.as_slice()).unwrap();
    assert!(mt.iter().all(|&(i, j, v)| i == j && v == op.op.mass[i]));
}
