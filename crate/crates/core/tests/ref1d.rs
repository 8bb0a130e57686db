use curvebound::ref1d::*;

fn tanh_root(t: f64) -> f64 {
    // tanh(ωT) = ω on (0, 1), by plain bisection
    let f = |w: f64| (w * t).tanh() - w;
    let (mut a, mut b) = (0.5, 1.0);
    assert!(f(a) > 0.0 && f(b) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let w = 0.5 * (a + b);
    -w * w
}

#[test]
fn halfline_ground_state() {
    let (lam, u0) = halfline_modes();
    assert_eq!(lam, -1.0);
    let gl = curvebound::quadrature::GaussLegendre::new(20);
    let norm = gl.composite(0.0, 40.0, 80, |t| u0(t) * u0(t));
    assert!((norm - 1.0).abs() < 1e-13);
    assert!((HalfLineModel::ground_slope(0.0) + u0(0.0)).abs() < 1e-15);
}

#[test]
fn interval_root_matches_bisection_oracle() {
    let s = interval_spectrum_exact(IntervalSpec { t: 5.0 }, 1).unwrap();
    assert!((s.eigenvalues[0] - tanh_root(5.0)).abs() < 1e-14);
    for t in [2.0, 3.0, 6.0] {
        let s = interval_spectrum_exact(IntervalSpec { t }, 3).unwrap();
        assert!(s.eigenvalues[1] >= 0.0, "λ₂ = {} at T = {t}", s.eigenvalues[1]);
    }
    assert!(interval_spectrum_exact(IntervalSpec { t: 0.5 }, 1).is_err());
}

#[test]
fn discrete_interval_ground_matches_exact_and_asymptotics() {
    for t in [6.0, 8.0, 10.0] {
        let exact = tanh_root(t);
        let d = weighted_spectrum(WeightedSpec { t, b: 0.0, n_grid: 4000 }, 1).unwrap()[0];
        assert!((d - exact).abs() < 1e-8, "T = {t}: {d} vs {exact}");
        let asym = -1.0 + 4.0 * (-2.0 * t).exp();
        assert!((exact - asym).abs() <= (-3.0 * t).exp(), "T = {t}");
    }
}

#[test]
fn weighted_two_term_expansion() {
    let mut prev = f64::INFINITY;
    for b in [-0.02, -0.01, 0.01, 0.02] {
        let g = weighted_ground(WeightedSpec { t: 20.0, b, n_grid: 4000 }).unwrap();
        assert!((g.eigenvalue + 1.0 + b).abs() <= 2.0 * b * b, "B = {b}: λ = {}", g.eigenvalue);
        assert!(g.eigenvalue < prev, "λ₁ must decrease in B");
        prev = g.eigenvalue;
        assert!((g.decay_rate + 1.0).abs() < 0.05, "decay rate {}", g.decay_rate);
        let n = g.u.len() - 1;
        assert!(g.u[..n].iter().all(|&x| x > 0.0), "ground state changes sign");
        let h = 20.0 / n as f64;
        let norm: f64 = (0..n)
            .map(|i| if i == 0 { 0.5 } else { 1.0 } * h * g.u[i] * g.u[i] * (1.0 - b * g.grid[i]))
            .sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn weighted_perturbation_bound() {
    let t = 8.0;
    let base = weighted_spectrum(WeightedSpec { t, b: 0.0, n_grid: 2000 }, 2).unwrap();
    let mut c_fit: f64 = 0.0;
    for b in [0.005, 0.01, 0.02, 0.04] {
        let s = weighted_spectrum(WeightedSpec { t, b, n_grid: 2000 }, 2).unwrap();
        for n in 0..2 {
            c_fit = c_fit.max((s[n] - base[n]).abs() / (b * t * (base[n].abs() + 1.0)));
        }
    }
    assert!(c_fit < 1.0, "fitted constant {c_fit}");
}

#[test]
fn weighted_spec_validation() {
    assert!(weighted_ground(WeightedSpec { t: 30.0, b: 0.02, n_grid: 100 }).is_err());
    assert!(weighted_ground(WeightedSpec { t: 0.5, b: 0.0, n_grid: 100 }).is_err());
    assert!(weighted_ground(WeightedSpec { t: 5.0, b: 0.0, n_grid: 4 }).is_err());
}
