use std::f64::consts::PI;

use curvebound::geometry::*;
use curvebound::quadrature::GaussLegendre;

fn ellipse() -> (ClosedCurve, ArcLengthTable) {
    let c = build_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    let t = arclength_parametrize(&c, 256).unwrap();
    (c, t)
}

#[test]
fn ellipse_area_and_validation() {
    let (c, _) = ellipse();
    assert!((c.signed_area() - 2.0 * PI).abs() < 1e-12);
    assert!(matches!(build_curve(&CurveSpec::Ellipse { a: 1.0, b: 2.0 }), Err(curvebound::Error::EllipseAxes { .. })));
    assert!(build_curve(&CurveSpec::Ellipse { a: 1.0, b: 1.0 }).is_err());
}

#[test]
fn circle_length() {
    let c = build_curve(&CurveSpec::circle(1.5)).unwrap();
    let t = arclength_parametrize(&c, 64).unwrap();
    assert!((t.total_length - 3.0 * PI).abs() < 1e-12);
    assert!(matches!(curvature_profile(&c, &t, 256), Err(curvebound::Error::ConstantCurvature)));
}

#[test]
fn perimeter_agrees_between_quadrature_orders() {
    let (c, t) = ellipse();
    let gl = GaussLegendre::new(20);
    let other = gl.composite(0.0, 2.0 * PI, 40, |x| c.speed(x));
    assert!((t.total_length - other).abs() < 1e-10, "{} vs {}", t.total_length, other);
    let t2 = arclength_parametrize(&c, 512).unwrap();
    assert!((t.total_length - t2.total_length).abs() < 1e-10);
    assert!(arclength_parametrize(&c, 32).is_err());
}

#[test]
fn arclength_maps_are_inverse_and_unit_speed() {
    let (c, t) = ellipse();
    let l = t.half_length();
    for k in 0..50 {
        let s = -l + 2.0 * l * (k as f64 + 0.37) / 50.0;
        let th = t.theta_of_s(&c, s);
        let back = t.s_of_theta(&c, th);
        let diff = (back - s.rem_euclid(2.0 * l)).abs();
        assert!(diff < 1e-11 || (diff - 2.0 * l).abs() < 1e-11);
        let d = 1e-4;
        let p1 = c.point(t.theta_of_s(&c, s + d));
        let p0 = c.point(t.theta_of_s(&c, s - d));
        let speed = (p1[0] - p0[0]).hypot(p1[1] - p0[1]) / (2.0 * d);
        assert!((speed - 1.0).abs() < 1e-8);
    }
    // origin is the top of the y-axis, σ = L the bottom
    let g = CurveGeometry::new(c.clone(), t.clone());
    let top = g.point(0.0);
    let bottom = g.point(l);
    assert!(top[0].abs() < 1e-12 && (top[1] - 1.0).abs() < 1e-12);
    assert!(bottom[0].abs() < 1e-10 && (bottom[1] + 1.0).abs() < 1e-12);
}

#[test]
fn ellipse_curvature_matches_closed_form() {
    let (c, t) = ellipse();
    let p = curvature_profile(&c, &t, 1024).unwrap();
    let g = &p.geometry;
    let d = 1e-4;
    for (i, &s) in p.sigma.iter().enumerate() {
        let th = g.theta(s);
        let (sn, cs) = th.sin_cos();
        let exact = 2.0 / (4.0 * sn * sn + cs * cs).powf(1.5);
        assert!((p.kappa[i] - exact).abs() < 1e-12 * exact);
        // finite differences of the unit tangent
        let tan = |x: f64| {
            let j = c.jet(g.theta(x));
            let n = j[1][0].hypot(j[1][1]);
            [j[1][0] / n, j[1][1] / n]
        };
        let (a, b) = (tan(s - d), tan(s + d));
        let mid = tan(s);
        let fd = (mid[0] * (b[1] - a[1]) - mid[1] * (b[0] - a[0])) / (2.0 * d);
        assert!((fd - exact).abs() < 1e-6 * exact, "node {i}: {fd} vs {exact}");
    }
}

#[test]
fn ellipse_wells() {
    let (c, t) = ellipse();
    let p = curvature_profile(&c, &t, 2048).unwrap();
    assert!(p.symmetric);
    assert!((p.kappa_max - 2.0).abs() < 1e-12);
    let (r, l) = p.well_pair().unwrap();
    assert!((r.s + l.s).abs() < 1e-8);
    assert!(l.s > 0.0);
    // s_ℓ is the left vertex (−a, 0)
    let pt = p.geometry.point(l.s);
    assert!((pt[0] + 2.0).abs() < 1e-10 && pt[1].abs() < 1e-8);
    // κ'' at (a, 0): κ = ab/(a²sin² + b²cos²)^{3/2}, ds/dθ = b there, so κ_ss = −3a(a² − b²)/b⁴... = −18
    assert!((l.kappa_second + 18.0).abs() < 1e-6, "{}", l.kappa_second);
    assert!((p.gamma - 3.0).abs() < 1e-7);
    let q = curvature_profile(&c, &t, 4096).unwrap();
    assert!((q.gamma - p.gamma).abs() < 1e-6 * p.gamma);
    // quadratic lower bound near the wells: some c₀ > 0 on a fixed
    // neighbourhood, and c₀ → γ² as the neighbourhood shrinks
    let mut c0_fit = f64::INFINITY;
    for w in [r, l] {
        for k in 1..=50 {
            let ds = 0.1 * p.half_length * k as f64 / 50.0;
            for s in [w.s - ds, w.s + ds] {
                c0_fit = c0_fit.min(p.v_at(s) / (ds * ds));
            }
        }
        for k in 1..=20 {
            let ds = 0.008 * p.half_length * k as f64 / 20.0;
            for s in [w.s - ds, w.s + ds] {
                assert!(p.v_at(s) >= p.gamma * p.gamma * (1.0 - 1e-2) * ds * ds);
            }
        }
    }
    assert!(c0_fit > 0.3 * p.gamma * p.gamma && c0_fit <= p.gamma * p.gamma);
    assert!(p.kappa.iter().all(|k| *k <= p.kappa_max + 1e-12));
}

#[test]
fn single_well_nonsymmetric_curve() {
    // egg-shaped curve: one sharp end
    let spec = CurveSpec::Fourier {
        x_cos: vec![0.0, 1.5, 0.2],
        x_sin: vec![],
        y_cos: vec![],
        y_sin: vec![0.0, 1.0],
    };
    let p = profile_from_spec(&spec, 256, 1024).unwrap();
    assert_eq!(p.wells.len(), 1);
    assert!(!p.symmetric);
    assert!(p.well_pair().is_err());
}
