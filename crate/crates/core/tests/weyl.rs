use std::f64::consts::PI;

use curvebound::geometry::{profile_from_spec, ConstantCurvature, CurvatureProfile, CurveSpec};
use curvebound::linalg::EigenOptions;
use curvebound::tubular2d::TubularSpec;
use curvebound::weyl::*;

fn ellipse() -> CurvatureProfile {
    profile_from_spec(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 512, 2048).unwrap()
}

fn count_spec(h: f64, n_sigma: usize) -> TubularSpec {
    TubularSpec { a_min: 0.1, ..TubularSpec::new(h.powf(0.25), n_sigma, 1.5) }
}

#[test]
fn circle_kappa_integral_closed_form() {
    let c = ConstantCurvature { radius: 2.0 };
    for e in [-0.3, 0.0, 1.0] {
        let want = 2.0 * PI * 2.0 * (e + 0.5f64).sqrt();
        assert!((kappa_integral(&c, e, 64) - want).abs() < 1e-12);
    }
    assert_eq!(kappa_integral(&c, -1.0, 64), 0.0);
}

#[test]
fn ellipse_kappa_integral_converges() {
    let p = ellipse();
    for e in [0.0, 1.0, -0.5] {
        let a = kappa_integral(&p, e, 512);
        let b = kappa_integral(&p, e, 2048);
        assert!((a - b).abs() < 1e-8, "E = {e}: {a} vs {b}");
    }
    // E + κ changes sign at E = −0.5: the integral stays continuous and monotone
    let vals: Vec<f64> = [-1.9, -1.0, -0.5, 0.0, 1.0].iter().map(|&e| kappa_integral(&p, e, 512)).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(kappa_integral(&p, -2.5, 512), 0.0);
}

#[test]
fn predictions_scale_and_validate() {
    let p = ellipse();
    let a = weyl_predictions(&p, 0.01, 0.5, 1.0).unwrap();
    let b = weyl_predictions(&p, 0.0001, 0.5, 1.0).unwrap();
    assert!((b.negative / a.negative - 10.0).abs() < 1e-12);
    assert!((b.low_lying / a.low_lying - 10f64.sqrt()).abs() < 1e-12);
    let len = 2.0 * p.half_length;
    assert!((a.negative - len * 0.5f64.sqrt() / (PI * 0.1)).abs() < 1e-12);
    let near_one = weyl_predictions(&p, 0.01, 0.999, 1.0).unwrap().negative;
    assert!(near_one < 0.05 * a.negative);
    assert!(weyl_predictions(&p, 0.01, 1.0, 1.0).is_err());
    assert!(weyl_predictions(&p, 0.01, 0.0, 1.0).is_err());
    assert!(weyl_predictions(&p, 1.5, 0.5, 1.0).is_err());
}

#[test]
fn counts_are_monotone_and_near_the_laws() {
    let p = ellipse();
    let h = 0.05;
    let spec = count_spec(h, 256);
    let mut prev = usize::MAX;
    for lambda in [0.3, 0.5, 0.7, 0.9] {
        let r = counting_check(&p, h, Threshold::Negative { lambda }, &spec).unwrap();
        assert!(r.observed_count <= prev, "Λ = {lambda}");
        prev = r.observed_count;
        assert!((r.observed_count as f64 - r.predicted).abs() <= 3.0 + 0.15 * r.predicted, "{r:?}");
    }
    let lo = counting_check(&p, h, Threshold::LowLying { e: 0.0 }, &spec).unwrap();
    let hi = counting_check(&p, h, Threshold::LowLying { e: 1.0 }, &spec).unwrap();
    assert!(lo.observed_count <= hi.observed_count);
    assert!((hi.observed_count as f64 - hi.predicted).abs() <= 3.0, "{hi:?}");
    assert!(counting_check(&p, 0.01, Threshold::Negative { lambda: 0.5 }, &spec).is_err());
}

#[test]
fn count_budget_is_enforced() {
    let p = ellipse();
    let h = 1e-4;
    let r = counting_check(&p, h, Threshold::Negative { lambda: 0.5 }, &count_spec(h, 256));
    assert!(matches!(r, Err(curvebound::Error::Budget { .. })), "{r:?}");
}

#[test]
fn bracket_constants_exist() {
    let p = ellipse();
    let r = bracket_check(&p, &[0.05, 0.02], 3, |h| count_spec(h, 256), &EigenOptions::default()).unwrap();
    for row in &r.rows {
        for n in 0..3 {
            assert!(row.mu_minus[n] <= row.mu[n] && row.mu[n] <= row.mu_plus[n], "h = {}, n = {n}", row.h);
        }
        assert!(row.c_plus < BRACKET_CAP && row.c_minus < BRACKET_CAP);
    }
    assert!(r.c_plus.is_finite() && r.c_minus.is_finite());
    assert!(bracket_check(&p, &[0.05], 0, |h| count_spec(h, 256), &EigenOptions::default()).is_err());
}
