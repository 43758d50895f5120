use cogcap::numerics::{integrate, QuadSpec};
use cogcap::specfun::*;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// `E1(x) = ∫_1^∞ e^{-xt}/t dt`, substituted `t = 1/u`: `∫_0^1 e^{-x/u}/u du`.
fn e1_by_quadrature(x: f64) -> f64 {
    let spec = QuadSpec::new(1e-15, 1e-13, 4000).unwrap();
    integrate(|u| if u == 0.0 { 0.0 } else { (-x / u).exp() / u }, 0.0, 1.0, &spec)
        .unwrap()
        .value
}

/// `I0(x) = (1/π) ∫_0^π e^{x cos t} dt`.
fn i0_by_quadrature(x: f64) -> f64 {
    let spec = QuadSpec::new(1e-14, 1e-13, 2000).unwrap();
    integrate(|t| (x * t.cos()).exp(), 0.0, std::f64::consts::PI, &spec)
        .unwrap()
        .value
        / std::f64::consts::PI
}

/// Brute-force 2-dof noncentral χ² CDF as a Poisson mixture of central
/// χ²(2+2j) CDFs.
fn ncx2_cdf_mixture(lambda: f64, x: f64) -> f64 {
    let mut total = 0.0;
    let mut w = (-lambda / 2.0).exp();
    for j in 0..400 {
        // Central χ²(2k) CDF = 1 - e^{-x/2} Σ_{i<k} (x/2)^i / i!
        let k = j + 1;
        let mut term = 1.0;
        let mut partial = 0.0;
        for i in 0..k {
            if i > 0 {
                term *= x / 2.0 / i as f64;
            }
            partial += term;
        }
        total += w * (1.0 - (-x / 2.0).exp() * partial);
        w *= lambda / 2.0 / (j + 1) as f64;
    }
    total
}

#[test]
fn e1_matches_quadrature_oracle() {
    for &x in &[1e-6, 0.01, 0.3, 1.0, 1.5, 4.0, 10.0, 30.0] {
        let a = exp_integral_e1(x).unwrap();
        let b = e1_by_quadrature(x);
        assert!(close(a, b, 1e-10), "x={x}: {a} vs {b}");
    }
}

#[test]
fn e1_small_argument_value() {
    // -γ - ln x + x - x²/4 at x = 1e-8
    let x: f64 = 1e-8;
    let series = -EULER_GAMMA - x.ln() + x - x * x / 4.0;
    assert!(close(exp_integral_e1(x).unwrap(), series, 1e-14));
    assert!((exp_integral_e1(x).unwrap() - 17.843_465_089).abs() < 1e-8);
}

#[test]
fn i0_matches_quadrature_oracle() {
    for &x in &[0.0, 0.5, 2.0, 10.0, 25.0, 40.0] {
        let a = bessel_i0(x).unwrap();
        let b = i0_by_quadrature(x);
        assert!(close(a, b, 1e-11 * b.max(1.0)), "x={x}: {a} vs {b}");
    }
}

#[test]
fn ncx2_matches_mixture_oracle() {
    for &(l, x) in &[(0.5, 0.3), (2.0, 2.0), (5.0, 9.0), (20.0, 15.0), (40.0, 60.0)] {
        let a = ncx2_cdf(l, x).unwrap();
        let b = ncx2_cdf_mixture(l, x);
        assert!((a - b).abs() < 1e-12, "λ={l} x={x}: {a} vs {b}");
    }
}

#[test]
fn ncx2_pdf_integrates_to_cdf() {
    let spec = QuadSpec::new(1e-13, 1e-12, 2000).unwrap();
    for &(l, x) in &[(1.0, 3.0), (10.0, 8.0)] {
        let f = integrate(|t| ncx2_pdf(l, t).unwrap(), 0.0, x, &spec).unwrap().value;
        assert!((f - ncx2_cdf(l, x).unwrap()).abs() < 1e-11);
    }
}

#[test]
fn kummer_special_cases() {
    let ctl = SeriesControl::default();
    // 1F1(a; a; z) = e^z
    assert!(close(kummer_m(2.5, 2.5, 3.0, ctl).unwrap(), 3f64.exp(), 1e-13));
    // 1F1(1; 2; z) = (e^z - 1)/z
    assert!(close(kummer_m(1.0, 2.0, 0.7, ctl).unwrap(), 0.7f64.exp_m1() / 0.7, 1e-13));
    // 1F1(2; 1; z) = (1 + z) e^z
    let z = 5.0;
    assert!(close(kummer_m(2.0, 1.0, z, ctl).unwrap(), (1.0 + z) * z.exp(), 1e-13));
}

#[test]
fn spec_errors() {
    assert!(exp_integral_e1(0.0).is_err());
    assert!(exp_integral_e1(-1.0).is_err());
    assert!(ncx2_cdf(-1.0, 1.0).is_err());
    assert!(SeriesControl::new(0.0, 10).is_err());
}

proptest! {
    #[test]
    fn gamma0_equals_e1(x in 1e-6f64..50.0) {
        prop_assert_eq!(upper_incomplete_gamma0(x).unwrap(), exp_integral_e1(x).unwrap());
    }

    #[test]
    fn scaled_e1_is_consistent(x in 1e-3f64..30.0) {
        let s = exp_scaled_e1(x).unwrap();
        prop_assert!(close(s, x.exp() * exp_integral_e1(x).unwrap(), 1e-12));
        // 1/(x+1) < e^x E1(x) <= 1/x
        prop_assert!(s > 1.0 / (x + 1.0) && s <= 1.0 / x);
    }

    #[test]
    fn ncx2_central_reduction(x in 0.0f64..80.0) {
        let v = ncx2_cdf(0.0, x).unwrap();
        prop_assert!((v - (-(-x / 2.0).exp_m1())).abs() < 1e-14);
    }

    #[test]
    fn ncx2_monotone(l in 0.0f64..60.0, x in 0.0f64..80.0, dx in 0.01f64..5.0) {
        let f = ncx2_cdf(l, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(ncx2_cdf(l, x + dx).unwrap() >= f);
        prop_assert!(ncx2_cdf(l + dx, x).unwrap() <= f + 1e-15);
    }

    #[test]
    fn whittaker_zero_index_closed_form(z in 1e-3f64..40.0) {
        // M_{-1/2,0}(z) = e^{-z/2} √z 1F1(1; 1; z) = e^{z/2} √z
        let m = whittaker_m(-0.5, 0.0, z, SeriesControl::default()).unwrap();
        prop_assert!(close(m, (z / 2.0).exp() * z.sqrt(), 1e-12 * (z / 2.0).exp()));
    }

    #[test]
    fn i0_scaled_bounds(x in 0.0f64..700.0) {
        let s = bessel_i0_scaled(x).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
    }
}
