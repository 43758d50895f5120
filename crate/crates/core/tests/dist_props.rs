use cogcap::dist::*;
use cogcap::numerics::{integrate, QuadSpec};
use cogcap::policy::power_s4;
use cogcap::{make_params_from_ratios, ParamOverrides, ScenarioId, SystemParams};
use proptest::prelude::*;

const ANALYTIC: [ScenarioId; 4] = [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4];

fn params(c1: f64, c2: f64) -> SystemParams {
    make_params_from_ratios(c1, c2, &ParamOverrides::default()).unwrap()
}

#[test]
fn pdf_normalises_to_transmission_probability() {
    let spec = QuadSpec::new(1e-10, 1e-9, 4000).unwrap();
    for (c1, c2) in [(0.1, 0.1), (0.9, 0.1), (0.01, 0.05), (0.01, 0.5)] {
        let p = params(c1, c2);
        for s in ANALYTIC {
            let mass = integrate(|y| if y > 0.0 { pdf_gamma_i(s, &p, y).unwrap() } else { 0.0 }, 0.0, f64::INFINITY, &spec)
                .unwrap()
                .value;
            let expect = 1.0 - blocking_probability(s, &p).unwrap();
            assert!((mass - expect).abs() < 1e-6, "{s} c1={c1}: {mass} vs {expect}");
        }
    }
}

#[test]
fn s4_closed_form_matches_generic_mixing_integral() {
    let p = params(0.1, 0.1);
    let grid = default_capacity_grid();
    let closed = capacity_cdf(ScenarioId::S4, &p, &grid).unwrap();
    for (y, v) in grid.iter().zip(&closed.values) {
        let generic = cdf_gamma_i_via_gamma(ScenarioId::S4, &p, y.exp2() - 1.0).unwrap();
        assert!((generic - v).abs() < 1e-8, "y={y}");
    }
}

#[test]
fn mean_capacity_two_paths() {
    for (c1, c2) in [(0.1, 0.1), (0.9, 0.1), (0.01, 0.1)] {
        let p = params(c1, c2);
        for s in ANALYTIC {
            let a = mean_capacity(s, &p).unwrap();
            let b = mean_capacity_from_cdf(s, &p).unwrap();
            assert!((a - b).abs() < 1e-4, "{s} c1={c1}: {a} vs {b}");
        }
    }
}

#[test]
fn s4_capacity_is_exponential_mixture_closed_form() {
    let p = params(0.1, 0.1);
    let pt = power_s4(&p).pt;
    assert!(pt > 0.0 && pt <= p.pm);
    let grid = [0.5, 1.0, 2.0];
    let c = capacity_cdf(ScenarioId::S4, &p, &grid).unwrap();
    for (y, v) in grid.iter().zip(&c.values) {
        let x = y.exp2() - 1.0;
        let k = pt * p.omega_s;
        let expect = 1.0 - k / (x * p.pp * p.omega_ps + k) * (-x * p.sigma2_s / k).exp();
        assert!((v - expect).abs() < 1e-15);
    }
}

#[test]
fn s3_s4_blocking_flips_at_threshold() {
    let c2: f64 = 0.1;
    let edge = -(-c2).exp_m1();
    for s in [ScenarioId::S3, ScenarioId::S4] {
        let at = params(0.1, c2).with_alpha(edge).unwrap();
        let above = params(0.1, c2).with_alpha(edge + 1e-9).unwrap();
        assert_eq!(blocking_probability(s, &at).unwrap(), 1.0);
        assert_eq!(blocking_probability(s, &above).unwrap(), 0.0);
    }
}

#[test]
fn s5_blocking_is_monotone_in_c2_and_rho() {
    let mut last = 0.0;
    for i in 1..=10 {
        let b = blocking_probability(ScenarioId::S5, &params(0.1, 0.1 * i as f64)).unwrap();
        assert!(b >= last);
        last = b;
    }
    let p = params(0.1, 0.5);
    let loose = s5_blocking_probability(&p.with_rho(0.9).unwrap()).unwrap();
    let tight = s5_blocking_probability(&p.with_rho(0.99).unwrap()).unwrap();
    assert!(tight.probability < loose.probability);
    // As ρ → 1 the S5 blocking approaches the S1/S2 value.
    let s1 = blocking_probability(ScenarioId::S1, &p).unwrap();
    let near = s5_blocking_probability(&p.with_rho(0.9999).unwrap()).unwrap();
    assert!((near.probability - s1).abs() < 0.05);
}

#[test]
fn curves_satisfy_invariants() {
    let grid = default_capacity_grid();
    for (c1, c2) in [(0.1, 0.1), (0.01, 0.1), (0.9, 0.1), (0.01, 0.5)] {
        let p = params(c1, c2);
        for s in ANALYTIC {
            let c = capacity_cdf(s, &p, &grid).unwrap();
            c.check_invariants().unwrap();
            assert_eq!(c.values[0], blocking_probability(s, &p).unwrap());
            assert!(*c.values.last().unwrap() > 0.99);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cdfs_are_monotone_and_bounded(c1 in 0.01f64..1.0, c2 in 0.01f64..1.0, y in 0.0f64..6.0, dy in 0.01f64..2.0) {
        let p = params(c1, c2);
        for s in ANALYTIC {
            let a = cdf_gamma_i(s, &p, y).unwrap();
            let b = cdf_gamma_i(s, &p, y + dy).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a - 1e-12, "{} {} {}", s, a, b);
            prop_assert!(a >= blocking_probability(s, &p).unwrap() - 1e-12);
            let g = cdf_gamma(s, &p, y).unwrap();
            prop_assert!((0.0..=1.0).contains(&g));
        }
    }

    #[test]
    fn s1_s2_s3_match_mixing_integral(c1 in 0.01f64..1.0, c2 in 0.01f64..0.9, y in 0.05f64..10.0) {
        let p = params(c1, c2);
        for s in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3] {
            let a = cdf_gamma_i(s, &p, y).unwrap();
            let b = cdf_gamma_i_via_gamma(s, &p, y).unwrap();
            prop_assert!((a - b).abs() < 1e-7, "{} y={}: {} vs {}", s, y, a, b);
        }
    }

    #[test]
    fn pdf_matches_cdf_slope(c1 in 0.01f64..1.0, c2 in 0.01f64..0.5, y in 0.2f64..5.0) {
        let p = params(c1, c2);
        let h = 1e-4;
        for s in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3] {
            let fd = (cdf_gamma_i(s, &p, y + h).unwrap() - cdf_gamma_i(s, &p, y - h).unwrap()) / (2.0 * h);
            let f = pdf_gamma_i(s, &p, y).unwrap();
            prop_assert!((fd - f).abs() < 1e-4, "{} y={}: {} vs {}", s, y, fd, f);
        }
    }
}

#[test]
fn s2_density_near_zero_sinr() {
    let p = params(0.01, 0.5);
    let mut last = f64::INFINITY;
    for y in [1e-12, 1e-9, 1e-6, 1e-3] {
        let f = pdf_gamma_i(ScenarioId::S2, &p, y).unwrap();
        assert!(f.is_finite() && f > 0.0 && f <= last, "y={y}: {f}");
        last = f;
    }
}
