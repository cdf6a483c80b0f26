//! Invariants checked over generated inputs.

use ergodisk::function::{cesaro_symbol, format_complex, multiply, parse_complex, parse_spec, power};
use ergodisk::norms::{bloch_norm, sigma_psi, sup_norm_hinf};
use ergodisk::quadrature::{hyperbolic_distance, GridSpec};
use ergodisk::AnalyticFunction;
use num_complex::Complex64;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), Just(-0.0)]
}

fn complex(radius: f64) -> impl Strategy<Value = Complex64> {
    (0.0..radius, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn polynomial(max_len: usize, scale: f64) -> impl Strategy<Value = AnalyticFunction> {
    prop::collection::vec(complex(scale), 1..=max_len).prop_map(|c| AnalyticFunction::polynomial(c).unwrap())
}

fn grid() -> GridSpec {
    GridSpec::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn complex_literals_round_trip(re in finite(), im in finite()) {
        let z = Complex64::new(re, im);
        let back = parse_complex(&format_complex(z)).unwrap();
        prop_assert_eq!(back.re.to_bits(), z.re.to_bits());
        prop_assert_eq!(back.im.to_bits(), z.im.to_bits());
    }

    #[test]
    fn rendered_specs_parse_back(f in polynomial(6, 2.0), z in complex(0.95)) {
        let g = parse_spec(&f.render()).unwrap();
        prop_assert!((f.evaluate(z).unwrap() - g.evaluate(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn products_evaluate_pointwise(f in polynomial(8, 1.0), g in polynomial(8, 1.0), z in complex(0.9)) {
        let h = multiply(&f, &g, 256);
        let want = f.evaluate(z).unwrap() * g.evaluate(z).unwrap();
        let slack = 1e-12 + h.tail_bound().unwrap_or(0.0);
        prop_assert!((h.evaluate(z).unwrap() - want).norm() <= slack);
    }

    #[test]
    fn cesaro_symbol_is_mean_of_powers(f in polynomial(4, 1.0), n in 1u32..12, z in complex(0.9)) {
        let mean = cesaro_symbol(&f, n, 512).unwrap();
        let w = f.evaluate(z).unwrap();
        let direct = (1..=n).map(|m| w.powu(m)).sum::<Complex64>() / n as f64;
        prop_assert!((mean.evaluate(z).unwrap() - direct).norm() <= 1e-10 * (1.0 + direct.norm()));
        let p = power(&f, n, 512);
        prop_assert!((p.evaluate(z).unwrap() - w.powu(n)).norm() <= 1e-10 * (1.0 + w.norm().powi(n as i32)));
    }

    #[test]
    fn derivative_matches_central_differences(f in polynomial(7, 1.0), z in complex(0.8)) {
        let d = f.derivative(1, 256).unwrap();
        let h = 1e-5;
        let fd = (f.evaluate(z + h).unwrap() - f.evaluate(z - h).unwrap()) / (2.0 * h);
        let exact = d.evaluate(z).unwrap();
        prop_assert!((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()));
    }

    #[test]
    fn hyperbolic_distance_is_a_metric(a in complex(0.99), b in complex(0.99), c in complex(0.99)) {
        let ab = hyperbolic_distance(a, b).unwrap();
        let ba = hyperbolic_distance(b, a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(hyperbolic_distance(a, a).unwrap().abs() < 1e-12);
        let via = hyperbolic_distance(a, c).unwrap() + hyperbolic_distance(c, b).unwrap();
        prop_assert!(ab <= via + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sup_norm_dominates_samples(f in polynomial(6, 1.0), z in complex(1.0)) {
        let s = sup_norm_hinf(&f, &grid()).unwrap();
        prop_assert!(f.evaluate(z).unwrap().norm() <= s.upper() + 1e-12);
    }

    #[test]
    fn bloch_norm_is_homogeneous(f in polynomial(5, 1.0), k in complex(3.0)) {
        let base = bloch_norm(&f, &grid()).unwrap().norm;
        let scaled = bloch_norm(&f.scale(k, 256), &grid()).unwrap().norm;
        let budget = k.norm() * base.error_estimate + scaled.error_estimate + 1e-9 * (1.0 + scaled.value);
        prop_assert!((scaled.value - k.norm() * base.value).abs() <= budget);
    }

    #[test]
    fn bloch_norm_is_subadditive(f in polynomial(5, 1.0), g in polynomial(5, 1.0)) {
        let nf = bloch_norm(&f, &grid()).unwrap().norm;
        let ng = bloch_norm(&g, &grid()).unwrap().norm;
        let nfg = bloch_norm(&f.add(&g, 256), &grid()).unwrap().norm;
        prop_assert!(nfg.value <= nf.upper() + ng.upper() + 1e-9);
    }

    #[test]
    fn sigma_of_constants_is_zero(k in complex(0.9)) {
        let s = sigma_psi(&AnalyticFunction::Constant(k), &grid()).unwrap();
        prop_assert_eq!(s.value, 0.0);
    }
}
