//! Library results against values computed independently in test code.

use std::f64::consts::{LN_2, PI};

use ergodisk::classify::{classify, Status};
use ergodisk::dynamics::{apply_mult, bloch_opnorm_bounds, cesaro_trace, iterate_trace, opnorm_lower_probe, Dictionary};
use ergodisk::function::constant_cesaro;
use ergodisk::norms::{bloch_norm, sigma_psi, SpaceTag};
use ergodisk::quadrature::{integrate_area, integrate_hyperbolic_window, DiskPoint, GridSpec};
use ergodisk::AnalyticFunction;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> AnalyticFunction {
    AnalyticFunction::Constant(c(1.0, 0.0))
}

fn poly(coeffs: &[(f64, f64)]) -> AnalyticFunction {
    AnalyticFunction::polynomial(coeffs.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
}

/// Dense scan plus ternary search of a unimodal function on `[a, b]`.
fn max_1d(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let steps = 20_000;
    let h = (b - a) / steps as f64;
    let k = (0..=steps).max_by(|&i, &j| f(a + i as f64 * h).total_cmp(&f(a + j as f64 * h))).unwrap();
    let (mut lo, mut hi) = ((a + (k as f64 - 1.0) * h).max(a), (a + (k as f64 + 1.0) * h).min(b));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi))
}

#[test]
fn sigma_of_identity_matches_radial_oracle() {
    // For ψ = z the defining sup reduces to the radial profile
    // (1−r²)/2 · log((1+r)/(1−r)).
    let oracle = max_1d(|r| 0.5 * (1.0 - r * r) * ((1.0 + r) / (1.0 - r)).ln(), 0.0, 1.0 - 1e-12);
    let got = sigma_psi(&AnalyticFunction::identity(), &GridSpec::default()).unwrap();
    assert!((got.value - oracle).abs() < 1e-6, "{} vs {oracle}", got.value);
    assert!((oracle - 0.447743).abs() < 1e-6);
}

#[test]
fn operator_norm_bounds_for_identity() {
    let oracle = 1.0 + max_1d(|r| 0.5 * (1.0 - r * r) * ((1.0 + r) / (1.0 - r)).ln(), 0.0, 1.0 - 1e-12);
    let b = bloch_opnorm_bounds(&AnalyticFunction::identity(), &GridSpec::default()).unwrap();
    assert!((b.lower.value - 1.0).abs() < 1e-9);
    assert!((b.upper.value - oracle).abs() < 1e-6, "{} vs {oracle}", b.upper.value);
}

#[test]
fn iterates_of_identity_match_closed_form() {
    // ‖zⁿ‖ = sup_r n r^{n−1}(1−r²), attained at r² = (n−1)/(n+1).
    let n_max = 60;
    let t = iterate_trace(&AnalyticFunction::identity(), &one(), SpaceTag::Bloch, n_max, &GridSpec::default(), 256).unwrap();
    for e in &t.entries {
        let n = e.n as f64;
        let oracle = if e.n == 1 { 1.0 } else { n * ((n - 1.0) / (n + 1.0)).powf(0.5 * (n - 1.0)) * 2.0 / (n + 1.0) };
        let got = e.iterate_norm.as_ref().unwrap().value;
        assert!((got - oracle).abs() < 1e-6, "n = {}: {got} vs {oracle}", e.n);
    }
}

#[test]
fn window_around_origin_matches_closed_form() {
    // D(0, log 3) is |z| < 1/2, and ∫_{|z|<1/2} log(2/(1−|z|²)) dA has a closed form.
    let g = |p: DiskPoint| (2.0 / p.u).ln();
    let want = PI * (0.25 * LN_2 + 0.25 + 0.75 * 0.75f64.ln());
    let got = integrate_hyperbolic_window(&g, c(0.0, 0.0), 3f64.ln(), &GridSpec::default()).unwrap();
    assert!((got.value - want).abs() < 1e-6, "{} vs {want}", got.value);
    let area = integrate_hyperbolic_window(&|_: DiskPoint| 1.0, c(0.0, 0.0), 3f64.ln(), &GridSpec::default()).unwrap();
    assert!((area.value - PI / 4.0).abs() < 1e-4);
}

#[test]
fn radial_moments() {
    // ∫ |z|^{2k} dA = π/(k+1).
    for k in 0..6 {
        let got = integrate_area(&|p: DiskPoint| p.z.norm_sqr().powi(k), &GridSpec::default()).unwrap();
        assert!((got.value - PI / (k as f64 + 1.0)).abs() < 1e-8, "k = {k}");
    }
}

#[test]
fn multiplication_matches_naive_convolution() {
    let a = [(1.0, 0.5), (-0.25, 0.0), (0.0, 2.0), (0.5, -0.5)];
    let b = [(0.0, 1.0), (3.0, 0.0), (-1.0, -1.0)];
    let mut naive = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            naive[i + j] += c(x.0, x.1) * c(y.0, y.1);
        }
    }
    let product = apply_mult(&poly(&a), &poly(&b));
    let got = product.stored_coefficients().unwrap();
    assert_eq!(got.len(), naive.len());
    for (g, w) in got.iter().zip(&naive) {
        assert!((g - w).norm() < 1e-14);
    }
}

#[test]
fn constant_cesaro_matches_direct_sum() {
    for xi in [c(0.0, 1.0), c(-1.0, 0.0), c(0.5, 0.5), c(2.0, 0.0), c(1.0, 0.0)] {
        let mut power = c(1.0, 0.0);
        let mut sum = c(0.0, 0.0);
        for n in 1..=40u32 {
            power *= xi;
            sum += power;
            let want = sum / n as f64;
            let got = constant_cesaro(xi, n);
            assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()), "ξ = {xi}, n = {n}");
        }
    }
}

#[test]
fn rotation_trace_respects_reference_bound() {
    let t = cesaro_trace(&AnalyticFunction::Constant(c(0.0, 1.0)), &one(), SpaceTag::Bloch, 100, &GridSpec::default(), 256)
        .unwrap();
    let bound = t.reference_bound.as_ref().unwrap();
    for (e, b) in t.entries.iter().zip(bound) {
        let m = e.cesaro_norm.as_ref().unwrap();
        assert!(m.value <= 4.0 / (e.n as f64 * 2f64.sqrt()) + m.error_estimate);
        assert!((b - 4.0 / (e.n as f64 * 2f64.sqrt())).abs() < 1e-12);
        if e.n % 4 == 0 {
            assert!(m.value.abs() < 1e-12);
        }
    }
}

#[test]
fn probe_of_identity_stays_near_one() {
    let dict = Dictionary::new(vec![one(), AnalyticFunction::identity(), poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])]).unwrap();
    let probe = opnorm_lower_probe(&AnalyticFunction::identity(), SpaceTag::Bloch, 200, &dict, &GridSpec::default(), 512)
        .unwrap();
    for e in &probe {
        assert!(e.lower_bound >= 1.0 - 1e-9 && e.lower_bound <= 1.1, "n = {}: {}", e.n, e.lower_bound);
    }
}

#[test]
fn constants_have_zero_sigma_and_hold() {
    let half = AnalyticFunction::Constant(c(0.5, 0.0));
    let r = classify(&half, SpaceTag::Bloch, &GridSpec::default(), 1e-9).unwrap();
    for v in [&r.power_bounded, &r.mean_ergodic, &r.uniformly_mean_ergodic] {
        assert_eq!(v.status, Status::Holds);
    }
    let json = serde_json::to_value(&r).unwrap();
    let sigma = json["power_bounded"]["evidence"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == "sigma_psi")
        .expect("sigma evidence");
    assert_eq!(sigma["value"], 0.0);
}

#[test]
fn identity_is_open_for_power_boundedness_on_bloch() {
    let r = classify(&AnalyticFunction::identity(), SpaceTag::Bloch, &GridSpec::default(), 1e-9).unwrap();
    assert_eq!(r.power_bounded.status, Status::Undecided);
    assert!(r.power_bounded.citation.contains("is still open"));
    assert_eq!(r.uniformly_mean_ergodic.status, Status::Fails);
    let b = bloch_norm(&AnalyticFunction::identity(), &GridSpec::default()).unwrap();
    assert!((b.norm.value - 1.0).abs() < 1e-6);
}
