//! The acceptance suite run by `ergodisk check`.
//!
//! Criteria 1 to 8 are evaluated here. Criterion 9 compares the bytes of two
//! consecutive reports and is handled by the command itself.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_besov, classify_bloch, classify_little_bloch, ClassificationReport, Outcome, Status};
use crate::dynamics::{cesaro_trace, iterate_trace, trace_degree};
use crate::error::Result;
use crate::function::{cesaro_symbol, multiply, AnalyticFunction};
use crate::norms::{
    besov1_seminorm, besov_seminorm, bloch_norm, carleson_window_sup, condition_31, default_omega_grid, growth_ratio,
    radial_growth_bound, space_norm, sup_norm_hinf, SpaceTag,
};
use crate::quadrature::{integrate_area, DiskPoint, GridSpec, NormEstimate};

/// Seeded cases per property suite.
pub const PROPERTY_CASES: usize = 50;
const POINTS_PER_FUNCTION: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub grid: GridSpec,
    pub unit_band: f64,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

pub const CRITERIA: [(u8, &str); 8] = [
    (1, "quadrature closed forms"),
    (2, "besov seminorms and the multiplier condition integral"),
    (3, "cesaro decay for the constant symbol i"),
    (4, "iterates and cesaro means for z/2"),
    (5, "cesaro means of z stay away from zero"),
    (6, "classifier matrix"),
    (7, "property suites"),
    (8, "growth bounds"),
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> AnalyticFunction {
    AnalyticFunction::Constant(c(1.0, 0.0))
}

fn poly(coeffs: Vec<Complex64>) -> AnalyticFunction {
    AnalyticFunction::polynomial(coeffs).expect("finite coefficients")
}

/// Collects named closed-form comparisons.
#[derive(Default)]
struct Checks {
    lines: Vec<String>,
    failed: usize,
}

impl Checks {
    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.record(ok, format!("{what}: {got:.12e} vs {want:.12e} (tol {tol:e})"));
    }

    fn record(&mut self, ok: bool, line: String) {
        if !ok {
            self.failed += 1;
        }
        self.lines.push(format!("{}{line}", if ok { "" } else { "FAILED " }));
    }

    fn finish(self, id: u8) -> CriterionResult {
        let name = CRITERIA.iter().find(|c| c.0 == id).map_or("", |c| c.1).to_string();
        CriterionResult { id, name, passed: self.failed == 0, detail: self.lines.join("; ") }
    }
}

fn criterion_1(spec: &GridSpec) -> Result<CriterionResult> {
    let mut k = Checks::default();
    k.near("∫1 dA", integrate_area(&|_: DiskPoint| 1.0, spec)?.value, PI, 1e-8);
    k.near("∫log(2/(1−|z|²)) dA", integrate_area(&|p: DiskPoint| (2.0 / p.u).ln(), spec)?.value, PI * (1.0 + LN_2), 1e-6);
    k.near("∫(1−|z|²)^(−1/2) dA", integrate_area(&|p: DiskPoint| p.u.powf(-0.5), spec)?.value, 2.0 * PI, 1e-5);
    Ok(k.finish(1))
}

fn criterion_2(spec: &GridSpec) -> Result<CriterionResult> {
    let z = AnalyticFunction::identity();
    let z2 = poly(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let half_z = poly(vec![c(0.0, 0.0), c(0.5, 0.0)]);
    let mut k = Checks::default();
    k.near("γ(z, p=2)", besov_seminorm(&z, 2.0, spec)?.seminorm.value, PI.sqrt(), 1e-6);
    k.near("γ(z, p=3)", besov_seminorm(&z, 3.0, spec)?.seminorm.value, (PI / 2.0).cbrt(), 1e-5);
    k.near("∫|(z²)″| dA", besov1_seminorm(&z2, spec)?.value, 2.0 * PI, 1e-7);
    let full = condition_31(&z, 2.0, spec)?.value;
    k.near("condition integral (z, p=2)", full, PI * (1.0 + LN_2), 1e-6);
    k.near("condition integral (z/2, p=2)", condition_31(&half_z, 2.0, spec)?.value, 0.25 * full, 1e-6);
    Ok(k.finish(2))
}

fn criterion_3(spec: &GridSpec) -> Result<CriterionResult> {
    let n_max = 10_000;
    let i = AnalyticFunction::Constant(c(0.0, 1.0));
    let trace = cesaro_trace(&i, &one(), SpaceTag::Bloch, n_max, spec, 256)?;
    let mut over_bound = 0;
    let mut over_slack = 0;
    let mut worst = 0.0f64;
    for e in &trace.entries {
        let v = e.cesaro_norm.as_ref().expect("cesaro column").value;
        let n = e.n as f64;
        if v > 4.0 / (n * 2f64.sqrt()) {
            over_bound += 1;
        }
        if n * v > 2.0 * 2f64.sqrt() {
            over_slack += 1;
        }
        worst = worst.max(n * v);
    }
    let mut k = Checks::default();
    k.record(over_bound == 0, format!("{over_bound} of {n_max} entries exceed 4/(n√2)"));
    k.record(over_slack == 0, format!("{over_slack} entries exceed n·norm ≤ 2√2; max n·norm = {worst:.12e}"));
    Ok(k.finish(3))
}

/// `sup_{0<r<1} ½(1−r²) log((1+r)/(1−r))` by golden-section search in `r`.
pub fn sigma_identity_oracle() -> f64 {
    let g = |r: f64| 0.5 * (1.0 - r * r) * ((1.0 + r) / (1.0 - r)).ln();
    let (mut a, mut b) = (0.0f64, 1.0 - 1e-9);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - inv_phi * (b - a);
        let x2 = a + inv_phi * (b - a);
        if g(x1) < g(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    g(0.5 * (a + b))
}

fn criterion_4(spec: &GridSpec) -> Result<CriterionResult> {
    let n_max = 200;
    let psi = poly(vec![c(0.0, 0.0), c(0.5, 0.0)]);
    let sigma = 0.5 * sigma_identity_oracle();
    let k_const = (1..=n_max).map(|n| n as f64 * 0.5f64.powi(n - 1) * sigma).fold(0.0, f64::max);
    let degree = trace_degree(&psi, &one(), n_max as u32);
    let iterates = iterate_trace(&psi, &one(), SpaceTag::Bloch, n_max as u32, spec, degree)?;
    let sup_iter = iterates.entries.iter().map(|e| e.iterate_norm.as_ref().expect("iterate column").value).fold(0.0, f64::max);
    let means = cesaro_trace(&psi, &one(), SpaceTag::Bloch, n_max as u32, spec, degree)?;
    let last = means.entries.last().and_then(|e| e.cesaro_norm.clone()).expect("cesaro column");
    let mut k = Checks::default();
    let bound = 1.0 + k_const + 1e-3;
    k.record(sup_iter <= bound, format!("sup iterate norm {sup_iter:.12e} ≤ {bound:.12e}"));
    k.record(last.value < 0.02, format!("cesaro norm at n=200 {:.12e} < 0.02", last.value));
    Ok(k.finish(4))
}

fn criterion_5(spec: &GridSpec) -> Result<CriterionResult> {
    let z = AnalyticFunction::identity();
    let n_max = 1000;
    let trace = cesaro_trace(&z, &one(), SpaceTag::Bloch, n_max, spec, trace_degree(&z, &one(), n_max))?;
    let (n_min, v_min) = trace.entries[99..]
        .iter()
        .map(|e| (e.n, e.cesaro_norm.as_ref().expect("cesaro column").value))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let mut k = Checks::default();
    k.record(v_min >= 0.3, format!("min over n∈[100,1000] of cesaro norm = {v_min:.12e} at n={n_min}"));
    Ok(k.finish(5))
}

/// Expected verdicts on bloch, little-bloch and besov(p=2).
fn expected_matrix() -> Vec<(&'static str, [[Status; 3]; 3])> {
    use Status::{Fails as F, Holds as H, Undecided as U};
    let cond = |o: Outcome| Status::ConditionalOn { premise: "power bounded".into(), resolves_to: o };
    let all = |s: Status| [s.clone(), s.clone(), s];
    let unit_disk_self_map = [[U, cond(Outcome::Fails), F], [U, cond(Outcome::Holds), F], [H, H, F]];
    vec![
        ("const 0.5", [all(H), all(H), all(H)]),
        ("const 0+1i", [all(H), all(H), all(H)]),
        ("const 2", [all(F), all(F), all(F)]),
        ("poly 0 1", unit_disk_self_map.clone()),
        ("poly 0 0.5", [all(H), all(H), all(H)]),
        ("mobius 0.5", unit_disk_self_map),
    ]
}

fn statuses(r: &ClassificationReport) -> [Status; 3] {
    [r.power_bounded.status.clone(), r.mean_ergodic.status.clone(), r.uniformly_mean_ergodic.status.clone()]
}

fn criterion_6(spec: &GridSpec, tol: f64) -> Result<CriterionResult> {
    let mut k = Checks::default();
    let mut matched = 0;
    for (text, rows) in expected_matrix() {
        let psi = crate::function::parse_spec(text)?;
        let reports =
            [classify_bloch(&psi, spec, tol)?, classify_little_bloch(&psi, spec, tol)?, classify_besov(&psi, 2.0, spec, tol)?];
        for (report, want) in reports.iter().zip(rows.iter()) {
            let got = statuses(report);
            for (g, w) in got.iter().zip(want.iter()) {
                if g == w {
                    matched += 1;
                } else {
                    k.record(false, format!("{text} on {}: got {g:?}, expected {w:?}", report.space));
                }
            }
        }
        if text == "poly 0 1" {
            let cited = reports[0].power_bounded.citation.contains("is still open");
            k.record(cited, "z on bloch cites the open problem".into());
        }
    }
    k.record(matched == 54, format!("{matched} of 54 verdicts (18 cells) match"));
    Ok(k.finish(6))
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> AnalyticFunction {
    let d = rng.gen_range(1..=max_degree);
    poly((0..=d).map(|_| random_complex(rng)).collect())
}

/// Polynomial with `Σ|c_k| = target`, hence `‖ψ‖_∞ ≤ target`.
fn random_contraction(rng: &mut ChaCha8Rng, max_degree: usize, target: f64) -> AnalyticFunction {
    let p = random_poly(rng, max_degree);
    let coeffs = p.stored_coefficients().expect("polynomial").to_vec();
    let mass: f64 = coeffs.iter().map(|x| x.norm()).sum();
    poly(coeffs.into_iter().map(|x| x * (target / mass)).collect())
}

fn random_point(rng: &mut ChaCha8Rng, max_radius: f64) -> Complex64 {
    let r = max_radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

fn random_mobius(rng: &mut ChaCha8Rng, max_modulus: f64) -> AnalyticFunction {
    let a = random_point(rng, max_modulus);
    let rotation = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
    AnalyticFunction::mobius(a, rotation).expect("|a| < 1")
}

fn suite_rng(spec: &GridSpec, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Runs `cases` seeded checks and reports how many failed.
fn property(
    k: &mut Checks,
    name: &str,
    spec: &GridSpec,
    salt: u64,
    mut case: impl FnMut(&mut ChaCha8Rng) -> Result<bool>,
) -> Result<()> {
    let mut rng = suite_rng(spec, salt);
    let mut failures = 0;
    for _ in 0..PROPERTY_CASES {
        if !case(&mut rng)? {
            failures += 1;
        }
    }
    k.record(failures == 0, format!("{name}: {failures} of {PROPERTY_CASES} cases failed"));
    Ok(())
}

fn budget(a: &NormEstimate) -> f64 {
    a.error_estimate
}

fn criterion_7(spec: &GridSpec) -> Result<CriterionResult> {
    let mut k = Checks::default();

    property(&mut k, "schwarz-pick", spec, 1, |rng| {
        let psi = if rng.gen_bool(0.7) {
            let target = rng.gen_range(0.05..1.0);
            random_contraction(rng, 8, target)
        } else {
            random_mobius(rng, 0.9)
        };
        let beta = bloch_norm(&psi, spec)?.seminorm;
        let hinf = sup_norm_hinf(&psi, spec)?;
        Ok(hinf.value > 1.0 + 1e-12 || beta.value <= hinf.value + 1e-6)
    })?;

    property(&mut k, "derivative vs finite differences", spec, 2, |rng| {
        let f = if rng.gen_bool(0.8) { random_poly(rng, 10) } else { random_mobius(rng, 0.8) };
        let z = random_point(rng, 0.9);
        let h = 1e-5;
        let d = f.derivative(1, 256)?.eval_unchecked(z);
        let fd = (f.eval_unchecked(z + h) - f.eval_unchecked(z - h)) / (2.0 * h);
        Ok((d - fd).norm() <= 1e-6 * d.norm().max(1.0))
    })?;

    property(&mut k, "pointwise cesaro identity", spec, 3, |rng| {
        let psi = if rng.gen_bool(0.7) { random_contraction(rng, 5, 1.0) } else { random_mobius(rng, 0.7) };
        let f = random_poly(rng, 6);
        let n = rng.gen_range(1..=30u32);
        let z = random_point(rng, 0.95);
        let lhs = multiply(&cesaro_symbol(&psi, n, 512)?, &f, 512).eval_unchecked(z);
        let w = psi.eval_unchecked(z);
        let mut sum = c(0.0, 0.0);
        let mut power = c(1.0, 0.0);
        for _ in 0..n {
            power *= w;
            sum += power;
        }
        let rhs = f.eval_unchecked(z) * sum / n as f64;
        Ok((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0))
    })?;

    property(&mut k, "norm homogeneity", spec, 4, |rng| {
        let f = random_poly(rng, 8);
        let scale = random_complex(rng) * 3.0;
        let g = f.scale(scale, 256);
        let space = match rng.gen_range(0..4) {
            0 => SpaceTag::Bloch,
            1 => SpaceTag::Besov(rng.gen_range(1.2..4.0)),
            2 => SpaceTag::BesovOne,
            _ => SpaceTag::LittleBloch,
        };
        let a = space_norm(&f, space, spec)?;
        let b = space_norm(&g, space, spec)?;
        let want = scale.norm() * a.value;
        Ok((b.value - want).abs() <= 1e-9 * want.max(1e-300) + budget(&b) + scale.norm() * budget(&a))
    })?;

    property(&mut k, "triangle inequality", spec, 5, |rng| {
        let f = random_poly(rng, 8);
        let g = random_poly(rng, 8);
        let s = bloch_norm(&f.add(&g, 256), spec)?.norm;
        let a = bloch_norm(&f, spec)?.norm;
        let b = bloch_norm(&g, spec)?.norm;
        Ok(s.value <= a.value + b.value + budget(&s) + budget(&a) + budget(&b) + 1e-9)
    })?;

    let omegas = default_omega_grid();
    property(&mut k, "windows below the condition integral", spec, 6, |rng| {
        let target = rng.gen_range(0.1..1.0);
        let psi = random_contraction(rng, 6, target);
        let p = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
        let radius = rng.gen_range(0.5..2.5);
        let w = carleson_window_sup(&psi, p, radius, &omegas, spec)?;
        let full = condition_31(&psi, p, spec)?;
        Ok(w.value <= full.value + budget(&w) + budget(&full) + 1e-9 * full.value)
    })?;

    Ok(k.finish(7))
}

fn criterion_8(spec: &GridSpec) -> Result<CriterionResult> {
    let mut k = Checks::default();
    let mut rng = suite_rng(spec, 8);
    let mut violations = 0;
    for _ in 0..PROPERTY_CASES {
        let f = poly((0..=10).map(|_| random_complex(&mut rng)).collect());
        let pair = bloch_norm(&f, spec)?;
        let beta = pair.seminorm.upper();
        let f0 = f.eval_unchecked(c(0.0, 0.0)).norm();
        for _ in 0..POINTS_PER_FUNCTION {
            let z = random_point(&mut rng, 0.999);
            if f.eval_unchecked(z).norm() > radial_growth_bound(f0, beta, z) * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    let total = PROPERTY_CASES * POINTS_PER_FUNCTION;
    k.record(violations == 0, format!("radial growth bound: {violations} of {total} points violate it"));
    let ratio = growth_ratio(&one(), SpaceTag::Bloch, spec)?;
    k.near("literal growth ratio for f ≡ 1 (exceeds 1; documented anomaly)", ratio.value, 1.0 / LN_2, 1e-9);
    Ok(k.finish(8))
}

pub fn run_criterion(id: u8, spec: &GridSpec, tol: f64) -> Result<CriterionResult> {
    match id {
        1 => criterion_1(spec),
        2 => criterion_2(spec),
        3 => criterion_3(spec),
        4 => criterion_4(spec),
        5 => criterion_5(spec),
        6 => criterion_6(spec, tol),
        7 => criterion_7(spec),
        8 => criterion_8(spec),
        other => Err(crate::Error::InvalidArgument(format!("no acceptance criterion {other}"))),
    }
}

/// Criteria 1 to 8; an evaluation error counts as a failure of that criterion.
pub fn run_suite(spec: &GridSpec, tol: f64) -> SuiteReport {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .map(|&(id, name)| {
            run_criterion(id, spec, tol).unwrap_or_else(|e| CriterionResult {
                id,
                name: name.to_string(),
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect();
    let passed = criteria.iter().all(|c| c.passed);
    SuiteReport { grid: spec.clone(), unit_band: tol, criteria, passed }
}
