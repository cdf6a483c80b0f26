//! Norms, seminorms and integral conditions on the Bloch, little Bloch and
//! Besov spaces.
//!
//! Truncation tails enter the error estimates as follows. A Taylor tail `g`
//! with `|g| ≤ t` on the closed disk satisfies `(1−|z|²)|g′(z)| ≤ 2t` by the
//! Cauchy estimate on the disk of radius `1−|z|` around `z`, so Bloch-type
//! quantities pick up `2t`. Besov integrals have no such uniform bound; any
//! material tail marks those estimates unconverged instead.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::function::{AnalyticFunction, Sampler};
use crate::quadrature::{
    golden_max, integrate_area, roots_of_unity, integrate_hyperbolic_window, sup_on_disk, DiskField, DiskPoint, GridSpec, NormEstimate,
};

/// Truncated series with unknown tail are trusted on circles with `(1−r)(N+1) ≥` this.
const RESOLVED_DEPTH: f64 = 8.0;
/// A Taylor tail above this is material for Besov-type integrals.
const MATERIAL_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceTag {
    Bloch,
    LittleBloch,
    Besov(f64),
    BesovOne,
}

impl SpaceTag {
    pub fn besov(p: f64) -> Result<SpaceTag> {
        if p > 1.0 && p.is_finite() {
            Ok(SpaceTag::Besov(p))
        } else {
            Err(Error::InvalidArgument(format!("Besov exponent must satisfy 1 < p < ∞, got {p}")))
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTag::Bloch => f.write_str("bloch"),
            SpaceTag::LittleBloch => f.write_str("little-bloch"),
            SpaceTag::Besov(p) => write!(f, "besov(p={p})"),
            SpaceTag::BesovOne => f.write_str("besov1"),
        }
    }
}

impl Serialize for SpaceTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A norm `|f(0)| + seminorm` together with its seminorm part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormPair {
    pub norm: NormEstimate,
    pub seminorm: NormEstimate,
}

/// `weight(|f^{(k)}(z)|, z)` as a disk field, with FFT circle sweeps for series.
struct DerivativeField<W> {
    sampler: Sampler,
    weight: W,
}

impl<W: Fn(f64, DiskPoint) -> f64 + Sync> DiskField for DerivativeField<W> {
    fn value(&self, p: DiskPoint) -> f64 {
        (self.weight)(self.sampler.at(p.z).norm(), p)
    }

    fn circle(&self, r: f64, u: f64, n: usize) -> Vec<f64> {
        let roots = roots_of_unity(n);
        self.sampler
            .circle(r, n)
            .into_iter()
            .zip(roots.iter())
            .map(|(v, w)| (self.weight)(v.norm_sqr().sqrt(), DiskPoint { z: w * r, u }))
            .collect()
    }
}

fn field<W: Fn(f64, DiskPoint) -> f64 + Sync>(f: &AnalyticFunction, order: usize, weight: W) -> DerivativeField<W> {
    DerivativeField { sampler: f.sampler(order), weight }
}

/// Angular resolution adequate for trapezoid integration of `|f^{(k)}|^p`.
fn integration_grid(f: &AnalyticFunction, spec: &GridSpec) -> GridSpec {
    match f.degree() {
        Some(d) => spec.with_min_angular(4 * (d + 1)),
        None => spec.clone(),
    }
}

/// Angular resolution for sup scans of `f′`, which oscillates `deg f` times per turn.
fn sup_grid(f: &AnalyticFunction, spec: &GridSpec) -> GridSpec {
    match f.degree() {
        Some(d) => spec.with_min_angular(2 * (d + 1)),
        None => spec.clone(),
    }
}

fn exact_zero() -> NormEstimate {
    NormEstimate::exact(0.0).with_witness(Complex64::new(0.0, 0.0))
}

/// Ladder circles on which the stored representation is trustworthy.
pub(crate) fn resolved_ladder(f: &AnalyticFunction, spec: &GridSpec) -> Vec<(f64, f64)> {
    match (f.tail_bound(), f.degree()) {
        (None, Some(n)) => spec.ladder().filter(|(r, _)| (1.0 - r) * (n as f64 + 1.0) >= RESOLVED_DEPTH).collect(),
        _ => spec.ladder().collect(),
    }
}

/// Maximum of a field over the circle `|z| = r`: FFT samples, then golden
/// refinement around the three best samples.
pub(crate) fn circle_max<G: DiskField>(g: &G, r: f64, u: f64, n: usize) -> Result<(f64, f64)> {
    let samples = g.circle(r, u, n);
    if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("field on |z| = {r} at sample {bad}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]).then(a.cmp(&b)));
    let dtheta = 2.0 * PI / n as f64;
    let mut best = (0.0, samples[order[0]]);
    best.0 = dtheta * order[0] as f64;
    for &j in order.iter().take(3) {
        let centre = dtheta * j as f64;
        let (theta, v) = golden_max(|t| g.value(DiskPoint::polar(r, u, t)), centre - dtheta, centre + dtheta);
        if v > best.1 {
            best = (theta, v);
        }
    }
    Ok(best)
}

/// `‖f‖_∞`: maximum modulus over the closed disk, read off the unit circle
/// when `f` is continuous there, otherwise the limit of ladder circle maxima.
pub fn sup_norm_hinf(f: &AnalyticFunction, spec: &GridSpec) -> Result<NormEstimate> {
    spec.validate()?;
    if f.is_exact_constant() {
        let c = f.eval_unchecked(Complex64::new(0.0, 0.0));
        return Ok(NormEstimate::exact(c.norm()).with_witness(Complex64::new(0.0, 0.0)));
    }
    let g = field(f, 0, |m, _| m);
    let n = integration_grid(f, spec).n_angular;
    if let Some(tail) = f.tail_bound() {
        let (theta, value) = circle_max(&g, 1.0, 0.0, n)?;
        return Ok(NormEstimate {
            value,
            error_estimate: tail,
            converged: true,
            diverged: false,
            witness: Some(Complex64::from_polar(1.0, theta)),
        });
    }
    let rungs = resolved_ladder(f, spec);
    let mut maxima = Vec::with_capacity(rungs.len());
    for &(r, u) in &rungs {
        let (theta, v) = circle_max(&g, r, u, n)?;
        maxima.push((v, Complex64::from_polar(r, theta)));
    }
    ladder_limit(&maxima, |vals| vals.last().copied().unwrap_or(0.0))
}

/// Summarises a sequence of ladder values: divergence when each of the last
/// five rungs grows by more than 1%, convergence when the last two agree to 1e−9.
pub(crate) fn ladder_limit(values: &[(f64, Complex64)], limit: impl Fn(&[f64]) -> f64) -> Result<NormEstimate> {
    let Some(&(last, witness)) = values.last() else {
        return Err(Error::InvalidArgument("no resolved ladder circle for this truncation degree".into()));
    };
    let vals: Vec<f64> = values.iter().map(|v| v.0).collect();
    let diverged = vals.len() > 5 && vals[vals.len() - 6..].windows(2).all(|w| w[0] > 0.0 && w[1] > 1.01 * w[0]);
    let value = limit(&vals).max(0.0);
    let error = if vals.len() >= 2 { (last - vals[vals.len() - 2]).abs() } else { last.abs() };
    Ok(NormEstimate {
        value,
        error_estimate: error,
        converged: !diverged && error <= 1e-9 * value.max(1e-300),
        diverged,
        witness: Some(witness),
    })
}

/// `β_f = sup (1−|z|²)|f′(z)|` and `‖f‖_𝓑 = |f(0)| + β_f`.
pub fn bloch_norm(f: &AnalyticFunction, spec: &GridSpec) -> Result<NormPair> {
    let f0 = f.eval_unchecked(Complex64::new(0.0, 0.0)).norm();
    let seminorm = if f.is_exact_constant() {
        exact_zero()
    } else {
        let mut s = sup_on_disk(&field(f, 1, |m, p| p.u * m), &sup_grid(f, spec))?;
        match f.tail_bound() {
            Some(t) => s.error_estimate += 2.0 * t,
            None => s.converged = false,
        }
        s
    };
    let norm = NormEstimate { value: f0 + seminorm.value, ..seminorm.clone() };
    Ok(NormPair { norm, seminorm })
}

/// `limsup_{|z|→1} (1−|z|²)|f′(z)|`, extrapolated linearly in `1 − r` from the
/// two outermost resolved ladder circles.
pub fn little_bloch_limsup(f: &AnalyticFunction, spec: &GridSpec) -> Result<NormEstimate> {
    spec.validate()?;
    if f.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(f, 1, |m, p| p.u * m);
    let n = spec.n_angular;
    let rungs = resolved_ladder(f, spec);
    let mut values = Vec::with_capacity(rungs.len());
    for &(r, u) in &rungs {
        let (theta, v) = circle_max(&g, r, u, n)?;
        values.push((v, Complex64::from_polar(r, theta)));
    }
    let radii: Vec<f64> = rungs.iter().map(|x| x.0).collect();
    let extrapolate = |k: usize, vals: &[f64]| -> f64 {
        // Linear extrapolation to r = 1 through rungs k−1 and k.
        let (h0, h1) = (1.0 - radii[k - 1], 1.0 - radii[k]);
        vals[k] + (vals[k] - vals[k - 1]) * h1 / (h0 - h1)
    };
    let mut est = ladder_limit(&values, |vals| if vals.len() >= 2 { extrapolate(vals.len() - 1, vals) } else { vals[0] })?;
    let vals: Vec<f64> = values.iter().map(|v| v.0).collect();
    if vals.len() >= 3 {
        let k = vals.len() - 1;
        est.error_estimate = (extrapolate(k, &vals) - extrapolate(k - 1, &vals)).abs();
    }
    if let Some(t) = f.tail_bound() {
        est.error_estimate += 2.0 * t;
    }
    est.converged = !est.diverged && est.error_estimate <= 1e-6;
    est.diverged = false;
    Ok(est)
}

/// `σ_ψ = sup ½(1−|z|²)|ψ′(z)| log((1+|z|)/(1−|z|))`.
pub fn sigma_psi(psi: &AnalyticFunction, spec: &GridSpec) -> Result<NormEstimate> {
    if psi.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(psi, 1, |m, p| 0.5 * p.u * m * hyperbolic_log(p));
    let mut s = sup_on_disk(&g, &sup_grid(psi, spec))?;
    match (psi.tail_bound(), s.witness) {
        // Pointwise Cauchy bound at the witness; not a bound on the sup itself.
        (Some(t), Some(w)) => s.error_estimate += t * hyperbolic_log(DiskPoint::new(w)),
        _ => s.converged = false,
    }
    Ok(s)
}

/// `log((1+r)/(1−r)) = log((1+r)²/(1−r²))`.
fn hyperbolic_log(p: DiskPoint) -> f64 {
    let r = p.r();
    2.0 * r.ln_1p() - p.u.ln()
}

fn mark_tail(est: &mut NormEstimate, f: &AnalyticFunction) {
    match f.tail_bound() {
        Some(t) if t <= MATERIAL_TAIL * est.value.max(1.0) => {}
        _ => est.converged = false,
    }
}

fn pth_root(est: NormEstimate, p: f64) -> NormEstimate {
    let value = est.value.max(0.0).powf(1.0 / p);
    let error = if est.value > 0.0 {
        est.error_estimate / (p * est.value.powf((p - 1.0) / p))
    } else {
        est.error_estimate.powf(1.0 / p)
    };
    NormEstimate { value, error_estimate: error, ..est }
}

/// `γ_f = (∫ |f′|^p (1−|z|²)^{p−2} dA)^{1/p}` and `‖f‖_p = |f(0)| + γ_f`.
pub fn besov_seminorm(f: &AnalyticFunction, p: f64, spec: &GridSpec) -> Result<NormPair> {
    SpaceTag::besov(p)?;
    let f0 = f.eval_unchecked(Complex64::new(0.0, 0.0)).norm();
    let seminorm = if f.is_exact_constant() {
        exact_zero()
    } else {
        let g = field(f, 1, move |m, pt| m.powf(p) * pt.u.powf(p - 2.0));
        let mut integral = integrate_area(&g, &integration_grid(f, spec))?;
        mark_tail(&mut integral, f);
        pth_root(integral, p)
    };
    let norm = NormEstimate { value: f0 + seminorm.value, ..seminorm.clone() };
    Ok(NormPair { norm, seminorm })
}

/// `‖f‖_{𝓑₁} = ∫ |f″| dA`, as displayed for the 𝓑₁ space (a seminorm: it
/// vanishes on polynomials of degree ≤ 1).
pub fn besov1_seminorm(f: &AnalyticFunction, spec: &GridSpec) -> Result<NormEstimate> {
    if f.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(f, 2, |m, _| m);
    if let Sampler::Series(_) = &g.sampler {
        if g.sampler.is_zero() {
            return Ok(exact_zero());
        }
    }
    let mut est = integrate_area(&g, &integration_grid(f, spec))?;
    mark_tail(&mut est, f);
    Ok(est)
}

/// Integrand of the sufficient multiplier condition:
/// `(1−|z|²)^{p−2} |ψ′|^p (log(2/(1−|z|²)))^{p−1}`.
fn condition_density(m: f64, p: f64, pt: DiskPoint) -> f64 {
    pt.u.powf(p - 2.0) * m.powf(p) * (2.0 / pt.u).ln().powf(p - 1.0)
}

pub fn condition_31(psi: &AnalyticFunction, p: f64, spec: &GridSpec) -> Result<NormEstimate> {
    SpaceTag::besov(p)?;
    if psi.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(psi, 1, move |m, pt| condition_density(m, p, pt));
    let mut est = integrate_area(&g, &integration_grid(psi, spec))?;
    mark_tail(&mut est, psi);
    Ok(est)
}

/// Ladder maxima of `(1−|z|²)|ψ′(z)| (log(2/(1−|z|²)))^{1−1/p}`, whose
/// boundedness is necessary for `ψ` to multiply `𝓑_p`.
pub fn besov_multiplier_growth(psi: &AnalyticFunction, p: f64, spec: &GridSpec) -> Result<NormEstimate> {
    SpaceTag::besov(p)?;
    spec.validate()?;
    if psi.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(psi, 1, move |m, pt| pt.u * m * (2.0 / pt.u).ln().powf(1.0 - 1.0 / p));
    let n = sup_grid(psi, spec).n_angular;
    let mut maxima = Vec::new();
    for (r, u) in resolved_ladder(psi, spec) {
        let (theta, v) = circle_max(&g, r, u, n)?;
        maxima.push((v, Complex64::from_polar(r, theta)));
    }
    ladder_limit(&maxima, |vals| vals.iter().copied().fold(0.0, f64::max))
}

/// 64 window centres: radii `1 − 2^{−k}` (k = 1..8) times 8 equally spaced angles.
pub fn default_omega_grid() -> Vec<Complex64> {
    (1..=8)
        .flat_map(|k| {
            let r = 1.0 - 0.5f64.powi(k);
            (0..8).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / 8.0))
        })
        .collect()
}

/// Largest hyperbolic-window integral of the condition density over the
/// given centres; a lower bound on the sup over all centres.
pub fn carleson_window_sup(
    psi: &AnalyticFunction,
    p: f64,
    radius: f64,
    omega_grid: &[Complex64],
    spec: &GridSpec,
) -> Result<NormEstimate> {
    SpaceTag::besov(p)?;
    if omega_grid.is_empty() {
        return Err(Error::InvalidArgument("omega grid must not be empty".into()));
    }
    if psi.is_exact_constant() {
        return Ok(exact_zero());
    }
    let g = field(psi, 1, move |m, pt| condition_density(m, p, pt));
    let mut best: Option<NormEstimate> = None;
    for &omega in omega_grid {
        let est = integrate_hyperbolic_window(&g, omega, radius, spec)?;
        if best.as_ref().map_or(true, |b| est.value > b.value) {
            best = Some(est);
        }
    }
    let mut best = best.expect("nonempty grid");
    mark_tail(&mut best, psi);
    Ok(best)
}

/// The norm of `f` in the given space: Bloch norm for 𝓑 and 𝓑₀,
/// `|f(0)| + γ_f` for 𝓑_p, and `|f(0)| + ∫|f″| dA` for 𝓑₁.
pub fn space_norm(f: &AnalyticFunction, space: SpaceTag, spec: &GridSpec) -> Result<NormEstimate> {
    match space {
        SpaceTag::Bloch | SpaceTag::LittleBloch => Ok(bloch_norm(f, spec)?.norm),
        SpaceTag::Besov(p) => Ok(besov_seminorm(f, p, spec)?.norm),
        SpaceTag::BesovOne => {
            let s = besov1_seminorm(f, spec)?;
            let f0 = f.eval_unchecked(Complex64::new(0.0, 0.0)).norm();
            Ok(NormEstimate { value: f0 + s.value, ..s })
        }
    }
}

/// Empirical constant in the pointwise growth bounds
/// `|f(z)| ≤ C ‖f‖ log(2/(1−|z|²))` (Bloch) and
/// `|f(z)| ≤ C ‖f‖_p (log(2/(1−|z|²)))^{1−1/p}` (Besov).
pub fn growth_ratio(f: &AnalyticFunction, space: SpaceTag, spec: &GridSpec) -> Result<NormEstimate> {
    let (norm, exponent) = match space {
        SpaceTag::Bloch | SpaceTag::LittleBloch => (bloch_norm(f, spec)?.norm.value, 1.0),
        SpaceTag::Besov(p) => (besov_seminorm(f, p, spec)?.norm.value, 1.0 - 1.0 / p),
        SpaceTag::BesovOne => {
            return Err(Error::InvalidArgument("growth ratio is defined for Bloch and Besov(p) only".into()))
        }
    };
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("growth ratio needs a function of nonzero norm".into()));
    }
    let g = field(f, 0, move |m, pt| m / (norm * (2.0 / pt.u).ln().powf(exponent)));
    sup_on_disk(&g, spec)
}

/// `|f(0)| + (β_f/2) log((1+|z|)/(1−|z|))`, the radial integral of the Bloch bound.
pub fn radial_growth_bound(f0_abs: f64, beta: f64, z: Complex64) -> f64 {
    f0_abs + 0.5 * beta * hyperbolic_log(DiskPoint::new(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z() -> AnalyticFunction {
        AnalyticFunction::identity()
    }

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn hinf_examples() {
        assert_eq!(sup_norm_hinf(&z(), &grid()).unwrap().value, 1.0);
        let m = AnalyticFunction::mobius(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
        assert!((sup_norm_hinf(&m, &grid()).unwrap().value - 1.0).abs() < 1e-9);
        assert_eq!(sup_norm_hinf(&AnalyticFunction::constant(c(3.0, 4.0)), &grid()).unwrap().value, 5.0);
    }

    #[test]
    fn bloch_examples() {
        let b = bloch_norm(&z(), &grid()).unwrap();
        assert_eq!(b.seminorm.value, 1.0);
        assert_eq!(b.norm.value, 1.0);
        let z2 = AnalyticFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let b = bloch_norm(&z2, &grid()).unwrap();
        assert!((b.seminorm.value - 4.0 / (3.0 * 3f64.sqrt())).abs() < 1e-6);
        let k = bloch_norm(&AnalyticFunction::constant(c(0.0, -2.0)), &grid()).unwrap();
        assert_eq!((k.seminorm.value, k.norm.value), (0.0, 2.0));
    }

    #[test]
    fn little_bloch_examples() {
        let p = AnalyticFunction::polynomial(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0), c(0.0, 0.3)]).unwrap();
        assert!(little_bloch_limsup(&p, &grid()).unwrap().value < 1e-9);
        assert_eq!(little_bloch_limsup(&AnalyticFunction::constant(c(1.0, 0.0)), &grid()).unwrap().value, 0.0);
    }

    #[test]
    fn besov_examples() {
        let g2 = besov_seminorm(&z(), 2.0, &grid()).unwrap();
        assert!((g2.seminorm.value - PI.sqrt()).abs() < 1e-6);
        let g3 = besov_seminorm(&z(), 3.0, &grid()).unwrap();
        assert!((g3.seminorm.value - (PI / 2.0).cbrt()).abs() < 1e-5);
        assert!(besov_seminorm(&z(), 1.0, &grid()).is_err());
        let k = besov_seminorm(&AnalyticFunction::constant(c(2.0, 0.0)), 1.7, &grid()).unwrap();
        assert_eq!((k.seminorm.value, k.norm.value), (0.0, 2.0));
    }

    #[test]
    fn besov1_examples() {
        let z2 = AnalyticFunction::polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((besov1_seminorm(&z2, &grid()).unwrap().value - 2.0 * PI).abs() < 1e-7);
        assert_eq!(besov1_seminorm(&z(), &grid()).unwrap().value, 0.0);
    }

    #[test]
    fn condition_examples() {
        let full = condition_31(&z(), 2.0, &grid()).unwrap();
        assert!((full.value - PI * (1.0 + 2f64.ln())).abs() < 1e-6, "{full:?}");
        let half = condition_31(&z().scale(c(0.5, 0.0), 256), 2.0, &grid()).unwrap();
        assert!((half.value - 0.25 * full.value).abs() < 1e-6);
        assert_eq!(condition_31(&AnalyticFunction::constant(c(1.0, 1.0)), 2.0, &grid()).unwrap().value, 0.0);
    }

    #[test]
    fn windows_stay_below_the_full_integral() {
        let full = condition_31(&z(), 2.0, &grid()).unwrap();
        let w = carleson_window_sup(&z(), 2.0, 1.5, &default_omega_grid(), &grid()).unwrap();
        assert!(w.value <= full.value + full.error_estimate + w.error_estimate);
        assert_eq!(default_omega_grid().len(), 64);
    }

    #[test]
    fn growth_ratio_of_constant_one() {
        let g = growth_ratio(&AnalyticFunction::constant(c(1.0, 0.0)), SpaceTag::Bloch, &grid()).unwrap();
        assert!((g.value - 1.0 / 2f64.ln()).abs() < 1e-9);
        assert_eq!(g.witness, Some(c(0.0, 0.0)));
        assert!(growth_ratio(&AnalyticFunction::constant(c(0.0, 0.0)), SpaceTag::Bloch, &grid()).is_err());
    }

    #[test]
    fn space_tags() {
        assert_eq!(SpaceTag::besov(2.0).unwrap().to_string(), "besov(p=2)");
        assert!(SpaceTag::besov(f64::INFINITY).is_err());
        assert_eq!(serde_json::to_string(&SpaceTag::LittleBloch).unwrap(), "\"little-bloch\"");
    }
}
