//! The multiplication operator `M_ψ f = ψ f`, its iterates and Cesàro means.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{multiply, AnalyticFunction, CesaroAccumulator, DEFAULT_MAX_DEGREE};
use crate::norms::{bloch_norm, sigma_psi, space_norm, sup_norm_hinf, SpaceTag};
use crate::quadrature::{GridSpec, NormEstimate};

/// Largest truncation degree chosen automatically for traces.
pub const MAX_TRACE_DEGREE: usize = 4096;
/// Degree used for Möbius and Taylor symbols in traces.
const SERIES_TRACE_DEGREE: usize = 1024;
/// Entries whose truncation tail exceeds this fraction of the norm are flagged.
const MATERIAL_TAIL_FRACTION: f64 = 0.1;

/// `ψ f`, exact for polynomial inputs.
pub fn apply_mult(psi: &AnalyticFunction, f: &AnalyticFunction) -> AnalyticFunction {
    let degree = psi.degree().unwrap_or(0) + f.degree().unwrap_or(0);
    multiply(psi, f, degree.max(DEFAULT_MAX_DEGREE))
}

/// Truncation degree that keeps `ψⁿ f` exact for polynomials up to [`MAX_TRACE_DEGREE`].
pub fn trace_degree(psi: &AnalyticFunction, f: &AnalyticFunction, n: u32) -> usize {
    let exact = |g: &AnalyticFunction| matches!(g, AnalyticFunction::Constant(_) | AnalyticFunction::Polynomial(_));
    if exact(psi) && exact(f) {
        let d = psi.degree().unwrap_or(0) * n as usize + f.degree().unwrap_or(0);
        d.clamp(DEFAULT_MAX_DEGREE, MAX_TRACE_DEGREE)
    } else {
        SERIES_TRACE_DEGREE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub n: u32,
    pub iterate_norm: Option<NormEstimate>,
    pub cesaro_norm: Option<NormEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateTrace {
    pub space: SpaceTag,
    pub psi_id: String,
    pub f_id: String,
    pub entries: Vec<TraceEntry>,
    pub reference_bound: Option<Vec<f64>>,
}

fn check_length(n_max: u32) -> Result<()> {
    if n_max == 0 {
        Err(Error::InvalidArgument("trace length must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `ψⁿ f` for `n = 1..=n_max`, each built from the previous one.
fn iterates(psi: &AnalyticFunction, f: &AnalyticFunction, n_max: u32, max_degree: usize) -> Vec<AnalyticFunction> {
    let psi = psi.expanded(max_degree);
    let mut current = f.clone();
    (0..n_max)
        .map(|_| {
            current = multiply(&current, &psi, max_degree);
            current.clone()
        })
        .collect()
}

/// `(1/n) Σ_{m=1}^{n} ψ^m f` for `n = 1..=n_max`.
fn cesaro_means(psi: &AnalyticFunction, f: &AnalyticFunction, n_max: u32, max_degree: usize) -> Vec<AnalyticFunction> {
    let mut acc = CesaroAccumulator::new(psi.clone(), max_degree);
    let mut out = Vec::with_capacity(n_max as usize);
    loop {
        out.push(multiply(&acc.mean(), f, max_degree));
        if acc.index() == n_max {
            break;
        }
        acc.advance();
    }
    out
}

fn flag_tail(mut est: NormEstimate, g: &AnalyticFunction) -> NormEstimate {
    match g.tail_bound() {
        Some(t) if t <= MATERIAL_TAIL_FRACTION * est.value => {}
        Some(0.0) => {}
        _ => est.converged = false,
    }
    est
}

fn norms_of(fns: &[AnalyticFunction], space: SpaceTag, spec: &GridSpec) -> Result<Vec<NormEstimate>> {
    fns.par_iter().map(|g| space_norm(g, space, spec).map(|e| flag_tail(e, g))).collect()
}

/// `4‖f‖/(n|1−ξ|)` for a constant symbol `ξ ≠ 1` with `|ξ| ≤ 1`.
fn reference_bound(
    psi: &AnalyticFunction,
    f: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    spec: &GridSpec,
) -> Result<Option<Vec<f64>>> {
    let Some(xi) = psi.as_constant() else { return Ok(None) };
    if xi == Complex64::new(1.0, 0.0) || xi.norm() > 1.0 + 1e-12 {
        return Ok(None);
    }
    let norm_f = space_norm(f, space, spec)?.upper();
    let gap = (Complex64::new(1.0, 0.0) - xi).norm();
    Ok(Some((1..=n_max).map(|n| 4.0 * norm_f / (n as f64 * gap)).collect()))
}

fn build_trace(
    psi: &AnalyticFunction,
    f: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    spec: &GridSpec,
    max_degree: usize,
    with_iterates: bool,
    with_means: bool,
) -> Result<IterateTrace> {
    check_length(n_max)?;
    spec.validate()?;
    let iterate_norms = if with_iterates {
        norms_of(&iterates(psi, f, n_max, max_degree), space, spec)?.into_iter().map(Some).collect()
    } else {
        vec![None; n_max as usize]
    };
    let (mean_norms, bound) = if with_means {
        let norms = norms_of(&cesaro_means(psi, f, n_max, max_degree), space, spec)?;
        (norms.into_iter().map(Some).collect(), reference_bound(psi, f, space, n_max, spec)?)
    } else {
        (vec![None; n_max as usize], None)
    };
    let entries = iterate_norms
        .into_iter()
        .zip(mean_norms)
        .enumerate()
        .map(|(k, (iterate_norm, cesaro_norm))| TraceEntry { n: k as u32 + 1, iterate_norm, cesaro_norm })
        .collect();
    Ok(IterateTrace { space, psi_id: psi.render(), f_id: f.render(), entries, reference_bound: bound })
}

/// `‖ψⁿ f‖` for `n = 1..=n_max` in the norm of `space`.
pub fn iterate_trace(
    psi: &AnalyticFunction,
    f: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    spec: &GridSpec,
    max_degree: usize,
) -> Result<IterateTrace> {
    build_trace(psi, f, space, n_max, spec, max_degree, true, false)
}

/// `‖(1/n) Σ_{m=1}^{n} ψ^m f‖` for `n = 1..=n_max`, with the reference
/// bound `4‖f‖/(n|1−ξ|)` when `ψ ≡ ξ`.
pub fn cesaro_trace(
    psi: &AnalyticFunction,
    f: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    spec: &GridSpec,
    max_degree: usize,
) -> Result<IterateTrace> {
    build_trace(psi, f, space, n_max, spec, max_degree, false, true)
}

/// Both columns of the trace.
pub fn full_trace(
    psi: &AnalyticFunction,
    f: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    spec: &GridSpec,
    max_degree: usize,
) -> Result<IterateTrace> {
    build_trace(psi, f, space, n_max, spec, max_degree, true, true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorNormBounds {
    pub lower: NormEstimate,
    pub upper: NormEstimate,
}

fn larger(a: NormEstimate, b: NormEstimate) -> NormEstimate {
    if b.value > a.value {
        b
    } else {
        a
    }
}

/// `max(‖ψ‖_𝓑, ‖ψ‖_∞) ≤ ‖M_ψ‖_{𝓑→𝓑} ≤ max(‖ψ‖_𝓑, ‖ψ‖_∞ + σ_ψ)`.
pub fn bloch_opnorm_bounds(psi: &AnalyticFunction, spec: &GridSpec) -> Result<OperatorNormBounds> {
    let bloch = bloch_norm(psi, spec)?.norm;
    let hinf = sup_norm_hinf(psi, spec)?;
    let sigma = sigma_psi(psi, spec)?;
    let sum = NormEstimate {
        value: hinf.value + sigma.value,
        error_estimate: hinf.error_estimate + sigma.error_estimate,
        converged: hinf.converged && sigma.converged,
        diverged: hinf.diverged || sigma.diverged,
        witness: sigma.witness,
    };
    Ok(OperatorNormBounds { lower: larger(bloch.clone(), hinf), upper: larger(bloch, sum) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryMember {
    pub id: String,
    pub function: AnalyticFunction,
}

/// Test functions for operator-norm lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    members: Vec<DictionaryMember>,
}

impl Dictionary {
    pub fn new(members: Vec<AnalyticFunction>) -> Result<Dictionary> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("dictionary must not be empty".into()));
        }
        let members = members.into_iter().map(|f| DictionaryMember { id: f.render(), function: f }).collect();
        Ok(Dictionary { members })
    }

    /// `{1, z, z², mobius 0.5, 1/(2−z) truncated at degree 64}`.
    pub fn standard() -> Dictionary {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let geometric: Vec<Complex64> = (0..=64).map(|k| Complex64::new(0.5f64.powi(k + 1), 0.0)).collect();
        let members = vec![
            AnalyticFunction::Constant(one),
            AnalyticFunction::identity(),
            AnalyticFunction::Polynomial(vec![zero, zero, one]),
            AnalyticFunction::Mobius { a: Complex64::new(0.5, 0.0), rotation: one },
            AnalyticFunction::Taylor { coeffs: geometric, tail_bound: Some(0.5f64.powi(65)) },
        ];
        Dictionary::new(members).expect("nonempty")
    }

    pub fn members(&self) -> &[DictionaryMember] {
        &self.members
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeEntry {
    pub n: u32,
    /// `max_f ‖ψⁿ f‖ / ‖f‖` over the dictionary.
    pub dictionary_bound: f64,
    /// `max(dictionary_bound, ‖ψ‖_∞ⁿ)`.
    pub lower_bound: f64,
}

/// Lower bounds on `‖M_ψⁿ‖` for `n = 1..=n_max`. Members with zero norm in
/// `space` are skipped; denominators use the upper end of their error band.
pub fn opnorm_lower_probe(
    psi: &AnalyticFunction,
    space: SpaceTag,
    n_max: u32,
    dict: &Dictionary,
    spec: &GridSpec,
    max_degree: usize,
) -> Result<Vec<ProbeEntry>> {
    check_length(n_max)?;
    let mut best = vec![0.0f64; n_max as usize];
    let mut used = 0;
    for member in &dict.members {
        let denom = space_norm(&member.function, space, spec)?.upper();
        if !(denom > 0.0) {
            continue;
        }
        used += 1;
        let norms = norms_of(&iterates(psi, &member.function, n_max, max_degree), space, spec)?;
        for (b, est) in best.iter_mut().zip(norms) {
            *b = b.max(est.value / denom);
        }
    }
    if used == 0 {
        return Err(Error::InvalidArgument(format!("every dictionary member has zero norm in {space}")));
    }
    let s = sup_norm_hinf(psi, spec)?.value;
    Ok(best
        .into_iter()
        .enumerate()
        .map(|(k, dictionary_bound)| {
            let n = k as u32 + 1;
            ProbeEntry { n, dictionary_bound, lower_bound: dictionary_bound.max(s.powi(n as i32)) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> AnalyticFunction {
        AnalyticFunction::Constant(c(1.0, 0.0))
    }

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn multiplication_examples() {
        let f = AnalyticFunction::polynomial(vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(apply_mult(&one(), &f), f);
        let z = AnalyticFunction::identity();
        assert_eq!(apply_mult(&z, &z), AnalyticFunction::Polynomial(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn constant_symbols() {
        let half = AnalyticFunction::Constant(c(0.5, 0.0));
        let t = full_trace(&half, &one(), SpaceTag::Bloch, 20, &grid(), 256).unwrap();
        for e in &t.entries {
            let it = e.iterate_norm.as_ref().unwrap().value;
            assert!((it - 0.5f64.powi(e.n as i32)).abs() < 1e-15);
        }
        let t = cesaro_trace(&one(), &AnalyticFunction::identity(), SpaceTag::Bloch, 5, &grid(), 256).unwrap();
        assert!(t.entries.iter().all(|e| e.cesaro_norm.as_ref().unwrap().value == 1.0));
        assert!(t.reference_bound.is_none());
    }

    #[test]
    fn rotation_by_i_cancels_at_four() {
        let i = AnalyticFunction::Constant(c(0.0, 1.0));
        let t = cesaro_trace(&i, &one(), SpaceTag::Bloch, 8, &grid(), 256).unwrap();
        assert!(t.entries[3].cesaro_norm.as_ref().unwrap().value < 1e-15);
        let bound = t.reference_bound.unwrap();
        assert!((bound[0] - 4.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bounds_for_constants_coincide() {
        let b = bloch_opnorm_bounds(&AnalyticFunction::Constant(c(0.6, -0.8)), &grid()).unwrap();
        assert!((b.lower.value - 1.0).abs() < 1e-12 && (b.upper.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probe_for_constant_two() {
        let two = AnalyticFunction::Constant(c(2.0, 0.0));
        let probe = opnorm_lower_probe(&two, SpaceTag::Bloch, 10, &Dictionary::standard(), &grid(), 256).unwrap();
        for e in probe {
            assert!(e.lower_bound >= 2f64.powi(e.n as i32) * (1.0 - 1e-12));
        }
        assert!(Dictionary::new(vec![]).is_err());
    }
}
