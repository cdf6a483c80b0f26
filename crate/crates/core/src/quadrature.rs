//! Integration over the unit disk, hyperbolic windows, and sup estimation.
//!
//! Area integrals use unnormalised Lebesgue measure, so `∫_𝕌 1 dA = π`.
//! With `u = 1 − |z|²` we have `dA = ½ du dθ`; every integrand receives `u`
//! computed without cancellation, which keeps boundary weights such as
//! `u^{p−2}` or `log(2/u)` accurate down to `u ≈ 1e−300`.
//!
//! The default radial rule is a double-exponential (tanh-sinh) rule in `u`,
//! which resolves the algebraic and logarithmic endpoint singularities at
//! `|z| = 1`. Angles use the trapezoid rule. Error estimates compare the
//! finest level with the next coarser one in both directions.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Radial extent of the double-exponential rule in `t`: `u(t) = 1/(1+e^{−π sinh t})`.
const DE_T_BOUNDARY: f64 = 6.0;
const DE_T_CENTER: f64 = 3.5;

/// Ladder rungs that must each grow by more than [`DIVERGENCE_GROWTH`] to flag divergence.
const DIVERGENCE_RUNGS: usize = 5;
const DIVERGENCE_GROWTH: f64 = 0.01;

/// Half-width (in nodes) of the local refinement patch used by the sup search.
const PATCH_HALF: usize = 4;
/// Number of coarse local maxima refined by the sup search.
const SUP_CANDIDATES: usize = 4;
const GOLDEN_STEPS: usize = 80;
/// Window integrands are smooth in the pulled-back variable, so window
/// integrals run this many levels below the finest radial level.
const WINDOW_COARSENING: usize = 2;
/// Alternating radial/angular golden passes that polish the best sup candidate.
const POLISH_ROUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialMap {
    UniformR,
    BoundaryClustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_radial: usize,
    pub n_angular: usize,
    pub radial_map: RadialMap,
    pub refinement_levels: usize,
    pub boundary_ladder: Vec<f64>,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_radial: 200,
            n_angular: 256,
            radial_map: RadialMap::BoundaryClustered,
            refinement_levels: 3,
            boundary_ladder: default_ladder(),
            seed: 0xB10C,
        }
    }
}

/// Radii `1 − 2^{−k}`, `k = 1..=20`.
pub fn default_ladder() -> Vec<f64> {
    (1..=20).map(|k| 1.0 - 0.5f64.powi(k)).collect()
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 8 || self.n_angular < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 8 radial and 8 angular nodes (got {} and {})",
                self.n_radial, self.n_angular
            )));
        }
        if self.boundary_ladder.is_empty() {
            return Err(Error::InvalidArgument("boundary ladder must not be empty".into()));
        }
        if self.boundary_ladder.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::InvalidArgument("ladder radii must lie in (0, 1)".into()));
        }
        if self.boundary_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("ladder radii must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Copy with at least `n` angular nodes (rounded up to a power of two).
    pub fn with_min_angular(&self, n: usize) -> GridSpec {
        let mut g = self.clone();
        if n > g.n_angular {
            g.n_angular = n.next_power_of_two();
        }
        g
    }

    /// The ladder as `(r, 1 − r²)` pairs.
    pub fn ladder(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.boundary_ladder.iter().map(|&r| (r, (1.0 - r) * (1.0 + r)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    #[serde(rename = "error")]
    pub error_estimate: f64,
    pub converged: bool,
    pub diverged: bool,
    #[serde(serialize_with = "serialize_witness")]
    pub witness: Option<Complex64>,
}

fn serialize_witness<S: Serializer>(w: &Option<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(z) => [z.re, z.im].serialize(s),
        None => s.serialize_none(),
    }
}

impl NormEstimate {
    pub fn exact(value: f64) -> Self {
        NormEstimate { value, error_estimate: 0.0, converged: true, diverged: false, witness: None }
    }

    pub fn with_witness(mut self, z: Complex64) -> Self {
        self.witness = Some(z);
        self
    }

    /// Upper end of the uncertainty band.
    pub fn upper(&self) -> f64 {
        self.value + self.error_estimate
    }
}

/// A point of the open disk together with `u = 1 − |z|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub z: Complex64,
    pub u: f64,
}

impl DiskPoint {
    pub fn new(z: Complex64) -> Self {
        DiskPoint { z, u: (1.0 - z.norm()) * (1.0 + z.norm()) }
    }

    pub fn polar(r: f64, u: f64, theta: f64) -> Self {
        DiskPoint { z: Complex64::from_polar(r, theta), u }
    }

    pub fn r(&self) -> f64 {
        self.z.norm()
    }
}

thread_local! {
    static ROOTS: RefCell<HashMap<usize, Rc<[Complex64]>>> = RefCell::new(HashMap::new());
}

/// `e^{2πij/n}`, `j = 0..n`, cached per thread.
pub(crate) fn roots_of_unity(n: usize) -> Rc<[Complex64]> {
    ROOTS.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect())
            .clone()
    })
}

/// A real-valued function on the disk. Implementors may override
/// [`DiskField::circle`] with a faster whole-circle evaluation.
pub trait DiskField: Sync {
    fn value(&self, p: DiskPoint) -> f64;

    /// Values at `r e^{2πij/n}`, `j = 0..n`, where `u = 1 − r²`.
    fn circle(&self, r: f64, u: f64, n: usize) -> Vec<f64> {
        roots_of_unity(n).iter().map(|w| self.value(DiskPoint { z: w * r, u })).collect()
    }
}

impl<F: Fn(DiskPoint) -> f64 + Sync> DiskField for F {
    fn value(&self, p: DiskPoint) -> f64 {
        self(p)
    }
}

/// `g / (1 − |z|²)²`, the density of `g dλ` against `dA`, evaluated as `g / u / u`
/// so that `u²` never underflows.
struct InvariantDensity<'a, G: ?Sized>(&'a G);

impl<G: DiskField + ?Sized> DiskField for InvariantDensity<'_, G> {
    fn value(&self, p: DiskPoint) -> f64 {
        self.0.value(p) / p.u / p.u
    }

    fn circle(&self, r: f64, u: f64, n: usize) -> Vec<f64> {
        self.0.circle(r, u, n).into_iter().map(|g| g / u / u).collect()
    }
}

/// One radial node: cell `[lo, hi]` in the rule's own coordinate, the
/// circle it represents, and its `dA`-weight per unit angular mean.
#[derive(Debug, Clone, Copy)]
struct RadialNode {
    lo: f64,
    hi: f64,
    r: f64,
    u: f64,
    weight: f64,
    /// Finest-level index; coarser levels keep multiples of `2^{levels−ℓ}`.
    index: i64,
}

struct RadialRule {
    nodes: Vec<RadialNode>,
    map: RadialMap,
}

fn de_point(t: f64) -> (f64, f64, f64) {
    // u = 1/(1+e^{−s}), 1−u = 1/(1+e^{s}), s = π sinh t
    let s = PI * t.sinh();
    let (u, v) = if s >= 0.0 {
        let e = (-s).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = s.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    (u, v, PI * t.cosh() * u * v)
}

impl RadialRule {
    fn new(spec: &GridSpec, level: usize) -> RadialRule {
        match spec.radial_map {
            RadialMap::BoundaryClustered => {
                let h = (DE_T_BOUNDARY + DE_T_CENTER) / spec.n_radial as f64;
                let stride = 1i64 << (spec.refinement_levels - level);
                let lo = (-DE_T_BOUNDARY / h).ceil() as i64;
                let hi = (DE_T_CENTER / h).floor() as i64;
                let nodes = (lo..=hi)
                    .filter(|j| j.rem_euclid(stride) == 0)
                    .filter_map(|j| {
                        let t = j as f64 * h;
                        let (u, v, du_dt) = de_point(t);
                        let hl = h * stride as f64;
                        // dA = ½ du dθ = ½ u'(t) dt dθ; the angular factor 2π is applied per circle.
                        let weight = 0.5 * du_dt * hl;
                        (weight > 0.0 && u > 0.0).then(|| RadialNode {
                            lo: t - 0.5 * hl,
                            hi: t + 0.5 * hl,
                            r: v.sqrt(),
                            u,
                            weight,
                            index: j,
                        })
                    })
                    .collect();
                RadialRule { nodes, map: RadialMap::BoundaryClustered }
            }
            RadialMap::UniformR => {
                let n = (spec.n_radial >> (spec.refinement_levels - level)).max(1);
                let dr = 1.0 / n as f64;
                let nodes = (0..n)
                    .map(|i| {
                        let r = (i as f64 + 0.5) * dr;
                        RadialNode {
                            lo: r - 0.5 * dr,
                            hi: r + 0.5 * dr,
                            r,
                            u: (1.0 - r) * (1.0 + r),
                            weight: r * dr,
                            index: i as i64,
                        }
                    })
                    .collect();
                RadialRule { nodes, map: RadialMap::UniformR }
            }
        }
    }

    /// Fraction of a node's cell lying inside `|z| < r_cut`.
    fn inside_fraction(&self, node: &RadialNode, r_cut: f64, u_cut: f64) -> f64 {
        let (a, b) = (node.lo, node.hi);
        match self.map {
            RadialMap::UniformR => ((r_cut - a) / (b - a)).clamp(0.0, 1.0),
            RadialMap::BoundaryClustered => {
                // inside ⇔ u > u_cut ⇔ t > t_cut
                let t_cut = ((u_cut / (1.0 - u_cut)).ln() / PI).asinh();
                ((b - t_cut) / (b - a)).clamp(0.0, 1.0)
            }
        }
    }
}

/// Mean of the trapezoid samples on a circle, over all and over even-index nodes.
fn angular_means(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let full = values.iter().sum::<f64>() / n as f64;
    let half = if n % 2 == 0 { values.iter().step_by(2).sum::<f64>() / (n / 2) as f64 } else { full };
    (full, half)
}

pub fn integrate_area<G: DiskField + ?Sized>(g: &G, spec: &GridSpec) -> Result<NormEstimate> {
    spec.validate()?;
    let finest = RadialRule::new(spec, spec.refinement_levels);
    let n_ang = spec.n_angular;

    let rings: Vec<(f64, f64)> =
        finest.nodes.par_iter().map(|node| angular_means(&g.circle(node.r, node.u, n_ang))).collect();
    let contrib: Vec<f64> = finest.nodes.iter().zip(&rings).map(|(n, m)| 2.0 * PI * n.weight * m.0).collect();
    let fine_total: f64 = contrib.iter().sum();
    let half_angle_total: f64 = finest.nodes.iter().zip(&rings).map(|(n, m)| 2.0 * PI * n.weight * m.1).sum();

    let mut radial_err = 0.0;
    if spec.refinement_levels > 0 {
        let coarse_total = match spec.radial_map {
            RadialMap::BoundaryClustered => {
                // Every other finest node, with doubled weight.
                let stride = 2i64;
                finest
                    .nodes
                    .iter()
                    .zip(&contrib)
                    .filter(|(n, _)| n.index.rem_euclid(stride) == 0)
                    .map(|(_, c)| 2.0 * c)
                    .sum::<f64>()
            }
            RadialMap::UniformR => {
                let coarse = RadialRule::new(spec, spec.refinement_levels - 1);
                let means: Vec<f64> =
                    coarse.nodes.par_iter().map(|n| angular_means(&g.circle(n.r, n.u, n_ang)).0).collect();
                coarse.nodes.iter().zip(&means).map(|(n, m)| 2.0 * PI * n.weight * m).sum()
            }
        };
        radial_err = (fine_total - coarse_total).abs();
    }
    let angular_err = (fine_total - half_angle_total).abs();

    let partials: Vec<f64> = spec
        .ladder()
        .map(|(r, u)| finest.nodes.iter().zip(&contrib).map(|(n, c)| c * finest.inside_fraction(n, r, u)).sum())
        .collect();
    let ladder_diverges = ladder_growth(&partials);
    let diverged = ladder_diverges || !fine_total.is_finite();

    let value = if fine_total.is_finite() {
        fine_total
    } else {
        partials.iter().rev().copied().find(|p| p.is_finite()).unwrap_or(0.0)
    };
    let error_estimate = if diverged { f64::MAX.min(value.abs()) } else { radial_err + angular_err };
    let threshold = 1e-9f64.max(1e-6 * value.abs());
    let converged = !diverged && radial_err < threshold && angular_err < threshold;
    Ok(NormEstimate { value, error_estimate, converged, diverged, witness: None })
}

/// True when each of the last [`DIVERGENCE_RUNGS`] ladder partial integrals
/// grew by more than [`DIVERGENCE_GROWTH`] over its predecessor.
fn ladder_growth(partials: &[f64]) -> bool {
    if partials.len() <= DIVERGENCE_RUNGS {
        return false;
    }
    partials[partials.len() - DIVERGENCE_RUNGS - 1..]
        .windows(2)
        .all(|w| w[0] > 0.0 && (w[1].is_infinite() || w[1] > (1.0 + DIVERGENCE_GROWTH) * w[0]))
}

/// `∫_𝕌 g dλ` with `dλ = dA/(1−|z|²)²`, computed as the area integral of `g/(1−|z|²)²`.
pub fn integrate_invariant<G: DiskField + ?Sized>(g: &G, spec: &GridSpec) -> Result<NormEstimate> {
    integrate_area(&InvariantDensity(g), spec)
}

fn check_in_disk(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDomain { re: z.re, im: z.im, reason: "expected |z| < 1" })
    }
}

/// `β(z, ω) = log((1+s)/(1−s))` with `s = |z − ω| / |1 − z̄ω|`.
pub fn hyperbolic_distance(z: Complex64, w: Complex64) -> Result<f64> {
    check_in_disk(z)?;
    check_in_disk(w)?;
    let d = (1.0 - z.conj() * w).norm_sqr();
    let s = ((z - w).norm_sqr() / d).sqrt();
    if s < 0.5 {
        return Ok(2.0 * s.atanh());
    }
    // 1 − s² = (1−|z|²)(1−|ω|²)/|1−z̄ω|², free of cancellation near s = 1.
    let one_minus_s2 = DiskPoint::new(z).u * DiskPoint::new(w).u / d;
    Ok(2.0 * s.ln_1p() - one_minus_s2.ln())
}

/// `∫_{D(ω,r)} g dA` over the hyperbolic disk `{z : β(z,ω) < r}`.
///
/// The window is the image of the Euclidean disk `|w| < tanh(r/2)` under the
/// involution `φ_ω(w) = (ω − w)/(1 − ω̄w)`, so the integral becomes
/// `∫_{|w|<ρ} g(φ_ω(w)) |φ_ω'(w)|² dA(w)` with a smooth integrand.
pub fn integrate_hyperbolic_window<G: DiskField + ?Sized>(
    g: &G,
    omega: Complex64,
    radius: f64,
    spec: &GridSpec,
) -> Result<NormEstimate> {
    spec.validate()?;
    check_in_disk(omega)?;
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("window radius must be positive, got {radius}")));
    }
    let rho = (0.5 * radius).tanh();
    let rho2 = rho * rho;
    let sech2 = 1.0 / (0.5 * radius).cosh().powi(2);
    let u_omega = DiskPoint::new(omega).u;

    let level_rule = |level: usize| {
        let spec = GridSpec { radial_map: RadialMap::BoundaryClustered, ..spec.clone() };
        RadialRule::new(&spec, level)
    };
    let level = spec.refinement_levels.saturating_sub(WINDOW_COARSENING);
    let finest = level_rule(level);
    let coarse_stride = 2i64 << (spec.refinement_levels - level);
    let n_ang = spec.n_angular;
    let roots = roots_of_unity(n_ang).to_vec();

    // Radial variable v = |w|² = ρ² x with x ∈ (0,1) carried by the DE rule; here
    // node.u plays the role of x and node.r² of 1 − x.
    let ring = |node: &RadialNode| -> (f64, f64) {
        let x = node.u;
        let v = rho2 * x;
        let one_minus_v = sech2 + rho2 * (node.r * node.r);
        let s = v.sqrt();
        let vals: Vec<f64> = roots
            .iter()
            .map(|root| {
                let w = root * s;
                let den = (1.0 - omega.conj() * w).norm_sqr();
                let z = (omega - w) / (1.0 - omega.conj() * w);
                let jac = u_omega / den;
                let u = u_omega * one_minus_v / den;
                g.value(DiskPoint { z, u }) * jac * jac
            })
            .collect();
        angular_means(&vals)
    };
    let rings: Vec<(f64, f64)> = finest.nodes.par_iter().map(ring).collect();
    // dA(w) = ½ dv dθ = ½ ρ² dx dθ
    let contrib: Vec<f64> = finest.nodes.iter().zip(&rings).map(|(n, m)| 2.0 * PI * rho2 * n.weight * m.0).collect();
    let total: f64 = contrib.iter().sum();
    let half_angle: f64 = finest.nodes.iter().zip(&rings).map(|(n, m)| 2.0 * PI * rho2 * n.weight * m.1).sum();
    let radial_err = if level > 0 {
        let coarse: f64 = finest
            .nodes
            .iter()
            .zip(&contrib)
            .filter(|(n, _)| n.index.rem_euclid(coarse_stride) == 0)
            .map(|(_, c)| 2.0 * c)
            .sum();
        (total - coarse).abs()
    } else {
        0.0
    };
    let angular_err = (total - half_angle).abs();
    if !total.is_finite() {
        return Err(Error::NonFinite(format!("window integral around {omega}")));
    }
    let threshold = 1e-9f64.max(1e-6 * total.abs());
    Ok(NormEstimate {
        value: total,
        error_estimate: radial_err + angular_err,
        converged: radial_err < threshold && angular_err < threshold,
        diverged: false,
        witness: Some(omega),
    })
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best point found by [`maximize`].
#[derive(Debug, Clone, Copy)]
pub struct Extremum {
    pub value: f64,
    pub point: DiskPoint,
    /// Improvement contributed by the last refinement pass.
    pub last_gain: f64,
}

fn finite_or_err(v: f64, p: DiskPoint) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(format!("field value at {}", p.z)))
    }
}

/// Polar radii of the coarse sup scan (without the centre).
fn scan_radii(spec: &GridSpec) -> Vec<(f64, f64)> {
    let n = spec.n_radial;
    (0..n)
        .map(|i| match spec.radial_map {
            RadialMap::BoundaryClustered => {
                let u = (i as f64 + 0.5) / n as f64;
                ((1.0 - u).sqrt(), u)
            }
            RadialMap::UniformR => {
                let r = (i as f64 + 0.5) / n as f64;
                (r, (1.0 - r) * (1.0 + r))
            }
        })
        .collect()
}

struct Patch {
    u: f64,
    theta: f64,
    half_u: f64,
    half_theta: f64,
}

fn refine<G: DiskField + ?Sized>(g: &G, start: Extremum, mut patch: Patch, levels: usize) -> Result<(Extremum, Patch)> {
    let mut best = start;
    for _ in 0..levels {
        let before = best.value;
        let m = PATCH_HALF as f64;
        let u_lo = (patch.u - patch.half_u).max(0.25 * patch.u);
        let u_hi = (patch.u + patch.half_u).min(1.0);
        let steps = 2 * PATCH_HALF;
        for i in 0..=steps {
            let u = u_lo + (u_hi - u_lo) * i as f64 / steps as f64;
            let r = (1.0 - u).max(0.0).sqrt();
            for j in 0..=steps {
                let theta = patch.theta + patch.half_theta * (j as f64 - m) / m;
                let p = DiskPoint::polar(r, u, theta);
                let v = finite_or_err(g.value(p), p)?;
                if v > best.value {
                    best = Extremum { value: v, point: p, last_gain: 0.0 };
                }
            }
        }
        best.last_gain = best.value - before;
        let theta = best.point.z.arg();
        patch = Patch {
            u: best.point.u,
            theta: if best.point.z.norm() > 0.0 { theta } else { patch.theta },
            half_u: patch.half_u / m,
            half_theta: patch.half_theta / m,
        };
    }
    Ok((best, patch))
}

/// Alternating golden-section searches in `u` and `θ` inside the final patch.
/// `last_gain` becomes the improvement of the last round.
fn polish<G: DiskField + ?Sized>(g: &G, start: Extremum, patch: &Patch) -> Extremum {
    let mut best = start;
    if best.point.u >= 1.0 {
        return best;
    }
    let eval = |u: f64, theta: f64| {
        let v = g.value(DiskPoint::polar((1.0 - u).max(0.0).sqrt(), u, theta));
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let half_u = (2.0 * patch.half_u).min(0.5 * best.point.u);
    let half_theta = 2.0 * patch.half_theta;
    for _ in 0..POLISH_ROUNDS {
        let before = best.value;
        let theta = best.point.z.arg();
        let u0 = best.point.u;
        let (u, v) = golden_max(|u| eval(u, theta), u0 - half_u, (u0 + half_u).min(1.0));
        if v > best.value {
            best.value = v;
            best.point = DiskPoint::polar((1.0 - u).max(0.0).sqrt(), u, theta);
        }
        let u = best.point.u;
        let (t, v) = golden_max(|t| eval(u, t), theta - half_theta, theta + half_theta);
        if v > best.value {
            best.value = v;
            best.point = DiskPoint::polar((1.0 - u).max(0.0).sqrt(), u, t);
        }
        best.last_gain = best.value - before;
    }
    best
}

/// Lower-biased global maximum of `g` on the open disk: coarse polar scan,
/// local refinement around the best local maxima, then a scan of the
/// boundary ladder (refined as well when it wins).
pub fn maximize<G: DiskField + ?Sized>(g: &G, spec: &GridSpec) -> Result<Extremum> {
    spec.validate()?;
    let n_ang = spec.n_angular;
    let radii = scan_radii(spec);
    let centre = DiskPoint { z: Complex64::new(0.0, 0.0), u: 1.0 };
    let centre_value = finite_or_err(g.value(centre), centre)?;

    let rows: Vec<Vec<f64>> = radii.par_iter().map(|&(r, u)| g.circle(r, u, n_ang)).collect();
    let mut locals: Vec<(f64, usize, usize)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                finite_or_err(v, DiskPoint::polar(radii[i].0, radii[i].1, 2.0 * PI * j as f64 / n_ang as f64))?;
            }
            let neighbours = [
                row[(j + 1) % n_ang],
                row[(j + n_ang - 1) % n_ang],
                if i > 0 { rows[i - 1][j] } else { f64::NEG_INFINITY },
                if i + 1 < rows.len() { rows[i + 1][j] } else { f64::NEG_INFINITY },
            ];
            if neighbours.iter().all(|&w| v >= w) {
                locals.push((v, i, j));
            }
        }
    }
    locals.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    locals.truncate(SUP_CANDIDATES);

    let du = 1.0 / spec.n_radial as f64;
    let dtheta = 2.0 * PI / n_ang as f64;
    let mut best = Extremum { value: centre_value, point: centre, last_gain: 0.0 };
    let centre_patch = Patch { u: 1.0, theta: 0.0, half_u: du, half_theta: PI };
    let mut candidates = vec![(best, centre_patch)];
    for &(v, i, j) in &locals {
        let (r, u) = radii[i];
        let theta = dtheta * j as f64;
        let point = DiskPoint::polar(r, u, theta);
        let half_u = match spec.radial_map {
            RadialMap::BoundaryClustered => du,
            RadialMap::UniformR => 2.0 * r.max(du) * du,
        };
        candidates.push((
            Extremum { value: v, point, last_gain: 0.0 },
            Patch { u, theta, half_u, half_theta: dtheta },
        ));
    }

    let mut best_patch = None;
    for (start, patch) in candidates {
        let (refined, patch) = refine(g, start, patch, spec.refinement_levels)?;
        if refined.value > best.value || best_patch.is_none() {
            best = refined;
            best_patch = Some(patch);
        }
    }

    let ladder: Vec<(f64, f64, Vec<f64>)> =
        spec.ladder().collect::<Vec<_>>().par_iter().map(|&(r, u)| (r, u, g.circle(r, u, n_ang))).collect();
    let mut ladder_best: Option<Extremum> = None;
    for (r, u, vals) in &ladder {
        for (j, &v) in vals.iter().enumerate() {
            if !v.is_finite() {
                finite_or_err(v, DiskPoint::polar(*r, *u, dtheta * j as f64))?;
            }
            if v > best.value && ladder_best.map_or(true, |b| v > b.value) {
                let p = DiskPoint::polar(*r, *u, dtheta * j as f64);
                ladder_best = Some(Extremum { value: v, point: p, last_gain: 0.0 });
            }
        }
    }
    if let Some(start) = ladder_best {
        let patch = Patch { u: start.point.u, theta: start.point.z.arg(), half_u: 0.5 * start.point.u, half_theta: dtheta };
        let (refined, patch) = refine(g, start, patch, spec.refinement_levels)?;
        best = refined;
        best_patch = Some(patch);
    }
    let patch = best_patch.expect("centre candidate is always refined");
    Ok(polish(g, best, &patch))
}

/// `sup_{z∈𝕌} g(z)` as a lower-biased estimate with its argmax as witness.
pub fn sup_on_disk<G: DiskField + ?Sized>(g: &G, spec: &GridSpec) -> Result<NormEstimate> {
    let best = maximize(g, spec)?;
    let tol = 1e-9 * best.value.abs().max(f64::MIN_POSITIVE);
    Ok(NormEstimate {
        value: best.value,
        error_estimate: best.last_gain.abs(),
        converged: best.last_gain.abs() <= tol,
        diverged: false,
        witness: Some(best.point.z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn area_of_disk() {
        let e = integrate_area(&|_: DiskPoint| 1.0, &grid()).unwrap();
        assert!((e.value - PI).abs() < 1e-8, "{e:?}");
        assert!(e.converged && !e.diverged);
    }

    #[test]
    fn logarithmic_boundary_weight() {
        let e = integrate_area(&|p: DiskPoint| (2.0 / p.u).ln(), &grid()).unwrap();
        assert!((e.value - PI * (1.0 + 2f64.ln())).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn inverse_square_root_weight() {
        let e = integrate_area(&|p: DiskPoint| p.u.powf(-0.5), &grid()).unwrap();
        assert!((e.value - 2.0 * PI).abs() < 1e-5, "{e:?}");
    }

    #[test]
    fn uniform_radial_map_handles_smooth_integrands() {
        let spec = GridSpec { radial_map: RadialMap::UniformR, n_radial: 400, ..grid() };
        let e = integrate_area(&|p: DiskPoint| p.u, &spec).unwrap();
        assert!((e.value - PI / 2.0).abs() < 1e-5, "{e:?}");
    }

    #[test]
    fn invariant_measure() {
        let e = integrate_invariant(&|p: DiskPoint| p.u * p.u, &grid()).unwrap();
        assert!((e.value - PI).abs() < 1e-8);
        let e = integrate_invariant(&|p: DiskPoint| p.u.powi(3), &grid()).unwrap();
        assert!((e.value - PI / 2.0).abs() < 1e-7);
        let e = integrate_invariant(&|_: DiskPoint| 1.0, &grid()).unwrap();
        assert!(e.diverged && !e.converged, "{e:?}");
        assert!(e.value.is_finite());
    }

    #[test]
    fn hyperbolic_distance_examples() {
        let z = Complex64::new(0.3, 0.0);
        let w = Complex64::new(0.7, 0.0);
        assert_eq!(hyperbolic_distance(z, z).unwrap(), 0.0);
        assert!((hyperbolic_distance(Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((hyperbolic_distance(z, w).unwrap() - hyperbolic_distance(w, z).unwrap()).abs() < 1e-14);
        assert!(hyperbolic_distance(Complex64::new(1.0, 0.0), z).is_err());
    }

    #[test]
    fn window_around_origin_is_euclidean_disk() {
        let e = integrate_hyperbolic_window(&|_: DiskPoint| 1.0, Complex64::new(0.0, 0.0), 3f64.ln(), &grid()).unwrap();
        assert!((e.value - PI / 4.0).abs() < 1e-4, "{e:?}");
        let zero = integrate_hyperbolic_window(&|_: DiskPoint| 0.0, Complex64::new(0.2, 0.3), 1.0, &grid()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn sup_examples() {
        let e = sup_on_disk(&|p: DiskPoint| p.u, &grid()).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.witness, Some(Complex64::new(0.0, 0.0)));
        let e = sup_on_disk(&|p: DiskPoint| p.u * 2.0 * p.r(), &grid()).unwrap();
        let exact = 4.0 / (3.0 * 3f64.sqrt());
        assert!(e.value <= exact + 1e-15 && exact - e.value < 1e-6, "{e:?}");
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let spec = GridSpec { boundary_ladder: vec![0.5, 0.4], ..grid() };
        assert!(spec.validate().is_err());
        let spec = GridSpec { n_angular: 4, ..grid() };
        assert!(integrate_area(&|_: DiskPoint| 1.0, &spec).is_err());
    }

    #[test]
    fn grid_json_shape() {
        let json = serde_json::to_value(grid()).unwrap();
        assert_eq!(json["radial_map"], "boundary_clustered");
        assert_eq!(json["seed"], 0xB10C);
        let back: GridSpec = serde_json::from_str(r#"{"n_radial": 64}"#).unwrap();
        assert_eq!(back.n_angular, 256);
        assert_eq!(back.n_radial, 64);
    }
}
