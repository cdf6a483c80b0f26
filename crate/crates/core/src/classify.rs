//! Verdicts on power boundedness and (uniform) mean ergodicity of `M_ψ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::AnalyticFunction;
use crate::norms::{besov_multiplier_growth, bloch_norm, condition_31, resolved_ladder, sigma_psi, sup_norm_hinf, SpaceTag};
use crate::quadrature::{golden_max, maximize, DiskPoint, GridSpec, NormEstimate};

/// Default half-width of the band around `‖ψ‖_∞ = 1` inside which no decision is taken.
pub const DEFAULT_UNIT_BAND: f64 = 1e-9;
const NEWTON_STEPS: usize = 50;
const PREMISE: &str = "power bounded";

mod cite {
    pub const SUP_ABOVE_ONE: &str =
        "power boundedness and (uniform) mean ergodicity of a multiplication operator force ‖ψ‖_∞ ≤ 1";
    pub const SUP_BELOW_ONE: &str =
        "for ‖ψ‖_∞ < 1 the operator is power bounded, mean ergodic and uniformly mean ergodic";
    pub const UNIMODULAR_CONSTANT: &str =
        "a unimodular constant symbol is power bounded and uniformly mean ergodic (hence mean ergodic)";
    pub const OPEN_PROBLEM: &str =
        "power boundedness for a nonconstant symbol with ‖ψ‖_∞ = 1 on the Bloch space is still open";
    pub const BLOCH_BOUNDARY: &str =
        "if power bounded on the Bloch space, mean ergodicity, uniform mean ergodicity and 1 ∉ closure of ψ(𝕌) are equivalent";
    pub const LITTLE_BLOCH_BOUNDARY: &str =
        "if power bounded on the little Bloch space, the operator is mean ergodic, and uniformly mean ergodic iff 1 ∉ closure of ψ(𝕌)";
    pub const SPECTRUM: &str =
        "1 lies in the closure of ψ(𝕌) ⊆ σ(M_ψ) and is not an isolated point, so uniform mean ergodicity fails";
    pub const BESOV_POWER: &str =
        "under the sufficient multiplier condition, power boundedness and mean ergodicity are equivalent to ‖ψ‖_∞ ≤ 1";
    pub const BESOV_UNIFORM: &str =
        "under the sufficient multiplier condition, uniform mean ergodicity holds iff ψ is a unimodular constant or 1/(1−ψ) is bounded";
    pub const BAND: &str = "‖ψ‖_∞ lies within the undecidable band around 1";
    pub const CLOSURE_UNDECIDED: &str = "inf |1−ψ| is between tol and 10·tol";
    pub const PRECONDITION: &str = "the sufficient multiplier condition could not be confirmed";
    pub const MULTIPLIER_FINITE: &str = "finite condition integral implies ψ multiplies the Besov space";
    pub const MULTIPLIER_UNBOUNDED: &str = "a multiplier of a Besov space is bounded with bounded weighted derivative";
    pub const MULTIPLIER_GAP: &str = "neither the sufficient nor the necessary multiplier condition is decided";
    pub const UNBOUNDED_SYMBOL: &str = "ψ is unbounded, so M_ψ is not a bounded operator";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Undecided,
    ConditionalOn { premise: String, resolves_to: Outcome },
}

impl From<Outcome> for Status {
    fn from(o: Outcome) -> Status {
        match o {
            Outcome::Holds => Status::Holds,
            Outcome::Fails => Status::Fails,
            Outcome::Undecided => Status::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub name: String,
    #[serde(flatten)]
    pub estimate: NormEstimate,
}

impl Evidence {
    pub fn new(name: &str, estimate: NormEstimate) -> Evidence {
        Evidence { name: name.to_string(), estimate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub citation: String,
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    fn new(status: impl Into<Status>, citation: &str, evidence: &[Evidence]) -> Verdict {
        Verdict { status: status.into(), citation: citation.to_string(), evidence: evidence.to_vec() }
    }

    fn conditional(resolves_to: Outcome, citation: &str, evidence: &[Evidence]) -> Verdict {
        Verdict::new(Status::ConditionalOn { premise: PREMISE.into(), resolves_to }, citation, evidence)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub unit_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub space: SpaceTag,
    pub psi: String,
    pub power_bounded: Verdict,
    pub mean_ergodic: Verdict,
    pub uniformly_mean_ergodic: Verdict,
    pub preconditions: Vec<Evidence>,
    pub tolerances: Tolerances,
}

/// Answer of [`one_in_closure`] with `m ≈ inf |1−ψ|` and its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureTest {
    pub answer: Outcome,
    pub inf_distance: NormEstimate,
}

impl ClosureTest {
    /// `Holds` means 1 lies in the closure of `ψ(𝕌)`.
    pub fn contains_one(&self) -> Outcome {
        self.answer
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Newton iteration for `ψ(z) = 1` from `z0`; the root when it stays in the disk.
fn newton_root(psi: &AnalyticFunction, z0: Complex64) -> Option<Complex64> {
    let d1 = psi.sampler(1);
    let one = Complex64::new(1.0, 0.0);
    let mut z = z0;
    for _ in 0..NEWTON_STEPS {
        let slope = d1.at(z);
        if slope.norm() == 0.0 {
            return None;
        }
        let step = (psi.eval_unchecked(z) - one) / slope;
        z -= step;
        if !(z.norm() < 1.0) || !z.re.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    Some(z)
}

/// Estimates `m = inf_{𝕌} |1−ψ|` over an interior scan, the boundary ladder
/// and, for functions continuous on the closed disk, the unit circle.
/// Interior minima are polished by Newton's method on `ψ = 1`.
/// The answer is `Holds` when `m < tol`, `Fails` when `m > 10·tol`.
pub fn one_in_closure(psi: &AnalyticFunction, tol: f64, spec: &GridSpec) -> Result<ClosureTest> {
    check_tol(tol)?;
    spec.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let gap = |z: Complex64| (one - psi.eval_unchecked(z)).norm();
    let (m, witness) = if let Some(c) = psi.as_constant() {
        ((one - c).norm(), Complex64::new(0.0, 0.0))
    } else {
        let interior = maximize(&|p: DiskPoint| -gap(p.z), spec)?;
        let mut best = (-interior.value, interior.point.z);
        if let Some(root) = newton_root(psi, interior.point.z) {
            if gap(root) < best.0 {
                best = (gap(root), root);
            }
        }
        let mut circles: Vec<(f64, f64)> = resolved_ladder(psi, spec);
        if psi.continuous_on_closed_disk() {
            circles.push((1.0, 0.0));
        }
        let n = spec.n_angular.max(4 * (psi.degree().unwrap_or(0) + 1)).next_power_of_two();
        let dtheta = 2.0 * PI / n as f64;
        for (r, _) in circles {
            let samples: Vec<f64> = (0..n).map(|j| gap(Complex64::from_polar(r, dtheta * j as f64))).collect();
            let j = (0..n).min_by(|&a, &b| samples[a].total_cmp(&samples[b])).expect("n ≥ 8");
            let centre = dtheta * j as f64;
            let (theta, neg) = golden_max(|t| -gap(Complex64::from_polar(r, t)), centre - dtheta, centre + dtheta);
            let (value, theta) = if samples[j] <= -neg { (samples[j], centre) } else { (-neg, theta) };
            if value < best.0 {
                best = (value, Complex64::from_polar(r, theta));
            }
        }
        best
    };
    let answer = if m < tol {
        Outcome::Holds
    } else if m > 10.0 * tol {
        Outcome::Fails
    } else {
        Outcome::Undecided
    };
    let estimate = NormEstimate::exact(m).with_witness(witness);
    Ok(ClosureTest { answer, inf_distance: NormEstimate { converged: answer != Outcome::Undecided, ..estimate } })
}

/// Values of `ψ` on a deterministic interior grid of about `n_samples`
/// points plus the outermost trusted ladder circle.
pub fn range_cloud(psi: &AnalyticFunction, n_samples: usize, spec: &GridSpec) -> Result<Vec<Complex64>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("range cloud needs at least one sample".into()));
    }
    spec.validate()?;
    let k = (n_samples as f64).sqrt().ceil() as usize;
    let mut points: Vec<Complex64> = (0..n_samples)
        .map(|i| {
            let (ring, slot) = (i / k, i % k);
            let r = (ring as f64 + 0.5) / k as f64;
            let theta = 2.0 * PI * (slot as f64 + 0.5 * (ring % 2) as f64) / k as f64;
            Complex64::from_polar(r, theta)
        })
        .collect();
    if let Some(&(r, _)) = resolved_ladder(psi, spec).last() {
        let n = spec.n_angular;
        points.extend((0..n).map(|j| Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64)));
    }
    Ok(points.into_iter().map(|z| psi.eval_unchecked(z)).collect())
}

/// Multiplier test on `𝓑_p`: `Holds` when the sufficient condition integral
/// is finite, `Fails` when a necessary bound diverges along the ladder.
pub fn besov_multiplier_check(psi: &AnalyticFunction, p: f64, spec: &GridSpec) -> Result<Verdict> {
    SpaceTag::besov(p)?;
    let hinf = sup_norm_hinf(psi, spec)?;
    let growth = besov_multiplier_growth(psi, p, spec)?;
    let condition = condition_31(psi, p, spec)?;
    let evidence = [
        Evidence::new("sup_norm_hinf", hinf.clone()),
        Evidence::new("weighted_derivative_growth", growth.clone()),
        Evidence::new("condition_integral", condition.clone()),
    ];
    let verdict = if hinf.diverged || growth.diverged {
        Verdict::new(Outcome::Fails, cite::MULTIPLIER_UNBOUNDED, &evidence)
    } else if condition.converged && !condition.diverged && condition.value.is_finite() {
        Verdict::new(Outcome::Holds, cite::MULTIPLIER_FINITE, &evidence)
    } else {
        Verdict::new(Outcome::Undecided, cite::MULTIPLIER_GAP, &evidence)
    };
    Ok(verdict)
}

/// Where `‖ψ‖_∞` sits relative to 1 once its error band is taken into account.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SupRegime {
    Above,
    Below,
    AtOne,
    Band,
}

fn sup_regime(s: &NormEstimate, tol: f64) -> SupRegime {
    if s.diverged || s.value - s.error_estimate > 1.0 + tol {
        SupRegime::Above
    } else if s.value + s.error_estimate < 1.0 - tol {
        SupRegime::Below
    } else if (s.value - 1.0).abs() <= tol && s.error_estimate <= tol {
        SupRegime::AtOne
    } else {
        SupRegime::Band
    }
}

struct Triple {
    power_bounded: Verdict,
    mean_ergodic: Verdict,
    uniformly_mean_ergodic: Verdict,
}

impl Triple {
    fn all(status: Outcome, citation: &str, evidence: &[Evidence]) -> Triple {
        Triple {
            power_bounded: Verdict::new(status, citation, evidence),
            mean_ergodic: Verdict::new(status, citation, evidence),
            uniformly_mean_ergodic: Verdict::new(status, citation, evidence),
        }
    }

    fn into_report(self, space: SpaceTag, psi: &AnalyticFunction, preconditions: Vec<Evidence>, tol: f64) -> ClassificationReport {
        ClassificationReport {
            space,
            psi: psi.render(),
            power_bounded: self.power_bounded,
            mean_ergodic: self.mean_ergodic,
            uniformly_mean_ergodic: self.uniformly_mean_ergodic,
            preconditions,
            tolerances: Tolerances { unit_band: tol },
        }
    }
}

/// Decisions shared by every space: constant symbols and `‖ψ‖_∞` away from 1.
fn common_branch(psi: &AnalyticFunction, s: &NormEstimate, tol: f64, evidence: &[Evidence]) -> Option<Triple> {
    if s.diverged {
        return Some(Triple::all(Outcome::Fails, cite::UNBOUNDED_SYMBOL, evidence));
    }
    if let Some(xi) = psi.as_constant() {
        let m = xi.norm();
        return Some(if m > 1.0 + tol {
            Triple::all(Outcome::Fails, cite::SUP_ABOVE_ONE, evidence)
        } else if m < 1.0 - tol {
            Triple::all(Outcome::Holds, cite::SUP_BELOW_ONE, evidence)
        } else {
            Triple::all(Outcome::Holds, cite::UNIMODULAR_CONSTANT, evidence)
        });
    }
    match sup_regime(s, tol) {
        SupRegime::Above => Some(Triple::all(Outcome::Fails, cite::SUP_ABOVE_ONE, evidence)),
        SupRegime::Below => Some(Triple::all(Outcome::Holds, cite::SUP_BELOW_ONE, evidence)),
        SupRegime::Band => Some(Triple::all(Outcome::Undecided, cite::BAND, evidence)),
        SupRegime::AtOne => None,
    }
}

fn bloch_like(psi: &AnalyticFunction, spec: &GridSpec, tol: f64, little: bool) -> Result<ClassificationReport> {
    check_tol(tol)?;
    let space = if little { SpaceTag::LittleBloch } else { SpaceTag::Bloch };
    let s = sup_norm_hinf(psi, spec)?;
    let sigma = sigma_psi(psi, spec)?;
    let mut evidence = vec![Evidence::new("sup_norm_hinf", s.clone()), Evidence::new("sigma_psi", sigma.clone())];
    let bloch = bloch_norm(psi, spec)?.norm;
    let preconditions = vec![
        Evidence::new("bloch_norm", bloch.clone()),
        Evidence::new("operator_norm_upper", NormEstimate { value: bloch.value.max(s.value + sigma.value), ..sigma }),
    ];
    if let Some(t) = common_branch(psi, &s, tol, &evidence) {
        return Ok(t.into_report(space, psi, preconditions, tol));
    }
    let closure = one_in_closure(psi, tol, spec)?;
    evidence.push(Evidence::new("inf_abs_one_minus_psi", closure.inf_distance.clone()));
    let power_bounded = Verdict::new(Outcome::Undecided, cite::OPEN_PROBLEM, &evidence);
    let citation = if little { cite::LITTLE_BLOCH_BOUNDARY } else { cite::BLOCH_BOUNDARY };
    let mean_ergodic = if little {
        Verdict::conditional(Outcome::Holds, citation, &evidence)
    } else {
        let resolves_to = match closure.contains_one() {
            Outcome::Holds => Outcome::Fails,
            Outcome::Fails => Outcome::Holds,
            Outcome::Undecided => Outcome::Undecided,
        };
        Verdict::conditional(resolves_to, citation, &evidence)
    };
    let uniformly_mean_ergodic = match closure.contains_one() {
        Outcome::Holds => Verdict::new(Outcome::Fails, cite::SPECTRUM, &evidence),
        Outcome::Fails => Verdict::conditional(Outcome::Holds, citation, &evidence),
        Outcome::Undecided => Verdict::new(Outcome::Undecided, cite::CLOSURE_UNDECIDED, &evidence),
    };
    Ok(Triple { power_bounded, mean_ergodic, uniformly_mean_ergodic }.into_report(space, psi, preconditions, tol))
}

pub fn classify_bloch(psi: &AnalyticFunction, spec: &GridSpec, tol: f64) -> Result<ClassificationReport> {
    bloch_like(psi, spec, tol, false)
}

pub fn classify_little_bloch(psi: &AnalyticFunction, spec: &GridSpec, tol: f64) -> Result<ClassificationReport> {
    bloch_like(psi, spec, tol, true)
}

pub fn classify_besov(psi: &AnalyticFunction, p: f64, spec: &GridSpec, tol: f64) -> Result<ClassificationReport> {
    check_tol(tol)?;
    let space = SpaceTag::besov(p)?;
    let s = sup_norm_hinf(psi, spec)?;
    let sigma = sigma_psi(psi, spec)?;
    let mut evidence = vec![Evidence::new("sup_norm_hinf", s.clone()), Evidence::new("sigma_psi", sigma)];
    let multiplier = besov_multiplier_check(psi, p, spec)?;
    let mut preconditions = multiplier.evidence.clone();
    preconditions.push(Evidence::new(
        "multiplier_condition_holds",
        NormEstimate::exact(if multiplier.status == Status::Holds { 1.0 } else { 0.0 }),
    ));

    if s.diverged || sup_regime(&s, tol) == SupRegime::Above || psi.as_constant().is_some() {
        let t = common_branch(psi, &s, tol, &evidence).expect("decided outside the unit regime");
        return Ok(t.into_report(space, psi, preconditions, tol));
    }
    if multiplier.status != Status::Holds {
        return Ok(Triple::all(Outcome::Undecided, cite::PRECONDITION, &evidence).into_report(space, psi, preconditions, tol));
    }
    let power = if s.value + s.error_estimate <= 1.0 + tol { Outcome::Holds } else { Outcome::Undecided };
    let closure = one_in_closure(psi, tol, spec)?;
    evidence.push(Evidence::new("inf_abs_one_minus_psi", closure.inf_distance.clone()));
    let uniform = match (power, closure.contains_one()) {
        (_, Outcome::Holds) => Outcome::Fails,
        (Outcome::Holds, Outcome::Fails) => Outcome::Holds,
        _ => Outcome::Undecided,
    };
    let power_citation = if power == Outcome::Holds { cite::BESOV_POWER } else { cite::BAND };
    let uniform_citation = match closure.contains_one() {
        Outcome::Undecided => cite::CLOSURE_UNDECIDED,
        _ => cite::BESOV_UNIFORM,
    };
    Ok(Triple {
        power_bounded: Verdict::new(power, power_citation, &evidence),
        mean_ergodic: Verdict::new(power, power_citation, &evidence),
        uniformly_mean_ergodic: Verdict::new(uniform, uniform_citation, &evidence),
    }
    .into_report(space, psi, preconditions, tol))
}

/// Dispatches on the space. `BesovOne` has no classification theory.
pub fn classify(psi: &AnalyticFunction, space: SpaceTag, spec: &GridSpec, tol: f64) -> Result<ClassificationReport> {
    match space {
        SpaceTag::Bloch => classify_bloch(psi, spec, tol),
        SpaceTag::LittleBloch => classify_little_bloch(psi, spec, tol),
        SpaceTag::Besov(p) => classify_besov(psi, p, spec, tol),
        SpaceTag::BesovOne => Err(Error::InvalidArgument("classification is available for bloch, little-bloch and besov".into())),
    }
}
