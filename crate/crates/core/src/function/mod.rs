//! Holomorphic functions on the unit disk and their truncated series algebra.
//!
//! Every function is one of four representations. Coefficient-based variants
//! (`Constant`, `Polynomial`, `Taylor`) share one series view; `Mobius`
//! automorphisms are kept in closed form and are only expanded into a Taylor
//! series when an algebraic operation needs coefficients.
//!
//! A `Taylor` value carries an optional `tail_bound`: an upper bound on
//! `Σ_{k>N} |c_k|`, the ℓ¹ mass of the omitted coefficients. Since
//! `|Σ_{k>N} c_k z^k| ≤ Σ_{k>N} |c_k|` on the closed disk, it bounds the
//! pointwise truncation error everywhere on `|z| ≤ 1`. `None` means the tail
//! is not controlled (coefficients read from a file, for instance), and then
//! the stored polynomial is only trusted strictly inside the disk.

mod parse;
mod sampler;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use parse::{format_complex, parse_complex, parse_spec, read_taylor_csv};
pub use sampler::Sampler;

/// Default truncation degree for products, powers and Möbius expansions.
pub const DEFAULT_MAX_DEGREE: usize = 256;

/// Coefficients below this modulus (index ≥ 1) make a function count as constant.
pub const CONSTANT_COEFF_EPS: f64 = 1e-14;

const UNIMODULAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticFunction {
    Constant(Complex64),
    /// Ascending coefficients; never carries trailing zeros past the constant term.
    Polynomial(Vec<Complex64>),
    Taylor {
        coeffs: Vec<Complex64>,
        tail_bound: Option<f64>,
    },
    /// `z ↦ rotation · (a − z) / (1 − ā z)`.
    Mobius { a: Complex64, rotation: Complex64 },
}

fn check_finite(coeffs: &[Complex64]) -> Result<()> {
    match coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        Some(k) => Err(Error::NonFinite(format!("coefficient {k}"))),
        None => Ok(()),
    }
}

fn strip_trailing_zeros(coeffs: &mut Vec<Complex64>) {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm_sqr() == 0.0) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(Complex64::new(0.0, 0.0));
    }
}

fn l1(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|c| c.norm()).sum()
}

impl AnalyticFunction {
    pub fn constant(c: Complex64) -> Self {
        AnalyticFunction::Constant(c)
    }

    /// The identity `f(z) = z`.
    pub fn identity() -> Self {
        AnalyticFunction::Polynomial(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn polynomial(mut coeffs: Vec<Complex64>) -> Result<Self> {
        check_finite(&coeffs)?;
        strip_trailing_zeros(&mut coeffs);
        Ok(AnalyticFunction::Polynomial(coeffs))
    }

    pub fn taylor(coeffs: Vec<Complex64>, tail_bound: Option<f64>) -> Result<Self> {
        check_finite(&coeffs)?;
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("taylor series needs at least one coefficient".into()));
        }
        if let Some(t) = tail_bound {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidArgument(format!("tail bound must be finite and nonnegative, got {t}")));
            }
        }
        Ok(AnalyticFunction::Taylor { coeffs, tail_bound })
    }

    pub fn mobius(a: Complex64, rotation: Complex64) -> Result<Self> {
        if !a.re.is_finite() || !a.im.is_finite() || a.norm() >= 1.0 {
            return Err(Error::MobiusOutsideDisk { modulus: a.norm() });
        }
        if (rotation.norm() - 1.0).abs() > UNIMODULAR_EPS {
            return Err(Error::NotUnimodular { modulus: rotation.norm() });
        }
        Ok(AnalyticFunction::Mobius { a, rotation })
    }

    /// Coefficients of the stored series part, or `None` for a Möbius map.
    pub fn stored_coefficients(&self) -> Option<&[Complex64]> {
        match self {
            AnalyticFunction::Constant(c) => Some(std::slice::from_ref(c)),
            AnalyticFunction::Polynomial(c) => Some(c),
            AnalyticFunction::Taylor { coeffs, .. } => Some(coeffs),
            AnalyticFunction::Mobius { .. } => None,
        }
    }

    /// Bound on the pointwise error of the stored representation on the closed disk.
    /// Exact representations report `Some(0.0)`.
    pub fn tail_bound(&self) -> Option<f64> {
        match self {
            AnalyticFunction::Taylor { tail_bound, .. } => *tail_bound,
            _ => Some(0.0),
        }
    }

    /// Whether the represented function is known to extend continuously to `|z| = 1`.
    pub fn continuous_on_closed_disk(&self) -> bool {
        self.tail_bound().is_some()
    }

    /// Degree of the stored series part (`None` for Möbius maps).
    pub fn degree(&self) -> Option<usize> {
        self.stored_coefficients().map(|c| c.len().saturating_sub(1))
    }

    /// Representation-level constancy: a constant or a degree-0 polynomial.
    pub fn is_exact_constant(&self) -> bool {
        match self {
            AnalyticFunction::Constant(_) => true,
            AnalyticFunction::Polynomial(c) => c.len() <= 1,
            AnalyticFunction::Taylor { coeffs, tail_bound } => {
                *tail_bound == Some(0.0) && coeffs.iter().skip(1).all(|c| c.norm_sqr() == 0.0)
            }
            AnalyticFunction::Mobius { .. } => false,
        }
    }

    /// The constant value when every coefficient of index ≥ 1 is below
    /// [`CONSTANT_COEFF_EPS`] and the tail is controlled below it as well.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            AnalyticFunction::Constant(c) => Some(*c),
            AnalyticFunction::Mobius { .. } => None,
            AnalyticFunction::Polynomial(c) | AnalyticFunction::Taylor { coeffs: c, .. } => {
                let tail_ok = self.tail_bound().is_some_and(|t| t < CONSTANT_COEFF_EPS);
                let flat = c.iter().skip(1).all(|x| x.norm() < CONSTANT_COEFF_EPS);
                (tail_ok && flat).then(|| c[0])
            }
        }
    }

    /// Evaluation without domain checks. Coefficient variants use Horner's rule.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match self {
            AnalyticFunction::Constant(c) => *c,
            AnalyticFunction::Polynomial(c) | AnalyticFunction::Taylor { coeffs: c, .. } => horner(c, z),
            AnalyticFunction::Mobius { a, rotation } => *rotation * (*a - z) / (1.0 - a.conj() * z),
        }
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if !r.is_finite() || r > 1.0 {
            return Err(Error::OutsideDomain { re: z.re, im: z.im, reason: "|z| > 1" });
        }
        if r >= 1.0 && !self.continuous_on_closed_disk() {
            return Err(Error::OutsideDomain {
                re: z.re,
                im: z.im,
                reason: "taylor series with unknown tail is only defined for |z| < 1",
            });
        }
        if let AnalyticFunction::Mobius { a, .. } = self {
            if (1.0 - a.conj() * z).norm() == 0.0 {
                return Err(Error::OutsideDomain { re: z.re, im: z.im, reason: "mobius pole" });
            }
        }
        let v = self.eval_unchecked(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("f({z})")))
        }
    }

    /// Series view truncated at `max_degree`, with the matching tail bound.
    pub fn series(&self, max_degree: usize) -> (Vec<Complex64>, Option<f64>) {
        match self {
            AnalyticFunction::Constant(c) => (vec![*c], Some(0.0)),
            AnalyticFunction::Polynomial(c) => truncate(c.clone(), Some(0.0), max_degree),
            AnalyticFunction::Taylor { coeffs, tail_bound } => truncate(coeffs.clone(), *tail_bound, max_degree),
            AnalyticFunction::Mobius { a, rotation } => mobius_series(*a, *rotation, max_degree),
        }
    }

    /// Exact derivative of order 1 or 2. Möbius maps are expanded to
    /// `max_degree` terms with the closed-form tail of the derivative series.
    pub fn derivative(&self, order: usize, max_degree: usize) -> Result<AnalyticFunction> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order must be 1 or 2, got {order}")));
        }
        let out = match self {
            AnalyticFunction::Constant(_) => AnalyticFunction::Constant(Complex64::new(0.0, 0.0)),
            AnalyticFunction::Polynomial(c) => {
                let d = differentiate(c, order);
                AnalyticFunction::polynomial(d)?
            }
            AnalyticFunction::Taylor { coeffs, tail_bound } => {
                // ℓ¹ control of a tail does not bound the tail of its derivative.
                let tail = match tail_bound {
                    Some(t) if *t == 0.0 => Some(0.0),
                    _ => None,
                };
                AnalyticFunction::Taylor { coeffs: differentiate(coeffs, order), tail_bound: tail }
            }
            AnalyticFunction::Mobius { a, rotation } => {
                let (coeffs, tail) = mobius_derivative_series(*a, *rotation, order, max_degree);
                AnalyticFunction::Taylor { coeffs, tail_bound: Some(tail) }
            }
        };
        Ok(out)
    }

    /// Pointwise/circle evaluator for the derivative of the given order (0 = the function).
    pub fn sampler(&self, order: usize) -> Sampler {
        match self {
            AnalyticFunction::Mobius { a, rotation } => Sampler::Mobius { a: *a, rotation: *rotation, order },
            _ => {
                let c = self.stored_coefficients().unwrap_or(&[]);
                Sampler::Series(differentiate(c, order))
            }
        }
    }

    /// `k · f`.
    /// Coefficient form: Möbius maps become truncated series, others are unchanged.
    pub fn expanded(&self, max_degree: usize) -> AnalyticFunction {
        match self {
            AnalyticFunction::Mobius { .. } => {
                let (c, t) = self.series(max_degree);
                from_series(c, t)
            }
            other => other.clone(),
        }
    }

    pub fn scale(&self, k: Complex64, max_degree: usize) -> AnalyticFunction {
        if k == Complex64::new(1.0, 0.0) {
            return self.clone();
        }
        match self {
            AnalyticFunction::Constant(c) => AnalyticFunction::Constant(k * c),
            AnalyticFunction::Polynomial(c) => {
                let mut v: Vec<_> = c.iter().map(|x| k * x).collect();
                strip_trailing_zeros(&mut v);
                AnalyticFunction::Polynomial(v)
            }
            AnalyticFunction::Taylor { coeffs, tail_bound } => AnalyticFunction::Taylor {
                coeffs: coeffs.iter().map(|x| k * x).collect(),
                tail_bound: tail_bound.map(|t| t * k.norm()),
            },
            AnalyticFunction::Mobius { a, rotation } => {
                if (k.norm() - 1.0).abs() <= UNIMODULAR_EPS {
                    AnalyticFunction::Mobius { a: *a, rotation: *rotation * k / k.norm() }
                } else if k.norm_sqr() == 0.0 {
                    AnalyticFunction::Constant(Complex64::new(0.0, 0.0))
                } else {
                    let (c, t) = mobius_series(*a, *rotation, max_degree);
                    AnalyticFunction::Taylor {
                        coeffs: c.iter().map(|x| k * x).collect(),
                        tail_bound: t.map(|t| t * k.norm()),
                    }
                }
            }
        }
    }

    /// `f + g`, truncated to `max_degree`.
    pub fn add(&self, other: &AnalyticFunction, max_degree: usize) -> AnalyticFunction {
        if let (AnalyticFunction::Constant(a), AnalyticFunction::Constant(b)) = (self, other) {
            return AnalyticFunction::Constant(a + b);
        }
        let (a, ta) = self.series(max_degree);
        let (b, tb) = other.series(max_degree);
        let mut sum = vec![Complex64::new(0.0, 0.0); a.len().max(b.len())];
        for (k, x) in a.iter().enumerate() {
            sum[k] += x;
        }
        for (k, x) in b.iter().enumerate() {
            sum[k] += x;
        }
        let tail = ta.zip(tb).map(|(x, y)| x + y);
        from_series(sum, tail)
    }

    /// Text form in the function mini-language. Taylor series are rendered
    /// through their stored coefficients as a `poly` spec.
    pub fn render(&self) -> String {
        let list = |c: &[Complex64]| c.iter().map(|x| format_complex(*x)).collect::<Vec<_>>().join(" ");
        match self {
            AnalyticFunction::Constant(c) => format!("const {}", format_complex(*c)),
            AnalyticFunction::Polynomial(c) => format!("poly {}", list(c)),
            AnalyticFunction::Taylor { coeffs, .. } => format!("poly {}", list(coeffs)),
            AnalyticFunction::Mobius { a, rotation } => {
                format!("mobius {} rot {}", format_complex(*a), format_complex(*rotation))
            }
        }
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| acc * z + x)
}

fn differentiate(c: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut d = c.to_vec();
    for _ in 0..order {
        if d.len() <= 1 {
            d = vec![Complex64::new(0.0, 0.0)];
            continue;
        }
        d = d.iter().enumerate().skip(1).map(|(k, x)| x * k as f64).collect();
    }
    if d.is_empty() {
        d.push(Complex64::new(0.0, 0.0));
    }
    d
}

fn truncate(mut c: Vec<Complex64>, tail: Option<f64>, max_degree: usize) -> (Vec<Complex64>, Option<f64>) {
    if c.len() > max_degree + 1 {
        let dropped = l1(&c[max_degree + 1..]);
        c.truncate(max_degree + 1);
        (c, tail.map(|t| t + dropped))
    } else {
        (c, tail)
    }
}

/// Builds the narrowest variant for a coefficient vector.
fn from_series(mut coeffs: Vec<Complex64>, tail: Option<f64>) -> AnalyticFunction {
    if tail == Some(0.0) {
        strip_trailing_zeros(&mut coeffs);
        if coeffs.len() == 1 {
            AnalyticFunction::Constant(coeffs[0])
        } else {
            AnalyticFunction::Polynomial(coeffs)
        }
    } else {
        AnalyticFunction::Taylor { coeffs, tail_bound: tail }
    }
}

/// Taylor coefficients of `rot (a − z)/(1 − ā z) = rot a − rot (1 − |a|²) Σ_{k≥1} ā^{k−1} z^k`,
/// with tail `Σ_{k>N} (1−|a|²)|a|^{k−1} = (1+|a|)|a|^N`.
fn mobius_series(a: Complex64, rot: Complex64, max_degree: usize) -> (Vec<Complex64>, Option<f64>) {
    let m = a.norm();
    let scale = -rot * (1.0 - m * m);
    let mut coeffs = Vec::with_capacity(max_degree + 1);
    coeffs.push(rot * a);
    let mut p = Complex64::new(1.0, 0.0);
    for _ in 1..=max_degree {
        coeffs.push(scale * p);
        p *= a.conj();
    }
    (coeffs, Some((1.0 + m) * m.powi(max_degree as i32)))
}

/// Series of the first or second derivative of a Möbius map, truncated at
/// `max_degree`, and the ℓ¹ mass of the omitted coefficients in closed form.
fn mobius_derivative_series(a: Complex64, rot: Complex64, order: usize, max_degree: usize) -> (Vec<Complex64>, f64) {
    let m = a.norm();
    let base = -rot * (1.0 - m * m);
    let ac = a.conj();
    let mut coeffs = Vec::with_capacity(max_degree + 1);
    let mut p = if order == 1 { Complex64::new(1.0, 0.0) } else { ac };
    for k in 0..=max_degree {
        let kf = k as f64;
        let mult = if order == 1 { kf + 1.0 } else { (kf + 1.0) * (kf + 2.0) };
        coeffs.push(base * p * mult);
        p *= ac;
    }
    let first = max_degree as f64 + 1.0;
    let tail = if m == 0.0 {
        0.0
    } else if order == 1 {
        // Σ_{k≥M} (k+1) x^k = (M+1) x^M/(1−x) + x^{M+1}/(1−x)²
        let xm = m.powf(first);
        (1.0 - m * m) * ((first + 1.0) * xm / (1.0 - m) + xm * m / ((1.0 - m) * (1.0 - m)))
    } else {
        // Σ_{k≥M} (k+1)(k+2) x^k = d²/dx² [x^{M+2}/(1−x)]
        let e = first + 2.0;
        let q = 1.0 - m;
        let g2 = e * (e - 1.0) * m.powf(e - 2.0) / q + 2.0 * e * m.powf(e - 1.0) / (q * q) + 2.0 * m.powf(e) / (q * q * q);
        (1.0 - m * m) * m * g2
    };
    (coeffs, tail)
}

/// Cauchy product truncated at `max_degree`. The tail bound collects the
/// exact ℓ¹ mass of the dropped product coefficients plus the cross terms
/// `‖f‖₁ t_g + ‖g‖₁ t_f + t_f t_g` of the input tails.
pub fn multiply(f: &AnalyticFunction, g: &AnalyticFunction, max_degree: usize) -> AnalyticFunction {
    match (f, g) {
        (AnalyticFunction::Constant(a), AnalyticFunction::Constant(b)) => return AnalyticFunction::Constant(a * b),
        (AnalyticFunction::Constant(a), other) | (other, AnalyticFunction::Constant(a)) => {
            return other.scale(*a, max_degree);
        }
        _ => {}
    }
    let (a, ta) = f.series(max_degree);
    let (b, tb) = g.series(max_degree);
    let full = convolve(&a, &b);
    let (coeffs, dropped) = if full.len() > max_degree + 1 {
        (full[..=max_degree].to_vec(), l1(&full[max_degree + 1..]))
    } else {
        (full, 0.0)
    };
    let tail = ta.zip(tb).map(|(ta, tb)| dropped + l1(&a) * tb + l1(&b) * ta + ta * tb);
    from_series(coeffs, tail)
}

pub(crate) fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `fⁿ` by repeated squaring; `f⁰ = 1`.
pub fn power(f: &AnalyticFunction, n: u32, max_degree: usize) -> AnalyticFunction {
    if let AnalyticFunction::Constant(c) = f {
        return AnalyticFunction::Constant(c.powu(n));
    }
    let mut result = AnalyticFunction::Constant(Complex64::new(1.0, 0.0));
    let mut base = f.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = multiply(&result, &base, max_degree);
        }
        e >>= 1;
        if e > 0 {
            base = multiply(&base, &base, max_degree);
        }
    }
    result
}

/// Symbol of the n-th Cesàro mean of `M_ψ`: `(1/n) Σ_{m=1}^{n} ψ^m`.
pub fn cesaro_symbol(psi: &AnalyticFunction, n: u32, max_degree: usize) -> Result<AnalyticFunction> {
    if n == 0 {
        return Err(Error::InvalidArgument("cesaro index must be ≥ 1".into()));
    }
    if let AnalyticFunction::Constant(xi) = psi {
        return Ok(AnalyticFunction::Constant(constant_cesaro(*xi, n)));
    }
    let mut acc = CesaroAccumulator::new(psi.clone(), max_degree);
    for _ in 1..n {
        acc.advance();
    }
    Ok(acc.mean())
}

/// `(1/n) Σ_{m=1}^{n} ξ^m`, via `ξ(1−ξⁿ)/(1−ξ)` for `ξ ≠ 1`.
pub fn constant_cesaro(xi: Complex64, n: u32) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if xi == one {
        return one;
    }
    xi * (one - xi.powu(n)) / (one - xi) / n as f64
}

/// Running partial sums `S_n = Σ_{m=1}^{n} ψ^m` for Cesàro traces.
#[derive(Debug, Clone)]
pub struct CesaroAccumulator {
    psi: AnalyticFunction,
    power: AnalyticFunction,
    sum: AnalyticFunction,
    n: u32,
    max_degree: usize,
}

impl CesaroAccumulator {
    pub fn new(psi: AnalyticFunction, max_degree: usize) -> Self {
        let psi = psi.expanded(max_degree);
        let power = psi.clone();
        CesaroAccumulator { sum: power.clone(), power, psi, n: 1, max_degree }
    }

    pub fn index(&self) -> u32 {
        self.n
    }

    /// Current `ψⁿ`.
    pub fn power(&self) -> &AnalyticFunction {
        &self.power
    }

    pub fn advance(&mut self) {
        self.power = multiply(&self.power, &self.psi, self.max_degree);
        self.sum = self.sum.add(&self.power, self.max_degree);
        self.n += 1;
    }

    pub fn mean(&self) -> AnalyticFunction {
        if let AnalyticFunction::Constant(xi) = self.psi {
            return AnalyticFunction::Constant(constant_cesaro(xi, self.n));
        }
        self.sum.scale(Complex64::new(1.0 / self.n as f64, 0.0), self.max_degree)
    }
}
