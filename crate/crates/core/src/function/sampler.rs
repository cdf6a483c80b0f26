use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::horner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

/// Below this many coefficients a direct Horner sweep beats the FFT fold.
const HORNER_CUTOFF: usize = 12;

/// Evaluator for `f^{(order)}` on points and on whole circles.
#[derive(Debug, Clone)]
pub enum Sampler {
    /// Coefficients of the derivative, ascending.
    Series(Vec<Complex64>),
    Mobius { a: Complex64, rotation: Complex64, order: usize },
}

impl Sampler {
    pub fn at(&self, z: Complex64) -> Complex64 {
        match self {
            Sampler::Series(c) => horner(c, z),
            Sampler::Mobius { a, rotation, order } => mobius_derivative(*a, *rotation, *order, z),
        }
    }

    /// True when the sampled function is identically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, Sampler::Series(c) if c.iter().all(|x| x.norm_sqr() == 0.0))
    }

    /// Values at `z_j = r e^{2πij/n}`, `j = 0..n`.
    ///
    /// Series are folded modulo `n` (`b_m = Σ_{k≡m} c_k r^k`) and pushed
    /// through one inverse DFT, which is exact at the sample angles for any degree.
    pub fn circle(&self, r: f64, n: usize) -> Vec<Complex64> {
        match self {
            Sampler::Series(c) if c.len() > HORNER_CUTOFF => {
                let mut folded = vec![Complex64::new(0.0, 0.0); n];
                let mut rk = 1.0;
                for (k, x) in c.iter().enumerate() {
                    folded[k % n] += x * rk;
                    rk *= r;
                }
                let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
                SCRATCH.with(|s| {
                    let mut scratch = s.borrow_mut();
                    let len = fft.get_inplace_scratch_len();
                    if scratch.len() < len {
                        scratch.resize(len, Complex64::new(0.0, 0.0));
                    }
                    fft.process_with_scratch(&mut folded, &mut scratch[..len]);
                });
                folded
            }
            _ => (0..n).map(|j| self.at(Complex64::from_polar(r, 2.0 * PI * j as f64 / n as f64))).collect(),
        }
    }
}

fn mobius_derivative(a: Complex64, rot: Complex64, order: usize, z: Complex64) -> Complex64 {
    let d = 1.0 - a.conj() * z;
    let k = rot * (a.norm_sqr() - 1.0);
    match order {
        0 => rot * (a - z) / d,
        1 => k / (d * d),
        2 => k * 2.0 * a.conj() / (d * d * d),
        n => {
            // f^{(n)} = rot (|a|²−1) n! ā^{n−1} / (1 − āz)^{n+1}
            let fact: f64 = (1..=n).map(|x| x as f64).product();
            k * fact * a.conj().powu(n as u32 - 1) / d.powu(n as u32 + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::AnalyticFunction;

    #[test]
    fn fft_circle_matches_horner() {
        let coeffs: Vec<_> = (0..300).map(|k| Complex64::new((k as f64).sin(), 1.0 / (k as f64 + 1.0))).collect();
        let s = Sampler::Series(coeffs.clone());
        let vals = s.circle(0.97, 64);
        for (j, v) in vals.iter().enumerate() {
            let z = Complex64::from_polar(0.97, 2.0 * PI * j as f64 / 64.0);
            let direct = horner(&coeffs, z);
            assert!((v - direct).norm() < 1e-10 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn mobius_sampler_matches_finite_differences() {
        let f = AnalyticFunction::mobius(Complex64::new(0.3, -0.4), Complex64::new(0.0, 1.0)).unwrap();
        let d1 = f.sampler(1);
        let d2 = f.sampler(2);
        let z = Complex64::new(0.2, 0.5);
        let h = 1e-5;
        let fd1 = (f.eval_unchecked(z + h) - f.eval_unchecked(z - h)) / (2.0 * h);
        let fd2 = (d1.at(z + h) - d1.at(z - h)) / (2.0 * h);
        assert!((d1.at(z) - fd1).norm() < 1e-8);
        assert!((d2.at(z) - fd2).norm() < 1e-7);
    }
}
