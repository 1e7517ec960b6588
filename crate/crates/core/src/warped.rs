//! Warped FIR structure: a transposed-direct-form tap chain whose unit
//! delays are replaced by first-order allpass sections, `G(z) = H(A(z))`.

use num_complex::Complex64;

use crate::allpass::{allpass_response, warped_frequency, AllpassState, WarpingCoefficient};
use crate::error::{Error, Result};

/// Plain FIR response `sum h[k] e^{-jkw}` (Horner in `e^{-jw}`).
pub fn fir_response(coeffs: &[f64], omega: f64) -> Complex64 {
    horner(coeffs, Complex64::from_polar(1.0, -omega))
}

/// `sum h[k] A(e^{jw})^k`, evaluated by Horner's scheme on `A(e^{jw})`.
pub fn warped_response(coeffs: &[f64], alpha: WarpingCoefficient, omega: f64) -> Complex64 {
    horner(coeffs, allpass_response(alpha, omega))
}

/// Same value as [`warped_response`] obtained by evaluating the prototype at
/// the warped frequency, `H(e^{j theta(w)})`. Valid because `|A| = 1`.
pub fn warped_response_by_phase(coeffs: &[f64], alpha: WarpingCoefficient, omega: f64) -> Complex64 {
    fir_response(coeffs, warped_frequency(alpha, omega))
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Sample-by-sample warped FIR filter.
///
/// Tap `k` (for `k >= 1`) feeds allpass stage `k - 1`; each stage output is
/// accumulated into the input of the stage below, and the output is
/// `h[0] x + (output of stage 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedEngine {
    coeffs: Vec<f64>,
    alpha: WarpingCoefficient,
    stages: Vec<AllpassState>,
}

impl WarpedEngine {
    pub fn new(coeffs: Vec<f64>, alpha: WarpingCoefficient) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("warped filter needs at least one coefficient".into()));
        }
        let stages = vec![AllpassState::new(alpha); coeffs.len() - 1];
        Ok(Self { coeffs, alpha, stages })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn alpha(&self) -> WarpingCoefficient {
        self.alpha
    }

    pub fn stages(&self) -> &[AllpassState] {
        &self.stages
    }

    /// Updates the warping coefficient of every stage; delay contents are kept.
    pub fn set_alpha(&mut self, alpha: WarpingCoefficient) {
        self.alpha = alpha;
        for s in &mut self.stages {
            s.set_alpha(alpha);
        }
    }

    pub fn reset(&mut self) {
        for s in &mut self.stages {
            s.reset();
        }
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let mut carry = 0.0;
        for (stage, &h) in self.stages.iter_mut().zip(&self.coeffs[1..]).rev() {
            carry = stage.step(h * x + carry);
        }
        self.coeffs[0] * x + carry
    }

    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.step(x)).collect()
    }

    pub fn process_in_place(&mut self, buf: &mut [f64]) {
        for v in buf {
            *v = self.step(*v);
        }
    }

    /// Analytic response of the current configuration.
    pub fn response(&self, omega: f64) -> Complex64 {
        warped_response(&self.coeffs, self.alpha, omega)
    }
}

/// First `n` samples of the engine's impulse response, starting from reset.
/// The engine passed in is not modified.
pub fn warped_impulse_response(engine: &WarpedEngine, n: usize) -> Vec<f64> {
    let mut e = engine.clone();
    e.reset();
    (0..n).map(|i| e.step(if i == 0 { 1.0 } else { 0.0 })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn wc(a: f64) -> WarpingCoefficient {
        WarpingCoefficient::new(a).unwrap()
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn convolve(h: &[f64], x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|n| {
                h.iter()
                    .enumerate()
                    .filter(|(k, _)| *k <= n)
                    .map(|(k, &c)| c * x[n - k])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn rejects_empty_coefficients() {
        assert!(WarpedEngine::new(vec![], wc(0.1)).is_err());
    }

    #[test]
    fn zero_alpha_response_is_fir() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_coeffs(&mut rng, 17);
        for w in [0.0, 0.3, 1.7, PI] {
            let direct: Complex64 = h
                .iter()
                .enumerate()
                .map(|(k, &c)| c * Complex64::from_polar(1.0, -(k as f64) * w))
                .sum();
            assert!((warped_response(&h, wc(0.0), w) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn single_tap_is_unwarped() {
        for a in [-0.7, 0.2, 0.9] {
            for w in [0.0, 1.0, 3.0] {
                assert_eq!(warped_response(&[1.0], wc(a), w), Complex64::new(1.0, 0.0));
            }
            let mut e = WarpedEngine::new(vec![2.5], wc(a)).unwrap();
            let x = [1.0, -3.0, 0.25, 7.0];
            assert_eq!(e.process(&x), vec![2.5, -7.5, 0.625, 17.5]);
        }
    }

    #[test]
    fn horner_and_phase_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_coeffs(&mut rng, 40);
        for a in [-0.9, -0.4, 0.3, 0.85] {
            for i in 0..4096 {
                let w = PI * i as f64 / 4095.0;
                let d = warped_response(&h, wc(a), w) - warped_response_by_phase(&h, wc(a), w);
                assert!(d.norm() < 1e-10, "a={a} w={w} d={}", d.norm());
            }
        }
    }

    #[test]
    fn zero_alpha_streaming_is_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_coeffs(&mut rng, 31);
        let x = random_coeffs(&mut rng, 1000);
        let mut e = WarpedEngine::new(h.clone(), wc(0.0)).unwrap();
        let y = e.process(&x);
        let r = convolve(&h, &x);
        let err = y.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err={err}");
    }

    #[test]
    fn pure_allpass_tap_matches_allpass_section() {
        let e = WarpedEngine::new(vec![0.0, 1.0], wc(0.5)).unwrap();
        let h = warped_impulse_response(&e, 64);
        let mut st = AllpassState::new(wc(0.5));
        for (i, &v) in h.iter().enumerate() {
            let r = st.step(if i == 0 { 1.0 } else { 0.0 });
            assert!((v - r).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_response_fir_case() {
        let h = vec![0.5, -1.0, 2.0, 0.25];
        let e = WarpedEngine::new(h.clone(), wc(0.0)).unwrap();
        let ir = warped_impulse_response(&e, 8);
        assert_eq!(&ir[..4], &h[..]);
        assert!(ir[4..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_sample_is_prototype_at_minus_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_coeffs(&mut rng, 12);
        for a in [-0.6, 0.35] {
            let e = WarpedEngine::new(h.clone(), wc(a)).unwrap();
            let y0 = warped_impulse_response(&e, 1)[0];
            let poly: f64 = h.iter().enumerate().map(|(k, &c)| c * (-a).powi(k as i32)).sum();
            assert!((y0 - poly).abs() < 1e-12);
        }
    }

    #[test]
    fn impulse_response_dft_matches_analytic() {
        use rustfft::FftPlanner;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_coeffs(&mut rng, 24);
        let n = 8192;
        for a in [-0.8, 0.5, 0.8] {
            let e = WarpedEngine::new(h.clone(), wc(a)).unwrap();
            let ir = warped_impulse_response(&e, n);
            let mut buf: Vec<Complex64> = ir.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
            for (k, v) in buf.iter().enumerate().take(n / 2 + 1) {
                let w = 2.0 * PI * k as f64 / n as f64;
                let an = warped_response(&h, wc(a), w);
                assert!((v - an).norm() <= 1e-6 * an.norm().max(1e-300), "a={a} k={k}");
            }
        }
    }

    #[test]
    fn streaming_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_coeffs(&mut rng, 20);
        let x1 = random_coeffs(&mut rng, 500);
        let x2 = random_coeffs(&mut rng, 500);
        let (ca, cb) = (0.7, -1.3);
        let mix: Vec<f64> = x1.iter().zip(&x2).map(|(p, q)| ca * p + cb * q).collect();
        let run = |x: &[f64]| WarpedEngine::new(h.clone(), wc(-0.45)).unwrap().process(x);
        let (y1, y2, ym) = (run(&x1), run(&x2), run(&mix));
        for i in 0..500 {
            assert!((ym[i] - (ca * y1[i] + cb * y2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn set_alpha_keeps_state() {
        let mut e = WarpedEngine::new(vec![1.0, 0.5, 0.25], wc(0.2)).unwrap();
        e.process(&[1.0, 2.0, 3.0]);
        let before: Vec<f64> = e.stages().iter().map(|s| s.delay_value()).collect();
        e.set_alpha(wc(-0.3));
        let after: Vec<f64> = e.stages().iter().map(|s| s.delay_value()).collect();
        assert_eq!(before, after);
        assert!(e.stages().iter().all(|s| s.alpha() == wc(-0.3)));
        e.reset();
        assert!(e.stages().iter().all(|s| s.delay_value() == 0.0));
    }
}
