//! Coefficient decimation: keeping every `M`-th prototype tap stretches the
//! frequency response by `M`.

use crate::error::{Error, Result};
use crate::prototype::{peak_gain, FilterSpec, PrototypeFilter};

pub const DEFAULT_M_MAX: usize = 8;

/// Grid used to locate the passband peak when renormalizing.
const PEAK_GRID: usize = 16385;

/// Integer decimation factor, `M >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecimationFactor(usize);

impl DecimationFactor {
    pub const ONE: DecimationFactor = DecimationFactor(1);

    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Range("decimation factor must be at least 1".into()));
        }
        Ok(Self(m))
    }

    /// `M` checked against `m_max` and against the prototype's band: the
    /// stretched upper stopband edge must stay below Nyquist.
    pub fn for_spec(m: usize, spec: &FilterSpec, m_max: usize) -> Result<Self> {
        let d = Self::new(m)?;
        if m > m_max {
            return Err(Error::Range(format!("decimation factor {m} exceeds maximum {m_max}")));
        }
        check_nyquist(spec, d)?;
        Ok(d)
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

/// Fails if `M * (center + bandwidth/2 + transition) >= 1`.
pub fn check_nyquist(spec: &FilterSpec, m: DecimationFactor) -> Result<()> {
    let edge = m.get() as f64 * spec.stopband_edges().1;
    if edge >= 1.0 {
        return Err(Error::Range(format!(
            "M = {} stretches the upper band edge to {edge:.4}, past Nyquist",
            m.get()
        )));
    }
    Ok(())
}

/// `[h[0], h[M], h[2M], ...]`, length `floor(N / M) + 1`.
pub fn select_every(coeffs: &[f64], m: DecimationFactor) -> Vec<f64> {
    coeffs.iter().step_by(m.get()).copied().collect()
}

/// Decimated coefficient set for `M`, rescaled to a 0 dB passband peak.
/// `M = 1` returns the prototype coefficients untouched.
pub fn decimate_coefficients(proto: &PrototypeFilter, m: DecimationFactor) -> Result<Vec<f64>> {
    check_nyquist(proto.spec(), m)?;
    if m.get() == 1 {
        return Ok(proto.coeffs().to_vec());
    }
    let mut g = select_every(proto.coeffs(), m);
    let peak = peak_gain(&g, PEAK_GRID);
    for c in &mut g {
        *c /= peak;
    }
    Ok(g)
}

/// Center and bandwidth after decimation: both scale by `M`.
pub fn predicted_stretch(center: f64, bandwidth: f64, m: DecimationFactor) -> Result<(f64, f64)> {
    let k = m.get() as f64;
    if k * center >= 1.0 {
        return Err(Error::Range(format!(
            "stretched center {} is at or beyond Nyquist",
            k * center
        )));
    }
    Ok((k * center, k * bandwidth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    use crate::warped::fir_response;

    fn dm(m: usize) -> DecimationFactor {
        DecimationFactor::new(m).unwrap()
    }

    #[test]
    fn zero_is_rejected() {
        assert!(DecimationFactor::new(0).is_err());
    }

    #[test]
    fn selection_by_index() {
        let h = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        assert_eq!(select_every(&h, dm(2)), vec![1.0, 3.0, 5.0, 7.0]);
        assert_eq!(select_every(&h, dm(3)), vec![1.0, 4.0, 7.0]);
        assert_eq!(select_every(&h, dm(1)), h.to_vec());
    }

    #[test]
    fn length_is_floor_n_over_m_plus_one() {
        for len in 1..40usize {
            let h = vec![0.5; len];
            for m in 1..7 {
                assert_eq!(select_every(&h, dm(m)).len(), (len - 1) / m + 1);
            }
        }
    }

    #[test]
    fn stretch_prediction() {
        assert_eq!(predicted_stretch(0.14, 0.02, dm(1)).unwrap(), (0.14, 0.02));
        let (c, b) = predicted_stretch(0.14, 0.02, dm(2)).unwrap();
        assert!((c - 0.28).abs() < 1e-15 && (b - 0.04).abs() < 1e-15);
        let (c, b) = predicted_stretch(0.14, 0.02, dm(5)).unwrap();
        assert!((c - 0.70).abs() < 1e-15 && (b - 0.10).abs() < 1e-15);
        assert!(matches!(predicted_stretch(0.25, 0.02, dm(4)), Err(Error::Range(_))));
    }

    #[test]
    fn nyquist_limit_and_m_max() {
        let spec = FilterSpec::default();
        assert!(DecimationFactor::for_spec(5, &spec, 8).is_ok());
        assert!(DecimationFactor::for_spec(6, &spec, 8).is_ok());
        assert!(matches!(DecimationFactor::for_spec(7, &spec, 8), Err(Error::Range(_))));
        assert!(DecimationFactor::for_spec(5, &spec, 4).is_err());
    }

    fn aliasing_sum(h: &[f64], m: usize, omega: f64) -> Complex64 {
        (0..m)
            .map(|k| fir_response(h, (omega - 2.0 * PI * k as f64) / m as f64))
            .sum::<Complex64>()
            / m as f64
    }

    #[test]
    fn decimated_response_is_aliasing_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for len in [9usize, 48, 64] {
            let h: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for m in 2..=4 {
                let g = select_every(&h, dm(m));
                for i in 0..512 {
                    let w = PI * i as f64 / 511.0;
                    let d = fir_response(&g, w) - aliasing_sum(&h, m, w);
                    assert!(d.norm() < 1e-9, "len={len} m={m} i={i}");
                }
            }
        }
    }

    #[test]
    fn identity_for_m_one() {
        let spec = FilterSpec::default();
        let p = PrototypeFilter::from_parts(vec![0.1, -0.2, 0.7, -0.2, 0.1], spec).unwrap();
        assert_eq!(decimate_coefficients(&p, dm(1)).unwrap(), p.coeffs());
    }
}
