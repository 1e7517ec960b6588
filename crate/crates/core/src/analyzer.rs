//! Frequency-response sweeps and bandpass metric extraction.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::allpass::WarpingCoefficient;
use crate::error::{Error, Result};
use crate::warped::warped_response;

pub const DEFAULT_GRID: usize = 8192;
pub const MIN_GRID: usize = 16;

/// Sampled complex response on a uniform normalized-frequency grid covering
/// `[0, 1]` (1 = Nyquist), both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    freqs: Vec<f64>,
    values: Vec<Complex64>,
}

/// `n` uniformly spaced normalized frequencies from 0 to 1 inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| i as f64 / last).collect()
}

impl ResponseCurve {
    pub fn new(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != values.len() {
            return Err(Error::Parse(format!(
                "{} frequencies but {} values",
                freqs.len(),
                values.len()
            )));
        }
        if freqs.len() < 2 {
            return Err(Error::Parse("curve needs at least two points".into()));
        }
        if freqs[0] != 0.0 || freqs[freqs.len() - 1] != 1.0 {
            return Err(Error::Parse("curve must span normalized frequency 0 to 1".into()));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("frequencies must be strictly increasing".into()));
        }
        Ok(Self { freqs, values })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.norm().log10()).collect()
    }

    /// Writes `freq,mag_db,phase_rad` rows with shortest round-trip floats.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "freq,mag_db,phase_rad")?;
        for (f, v) in self.freqs.iter().zip(&self.values) {
            writeln!(out, "{},{},{}", f, 20.0 * v.norm().log10(), v.arg())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "freq,mag_db,phase_rad" => {}
            _ => return Err(Error::Parse("missing `freq,mag_db,phase_rad` header".into())),
        }
        let mut freqs = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", lineno + 2)))?;
            if fields.len() != 3 {
                return Err(Error::Parse(format!("row {}: expected 3 fields", lineno + 2)));
            }
            freqs.push(fields[0]);
            values.push(Complex64::from_polar(10f64.powf(fields[1] / 20.0), fields[2]));
        }
        Self::new(freqs, values)
    }
}

/// Evaluates the warped response of `coeffs` on a `grid_size`-point grid.
/// With `alpha = 0` this is the plain FIR response.
pub fn sweep(coeffs: &[f64], alpha: WarpingCoefficient, grid_size: usize) -> Result<ResponseCurve> {
    if grid_size < MIN_GRID {
        return Err(Error::InvalidSpec(format!(
            "grid size {grid_size} below minimum {MIN_GRID}"
        )));
    }
    let freqs = uniform_grid(grid_size);
    let values = freqs
        .iter()
        .map(|&f| warped_response(coeffs, alpha, PI * f))
        .collect();
    Ok(ResponseCurve { freqs, values })
}

/// Bandpass figures of merit extracted from a response curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassMeasurement {
    pub center: f64,
    pub bandwidth_3db: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub peak_db: f64,
}

/// Controls where [`measure`] looks for ripple and stopband leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    /// Distance beyond each -3 dB edge excluded from the stopband search.
    pub guard: f64,
    /// Region over which passband ripple is evaluated. Defaults to the
    /// span between the -3 dB edges.
    pub passband: Option<(f64, f64)>,
}

impl MeasureOptions {
    pub fn with_guard(guard: f64) -> Self {
        Self { guard, passband: None }
    }
}

/// Ripple and attenuation against explicit band edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMetrics {
    pub peak_db: f64,
    pub ripple_db: f64,
    pub atten_db: f64,
}

fn ripple_over(freqs: &[f64], db: &[f64], lo: f64, hi: f64) -> f64 {
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for (&f, &d) in freqs.iter().zip(db) {
        if f >= lo && f <= hi {
            max = max.max(d);
            min = min.min(d);
        }
    }
    if max < min {
        // region narrower than a grid step
        0.0
    } else {
        max - min
    }
}

/// Linear interpolation of the frequency where `db` crosses `level` between
/// grid points `i` and `j`.
fn crossing(freqs: &[f64], db: &[f64], i: usize, j: usize, level: f64) -> f64 {
    let t = (level - db[i]) / (db[j] - db[i]);
    freqs[i] + t * (freqs[j] - freqs[i])
}

/// Extracts center, -3 dB bandwidth, ripple and stopband attenuation.
pub fn measure(curve: &ResponseCurve, opts: &MeasureOptions) -> Result<BandpassMeasurement> {
    let freqs = &curve.freqs;
    let db = curve.magnitude_db();
    let last = db.len() - 1;
    let (peak_idx, peak_db) = db
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    if peak_idx == 0 || peak_idx == last {
        return Err(Error::NotBandpass(format!(
            "magnitude peak at f = {}",
            freqs[peak_idx]
        )));
    }
    let level = peak_db - 3.0;

    let lo_idx = (0..peak_idx)
        .rev()
        .find(|&i| db[i] < level)
        .ok_or_else(|| Error::NotBandpass("no -3 dB crossing below the peak".into()))?;
    let hi_idx = (peak_idx + 1..=last)
        .find(|&i| db[i] < level)
        .ok_or_else(|| Error::NotBandpass("no -3 dB crossing above the peak".into()))?;
    let lower = crossing(freqs, &db, lo_idx, lo_idx + 1, level);
    let upper = crossing(freqs, &db, hi_idx - 1, hi_idx, level);

    let (p_lo, p_hi) = opts.passband.unwrap_or((lower, upper));
    let ripple = ripple_over(freqs, &db, p_lo, p_hi);

    let (s_lo, s_hi) = (lower - opts.guard, upper + opts.guard);
    let leak = freqs
        .iter()
        .zip(&db)
        .filter(|(&f, _)| f < s_lo || f > s_hi)
        .map(|(_, &d)| d)
        .fold(f64::NEG_INFINITY, f64::max);
    if leak == f64::NEG_INFINITY {
        return Err(Error::NotBandpass("guard band leaves no stopband points".into()));
    }

    Ok(BandpassMeasurement {
        center: 0.5 * (lower + upper),
        bandwidth_3db: upper - lower,
        passband_ripple_db: ripple,
        stopband_atten_db: peak_db - leak,
        peak_db,
    })
}

/// Ripple inside `passband` and attenuation over `f <= stopband.0` and
/// `f >= stopband.1`, both relative to the global peak.
pub fn band_metrics(curve: &ResponseCurve, passband: (f64, f64), stopband: (f64, f64)) -> BandMetrics {
    band_metrics_db(&curve.freqs, &curve.magnitude_db(), passband, stopband)
}

pub(crate) fn band_metrics_db(
    freqs: &[f64],
    db: &[f64],
    passband: (f64, f64),
    stopband: (f64, f64),
) -> BandMetrics {
    let peak_db = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ripple = ripple_over(freqs, db, passband.0, passband.1);
    let leak = freqs
        .iter()
        .zip(db)
        .filter(|(&f, _)| f <= stopband.0 || f >= stopband.1)
        .map(|(_, &d)| d)
        .fold(f64::NEG_INFINITY, f64::max);
    BandMetrics {
        peak_db,
        ripple_db: ripple,
        atten_db: peak_db - leak,
    }
}

/// Amplitude of the sinusoidal component of `signal` at normalized
/// frequency `freq`, estimated with a Hann-windowed projection.
pub fn tone_amplitude(signal: &[f64], freq: f64) -> f64 {
    let n = signal.len();
    if n < 2 {
        return 0.0;
    }
    let omega = PI * freq;
    let denom = (n - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wsum = 0.0;
    for (i, &x) in signal.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / denom).cos();
        acc += w * x * Complex64::from_polar(1.0, -omega * i as f64);
        wsum += w;
    }
    2.0 * acc.norm() / wsum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wc(a: f64) -> WarpingCoefficient {
        WarpingCoefficient::new(a).unwrap()
    }

    /// 0 dB on `[lo, hi]`, `floor_db` elsewhere, with one-grid-step linear edges.
    fn synthetic(n: usize, lo: f64, hi: f64, floor_db: f64) -> ResponseCurve {
        let freqs = uniform_grid(n);
        let values = freqs
            .iter()
            .map(|&f| {
                let db = if f >= lo && f <= hi { 0.0 } else { floor_db };
                Complex64::new(10f64.powf(db / 20.0), 0.0)
            })
            .collect();
        ResponseCurve::new(freqs, values).unwrap()
    }

    #[test]
    fn sweep_of_unit_filter_is_flat() {
        let c = sweep(&[1.0], wc(0.6), 64).unwrap();
        assert!(c.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert_eq!(c.freqs()[0], 0.0);
        assert_eq!(c.freqs()[63], 1.0);
    }

    #[test]
    fn moving_average_has_nyquist_null() {
        let c = sweep(&[0.5, 0.5], wc(0.0), 128).unwrap();
        assert!(c.values()[127].norm() < 1e-15);
        assert!((c.values()[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_rejects_tiny_grid() {
        assert!(sweep(&[1.0], wc(0.0), 8).is_err());
    }

    #[test]
    fn synthetic_passband() {
        let c = synthetic(8193, 0.30, 0.32, -100.0);
        let m = measure(&c, &MeasureOptions::with_guard(0.02)).unwrap();
        let step = 1.0 / 8192.0;
        assert!((m.center - 0.31).abs() <= step, "{m:?}");
        assert!((m.bandwidth_3db - 0.02).abs() <= 2.0 * step);
        assert!((m.stopband_atten_db - 100.0).abs() < 1e-9);
        assert_eq!(m.passband_ripple_db, 0.0);
        assert_eq!(m.peak_db, 0.0);
    }

    #[test]
    fn symmetric_passband_center_is_exact() {
        for (lo, hi) in [(0.1, 0.2), (0.45, 0.47), (0.7, 0.9)] {
            let c = synthetic(4097, lo, hi, -80.0);
            let m = measure(&c, &MeasureOptions::with_guard(0.01)).unwrap();
            assert!((m.center - 0.5 * (lo + hi)).abs() <= 1.0 / 4096.0);
        }
    }

    #[test]
    fn lowpass_is_not_bandpass() {
        let c = synthetic(1025, 0.0, 0.2, -60.0);
        assert!(matches!(
            measure(&c, &MeasureOptions::with_guard(0.0)),
            Err(Error::NotBandpass(_))
        ));
        let c = synthetic(1025, 0.9, 1.0, -60.0);
        assert!(measure(&c, &MeasureOptions::with_guard(0.0)).is_err());
    }

    #[test]
    fn flat_curve_has_no_crossing() {
        let freqs = uniform_grid(64);
        let mut values = vec![Complex64::new(1.0, 0.0); 64];
        values[30] = Complex64::new(1.1, 0.0);
        let c = ResponseCurve::new(freqs, values).unwrap();
        assert!(matches!(
            measure(&c, &MeasureOptions::with_guard(0.0)),
            Err(Error::NotBandpass(_))
        ));
    }

    #[test]
    fn explicit_passband_ripple() {
        let freqs = uniform_grid(1001);
        let values = freqs
            .iter()
            .map(|&f| {
                let db: f64 = if (0.4..=0.6).contains(&f) {
                    if f < 0.5 { -0.5 } else { 0.0 }
                } else {
                    -90.0
                };
                Complex64::new(10f64.powf(db / 20.0), 0.0)
            })
            .collect();
        let c = ResponseCurve::new(freqs, values).unwrap();
        let opts = MeasureOptions { guard: 0.05, passband: Some((0.45, 0.55)) };
        let m = measure(&c, &opts).unwrap();
        assert!((m.passband_ripple_db - 0.5).abs() < 1e-12);
        let bm = band_metrics(&c, (0.45, 0.55), (0.3, 0.7));
        assert!((bm.ripple_db - 0.5).abs() < 1e-12);
        assert!((bm.atten_db - 90.0).abs() < 1e-9);
    }

    #[test]
    fn curve_validation() {
        let v = vec![Complex64::new(1.0, 0.0); 3];
        assert!(ResponseCurve::new(vec![0.0, 0.5, 1.0], v.clone()).is_ok());
        assert!(ResponseCurve::new(vec![0.0, 0.5], v.clone()).is_err());
        assert!(ResponseCurve::new(vec![0.0, 0.5, 0.9], v.clone()).is_err());
        assert!(ResponseCurve::new(vec![0.0, 0.5, 0.5, 1.0], vec![v[0]; 4]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let h = [0.1, -0.4, 0.9, 0.3];
        let c = sweep(&h, wc(-0.3), 33).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("freq,mag_db,phase_rad\n"));
        assert_eq!(text.lines().count(), 34);
        let back = ResponseCurve::read_csv(&buf[..]).unwrap();
        assert_eq!(back.freqs(), c.freqs());
        for (a, b) in back.values().iter().zip(c.values()) {
            assert!((a - b).norm() < 1e-14 * b.norm().max(1.0));
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(ResponseCurve::read_csv(&b"a,b,c\n0,0,0\n"[..]).is_err());
        assert!(ResponseCurve::read_csv(&b"freq,mag_db,phase_rad\n0,x,0\n1,0,0\n"[..]).is_err());
    }

    #[test]
    fn measurement_json_field_names() {
        let m = BandpassMeasurement {
            center: 0.31,
            bandwidth_3db: 0.02,
            passband_ripple_db: 0.001,
            stopband_atten_db: 95.0,
            peak_db: 0.0,
        };
        let v: serde_json::Value = serde_json::to_value(m).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["bandwidth_3db", "center", "passband_ripple_db", "peak_db", "stopband_atten_db"]
        );
        let back: BandpassMeasurement = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn tone_amplitude_picks_out_component() {
        let n = 8000;
        let sig: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64;
                0.7 * (PI * 0.31 * t + 0.4).cos() + 1e-3 * (PI * 0.51 * t).sin()
            })
            .collect();
        assert!((tone_amplitude(&sig, 0.31) - 0.7).abs() < 1e-4);
        assert!((tone_amplitude(&sig, 0.51) - 1e-3).abs() < 1e-6);
    }
}
