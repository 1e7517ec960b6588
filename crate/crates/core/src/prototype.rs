//! Fixed-coefficient bandpass prototype design.
//!
//! The prototype is a type-I linear-phase FIR filter obtained by windowing
//! the difference of two ideal lowpass responses with a Kaiser window. The
//! ideal cutoffs are placed so that the -3 dB width of the designed filter
//! equals the requested bandwidth; the order starts from the usual Kaiser
//! length estimate and grows until a dense-grid check meets the spec.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analyzer::{band_metrics_db, BandMetrics};
use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::warped::fir_response;

/// Requested bandpass characteristics. Frequencies are normalized so that
/// 1.0 is half the sampling rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Band center.
    pub center: f64,
    /// Width between the -3 dB points.
    pub bandwidth: f64,
    /// Maximum peak-to-peak passband deviation, dB.
    pub passband_ripple_db: f64,
    /// Minimum attenuation below the passband peak, dB (positive).
    pub stopband_atten_db: f64,
    /// Distance from each -3 dB edge to the start of the stopband.
    pub transition_width: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            center: 0.14,
            bandwidth: 0.02,
            passband_ripple_db: 0.002,
            stopband_atten_db: 90.0,
            transition_width: 0.01,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("center", self.center),
            ("bandwidth", self.bandwidth),
            ("passband_ripple_db", self.passband_ripple_db),
            ("stopband_atten_db", self.stopband_atten_db),
            ("transition_width", self.transition_width),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        if self.center >= 1.0 || self.bandwidth >= 1.0 {
            return Err(Error::InvalidSpec("center and bandwidth must lie in (0, 1)".into()));
        }
        let (lo, hi) = self.stopband_edges();
        if lo <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "lower stopband edge center - bandwidth/2 - transition = {lo} must be > 0"
            )));
        }
        if hi >= 1.0 {
            return Err(Error::InvalidSpec(format!(
                "upper stopband edge center + bandwidth/2 + transition = {hi} must be < 1"
            )));
        }
        Ok(())
    }

    /// Lower and upper stopband edges, one transition width outside the
    /// -3 dB points.
    pub fn stopband_edges(&self) -> (f64, f64) {
        let half = 0.5 * self.bandwidth + self.transition_width;
        (self.center - half, self.center + half)
    }

    /// Region over which passband ripple is specified: the band shrunk by
    /// one transition width on each side (just the center if that is empty).
    pub fn passband_edges(&self) -> (f64, f64) {
        let half = (0.5 * self.bandwidth - self.transition_width).max(0.0);
        (self.center - half, self.center + half)
    }

    /// Same spec with `extra_db` added to the stopband requirement.
    pub fn with_margin(mut self, extra_db: f64) -> Self {
        self.stopband_atten_db += extra_db;
        self
    }

    /// Ripple expressed as a linear passband deviation.
    pub fn passband_delta(&self) -> f64 {
        let g = 10f64.powf(self.passband_ripple_db / 20.0);
        (g - 1.0) / (g + 1.0)
    }

    pub fn stopband_delta(&self) -> f64 {
        10f64.powf(-self.stopband_atten_db / 20.0)
    }
}

#[derive(Serialize, Deserialize)]
struct PrototypeFile {
    order: usize,
    coeffs: Vec<f64>,
    spec: FilterSpec,
}

/// Designed prototype: coefficients `h[0..=N]` together with the spec they
/// were designed for. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PrototypeFile", into = "PrototypeFile")]
pub struct PrototypeFilter {
    coeffs: Vec<f64>,
    spec: FilterSpec,
}

impl TryFrom<PrototypeFile> for PrototypeFilter {
    type Error = Error;

    fn try_from(f: PrototypeFile) -> Result<Self> {
        if f.coeffs.len() != f.order + 1 {
            return Err(Error::Parse(format!(
                "order {} does not match {} coefficients",
                f.order,
                f.coeffs.len()
            )));
        }
        Self::from_parts(f.coeffs, f.spec)
    }
}

impl From<PrototypeFilter> for PrototypeFile {
    fn from(p: PrototypeFilter) -> Self {
        Self { order: p.order(), coeffs: p.coeffs, spec: p.spec }
    }
}

/// Tolerance for the linear-phase symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

impl PrototypeFilter {
    /// Wraps externally supplied coefficients; they must be finite and
    /// symmetric.
    pub fn from_parts(coeffs: Vec<f64>, spec: FilterSpec) -> Result<Self> {
        spec.validate()?;
        if coeffs.is_empty() {
            return Err(Error::Parse("prototype has no coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parse("non-finite coefficient".into()));
        }
        let p = Self { coeffs, spec };
        if p.symmetry_error() >= SYMMETRY_TOL {
            return Err(Error::Parse("coefficients are not symmetric".into()));
        }
        Ok(p)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `max_k |h[k] - h[N-k]|`.
    pub fn symmetry_error(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(self.coeffs.iter().rev())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// FNV-1a over the coefficient bit patterns.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for c in &self.coeffs {
            for b in c.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("prototype serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One coefficient per line, shortest round-trip decimal form.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for c in &self.coeffs {
            writeln!(out, "{c}")?;
        }
        Ok(())
    }
}

/// Knobs of [`design_bandpass_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Orders above this are reported as infeasible.
    pub max_order: usize,
    /// Number of points on `[0, 1]` used to verify the spec. Rounded up so
    /// that an FFT of size `2 * (grid - 1)` is a power of two.
    pub verify_grid: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { max_order: 4096, verify_grid: 16385 }
    }
}

/// Extra stopband attenuation to design in when the prototype will be used
/// with coefficient decimation up to `max_m`.
///
/// Decimation folds `M` shifted copies of the stopband onto each other, so
/// leakage can grow by up to `20 log10(M)` dB. A flat 10 dB covers the
/// observed loss for `M <= 5`; beyond that the margin grows with the same
/// logarithmic slope.
pub fn overdesign_margin(_desired_atten_db: f64, max_m: usize) -> f64 {
    match max_m {
        0 | 1 => 0.0,
        2..=5 => 10.0,
        m => 10.0 + 20.0 * (m as f64 / 5.0).log10(),
    }
}

/// Kaiser's beta for a given attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Kaiser's order estimate for transition width `transition` (normalized).
pub fn kaiser_order(atten_db: f64, transition: f64) -> usize {
    let n = ((atten_db - 7.95) / (2.285 * PI * transition)).ceil();
    n.max(2.0) as usize
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Symmetric Kaiser window of length `len`.
pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let half = (len - 1) as f64 / 2.0;
    let norm = bessel_i0(beta);
    let mut w: Vec<f64> = (0..len)
        .map(|i| {
            let r = (i as f64 - half) / half;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect();
    mirror(&mut w);
    w
}

/// Copies the first half onto the second so the vector is bitwise symmetric.
fn mirror(v: &mut [f64]) {
    let n = v.len();
    for i in 0..n / 2 {
        v[n - 1 - i] = v[i];
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Windowed ideal bandpass between normalized cutoffs `lo < hi`.
fn windowed_bandpass(order: usize, lo: f64, hi: f64, window: &[f64]) -> Vec<f64> {
    let half = order as f64 / 2.0;
    let mut h: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let t = (i as f64 - half).abs();
            (hi * sinc(hi * t) - lo * sinc(lo * t)) * w
        })
        .collect();
    mirror(&mut h);
    h
}

/// -3 dB width of `h` measured from its gain at `center`, or `None` when a
/// crossing cannot be bracketed inside `(0, 1)`.
fn half_power_width(h: &[f64], center: f64) -> Option<f64> {
    let target = fir_response(h, PI * center).norm() * std::f64::consts::FRAC_1_SQRT_2;
    let g = |f: f64| fir_response(h, PI * f).norm() - target;
    let upper = bisect(g, center, 1.0, 1e-11, 200)?;
    let lower = bisect(g, 0.0, center, 1e-11, 200)?;
    Some(upper - lower)
}

/// Cutoffs `center -+ (bandwidth/2 + e)` with `e` chosen so the -3 dB width
/// matches the spec. Falls back to `e = 0` if no bracket exists.
fn cutoffs(spec: &FilterSpec, order: usize, window: &[f64]) -> (f64, f64) {
    let half = 0.5 * spec.bandwidth;
    let room = (spec.center - half).min(1.0 - spec.center - half);
    let e_hi = (2.0 * spec.transition_width).min(0.999 * room);
    let e_lo = -0.9 * half;
    let mismatch = |e: f64| {
        let h = windowed_bandpass(order, spec.center - half - e, spec.center + half + e, window);
        half_power_width(&h, spec.center).map_or(f64::NAN, |w| w - spec.bandwidth)
    };
    let e = match (mismatch(e_lo), mismatch(e_hi)) {
        (a, b) if a.is_finite() && b.is_finite() => bisect(mismatch, e_lo, e_hi, 1e-10, 200).unwrap_or(0.0),
        _ => 0.0,
    };
    (spec.center - half - e, spec.center + half + e)
}

/// Dense-grid magnitude (dB) of `h` on `grid` points spanning `[0, 1]`.
fn magnitude_grid_db(h: &[f64], grid: usize, planner: &mut FftPlanner<f64>) -> (Vec<f64>, Vec<f64>) {
    let nfft = 2 * (grid - 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for (b, &c) in buf.iter_mut().zip(h) {
        b.re = c;
    }
    planner.plan_fft_forward(nfft).process(&mut buf);
    let freqs = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let db = buf[..grid].iter().map(|v| 20.0 * v.norm().log10()).collect();
    (freqs, db)
}

/// Peak magnitude of `h` on a dense FFT grid.
pub(crate) fn peak_gain(h: &[f64], grid: usize) -> f64 {
    let grid = fft_grid(grid, h.len());
    let mut planner = FftPlanner::new();
    let (_, db) = magnitude_grid_db(h, grid, &mut planner);
    10f64.powf(db.iter().copied().fold(f64::NEG_INFINITY, f64::max) / 20.0)
}

/// Smallest `2^k + 1` grid at least `grid` points whose FFT also covers the
/// filter length.
fn fft_grid(grid: usize, len: usize) -> usize {
    let need = (2 * (grid.max(2) - 1)).max(len);
    need.next_power_of_two() / 2 + 1
}

/// Ripple and attenuation of `h` against the spec's band edges.
pub fn verify(h: &[f64], spec: &FilterSpec, grid: usize) -> BandMetrics {
    let grid = fft_grid(grid, h.len());
    let mut planner = FftPlanner::new();
    let (freqs, db) = magnitude_grid_db(h, grid, &mut planner);
    band_metrics_db(&freqs, &db, spec.passband_edges(), spec.stopband_edges())
}

pub fn design_bandpass(spec: &FilterSpec) -> Result<PrototypeFilter> {
    design_bandpass_with(spec, &DesignOptions::default())
}

pub fn design_bandpass_with(spec: &FilterSpec, opts: &DesignOptions) -> Result<PrototypeFilter> {
    spec.validate()?;
    let delta = spec.passband_delta().min(spec.stopband_delta());
    let atten = -20.0 * delta.log10();
    let beta = kaiser_beta(atten);

    // The ideal cutoff sits slightly outside the -3 dB point, and the window
    // transition is centred on it, so about 1.6 transition widths are
    // available to the window's transition band.
    let mut order = kaiser_order(atten, 1.6 * spec.transition_width);
    order += order % 2;

    let grid = fft_grid(opts.verify_grid, 0);
    let mut planner = FftPlanner::new();
    while order <= opts.max_order {
        let window = kaiser_window(order + 1, beta);
        let (lo, hi) = cutoffs(spec, order, &window);
        let mut h = windowed_bandpass(order, lo, hi, &window);

        let (freqs, db) = magnitude_grid_db(&h, fft_grid(grid, h.len()), &mut planner);
        let m = band_metrics_db(&freqs, &db, spec.passband_edges(), spec.stopband_edges());
        if m.ripple_db <= spec.passband_ripple_db && m.atten_db >= spec.stopband_atten_db {
            let scale = 10f64.powf(-m.peak_db / 20.0);
            for c in &mut h {
                *c *= scale;
            }
            return Ok(PrototypeFilter { coeffs: h, spec: *spec });
        }
        order += 2;
    }
    Err(Error::InfeasibleDesign(format!(
        "spec needs an order above the cap of {}",
        opts.max_order
    )))
}
