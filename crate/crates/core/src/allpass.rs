//! First-order allpass section `A(z) = (-a + z^-1) / (1 - a z^-1)`.
//!
//! The section is the building block of the warped filter: substituting it
//! for every unit delay of an FIR prototype bends the frequency axis. This
//! module provides its analytic frequency response, phase and phase delay,
//! plus a sample-by-sample single-multiplier realization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted `|alpha|`. Values closer to the unit circle make the
/// section's impulse response impractically long.
pub const ALPHA_GUARD: f64 = 0.9999;

/// Warping coefficient of a first-order allpass section, `|alpha| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WarpingCoefficient(f64);

impl WarpingCoefficient {
    pub const ZERO: WarpingCoefficient = WarpingCoefficient(0.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha.abs() < 1.0 && alpha.abs() <= ALPHA_GUARD {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for WarpingCoefficient {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<WarpingCoefficient> for f64 {
    fn from(a: WarpingCoefficient) -> f64 {
        a.0
    }
}

/// `A(e^{jw})`.
pub fn allpass_response(alpha: WarpingCoefficient, omega: f64) -> Complex64 {
    let a = alpha.value();
    let z_inv = Complex64::from_polar(1.0, -omega);
    (z_inv - a) / (1.0 - a * z_inv)
}

/// The warping term `2 atan(a sin w / (1 - a cos w))`.
///
/// `1 - a cos w` is strictly positive for `|a| < 1`, so the plain arctangent
/// never needs a quadrant correction.
#[inline]
pub(crate) fn warp_offset(a: f64, omega: f64) -> f64 {
    let (s, c) = omega.sin_cos();
    2.0 * (a * s / (1.0 - a * c)).atan()
}

/// Frequency seen by the prototype when the section replaces a unit delay:
/// `-allpass_phase(alpha, w)`. Strictly increasing from 0 at DC to pi at
/// Nyquist.
#[inline]
pub fn warped_frequency(alpha: WarpingCoefficient, omega: f64) -> f64 {
    omega + warp_offset(alpha.value(), omega)
}

/// Unwrapped phase of the section, `-w - 2 atan(a sin w / (1 - a cos w))`.
pub fn allpass_phase(alpha: WarpingCoefficient, omega: f64) -> f64 {
    -warped_frequency(alpha, omega)
}

/// Phase delay `-phase(w) / w` in samples.
///
/// At `w = 0` the analytic limit `(1 + a) / (1 - a)` is returned.
pub fn allpass_phase_delay(alpha: WarpingCoefficient, omega: f64) -> f64 {
    let a = alpha.value();
    if omega == 0.0 {
        return (1.0 + a) / (1.0 - a);
    }
    1.0 + warp_offset(a, omega) / omega
}

/// Group delay `(1 - a^2) / (1 - 2 a cos w + a^2)`, i.e. the local slope of
/// [`warped_frequency`].
pub fn allpass_group_delay(alpha: WarpingCoefficient, omega: f64) -> f64 {
    let a = alpha.value();
    (1.0 - a * a) / (1.0 - 2.0 * a * omega.cos() + a * a)
}

/// Streaming state of one allpass section.
///
/// Single-multiplier form with one delay element `w`:
///
/// ```text
/// m    = a * (x + w)
/// y    = w - m
/// w'   = x + m
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AllpassState {
    alpha: WarpingCoefficient,
    w: f64,
}

impl AllpassState {
    pub fn new(alpha: WarpingCoefficient) -> Self {
        Self { alpha, w: 0.0 }
    }

    pub fn alpha(&self) -> WarpingCoefficient {
        self.alpha
    }

    /// Changes the coefficient, keeping the delay-element contents.
    pub fn set_alpha(&mut self, alpha: WarpingCoefficient) {
        self.alpha = alpha;
    }

    pub fn delay_value(&self) -> f64 {
        self.w
    }

    pub fn reset(&mut self) {
        self.w = 0.0;
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        let m = self.alpha.value() * (x + self.w);
        let y = self.w - m;
        self.w = x + m;
        y
    }
}

/// Functional form of [`AllpassState::step`].
pub fn allpass_step(state: AllpassState, x: f64) -> (AllpassState, f64) {
    let mut next = state;
    let y = next.step(x);
    (next, y)
}
