//! Mapping between the two knobs (`alpha`, `M`) and the realized center
//! frequency.
//!
//! With decimation the prototype center `w0` moves to `M w0`; the allpass
//! sections then map a frequency `w` of the realized filter to
//! `w + 2 atan(a sin w / (1 - a cos w))` on the prototype's axis. The
//! realized center `wa` therefore satisfies
//!
//! ```text
//! M w0 = wa + 2 atan(a sin wa / (1 - a cos wa))
//! ```
//!
//! which has the closed-form solution for `a` used by [`alpha_for_center`].
//! Public functions take normalized frequencies (1 = Nyquist).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::allpass::{warp_offset, warped_frequency, WarpingCoefficient};
use crate::cdm::DecimationFactor;
use crate::error::{Error, Result};
use crate::roots::bisect;

const BISECT_TOL: f64 = 1e-14;
const BISECT_MAX_ITER: usize = 200;

/// The runtime knobs and the targets they were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdfConfig {
    pub alpha: f64,
    pub m: usize,
    pub target_center: f64,
    pub target_bandwidth: f64,
}

impl VdfConfig {
    pub fn alpha(&self) -> WarpingCoefficient {
        WarpingCoefficient::new(self.alpha).expect("config holds a validated alpha")
    }

    pub fn decimation(&self) -> DecimationFactor {
        DecimationFactor::new(self.m).expect("config holds a validated M")
    }
}

/// Rejects targets whose band would reach DC or Nyquist.
pub fn check_targets(center: f64, bandwidth: f64) -> Result<()> {
    let ok = center.is_finite()
        && bandwidth.is_finite()
        && bandwidth > 0.0
        && center - 0.5 * bandwidth > 0.0
        && center + 0.5 * bandwidth < 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::TuningInfeasible(format!(
            "target band {center} +- {} must lie inside (0, 1)",
            0.5 * bandwidth
        )))
    }
}

/// Warping coefficient that moves the decimated prototype center
/// `m * proto_center` to `target_center`.
pub fn alpha_for_center(proto_center: f64, target_center: f64, m: DecimationFactor) -> Result<WarpingCoefficient> {
    if !(proto_center > 0.0 && proto_center < 1.0 && target_center > 0.0 && target_center < 1.0) {
        return Err(Error::TuningInfeasible(format!(
            "centers must lie in (0, 1): prototype {proto_center}, target {target_center}"
        )));
    }
    let stretched = m.get() as f64 * proto_center;
    if stretched >= 1.0 {
        return Err(Error::Range(format!(
            "M * prototype center = {stretched} is at or beyond Nyquist"
        )));
    }
    let w0 = PI * proto_center;
    let wa = PI * target_center;
    let x = 0.5 * (m.get() as f64 * w0 - wa);
    // The warp offset is 2 atan(.), confined to (-pi, pi).
    if x.abs() >= FRAC_PI_2 {
        return Err(Error::TuningInfeasible(format!(
            "half frequency offset {x} rad reaches the tangent singularity"
        )));
    }
    let t = x.tan();
    let denom = wa.sin() + t * wa.cos();
    let alpha = t / denom;
    if !alpha.is_finite() {
        return Err(Error::TuningInfeasible("warping coefficient is unbounded".into()));
    }
    WarpingCoefficient::new(alpha).map_err(|_| {
        Error::TuningInfeasible(format!(
            "target {target_center} needs alpha = {alpha}, outside the stable range"
        ))
    })
}

/// `wa + 2 atan(a sin wa / (1 - a cos wa)) - M w0` in radians; zero for a
/// consistent triple.
pub fn center_residual(proto_center: f64, target_center: f64, alpha: WarpingCoefficient, m: DecimationFactor) -> f64 {
    let wa = PI * target_center;
    wa + warp_offset(alpha.value(), wa) - m.get() as f64 * PI * proto_center
}

/// Frequency `w` in `[0, pi]` whose warped image is `warped`. Inverse of
/// [`warped_frequency`].
pub fn unwarp(alpha: WarpingCoefficient, warped: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&warped) {
        return Err(Error::TuningInfeasible(format!("{warped} rad is outside [0, pi]")));
    }
    bisect(
        |w| warped_frequency(alpha, w) - warped,
        0.0,
        PI,
        BISECT_TOL,
        BISECT_MAX_ITER,
    )
    .ok_or_else(|| Error::TuningInfeasible("warp inversion failed to bracket".into()))
}

/// Realized center for the given knobs, by bisection on the monotone map.
pub fn center_after_tuning(proto_center: f64, alpha: WarpingCoefficient, m: DecimationFactor) -> Result<f64> {
    let stretched = m.get() as f64 * proto_center;
    if !(stretched > 0.0 && stretched < 1.0) {
        return Err(Error::TuningInfeasible(format!(
            "M * prototype center = {stretched} is outside (0, 1)"
        )));
    }
    Ok(unwarp(alpha, PI * stretched)? / PI)
}

/// `round(target / proto)` with ties to even, clamped to `[1, m_max]`.
pub fn choose_m(proto_bw: f64, target_bw: f64, m_max: usize) -> DecimationFactor {
    let ratio = (target_bw / proto_bw).round_ties_even();
    let m = if ratio.is_finite() && ratio >= 1.0 {
        (ratio as usize).min(m_max.max(1))
    } else {
        1
    };
    DecimationFactor::new(m).expect("m >= 1")
}
