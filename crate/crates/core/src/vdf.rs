//! The variable bandpass filter: a fixed prototype, a coefficient-set
//! selection by decimation factor, and the warped tap chain.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::allpass::WarpingCoefficient;
use crate::analyzer::{measure, sweep, BandpassMeasurement, MeasureOptions, ResponseCurve};
use crate::cdm::{decimate_coefficients, DecimationFactor};
use crate::error::Result;
use crate::prototype::PrototypeFilter;
use crate::tuner::{alpha_for_center, center_after_tuning, check_targets, choose_m, unwarp, VdfConfig};
use crate::warped::WarpedEngine;

/// Picks `(alpha, M)` for the requested band without building an engine.
pub fn plan(proto: &PrototypeFilter, target_center: f64, target_bw: f64, m_max: usize) -> Result<VdfConfig> {
    check_targets(target_center, target_bw)?;
    let spec = proto.spec();
    let m = choose_m(spec.bandwidth, target_bw, m_max);
    let m = DecimationFactor::for_spec(m.get(), spec, m_max)?;
    let alpha = alpha_for_center(spec.center, target_center, m)?;
    Ok(VdfConfig {
        alpha: alpha.value(),
        m: m.get(),
        target_center,
        target_bandwidth: target_bw,
    })
}

/// Knobs plus what the realized filter actually does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    pub alpha: f64,
    pub m: usize,
    pub target_center: f64,
    pub target_bandwidth: f64,
    pub predicted_center: f64,
    pub measured_center: f64,
    pub measured_bandwidth: f64,
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub peak_db: f64,
}

/// Retunable bandpass filter. The prototype is shared and never written;
/// only the selected coefficient set and the warping coefficient change.
#[derive(Debug, Clone)]
pub struct VariableFilter {
    proto: Arc<PrototypeFilter>,
    config: VdfConfig,
    m_max: usize,
    engine: WarpedEngine,
}

impl VariableFilter {
    pub fn build(proto: Arc<PrototypeFilter>, target_center: f64, target_bw: f64, m_max: usize) -> Result<Self> {
        let config = plan(&proto, target_center, target_bw, m_max)?;
        Self::from_config(proto, config, m_max)
    }

    /// Filter with explicitly chosen knobs. The targets recorded in the
    /// config are the centre and bandwidth those knobs predict.
    pub fn with_knobs(proto: Arc<PrototypeFilter>, alpha: WarpingCoefficient, m: usize, m_max: usize) -> Result<Self> {
        let spec = proto.spec();
        let m = DecimationFactor::for_spec(m, spec, m_max)?;
        let center = center_after_tuning(spec.center, alpha, m)?;
        let config = VdfConfig {
            alpha: alpha.value(),
            m: m.get(),
            target_center: center,
            target_bandwidth: m.get() as f64 * spec.bandwidth,
        };
        Self::from_config(proto, config, m_max)
    }

    fn from_config(proto: Arc<PrototypeFilter>, config: VdfConfig, m_max: usize) -> Result<Self> {
        let coeffs = decimate_coefficients(&proto, config.decimation())?;
        let engine = WarpedEngine::new(coeffs, config.alpha())?;
        Ok(Self { proto, config, m_max, engine })
    }

    pub fn prototype(&self) -> &Arc<PrototypeFilter> {
        &self.proto
    }

    pub fn config(&self) -> &VdfConfig {
        &self.config
    }

    pub fn engine(&self) -> &WarpedEngine {
        &self.engine
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Moves the band to new targets. A change of `M` swaps the coefficient
    /// set and clears the allpass states; an `alpha`-only change keeps them.
    /// On error the filter is left as it was.
    pub fn retune(&mut self, target_center: f64, target_bw: f64) -> Result<()> {
        let next = plan(&self.proto, target_center, target_bw, self.m_max)?;
        self.apply(next)
    }

    fn apply(&mut self, next: VdfConfig) -> Result<()> {
        if next.m != self.config.m {
            let coeffs = decimate_coefficients(&self.proto, next.decimation())?;
            self.engine = WarpedEngine::new(coeffs, next.alpha())?;
        } else if next.alpha != self.config.alpha {
            self.engine.set_alpha(next.alpha());
        }
        self.config = next;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.engine.reset();
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> f64 {
        self.engine.step(x)
    }

    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        self.engine.process(input)
    }

    /// Centre predicted by the tuning equation for the current knobs.
    pub fn predicted_center(&self) -> Result<f64> {
        center_after_tuning(self.proto.spec().center, self.config.alpha(), self.config.decimation())
    }

    /// Maps a prototype-axis frequency to the realized filter's axis.
    fn realized(&self, f: f64) -> Result<f64> {
        let m = self.config.m as f64;
        Ok(unwarp(self.config.alpha(), PI * m * f)? / PI)
    }

    /// Measurement regions obtained by carrying the prototype's ripple
    /// band and transition bands through decimation and warping. The guard
    /// is twice the widest realized transition band.
    pub fn measure_options(&self) -> Result<MeasureOptions> {
        let spec = self.proto.spec();
        let (p_lo, p_hi) = spec.passband_edges();
        let (s_lo, s_hi) = spec.stopband_edges();
        let half = 0.5 * spec.bandwidth;
        let lower_tr = self.realized(spec.center - half)? - self.realized(s_lo)?;
        let upper_tr = self.realized(s_hi)? - self.realized(spec.center + half)?;
        Ok(MeasureOptions {
            guard: 2.0 * lower_tr.max(upper_tr),
            passband: Some((self.realized(p_lo)?, self.realized(p_hi)?)),
        })
    }

    pub fn response_curve(&self, grid: usize) -> Result<ResponseCurve> {
        sweep(self.engine.coeffs(), self.engine.alpha(), grid)
    }

    pub fn measure(&self, grid: usize) -> Result<BandpassMeasurement> {
        measure(&self.response_curve(grid)?, &self.measure_options()?)
    }

    pub fn report(&self, grid: usize) -> Result<TuningReport> {
        let m = self.measure(grid)?;
        Ok(TuningReport {
            alpha: self.config.alpha,
            m: self.config.m,
            target_center: self.config.target_center,
            target_bandwidth: self.config.target_bandwidth,
            predicted_center: self.predicted_center()?,
            measured_center: m.center,
            measured_bandwidth: m.bandwidth_3db,
            passband_ripple_db: m.passband_ripple_db,
            stopband_atten_db: m.stopband_atten_db,
            peak_db: m.peak_db,
        })
    }
}
