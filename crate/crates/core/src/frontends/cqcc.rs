//! Constant-Q cepstral coefficients.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontends::audio::AudioBuffer;
use crate::frontends::cqt::{CqtParams, CqtPlan};
use crate::frontends::dct::Dct;
use crate::frontends::deltas::with_deltas;
use crate::frontends::features::FeatureMatrix;
use crate::frontends::resample::{linear_grid, SplineResampler};
use crate::frontends::LOG_FLOOR;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CqccConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub bins_per_octave: u32,
    pub resample_period: u32,
    /// Static coefficients kept, including c0.
    pub n_static: usize,
    pub delta_half_window: usize,
}

impl Default for CqccConfig {
    fn default() -> Self {
        Self {
            f_min: 15.0,
            f_max: 8000.0,
            bins_per_octave: 96,
            resample_period: 16,
            n_static: 30,
            delta_half_window: 2,
        }
    }
}

impl CqccConfig {
    pub fn cqt_params(&self) -> CqtParams {
        CqtParams {
            f_min: self.f_min,
            f_max: self.f_max,
            bins_per_octave: self.bins_per_octave,
            resample_period: self.resample_period,
        }
    }

    pub fn dims(&self) -> usize {
        3 * self.n_static
    }
}

/// Interpolates geometrically spaced log power onto a linear frequency grid.
///
/// The grid starts at the lowest bin with spacing `f_min / d`, so the first
/// octave receives `d` uniform samples, and runs up to the highest bin.
#[derive(Debug, Clone)]
pub struct UniformResampler {
    spline: SplineResampler,
    grid_hz: Vec<f64>,
}

impl UniformResampler {
    pub fn new(bin_freqs: &[f64], resample_period: u32) -> Result<Self> {
        if bin_freqs.len() < 2 {
            return Err(Error::InvalidArgument("uniform resampling needs at least two bins".into()));
        }
        if resample_period == 0 {
            return Err(Error::InvalidArgument("resample period must be >= 1".into()));
        }
        let f0 = bin_freqs[0];
        let top = *bin_freqs.last().expect("non-empty");
        let grid_hz = linear_grid(f0, top, f0 / f64::from(resample_period));
        let spline = SplineResampler::new(bin_freqs, &grid_hz)?;
        Ok(Self { spline, grid_hz })
    }

    pub fn grid_hz(&self) -> &[f64] {
        &self.grid_hz
    }

    pub fn output_len(&self) -> usize {
        self.grid_hz.len()
    }

    /// Non-finite inputs are clamped to the log floor before interpolation.
    pub fn apply<T: Real>(&self, log_power: &[T]) -> Result<Vec<T>> {
        let floor = T::lit(LOG_FLOOR.ln());
        let clean: Vec<T> = log_power.iter().map(|&v| if v.is_finite() { v } else { floor }).collect();
        self.spline.apply(&clean)
    }
}

pub fn uniform_resample<T: Real>(log_power: &[Vec<T>], bin_freqs: &[f64], resample_period: u32) -> Result<Vec<Vec<T>>> {
    let resampler = UniformResampler::new(bin_freqs, resample_period)?;
    log_power.iter().map(|frame| resampler.apply(frame)).collect()
}

/// CQCC extractor with its constant-Q plan, resampling grid and DCT basis
/// precomputed for one sample rate.
#[derive(Debug, Clone)]
pub struct Cqcc<T> {
    config: CqccConfig,
    plan: CqtPlan,
    resampler: UniformResampler,
    dct: Dct<T>,
}

impl<T: Real> Cqcc<T> {
    pub fn new(config: CqccConfig, sample_rate: u32) -> Result<Self> {
        let plan = CqtPlan::new(config.cqt_params(), sample_rate)?;
        let resampler = UniformResampler::new(&plan.frequencies(), config.resample_period)?;
        let dct = Dct::new(resampler.output_len(), config.n_static)?;
        Ok(Self { config, plan, resampler, dct })
    }

    pub fn config(&self) -> &CqccConfig {
        &self.config
    }

    pub fn plan(&self) -> &CqtPlan {
        &self.plan
    }

    pub fn resampler(&self) -> &UniformResampler {
        &self.resampler
    }

    /// Static coefficients only (`frames x n_static`).
    pub fn statics(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        let spectrum = self.plan.transform(audio)?;
        let mut rows = Vec::with_capacity(spectrum.n_frames);
        for frame in spectrum.log_power_frames(T::lit(LOG_FLOOR)) {
            let uniform = self.resampler.apply(&frame)?;
            rows.push(self.dct.apply(&uniform)?);
        }
        FeatureMatrix::new(rows.len(), self.config.n_static, rows.concat())
    }

    pub fn extract(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        Ok(with_deltas(&self.statics(audio)?, self.config.delta_half_window))
    }
}

pub fn cqcc<T: Real>(audio: &AudioBuffer<T>, config: &CqccConfig) -> Result<FeatureMatrix<T>> {
    Cqcc::new(*config, audio.sample_rate())?.extract(audio)
}
