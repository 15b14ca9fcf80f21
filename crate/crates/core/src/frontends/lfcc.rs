//! Linear-frequency cepstral coefficients.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontends::audio::AudioBuffer;
use crate::frontends::dct::Dct;
use crate::frontends::deltas::with_deltas;
use crate::frontends::features::FeatureMatrix;
use crate::frontends::framing::{frame_signal, Window};
use crate::frontends::spectrum::{Filterbank, PowerSpectrum};
use crate::frontends::LOG_FLOOR;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LfccConfig {
    pub win_ms: f64,
    pub hop_ms: f64,
    pub n_fft: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub n_filters: usize,
    /// Static coefficients kept, including c0.
    pub n_static: usize,
    pub delta_half_window: usize,
}

impl Default for LfccConfig {
    fn default() -> Self {
        Self {
            win_ms: 20.0,
            hop_ms: 10.0,
            n_fft: 512,
            f_min: 30.0,
            f_max: 8000.0,
            n_filters: 20,
            n_static: 20,
            delta_half_window: 2,
        }
    }
}

impl LfccConfig {
    pub fn dims(&self) -> usize {
        3 * self.n_static
    }

    pub fn win_samples(&self, sample_rate: u32) -> usize {
        (self.win_ms * 1e-3 * f64::from(sample_rate)).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop_ms * 1e-3 * f64::from(sample_rate)).round() as usize
    }
}

pub fn linear_filterbank<T: Real>(config: &LfccConfig, sample_rate: u32) -> Result<Filterbank<T>> {
    if config.n_filters < config.n_static {
        return Err(Error::InvalidArgument(format!(
            "{} filters cannot yield {} cepstral coefficients",
            config.n_filters, config.n_static
        )));
    }
    Filterbank::linear(config.n_filters, config.n_fft, sample_rate, config.f_min, config.f_max)
}

/// LFCC extractor with window, FFT plan, filterbank and DCT basis
/// prepared for one sample rate.
pub struct Lfcc<T: Real> {
    config: LfccConfig,
    win: usize,
    hop: usize,
    spectrum: PowerSpectrum<T>,
    filterbank: Filterbank<T>,
    dct: Dct<T>,
}

impl<T: Real> Lfcc<T> {
    pub fn new(config: LfccConfig, sample_rate: u32) -> Result<Self> {
        let win = config.win_samples(sample_rate);
        let hop = config.hop_samples(sample_rate);
        if hop == 0 || hop > win {
            return Err(Error::InvalidArgument(format!("hop of {hop} samples must be in 1..={win}")));
        }
        if config.n_fft < win {
            return Err(Error::InvalidArgument(format!("n_fft {} shorter than {win}-sample window", config.n_fft)));
        }
        let spectrum = PowerSpectrum::new(Window::Hamming, win, config.n_fft)?;
        let filterbank = linear_filterbank(&config, sample_rate)?;
        let dct = Dct::new(config.n_filters, config.n_static)?;
        Ok(Self { config, win, hop, spectrum, filterbank, dct })
    }

    pub fn config(&self) -> &LfccConfig {
        &self.config
    }

    pub fn filterbank(&self) -> &Filterbank<T> {
        &self.filterbank
    }

    /// Filterbank energies per frame (`frames x n_filters`).
    pub fn energies(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        let frames = frame_signal(audio.samples(), self.win, self.hop)?;
        let mut rows = Vec::with_capacity(frames.len());
        for frame in &frames {
            rows.push(self.filterbank.apply(&self.spectrum.compute(frame)?));
        }
        FeatureMatrix::from_rows(&rows)
    }

    pub fn statics(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        let energies = self.energies(audio)?;
        let floor = T::lit(LOG_FLOOR);
        let mut data = Vec::with_capacity(energies.frames() * self.config.n_static);
        for row in energies.rows() {
            let logs: Vec<T> = row.iter().map(|&e| e.max(floor).ln()).collect();
            data.extend(self.dct.apply(&logs)?);
        }
        FeatureMatrix::new(energies.frames(), self.config.n_static, data)
    }

    pub fn extract(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        Ok(with_deltas(&self.statics(audio)?, self.config.delta_half_window))
    }
}

pub fn lfcc<T: Real>(audio: &AudioBuffer<T>, config: &LfccConfig) -> Result<FeatureMatrix<T>> {
    Lfcc::new(*config, audio.sample_rate())?.extract(audio)
}
