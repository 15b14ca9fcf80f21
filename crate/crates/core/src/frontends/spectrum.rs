use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::frontends::framing::Window;
use crate::scalar::Real;

/// Windowed power spectrum `|DFT(w * x)|^2` on bins `0..=n_fft/2`.
pub struct PowerSpectrum<T: Real> {
    fft: Arc<dyn Fft<T>>,
    window: Vec<T>,
    n_fft: usize,
}

impl<T: Real> PowerSpectrum<T> {
    pub fn new(window: Window, frame_len: usize, n_fft: usize) -> Result<Self> {
        if frame_len == 0 || frame_len > n_fft {
            return Err(Error::InvalidArgument(format!("frame length {frame_len} must be in 1..={n_fft}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(Self { fft, window: window.coefficients(frame_len), n_fft })
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn compute(&self, frame: &[T]) -> Result<Vec<T>> {
        if frame.len() != self.window.len() {
            return Err(Error::DimensionMismatch { expected: self.window.len(), found: frame.len() });
        }
        let mut buf: Vec<Complex<T>> =
            frame.iter().zip(&self.window).map(|(&x, &w)| Complex::new(x * w, T::zero())).collect();
        buf.resize(self.n_fft, Complex::new(T::zero(), T::zero()));
        self.fft.process(&mut buf);
        Ok(buf[..self.n_bins()].iter().map(|c| c.norm_sqr()).collect())
    }
}

pub fn power_spectrum<T: Real>(frame: &[T], window: Window, n_fft: usize) -> Result<Vec<T>> {
    PowerSpectrum::new(window, frame.len(), n_fft)?.compute(frame)
}

/// Triangular filters with centres equally spaced on a linear axis.
#[derive(Debug, Clone)]
pub struct Filterbank<T> {
    weights: Vec<Vec<T>>,
    centers_hz: Vec<f64>,
}

impl<T: Real> Filterbank<T> {
    /// `n_filters` triangles between `f_min` and `f_max`; neighbouring
    /// filters share an edge with the next centre (50% overlap).
    pub fn linear(n_filters: usize, n_fft: usize, sample_rate: u32, f_min: f64, f_max: f64) -> Result<Self> {
        let nyquist = f64::from(sample_rate) / 2.0;
        if !(0.0..f_max).contains(&f_min) || f_max > nyquist {
            return Err(Error::InvalidArgument(format!(
                "filterbank band [{f_min}, {f_max}] Hz invalid for {sample_rate} Hz audio"
            )));
        }
        if n_filters == 0 {
            return Err(Error::InvalidArgument("need at least one filter".into()));
        }
        let step = (f_max - f_min) / (n_filters + 1) as f64;
        let edge = |j: usize| f_min + j as f64 * step;
        let bin_hz = f64::from(sample_rate) / n_fft as f64;
        let n_bins = n_fft / 2 + 1;
        let mut weights = Vec::with_capacity(n_filters);
        let mut centers_hz = Vec::with_capacity(n_filters);
        for i in 0..n_filters {
            let (lo, center, hi) = (edge(i), edge(i + 1), edge(i + 2));
            let row = (0..n_bins)
                .map(|b| {
                    let f = b as f64 * bin_hz;
                    let w = if f > lo && f <= center {
                        (f - lo) / (center - lo)
                    } else if f > center && f < hi {
                        (hi - f) / (hi - center)
                    } else {
                        0.0
                    };
                    T::lit(w)
                })
                .collect();
            weights.push(row);
            centers_hz.push(center);
        }
        Ok(Self { weights, centers_hz })
    }

    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn apply(&self, power: &[T]) -> Vec<T> {
        self.weights.iter().map(|row| row.iter().zip(power).map(|(&w, &p)| w * p).sum()).collect()
    }
}
