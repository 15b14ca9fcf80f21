//! Constant-Q transform by per-bin windowed-kernel correlation.
//!
//! Bin `k` is centred at `f_k = f_min * 2^(k/B)` and correlates the signal
//! with a Hann-windowed complex exponential of `N_k = ceil(Q * sr / f_k)`
//! samples, `Q = 1 / (2^(1/B) - 1)`:
//!
//! ```text
//! X_k(m) = 1/N_k * sum_{n<N_k} x[s_m + n] * w_k(n) * exp(-2 pi i f_k n / sr)
//! ```
//!
//! with `s_m = c_m - floor(N_k / 2)` for frame centre `c_m`, and the signal
//! taken as zero outside its support. The Hann window is a sum of three
//! complex exponentials, so each term is a difference of running sums and
//! every frame costs O(1) per bin instead of O(N_k).

use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::frontends::audio::AudioBuffer;
use crate::scalar::Real;

/// Phasor recurrence is resynchronised with an exact `cos`/`sin` this often.
const PHASOR_RESYNC: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqtBin {
    pub freq_hz: f64,
    pub kernel_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqtParams {
    pub f_min: f64,
    pub f_max: f64,
    pub bins_per_octave: u32,
    pub resample_period: u32,
}

/// Bin table, kernel lengths and frame hop for one sample rate.
#[derive(Debug, Clone)]
pub struct CqtPlan {
    params: CqtParams,
    sample_rate: u32,
    q: f64,
    bins: Vec<CqtBin>,
    hop: usize,
}

/// Number of bins between `f_min` and `f_max`: `ceil(B * log2(f_max / f_min))`.
pub fn cqt_bin_count(f_min: f64, f_max: f64, bins_per_octave: u32) -> usize {
    let exact = f64::from(bins_per_octave) * (f_max / f_min).log2();
    // guard against log2 rounding up an exact integer
    (exact - 1e-9).ceil() as usize
}

impl CqtPlan {
    pub fn new(params: CqtParams, sample_rate: u32) -> Result<Self> {
        let CqtParams { f_min, f_max, bins_per_octave, resample_period } = params;
        if !(f_min > 0.0 && f_min < f_max) {
            return Err(Error::InvalidArgument(format!("need 0 < f_min < f_max, got {f_min}, {f_max}")));
        }
        if bins_per_octave == 0 || resample_period == 0 {
            return Err(Error::InvalidArgument("bins per octave and resample period must be >= 1".into()));
        }
        if f_max > f64::from(sample_rate) / 2.0 {
            return Err(Error::InvalidArgument(format!("f_max {f_max} Hz above Nyquist of {sample_rate} Hz audio")));
        }
        let b = f64::from(bins_per_octave);
        let q = 1.0 / ((1.0 / b).exp2() - 1.0);
        let sr = f64::from(sample_rate);
        let bins: Vec<CqtBin> = (0..cqt_bin_count(f_min, f_max, bins_per_octave))
            .map(|k| {
                let freq_hz = f_min * (k as f64 / b).exp2();
                CqtBin { freq_hz, kernel_len: (q * sr / freq_hz).ceil() as usize }
            })
            .collect();
        if bins.len() < 2 {
            return Err(Error::InvalidArgument("constant-Q band holds fewer than two bins".into()));
        }
        let shortest = bins.last().expect("non-empty").kernel_len;
        let d = resample_period as usize;
        let hop = d * (shortest / (2 * d)).max(1);
        Ok(Self { params, sample_rate, q, bins, hop })
    }

    pub fn bins(&self) -> &[CqtBin] {
        &self.bins
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.freq_hz).collect()
    }

    pub fn q_factor(&self) -> f64 {
        self.q
    }

    /// Frame hop in samples: a multiple of the resample period, about half
    /// the highest-bin kernel.
    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn params(&self) -> &CqtParams {
        &self.params
    }

    pub fn min_signal_len(&self) -> usize {
        self.bins.last().expect("non-empty").kernel_len
    }

    /// One frame per complete hop; the partial tail is dropped.
    pub fn frame_count(&self, n_samples: usize) -> usize {
        n_samples / self.hop
    }

    pub fn frame_center(&self, m: usize) -> usize {
        m * self.hop + self.hop / 2
    }

    pub fn kernel_start(&self, bin: usize, m: usize) -> i64 {
        self.frame_center(m) as i64 - (self.bins[bin].kernel_len / 2) as i64
    }

    pub fn transform<T: Real>(&self, audio: &AudioBuffer<T>) -> Result<CqtSpectrum<T>> {
        if audio.sample_rate() != self.sample_rate {
            return Err(Error::UnsupportedAudio(format!(
                "plan built for {} Hz, audio is {} Hz",
                self.sample_rate,
                audio.sample_rate()
            )));
        }
        let n = audio.len();
        if n < self.min_signal_len() {
            return Err(Error::SignalTooShort { needed: self.min_signal_len(), got: n });
        }
        // running sums are differenced, so accumulate in double precision
        let x: Vec<f64> = audio.samples().iter().map(|s| s.as_f64()).collect();
        let n_frames = self.frame_count(n);
        let sr = f64::from(self.sample_rate);
        let mut data = Vec::with_capacity(self.bins.len() * n_frames);
        let mut marks = Vec::with_capacity(2 * n_frames);
        let mut sums = Vec::with_capacity(2 * n_frames);
        for (k, bin) in self.bins.iter().enumerate() {
            let omega = 2.0 * PI * bin.freq_hz / sr;
            let theta = 2.0 * PI / bin.kernel_len as f64;
            let terms = [(omega, 0.5), (omega - theta, -0.25), (omega + theta, -0.25)];
            let span = |m: usize| {
                let start = self.kernel_start(k, m);
                let end = start + bin.kernel_len as i64;
                (start, start.clamp(0, n as i64) as usize, end.clamp(0, n as i64) as usize)
            };
            marks.clear();
            for m in 0..n_frames {
                let (_, lo, hi) = span(m);
                marks.push(lo);
                marks.push(hi);
            }
            marks.sort_unstable();
            marks.dedup();
            sums_at(&x, [terms[0].0, terms[1].0, terms[2].0], &marks, &mut sums);
            let at = |pos: usize| &sums[marks.binary_search(&pos).expect("position recorded")];
            let inv_len = 1.0 / bin.kernel_len as f64;
            for m in 0..n_frames {
                let (start, lo, hi) = span(m);
                let (s_lo, s_hi) = (at(lo), at(hi));
                let mut acc = Complex::new(0.0, 0.0);
                for (i, (alpha, coef)) in terms.iter().enumerate() {
                    let phase = alpha * start as f64;
                    acc += Complex::new(phase.cos(), phase.sin()) * (s_hi[i] - s_lo[i]) * *coef;
                }
                acc *= inv_len;
                data.push(Complex::new(T::lit(acc.re), T::lit(acc.im)));
            }
        }
        Ok(CqtSpectrum { n_bins: self.bins.len(), n_frames, data })
    }
}

/// Running sums `S_a(j) = sum_{t<j} x[t] * exp(-i a t)` for three
/// frequencies, recorded at the sorted positions `marks`. The three phasor
/// chains are independent, which keeps the loop from stalling on one.
fn sums_at(x: &[f64], alphas: [f64; 3], marks: &[usize], out: &mut Vec<[Complex<f64>; 3]>) {
    out.clear();
    let zero = Complex::new(0.0, 0.0);
    let mut acc = [zero; 3];
    let mut next = marks.iter().peekable();
    while next.next_if(|&&p| p == 0).is_some() {
        out.push(acc);
    }
    let Some(&&last) = marks.last().as_ref() else { return };
    let steps = alphas.map(|a| Complex::new(a.cos(), -a.sin()));
    for (block, chunk) in x[..last].chunks(PHASOR_RESYNC).enumerate() {
        let t0 = block * PHASOR_RESYNC;
        let mut ph = alphas.map(|a| {
            let phase = a * t0 as f64;
            Complex::new(phase.cos(), -phase.sin())
        });
        for (i, &v) in chunk.iter().enumerate() {
            acc[0] += ph[0] * v;
            acc[1] += ph[1] * v;
            acc[2] += ph[2] * v;
            if next.next_if(|&&p| p == t0 + i + 1).is_some() {
                out.push(acc);
            }
            ph[0] *= steps[0];
            ph[1] *= steps[1];
            ph[2] *= steps[2];
        }
    }
}

/// Complex constant-Q coefficients, bin-major (`bins x frames`).
#[derive(Debug, Clone, PartialEq)]
pub struct CqtSpectrum<T> {
    pub n_bins: usize,
    pub n_frames: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CqtSpectrum<T> {
    pub fn at(&self, bin: usize, frame: usize) -> Complex<T> {
        self.data[bin * self.n_frames + frame]
    }

    pub fn magnitude(&self, bin: usize, frame: usize) -> T {
        self.at(bin, frame).norm()
    }

    /// Per-frame log power `ln(max(|X|^2, floor))`, frame-major.
    pub fn log_power_frames(&self, floor: T) -> Vec<Vec<T>> {
        (0..self.n_frames)
            .map(|m| (0..self.n_bins).map(|k| self.at(k, m).norm_sqr().max(floor).ln()).collect())
            .collect()
    }
}

pub fn cqt<T: Real>(audio: &AudioBuffer<T>, params: CqtParams) -> Result<CqtSpectrum<T>> {
    CqtPlan::new(params, audio.sample_rate())?.transform(audio)
}
