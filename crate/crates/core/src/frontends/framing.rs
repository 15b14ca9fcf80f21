use crate::error::{Error, Result};
use crate::scalar::Real;

/// Splits a signal into frames at offsets `0, hop, 2*hop, ...`.
///
/// Produces `floor((n - win) / hop) + 1` full frames, plus one zero-padded
/// tail frame when `(n - win) % hop > 0`.
pub fn frame_signal<T: Real>(samples: &[T], win_len: usize, hop: usize) -> Result<Vec<Vec<T>>> {
    if win_len == 0 || hop == 0 {
        return Err(Error::InvalidArgument("window and hop must be positive".into()));
    }
    if samples.len() < win_len {
        return Err(Error::SignalTooShort { needed: win_len, got: samples.len() });
    }
    let span = samples.len() - win_len;
    let full = span / hop + 1;
    let mut frames: Vec<Vec<T>> = (0..full).map(|i| samples[i * hop..i * hop + win_len].to_vec()).collect();
    if !span.is_multiple_of(hop) {
        let start = full * hop;
        let mut tail = samples[start..].to_vec();
        tail.resize(win_len, T::zero());
        frames.push(tail);
    }
    Ok(frames)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hamming,
    Rectangular,
}

impl Window {
    /// Symmetric window coefficients.
    pub fn coefficients<T: Real>(self, len: usize) -> Vec<T> {
        match self {
            Self::Rectangular => vec![T::one(); len],
            Self::Hamming if len == 1 => vec![T::one()],
            Self::Hamming => {
                let denom = (len - 1) as f64;
                (0..len).map(|n| T::lit(0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())).collect()
            }
        }
    }
}
