//! Acoustic frontends: CQCC and LFCC with their building blocks.

pub mod audio;
pub mod cqcc;
pub mod cqt;
pub mod dct;
pub mod deltas;
pub mod features;
pub mod framing;
pub mod lfcc;
pub mod resample;
pub mod spectrum;

pub use audio::AudioBuffer;
pub use cqcc::{cqcc, uniform_resample, Cqcc, CqccConfig, UniformResampler};
pub use cqt::{cqt, cqt_bin_count, CqtPlan, CqtSpectrum};
pub use dct::{dct_ii, Dct};
pub use deltas::{deltas, with_deltas};
pub use features::FeatureMatrix;
pub use framing::{frame_signal, Window};
pub use lfcc::{lfcc, linear_filterbank, Lfcc, LfccConfig};
pub use spectrum::{power_spectrum, Filterbank, PowerSpectrum};

use crate::error::Result;
use crate::scalar::Real;

/// Power floor applied before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-20;

/// Either baseline frontend behind one interface.
pub enum Frontend<T: Real> {
    Cqcc(Cqcc<T>),
    Lfcc(Lfcc<T>),
}

impl<T: Real> Frontend<T> {
    pub fn extract(&self, audio: &AudioBuffer<T>) -> Result<FeatureMatrix<T>> {
        match self {
            Self::Cqcc(f) => f.extract(audio),
            Self::Lfcc(f) => f.extract(audio),
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            Self::Cqcc(f) => f.config().dims(),
            Self::Lfcc(f) => f.config().dims(),
        }
    }
}
