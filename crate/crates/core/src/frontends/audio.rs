use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Only 16 kHz material is ingested; there is no resampler.
pub const SUPPORTED_SAMPLE_RATE: u32 = 16_000;

/// Mono PCM samples scaled to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Real> AudioBuffer<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::UnsupportedAudio("empty signal".into()));
        }
        if sample_rate == 0 {
            return Err(Error::UnsupportedAudio("zero sample rate".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio samples".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Reads a RIFF PCM16 mono WAV at 16 kHz.
    pub fn read_wav<R: Read>(reader: R) -> Result<Self> {
        let mut wav = hound::WavReader::new(reader)?;
        let spec = wav.spec();
        if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
            return Err(Error::UnsupportedAudio(format!(
                "expected 16-bit PCM, found {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            )));
        }
        if spec.channels != 1 {
            return Err(Error::UnsupportedAudio(format!("expected mono, found {} channels", spec.channels)));
        }
        if spec.sample_rate != SUPPORTED_SAMPLE_RATE {
            return Err(Error::UnsupportedAudio(format!("unsupported sample rate {} Hz", spec.sample_rate)));
        }
        let scale = T::lit(1.0 / 32768.0);
        let samples = wav
            .samples::<i16>()
            .map(|s| s.map(|v| T::lit(f64::from(v)) * scale))
            .collect::<std::result::Result<Vec<T>, _>>()?;
        Self::new(samples, spec.sample_rate)
    }

    pub fn open_wav(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_wav(std::io::BufReader::new(file))
    }

    /// Writes PCM16 mono; samples are clipped to `[-1, 1]`.
    pub fn write_wav<W: Write + Seek>(&self, writer: W) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut wav = hound::WavWriter::new(writer, spec)?;
        for &s in &self.samples {
            let v = (s.as_f64().clamp(-1.0, 1.0) * 32767.0).round() as i16;
            wav.write_sample(v)?;
        }
        wav.finalize()?;
        Ok(())
    }
}
