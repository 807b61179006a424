//! Signal-processing primitives: companding, emphasis filters, linear
//! prediction, Levinson-Durbin, and the fixed 320-point spectral/cepstral
//! analysis used by the conditioning pipeline.
//!
//! Everything here is a pure function of its inputs; streaming filters
//! take their one-sample memory explicitly and return the updated value.

mod emphasis;
mod lpc;
mod mulaw;
mod spectrum;

pub use emphasis::{deemphasis, preemphasis};
pub use lpc::{condition_autocorr, levinson_durbin, lpc_predict, LpcCoeffs, LPC_ORDER};
pub use mulaw::{mulaw_decode, mulaw_encode, MuLawIndex};
pub use spectrum::{
    autocorr_from_power, band_bin_counts, band_energies, bands_from_cepstrum, bin_band,
    cepstrum_from_bands, hann_window, interp_bands_to_bins, lpc_frequency_response, Cepstrum18,
    SpectrumAnalyzer, BAND_EDGES_HZ, FFT_SIZE, NUM_BANDS, NUM_BINS,
};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::SAMPLE_RATE;

/// Mono 16 kHz sample sequence; the signal domain of all DSP here.
///
/// Samples are nominally in `[-1, 1]` and always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<S: Real> {
    samples: Vec<S>,
}

impl<S: Real> AudioBuffer<S> {
    /// Wraps a sample vector, rejecting non-finite values.
    pub fn new(samples: Vec<S>) -> Result<Self> {
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self { samples })
    }

    pub fn empty() -> Self {
        Self { samples: Vec::new() }
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub const fn sample_rate(&self) -> u32 {
        SAMPLE_RATE
    }
}
