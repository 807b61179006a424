//! Conditioning-feature pipeline: decoder-side parameter ingestion, the
//! 38-dimensional per-frame network input, per-frame LPC derivation, and
//! data-augmentation transforms.

mod dump;

pub use dump::{load_feature_dump, write_feature_dump, OPNV_MAGIC, OPNV_RECORD_SIZE, OPNV_VERSION};

use crate::dsp::{
    autocorr_from_power, band_bin_counts, band_energies, bands_from_cepstrum, cepstrum_from_bands,
    condition_autocorr, hann_window, interp_bands_to_bins, levinson_durbin,
    lpc_frequency_response, AudioBuffer, Cepstrum18, LpcCoeffs, SpectrumAnalyzer, FFT_SIZE,
    NUM_BANDS,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::FRAME_SIZE;

/// Number of conditioning features per frame (18 + 18 + 2).
pub const NUM_FEATURES: usize = 2 * NUM_BANDS + 2;

/// Number of LTP filter taps carried per frame.
pub const NUM_LTP_TAPS: usize = 5;

/// Pitch period clamp range, in samples at 16 kHz.
pub const PITCH_MIN: f64 = 16.0;
pub const PITCH_MAX: f64 = 512.0;

/// Per-frame decoder-side parameters: quantized LPC, LTP taps, pitch
/// period, and 160 samples of decoder output audio.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures<S: Real> {
    pub lpc_q: LpcCoeffs<S>,
    pub ltp_gains: [S; NUM_LTP_TAPS],
    pitch_period: S,
    decoded: Vec<S>,
}

impl<S: Real> FrameFeatures<S> {
    /// Builds a frame, clamping the pitch period into `[16, 512]`.
    pub fn new(
        lpc_q: LpcCoeffs<S>,
        ltp_gains: [S; NUM_LTP_TAPS],
        pitch_period: S,
        decoded: Vec<S>,
    ) -> Result<Self> {
        if decoded.len() != FRAME_SIZE {
            return Err(Error::ShapeMismatch(format!(
                "decoded audio must be {FRAME_SIZE} samples, got {}",
                decoded.len()
            )));
        }
        if ltp_gains.iter().any(|g| !g.is_finite()) || !pitch_period.is_finite() {
            return Err(Error::invalid("non-finite frame parameter"));
        }
        if let Some(i) = decoded.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite decoded sample {i}")));
        }
        let pitch_period = pitch_period
            .max(S::from_f64c(PITCH_MIN))
            .min(S::from_f64c(PITCH_MAX));
        Ok(Self {
            lpc_q,
            ltp_gains,
            pitch_period,
            decoded,
        })
    }

    pub fn pitch_period(&self) -> S {
        self.pitch_period
    }

    pub fn decoded(&self) -> &[S] {
        &self.decoded
    }
}

/// The 38-dimensional per-frame network input: two 18-coefficient cepstra
/// plus the pitch period and pitch gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditioningVector<S: Real> {
    pub cepstrum_decoded: Cepstrum18<S>,
    pub cepstrum_lpc: Cepstrum18<S>,
    pub pitch_period_norm: S,
    pub pitch_gain: S,
}

impl<S: Real> ConditioningVector<S> {
    pub fn zero() -> Self {
        Self {
            cepstrum_decoded: Cepstrum18::zero(),
            cepstrum_lpc: Cepstrum18::zero(),
            pitch_period_norm: S::zero(),
            pitch_gain: S::zero(),
        }
    }

    /// Flattened layout: `[cepstrum_decoded; cepstrum_lpc; period; gain]`.
    pub fn flatten(&self) -> [S; NUM_FEATURES] {
        let mut out = [S::zero(); NUM_FEATURES];
        out[..NUM_BANDS].copy_from_slice(self.cepstrum_decoded.coeffs());
        out[NUM_BANDS..2 * NUM_BANDS].copy_from_slice(self.cepstrum_lpc.coeffs());
        out[2 * NUM_BANDS] = self.pitch_period_norm;
        out[2 * NUM_BANDS + 1] = self.pitch_gain;
        out
    }

    pub fn from_flat(flat: &[S]) -> Result<Self> {
        if flat.len() != NUM_FEATURES {
            return Err(Error::ShapeMismatch(format!(
                "expected {NUM_FEATURES} features, got {}",
                flat.len()
            )));
        }
        let mut c1 = [S::zero(); NUM_BANDS];
        let mut c2 = [S::zero(); NUM_BANDS];
        c1.copy_from_slice(&flat[..NUM_BANDS]);
        c2.copy_from_slice(&flat[NUM_BANDS..2 * NUM_BANDS]);
        Ok(Self {
            cepstrum_decoded: Cepstrum18::new(c1)?,
            cepstrum_lpc: Cepstrum18::new(c2)?,
            pitch_period_norm: flat[2 * NUM_BANDS],
            pitch_gain: flat[2 * NUM_BANDS + 1],
        })
    }
}

/// LPC derived from the decoded-audio cepstrum (minimum-phase by
/// construction through the conditioned Levinson recursion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLpc<S: Real> {
    pub lpc: LpcCoeffs<S>,
}

/// Stateless feature extractor holding the spectral analysis tables.
pub struct FeatureExtractor<S: Real> {
    analyzer: SpectrumAnalyzer<S>,
    window: Vec<S>,
    bin_counts: [usize; NUM_BANDS],
}

impl<S: Real> Default for FeatureExtractor<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> FeatureExtractor<S> {
    pub fn new() -> Self {
        Self {
            analyzer: SpectrumAnalyzer::new(),
            window: hann_window(),
            bin_counts: band_bin_counts(),
        }
    }

    /// Per-bin mean band levels (band sums normalized by bin counts), so a
    /// white spectrum maps to equal levels regardless of band width.
    fn band_levels(&self, power: &[S]) -> Result<[S; NUM_BANDS]> {
        let mut bands = band_energies(power)?;
        for b in 0..NUM_BANDS {
            bands[b] = bands[b] / S::from_usizec(self.bin_counts[b]);
        }
        Ok(bands)
    }

    /// Builds the conditioning vector for one frame.
    ///
    /// `window_state` is the previous frame's 160 decoded samples; the
    /// analysis window spans the concatenation (50% overlap).
    pub fn conditioning_from_frame(
        &self,
        frame: &FrameFeatures<S>,
        window_state: &[S],
    ) -> Result<ConditioningVector<S>> {
        if window_state.len() != FRAME_SIZE {
            return Err(Error::ShapeMismatch(format!(
                "window state must be {FRAME_SIZE} samples, got {}",
                window_state.len()
            )));
        }
        // Method 1: spectrum of the Hann-windowed decoded audio.
        let mut windowed = Vec::with_capacity(FFT_SIZE);
        for (n, &w) in self.window.iter().enumerate() {
            let x = if n < FRAME_SIZE {
                window_state[n]
            } else {
                frame.decoded[n - FRAME_SIZE]
            };
            windowed.push(x * w);
        }
        let power = self.analyzer.power_spectrum(&windowed)?;
        let cepstrum_decoded = cepstrum_from_bands(&self.band_levels(&power)?);

        // Method 2: spectrum of the bit-stream LPC.
        let response = lpc_frequency_response(&frame.lpc_q)?;
        let cepstrum_lpc = cepstrum_from_bands(&self.band_levels(&response)?);

        let sum: S = frame.ltp_gains.iter().copied().sum();
        let pitch_gain = sum.max(S::zero()).min(S::one());
        let pitch_period_norm =
            frame.pitch_period / S::from_f64c(PITCH_MAX) - S::from_f64c(0.5);
        Ok(ConditioningVector {
            cepstrum_decoded,
            cepstrum_lpc,
            pitch_period_norm,
            pitch_gain,
        })
    }
}

/// Derives the synthesis LPC from the decoded-audio cepstrum:
/// cepstrum → band levels → log-linear interpolation to the bin grid →
/// autocorrelation → conditioned Levinson-Durbin.
pub fn lpc_from_conditioning<S: Real>(c: &ConditioningVector<S>) -> Result<DerivedLpc<S>> {
    let levels = bands_from_cepstrum(&c.cepstrum_decoded);
    let spectrum = interp_bands_to_bins(&levels);
    let mut r = autocorr_from_power(&spectrum)?;
    condition_autocorr(&mut r);
    Ok(DerivedLpc {
        lpc: levinson_durbin(&r)?,
    })
}

/// Scales the signal by `gain_db` in `[-40, 0]` dB, clipping to `[-1, 1]`.
pub fn augment_level<S: Real>(signal: &AudioBuffer<S>, gain_db: S) -> Result<AudioBuffer<S>> {
    let db = gain_db.to_f64c();
    if !(-40.0..=0.0).contains(&db) {
        return Err(Error::invalid(format!(
            "gain_db must be in [-40, 0], got {db}"
        )));
    }
    let scale = S::from_f64c(10f64.powf(db / 20.0));
    let out = signal
        .samples()
        .iter()
        .map(|&s| (s * scale).max(-S::one()).min(S::one()))
        .collect();
    AudioBuffer::new(out)
}

/// Spectral-tilt augmentation `H(z) = (1 + r1 z^{-1}) / (1 + r2 z^{-1})`,
/// zero initial state. `r1 == r2` is the identity.
pub fn augment_tilt<S: Real>(signal: &AudioBuffer<S>, r1: S, r2: S) -> Result<AudioBuffer<S>> {
    if !(r1.abs() < S::one()) {
        return Err(Error::invalid("tilt zero |r1| must be < 1"));
    }
    if !(r2.abs() < S::one()) {
        return Err(Error::invalid("tilt pole |r2| must be < 1"));
    }
    let mut x_prev = S::zero();
    let mut y_prev = S::zero();
    let out = signal
        .samples()
        .iter()
        .map(|&x| {
            let y = x + r1 * x_prev - r2 * y_prev;
            x_prev = x;
            y_prev = y;
            y
        })
        .collect();
    AudioBuffer::new(out)
}
