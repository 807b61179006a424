//! The autoregressive synthesis loop: per-frame conditioning drives the
//! frame rate network, then 160 per-sample steps combine the linear
//! prediction with a sampled μ-law excitation. A teacher-forced mode
//! reconstructs a reference signal and reports the model cross-entropy.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsp::{lpc_predict, mulaw_decode, mulaw_encode, AudioBuffer, MuLawIndex, LPC_ORDER};
use crate::error::{Error, Result};
use crate::features::{lpc_from_conditioning, ConditioningVector};
use crate::nnet::{
    dual_fc, frame_rate_network, gru_a_step, gru_b_step, sample_excitation, softmax, GruState,
    ModelWeights,
};
use crate::scalar::Real;
use crate::FRAME_SIZE;

/// Pre/de-emphasis coefficient of the synthesis pipeline.
pub const PREEMPH_ALPHA: f64 = 0.85;

/// Everything that persists across frames during synthesis.
///
/// The sample history and the excitation feedback live in the
/// pre-emphasized domain; de-emphasis happens on the way out and its
/// one-sample memory is carried unclipped.
#[derive(Debug, Clone)]
pub struct SynthState<S: Real> {
    pub gru_a: GruState<S>,
    pub gru_b: GruState<S>,
    /// Previous 16 output samples, most recent first.
    pub sample_history: [S; LPC_ORDER],
    s_prev_idx: MuLawIndex,
    e_prev: MuLawIndex,
    deemph: S,
    rng: ChaCha8Rng,
    cond_hist: [ConditioningVector<S>; 2],
    /// Laplace scale (in μ-law codes) for the noise applied to the
    /// excitation index fed back to the network; zero disables injection.
    pub noise_scale: f64,
}

impl<S: Real> SynthState<S> {
    pub fn new(model: &ModelWeights<S>, seed: u64) -> Self {
        Self {
            gru_a: GruState::zeros(model.config.n_a),
            gru_b: GruState::zeros(model.config.gru_b_units),
            sample_history: [S::zero(); LPC_ORDER],
            s_prev_idx: MuLawIndex::ZERO,
            e_prev: MuLawIndex::ZERO,
            deemph: S::zero(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            cond_hist: [ConditioningVector::zero(); 2],
            noise_scale: 0.0,
        }
    }

    fn push_history(&mut self, s: S) {
        for i in (1..LPC_ORDER).rev() {
            self.sample_history[i] = self.sample_history[i - 1];
        }
        self.sample_history[0] = s;
    }

    fn push_conditioning(&mut self, c: ConditioningVector<S>) {
        self.cond_hist[0] = self.cond_hist[1];
        self.cond_hist[1] = c;
    }
}

/// Result of one teacher-forced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TeacherForcedFrame<S: Real> {
    /// Reconstruction `y_t + ê_t` in the pre-emphasized domain; each
    /// sample differs from the reference by at most one μ-law step.
    pub output: Vec<S>,
    /// Mean categorical cross-entropy of the true excitation, in nats.
    pub cross_entropy_nats: f64,
}

fn clamped_pitch_gain<S: Real>(c: &ConditioningVector<S>) -> S {
    c.pitch_gain.max(S::zero()).min(S::one())
}

/// Synthesizes one 160-sample frame, returning de-emphasized audio
/// clipped to `[-1, 1]`.
pub fn synth_frame<S: Real>(
    state: &mut SynthState<S>,
    c: &ConditioningVector<S>,
    model: &ModelWeights<S>,
) -> Result<Vec<S>> {
    let (contrib, _f) = frame_rate_network(c, &state.cond_hist, &model.frame_rate)?;
    let lpc = lpc_from_conditioning(c)?.lpc;
    let pitch_gain = clamped_pitch_gain(c);
    let alpha = S::from_f64c(PREEMPH_ALPHA);

    let mut out = Vec::with_capacity(FRAME_SIZE);
    for t in 0..FRAME_SIZE {
        let y = lpc_predict(&state.sample_history, &lpc);
        if !y.is_finite() {
            return Err(Error::Divergence { sample: t });
        }
        let y_idx = mulaw_encode(y)?;
        gru_a_step(
            &mut state.gru_a,
            state.s_prev_idx,
            y_idx,
            state.e_prev,
            &contrib,
            &model.gru_a,
        );
        gru_b_step(&mut state.gru_b, &state.gru_a.h, &contrib, &model.gru_b)?;
        let logits = dual_fc(&state.gru_b.h, &model.dual_fc)?;
        let e_idx = sample_excitation(&logits, pitch_gain, &model.config.temperature, &mut state.rng)?;
        let e: S = mulaw_decode(e_idx);
        let s = y + e;
        if !s.is_finite() {
            return Err(Error::Divergence { sample: t });
        }
        state.push_history(s);
        state.s_prev_idx = mulaw_encode(s)?;
        state.e_prev = inject_excitation_noise(e_idx, state.noise_scale, &mut state.rng)?;

        let d = s + alpha * state.deemph;
        state.deemph = d;
        out.push(d.max(-S::one()).min(S::one()));
    }
    state.push_conditioning(*c);
    Ok(out)
}

/// Runs one frame with ground-truth feedback: the sample history is the
/// pre-emphasized `reference`, and the excitation index is the quantized
/// prediction residual rather than a draw from the model.
///
/// With `noise_scale > 0` the excitation fed back to the network (not the
/// one reconstructing the output) is perturbed by a rounded Laplace offset.
pub fn teacher_forced_frame<S: Real>(
    state: &mut SynthState<S>,
    c: &ConditioningVector<S>,
    reference: &[S],
    model: &ModelWeights<S>,
) -> Result<TeacherForcedFrame<S>> {
    if reference.len() != FRAME_SIZE {
        return Err(Error::ShapeMismatch(format!(
            "reference frame must be {FRAME_SIZE} samples, got {}",
            reference.len()
        )));
    }
    let (contrib, _f) = frame_rate_network(c, &state.cond_hist, &model.frame_rate)?;
    let lpc = lpc_from_conditioning(c)?.lpc;

    let mut out = Vec::with_capacity(FRAME_SIZE);
    let mut ce_sum = 0.0f64;
    for &r in reference {
        let y = lpc_predict(&state.sample_history, &lpc);
        let y_idx = mulaw_encode(y)?;
        gru_a_step(
            &mut state.gru_a,
            state.s_prev_idx,
            y_idx,
            state.e_prev,
            &contrib,
            &model.gru_a,
        );
        gru_b_step(&mut state.gru_b, &state.gru_a.h, &contrib, &model.gru_b)?;
        let logits = dual_fc(&state.gru_b.h, &model.dual_fc)?;
        let e_idx = mulaw_encode(r - y)?;
        let probs = softmax(&logits);
        ce_sum -= probs[e_idx.index()].to_f64c().max(f64::MIN_POSITIVE).ln();
        out.push(y + mulaw_decode::<S>(e_idx));

        state.push_history(r);
        state.s_prev_idx = mulaw_encode(r)?;
        state.e_prev = inject_excitation_noise(e_idx, state.noise_scale, &mut state.rng)?;
    }
    state.push_conditioning(*c);
    Ok(TeacherForcedFrame {
        output: out,
        cross_entropy_nats: ce_sum / FRAME_SIZE as f64,
    })
}

/// Perturbs a μ-law index by a rounded Laplace(0, `scale`) offset,
/// clamped to the valid code range. `scale == 0` is the identity.
pub fn inject_excitation_noise(
    idx: MuLawIndex,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Result<MuLawIndex> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("noise scale {scale} invalid")));
    }
    if scale == 0.0 {
        return Ok(idx);
    }
    // Inverse-CDF Laplace draw from u ~ U(-1/2, 1/2).
    let u: f64 = rng.gen::<f64>() - 0.5;
    let mag = -scale * (1.0 - 2.0 * u.abs()).ln();
    let offset = (mag.copysign(u) as f64).round() as i64;
    let code = (idx.code() as i64 + offset).clamp(0, 255) as u8;
    Ok(MuLawIndex::new(code))
}

/// Resets state and synthesizes one frame per conditioning vector.
/// Equivalent, sample for sample, to streaming the frames one at a time
/// through [`synth_frame`] with the same seed.
pub fn synthesize<S: Real>(
    model: &ModelWeights<S>,
    features: &[ConditioningVector<S>],
    seed: u64,
) -> Result<AudioBuffer<S>> {
    let mut state = SynthState::new(model, seed);
    let mut samples = Vec::with_capacity(features.len() * FRAME_SIZE);
    for c in features {
        samples.extend(synth_frame(&mut state, c, model)?);
    }
    AudioBuffer::new(samples)
}
