//! Categorical excitation sampling with pitch-dependent temperature
//! lowering and low-probability pruning.
//!
//! The distribution is sharpened by raising the softmax probabilities to
//! the power `beta = 1 + beta_slope * pitch_gain` and renormalizing, then
//! probabilities below `threshold_ratio * max_prob` are zeroed and the
//! rest renormalized. One index is drawn by inverse CDF from the supplied
//! deterministic generator.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dsp::MuLawIndex;
use crate::error::{Error, Result};
use crate::nnet::dual_fc::NUM_CLASSES;
use crate::scalar::Real;

/// Temperature constants, carried as model-file metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureConfig {
    /// Slope of the sharpening exponent: `beta = 1 + beta_slope * pitch_gain`.
    pub beta_slope: f32,
    /// Pruning threshold as a fraction of the post-sharpening max probability.
    pub threshold_ratio: f32,
}

impl Default for TemperatureConfig {
    fn default() -> Self {
        Self {
            beta_slope: 2.0,
            threshold_ratio: 0.002,
        }
    }
}

/// Numerically stable softmax; the output sums to 1 within 1e-9.
pub fn softmax<S: Real>(logits: &[S]) -> Vec<S> {
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Draws one μ-law excitation index from the tempered distribution.
pub fn sample_excitation<S: Real>(
    logits: &[S],
    pitch_gain: S,
    temp: &TemperatureConfig,
    rng: &mut ChaCha8Rng,
) -> Result<MuLawIndex> {
    if logits.len() != NUM_CLASSES {
        return Err(Error::ShapeMismatch(format!(
            "expected {NUM_CLASSES} logits, got {}",
            logits.len()
        )));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("non-finite logit"));
    }
    let pg = pitch_gain.to_f64c();
    if !(0.0..=1.0).contains(&pg) {
        return Err(Error::invalid(format!("pitch gain {pg} outside [0, 1]")));
    }

    let mut probs = softmax(logits);
    let beta = S::from_f64c(1.0 + temp.beta_slope as f64 * pg);
    for p in probs.iter_mut() {
        *p = p.powf(beta);
    }
    let sum: S = probs.iter().copied().sum();
    for p in probs.iter_mut() {
        *p = *p / sum;
    }
    let max = probs.iter().copied().fold(S::zero(), S::max);
    let thresh = max * S::from_f64c(temp.threshold_ratio as f64);
    for p in probs.iter_mut() {
        if *p < thresh {
            *p = S::zero();
        }
    }
    let sum: S = probs.iter().copied().sum();
    if !(sum > S::zero()) {
        // The max always survives its own threshold.
        return Err(Error::NumericalInstability(
            "no probability mass after threshold".into(),
        ));
    }

    let u = S::from_f64c(rng.gen::<f64>()) * sum;
    let mut cum = S::zero();
    let mut chosen = NUM_CLASSES - 1;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            chosen = i;
            break;
        }
    }
    // Guard against landing on a pruned tail class through rounding.
    while probs[chosen] == S::zero() {
        chosen -= 1;
    }
    Ok(MuLawIndex::new(chosen as u8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn softmax_sums_to_one() {
        let logits: Vec<f64> = (0..256).map(|i| (i as f64 - 128.0) / 32.0).collect();
        let p = softmax(&logits);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn degenerate_logit_is_deterministic() {
        let mut logits = vec![0.0f64; 256];
        logits[42] = 30.0;
        let temp = TemperatureConfig::default();
        for pg in [0.0, 0.5, 1.0] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..100 {
                let idx = sample_excitation(&logits, pg, &temp, &mut rng).unwrap();
                assert_eq!(idx.code(), 42);
            }
        }
    }

    #[test]
    fn uniform_logits_stay_uniform_under_temperature() {
        // Power of a uniform distribution is uniform; a histogram over a
        // modest draw count should show no gross skew.
        let logits = vec![0.5f64; 256];
        let temp = TemperatureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0u32; 256];
        let draws = 100_000;
        for _ in 0..draws {
            counts[sample_excitation(&logits, 1.0, &temp, &mut rng).unwrap().index()] += 1;
        }
        let expected = draws as f64 / 256.0;
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expected).abs() < 6.0 * expected.sqrt(),
                "bin {i}: {c} vs {expected}"
            );
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let logits: Vec<f32> = (0..256).map(|i| ((i * 31) % 17) as f32 / 4.0).collect();
        let temp = TemperatureConfig::default();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            (0..50)
                .map(|_| sample_excitation(&logits, 0.3, &temp, &mut rng).unwrap().code())
                .collect::<Vec<u8>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn invalid_inputs_rejected() {
        let temp = TemperatureConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_excitation(&vec![0.0f64; 10], 0.0, &temp, &mut rng).is_err());
        assert!(sample_excitation(&vec![f64::NAN; 256], 0.0, &temp, &mut rng).is_err());
        assert!(sample_excitation(&vec![0.0f64; 256], 1.5, &temp, &mut rng).is_err());
    }
}
