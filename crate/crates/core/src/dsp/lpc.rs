//! 16th-order linear prediction and the Levinson-Durbin recursion.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Prediction order used throughout the engine.
pub const LPC_ORDER: usize = 16;

/// 16 prediction coefficients in the convention
/// `y_t = sum_{i=1}^{16} a[i-1] * s_{t-i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpcCoeffs<S: Real> {
    a: [S; LPC_ORDER],
}

impl<S: Real> LpcCoeffs<S> {
    pub fn new(a: [S; LPC_ORDER]) -> Result<Self> {
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite LPC coefficient"));
        }
        Ok(Self { a })
    }

    pub fn zero() -> Self {
        Self {
            a: [S::zero(); LPC_ORDER],
        }
    }

    pub fn coeffs(&self) -> &[S; LPC_ORDER] {
        &self.a
    }
}

/// One-step prediction `y_t = sum a_i * history[i-1]`.
///
/// `history` holds the 16 most recent samples, most recent first.
pub fn lpc_predict<S: Real>(history: &[S; LPC_ORDER], lpc: &LpcCoeffs<S>) -> S {
    let mut acc = S::zero();
    for i in 0..LPC_ORDER {
        acc += lpc.a[i] * history[i];
    }
    acc
}

/// Lag-windows the autocorrelation and adds a white-noise floor.
///
/// Applied before [`levinson_durbin`] on cepstrum-smoothed autocorrelations
/// to keep the synthesis filter minimum-phase: `r_k *= exp(-0.5 (2π·60·k/16000)^2)`
/// and `r_0 += 1e-4 r_0`.
pub fn condition_autocorr<S: Real>(r: &mut [S; LPC_ORDER + 1]) {
    for (k, rk) in r.iter_mut().enumerate() {
        let w = (-0.5 * (2.0 * std::f64::consts::PI * 60.0 * k as f64 / 16_000.0).powi(2)).exp();
        *rk = *rk * S::from_f64c(w);
    }
    r[0] = r[0] * S::from_f64c(1.0 + 1e-4);
}

/// Classical Levinson-Durbin recursion on 17 autocorrelation lags.
///
/// Returns the 16 prediction coefficients. Fails on `r0 <= 0`, non-finite
/// input, or a reflection coefficient leaving `(-1, 1)` (callers feeding
/// smoothed spectra should run [`condition_autocorr`] first).
pub fn levinson_durbin<S: Real>(r: &[S; LPC_ORDER + 1]) -> Result<LpcCoeffs<S>> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite autocorrelation".into()));
    }
    if r[0] <= S::zero() {
        return Err(Error::DegenerateInput(format!(
            "autocorrelation r0 must be positive, got {:?}",
            r[0]
        )));
    }
    let mut a = [S::zero(); LPC_ORDER];
    let mut err = r[0];
    for m in 1..=LPC_ORDER {
        let mut acc = r[m];
        for i in 1..m {
            acc = acc - a[i - 1] * r[m - i];
        }
        let k = acc / err;
        if !(k.abs() < S::one()) {
            return Err(Error::NumericalInstability(format!(
                "reflection coefficient {:?} out of (-1, 1) at order {m}",
                k
            )));
        }
        let prev = a;
        a[m - 1] = k;
        for i in 1..m {
            a[i - 1] = prev[i - 1] - k * prev[m - 1 - i];
        }
        err = err * (S::one() - k * k);
        debug_assert!(err >= S::zero());
    }
    LpcCoeffs::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_one_tap_copy() {
        let mut a = [0.0f64; 16];
        a[0] = 1.0;
        let lpc = LpcCoeffs::new(a).unwrap();
        let mut h = [0.0; 16];
        h[0] = 0.5;
        assert_eq!(lpc_predict(&h, &lpc), 0.5);
    }

    #[test]
    fn predict_all_zero() {
        let lpc = LpcCoeffs::<f64>::zero();
        let h = [0.3; 16];
        assert_eq!(lpc_predict(&h, &lpc), 0.0);
    }

    #[test]
    fn predict_matches_naive_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut a = [0.0f64; 16];
            let mut h = [0.0f64; 16];
            for i in 0..16 {
                a[i] = rng.gen_range(-1.0..1.0);
                h[i] = rng.gen_range(-1.0..1.0);
            }
            let lpc = LpcCoeffs::new(a).unwrap();
            // Independently coded reference.
            let mut want = 0.0;
            for i in 1..=16 {
                want += a[i - 1] * h[i - 1];
            }
            assert!((lpc_predict(&h, &lpc) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn levinson_white_noise_is_zero() {
        let mut r = [0.0f64; 17];
        r[0] = 1.0;
        let lpc = levinson_durbin(&r).unwrap();
        assert!(lpc.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn levinson_ar1_recovery() {
        let mut r = [0.0f64; 17];
        for k in 0..17 {
            r[k] = 0.9f64.powi(k as i32);
        }
        let lpc = levinson_durbin(&r).unwrap();
        let a = lpc.coeffs();
        assert!((a[0] - 0.9).abs() < 1e-12, "a1={}", a[0]);
        for &c in &a[1..] {
            assert!(c.abs() < 1e-6, "tail coeff {c}");
        }
    }

    #[test]
    fn levinson_rejects_nonpositive_r0() {
        let r = [0.0f64; 17];
        assert!(matches!(
            levinson_durbin(&r),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn levinson_ar16_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        // Build a stable AR(16) filter from reflection coefficients, filter
        // long white noise through it, estimate autocorrelation, recover.
        let refl: Vec<f64> = (0..16).map(|_| rng.gen_range(-0.6..0.6)).collect();
        // Step-up recursion reflection -> direct form.
        let mut a = vec![0.0f64; 16];
        for m in 1..=16 {
            let k = refl[m - 1];
            let prev = a.clone();
            a[m - 1] = k;
            for i in 1..m {
                a[i - 1] = prev[i - 1] - k * prev[m - 1 - i];
            }
        }
        let n = 400_000usize;
        let mut s = vec![0.0f64; n];
        for t in 0..n {
            let mut y = rng.gen_range(-1.0..1.0f64);
            for i in 1..=16 {
                if t >= i {
                    y += a[i - 1] * s[t - i];
                }
            }
            s[t] = y;
        }
        let mut r = [0.0f64; 17];
        for lag in 0..17 {
            let mut acc = 0.0;
            for t in lag..n {
                acc += s[t] * s[t - lag];
            }
            r[lag] = acc / n as f64;
        }
        let lpc = levinson_durbin(&r).unwrap();
        for i in 0..16 {
            assert!(
                (lpc.coeffs()[i] - a[i]).abs() < 1e-2,
                "coeff {i}: {} vs {}",
                lpc.coeffs()[i],
                a[i]
            );
        }
    }
}
