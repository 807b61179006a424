//! 8-bit μ-law companding (μ = 255, continuous variant).
//!
//! Code 128 is exact zero. The negative half uses a slope of 128 codes per
//! unit log-magnitude and the positive half 127, so that both full-scale
//! amplitudes land exactly on codes 0 and 255 and `encode(decode(c)) == c`
//! holds for every one of the 256 codes. Outputs are not bit-compatible
//! with G.711 segmented μ-law.

use crate::error::{Error, Result};
use crate::scalar::Real;

const LN_256: f64 = 5.545177444479562; // ln(256)

/// A μ-law code in `[0, 255]`; 128 decodes to exactly 0.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MuLawIndex(u8);

impl MuLawIndex {
    pub const ZERO: MuLawIndex = MuLawIndex(128);

    pub const fn new(code: u8) -> Self {
        MuLawIndex(code)
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    /// Index into 256-entry lookup tables.
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u8> for MuLawIndex {
    fn from(code: u8) -> Self {
        MuLawIndex(code)
    }
}

/// Compands an amplitude to its 8-bit μ-law code.
///
/// Magnitudes above 1.0 saturate; the mapping is monotone non-decreasing.
pub fn mulaw_encode<S: Real>(x: S) -> Result<MuLawIndex> {
    if !x.is_finite() {
        return Err(Error::invalid("mu-law encode: non-finite input"));
    }
    let x = x.to_f64c();
    let mag = x.abs().min(1.0);
    let y = (1.0 + 255.0 * mag).ln() / LN_256;
    let code = if x > 0.0 {
        (128.0 + 127.0 * y).round()
    } else if x < 0.0 {
        (128.0 - 128.0 * y).round()
    } else {
        128.0
    };
    Ok(MuLawIndex(code.clamp(0.0, 255.0) as u8))
}

/// Expands a μ-law code back to a linear amplitude in `[-1, 1]`.
pub fn mulaw_decode<S: Real>(code: MuLawIndex) -> S {
    let c = code.0 as f64;
    let v = if c > 128.0 {
        (256f64.powf((c - 128.0) / 127.0) - 1.0) / 255.0
    } else if c < 128.0 {
        -(256f64.powf((128.0 - c) / 128.0) - 1.0) / 255.0
    } else {
        0.0
    };
    S::from_f64c(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_center_code() {
        assert_eq!(mulaw_encode(0.0f32).unwrap().code(), 128);
        assert_eq!(mulaw_encode(0.0f64).unwrap().code(), 128);
    }

    #[test]
    fn full_scale_saturates() {
        assert_eq!(mulaw_encode(1.0f64).unwrap().code(), 255);
        assert_eq!(mulaw_encode(-1.0f64).unwrap().code(), 0);
        assert_eq!(mulaw_encode(2.5f64).unwrap().code(), 255);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(mulaw_encode(f64::NAN).is_err());
        assert!(mulaw_encode(f32::INFINITY).is_err());
    }

    #[test]
    fn decode_center_is_exact_zero() {
        assert_eq!(mulaw_decode::<f64>(MuLawIndex::ZERO), 0.0);
    }

    #[test]
    fn exhaustive_code_round_trip() {
        for c in 0..=255u8 {
            let x: f64 = mulaw_decode(MuLawIndex::new(c));
            assert_eq!(mulaw_encode(x).unwrap().code(), c, "code {c}");
            let xf: f32 = mulaw_decode(MuLawIndex::new(c));
            assert_eq!(mulaw_encode(xf).unwrap().code(), c, "f32 code {c}");
        }
    }

    #[test]
    fn encode_monotone_over_grid() {
        let mut prev = 0u8;
        let mut first = true;
        let mut x = -1.0f64;
        while x <= 1.0 + 1e-12 {
            let c = mulaw_encode(x).unwrap().code();
            if !first {
                assert!(c >= prev, "decreased at x={x}");
            }
            prev = c;
            first = false;
            x += 1e-3;
        }
    }

    #[test]
    fn quantization_error_bounded() {
        // Bound from the widest quantization cell of this mapping.
        let mut x = -1.0f64;
        while x <= 1.0 + 1e-12 {
            let c = mulaw_encode(x).unwrap();
            let y: f64 = mulaw_decode(c);
            assert!((y - x).abs() <= 0.031, "x={x} err={}", (y - x).abs());
            x += 1e-4;
        }
    }

    #[test]
    fn decode_antisymmetric_within_one_step() {
        // Widest decode step.
        let step = (0..255u8)
            .map(|c| {
                (mulaw_decode::<f64>(MuLawIndex::new(c + 1)) - mulaw_decode::<f64>(MuLawIndex::new(c))).abs()
            })
            .fold(0.0f64, f64::max);
        for k in 1..=127u8 {
            let p: f64 = mulaw_decode(MuLawIndex::new(128 + k));
            let n: f64 = mulaw_decode(MuLawIndex::new(128 - k));
            // The asymmetric slopes stretch the deviation to at most ~1.05
            // steps at full scale.
            assert!((p + n).abs() <= 1.05 * step, "k={k} dev={}", (p + n).abs());
        }
    }
}
