//! First-order pre-emphasis `E(z) = 1 - alpha z^{-1}` and its inverse.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_alpha<S: Real>(alpha: S) -> Result<()> {
    if !(alpha >= S::zero() && alpha < S::one()) {
        return Err(Error::invalid(format!(
            "emphasis alpha must be in [0, 1), got {alpha:?}"
        )));
    }
    Ok(())
}

/// High-boost filter `out_t = in_t - alpha * in_{t-1}`.
///
/// `state` carries `in_{-1}` from the previous block; the updated state is
/// returned for streaming continuity.
pub fn preemphasis<S: Real>(signal: &[S], alpha: S, state: S) -> Result<(Vec<S>, S)> {
    check_alpha(alpha)?;
    let mut prev = state;
    let out = signal
        .iter()
        .map(|&x| {
            let y = x - alpha * prev;
            prev = x;
            y
        })
        .collect();
    Ok((out, prev))
}

/// Inverse filter `out_t = in_t + alpha * out_{t-1}`.
///
/// `state` carries `out_{-1}`; cascading after [`preemphasis`] with the same
/// alpha reconstructs the input up to accumulation error.
pub fn deemphasis<S: Real>(signal: &[S], alpha: S, state: S) -> Result<(Vec<S>, S)> {
    check_alpha(alpha)?;
    let mut prev = state;
    let out = signal
        .iter()
        .map(|&x| {
            let y = x + alpha * prev;
            prev = y;
            y
        })
        .collect();
    Ok((out, prev))
}
