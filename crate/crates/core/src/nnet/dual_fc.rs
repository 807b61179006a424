//! Dual fully-connected output layer:
//! `a1 ∘ tanh(W1 x) + a2 ∘ tanh(W2 x)` over the 256 μ-law classes.

use crate::error::{Error, Result};
use crate::nnet::dense::DenseMatrix;
use crate::scalar::Real;

/// Number of output classes (μ-law codes).
pub const NUM_CLASSES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct DualFcWeights<S: Real> {
    pub w1: DenseMatrix<S>,
    pub w2: DenseMatrix<S>,
    pub a1: Vec<S>,
    pub a2: Vec<S>,
}

impl<S: Real> DualFcWeights<S> {
    pub fn validate(&self) -> Result<()> {
        for (w, a) in [(&self.w1, &self.a1), (&self.w2, &self.a2)] {
            if w.rows() != NUM_CLASSES || a.len() != NUM_CLASSES {
                return Err(Error::ShapeMismatch("dual_fc output width".into()));
            }
            if w.cols() != self.w1.cols() {
                return Err(Error::ShapeMismatch("dual_fc input width".into()));
            }
        }
        Ok(())
    }
}

/// Evaluates the layer, returning 256 logits.
pub fn dual_fc<S: Real>(x: &[S], w: &DualFcWeights<S>) -> Result<Vec<S>> {
    let y1 = w.w1.matvec(x)?;
    let y2 = w.w2.matvec(x)?;
    Ok((0..NUM_CLASSES)
        .map(|i| w.a1[i] * y1[i].tanh() + w.a2[i] * y2[i].tanh())
        .collect())
}
