//! Frame rate network: two temporal convolutions (kernel 3) over the
//! current and two past conditioning vectors, two dense tanh layers, and
//! the per-gate projections whose outputs are held constant through each
//! 160-sample frame.

use crate::error::{Error, Result};
use crate::features::{ConditioningVector, NUM_FEATURES};
use crate::nnet::dense::DenseMatrix;
use crate::nnet::gru::FrameContrib;
use crate::scalar::Real;

/// Width of the frame vector `f`.
pub const FRAME_VECTOR_DIM: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRateWeights<S: Real> {
    /// Kernel-3 convolution over conditioning vectors: `128 x (3*38)`.
    pub conv1_w: DenseMatrix<S>,
    pub conv1_b: Vec<S>,
    /// Kernel-3 convolution over conv1 outputs: `128 x (3*128)`.
    pub conv2_w: DenseMatrix<S>,
    pub conv2_b: Vec<S>,
    pub dense1_w: DenseMatrix<S>,
    pub dense1_b: Vec<S>,
    pub dense2_w: DenseMatrix<S>,
    pub dense2_b: Vec<S>,
    /// Per-gate GRU_A projections, `3*n_a x 128` with `3*n_a` biases
    /// (the biases double as the GRU_A gate biases).
    pub g_proj_w: DenseMatrix<S>,
    pub g_proj_b: Vec<S>,
    /// Per-gate GRU_B frame contributions, `3*n_b x 128` plus biases.
    pub gb_proj_w: DenseMatrix<S>,
    pub gb_proj_b: Vec<S>,
}

impl<S: Real> FrameRateWeights<S> {
    pub fn validate(&self) -> Result<()> {
        let d = FRAME_VECTOR_DIM;
        if self.conv1_w.rows() != d || self.conv1_w.cols() != 3 * NUM_FEATURES {
            return Err(Error::ShapeMismatch("frame-rate conv1 shape".into()));
        }
        if self.conv2_w.rows() != d || self.conv2_w.cols() != 3 * d {
            return Err(Error::ShapeMismatch("frame-rate conv2 shape".into()));
        }
        for (w, b, name) in [
            (&self.dense1_w, &self.dense1_b, "dense1"),
            (&self.dense2_w, &self.dense2_b, "dense2"),
        ] {
            if w.rows() != d || w.cols() != d || b.len() != d {
                return Err(Error::ShapeMismatch(format!("frame-rate {name} shape")));
            }
        }
        for (w, b, name) in [
            (&self.g_proj_w, &self.g_proj_b, "g projection"),
            (&self.gb_proj_w, &self.gb_proj_b, "gb projection"),
        ] {
            if w.cols() != d || w.rows() % 3 != 0 || b.len() != w.rows() {
                return Err(Error::ShapeMismatch(format!("frame-rate {name} shape")));
            }
        }
        if self.conv1_b.len() != d || self.conv2_b.len() != d {
            return Err(Error::ShapeMismatch("frame-rate conv bias".into()));
        }
        Ok(())
    }

    pub fn gru_a_units(&self) -> usize {
        self.g_proj_w.rows() / 3
    }

    pub fn gru_b_units(&self) -> usize {
        self.gb_proj_w.rows() / 3
    }
}

fn affine_tanh<S: Real>(w: &DenseMatrix<S>, b: &[S], x: &[S]) -> Result<Vec<S>> {
    let mut y = w.matvec(x)?;
    for (v, &bias) in y.iter_mut().zip(b) {
        *v = (*v + bias).tanh();
    }
    Ok(y)
}

/// Evaluates the frame rate network for one frame.
///
/// `history` holds the previous two conditioning vectors, oldest first.
/// The receptive field is the current plus two past frames; the second
/// convolution sees conv1 evaluated at three shifted windows with
/// edge-replicated padding of the oldest frame.
pub fn frame_rate_network<S: Real>(
    c: &ConditioningVector<S>,
    history: &[ConditioningVector<S>; 2],
    weights: &FrameRateWeights<S>,
) -> Result<(FrameContrib<S>, Vec<S>)> {
    let p2 = history[0].flatten();
    let p1 = history[1].flatten();
    let cur = c.flatten();

    let window = |a: &[S], b: &[S], d: &[S]| -> Vec<S> {
        let mut x = Vec::with_capacity(3 * NUM_FEATURES);
        x.extend_from_slice(a);
        x.extend_from_slice(b);
        x.extend_from_slice(d);
        x
    };
    let o0 = affine_tanh(&weights.conv1_w, &weights.conv1_b, &window(&p2, &p2, &p2))?;
    let o1 = affine_tanh(&weights.conv1_w, &weights.conv1_b, &window(&p2, &p2, &p1))?;
    let o2 = affine_tanh(&weights.conv1_w, &weights.conv1_b, &window(&p2, &p1, &cur))?;

    let mut stacked = Vec::with_capacity(3 * FRAME_VECTOR_DIM);
    stacked.extend_from_slice(&o0);
    stacked.extend_from_slice(&o1);
    stacked.extend_from_slice(&o2);
    let f1 = affine_tanh(&weights.conv2_w, &weights.conv2_b, &stacked)?;
    let f2 = affine_tanh(&weights.dense1_w, &weights.dense1_b, &f1)?;
    let f = affine_tanh(&weights.dense2_w, &weights.dense2_b, &f2)?;

    let mut g = weights.g_proj_w.matvec(&f)?;
    for (v, &b) in g.iter_mut().zip(&weights.g_proj_b) {
        *v += b;
    }
    let mut gb = weights.gb_proj_w.matvec(&f)?;
    for (v, &b) in gb.iter_mut().zip(&weights.gb_proj_b) {
        *v += b;
    }
    let n_a = weights.gru_a_units();
    let n_b = weights.gru_b_units();
    let contrib = FrameContrib {
        g_u: g[..n_a].to_vec(),
        g_r: g[n_a..2 * n_a].to_vec(),
        g_h: g[2 * n_a..].to_vec(),
        gb_u: gb[..n_b].to_vec(),
        gb_r: gb[n_b..2 * n_b].to_vec(),
        gb_h: gb[2 * n_b..].to_vec(),
    };
    Ok((contrib, f))
}
