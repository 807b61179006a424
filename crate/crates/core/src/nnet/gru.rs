//! The fused sample-rate GRU cell (GRU_A) with precomputed embedding
//! contribution tables and per-frame conditioning contributions, plus the
//! small dense GRU_B.
//!
//! GRU_A gate equations (σ sigmoid, τ tanh, ∘ elementwise):
//!
//! ```text
//! u_t = σ(W_u h_{t-1} + v_s + v_y + v_e + g_u)
//! r_t = σ(W_r h_{t-1} + v_s + v_y + v_e + g_r)
//! h~_t = τ(r_t ∘ (W_h h_{t-1}) + v_s + v_y + v_e + g_h)
//! h_t = u_t ∘ h_{t-1} + (1 - u_t) ∘ h~_t
//! ```
//!
//! where each `v` is a 256-entry lookup by the μ-law index of the previous
//! sample, the current prediction, or the previous excitation, and the `g`
//! terms (which carry the biases) are computed once per frame.

use crate::dsp::MuLawIndex;
use crate::error::{Error, Result};
use crate::nnet::dense::DenseMatrix;
use crate::nnet::sparse::BlockSparseMatrix;
use crate::scalar::Real;

/// 256-entry lookup table of precomputed per-index gate contributions
/// (one folded `embedding_row · input_weight_matrix` product per index).
#[derive(Debug, Clone, PartialEq)]
pub struct ContribTable<S: Real> {
    width: usize,
    data: Vec<S>, // 256 * width, row-major by index
}

impl<S: Real> ContribTable<S> {
    pub fn new(width: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != 256 * width {
            return Err(Error::ShapeMismatch(format!(
                "contribution table needs {} values, got {}",
                256 * width,
                data.len()
            )));
        }
        Ok(Self { width, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, index: MuLawIndex) -> &[S] {
        let i = index.index();
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

/// The nine GRU_A lookup tables: gates (u, r, h) × inputs (s, y, e).
#[derive(Debug, Clone, PartialEq)]
pub struct GruTables<S: Real> {
    pub u_s: ContribTable<S>,
    pub u_y: ContribTable<S>,
    pub u_e: ContribTable<S>,
    pub r_s: ContribTable<S>,
    pub r_y: ContribTable<S>,
    pub r_e: ContribTable<S>,
    pub h_s: ContribTable<S>,
    pub h_y: ContribTable<S>,
    pub h_e: ContribTable<S>,
}

impl<S: Real> GruTables<S> {
    pub fn all(&self) -> [&ContribTable<S>; 9] {
        [
            &self.u_s, &self.u_y, &self.u_e, &self.r_s, &self.r_y, &self.r_e, &self.h_s,
            &self.h_y, &self.h_e,
        ]
    }
}

/// Per-frame contributions of the frame rate network, recomputed once per
/// 160-sample frame. The `g_*` vectors feed GRU_A (width `n_a`), the
/// `gb_*` vectors carry the frame vector's precomputed input contribution
/// to GRU_B (width `n_b`). Biases are folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameContrib<S: Real> {
    pub g_u: Vec<S>,
    pub g_r: Vec<S>,
    pub g_h: Vec<S>,
    pub gb_u: Vec<S>,
    pub gb_r: Vec<S>,
    pub gb_h: Vec<S>,
}

impl<S: Real> FrameContrib<S> {
    pub fn zeros(n_a: usize, n_b: usize) -> Self {
        Self {
            g_u: vec![S::zero(); n_a],
            g_r: vec![S::zero(); n_a],
            g_h: vec![S::zero(); n_a],
            gb_u: vec![S::zero(); n_b],
            gb_r: vec![S::zero(); n_b],
            gb_h: vec![S::zero(); n_b],
        }
    }
}

/// Recurrent hidden state; components stay in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GruState<S: Real> {
    pub h: Vec<S>,
}

impl<S: Real> GruState<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            h: vec![S::zero(); n],
        }
    }
}

/// GRU_A parameters: the three block-sparse recurrent matrices and the
/// embedding contribution tables.
#[derive(Debug, Clone, PartialEq)]
pub struct GruAWeights<S: Real> {
    pub w_u: BlockSparseMatrix<S>,
    pub w_r: BlockSparseMatrix<S>,
    pub w_h: BlockSparseMatrix<S>,
    pub tables: GruTables<S>,
}

impl<S: Real> GruAWeights<S> {
    pub fn units(&self) -> usize {
        self.w_u.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.units();
        for m in [&self.w_u, &self.w_r, &self.w_h] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::ShapeMismatch("GRU_A recurrent matrix shape".into()));
            }
        }
        for t in self.tables.all() {
            if t.width() != n {
                return Err(Error::ShapeMismatch("GRU_A table width".into()));
            }
        }
        Ok(())
    }
}

/// GRU_B parameters. The input is the concatenation of the GRU_A hidden
/// state and the frame vector; the frame-vector half is precomputed per
/// frame into [`FrameContrib::gb_u`] etc., so only the `h_a` input weights
/// and the recurrent weights remain per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GruBWeights<S: Real> {
    /// Input weights for the GRU_A output, `3*n_b x n_a` (u, r, h stacked).
    pub w_in: DenseMatrix<S>,
    /// Recurrent weights, `3*n_b x n_b` (u, r, h stacked).
    pub w_rec: DenseMatrix<S>,
}

impl<S: Real> GruBWeights<S> {
    pub fn units(&self) -> usize {
        self.w_rec.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.units();
        if self.w_rec.rows() != 3 * n || self.w_in.rows() != 3 * n {
            return Err(Error::ShapeMismatch("GRU_B stacked gate rows".into()));
        }
        Ok(())
    }
}

fn sigmoid<S: Real>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

/// One sample-rate step of GRU_A.
///
/// Scratch-free aside from three matvec buffers allocated per call;
/// `state.h` is updated in place.
pub fn gru_a_step<S: Real>(
    state: &mut GruState<S>,
    s_prev: MuLawIndex,
    y_t: MuLawIndex,
    e_prev: MuLawIndex,
    frame: &FrameContrib<S>,
    weights: &GruAWeights<S>,
) {
    let n = weights.units();
    debug_assert_eq!(state.h.len(), n);

    let mut pre_u = vec![S::zero(); n];
    let mut pre_r = vec![S::zero(); n];
    let mut pre_h = vec![S::zero(); n];
    weights.w_u.matvec_into(&state.h, &mut pre_u);
    weights.w_r.matvec_into(&state.h, &mut pre_r);
    weights.w_h.matvec_into(&state.h, &mut pre_h);

    let t = &weights.tables;
    for i in 0..n {
        pre_u[i] += t.u_s.row(s_prev)[i] + t.u_y.row(y_t)[i] + t.u_e.row(e_prev)[i] + frame.g_u[i];
        pre_r[i] += t.r_s.row(s_prev)[i] + t.r_y.row(y_t)[i] + t.r_e.row(e_prev)[i] + frame.g_r[i];
    }
    for i in 0..n {
        let u = sigmoid(pre_u[i]);
        let r = sigmoid(pre_r[i]);
        // Reset gate applies to the recurrent term only.
        let cand = (r * pre_h[i]
            + t.h_s.row(s_prev)[i]
            + t.h_y.row(y_t)[i]
            + t.h_e.row(e_prev)[i]
            + frame.g_h[i])
            .tanh();
        state.h[i] = u * state.h[i] + (S::one() - u) * cand;
    }
}

/// One step of the dense GRU_B, fed by the GRU_A output and the per-frame
/// precomputed frame-vector contribution. Same gate conventions as GRU_A.
pub fn gru_b_step<S: Real>(
    state: &mut GruState<S>,
    h_a: &[S],
    frame: &FrameContrib<S>,
    weights: &GruBWeights<S>,
) -> Result<()> {
    let n = weights.units();
    debug_assert_eq!(state.h.len(), n);
    if h_a.len() != weights.w_in.cols() {
        return Err(Error::ShapeMismatch(format!(
            "GRU_B input: expected {}, got {}",
            weights.w_in.cols(),
            h_a.len()
        )));
    }
    let dot = |row: &[S], x: &[S]| -> S {
        let mut acc = S::zero();
        for (a, b) in row.iter().zip(x) {
            acc += *a * *b;
        }
        acc
    };
    // All gates read the pre-update hidden state. The reset gate scales
    // only the recurrent candidate term, matching GRU_A.
    let mut u_g = vec![S::zero(); n];
    let mut cand = vec![S::zero(); n];
    for i in 0..n {
        let pre_u = dot(weights.w_in.row(i), h_a) + dot(weights.w_rec.row(i), &state.h)
            + frame.gb_u[i];
        let pre_r = dot(weights.w_in.row(n + i), h_a)
            + dot(weights.w_rec.row(n + i), &state.h)
            + frame.gb_r[i];
        let rec_h = dot(weights.w_rec.row(2 * n + i), &state.h);
        let in_h = dot(weights.w_in.row(2 * n + i), h_a);
        u_g[i] = sigmoid(pre_u);
        let r = sigmoid(pre_r);
        cand[i] = (r * rec_h + in_h + frame.gb_h[i]).tanh();
    }
    for i in 0..n {
        state.h[i] = u_g[i] * state.h[i] + (S::one() - u_g[i]) * cand[i];
    }
    Ok(())
}
