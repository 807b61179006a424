//! Neural inference kernels: dense/block-sparse linear algebra, the fused
//! sample-rate GRU cell with precomputed embedding contribution tables, the
//! dual fully-connected output layer, temperature sampling, the frame rate
//! network, and the model container with its file format and FLOP model.

mod dense;
mod dual_fc;
mod frame_rate;
mod gru;
mod model;
mod sampling;
mod sparse;

pub use dense::DenseMatrix;
pub use dual_fc::{dual_fc, DualFcWeights, NUM_CLASSES};
pub use frame_rate::{frame_rate_network, FrameRateWeights, FRAME_VECTOR_DIM};
pub use gru::{
    gru_a_step, gru_b_step, ContribTable, FrameContrib, GruAWeights, GruBWeights, GruState,
    GruTables,
};
pub use model::{
    flop_count, load_model, random_model, save_model, FlopItem, FlopReport, ModelConfig,
    ModelWeights, MODEL_MAGIC, MODEL_VERSION,
};
pub use sampling::{sample_excitation, softmax, TemperatureConfig};
pub use sparse::{prune_to_blocks, BlockSparseMatrix, SparseBlock, BLOCK_ROWS};

/// Equivalent non-sparse unit count of a GRU with `n_a` units at
/// recurrent density `d`: `sqrt(d * n_a^2 + n_a)`.
pub fn equivalent_units(n_a: usize, d: f64) -> f64 {
    assert!(n_a > 0, "unit count must be positive");
    assert!(d > 0.0 && d <= 1.0, "density must be in (0, 1]");
    (d * (n_a * n_a) as f64 + n_a as f64).sqrt()
}
