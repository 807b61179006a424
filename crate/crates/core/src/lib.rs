//! Neural vocoder engine re-synthesizing wideband speech from codec-side
//! parameters.
//!
//! The crate is organized around four subsystems:
//!
//! - [`dsp`]: scalar/vector signal primitives (μ-law companding, emphasis
//!   filters, linear prediction, Levinson-Durbin, band/cepstral transforms
//!   on a fixed 320-point analysis grid).
//! - [`features`]: ingestion of decoder-side parameters (OPNV dump format),
//!   the 38-dimensional conditioning vector, per-frame LPC derivation, and
//!   data-augmentation transforms.
//! - [`nnet`]: inference kernels — block-sparse matvec, the fused
//!   sample-rate GRU cell with precomputed embedding contribution tables,
//!   the dual fully-connected output layer, temperature sampling, the frame
//!   rate network, model (de)serialization and the analytic FLOP model.
//! - [`vocoder`]: the autoregressive synthesis loop tying everything
//!   together, including a teacher-forced analysis mode.
//!
//! All numeric kernels are generic over the scalar type via [`Real`]
//! (`f32` or `f64`); the wire formats (feature dumps, model files, PCM)
//! are fixed-width little-endian and independent of the in-memory scalar.

pub mod dsp;
pub mod error;
pub mod features;
pub mod nnet;
pub mod scalar;
pub mod vocoder;

pub use error::{Error, Result};
pub use scalar::Real;

/// Scalar type used by the standard f32 inference path.
pub type Sample = f32;

/// Audio buffer at the default inference precision.
pub type AudioBufferF32 = dsp::AudioBuffer<f32>;
/// Double-precision audio buffer (oracle/analysis paths).
pub type AudioBufferF64 = dsp::AudioBuffer<f64>;
/// Model weights at the default inference precision.
pub type ModelWeightsF32 = nnet::ModelWeights<f32>;
/// Conditioning vector at the default inference precision.
pub type ConditioningVectorF32 = features::ConditioningVector<f32>;
/// Synthesis state at the default inference precision.
pub type SynthStateF32 = vocoder::SynthState<f32>;

/// Sample rate of every signal handled by this crate, in Hz.
pub const SAMPLE_RATE: u32 = 16_000;
/// Samples per synthesis frame (10 ms at 16 kHz).
pub const FRAME_SIZE: usize = 160;
