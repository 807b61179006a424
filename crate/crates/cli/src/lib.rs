//! File-format plumbing shared by the `vocoder` binary and its tests:
//! WAV (PCM 16-bit mono 16 kHz), the FMTX feature matrix, and atomic
//! writes.

pub mod fmtx;
pub mod util;
pub mod wav;
