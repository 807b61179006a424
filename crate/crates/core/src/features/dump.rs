//! OPNV feature-dump format: the bridge carrying decoder-side parameters
//! into the engine in place of in-tree bitstream decoding.
//!
//! Little-endian layout: magic `OPNV`, version `u32 = 1`, `frame_count
//! u32`, then per frame 16 × f32 LPC, 5 × f32 LTP gains, f32 pitch period,
//! 160 × i16 decoded PCM (408 bytes per record).

use std::io::{Read, Write};

use crate::dsp::{LpcCoeffs, LPC_ORDER};
use crate::error::{Error, Result};
use crate::features::{FrameFeatures, NUM_LTP_TAPS};
use crate::scalar::Real;
use crate::FRAME_SIZE;

pub const OPNV_MAGIC: [u8; 4] = *b"OPNV";
pub const OPNV_VERSION: u32 = 1;
/// 16*4 + 5*4 + 4 + 160*2.
pub const OPNV_RECORD_SIZE: usize = 408;

const PCM_SCALE: f64 = 32768.0;

struct Reader<R: Read> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                return Err(Error::format(
                    start + filled as u64,
                    format!("truncated while reading {what}"),
                ));
            }
            filled += n;
            self.offset += n as u64;
        }
        Ok(())
    }

    fn read_u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_f32(&mut self, what: &str) -> Result<f32> {
        let at = self.offset;
        let mut b = [0u8; 4];
        self.read_exact(&mut b, what)?;
        let v = f32::from_le_bytes(b);
        if !v.is_finite() {
            return Err(Error::format(at, format!("non-finite {what}")));
        }
        Ok(v)
    }

    fn read_i16(&mut self, what: &str) -> Result<i16> {
        let mut b = [0u8; 2];
        self.read_exact(&mut b, what)?;
        Ok(i16::from_le_bytes(b))
    }
}

/// Parses an OPNV stream into frames, in file order.
pub fn load_feature_dump<S: Real, R: Read>(source: R) -> Result<Vec<FrameFeatures<S>>> {
    let mut r = Reader {
        inner: source,
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic, "magic")?;
    if magic != OPNV_MAGIC {
        return Err(Error::format(0, "bad magic, expected \"OPNV\""));
    }
    let version = r.read_u32("version")?;
    if version != OPNV_VERSION {
        return Err(Error::format(
            4,
            format!("unsupported OPNV version {version}"),
        ));
    }
    let frame_count = r.read_u32("frame count")? as usize;
    let mut frames = Vec::with_capacity(frame_count.min(1 << 20));
    for f in 0..frame_count {
        let mut a = [S::zero(); LPC_ORDER];
        for (i, c) in a.iter_mut().enumerate() {
            *c = S::from_f64c(r.read_f32(&format!("frame {f} lpc[{i}]"))? as f64);
        }
        let mut ltp = [S::zero(); NUM_LTP_TAPS];
        for (i, g) in ltp.iter_mut().enumerate() {
            *g = S::from_f64c(r.read_f32(&format!("frame {f} ltp[{i}]"))? as f64);
        }
        let pitch = S::from_f64c(r.read_f32(&format!("frame {f} pitch period"))? as f64);
        let mut decoded = Vec::with_capacity(FRAME_SIZE);
        for i in 0..FRAME_SIZE {
            let pcm = r.read_i16(&format!("frame {f} pcm[{i}]"))?;
            decoded.push(S::from_f64c(pcm as f64 / PCM_SCALE));
        }
        frames.push(FrameFeatures::new(LpcCoeffs::new(a)?, ltp, pitch, decoded)?);
    }
    Ok(frames)
}

/// Serializes frames to the OPNV format; the output parses back
/// identically via [`load_feature_dump`]. Returns the byte count.
pub fn write_feature_dump<S: Real, W: Write>(
    frames: &[FrameFeatures<S>],
    mut sink: W,
) -> Result<u64> {
    let mut written = 0u64;
    let mut put = |sink: &mut W, bytes: &[u8]| -> Result<()> {
        sink.write_all(bytes)?;
        written += bytes.len() as u64;
        Ok(())
    };
    put(&mut sink, &OPNV_MAGIC)?;
    put(&mut sink, &OPNV_VERSION.to_le_bytes())?;
    let count = u32::try_from(frames.len())
        .map_err(|_| Error::invalid("too many frames for OPNV header"))?;
    put(&mut sink, &count.to_le_bytes())?;
    for frame in frames {
        for &c in frame.lpc_q.coeffs() {
            put(&mut sink, &(c.to_f64c() as f32).to_le_bytes())?;
        }
        for &g in &frame.ltp_gains {
            put(&mut sink, &(g.to_f64c() as f32).to_le_bytes())?;
        }
        put(
            &mut sink,
            &(frame.pitch_period().to_f64c() as f32).to_le_bytes(),
        )?;
        for &s in frame.decoded() {
            let pcm = (s.to_f64c() * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
            put(&mut sink, &pcm.to_le_bytes())?;
        }
    }
    Ok(written)
}
