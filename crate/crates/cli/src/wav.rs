//! Minimal RIFF/WAVE I/O for the one format this tool speaks:
//! PCM 16-bit, mono, 16 kHz. The reader names the offending field when it
//! rejects anything else.

use std::path::Path;

use vocoder_core::{Error, Result, SAMPLE_RATE};

use crate::util::write_atomic;

const PCM_SCALE: f32 = 32768.0;

/// Encodes samples (clipped to `[-1, 1]`) as a 16-bit mono 16 kHz WAV and
/// writes it atomically.
pub fn write_wav(path: &Path, samples: &[f32]) -> Result<()> {
    let data_len = samples.len() * 2;
    let mut buf = Vec::with_capacity(44 + data_len);
    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    buf.extend_from_slice(b"WAVE");
    buf.extend_from_slice(b"fmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes()); // PCM
    buf.extend_from_slice(&1u16.to_le_bytes()); // mono
    buf.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    buf.extend_from_slice(&(SAMPLE_RATE * 2).to_le_bytes()); // byte rate
    buf.extend_from_slice(&2u16.to_le_bytes()); // block align
    buf.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16;
        buf.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(path, &buf)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::format(self.pos as u64, format!("truncated {what}")));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Parses a WAV file, accepting only PCM 16-bit mono at 16 kHz.
pub fn read_wav(path: &Path) -> Result<Vec<f32>> {
    let data = std::fs::read(path)?;
    let mut r = Reader { data: &data, pos: 0 };
    if r.take(4, "RIFF tag")? != b"RIFF" {
        return Err(Error::format(0, "not a RIFF file"));
    }
    r.u32("RIFF size")?;
    if r.take(4, "WAVE tag")? != b"WAVE" {
        return Err(Error::format(8, "not a WAVE file"));
    }

    let mut fmt_seen = false;
    loop {
        let chunk_off = r.pos as u64;
        let id: [u8; 4] = r.take(4, "chunk id")?.try_into().unwrap();
        let size = r.u32("chunk size")? as usize;
        match &id {
            b"fmt " => {
                let audio_format = r.u16("audio format")?;
                if audio_format != 1 {
                    return Err(Error::format(
                        chunk_off,
                        format!("audio format {audio_format} unsupported (PCM only)"),
                    ));
                }
                let channels = r.u16("channel count")?;
                if channels != 1 {
                    return Err(Error::format(
                        chunk_off,
                        format!("channel count {channels} unsupported (mono only)"),
                    ));
                }
                let rate = r.u32("sample rate")?;
                if rate != SAMPLE_RATE {
                    return Err(Error::format(
                        chunk_off,
                        format!("sample rate {rate} unsupported ({SAMPLE_RATE} only)"),
                    ));
                }
                r.u32("byte rate")?;
                r.u16("block align")?;
                let bits = r.u16("bits per sample")?;
                if bits != 16 {
                    return Err(Error::format(
                        chunk_off,
                        format!("bits per sample {bits} unsupported (16 only)"),
                    ));
                }
                // Skip any fmt extension bytes.
                if size > 16 {
                    r.take(size - 16, "fmt extension")?;
                }
                fmt_seen = true;
            }
            b"data" => {
                if !fmt_seen {
                    return Err(Error::format(chunk_off, "data chunk before fmt chunk"));
                }
                let raw = r.take(size, "sample data")?;
                return Ok(raw
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]) as f32 / PCM_SCALE)
                    .collect());
            }
            _ => {
                // Unknown chunks (LIST, fact, ...) are skipped, padded to even.
                r.take(size + size % 2, "chunk body")?;
            }
        }
    }
}
