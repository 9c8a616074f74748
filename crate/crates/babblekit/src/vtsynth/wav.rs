//! Minimal 16-bit PCM mono WAV reading and writing.

use super::waveguide::AudioBuffer;
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Writes audio as 16-bit little-endian PCM mono.
pub fn write_wav(path: &Path, audio: &AudioBuffer) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    let n = audio.samples.len() as u32;
    let rate = audio.sample_rate.round() as u32;
    let data_bytes = n * 2;

    f.write_all(b"RIFF")?;
    f.write_all(&(36 + data_bytes).to_le_bytes())?;
    f.write_all(b"WAVE")?;
    f.write_all(b"fmt ")?;
    f.write_all(&16u32.to_le_bytes())?;
    f.write_all(&1u16.to_le_bytes())?; // PCM
    f.write_all(&1u16.to_le_bytes())?; // mono
    f.write_all(&rate.to_le_bytes())?;
    f.write_all(&(rate * 2).to_le_bytes())?; // byte rate
    f.write_all(&2u16.to_le_bytes())?; // block align
    f.write_all(&16u16.to_le_bytes())?; // bits per sample
    f.write_all(b"data")?;
    f.write_all(&data_bytes.to_le_bytes())?;
    let mut bytes = Vec::with_capacity(audio.samples.len() * 2);
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&bytes)?;
    Ok(())
}

/// Reads a 16-bit PCM mono WAV written by [`write_wav`] or a compatible
/// encoder.
pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 44 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Audio(format!("{}: not a RIFF/WAVE file", path.display())));
    }
    let mut pos = 12;
    let mut sample_rate = 0u32;
    let mut channels = 0u16;
    let mut bits = 0u16;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = &bytes[pos + 8..(pos + 8 + size).min(bytes.len())];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Audio("short fmt chunk".into()));
                }
                channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                sample_rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos += 8 + size + (size & 1);
    }
    let data = data.ok_or_else(|| Error::Audio("missing data chunk".into()))?;
    if channels != 1 || bits != 16 {
        return Err(Error::Audio(format!(
            "expected 16-bit mono, got {bits}-bit {channels}-channel"
        )));
    }
    let samples = data
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0)
        .collect();
    Ok(AudioBuffer {
        sample_rate: sample_rate as f64,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_samples_to_quantization() {
        let audio = AudioBuffer {
            sample_rate: 44_100.0,
            samples: (0..500).map(|i| (i as f64 * 0.031).sin() * 0.8).collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        write_wav(&path, &audio).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate, 44_100.0);
        assert_eq!(back.samples.len(), audio.samples.len());
        for (a, b) in audio.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() < 1.0 / 32000.0);
        }
    }
}
