//! Minimal mono 16-bit PCM WAV reader/writer.
//!
//! Samples are mapped to `[-1, 1)` by dividing by 32768. Anything that is not
//! a mono 16-bit PCM RIFF/WAVE file is rejected as malformed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::AudioClip;

fn bad(detail: impl Into<String>) -> Error {
    Error::MalformedWav(detail.into())
}

/// Parse a mono 16-bit PCM WAV stream into an audio clip.
pub fn read_wav<R: Read>(mut input: R) -> Result<AudioClip> {
    let mut riff = [0u8; 12];
    input.read_exact(&mut riff).map_err(|_| bad("truncated RIFF header"))?;
    if &riff[0..4] != b"RIFF" || &riff[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }

    let mut sample_rate = None;
    let mut data: Option<Vec<u8>> = None;

    loop {
        let mut chunk_header = [0u8; 8];
        match input.read_exact(&mut chunk_header) {
            Ok(()) => {}
            Err(_) => break,
        }
        let id = &chunk_header[0..4];
        let size = u32::from_le_bytes(chunk_header[4..8].try_into().unwrap()) as usize;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(bad("fmt chunk too small"));
                }
                let mut fmt = vec![0u8; size];
                input.read_exact(&mut fmt).map_err(|_| bad("truncated fmt chunk"))?;
                let audio_format = u16::from_le_bytes(fmt[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(fmt[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(fmt[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(fmt[14..16].try_into().unwrap());
                if audio_format != 1 {
                    return Err(bad(format!("unsupported format tag {audio_format}, want PCM")));
                }
                if channels != 1 {
                    return Err(bad(format!("{channels} channels, want mono")));
                }
                if bits != 16 {
                    return Err(bad(format!("{bits}-bit samples, want 16")));
                }
                if rate == 0 {
                    return Err(bad("zero sample rate"));
                }
                sample_rate = Some(rate);
            }
            b"data" => {
                let mut payload = vec![0u8; size];
                input.read_exact(&mut payload).map_err(|_| bad("truncated data chunk"))?;
                data = Some(payload);
            }
            _ => {
                // skip unknown chunk (word-aligned)
                let skip = size + (size & 1);
                let mut sink = vec![0u8; skip];
                input.read_exact(&mut sink).map_err(|_| bad("truncated chunk"))?;
            }
        }
        if sample_rate.is_some() && data.is_some() {
            break;
        }
    }

    let rate = sample_rate.ok_or_else(|| bad("missing fmt chunk"))?;
    let payload = data.ok_or_else(|| bad("missing data chunk"))?;
    if payload.len() % 2 != 0 {
        return Err(bad("odd data chunk length"));
    }
    let samples: Vec<f64> = payload
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect();
    if samples.is_empty() {
        return Err(bad("empty data chunk"));
    }
    AudioClip::new(samples, rate)
}

pub fn read_wav_file<P: AsRef<Path>>(path: P) -> Result<AudioClip> {
    read_wav(BufReader::new(File::open(path)?))
}

/// Write a clip as mono 16-bit PCM. Samples are quantized by rounding
/// `x·32768` and saturating to the i16 range; the number of clipped samples
/// is returned.
pub fn write_wav<W: Write>(mut out: W, clip: &AudioClip) -> Result<usize> {
    let n = clip.len();
    let data_len = (n * 2) as u32;
    out.write_all(b"RIFF")?;
    out.write_all(&(36 + data_len).to_le_bytes())?;
    out.write_all(b"WAVE")?;
    out.write_all(b"fmt ")?;
    out.write_all(&16u32.to_le_bytes())?;
    out.write_all(&1u16.to_le_bytes())?; // PCM
    out.write_all(&1u16.to_le_bytes())?; // mono
    out.write_all(&clip.sample_rate().to_le_bytes())?;
    out.write_all(&(clip.sample_rate() * 2).to_le_bytes())?; // byte rate
    out.write_all(&2u16.to_le_bytes())?; // block align
    out.write_all(&16u16.to_le_bytes())?; // bits per sample
    out.write_all(b"data")?;
    out.write_all(&data_len.to_le_bytes())?;
    let mut clipped = 0;
    for &s in clip.samples() {
        let scaled = (s * 32768.0).round();
        let q = if scaled > i16::MAX as f64 {
            clipped += 1;
            i16::MAX
        } else if scaled < i16::MIN as f64 {
            clipped += 1;
            i16::MIN
        } else {
            scaled as i16
        };
        out.write_all(&q.to_le_bytes())?;
    }
    Ok(clipped)
}

pub fn write_wav_file<P: AsRef<Path>>(path: P, clip: &AudioClip) -> Result<usize> {
    let mut w = BufWriter::new(File::create(path)?);
    let clipped = write_wav(&mut w, clip)?;
    w.flush()?;
    Ok(clipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(samples: Vec<f64>, rate: u32) -> AudioClip {
        let clip = AudioClip::new(samples, rate).unwrap();
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &clip).unwrap();
        read_wav(&bytes[..]).unwrap()
    }

    #[test]
    fn round_trips_quantized_samples() {
        let samples = vec![0.0, 0.5, -0.5, 0.25, -1.0];
        let back = round_trip(samples.clone(), 8000);
        assert_eq!(back.sample_rate(), 8000);
        for (a, b) in samples.iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1.0 / 32768.0, "{a} vs {b}");
        }
    }

    #[test]
    fn saturates_out_of_range_samples() {
        let clip = AudioClip::new(vec![2.0, -2.0, 0.1], 8000).unwrap();
        let mut bytes = Vec::new();
        let clipped = write_wav(&mut bytes, &clip).unwrap();
        assert_eq!(clipped, 2);
        let back = read_wav(&bytes[..]).unwrap();
        assert!((back.samples()[0] - i16::MAX as f64 / 32768.0).abs() < 1e-12);
        assert!((back.samples()[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_truncated_header() {
        let clip = AudioClip::new(vec![0.1; 16], 8000).unwrap();
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &clip).unwrap();
        let err = read_wav(&bytes[..20]).unwrap_err();
        assert!(matches!(err, Error::MalformedWav(_)));
        assert!(err.to_string().contains("malformed WAV"));
    }

    #[test]
    fn rejects_stereo() {
        let clip = AudioClip::new(vec![0.1; 4], 8000).unwrap();
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &clip).unwrap();
        bytes[22] = 2; // channel count
        assert!(matches!(read_wav(&bytes[..]), Err(Error::MalformedWav(_))));
    }

    #[test]
    fn skips_unknown_chunks() {
        let clip = AudioClip::new(vec![0.25; 8], 8000).unwrap();
        let mut bytes = Vec::new();
        write_wav(&mut bytes, &clip).unwrap();
        // splice a LIST chunk between header and fmt
        let mut spliced = bytes[..12].to_vec();
        spliced.extend_from_slice(b"LIST");
        spliced.extend_from_slice(&4u32.to_le_bytes());
        spliced.extend_from_slice(b"INFO");
        spliced.extend_from_slice(&bytes[12..]);
        let back = read_wav(&spliced[..]).unwrap();
        assert_eq!(back.len(), 8);
    }
}
