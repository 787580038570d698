//! Minimal RIFF/WAVE reader and writer for 32-bit IEEE-float audio.

use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Multichannel audio, one `Vec<f64>` per channel, all equal length.
#[derive(Debug, Clone)]
pub struct WavData {
    pub channels: Vec<Vec<f64>>,
    pub fs: f64,
}

impl WavData {
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn num_frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

/// Writes `channels` (interleaved on disk) as 32-bit-float WAV.
pub fn write_wav(path: &Path, channels: &[Vec<f64>], fs: f64) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::InvalidInput("no channels to write".into()));
    }
    let frames = channels[0].len();
    if channels.iter().any(|c| c.len() != frames) {
        return Err(Error::InvalidInput(
            "channels have mismatched lengths".into(),
        ));
    }
    let n_ch = channels.len() as u32;
    let sample_rate = fs.round() as u32;
    let block_align = n_ch * 4;
    let data_bytes = (frames as u32) * block_align;
    // fmt (18 bytes, WAVE_FORMAT_IEEE_FLOAT requires cbSize) + fact + data.
    let riff_size = 4 + (8 + 18) + (8 + 4) + (8 + data_bytes);

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"RIFF")?;
    w.write_all(&riff_size.to_le_bytes())?;
    w.write_all(b"WAVE")?;
    w.write_all(b"fmt ")?;
    w.write_all(&18u32.to_le_bytes())?;
    w.write_all(&3u16.to_le_bytes())?; // IEEE float
    w.write_all(&(n_ch as u16).to_le_bytes())?;
    w.write_all(&sample_rate.to_le_bytes())?;
    w.write_all(&(sample_rate * block_align).to_le_bytes())?;
    w.write_all(&(block_align as u16).to_le_bytes())?;
    w.write_all(&32u16.to_le_bytes())?;
    w.write_all(&0u16.to_le_bytes())?; // cbSize
    w.write_all(b"fact")?;
    w.write_all(&4u32.to_le_bytes())?;
    w.write_all(&(frames as u32).to_le_bytes())?;
    w.write_all(b"data")?;
    w.write_all(&data_bytes.to_le_bytes())?;
    let mut buf = Vec::with_capacity(frames * channels.len() * 4);
    for t in 0..frames {
        for ch in channels {
            buf.extend_from_slice(&(ch[t] as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_exact_or(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format(format!("truncated WAV: missing {what}")))
}

/// Reads a 32-bit-float WAV into per-channel buffers.
pub fn read_wav(path: &Path) -> Result<WavData> {
    let mut r = BufReader::new(File::open(path)?);
    let mut hdr = [0u8; 12];
    read_exact_or(&mut r, &mut hdr, "RIFF header")?;
    if &hdr[0..4] != b"RIFF" || &hdr[8..12] != b"WAVE" {
        return Err(Error::Format(format!("{} is not a WAVE file", path.display())));
    }
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<Vec<u8>> = None;
    loop {
        let mut chunk_hdr = [0u8; 8];
        if r.read_exact(&mut chunk_hdr).is_err() {
            break;
        }
        let id = [chunk_hdr[0], chunk_hdr[1], chunk_hdr[2], chunk_hdr[3]];
        let size = u32::from_le_bytes(chunk_hdr[4..8].try_into().unwrap()) as usize;
        let mut body = vec![0u8; size + size % 2]; // chunks are word-aligned
        read_exact_or(&mut r, &mut body, "chunk body")?;
        body.truncate(size);
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Format("fmt chunk too short".into()));
                }
                fmt = Some((
                    u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    u16::from_le_bytes(body[14..16].try_into().unwrap()),
                ));
            }
            b"data" => data = Some(body),
            _ => {}
        }
    }
    let (format, n_ch, rate, bits) =
        fmt.ok_or_else(|| Error::Format("WAV has no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::Format("WAV has no data chunk".into()))?;
    if format != 3 || bits != 32 {
        return Err(Error::Format(format!(
            "unsupported WAV encoding (format {format}, {bits}-bit); expected 32-bit float"
        )));
    }
    if n_ch == 0 {
        return Err(Error::Format("WAV has zero channels".into()));
    }
    let n_ch = n_ch as usize;
    let frames = data.len() / (4 * n_ch);
    let mut channels = vec![Vec::with_capacity(frames); n_ch];
    for t in 0..frames {
        for (c, ch) in channels.iter_mut().enumerate() {
            let off = (t * n_ch + c) * 4;
            let v = f32::from_le_bytes(data[off..off + 4].try_into().unwrap());
            ch.push(v as f64);
        }
    }
    Ok(WavData {
        channels,
        fs: rate as f64,
    })
}
