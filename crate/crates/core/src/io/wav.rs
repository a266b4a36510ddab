//! PCM WAV reading and writing, 16-bit integer or 32-bit float.

use std::path::Path;

use super::IoError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Float32,
}

impl std::str::FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int16" | "i16" | "pcm16" => Ok(SampleFormat::Int16),
            "float32" | "f32" => Ok(SampleFormat::Float32),
            other => Err(format!("unknown sample format '{other}' (int16, float32)")),
        }
    }
}

/// Deinterleaved audio in `[-1, 1]` full scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Audio {
    pub fs: u32,
    pub channels: Vec<Vec<f64>>,
}

impl Audio {
    pub fn mono(fs: u32, x: Vec<f64>) -> Self {
        Self { fs, channels: vec![x] }
    }

    pub fn frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Mean of all channels.
    pub fn downmix(&self) -> Vec<f64> {
        let n = self.frames();
        let c = self.channels.len().max(1) as f64;
        (0..n)
            .map(|i| self.channels.iter().map(|ch| ch[i]).sum::<f64>() / c)
            .collect()
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Audio, IoError> {
    let mut rdr = hound::WavReader::open(path.as_ref())?;
    let spec = rdr.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => rdr.samples::<f32>().map(|s| s.map(f64::from)).collect::<Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            rdr.samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / nch.max(1)); nch];
    for (i, v) in interleaved.into_iter().enumerate() {
        channels[i % nch].push(v);
    }
    Ok(Audio {
        fs: spec.sample_rate,
        channels,
    })
}

/// Writes all channels; int16 output is clipped to full scale.
pub fn write_wav(path: impl AsRef<Path>, audio: &Audio, format: SampleFormat) -> Result<(), IoError> {
    let nch = audio.channels.len();
    if nch == 0 || audio.channels.iter().any(|c| c.len() != audio.frames()) {
        return Err(IoError::FormatError("channels must be nonempty and equally long".into()));
    }
    let spec = hound::WavSpec {
        channels: nch as u16,
        sample_rate: audio.fs,
        bits_per_sample: match format {
            SampleFormat::Int16 => 16,
            SampleFormat::Float32 => 32,
        },
        sample_format: match format {
            SampleFormat::Int16 => hound::SampleFormat::Int,
            SampleFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut w = hound::WavWriter::create(path.as_ref(), spec)?;
    for i in 0..audio.frames() {
        for ch in &audio.channels {
            match format {
                SampleFormat::Int16 => {
                    let v = (ch[i] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    w.write_sample(v)?;
                }
                SampleFormat::Float32 => w.write_sample(ch[i] as f32)?,
            }
        }
    }
    w.finalize()?;
    Ok(())
}
