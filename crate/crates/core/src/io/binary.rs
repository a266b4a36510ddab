//! Little-endian primitives for the versioned binary formats.

use std::io::{Read, Write};

use super::IoError;

pub fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<(), IoError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f32<W: Write>(w: &mut W, v: f32) -> Result<(), IoError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<(), IoError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N], IoError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            IoError::FormatError("unexpected end of file".into())
        } else {
            e.into()
        }
    })?;
    Ok(buf)
}

pub fn read_u32<R: Read>(r: &mut R) -> Result<u32, IoError> {
    Ok(u32::from_le_bytes(read_exact(r)?))
}

pub fn read_f32<R: Read>(r: &mut R) -> Result<f32, IoError> {
    Ok(f32::from_le_bytes(read_exact(r)?))
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64, IoError> {
    Ok(f64::from_le_bytes(read_exact(r)?))
}

/// Reads and checks a 4-byte magic tag.
pub fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<(), IoError> {
    let got: [u8; 4] = read_exact(r)?;
    if &got != magic {
        return Err(IoError::FormatError(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

/// Fails unless the reader is exhausted.
pub fn expect_eof<R: Read>(r: &mut R) -> Result<(), IoError> {
    let mut extra = [0u8; 1];
    match r.read(&mut extra)? {
        0 => Ok(()),
        _ => Err(IoError::FormatError("trailing bytes after payload".into())),
    }
}
