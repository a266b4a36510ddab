//! Binary and CSV serialization of [`FbsModel`].
//!
//! Binary layout, little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic | `b"FBSM"` |
//! | version | u32 (= 1) |
//! | M_max, K_min, K_max | u32 each |
//! | f_max, fs | f64 each |
//! | coefficients | `(2 M_max + 1) x (K_max - K_min + 1)` complex64, row-major, rows `m = -M_max..=M_max` |
//!
//! complex64 is a pair of f32 (real, imaginary), so coefficients lose
//! precision beyond single precision on a round trip.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::FbsModel;
use crate::io::binary::{expect_eof, expect_magic, read_f32, read_f64, read_u32, write_f32, write_f64, write_u32};
use crate::io::{fmt_f64, IoError, Table};

pub const MAGIC: &[u8; 4] = b"FBSM";
pub const VERSION: u32 = 1;

pub fn write_model<W: Write>(model: &FbsModel, mut w: W) -> Result<(), IoError> {
    w.write_all(MAGIC)?;
    write_u32(&mut w, VERSION)?;
    write_u32(&mut w, model.m_max as u32)?;
    write_u32(&mut w, model.k_min as u32)?;
    write_u32(&mut w, model.k_max as u32)?;
    write_f64(&mut w, model.f_max)?;
    write_f64(&mut w, model.fs)?;
    for c in model.coeffs() {
        write_f32(&mut w, c.re as f32)?;
        write_f32(&mut w, c.im as f32)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<FbsModel, IoError> {
    expect_magic(&mut r, MAGIC)?;
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(IoError::FormatError(format!("unsupported FBSM version {version}")));
    }
    let m_max = read_u32(&mut r)? as usize;
    let k_min = read_u32(&mut r)? as usize;
    let k_max = read_u32(&mut r)? as usize;
    let f_max = read_f64(&mut r)?;
    let fs = read_f64(&mut r)?;
    if m_max > super::bessel::MAX_ORDER || k_min == 0 || k_min > k_max || k_max > super::bessel::MAX_ZEROS {
        return Err(IoError::FormatError(format!(
            "invalid truncation M_max={m_max} K=[{k_min}, {k_max}]"
        )));
    }
    let n = (2 * m_max + 1) * (k_max - k_min + 1);
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f32(&mut r)? as f64;
        let im = read_f32(&mut r)? as f64;
        coeffs.push(Complex64::new(re, im));
    }
    expect_eof(&mut r)?;
    FbsModel::new(m_max, k_min, k_max, f_max, fs, coeffs).map_err(|e| IoError::FormatError(e.to_string()))
}

pub fn save_model(model: &FbsModel, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| IoError::at(path, e))?;
    write_model(model, std::io::BufWriter::new(f))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<FbsModel, IoError> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| IoError::at(path, e))?;
    read_model(std::io::BufReader::new(f))
}

/// `m,k,re,im`, rows in storage order.
pub fn coefficient_table(model: &FbsModel) -> Table {
    let mut t = Table::new(["m", "k", "re", "im"]);
    for m in -(model.m_max as i64)..=model.m_max as i64 {
        for k in model.k_min..=model.k_max {
            let c = model.coeff(m, k).expect("index inside truncation");
            t.push(vec![m.to_string(), k.to_string(), fmt_f64(c.re), fmt_f64(c.im)]);
        }
    }
    t
}
