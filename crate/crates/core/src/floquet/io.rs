//! Binary operator files.
//!
//! Layout (all little-endian): a 32-byte header
//! `b"DHFQ"`, `u32` version, `u64` dimension `L`, `f64` period `T_y`,
//! 8 zero bytes; then `L * L` entries in row-major order, each as
//! `f64` real part followed by `f64` imaginary part.

use std::io::{Read, Write};

use faer::{c64, Mat};

use super::FloquetOperator;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"DHFQ";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

pub fn write_operator(u: &FloquetOperator, mut w: impl Write) -> Result<()> {
    let n = u.len();
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    header[16..24].copy_from_slice(&u.period.to_le_bytes());
    w.write_all(&header)?;
    let mut row = Vec::with_capacity(16 * n);
    for i in 0..n {
        row.clear();
        for j in 0..n {
            let z = u.matrix[(i, j)];
            row.extend_from_slice(&z.re.to_le_bytes());
            row.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator(mut r: impl Read) -> Result<FloquetOperator> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let period = f64::from_le_bytes(header[16..24].try_into().unwrap());
    if header[24..].iter().any(|&b| b != 0) {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let mut matrix = Mat::<c64>::zeros(n, n);
    let mut row = vec![0u8; 16 * n];
    for i in 0..n {
        r.read_exact(&mut row)
            .map_err(|e| Error::Format(format!("truncated at row {i}: {e}")))?;
        for j in 0..n {
            let re = f64::from_le_bytes(row[16 * j..16 * j + 8].try_into().unwrap());
            let im = f64::from_le_bytes(row[16 * j + 8..16 * j + 16].try_into().unwrap());
            matrix[(i, j)] = c64::new(re, im);
        }
    }
    Ok(FloquetOperator {
        matrix,
        period,
        params: None,
        steps: 0,
        defect: f64::NAN,
    })
}
