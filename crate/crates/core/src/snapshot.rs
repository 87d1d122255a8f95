//! RSSL binary field snapshots.
//!
//! Little-endian layout: magic `RSSL`, version `u32`, dimension `u32`, length
//! `u64`, `r_max` `f64`, time `f64`, then `N` interleaved `(re, im)` pairs.
//! The low 16 bits of the version word hold the format revision; bit 31 marks
//! a bound-state dump whose time slot carries the eigenvalue instead.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{make_grid, RadialField};
use crate::spectral::BoundState;

pub const MAGIC: [u8; 4] = *b"RSSL";
pub const FORMAT_VERSION: u32 = 1;
pub const EIGENVALUE_FLAG: u32 = 1 << 31;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;

/// What the header's time slot holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stamp {
    Time(f64),
    Eigenvalue(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: RadialField,
    pub stamp: Stamp,
}

pub fn encode(field: &RadialField, stamp: Stamp) -> Vec<u8> {
    let g = field.grid();
    let (flags, slot) = match stamp {
        Stamp::Time(t) => (0, t),
        Stamp::Eigenvalue(l) => (EIGENVALUE_FLAG, l),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(FORMAT_VERSION | flags).to_le_bytes());
    out.extend_from_slice(&g.dim().to_le_bytes());
    out.extend_from_slice(&(g.len() as u64).to_le_bytes());
    out.extend_from_slice(&g.r_max().to_le_bytes());
    out.extend_from_slice(&slot.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn take<const K: usize>(bytes: &[u8], at: &mut usize) -> [u8; K] {
    let out = bytes[*at..*at + K].try_into().expect("length checked");
    *at += K;
    out
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let mut at = 0;
    if take::<4>(bytes, &mut at) != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut at));
    if version & 0xffff != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {}", version & 0xffff)));
    }
    let dim = u32::from_le_bytes(take(bytes, &mut at));
    let len = u64::from_le_bytes(take(bytes, &mut at));
    let r_max = f64::from_le_bytes(take(bytes, &mut at));
    let slot = f64::from_le_bytes(take(bytes, &mut at));
    let expected = (len as usize)
        .checked_mul(16)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Snapshot(format!("length {len} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!("expected {expected} bytes for N = {len}, found {}", bytes.len())));
    }
    let grid = make_grid(dim, r_max, len as usize)?;
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("chunk of 16"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("chunk of 16"));
            Complex64::new(re, im)
        })
        .collect();
    let stamp = if version & EIGENVALUE_FLAG != 0 {
        Stamp::Eigenvalue(slot)
    } else {
        Stamp::Time(slot)
    };
    Ok(Snapshot {
        field: RadialField::from_values(grid, values)?,
        stamp,
    })
}

pub fn write_snapshot(path: &Path, field: &RadialField, stamp: Stamp) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&encode(field, stamp)).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file).read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn write_bound_state(path: &Path, b: &BoundState) -> Result<()> {
    write_snapshot(path, &b.state, Stamp::Eigenvalue(b.eigenvalue))
}
