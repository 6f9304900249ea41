//! Binary trace container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   b"WMAP"
//! version u32
//! n       u32   spatial dimension
//! N       u32   points per axis
//! m       u32   components
//! period  f64
//! records until EOF:
//!   t       f64
//!   φ       m·N^n f64, component-major, last axis fastest
//!   ∂_t φ   m·N^n f64, same order
//! ```

use std::io::{ErrorKind, Read, Write};

use crate::error::{Error, Result};
use crate::norms::SpacetimeTrace;
use crate::spectral::{Field, GridSpec};

pub const TRACE_MAGIC: [u8; 4] = *b"WMAP";
pub const TRACE_VERSION: u32 = 1;

pub fn write_trace<W: Write>(mut w: W, tr: &SpacetimeTrace) -> Result<()> {
    let g = tr.grid();
    w.write_all(&TRACE_MAGIC)?;
    for v in [TRACE_VERSION, g.dim() as u32, g.points() as u32, tr.components() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&g.period().to_le_bytes())?;
    let mut buf = Vec::new();
    for ((t, phi), v) in tr.times().iter().zip(tr.positions()).zip(tr.velocities()) {
        buf.clear();
        buf.extend_from_slice(&t.to_le_bytes());
        for x in phi.values().iter().chain(v.values()) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Fills `buf`; `Ok(false)` on clean EOF before the first byte.
fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut read = 0;
    while read < buf.len() {
        match r.read(&mut buf[read..]) {
            Ok(0) if read == 0 => return Ok(false),
            Ok(0) => return Err(Error::Format("truncated trace record".into())),
            Ok(k) => read += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

pub fn read_trace<R: Read>(mut r: R) -> Result<SpacetimeTrace> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != TRACE_MAGIC {
        return Err(Error::Format("missing WMAP magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != TRACE_VERSION {
        return Err(Error::Format(format!("unsupported trace version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let mut pb = [0u8; 8];
    r.read_exact(&mut pb)?;
    let grid = GridSpec::new(n, points, f64::from_le_bytes(pb))
        .map_err(|e| Error::Format(format!("bad trace header: {e}")))?;
    let len = m * grid.len();
    let mut record = vec![0u8; 8 * (1 + 2 * len)];
    let mut samples = Vec::new();
    while fill(&mut r, &mut record)? {
        let mut vals = record
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let t = vals.next().expect("record holds a time");
        let phi: Vec<f64> = vals.by_ref().take(len).collect();
        let v: Vec<f64> = vals.collect();
        samples.push((t, Field::new(grid, m, phi)?, Field::new(grid, m, v)?));
    }
    SpacetimeTrace::new(
        samples.iter().map(|s| s.0).collect(),
        samples.iter().map(|s| s.1.clone()).collect(),
        samples.into_iter().map(|s| s.2).collect(),
    )
}
