use std::io::{Read, Write};

use crate::{Error, Result};

use super::{MlpSpec, ParamVector};

const MAGIC: &[u8; 4] = b"BNNP";
const VERSION: u32 = 1;

/// Writes parameter vectors as a header (magic, version, architecture hash,
/// vector length, count) followed by little-endian f64 values.
pub fn write_params<W: Write>(mut w: W, spec: &MlpSpec, params: &[ParamVector]) -> Result<()> {
    let p = spec.num_params();
    if let Some(bad) = params.iter().find(|v| v.len() != p) {
        return Err(Error::DimensionMismatch(format!("vector of length {} for {p} parameters", bad.len())));
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&spec.fingerprint().to_le_bytes())?;
    w.write_all(&(p as u64).to_le_bytes())?;
    w.write_all(&(params.len() as u64).to_le_bytes())?;
    for v in params {
        for x in v.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_params<R: Read>(mut r: R, spec: &MlpSpec) -> Result<Vec<ParamVector>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a parameter checkpoint".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let hash = u64::from_le_bytes(read_array(&mut r)?);
    if hash != spec.fingerprint() {
        return Err(Error::Checkpoint("checkpoint was written for a different architecture".into()));
    }
    let len = u64::from_le_bytes(read_array(&mut r)?) as usize;
    if len != spec.num_params() {
        return Err(Error::Checkpoint(format!("checkpoint holds {len} parameters, expected {}", spec.num_params())));
    }
    let count = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push(f64::from_le_bytes(read_array(&mut r)?));
        }
        out.push(ParamVector(v));
    }
    Ok(out)
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
