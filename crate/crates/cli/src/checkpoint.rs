//! Binary checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic            4 bytes  "S7FL"
//! format version   u32      1
//! axis count k     u32
//! active axes      k × u32  (1-based)
//! points per axis  u64
//! period           f64
//! stencil order    u32
//! t                f64
//! step             u64
//! value count      u64      (grid points × 70)
//! payload          f64 × value count
//! ```
//!
//! The payload is row-major over the grid (first active axis slowest) with
//! the 70 components of each 4-form in canonical order (lexicographic
//! `i < j < k < l`).

use std::path::{Path, PathBuf};

use spin7_core::forms::N_QUADS;
use spin7_core::{FlowState, FourForm, LatticeField, LatticeSpec};

use crate::error::{CliError, CliResult};
use crate::io::atomic_write;

pub const MAGIC: &[u8; 4] = b"S7FL";
pub const FORMAT_VERSION: u32 = 1;

pub fn checkpoint_name(step: u64) -> String {
    format!("ckpt_{step}.s7fl")
}

pub fn encode(state: &FlowState) -> Vec<u8> {
    let spec = &state.field.spec;
    let n_values = state.field.values.len() * N_QUADS;
    let mut out = Vec::with_capacity(64 + 8 * n_values);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.active_axes.len() as u32).to_le_bytes());
    for &a in &spec.active_axes {
        out.extend_from_slice(&(a as u32).to_le_bytes());
    }
    out.extend_from_slice(&(spec.points_per_axis as u64).to_le_bytes());
    out.extend_from_slice(&spec.period.to_le_bytes());
    out.extend_from_slice(&(spec.stencil_order as u32).to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&state.step.to_le_bytes());
    out.extend_from_slice(&(n_values as u64).to_le_bytes());
    for v in &state.field.values {
        for x in v.0 {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(format!("truncated at byte {}", self.pos)),
        }
    }
    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FlowState, String> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err("not a checkpoint (bad magic)".into());
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(format!(
            "unsupported format version {version} (this build reads version {FORMAT_VERSION})"
        ));
    }
    let k = r.u32()? as usize;
    if k == 0 || k > 8 {
        return Err(format!("invalid axis count {k}"));
    }
    let axes = (0..k)
        .map(|_| r.u32().map(|a| a as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let n = r.u64()? as usize;
    let period = r.f64()?;
    let order = r.u32()? as usize;
    let spec = LatticeSpec::new(axes, n, period, order).map_err(|e| e.to_string())?;
    let t = r.f64()?;
    let step = r.u64()?;
    let count = r.u64()? as usize;
    if count != spec.num_points() * N_QUADS {
        return Err(format!(
            "payload holds {count} values, lattice needs {}",
            spec.num_points() * N_QUADS
        ));
    }
    let payload = r.take(count * 8)?;
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - r.pos));
    }
    let values: Vec<FourForm> = payload
        .chunks_exact(8 * N_QUADS)
        .map(|chunk| {
            let mut c = [0.0; N_QUADS];
            for (x, b) in c.iter_mut().zip(chunk.chunks_exact(8)) {
                *x = f64::from_le_bytes(b.try_into().unwrap());
            }
            FourForm(c)
        })
        .collect();
    Ok(FlowState {
        field: LatticeField { spec, values },
        t,
        step,
    })
}

pub fn write_checkpoint(path: &Path, state: &FlowState) -> CliResult<()> {
    atomic_write(path, &encode(state))
}

pub fn read_checkpoint(path: &Path) -> CliResult<FlowState> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|reason| CliError::Checkpoint {
        path: PathBuf::from(path),
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use spin7_core::flow::{initial_data, FlowConfig, InitialData};

    fn state() -> FlowState {
        let spec = LatticeSpec::new(vec![2, 5], 8, 1.5, 4).unwrap();
        let mut c = FlowConfig::new(
            spec,
            InitialData::RandomSmooth {
                amplitude: 0.3,
                modes: 2,
                max_mode: 1,
            },
        );
        c.max_steps = Some(1);
        let mut s = initial_data(&c).unwrap();
        s.t = 0.1 + 0.2;
        s.step = 42;
        s
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let s = state();
        let bytes = encode(&s);
        let back = decode(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn rejects_bad_input() {
        let bytes = encode(&state());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).unwrap_err().contains("magic"));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode(&bad).unwrap_err().contains("version 9"));
        assert!(decode(&bytes[..bytes.len() - 3]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode(&long).unwrap_err().contains("trailing"));
    }
}
