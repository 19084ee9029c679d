//! Binary path dump for cross-language replay.
//!
//! Layout, all fields little-endian:
//!
//! | offset | type      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | `[u8; 8]` | magic `FHPATHS1`                        |
//! | 8      | `f64`     | alpha                                   |
//! | 16     | `f64`     | gamma                                   |
//! | 24     | `u64`     | dim                                     |
//! | 32     | `f64`     | theta0                                  |
//! | 40     | `f64`     | sigma_bar                               |
//! | 48     | `u64`     | eigen rule (0 exact interval, 1 power law) |
//! | 56     | `f64`     | horizon T                               |
//! | 64     | `u64`     | modes N                                 |
//! | 72     | `u64`     | steps M                                 |
//! | 80     | `u64`     | master seed                             |
//! | 88     | `u64`     | replicate index                         |
//! | 96     | `u64`     | form (0 = y, 1 = v)                     |
//! | 104    | `f64`...  | `N * (M + 1)` values, row-major by mode |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::ou_sim::{PathForm, PathMatrix, TimeGrid};
use crate::spectrum::{eigen_deltas, EigenRule, SpectralModel};

pub const MAGIC: &[u8; 8] = b"FHPATHS1";
pub const HEADER_LEN: usize = 104;

/// Total file size for an `n_modes x (steps + 1)` payload.
pub fn dump_len(n_modes: usize, steps: usize) -> u64 {
    HEADER_LEN as u64 + 8 * n_modes as u64 * (steps as u64 + 1)
}

pub fn write_paths<W: Write>(paths: &PathMatrix, mut out: W) -> Result<()> {
    let m = paths.model();
    let g = paths.grid();
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&m.alpha.to_le_bytes());
    header.extend_from_slice(&m.gamma.to_le_bytes());
    header.extend_from_slice(&(m.dim as u64).to_le_bytes());
    header.extend_from_slice(&m.theta0.to_le_bytes());
    header.extend_from_slice(&m.sigma_bar.to_le_bytes());
    header.extend_from_slice(&m.eigen_rule.code().to_le_bytes());
    header.extend_from_slice(&g.horizon().to_le_bytes());
    header.extend_from_slice(&(paths.n_modes() as u64).to_le_bytes());
    header.extend_from_slice(&(g.steps() as u64).to_le_bytes());
    header.extend_from_slice(&paths.seed().to_le_bytes());
    header.extend_from_slice(&paths.replicate().to_le_bytes());
    let form: u64 = match paths.form() {
        PathForm::Y => 0,
        PathForm::V => 1,
    };
    header.extend_from_slice(&form.to_le_bytes());
    debug_assert_eq!(header.len(), HEADER_LEN);
    out.write_all(&header)?;

    let mut buf = Vec::with_capacity(8 * (g.steps() + 1));
    for row in paths.rows() {
        buf.clear();
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

fn u64_at(b: &[u8], off: usize) -> u64 {
    u64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

pub fn read_paths<R: Read>(mut input: R) -> Result<PathMatrix> {
    let mut h = [0u8; HEADER_LEN];
    input
        .read_exact(&mut h)
        .map_err(|e| Error::Format(format!("short header: {e}")))?;
    if &h[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let rule = EigenRule::from_code(u64_at(&h, 48))
        .ok_or_else(|| Error::Format(format!("unknown eigen rule code {}", u64_at(&h, 48))))?;
    let dim = u32::try_from(u64_at(&h, 24)).map_err(|_| Error::Format("dim overflow".into()))?;
    let model = SpectralModel {
        alpha: f64_at(&h, 8),
        gamma: f64_at(&h, 16),
        dim,
        theta0: f64_at(&h, 32),
        sigma_bar: f64_at(&h, 40),
        eigen_rule: rule,
    };
    model.validate()?;
    let n_modes = u64_at(&h, 64) as usize;
    let steps = u64_at(&h, 72) as usize;
    let grid = TimeGrid::new(f64_at(&h, 56), steps)?;
    let seed = u64_at(&h, 80);
    let replicate = u64_at(&h, 88);
    let form = match u64_at(&h, 96) {
        0 => PathForm::Y,
        1 => PathForm::V,
        other => return Err(Error::Format(format!("unknown form code {other}"))),
    };
    let count = n_modes
        .checked_mul(steps + 1)
        .ok_or_else(|| Error::Format("payload size overflow".into()))?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    if payload.len() != 8 * count {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            payload.len(),
            8 * count
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let deltas = eigen_deltas(&model, n_modes)?.deltas().to_vec();
    PathMatrix::from_flat(model, grid, values, n_modes, deltas, seed, replicate, form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou_sim::{simulate_field, SimOptions};
    use crate::rng::SeedPolicy;

    #[test]
    fn round_trip_and_size() {
        let m = SpectralModel::interval_1d(1.0, 1.0, 1.5).unwrap();
        let g = TimeGrid::new(2.0, 4).unwrap();
        let p = simulate_field(&m, 2, &g, &SeedPolicy::new(11), 3, &SimOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_paths(&p, &mut buf).unwrap();
        assert_eq!(buf.len() as u64, dump_len(2, 4));
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(u64::from_le_bytes(buf[80..88].try_into().unwrap()), 11);
        let q = read_paths(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_truncated_payload() {
        let m = SpectralModel::interval_1d(1.0, 1.0, 1.0).unwrap();
        let g = TimeGrid::new(1.0, 4).unwrap();
        let p = simulate_field(&m, 2, &g, &SeedPolicy::new(1), 0, &SimOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_paths(&p, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_paths(buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_paths(&b"nonsense"[..]), Err(Error::Format(_))));
    }
}
