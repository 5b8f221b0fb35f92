//! Binary checkpoints of the dynamical variables.
//!
//! Layout, all little-endian:
//!
//! | offset | bytes | content                      |
//! |--------|-------|------------------------------|
//! | 0      | 4     | magic `AXNS`                 |
//! | 4      | 4     | format version (u32, = 1)    |
//! | 8      | 4     | `n_r` (u32)                  |
//! | 12     | 4     | `n_z` (u32)                  |
//! | 16     | 32    | `r_min`, `R`, `L_z`, `t` (f64) |
//! | 48     | 8·n   | `Gamma`, radial-major        |
//! | 48+8n  | 8·n   | `omega`, radial-major        |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::elliptic::StreamSolver;
use crate::error::{Error, Result};
use crate::field::{AxisymState, BoundaryKind, ScalarField};
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"AXNS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 48;

/// Raw checkpoint contents, before any derived fields are rebuilt.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub t: f64,
    pub gamma: Vec<f64>,
    pub omega: Vec<f64>,
}

pub fn encode(state: &AxisymState) -> Vec<u8> {
    let g = state.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.n_r as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n_z as u32).to_le_bytes());
    for v in [g.r_min, g.r_max, g.l_z, state.t] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in state.gamma.values().iter().chain(state.omega.values()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let (n_r, n_z) = (u32_at(8) as usize, u32_at(12) as usize);
    let grid = Grid::new(f64_at(16), f64_at(24), f64_at(32), n_r, n_z)
        .map_err(|e| Error::Checkpoint(format!("bad grid in header: {e}")))?;
    let t = f64_at(40);
    let n = grid.len();
    let expected = HEADER_LEN + 16 * n;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "payload size {} does not match a {n_r}x{n_z} grid ({expected} bytes)",
            bytes.len()
        )));
    }
    let read = |start: usize| -> Vec<f64> { (0..n).map(|k| f64_at(start + 8 * k)).collect() };
    Ok(Checkpoint {
        grid,
        t,
        gamma: read(HEADER_LEN),
        omega: read(HEADER_LEN + 8 * n),
    })
}

pub fn save(state: &AxisymState, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(state))?;
    file.sync_all()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    decode(&fs::read(path)?)
}

/// Loads a checkpoint onto the solver's grid; any difference in the grid
/// parameters is an error.
pub fn load(path: &Path, solver: &StreamSolver) -> Result<AxisymState> {
    let ck = read(path)?;
    into_state(ck, solver)
}

pub fn into_state(ck: Checkpoint, solver: &StreamSolver) -> Result<AxisymState> {
    let g = *solver.grid();
    if ck.grid != g {
        return Err(Error::Checkpoint(format!(
            "grid mismatch: checkpoint {}x{} on [{}, {}] x [0, {}), solver {}x{} on [{}, {}] x [0, {})",
            ck.grid.n_r, ck.grid.n_z, ck.grid.r_min, ck.grid.r_max, ck.grid.l_z, g.n_r, g.n_z, g.r_min, g.r_max, g.l_z
        )));
    }
    let gamma = ScalarField::from_values(g, ck.gamma, BoundaryKind::Robin(2.0 / g.r_min))?;
    let omega = ScalarField::from_values(g, ck.omega, BoundaryKind::Dirichlet0)?;
    Ok(AxisymState::from_dynamic(ck.t, gamma, omega, solver))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_initial_data, InitialData, InitialKind, Support};

    fn state(grid: Grid) -> AxisymState {
        let solver = StreamSolver::new(&grid);
        let spec = InitialData {
            kind: InitialKind::RandomModes,
            amplitude: 0.7,
            secondary_amplitude: 0.0,
            support: Support {
                r_center: 2.0,
                r_half_width: 0.6,
                z_center: 1.0,
                z_half_width: 0.5,
            },
            seed: 9,
            modes: 3,
        };
        let mut s = make_initial_data(grid, &spec, &solver).unwrap();
        s.t = 0.125;
        s
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(1.0, 3.0, 2.0, 17, 8).unwrap();
        let s = state(g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.bin");
        save(&s, &path).unwrap();
        let back = load(&path, &StreamSolver::new(&g)).unwrap();
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        for (a, b) in back.gamma.values().iter().zip(s.gamma.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.omega.values().iter().zip(s.omega.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(encode(&back), encode(&s));
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(1.0, 3.0, 2.0, 5, 4).unwrap();
        let bytes = encode(&state(g));
        assert_eq!(&bytes[..4], b"AXNS");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 20);
    }

    #[test]
    fn rejects_bad_magic_version_and_size() {
        let g = Grid::new(1.0, 3.0, 2.0, 5, 4).unwrap();
        let good = encode(&state(g));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Checkpoint(_))));
        let mut bad = good.clone();
        bad[4] = 7;
        assert!(decode(&bad).is_err());
        assert!(decode(&good[..good.len() - 8]).is_err());
        assert!(decode(&good[..10]).is_err());
    }

    #[test]
    fn rejects_mismatched_grid() {
        let g = Grid::new(1.0, 3.0, 2.0, 17, 8).unwrap();
        let ck = decode(&encode(&state(g))).unwrap();
        let other = Grid::new(1.0, 3.5, 2.0, 17, 8).unwrap();
        assert!(into_state(ck, &StreamSolver::new(&other)).is_err());
    }
}
