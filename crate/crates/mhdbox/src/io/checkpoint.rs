//! Bit-exact binary checkpoints.
//!
//! Little-endian layout: magic "MHDC", u32 version = 1, u32 nx ny nz,
//! f64 L t nu eta, then six arrays of nx·ny·nz f64 in z-fastest order,
//! component order u1 u2 u3 b1 b2 b3.

use crate::dynamics::State;
use crate::error::{MhdError, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: [u8; 4] = *b"MHDC";
const VERSION: u32 = 1;

/// A checkpoint carries the state plus the diffusivities of the run that
/// wrote it, so a replay can reconstruct pressures consistently.
#[derive(Clone, Debug)]
pub struct CheckpointData {
    pub state: State,
    pub nu: f64,
    pub eta: f64,
}

fn io_err(path: &Path, source: std::io::Error) -> MhdError {
    MhdError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write atomically (temp file + rename).
pub fn write_checkpoint(state: &State, nu: f64, eta: f64, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let file = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        let mut w = BufWriter::new(file);
        let grid = state.grid();
        let [nx, ny, nz] = grid.n();
        let mut write = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(&tmp, e));
        write(&MAGIC)?;
        write(&VERSION.to_le_bytes())?;
        write(&(nx as u32).to_le_bytes())?;
        write(&(ny as u32).to_le_bytes())?;
        write(&(nz as u32).to_le_bytes())?;
        write(&grid.length().to_le_bytes())?;
        write(&state.t.to_le_bytes())?;
        write(&nu.to_le_bytes())?;
        write(&eta.to_le_bytes())?;
        for field in [&state.u, &state.b] {
            for comp in field.components() {
                for v in comp.values() {
                    write(&v.to_le_bytes())?;
                }
            }
        }
        w.flush().map_err(|e| io_err(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<CheckpointData> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, path)?;
    if magic != MAGIC {
        return Err(MhdError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(MhdError::UnsupportedVersion {
            version,
            path: path.to_path_buf(),
        });
    }
    let nx = read_u32(&mut r, path)? as usize;
    let ny = read_u32(&mut r, path)? as usize;
    let nz = read_u32(&mut r, path)? as usize;
    let length = read_f64(&mut r, path)?;
    let t = read_f64(&mut r, path)?;
    let nu = read_f64(&mut r, path)?;
    let eta = read_f64(&mut r, path)?;
    let grid = Grid::new([nx, ny, nz], length)?;

    let mut fields = Vec::with_capacity(6);
    for _ in 0..6 {
        let mut values = vec![0.0_f64; grid.npts()];
        let mut buf = vec![0u8; grid.npts() * 8];
        read_exact(&mut r, &mut buf, path)?;
        for (v, chunk) in values.iter_mut().zip(buf.chunks_exact(8)) {
            *v = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        fields.push(ScalarField::from_values(grid, values)?);
    }
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => {
            return Err(MhdError::Config(format!(
                "checkpoint {} has trailing bytes",
                path.display()
            )))
        }
        Err(e) => return Err(io_err(path, e)),
    }

    let b3 = fields.pop().unwrap();
    let b2 = fields.pop().unwrap();
    let b1 = fields.pop().unwrap();
    let u3 = fields.pop().unwrap();
    let u2 = fields.pop().unwrap();
    let u1 = fields.pop().unwrap();
    let state = State::new(
        VectorField::new([u1, u2, u3])?,
        VectorField::new([b1, b2, b3])?,
        t,
    )?;
    Ok(CheckpointData { state, nu, eta })
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            MhdError::TruncatedFile {
                path: path.to_path_buf(),
            }
        } else {
            io_err(path, e)
        }
    })
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}
