//! Binary field format.
//!
//! ```text
//! magic      4 bytes  "NSV4"
//! version    u32 LE   1
//! n_per_dim  u32 LE
//! box_length f64 LE
//! payload    4 * n^4 complex values, component-major, site order,
//!            each value as (re f64 LE, im f64 LE)
//! ```

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use super::field::SpectralVectorField;
use super::grid::WaveGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NSV4";
pub const VERSION: u32 = 1;

pub fn write_field<W: Write>(field: &SpectralVectorField, mut out: W) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.n_per_dim() as u32).to_le_bytes())?;
    out.write_all(&grid.box_length().to_le_bytes())?;
    let mut buf = Vec::with_capacity(grid.len() * 16);
    for c in 0..4 {
        buf.clear();
        for z in field.component(c) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Reads the header only.
pub fn read_header<R: Read>(input: &mut R) -> Result<(usize, f64)> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let mut dword = [0u8; 8];
    input.read_exact(&mut dword)?;
    Ok((n, f64::from_le_bytes(dword)))
}

/// Reads a field; `grid` is reused when it matches the header.
pub fn read_field<R: Read>(mut input: R, grid: Option<&WaveGrid>) -> Result<SpectralVectorField> {
    let (n, box_length) = read_header(&mut input)?;
    let grid = match grid {
        Some(g) if g.n_per_dim() == n && g.box_length() == box_length => g.clone(),
        Some(g) => {
            return Err(Error::Format(format!(
                "file holds a {n}^4 grid with L = {box_length}, expected {g:?}"
            )))
        }
        None => WaveGrid::new(n, box_length)?,
    };
    let len = grid.len();
    let mut bytes = vec![0u8; len * 16];
    let mut coeffs: [Vec<Complex64>; 4] = Default::default();
    for c in coeffs.iter_mut() {
        input.read_exact(&mut bytes).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format("truncated payload".into()),
            _ => Error::Io(e),
        })?;
        *c = bytes
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    SpectralVectorField::from_coeffs(&grid, coeffs)
}

pub fn save_field(field: &SpectralVectorField, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path, grid: Option<&WaveGrid>) -> Result<SpectralVectorField> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file), grid)
}
