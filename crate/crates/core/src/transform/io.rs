//! Binary (`GRTF`, `GRTS`) and CSV serialization of fields and sinograms.
//!
//! Both binary formats are little-endian, version byte 1. A field file holds
//! `n`, the shape (u32 per axis), the origin (f64 per axis), the spacing
//! (f64) and the values row-major. A sinogram file holds `n`, `n_s`, `n_θ`,
//! `s₀`, `Δs`, the θ table (`n` f64 per direction) and the values s-major.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Domain, DEFAULT_PAD_FACTOR};
use crate::transform::grid::{Grid, ScalarField};
use crate::transform::sinogram::{DeltaProfile, Sinogram, SinogramLayout};

pub const FIELD_MAGIC: &[u8; 4] = b"GRTF";
pub const SINOGRAM_MAGIC: &[u8; 4] = b"GRTS";
pub const FORMAT_VERSION: u8 = 1;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format("unexpected end of file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<usize> {
        if self.take(4)? != magic {
            return Err(Error::Format(format!(
                "bad magic (expected {})",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u8()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = self.u8()? as usize;
        if n != 2 && n != 3 {
            return Err(Error::Format(format!("unsupported dimension {n}")));
        }
        Ok(n)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

pub fn encode_field(f: &ScalarField) -> Vec<u8> {
    let g = f.grid();
    let n = g.dim();
    let mut out = Vec::with_capacity(16 + 12 * n + 8 * f.values().len());
    out.extend_from_slice(FIELD_MAGIC);
    out.push(FORMAT_VERSION);
    out.push(n as u8);
    for _ in 0..n {
        out.extend_from_slice(&(g.cells() as u32).to_le_bytes());
    }
    for _ in 0..n {
        out.extend_from_slice(&g.origin().to_le_bytes());
    }
    out.extend_from_slice(&g.spacing().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a field file. The grid must be isotropic and centered; the domain
/// half-width is recovered assuming the default pad factor.
pub fn decode_field(bytes: &[u8]) -> Result<ScalarField> {
    let mut c = Cursor { bytes, pos: 0 };
    let n = c.header(FIELD_MAGIC)?;
    let shape: Vec<usize> = (0..n).map(|_| c.u32().map(|v| v as usize)).collect::<Result<_>>()?;
    let origin: Vec<f64> = (0..n).map(|_| c.f64()).collect::<Result<_>>()?;
    let spacing = c.f64()?;
    if shape.iter().any(|&s| s != shape[0]) || origin.iter().any(|&o| o != origin[0]) {
        return Err(Error::Format("only isotropic grids are supported".into()));
    }
    let cells = shape[0];
    let total = cells
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Format("shape overflow".into()))?;
    let outer = 0.5 * spacing * cells as f64;
    if !(spacing > 0.0) || ((origin[0] + outer - 0.5 * spacing).abs() > 1e-9 * outer) {
        return Err(Error::Format("grid is not centered on the origin".into()));
    }
    let domain = Domain::new(n, outer / (1.0 + DEFAULT_PAD_FACTOR)).map_err(|e| Error::Format(e.to_string()))?;
    let grid = Grid::from_stored(domain, cells, spacing, origin[0]).map_err(|e| Error::Format(e.to_string()))?;
    let values: Vec<f64> = (0..total).map(|_| c.f64()).collect::<Result<_>>()?;
    c.finish()?;
    ScalarField::from_values(grid, values)
}

pub fn encode_sinogram(g: &Sinogram) -> Vec<u8> {
    let l = g.layout();
    let n = l.dim();
    let mut out = Vec::with_capacity(32 + 8 * (n * l.n_theta() + g.values().len()));
    out.extend_from_slice(SINOGRAM_MAGIC);
    out.push(FORMAT_VERSION);
    out.push(n as u8);
    out.extend_from_slice(&(l.n_s() as u32).to_le_bytes());
    out.extend_from_slice(&(l.n_theta() as u32).to_le_bytes());
    out.extend_from_slice(&l.s0().to_le_bytes());
    out.extend_from_slice(&l.ds().to_le_bytes());
    for d in l.directions() {
        for c in d.as_slice() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for v in g.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a sinogram file. The delta half-width is not stored and is set to 2Δs.
pub fn decode_sinogram(bytes: &[u8]) -> Result<Sinogram> {
    let mut c = Cursor { bytes, pos: 0 };
    let n = c.header(SINOGRAM_MAGIC)?;
    let n_s = c.u32()? as usize;
    let n_theta = c.u32()? as usize;
    let s0 = c.f64()?;
    let ds = c.f64()?;
    let mut directions = Vec::with_capacity(n_theta);
    for _ in 0..n_theta {
        let v: Vec<f64> = (0..n).map(|_| c.f64()).collect::<Result<_>>()?;
        directions.push(Direction::from_unit(&v).map_err(|e| Error::Format(e.to_string()))?);
    }
    let values: Vec<f64> = (0..n_s.saturating_mul(n_theta))
        .map(|_| c.f64())
        .collect::<Result<_>>()?;
    c.finish()?;
    let delta = DeltaProfile::new(2.0 * ds).map_err(|e| Error::Format(e.to_string()))?;
    let layout = SinogramLayout::new(s0, ds, n_s, directions, delta).map_err(|e| Error::Format(e.to_string()))?;
    Sinogram::from_values(layout, values)
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn write_field(path: impl AsRef<Path>, f: &ScalarField) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_field(f))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    decode_field(&read_all(path.as_ref())?)
}

pub fn write_sinogram(path: impl AsRef<Path>, g: &Sinogram) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_sinogram(g))?;
    Ok(())
}

pub fn read_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    decode_sinogram(&read_all(path.as_ref())?)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with columns `x0,x1[,x2],value`, one row per cell in storage order.
pub fn field_csv(f: &ScalarField) -> String {
    let g = f.grid();
    let n = g.dim();
    let mut s = String::new();
    let names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    s.push_str(&names.join(","));
    s.push_str(",value\n");
    for (i, v) in f.values().iter().enumerate() {
        let p = g.point(i);
        for c in &p[..n] {
            s.push_str(&fmt_f64(*c));
            s.push(',');
        }
        s.push_str(&fmt_f64(*v));
        s.push('\n');
    }
    s
}

/// CSV with columns `s,theta0,theta1[,theta2],value`, s-major.
pub fn sinogram_csv(g: &Sinogram) -> String {
    let l = g.layout();
    let n = l.dim();
    let mut s = String::from("s,");
    let names: Vec<String> = (0..n).map(|k| format!("theta{k}")).collect();
    s.push_str(&names.join(","));
    s.push_str(",value\n");
    for k in 0..l.n_s() {
        for (j, d) in l.directions().iter().enumerate() {
            s.push_str(&fmt_f64(l.s(k)));
            for c in d.as_slice() {
                s.push(',');
                s.push_str(&fmt_f64(*c));
            }
            s.push(',');
            s.push_str(&fmt_f64(g.get(k, j)));
            s.push('\n');
        }
    }
    s
}
