//! File formats: `CPT1` binary tensors and the plain-text path parameter list.
//!
//! `CPT1` layout: the four magic bytes `CPT1`, a `u8` order, `order` extents as
//! little-endian `u64`, then every element as a little-endian `f64` pair
//! `(re, im)` in column-major order.
//!
//! Parameter files hold one path per line: `re_b im_b omega1 omega2 psi varsigma`.
//! Blank lines and lines starting with `#` are skipped on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::{ChannelParamSet, PathParams};
use crate::tensor::ComplexTensor;

pub const CPT1_MAGIC: &[u8; 4] = b"CPT1";

pub fn write_cpt1<W: Write>(mut w: W, t: &ComplexTensor) -> Result<()> {
    let order = u8::try_from(t.order())
        .map_err(|_| Error::Format(format!("order {} does not fit in u8", t.order())))?;
    w.write_all(CPT1_MAGIC)?;
    w.write_all(&[order])?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for z in t.data() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cpt1<R: Read>(mut r: R) -> Result<ComplexTensor> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CPT1_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut order = [0u8; 1];
    r.read_exact(&mut order)?;
    let mut dims = Vec::with_capacity(order[0] as usize);
    let mut buf = [0u8; 8];
    for _ in 0..order[0] {
        r.read_exact(&mut buf)?;
        let d = usize::try_from(u64::from_le_bytes(buf))
            .map_err(|_| Error::Format("extent overflows usize".into()))?;
        dims.push(d);
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("element count overflows".into()))?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf);
        r.read_exact(&mut buf)?;
        let im = f64::from_le_bytes(buf);
        data.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after tensor payload".into()));
    }
    ComplexTensor::new(dims, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_cpt1(path: impl AsRef<Path>, t: &ComplexTensor) -> Result<()> {
    write_cpt1(BufWriter::new(File::create(path)?), t)
}

pub fn load_cpt1(path: impl AsRef<Path>) -> Result<ComplexTensor> {
    read_cpt1(BufReader::new(File::open(path)?))
}

pub fn write_params<W: Write>(mut w: W, set: &ChannelParamSet) -> Result<()> {
    for p in &set.paths {
        // `{:e}` prints the shortest representation that round-trips.
        writeln!(
            w,
            "{:e} {:e} {:e} {:e} {:e} {:e}",
            p.b.re, p.b.im, p.omega1, p.omega2, p.psi, p.varsigma
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_params<R: BufRead>(r: R) -> Result<ChannelParamSet> {
    let mut paths = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        let [re, im, omega1, omega2, psi, varsigma] = fields[..] else {
            return Err(Error::Format(format!(
                "line {}: expected 6 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        };
        paths.push(PathParams {
            b: Complex64::new(re, im),
            omega1,
            omega2,
            psi,
            varsigma,
        });
    }
    Ok(ChannelParamSet::new(paths))
}

pub fn save_params(path: impl AsRef<Path>, set: &ChannelParamSet) -> Result<()> {
    write_params(BufWriter::new(File::create(path)?), set)
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ChannelParamSet> {
    read_params(BufReader::new(File::open(path)?))
}
