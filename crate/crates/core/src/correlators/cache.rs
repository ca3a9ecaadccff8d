//! Binary dump of [`CorrelatorTables`].
//!
//! Layout, all little-endian: magic, `u32` version, `u32` input kind, `u64`
//! photon number, grid (`f64` dt, `u64` steps, `u64` stride), parameters
//! (`Γ`, `Δ`, `v_g`, `w`, `x0`, `L` as `f64`), the excitation and the `|D|²`
//! column sums as length-prefixed `f64` arrays, the interference channels
//! (`u64` count; per channel weight, delay and a length-prefixed complex
//! array), then the correlation table as `u64` node count followed by its
//! row-major lower triangle of `(re, im)` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use super::{CorrelatorTables, InputKind, InterferenceChannel, TriTable};
use crate::model::{FreeField, ModelParams, PulseSpec, TimeGrid};
use crate::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"WQEDCT\0\0";
pub const CACHE_VERSION: u32 = 1;

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn c64(&mut self, v: C64) -> Result<()> {
        self.f64(v.re)?;
        self.f64(v.im)
    }
    fn reals(&mut self, v: &[f64]) -> Result<()> {
        self.u64(v.len() as u64)?;
        v.iter().try_for_each(|&x| self.f64(x))
    }
    fn complexes(&mut self, v: &[C64]) -> Result<()> {
        self.u64(v.len() as u64)?;
        v.iter().try_for_each(|&x| self.c64(x))
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(|e| Error::Cache(format!("truncated cache file: {e}")))?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn len(&mut self, limit: u64) -> Result<usize> {
        let n = self.u64()?;
        if n > limit {
            return Err(Error::Cache(format!("array length {n} exceeds {limit}")));
        }
        Ok(n as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn c64(&mut self) -> Result<C64> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }
    fn reals(&mut self, limit: u64) -> Result<Vec<f64>> {
        let n = self.len(limit)?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn complexes(&mut self, limit: u64) -> Result<Vec<C64>> {
        let n = self.len(limit)?;
        (0..n).map(|_| self.c64()).collect()
    }
}

fn kind_code(kind: InputKind) -> u32 {
    match kind {
        InputKind::SinglePhoton => 0,
        InputKind::TwoPhoton => 1,
        InputKind::Fock(_) => 2,
    }
}

/// Writes `tables` to `path`.
pub fn write_cache(path: &Path, tables: &CorrelatorTables) -> Result<()> {
    let mut w = Writer(BufWriter::new(File::create(path)?));
    w.0.write_all(CACHE_MAGIC)?;
    w.u32(CACHE_VERSION)?;
    w.u32(kind_code(tables.kind))?;
    w.u64(tables.photons() as u64)?;
    w.f64(tables.grid.dt)?;
    w.u64(tables.grid.steps as u64)?;
    w.u64(tables.correlation.stride() as u64)?;
    let (p, s) = (&tables.params, &tables.spec);
    for v in [p.gamma, p.delta, p.v_g, s.width, s.x0, s.separation] {
        w.f64(v)?;
    }
    w.reals(&tables.excitation)?;
    w.reals(&tables.pair_column_sums)?;
    w.u64(tables.channels.len() as u64)?;
    for ch in &tables.channels {
        w.f64(ch.weight)?;
        w.f64(ch.delay)?;
        w.complexes(&ch.amplitude)?;
    }
    w.u64(tables.correlation.nodes() as u64)?;
    for z in tables.correlation.row_major() {
        w.c64(z)?;
    }
    w.0.flush()?;
    Ok(())
}

/// Reads tables written by [`write_cache`].
pub fn read_cache(path: &Path) -> Result<CorrelatorTables> {
    let mut r = Reader(BufReader::new(File::open(path)?));
    if &r.bytes::<8>()? != CACHE_MAGIC {
        return Err(Error::Cache(format!("{} is not a correlator cache", path.display())));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported cache version {version}")));
    }
    let code = r.u32()?;
    let photons = r.u64()? as usize;
    let kind = match code {
        0 => InputKind::SinglePhoton,
        1 => InputKind::TwoPhoton,
        2 => InputKind::Fock(photons),
        c => return Err(Error::Cache(format!("unknown input kind {c}"))),
    };
    let dt = r.f64()?;
    let steps = r.u64()? as usize;
    let stride = r.u64()? as usize;
    if stride == 0 || steps == 0 || steps % stride != 0 {
        return Err(Error::Cache(format!("inconsistent grid: {steps} steps, stride {stride}")));
    }
    let grid = TimeGrid { dt, steps };
    let [gamma, delta, v_g, width, x0, separation] = [r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?, r.f64()?];
    let params = ModelParams::new(gamma, delta, v_g).map_err(|e| Error::Cache(e.to_string()))?;
    let spec = PulseSpec::new(width, x0, separation, photons).map_err(|e| Error::Cache(e.to_string()))?;

    let n = grid.len() as u64;
    let excitation = r.reals(n)?;
    let pair_column_sums = r.reals(n)?;
    let count = r.len(16)?;
    let mut channels = Vec::with_capacity(count);
    for _ in 0..count {
        let weight = r.f64()?;
        let delay = r.f64()?;
        channels.push(InterferenceChannel { weight, delay, amplitude: r.complexes(n)? });
    }
    let nodes = r.len(n)?;
    if nodes != steps / stride + 1 || excitation.len() != n as usize || channels.iter().any(|c| c.amplitude.len() != n as usize) {
        return Err(Error::Cache("array lengths do not match the grid".into()));
    }
    let data: Vec<C64> = (0..nodes * (nodes + 1) / 2).map(|_| r.c64()).collect::<Result<_>>()?;
    let correlation = TriTable::from_row_major(dt, stride, nodes, &data);
    let free = match kind {
        InputKind::TwoPhoton => FreeField::for_spec(&spec),
        k => FreeField::Identical { n: k.photons() },
    };
    Ok(CorrelatorTables { kind, params, spec, grid, free, excitation, correlation, channels, pair_column_sums })
}
