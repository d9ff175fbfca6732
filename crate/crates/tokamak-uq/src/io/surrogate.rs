//! Binary surrogate file and its text manifest.
//!
//! Layout, all little-endian:
//! magic `TUQSURR1`, u32 d, u32 level, d x u32 active coil indices,
//! d x (f64 lo, f64 hi), u64 mesh hash, u64 node count, u64 vector length,
//! u64 failure count and the failed node indices as u64,
//! then per node d x u32 multi-index followed by d x (u32 level, u32 index),
//! then the node-major surplus matrix as f64.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use tokamak_uq_core::sparse::{GridNode, MultiIndex, NodeKey, ParamBox, SparseGrid, Surrogate};

use super::{fmt_f64, write, IoError};

const MAGIC: &[u8; 8] = b"TUQSURR1";

/// A surrogate together with the coils its parameters drive.
#[derive(Clone, Debug)]
pub struct SurrogateFile {
    pub active: Vec<usize>,
    pub surrogate: Surrogate,
}

pub fn encode(f: &SurrogateFile) -> Vec<u8> {
    let s = &f.surrogate;
    let d = s.dim();
    let mut b = Vec::with_capacity(64 + s.surpluses.len() * 8);
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&(d as u32).to_le_bytes());
    b.extend_from_slice(&s.level().to_le_bytes());
    for &a in &f.active {
        b.extend_from_slice(&(a as u32).to_le_bytes());
    }
    for (lo, hi) in s.bounds.lo.iter().zip(&s.bounds.hi) {
        b.extend_from_slice(&lo.to_le_bytes());
        b.extend_from_slice(&hi.to_le_bytes());
    }
    b.extend_from_slice(&s.mesh_hash.to_le_bytes());
    b.extend_from_slice(&(s.node_count() as u64).to_le_bytes());
    b.extend_from_slice(&(s.vlen as u64).to_le_bytes());
    b.extend_from_slice(&(s.failures.len() as u64).to_le_bytes());
    for &k in &s.failures {
        b.extend_from_slice(&(k as u64).to_le_bytes());
    }
    for n in &s.grid.nodes {
        for &i in &n.index.0 {
            b.extend_from_slice(&i.to_le_bytes());
        }
        for k in &n.keys {
            b.extend_from_slice(&k.level.to_le_bytes());
            b.extend_from_slice(&k.index.to_le_bytes());
        }
    }
    for v in &s.surpluses {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("truncated surrogate file")?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
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
    fn usize(&mut self) -> Result<usize, String> {
        usize::try_from(self.u64()?).map_err(|_| "count does not fit in memory".to_string())
    }
}

pub fn decode(buf: &[u8]) -> Result<SurrogateFile, String> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err("not a surrogate file".into());
    }
    let d = r.u32()? as usize;
    let level = r.u32()?;
    if d == 0 || d > 64 {
        return Err(format!("unsupported dimension {d}"));
    }
    let active = (0..d).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for _ in 0..d {
        lo.push(r.f64()?);
        hi.push(r.f64()?);
    }
    let bounds = ParamBox::new(lo, hi).map_err(|e| e.to_string())?;
    let mesh_hash = r.u64()?;
    let nodes = r.usize()?;
    let vlen = r.usize()?;
    let nfail = r.usize()?;
    if nfail > nodes {
        return Err("more failures than nodes".into());
    }
    let failures = (0..nfail).map(|_| r.usize()).collect::<Result<Vec<_>, _>>()?;
    let mut table = Vec::with_capacity(nodes.min(buf.len()));
    for _ in 0..nodes {
        let index = MultiIndex((0..d).map(|_| r.u32()).collect::<Result<_, _>>()?);
        let keys = (0..d).map(|_| Ok(NodeKey { level: r.u32()?, index: r.u32()? })).collect::<Result<_, String>>()?;
        table.push(GridNode { index, keys });
    }
    let len = nodes.checked_mul(vlen).ok_or("surplus matrix too large")?;
    if buf.len() - r.pos != len * 8 {
        return Err("surplus matrix length does not match the header".into());
    }
    let surpluses = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;

    let expected = SparseGrid::new(d, level);
    let key = |n: &GridNode| (n.index.clone(), n.keys.iter().map(|k| (k.level, k.index)).collect::<Vec<_>>());
    let want: BTreeSet<_> = expected.nodes.iter().map(key).collect();
    let have: BTreeSet<_> = table.iter().map(key).collect();
    if want != have || have.len() != table.len() {
        return Err(format!("node table is not the level-{level} sparse grid"));
    }
    let grid = SparseGrid { dim: d, level, nodes: table };
    let surrogate = Surrogate::from_parts(grid, bounds, vlen, surpluses, failures, mesh_hash).map_err(|e| e.to_string())?;
    Ok(SurrogateFile { active, surrogate })
}

pub fn save_surrogate(f: &SurrogateFile, path: &Path) -> Result<(), IoError> {
    write(path, &encode(f))
}

pub fn load_surrogate(path: &Path) -> Result<SurrogateFile, IoError> {
    let buf = std::fs::read(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    decode(&buf).map_err(|msg| IoError::Parse { path: path.to_path_buf(), msg })
}

/// Human-readable summary; `build_seconds` is informational only.
pub fn manifest(f: &SurrogateFile, build_seconds: Option<f64>, solver_calls: Option<usize>) -> String {
    let s = &f.surrogate;
    let mut m = String::new();
    let _ = writeln!(m, "dimension = {}", s.dim());
    let _ = writeln!(m, "level = {}", s.level());
    let _ = writeln!(m, "active_coils = {:?}", f.active);
    for (i, (lo, hi)) in s.bounds.lo.iter().zip(&s.bounds.hi).enumerate() {
        let _ = writeln!(m, "bounds[{i}] = [{}, {}]", fmt_f64(*lo), fmt_f64(*hi));
    }
    let _ = writeln!(m, "mesh_hash = {:016x}", s.mesh_hash);
    let _ = writeln!(m, "node_count = {}", s.node_count());
    let _ = writeln!(m, "vector_length = {}", s.vlen);
    let _ = writeln!(m, "failed_nodes = {:?}", s.failures);
    if let Some(c) = solver_calls {
        let _ = writeln!(m, "solver_calls = {c}");
    }
    if let Some(t) = build_seconds {
        let _ = writeln!(m, "build_seconds = {t:.3}");
    }
    m
}
