//! Plain-text file formats and the binary operator cache.
//!
//! All text formats round-trip byte-identically (floats are written with 17
//! significant digits, `{:.16e}`).
//!
//! Mesh file:
//! ```text
//! ntmesh 1
//! <V> <T>
//! x y z            (V vertex lines)
//! i j k            (T triangle lines, 0-based)
//! ```
//!
//! Design file:
//! ```text
//! ntdesign 1
//! <T>
//! rho              (T density lines)
//! ```
//!
//! Polyline file: a `kind,param,R,samples` header line, the corresponding
//! values on the next line, a `t,x,y,z` column header, then one sample per
//! line.
//!
//! Convergence log: CSV with header `iter,Qe,Qm,Q,beta,max_drho,area_frac`,
//! flushed after every appended row.
//!
//! Sweep table: CSV with header `ka,Qe,Qm,Q,selfres`, 12 significant digits,
//! `selfres` ∈ {0, 1} (or `error:<reason>` for failed points).
//!
//! Operator cache (little-endian): magic `QTOPOC01`, then `N: u64`, `T: u64`,
//! `k: f64`, `mesh_hash: u64`, `quad_id: u32`, `fd_step: f64`, followed by
//! the column-major Z₀ array as interleaved (re, im) f64 pairs and the
//! column-major ∂X₀/∂ω array as f64. Loads verify every header field.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use faer::Mat;
use num_complex::Complex64;
use thiserror::Error;

use crate::curves::{CurveKind, SphericalCurve};
use crate::mesh::{BasisSet, MeshError, TriMesh};
use crate::operators::{AssemblyError, FeedSpec, OperatorSet};
use crate::qfactor::SweepEntry;
use crate::quadrature::QuadSpec;
use crate::topopt::IterationRecord;
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// 17 significant digits; exact f64 round-trip.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// 12 significant digits, for report tables.
pub fn fmt_g12(x: f64) -> String {
    format!("{x:.11e}")
}

struct LineParser<'a> {
    path: &'a Path,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, IoError> {
        Err(IoError::Parse { path: self.path.to_path_buf(), line: self.line, msg: msg.into() })
    }

    fn parse<T: std::str::FromStr>(&self, tok: &str, what: &str) -> Result<T, IoError> {
        tok.parse().or_else(|_| self.fail(format!("cannot parse {what} from {tok:?}")))
    }
}

pub fn write_mesh(path: &Path, mesh: &TriMesh) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "ntmesh 1")?;
        writeln!(w, "{} {}", mesh.vertices.len(), mesh.triangles.len())?;
        for v in &mesh.vertices {
            writeln!(w, "{} {} {}", fmt_g17(v.x), fmt_g17(v.y), fmt_g17(v.z))?;
        }
        for t in &mesh.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        w.flush()
    })();
    body.map_err(io_err(path))
}

pub fn read_mesh(path: &Path) -> Result<TriMesh, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let mut p = LineParser { path, line: 0 };
    let mut next_line = |p: &mut LineParser| -> Result<String, IoError> {
        p.line += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(IoError::Io { path: path.to_path_buf(), source: e }),
            None => {
                Err(IoError::Parse { path: path.to_path_buf(), line: p.line, msg: "unexpected end of file".into() })
            }
        }
    };

    let header = next_line(&mut p)?;
    if header.trim() != "ntmesh 1" {
        return p.fail(format!("expected `ntmesh 1`, got {header:?}"));
    }
    let counts = next_line(&mut p)?;
    let mut it = counts.split_whitespace();
    let nv: usize = p.parse(it.next().unwrap_or(""), "vertex count")?;
    let nt: usize = p.parse(it.next().unwrap_or(""), "triangle count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = next_line(&mut p)?;
        let mut it = l.split_whitespace();
        let x: f64 = p.parse(it.next().unwrap_or(""), "x coordinate")?;
        let y: f64 = p.parse(it.next().unwrap_or(""), "y coordinate")?;
        let z: f64 = p.parse(it.next().unwrap_or(""), "z coordinate")?;
        vertices.push(Vec3::new(x, y, z));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let l = next_line(&mut p)?;
        let mut it = l.split_whitespace();
        let i: usize = p.parse(it.next().unwrap_or(""), "vertex index")?;
        let j: usize = p.parse(it.next().unwrap_or(""), "vertex index")?;
        let k: usize = p.parse(it.next().unwrap_or(""), "vertex index")?;
        triangles.push([i, j, k]);
    }
    Ok(TriMesh::from_parts(vertices, triangles)?)
}

pub fn write_design(path: &Path, rho: &[f64]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "ntdesign 1")?;
        writeln!(w, "{}", rho.len())?;
        for r in rho {
            writeln!(w, "{}", fmt_g17(*r))?;
        }
        w.flush()
    })();
    body.map_err(io_err(path))
}

pub fn read_design(path: &Path) -> Result<Vec<f64>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let mut p = LineParser { path, line: 0 };
    let mut next_line = |p: &mut LineParser| -> Result<String, IoError> {
        p.line += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(IoError::Io { path: path.to_path_buf(), source: e }),
            None => {
                Err(IoError::Parse { path: path.to_path_buf(), line: p.line, msg: "unexpected end of file".into() })
            }
        }
    };
    let header = next_line(&mut p)?;
    if header.trim() != "ntdesign 1" {
        return p.fail(format!("expected `ntdesign 1`, got {header:?}"));
    }
    let count: usize = {
        let l = next_line(&mut p)?;
        p.parse(l.trim(), "density count")?
    };
    let mut rho = Vec::with_capacity(count);
    for _ in 0..count {
        let l = next_line(&mut p)?;
        let v: f64 = p.parse(l.trim(), "density")?;
        rho.push(v);
    }
    Ok(rho)
}

fn curve_kind_name(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Helix => "helix",
        CurveKind::Loxodrome => "loxodrome",
    }
}

pub fn write_polyline(path: &Path, curve: &SphericalCurve) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let body = (|| -> std::io::Result<()> {
        writeln!(w, "kind,param,R,samples")?;
        writeln!(
            w,
            "{},{},{},{}",
            curve_kind_name(curve.kind),
            fmt_g17(curve.param),
            fmt_g17(curve.radius),
            curve.samples.len()
        )?;
        writeln!(w, "t,x,y,z")?;
        for (t, pnt) in &curve.samples {
            writeln!(w, "{},{},{},{}", fmt_g17(*t), fmt_g17(pnt.x), fmt_g17(pnt.y), fmt_g17(pnt.z))?;
        }
        w.flush()
    })();
    body.map_err(io_err(path))
}

pub fn read_polyline(path: &Path) -> Result<SphericalCurve, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut lines = BufReader::new(file).lines();
    let mut p = LineParser { path, line: 0 };
    let mut next_line = |p: &mut LineParser| -> Result<String, IoError> {
        p.line += 1;
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(IoError::Io { path: path.to_path_buf(), source: e }),
            None => {
                Err(IoError::Parse { path: path.to_path_buf(), line: p.line, msg: "unexpected end of file".into() })
            }
        }
    };
    let header = next_line(&mut p)?;
    if header.trim() != "kind,param,R,samples" {
        return p.fail("expected polyline header");
    }
    let meta = next_line(&mut p)?;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 4 {
        return p.fail("expected 4 metadata fields");
    }
    let kind = match parts[0] {
        "helix" => CurveKind::Helix,
        "loxodrome" => CurveKind::Loxodrome,
        other => return p.fail(format!("unknown curve kind {other:?}")),
    };
    let param: f64 = p.parse(parts[1], "curve parameter")?;
    let radius: f64 = p.parse(parts[2], "radius")?;
    let count: usize = p.parse(parts[3], "sample count")?;
    let cols = next_line(&mut p)?;
    if cols.trim() != "t,x,y,z" {
        return p.fail("expected `t,x,y,z` column header");
    }
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let l = next_line(&mut p)?;
        let parts: Vec<&str> = l.split(',').collect();
        if parts.len() != 4 {
            return p.fail("expected 4 sample fields");
        }
        let t: f64 = p.parse(parts[0], "t")?;
        let x: f64 = p.parse(parts[1], "x")?;
        let y: f64 = p.parse(parts[2], "y")?;
        let z: f64 = p.parse(parts[3], "z")?;
        samples.push((t, Vec3::new(x, y, z)));
    }
    Ok(SphericalCurve { kind, param, radius, samples })
}

pub const CONVERGENCE_HEADER: &str = "iter,Qe,Qm,Q,beta,max_drho,area_frac";

pub fn format_record(r: &IterationRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.iter,
        fmt_g17(r.qe),
        fmt_g17(r.qm),
        fmt_g17(r.q),
        fmt_g17(r.beta),
        fmt_g17(r.max_drho),
        fmt_g17(r.area_frac)
    )
}

/// Streaming convergence log, flushed after every row so aborted runs keep
/// their history.
pub struct ConvergenceLog {
    path: PathBuf,
    file: File,
}

impl ConvergenceLog {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        let mut file = File::create(path).map_err(io_err(path))?;
        writeln!(file, "{CONVERGENCE_HEADER}").map_err(io_err(path))?;
        file.flush().map_err(io_err(path))?;
        Ok(ConvergenceLog { path: path.to_path_buf(), file })
    }

    pub fn append(&mut self, record: &IterationRecord) -> Result<(), IoError> {
        writeln!(self.file, "{}", format_record(record))
            .and_then(|_| self.file.flush())
            .map_err(io_err(&self.path))
    }
}

pub const SWEEP_HEADER: &str = "ka,Qe,Qm,Q,selfres";

pub fn sweep_to_csv(entries: &[SweepEntry]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for e in entries {
        match e {
            SweepEntry::Ok(r) => {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_g12(r.ka),
                    fmt_g12(r.qe),
                    fmt_g12(r.qm),
                    fmt_g12(r.q),
                    u8::from(r.self_resonant)
                ));
            }
            SweepEntry::Failed { ka, error } => {
                out.push_str(&format!(
                    "{},nan,nan,nan,error:{}\n",
                    fmt_g12(*ka),
                    error.replace(',', ";")
                ));
            }
        }
    }
    out
}

pub fn write_sweep(path: &Path, entries: &[SweepEntry]) -> Result<(), IoError> {
    std::fs::write(path, sweep_to_csv(entries)).map_err(io_err(path))
}

const CACHE_MAGIC: &[u8; 8] = b"QTOPOC01";

/// Assemble the operator set, using `cache` to skip the three EFIE
/// assemblies when a matching dump exists (keyed by mesh hash, k, quadrature
/// id and finite-difference step). A stale or foreign cache file is silently
/// recomputed and overwritten.
pub fn assemble_with_cache(
    cache: &Path,
    mesh: &TriMesh,
    basis: &BasisSet,
    k: f64,
    quad: QuadSpec,
    feeds: &FeedSpec,
    fd_step: f64,
) -> Result<OperatorSet, IoError> {
    let n = basis.len();
    let t = mesh.num_triangles();
    let hash = mesh.content_hash();
    if let Some((z0, dx0)) = try_load_cache(cache, n, t, k, hash, quad.id(), fd_step) {
        let r0 = Mat::from_fn(n, n, |i, j| z0[(i, j)].re);
        let x0 = Mat::from_fn(n, n, |i, j| z0[(i, j)].im);
        let omega = k * crate::operators::C0;
        let (xe, xm) = crate::operators::stored_energy_matrices(&x0, &dx0, omega);
        let psi = crate::operators::assemble_material_elements(mesh, basis);
        let v = crate::operators::delta_gap_excitation(basis, feeds)
            .map_err(AssemblyError::from)?;
        return Ok(OperatorSet { z0, r0, x0, dx0_domega: dx0, xe, xm, psi, v, k, omega, quad });
    }
    let ops = OperatorSet::assemble(mesh, basis, k, quad, feeds, fd_step)?;
    write_cache(cache, &ops, t, hash, fd_step)?;
    Ok(ops)
}

fn try_load_cache(
    path: &Path,
    n: usize,
    t: usize,
    k: f64,
    mesh_hash: u64,
    quad_id: u32,
    fd_step: f64,
) -> Option<(Mat<Complex64>, Mat<f64>)> {
    let mut f = BufReader::new(File::open(path).ok()?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic).ok()?;
    if &magic != CACHE_MAGIC {
        return None;
    }
    let mut u64buf = [0u8; 8];
    let mut read_u64 = |f: &mut BufReader<File>| -> Option<u64> {
        f.read_exact(&mut u64buf).ok()?;
        Some(u64::from_le_bytes(u64buf))
    };
    let file_n = read_u64(&mut f)?;
    let file_t = read_u64(&mut f)?;
    let file_k = f64::from_bits(read_u64(&mut f)?);
    let file_hash = read_u64(&mut f)?;
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf).ok()?;
    let file_quad = u32::from_le_bytes(u32buf);
    let file_fd = f64::from_bits(read_u64(&mut f)?);
    if file_n != n as u64
        || file_t != t as u64
        || file_k != k
        || file_hash != mesh_hash
        || file_quad != quad_id
        || file_fd != fd_step
    {
        return None;
    }
    let mut z0 = Mat::<Complex64>::zeros(n, n);
    let mut buf = [0u8; 16];
    for j in 0..n {
        for i in 0..n {
            f.read_exact(&mut buf).ok()?;
            let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            z0[(i, j)] = Complex64::new(re, im);
        }
    }
    let mut dx0 = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            f.read_exact(&mut u64buf).ok()?;
            dx0[(i, j)] = f64::from_le_bytes(u64buf);
        }
    }
    Some((z0, dx0))
}

fn write_cache(
    path: &Path,
    ops: &OperatorSet,
    t: usize,
    mesh_hash: u64,
    fd_step: f64,
) -> Result<(), IoError> {
    let n = ops.n();
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let body = (|| -> std::io::Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&(t as u64).to_le_bytes())?;
        w.write_all(&ops.k.to_bits().to_le_bytes())?;
        w.write_all(&mesh_hash.to_le_bytes())?;
        w.write_all(&ops.quad.id().to_le_bytes())?;
        w.write_all(&fd_step.to_bits().to_le_bytes())?;
        for j in 0..n {
            for i in 0..n {
                let v = ops.z0[(i, j)];
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        for j in 0..n {
            for i in 0..n {
                w.write_all(&ops.dx0_domega[(i, j)].to_le_bytes())?;
            }
        }
        w.flush()
    })();
    body.map_err(io_err(path))
}
