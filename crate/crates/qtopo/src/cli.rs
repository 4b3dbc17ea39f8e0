//! Command-line driver: run configuration and the subcommand entry points.
//!
//! The configuration file is TOML; unknown keys are rejected with their
//! location. Exit codes follow the convention 0 = success, 1 = numerical
//! failure, 2 = usage/config error (the binary maps [`CliError`] variants).
//!
//! A `threads` key controls dense-kernel parallelism; when omitted, the
//! `QTOPO_THREADS` environment variable is honored, defaulting to 1.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::curves::{rotate_half_turn, sample_curve, CurveKind};
use crate::io;
use crate::linalg;
use crate::material::InterpolationSpec;
use crate::mesh::{build_rwg, generate_plate, generate_sphere, BasisSet, TriMesh};
use crate::operators::{
    delta_gap_excitation, feed_orientation_sign, locate_feed_edge, Feed, FeedSpec, OperatorSet,
};
use crate::qfactor::{frequency_sweep, SweepDesign, SELF_RESONANCE_TOL};
use crate::quadrature::QuadSpec;
use crate::topopt::{
    gradient_check, optimize, OptConfig, SeedMode, ThresholdOutcome,
};
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn numerical_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

// ── Run configuration ────────────────────────────────────────────────────

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub threads: Option<usize>,
    pub mesh: MeshSection,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub feeds: Vec<FeedSection>,
    #[serde(default)]
    pub material: MaterialSection,
    pub optimization: OptimizationSection,
    #[serde(default)]
    pub output: OutputSection,
    pub cache: Option<CacheSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub kind: String,
    pub length: Option<f64>,
    pub aspect: Option<f64>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub subdivisions: Option<usize>,
    pub radius: Option<f64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub ka: f64,
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_quadrature() -> String {
    "default".into()
}

fn default_fd_step() -> f64 {
    1e-3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedSection {
    /// Either an explicit mesh edge index…
    pub edge: Option<usize>,
    /// …or a position + current direction for the locator.
    pub position: Option<[f64; 3]>,
    pub direction: Option<[f64; 3]>,
    #[serde(default = "default_voltage")]
    pub voltage: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

fn default_voltage() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub omega_vacuum: f64,
    pub omega_metal: f64,
    pub p: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection { omega_vacuum: 1e5, omega_metal: 1.0, p: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationSection {
    pub area_fraction: f64,
    pub rmin_frac: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_delta_rho_max")]
    pub delta_rho_max: f64,
    #[serde(default = "default_beta0")]
    pub beta0: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_move_limit")]
    pub move_limit: f64,
    #[serde(default = "default_init")]
    pub init: String,
    pub init_value: Option<f64>,
    pub init_seed: Option<u64>,
    pub init_path: Option<PathBuf>,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_true")]
    pub continuation_mod_first: bool,
    #[serde(default)]
    pub mma_reset_on_continuation: bool,
}

fn default_max_iterations() -> usize {
    600
}
fn default_delta_rho_max() -> f64 {
    0.01
}
fn default_beta0() -> f64 {
    1.0
}
fn default_beta_max() -> f64 {
    32.0
}
fn default_eta() -> f64 {
    0.5
}
fn default_move_limit() -> f64 {
    0.25
}
fn default_init() -> String {
    "uniform-sf".into()
}
fn default_snapshot_stride() -> usize {
    50
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheSection {
    pub path: PathBuf,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate_paths(path.parent().unwrap_or(Path::new(".")))?;
        Ok(cfg)
    }

    /// All referenced paths must be usable before the run starts.
    fn validate_paths(&self, base: &Path) -> Result<(), CliError> {
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        if self.mesh.kind == "file" {
            let p = self
                .mesh
                .path
                .as_ref()
                .ok_or_else(|| CliError::Config("mesh.kind = \"file\" requires mesh.path".into()))?;
            if !resolve(p).is_file() {
                return Err(CliError::Config(format!("mesh file not found: {}", p.display())));
            }
        }
        if self.optimization.init == "file" {
            let p = self.optimization.init_path.as_ref().ok_or_else(|| {
                CliError::Config("init = \"file\" requires init_path".into())
            })?;
            if !resolve(p).is_file() {
                return Err(CliError::Config(format!("init field not found: {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self, base: &Path) -> Result<TriMesh, CliError> {
        let m = &self.mesh;
        match m.kind.as_str() {
            "plate" => {
                let (nx, ny) = (
                    m.nx.ok_or_else(|| CliError::Config("mesh.nx required for plate".into()))?,
                    m.ny.ok_or_else(|| CliError::Config("mesh.ny required for plate".into()))?,
                );
                generate_plate(m.length.unwrap_or(1.0), m.aspect.unwrap_or(0.5), nx, ny)
                    .map_err(config_err)
            }
            "sphere" => {
                let s = m
                    .subdivisions
                    .ok_or_else(|| CliError::Config("mesh.subdivisions required for sphere".into()))?;
                generate_sphere(s, m.radius.unwrap_or(1.0)).map_err(config_err)
            }
            "file" => {
                let p = m.path.as_ref().unwrap();
                let p = if p.is_absolute() { p.clone() } else { base.join(p) };
                io::read_mesh(&p).map_err(config_err)
            }
            other => Err(CliError::Config(format!("unknown mesh.kind {other:?}"))),
        }
    }

    pub fn quad(&self) -> Result<QuadSpec, CliError> {
        match self.physics.quadrature.as_str() {
            "default" => Ok(QuadSpec::DEFAULT),
            "high" => Ok(QuadSpec::HIGH),
            other => Err(CliError::Config(format!(
                "physics.quadrature must be \"default\" or \"high\", got {other:?}"
            ))),
        }
    }

    pub fn interp(&self) -> Result<InterpolationSpec, CliError> {
        InterpolationSpec::new(
            self.material.omega_metal,
            self.material.omega_vacuum,
            self.material.p,
        )
        .map_err(config_err)
    }

    pub fn resolve_feeds(&self, mesh: &TriMesh, basis: &BasisSet) -> Result<FeedSpec, CliError> {
        if self.feeds.is_empty() {
            return Err(CliError::Config("at least one [[feeds]] entry required".into()));
        }
        let mut feeds = Vec::new();
        for (i, f) in self.feeds.iter().enumerate() {
            let (edge, orient) = match (f.edge, f.position, f.direction) {
                (Some(e), _, _) => {
                    let orient = match f.direction {
                        Some(d) => feed_orientation_sign(
                            mesh,
                            basis,
                            e,
                            Vec3::new(d[0], d[1], d[2]),
                        )
                        .map_err(config_err)?,
                        None => 1.0,
                    };
                    (e, orient)
                }
                (None, Some(p), Some(d)) => {
                    let point = Vec3::new(p[0], p[1], p[2]);
                    let dir = Vec3::new(d[0], d[1], d[2]);
                    let e = locate_feed_edge(mesh, basis, point, dir).map_err(config_err)?;
                    let s = feed_orientation_sign(mesh, basis, e, dir).map_err(config_err)?;
                    (e, s)
                }
                _ => {
                    return Err(CliError::Config(format!(
                        "feed {i}: give either `edge` or both `position` and `direction`"
                    )))
                }
            };
            let voltage =
                Complex64::from_polar(f.voltage * orient, f.phase_deg.to_radians());
            feeds.push(Feed { edge, voltage });
        }
        Ok(FeedSpec { feeds })
    }

    pub fn opt_config(&self, base: &Path) -> Result<OptConfig, CliError> {
        let o = &self.optimization;
        let init = match o.init.as_str() {
            "uniform-sf" => SeedMode::UniformSf,
            "uniform" => SeedMode::Uniform(o.init_value.ok_or_else(|| {
                CliError::Config("init = \"uniform\" requires init_value".into())
            })?),
            "random" => SeedMode::Random(o.init_seed.ok_or_else(|| {
                CliError::Config("init = \"random\" requires init_seed".into())
            })?),
            "file" => {
                let p = o.init_path.as_ref().unwrap();
                let p = if p.is_absolute() { p.clone() } else { base.join(p) };
                SeedMode::FromField(io::read_design(&p).map_err(config_err)?)
            }
            other => return Err(CliError::Config(format!("unknown init mode {other:?}"))),
        };
        let cfg = OptConfig {
            ka: self.physics.ka,
            sf: o.area_fraction,
            rmin_frac: o.rmin_frac,
            max_iterations: o.max_iterations,
            delta_rho_max: o.delta_rho_max,
            beta0: o.beta0,
            beta_max: o.beta_max,
            eta: o.eta,
            interp: self.interp()?,
            move_limit: o.move_limit,
            init,
            snapshot_stride: o.snapshot_stride,
            continuation_mod_first: o.continuation_mod_first,
            mma_reset_on_continuation: o.mma_reset_on_continuation,
        };
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }

    pub fn apply_threads(&self) {
        let threads = self
            .threads
            .or_else(|| std::env::var("QTOPO_THREADS").ok().and_then(|v| v.parse().ok()))
            .unwrap_or(1);
        linalg::set_threads(threads);
    }
}

/// Everything a config resolves to, ready for analysis.
pub struct ResolvedRun {
    pub cfg: OptConfig,
    pub mesh: TriMesh,
    pub basis: BasisSet,
    pub feeds: FeedSpec,
    pub quad: QuadSpec,
    pub fd_step: f64,
    pub out_dir: PathBuf,
    pub cache: Option<PathBuf>,
}

pub fn resolve(config_path: &Path) -> Result<(RunConfig, ResolvedRun), CliError> {
    let raw = RunConfig::from_file(config_path)?;
    raw.apply_threads();
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mesh = raw.build_mesh(&base)?;
    let basis = build_rwg(&mesh).map_err(config_err)?;
    let feeds = raw.resolve_feeds(&mesh, &basis)?;
    let cfg = raw.opt_config(&base)?;
    let quad = raw.quad()?;
    let fd_step = raw.physics.fd_step;
    let out_dir = raw
        .output
        .dir
        .clone()
        .map(|d| if d.is_absolute() { d } else { base.join(d) })
        .unwrap_or_else(|| base.join("out"));
    let cache = raw
        .cache
        .as_ref()
        .map(|c| if c.path.is_absolute() { c.path.clone() } else { base.join(&c.path) });
    Ok((raw, ResolvedRun { cfg, mesh, basis, feeds, quad, fd_step, out_dir, cache }))
}

fn assemble(run: &ResolvedRun) -> Result<OperatorSet, CliError> {
    let k = run.cfg.ka / run.mesh.a;
    match &run.cache {
        Some(path) => io::assemble_with_cache(
            path,
            &run.mesh,
            &run.basis,
            k,
            run.quad,
            &run.feeds,
            run.fd_step,
        )
        .map_err(numerical_err),
        None => OperatorSet::assemble(&run.mesh, &run.basis, k, run.quad, &run.feeds, run.fd_step)
            .map_err(numerical_err),
    }
}

// ── Commands ─────────────────────────────────────────────────────────────

/// `mesh plate|sphere`: generate, optionally write, and print the counts.
pub fn cmd_mesh(mesh: &TriMesh, output: Option<&Path>) -> Result<String, CliError> {
    let basis = build_rwg(mesh).map_err(config_err)?;
    if let Some(path) = output {
        io::write_mesh(path, mesh).map_err(numerical_err)?;
    }
    let line = format!(
        "T={} N={} b={} a={}",
        mesh.num_triangles(),
        basis.len(),
        mesh.boundary_edge_count(),
        io::fmt_g12(mesh.a)
    );
    println!("{line}");
    Ok(line)
}

/// `optimize --config <file>`: run the full loop, streaming the convergence
/// log and snapshots, then write the final designs and a summary.
pub fn cmd_optimize(config_path: &Path) -> Result<(), CliError> {
    let (_raw, run) = resolve(config_path)?;
    std::fs::create_dir_all(&run.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create output dir: {e}")))?;
    let ops = assemble(&run)?;

    let log_path = run.out_dir.join("convergence.csv");
    let mut log = io::ConvergenceLog::create(&log_path).map_err(numerical_err)?;
    let stride = run.cfg.snapshot_stride;
    let out_dir = run.out_dir.clone();
    let mut log_error: Option<io::IoError> = None;
    let result = optimize(&run.cfg, &run.mesh, &run.basis, &ops, &run.feeds, |rec, field| {
        if let Err(e) = log.append(rec) {
            log_error.get_or_insert(e);
        }
        if stride > 0 && rec.iter % stride == 0 {
            let p = out_dir.join(format!("snapshot_{:04}.txt", rec.iter));
            if let Err(e) = io::write_design(&p, &field.rho_bar) {
                log_error.get_or_insert(e);
            }
        }
    })
    .map_err(numerical_err)?;
    if let Some(e) = log_error {
        return Err(numerical_err(e));
    }

    io::write_design(&run.out_dir.join("design_final.txt"), &result.design.rho_bar)
        .map_err(numerical_err)?;
    io::write_design(&run.out_dir.join("design_thresholded.txt"), &result.binary)
        .map_err(numerical_err)?;

    let fin = result.final_record();
    let self_res = result.self_resonance_measure() <= SELF_RESONANCE_TOL;
    let mut summary = String::new();
    summary.push_str(&format!("termination = {}\n", result.termination.as_str()));
    summary.push_str(&format!("iterations = {}\n", fin.iter));
    summary.push_str(&format!("Qe = {}\n", io::fmt_g12(fin.qe)));
    summary.push_str(&format!("Qm = {}\n", io::fmt_g12(fin.qm)));
    summary.push_str(&format!("Q = {}\n", io::fmt_g12(fin.q)));
    summary.push_str(&format!("area_frac = {}\n", io::fmt_g12(fin.area_frac)));
    summary.push_str(&format!("self_resonant = {}\n", u8::from(self_res)));
    match &result.thresholded {
        ThresholdOutcome::Analyzed { qe, qm, q } => {
            summary.push_str(&format!("thr_Qe = {}\n", io::fmt_g12(*qe)));
            summary.push_str(&format!("thr_Qm = {}\n", io::fmt_g12(*qm)));
            summary.push_str(&format!("thr_Q = {}\n", io::fmt_g12(*q)));
        }
        ThresholdOutcome::FeedIsolated(msg) => {
            summary.push_str(&format!("thr_Q = feed-isolated ({msg})\n"));
        }
    }
    std::fs::write(run.out_dir.join("summary.txt"), &summary)
        .map_err(|e| CliError::Numerical(format!("cannot write summary: {e}")))?;
    print!("{summary}");
    Ok(())
}

/// `sweep --config <file> --design <file> --ka <list>`: evaluate a stored
/// design over electrical sizes and emit the CSV table.
pub fn cmd_sweep(
    config_path: &Path,
    design_path: &Path,
    ka_list: &[f64],
    thresholded: bool,
    output: Option<&Path>,
) -> Result<(), CliError> {
    if ka_list.is_empty() {
        return Err(CliError::Usage("empty ka list".into()));
    }
    let mut sorted = ka_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().any(|k| !(*k > 0.0)) {
        return Err(CliError::Usage("ka values must be positive".into()));
    }
    let (_raw, run) = resolve(config_path)?;
    let rho = io::read_design(design_path).map_err(config_err)?;
    if rho.len() != run.mesh.num_triangles() {
        return Err(CliError::Config(format!(
            "design has {} entries but the mesh has {} triangles",
            rho.len(),
            run.mesh.num_triangles()
        )));
    }
    let metal: Vec<bool>;
    let design = if thresholded {
        metal = rho.iter().map(|&x| x >= 0.5).collect();
        SweepDesign::Binary(&metal)
    } else {
        SweepDesign::Gray(&rho)
    };
    let interp = run.cfg.interp;
    let rows = frequency_sweep(
        &run.mesh,
        &run.basis,
        &design,
        &run.feeds,
        &sorted,
        run.quad,
        &interp,
        run.fd_step,
    );
    let csv = io::sweep_to_csv(&rows);
    match output {
        Some(p) => std::fs::write(p, &csv)
            .map_err(|e| CliError::Numerical(format!("cannot write sweep: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Guard for `gradcheck`: finite differencing a dense re-solve per triangle
/// is only sensible on small meshes.
pub const GRADCHECK_MAX_TRIANGLES: usize = 200;

/// β at which the gradient chain is verified (steep enough that the
/// projection derivative matters, far from the binary limit).
pub const GRADCHECK_BETA: f64 = 4.0;

/// `gradcheck --config <file>`: returns the report; exit 0 iff the max
/// relative error is ≤ 1e-4.
pub fn cmd_gradcheck(config_path: &Path) -> Result<(), CliError> {
    let (_raw, run) = resolve(config_path)?;
    let t = run.mesh.num_triangles();
    if t > GRADCHECK_MAX_TRIANGLES {
        return Err(CliError::Config(format!(
            "gradcheck needs T ≤ {GRADCHECK_MAX_TRIANGLES}, mesh has {t} triangles"
        )));
    }
    let ops = assemble(&run)?;
    let report =
        gradient_check(&run.cfg, &run.mesh, &run.basis, &ops, &run.feeds, GRADCHECK_BETA, 1e-5)
            .map_err(numerical_err)?;
    println!(
        "max relative adjoint-vs-FD error {} over {} free variables ({} triangles)",
        io::fmt_g12(report.max_rel_error),
        report.free_variables,
        report.triangles
    );
    if report.max_rel_error <= 1e-4 {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "gradient mismatch {} at triangle {}",
            io::fmt_g12(report.max_rel_error),
            report.worst_triangle
        )))
    }
}

/// `curves helix|loxodrome`: sample and write polyline files (the second
/// arm is the half-turn rotation).
pub fn cmd_curves(
    kind: CurveKind,
    param: f64,
    radius: f64,
    samples: usize,
    t_span: f64,
    two_arm: bool,
    output: &Path,
) -> Result<(), CliError> {
    let curve = sample_curve(kind, param, radius, samples, t_span)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    io::write_polyline(output, &curve).map_err(numerical_err)?;
    if two_arm {
        let second = rotate_half_turn(&curve);
        let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
        let ext = output.extension().and_then(|s| s.to_str()).unwrap_or("txt");
        let arm2 = output.with_file_name(format!("{stem}_arm2.{ext}"));
        io::write_polyline(&arm2, &second).map_err(numerical_err)?;
    }
    Ok(())
}

/// Quick single-point analysis used by `sweep` consumers and tests: returns
/// `(Qe, Qm, Q)` of a design at the config's ka.
pub fn analyze_design(
    run: &ResolvedRun,
    rho_bar: &[f64],
) -> Result<(f64, f64, f64), CliError> {
    let ops = assemble(run)?;
    let zrho = crate::material::assemble_zrho(rho_bar, &ops.psi, &run.cfg.interp, run.basis.len())
        .map_err(numerical_err)?;
    let state = crate::qfactor::solve_state(&ops, Some(zrho.as_ref())).map_err(numerical_err)?;
    Ok((state.qe, state.qm, state.q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    const MINIMAL: &str = r#"
[mesh]
kind = "plate"
length = 0.1
aspect = 0.6
nx = 3
ny = 2

[physics]
ka = 0.8

[[feeds]]
position = [0.0, 0.03, 0.0]
direction = [1.0, 0.0, 0.0]

[optimization]
area_fraction = 0.35
rmin_frac = 0.15
max_iterations = 2
"#;

    #[test]
    fn minimal_config_parses_and_resolves() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, MINIMAL).unwrap();
        let (_raw, run) = resolve(&p).unwrap();
        assert_eq!(run.mesh.num_triangles(), 24);
        assert_eq!(run.feeds.feeds.len(), 1);
        assert_eq!(run.cfg.max_iterations, 2);
        assert_eq!(run.cfg.sf, 0.35);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, format!("{MINIMAL}\n[optimization.typo]\nx = 1\n")).unwrap();
        match RunConfig::from_file(&p) {
            Err(CliError::Config(msg)) => {
                assert!(msg.contains("typo") || msg.contains("unknown"), "message: {msg}")
            }
            other => panic!("expected config error, got ok={}", other.is_ok()),
        }

        let bad = MINIMAL.replace("area_fraction", "area_fraciton");
        std::fs::write(&p, bad).unwrap();
        assert!(matches!(RunConfig::from_file(&p), Err(CliError::Config(_))));
    }

    #[test]
    fn sf_out_of_range_rejected_before_run() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, MINIMAL.replace("area_fraction = 0.35", "area_fraction = 1.2"))
            .unwrap();
        let err = resolve(&p).err().expect("Sf > 1 must be rejected");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_mesh_file_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("run.toml");
        let cfg = MINIMAL.replace(
            "kind = \"plate\"\nlength = 0.1\naspect = 0.6\nnx = 3\nny = 2",
            "kind = \"file\"\npath = \"nonexistent.txt\"",
        );
        std::fs::write(&p, cfg).unwrap();
        assert!(matches!(RunConfig::from_file(&p), Err(CliError::Config(_))));
    }

    #[test]
    fn exit_codes_by_variant() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 1);
    }
}
