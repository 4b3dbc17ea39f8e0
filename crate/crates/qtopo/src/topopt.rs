//! The optimization loop: filtering → state solve → Q evaluation → adjoints
//! → sensitivities → MMA update, with β-continuation of the projection
//! filter and the max-change stopping rule.
//!
//! Per iteration the loop performs exactly one factorization (state solve)
//! reused by both adjoint solves. The bound formulation passes three
//! constraints to MMA: `(Qe − z)/Q_ref ≤ 0`, `(Qm − z)/Q_ref ≤ 0` (with the
//! initial Q as the fixed scale, keeping gradients O(1)) and the area
//! fraction `(1/A₀) Σ ρ̄̃_t A_t − S_f ≤ 0`. Sharpness β doubles when the
//! design change stalls or every 100 iterations, until β_max; the loop stops
//! once the change stalls with β at its maximum, or at the iteration cap.
//! After the last update the final design is evaluated once more, appended
//! as the last record (max_drho = 0), hard-thresholded and re-analyzed with
//! true material values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::filters::{
    backpropagate, build_density_filter, hard_threshold, DensityFilter, DesignField, FilterError,
    FixedMask, ProjectionSpec,
};
use crate::linalg;
use crate::material::{add_zrho_into, InterpolationSpec, MaterialError};
use crate::mesh::{BasisSet, TriMesh};
use crate::mma::{MmaError, MmaOptions, MmaState};
use crate::operators::FeedSpec;
use crate::operators::OperatorSet;
use crate::qfactor::{
    sensitivity_report, solve_state, thresholded_analysis, QError, StateSolution,
};

#[derive(Debug, Error)]
pub enum OptError {
    #[error(transparent)]
    Q(#[from] QError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mma(#[from] MmaError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Initial density distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedMode {
    /// Every free triangle starts at the prescribed area fraction.
    UniformSf,
    /// Every free triangle starts at the given constant.
    Uniform(f64),
    /// Reproducible uniform random field from the given seed.
    Random(u64),
    /// Explicit per-triangle field (e.g. read from file).
    FromField(Vec<f64>),
}

/// Optimization settings; see the module docs for the roles.
#[derive(Clone, Debug)]
pub struct OptConfig {
    pub ka: f64,
    pub sf: f64,
    /// Filter radius as a fraction of the circumscribing radius `a`.
    pub rmin_frac: f64,
    pub max_iterations: usize,
    pub delta_rho_max: f64,
    pub beta0: f64,
    pub beta_max: f64,
    pub eta: f64,
    pub interp: InterpolationSpec,
    pub move_limit: f64,
    pub init: SeedMode,
    pub snapshot_stride: usize,
    /// Honor `mod(i,100) = 1` literally, allowing a doubling at i = 1.
    pub continuation_mod_first: bool,
    /// Clear MMA history whenever β doubles.
    pub mma_reset_on_continuation: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            ka: 0.8,
            sf: 0.35,
            rmin_frac: 0.15,
            max_iterations: 600,
            delta_rho_max: 0.01,
            beta0: 1.0,
            beta_max: 32.0,
            eta: 0.5,
            interp: InterpolationSpec::default(),
            move_limit: 0.25,
            init: SeedMode::UniformSf,
            snapshot_stride: 50,
            continuation_mod_first: true,
            mma_reset_on_continuation: false,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<(), OptError> {
        let bad = |msg: String| Err(OptError::InvalidConfig(msg));
        if !(self.sf > 0.0 && self.sf <= 1.0) {
            return bad(format!("Sf = {} must lie in (0, 1]", self.sf));
        }
        if !(self.rmin_frac >= 0.0) {
            return bad(format!("Rmin fraction = {} must be ≥ 0", self.rmin_frac));
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be ≥ 1".into());
        }
        if !(self.beta0 > 0.0 && self.beta0 <= self.beta_max) {
            return bad(format!("beta0 = {} must be in (0, beta_max]", self.beta0));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta = {} must lie in (0, 1)", self.eta));
        }
        if !(self.delta_rho_max > 0.0) {
            return bad(format!("delta_rho_max = {} must be > 0", self.delta_rho_max));
        }
        if !(self.move_limit > 0.0 && self.move_limit <= 1.0) {
            return bad(format!("move_limit = {} must lie in (0, 1]", self.move_limit));
        }
        if !(self.ka > 0.0) {
            return bad(format!("ka = {} must be > 0", self.ka));
        }
        if let SeedMode::Uniform(c) = self.init {
            if !(0.0..=1.0).contains(&c) {
                return bad(format!("uniform seed value {c} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Area fraction `(1/A₀) Σ ρ̄̃_t A_t`.
pub fn area_fraction(rho_bar: &[f64], areas: &[f64], a0: f64) -> f64 {
    rho_bar.iter().zip(areas).map(|(r, a)| r * a).sum::<f64>() / a0
}

/// Triangles sharing a vertex with any feed edge; these stay pinned to metal
/// so filtering can never disconnect the excitation.
pub fn pinned_triangles(mesh: &TriMesh, feeds: &FeedSpec) -> Vec<usize> {
    let mut pinned = Vec::new();
    for feed in &feeds.feeds {
        let [v0, v1] = mesh.edges[feed.edge].vertices;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            if tri.contains(&v0) || tri.contains(&v1) {
                pinned.push(t);
            }
        }
    }
    pinned.sort_unstable();
    pinned.dedup();
    pinned
}

/// Build the initial design field: seed per `mode`, feed triangles pinned
/// to 1 in every mode.
pub fn seed_design(
    cfg: &OptConfig,
    mesh: &TriMesh,
    pinned: &[usize],
) -> Result<(Vec<f64>, FixedMask), OptError> {
    let t = mesh.num_triangles();
    let mut rho = match &cfg.init {
        SeedMode::UniformSf => vec![cfg.sf; t],
        SeedMode::Uniform(c) => vec![*c; t],
        SeedMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..t).map(|_| rng.random::<f64>()).collect()
        }
        SeedMode::FromField(field) => {
            if field.len() != t {
                return Err(OptError::InvalidConfig(format!(
                    "seed field has {} entries, mesh has {t} triangles",
                    field.len()
                )));
            }
            field.clone()
        }
    };
    let mut fixed = FixedMask::free(t);
    for &p in pinned {
        fixed.pin(p, 1.0);
    }
    fixed.impose(&mut rho);
    Ok((rho, fixed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    IterationCap,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::IterationCap => "iteration-cap",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iter: usize,
    pub qe: f64,
    pub qm: f64,
    pub q: f64,
    pub beta: f64,
    pub max_drho: f64,
    pub area_frac: f64,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub iter: usize,
    pub rho_bar: Vec<f64>,
}

/// Outcome of the final pure-binary analysis.
#[derive(Clone, Debug)]
pub enum ThresholdOutcome {
    Analyzed { qe: f64, qm: f64, q: f64 },
    /// The thresholded design disconnected a feed; reported, not fatal.
    FeedIsolated(String),
}

pub struct OptimizationResult {
    pub records: Vec<IterationRecord>,
    pub snapshots: Vec<Snapshot>,
    pub design: DesignField,
    pub binary: Vec<f64>,
    pub thresholded: ThresholdOutcome,
    pub termination: Termination,
    /// LU factorizations performed during the loop (one per record).
    pub factorizations: usize,
    /// Q of the first iterate, the constraint scale.
    pub q_ref: f64,
}

impl OptimizationResult {
    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("at least one record")
    }

    pub fn self_resonance_measure(&self) -> f64 {
        let r = self.final_record();
        (r.qe - r.qm).abs() / r.q
    }
}

/// Evaluate one design: filter, project, add the material matrix onto Z₀,
/// solve, and measure the area fraction.
fn evaluate(
    rho: Vec<f64>,
    filter: &DensityFilter,
    proj: &ProjectionSpec,
    fixed: &FixedMask,
    ops: &OperatorSet,
    interp: &InterpolationSpec,
    areas: &[f64],
    a0: f64,
) -> Result<(DesignField, StateSolution, f64), OptError> {
    let field = DesignField::evaluate(rho, filter, proj, fixed.clone())?;
    let n = ops.n();
    let mut z = faer::Mat::<f64>::zeros(n, n);
    add_zrho_into(&mut z, &field.rho_bar, &ops.psi, interp)?;
    let state = solve_state(ops, Some(z.as_ref()))?;
    let area = area_fraction(&field.rho_bar, areas, a0);
    Ok((field, state, area))
}

/// Run the optimization. `on_iteration` observes every appended record with
/// the evaluated design (the command-line driver streams the convergence log
/// and snapshots from it, so aborted runs keep their history).
pub fn optimize(
    cfg: &OptConfig,
    mesh: &TriMesh,
    basis: &BasisSet,
    ops: &OperatorSet,
    feeds: &FeedSpec,
    mut on_iteration: impl FnMut(&IterationRecord, &DesignField),
) -> Result<OptimizationResult, OptError> {
    cfg.validate()?;
    let a0 = mesh.total_area();
    let filter = build_density_filter(mesh, cfg.rmin_frac * mesh.a);
    let pinned = pinned_triangles(mesh, feeds);
    let (mut rho, fixed) = seed_design(cfg, mesh, &pinned)?;
    let free: Vec<usize> =
        (0..mesh.num_triangles()).filter(|&t| !fixed.is_pinned(t)).collect();
    if free.is_empty() {
        return Err(OptError::InvalidConfig("no free design variables".into()));
    }
    let xmin = vec![0.0; free.len()];
    let xmax = vec![1.0; free.len()];

    let fac0 = linalg::factorization_count();
    let mut beta = cfg.beta0;
    let mut mma: Option<MmaState> = None;
    let mut q_ref = 0.0;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut pending: Option<Termination> = None;
    let mut final_field: Option<DesignField> = None;
    let mut termination = Termination::IterationCap;

    for i in 1..=cfg.max_iterations {
        let proj = ProjectionSpec::new(beta, cfg.eta)?;
        let (field, state, area) =
            evaluate(rho.clone(), &filter, &proj, &fixed, ops, &cfg.interp, &mesh.areas, a0)?;
        if i == 1 {
            q_ref = state.q;
        }
        if cfg.snapshot_stride > 0 && i % cfg.snapshot_stride == 0 {
            snapshots.push(Snapshot { iter: i, rho_bar: field.rho_bar.clone() });
        }

        let mut record = IterationRecord {
            iter: i,
            qe: state.qe,
            qm: state.qm,
            q: state.q,
            beta,
            max_drho: 0.0,
            area_frac: area,
        };

        if let Some(reason) = pending {
            termination = reason;
            records.push(record);
            on_iteration(&record, &field);
            final_field = Some(field);
            break;
        }
        if i == cfg.max_iterations {
            termination = Termination::IterationCap;
            records.push(record);
            on_iteration(&record, &field);
            final_field = Some(field);
            break;
        }

        // Sensitivities of both Q branches and the area constraint, chained
        // back to the design field.
        let report = sensitivity_report(&state, ops, &field.rho_bar, &cfg.interp)?;
        let dqe = backpropagate(&report.dqe_drho_bar, &filter, &field.rho_tilde, &proj, &fixed)?;
        let dqm = backpropagate(&report.dqm_drho_bar, &filter, &field.rho_tilde, &proj, &fixed)?;
        let darea_bar: Vec<f64> = mesh.areas.iter().map(|a| a / a0).collect();
        let darea = backpropagate(&darea_bar, &filter, &field.rho_tilde, &proj, &fixed)?;

        let take_free = |v: &[f64], scale: f64| -> Vec<f64> {
            free.iter().map(|&t| v[t] * scale).collect()
        };
        let fvals = vec![state.qe / q_ref, state.qm / q_ref, area - cfg.sf];
        let grads =
            vec![take_free(&dqe, 1.0 / q_ref), take_free(&dqm, 1.0 / q_ref), take_free(&darea, 1.0)];

        let mma_state = mma.get_or_insert_with(|| {
            let opts = MmaOptions { move_limit: cfg.move_limit, ..MmaOptions::default() };
            // z multiplies the two Q constraints (scaled like them); the
            // area constraint has no z term.
            MmaState::new(free.len(), vec![1.0 / q_ref, 1.0 / q_ref, 0.0], opts)
        });
        let x: Vec<f64> = free.iter().map(|&t| rho[t]).collect();
        let update = mma_state.update(&x, &fvals, &grads, &xmin, &xmax)?;
        let delta = x
            .iter()
            .zip(&update.x_new)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for (idx, &t) in free.iter().enumerate() {
            rho[t] = update.x_new[idx];
        }

        record.max_drho = delta;
        records.push(record);
        on_iteration(&record, &field);

        // Stopping and continuation, resolved as: stop only when the change
        // stalls with β at its maximum; a stalled change below β_max doubles
        // β instead and the run continues.
        if delta < cfg.delta_rho_max && beta >= cfg.beta_max {
            pending = Some(Termination::Converged);
        } else {
            let mod_hit = i % 100 == 1 && (cfg.continuation_mod_first || i > 1);
            if (delta <= cfg.delta_rho_max || mod_hit) && beta < cfg.beta_max {
                beta = (2.0 * beta).min(cfg.beta_max);
                if cfg.mma_reset_on_continuation {
                    mma_state.reset();
                }
            }
        }
    }

    let design = final_field.expect("loop always evaluates at least once");
    let binary = hard_threshold(&design.rho_bar, &fixed);
    let metal: Vec<bool> = binary.iter().map(|&x| x >= 0.5).collect();
    let thresholded = match thresholded_analysis(ops, basis, &metal, feeds) {
        Ok(rep) => ThresholdOutcome::Analyzed { qe: rep.qe, qm: rep.qm, q: rep.q },
        Err(e @ QError::FeedIsolated { .. }) => ThresholdOutcome::FeedIsolated(e.to_string()),
        Err(e) => return Err(e.into()),
    };

    Ok(OptimizationResult {
        records,
        snapshots,
        design,
        binary,
        thresholded,
        termination,
        factorizations: linalg::factorization_count() - fac0,
        q_ref,
    })
}

/// Adjoint-versus-finite-difference verification of the full gradient chain
/// (state solve → Q → adjoint → material derivative → projection → filter).
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_triangle: usize,
    pub triangles: usize,
    pub free_variables: usize,
}

/// Compare `dQ_{e/m}/dρ` from the adjoint chain against central finite
/// differences of the whole pipeline, for every free design variable.
/// Deterministic; intended for small meshes.
pub fn gradient_check(
    cfg: &OptConfig,
    mesh: &TriMesh,
    basis: &BasisSet,
    ops: &OperatorSet,
    feeds: &FeedSpec,
    beta: f64,
    fd_step: f64,
) -> Result<GradCheckReport, OptError> {
    let _ = basis;
    let a0 = mesh.total_area();
    let filter = build_density_filter(mesh, cfg.rmin_frac * mesh.a);
    let pinned = pinned_triangles(mesh, feeds);
    let t = mesh.num_triangles();
    let mut fixed = FixedMask::free(t);
    for &p in &pinned {
        fixed.pin(p, 1.0);
    }
    // Deterministic non-uniform test point away from the projection kink.
    let rho: Vec<f64> = (0..t).map(|i| 0.25 + 0.5 * ((i * 7 % 13) as f64 / 13.0)).collect();
    let proj = ProjectionSpec::new(beta, cfg.eta)?;

    let (field, state, _) =
        evaluate(rho.clone(), &filter, &proj, &fixed, ops, &cfg.interp, &mesh.areas, a0)?;
    let report = sensitivity_report(&state, ops, &field.rho_bar, &cfg.interp)?;
    let dqe = backpropagate(&report.dqe_drho_bar, &filter, &field.rho_tilde, &proj, &fixed)?;
    let dqm = backpropagate(&report.dqm_drho_bar, &filter, &field.rho_tilde, &proj, &fixed)?;

    let mut worst = 0.0f64;
    let mut worst_t = 0;
    let mut free_count = 0;
    for j in 0..t {
        if fixed.is_pinned(j) {
            continue;
        }
        free_count += 1;
        let mut rp = rho.clone();
        rp[j] += fd_step;
        let mut rm = rho.clone();
        rm[j] -= fd_step;
        let (_, sp, _) =
            evaluate(rp, &filter, &proj, &fixed, ops, &cfg.interp, &mesh.areas, a0)?;
        let (_, sm, _) =
            evaluate(rm, &filter, &proj, &fixed, ops, &cfg.interp, &mesh.areas, a0)?;
        let fd_e = (sp.qe - sm.qe) / (2.0 * fd_step);
        let fd_m = (sp.qm - sm.qm) / (2.0 * fd_step);
        for (adj, fd) in [(dqe[j], fd_e), (dqm[j], fd_m)] {
            let rel = (adj - fd).abs() / fd.abs().max(1e-12);
            if rel > worst {
                worst = rel;
                worst_t = j;
            }
        }
    }
    Ok(GradCheckReport {
        max_rel_error: worst,
        worst_triangle: worst_t,
        triangles: t,
        free_variables: free_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rwg, generate_plate};
    use crate::operators::locate_feed_edge;
    use crate::quadrature::QuadSpec;
    use crate::vec3::Vec3;

    fn plate_setup(nx: usize, ny: usize, ka: f64) -> (TriMesh, BasisSet, OperatorSet, FeedSpec) {
        let mesh = generate_plate(0.1, 0.6, nx, ny).unwrap();
        let basis = build_rwg(&mesh).unwrap();
        let edge = locate_feed_edge(
            &mesh,
            &basis,
            Vec3::new(0.0, 0.03, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
        )
        .unwrap();
        let feeds = FeedSpec::single(edge, 1.0);
        let ops = OperatorSet::assemble(&mesh, &basis, ka / mesh.a, QuadSpec::DEFAULT, &feeds, 1e-3)
            .unwrap();
        (mesh, basis, ops, feeds)
    }

    #[test]
    fn area_fraction_trivial_and_oracle() {
        let mesh = generate_plate(1.0, 0.6, 4, 3).unwrap();
        let a0 = mesh.total_area();
        let t = mesh.num_triangles();
        assert!((area_fraction(&vec![1.0; t], &mesh.areas, a0) - 1.0).abs() < 1e-12);
        assert!((area_fraction(&vec![0.35; t], &mesh.areas, a0) - 0.35).abs() < 1e-12);
        let field: Vec<f64> = (0..t).map(|i| ((i * 31 % 19) as f64) / 19.0).collect();
        let direct: f64 =
            field.iter().zip(&mesh.areas).map(|(r, a)| r * a).sum::<f64>() / a0;
        assert!((area_fraction(&field, &mesh.areas, a0) - direct).abs() < 1e-14);
    }

    #[test]
    fn seeds_are_deterministic_and_pinned() {
        let (mesh, _basis, _ops, feeds) = plate_setup(3, 2, 0.8);
        let pinned = pinned_triangles(&mesh, &feeds);
        assert!(!pinned.is_empty());

        let mut cfg = OptConfig { sf: 0.35, ..OptConfig::default() };
        cfg.init = SeedMode::UniformSf;
        let (rho, fixed) = seed_design(&cfg, &mesh, &pinned).unwrap();
        for (t, &r) in rho.iter().enumerate() {
            if fixed.is_pinned(t) {
                assert_eq!(r, 1.0);
            } else {
                assert_eq!(r, 0.35);
            }
        }

        cfg.init = SeedMode::Random(7);
        let (r1, _) = seed_design(&cfg, &mesh, &pinned).unwrap();
        let (r2, _) = seed_design(&cfg, &mesh, &pinned).unwrap();
        assert_eq!(r1, r2, "seeded random fields must be reproducible");
        for &p in &pinned {
            assert_eq!(r1[p], 1.0);
        }

        cfg.init = SeedMode::FromField(vec![0.5; 3]);
        assert!(seed_design(&cfg, &mesh, &pinned).is_err(), "length mismatch rejected");
    }

    #[test]
    fn iteration_cap_one_returns_initial_evaluation_only() {
        let (mesh, basis, ops, feeds) = plate_setup(3, 2, 0.8);
        let cfg = OptConfig { max_iterations: 1, ..OptConfig::default() };
        let res = optimize(&cfg, &mesh, &basis, &ops, &feeds, |_, _| {}).unwrap();
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.termination, Termination::IterationCap);
        assert_eq!(res.records[0].max_drho, 0.0);
        assert_eq!(res.factorizations, 1);
    }

    #[test]
    fn short_run_bookkeeping_and_beta_schedule() {
        let (mesh, basis, ops, feeds) = plate_setup(4, 2, 0.8);
        let cfg = OptConfig {
            max_iterations: 12,
            snapshot_stride: 5,
            ..OptConfig::default()
        };
        let mut seen = 0usize;
        let res = optimize(&cfg, &mesh, &basis, &ops, &feeds, |r, f| {
            seen += 1;
            assert_eq!(r.iter, seen);
            assert_eq!(f.rho_bar.len(), mesh.num_triangles());
        })
        .unwrap();
        assert_eq!(res.records.len(), seen);
        // Records contiguous from 1.
        for (i, r) in res.records.iter().enumerate() {
            assert_eq!(r.iter, i + 1);
        }
        // β nondecreasing, within the doubling set.
        let allowed = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let mut last = 0.0;
        for r in &res.records {
            assert!(r.beta >= last);
            assert!(allowed.contains(&r.beta), "β = {}", r.beta);
            last = r.beta;
        }
        // One factorization per record.
        assert_eq!(res.factorizations, res.records.len());
        assert_eq!(res.snapshots.len(), res.records.len() / 5);
        assert!(res.q_ref > 0.0);
    }

    #[test]
    fn literal_mod_rule_doubles_beta_at_iteration_one() {
        let (mesh, basis, ops, feeds) = plate_setup(3, 2, 0.8);
        let cfg = OptConfig { max_iterations: 3, ..OptConfig::default() };
        let res = optimize(&cfg, &mesh, &basis, &ops, &feeds, |_, _| {}).unwrap();
        assert_eq!(res.records[0].beta, 1.0);
        assert_eq!(res.records[1].beta, 2.0, "mod(1,100)=1 doubles β after iteration 1");

        let cfg2 = OptConfig {
            max_iterations: 3,
            continuation_mod_first: false,
            ..OptConfig::default()
        };
        let res2 = optimize(&cfg2, &mesh, &basis, &ops, &feeds, |_, _| {}).unwrap();
        assert_eq!(res2.records[1].beta, 1.0, "suppressed first-iteration doubling");
    }

    #[test]
    fn gradient_check_full_chain_on_24_triangle_plate() {
        let (mesh, basis, ops, feeds) = plate_setup(3, 2, 0.8);
        let cfg = OptConfig::default();
        let report = gradient_check(&cfg, &mesh, &basis, &ops, &feeds, 4.0, 1e-5).unwrap();
        assert_eq!(report.triangles, 24);
        assert!(
            report.max_rel_error <= 1e-4,
            "adjoint vs FD mismatch {} at triangle {}",
            report.max_rel_error,
            report.worst_triangle
        );
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut cfg = OptConfig { sf: 1.2, ..OptConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.sf = 0.35;
        cfg.eta = 1.0;
        assert!(cfg.validate().is_err());
        cfg.eta = 0.5;
        cfg.max_iterations = 0;
        assert!(cfg.validate().is_err());
    }
}
