//! State equation, Q-factor evaluation, adjoint solves and design
//! sensitivities.
//!
//! With `Z = Z₀ + Zρ` and `Z I = V`, the Q-factors are ratios of quadratic
//! forms, `Q_{e/m} = Iᴴ X_{e/m} I / Iᴴ R₀ I` and `Q = max{Qe, Qm}`. The
//! sensitivity of each with respect to the projected density of triangle t is
//!
//! ```text
//!   dQ/dρ̄̃_t = 2 Re{ λᵀ (∂Rs/∂ρ̄̃_t) Ψ_ρ^t I },   Zᵀ λ = −(∂Q/∂I)ᵀ,
//!   ∂Q/∂I = Iᴴ (X − Q R₀) / (2 P_rad),
//! ```
//!
//! where one LU factorization serves the state solve and both adjoints.

use faer::{Col, ColRef, Mat, MatRef};
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{real_quadratic_form, relative_residual, ComplexLu, SolveError};
use crate::material::{InterpolationSpec, MaterialError};
use crate::mesh::{BasisSet, TriMesh};
use crate::operators::{AssemblyError, FeedSpec, OperatorSet, TriangleBlock};
use crate::quadrature::QuadSpec;

#[derive(Debug, Error)]
pub enum QError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("state residual {0:.3e} exceeds 1e-10")]
    ResidualTooLarge(f64),
    #[error("non-radiating current: Prad = {0:.3e} ≤ 0")]
    NonRadiating(f64),
    #[error("feed isolated: basis function of feed edge {edge} was removed by thresholding")]
    FeedIsolated { edge: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Solved MoM state: current coefficients, the reusable factorization of
/// `Z = Z₀ + Zρ`, and the energy/Q summary.
pub struct StateSolution {
    pub current: Col<Complex64>,
    pub lu: ComplexLu,
    pub residual: f64,
    pub prad: f64,
    pub we: f64,
    pub wm: f64,
    pub qe: f64,
    pub qm: f64,
    pub q: f64,
}

/// Adjoint solutions and sensitivities for both Q branches, per triangle of
/// the projected density field.
pub struct SensitivityReport {
    pub dqe_drho_bar: Vec<f64>,
    pub dqm_drho_bar: Vec<f64>,
    pub lambda_e: Col<Complex64>,
    pub lambda_m: Col<Complex64>,
}

/// Solve `(Z₀ + Zρ) I = V` and evaluate the Q summary. `zrho = None` is the
/// PEC case. The factorization is retained for adjoint solves.
pub fn solve_state(ops: &OperatorSet, zrho: Option<MatRef<'_, f64>>) -> Result<StateSolution, QError> {
    let n = ops.n();
    let z = match zrho {
        Some(m) => {
            if m.nrows() != n {
                return Err(QError::DimensionMismatch(format!(
                    "Zρ is {}×{}, expected {n}×{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Mat::from_fn(n, n, |i, j| ops.z0[(i, j)] + m[(i, j)])
        }
        None => ops.z0.clone(),
    };
    let lu = ComplexLu::factor(z.as_ref())?;
    let current = lu.solve(ops.v.as_ref());
    let residual = relative_residual(z.as_ref(), current.as_ref(), ops.v.as_ref());
    if !(residual <= 1e-10) {
        return Err(QError::ResidualTooLarge(residual));
    }
    let (qe, qm, q, prad) = q_factors(current.as_ref(), &ops.xe, &ops.xm, &ops.r0)?;
    let we = real_quadratic_form(ops.xe.as_ref(), current.as_ref()) / (4.0 * ops.omega);
    let wm = real_quadratic_form(ops.xm.as_ref(), current.as_ref()) / (4.0 * ops.omega);
    Ok(StateSolution { current, lu, residual, prad, we, wm, qe, qm, q })
}

/// Q-factors of a given current: `(Qe, Qm, max, Prad)`.
pub fn q_factors(
    current: ColRef<'_, Complex64>,
    xe: &Mat<f64>,
    xm: &Mat<f64>,
    r0: &Mat<f64>,
) -> Result<(f64, f64, f64, f64), QError> {
    let den = real_quadratic_form(r0.as_ref(), current);
    let prad = 0.5 * den;
    if !(prad > 0.0) {
        return Err(QError::NonRadiating(prad));
    }
    let qe = real_quadratic_form(xe.as_ref(), current) / den;
    let qm = real_quadratic_form(xm.as_ref(), current) / den;
    Ok((qe, qm, qe.max(qm), prad))
}

/// Right-hand side of the adjoint system, `−(∂Q_{e/m}/∂I)ᵀ`: with symmetric
/// real `X`, `R₀` this is `−(X − Q R₀) conj(I) / (2 P_rad)`.
pub fn adjoint_rhs(
    current: ColRef<'_, Complex64>,
    q_branch: f64,
    prad: f64,
    x_branch: &Mat<f64>,
    r0: &Mat<f64>,
) -> Col<Complex64> {
    let n = x_branch.nrows();
    let scale = -1.0 / (2.0 * prad);
    Col::from_fn(n, |i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += (x_branch[(i, j)] - q_branch * r0[(i, j)]) * current[j].conj();
        }
        acc * scale
    })
}

/// Solve the adjoint system `Zᵀ λ = rhs`, reusing the state factorization.
pub fn solve_adjoint(state: &StateSolution, rhs: ColRef<'_, Complex64>) -> Col<Complex64> {
    state.lu.solve_transpose(rhs)
}

/// Sensitivities of one Q branch with respect to the projected densities:
/// `dQ/dρ̄̃_t = 2 (dRs/dρ̄̃_t) Re{λᵀ Ψ^t I}`.
pub fn sensitivities(
    lambda: ColRef<'_, Complex64>,
    current: ColRef<'_, Complex64>,
    rho_bar: &[f64],
    psi: &[TriangleBlock],
    interp: &InterpolationSpec,
) -> Result<Vec<f64>, QError> {
    if rho_bar.len() != psi.len() {
        return Err(QError::DimensionMismatch(format!(
            "{} densities vs {} element matrices",
            rho_bar.len(),
            psi.len()
        )));
    }
    let mut out = Vec::with_capacity(psi.len());
    for (rho, block) in rho_bar.iter().zip(psi) {
        let drs = interp.d_surface_resistivity(*rho)?;
        let k = block.bases.len();
        let mut lpsi_i = Complex64::new(0.0, 0.0);
        for i in 0..k {
            for j in 0..k {
                lpsi_i += lambda[block.bases[i]] * block.entry(i, j) * current[block.bases[j]];
            }
        }
        out.push(2.0 * drs * lpsi_i.re);
    }
    Ok(out)
}

/// Full adjoint pass for both branches.
pub fn sensitivity_report(
    state: &StateSolution,
    ops: &OperatorSet,
    rho_bar: &[f64],
    interp: &InterpolationSpec,
) -> Result<SensitivityReport, QError> {
    let rhs_e = adjoint_rhs(state.current.as_ref(), state.qe, state.prad, &ops.xe, &ops.r0);
    let rhs_m = adjoint_rhs(state.current.as_ref(), state.qm, state.prad, &ops.xm, &ops.r0);
    let lambda_e = solve_adjoint(state, rhs_e.as_ref());
    let lambda_m = solve_adjoint(state, rhs_m.as_ref());
    let dqe = sensitivities(lambda_e.as_ref(), state.current.as_ref(), rho_bar, &ops.psi, interp)?;
    let dqm = sensitivities(lambda_m.as_ref(), state.current.as_ref(), rho_bar, &ops.psi, interp)?;
    Ok(SensitivityReport { dqe_drho_bar: dqe, dqm_drho_bar: dqm, lambda_e, lambda_m })
}

/// Result of analyzing a pure-binary design with true material values
/// (void removed, metal as PEC).
pub struct ThresholdedReport {
    /// Retained basis indices (both triangles metal), in original order.
    pub kept_bases: Vec<usize>,
    pub qe: f64,
    pub qm: f64,
    pub q: f64,
    pub prad: f64,
    /// Current coefficients of the reduced system, aligned with `kept_bases`.
    pub current: Col<Complex64>,
}

/// Pure-binary analysis: keep only basis functions whose both triangles are
/// metal, drop Zρ entirely and solve the reduced PEC system. Errors with
/// [`QError::FeedIsolated`] when a feed basis function does not survive.
pub fn thresholded_analysis(
    ops: &OperatorSet,
    basis: &BasisSet,
    metal: &[bool],
    feeds: &FeedSpec,
) -> Result<ThresholdedReport, QError> {
    let kept_bases: Vec<usize> = basis
        .functions
        .iter()
        .enumerate()
        .filter(|(_, f)| metal[f.plus_tri] && metal[f.minus_tri])
        .map(|(n, _)| n)
        .collect();
    for feed in &feeds.feeds {
        let nb = basis.edge_to_basis[feed.edge].expect("validated feed edge");
        if !kept_bases.contains(&nb) {
            return Err(QError::FeedIsolated { edge: feed.edge });
        }
    }
    let reduced = ops.restricted(&kept_bases);
    let state = solve_state(&reduced, None)?;
    Ok(ThresholdedReport {
        kept_bases,
        qe: state.qe,
        qm: state.qm,
        q: state.q,
        prad: state.prad,
        current: state.current,
    })
}

/// Design variant evaluated by a frequency sweep.
pub enum SweepDesign<'a> {
    /// Gray densities with the interpolated resistivity model.
    Gray(&'a [f64]),
    /// Pure-binary metal mask analyzed with true material values.
    Binary(&'a [bool]),
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub ka: f64,
    pub qe: f64,
    pub qm: f64,
    pub q: f64,
    pub self_resonant: bool,
}

#[derive(Clone, Debug)]
pub enum SweepEntry {
    Ok(SweepRow),
    Failed { ka: f64, error: String },
}

/// Threshold on |Qe − Qm|/Q below which a design is reported self-resonant.
pub const SELF_RESONANCE_TOL: f64 = 0.05;

/// Reassemble the operators at each electrical size and evaluate a fixed
/// design. Per-point failures are reported in their row and the sweep
/// continues.
pub fn frequency_sweep(
    mesh: &TriMesh,
    basis: &BasisSet,
    design: &SweepDesign<'_>,
    feeds: &FeedSpec,
    ka_list: &[f64],
    quad: QuadSpec,
    interp: &InterpolationSpec,
    fd_step: f64,
) -> Vec<SweepEntry> {
    let mut rows = Vec::with_capacity(ka_list.len());
    for &ka in ka_list {
        rows.push(sweep_point(mesh, basis, design, feeds, ka, quad, interp, fd_step));
    }
    rows
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    mesh: &TriMesh,
    basis: &BasisSet,
    design: &SweepDesign<'_>,
    feeds: &FeedSpec,
    ka: f64,
    quad: QuadSpec,
    interp: &InterpolationSpec,
    fd_step: f64,
) -> SweepEntry {
    let run = || -> Result<SweepRow, QError> {
        let k = ka / mesh.a;
        let ops = OperatorSet::assemble(mesh, basis, k, quad, feeds, fd_step)?;
        let state = match design {
            SweepDesign::Gray(rho_bar) => {
                let zrho =
                    crate::material::assemble_zrho(rho_bar, &ops.psi, interp, basis.len())?;
                solve_state(&ops, Some(zrho.as_ref()))?
            }
            SweepDesign::Binary(metal) => {
                let report = thresholded_analysis(&ops, basis, metal, feeds)?;
                return Ok(SweepRow {
                    ka,
                    qe: report.qe,
                    qm: report.qm,
                    q: report.q,
                    self_resonant: (report.qe - report.qm).abs() / report.q
                        <= SELF_RESONANCE_TOL,
                });
            }
        };
        Ok(SweepRow {
            ka,
            qe: state.qe,
            qm: state.qm,
            q: state.q,
            self_resonant: (state.qe - state.qm).abs() / state.q <= SELF_RESONANCE_TOL,
        })
    };
    match run() {
        Ok(row) => SweepEntry::Ok(row),
        Err(e) => SweepEntry::Failed { ka, error: e.to_string() },
    }
}
