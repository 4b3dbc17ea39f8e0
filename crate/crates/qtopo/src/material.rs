//! Density-to-resistivity interpolation and the material impedance matrix.
//!
//! Projected densities map to surface resistivity through
//! `Rs(ρ) = Ω_vac (Ω_met/Ω_vac)^f(ρ)` with the RAMP-like penalization
//! `f(ρ) = ρ / (1 + p(1 − ρ))`, spanning `[Ω_met, Ω_vac]` with endpoints
//! attained exactly at ρ = 1 and ρ = 0.

use faer::Mat;
use thiserror::Error;

use crate::operators::TriangleBlock;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("density {0} outside [0, 1]")]
    DensityOutOfRange(f64),
    #[error("invalid interpolation bounds: need Omega_hi > Omega_lo > 0, got lo = {lo}, hi = {hi}")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("invalid RAMP penalty p = {0} (must be ≥ 0)")]
    InvalidPenalty(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Resistivity interpolation parameters: `omega_lo` is the PEC-side bound
/// Ω_met (Ω/sq), `omega_hi` the vacuum-side bound Ω_vac (Ω/sq), `p` the RAMP
/// penalty.
#[derive(Clone, Copy, Debug)]
pub struct InterpolationSpec {
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub p: f64,
}

impl InterpolationSpec {
    pub fn new(omega_lo: f64, omega_hi: f64, p: f64) -> Result<Self, MaterialError> {
        if !(omega_hi > omega_lo && omega_lo > 0.0) {
            return Err(MaterialError::InvalidBounds { lo: omega_lo, hi: omega_hi });
        }
        if !(p >= 0.0) {
            return Err(MaterialError::InvalidPenalty(p));
        }
        Ok(InterpolationSpec { omega_lo, omega_hi, p })
    }

    /// Surface resistivity at projected density `rho_bar` (Ω/sq), strictly
    /// decreasing from Ω_vac at 0 to Ω_met at 1.
    pub fn surface_resistivity(&self, rho_bar: f64) -> Result<f64, MaterialError> {
        let f = ramp(rho_bar, self.p)?;
        Ok(self.omega_hi * (self.omega_lo / self.omega_hi).powf(f))
    }

    /// Analytic derivative dRs/dρ̄̃, negative everywhere on (0, 1).
    pub fn d_surface_resistivity(&self, rho_bar: f64) -> Result<f64, MaterialError> {
        let rs = self.surface_resistivity(rho_bar)?;
        let log_ratio = (self.omega_lo / self.omega_hi).ln();
        Ok(rs * log_ratio * ramp_derivative(rho_bar, self.p))
    }
}

impl Default for InterpolationSpec {
    /// The published bounds Ω_vac = 1e5 Ω, Ω_met = 1 Ω with p = 1.
    fn default() -> Self {
        InterpolationSpec { omega_lo: 1.0, omega_hi: 1e5, p: 1.0 }
    }
}

/// RAMP-like penalization `f(ρ) = ρ / (1 + p(1 − ρ))`; monotone increasing
/// with f(0) = 0, f(1) = 1.
pub fn ramp(rho: f64, p: f64) -> Result<f64, MaterialError> {
    let rho = checked_density(rho)?;
    Ok(rho / (1.0 + p * (1.0 - rho)))
}

fn ramp_derivative(rho: f64, p: f64) -> f64 {
    let d = 1.0 + p * (1.0 - rho);
    (1.0 + p) / (d * d)
}

// Densities arrive from the optimizer and the projection filter; allow a
// round-off sliver outside [0, 1] and clamp it, reject anything larger.
fn checked_density(rho: f64) -> Result<f64, MaterialError> {
    if !(-1e-12..=1.0 + 1e-12).contains(&rho) {
        return Err(MaterialError::DensityOutOfRange(rho));
    }
    Ok(rho.clamp(0.0, 1.0))
}

/// Material impedance matrix `Zρ = Σ_t Rs(ρ̄̃_t) Ψ_ρ^t` accumulated from the
/// per-triangle element blocks; real symmetric positive semidefinite.
pub fn assemble_zrho(
    rho_bar: &[f64],
    psi: &[TriangleBlock],
    spec: &InterpolationSpec,
    n: usize,
) -> Result<Mat<f64>, MaterialError> {
    if rho_bar.len() != psi.len() {
        return Err(MaterialError::DimensionMismatch(format!(
            "{} densities vs {} element matrices",
            rho_bar.len(),
            psi.len()
        )));
    }
    let mut zrho = Mat::<f64>::zeros(n, n);
    add_zrho_into(&mut zrho, rho_bar, psi, spec)?;
    Ok(zrho)
}

/// Scatter `Σ_t Rs(ρ̄̃_t) Ψ_ρ^t` into an existing matrix (used by the hot
/// loop to avoid materializing Zρ separately from Z₀ + Zρ).
pub fn add_zrho_into(
    target: &mut Mat<f64>,
    rho_bar: &[f64],
    psi: &[TriangleBlock],
    spec: &InterpolationSpec,
) -> Result<(), MaterialError> {
    for (rho, block) in rho_bar.iter().zip(psi) {
        let rs = spec.surface_resistivity(*rho)?;
        let k = block.bases.len();
        for i in 0..k {
            for j in 0..k {
                target[(block.bases[i], block.bases[j])] += rs * block.entry(i, j);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints_and_midpoint() {
        assert_eq!(ramp(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(ramp(1.0, 1.0).unwrap(), 1.0);
        assert!((ramp(0.5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ramp_p0_is_identity() {
        for i in 0..=10 {
            let rho = i as f64 / 10.0;
            assert!((ramp(rho, 0.0).unwrap() - rho).abs() < 1e-15);
        }
    }

    #[test]
    fn ramp_rejects_out_of_range() {
        assert!(ramp(-0.1, 1.0).is_err());
        assert!(ramp(1.1, 1.0).is_err());
    }

    #[test]
    fn resistivity_default_endpoints() {
        let spec = InterpolationSpec::default();
        assert!((spec.surface_resistivity(0.0).unwrap() - 1e5).abs() < 1e-9);
        assert!((spec.surface_resistivity(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resistivity_midpoint_value() {
        // Rs(0.5) with p = 1: 1e5 · (1e-5)^(1/3) = 10^(10/3).
        let spec = InterpolationSpec::default();
        let expect = 10f64.powf(10.0 / 3.0);
        let got = spec.surface_resistivity(0.5).unwrap();
        assert!((got - expect).abs() / expect < 1e-14, "{got} vs {expect}");
        assert!((got - 2154.434_690_031_884).abs() < 1e-9);
    }

    #[test]
    fn resistivity_strictly_decreasing_on_grid() {
        let spec = InterpolationSpec::default();
        let mut last = f64::INFINITY;
        for i in 0..=1000 {
            let rs = spec.surface_resistivity(i as f64 / 1000.0).unwrap();
            assert!(rs < last, "Rs not strictly decreasing at i = {i}");
            last = rs;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let spec = InterpolationSpec::default();
        let h = 1e-6;
        for rho in [0.1, 0.5, 0.9] {
            let fd = (spec.surface_resistivity(rho + h).unwrap()
                - spec.surface_resistivity(rho - h).unwrap())
                / (2.0 * h);
            let an = spec.d_surface_resistivity(rho).unwrap();
            assert!((an - fd).abs() / fd.abs() < 1e-6, "rho = {rho}: {an} vs {fd}");
            assert!(an < 0.0);
        }
    }

    #[test]
    fn derivative_p0_matches_exponential_form() {
        let spec = InterpolationSpec::new(1.0, 1e5, 0.0).unwrap();
        for rho in [0.05, 0.3, 0.77] {
            let rs = spec.surface_resistivity(rho).unwrap();
            let expect = (spec.omega_lo / spec.omega_hi).ln() * rs;
            let got = spec.d_surface_resistivity(rho).unwrap();
            assert!((got - expect).abs() / expect.abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(InterpolationSpec::new(1e5, 1.0, 1.0).is_err());
        assert!(InterpolationSpec::new(0.0, 1e5, 1.0).is_err());
        assert!(InterpolationSpec::new(1.0, 1e5, -0.5).is_err());
    }
}
