//! Density filtering, smoothed-Heaviside projection, hard thresholding and
//! the chain-rule backpropagation of sensitivities through both.
//!
//! The density filter is a row-stochastic convolution with linear-hat weights
//! over the centroid neighborhoods `B_t`; the projection is the tanh-based
//! smoothed Heaviside with sharpness β and level η. Feed-adjacent triangles
//! can be pinned: they keep their value through both maps and receive no
//! gradient, but still act as sources inside the filter neighborhoods.

use thiserror::Error;

use crate::mesh::{neighborhoods, TriMesh};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid projection parameter: {0}")]
    InvalidProjection(String),
}

/// Sparse row-stochastic filter matrix, one row per triangle.
#[derive(Clone, Debug)]
pub struct DensityFilter {
    pub rmin: f64,
    /// Per-row `(column, weight)` pairs; weights in each row sum to 1.
    rows: Vec<Vec<(usize, f64)>>,
}

impl DensityFilter {
    pub fn num_triangles(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, t: usize) -> &[(usize, f64)] {
        &self.rows[t]
    }

    /// Apply the filter: `ρ̃ = W ρ`, then overwrite pinned entries.
    pub fn apply(&self, rho: &[f64], fixed: &FixedMask) -> Result<Vec<f64>, FilterError> {
        if rho.len() != self.rows.len() {
            return Err(FilterError::DimensionMismatch { expected: self.rows.len(), got: rho.len() });
        }
        let mut out = Vec::with_capacity(rho.len());
        for (t, row) in self.rows.iter().enumerate() {
            if let Some(pin) = fixed.pinned(t) {
                out.push(pin);
                continue;
            }
            out.push(row.iter().map(|&(j, w)| w * rho[j]).sum());
        }
        Ok(out)
    }
}

/// Build the hat-kernel filter `W_tj = (Rmin − ‖r_t − r_j‖) / Σ_k (…)` over
/// the neighborhoods `B_t`. `Rmin = 0` yields the identity.
pub fn build_density_filter(mesh: &TriMesh, rmin: f64) -> DensityFilter {
    let hoods = neighborhoods(mesh, rmin);
    let mut rows = Vec::with_capacity(hoods.len());
    for (t, hood) in hoods.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = hood
            .iter()
            .map(|&j| (j, rmin - mesh.centroids[t].dist(mesh.centroids[j])))
            .collect();
        let total: f64 = row.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            // Degenerate support (Rmin = 0): identity row.
            row = vec![(t, 1.0)];
        } else {
            for (_, w) in &mut row {
                *w /= total;
            }
        }
        rows.push(row);
    }
    DensityFilter { rmin, rows }
}

/// Smoothed-Heaviside projection parameters.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionSpec {
    pub beta: f64,
    pub eta: f64,
}

impl ProjectionSpec {
    pub fn new(beta: f64, eta: f64) -> Result<Self, FilterError> {
        if !(beta > 0.0) {
            return Err(FilterError::InvalidProjection(format!("beta = {beta} must be > 0")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(FilterError::InvalidProjection(format!("eta = {eta} must lie in (0, 1)")));
        }
        Ok(ProjectionSpec { beta, eta })
    }

    fn denominator(&self) -> f64 {
        (self.beta * self.eta).tanh() + (self.beta * (1.0 - self.eta)).tanh()
    }

    /// `H(ρ̃) = [tanh(βη) + tanh(β(ρ̃ − η))] / [tanh(βη) + tanh(β(1 − η))]`,
    /// with fixed points at 0 and 1.
    pub fn project_value(&self, rho_tilde: f64) -> f64 {
        let num = (self.beta * self.eta).tanh() + (self.beta * (rho_tilde - self.eta)).tanh();
        num / self.denominator()
    }

    /// `∂ρ̄̃/∂ρ̃ = β(1 − tanh²(β(ρ̃ − η))) / [tanh(βη) + tanh(β(1 − η))]`,
    /// strictly positive.
    pub fn project_derivative_value(&self, rho_tilde: f64) -> f64 {
        let t = (self.beta * (rho_tilde - self.eta)).tanh();
        self.beta * (1.0 - t * t) / self.denominator()
    }
}

/// Per-triangle pin state: `Some(value)` keeps the triangle at `value`
/// through filtering/projection and zeroes its gradient.
#[derive(Clone, Debug)]
pub struct FixedMask {
    pins: Vec<Option<f64>>,
}

impl FixedMask {
    pub fn free(t: usize) -> Self {
        FixedMask { pins: vec![None; t] }
    }

    pub fn from_pins(pins: Vec<Option<f64>>) -> Self {
        FixedMask { pins }
    }

    pub fn pin(&mut self, t: usize, value: f64) {
        self.pins[t] = Some(value);
    }

    pub fn pinned(&self, t: usize) -> Option<f64> {
        self.pins[t]
    }

    pub fn is_pinned(&self, t: usize) -> bool {
        self.pins[t].is_some()
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    /// Apply pinned values onto a density vector.
    pub fn impose(&self, rho: &mut [f64]) {
        for (r, p) in rho.iter_mut().zip(&self.pins) {
            if let Some(v) = p {
                *r = *v;
            }
        }
    }
}

/// Design field triple (design ρ, filtered ρ̃, projected ρ̄̃) plus the pin
/// mask; all three fields hold the pinned values on fixed triangles.
#[derive(Clone, Debug)]
pub struct DesignField {
    pub rho: Vec<f64>,
    pub rho_tilde: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub fixed: FixedMask,
}

impl DesignField {
    /// Run the filter + projection pipeline from a raw design vector.
    pub fn evaluate(
        rho: Vec<f64>,
        filter: &DensityFilter,
        proj: &ProjectionSpec,
        fixed: FixedMask,
    ) -> Result<Self, FilterError> {
        let mut rho = rho;
        fixed.impose(&mut rho);
        let rho_tilde = filter.apply(&rho, &fixed)?;
        let rho_bar = project(&rho_tilde, proj, &fixed);
        Ok(DesignField { rho, rho_tilde, rho_bar, fixed })
    }
}

/// Elementwise projection with pinned triangles overwritten.
pub fn project(rho_tilde: &[f64], spec: &ProjectionSpec, fixed: &FixedMask) -> Vec<f64> {
    rho_tilde
        .iter()
        .enumerate()
        .map(|(t, &x)| fixed.pinned(t).unwrap_or_else(|| spec.project_value(x)))
        .collect()
}

/// Elementwise projection derivative (no pin handling; pinned rows are
/// masked during backpropagation instead).
pub fn project_derivative(rho_tilde: &[f64], spec: &ProjectionSpec) -> Vec<f64> {
    rho_tilde.iter().map(|&x| spec.project_derivative_value(x)).collect()
}

/// Chain rule from physical to design densities:
/// `dQ/dρ = Wᵀ (dQ/dρ̄̃ ⊙ ∂ρ̄̃/∂ρ̃)`, with pinned triangles cut out of the
/// chain on both sides.
pub fn backpropagate(
    dq_drho_bar: &[f64],
    filter: &DensityFilter,
    rho_tilde: &[f64],
    spec: &ProjectionSpec,
    fixed: &FixedMask,
) -> Result<Vec<f64>, FilterError> {
    let t = filter.num_triangles();
    if dq_drho_bar.len() != t || rho_tilde.len() != t {
        return Err(FilterError::DimensionMismatch { expected: t, got: dq_drho_bar.len() });
    }
    let mut out = vec![0.0; t];
    for i in 0..t {
        if fixed.is_pinned(i) {
            continue; // pinned ρ̄̃ does not respond to the design field
        }
        let g = dq_drho_bar[i] * spec.project_derivative_value(rho_tilde[i]);
        for &(j, w) in filter.row(i) {
            out[j] += w * g;
        }
    }
    for (j, o) in out.iter_mut().enumerate() {
        if fixed.is_pinned(j) {
            *o = 0.0;
        }
    }
    Ok(out)
}

/// Hard threshold at 0.5 (`ρ̄̃ ≥ 0.5 → 1`); pinned triangles keep their
/// pinned value thresholded the same way.
pub fn hard_threshold(rho_bar: &[f64], fixed: &FixedMask) -> Vec<f64> {
    rho_bar
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            let v = fixed.pinned(t).unwrap_or(x);
            if v >= 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_plate;
    use proptest::prelude::*;

    fn no_pins(mesh: &TriMesh) -> FixedMask {
        FixedMask::free(mesh.num_triangles())
    }

    #[test]
    fn rows_are_stochastic() {
        let mesh = generate_plate(1.0, 0.6, 8, 5).unwrap();
        let filter = build_density_filter(&mesh, 0.2 * mesh.a);
        for t in 0..filter.num_triangles() {
            let s: f64 = filter.row(t).iter().map(|&(_, w)| w).sum();
            assert!((s - 1.0).abs() < 1e-12, "row {t} sums to {s}");
            assert!(filter.row(t).iter().all(|&(_, w)| w >= 0.0));
        }
    }

    #[test]
    fn small_radius_gives_identity() {
        let mesh = generate_plate(1.0, 0.5, 4, 4).unwrap();
        // Smallest centroid spacing on this grid is well above 1e-6.
        let filter = build_density_filter(&mesh, 1e-6);
        let rho: Vec<f64> = (0..mesh.num_triangles()).map(|t| (t as f64).sin().abs()).collect();
        let filtered = filter.apply(&rho, &no_pins(&mesh)).unwrap();
        for (a, b) in rho.iter().zip(&filtered) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_field_is_invariant() {
        let mesh = generate_plate(1.0, 0.6, 6, 4).unwrap();
        let filter = build_density_filter(&mesh, 0.3 * mesh.a);
        let rho = vec![0.42; mesh.num_triangles()];
        for x in filter.apply(&rho, &no_pins(&mesh)).unwrap() {
            assert!((x - 0.42).abs() < 1e-13);
        }
    }

    #[test]
    fn impulse_response_matches_brute_force_convolution() {
        let mesh = generate_plate(1.0, 0.6, 7, 4).unwrap();
        let rmin = 0.25 * mesh.a;
        let filter = build_density_filter(&mesh, rmin);
        let t_imp = mesh.num_triangles() / 2;
        let mut rho = vec![0.0; mesh.num_triangles()];
        rho[t_imp] = 1.0;
        let filtered = filter.apply(&rho, &no_pins(&mesh)).unwrap();
        // Direct evaluation of the hat-kernel convolution.
        for t in 0..mesh.num_triangles() {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..mesh.num_triangles() {
                let d = mesh.centroids[t].dist(mesh.centroids[j]);
                if d <= rmin {
                    den += rmin - d;
                    if j == t_imp {
                        num = rmin - d;
                    }
                }
            }
            assert!((filtered[t] - num / den).abs() < 1e-14, "triangle {t}");
        }
    }

    #[test]
    fn projection_endpoints_are_fixed() {
        for beta in [0.5, 1.0, 8.0, 32.0] {
            for eta in [0.3, 0.5, 0.7] {
                let spec = ProjectionSpec::new(beta, eta).unwrap();
                assert!((spec.project_value(0.0)).abs() < 1e-15);
                assert!((spec.project_value(1.0) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projection_midpoint_symmetry_at_half_eta() {
        for beta in [1.0, 4.0, 32.0] {
            let spec = ProjectionSpec::new(beta, 0.5).unwrap();
            assert!((spec.project_value(0.5) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_value_frozen_oracle() {
        // β = 4, η = 0.5, ρ̃ = 0.75: (tanh 2 + tanh 1)/(2 tanh 2),
        // evaluated independently to 20 digits.
        let spec = ProjectionSpec::new(4.0, 0.5).unwrap();
        let expect = 0.895_006_414_596_493_4;
        let got = spec.project_value(0.75);
        assert!((got - expect).abs() < 1e-15, "{got} vs {expect}");
    }

    #[test]
    fn projection_derivative_matches_fd() {
        let spec = ProjectionSpec::new(6.0, 0.45).unwrap();
        let h = 1e-6;
        for i in 0..100 {
            let x = 0.005 + 0.99 * (i as f64 / 99.0);
            let fd = (spec.project_value(x + h) - spec.project_value(x - h)) / (2.0 * h);
            let an = spec.project_derivative_value(x);
            assert!((an - fd).abs() / fd.abs() < 1e-7, "x = {x}: {an} vs {fd}");
        }
    }

    #[test]
    fn projection_derivative_peaks_at_eta() {
        let spec = ProjectionSpec::new(8.0, 0.5).unwrap();
        let peak = spec.project_derivative_value(0.5);
        for x in [0.1, 0.3, 0.45, 0.55, 0.7, 0.9] {
            assert!(spec.project_derivative_value(x) < peak);
        }
    }

    #[test]
    fn projection_flattens_as_beta_vanishes() {
        // β → 0⁺: H tends to a linear ramp, derivative to a constant.
        let spec = ProjectionSpec::new(1e-6, 0.5).unwrap();
        let d0 = spec.project_derivative_value(0.1);
        let d1 = spec.project_derivative_value(0.9);
        assert!((d0 - d1).abs() < 1e-9);
        assert!((spec.project_value(0.3) - 0.3).abs() < 1e-6);
    }

    #[test]
    fn backprop_is_transpose_of_analytic_jacobian() {
        let mesh = generate_plate(1.0, 0.5, 3, 2).unwrap(); // 24 triangles
        let t = mesh.num_triangles();
        let filter = build_density_filter(&mesh, 0.3 * mesh.a);
        let spec = ProjectionSpec::new(3.0, 0.5).unwrap();
        let fixed = FixedMask::free(t);
        let rho: Vec<f64> = (0..t).map(|i| 0.2 + 0.6 * ((i * 7 % 11) as f64 / 11.0)).collect();
        let rho_tilde = filter.apply(&rho, &fixed).unwrap();

        // Dense Jacobian of the filter+projection map: J = diag(H'(ρ̃)) W.
        let mut jac = vec![vec![0.0; t]; t];
        for i in 0..t {
            let d = spec.project_derivative_value(rho_tilde[i]);
            for &(j, w) in filter.row(i) {
                jac[i][j] = d * w;
            }
        }
        let u: Vec<f64> = (0..t).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let v: Vec<f64> = (0..t).map(|i| ((i * 5 % 9) as f64) / 4.0 - 1.0).collect();
        let jv: Vec<f64> =
            (0..t).map(|i| (0..t).map(|j| jac[i][j] * v[j]).sum::<f64>()).collect();
        let jtu = backpropagate(&u, &filter, &rho_tilde, &spec, &fixed).unwrap();
        let lhs: f64 = u.iter().zip(&jv).map(|(a, b)| a * b).sum();
        let rhs: f64 = jtu.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");

        // The dense Jacobian itself agrees with finite differences.
        let h = 1e-6;
        for j in (0..t).step_by(5) {
            let mut rp = rho.clone();
            rp[j] += h;
            let mut rm = rho.clone();
            rm[j] -= h;
            let fp = project(&filter.apply(&rp, &fixed).unwrap(), &spec, &fixed);
            let fm = project(&filter.apply(&rm, &fixed).unwrap(), &spec, &fixed);
            for i in 0..t {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!((fd - jac[i][j]).abs() < 1e-6, "J[{i}][{j}]: {fd} vs {}", jac[i][j]);
            }
        }
    }

    #[test]
    fn backprop_identity_filter_tiny_beta_is_proportional() {
        let mesh = generate_plate(1.0, 0.5, 3, 2).unwrap();
        let t = mesh.num_triangles();
        let filter = build_density_filter(&mesh, 0.0);
        let spec = ProjectionSpec::new(1e-9, 0.5).unwrap();
        let fixed = FixedMask::free(t);
        let rho_tilde: Vec<f64> = (0..t).map(|i| i as f64 / t as f64).collect();
        let g: Vec<f64> = (0..t).map(|i| (i as f64) - 10.0).collect();
        let back = backpropagate(&g, &filter, &rho_tilde, &spec, &fixed).unwrap();
        let ratio = back[3] / g[3];
        for i in 0..t {
            if g[i].abs() > 1e-12 {
                assert!((back[i] / g[i] - ratio).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pinned_triangles_get_zero_gradient_and_keep_values() {
        let mesh = generate_plate(1.0, 0.5, 4, 3).unwrap();
        let t = mesh.num_triangles();
        let filter = build_density_filter(&mesh, 0.25 * mesh.a);
        let spec = ProjectionSpec::new(2.0, 0.5).unwrap();
        let mut fixed = FixedMask::free(t);
        fixed.pin(0, 1.0);
        fixed.pin(5, 1.0);
        let field =
            DesignField::evaluate(vec![0.35; t], &filter, &spec, fixed.clone()).unwrap();
        assert_eq!(field.rho[0], 1.0);
        assert_eq!(field.rho_tilde[5], 1.0);
        assert_eq!(field.rho_bar[0], 1.0);
        let g = vec![1.0; t];
        let back = backpropagate(&g, &filter, &field.rho_tilde, &spec, &fixed).unwrap();
        assert_eq!(back[0], 0.0);
        assert_eq!(back[5], 0.0);
        assert!(back.iter().enumerate().any(|(i, &x)| !fixed.is_pinned(i) && x != 0.0));
    }

    #[test]
    fn hard_threshold_rules() {
        let fixed = FixedMask::from_pins(vec![None, None, Some(1.0), None]);
        let out = hard_threshold(&[0.5, 0.4999, 0.1, 0.9], &fixed);
        assert_eq!(out, vec![1.0, 0.0, 1.0, 1.0]);
        // Idempotence.
        assert_eq!(hard_threshold(&out, &fixed), out);
    }

    #[test]
    fn all_gray_below_half_thresholds_to_zero_except_pins() {
        let mut fixed = FixedMask::free(6);
        fixed.pin(2, 1.0);
        let out = hard_threshold(&[0.4999; 6], &fixed);
        assert_eq!(out, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn checkerboard_is_suppressed_then_projection_rebinarizes() {
        // Checkerboard at the cell level on a 12×6 plate, filter radius
        // comparable to the cell pitch.
        let (nx, ny) = (12usize, 6usize);
        let mesh = generate_plate(1.0, 0.5, nx, ny).unwrap();
        let pitch = 1.0 / nx as f64;
        let filter = build_density_filter(&mesh, 1.4 * pitch);
        let fixed = no_pins(&mesh);
        let rho: Vec<f64> = (0..mesh.num_triangles())
            .map(|t| {
                let cell = t / 4;
                let (i, j) = (cell % nx, cell / nx);
                ((i + j) % 2) as f64
            })
            .collect();
        let filtered = filter.apply(&rho, &fixed).unwrap();
        let mean: f64 = filtered.iter().sum::<f64>() / filtered.len() as f64;
        let max_dev = filtered.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
        assert!(max_dev < 0.25, "pattern not suppressed: max deviation {max_dev}");

        let spec = ProjectionSpec::new(32.0, 0.5).unwrap();
        let projected = project(&filtered, &spec, &fixed);
        let gray =
            projected.iter().filter(|&&x| x > 0.05 && x < 0.95).count() as f64;
        let frac = gray / projected.len() as f64;
        assert!(frac < 0.10, "gray fraction after β=32 projection: {frac}");
    }

    proptest! {
        #[test]
        fn filtered_field_stays_in_unit_interval(seed in 0u64..500) {
            let mesh = generate_plate(1.0, 0.5, 5, 3).unwrap();
            let t = mesh.num_triangles();
            let filter = build_density_filter(&mesh, 0.2 * mesh.a);
            let rho: Vec<f64> = (0..t)
                .map(|i| {
                    let x = (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64 * 1442695040888963407)) >> 11;
                    (x as f64) / (1u64 << 53) as f64
                })
                .collect();
            let out = filter.apply(&rho, &FixedMask::free(t)).unwrap();
            for x in out {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&x));
            }
        }

        #[test]
        fn projection_is_monotone(beta in 0.1f64..40.0, eta in 0.05f64..0.95) {
            let spec = ProjectionSpec::new(beta, eta).unwrap();
            let mut last = -1.0;
            for i in 0..=200 {
                let v = spec.project_value(i as f64 / 200.0);
                prop_assert!(v >= last - 1e-14);
                last = v;
            }
        }
    }
}
