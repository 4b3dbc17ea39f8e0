//! Analytic spherical curves used for design-comparison overlays: the
//! spherical helix (constant elevation rate, M turns pole to pole) and the
//! loxodrome (rhumb line, constant meridian angle with asymptotic poles).

use thiserror::Error;

use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("helix parameter t = {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("invalid curve parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveKind {
    /// Spherical helix with `M` turns.
    Helix,
    /// Loxodrome with slope `γ`.
    Loxodrome,
}

/// A sampled spherical curve: `param` is M for the helix, γ for the
/// loxodrome. Helix samples run over t ∈ [0, 1]; loxodrome samples over a
/// symmetric t-interval (the curve reaches the poles only asymptotically).
#[derive(Clone, Debug)]
pub struct SphericalCurve {
    pub kind: CurveKind,
    pub param: f64,
    pub radius: f64,
    pub samples: Vec<(f64, Vec3)>,
}

/// Point on the spherical helix
/// `r(t) = R [f(t) cos 2πMt, f(t) sin 2πMt, 2t − 1]`, `f(t) = √(1 − 4(t−½)²)`.
pub fn helix_point(turns: f64, radius: f64, t: f64) -> Result<Vec3, CurveError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CurveError::ParameterOutOfRange(t));
    }
    let f = (1.0 - 4.0 * (t - 0.5) * (t - 0.5)).max(0.0).sqrt();
    let phase = 2.0 * std::f64::consts::PI * turns * t;
    Ok(Vec3::new(radius * f * phase.cos(), radius * f * phase.sin(), radius * (2.0 * t - 1.0)))
}

/// Point on the loxodrome
/// `r(t) = R [cos t / cosh γt, sin t / cosh γt, tanh γt]`, t ∈ ℝ.
pub fn loxodrome_point(gamma: f64, radius: f64, t: f64) -> Vec3 {
    let sech = 1.0 / (gamma * t).cosh();
    Vec3::new(radius * t.cos() * sech, radius * t.sin() * sech, radius * (gamma * t).tanh())
}

/// Loxodrome tangent on the unit sphere: magnitude `√(1+γ²)/cosh(γt)`
/// (scales with R) and the constant spherical components of the unit tangent
/// `(τ_r, τ_θ, τ_φ)/|τ| = (0, −γ/√(1+γ²), 1/√(1+γ²))`.
pub fn loxodrome_tangent(gamma: f64, t: f64) -> (f64, [f64; 3]) {
    let root = (1.0 + gamma * gamma).sqrt();
    let magnitude = root / (gamma * t).cosh();
    (magnitude, [0.0, -gamma / root, 1.0 / root])
}

/// Uniform sampling of either curve. Helix: t ∈ [0, 1]; loxodrome:
/// t ∈ [−t_span, t_span].
pub fn sample_curve(
    kind: CurveKind,
    param: f64,
    radius: f64,
    count: usize,
    t_span: f64,
) -> Result<SphericalCurve, CurveError> {
    if count < 2 {
        return Err(CurveError::InvalidParameter(format!("need at least 2 samples, got {count}")));
    }
    if !(radius > 0.0) {
        return Err(CurveError::InvalidParameter(format!("radius must be positive ({radius})")));
    }
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let u = i as f64 / (count - 1) as f64;
        let (t, p) = match kind {
            CurveKind::Helix => (u, helix_point(param, radius, u)?),
            CurveKind::Loxodrome => {
                let t = t_span * (2.0 * u - 1.0);
                (t, loxodrome_point(param, radius, t))
            }
        };
        samples.push((t, p));
    }
    Ok(SphericalCurve { kind, param, radius, samples })
}

/// Azimuthal rotation by π, producing the second arm of a 2-arm layout.
pub fn rotate_half_turn(curve: &SphericalCurve) -> SphericalCurve {
    let samples =
        curve.samples.iter().map(|&(t, p)| (t, Vec3::new(-p.x, -p.y, p.z))).collect();
    SphericalCurve { samples, ..curve.clone() }
}

/// Angle (radians) between the curve tangent at `t` and the local meridian
/// direction θ̂, computed numerically. Defined away from the poles.
pub fn meridian_angle(point: impl Fn(f64) -> Vec3, t: f64, h: f64) -> f64 {
    let tau = (point(t + h) - point(t - h)) * (1.0 / (2.0 * h));
    let r = point(t);
    let rn = r.normalized();
    // θ̂ = normalized ∂r/∂θ: ẑ component −sinθ, horizontal component cosθ.
    let rho = (rn.x * rn.x + rn.y * rn.y).sqrt();
    let theta_hat = Vec3::new(rn.x * rn.z / rho, rn.y * rn.z / rho, -rho);
    let cosang = tau.dot(theta_hat) / tau.norm();
    cosang.clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helix_endpoints_are_poles() {
        let r = 2.0;
        let p0 = helix_point(3.0, r, 0.0).unwrap();
        let p1 = helix_point(3.0, r, 1.0).unwrap();
        assert!(p0.dist(Vec3::new(0.0, 0.0, -r)) < 1e-12);
        assert!(p1.dist(Vec3::new(0.0, 0.0, r)) < 1e-12);
        assert!(helix_point(3.0, r, 0.5).unwrap().z.abs() < 1e-12);
        assert!(helix_point(3.0, r, 1.2).is_err());
    }

    #[test]
    fn helix_points_lie_on_sphere() {
        let r = 1.7;
        for i in 0..1000 {
            let t = (i as f64 + 0.5) / 1000.0;
            let p = helix_point(2.0, r, t).unwrap();
            assert!((p.norm() - r).abs() <= 1e-12 * r, "t = {t}");
        }
    }

    #[test]
    fn loxodrome_start_and_limits() {
        let r = 1.0;
        assert!(loxodrome_point(0.2, r, 0.0).dist(Vec3::new(r, 0.0, 0.0)) < 1e-15);
        let far = loxodrome_point(0.2, r, 200.0);
        assert!(far.dist(Vec3::new(0.0, 0.0, r)) < 1e-6, "approaches the north pole");
        let near = loxodrome_point(0.2, r, -200.0);
        assert!(near.dist(Vec3::new(0.0, 0.0, -r)) < 1e-6);
    }

    #[test]
    fn loxodrome_points_lie_on_sphere() {
        let r = 0.8;
        for i in 0..1000 {
            let t = -6.0 + 12.0 * i as f64 / 999.0;
            let p = loxodrome_point(0.35, r, t);
            assert!((p.norm() - r).abs() <= 1e-12 * r);
        }
    }

    #[test]
    fn tangent_magnitude_matches_numeric_differentiation() {
        let gamma = 0.3;
        let h = 1e-6;
        for i in 0..=60 {
            let t = -3.0 + 6.0 * i as f64 / 60.0;
            let tau =
                (loxodrome_point(gamma, 1.0, t + h) - loxodrome_point(gamma, 1.0, t - h))
                    * (1.0 / (2.0 * h));
            let (mag, _) = loxodrome_tangent(gamma, t);
            assert!((tau.norm() - mag).abs() < 1e-8, "t = {t}: {} vs {mag}", tau.norm());
        }
    }

    #[test]
    fn tangent_components_constant_with_zero_radial_part() {
        let gamma = 0.45;
        let (_, c0) = loxodrome_tangent(gamma, -2.0);
        for t in [-1.0, 0.0, 0.7, 2.5] {
            let (_, c) = loxodrome_tangent(gamma, t);
            assert_eq!(c[0], 0.0);
            assert!((c[1] - c0[1]).abs() < 1e-15);
            assert!((c[2] - c0[2]).abs() < 1e-15);
            assert!((c[1] / c[2] + gamma).abs() < 1e-14, "θ̂/φ̂ ratio must equal −γ");
        }
    }

    #[test]
    fn loxodrome_meridian_angle_is_constant() {
        let gamma = 0.25;
        let expect = (1.0 / gamma).atan();
        for i in 0..=40 {
            let t = -2.0 + 4.0 * i as f64 / 40.0;
            let ang = meridian_angle(|t| loxodrome_point(gamma, 1.0, t), t, 1e-6);
            // θ̂ points south-to-north travel-wise; the tangent makes the
            // complementary angle with ±θ̂ depending on hemisphere sign.
            let ang = ang.min(std::f64::consts::PI - ang);
            assert!((ang - expect.min(std::f64::consts::PI - expect)).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn helix_meridian_angle_varies_along_curve() {
        // The helix slope is not constant: between the equator and
        // |z| = 0.9R the meridian angle changes by more than 5° for M = 2.
        let point = |t: f64| helix_point(2.0, 1.0, t).unwrap();
        let ang_eq = meridian_angle(point, 0.5, 1e-6).to_degrees();
        // t with z = 0.9: 2t − 1 = 0.9 → t = 0.95.
        let ang_hi = meridian_angle(point, 0.95, 1e-6).to_degrees();
        assert!(
            (ang_eq - ang_hi).abs() > 5.0,
            "meridian angle almost constant: {ang_eq}° vs {ang_hi}°"
        );
    }

    #[test]
    fn stereographic_projection_is_log_spiral() {
        // Project from the north pole onto the equatorial plane: the length
        // of the image vector is e^{γt} and the polar angle is t, so
        // log-radius is linear in angle. Check the linear-fit residual.
        let gamma = 0.3;
        let n = 200;
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let t = -3.0 + 6.0 * i as f64 / (n - 1) as f64;
            let p = loxodrome_point(gamma, 1.0, t);
            let scale = 1.0 / (1.0 - p.z);
            let (x, y) = (p.x * scale, p.y * scale);
            let logr = (x * x + y * y).sqrt().ln();
            pts.push((t, logr));
        }
        // Least-squares line logr = a·t + b.
        let m = n as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let a = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let b = (sy - a * sx) / m;
        let resid = pts
            .iter()
            .map(|&(t, y)| (y - a * t - b).abs())
            .fold(0.0, f64::max);
        assert!(resid <= 1e-9, "log-spiral fit residual {resid}");
        assert!((a - gamma).abs() < 1e-9, "slope {a} vs γ = {gamma}");
    }

    #[test]
    fn sampling_and_rotation() {
        let c = sample_curve(CurveKind::Loxodrome, 0.2, 1.5, 101, 3.0).unwrap();
        assert_eq!(c.samples.len(), 101);
        for &(_, p) in &c.samples {
            assert!((p.norm() - 1.5).abs() < 1e-12 * 1.5);
        }
        let arm2 = rotate_half_turn(&c);
        let (_, p) = c.samples[17];
        let (_, q) = arm2.samples[17];
        assert!((p.x + q.x).abs() < 1e-15 && (p.y + q.y).abs() < 1e-15 && p.z == q.z);
        assert!(sample_curve(CurveKind::Helix, 2.0, 1.0, 1, 0.0).is_err());
    }
}
