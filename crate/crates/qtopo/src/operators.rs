//! Method-of-moments operators over an RWG basis.
//!
//! The vacuum impedance matrix is the Galerkin EFIE in mixed-potential form,
//!
//! ```text
//!   Z0_mn = jkη₀ ∬ f_m·f_n g dS'dS − (jη₀/k) ∬ (∇·f_m)(∇'·f_n) g dS'dS,
//!   g(R) = e^{−jkR} / 4πR,
//! ```
//!
//! assembled over unordered triangle pairs and mirrored, so reciprocity
//! (complex symmetry) holds exactly. Far pairs use a product Gauss rule; for
//! near pairs the static 1/R kernel is integrated analytically over the
//! source triangle and only the smooth remainder is sampled numerically.
//!
//! The frequency derivative ∂X₀/∂ω comes from a central difference in k, the
//! stored-energy matrices from `Xe/Xm = (ω ∂X₀/∂ω ∓ X₀)/2`, and the material
//! element matrices Ψ_ρ^t from the closed-form integral of RWG products over
//! one triangle.

use faer::{Col, Mat};
use num_complex::Complex64;
use thiserror::Error;

use crate::mesh::{BasisSet, TriMesh};
use crate::quadrature::{rule, QuadSpec, RuleData};
use crate::vec3::Vec3;

/// Free-space impedance (Ω).
pub const ETA0: f64 = 376.730_313_668;
/// Speed of light (m/s).
pub const C0: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("assembly produced a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("wavenumber must be positive, got {0}")]
    InvalidWavenumber(f64),
    #[error(transparent)]
    Feed(#[from] FeedError),
}

#[derive(Debug, Error)]
pub enum FeedError {
    #[error("feed edge {edge} is a boundary edge (no basis function)")]
    BoundaryEdge { edge: usize },
    #[error("feed edge {edge} out of range ({count} edges)")]
    EdgeOutOfRange { edge: usize, count: usize },
    #[error("no suitable feed edge near the requested position")]
    NoCandidate,
}

/// A delta-gap source on a mesh edge (global edge index). The voltage sign
/// follows the RWG reference direction of that edge's basis function
/// (current flows plus → minus triangle for a positive coefficient).
#[derive(Clone, Copy, Debug)]
pub struct Feed {
    pub edge: usize,
    pub voltage: Complex64,
}

/// Delta-gap excitation: a list of fed inner edges with complex voltages.
#[derive(Clone, Debug, Default)]
pub struct FeedSpec {
    pub feeds: Vec<Feed>,
}

impl FeedSpec {
    pub fn single(edge: usize, voltage: f64) -> Self {
        FeedSpec { feeds: vec![Feed { edge, voltage: Complex64::new(voltage, 0.0) }] }
    }
}

/// Pick the inner edge closest to `point` whose direction is roughly
/// perpendicular to the desired current direction (a gap drives current
/// across its edge). Ties resolve to the lower edge index.
pub fn locate_feed_edge(
    mesh: &TriMesh,
    basis: &BasisSet,
    point: Vec3,
    current_dir: Vec3,
) -> Result<usize, FeedError> {
    let d_hat = current_dir.normalized();
    let mut best: Option<(f64, usize)> = None;
    for f in &basis.functions {
        let e = &mesh.edges[f.edge];
        let t_hat = (mesh.vertices[e.vertices[1]] - mesh.vertices[e.vertices[0]]).normalized();
        if t_hat.dot(d_hat).abs() > 0.6 {
            continue;
        }
        let mid = (mesh.vertices[e.vertices[0]] + mesh.vertices[e.vertices[1]]) * 0.5;
        let dist = mid.dist(point);
        if best.map_or(true, |(bd, _)| dist < bd) {
            best = Some((dist, f.edge));
        }
    }
    best.map(|(_, e)| e).ok_or(FeedError::NoCandidate)
}

/// Sign aligning a basis function's reference direction with `current_dir`:
/// +1 when positive excitation drives current along `current_dir` across the
/// gap, −1 otherwise.
pub fn feed_orientation_sign(
    mesh: &TriMesh,
    basis: &BasisSet,
    edge: usize,
    current_dir: Vec3,
) -> Result<f64, FeedError> {
    let n = basis
        .edge_to_basis
        .get(edge)
        .copied()
        .flatten()
        .ok_or(FeedError::BoundaryEdge { edge })?;
    let f = &basis.functions[n];
    let along = (mesh.centroids[f.minus_tri] - mesh.centroids[f.plus_tri]).dot(current_dir);
    Ok(if along >= 0.0 { 1.0 } else { -1.0 })
}

/// Excitation vector `V_m = voltage · l_m` on fed edges, zero elsewhere.
pub fn delta_gap_excitation(basis: &BasisSet, feeds: &FeedSpec) -> Result<Col<Complex64>, FeedError> {
    let mut v = Col::<Complex64>::zeros(basis.len());
    for feed in &feeds.feeds {
        if feed.edge >= basis.edge_to_basis.len() {
            return Err(FeedError::EdgeOutOfRange {
                edge: feed.edge,
                count: basis.edge_to_basis.len(),
            });
        }
        let n = basis.edge_to_basis[feed.edge].ok_or(FeedError::BoundaryEdge { edge: feed.edge })?;
        v[n] += feed.voltage * basis.functions[n].length;
    }
    Ok(v)
}

/// Material element matrix of one triangle: `Ψ_mn = ∫_At f_m·f_n dA` for the
/// (at most 3) basis functions overlapping the triangle. Stored as a dense
/// block over `bases`.
#[derive(Clone, Debug)]
pub struct TriangleBlock {
    pub bases: Vec<usize>,
    block: Vec<f64>,
}

impl TriangleBlock {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.block[i * self.bases.len() + j]
    }
}

/// Closed-form material element matrices for every triangle. RWG products
/// are quadratic, so `∫ (r−p)·(r−q) dA = A[(c−p)·(c−q) + (a²+b²+c²)/36]`
/// with c the centroid and a, b, c the side lengths.
pub fn assemble_material_elements(mesh: &TriMesh, basis: &BasisSet) -> Vec<TriangleBlock> {
    let mut out = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let local = &basis.tri_bases[t];
        let k = local.len();
        let verts = mesh.triangle_vertices(t);
        let area = mesh.areas[t];
        let c = mesh.centroids[t];
        let second_moment = (verts[0].dist(verts[1]).powi(2)
            + verts[1].dist(verts[2]).powi(2)
            + verts[2].dist(verts[0]).powi(2))
            / 36.0;
        let mut block = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                let (bi, bj) = (&local[i], &local[j]);
                let (fi, fj) = (&basis.functions[bi.basis], &basis.functions[bj.basis]);
                let pi = mesh.vertices[bi.free_vertex];
                let pj = mesh.vertices[bj.free_vertex];
                let geom = (c - pi).dot(c - pj) + second_moment;
                block[i * k + j] = bi.sign * bj.sign * fi.length * fj.length
                    / (4.0 * area)
                    * geom;
            }
        }
        out.push(TriangleBlock { bases: local.iter().map(|b| b.basis).collect(), block });
    }
    out
}

/// Analytic potential integrals of the static kernel over a flat triangle:
/// returns `(∫ 1/R dA', ∫ (r'−ρ)/R dA')` where ρ is the projection of the
/// observation point onto the triangle plane.
pub fn static_triangle_integrals(v: &[Vec3; 3], normal: Vec3, r: Vec3) -> (f64, Vec3) {
    let d = normal.dot(r - v[0]);
    let rho_p = r - normal * d;
    let scale = v[0].dist(v[1]).max(v[1].dist(v[2])).max(v[2].dist(v[0]));
    let guard = 1e-24 * scale * scale;

    let mut int_inv_r = 0.0;
    let mut int_grad = Vec3::ZERO;
    for i in 0..3 {
        let a = v[i];
        let b = v[(i + 1) % 3];
        let s_hat = (b - a).normalized();
        let m_hat = s_hat.cross(normal);
        let lm = s_hat.dot(a - rho_p);
        let lp = s_hat.dot(b - rho_p);
        let p0 = m_hat.dot(a - rho_p);
        let r0sq = p0 * p0 + d * d;
        let rm = a.dist(r);
        let rp = b.dist(r);
        // ∫_edge R dl survives even when the observation sits on the edge
        // line; the logarithmic parts vanish there.
        let plain = lp * rp - lm * rm;
        if r0sq <= guard {
            int_grad += m_hat * (0.5 * plain);
            continue;
        }
        // ln((R⁺+l⁺)/(R⁻+l⁻)) in a cancellation-free form.
        let num = if lp >= 0.0 { rp + lp } else { r0sq / (rp - lp) };
        let den = if lm >= 0.0 { rm + lm } else { r0sq / (rm - lm) };
        let f2 = (num / den).ln();
        let beta = (p0 * lp / (r0sq + d.abs() * rp)).atan()
            - (p0 * lm / (r0sq + d.abs() * rm)).atan();
        int_inv_r += p0 * f2 - d.abs() * beta;
        int_grad += m_hat * (0.5 * (r0sq * f2 + plain));
    }
    (int_inv_r, int_grad)
}

/// `(e^{−jx} − 1)/x`, series-expanded near zero.
fn expm1_over_x(x: f64) -> Complex64 {
    if x.abs() < 1e-4 {
        // −j − x/2 + jx²/6 + x³/24
        Complex64::new(-x / 2.0 + x * x * x / 24.0, -1.0 + x * x / 6.0)
    } else {
        (Complex64::new(0.0, -x).exp() - 1.0) / x
    }
}

struct TriGeom {
    verts: [Vec3; 3],
    normal: Vec3,
    area: f64,
}

fn precompute_geometry(mesh: &TriMesh) -> Vec<TriGeom> {
    (0..mesh.num_triangles())
        .map(|t| {
            let verts = mesh.triangle_vertices(t);
            let normal = (verts[1] - verts[0]).cross(verts[2] - verts[0]).normalized();
            TriGeom { verts, normal, area: mesh.areas[t] }
        })
        .collect()
}

fn physical_nodes(geom: &TriGeom, rule: &RuleData, out: &mut [Vec3]) {
    for (slot, bary) in out.iter_mut().zip(rule.points) {
        *slot = geom.verts[0] * bary[0] + geom.verts[1] * bary[1] + geom.verts[2] * bary[2];
    }
}

const MAX_NODES: usize = 12;

/// Assemble the vacuum EFIE matrix at wavenumber `k`. Complex symmetric by
/// construction.
pub fn assemble_z0(
    mesh: &TriMesh,
    basis: &BasisSet,
    k: f64,
    quad: QuadSpec,
) -> Result<Mat<Complex64>, AssemblyError> {
    if !(k > 0.0) {
        return Err(AssemblyError::InvalidWavenumber(k));
    }
    let n = basis.len();
    let t = mesh.num_triangles();
    let geos = precompute_geometry(mesh);
    let far_rule = rule(quad.far);
    let near_rule = rule(quad.near);
    let near_thresh = 2.0 * mesh.mean_edge_length();
    let inv_4pi = 1.0 / (4.0 * std::f64::consts::PI);
    let jk_eta = Complex64::new(0.0, k * ETA0);
    let j_eta_over_k = Complex64::new(0.0, ETA0 / k);

    let mut z = Mat::<Complex64>::zeros(n, n);
    let mut test_nodes = [Vec3::ZERO; MAX_NODES];
    let mut src_nodes = [Vec3::ZERO; MAX_NODES];
    let mut s_int = [Complex64::new(0.0, 0.0); MAX_NODES];
    let mut m_int = [[Complex64::new(0.0, 0.0); 3]; MAX_NODES];
    let mut block = [[Complex64::new(0.0, 0.0); 3]; 3];

    for p in 0..t {
        if basis.tri_bases[p].is_empty() {
            continue;
        }
        for q in p..t {
            if basis.tri_bases[q].is_empty() {
                continue;
            }
            let near = mesh.centroids[p].dist(mesh.centroids[q]) < near_thresh;
            let trule = if near { near_rule } else { far_rule };
            let srule = if near { near_rule } else { far_rule };
            let (gp, gq) = (&geos[p], &geos[q]);
            let na = trule.points.len();
            let nb = srule.points.len();
            physical_nodes(gp, trule, &mut test_nodes[..na]);
            physical_nodes(gq, srule, &mut src_nodes[..nb]);

            // Inner integrals over the source triangle at each test node:
            // S = ∫ g dA', M = ∫ r' g dA'.
            for a in 0..na {
                let ra = test_nodes[a];
                let mut s_acc = Complex64::new(0.0, 0.0);
                let mut m_acc = [Complex64::new(0.0, 0.0); 3];
                if near {
                    for b in 0..nb {
                        let rb = src_nodes[b];
                        let w = srule.weights[b] * gq.area;
                        let g = k * expm1_over_x(k * ra.dist(rb)) * inv_4pi;
                        s_acc += g * w;
                        m_acc[0] += g * (w * rb.x);
                        m_acc[1] += g * (w * rb.y);
                        m_acc[2] += g * (w * rb.z);
                    }
                    let (inv_r, grad) = static_triangle_integrals(&gq.verts, gq.normal, ra);
                    let d = gq.normal.dot(ra - gq.verts[0]);
                    let rho_p = ra - gq.normal * d;
                    s_acc += Complex64::new(inv_4pi * inv_r, 0.0);
                    let lin = grad + rho_p * inv_r;
                    m_acc[0] += Complex64::new(inv_4pi * lin.x, 0.0);
                    m_acc[1] += Complex64::new(inv_4pi * lin.y, 0.0);
                    m_acc[2] += Complex64::new(inv_4pi * lin.z, 0.0);
                } else {
                    for b in 0..nb {
                        let rb = src_nodes[b];
                        let w = srule.weights[b] * gq.area;
                        let r_ab = ra.dist(rb);
                        let g = Complex64::new(0.0, -k * r_ab).exp() * (inv_4pi / r_ab);
                        s_acc += g * w;
                        m_acc[0] += g * (w * rb.x);
                        m_acc[1] += g * (w * rb.y);
                        m_acc[2] += g * (w * rb.z);
                    }
                }
                s_int[a] = s_acc;
                m_int[a] = m_acc;
            }

            // 3×3 interaction block between the bases of p and q.
            let bp = &basis.tri_bases[p];
            let bq = &basis.tri_bases[q];
            for (i, lbi) in bp.iter().enumerate() {
                let li = basis.functions[lbi.basis].length;
                let ci = lbi.sign * li / (2.0 * gp.area);
                let di = lbi.sign * li / gp.area;
                let pi = mesh.vertices[lbi.free_vertex];
                for (j, lbj) in bq.iter().enumerate() {
                    let lj = basis.functions[lbj.basis].length;
                    let cj = lbj.sign * lj / (2.0 * gq.area);
                    let dj = lbj.sign * lj / gq.area;
                    let pj = mesh.vertices[lbj.free_vertex];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..na {
                        let wa = trule.weights[a] * gp.area;
                        let s = s_int[a];
                        let m = m_int[a];
                        let fi = test_nodes[a] - pi;
                        // f_i(r_a) · ∫ f_j g dA'
                        let vec_dot = fi.x * (m[0] - s * pj.x)
                            + fi.y * (m[1] - s * pj.y)
                            + fi.z * (m[2] - s * pj.z);
                        acc += (jk_eta * (ci * cj) * vec_dot - j_eta_over_k * (di * dj) * s)
                            * wa;
                    }
                    block[i][j] = acc;
                }
            }

            if p == q {
                for (i, lbi) in bp.iter().enumerate() {
                    for (j, lbj) in bq.iter().enumerate() {
                        z[(lbi.basis, lbj.basis)] += 0.5 * (block[i][j] + block[j][i]);
                    }
                }
            } else {
                for (i, lbi) in bp.iter().enumerate() {
                    for (j, lbj) in bq.iter().enumerate() {
                        z[(lbi.basis, lbj.basis)] += block[i][j];
                        z[(lbj.basis, lbi.basis)] += block[i][j];
                    }
                }
            }
        }
    }

    for j in 0..n {
        for i in 0..n {
            let v = z[(i, j)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(AssemblyError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(z)
}

/// `∂X₀/∂ω` by central finite difference in k with relative step `h`:
/// `[X₀(k(1+h)) − X₀(k(1−h))] / (2hω)`. Exactly symmetric.
pub fn assemble_dx0_domega(
    mesh: &TriMesh,
    basis: &BasisSet,
    k: f64,
    quad: QuadSpec,
    h: f64,
) -> Result<Mat<f64>, AssemblyError> {
    let omega = k * C0;
    let zp = assemble_z0(mesh, basis, k * (1.0 + h), quad)?;
    let zm = assemble_z0(mesh, basis, k * (1.0 - h), quad)?;
    let n = basis.len();
    Ok(Mat::from_fn(n, n, |i, j| (zp[(i, j)].im - zm[(i, j)].im) / (2.0 * h * omega)))
}

/// Stored-energy matrices `Xe = (ω ∂X₀/∂ω − X₀)/2`, `Xm = (ω ∂X₀/∂ω + X₀)/2`
/// so that `W_{e/m} = Iᴴ X_{e/m} I / 4ω` and `Xm − Xe = X₀`.
pub fn stored_energy_matrices(
    x0: &Mat<f64>,
    dx0_domega: &Mat<f64>,
    omega: f64,
) -> (Mat<f64>, Mat<f64>) {
    let n = x0.nrows();
    let xe = Mat::from_fn(n, n, |i, j| 0.5 * (omega * dx0_domega[(i, j)] - x0[(i, j)]));
    let xm = Mat::from_fn(n, n, |i, j| 0.5 * (omega * dx0_domega[(i, j)] + x0[(i, j)]));
    (xe, xm)
}

/// All assembled operators at one frequency, plus the excitation.
pub struct OperatorSet {
    pub z0: Mat<Complex64>,
    pub r0: Mat<f64>,
    pub x0: Mat<f64>,
    pub dx0_domega: Mat<f64>,
    pub xe: Mat<f64>,
    pub xm: Mat<f64>,
    pub psi: Vec<TriangleBlock>,
    pub v: Col<Complex64>,
    pub k: f64,
    pub omega: f64,
    pub quad: QuadSpec,
}

impl OperatorSet {
    /// Assemble everything at wavenumber `k` (finite-difference step for
    /// ∂X₀/∂ω is `fd_step`, default 1e-3).
    pub fn assemble(
        mesh: &TriMesh,
        basis: &BasisSet,
        k: f64,
        quad: QuadSpec,
        feeds: &FeedSpec,
        fd_step: f64,
    ) -> Result<Self, AssemblyError> {
        let z0 = assemble_z0(mesh, basis, k, quad)?;
        let n = basis.len();
        let r0 = Mat::from_fn(n, n, |i, j| z0[(i, j)].re);
        let x0 = Mat::from_fn(n, n, |i, j| z0[(i, j)].im);
        let dx0_domega = assemble_dx0_domega(mesh, basis, k, quad, fd_step)?;
        let omega = k * C0;
        let (xe, xm) = stored_energy_matrices(&x0, &dx0_domega, omega);
        let psi = assemble_material_elements(mesh, basis);
        let v = delta_gap_excitation(basis, feeds)?;
        Ok(OperatorSet { z0, r0, x0, dx0_domega, xe, xm, psi, v, k, omega, quad })
    }

    pub fn n(&self) -> usize {
        self.z0.nrows()
    }

    /// Restriction to a subset of basis functions (for pure-binary PEC
    /// analysis). The material element matrices are not carried over.
    pub fn restricted(&self, keep: &[usize]) -> OperatorSet {
        let n = keep.len();
        let pick_c = |m: &Mat<Complex64>| Mat::from_fn(n, n, |i, j| m[(keep[i], keep[j])]);
        let pick_r = |m: &Mat<f64>| Mat::from_fn(n, n, |i, j| m[(keep[i], keep[j])]);
        OperatorSet {
            z0: pick_c(&self.z0),
            r0: pick_r(&self.r0),
            x0: pick_r(&self.x0),
            dx0_domega: pick_r(&self.dx0_domega),
            xe: pick_r(&self.xe),
            xm: pick_r(&self.xm),
            psi: Vec::new(),
            v: Col::from_fn(n, |i| self.v[keep[i]]),
            k: self.k,
            omega: self.omega,
            quad: self.quad,
        }
    }
}

/// Evaluate the RWG expansion `J = Σ I_n f_n` at every triangle centroid;
/// returns the complex surface-current vector per triangle.
pub fn surface_current_at_centroids(
    mesh: &TriMesh,
    basis: &BasisSet,
    coeffs: &Col<Complex64>,
) -> Vec<[Complex64; 3]> {
    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; mesh.num_triangles()];
    for t in 0..mesh.num_triangles() {
        let c = mesh.centroids[t];
        for lb in &basis.tri_bases[t] {
            let f = &basis.functions[lb.basis];
            let val = c - mesh.vertices[lb.free_vertex];
            let scale = lb.sign * f.length / (2.0 * mesh.areas[t]);
            let i_n = coeffs[lb.basis];
            out[t][0] += i_n * (scale * val.x);
            out[t][1] += i_n * (scale * val.y);
            out[t][2] += i_n * (scale * val.z);
        }
    }
    out
}

/// Magnitude of a complex surface-current sample.
pub fn current_magnitude(j: &[Complex64; 3]) -> f64 {
    (j[0].norm_sqr() + j[1].norm_sqr() + j[2].norm_sqr()).sqrt()
}
