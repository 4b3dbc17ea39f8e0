//! Triangulated design domains and RWG connectivity.
//!
//! Two canonical generators are provided: a structured rectangular plate in
//! which every grid cell is split into four triangles by its center point,
//! and a geodesic sphere obtained by icosahedron subdivision. Meshes are
//! immutable after construction.

use std::collections::HashMap;

use thiserror::Error;

use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("triangle {tri} is degenerate (area {area:.3e})")]
    DegenerateTriangle { tri: usize, area: f64 },
    #[error("triangle {tri} references vertex {vertex} out of range {nv}")]
    VertexOutOfRange { tri: usize, vertex: usize, nv: usize },
    #[error("edge ({v0}, {v1}) is non-manifold: shared by {count} triangles")]
    NonManifoldEdge { v0: usize, v1: usize, count: usize },
    #[error("edge ({v0}, {v1}) belongs to no triangle")]
    DanglingEdge { v0: usize, v1: usize },
}

/// An undirected mesh edge with its adjacent triangles (one for boundary
/// edges, two for inner edges). `vertices` is sorted ascending, as is `tris`.
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub tris: Vec<usize>,
}

impl Edge {
    pub fn is_inner(&self) -> bool {
        self.tris.len() == 2
    }
}

/// Triangulated surface with precomputed areas, centroids, edge adjacency and
/// the circumscribing-sphere radius `a` (max vertex distance from the vertex
/// centroid; the plate half-diagonal or the sphere radius for the canonical
/// generators).
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub areas: Vec<f64>,
    pub centroids: Vec<Vec3>,
    pub edges: Vec<Edge>,
    pub a: f64,
}

impl TriMesh {
    /// Build a mesh from raw vertex and triangle lists, computing all derived
    /// data and validating the structural invariants.
    pub fn from_parts(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(MeshError::InvalidParameter("empty vertex or triangle list".into()));
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { tri: t, vertex: v, nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateTriangle { tri: t, area: 0.0 });
            }
        }

        let mut center = Vec3::ZERO;
        for v in &vertices {
            center += *v;
        }
        center = center * (1.0 / nv as f64);
        let a = vertices.iter().map(|v| v.dist(center)).fold(0.0, f64::max);

        let mut areas = Vec::with_capacity(triangles.len());
        let mut centroids = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let [i, j, k] = *tri;
            let (p, q, r) = (vertices[i], vertices[j], vertices[k]);
            let area = 0.5 * (q - p).cross(r - p).norm();
            if area <= 1e-12 * a * a {
                return Err(MeshError::DegenerateTriangle { tri: t, area });
            }
            areas.push(area);
            centroids.push((p + q + r) * (1.0 / 3.0));
        }

        // Edge extraction: map sorted vertex pair -> adjacent triangles.
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                let key = (u.min(v), u.max(v));
                edge_map.entry(key).or_default().push(t);
            }
        }
        let mut keys: Vec<(usize, usize)> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        let mut edges = Vec::with_capacity(keys.len());
        for key in keys {
            let mut tris = edge_map.remove(&key).unwrap();
            tris.sort_unstable();
            if tris.len() > 2 {
                return Err(MeshError::NonManifoldEdge { v0: key.0, v1: key.1, count: tris.len() });
            }
            edges.push(Edge { vertices: [key.0, key.1], tris });
        }

        Ok(TriMesh { vertices, triangles, areas, centroids, edges, a })
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_inner()).count()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let e = &self.edges[edge];
        self.vertices[e.vertices[0]].dist(self.vertices[e.vertices[1]])
    }

    pub fn mean_edge_length(&self) -> f64 {
        let s: f64 = (0..self.edges.len()).map(|e| self.edge_length(e)).sum();
        s / self.edges.len() as f64
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    /// Extract the submesh of triangles flagged in `keep`, compacting the
    /// vertex list. Returns the new mesh and the map from old triangle index
    /// to new (None for dropped triangles).
    pub fn submesh(&self, keep: &[bool]) -> Result<(TriMesh, Vec<Option<usize>>), MeshError> {
        assert_eq!(keep.len(), self.triangles.len(), "keep mask length mismatch");
        let mut vmap: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut tri_map = vec![None; self.triangles.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if !keep[t] {
                continue;
            }
            let mut new_tri = [0usize; 3];
            for (slot, &v) in new_tri.iter_mut().zip(tri) {
                let idx = *vmap.entry(v).or_insert_with(|| {
                    vertices.push(self.vertices[v]);
                    vertices.len() - 1
                });
                *slot = idx;
            }
            tri_map[t] = Some(triangles.len());
            triangles.push(new_tri);
        }
        Ok((TriMesh::from_parts(vertices, triangles)?, tri_map))
    }

    /// FNV-1a hash of the raw geometry, used to key the operator cache.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100_0000_01b3);
            }
        };
        for v in &self.vertices {
            eat(&v.x.to_le_bytes());
            eat(&v.y.to_le_bytes());
            eat(&v.z.to_le_bytes());
        }
        for t in &self.triangles {
            for &i in t {
                eat(&(i as u64).to_le_bytes());
            }
        }
        h
    }
}

/// Structured rectangular plate of dimensions `l × aspect·l` in the z = 0
/// plane, `nx × ny` cells, each cell split into 4 triangles by its center
/// point, giving `T = 4·nx·ny`.
pub fn generate_plate(l: f64, aspect: f64, nx: usize, ny: usize) -> Result<TriMesh, MeshError> {
    if !(l > 0.0) || !(aspect > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "plate dimensions must be positive (L = {l}, aspect = {aspect})"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidParameter(format!(
            "cell counts must be at least 1 (nx = {nx}, ny = {ny})"
        )));
    }
    let w = l * aspect;
    let dx = l / nx as f64;
    let dy = w / ny as f64;

    let grid = |i: usize, j: usize| -> usize { j * (nx + 1) + i };
    let n_grid = (nx + 1) * (ny + 1);
    let mut vertices = Vec::with_capacity(n_grid + nx * ny);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Vec3::new(i as f64 * dx, j as f64 * dy, 0.0));
        }
    }
    let mut triangles = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let c = vertices.len();
            vertices.push(Vec3::new((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy, 0.0));
            let v00 = grid(i, j);
            let v10 = grid(i + 1, j);
            let v01 = grid(i, j + 1);
            let v11 = grid(i + 1, j + 1);
            triangles.push([v00, v10, c]);
            triangles.push([v10, v11, c]);
            triangles.push([v11, v01, c]);
            triangles.push([v01, v00, c]);
        }
    }
    TriMesh::from_parts(vertices, triangles)
}

/// Geodesic sphere of radius `r`: icosahedron subdivided `subdivisions` times
/// with every vertex projected onto the sphere. `T = 20·4^s`, closed surface.
pub fn generate_sphere(subdivisions: usize, r: f64) -> Result<TriMesh, MeshError> {
    if !(r > 0.0) {
        return Err(MeshError::InvalidParameter(format!("sphere radius must be positive ({r})")));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        Vec3::new(-1.0, phi, 0.0),
        Vec3::new(1.0, phi, 0.0),
        Vec3::new(-1.0, -phi, 0.0),
        Vec3::new(1.0, -phi, 0.0),
        Vec3::new(0.0, -1.0, phi),
        Vec3::new(0.0, 1.0, phi),
        Vec3::new(0.0, -1.0, -phi),
        Vec3::new(0.0, 1.0, -phi),
        Vec3::new(phi, 0.0, -1.0),
        Vec3::new(phi, 0.0, 1.0),
        Vec3::new(-phi, 0.0, -1.0),
        Vec3::new(-phi, 0.0, 1.0),
    ];
    for v in &mut vertices {
        *v = v.normalized() * r;
    }
    // Outward-oriented icosahedron faces.
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |i: usize, j: usize, verts: &mut Vec<Vec3>| -> usize {
                let key = (i.min(j), i.max(j));
                *midpoints.entry(key).or_insert_with(|| {
                    let m = ((verts[i] + verts[j]) * 0.5).normalized() * r;
                    verts.push(m);
                    verts.len() - 1
                })
            };
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    TriMesh::from_parts(vertices, faces)
}

/// One RWG basis function: defined on the inner edge `edge`, spanning the
/// `plus_tri`/`minus_tri` pair (plus = lower triangle index), with edge
/// length `length` and the free (opposite) vertex on each side.
#[derive(Clone, Debug)]
pub struct RwgFunction {
    pub edge: usize,
    pub plus_tri: usize,
    pub minus_tri: usize,
    pub length: f64,
    pub free_plus: usize,
    pub free_minus: usize,
}

/// Restriction of a basis function to one of its two triangles.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    pub basis: usize,
    /// +1 on the plus triangle, −1 on the minus triangle.
    pub sign: f64,
    /// Free vertex index for this restriction.
    pub free_vertex: usize,
}

/// The RWG basis over all inner edges of a mesh, ordered by edge index.
#[derive(Clone, Debug)]
pub struct BasisSet {
    pub functions: Vec<RwgFunction>,
    /// Map from mesh edge index to basis index (None for boundary edges).
    pub edge_to_basis: Vec<Option<usize>>,
    /// Per-triangle list of overlapping basis restrictions (at most 3).
    pub tri_bases: Vec<Vec<LocalBasis>>,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// Build the RWG basis: one function per inner edge, deterministic ordering
/// by edge index, plus triangle = lower triangle index.
pub fn build_rwg(mesh: &TriMesh) -> Result<BasisSet, MeshError> {
    let mut functions = Vec::new();
    let mut edge_to_basis = vec![None; mesh.edges.len()];
    for (e, edge) in mesh.edges.iter().enumerate() {
        match edge.tris.len() {
            1 => continue,
            2 => {}
            n => {
                return Err(MeshError::NonManifoldEdge {
                    v0: edge.vertices[0],
                    v1: edge.vertices[1],
                    count: n,
                })
            }
        }
        let (tp, tm) = (edge.tris[0], edge.tris[1]);
        let free = |t: usize| {
            mesh.triangles[t]
                .iter()
                .copied()
                .find(|v| *v != edge.vertices[0] && *v != edge.vertices[1])
                .expect("triangle must have a vertex off the edge")
        };
        edge_to_basis[e] = Some(functions.len());
        functions.push(RwgFunction {
            edge: e,
            plus_tri: tp,
            minus_tri: tm,
            length: mesh.edge_length(e),
            free_plus: free(tp),
            free_minus: free(tm),
        });
    }

    let mut tri_bases = vec![Vec::new(); mesh.triangles.len()];
    for (n, f) in functions.iter().enumerate() {
        tri_bases[f.plus_tri].push(LocalBasis { basis: n, sign: 1.0, free_vertex: f.free_plus });
        tri_bases[f.minus_tri].push(LocalBasis { basis: n, sign: -1.0, free_vertex: f.free_minus });
    }

    Ok(BasisSet { functions, edge_to_basis, tri_bases })
}

/// Filter neighborhoods `B_t = { j : ‖r_t − r_j‖ ≤ Rmin }` from centroid
/// distances; every triangle contains itself. Indices are ascending.
pub fn neighborhoods(mesh: &TriMesh, rmin: f64) -> Vec<Vec<usize>> {
    let t = mesh.num_triangles();
    let mut out = Vec::with_capacity(t);
    for i in 0..t {
        let mut b = Vec::new();
        for j in 0..t {
            if mesh.centroids[i].dist(mesh.centroids[j]) <= rmin {
                b.push(j);
            }
        }
        out.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn plate_matches_published_counts() {
        let mesh = generate_plate(1.0, 0.6, 40, 24).unwrap();
        assert_eq!(mesh.num_triangles(), 3840);
        let basis = build_rwg(&mesh).unwrap();
        assert_eq!(basis.len(), 5696);
        assert_eq!(mesh.boundary_edge_count(), 2 * (40 + 24));
    }

    #[test]
    fn single_cell_plate_counts() {
        let mesh = generate_plate(1.0, 1.0, 1, 1).unwrap();
        assert_eq!(mesh.num_triangles(), 4);
        assert_eq!(mesh.boundary_edge_count(), 4);
        assert_eq!(build_rwg(&mesh).unwrap().len(), 4);
    }

    #[test]
    fn plate_10x6_edge_counts_against_brute_force() {
        let mesh = generate_plate(2.0, 0.6, 10, 6).unwrap();
        assert_eq!(mesh.num_triangles(), 240);
        // Independent edge count by hashing all triangle edges.
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &mesh.triangles {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                *seen.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        let boundary = seen.values().filter(|&&c| c == 1).count();
        let inner = seen.values().filter(|&&c| c == 2).count();
        assert_eq!(boundary, 32);
        assert_eq!(inner, 344);
        assert_eq!(build_rwg(&mesh).unwrap().len(), 344);
        assert_eq!(mesh.boundary_edge_count(), boundary);
    }

    #[test]
    fn plate_rejects_bad_parameters() {
        assert!(generate_plate(0.0, 0.5, 4, 4).is_err());
        assert!(generate_plate(1.0, -1.0, 4, 4).is_err());
        assert!(generate_plate(1.0, 0.5, 0, 4).is_err());
    }

    #[test]
    fn plate_area_matches_analytic() {
        let mesh = generate_plate(1.3, 0.6, 7, 5).unwrap();
        let exact = 1.3 * 1.3 * 0.6;
        assert!((mesh.total_area() - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn plate_radius_is_half_diagonal() {
        let mesh = generate_plate(2.0, 0.5, 4, 4).unwrap();
        let expect = (2.0f64 * 2.0 + 1.0).sqrt() / 2.0;
        assert!((mesh.a - expect).abs() < 1e-12);
    }

    #[test]
    fn sphere_counts_follow_subdivision() {
        for s in 0..=3usize {
            let mesh = generate_sphere(s, 1.0).unwrap();
            let t = 20 * 4usize.pow(s as u32);
            assert_eq!(mesh.num_triangles(), t);
            assert_eq!(mesh.boundary_edge_count(), 0);
            let basis = build_rwg(&mesh).unwrap();
            assert_eq!(basis.len(), 3 * t / 2, "N = 3T/2 on closed surface");
            // Euler characteristic V − E + T = 2.
            let v = mesh.vertices.len() as i64;
            let e = mesh.edges.len() as i64;
            assert_eq!(v - e + t as i64, 2);
        }
        assert_eq!(generate_sphere(2, 1.0).unwrap().num_triangles(), 320);
        assert_eq!(build_rwg(&generate_sphere(2, 1.0).unwrap()).unwrap().len(), 480);
    }

    #[test]
    fn sphere_subdiv3_counts_by_explicit_enumeration() {
        let mesh = generate_sphere(3, 0.7).unwrap();
        assert_eq!(mesh.num_triangles(), 1280);
        let mut uniq: HashSet<(usize, usize)> = HashSet::new();
        for tri in &mesh.triangles {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                uniq.insert((u.min(v), u.max(v)));
            }
        }
        assert_eq!(uniq.len(), 1920); // E = 3T/2, all inner
        assert_eq!(build_rwg(&mesh).unwrap().len(), 1920);
    }

    #[test]
    fn sphere_area_converges_from_below() {
        let exact = 4.0 * std::f64::consts::PI;
        let mut last = 0.0;
        for s in 0..=3 {
            let area = generate_sphere(s, 1.0).unwrap().total_area();
            assert!(area < exact, "inscribed polyhedron area exceeds sphere");
            assert!(area > last, "area must grow with subdivision");
            last = area;
        }
        assert!((last - exact).abs() / exact < 0.01);
    }

    #[test]
    fn sphere_radius_and_normals_point_outward() {
        let mesh = generate_sphere(2, 2.5).unwrap();
        assert!((mesh.a - 2.5).abs() < 1e-12);
        for t in 0..mesh.num_triangles() {
            let [p, q, r] = mesh.triangle_vertices(t);
            let n = (q - p).cross(r - p);
            assert!(n.dot(mesh.centroids[t]) > 0.0, "face {t} is inward-oriented");
        }
    }

    #[test]
    fn rwg_single_pair() {
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        let mesh = TriMesh::from_parts(verts, vec![[0, 1, 2], [1, 3, 2]]).unwrap();
        let basis = build_rwg(&mesh).unwrap();
        assert_eq!(basis.len(), 1);
        let f = &basis.functions[0];
        assert_eq!(f.plus_tri, 0);
        assert_eq!(f.minus_tri, 1);
        assert_eq!(f.free_plus, 0);
        assert_eq!(f.free_minus, 3);
        assert!((f.length - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let verts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.5, 0.5, 1.0),
        ];
        let tris = vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        match TriMesh::from_parts(verts, tris) {
            Err(MeshError::NonManifoldEdge { count: 3, .. }) => {}
            other => panic!("expected non-manifold error, got {other:?}"),
        }
    }

    #[test]
    fn neighborhoods_trivial_radii() {
        let mesh = generate_plate(1.0, 0.5, 3, 2).unwrap();
        let t = mesh.num_triangles();
        for (i, b) in neighborhoods(&mesh, 0.0).iter().enumerate() {
            assert_eq!(b, &vec![i]);
        }
        for b in neighborhoods(&mesh, 10.0 * mesh.a) {
            assert_eq!(b.len(), t);
        }
    }

    #[test]
    fn neighborhoods_match_quadratic_scan_on_large_plate() {
        let mesh = generate_plate(1.0, 0.6, 40, 24).unwrap();
        let rmin = 0.15 * mesh.a;
        let fast = neighborhoods(&mesh, rmin);
        // Brute-force O(T²) oracle with independent arithmetic.
        for t in (0..mesh.num_triangles()).step_by(173) {
            let mut expect = Vec::new();
            for j in 0..mesh.num_triangles() {
                let d = mesh.centroids[t] - mesh.centroids[j];
                if (d.x * d.x + d.y * d.y + d.z * d.z).sqrt() <= rmin {
                    expect.push(j);
                }
            }
            assert_eq!(fast[t], expect);
        }
    }

    #[test]
    fn neighborhoods_are_symmetric() {
        let mesh = generate_plate(1.0, 0.6, 8, 5).unwrap();
        let b = neighborhoods(&mesh, 0.22 * mesh.a);
        for (t, bt) in b.iter().enumerate() {
            for &j in bt {
                assert!(b[j].contains(&t), "symmetry violated for ({t}, {j})");
            }
        }
    }

    #[test]
    fn submesh_compacts_and_preserves_geometry() {
        let mesh = generate_plate(1.0, 0.5, 4, 2).unwrap();
        let keep: Vec<bool> = (0..mesh.num_triangles()).map(|t| t % 3 != 0).collect();
        let (sub, map) = mesh.submesh(&keep).unwrap();
        let kept = keep.iter().filter(|&&k| k).count();
        assert_eq!(sub.num_triangles(), kept);
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                assert!((sub.areas[*n] - mesh.areas[old]).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn edge_count_identity_holds(nx in 1usize..7, ny in 1usize..7) {
            let mesh = generate_plate(1.0, 0.7, nx, ny).unwrap();
            let t = mesh.num_triangles();
            let b = mesh.boundary_edge_count();
            let n = build_rwg(&mesh).unwrap().len();
            prop_assert_eq!(2 * n, 3 * t - b);
        }
    }
}
