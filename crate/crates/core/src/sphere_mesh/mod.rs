//! Triangulated unit sphere: the measure space every other module works on.
//!
//! The mesh carries a lumped measure (one third of each adjacent spherical
//! triangle per vertex), cotangent edge weights for the surface Laplacian
//! and length-valued edge weights for graph total variation.

mod cap;
mod icosphere;
mod stereo;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub use cap::{cap_area, cap_colatitude, cap_perimeter, SPHERE_AREA};
pub(crate) use cap::cap_perimeter_unchecked;
pub use icosphere::{build_icosphere, MAX_SUBDIVISIONS};
pub use stereo::{
    conformal_factor, conformal_transport, conformal_transport_fn, stereographic_forward,
    stereographic_inverse, PlaneFunction, PlanePoint,
};

pub type SpherePoint = Vector3<f64>;

#[derive(Clone, Debug)]
pub struct SphereMesh {
    vertices: Vec<SpherePoint>,
    triangles: Vec<[usize; 3]>,
    vertex_area: Vec<f64>,
    triangle_area: Vec<f64>,
    edges: Vec<[usize; 2]>,
    cot_weight: Vec<f64>,
    tv_edges: Vec<[usize; 2]>,
    edge_weight: Vec<f64>,
    colatitude: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
    polar_order: Vec<usize>,
    subdivisions: u32,
}

impl SphereMesh {
    pub(crate) fn from_triangulation(
        vertices: Vec<SpherePoint>,
        triangles: Vec<[usize; 3]>,
        subdivisions: u32,
    ) -> Self {
        let nv = vertices.len();
        let mut vertex_area = vec![0.0; nv];
        let mut triangle_area = Vec::with_capacity(triangles.len());
        let mut vertex_triangles = vec![Vec::new(); nv];
        // (i, j) with i < j -> accumulated half-cotangents
        let mut edge_cot: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        // (i, j) -> apexes of the triangles sharing the edge
        let mut apexes: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();

        for (t, &[a, b, c]) in triangles.iter().enumerate() {
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let excess = spherical_excess(&pa, &pb, &pc);
            for v in [a, b, c] {
                vertex_area[v] += excess / 3.0;
                vertex_triangles[v].push(t);
            }
            triangle_area.push(0.5 * (pb - pa).cross(&(pc - pa)).norm());
            for (k, i, j) in [(a, b, c), (b, c, a), (c, a, b)] {
                let (u, w) = (vertices[i] - vertices[k], vertices[j] - vertices[k]);
                let cot = u.dot(&w) / u.cross(&w).norm();
                *edge_cot.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
                apexes.entry((i.min(j), i.max(j))).or_default().push(k);
            }
        }

        let mut edges = Vec::with_capacity(edge_cot.len());
        let mut cot_weight = Vec::with_capacity(edge_cot.len());
        let mut neighbors = vec![Vec::new(); nv];
        // Crofton weights on the six-direction stencil (edges plus flip
        // diagonals) so that Σ w |u_i − u_j| ≈ ∫ |∇u| for every gradient
        // direction to within about 2%.
        let mut tv: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for ((i, j), w) in edge_cot {
            let primal = (vertices[i] - vertices[j]).norm();
            let dual = w * primal;
            edges.push([i, j]);
            cot_weight.push(w);
            neighbors[i].push(j);
            neighbors[j].push(i);
            *tv.entry((i, j)).or_insert(0.0) += PI / 8.0 * dual;
            if let [c, d] = apexes[&(i, j)][..] {
                let diag = (vertices[c] - vertices[d]).norm();
                *tv.entry((c.min(d), c.max(d))).or_insert(0.0) += PI / 8.0 * dual * primal / diag;
            }
        }
        let (tv_edges, edge_weight): (Vec<[usize; 2]>, Vec<f64>) =
            tv.into_iter().map(|((i, j), w)| ([i, j], w.max(0.0))).unzip();
        let colatitude: Vec<f64> = vertices.iter().map(|p| p.z.clamp(-1.0, 1.0).acos()).collect();
        let mut polar_order: Vec<usize> = (0..nv).collect();
        polar_order.sort_by(|&a, &b| colatitude[a].total_cmp(&colatitude[b]).then(a.cmp(&b)));

        Self {
            vertices,
            triangles,
            vertex_area,
            triangle_area,
            edges,
            cot_weight,
            tv_edges,
            edge_weight,
            colatitude,
            neighbors,
            vertex_triangles,
            polar_order,
            subdivisions,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Lumped vertex measure (steradians); sums to 4π.
    pub fn vertex_area(&self) -> &[f64] {
        &self.vertex_area
    }

    /// Flat (chordal) triangle areas used by the piecewise-linear calculus.
    pub fn triangle_area(&self) -> &[f64] {
        &self.triangle_area
    }

    /// Unique triangulation edges `[i, j]` with `i < j`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Pairs of the total-variation graph: triangulation edges together
    /// with the diagonals across each edge, `[i, j]` with `i < j`.
    pub fn tv_edges(&self) -> &[[usize; 2]] {
        &self.tv_edges
    }

    /// Length-valued weight per [`tv_edges`](Self::tv_edges) pair.
    pub fn edge_weight(&self) -> &[f64] {
        &self.edge_weight
    }

    /// Cotangent weight per edge (dual length over primal length).
    pub fn cot_weight(&self) -> &[f64] {
        &self.cot_weight
    }

    pub fn colatitude(&self) -> &[f64] {
        &self.colatitude
    }

    /// Vertices sorted by colatitude, ties broken by index.
    pub fn polar_order(&self) -> &[usize] {
        &self.polar_order
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn subdivisions(&self) -> u32 {
        self.subdivisions
    }

    pub fn total_area(&self) -> f64 {
        self.vertex_area.iter().sum()
    }

    pub fn max_vertex_area(&self) -> f64 {
        self.vertex_area.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_vertex_area(&self) -> f64 {
        self.total_area() / self.vertex_count() as f64
    }

    /// Index of the vertex at the north pole.
    pub fn north_pole(&self) -> usize {
        0
    }

    /// Weak-form surface Laplacian: `uᵀ K u = Σ_e w_e (u_i − u_j)²`.
    pub fn stiffness(&self) -> CsrMatrix {
        self.assemble_laplacian(self.edges.iter().zip(&self.cot_weight).map(|(e, w)| (*e, *w)))
    }

    /// Stiffness with a per-triangle diffusivity `kappa`.
    pub fn weighted_stiffness(&self, kappa: &[f64]) -> CsrMatrix {
        let mut acc: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for (k, i, j) in [(a, b, c), (b, c, a), (c, a, b)] {
                let (u, w) = (self.vertices[i] - self.vertices[k], self.vertices[j] - self.vertices[k]);
                let cot = u.dot(&w) / u.cross(&w).norm();
                *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot * kappa[t];
            }
        }
        self.assemble_laplacian(acc.into_iter().map(|((i, j), w)| ([i, j], w)))
    }

    fn assemble_laplacian(&self, edges: impl Iterator<Item = ([usize; 2], f64)>) -> CsrMatrix {
        let n = self.vertex_count();
        let mut trip = Vec::with_capacity(7 * n);
        for ([i, j], w) in edges {
            trip.push((i, j, -w));
            trip.push((j, i, -w));
            trip.push((i, i, w));
            trip.push((j, j, w));
        }
        CsrMatrix::from_triplets(n, trip)
    }

    /// Gradient of the linear interpolant on each flat triangle.
    pub fn triangle_gradients(&self, values: &[f64]) -> Vec<Vector3<f64>> {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let n = (pb - pa).cross(&(pc - pa));
                let twice_area_sq = n.norm_squared();
                // ∇u = Σ_k u_k (n × e_k) / |n|², e_k the edge opposite k
                (n.cross(&(pc - pb)) * values[a]
                    + n.cross(&(pa - pc)) * values[b]
                    + n.cross(&(pb - pa)) * values[c])
                    / twice_area_sq
            })
            .collect()
    }

    /// Gradients of the three hat functions on each flat triangle, in the
    /// triangle's vertex order.
    pub fn hat_gradients(&self) -> Vec<[Vector3<f64>; 3]> {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
                let n = (pb - pa).cross(&(pc - pa));
                let s = 1.0 / n.norm_squared();
                [n.cross(&(pc - pb)) * s, n.cross(&(pa - pc)) * s, n.cross(&(pb - pa)) * s]
            })
            .collect()
    }

    /// Vertex nearest to `p`, by greedy descent over the vertex graph.
    pub fn nearest_vertex(&self, p: &SpherePoint, start: usize) -> usize {
        let mut best = start.min(self.vertex_count() - 1);
        let mut best_d = (self.vertices[best] - p).norm_squared();
        loop {
            let mut improved = false;
            for &q in &self.neighbors[best] {
                let d = (self.vertices[q] - p).norm_squared();
                if d < best_d {
                    best = q;
                    best_d = d;
                    improved = true;
                }
            }
            if !improved {
                return best;
            }
        }
    }

    /// Triangle hit by the ray from the origin through `p`, with barycentric
    /// coordinates of the hit point.
    pub fn locate(&self, p: &SpherePoint, hint: usize) -> (usize, [f64; 3]) {
        let v = self.nearest_vertex(p, hint);
        let mut candidates: Vec<usize> = self.vertex_triangles[v].clone();
        for &q in &self.neighbors[v] {
            candidates.extend_from_slice(&self.vertex_triangles[q]);
        }
        let mut best = (candidates[0], [0.0; 3], f64::NEG_INFINITY);
        for t in candidates.into_iter().chain(0..self.triangles.len()) {
            let bary = self.ray_barycentric(t, p);
            let worst = bary[0].min(bary[1]).min(bary[2]);
            if worst >= -1e-12 {
                return (t, bary);
            }
            if worst > best.2 {
                best = (t, bary, worst);
            }
        }
        (best.0, best.1)
    }

    fn ray_barycentric(&self, t: usize, p: &SpherePoint) -> [f64; 3] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let la = p.dot(&pb.cross(&pc));
        let lb = p.dot(&pc.cross(&pa));
        let lc = p.dot(&pa.cross(&pb));
        let s = la + lb + lc;
        if s <= 0.0 {
            return [f64::NEG_INFINITY; 3];
        }
        [la / s, lb / s, lc / s]
    }

    /// Piecewise-linear interpolation of vertex values at a sphere point.
    pub fn interpolate(&self, values: &[f64], p: &SpherePoint, hint: usize) -> (f64, usize) {
        let (t, bary) = self.locate(p, hint);
        let [a, b, c] = self.triangles[t];
        (
            bary[0] * values[a] + bary[1] * values[b] + bary[2] * values[c],
            a,
        )
    }

    /// Vertex table: `index,x,y,z,area,colatitude`.
    pub fn write_vertex_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,x,y,z,area,colatitude")?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{},{}",
                p.x, p.y, p.z, self.vertex_area[i], self.colatitude[i]
            )?;
        }
        Ok(())
    }

    /// Edge table: `i,j,weight`.
    pub fn write_edge_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,weight")?;
        for (e, wt) in self.tv_edges.iter().zip(&self.edge_weight) {
            writeln!(w, "{},{},{}", e[0], e[1], wt)?;
        }
        Ok(())
    }
}

/// Area of the spherical triangle with unit-vector corners.
fn spherical_excess(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Real values attached to the vertices of a mesh.
#[derive(Clone, Debug)]
pub struct SphereFunction<'m> {
    mesh: &'m SphereMesh,
    values: Vec<f64>,
}

impl<'m> SphereFunction<'m> {
    pub fn new(mesh: &'m SphereMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(Error::Precondition(format!(
                "{} values for {} vertices",
                values.len(),
                mesh.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!("non-finite value at vertex {i}")));
        }
        Ok(Self { mesh, values })
    }

    pub(crate) fn from_values_unchecked(mesh: &'m SphereMesh, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.vertex_count());
        Self { mesh, values }
    }

    pub fn from_fn<F: FnMut(&SpherePoint) -> f64>(mesh: &'m SphereMesh, f: F) -> Result<Self> {
        Self::new(mesh, mesh.vertices.iter().map(f).collect())
    }

    pub fn constant(mesh: &'m SphereMesh, c: f64) -> Self {
        Self::from_values_unchecked(mesh, vec![c; mesh.vertex_count()])
    }

    pub fn zero(mesh: &'m SphereMesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    pub fn mesh(&self) -> &'m SphereMesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_values_unchecked(self.mesh, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination with another function on the same mesh.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert!(std::ptr::eq(self.mesh, other.mesh), "functions live on different meshes");
        Self::from_values_unchecked(
            self.mesh,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// `∫ u dV` under the lumped measure.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.mesh.vertex_area).map(|(v, a)| v * a).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.mesh.total_area()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.mesh.vertex_area)
            .map(|(v, a)| a * v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().zip(&self.mesh.vertex_area).map(|(v, a)| a * v.abs()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The representative with zero mean under the lumped measure.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

/// A set of vertices; its measure is the summed lumped area.
#[derive(Clone, Debug)]
pub struct CellSet<'m> {
    mesh: &'m SphereMesh,
    members: Vec<bool>,
}

impl<'m> CellSet<'m> {
    pub fn new(mesh: &'m SphereMesh, members: Vec<bool>) -> Result<Self> {
        if members.len() != mesh.vertex_count() {
            return Err(Error::Precondition(format!(
                "{} memberships for {} vertices",
                members.len(),
                mesh.vertex_count()
            )));
        }
        Ok(Self { mesh, members })
    }

    pub fn from_predicate<F: FnMut(usize) -> bool>(mesh: &'m SphereMesh, f: F) -> Self {
        Self {
            mesh,
            members: (0..mesh.vertex_count()).map(f).collect(),
        }
    }

    pub fn empty(mesh: &'m SphereMesh) -> Self {
        Self::from_predicate(mesh, |_| false)
    }

    pub fn full(mesh: &'m SphereMesh) -> Self {
        Self::from_predicate(mesh, |_| true)
    }

    /// Vertices with colatitude at most `theta`.
    pub fn polar_cap(mesh: &'m SphereMesh, theta: f64) -> Self {
        Self::from_predicate(mesh, |i| mesh.colatitude[i] <= theta)
    }

    pub fn mesh(&self) -> &'m SphereMesh {
        self.mesh
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn area(&self) -> f64 {
        self.members
            .iter()
            .zip(&self.mesh.vertex_area)
            .filter(|(m, _)| **m)
            .map(|(_, a)| a)
            .sum()
    }

    pub fn complement(&self) -> Self {
        Self {
            mesh: self.mesh,
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    pub fn indicator(&self) -> SphereFunction<'m> {
        SphereFunction::from_values_unchecked(
            self.mesh,
            self.members.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
        )
    }
}
