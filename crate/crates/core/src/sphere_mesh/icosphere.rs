use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

use super::SphereMesh;

/// Deepest subdivision accepted by [`build_icosphere`] (655 362 vertices).
pub const MAX_SUBDIVISIONS: u32 = 8;

/// Builds the icosahedron with a vertex at each pole, subdivides every
/// triangle into four `subdivisions` times and projects to the unit sphere.
pub fn build_icosphere(subdivisions: u32) -> Result<SphereMesh> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(Error::Resource(format!(
            "icosphere subdivision depth {subdivisions} exceeds guard {MAX_SUBDIVISIONS}"
        )));
    }
    let (mut vertices, mut triangles) = icosahedron();
    for _ in 0..subdivisions {
        let (v, t) = subdivide(&vertices, &triangles);
        vertices = v;
        triangles = t;
    }
    Ok(SphereMesh::from_triangulation(vertices, triangles, subdivisions))
}

fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    use std::f64::consts::PI;
    let h = 1.0 / 5f64.sqrt();
    let r = 2.0 * h;
    let mut v = vec![Vector3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        v.push(Vector3::new(r * a.cos(), r * a.sin(), h));
    }
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0 + PI / 5.0;
        v.push(Vector3::new(r * a.cos(), r * a.sin(), -h));
    }
    v.push(Vector3::new(0.0, 0.0, -1.0));
    for p in v.iter_mut() {
        *p = p.normalize();
    }

    let up = |k: usize| 1 + k % 5;
    let lo = |k: usize| 6 + k % 5;
    let mut t = Vec::with_capacity(20);
    for k in 0..5 {
        t.push([0, up(k), up(k + 1)]);
        t.push([up(k), lo(k), up(k + 1)]);
        t.push([up(k + 1), lo(k), lo(k + 1)]);
        t.push([lo(k), 11, lo(k + 1)]);
    }
    for tri in t.iter_mut() {
        orient_outward(&v, tri);
    }
    (v, t)
}

fn orient_outward(v: &[Vector3<f64>], tri: &mut [usize; 3]) {
    let (a, b, c) = (v[tri[0]], v[tri[1]], v[tri[2]]);
    if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
        tri.swap(1, 2);
    }
}

fn subdivide(
    vertices: &[Vector3<f64>],
    triangles: &[[usize; 3]],
) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let mut out = vertices.to_vec();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |i: usize, j: usize, out: &mut Vec<Vector3<f64>>| -> usize {
        let key = (i.min(j), i.max(j));
        *midpoints.entry(key).or_insert_with(|| {
            out.push(((out[i] + out[j]) * 0.5).normalize());
            out.len() - 1
        })
    };
    let mut next = Vec::with_capacity(triangles.len() * 4);
    for &[a, b, c] in triangles {
        let ab = midpoint(a, b, &mut out);
        let bc = midpoint(b, c, &mut out);
        let ca = midpoint(c, a, &mut out);
        next.push([a, ab, ca]);
        next.push([b, bc, ab]);
        next.push([c, ca, bc]);
        next.push([ab, bc, ca]);
    }
    (out, next)
}
