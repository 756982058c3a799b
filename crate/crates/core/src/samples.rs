//! Seeded generators for the test families used across the checks.

use rand::Rng;

use crate::sphere_mesh::{cap_colatitude, CellSet, SphereFunction, SphereMesh, SpherePoint};

/// Exponent triples `(a, b, c)` with `a + b + c <= 3`.
fn monomials() -> Vec<(i32, i32, i32)> {
    let mut out = Vec::new();
    for d in 0..=3 {
        for a in 0..=d {
            for b in 0..=(d - a) {
                out.push((a, b, d - a - b));
            }
        }
    }
    out
}

/// Random combination of ambient monomials of degree at most three,
/// coefficients uniform in `[-1, 1]`.
pub fn random_smooth<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R) -> SphereFunction<'m> {
    let terms: Vec<((i32, i32, i32), f64)> = monomials()
        .into_iter()
        .map(|m| (m, rng.gen_range(-1.0..1.0)))
        .collect();
    SphereFunction::from_fn(mesh, |p| {
        terms
            .iter()
            .map(|&((a, b, c), w)| w * p.x.powi(a) * p.y.powi(b) * p.z.powi(c))
            .sum()
    })
    .expect("polynomials are finite on the sphere")
}

/// Independent uniform values in `[-scale, scale]` per vertex.
pub fn random_rough<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R, scale: f64) -> SphereFunction<'m> {
    let values = (0..mesh.vertex_count()).map(|_| rng.gen_range(-scale..scale)).collect();
    SphereFunction::new(mesh, values).expect("finite")
}

/// Random values drawn from a handful of levels, so ties are frequent.
pub fn random_quantized<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R, levels: u32) -> SphereFunction<'m> {
    let values = (0..mesh.vertex_count())
        .map(|_| rng.gen_range(0..levels) as f64 - 0.5 * levels as f64)
        .collect();
    SphereFunction::new(mesh, values).expect("finite")
}

/// Either rough, smooth or tie-heavy data, chosen at random.
pub fn random_function<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R) -> SphereFunction<'m> {
    match rng.gen_range(0..3) {
        0 => {
            let scale = rng.gen_range(0.1..10.0);
            random_rough(mesh, rng, scale)
        }
        1 => random_smooth(mesh, rng),
        _ => {
            let levels = rng.gen_range(2..8);
            random_quantized(mesh, rng, levels)
        }
    }
}

/// Independent membership with probability `density`.
pub fn random_set<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R, density: f64) -> CellSet<'m> {
    CellSet::from_predicate(mesh, |_| rng.gen_bool(density))
}

/// Geodesic cap about a uniformly random center with area drawn uniformly
/// from `[min_area, max_area]`.
pub fn random_cap<'m, R: Rng>(mesh: &'m SphereMesh, rng: &mut R, min_area: f64, max_area: f64) -> CellSet<'m> {
    let center = random_unit_vector(rng);
    let area = rng.gen_range(min_area..=max_area);
    let h = cap_colatitude(area).expect("area within the sphere").cos();
    CellSet::from_predicate(mesh, |i| mesh.vertices()[i].dot(&center) >= h)
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> SpherePoint {
    loop {
        let p = SpherePoint::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            return p / n;
        }
    }
}

/// Radial polynomial bump `(1 − (d/ε)²)²` in geodesic distance `d` from
/// `center`, rescaled so its lumped integral equals `mass` exactly.
pub fn geodesic_bump<'m>(
    mesh: &'m SphereMesh,
    center: &SpherePoint,
    radius: f64,
    mass: f64,
) -> SphereFunction<'m> {
    let raw = SphereFunction::from_fn(mesh, |p| {
        let d = p.dot(center).clamp(-1.0, 1.0).acos() / radius;
        if d < 1.0 {
            (1.0 - d * d).powi(2)
        } else {
            0.0
        }
    })
    .expect("finite");
    let m = raw.integral();
    assert!(m > 0.0, "bump radius {radius} not resolved by the mesh");
    raw.map(|v| v * mass / m)
}
