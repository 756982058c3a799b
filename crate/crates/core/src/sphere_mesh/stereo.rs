//! Stereographic projection from the north pole, normalized so the equator
//! maps onto the unit circle, and the area-preserving transport of plane
//! densities to the sphere.

use nalgebra::Vector2;

use crate::error::{Error, Result};

use super::{SphereFunction, SphereMesh, SpherePoint};

pub type PlanePoint = Vector2<f64>;

/// Sphere point to plane; the north pole is the singular point.
pub fn stereographic_forward(p: &SpherePoint) -> Result<PlanePoint> {
    let rho2 = p.x * p.x + p.y * p.y;
    // 1 − z, computed without cancellation in the northern hemisphere
    let denom = if p.z > 0.0 { rho2 / (1.0 + p.z) } else { 1.0 - p.z };
    if denom <= f64::MIN_POSITIVE || rho2 == 0.0 && p.z > 0.0 {
        return Err(Error::Singularity("stereographic projection of the north pole".into()));
    }
    Ok(PlanePoint::new(p.x / denom, p.y / denom))
}

pub fn stereographic_inverse(x: &PlanePoint) -> SpherePoint {
    let r2 = x.norm_squared();
    let d = 1.0 + r2;
    SpherePoint::new(2.0 * x.x / d, 2.0 * x.y / d, (r2 - 1.0) / d)
}

/// Ratio of plane to sphere area elements at a plane point,
/// `λ(x) = (1 + |x|²)² / 4`, so that `λ dV = dx`.
pub fn conformal_factor(x: &PlanePoint) -> f64 {
    let d = 1.0 + x.norm_squared();
    0.25 * d * d
}

/// Real values on a set of distinct plane nodes.
#[derive(Clone, Debug)]
pub struct PlaneFunction {
    nodes: Vec<PlanePoint>,
    values: Vec<f64>,
}

impl PlaneFunction {
    pub fn new(nodes: Vec<PlanePoint>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Precondition(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || nodes.iter().any(|x| !x.iter().all(|c| c.is_finite())) {
            return Err(Error::Precondition("plane function has non-finite entries".into()));
        }
        Ok(Self { nodes, values })
    }

    pub fn from_fn<F: Fn(&PlanePoint) -> f64>(nodes: Vec<PlanePoint>, f: F) -> Result<Self> {
        let values = nodes.iter().map(f).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[PlanePoint] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Transports a plane density to the sphere as `f = λ · (g ∘ π)`, which
/// preserves total mass: `∫_{S²} f dV = ∫_{ℝ²} g dx`.
///
/// The value at the north pole is the limit of `λ g` at infinity; densities
/// with `|x|² g(x)` not decaying are rejected as non-integrable.
pub fn conformal_transport_fn<'m, G>(mesh: &'m SphereMesh, g: G) -> Result<SphereFunction<'m>>
where
    G: Fn(&PlanePoint) -> f64,
{
    let tail = |r: f64| {
        (0..8)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 4.0;
                let x = PlanePoint::new(r * a.cos(), r * a.sin());
                (r * r * g(&x).abs(), conformal_factor(&x) * g(&x))
            })
            .fold((0.0f64, 0.0f64), |(m, s), (t, v)| (m.max(t), s + v / 8.0))
    };
    let (near, _) = tail(1e4);
    let (far, pole_value) = tail(1e8);
    if !near.is_finite() || !far.is_finite() || (far > 1e-6 && far >= 0.5 * near) {
        return Err(Error::Domain("plane density does not decay integrably".into()));
    }
    let pole_value = if pole_value.is_finite() { pole_value } else { 0.0 };

    let mut values = Vec::with_capacity(mesh.vertex_count());
    for p in mesh.vertices() {
        let v = match stereographic_forward(p) {
            Ok(x) => conformal_factor(&x) * g(&x),
            Err(_) => pole_value,
        };
        if !v.is_finite() {
            return Err(Error::Domain("transported density is not finite".into()));
        }
        values.push(v);
    }
    Ok(SphereFunction::from_values_unchecked(mesh, values))
}

/// [`conformal_transport_fn`] for data sampled on plane nodes; the density
/// is taken from the nearest node and is zero beyond the node cloud.
pub fn conformal_transport<'m>(mesh: &'m SphereMesh, g: &PlaneFunction) -> Result<SphereFunction<'m>> {
    if g.is_empty() {
        return Ok(SphereFunction::zero(mesh));
    }
    let reach = g
        .nodes
        .iter()
        .fold(0.0f64, |m, x| m.max(x.norm()));
    let spacing = nearest_spacing(&g.nodes);
    conformal_transport_fn(mesh, |x| {
        if x.norm() > reach + spacing {
            return 0.0;
        }
        let (k, d) = g
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| (k, (n - x).norm()))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if d > spacing {
            0.0
        } else {
            g.values[k]
        }
    })
}

fn nearest_spacing(nodes: &[PlanePoint]) -> f64 {
    if nodes.len() < 2 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (i, a) in nodes.iter().enumerate().take(64) {
        for (j, b) in nodes.iter().enumerate() {
            if i != j {
                best = best.min((a - b).norm());
            }
        }
    }
    best
}
