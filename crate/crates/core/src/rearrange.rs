//! Distribution functions, decreasing rearrangements and polar-cap
//! symmetrization of mesh functions.
//!
//! Everything couples by cumulative lumped area, never by vertex count, so
//! the laws hold on meshes whose cells have unequal areas. Value ties are
//! broken by vertex index.

use std::io::Write;

use crate::error::Result;
use crate::sphere_mesh::{CellSet, SphereFunction};

/// The step function `t ↦ meas{u > t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction {
    /// `(t, meas{u > t})` at each distinct value, ascending in `t`.
    breakpoints: Vec<(f64, f64)>,
    total: f64,
}

impl DistributionFunction {
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// `meas{u > t}` for any real `t`.
    pub fn mass_above(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&(v, _)| v <= t) {
            0 => self.total,
            k => self.breakpoints[k - 1].1,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.iter().map(|b| b.0)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mass_above")?;
        for (t, m) in &self.breakpoints {
            writeln!(w, "{t},{m}")?;
        }
        Ok(())
    }
}

pub fn distribution_function(u: &SphereFunction) -> DistributionFunction {
    let area = u.mesh().vertex_area();
    let vals = u.values();
    let order = descending_order(vals);
    let mut breakpoints = Vec::new();
    let mut above = 0.0;
    let mut k = 0;
    while k < order.len() {
        let t = vals[order[k]];
        breakpoints.push((t, above));
        while k < order.len() && vals[order[k]] == t {
            above += area[order[k]];
            k += 1;
        }
    }
    breakpoints.reverse();
    DistributionFunction {
        breakpoints,
        total: above,
    }
}

/// Non-increasing step function on `[0, |S²|]`, equimeasurable with its
/// source: value `values[k]` on `(ends[k-1], ends[k]]`.
#[derive(Clone, Debug)]
pub struct RearrangementProfile {
    ends: Vec<f64>,
    values: Vec<f64>,
}

impl RearrangementProfile {
    pub fn total_mass(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    /// Segments `(s_start, s_end, value)` in increasing `s`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ends
            .iter()
            .zip(&self.values)
            .scan(0.0, |start, (&end, &v)| {
                let seg = (*start, end, v);
                *start = end;
                Some(seg)
            })
    }

    /// `ū(s) = inf{t : μ(t) < s}`; at `s = 0` the supremum of the data.
    pub fn value_at(&self, s: f64) -> f64 {
        let k = self.ends.partition_point(|&e| e < s);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `∫ F(ū(s)) ds`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.segments().map(|(a, b, v)| (b - a) * f(v)).sum()
    }

    /// `∫ ū(s) v̄(s) ds` for two profiles over the same total mass.
    pub fn product_integral(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        let (mut i, mut j) = (0, 0);
        let mut s = 0.0;
        while i < self.ends.len() && j < other.ends.len() {
            let e = self.ends[i].min(other.ends[j]);
            acc += (e - s) * self.values[i] * other.values[j];
            s = e;
            if self.ends[i] <= e {
                i += 1;
            }
            if other.ends[j] <= e {
                j += 1;
            }
        }
        acc
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,value")?;
        for (a, b, v) in self.segments() {
            writeln!(w, "{a},{v}")?;
            writeln!(w, "{b},{v}")?;
        }
        Ok(())
    }
}

fn descending_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    order
}

pub fn decreasing_rearrangement(u: &SphereFunction) -> RearrangementProfile {
    let area = u.mesh().vertex_area();
    let vals = u.values();
    let mut ends = Vec::with_capacity(vals.len());
    let mut values = Vec::with_capacity(vals.len());
    let mut s = 0.0;
    for i in descending_order(vals) {
        s += area[i];
        ends.push(s);
        values.push(vals[i]);
    }
    RearrangementProfile { ends, values }
}

/// Polar-cap symmetrization `u*`: the decreasing rearrangement laid out
/// along increasing colatitude, each cell receiving the mean of `ū` over
/// the area interval it occupies.
pub fn symmetrize<'m>(u: &SphereFunction<'m>) -> SphereFunction<'m> {
    let mesh = u.mesh();
    let profile = decreasing_rearrangement(u);
    let (ends, values) = (&profile.ends, &profile.values);
    let total = profile.total_mass();
    let area = mesh.vertex_area();
    let order = mesh.polar_order();
    let mut out = vec![0.0; mesh.vertex_count()];
    let (mut k, mut cum, mut lower) = (0usize, 0.0f64, 0.0f64);
    for (pos, &v) in order.iter().enumerate() {
        cum += area[v];
        let upper = if pos + 1 == order.len() { total } else { cum.min(total) };
        let (mut mass, mut weighted) = (0.0, 0.0);
        let mut lo = lower;
        while k < ends.len() && lo < upper {
            let e = ends[k].min(upper);
            mass += e - lo;
            weighted += (e - lo) * values[k];
            lo = e;
            if ends[k] <= upper {
                k += 1;
            } else {
                break;
            }
        }
        out[v] = if mass > 0.0 {
            weighted / mass
        } else {
            values[k.min(values.len() - 1)]
        };
        lower = upper;
    }
    SphereFunction::from_values_unchecked(mesh, out)
}

/// `E*`: the discrete polar cap whose area matches `|E|` within half a cell.
pub fn symmetrize_set<'m>(e: &CellSet<'m>) -> CellSet<'m> {
    let mesh = e.mesh();
    let target = e.area();
    let area = mesh.vertex_area();
    let mut members = vec![false; mesh.vertex_count()];
    let mut s = 0.0;
    for &v in mesh.polar_order() {
        if s + 0.5 * area[v] < target {
            members[v] = true;
        } else {
            break;
        }
        s += area[v];
    }
    CellSet::new(mesh, members).expect("membership length matches mesh")
}

/// The layer `b(t, ·) = χ{u > t ≥ 0} − χ{u ≤ t < 0}`.
pub fn layer_cake_slice<'m>(u: &SphereFunction<'m>, t: f64) -> SphereFunction<'m> {
    u.map(|v| {
        if t >= 0.0 && v > t {
            1.0
        } else if t < 0.0 && v <= t {
            -1.0
        } else {
            0.0
        }
    })
}

/// Trapezoidal `∫ b(t, ·) dt` over `levels` uniform points spanning the
/// range of `u` and zero; with `symmetrized` each slice is replaced by its
/// symmetrization.
pub fn layer_cake_reconstruction<'m>(
    u: &SphereFunction<'m>,
    levels: usize,
    symmetrized: bool,
) -> SphereFunction<'m> {
    assert!(levels >= 2);
    let lo = u.values().iter().copied().fold(0.0, f64::min);
    let hi = u.values().iter().copied().fold(0.0, f64::max);
    let dt = (hi - lo) / (levels - 1) as f64;
    let mut acc = vec![0.0; u.values().len()];
    if dt == 0.0 {
        return u.map(|_| 0.0);
    }
    for k in 0..levels {
        let t = lo + dt * k as f64;
        let w = if k == 0 || k == levels - 1 { 0.5 * dt } else { dt };
        let mut slice = layer_cake_slice(u, t);
        if symmetrized {
            slice = symmetrize(&slice);
        }
        for (a, b) in acc.iter_mut().zip(slice.values()) {
            *a += w * b;
        }
    }
    SphereFunction::from_values_unchecked(u.mesh(), acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_mesh::{build_icosphere, SphereMesh, SPHERE_AREA};
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn mesh5() -> &'static SphereMesh {
        static M: OnceLock<SphereMesh> = OnceLock::new();
        M.get_or_init(|| build_icosphere(5).unwrap())
    }

    #[test]
    fn distribution_of_constant() {
        let m = build_icosphere(2).unwrap();
        let mu = distribution_function(&SphereFunction::constant(&m, 3.0));
        assert!((mu.mass_above(2.999) - SPHERE_AREA).abs() < 1e-12);
        assert_eq!(mu.mass_above(3.0), 0.0);
        assert_eq!(mu.mass_above(10.0), 0.0);
    }

    #[test]
    fn distribution_of_indicator() {
        let m = build_icosphere(3).unwrap();
        let e = CellSet::polar_cap(&m, 1.0);
        let mu = distribution_function(&e.indicator());
        assert!((mu.mass_above(-0.5) - SPHERE_AREA).abs() < 1e-12);
        assert!((mu.mass_above(0.0) - e.area()).abs() < 1e-12);
        assert!((mu.mass_above(0.7) - e.area()).abs() < 1e-12);
        assert_eq!(mu.mass_above(1.0), 0.0);
    }

    #[test]
    fn distribution_of_height_matches_cap_areas() {
        let m = mesh5();
        let mu = distribution_function(&SphereFunction::from_fn(m, |p| p.z).unwrap());
        for k in 1..20 {
            let t = -1.0 + 0.1 * k as f64;
            let exact = 2.0 * PI * (1.0 - t);
            assert!((mu.mass_above(t) - exact).abs() <= 0.01 * exact, "t={t}");
        }
        let bp = mu.breakpoints();
        assert!(bp.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1));
    }

    #[test]
    fn rearrangement_examples() {
        let m = mesh5();
        let c = decreasing_rearrangement(&SphereFunction::constant(m, -2.0));
        assert!(c.segments().all(|(_, _, v)| v == -2.0));
        assert!((c.total_mass() - SPHERE_AREA).abs() < 1e-9);

        let e = CellSet::polar_cap(m, 0.8);
        let r = decreasing_rearrangement(&e.indicator());
        assert_eq!(r.value_at(0.5 * e.area()), 1.0);
        assert_eq!(r.value_at(e.area() + 1e-9), 0.0);

        let z = decreasing_rearrangement(&SphereFunction::from_fn(m, |p| p.z).unwrap());
        for k in 1..40 {
            let s = SPHERE_AREA * k as f64 / 40.0;
            let exact = 1.0 - s / (2.0 * PI);
            assert!((z.value_at(s) - exact).abs() <= 0.01, "s={s}");
        }
        assert!(z.segments().collect::<Vec<_>>().windows(2).all(|w| w[0].2 >= w[1].2));
    }

    #[test]
    fn rearrangement_convention_is_left_open() {
        let m = build_icosphere(2).unwrap();
        let e = CellSet::polar_cap(&m, 1.0);
        let r = decreasing_rearrangement(&e.indicator());
        // ū(|E|) = inf{t : μ(t) < |E|} = 1
        assert_eq!(r.value_at(e.area()), 1.0);
    }

    #[test]
    fn symmetrize_fixed_points() {
        let m = mesh5();
        let z = SphereFunction::from_fn(m, |p| p.z).unwrap();
        let zs = symmetrize(&z);
        let worst = z.values().iter().zip(zs.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(worst <= 1e-9, "worst {worst}");

        let c = symmetrize(&SphereFunction::constant(m, 1.25));
        assert!(c.values().iter().all(|&v| (v - 1.25).abs() <= 1e-12));
    }

    #[test]
    fn symmetrize_reflected_height() {
        let m = mesh5();
        let neg = SphereFunction::from_fn(m, |p| -p.z).unwrap();
        let s = symmetrize(&neg);
        // resolution: the largest drop of z across one ring of cells
        let h = (m.max_vertex_area() * 2.0).sqrt();
        for (p, v) in m.vertices().iter().zip(s.values()) {
            assert!((v - p.z).abs() <= h, "z={} v={v}", p.z);
        }
    }

    #[test]
    fn symmetrized_values_follow_colatitude() {
        let m = build_icosphere(4).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let u = crate::samples::random_rough(&m, &mut rng, 1.0);
        let s = symmetrize(&u);
        let ordered: Vec<f64> = m.polar_order().iter().map(|&v| s.values()[v]).collect();
        assert!(ordered.windows(2).all(|w| w[0] >= w[1] - 1e-15));
        assert!((s.integral() - u.integral()).abs() <= 1e-12 * u.l1_norm());
    }

    #[test]
    fn symmetrize_set_examples() {
        let m = mesh5();
        assert!(symmetrize_set(&CellSet::empty(m)).is_empty());
        let full = symmetrize_set(&CellSet::full(m));
        assert_eq!(full.len(), m.vertex_count());

        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let e = crate::samples::random_set(m, &mut rng, 0.5);
        let star = symmetrize_set(&e);
        assert!((star.area() - e.area()).abs() <= m.max_vertex_area());
        let theta = crate::sphere_mesh::cap_colatitude(e.area()).unwrap();
        let cell = (2.0 * m.max_vertex_area()).sqrt();
        for v in 0..m.vertex_count() {
            let c = m.colatitude()[v];
            if c < theta - cell {
                assert!(star.contains(v));
            }
            if c > theta + cell {
                assert!(!star.contains(v));
            }
        }
    }

    #[test]
    fn layer_slices() {
        let m = build_icosphere(3).unwrap();
        let pos = SphereFunction::from_fn(&m, |p| p.z + 1.5).unwrap();
        assert!(layer_cake_slice(&pos, -0.3).values().iter().all(|&v| v == 0.0));

        let e = CellSet::polar_cap(&m, 1.2);
        let b = layer_cake_slice(&e.indicator(), 0.5);
        assert_eq!(b.values(), e.indicator().values());

        let z = SphereFunction::from_fn(&m, |p| p.z).unwrap();
        let b = layer_cake_slice(&z, -0.5);
        for (p, v) in m.vertices().iter().zip(b.values()) {
            assert_eq!(*v, if p.z <= -0.5 { -1.0 } else { 0.0 });
        }
    }

    #[test]
    fn layer_cake_reconstructs_height() {
        let m = mesh5();
        let z = SphereFunction::from_fn(m, |p| p.z).unwrap();
        let back = layer_cake_reconstruction(&z, 400, false);
        let err = back.zip_with(&z, |a, b| a - b).sup_norm();
        assert!(err <= 0.01, "sup error {err}");
    }

    #[test]
    fn layer_cake_of_symmetrized_slices() {
        let m = build_icosphere(4).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let u = crate::samples::random_smooth(&m, &mut rng);
        let direct = symmetrize(&u);
        let layered = layer_cake_reconstruction(&u, 400, true);
        let range = u.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let dt = 2.0 * range / 399.0;
        let err = direct.zip_with(&layered, |a, b| a - b).l1_norm() / SPHERE_AREA;
        assert!(err <= 2.0 * dt, "mean error {err}, dt {dt}");
    }

    #[test]
    fn product_integral_of_identical_profiles() {
        let m = build_icosphere(3).unwrap();
        let z = SphereFunction::from_fn(&m, |p| p.z).unwrap();
        let r = decreasing_rearrangement(&z);
        let direct = z.zip_with(&z, |a, b| a * b).integral();
        assert!((r.product_integral(&r) - direct).abs() < 1e-12);
    }

    #[test]
    fn csv_exports() {
        let m = build_icosphere(1).unwrap();
        let z = SphereFunction::from_fn(&m, |p| p.z).unwrap();
        let mut buf = Vec::new();
        distribution_function(&z).write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,mass_above\n"));
        let mut buf = Vec::new();
        decreasing_rearrangement(&z).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 42);
    }
}
