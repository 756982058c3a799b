//! Total variation, perimeter and the laws relating them on the sphere
//! mesh: the coarea identity, heat-flow monotonicity, the isoperimetric
//! inequality and the decrease of variation under symmetrization.
//!
//! Two discretizations of the variation coexist. The graph variation
//! `Σ_e w_e |u_i − u_j|` satisfies the coarea identity exactly; the
//! piecewise-linear variation `Σ_T |T| |∇u_T|` is the geometrically
//! accurate one.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::conjugate_gradient;
use crate::rearrange::distribution_function;
use crate::sphere_mesh::{cap_perimeter_unchecked, CellSet, SphereFunction, SphereMesh, SPHERE_AREA};

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct VariationReport {
    pub tv_graph: f64,
    pub tv_pl: f64,
    pub coarea_integral: f64,
}

pub fn variation_report(u: &SphereFunction) -> VariationReport {
    VariationReport {
        tv_graph: total_variation_graph(u),
        tv_pl: total_variation_pl(u),
        coarea_integral: coarea_integral(u),
    }
}

pub fn total_variation_graph(u: &SphereFunction) -> f64 {
    let mesh = u.mesh();
    let v = u.values();
    mesh.tv_edges()
        .iter()
        .zip(mesh.edge_weight())
        .map(|(&[i, j], w)| w * (v[i] - v[j]).abs())
        .sum()
}

pub fn total_variation_pl(u: &SphereFunction) -> f64 {
    let mesh = u.mesh();
    mesh.triangle_gradients(u.values())
        .iter()
        .zip(mesh.triangle_area())
        .map(|(g, a)| a * g.norm())
        .sum()
}

/// Graph variation of the indicator of `E`.
pub fn perimeter(e: &CellSet) -> f64 {
    total_variation_graph(&e.indicator())
}

/// `∫ P({u > t}) dt`, computed by sweeping the levels from the top and
/// updating the cut of the growing super-level set edge by edge.
pub fn coarea_integral(u: &SphereFunction) -> f64 {
    let mesh = u.mesh();
    let vals = u.values();
    let n = mesh.vertex_count();
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&[i, j], &w) in mesh.tv_edges().iter().zip(mesh.edge_weight()) {
        incident[i].push((j, w));
        incident[j].push((i, w));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));

    let mut inside = vec![false; n];
    let mut cut = 0.0;
    let mut total = 0.0;
    let mut k = 0;
    while k < n {
        let level = vals[order[k]];
        while k < n && vals[order[k]] == level {
            let v = order[k];
            for &(q, w) in &incident[v] {
                if inside[q] {
                    cut -= w;
                } else {
                    cut += w;
                }
            }
            inside[v] = true;
            k += 1;
        }
        if k < n {
            // {u > t} is constant for t in [next level, level)
            total += (level - vals[order[k]]) * cut;
        }
    }
    total
}

/// `perimeter(E) − cap_perimeter(|E|)`; zero for caps up to mesh error.
pub fn isoperimetric_deficit(e: &CellSet) -> f64 {
    perimeter(e) - cap_perimeter_unchecked(e.area())
}

/// Non-sharp isoperimetric bound `sqrt(2π) · min(|E|, 4π − |E|)^{1/2}`.
pub fn isoperimetric_lower_bound(area: f64) -> f64 {
    let a = area.clamp(0.0, SPHERE_AREA);
    (2.0 * PI).sqrt() * a.min(SPHERE_AREA - a).sqrt()
}

/// Variation of the cap-symmetric function with the distribution of `u`:
/// `∫ cap_perimeter(μ(t)) dt`, exact for the step distribution.
pub fn symmetrized_variation(u: &SphereFunction) -> f64 {
    distribution_function(u)
        .breakpoints()
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * cap_perimeter_unchecked(w[0].1))
        .sum()
}

/// Piecewise-linear variation recorded along an implicit heat flow.
#[derive(Clone, Debug, Serialize)]
pub struct HeatTrace {
    /// `(time, tv)` with strictly increasing times, starting at `t = 0`.
    pub samples: Vec<(f64, f64)>,
    /// Monotonicity constant `c` in `e^{−ct} tv(t)`.
    pub constant: f64,
}

impl HeatTrace {
    pub fn weighted(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(t, tv)| (-self.constant * t).exp() * tv)
    }

    /// Largest increase of `e^{−ct} tv` between consecutive samples.
    pub fn max_increase(&self) -> f64 {
        let w: Vec<f64> = self.weighted().collect();
        w.windows(2).map(|p| p[1] - p[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_non_increasing(&self, tolerance: f64) -> bool {
        self.samples.len() < 2 || self.max_increase() <= tolerance
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        let w: Vec<f64> = self.weighted().collect();
        w.windows(2).all(|p| p[1] < p[0])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time,tv")?;
        for (t, tv) in &self.samples {
            writeln!(w, "{t},{tv}")?;
        }
        Ok(())
    }
}

/// Implicit heat flow `(M + τK) u_{k+1} = M u_k` on a fixed mesh.
pub struct HeatFlow<'m> {
    mesh: &'m SphereMesh,
    system: crate::linalg::CsrMatrix,
    step: f64,
}

impl<'m> HeatFlow<'m> {
    pub fn new(mesh: &'m SphereMesh, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Domain(format!("heat step {step} must be positive")));
        }
        let system = mesh.stiffness().add_diagonal(mesh.vertex_area(), 1.0 / step);
        Ok(Self { mesh, system, step })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// One backward-Euler step.
    pub fn advance(&self, u: &SphereFunction<'m>) -> Result<SphereFunction<'m>> {
        let rhs: Vec<f64> = u
            .values()
            .iter()
            .zip(self.mesh.vertex_area())
            .map(|(v, a)| v * a / self.step)
            .collect();
        let mut next = u.values().to_vec();
        conjugate_gradient(&self.system, &rhs, &mut next, 1e-14, 10_000, false)?;
        Ok(SphereFunction::from_values_unchecked(self.mesh, next))
    }
}

/// Runs `nsteps` implicit heat steps and records the piecewise-linear
/// variation, with monotonicity constant `c = 0`.
pub fn heat_flow_trace(u: &SphereFunction, step: f64, nsteps: usize) -> Result<HeatTrace> {
    heat_flow_trace_with_constant(u, step, nsteps, 0.0)
}

pub fn heat_flow_trace_with_constant(
    u: &SphereFunction,
    step: f64,
    nsteps: usize,
    constant: f64,
) -> Result<HeatTrace> {
    if nsteps == 0 {
        return Err(Error::Domain("heat flow needs at least one step".into()));
    }
    if constant < 0.0 {
        return Err(Error::Domain("monotonicity constant must be nonnegative".into()));
    }
    let flow = HeatFlow::new(u.mesh(), step)?;
    let mut samples = vec![(0.0, total_variation_pl(u))];
    let mut cur = u.clone();
    for k in 1..=nsteps {
        cur = flow.advance(&cur)?;
        samples.push((k as f64 * step, total_variation_pl(&cur)));
    }
    Ok(HeatTrace { samples, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::sphere_mesh::{build_icosphere, cap_perimeter};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn mesh5() -> &'static SphereMesh {
        static M: OnceLock<SphereMesh> = OnceLock::new();
        M.get_or_init(|| build_icosphere(5).unwrap())
    }

    #[test]
    fn constants_have_no_variation() {
        let m = build_icosphere(3).unwrap();
        let c = SphereFunction::constant(&m, 4.0);
        assert_eq!(total_variation_graph(&c), 0.0);
        assert!(total_variation_pl(&c) < 1e-12);
        assert_eq!(coarea_integral(&c), 0.0);
        assert_eq!(symmetrized_variation(&c), 0.0);
    }

    #[test]
    fn graph_variation_homogeneous_and_vanishing_only_on_constants() {
        let m = build_icosphere(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = samples::random_rough(&m, &mut rng, 1.0);
        let tv = total_variation_graph(&u);
        assert!(tv > 0.0);
        assert_eq!(total_variation_graph(&u.map(|v| 2.0 * v)), 2.0 * tv);
        let mut bump = vec![0.0; m.vertex_count()];
        bump[7] = 1e-6;
        assert!(total_variation_graph(&SphereFunction::new(&m, bump).unwrap()) > 0.0);
    }

    #[test]
    fn hemisphere_cut_approximates_equator() {
        let m = mesh5();
        let hemi = CellSet::polar_cap(m, PI / 2.0);
        let p = perimeter(&hemi);
        assert!((p - 2.0 * PI).abs() <= 0.05 * 2.0 * PI, "perimeter {p}");
    }

    #[test]
    fn cap_of_area_pi_matches_profile() {
        let m = mesh5();
        let cap = CellSet::polar_cap(m, PI / 3.0);
        let p = perimeter(&cap);
        let exact = cap_perimeter(PI).unwrap();
        assert!((exact - PI * 3f64.sqrt()).abs() < 1e-12);
        assert!((p - exact).abs() <= 0.05 * exact, "perimeter {p} vs {exact}");
    }

    #[test]
    fn perimeter_complement_symmetry() {
        let m = build_icosphere(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(perimeter(&CellSet::empty(&m)), 0.0);
        assert_eq!(perimeter(&CellSet::full(&m)), 0.0);
        for _ in 0..100 {
            let e = samples::random_set(&m, &mut rng, 0.3);
            assert_eq!(perimeter(&e), perimeter(&e.complement()));
        }
    }

    #[test]
    fn pl_variation_of_height() {
        let m = mesh5();
        let z = SphereFunction::from_fn(m, |p| p.z).unwrap();
        // ∫_0^π sin θ · 2π sin θ dθ = π²
        let tv = total_variation_pl(&z);
        assert!((tv - PI * PI).abs() <= 0.01 * PI * PI, "tv {tv}");
    }

    #[test]
    fn pl_variation_converges_under_refinement() {
        let mut errs = Vec::new();
        for s in 2..=5 {
            let m = build_icosphere(s).unwrap();
            let z = SphereFunction::from_fn(&m, |p| p.z).unwrap();
            errs.push((total_variation_pl(&z) - PI * PI).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] <= 0.5 * w[0], "errors {errs:?}");
        }
    }

    #[test]
    fn coarea_of_indicator_is_perimeter() {
        let m = build_icosphere(3).unwrap();
        let e = CellSet::polar_cap(&m, 1.1);
        assert!((coarea_integral(&e.indicator()) - perimeter(&e)).abs() < 1e-12);
    }

    #[test]
    fn coarea_identity_on_random_data() {
        let m = build_icosphere(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u = samples::random_function(&m, &mut rng);
            let r = variation_report(&u);
            assert!((r.coarea_integral - r.tv_graph).abs() <= 1e-10 * r.tv_graph);
        }
    }

    #[test]
    fn truncation_lower_semicontinuity_proxy() {
        let m = build_icosphere(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = samples::random_smooth(&m, &mut rng);
        let tv = total_variation_graph(&u);
        let (lo, hi) = u.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        let weight_sum: f64 = m.edge_weight().iter().sum();
        let mut gaps = Vec::new();
        for j in 1..=10 {
            let levels = (1u32 << j) as f64;
            let width = (hi - lo) / levels;
            let um = u.map(|v| lo + width * ((v - lo) / width).floor());
            let tvm = total_variation_graph(&um);
            // quantization moves each difference by at most one level width
            assert!(tvm >= tv - weight_sum * width - 1e-9);
            gaps.push((tvm - tv).abs());
        }
        assert!(gaps[9] < 0.01 * tv, "gaps {gaps:?}");
    }

    #[test]
    fn symmetrized_variation_examples() {
        let m = mesh5();
        let e = CellSet::polar_cap(m, 0.9);
        let sv = symmetrized_variation(&e.indicator());
        assert!((sv - cap_perimeter(e.area()).unwrap()).abs() < 1e-12);
        let z = SphereFunction::from_fn(m, |p| p.z).unwrap();
        let sv = symmetrized_variation(&z);
        assert!((sv - PI * PI).abs() <= 0.01 * PI * PI, "sv {sv}");
    }

    #[test]
    fn isoperimetric_examples() {
        let m = mesh5();
        assert_eq!(isoperimetric_deficit(&CellSet::empty(m)), 0.0);
        let hemi = CellSet::polar_cap(m, PI / 2.0);
        assert!(isoperimetric_deficit(&hemi).abs() <= 0.05 * 2.0 * PI);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let e = samples::random_set(m, &mut rng, 0.5);
            assert!(perimeter(&e) >= isoperimetric_lower_bound(e.area()));
        }
    }

    #[test]
    fn heat_trace_examples() {
        let m = build_icosphere(4).unwrap();
        let c = heat_flow_trace(&SphereFunction::constant(&m, 2.0), 0.01, 5).unwrap();
        assert!(c.samples.iter().all(|&(_, tv)| tv < 1e-10));

        let cap = CellSet::polar_cap(&m, 0.7).indicator();
        let trace = heat_flow_trace(&cap, 1e-3, 50).unwrap();
        assert!(trace.is_strictly_decreasing(), "{:?}", &trace.samples[..5]);
        assert!(trace.samples.windows(2).all(|w| w[1].0 > w[0].0));

        let z = SphereFunction::from_fn(&m, |p| p.z).unwrap();
        let trace = heat_flow_trace(&z, 1e-3, 3).unwrap();
        let first = trace.samples[1].1;
        assert!((first - total_variation_pl(&z)).abs() <= 0.02 * first);
        assert_eq!(trace.samples[0].1, total_variation_pl(&z));
    }

    #[test]
    fn heat_trace_rejects_bad_steps() {
        let m = build_icosphere(1).unwrap();
        let u = SphereFunction::zero(&m);
        assert!(matches!(heat_flow_trace(&u, 0.0, 3), Err(Error::Domain(_))));
        assert!(matches!(heat_flow_trace(&u, -1.0, 3), Err(Error::Domain(_))));
        assert!(heat_flow_trace(&u, 0.1, 0).is_err());
    }
}
