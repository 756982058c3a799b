use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use capsym::dirac_plane::{
    fundamental_solution, gap_profile, singularity_gap, solve_dirac_plane, solve_radial, write_plane_csv,
    DiracProblem,
};
use capsym::geometric_measure::{
    heat_flow_trace_with_constant, perimeter, symmetrized_variation, total_variation_pl, variation_report,
};
use capsym::pde_sphere::{decay_estimate, median_normalize, solve_sphere, SolverConfig, SphereProblem};
use capsym::rearrange::{decreasing_rearrangement, distribution_function, symmetrize, symmetrize_set};
use capsym::samples::{geodesic_bump, random_function, random_set, random_smooth};
use capsym::sphere_mesh::conformal_transport_fn;
use capsym::{build_icosphere, CellSet, PlanePoint, SphereFunction, SphereMesh, SpherePoint};

use crate::config::{Command, Family, Preset, RunConfig};
use crate::verify::run_suite;

/// Files to write, in order, plus whether every check passed.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub pass: bool,
}

impl Artifacts {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            pass: true,
        }
    }

    fn csv<F>(&mut self, name: &str, write: F) -> capsym::Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> capsym::Result<()>,
    {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut buf = serde_json::to_vec_pretty(value).expect("serializable");
        buf.push(b'\n');
        self.files.push((name.into(), buf));
    }
}

pub fn run(cfg: &RunConfig) -> capsym::Result<Artifacts> {
    let mesh = build_icosphere(cfg.mesh_subdivisions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Artifacts::new();
    match cfg.command {
        Command::Mesh => mesh_cmd(&mesh, &mut out)?,
        Command::Symmetrize => {
            let u = initial_function(&mesh, &cfg.params.symmetrize.family, &mut rng);
            symmetrize_cmd(&u, &mut out)?
        }
        Command::Variation => {
            let u = initial_function(&mesh, &cfg.params.variation.family, &mut rng);
            variation_cmd(&u, &cfg.params.variation.family, &mut out)?
        }
        Command::Heat => {
            let h = &cfg.params.heat;
            let u = initial_function(&mesh, &h.family, &mut rng);
            let trace = heat_flow_trace_with_constant(&u, h.step, h.steps, h.constant)?;
            out.csv("heat_trace.csv", |w| trace.write_csv(w))?;
            out.pass = trace.is_non_increasing(1e-9 * cfg.tolerance_scale);
            out.json(
                "heat.json",
                &json!({
                    "step": h.step,
                    "steps": h.steps,
                    "constant": trace.constant,
                    "initial_tv_pl": total_variation_pl(&u),
                    "max_increase": trace.max_increase(),
                    "non_increasing": out.pass,
                }),
            );
        }
        Command::SolveSphere => solve_sphere_cmd(cfg, &mesh, &mut out)?,
        Command::Dirac => dirac_cmd(cfg, &mesh, &mut out)?,
        Command::Verify => {
            let report = run_suite(cfg, &mesh, &mut rng)?;
            out.pass = report.all_pass();
            out.json("report.json", &report);
        }
    }
    Ok(out)
}

fn initial_function<'m>(mesh: &'m SphereMesh, family: &Family, rng: &mut ChaCha8Rng) -> SphereFunction<'m> {
    match *family {
        Family::Random => random_function(mesh, rng),
        Family::Smooth => random_smooth(mesh, rng),
        Family::Height => SphereFunction::from_fn(mesh, |p| p.z).expect("finite"),
        Family::Cap { area } => {
            let theta = capsym::cap_colatitude(area).expect("validated area");
            CellSet::polar_cap(mesh, theta).indicator()
        }
        Family::Noise { density } => random_set(mesh, rng, density).indicator(),
    }
}

fn mesh_cmd(mesh: &SphereMesh, out: &mut Artifacts) -> capsym::Result<()> {
    out.csv("vertices.csv", |w| mesh.write_vertex_csv(w))?;
    out.csv("edges.csv", |w| mesh.write_edge_csv(w))?;
    out.json(
        "mesh.json",
        &json!({
            "subdivisions": mesh.subdivisions(),
            "vertices": mesh.vertex_count(),
            "triangles": mesh.triangles().len(),
            "edges": mesh.edges().len(),
            "total_area": mesh.total_area(),
            "max_vertex_area": mesh.max_vertex_area(),
        }),
    );
    Ok(())
}

fn symmetrize_cmd(u: &SphereFunction, out: &mut Artifacts) -> capsym::Result<()> {
    let us = symmetrize(u);
    out.csv("input.csv", |w| u.write_csv(w))?;
    out.csv("symmetrized.csv", |w| us.write_csv(w))?;
    out.csv("distribution.csv", |w| distribution_function(u).write_csv(w))?;
    out.csv("rearrangement.csv", |w| decreasing_rearrangement(u).write_csv(w))?;
    out.json(
        "symmetrize.json",
        &json!({
            "integral": u.integral(),
            "integral_symmetrized": us.integral(),
            "tv_pl": total_variation_pl(u),
            "tv_pl_symmetrized": total_variation_pl(&us),
            "symmetrized_variation": symmetrized_variation(u),
        }),
    );
    Ok(())
}

fn variation_cmd(u: &SphereFunction, family: &Family, out: &mut Artifacts) -> capsym::Result<()> {
    out.csv("input.csv", |w| u.write_csv(w))?;
    let report = variation_report(u);
    let mut value = serde_json::to_value(report).expect("serializable");
    if matches!(family, Family::Cap { .. } | Family::Noise { .. }) {
        let e = CellSet::from_predicate(u.mesh(), |i| u.values()[i] > 0.5);
        value["set_area"] = json!(e.area());
        value["perimeter"] = json!(perimeter(&e));
        value["symmetrized_perimeter"] = json!(perimeter(&symmetrize_set(&e)));
        value["cap_perimeter"] = json!(capsym::cap_perimeter(e.area())?);
    }
    out.pass = report.coarea_integral >= 0.0
        && (report.coarea_integral - report.tv_graph).abs() <= 1e-10 * report.tv_graph.max(f64::MIN_POSITIVE);
    out.json("variation.json", &value);
    Ok(())
}

fn sphere_rhs<'m>(mesh: &'m SphereMesh, preset: &Preset) -> capsym::Result<SphereFunction<'m>> {
    match *preset {
        Preset::Harmonic { degree } => {
            let y = if degree == 1 {
                SphereFunction::from_fn(mesh, |p| p.z)?
            } else {
                SphereFunction::from_fn(mesh, |p| p.z * p.z - 1.0 / 3.0)?
            };
            let l = degree as f64;
            Ok(y.map(|v| l * (l + 1.0) * v).mean_free())
        }
        Preset::BumpPair { radius } => {
            let n = geodesic_bump(mesh, &SpherePoint::new(0.0, 0.0, 1.0), radius, 1.0);
            let s = geodesic_bump(mesh, &SpherePoint::new(0.0, 0.0, -1.0), radius, 1.0);
            Ok(n.zip_with(&s, |a, b| a - b))
        }
        Preset::TransportedPlane { epsilon } => {
            let c = capsym::dirac_plane::bump_normalizer(epsilon, 2);
            let bump = |x: &PlanePoint, a: PlanePoint| {
                let s2 = (x - a).norm_squared() / (epsilon * epsilon);
                if s2 < 1.0 {
                    c * (1.0 - s2).powi(2)
                } else {
                    0.0
                }
            };
            let f = conformal_transport_fn(mesh, |x| {
                bump(x, PlanePoint::new(-1.0, 0.0)) - bump(x, PlanePoint::new(1.0, 0.0))
            })?;
            Ok(f.mean_free())
        }
    }
}

fn solve_sphere_cmd(cfg: &RunConfig, mesh: &SphereMesh, out: &mut Artifacts) -> capsym::Result<()> {
    let s = &cfg.params.solve_sphere;
    let f = sphere_rhs(mesh, &s.preset)?;
    let problem = SphereProblem::new(f.clone(), s.p, capsym::pde_sphere::Normalization::ZeroMean)?;
    let config = SolverConfig {
        tolerance: s.tolerance * cfg.tolerance_scale,
        max_iterations: s.max_iterations,
        seed: cfg.seed,
    };
    let sol = solve_sphere(&problem, &config)?;
    out.csv("solution.csv", |w| sol.u.write_csv(w))?;
    let mut summary = json!({
        "p": s.p,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "f_l1": f.l1_norm(),
    });
    if s.p == 2.0 {
        let normalized = median_normalize(&sol.u);
        let report = decay_estimate(&normalized, &f, s.rate_slack)?;
        out.csv("distribution.csv", |w| distribution_function(&normalized).write_csv(w))?;
        out.pass = report.passes();
        summary["decay"] = serde_json::to_value(&report).expect("serializable");
    }
    out.json("decay.json", &summary);
    Ok(())
}

fn dirac_cmd(cfg: &RunConfig, mesh: &SphereMesh, out: &mut Artifacts) -> capsym::Result<()> {
    let d = &cfg.params.dirac;
    let points: Vec<PlanePoint> = d.points.iter().map(|a| PlanePoint::new(a[0], a[1])).collect();
    let problem = DiracProblem::new(points, d.charges.clone(), d.p, d.n, d.epsilon, d.domain_radius)?;
    let phi = fundamental_solution(d.p, d.n)?;
    let mut summary = json!({
        "fundamental_solution": phi,
        "flux_at_unit_radius": phi.flux(1.0),
    });
    if d.p == 2.0 && d.n == 2 {
        let config = SolverConfig {
            tolerance: 1e-10 * cfg.tolerance_scale,
            seed: cfg.seed,
            ..Default::default()
        };
        let sol = solve_dirac_plane(&problem, mesh, &config)?;
        let u = sol.sample(problem.annulus_grid(d.grid_spacing, d.domain_radius))?;
        out.csv("plane.csv", |w| write_plane_csv(&u, &problem, w))?;
        let gap = singularity_gap(&u, &problem)?;
        let radii: Vec<f64> = (0..5).map(|k| 3.0 + 0.5 * k as f64).filter(|r| *r <= d.domain_radius).collect();
        let profile = gap_profile(&u, &problem, &radii, 0.5)?;
        let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        out.pass = gap <= 0.02 * cfg.tolerance_scale * scale.max(f64::MIN_POSITIVE) || scale == 0.0;
        summary["sphere_residual"] = json!(sol.residual);
        summary["gap"] = json!(gap);
        summary["gap_relative"] = json!(if scale > 0.0 { gap / scale } else { 0.0 });
        summary["gap_profile"] = json!(profile);
    }
    if let Some(r) = &d.radial {
        let sol = solve_radial(r.p, r.n, r.charge, r.epsilon, r.radius, r.bc)?;
        out.csv("radial.csv", |w| sol.write_csv(w))?;
        summary["radial_center_value"] = json!(sol.center_value());
    }
    out.json("dirac.json", &summary);
    Ok(())
}
