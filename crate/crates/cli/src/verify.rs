use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use capsym::dirac_plane::{
    dirichlet_divergence_demo, fundamental_solution, gap_profile, singularity_gap, solve_dirac_plane, solve_radial,
    weighted_lq_check, BoundaryCondition, DiracProblem,
};
use capsym::geometric_measure::{
    coarea_integral, heat_flow_trace, isoperimetric_lower_bound, perimeter, symmetrized_variation,
    total_variation_graph, total_variation_pl,
};
use capsym::pde_sphere::{
    decay_estimate, lq_bound_ratio, lq_norm_direct, lq_norm_via_rearrangement, median_normalize, solve_sphere,
    SolverConfig, SphereProblem,
};
use capsym::rearrange::{decreasing_rearrangement, symmetrize};
use capsym::report::{CheckRecord, VerificationReport};
use capsym::samples::{geodesic_bump, random_cap, random_function, random_set, random_smooth, random_unit_vector};
use capsym::{cap_perimeter, PlanePoint, SphereFunction, SphereMesh, SpherePoint};

use crate::config::RunConfig;

struct Ctx<'a> {
    inputs: String,
    scale: f64,
    report: &'a mut VerificationReport,
}

impl Ctx<'_> {
    fn le(&mut self, id: &str, anchor: &str, left: f64, right: f64, tol: f64) {
        let inputs = format!("{};check={id}", self.inputs);
        self.report.push(CheckRecord::le(id, anchor, &inputs, left, right, tol * self.scale));
    }
}

fn sup_diff(a: &SphereFunction, b: &SphereFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel_l2(a: &SphereFunction, b: &SphereFunction) -> f64 {
    a.zip_with(b, |x, y| x - y).lp_norm(2.0) / b.lp_norm(2.0)
}

fn bump_pair<'m>(mesh: &'m SphereMesh, a: &SpherePoint, b: &SpherePoint, radius: f64) -> SphereFunction<'m> {
    geodesic_bump(mesh, a, radius, 1.0).zip_with(&geodesic_bump(mesh, b, radius, 1.0), |x, y| x - y)
}

/// Runs every module's checks on the configured mesh.
pub fn run_suite(cfg: &RunConfig, mesh: &SphereMesh, rng: &mut ChaCha8Rng) -> capsym::Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let n = cfg.params.verify.samples;
    let mut ctx = Ctx {
        inputs: format!("seed={};subdivisions={};samples={n}", cfg.seed, cfg.mesh_subdivisions),
        scale: cfg.tolerance_scale,
        report: &mut report,
    };
    rearrangement_checks(&mut ctx, mesh, rng, n);
    measure_checks(&mut ctx, mesh, rng, n)?;
    sphere_checks(&mut ctx, mesh, rng)?;
    plane_checks(&mut ctx, mesh)?;
    Ok(report)
}

fn rearrangement_checks(ctx: &mut Ctx, mesh: &SphereMesh, rng: &mut ChaCha8Rng, n: usize) {
    let (mut coarea, mut trans, mut scal, mut mono, mut l1, mut integ, mut sup, mut hl, mut lq) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..n {
        let u = random_function(mesh, rng);
        let v = random_function(mesh, rng);
        let us = symmetrize(&u);
        let vs = symmetrize(&v);
        let size = u.sup_norm().max(1.0);

        let tv = total_variation_graph(&u);
        coarea = coarea.max((coarea_integral(&u) - tv).abs() / tv.max(f64::MIN_POSITIVE));

        let c = rng.gen_range(-5.0..5.0);
        trans = trans.max(sup_diff(&symmetrize(&u.map(|x| x + c)), &us.map(|x| x + c)) / (size + c.abs()));
        let lambda = rng.gen_range(0.1..10.0);
        scal = scal.max(sup_diff(&symmetrize(&u.map(|x| lambda * x)), &us.map(|x| lambda * x)) / (lambda * size));

        let upper = symmetrize(&u.zip_with(&v, |a, b| a + b.abs()));
        mono = mono.max(us.values().iter().zip(upper.values()).map(|(a, b)| a - b).fold(0.0, f64::max));

        let lhs = us.zip_with(&vs, |a, b| a - b).l1_norm();
        l1 = l1.max(lhs - u.zip_with(&v, |a, b| a - b).l1_norm());
        integ = integ.max((us.integral() - u.integral()).abs() / u.l1_norm().max(f64::MIN_POSITIVE));

        let ws = symmetrize(&u.zip_with(&v, f64::max));
        let deficit = (0..mesh.vertex_count())
            .map(|i| us.values()[i].max(vs.values()[i]) - ws.values()[i])
            .fold(0.0, f64::max);
        sup = sup.max(deficit);

        let direct = u.zip_with(&v, |a, b| a * b).integral();
        hl = hl.max(direct - decreasing_rearrangement(&u).product_integral(&decreasing_rearrangement(&v)));

        let a = lq_norm_via_rearrangement(&u, 2.0).expect("q > 1");
        let b = lq_norm_direct(&u, 2.0);
        lq = lq.max((a - b).abs() / b.max(f64::MIN_POSITIVE));
    }
    ctx.le("coarea_identity", "V(u) = ∫ P(u > t) dt", coarea, 0.0, 1e-10);
    ctx.le("translation", "(u + C)* = u* + C", trans, 0.0, 1e-13);
    ctx.le("scaling", "(λu)* = λu*", scal, 0.0, 1e-13);
    ctx.le("monotonicity", "u ≤ v ⇒ u* ≤ v*", mono, 0.0, 1e-13);
    ctx.le("l1_contraction", "‖u* − v*‖_{L¹} ≤ ‖u − v‖_{L¹}", l1, 0.0, 1e-12);
    ctx.le("integral_preservation", "symmetrization preserves the integral", integ, 0.0, 1e-12);
    ctx.le("sup_coupling", "w* ≥ sup(u*,v*)", sup, 0.0, 1e-13);
    ctx.le("hardy_littlewood", "by the Hardy-Littlewood theorem", hl, 0.0, 1e-10);
    ctx.le("lq_identity", "∫_{u>0} u^q = ∫ (ū⁺)^q", lq, 0.0, 1e-10);
}

fn measure_checks(ctx: &mut Ctx, mesh: &SphereMesh, rng: &mut ChaCha8Rng, n: usize) -> capsym::Result<()> {
    let mut variation = 0.0f64;
    for _ in 0..n {
        let u = random_smooth(mesh, rng);
        variation = variation.max(symmetrized_variation(&u) / total_variation_pl(&u));
    }
    ctx.le("polya_szego", "V(u*) ≤ V(u)", variation, 1.0, 0.02);

    let mut cap_ratio = 0.0f64;
    let mut iso = f64::NEG_INFINITY;
    for k in 0..n {
        let e = if k % 2 == 0 {
            random_cap(mesh, rng, 0.5, 4.0 * PI - 0.5)
        } else {
            let d = rng.gen_range(0.1..0.9);
            random_set(mesh, rng, d)
        };
        let p = perimeter(&e);
        if p > 0.0 {
            cap_ratio = cap_ratio.max(cap_perimeter(e.area())? / p);
        }
        if k % 2 == 1 && (0.5..=4.0 * PI - 0.5).contains(&e.area()) {
            iso = iso.max(isoperimetric_lower_bound(e.area()) - p);
        }
    }
    ctx.le("perimeter_symmetrization", "P(E) ≥ P(E*)", cap_ratio, 1.0, 0.05);
    ctx.le("isoperimetric", "P(E) ≥ C min(|E|, |Sⁿ∖E|)^{1−1/n}", iso, 0.0, 0.0);

    let mut increase = f64::NEG_INFINITY;
    let mut first = 0.0f64;
    for k in 0..n.min(10) {
        let smooth = k % 2 == 1;
        let u = if smooth { random_smooth(mesh, rng) } else { random_function(mesh, rng) };
        let trace = heat_flow_trace(&u, 1e-3, 50)?;
        increase = increase.max(trace.max_increase());
        if smooth {
            first = first.max((trace.samples[1].1 / total_variation_pl(&u) - 1.0).abs());
        }
    }
    ctx.le("heat_monotonicity", "e^{−ct}∫|du(t)| is non-increasing", increase, 0.0, 1e-9);
    ctx.le("heat_small_time", "Its limit as t↓0 is equal to V(u)", first, 0.0, 0.02);
    Ok(())
}

fn sphere_checks(ctx: &mut Ctx, mesh: &SphereMesh, rng: &mut ChaCha8Rng) -> capsym::Result<()> {
    let cfg = SolverConfig::default();
    let anchor = "−div(|Du|^{n−2} Du) = f in Sⁿ";
    let z = SphereFunction::from_fn(mesh, |p| p.z)?;
    let u1 = solve_sphere(&SphereProblem::poisson(z.map(|v| 2.0 * v))?, &cfg)?;
    ctx.le("sphere_degree_one", anchor, rel_l2(&u1.u, &z), 0.0, 0.01);
    let y = SphereFunction::from_fn(mesh, |p| p.z * p.z - 1.0 / 3.0)?;
    let u2 = solve_sphere(&SphereProblem::poisson(y.map(|v| 6.0 * v).mean_free())?, &cfg)?;
    ctx.le("sphere_degree_two", anchor, rel_l2(&u2.u, &y.mean_free()), 0.0, 0.01);
    ctx.le("sphere_residual", anchor, u1.residual.max(u2.residual), cfg.tolerance, 0.0);

    let north = SpherePoint::new(0.0, 0.0, 1.0);
    let south = SpherePoint::new(0.0, 0.0, -1.0);
    let f = bump_pair(mesh, &north, &south, 0.3);
    let sol = solve_sphere(&SphereProblem::poisson(f.clone())?, &cfg)?;
    let decay = decay_estimate(&median_normalize(&sol.u), &f, 0.05)?;
    ctx.le("decay_rate", "−μ′ ≥ Cμ", decay.max_violation, 0.0, 0.0);
    ctx.le("log_profile", "ū⁺(s) = O(|ln s|)", decay.log_fit.1, decay.slope_bound, 0.0);

    let calibration = lq_bound_ratio(&sol.u, &f, 2.0)?;
    let mut worst = 0.0f64;
    let mut trials = 0;
    while trials < 10 {
        let a = random_unit_vector(rng);
        let b = random_unit_vector(rng);
        if a.dot(&b).clamp(-1.0, 1.0).acos() < 0.6 {
            continue;
        }
        trials += 1;
        let g = bump_pair(mesh, &a, &b, 0.3);
        let w = solve_sphere(&SphereProblem::poisson(g.clone())?, &cfg)?;
        worst = worst.max(lq_bound_ratio(&w.u, &g, 2.0)?);
    }
    ctx.le(
        "lq_bound_stability",
        "bound ‖u‖_{L^q(Sⁿ)} in terms of ‖f‖_{L¹(Sⁿ)}",
        worst,
        1.1 * calibration,
        0.0,
    );
    Ok(())
}

fn plane_checks(ctx: &mut Ctx, mesh: &SphereMesh) -> capsym::Result<()> {
    let mut flux = 0.0f64;
    for (p, n) in [(2.0, 2), (2.0, 3), (1.5, 2), (3.0, 2), (3.0, 3)] {
        let phi = fundamental_solution(p, n)?;
        for k in -24..=24 {
            flux = flux.max((phi.flux(10f64.powf(k as f64 / 4.0)) - 1.0).abs());
        }
    }
    let anchor = "C is adjusted to make φ a solution";
    ctx.le("fundamental_flux", anchor, flux, 0.0, 1e-12);
    let c2 = fundamental_solution(2.0, 2)?.constant;
    let c3 = fundamental_solution(2.0, 3)?.constant;
    let consts = (c2 - 1.0 / (2.0 * PI)).abs().max((c3 - 1.0 / (4.0 * PI)).abs());
    ctx.le("fundamental_constants", anchor, consts, 0.0, 1e-15);

    let exterior = |p: f64, n: u32, r_max: f64, bc: BoundaryCondition, exact: &dyn Fn(f64) -> f64| {
        solve_radial(p, n, 1.0, 0.1, r_max, bc).map(|sol| {
            sol.r
                .iter()
                .zip(&sol.u)
                .filter(|(r, _)| **r >= 0.1)
                .map(|(r, u)| (u - exact(*r)).abs())
                .fold(0.0, f64::max)
        })
    };
    let e1 = exterior(2.0, 2, 10.0, BoundaryCondition::Dirichlet, &|r| (10.0 / r).ln() / (2.0 * PI))?;
    let e2 = exterior(2.0, 3, 100.0, BoundaryCondition::Decay, &|r| 1.0 / (4.0 * PI * r))?;
    let e3 = exterior(3.0, 2, 10.0, BoundaryCondition::Dirichlet, &|r| {
        2.0 / (2.0 * PI).sqrt() * (10f64.sqrt() - r.sqrt())
    })?;
    ctx.le("radial_oracles", "Au_k = f_k in ℝⁿ, u_k → 0 at infinity", e1.max(e2).max(e3), 0.0, 1e-8);

    let radii = [1f64.exp(), 2f64.exp(), 4f64.exp()];
    let vals = dirichlet_divergence_demo(&radii)?;
    let err = vals
        .iter()
        .zip(&radii)
        .map(|(v, r)| (v - 0.25 - 0.5 * r.ln()).abs())
        .fold(0.0, f64::max);
    ctx.le("dirichlet_divergence", "u_R tends to infinity pointwise", err, 0.0, 1e-8);

    let pr = DiracProblem::dipole(PlanePoint::new(-1.0, 0.0), PlanePoint::new(1.0, 0.0), 0.1)?;
    let sol = solve_dirac_plane(&pr, mesh, &SolverConfig::default())?;
    let u = sol.sample(pr.annulus_grid(0.1, 5.0))?;
    let scale = u.nodes().iter().map(|x| pr.superposition(x).abs()).fold(0.0, f64::max);
    let gap = singularity_gap(&u, &pr)?;
    ctx.le("dipole_pipeline", "u − Σ γ_i φ(x − a_i) ∈ L^∞(ℝⁿ)", gap / scale, 0.0, 0.02);
    let profile = gap_profile(&u, &pr, &[3.0, 3.5, 4.0, 4.5, 5.0], 0.5)?;
    let growth = profile.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
    ctx.le("gap_window", "|u_k − Σ γ_i φ_k(x − a_i)| ≤ C", growth, 0.0, 0.0);

    let ks: Vec<f64> = (0..7).map(|j| 4.0 * 2f64.powi(j)).collect();
    let w = weighted_lq_check(2.0, 3, 2.0, 1.0, 0.1, &ks)?;
    let anchor = "∫_{|x|≤k} e^{−|x|²}|u_k|^q ≤ C ∫_{ℝⁿ} e^{−|x|²} φ^q";
    let max_left = w.left.iter().copied().fold(0.0, f64::max);
    ctx.le("weighted_lq_inequality", anchor, max_left, w.constant * w.right, 0.0);
    ctx.le("weighted_lq_uniform", anchor, w.final_change(), 0.0, 0.01);
    Ok(())
}
