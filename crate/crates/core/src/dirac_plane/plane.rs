use std::io::Write;

use super::fundamental::{fundamental_solution, FundamentalSolution};
use super::radial::bump_normalizer;
use crate::error::{Error, Result};
use crate::pde_sphere::{solve_sphere, SolverConfig, SphereProblem};
use crate::sphere_mesh::{
    conformal_transport_fn, stereographic_inverse, PlaneFunction, PlanePoint, SphereFunction, SphereMesh,
};

/// `−div(|∇u|^{p−2}∇u) = Σ γ_i δ_{a_i}` in `ℝⁿ`, with each Dirac replaced by a
/// unit-mass bump of radius `ε`.
#[derive(Clone, Debug)]
pub struct DiracProblem {
    points: Vec<PlanePoint>,
    charges: Vec<f64>,
    p: f64,
    n: u32,
    epsilon: f64,
    domain_radius: f64,
}

impl DiracProblem {
    pub fn new(
        points: Vec<PlanePoint>,
        charges: Vec<f64>,
        p: f64,
        n: u32,
        epsilon: f64,
        domain_radius: f64,
    ) -> Result<Self> {
        if points.len() != charges.len() || points.is_empty() {
            return Err(Error::Precondition(format!(
                "{} poles but {} charges",
                points.len(),
                charges.len()
            )));
        }
        if charges.iter().any(|g| !g.is_finite()) || points.iter().any(|a| !a.iter().all(|c| c.is_finite())) {
            return Err(Error::Precondition("non-finite pole data".into()));
        }
        if !(epsilon > 0.0 && domain_radius > epsilon) {
            return Err(Error::Domain(format!(
                "need 0 < ε < R, got ε = {epsilon}, R = {domain_radius}"
            )));
        }
        let min_gap = points
            .iter()
            .enumerate()
            .flat_map(|(i, a)| points[i + 1..].iter().map(move |b| (a - b).norm()))
            .fold(f64::INFINITY, f64::min);
        if min_gap == 0.0 {
            return Err(Error::Precondition("poles must be distinct".into()));
        }
        if epsilon >= 0.5 * min_gap {
            return Err(Error::Precondition(format!(
                "mollifier radius {epsilon} is not below half the pole separation {min_gap}"
            )));
        }
        let problem = Self {
            points,
            charges,
            p,
            n,
            epsilon,
            domain_radius,
        };
        if p > n as f64 && !problem.is_neutral() {
            return Err(Error::Precondition("charges must sum to zero when p > n".into()));
        }
        fundamental_solution(p, n)?;
        Ok(problem)
    }

    /// Two poles of opposite unit charge in the plane, conformal exponent.
    pub fn dipole(a1: PlanePoint, a2: PlanePoint, epsilon: f64) -> Result<Self> {
        Self::new(vec![a1, a2], vec![1.0, -1.0], 2.0, 2, epsilon, 5.0)
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn is_neutral(&self) -> bool {
        let total: f64 = self.charges.iter().sum();
        let scale: f64 = self.charges.iter().map(|g| g.abs()).sum();
        total.abs() <= 1e-12 * scale
    }

    pub fn translated(&self, shift: PlanePoint) -> Self {
        Self {
            points: self.points.iter().map(|a| a + shift).collect(),
            ..self.clone()
        }
    }

    fn fundamental(&self) -> FundamentalSolution {
        fundamental_solution(self.p, self.n).expect("validated at construction")
    }

    /// `Σ γ_i φ(x − a_i)` for the linear exponent `p = 2`.
    pub fn superposition(&self, x: &PlanePoint) -> f64 {
        let phi = self.fundamental();
        self.points
            .iter()
            .zip(&self.charges)
            .map(|(a, g)| phi.scaled_value(*g, (x - a).norm()))
            .sum()
    }

    /// Distance from `x` to the nearest pole.
    pub fn pole_distance(&self, x: &PlanePoint) -> f64 {
        self.points.iter().map(|a| (x - a).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Uniform grid with spacing `h` on `{|x| ≤ outer, dist(x, poles) ≥ 3ε}`.
    pub fn annulus_grid(&self, h: f64, outer: f64) -> Vec<PlanePoint> {
        let m = (outer / h).floor() as i64;
        let mut nodes = Vec::new();
        for j in -m..=m {
            for i in -m..=m {
                let x = PlanePoint::new(i as f64 * h, j as f64 * h);
                if x.norm() <= outer && self.pole_distance(&x) >= 3.0 * self.epsilon {
                    nodes.push(x);
                }
            }
        }
        nodes
    }
}

/// Sphere solution pulled back to the plane, shifted to vanish at infinity.
#[derive(Clone, Debug)]
pub struct DiracSolution<'m> {
    pub sphere: SphereFunction<'m>,
    /// Value at the north pole, the image of infinity.
    pub offset: f64,
    pub residual: f64,
}

impl DiracSolution<'_> {
    pub fn evaluate(&self, x: &PlanePoint, hint: usize) -> (f64, usize) {
        let mesh = self.sphere.mesh();
        let (v, h) = mesh.interpolate(self.sphere.values(), &stereographic_inverse(x), hint);
        (v - self.offset, h)
    }

    pub fn sample(&self, nodes: Vec<PlanePoint>) -> Result<PlaneFunction> {
        let mut hint = 0;
        let mut values = Vec::with_capacity(nodes.len());
        for x in &nodes {
            let (v, h) = self.evaluate(x, hint);
            hint = h;
            values.push(v);
        }
        PlaneFunction::new(nodes, values)
    }
}

/// Solves the conformal (`p = n = 2`) Dirac problem through the sphere:
/// mollify, transport by `λ · (g ∘ π)`, solve on `S²`, pull back.
pub fn solve_dirac_plane<'m>(
    problem: &DiracProblem,
    mesh: &'m SphereMesh,
    config: &SolverConfig,
) -> Result<DiracSolution<'m>> {
    if problem.p != 2.0 || problem.n != 2 {
        return Err(Error::Unsupported(format!(
            "plane pipeline covers p = n = 2 only, got p = {}, n = {}",
            problem.p, problem.n
        )));
    }
    if !problem.is_neutral() {
        return Err(Error::Unsupported(
            "charges with nonzero sum have no decaying solution for p = n".into(),
        ));
    }
    let eps = problem.epsilon;
    let c = bump_normalizer(eps, 2);
    let mut f = vec![0.0; mesh.vertex_count()];
    for (a, &gamma) in problem.points.iter().zip(&problem.charges) {
        if gamma == 0.0 {
            continue;
        }
        let bump = conformal_transport_fn(mesh, |x| {
            let s2 = (x - a).norm_squared() / (eps * eps);
            if s2 < 1.0 {
                c * (1.0 - s2).powi(2)
            } else {
                0.0
            }
        })?;
        let mass = bump.integral();
        if !(mass > 0.0) {
            return Err(Error::Precondition(format!(
                "mollifier of radius {eps} at ({}, {}) is not resolved by the mesh",
                a.x, a.y
            )));
        }
        for (fi, bi) in f.iter_mut().zip(bump.values()) {
            *fi += gamma * bi / mass;
        }
    }
    let rhs = SphereFunction::new(mesh, f)?;
    let sol = solve_sphere(&SphereProblem::poisson(rhs)?, config)?;
    let offset = sol.u.values()[mesh.north_pole()];
    Ok(DiracSolution {
        sphere: sol.u,
        offset,
        residual: sol.residual,
    })
}

fn check_grid(u: &PlaneFunction, problem: &DiracProblem) -> Result<()> {
    if let Some(x) = u.nodes().iter().find(|x| problem.pole_distance(x) < problem.epsilon) {
        return Err(Error::Precondition(format!(
            "grid node ({}, {}) lies within ε of a pole",
            x.x, x.y
        )));
    }
    Ok(())
}

/// `sup |u − Σ γ_i φ(x − a_i)|` over the grid.
pub fn singularity_gap(u: &PlaneFunction, problem: &DiracProblem) -> Result<f64> {
    check_grid(u, problem)?;
    Ok(u
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(x, v)| (v - problem.superposition(x)).abs())
        .fold(0.0, f64::max))
}

/// Gap restricted to shells `{R − width < |x| ≤ R}`, one entry per radius.
pub fn gap_profile(u: &PlaneFunction, problem: &DiracProblem, radii: &[f64], width: f64) -> Result<Vec<(f64, f64)>> {
    check_grid(u, problem)?;
    Ok(radii
        .iter()
        .map(|&r| {
            let gap = u
                .nodes()
                .iter()
                .zip(u.values())
                .filter(|(x, _)| x.norm() <= r && x.norm() > r - width)
                .map(|(x, v)| (v - problem.superposition(x)).abs())
                .fold(0.0, f64::max);
            (r, gap)
        })
        .collect())
}

/// Plane grid table: `x,y,u,gap`.
pub fn write_plane_csv<W: Write>(u: &PlaneFunction, problem: &DiracProblem, mut w: W) -> Result<()> {
    writeln!(w, "x,y,u,gap")?;
    for (x, v) in u.nodes().iter().zip(u.values()) {
        writeln!(w, "{},{},{},{}", x.x, x.y, v, v - problem.superposition(x))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_mesh::build_icosphere;

    fn dipole() -> DiracProblem {
        DiracProblem::dipole(PlanePoint::new(-1.0, 0.0), PlanePoint::new(1.0, 0.0), 0.1).unwrap()
    }

    fn rel_sup_error(u: &PlaneFunction, problem: &DiracProblem) -> f64 {
        let scale = u.nodes().iter().map(|x| problem.superposition(x).abs()).fold(0.0, f64::max);
        singularity_gap(u, problem).unwrap() / scale
    }

    #[test]
    fn validation() {
        let a = PlanePoint::new(0.0, 0.0);
        let b = PlanePoint::new(0.1, 0.0);
        assert!(matches!(DiracProblem::dipole(a, b, 0.1), Err(Error::Precondition(_))));
        assert!(matches!(DiracProblem::dipole(a, a, 0.01), Err(Error::Precondition(_))));
        assert!(DiracProblem::new(vec![a], vec![1.0, 2.0], 2.0, 2, 0.1, 5.0).is_err());
        assert!(matches!(
            DiracProblem::new(vec![a], vec![1.0], 3.0, 2, 0.1, 5.0),
            Err(Error::Precondition(_))
        ));
        let charged = DiracProblem::new(vec![a], vec![1.0], 2.0, 2, 0.1, 5.0).unwrap();
        let mesh = build_icosphere(2).unwrap();
        assert!(matches!(
            solve_dirac_plane(&charged, &mesh, &SolverConfig::default()),
            Err(Error::Unsupported(_))
        ));
        let cubic = DiracProblem::new(vec![a, b * 10.0], vec![1.0, -1.0], 3.0, 3, 0.1, 5.0).unwrap();
        assert!(matches!(
            solve_dirac_plane(&cubic, &mesh, &SolverConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn exact_field_has_zero_gap() {
        let pr = dipole();
        let grid = pr.annulus_grid(0.1, 5.0);
        let exact = PlaneFunction::from_fn(grid, |x| {
            ((x - pr.points()[1]).norm() / (x - pr.points()[0]).norm()).ln() / (2.0 * std::f64::consts::PI)
        })
        .unwrap();
        let gap = singularity_gap(&exact, &pr).unwrap();
        assert!(gap <= 1e-10);
        let shifted = singularity_gap(&exact.map(|v| v + 0.3), &pr).unwrap();
        assert!((shifted - gap - 0.3).abs() < 1e-12);
    }

    #[test]
    fn grid_near_poles_rejected() {
        let pr = dipole();
        let bad = PlaneFunction::new(vec![PlanePoint::new(-1.0, 0.05)], vec![0.0]).unwrap();
        assert!(matches!(singularity_gap(&bad, &pr), Err(Error::Precondition(_))));
    }

    #[test]
    fn dipole_pipeline() {
        let mesh = build_icosphere(5).unwrap();
        let pr = dipole();
        let sol = solve_dirac_plane(&pr, &mesh, &SolverConfig::default()).unwrap();
        let u = sol.sample(pr.annulus_grid(0.1, 5.0)).unwrap();
        let err = rel_sup_error(&u, &pr);
        assert!(err < 0.02, "{err}");
        let prof = gap_profile(&u, &pr, &[3.0, 3.5, 4.0, 4.5, 5.0], 0.5).unwrap();
        assert!(prof.windows(2).all(|w| w[1].1 <= w[0].1), "{prof:?}");
    }

    #[test]
    fn zero_charges_give_zero() {
        let mesh = build_icosphere(3).unwrap();
        let pr = DiracProblem::new(
            vec![PlanePoint::new(-1.0, 0.0), PlanePoint::new(1.0, 0.0)],
            vec![0.0, 0.0],
            2.0,
            2,
            0.1,
            5.0,
        )
        .unwrap();
        let sol = solve_dirac_plane(&pr, &mesh, &SolverConfig::default()).unwrap();
        assert!(sol.sphere.sup_norm() == 0.0 && sol.offset == 0.0);
    }

    #[test]
    fn translation_equivariance() {
        let mesh = build_icosphere(5).unwrap();
        let pr = dipole();
        let shift = PlanePoint::new(0.5, 0.5);
        let moved = pr.translated(shift);
        let cfg = SolverConfig::default();
        let a = solve_dirac_plane(&pr, &mesh, &cfg).unwrap();
        let b = solve_dirac_plane(&moved, &mesh, &cfg).unwrap();
        let grid = pr.annulus_grid(0.2, 3.0);
        let ua = a.sample(grid.clone()).unwrap();
        let ub = b.sample(grid.iter().map(|x| x + shift).collect()).unwrap();
        let scale = ua.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = ua.values().iter().zip(ub.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 0.01 * scale, "{diff} vs {scale}");
    }
}
