//! The conformal p-Laplace problem on the sphere and the symmetrization
//! estimate of its solutions.
//!
//! For `n = 2` the conformal exponent is `p = 2` and the equation is the
//! surface Poisson problem `−Δu = f`. On a closed surface `f` must have
//! zero mean. Other exponents are solved by minimizing
//! `(1/p)∫|∇u|^p − ∫ f u` over zero-mean functions.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, norm, CsrMatrix};
use crate::rearrange::{decreasing_rearrangement, distribution_function};
use crate::sphere_mesh::{SphereFunction, SphereMesh};

/// Which representative of the solution class is returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    ZeroMean,
    Median,
}

/// `−div(|∇u|^{p−2} ∇u) = f` on the mesh sphere.
#[derive(Clone, Debug)]
pub struct SphereProblem<'m> {
    f: SphereFunction<'m>,
    p: f64,
    normalization: Normalization,
}

impl<'m> SphereProblem<'m> {
    /// Rejects data whose integral exceeds `1e−8 ‖f‖₁`.
    pub fn new(f: SphereFunction<'m>, p: f64, normalization: Normalization) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Domain(format!("exponent p = {p} must exceed 1")));
        }
        let l1 = f.l1_norm();
        let mean_mass = f.integral();
        if mean_mass.abs() > 1e-8 * l1 {
            return Err(Error::Precondition(format!(
                "right-hand side has integral {mean_mass:e}; a closed surface needs zero mean"
            )));
        }
        Ok(Self { f, p, normalization })
    }

    /// The linear conformal problem `p = 2`.
    pub fn poisson(f: SphereFunction<'m>) -> Result<Self> {
        Self::new(f, 2.0, Normalization::ZeroMean)
    }

    pub fn rhs(&self) -> &SphereFunction<'m> {
        &self.f
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }
}

#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize)]
pub struct SolverConfig {
    /// Bound on the relative weak-form (or first-order optimality) residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain("solver tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SphereSolution<'m> {
    pub u: SphereFunction<'m>,
    /// Relative residual `‖K(u) − Mf‖ / ‖Mf‖` of the returned iterate.
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve_sphere<'m>(problem: &SphereProblem<'m>, config: &SolverConfig) -> Result<SphereSolution<'m>> {
    config.validate()?;
    let mesh = problem.f.mesh();
    let mut rhs: Vec<f64> = problem
        .f
        .values()
        .iter()
        .zip(mesh.vertex_area())
        .map(|(f, a)| f * a)
        .collect();
    // makes the load exactly orthogonal to constants
    let drift = rhs.iter().sum::<f64>() / rhs.len() as f64;
    rhs.iter_mut().for_each(|b| *b -= drift);

    let mut sol = if problem.p == 2.0 {
        solve_linear(mesh, &rhs, config)?
    } else {
        solve_nonlinear(mesh, &rhs, problem.p, config)?
    };
    let shift = match problem.normalization {
        Normalization::ZeroMean => sol.u.mean(),
        Normalization::Median => weighted_median(&sol.u),
    };
    sol.u = sol.u.map(|v| v - shift);
    Ok(sol)
}

fn solve_linear<'m>(mesh: &'m SphereMesh, rhs: &[f64], config: &SolverConfig) -> Result<SphereSolution<'m>> {
    let k = mesh.stiffness();
    let mut x = vec![0.0; mesh.vertex_count()];
    let stats = conjugate_gradient(&k, rhs, &mut x, config.tolerance, config.max_iterations, true)?;
    let residual = weak_residual(&k, &x, rhs);
    if residual > config.tolerance {
        return Err(Error::Convergence {
            iterations: stats.iterations,
            residual,
        });
    }
    Ok(SphereSolution {
        u: SphereFunction::from_values_unchecked(mesh, x),
        residual,
        iterations: stats.iterations,
    })
}

fn weak_residual(k: &CsrMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    let b = norm(rhs);
    if b == 0.0 {
        return norm(&k.mul_vec(x));
    }
    let mut r = k.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri -= bi;
    }
    norm(&r) / b
}

/// Discrete p-Dirichlet energy with its gradient.
struct PEnergy<'a> {
    mesh: &'a SphereMesh,
    hats: Vec<[nalgebra::Vector3<f64>; 3]>,
    rhs: &'a [f64],
    p: f64,
}

impl PEnergy<'_> {
    fn gradients(&self, u: &[f64]) -> Vec<nalgebra::Vector3<f64>> {
        self.mesh.triangle_gradients(u)
    }

    fn value(&self, u: &[f64]) -> f64 {
        let dirichlet: f64 = self
            .gradients(u)
            .iter()
            .zip(self.mesh.triangle_area())
            .map(|(g, a)| a * g.norm().powf(self.p))
            .sum();
        dirichlet / self.p - u.iter().zip(self.rhs).map(|(x, b)| x * b).sum::<f64>()
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.rhs.iter().map(|b| -b).collect();
        let grads = self.gradients(u);
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let g = grads[t];
            let flux = self.mesh.triangle_area()[t] * g.norm().powf(self.p - 2.0);
            if !flux.is_finite() {
                continue;
            }
            for k in 0..3 {
                out[tri[k]] += flux * g.dot(&self.hats[t][k]);
            }
        }
        out
    }

    /// Lagged-diffusivity metric `|∇u|^{p−2}` floored relative to the
    /// largest gradient, so the preconditioner stays definite.
    fn metric(&self, u: &[f64]) -> CsrMatrix {
        let grads = self.gradients(u);
        let gmax = grads.iter().fold(0.0f64, |m, g| m.max(g.norm()));
        let floor = (1e-6 * gmax).max(f64::MIN_POSITIVE);
        let kappa: Vec<f64> = grads
            .iter()
            .map(|g| g.norm().max(floor).powf(self.p - 2.0))
            .collect();
        self.mesh.weighted_stiffness(&kappa)
    }
}

fn solve_nonlinear<'m>(
    mesh: &'m SphereMesh,
    rhs: &[f64],
    p: f64,
    config: &SolverConfig,
) -> Result<SphereSolution<'m>> {
    let n = mesh.vertex_count();
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(SphereSolution {
            u: SphereFunction::zero(mesh),
            residual: 0.0,
            iterations: 0,
        });
    }
    let energy = PEnergy {
        mesh,
        hats: mesh.hat_gradients(),
        rhs,
        p,
    };
    // start from the linear solution, optimally rescaled for exponent p
    let linear = solve_linear(mesh, rhs, &SolverConfig { tolerance: 1e-8, ..*config })?;
    let mut u = linear.u.into_values();
    let a: f64 = energy
        .gradients(&u)
        .iter()
        .zip(mesh.triangle_area())
        .map(|(g, w)| w * g.norm().powf(p))
        .sum();
    let b: f64 = u.iter().zip(rhs).map(|(x, r)| x * r).sum();
    if a > 0.0 && b > 0.0 {
        let s = (b / a).powf(1.0 / (p - 1.0));
        u.iter_mut().for_each(|x| *x *= s);
    }

    let mut e = energy.value(&u);
    let mut residual = f64::INFINITY;
    for it in 0..config.max_iterations {
        let mut g = energy.gradient(&u);
        let mean = g.iter().sum::<f64>() / n as f64;
        g.iter_mut().for_each(|x| *x -= mean);
        residual = norm(&g) / b_norm;
        if residual <= config.tolerance {
            return Ok(SphereSolution {
                u: SphereFunction::from_values_unchecked(mesh, u),
                residual,
                iterations: it,
            });
        }
        let metric = energy.metric(&u);
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut d = vec![0.0; n];
        if conjugate_gradient(&metric, &neg_g, &mut d, 1e-10, 10 * n, true).is_err() {
            d = neg_g;
        }
        let slope = directional(&g, &d);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(x, y)| x + alpha * y).collect();
            let et = energy.value(&trial);
            let armijo = et <= e + 1e-4 * alpha * slope;
            // once energy decrements fall below round-off, fall back to the
            // curvature condition on the directional derivative
            let flat = (et - e).abs() <= 1e-12 * e.abs().max(f64::MIN_POSITIVE)
                && directional(&energy.gradient(&trial), &d).abs() <= 0.9 * slope.abs();
            if armijo || flat {
                u = trial;
                e = et;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::Convergence {
        iterations: config.max_iterations,
        residual,
    })
}

fn directional(g: &[f64], d: &[f64]) -> f64 {
    g.iter().zip(d).map(|(a, b)| a * b).sum()
}

/// Area-weighted median `ū(|S²|/2)`: both `{u > m}` and `{u < m}` have
/// measure at most half the sphere.
pub fn weighted_median(u: &SphereFunction) -> f64 {
    decreasing_rearrangement(u).value_at(0.5 * u.mesh().total_area())
}

pub fn median_normalize<'m>(u: &SphereFunction<'m>) -> SphereFunction<'m> {
    let m = weighted_median(u);
    u.map(|v| v - m)
}

/// `∫_{u > 0} u^q = ∫₀^{|S²|} (ū⁺)^q ds`, evaluated on the rearrangement.
pub fn lq_norm_via_rearrangement(u: &SphereFunction, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::Domain(format!("exponent q = {q} must exceed 1")));
    }
    Ok(decreasing_rearrangement(u).integrate(|v| v.max(0.0).powf(q)))
}

/// `Σ area · (u⁺)^q` summed vertex by vertex.
pub fn lq_norm_direct(u: &SphereFunction, q: f64) -> f64 {
    u.values()
        .iter()
        .zip(u.mesh().vertex_area())
        .map(|(v, a)| a * v.max(0.0).powf(q))
        .sum()
}

/// Quantitative form of the decay chain for the positive part of `u`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    /// Positive levels of `u`, ascending.
    pub t_grid: Vec<f64>,
    /// `μ(t) = meas{u > t}` on the grid.
    pub mu: Vec<f64>,
    /// Forward differences `−Δμ/Δt`, reported only.
    pub neg_mu_prime: Vec<f64>,
    /// `μ(0⁺) = meas{u > 0}`.
    pub mu_zero: f64,
    pub f_l1: f64,
    /// `2π / ‖f‖₁`.
    pub c_rate: f64,
    pub rate_slack: f64,
    /// Levels with `μ(t)` above this mass are considered resolved.
    pub resolved_mass: f64,
    /// Largest exponential rate compatible with the resolved data.
    pub empirical_rate: f64,
    /// `max μ(t) / (μ(0⁺) e^{−(1−slack) C t}) − 1` over resolved levels.
    pub max_violation: f64,
    pub decay_holds: bool,
    pub lq_values: Vec<(f64, f64)>,
    /// `(A, B)` with `ū⁺(s) ≤ A + B |ln s|` on the small-s tail.
    pub log_fit: (f64, f64),
    /// `(1 + slack) ‖f‖₁ / (2π)`.
    pub slope_bound: f64,
    pub slope_holds: bool,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.decay_holds && self.slope_holds
    }
}

/// Runs the level-set decay estimate for `−Δu = f` with `u` median
/// normalized: `μ(t) ≤ μ(0⁺) exp(−(2π/‖f‖₁) t)` and
/// `ū⁺(s) = O(|ln s|)` with slope at most `‖f‖₁ / 2π`.
pub fn decay_estimate(u: &SphereFunction, f: &SphereFunction, slack: f64) -> Result<DecayReport> {
    let mesh = u.mesh();
    let half = 0.5 * mesh.total_area() + mesh.max_vertex_area();
    let mu_dist = distribution_function(u);
    let above = mu_dist.mass_above(0.0);
    let below = u.values().iter().zip(mesh.vertex_area()).filter(|(v, _)| **v < 0.0).map(|(_, a)| a).sum::<f64>();
    if above > half || below > half {
        return Err(Error::Precondition(format!(
            "u is not median normalized: |u>0| = {above}, |u<0| = {below}"
        )));
    }
    let f_l1 = f.l1_norm();
    let c_rate = if f_l1 > 0.0 { 2.0 * PI / f_l1 } else { f64::INFINITY };
    let resolved_mass = 10.0 * mesh.max_vertex_area();

    let levels: Vec<(f64, f64)> = mu_dist.breakpoints().iter().copied().filter(|&(t, _)| t > 0.0).collect();
    let t_grid: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let mu: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let neg_mu_prime: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[0].1 - w[1].1) / (w[1].0 - w[0].0))
        .collect();

    let rate = (1.0 - slack) * c_rate;
    let mut max_violation = f64::NEG_INFINITY;
    let mut empirical_rate = f64::INFINITY;
    // μ is constant on [t_k, t_{k+1}); test against the bound at the right end
    let mut prev_mu = above;
    for &(t, m) in levels.iter() {
        if prev_mu >= resolved_mass && above > 0.0 {
            let bound = above * (-rate * t).exp();
            max_violation = max_violation.max(prev_mu / bound - 1.0);
            if prev_mu < above {
                empirical_rate = empirical_rate.min((above / prev_mu).ln() / t);
            }
        }
        prev_mu = m;
    }
    if max_violation == f64::NEG_INFINITY {
        max_violation = 0.0;
    }
    let decay_holds = max_violation <= 0.0;

    let lq_values = [2.0, 4.0, 8.0]
        .iter()
        .map(|&q| Ok((q, lq_norm_via_rearrangement(u, q)?)))
        .collect::<Result<Vec<_>>>()?;

    let (log_fit, slope_bound) = log_tail_fit(u, resolved_mass, above, f_l1, slack);
    let slope_holds = f_l1 == 0.0 || log_fit.1 <= slope_bound;

    Ok(DecayReport {
        t_grid,
        mu,
        neg_mu_prime,
        mu_zero: above,
        f_l1,
        c_rate,
        rate_slack: slack,
        resolved_mass,
        empirical_rate,
        max_violation,
        decay_holds,
        lq_values,
        log_fit,
        slope_bound,
        slope_holds,
    })
}

/// Least-squares slope of `ū⁺` against `|ln s|` on `s ∈ [s_lo, min(μ₀, 1)/2]`,
/// with the intercept raised until the line dominates every sample.
fn log_tail_fit(u: &SphereFunction, s_lo: f64, mu_zero: f64, f_l1: f64, slack: f64) -> ((f64, f64), f64) {
    let slope_bound = (1.0 + slack) * f_l1 / (2.0 * PI);
    let s_hi = 0.5 * mu_zero.min(1.0);
    let profile = decreasing_rearrangement(u);
    let pts: Vec<(f64, f64)> = profile
        .segments()
        .map(|(_, end, v)| (end, v))
        .filter(|&(s, v)| s >= s_lo && s <= s_hi && v > 0.0)
        .map(|(s, v)| (s.ln().abs(), v))
        .collect();
    if pts.len() < 2 {
        return ((0.0, 0.0), slope_bound);
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = pts.iter().map(|(x, y)| y - slope * x).fold(f64::NEG_INFINITY, f64::max);
    ((intercept, slope), slope_bound)
}

/// `‖u⁺‖_{L^q}` of the median-normalized solution per unit `‖f‖₁`.
pub fn lq_bound_ratio(u: &SphereFunction, f: &SphereFunction, q: f64) -> Result<f64> {
    let norm_q = lq_norm_via_rearrangement(&median_normalize(u), q)?.powf(1.0 / q);
    Ok(norm_q / f.l1_norm())
}
