use std::io::Write;

use serde::Serialize;

use super::fundamental::{charge_scale, fundamental_solution, unit_sphere_area};
use crate::error::{Error, Result};
use crate::quadrature::{geomspace, GaussLegendre};

/// Radially symmetric source at the origin.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum RadialDensity {
    /// `c(1 − (r/ε)²)²` on `r < ε` with total mass `charge`.
    Bump { charge: f64, radius: f64 },
    /// `height · χ_{B(radius)}`.
    Ball { height: f64, radius: f64 },
}

impl RadialDensity {
    pub fn support(&self) -> f64 {
        match *self {
            Self::Bump { radius, .. } | Self::Ball { radius, .. } => radius,
        }
    }

    pub fn density(&self, r: f64, n: u32) -> f64 {
        match *self {
            Self::Bump { charge, radius } => {
                if r >= radius {
                    return 0.0;
                }
                let s = r / radius;
                charge * bump_normalizer(radius, n) * (1.0 - s * s).powi(2)
            }
            Self::Ball { height, radius } => {
                if r < radius {
                    height
                } else {
                    0.0
                }
            }
        }
    }
}

/// `c` with `∫ c(1 − |x/ε|²)² dx = 1` in `ℝⁿ`.
pub fn bump_normalizer(radius: f64, n: u32) -> f64 {
    let nf = n as f64;
    let moment = 1.0 / nf - 2.0 / (nf + 2.0) + 1.0 / (nf + 4.0);
    1.0 / (unit_sphere_area(n) * radius.powi(n as i32) * moment)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `u → 0` at infinity, imposed through the exact exterior profile.
    Decay,
    /// `u(R) = 0`.
    Dirichlet,
}

/// Radial solution of `−div(|∇u|^{p−2}∇u) = ρ(|x|)` on `B(R)` or `ℝⁿ`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub p: f64,
    pub n: u32,
    pub density: RadialDensity,
    pub radius: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    /// `Q(r)`: source mass inside radius `r`.
    pub q: Vec<f64>,
    #[serde(skip)]
    rule: GaussLegendre,
}

const GRID_POINTS: usize = 600;

pub fn solve_radial(
    p: f64,
    n: u32,
    charge: f64,
    epsilon: f64,
    radius: f64,
    bc: BoundaryCondition,
) -> Result<RadialSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("mollifier radius {epsilon} must be positive")));
    }
    solve_radial_density(p, n, RadialDensity::Bump { charge, radius: epsilon }, radius, bc)
}

pub fn solve_radial_density(
    p: f64,
    n: u32,
    density: RadialDensity,
    radius: f64,
    bc: BoundaryCondition,
) -> Result<RadialSolution> {
    let phi = fundamental_solution(p, n)?;
    let support = density.support();
    if !(support > 0.0 && support < radius && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "source radius {support} must lie in (0, R) with R = {radius}"
        )));
    }
    let mut r = vec![0.0];
    r.extend(geomspace(support / 10.0, radius, GRID_POINTS));
    r.push(support);
    r.sort_by(f64::total_cmp);
    r.dedup();

    let mut sol = RadialSolution {
        p,
        n,
        density,
        radius,
        u: vec![0.0; r.len()],
        q: vec![0.0; r.len()],
        r,
        rule: GaussLegendre::new(8),
    };
    for k in 1..sol.r.len() {
        sol.q[k] = sol.q[k - 1] + sol.shell_mass(sol.r[k - 1], sol.r[k]);
    }
    let mass = *sol.q.last().expect("grid");
    let boundary = match bc {
        BoundaryCondition::Dirichlet => 0.0,
        BoundaryCondition::Decay if mass == 0.0 => 0.0,
        BoundaryCondition::Decay if p < n as f64 => charge_scale(mass, p) * phi.value(radius),
        BoundaryCondition::Decay => {
            return Err(Error::Unsupported(format!(
                "no decaying radial solution for p = {p} ≥ n = {n} with nonzero charge"
            )))
        }
    };
    let last = sol.r.len() - 1;
    sol.u[last] = boundary;
    for k in (1..=last).rev() {
        sol.u[k - 1] = sol.u[k] - sol.integrate_slope(k - 1, sol.r[k - 1], sol.r[k]);
    }
    Ok(sol)
}

impl RadialSolution {
    fn shell_mass(&self, a: f64, b: f64) -> f64 {
        let area = unit_sphere_area(self.n);
        let n = self.n;
        self.rule
            .integrate(a, b, |s| self.density.density(s, n) * area * s.powi(n as i32 - 1))
    }

    /// `Q(s)` for `s` in grid cell `k`.
    fn mass_inside(&self, k: usize, s: f64) -> f64 {
        if self.r[k] >= self.density.support() {
            return self.q[k];
        }
        self.q[k] + self.shell_mass(self.r[k], s)
    }

    fn slope(&self, k: usize, s: f64) -> f64 {
        let q = self.mass_inside(k, s);
        if q == 0.0 {
            return 0.0;
        }
        let flux = q.abs() / (unit_sphere_area(self.n) * s.powi(self.n as i32 - 1));
        -q.signum() * flux.powf(1.0 / (self.p - 1.0))
    }

    /// `∫_a^b u′` with `[a, b]` inside grid cell `k`.
    fn integrate_slope(&self, k: usize, a: f64, b: f64) -> f64 {
        self.rule.integrate(a, b, |s| self.slope(k, s))
    }

    fn cell_of(&self, s: f64) -> usize {
        self.r.partition_point(|&x| x <= s).saturating_sub(1).min(self.r.len() - 2)
    }

    /// `u(s)` for `0 ≤ s ≤ R`, integrating the slope from the grid node above.
    pub fn value_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.radius);
        let k = self.cell_of(s);
        self.u[k + 1] - self.integrate_slope(k, s, self.r[k + 1])
    }

    /// `u′(s)` from the flux law.
    pub fn derivative_at(&self, s: f64) -> f64 {
        self.slope(self.cell_of(s), s)
    }

    pub fn center_value(&self) -> f64 {
        self.u[0]
    }

    /// `∫_{B(R)} w(|x|) F(u(|x|)) dx` by Gauss-Legendre on each grid cell.
    pub fn integrate_radial<W: Fn(f64) -> f64, F: Fn(f64) -> f64>(&self, weight: W, f: F) -> f64 {
        let area = unit_sphere_area(self.n);
        let mut acc = 0.0;
        for k in 0..self.r.len() - 1 {
            let (a, b) = (self.r[k], self.r[k + 1]);
            let top = self.u[k + 1];
            acc += self.rule.integrate(a, b, |s| {
                let u = top - self.integrate_slope(k, s, b);
                weight(s) * f(u) * s.powi(self.n as i32 - 1)
            });
        }
        area * acc
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,u,q")?;
        for ((r, u), q) in self.r.iter().zip(&self.u).zip(&self.q) {
            writeln!(w, "{r},{u},{q}")?;
        }
        Ok(())
    }
}

/// Center values `u_R(0)` of the Dirichlet problems `−Δu = χ_{B(1)}` in
/// `B(R) ⊂ ℝ²`; they grow like `1/4 + ln(R)/2`.
pub fn dirichlet_divergence_demo(radii: &[f64]) -> Result<Vec<f64>> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("radii must be increasing".into()));
    }
    radii
        .iter()
        .map(|&radius| {
            if !(radius > 1.0) {
                return Err(Error::Domain(format!("radius {radius} must exceed 1")));
            }
            let ball = RadialDensity::Ball { height: 1.0, radius: 1.0 };
            Ok(solve_radial_density(2.0, 2, ball, radius, BoundaryCondition::Dirichlet)?.center_value())
        })
        .collect()
}

/// Dirichlet radial solutions on growing balls against the weighted
/// majorant `∫ e^{−|x|²} φ^q`.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedLqReport {
    pub p: f64,
    pub n: u32,
    pub q: f64,
    pub ks: Vec<f64>,
    /// `∫_{|x|≤k} e^{−|x|²}|u_k|^q`.
    pub left: Vec<f64>,
    /// `∫_{ℝⁿ} e^{−|x|²} φ^q`.
    pub right: f64,
    /// `max |u_k| / φ` over the grid, per `k`.
    pub c_dom: Vec<f64>,
    /// `max_k C_dom^q`.
    pub constant: f64,
    pub holds: bool,
    /// `|left_{k+1} − left_k| / left_k` for consecutive radii.
    pub changes: Vec<f64>,
}

impl WeightedLqReport {
    pub fn final_change(&self) -> f64 {
        self.changes.last().copied().unwrap_or(0.0)
    }
}

pub fn weighted_lq_check(
    p: f64,
    n: u32,
    q: f64,
    charge: f64,
    epsilon: f64,
    ks: &[f64],
) -> Result<WeightedLqReport> {
    let nf = n as f64;
    if !(p < nf) {
        return Err(Error::Domain(format!("requires p < n, got p = {p}, n = {n}")));
    }
    if !(q > p - 1.0) {
        return Err(Error::Domain(format!("requires q > p − 1, got q = {q}")));
    }
    let phi = fundamental_solution(p, n)?;
    let beta = q * phi.exponent() + nf;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("∫ e^(−r²) φ^q diverges for q = {q}")));
    }
    let right = unit_sphere_area(n) * phi.constant.abs().powf(q) * weighted_moment(beta);

    let mut left = Vec::with_capacity(ks.len());
    let mut c_dom = Vec::with_capacity(ks.len());
    for &k in ks {
        let sol = solve_radial(p, n, charge, epsilon, k, BoundaryCondition::Dirichlet)?;
        left.push(sol.integrate_radial(|r| (-r * r).exp(), |u| u.abs().powf(q)));
        let ratio = sol
            .r
            .iter()
            .zip(&sol.u)
            .filter(|(r, _)| **r > 0.0)
            .map(|(r, u)| u.abs() / phi.value(*r))
            .fold(0.0, f64::max);
        c_dom.push(ratio);
    }
    let constant = c_dom.iter().fold(0.0f64, |m, c| m.max(c.powf(q)));
    let holds = left.iter().all(|l| *l <= constant * right * (1.0 + 1e-12));
    let changes = left
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { (w[1] - w[0]).abs() / w[0] })
        .collect();
    Ok(WeightedLqReport {
        p,
        n,
        q,
        ks: ks.to_vec(),
        left,
        right,
        c_dom,
        constant,
        holds,
        changes,
    })
}

/// `∫₀^∞ e^{−r²} r^{β−1} dr` by quadrature on a geometric grid, with the
/// power singularity at the origin integrated in closed form.
fn weighted_moment(beta: f64) -> f64 {
    let rule = GaussLegendre::new(16);
    let head = 1e-6f64;
    let mut acc = head.powf(beta) / beta;
    let grid = geomspace(head, 12.0, 400);
    for w in grid.windows(2) {
        acc += rule.integrate(w[0], w[1], |r| (-r * r).exp() * r.powf(beta - 1.0));
    }
    acc
}
