use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Surface area `nω_n` of the unit sphere in `ℝⁿ`.
pub fn unit_sphere_area(n: u32) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n - 2) as f64 * unit_sphere_area(n - 2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Power,
    Log,
}

/// `φ = C|x|^{(p−n)/(p−1)}` or, for `p = n`, `φ = C ln(1/|x|)`, normalized
/// so that `−div(|∇φ|^{p−2}∇φ) = δ`.
///
/// `φ` is decreasing in `|x|` on every branch. For `p > n` the constant is
/// negative and `φ(0) = 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FundamentalSolution {
    pub p: f64,
    pub n: u32,
    pub constant: f64,
    pub branch: Branch,
}

pub fn fundamental_solution(p: f64, n: u32) -> Result<FundamentalSolution> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("exponent p = {p} must exceed 1")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    let area = unit_sphere_area(n);
    let nf = n as f64;
    let (constant, branch) = if p == nf {
        (area.powf(-1.0 / (nf - 1.0)), Branch::Log)
    } else {
        let magnitude = (p - 1.0) / (nf - p).abs() * area.powf(-1.0 / (p - 1.0));
        (if p < nf { magnitude } else { -magnitude }, Branch::Power)
    };
    Ok(FundamentalSolution { p, n, constant, branch })
}

impl FundamentalSolution {
    /// Radial exponent `(p − n)/(p − 1)`; zero on the log branch.
    pub fn exponent(&self) -> f64 {
        match self.branch {
            Branch::Log => 0.0,
            Branch::Power => (self.p - self.n as f64) / (self.p - 1.0),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.branch {
            Branch::Log => -self.constant * r.ln(),
            Branch::Power => self.constant * r.powf(self.exponent()),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self.branch {
            Branch::Log => -self.constant / r,
            Branch::Power => {
                let a = self.exponent();
                self.constant * a * r.powf(a - 1.0)
            }
        }
    }

    /// Outward flux `−|φ′|^{p−2}φ′ · nω_n r^{n−1}` through the sphere of
    /// radius `r`; identically one.
    pub fn flux(&self, r: f64) -> f64 {
        let d = self.derivative(r);
        -d.signum() * d.abs().powf(self.p - 1.0) * unit_sphere_area(self.n) * r.powi(self.n as i32 - 1)
    }

    /// Profile for charge `γ`: `sign(γ)|γ|^{1/(p−1)} φ`.
    pub fn scaled_value(&self, charge: f64, r: f64) -> f64 {
        charge_scale(charge, self.p) * self.value(r)
    }
}

/// `sign(γ)|γ|^{1/(p−1)}`.
pub fn charge_scale(charge: f64, p: f64) -> f64 {
    charge.signum() * charge.abs().powf(1.0 / (p - 1.0))
}
