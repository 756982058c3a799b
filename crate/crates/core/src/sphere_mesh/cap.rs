//! Exact geometry of geodesic caps about the north pole.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPHERE_AREA: f64 = 4.0 * PI;

/// Area of the cap `{colatitude <= theta}`: `2π(1 − cos θ)`.
pub fn cap_area(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, π]")));
    }
    // 2(1 - cos θ) = 4 sin²(θ/2) avoids cancellation near the pole
    let s = (0.5 * theta).sin();
    Ok(4.0 * PI * s * s)
}

/// Inverse of [`cap_area`].
pub fn cap_colatitude(area: f64) -> Result<f64> {
    check_area(area)?;
    let s = (area / SPHERE_AREA).sqrt().min(1.0);
    Ok(2.0 * s.asin())
}

/// Sharp isoperimetric profile of the unit sphere: the boundary length of
/// a cap of the given area, `sqrt(area (4π − area))`.
pub fn cap_perimeter(area: f64) -> Result<f64> {
    check_area(area)?;
    Ok(cap_perimeter_unchecked(area))
}

pub(crate) fn cap_perimeter_unchecked(area: f64) -> f64 {
    let a = area.clamp(0.0, SPHERE_AREA);
    (a * (SPHERE_AREA - a)).sqrt()
}

fn check_area(area: f64) -> Result<()> {
    if !(0.0..=SPHERE_AREA).contains(&area) {
        return Err(Error::Domain(format!("area {area} outside [0, 4π]")));
    }
    Ok(())
}
