//! p-Laplace equations in `ℝⁿ` with Dirac right-hand sides: fundamental
//! solutions, radial mollified problems and the conformal plane pipeline.

mod fundamental;
mod plane;
mod radial;

pub use fundamental::{charge_scale, fundamental_solution, unit_sphere_area, Branch, FundamentalSolution};
pub use plane::{gap_profile, singularity_gap, solve_dirac_plane, write_plane_csv, DiracProblem, DiracSolution};
pub use radial::{
    bump_normalizer, dirichlet_divergence_demo, solve_radial, solve_radial_density, weighted_lq_check,
    BoundaryCondition, RadialDensity, RadialSolution, WeightedLqReport,
};
