//! Polar-cap symmetrization on the 2-sphere, total variation and perimeter
//! with the coarea and isoperimetric laws, and p-Laplace estimates on the
//! sphere and in the plane.

pub mod dirac_plane;
pub mod error;
pub mod geometric_measure;
pub mod linalg;
pub mod pde_sphere;
pub mod quadrature;
pub mod rearrange;
pub mod report;
pub mod samples;
pub mod sphere_mesh;

pub use error::{Error, Result};
pub use sphere_mesh::{
    build_icosphere, cap_area, cap_colatitude, cap_perimeter, CellSet, PlaneFunction, PlanePoint,
    SphereFunction, SphereMesh, SpherePoint,
};
