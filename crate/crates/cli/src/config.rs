use std::path::{Path, PathBuf};

use serde::Deserialize;

use capsym::dirac_plane::BoundaryCondition;

/// Invalid invocation or configuration; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

/// Initial data family for the symmetrize, variation and heat commands.
#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Family {
    /// Random combination of the smooth, rough and quantized generators.
    #[default]
    Random,
    /// Random polynomial of degree at most three in the ambient coordinates.
    Smooth,
    /// Coordinate function `z`.
    Height,
    /// Indicator of a polar cap of the given area.
    Cap { area: f64 },
    /// Independent random membership with the given density.
    Noise { density: f64 },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionParams {
    pub family: Family,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatParams {
    pub family: Family,
    pub step: f64,
    pub steps: usize,
    pub constant: f64,
}

impl Default for HeatParams {
    fn default() -> Self {
        Self {
            family: Family::Smooth,
            step: 1e-3,
            steps: 50,
            constant: 0.0,
        }
    }
}

/// Right-hand side presets for `solve-sphere`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Preset {
    /// `ℓ(ℓ+1) Y` for the zonal harmonic `Y` of degree 1 or 2.
    Harmonic { degree: u32 },
    /// Antipodal geodesic bumps of mass ±1.
    BumpPair { radius: f64 },
    /// Plane dipole at `(±1, 0)` transported to the sphere.
    TransportedPlane { epsilon: f64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveParams {
    pub preset: Preset,
    pub p: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub rate_slack: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            preset: Preset::BumpPair { radius: 0.3 },
            p: 2.0,
            tolerance: 1e-10,
            max_iterations: 20_000,
            rate_slack: 0.05,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialParams {
    pub p: f64,
    pub n: u32,
    pub charge: f64,
    pub epsilon: f64,
    pub radius: f64,
    pub bc: BoundaryCondition,
}

impl Default for RadialParams {
    fn default() -> Self {
        Self {
            p: 2.0,
            n: 3,
            charge: 1.0,
            epsilon: 0.1,
            radius: 10.0,
            bc: BoundaryCondition::Decay,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiracParams {
    pub points: Vec<[f64; 2]>,
    pub charges: Vec<f64>,
    pub p: f64,
    pub n: u32,
    pub epsilon: f64,
    pub domain_radius: f64,
    pub grid_spacing: f64,
    /// Optional single-charge radial solve written alongside the plane grid.
    pub radial: Option<RadialParams>,
}

impl Default for DiracParams {
    fn default() -> Self {
        Self {
            points: vec![[-1.0, 0.0], [1.0, 0.0]],
            charges: vec![1.0, -1.0],
            p: 2.0,
            n: 2,
            epsilon: 0.1,
            domain_radius: 5.0,
            grid_spacing: 0.1,
            radial: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    /// Random trials per statistical check.
    pub samples: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { samples: 20 }
    }
}

/// Contents of the `--config` file. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub mesh_subdivisions: Option<u32>,
    pub output_dir: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
    pub symmetrize: FunctionParams,
    pub variation: FunctionParams,
    pub heat: HeatParams,
    pub solve_sphere: SolveParams,
    pub dirac: DiracParams,
    pub verify: VerifyParams,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Mesh,
    Symmetrize,
    Variation,
    Heat,
    SolveSphere,
    Dirac,
    Verify,
}

/// Fully resolved run: file values overridden by command-line flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub mesh_subdivisions: u32,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub tolerance_scale: f64,
    pub params: FileConfig,
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub subdivisions: Option<u32>,
    pub out: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
}

impl RunConfig {
    pub fn resolve(command: Command, file: FileConfig, flags: Overrides) -> Result<Self, UsageError> {
        let cfg = Self {
            command,
            mesh_subdivisions: flags.subdivisions.or(file.mesh_subdivisions).unwrap_or(4),
            seed: flags.seed.or(file.seed).unwrap_or(42),
            output_dir: flags
                .out
                .or_else(|| file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("capsym-out")),
            tolerance_scale: flags.tolerance_scale.or(file.tolerance_scale).unwrap_or(1.0),
            params: file,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.mesh_subdivisions > capsym::sphere_mesh::MAX_SUBDIVISIONS {
            return usage(format!(
                "subdivisions {} exceeds the limit {}",
                self.mesh_subdivisions,
                capsym::sphere_mesh::MAX_SUBDIVISIONS
            ));
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return usage("tolerance scale must be positive");
        }
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            return usage(format!("{} exists and is not a directory", self.output_dir.display()));
        }
        let p = &self.params;
        match self.command {
            Command::Symmetrize => check_family(&p.symmetrize.family),
            Command::Variation => check_family(&p.variation.family),
            Command::Heat => {
                check_family(&p.heat.family)?;
                if !(p.heat.step > 0.0) || p.heat.steps == 0 || p.heat.constant < 0.0 {
                    return usage("heat needs step > 0, steps ≥ 1 and constant ≥ 0");
                }
                Ok(())
            }
            Command::SolveSphere => {
                let s = &p.solve_sphere;
                if !(s.p > 1.0) || !(s.tolerance > 0.0) || !(0.0..1.0).contains(&s.rate_slack) {
                    return usage("solve_sphere needs p > 1, tolerance > 0 and rate_slack in [0, 1)");
                }
                match s.preset {
                    Preset::Harmonic { degree } if degree == 1 || degree == 2 => Ok(()),
                    Preset::Harmonic { degree } => usage(format!("harmonic degree {degree} must be 1 or 2")),
                    Preset::BumpPair { radius } if radius > 0.0 && radius < 1.5 => Ok(()),
                    Preset::BumpPair { .. } => usage("bump radius must lie in (0, 1.5)"),
                    Preset::TransportedPlane { epsilon } if epsilon > 0.0 && epsilon < 1.0 => Ok(()),
                    Preset::TransportedPlane { .. } => usage("transported-plane epsilon must lie in (0, 1)"),
                }
            }
            Command::Dirac => {
                let d = &p.dirac;
                if d.points.len() != d.charges.len() || d.points.is_empty() {
                    return usage("dirac needs one charge per point");
                }
                if !(d.grid_spacing > 0.0) {
                    return usage("dirac grid_spacing must be positive");
                }
                Ok(())
            }
            Command::Verify => {
                if p.verify.samples == 0 {
                    return usage("verify samples must be at least 1");
                }
                Ok(())
            }
            Command::Mesh => Ok(()),
        }
    }
}

fn check_family(f: &Family) -> Result<(), UsageError> {
    match *f {
        Family::Cap { area } if !(0.0..=4.0 * std::f64::consts::PI).contains(&area) => {
            usage(format!("cap area {area} outside [0, 4π]"))
        }
        Family::Noise { density } if !(0.0..=1.0).contains(&density) => {
            usage(format!("noise density {density} outside [0, 1]"))
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_flags() -> Overrides {
        Overrides {
            seed: None,
            subdivisions: None,
            out: None,
            tolerance_scale: None,
        }
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("seed = 1\nmesh_subdivisions = 2\n").unwrap();
        let cfg = RunConfig::resolve(Command::Mesh, file.clone(), no_flags()).unwrap();
        assert_eq!((cfg.seed, cfg.mesh_subdivisions), (1, 2));
        let flags = Overrides {
            seed: Some(9),
            ..no_flags()
        };
        let cfg = RunConfig::resolve(Command::Mesh, file, flags).unwrap();
        assert_eq!((cfg.seed, cfg.mesh_subdivisions, cfg.tolerance_scale), (9, 2, 1.0));
    }

    #[test]
    fn tagged_tables_parse() {
        let file: FileConfig = toml::from_str(
            "[symmetrize]\nfamily = { kind = \"noise\", density = 0.3 }\n\
             [solve_sphere]\npreset = { kind = \"transported-plane\", epsilon = 0.2 }\n",
        )
        .unwrap();
        assert_eq!(file.symmetrize.family, Family::Noise { density: 0.3 });
        assert_eq!(file.solve_sphere.preset, Preset::TransportedPlane { epsilon: 0.2 });
    }

    #[test]
    fn invalid_values_rejected() {
        let file: FileConfig = toml::from_str("[variation]\nfamily = { kind = \"cap\", area = 20.0 }\n").unwrap();
        assert!(RunConfig::resolve(Command::Variation, file, no_flags()).is_err());
        let flags = Overrides {
            subdivisions: Some(40),
            ..no_flags()
        };
        assert!(RunConfig::resolve(Command::Mesh, FileConfig::default(), flags).is_err());
        assert!(toml::from_str::<FileConfig>("[heat]\nstpe = 1.0\n").is_err());
    }
}
