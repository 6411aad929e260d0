//! JSON run configuration: schema, validation, defaults.
//!
//! Unknown keys are rejected. Every run echoes its fully resolved
//! configuration into the output directory as `resolved_config.json`,
//! which is sufficient to reproduce the run bit for bit.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::io::{read_fld_file, read_msk_file};
use crate::mask::{mask_from_shape, measure, DomainMask, ShapeSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_TOL_LAMBDA: f64 = 1e-8;
pub const DEFAULT_EIG_TOL: f64 = 1e-8;
pub const DEFAULT_GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eig,
    OptimizeShape,
    OptimizeDrift,
    Joint,
    Diagnose,
    Radial,
    Golden,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "eig" => Command::Eig,
            "optimize-shape" => Command::OptimizeShape,
            "optimize-drift" => Command::OptimizeDrift,
            "joint" => Command::Joint,
            "diagnose" => Command::Diagnose,
            "radial" => Command::Radial,
            "golden" => Command::Golden,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::OptimizeShape => "optimize-shape",
            Command::OptimizeDrift => "optimize-drift",
            Command::Joint => "joint",
            Command::Diagnose => "diagnose",
            Command::Radial => "radial",
            Command::Golden => "golden",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: [usize; 2],
    pub extent: [f64; 2],
    #[serde(default)]
    pub origin: [f64; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: [64, 64],
            extent: [1.0, 1.0],
            origin: [0.0, 0.0],
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n, self.extent, self.origin)
    }
}

/// Shape descriptor in configuration files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum ShapeConfig {
    Full,
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
    Union {
        a: Box<ShapeConfig>,
        b: Box<ShapeConfig>,
    },
    Difference {
        a: Box<ShapeConfig>,
        b: Box<ShapeConfig>,
    },
    FromFile {
        file: PathBuf,
    },
}

impl ShapeConfig {
    pub fn build(&self, grid: &Grid, base: &Path) -> Result<DomainMask> {
        match self {
            ShapeConfig::Full => mask_from_shape(grid, &ShapeSpec::Full),
            ShapeConfig::Rectangle { min, max } => mask_from_shape(
                grid,
                &ShapeSpec::Rectangle {
                    min: *min,
                    max: *max,
                },
            ),
            ShapeConfig::Disk { center, radius } => mask_from_shape(
                grid,
                &ShapeSpec::Disk {
                    center: *center,
                    radius: *radius,
                },
            ),
            ShapeConfig::Annulus {
                center,
                inner,
                outer,
            } => mask_from_shape(
                grid,
                &ShapeSpec::Annulus {
                    center: *center,
                    inner: *inner,
                    outer: *outer,
                },
            ),
            ShapeConfig::Union { a, b } => {
                let spec_a = a.to_spec(base)?;
                let spec_b = b.to_spec(base)?;
                mask_from_shape(grid, &ShapeSpec::Union(Box::new(spec_a), Box::new(spec_b)))
            }
            ShapeConfig::Difference { a, b } => {
                let spec_a = a.to_spec(base)?;
                let spec_b = b.to_spec(base)?;
                mask_from_shape(
                    grid,
                    &ShapeSpec::Difference(Box::new(spec_a), Box::new(spec_b)),
                )
            }
            ShapeConfig::FromFile { file } => {
                let mask = read_msk_file(&base.join(file))?;
                if !mask.grid().same_as(grid) {
                    return Err(Error::GridMismatch(format!(
                        "mask file {} disagrees with the configured grid",
                        file.display()
                    )));
                }
                Ok(mask)
            }
        }
    }

    /// Shape descriptor for use inside unions and differences; file-backed
    /// masks cannot appear there (they are cell sets, not descriptors).
    fn to_spec(&self, base: &Path) -> Result<ShapeSpec> {
        Ok(match self {
            ShapeConfig::Full => ShapeSpec::Full,
            ShapeConfig::Rectangle { min, max } => ShapeSpec::Rectangle {
                min: *min,
                max: *max,
            },
            ShapeConfig::Disk { center, radius } => ShapeSpec::Disk {
                center: *center,
                radius: *radius,
            },
            ShapeConfig::Annulus {
                center,
                inner,
                outer,
            } => ShapeSpec::Annulus {
                center: *center,
                inner: *inner,
                outer: *outer,
            },
            ShapeConfig::Union { a, b } => {
                ShapeSpec::Union(Box::new(a.to_spec(base)?), Box::new(b.to_spec(base)?))
            }
            ShapeConfig::Difference { a, b } => {
                ShapeSpec::Difference(Box::new(a.to_spec(base)?), Box::new(b.to_spec(base)?))
            }
            ShapeConfig::FromFile { file } => {
                return Err(Error::Config {
                    path: file.display().to_string(),
                    message: "file-backed masks cannot be combined with union/difference".into(),
                })
            }
        })
    }
}

/// Exactly one drift specification per run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum DriftConfig {
    /// No drift: plain Laplacian.
    #[default]
    Zero,
    /// Explicit bounded field, one FLD1 file per component.
    Field { files: [PathBuf; 2], tau: f64 },
    /// Gradient drift `V = grad Phi` with the potential from an FLD1 file.
    GradPhi { file: PathBuf },
    /// The optimal drift of strength tau, found by the fixed point.
    Optimal { tau: f64 },
}

/// Resolved drift data for a run.
pub enum DriftData {
    Zero,
    Field { v: VectorField, tau: f64 },
    GradPhi { phi: ScalarField },
    Optimal { tau: f64 },
}

impl DriftConfig {
    pub fn load(&self, grid: &Grid, base: &Path) -> Result<DriftData> {
        Ok(match self {
            DriftConfig::Zero => DriftData::Zero,
            DriftConfig::Field { files, tau } => {
                let vx = read_fld_file(&base.join(&files[0]))?;
                let vy = read_fld_file(&base.join(&files[1]))?;
                if !vx.grid().same_as(grid) || !vy.grid().same_as(grid) {
                    return Err(Error::GridMismatch(
                        "drift component grids disagree with the configured grid".into(),
                    ));
                }
                DriftData::Field {
                    v: VectorField::from_components(vec![vx, vy])?,
                    tau: *tau,
                }
            }
            DriftConfig::GradPhi { file } => {
                let phi = read_fld_file(&base.join(file))?;
                if !phi.grid().same_as(grid) {
                    return Err(Error::GridMismatch(
                        "potential grid disagrees with the configured grid".into(),
                    ));
                }
                DriftData::GradPhi { phi }
            }
            DriftConfig::Optimal { tau } => DriftData::Optimal { tau: *tau },
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol_lambda")]
    pub tol_lambda: f64,
    #[serde(default = "default_eig_tol")]
    pub eig_tol: f64,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
}

fn default_tol_lambda() -> f64 {
    DEFAULT_TOL_LAMBDA
}
fn default_eig_tol() -> f64 {
    DEFAULT_EIG_TOL
}
fn default_grad_tol() -> f64 {
    DEFAULT_GRAD_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_lambda: DEFAULT_TOL_LAMBDA,
            eig_tol: DEFAULT_EIG_TOL,
            grad_tol: DEFAULT_GRAD_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    pub d: usize,
    pub r: f64,
    pub tau: f64,
    #[serde(default = "default_radial_nodes")]
    pub n_nodes: usize,
}

fn default_radial_nodes() -> usize {
    4000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseInputs {
    pub u_file: PathBuf,
    pub mask_file: PathBuf,
    #[serde(default)]
    pub phi_file: Option<PathBuf>,
    /// The eigenvalue `lambda_m` of the computed solution.
    pub lambda: f64,
    #[serde(default)]
    pub tau: f64,
    /// Optional factor-2 refinement of `u_file` for the Lipschitz proxy.
    #[serde(default)]
    pub u_fine_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub grid: GridSpec,
    /// The box `D`; defaults to the whole grid rectangle.
    #[serde(default)]
    pub box_shape: Option<ShapeConfig>,
    /// The domain `Omega` for eig / optimize-drift; defaults to the box.
    #[serde(default)]
    pub domain_shape: Option<ShapeConfig>,
    #[serde(default)]
    pub drift: DriftConfig,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub radial: Option<RadialSpec>,
    #[serde(default)]
    pub inputs: Option<DiagnoseInputs>,
    #[serde(default)]
    pub heatmap: bool,
    #[serde(default)]
    pub penalty_start: Option<f64>,
    #[serde(default)]
    pub penalty_growth: Option<f64>,
    #[serde(default)]
    pub max_outer: Option<usize>,
}

impl RunConfig {
    /// Validate cross-field constraints that the schema cannot express.
    /// `base` is the directory configuration-relative paths resolve
    /// against.
    pub fn validate(&self, base: &Path) -> Result<()> {
        let grid = self.grid.build()?;
        match self.command {
            Command::OptimizeShape | Command::Joint => {
                let m = self.m.ok_or_else(|| Error::Config {
                    path: "m".into(),
                    message: "shape optimization requires a measure budget m".into(),
                })?;
                let box_mask = self
                    .box_shape
                    .clone()
                    .unwrap_or(ShapeConfig::Full)
                    .build(&grid, base)?;
                let box_measure = measure(&box_mask);
                if m >= box_measure {
                    return Err(Error::Config {
                        path: "m".into(),
                        message: format!("m = {} must be below the box measure {}", m, box_measure),
                    });
                }
            }
            Command::Radial | Command::Golden => {}
            Command::Diagnose => {
                let inputs = self.inputs.as_ref().ok_or_else(|| Error::Config {
                    path: "inputs".into(),
                    message: "diagnose requires inputs {u_file, mask_file, lambda}".into(),
                })?;
                for f in [&inputs.u_file, &inputs.mask_file] {
                    let p = base.join(f);
                    if !p.exists() {
                        return Err(Error::Config {
                            path: format!("inputs.{}", f.display()),
                            message: "referenced file does not exist".into(),
                        });
                    }
                }
            }
            _ => {}
        }
        if matches!(self.command, Command::Joint | Command::OptimizeDrift)
            && self.tau.is_none()
            && !matches!(self.drift, DriftConfig::Optimal { .. })
        {
            return Err(Error::Config {
                path: "tau".into(),
                message: "drift optimization requires tau".into(),
            });
        }
        // referenced drift files must exist and parse
        match &self.drift {
            DriftConfig::Field { files, .. } => {
                for f in files {
                    read_fld_file(&base.join(f))?;
                }
            }
            DriftConfig::GradPhi { file } => {
                read_fld_file(&base.join(file))?;
            }
            _ => {}
        }
        Ok(())
    }
}

fn friendly_serde_message(raw: &str) -> String {
    // serde says "unknown field `foo`, expected one of ..."; the contract
    // names these "unknown key" errors
    if let Some(rest) = raw.strip_prefix("unknown field ") {
        format!("unknown key {}", rest)
    } else {
        raw.to_string()
    }
}

/// Parse a UTF-8 JSON config file; unknown keys are rejected with the key
/// path in the message.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config {
        path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: friendly_serde_message(&e.to_string()),
    })?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    config.validate(&base)?;
    Ok(config)
}

/// Parse either a single config or a sweep (top-level JSON array of
/// configs, run as independent sub-runs).
pub enum Parsed {
    Single(RunConfig),
    Sweep(Vec<RunConfig>),
}

pub fn parse_config_or_sweep(path: &Path) -> Result<Parsed> {
    let text = std::fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    if trimmed.starts_with('[') {
        let configs: Vec<RunConfig> = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: friendly_serde_message(&e.to_string()),
        })?;
        for c in &configs {
            c.validate(&base)?;
        }
        Ok(Parsed::Sweep(configs))
    } else {
        parse_config(path).map(Parsed::Single)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(name: &str, text: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("dso-config-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn minimal_eig_config_fills_defaults() {
        let path = write_tmp(
            "minimal.json",
            r#"{ "command": "eig", "grid": { "n": [64, 64], "extent": [1.0, 1.0] } }"#,
        );
        let cfg = parse_config(&path).unwrap();
        assert_eq!(cfg.command, Command::Eig);
        assert_eq!(cfg.tolerances.tol_lambda, 1e-8);
        assert_eq!(cfg.tolerances.eig_tol, 1e-8);
        assert_eq!(cfg.seed, 0);
        assert!(matches!(cfg.drift, DriftConfig::Zero));
    }

    #[test]
    fn unknown_key_rejected() {
        let path = write_tmp(
            "unknown.json",
            r#"{ "command": "eig", "penalty_stratospheric": 1.0 }"#,
        );
        let err = parse_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key"), "{}", msg);
        assert!(msg.contains("penalty_stratospheric"), "{}", msg);
    }

    #[test]
    fn measure_budget_checked_against_box() {
        let path = write_tmp(
            "overfull.json",
            r#"{ "command": "optimize-shape", "grid": { "n": [32, 32], "extent": [1.0, 1.0] }, "m": 2.5 }"#,
        );
        let err = parse_config(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2.5") && msg.contains('1'), "{}", msg);
    }

    #[test]
    fn union_shape_builds() {
        let path = write_tmp(
            "union.json",
            r#"{ "command": "eig", "grid": { "n": [32, 32], "extent": [1.0, 1.0] },
                 "domain_shape": { "type": "union",
                   "a": { "type": "disk", "center": [0.3, 0.5], "radius": 0.2 },
                   "b": { "type": "disk", "center": [0.7, 0.5], "radius": 0.2 } } }"#,
        );
        let cfg = parse_config(&path).unwrap();
        let grid = cfg.grid.build().unwrap();
        let mask = cfg
            .domain_shape
            .unwrap()
            .build(&grid, Path::new("."))
            .unwrap();
        assert!(mask.cell_count_inside() > 0);
    }

    #[test]
    fn sweep_parses_as_array() {
        let path = write_tmp(
            "sweep.json",
            r#"[ { "command": "eig" }, { "command": "radial", "radial": { "d": 2, "r": 1.0, "tau": 0.0 } } ]"#,
        );
        match parse_config_or_sweep(&path).unwrap() {
            Parsed::Sweep(v) => assert_eq!(v.len(), 2),
            _ => panic!("expected sweep"),
        }
    }
}
