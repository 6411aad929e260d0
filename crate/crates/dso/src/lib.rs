//! Principal eigenvalues of elliptic operators with drift on discrete
//! subdomains of a box, shape and drift optimization at desk scale, and
//! free-boundary diagnostics (optimality residual, Weiss energy, Almgren
//! frequency, density and perimeter figures).

pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod mask;
pub mod pde;
pub mod radial;
pub mod rng;
pub mod run;
pub mod shape;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField};
pub use grid::{make_grid, Grid};
pub use mask::{
    boundary_cells, mask_from_shape, measure, perimeter_estimate, DomainMask, ShapeSpec,
};
