//! Uniform Cartesian grid over a rectangle.
//!
//! Conventions used everywhere in this crate:
//!
//! * the grid has `n[a]` *cells* per axis and `n[a] + 1` *node* lines per
//!   axis (nodes sit on cell corners);
//! * node and cell lists are ordered row-major with x fastest
//!   (lexicographic in `(j, i)`);
//! * a node is an *interior node* of a cell mask iff all of its adjacent
//!   cells exist and belong to the mask — unknowns of every discrete
//!   operator live on interior nodes, all other nodes carry the value 0
//!   (extension by zero).

use crate::error::{Error, Result};

pub const MIN_CELLS_PER_AXIS: usize = 4;
pub const DEFAULT_NODE_CAP: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: [usize; 2],
    h: [f64; 2],
    origin: [f64; 2],
}

/// `make_grid`: validated constructor for [`Grid`].
pub fn make_grid(n: [usize; 2], extent: [f64; 2], origin: [f64; 2]) -> Result<Grid> {
    Grid::new(n, extent, origin)
}

impl Grid {
    pub fn new(n: [usize; 2], extent: [f64; 2], origin: [f64; 2]) -> Result<Self> {
        for axis in 0..2 {
            if n[axis] < MIN_CELLS_PER_AXIS {
                return Err(Error::AxisCountBelowMinimum {
                    axis,
                    count: n[axis],
                    min: MIN_CELLS_PER_AXIS,
                });
            }
            if !(extent[axis] > 0.0) || !extent[axis].is_finite() {
                return Err(Error::NonPositiveExtent {
                    axis,
                    value: extent[axis],
                });
            }
        }
        let nodes = (n[0] + 1) * (n[1] + 1);
        if nodes > DEFAULT_NODE_CAP {
            return Err(Error::NodeCountExceedsCap {
                nodes,
                cap: DEFAULT_NODE_CAP,
            });
        }
        let h = [extent[0] / n[0] as f64, extent[1] / n[1] as f64];
        Ok(Self { n, h, origin })
    }

    pub fn dim(&self) -> usize {
        2
    }

    /// Cells per axis.
    pub fn cells(&self) -> [usize; 2] {
        self.n
    }

    /// Nodes per axis (`cells + 1`).
    pub fn nodes(&self) -> [usize; 2] {
        [self.n[0] + 1, self.n[1] + 1]
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 2] {
        [self.h[0] * self.n[0] as f64, self.h[1] * self.n[1] as f64]
    }

    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn node_count(&self) -> usize {
        (self.n[0] + 1) * (self.n[1] + 1)
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1]
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n[0] && j < self.n[1]);
        j * self.n[0] + i
    }

    #[inline]
    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n[0], idx / self.n[0])
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.n[0] && j <= self.n[1]);
        j * (self.n[0] + 1) + i
    }

    #[inline]
    pub fn node_coords(&self, idx: usize) -> (usize, usize) {
        (idx % (self.n[0] + 1), idx / (self.n[0] + 1))
    }

    pub fn node_position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
        ]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h[0],
            self.origin[1] + (j as f64 + 0.5) * self.h[1],
        ]
    }

    /// True if `other` describes the same lattice (exact comparison; grids
    /// are built from the same inputs or they are not the same grid).
    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }

    /// Check that `fine` refines `self` by exactly a factor of two per axis.
    pub fn is_refinement_of(fine: &Grid, coarse: &Grid) -> bool {
        fine.n[0] == 2 * coarse.n[0]
            && fine.n[1] == 2 * coarse.n[1]
            && fine.origin == coarse.origin
            && (fine.extent()[0] - coarse.extent()[0]).abs() <= 1e-12 * coarse.extent()[0]
            && (fine.extent()[1] - coarse.extent()[1]).abs() <= 1e-12 * coarse.extent()[1]
    }
}
