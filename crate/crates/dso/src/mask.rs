//! Cell masks: discrete stand-ins for the open subsets of the box.
//!
//! A mask marks cells, not nodes. A cell belongs to a shape iff its center
//! satisfies the shape descriptor (cell-center membership rule). Masks
//! model open cell unions only; there is no capacity bookkeeping on a
//! finite grid, so sets differing by thin or null pieces are simply
//! different cell sets here.

use crate::error::{Error, Result};
use crate::grid::Grid;
use std::sync::Arc;

/// Shape descriptors accepted by [`mask_from_shape`].
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
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
    Union(Box<ShapeSpec>, Box<ShapeSpec>),
    Difference(Box<ShapeSpec>, Box<ShapeSpec>),
    /// Entire grid rectangle.
    Full,
    /// Nothing.
    Empty,
}

impl ShapeSpec {
    fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            ShapeSpec::Rectangle { min, max } => {
                p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1]
            }
            ShapeSpec::Disk { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy <= radius * radius
            }
            ShapeSpec::Annulus {
                center,
                inner,
                outer,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let r2 = dx * dx + dy * dy;
                r2 >= inner * inner && r2 <= outer * outer
            }
            ShapeSpec::Union(a, b) => a.contains(p) || b.contains(p),
            ShapeSpec::Difference(a, b) => a.contains(p) && !b.contains(p),
            ShapeSpec::Full => true,
            ShapeSpec::Empty => false,
        }
    }

    /// Loose bounding box used only to reject descriptors that do not
    /// intersect the grid at all.
    fn bounds(&self) -> Option<([f64; 2], [f64; 2])> {
        match self {
            ShapeSpec::Rectangle { min, max } => Some((*min, *max)),
            ShapeSpec::Disk { center, radius } => Some((
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            )),
            ShapeSpec::Annulus { center, outer, .. } => Some((
                [center[0] - outer, center[1] - outer],
                [center[0] + outer, center[1] + outer],
            )),
            ShapeSpec::Union(a, b) => match (a.bounds(), b.bounds()) {
                (Some((alo, ahi)), Some((blo, bhi))) => Some((
                    [alo[0].min(blo[0]), alo[1].min(blo[1])],
                    [ahi[0].max(bhi[0]), ahi[1].max(bhi[1])],
                )),
                (x, None) | (None, x) => x,
            },
            ShapeSpec::Difference(a, _) => a.bounds(),
            ShapeSpec::Full | ShapeSpec::Empty => None,
        }
    }
}

/// Boolean cell indicator for a discrete open set.
#[derive(Debug, Clone)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    parent: Option<Arc<DomainMask>>,
}

/// Build a mask from a shape descriptor: a cell is inside iff its center
/// satisfies the descriptor.
pub fn mask_from_shape(grid: &Grid, shape: &ShapeSpec) -> Result<DomainMask> {
    if let Some((lo, hi)) = shape.bounds() {
        let o = grid.origin();
        let e = grid.extent();
        // Tolerate descriptors touching the boundary; reject only those with
        // no overlap with the grid rectangle.
        if hi[0] < o[0] || hi[1] < o[1] || lo[0] > o[0] + e[0] || lo[1] > o[1] + e[1] {
            return Err(Error::ShapeOutsideGrid(format!(
                "bounds [{:?}, {:?}] vs grid [{:?}, {:?}]",
                lo,
                hi,
                o,
                [o[0] + e[0], o[1] + e[1]]
            )));
        }
    }
    let [nx, ny] = grid.cells();
    let mut inside = vec![false; grid.cell_count()];
    for j in 0..ny {
        for i in 0..nx {
            if shape.contains(grid.cell_center(i, j)) {
                inside[grid.cell_index(i, j)] = true;
            }
        }
    }
    Ok(DomainMask {
        grid: grid.clone(),
        inside,
        parent: None,
    })
}

/// `|Omega|`: exact measure of the cell union.
pub fn measure(mask: &DomainMask) -> f64 {
    mask.cell_count_inside() as f64 * mask.grid.cell_volume()
}

/// Cells of `Omega` with at least one face neighbor in `D \ Omega`, where
/// `D` is the parent mask (the whole grid when no parent is attached).
/// Sorted lexicographically (row-major index order).
pub fn boundary_cells(mask: &DomainMask) -> Vec<usize> {
    let [nx, ny] = mask.grid.cells();
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let idx = mask.grid.cell_index(i, j);
            if !mask.inside[idx] {
                continue;
            }
            let mut exposed = false;
            let mut check = |ci: isize, cj: isize| {
                if ci < 0 || cj < 0 || ci >= nx as isize || cj >= ny as isize {
                    return; // grid exterior never counts as free boundary
                }
                let n = mask.grid.cell_index(ci as usize, cj as usize);
                if !mask.inside[n] && mask.in_parent(n) {
                    exposed = true;
                }
            };
            check(i as isize - 1, j as isize);
            check(i as isize + 1, j as isize);
            check(i as isize, j as isize - 1);
            check(i as isize, j as isize + 1);
            if exposed {
                out.push(idx);
            }
        }
    }
    out
}

/// Face-counting perimeter: number of faces between `Omega` cells and
/// non-`Omega` cells (or the exterior of the grid), times `h^(d-1)`.
/// Overestimates smooth perimeters by up to the l1/l2 anisotropy factor
/// sqrt(d).
pub fn perimeter_estimate(mask: &DomainMask) -> f64 {
    let [nx, ny] = mask.grid.cells();
    let h = mask.grid.spacing();
    let mut length = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            if !mask.inside[mask.grid.cell_index(i, j)] {
                continue;
            }
            let mut open = |ci: isize, cj: isize, face: f64| {
                let outside = ci < 0
                    || cj < 0
                    || ci >= nx as isize
                    || cj >= ny as isize
                    || !mask.inside[mask.grid.cell_index(ci as usize, cj as usize)];
                if outside {
                    length += face;
                }
            };
            open(i as isize - 1, j as isize, h[1]);
            open(i as isize + 1, j as isize, h[1]);
            open(i as isize, j as isize - 1, h[0]);
            open(i as isize, j as isize + 1, h[0]);
        }
    }
    length
}

impl DomainMask {
    pub fn full(grid: &Grid) -> Self {
        DomainMask {
            grid: grid.clone(),
            inside: vec![true; grid.cell_count()],
            parent: None,
        }
    }

    pub fn empty(grid: &Grid) -> Self {
        DomainMask {
            grid: grid.clone(),
            inside: vec![false; grid.cell_count()],
            parent: None,
        }
    }

    pub fn from_cells(grid: &Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.cell_count() {
            return Err(Error::GridMismatch(format!(
                "cell vector has {} entries, grid has {} cells",
                inside.len(),
                grid.cell_count()
            )));
        }
        Ok(DomainMask {
            grid: grid.clone(),
            inside,
            parent: None,
        })
    }

    /// Attach the box `D` this mask lives in. Cells of `self` outside the
    /// parent are switched off so the subset invariant holds by
    /// construction.
    pub fn with_parent(mut self, parent: &Arc<DomainMask>) -> Self {
        for (c, inside) in self.inside.iter_mut().enumerate() {
            if *inside && !parent.inside[c] {
                *inside = false;
            }
        }
        self.parent = Some(parent.clone());
        self
    }

    pub fn parent(&self) -> Option<&Arc<DomainMask>> {
        self.parent.as_ref()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn cells(&self) -> &[bool] {
        &self.inside
    }

    pub fn cell_count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    fn in_parent(&self, cell: usize) -> bool {
        match &self.parent {
            Some(p) => p.inside[cell],
            None => true,
        }
    }

    /// A node is interior iff it has 2^d adjacent cells and all of them are
    /// inside the mask. Unknowns live exactly on interior nodes.
    pub fn is_interior_node(&self, i: usize, j: usize) -> bool {
        let [nx, ny] = self.grid.cells();
        if i == 0 || j == 0 || i >= nx + 1 - 1 || j >= ny + 1 - 1 {
            return false;
        }
        self.inside[self.grid.cell_index(i - 1, j - 1)]
            && self.inside[self.grid.cell_index(i, j - 1)]
            && self.inside[self.grid.cell_index(i - 1, j)]
            && self.inside[self.grid.cell_index(i, j)]
    }

    /// Node touches the mask iff at least one adjacent cell is inside.
    pub fn node_touches(&self, i: usize, j: usize) -> bool {
        let [nx, ny] = self.grid.cells();
        let mut any = false;
        if i > 0 && j > 0 {
            any |= self.inside[self.grid.cell_index(i - 1, j - 1)];
        }
        if i < nx && j > 0 {
            any |= self.inside[self.grid.cell_index(i, j - 1)];
        }
        if i > 0 && j < ny {
            any |= self.inside[self.grid.cell_index(i - 1, j)];
        }
        if i < nx && j < ny {
            any |= self.inside[self.grid.cell_index(i, j)];
        }
        any
    }

    /// Interior node indices in lexicographic order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        let [nx, ny] = self.grid.nodes();
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if self.is_interior_node(i, j) {
                    out.push(self.grid.node_index(i, j));
                }
            }
        }
        out
    }

    /// Nodes on the discrete free boundary: touching at least one inside
    /// cell but not interior.
    pub fn free_boundary_nodes(&self) -> Vec<usize> {
        let [nx, ny] = self.grid.nodes();
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if self.node_touches(i, j) && !self.is_interior_node(i, j) {
                    out.push(self.grid.node_index(i, j));
                }
            }
        }
        out
    }

    /// Face-adjacency connectivity of the inside cells (flood fill).
    pub fn is_connected(&self) -> bool {
        let total = self.cell_count_inside();
        if total == 0 {
            return true;
        }
        let [nx, ny] = self.grid.cells();
        let start = self.inside.iter().position(|&b| b).unwrap();
        let mut seen = vec![false; self.inside.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0usize;
        while let Some(c) = stack.pop() {
            count += 1;
            let (i, j) = self.grid.cell_coords(c);
            let mut push = |ci: isize, cj: isize| {
                if ci < 0 || cj < 0 || ci >= nx as isize || cj >= ny as isize {
                    return;
                }
                let n = self.grid.cell_index(ci as usize, cj as usize);
                if self.inside[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            };
            push(i as isize - 1, j as isize);
            push(i as isize + 1, j as isize);
            push(i as isize, j as isize - 1);
            push(i as isize, j as isize + 1);
        }
        count == total
    }

    /// Number of cells in the symmetric difference with `other`.
    pub fn symmetric_difference_cells(&self, other: &DomainMask) -> usize {
        debug_assert!(self.grid.same_as(&other.grid));
        self.inside
            .iter()
            .zip(other.inside.iter())
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn intersect(&self, other: &DomainMask) -> Result<DomainMask> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("intersect on different grids".into()));
        }
        let inside = self
            .inside
            .iter()
            .zip(other.inside.iter())
            .map(|(a, b)| *a && *b)
            .collect();
        Ok(DomainMask {
            grid: self.grid.clone(),
            inside,
            parent: self.parent.clone(),
        })
    }
}
