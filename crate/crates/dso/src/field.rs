//! Nodal scalar and vector fields.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mask::DomainMask;

/// One real value per grid node, row-major with x fastest.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![value; grid.node_count()],
        }
    }

    /// Sample `f` at every node position.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let [nx, ny] = grid.nodes();
        let mut values = Vec::with_capacity(grid.node_count());
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.node_position(i, j);
                values.push(f(p[0], p[1]));
            }
        }
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::GridMismatch(
                "field contains non-finite values".into(),
            ));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.node_index(i, j);
        self.values[idx] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Zero every node that does not touch the mask (extension by zero of a
    /// function supported on the closed cell union).
    pub fn restrict_to(&mut self, mask: &DomainMask) {
        let [nx, ny] = self.grid.nodes();
        for j in 0..ny {
            for i in 0..nx {
                if !mask.node_touches(i, j) {
                    let idx = self.grid.node_index(i, j);
                    self.values[idx] = 0.0;
                }
            }
        }
    }

    /// Bilinear interpolation at an arbitrary point. Points outside the
    /// grid rectangle are clamped to it.
    pub fn interp(&self, x: f64, y: f64) -> f64 {
        let [nx, ny] = self.grid.cells();
        let h = self.grid.spacing();
        let o = self.grid.origin();
        let fx = ((x - o[0]) / h[0]).clamp(0.0, nx as f64);
        let fy = ((y - o[1]) / h[1]).clamp(0.0, ny as f64);
        let i = (fx.floor() as usize).min(nx - 1);
        let j = (fy.floor() as usize).min(ny - 1);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    /// Value at a cell center: mean of the four corner nodes.
    pub fn cell_value(&self, i: usize, j: usize) -> f64 {
        0.25 * (self.at(i, j) + self.at(i + 1, j) + self.at(i, j + 1) + self.at(i + 1, j + 1))
    }
}

/// `dim` scalar components on a shared grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            components: vec![ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != 2 {
            return Err(Error::GridMismatch(format!(
                "vector field needs 2 components, got {}",
                components.len()
            )));
        }
        if !components[0].grid().same_as(components[1].grid()) {
            return Err(Error::GridMismatch(
                "vector components on different grids".into(),
            ));
        }
        Ok(VectorField { components })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let fx = ScalarField::from_fn(grid, |x, y| f(x, y)[0]);
        let fy = ScalarField::from_fn(grid, |x, y| f(x, y)[1]);
        VectorField {
            components: vec![fx, fy],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.components[axis]
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        [self.components[0].at(i, j), self.components[1].at(i, j)]
    }

    /// Pointwise Euclidean sup norm.
    pub fn sup_norm(&self) -> f64 {
        let n = self.components[0].values().len();
        let mut sup: f64 = 0.0;
        for k in 0..n {
            let vx = self.components[0].values()[k];
            let vy = self.components[1].values()[k];
            sup = sup.max((vx * vx + vy * vy).sqrt());
        }
        sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn interp_reproduces_bilinear() {
        let g = make_grid([8, 8], [1.0, 1.0], [0.0, 0.0]).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| 2.0 * x + 3.0 * y + x * y);
        for (x, y) in [(0.31, 0.57), (0.0, 0.0), (1.0, 1.0), (0.99, 0.01)] {
            let exact = 2.0 * x + 3.0 * y + x * y;
            assert!((f.interp(x, y) - exact).abs() < 1e-12, "({}, {})", x, y);
        }
    }

    #[test]
    fn sup_norm_euclidean() {
        let g = make_grid([4, 4], [1.0, 1.0], [0.0, 0.0]).unwrap();
        let v = VectorField::from_fn(&g, |_, _| [3.0, 4.0]);
        assert!((v.sup_norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn from_values_rejects_nan() {
        let g = make_grid([4, 4], [1.0, 1.0], [0.0, 0.0]).unwrap();
        let mut vals = vec![0.0; g.node_count()];
        vals[3] = f64::NAN;
        assert!(ScalarField::from_values(&g, vals).is_err());
    }
}
