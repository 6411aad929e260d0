//! Discrete operators on interior nodes of a mask and iterative solves.
//!
//! All assembled matrices are scaled by the cell volume, so for nodal
//! vectors `u`, `v` the pairing `<A u, v>` approximates the corresponding
//! integral bilinear form. The weighted Laplacian uses the (2d+1)-point
//! stencil with harmonic-mean face conductivities; homogeneous Dirichlet
//! rows are eliminated (values outside the mask are zero).

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::mask::DomainMask;

/// Sparse matrix in CSR layout over the interior nodes of a mask.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    symmetric: bool,
    /// Grid node index per row (lexicographic).
    nodes: Vec<usize>,
    /// Row index per grid node, usize::MAX outside.
    node_to_row: Vec<usize>,
    grid: Grid,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Grid node index of each row, lexicographic.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn row_of_node(&self, node: usize) -> Option<usize> {
        let r = self.node_to_row[node];
        (r != usize::MAX).then_some(r)
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                if *c == r {
                    d[r] += *v;
                }
            }
        }
        d
    }

    /// y = A x (fixed row order, sequential accumulation).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    /// Scatter a row vector into a full nodal field (zeros elsewhere).
    pub fn vector_to_field(&self, x: &[f64]) -> ScalarField {
        let mut f = ScalarField::zeros(&self.grid);
        for (r, &node) in self.nodes.iter().enumerate() {
            f.values_mut()[node] = x[r];
        }
        f
    }

    /// Gather the interior-node values of a field into a row vector.
    pub fn field_to_vector(&self, f: &ScalarField) -> Vec<f64> {
        self.nodes.iter().map(|&n| f.values()[n]).collect()
    }
}

/// One positive weight per interior node: `exp(-Phi(node)) * cell volume`.
#[derive(Debug, Clone)]
pub struct MassWeights {
    weights: Vec<f64>,
}

impl MassWeights {
    pub fn new(op: &SparseOperator, phi: &ScalarField) -> Self {
        debug_assert!(phi.grid().same_as(op.grid()));
        let vol = op.grid().cell_volume();
        let weights = op
            .nodes()
            .iter()
            .map(|&n| (-phi.values()[n]).exp() * vol)
            .collect();
        MassWeights { weights }
    }

    /// Plain volume weights (Phi = 0).
    pub fn plain(op: &SparseOperator) -> Self {
        MassWeights {
            weights: vec![op.grid().cell_volume(); op.dim()],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (k, w) in self.weights.iter().enumerate() {
            y[k] = w * x[k];
        }
    }

    pub fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..a.len() {
            acc += self.weights[k] * a[k] * b[k];
        }
        acc
    }
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    // exact when the two weights coincide (constant-Phi operators must be
    // exact multiples of the unweighted one)
    if a == b {
        a
    } else {
        2.0 * a * b / (a + b)
    }
}

struct RowBuilder {
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl RowBuilder {
    fn new() -> Self {
        RowBuilder {
            cols: Vec::with_capacity(5),
            vals: Vec::with_capacity(5),
        }
    }

    fn add(&mut self, col: usize, val: f64) {
        if let Some(k) = self.cols.iter().position(|&c| c == col) {
            self.vals[k] += val;
        } else {
            self.cols.push(col);
            self.vals.push(val);
        }
    }

    fn sorted(mut self) -> (Vec<usize>, Vec<f64>) {
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        order.sort_by_key(|&k| self.cols[k]);
        let cols = order.iter().map(|&k| self.cols[k]).collect();
        let vals = order
            .iter()
            .map(|&k| std::mem::take(&mut self.vals[k]))
            .collect();
        (cols, vals)
    }
}

fn interior_map(grid: &Grid, mask: &DomainMask) -> Result<(Vec<usize>, Vec<usize>)> {
    debug_assert!(mask.grid().same_as(grid));
    let nodes = mask.interior_nodes();
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut node_to_row = vec![usize::MAX; grid.node_count()];
    for (r, &n) in nodes.iter().enumerate() {
        node_to_row[n] = r;
    }
    Ok((nodes, node_to_row))
}

/// Discrete `-div(exp(-Phi) grad u)`, cell-volume scaled, symmetric.
pub fn assemble_weighted_laplacian(
    grid: &Grid,
    mask: &DomainMask,
    phi: &ScalarField,
) -> Result<SparseOperator> {
    let (nodes, node_to_row) = interior_map(grid, mask)?;
    let vol = grid.cell_volume();
    let h = grid.spacing();
    let [nnx, _] = grid.nodes();
    let w = |n: usize| (-phi.values()[n]).exp();

    let mut row_ptr = Vec::with_capacity(nodes.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for &node in &nodes {
        let mut row = RowBuilder::new();
        let r = node_to_row[node];
        let wp = w(node);
        // neighbor offsets per axis in node numbering
        for (axis, step) in [(0usize, 1usize), (1, nnx)] {
            let coeff_scale = vol / (h[axis] * h[axis]);
            for neigh in [node - step, node + step] {
                let face = harmonic_mean(wp, w(neigh)) * coeff_scale;
                row.add(r, face);
                let nr = node_to_row[neigh];
                if nr != usize::MAX {
                    row.add(nr, -face);
                }
                // Dirichlet neighbor: value 0, off-diagonal eliminated
            }
        }
        let (rc, rv) = row.sorted();
        cols.extend(rc);
        vals.extend(rv);
        row_ptr.push(cols.len());
    }
    Ok(SparseOperator {
        dim: nodes.len(),
        row_ptr,
        cols,
        vals,
        symmetric: true,
        nodes,
        node_to_row,
        grid: grid.clone(),
    })
}

/// Discrete `L' = -Laplace + V . grad + c`, cell-volume scaled.
/// Advection by first-order upwinding per component: the sign of `V_i` at
/// the node selects the one-sided difference, so the matrix stays an
/// M-matrix for `c >= 0`.
pub fn assemble_drift_operator(
    grid: &Grid,
    mask: &DomainMask,
    v: &VectorField,
    c: f64,
) -> Result<SparseOperator> {
    let (nodes, node_to_row) = interior_map(grid, mask)?;
    let vol = grid.cell_volume();
    let h = grid.spacing();
    let [nnx, _] = grid.nodes();

    let mut row_ptr = Vec::with_capacity(nodes.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for &node in &nodes {
        let mut row = RowBuilder::new();
        let r = node_to_row[node];
        row.add(r, c * vol);
        for (axis, step) in [(0usize, 1usize), (1, nnx)] {
            let lap = vol / (h[axis] * h[axis]);
            for neigh in [node - step, node + step] {
                row.add(r, lap);
                let nr = node_to_row[neigh];
                if nr != usize::MAX {
                    row.add(nr, -lap);
                }
            }
            let vn = v.component(axis).values()[node];
            let adv = vol / h[axis];
            if vn > 0.0 {
                // V_i (u_p - u_{p-e}) / h
                row.add(r, vn * adv);
                let nr = node_to_row[node - step];
                if nr != usize::MAX {
                    row.add(nr, -vn * adv);
                }
            } else if vn < 0.0 {
                // V_i (u_{p+e} - u_p) / h
                row.add(r, -vn * adv);
                let nr = node_to_row[node + step];
                if nr != usize::MAX {
                    row.add(nr, vn * adv);
                }
            }
        }
        let (rc, rv) = row.sorted();
        cols.extend(rc);
        vals.extend(rv);
        row_ptr.push(cols.len());
    }
    Ok(SparseOperator {
        dim: nodes.len(),
        row_ptr,
        cols,
        vals,
        symmetric: false,
        nodes,
        node_to_row,
        grid: grid.clone(),
    })
}

/// Add `pen(node)` to the diagonal of rows whose node satisfies the
/// predicate. Used for the fictitious-material penalty.
pub fn add_diagonal(op: &mut SparseOperator, pen: impl Fn(usize) -> f64) {
    for r in 0..op.dim {
        let node = op.nodes[r];
        let p = pen(node);
        if p != 0.0 {
            let lo = op.row_ptr[r];
            let hi = op.row_ptr[r + 1];
            for k in lo..hi {
                if op.cols[k] == r {
                    op.vals[k] += p;
                    break;
                }
            }
        }
    }
}

/// `c = delta + tau^2 / (4 (1 - delta))`: the smallest shift making the
/// drift form coercive with constant `delta`.
pub fn coercivity_shift(tau: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(delta + tau * tau / (4.0 * (1.0 - delta)))
}

/// Nodal gradient: central differences where both neighbors exist on the
/// grid, one-sided at the grid border. Values of `u` outside the mask are
/// zero by the extension convention, which makes the gradient well defined
/// across the free boundary.
pub fn gradient(u: &ScalarField, mask: &DomainMask) -> VectorField {
    debug_assert!(u.grid().same_as(mask.grid()));
    let grid = u.grid().clone();
    let [nx, ny] = grid.nodes();
    let h = grid.spacing();
    let mut gx = ScalarField::zeros(&grid);
    let mut gy = ScalarField::zeros(&grid);
    for j in 0..ny {
        for i in 0..nx {
            let dx = if i == 0 {
                (u.at(1, j) - u.at(0, j)) / h[0]
            } else if i == nx - 1 {
                (u.at(nx - 1, j) - u.at(nx - 2, j)) / h[0]
            } else {
                (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * h[0])
            };
            let dy = if j == 0 {
                (u.at(i, 1) - u.at(i, 0)) / h[1]
            } else if j == ny - 1 {
                (u.at(i, ny - 1) - u.at(i, ny - 2)) / h[1]
            } else {
                (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * h[1])
            };
            gx.set(i, j, dx);
            gy.set(i, j, dy);
        }
    }
    VectorField::from_components(vec![gx, gy]).expect("same grid")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn iteration_cap(dim: usize) -> usize {
    // 50 * dim^(1/2) * 10
    (500.0 * (dim as f64).sqrt()).ceil() as usize
}

/// Conjugate gradients with Jacobi preconditioning; relative residual
/// `|Ax - b| / |b| <= tol`. Deterministic: fixed summation order.
pub fn solve_spd(a: &SparseOperator, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_spd_from(a, b, tol, None)
}

/// As [`solve_spd`] with an optional warm start.
pub fn solve_spd_from(
    a: &SparseOperator,
    b: &[f64],
    tol: f64,
    x0: Option<&[f64]>,
) -> Result<Vec<f64>> {
    debug_assert!(a.is_symmetric());
    let n = a.dim();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let mut z: Vec<f64> = (0..n).map(|k| inv_diag[k] * r[k]).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let cap = iteration_cap(n);
    let mut res = norm(&r) / bnorm;
    if res <= tol {
        return Ok(x);
    }
    for _ in 0..cap {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SolverBreakdown { residual: res });
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
        for k in 0..n {
            z[k] = inv_diag[k] * r[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Err(Error::IterationCap { cap, residual: res })
}

/// BiCGStab with Jacobi preconditioning for the drift operator; relative
/// residual `|Ax - b| / |b| <= tol`. Deterministic.
pub fn solve_nonsym(a: &SparseOperator, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    solve_nonsym_from(a, b, tol, None)
}

/// As [`solve_nonsym`] with an optional warm start.
pub fn solve_nonsym_from(
    a: &SparseOperator,
    b: &[f64],
    tol: f64,
    x0: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let n = a.dim();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    a.matvec(&x, &mut r);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let cap = iteration_cap(n);
    let mut res = norm(&r) / bnorm;
    if res <= tol {
        return Ok(x);
    }
    let mut restarts = 0usize;
    'outer: loop {
        let r_hat = r.clone();
        let mut rho = dot(&r_hat, &r);
        let mut p = r.clone();
        let mut v = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut t = vec![0.0; n];
        let mut phat = vec![0.0; n];
        let mut shat = vec![0.0; n];
        for _ in 0..cap {
            if rho.abs() < 1e-300 {
                break; // breakdown: restart with fresh shadow residual
            }
            for k in 0..n {
                phat[k] = inv_diag[k] * p[k];
            }
            a.matvec(&phat, &mut v);
            let rhv = dot(&r_hat, &v);
            if rhv.abs() < 1e-300 {
                break;
            }
            let alpha = rho / rhv;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) / bnorm <= tol {
                for k in 0..n {
                    x[k] += alpha * phat[k];
                }
                return Ok(x);
            }
            for k in 0..n {
                shat[k] = inv_diag[k] * s[k];
            }
            a.matvec(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                break;
            }
            let omega = dot(&t, &s) / tt;
            if omega == 0.0 {
                break;
            }
            for k in 0..n {
                x[k] += alpha * phat[k] + omega * shat[k];
                r[k] = s[k] - omega * t[k];
            }
            res = norm(&r) / bnorm;
            if res <= tol {
                return Ok(x);
            }
            let rho_new = dot(&r_hat, &r);
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
        }
        restarts += 1;
        if restarts > 3 {
            break 'outer;
        }
        // refresh the true residual before restarting
        a.matvec(&x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            return Ok(x);
        }
    }
    if res <= tol {
        Ok(x)
    } else {
        Err(Error::SolverBreakdown { residual: res })
    }
}
