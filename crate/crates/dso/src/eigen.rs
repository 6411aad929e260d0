//! Principal eigenpairs.
//!
//! The gradient-drift (symmetrizable) problem is solved by inverse power
//! iteration on the generalized symmetric pencil `A u = lambda M u`. For a
//! generic bounded drift the operator has no variational form; the
//! principal eigenvalue is reached by power iteration on the resolvent of
//! the shifted operator `L' = L + c`, whose inverse is entrywise positive,
//! so iteration from a positive start converges to the Perron direction.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::mask::DomainMask;
use crate::pde::{
    assemble_drift_operator, assemble_weighted_laplacian, coercivity_shift, gradient,
    solve_nonsym_from, solve_spd_from, MassWeights, SparseOperator,
};

pub const DEFAULT_GRAD_TOL: f64 = 1e-8;
const MAX_OUTER: usize = 400;
const FIXED_POINT_CAP: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    L2Weighted,
    L2Plain,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::L2Weighted => "L2_weighted",
            Normalization::L2Plain => "L2_plain",
        }
    }
}

/// Principal eigenvalue, its nonnegative eigenfunction, and solve metadata.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    pub u: ScalarField,
    pub residual: f64,
    pub iterations: usize,
    pub normalization: Normalization,
    /// Face-adjacency connectivity of the mask; eigensolves on disconnected
    /// masks are allowed but flagged (lambda is the minimum over
    /// components).
    pub connected: bool,
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

/// Clamp solver undershoots: tiny negative entries are set to zero. The
/// sign pattern itself is checked by the callers before clamping.
fn clamp_nonnegative(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Principal eigenpair of `-div(exp(-Phi) grad u) = lambda exp(-Phi) u` on
/// the interior nodes of `mask`, by inverse power iteration.
pub fn principal_eig_selfadjoint(
    grid: &Grid,
    mask: &DomainMask,
    phi: &ScalarField,
    tol: f64,
) -> Result<EigenResult> {
    let a = assemble_weighted_laplacian(grid, mask, phi)?;
    let m = MassWeights::new(&a, phi);
    let connected = mask.is_connected();
    let (lambda, x, residual, iterations) = inverse_power_symmetric(&a, &m, tol, None)?;
    let mut x = x;
    clamp_nonnegative(&mut x);
    let nrm = m.weighted_dot(&x, &x).sqrt();
    for v in x.iter_mut() {
        *v /= nrm;
    }
    Ok(EigenResult {
        lambda,
        u: a.vector_to_field(&x),
        residual,
        iterations,
        normalization: Normalization::L2Weighted,
        connected,
    })
}

/// Inverse power iteration for the symmetric pencil `(A, M)`.
/// Returns `(lambda, x, residual, iterations)` with `x` M-normalized and
/// sign-fixed nonnegative-dominant.
pub(crate) fn inverse_power_symmetric(
    a: &SparseOperator,
    m: &MassWeights,
    tol: f64,
    start: Option<&[f64]>,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let n = a.dim();
    let inner_tol = tol / 10.0;
    let mut x: Vec<f64> = match start {
        Some(s) if s.iter().any(|v| *v != 0.0) => s.to_vec(),
        _ => vec![1.0; n],
    };
    let nrm = m.weighted_dot(&x, &x).sqrt();
    for v in x.iter_mut() {
        *v /= nrm;
    }
    let mut mx = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut lambda_prev = f64::INFINITY;
    let mut warm = x.clone();
    for it in 1..=MAX_OUTER {
        m.apply(&x, &mut mx);
        let y = solve_spd_from(a, &mx, inner_tol, Some(&warm))?;
        let ynorm = m.weighted_dot(&y, &y).sqrt();
        if !(ynorm > 0.0) {
            return Err(Error::SolverBreakdown { residual: f64::NAN });
        }
        x = y;
        for v in x.iter_mut() {
            *v /= ynorm;
        }
        // sign fix toward the positive cone
        let mean: f64 = x.iter().sum();
        if mean < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        warm.clone_from(&x);
        for v in warm.iter_mut() {
            *v *= ynorm; // next solve starts near the unnormalized solution
        }
        a.matvec(&x, &mut ax);
        m.apply(&x, &mut mx);
        let lambda = dot(&ax, &x) / dot(&mx, &x);
        let mut rnum = 0.0;
        for k in 0..n {
            let d = ax[k] - lambda * mx[k];
            rnum += d * d;
        }
        let residual = rnum.sqrt() / (lambda.abs() * norm(&mx)).max(f64::MIN_POSITIVE);
        if (lambda - lambda_prev).abs() <= tol * lambda.abs() && residual <= tol {
            return Ok((lambda, x, residual, it));
        }
        lambda_prev = lambda;
    }
    Err(Error::IterationCap {
        cap: MAX_OUTER,
        residual: f64::NAN,
    })
}

/// Principal eigenpair of `L = -Laplace + V . grad` on `mask` by power
/// iteration on the resolvent of `L' = L + c`, `c` from the coercivity
/// shift with `delta = 1/2`. The eigenvalue estimate is the bilinear
/// pairing `<L u, u> / <u, u>` in the plain (cell-volume) inner product;
/// the reported residual is `|L u - lambda u| / (|lambda| |u|)` in the
/// same norm.
pub fn principal_eig_drift(
    grid: &Grid,
    mask: &DomainMask,
    v: &VectorField,
    tau: f64,
    tol: f64,
) -> Result<EigenResult> {
    let sup = v.sup_norm();
    if sup > tau + 1e-12 {
        return Err(Error::DriftBoundViolated { sup, tau });
    }
    let connected = mask.is_connected();
    let c = coercivity_shift(tau, 0.5)?;
    let lp = assemble_drift_operator(grid, mask, v, c)?;
    let (lambda, x, residual, iterations) = resolvent_power(&lp, c, tol, None)?;

    let maxabs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = x.iter().fold(0.0f64, |m, &v| m.min(v));
    if min < -1e-6 * maxabs {
        return Err(Error::LostPositivity { min });
    }
    let mut x = x;
    clamp_nonnegative(&mut x);
    let vol = grid.cell_volume();
    let nrm = (vol * dot(&x, &x)).sqrt();
    for xv in x.iter_mut() {
        *xv /= nrm;
    }
    Ok(EigenResult {
        lambda,
        u: lp.vector_to_field(&x),
        residual,
        iterations,
        normalization: Normalization::L2Plain,
        connected,
    })
}

/// Power iteration on the resolvent of the shifted operator `lp` (which
/// carries `+ c * vol` on the diagonal). Returns the unshifted eigenvalue.
pub(crate) fn resolvent_power(
    lp: &SparseOperator,
    c: f64,
    tol: f64,
    start: Option<&[f64]>,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let n = lp.dim();
    let vol = lp.grid().cell_volume();
    let mut inner_tol = (tol / 10.0).max(1e-14);
    let mut x: Vec<f64> = match start {
        Some(s) if s.iter().any(|v| *v != 0.0) => s.to_vec(),
        _ => vec![1.0; n],
    };
    let nrm = (vol * dot(&x, &x)).sqrt();
    for v in x.iter_mut() {
        *v /= nrm;
    }
    let mut rhs = vec![0.0; n];
    let mut lx = vec![0.0; n];
    let mut lambda_prev = f64::INFINITY;
    let mut warm = x.clone();
    for it in 1..=MAX_OUTER {
        for k in 0..n {
            rhs[k] = vol * x[k];
        }
        let y = solve_nonsym_from(lp, &rhs, inner_tol, Some(&warm))?;
        let ynorm = (vol * dot(&y, &y)).sqrt();
        if !(ynorm > 0.0) {
            return Err(Error::SolverBreakdown { residual: f64::NAN });
        }
        x = y;
        for v in x.iter_mut() {
            *v /= ynorm;
        }
        let mean: f64 = x.iter().sum();
        if mean < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        warm.clone_from(&x);
        for v in warm.iter_mut() {
            *v *= ynorm;
        }
        lp.matvec(&x, &mut lx);
        // pairing estimate of the shifted eigenvalue, then unshift
        let xx = vol * dot(&x, &x);
        let lambda = (dot(&lx, &x) / xx) - c;
        let mut rnum = 0.0;
        for k in 0..n {
            // L u = L' u / vol - c u  (the assembly is volume-scaled)
            let lu = lx[k] / vol - c * x[k];
            let d = lu - lambda * x[k];
            rnum += d * d;
        }
        let residual = rnum.sqrt() / (norm(&x) * lambda.abs().max(f64::MIN_POSITIVE));
        if (lambda - lambda_prev).abs() <= tol * lambda.abs() && residual <= tol {
            return Ok((lambda, x, residual, it));
        }
        lambda_prev = lambda;
        // keep the inner solves tight enough for the lambda-relative
        // residual once the eigenvalue scale is known
        if lambda > 0.0 {
            inner_tol = (tol / 10.0 * (lambda / (lambda + c)).min(1.0)).max(1e-14);
        }
    }
    Err(Error::IterationCap {
        cap: MAX_OUTER,
        residual: f64::NAN,
    })
}

/// Outcome of the optimal-drift fixed point.
#[derive(Debug, Clone)]
pub struct DriftFixedPoint {
    pub eig: EigenResult,
    pub drift: VectorField,
    /// `| -Laplace u - tau |grad u| - lambda u | / |u|` at interior nodes.
    pub nonlinear_residual: f64,
    pub lambda_history: Vec<f64>,
    pub damped: bool,
}

/// Fixed point for the optimal drift `V = -tau grad u / |grad u|`:
/// alternate the drift formula with a drift eigensolve until the
/// eigenvalue stabilizes. The best (smallest-lambda) iterate is returned,
/// so the result never exceeds the zero-drift eigenvalue. A damping factor
/// of 1/2 on the drift update engages automatically after a non-monotone
/// eigenvalue step.
pub fn optimal_drift_fixed_point(
    grid: &Grid,
    mask: &DomainMask,
    tau: f64,
    tol: f64,
    grad_tol: f64,
) -> Result<DriftFixedPoint> {
    let zero = VectorField::zeros(grid);
    let base = principal_eig_drift(grid, mask, &zero, tau, tol)?;
    let mut history = vec![base.lambda];
    if tau == 0.0 {
        let nl = nonlinear_residual(grid, mask, &base.u, tau, base.lambda)?;
        return Ok(DriftFixedPoint {
            eig: base,
            drift: zero,
            nonlinear_residual: nl,
            lambda_history: history,
            damped: false,
        });
    }

    let mut damped = false;
    let mut current_v = zero;
    let mut best: Option<(EigenResult, VectorField)> = None;
    let mut prev_lambda = base.lambda;
    let mut u = base.u;
    for _ in 0..FIXED_POINT_CAP {
        let raw = drift_from_eigenfunction(&u, mask, tau, grad_tol);
        let v_next = if damped {
            blend_fields(&current_v, &raw, 0.5)
        } else {
            raw
        };
        let eig = principal_eig_drift(grid, mask, &v_next, tau, tol)?;
        let lambda = eig.lambda;
        history.push(lambda);
        if lambda > prev_lambda + tol * prev_lambda.abs() {
            damped = true;
        }
        let better = match &best {
            Some((b, _)) => lambda < b.lambda,
            None => true,
        };
        u = eig.u.clone();
        if better {
            best = Some((eig, v_next.clone()));
        }
        current_v = v_next;
        if (lambda - prev_lambda).abs() <= tol * lambda.abs() {
            let (eig, drift) = best.unwrap();
            let nl = nonlinear_residual(grid, mask, &eig.u, tau, eig.lambda)?;
            return Ok(DriftFixedPoint {
                eig,
                drift,
                nonlinear_residual: nl,
                lambda_history: history,
                damped,
            });
        }
        prev_lambda = lambda;
    }
    Err(Error::Oscillation { history })
}

/// `V = -tau grad u / |grad u|` where the gradient is meaningfully nonzero
/// (relative threshold `grad_tol`), zero elsewhere.
pub fn drift_from_eigenfunction(
    u: &ScalarField,
    mask: &DomainMask,
    tau: f64,
    grad_tol: f64,
) -> VectorField {
    let g = gradient(u, mask);
    let grid = u.grid().clone();
    let n = grid.node_count();
    let mut sup: f64 = 0.0;
    for k in 0..n {
        let gx = g.component(0).values()[k];
        let gy = g.component(1).values()[k];
        sup = sup.max((gx * gx + gy * gy).sqrt());
    }
    let cut = grad_tol * sup;
    let mut vx = ScalarField::zeros(&grid);
    let mut vy = ScalarField::zeros(&grid);
    for k in 0..n {
        let gx = g.component(0).values()[k];
        let gy = g.component(1).values()[k];
        let mag = (gx * gx + gy * gy).sqrt();
        if mag > cut {
            vx.values_mut()[k] = -tau * gx / mag;
            vy.values_mut()[k] = -tau * gy / mag;
        }
    }
    VectorField::from_components(vec![vx, vy]).expect("same grid")
}

fn blend_fields(a: &VectorField, b: &VectorField, t: f64) -> VectorField {
    let grid = a.grid().clone();
    let mut out = VectorField::zeros(&grid);
    for axis in 0..2 {
        let av = a.component(axis).values();
        let bv = b.component(axis).values();
        let ov = out.component_mut(axis).values_mut();
        for k in 0..av.len() {
            ov[k] = (1.0 - t) * av[k] + t * bv[k];
        }
    }
    out
}

/// `| -Laplace u - tau |grad u| - lambda u | / |u|` over interior nodes,
/// with the plain Laplacian (`Phi = 0` weighted assembly).
fn nonlinear_residual(
    grid: &Grid,
    mask: &DomainMask,
    u: &ScalarField,
    tau: f64,
    lambda: f64,
) -> Result<f64> {
    let a0 = assemble_weighted_laplacian(grid, mask, &ScalarField::zeros(grid))?;
    let g = gradient(u, mask);
    let x = a0.field_to_vector(u);
    let mut ax = vec![0.0; a0.dim()];
    a0.matvec(&x, &mut ax);
    let vol = grid.cell_volume();
    let mut rnum = 0.0;
    for (r, &node) in a0.nodes().iter().enumerate() {
        let gx = g.component(0).values()[node];
        let gy = g.component(1).values()[node];
        let mag = (gx * gx + gy * gy).sqrt();
        let res = ax[r] / vol - tau * mag - lambda * x[r];
        rnum += res * res;
    }
    Ok(rnum.sqrt() / norm(&x).max(f64::MIN_POSITIVE))
}

/// Torsion-type function: `-div(exp(-Phi) grad w) = 1` on the mask,
/// extension by zero outside. `Phi = 0` reproduces the classical torsion
/// function.
pub fn torsion(grid: &Grid, mask: &DomainMask, phi: &ScalarField) -> Result<ScalarField> {
    let a = assemble_weighted_laplacian(grid, mask, phi)?;
    let vol = grid.cell_volume();
    let b = vec![vol; a.dim()];
    let x = solve_spd_from(&a, &b, 1e-12, None)?;
    Ok(a.vector_to_field(&x))
}

/// Weighted L2 distance of the torsion functions of two masks over the
/// whole grid (both extended by zero).
pub fn gamma_distance(
    mask1: &DomainMask,
    mask2: &DomainMask,
    grid: &Grid,
    phi: &ScalarField,
) -> Result<f64> {
    let w1 = if mask1.is_empty() {
        ScalarField::zeros(grid)
    } else {
        torsion(grid, mask1, phi)?
    };
    let w2 = if mask2.is_empty() {
        ScalarField::zeros(grid)
    } else {
        torsion(grid, mask2, phi)?
    };
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for k in 0..grid.node_count() {
        let d = w1.values()[k] - w2.values()[k];
        acc += d * d * (-phi.values()[k]).exp() * vol;
    }
    Ok(acc.sqrt())
}
