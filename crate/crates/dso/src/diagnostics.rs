//! Quantitative checks of the structural results on a computed optimum:
//! Lagrange multiplier fit, free-boundary optimality residual, Weiss and
//! Almgren radial profiles, Lebesgue density, non-degeneracy, perimeter
//! and Lipschitz proxies.
//!
//! Gradients on cells use the bilinear (face-averaged) differences of the
//! four corner nodes, which are one-sided into the domain across the free
//! boundary with the zero extension outside; this makes the boundary
//! gradient ratio computable exactly where the optimality condition
//! speaks.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::mask::{boundary_cells, DomainMask};
use crate::pde::gradient;
use crate::rng::SplitMix64;

pub const DEFAULT_TEST_FIELDS: usize = 32;
pub const SPHERE_SAMPLES: usize = 256;
/// Minimum radii per profile center; centers that cannot fit this many
/// ladder rungs inside the box are dropped from reports.
pub const MIN_PROFILE_RADII: usize = 8;

/// Order statistics of the boundary ratio, with the cells attaining them.
#[derive(Debug, Clone)]
pub struct Quartiles {
    /// min, first quartile, median, third quartile, max.
    pub values: [f64; 5],
    /// Cell index attaining each order statistic.
    pub cells: [usize; 5],
    pub count: usize,
}

/// Cell-centered value and gradient of a nodal field (bilinear element).
#[inline]
pub fn cell_gradient(u: &ScalarField, i: usize, j: usize) -> [f64; 2] {
    let h = u.grid().spacing();
    let v00 = u.at(i, j);
    let v10 = u.at(i + 1, j);
    let v01 = u.at(i, j + 1);
    let v11 = u.at(i + 1, j + 1);
    [
        0.5 * ((v10 - v00) + (v11 - v01)) / h[0],
        0.5 * ((v01 - v00) + (v11 - v10)) / h[1],
    ]
}

fn support_collar_ok(xi: &VectorField, collar: usize) -> bool {
    let grid = xi.grid();
    let [nx, ny] = grid.nodes();
    for j in 0..ny {
        for i in 0..nx {
            let near = i < collar || j < collar || i + collar >= nx || j + collar >= ny;
            if near {
                let v = xi.at(i, j);
                if v[0] != 0.0 || v[1] != 0.0 {
                    return false;
                }
            }
        }
    }
    true
}

/// First inner variation of the energy `J` at `u` in the direction `xi`:
///
/// ```text
/// dJ(u)[xi] = int [ 2 Dxi(grad u) . grad u
///                   + (|grad u|^2 - lambda u^2)(grad Phi . xi - div xi) ] e^(-Phi)
/// ```
///
/// evaluated by the midpoint rule over cells. `xi` must vanish on a
/// two-cell collar of the box.
pub fn first_variation(
    u: &ScalarField,
    phi: &ScalarField,
    lambda_m: f64,
    xi: &VectorField,
    grid: &Grid,
) -> Result<f64> {
    if !support_collar_ok(xi, 2) {
        return Err(Error::SupportViolation(
            "vector field must vanish on a 2-cell collar of the box".into(),
        ));
    }
    let [nx, ny] = grid.cells();
    let vol = grid.cell_volume();
    let mut acc = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let gu = cell_gradient(u, i, j);
            let gphi = cell_gradient(phi, i, j);
            let dxx = cell_gradient(xi.component(0), i, j);
            let dxy = cell_gradient(xi.component(1), i, j);
            // Dxi(grad u) . grad u = sum_ij d_i xi_j (d_i u)(d_j u)
            let quad = dxx[0] * gu[0] * gu[0]
                + dxy[0] * gu[0] * gu[1]
                + dxx[1] * gu[1] * gu[0]
                + dxy[1] * gu[1] * gu[1];
            let xc = [
                0.25 * (xi.component(0).at(i, j)
                    + xi.component(0).at(i + 1, j)
                    + xi.component(0).at(i, j + 1)
                    + xi.component(0).at(i + 1, j + 1)),
                0.25 * (xi.component(1).at(i, j)
                    + xi.component(1).at(i + 1, j)
                    + xi.component(1).at(i, j + 1)
                    + xi.component(1).at(i + 1, j + 1)),
            ];
            let div = dxx[0] + dxy[1];
            let uc = u.cell_value(i, j);
            let phic = phi.cell_value(i, j);
            let gu2 = gu[0] * gu[0] + gu[1] * gu[1];
            let integrand =
                2.0 * quad + (gu2 - lambda_m * uc * uc) * (gphi[0] * xc[0] + gphi[1] * xc[1] - div);
            acc += integrand * (-phic).exp() * vol;
        }
    }
    Ok(acc)
}

/// A tensor-product bump test field with direction `axis`.
#[derive(Debug, Clone)]
pub struct BumpField {
    pub center: [f64; 2],
    pub width: f64,
    pub axis: usize,
}

impl BumpField {
    fn profile(s: f64) -> f64 {
        if s.abs() < 1.0 {
            let t = 1.0 - s * s;
            t * t
        } else {
            0.0
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        Self::profile((x - self.center[0]) / self.width)
            * Self::profile((y - self.center[1]) / self.width)
    }

    pub fn as_field(&self, grid: &Grid) -> VectorField {
        let axis = self.axis;
        let b = self.clone();
        VectorField::from_fn(grid, move |x, y| {
            let q = b.value(x, y);
            if axis == 0 {
                [q, 0.0]
            } else {
                [0.0, q]
            }
        })
    }
}

/// Least-squares fit of the Lagrange multiplier over a seeded family of
/// bump test fields centered on free-boundary neighborhoods:
/// `Lambda = sum a_j b_j / sum b_j^2` with `a_j` the first variation and
/// `b_j` the divergence integral over the domain.
pub fn estimate_lagrange(
    u: &ScalarField,
    phi: &ScalarField,
    lambda_m: f64,
    omega: &DomainMask,
    grid: &Grid,
    n_fields: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let cells = boundary_cells(omega);
    if cells.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let h = grid.spacing()[0].max(grid.spacing()[1]);
    let o = grid.origin();
    let e = grid.extent();
    let mut rng = SplitMix64::new(seed);
    let mut a = Vec::new();
    let mut b = Vec::new();
    let widths = [6.0 * h, 10.0 * h];
    let mut attempts = 0usize;
    while a.len() < n_fields && attempts < 20 * n_fields {
        attempts += 1;
        let cell = cells[rng.below(cells.len())];
        let (ci, cj) = grid.cell_coords(cell);
        let center = grid.cell_center(ci, cj);
        let width = widths[a.len() % 2];
        let axis = (a.len() / 2) % 2;
        // keep the bump clear of the 2-cell collar
        let margin = width + 3.0 * h;
        if center[0] - o[0] < margin
            || center[1] - o[1] < margin
            || o[0] + e[0] - center[0] < margin
            || o[1] + e[1] - center[1] < margin
        {
            continue;
        }
        let bump = BumpField {
            center,
            width,
            axis,
        };
        let xi = bump.as_field(grid);
        let aj = first_variation(u, phi, lambda_m, &xi, grid)?;
        // b_j = int_Omega div xi (midpoint rule over inside cells)
        let [nx, ny] = grid.cells();
        let vol = grid.cell_volume();
        let mut bj = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                if omega.cell(grid.cell_index(i, j)) {
                    let d = if axis == 0 {
                        cell_gradient(xi.component(0), i, j)[0]
                    } else {
                        cell_gradient(xi.component(1), i, j)[1]
                    };
                    bj += d * vol;
                }
            }
        }
        a.push(aj);
        b.push(bj);
    }
    let bb: f64 = b.iter().map(|v| v * v).sum();
    if bb < 1e-12 {
        return Err(Error::DegenerateTestFamily);
    }
    let ab: f64 = a.iter().zip(b.iter()).map(|(x, y)| x * y).sum();
    let lambda_hat = ab / bb;
    let mut misfit = 0.0;
    let mut anorm = 0.0;
    for k in 0..a.len() {
        let d = a[k] - lambda_hat * b[k];
        misfit += d * d;
        anorm += a[k] * a[k];
    }
    let fit_residual = (misfit / anorm.max(f64::MIN_POSITIVE)).sqrt();
    Ok((lambda_hat, fit_residual))
}

/// Does this cell of the mask touch the boundary of the box (grid edge or
/// a parent-mask edge)?
fn touches_box_boundary(omega: &DomainMask, cell: usize) -> bool {
    let grid = omega.grid();
    let [nx, ny] = grid.cells();
    let (i, j) = grid.cell_coords(cell);
    let mut touches = false;
    let mut check = |ci: isize, cj: isize| {
        if ci < 0 || cj < 0 || ci >= nx as isize || cj >= ny as isize {
            touches = true;
            return;
        }
        if let Some(parent) = omega.parent() {
            if !parent.cell(grid.cell_index(ci as usize, cj as usize)) {
                touches = true;
            }
        }
    };
    check(i as isize - 1, j as isize);
    check(i as isize + 1, j as isize);
    check(i as isize, j as isize - 1);
    check(i as isize, j as isize + 1);
    touches
}

/// Boundary-cell gradient magnitude squared for the optimality ratio:
/// the nodal gradient (central differences with the zero extension across
/// the free boundary, one-sided reaching into the domain at the grid
/// border) evaluated at the cell corner carrying the largest value of
/// `u`. Exact for the plane profile in any axis orientation; the bilinear
/// cell average would underestimate diagonal staircase cuts by up to a
/// factor of four, while a corner-wise one-sided maximum picks up
/// staircase spikes.
fn boundary_gradient_sq(u: &ScalarField, i: usize, j: usize) -> f64 {
    let grid = u.grid();
    let h = grid.spacing();
    let [nnx, nny] = grid.nodes();
    let mut best_corner = (i, j);
    let mut best_val = f64::NEG_INFINITY;
    for (ci, cj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
        let v = u.at(ci, cj);
        if v > best_val {
            best_val = v;
            best_corner = (ci, cj);
        }
    }
    let (ci, cj) = best_corner;
    let gx = if ci == 0 {
        (u.at(1, cj) - u.at(0, cj)) / h[0]
    } else if ci == nnx - 1 {
        (u.at(nnx - 1, cj) - u.at(nnx - 2, cj)) / h[0]
    } else {
        (u.at(ci + 1, cj) - u.at(ci - 1, cj)) / (2.0 * h[0])
    };
    let gy = if cj == 0 {
        (u.at(ci, 1) - u.at(ci, 0)) / h[1]
    } else if cj == nny - 1 {
        (u.at(ci, nny - 1) - u.at(ci, nny - 2)) / h[1]
    } else {
        (u.at(ci, cj + 1) - u.at(ci, cj - 1)) / (2.0 * h[1])
    };
    gx * gx + gy * gy
}

/// Statistics of the boundary ratio `rho = |grad u|^2 e^(-Phi) / Lambda`
/// over interior free-boundary cells, plus the fraction of box-contact
/// cells satisfying the one-sided inequality `rho >= 1 - 0.1`.
pub fn optimality_residual(
    u: &ScalarField,
    phi: &ScalarField,
    lambda_hat: f64,
    omega: &DomainMask,
    grid: &Grid,
) -> Result<(Quartiles, Option<f64>)> {
    if !(lambda_hat > 0.0) {
        return Err(Error::Inapplicable(format!(
            "Lagrange multiplier estimate {} must be positive",
            lambda_hat
        )));
    }
    let cells = boundary_cells(omega);
    if cells.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut interior: Vec<(f64, usize)> = Vec::new();
    let mut contact_total = 0usize;
    let mut contact_ok = 0usize;
    let rho_of = |cell: usize| {
        let (i, j) = grid.cell_coords(cell);
        let phic = phi.cell_value(i, j);
        boundary_gradient_sq(u, i, j) * (-phic).exp() / lambda_hat
    };
    for &cell in &cells {
        if touches_box_boundary(omega, cell) {
            contact_total += 1;
            if rho_of(cell) >= 1.0 - 0.1 {
                contact_ok += 1;
            }
        } else {
            interior.push((rho_of(cell), cell));
        }
    }
    // cells of Omega on the box edge that are not free-boundary cells
    // still carry the one-sided condition
    let [nx, ny] = grid.cells();
    for j in 0..ny {
        for i in 0..nx {
            let cell = grid.cell_index(i, j);
            if omega.cell(cell) && !cells.contains(&cell) && touches_box_boundary(omega, cell) {
                contact_total += 1;
                if rho_of(cell) >= 1.0 - 0.1 {
                    contact_ok += 1;
                }
            }
        }
    }
    if interior.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    interior.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let n = interior.len();
    let pick = |q: f64| {
        let idx = ((n - 1) as f64 * q).round() as usize;
        interior[idx]
    };
    let picks = [pick(0.0), pick(0.25), pick(0.5), pick(0.75), pick(1.0)];
    let quartiles = Quartiles {
        values: [picks[0].0, picks[1].0, picks[2].0, picks[3].0, picks[4].0],
        cells: [picks[0].1, picks[1].1, picks[2].1, picks[3].1, picks[4].1],
        count: n,
    };
    let contact = if contact_total > 0 {
        Some(contact_ok as f64 / contact_total as f64)
    } else {
        None
    };
    Ok((quartiles, contact))
}

fn check_ball_inside(grid: &Grid, x0: [f64; 2], r: f64) -> Result<()> {
    let o = grid.origin();
    let e = grid.extent();
    if x0[0] - r < o[0] || x0[1] - r < o[1] || x0[0] + r > o[0] + e[0] || x0[1] + r > o[1] + e[1] {
        return Err(Error::BallEscapesBox {
            x: x0[0],
            y: x0[1],
            radius: r,
        });
    }
    Ok(())
}

/// Fraction of a cell inside the ball, by 4x4 subcell sampling; cells
/// fully inside or outside short-circuit to 1 or 0. This keeps the volume
/// quadrature jitter at small radii well below the profile tolerances.
fn cell_ball_fraction(grid: &Grid, i: usize, j: usize, x0: [f64; 2], r: f64) -> f64 {
    let c = grid.cell_center(i, j);
    let h = grid.spacing();
    let dx = c[0] - x0[0];
    let dy = c[1] - x0[1];
    let dist = (dx * dx + dy * dy).sqrt();
    let half_diag = 0.5 * (h[0] * h[0] + h[1] * h[1]).sqrt();
    if dist + half_diag <= r {
        return 1.0;
    }
    if dist - half_diag >= r {
        return 0.0;
    }
    let mut hits = 0usize;
    for b in 0..4 {
        for a in 0..4 {
            let px = c[0] + ((a as f64 + 0.5) / 4.0 - 0.5) * h[0];
            let py = c[1] + ((b as f64 + 0.5) / 4.0 - 0.5) * h[1];
            let ddx = px - x0[0];
            let ddy = py - x0[1];
            if ddx * ddx + ddy * ddy <= r * r {
                hits += 1;
            }
        }
    }
    hits as f64 / 16.0
}

/// `int_{boundary of B_r} f` by the 256-point trapezoidal rule with
/// bilinear interpolation (periodic, so the rule is the uniform sum).
fn sphere_integral(r: f64, x0: [f64; 2], mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..SPHERE_SAMPLES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / SPHERE_SAMPLES as f64;
        let x = x0[0] + r * theta.cos();
        let y = x0[1] + r * theta.sin();
        acc += f(x, y);
    }
    acc * 2.0 * std::f64::consts::PI * r / SPHERE_SAMPLES as f64
}

/// Weiss boundary-adjusted energy
/// `W(r) = r^-d int_{B_r} |grad u|^2 e^(-Phi)
///         - r^-(d+1) int_{dB_r} u^2 e^(-Phi)
///         + Lambda r^-d |{u > 0} ∩ B_r|`.
pub fn weiss_energy(
    u: &ScalarField,
    phi: &ScalarField,
    lambda_hat: f64,
    x0: [f64; 2],
    radii: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let grid = u.grid().clone();
    let rmax = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    check_ball_inside(&grid, x0, rmax)?;
    let d = grid.dim() as i32;
    let [nx, ny] = grid.cells();
    let vol = grid.cell_volume();
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut dirichlet = 0.0;
        let mut positivity = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let frac = cell_ball_fraction(&grid, i, j, x0, r);
                if frac == 0.0 {
                    continue;
                }
                let g = cell_gradient(u, i, j);
                let phic = phi.cell_value(i, j);
                dirichlet += (g[0] * g[0] + g[1] * g[1]) * (-phic).exp() * vol * frac;
                if u.cell_value(i, j) > 0.0 {
                    positivity += vol * frac;
                }
            }
        }
        let sphere = sphere_integral(r, x0, |x, y| {
            let uv = u.interp(x, y);
            uv * uv * (-phi.interp(x, y)).exp()
        });
        let w =
            dirichlet / r.powi(d) - sphere / r.powi(d + 1) + lambda_hat * positivity / r.powi(d);
        out.push((r, w));
    }
    Ok(out)
}

/// Almgren frequency profile: `N(r) = r D(r) / H(r)` with
/// `H(r) = int_{dB_r} u^2 e^(-Phi)` and
/// `D(r) = int_{B_r} |grad u|^2 e^(-Phi)`; also returns the drift-adjusted
/// `e^(2 tau r) N(r)`.
pub fn almgren_frequency(
    u: &ScalarField,
    phi: &ScalarField,
    x0: [f64; 2],
    radii: &[f64],
    tau: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let grid = u.grid().clone();
    let rmax = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    check_ball_inside(&grid, x0, rmax)?;
    let [nx, ny] = grid.cells();
    let vol = grid.cell_volume();
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut dr = 0.0;
        for j in 0..ny {
            for i in 0..nx {
                let frac = cell_ball_fraction(&grid, i, j, x0, r);
                if frac == 0.0 {
                    continue;
                }
                let g = cell_gradient(u, i, j);
                let phic = phi.cell_value(i, j);
                dr += (g[0] * g[0] + g[1] * g[1]) * (-phic).exp() * vol * frac;
            }
        }
        let hr = sphere_integral(r, x0, |x, y| {
            let uv = u.interp(x, y);
            uv * uv * (-phi.interp(x, y)).exp()
        });
        if hr <= 1e-14 {
            return Err(Error::VanishingBoundaryMass { radius: r });
        }
        let n = r * dr / hr;
        out.push((r, n, (2.0 * tau * r).exp() * n));
    }
    Ok(out)
}

/// `|Omega ∩ B_r| / |B_r|` by cell counting; the denominator is counted
/// on the same lattice so a ball deep inside the domain reports exactly 1.
pub fn density_profile(omega: &DomainMask, x0: [f64; 2], radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = omega.grid().clone();
    let rmax = radii.iter().fold(0.0f64, |m, r| m.max(*r));
    check_ball_inside(&grid, x0, rmax)?;
    let [nx, ny] = grid.cells();
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut inside = 0usize;
        let mut total = 0usize;
        let r2 = r * r;
        for j in 0..ny {
            for i in 0..nx {
                let c = grid.cell_center(i, j);
                let dx = c[0] - x0[0];
                let dy = c[1] - x0[1];
                if dx * dx + dy * dy <= r2 {
                    total += 1;
                    if omega.cell(grid.cell_index(i, j)) {
                        inside += 1;
                    }
                }
            }
        }
        if total == 0 {
            out.push((r, 0.0));
        } else {
            out.push((r, inside as f64 / total as f64));
        }
    }
    Ok(out)
}

/// Non-degeneracy ratios: for each radius, the minimum over free-boundary
/// nodes of `sup_{B_2r} u / r`.
pub fn nondegeneracy_check(
    u: &ScalarField,
    omega: &DomainMask,
    grid: &Grid,
    r_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if omega.is_empty() {
        return Err(Error::Inapplicable("empty mask".into()));
    }
    let nodes = omega.free_boundary_nodes();
    if nodes.is_empty() {
        return Err(Error::Inapplicable("no free-boundary nodes".into()));
    }
    let [nnx, nny] = grid.nodes();
    let h = grid.spacing();
    let mut out = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let mut min_ratio = f64::INFINITY;
        for &node in &nodes {
            let (i, j) = grid.node_coords(node);
            // skip points on the grid border (the lemma is interior)
            if i == 0 || j == 0 || i == nnx - 1 || j == nny - 1 {
                continue;
            }
            let p = grid.node_position(i, j);
            if check_ball_inside(grid, p, 2.0 * r).is_err() {
                continue;
            }
            let di = (2.0 * r / h[0]).ceil() as isize;
            let dj = (2.0 * r / h[1]).ceil() as isize;
            let mut sup: f64 = 0.0;
            for jj in (j as isize - dj).max(0)..=(j as isize + dj).min(nny as isize - 1) {
                for ii in (i as isize - di).max(0)..=(i as isize + di).min(nnx as isize - 1) {
                    let q = grid.node_position(ii as usize, jj as usize);
                    let dx = q[0] - p[0];
                    let dy = q[1] - p[1];
                    if dx * dx + dy * dy <= 4.0 * r * r + 1e-14 {
                        sup = sup.max(u.at(ii as usize, jj as usize));
                    }
                }
            }
            min_ratio = min_ratio.min(sup / r);
        }
        if min_ratio.is_finite() {
            out.push((r, min_ratio));
        }
    }
    if out.is_empty() {
        return Err(Error::Inapplicable(
            "no admissible free-boundary balls".into(),
        ));
    }
    Ok(out)
}

/// Ratio of max gradient magnitudes across a factor-2 refinement pair;
/// values near 1 support a Lipschitz bound on the pair.
pub fn lipschitz_check(u_coarse: &ScalarField, u_fine: &ScalarField) -> Result<f64> {
    if !Grid::is_refinement_of(u_fine.grid(), u_coarse.grid()) {
        return Err(Error::MisalignedGrids(format!(
            "fine grid {:?} is not the 2x refinement of coarse {:?}",
            u_fine.grid().cells(),
            u_coarse.grid().cells()
        )));
    }
    let gc = gradient(u_coarse, &DomainMask::full(u_coarse.grid()));
    let gf = gradient(u_fine, &DomainMask::full(u_fine.grid()));
    let max_mag = |g: &VectorField| {
        let n = g.component(0).values().len();
        let mut m: f64 = 0.0;
        for k in 0..n {
            let x = g.component(0).values()[k];
            let y = g.component(1).values()[k];
            m = m.max((x * x + y * y).sqrt());
        }
        m
    };
    let c = max_mag(&gc);
    let f = max_mag(&gf);
    if c == 0.0 {
        return Err(Error::Inapplicable("coarse gradient vanishes".into()));
    }
    Ok(f / c)
}

/// Default geometric radii ladder from `4h` up to
/// `min(dist(x0, boundary), diam / 8)` in quarter-octave steps. A
/// quarter-octave spacing keeps at least [`MIN_PROFILE_RADII`] rungs on
/// the grids this crate targets.
pub fn radii_ladder(grid: &Grid, x0: [f64; 2]) -> Vec<f64> {
    let h = grid.spacing()[0].max(grid.spacing()[1]);
    let o = grid.origin();
    let e = grid.extent();
    let dist = (x0[0] - o[0])
        .min(x0[1] - o[1])
        .min(o[0] + e[0] - x0[0])
        .min(o[1] + e[1] - x0[1]);
    let diam = (e[0] * e[0] + e[1] * e[1]).sqrt();
    let rmax = dist.min(diam / 8.0);
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let r = 4.0 * h * 2f64.powf(k as f64 / 4.0);
        if r > rmax {
            break;
        }
        out.push(r);
        k += 1;
    }
    out
}

#[derive(Debug, Clone)]
pub struct CenterProfile {
    pub center: [f64; 2],
    /// `(r, value)` rows.
    pub rows: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct AlmgrenProfile {
    pub center: [f64; 2],
    /// `(r, N, e^(2 tau r) N)` rows.
    pub rows: Vec<(f64, f64, f64)>,
}

/// Everything the `diagnose` command reports.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub lambda_u: f64,
    pub lagrange_fit_residual: f64,
    pub opt_residual_stats: Quartiles,
    pub boundary_contact_fraction: Option<f64>,
    pub weiss_profiles: Vec<CenterProfile>,
    /// Smallest `C >= 0` making `W(r) + C r` nondecreasing, per center.
    pub weiss_monotonicity_constants: Vec<f64>,
    pub almgren_profiles: Vec<AlmgrenProfile>,
    pub density_profiles: Vec<CenterProfile>,
    pub perimeter: f64,
    pub nondeg_profile: Vec<(f64, f64)>,
    pub nondeg_min: f64,
    /// Max-gradient ratio across a factor-2 refinement pair, when one was
    /// supplied alongside the run.
    pub lipschitz_ratio: Option<f64>,
}

/// Smallest `C >= 0` such that `r -> W(r) + C r` is nondecreasing on the
/// sampled ladder.
pub fn fitted_weiss_constant(profile: &[(f64, f64)]) -> f64 {
    let mut c: f64 = 0.0;
    for k in 1..profile.len() {
        let (r0, w0) = profile[k - 1];
        let (r1, w1) = profile[k];
        if w1 < w0 {
            c = c.max((w0 - w1) / (r1 - r0));
        }
    }
    c
}

/// Deterministic choice of profile centers: free-boundary cells sorted by
/// distance to the box boundary (descending, ties by index), thinned to at
/// most `max_centers`, keeping only centers whose radii ladder has at
/// least [`MIN_PROFILE_RADII`] rungs.
pub fn select_profile_centers(
    omega: &DomainMask,
    grid: &Grid,
    max_centers: usize,
) -> Vec<[f64; 2]> {
    let o = grid.origin();
    let e = grid.extent();
    let mut scored: Vec<(f64, usize)> = boundary_cells(omega)
        .into_iter()
        .map(|c| {
            let (i, j) = grid.cell_coords(c);
            let p = grid.cell_center(i, j);
            let dist = (p[0] - o[0])
                .min(p[1] - o[1])
                .min(o[0] + e[0] - p[0])
                .min(o[1] + e[1] - p[1]);
            (dist, c)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut centers = Vec::new();
    let stride = (scored.len() / max_centers.max(1)).max(1);
    for (idx, (_, c)) in scored.iter().enumerate() {
        if idx % stride != 0 || centers.len() >= max_centers {
            continue;
        }
        let (i, j) = grid.cell_coords(*c);
        let p = grid.cell_center(i, j);
        if radii_ladder(grid, p).len() >= MIN_PROFILE_RADII {
            centers.push(p);
        }
    }
    centers
}

/// Full diagnostics pass over a computed `(u, Omega, Phi, lambda_m)`.
pub fn diagnose(
    u: &ScalarField,
    phi: &ScalarField,
    lambda_m: f64,
    omega: &DomainMask,
    grid: &Grid,
    tau: f64,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let (lambda_u, fit_residual) =
        estimate_lagrange(u, phi, lambda_m, omega, grid, DEFAULT_TEST_FIELDS, seed)?;
    let (stats, contact) = optimality_residual(u, phi, lambda_u, omega, grid)?;
    let centers = select_profile_centers(omega, grid, 4);
    let mut weiss_profiles = Vec::new();
    let mut weiss_constants = Vec::new();
    let mut almgren_profiles = Vec::new();
    let mut density_profiles = Vec::new();
    for &center in &centers {
        let radii = radii_ladder(grid, center);
        let w = weiss_energy(u, phi, lambda_u, center, &radii)?;
        weiss_constants.push(fitted_weiss_constant(&w));
        weiss_profiles.push(CenterProfile { center, rows: w });
        match almgren_frequency(u, phi, center, &radii, tau) {
            Ok(rows) => almgren_profiles.push(AlmgrenProfile { center, rows }),
            Err(Error::VanishingBoundaryMass { .. }) => {}
            Err(e) => return Err(e),
        }
        density_profiles.push(CenterProfile {
            center,
            rows: density_profile(omega, center, &radii)?,
        });
    }
    let h = grid.spacing()[0].max(grid.spacing()[1]);
    let nondeg = nondegeneracy_check(u, omega, grid, &[4.0 * h, 8.0 * h])?;
    let nondeg_min = nondeg.iter().fold(f64::INFINITY, |m, (_, v)| m.min(*v));
    Ok(DiagnosticsReport {
        lambda_u,
        lagrange_fit_residual: fit_residual,
        opt_residual_stats: stats,
        boundary_contact_fraction: contact,
        weiss_profiles,
        weiss_monotonicity_constants: weiss_constants,
        almgren_profiles,
        density_profiles,
        perimeter: crate::mask::perimeter_estimate(omega),
        nondeg_profile: nondeg,
        nondeg_min,
        lipschitz_ratio: None,
    })
}
