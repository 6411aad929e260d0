//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Heavy optimization runs are shared across criteria through
//! `OnceLock` so the suite stays inside its runtime budgets.

use dso::diagnostics::{
    almgren_frequency, estimate_lagrange, fitted_weiss_constant, lipschitz_check,
    optimality_residual, radii_ladder, select_profile_centers, weiss_energy,
};
use dso::eigen::{
    optimal_drift_fixed_point, principal_eig_drift, principal_eig_selfadjoint, DriftFixedPoint,
};
use dso::pde::coercivity_shift;
use dso::radial::{ball_radius_for_measure, radial_eigen};
use dso::rng::SplitMix64;
use dso::shape::{optimize_shape_fixed_drift, Drift, ShapeOptConfig, ShapeOptResult};
use dso::{
    make_grid, mask_from_shape, measure, perimeter_estimate, DomainMask, Grid, ScalarField,
    ShapeSpec, VectorField,
};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const PI: f64 = std::f64::consts::PI;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {}: {} ({})",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
    assert!(pass, "{}: {}", criterion, detail);
}

fn golden_rows() -> &'static Vec<dso::io::GoldenRow> {
    static ROWS: OnceLock<Vec<dso::io::GoldenRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let path =
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden/v1/radial_golden.csv");
        let text = std::fs::read_to_string(&path).expect("committed golden file");
        dso::io::parse_golden(&path.display().to_string(), &text).unwrap()
    })
}

fn golden(d: usize, tau: f64) -> &'static dso::io::GoldenRow {
    golden_rows()
        .iter()
        .find(|r| r.d == d && (r.tau - tau).abs() < 1e-12 && (r.radius - 1.0).abs() < 1e-12)
        .expect("golden row")
}

/// Criterion 6 configuration: D = [0,3]^2, m = pi/4, 192^2 grid, no drift.
fn criterion6_run() -> &'static (ShapeOptResult, Grid, Duration) {
    static RUN: OnceLock<(ShapeOptResult, Grid, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let t0 = Instant::now();
        let g = make_grid([192, 192], [3.0, 3.0], [0.0, 0.0]).unwrap();
        let d = mask_from_shape(&g, &ShapeSpec::Full).unwrap();
        let cfg = ShapeOptConfig::new(PI / 4.0);
        let res = optimize_shape_fixed_drift(&g, &d, &Drift::None, &cfg).unwrap();
        let elapsed = t0.elapsed();
        (res, g, elapsed)
    })
}

/// The same shape problem at 256^2, reused by criteria 8 and 10.
fn disk_optimum_256() -> &'static (ShapeOptResult, Grid) {
    static RUN: OnceLock<(ShapeOptResult, Grid)> = OnceLock::new();
    RUN.get_or_init(|| {
        let g = make_grid([256, 256], [3.0, 3.0], [0.0, 0.0]).unwrap();
        let d = mask_from_shape(&g, &ShapeSpec::Full).unwrap();
        let cfg = ShapeOptConfig::new(PI / 4.0);
        let res = optimize_shape_fixed_drift(&g, &d, &Drift::None, &cfg).unwrap();
        (res, g)
    })
}

/// Criterion 5 configuration: unit disk, tau = 1, 128^2.
fn drift_optimum_128() -> &'static (DriftFixedPoint, Grid, DomainMask, Duration) {
    static RUN: OnceLock<(DriftFixedPoint, Grid, DomainMask, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let t0 = Instant::now();
        let g = make_grid([128, 128], [2.2, 2.2], [-1.1, -1.1]).unwrap();
        let mask = mask_from_shape(
            &g,
            &ShapeSpec::Disk {
                center: [0.0, 0.0],
                radius: 1.0,
            },
        )
        .unwrap();
        let fp = optimal_drift_fixed_point(&g, &mask, 1.0, 1e-8, 1e-8).unwrap();
        let elapsed = t0.elapsed();
        (fp, g, mask, elapsed)
    })
}

/// Smaller drift optimum whose free boundary sits deep inside the box, so
/// Almgren profiles get a full radii ladder.
fn drift_optimum_inner() -> &'static (DriftFixedPoint, Grid, DomainMask) {
    static RUN: OnceLock<(DriftFixedPoint, Grid, DomainMask)> = OnceLock::new();
    RUN.get_or_init(|| {
        let g = make_grid([128, 128], [2.2, 2.2], [-1.1, -1.1]).unwrap();
        let mask = mask_from_shape(
            &g,
            &ShapeSpec::Disk {
                center: [0.0, 0.0],
                radius: 0.6,
            },
        )
        .unwrap();
        let fp = optimal_drift_fixed_point(&g, &mask, 1.0, 1e-8, 1e-8).unwrap();
        (fp, g, mask)
    })
}

/// 96^2 twin of the criterion 6 run, for the refinement pair.
fn coarse_optimum_96() -> &'static (ShapeOptResult, Grid) {
    static RUN: OnceLock<(ShapeOptResult, Grid)> = OnceLock::new();
    RUN.get_or_init(|| {
        let g = make_grid([96, 96], [3.0, 3.0], [0.0, 0.0]).unwrap();
        let d = mask_from_shape(&g, &ShapeSpec::Full).unwrap();
        let cfg = ShapeOptConfig::new(PI / 4.0);
        let res = optimize_shape_fixed_drift(&g, &d, &Drift::None, &cfg).unwrap();
        (res, g)
    })
}

fn plane_fixture(n: usize, lambda: f64) -> (Grid, ScalarField, DomainMask) {
    let g = make_grid([n, n], [1.0, 1.0], [0.0, 0.0]).unwrap();
    let u = ScalarField::from_fn(&g, move |_, y| lambda.sqrt() * (y - 0.5).max(0.0));
    let mask = mask_from_shape(
        &g,
        &ShapeSpec::Rectangle {
            min: [0.0, 0.5],
            max: [1.0, 1.0],
        },
    )
    .unwrap();
    (g, u, mask)
}

fn best_fit_disk_symdiff(omega: &DomainMask) -> f64 {
    let g = omega.grid().clone();
    let vol = g.cell_volume();
    let [nx, ny] = g.cells();
    let (mut cx, mut cy, mut count) = (0.0, 0.0, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            if omega.cell(g.cell_index(i, j)) {
                let c = g.cell_center(i, j);
                cx += c[0];
                cy += c[1];
                count += 1;
            }
        }
    }
    cx /= count as f64;
    cy /= count as f64;
    let r2 = count as f64 * vol / PI;
    let mut sym = 0usize;
    for j in 0..ny {
        for i in 0..nx {
            let c = g.cell_center(i, j);
            let inside = (c[0] - cx).powi(2) + (c[1] - cy).powi(2) <= r2;
            if inside != omega.cell(g.cell_index(i, j)) {
                sym += 1;
            }
        }
    }
    sym as f64 * vol
}

#[test]
fn criterion_01_laplacian_anchor() {
    let t0 = Instant::now();
    let g = make_grid([128, 128], [1.0, 1.0], [0.0, 0.0]).unwrap();
    let mask = mask_from_shape(&g, &ShapeSpec::Full).unwrap();
    let r = principal_eig_selfadjoint(&g, &mask, &ScalarField::zeros(&g), 1e-9).unwrap();
    let exact = 2.0 * PI * PI;
    let rel = (r.lambda - exact).abs() / exact;
    let elapsed = t0.elapsed();
    report(
        "criterion 1 (Laplacian anchor)",
        rel < 0.005 && elapsed < Duration::from_secs(10),
        &format!(
            "lambda = {:.6}, rel err = {:.2e}, {:?}",
            r.lambda, rel, elapsed
        ),
    );
}

#[test]
fn criterion_02_radial_oracle_self_consistency() {
    let t0 = Instant::now();
    let d3 = radial_eigen(3, 1.0, 0.0, 4000).unwrap();
    let pi2 = PI * PI;
    let ok3 = (d3.lambda - pi2).abs() / pi2 < 1e-5;
    // committed golden values reproduce across node counts
    let mut ok_golden = true;
    let mut details = format!("d3 lambda = {:.8}", d3.lambda);
    for tau in [0.0, 1.0] {
        let row = golden(2, tau);
        for n in [row.n_nodes, row.n_nodes / 2] {
            let sol = radial_eigen(2, 1.0, tau, n).unwrap();
            let rel = (sol.lambda - row.lambda).abs() / row.lambda;
            ok_golden &= rel < 1e-6;
            details.push_str(&format!(", tau={} n={} rel={:.1e}", tau, n, rel));
        }
    }
    let elapsed = t0.elapsed();
    report(
        "criterion 2 (radial oracle)",
        ok3 && ok_golden && elapsed < Duration::from_secs(5),
        &format!("{}, {:?}", details, elapsed),
    );
}

#[test]
fn criterion_03_gradient_drift_equivalence() {
    let t0 = Instant::now();
    let g = make_grid([64, 64], [2.0, 2.0], [0.0, 0.0]).unwrap();
    let mask = mask_from_shape(
        &g,
        &ShapeSpec::Disk {
            center: [1.0, 1.0],
            radius: 0.8,
        },
    )
    .unwrap();
    let phi = ScalarField::from_fn(&g, |x, y| 0.3 * (x + y) + 0.1 * x.sin());
    let tau = 0.5;
    let v = VectorField::from_fn(&g, |x, _| [0.3 + 0.1 * x.cos(), 0.3]);
    let rs = principal_eig_selfadjoint(&g, &mask, &phi, 1e-9).unwrap();
    let rd = principal_eig_drift(&g, &mask, &v, tau, 1e-9).unwrap();
    let gap = (rs.lambda - rd.lambda).abs();
    let bound = 5.0 * g.spacing()[0];
    let elapsed = t0.elapsed();
    report(
        "criterion 3 (gradient-drift equivalence)",
        gap <= bound && elapsed < Duration::from_secs(20),
        &format!(
            "weighted {:.6} vs upwind {:.6}, gap {:.4} <= 5h = {:.4}, {:?}",
            rs.lambda, rd.lambda, gap, bound, elapsed
        ),
    );
}

#[test]
fn criterion_04_principal_eigenvalue_minimality() {
    use nalgebra::DMatrix;
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(2026);
    let mut worst_gap = f64::NEG_INFINITY;
    for trial in 0..25 {
        // random sub-rectangle of a 13^2 grid, at most 144 unknowns
        let g = make_grid([13, 13], [1.0, 1.0], [0.0, 0.0]).unwrap();
        let x0 = rng.range_f64(0.0, 0.2);
        let y0 = rng.range_f64(0.0, 0.2);
        let x1 = rng.range_f64(0.7, 1.0);
        let y1 = rng.range_f64(0.7, 1.0);
        let mut mask = mask_from_shape(
            &g,
            &ShapeSpec::Rectangle {
                min: [x0, y0],
                max: [x1, y1],
            },
        )
        .unwrap();
        // poke a random hole half the time
        if trial % 2 == 0 {
            let mut cells = mask.cells().to_vec();
            let (i, j) = (4 + rng.below(5), 4 + rng.below(5));
            cells[g.cell_index(i, j)] = false;
            mask = DomainMask::from_cells(&g, cells).unwrap();
        }
        let tau = rng.range_f64(0.2, 2.0);
        let mut v = VectorField::zeros(&g);
        for axis in 0..2 {
            for val in v.component_mut(axis).values_mut() {
                *val = rng.range_f64(-1.0, 1.0);
            }
        }
        let sup = v.sup_norm();
        for axis in 0..2 {
            for val in v.component_mut(axis).values_mut() {
                *val *= tau / sup;
            }
        }
        let r = match principal_eig_drift(&g, &mask, &v, tau, 1e-12) {
            Ok(r) => r,
            Err(dso::Error::EmptyDomain) => continue,
            Err(e) => panic!("solver failed: {}", e),
        };
        let c = coercivity_shift(tau, 0.5).unwrap();
        let lp = dso::pde::assemble_drift_operator(&g, &mask, &v, c).unwrap();
        let n = lp.dim();
        assert!(n <= 144, "mask has {} nodes", n);
        let vol = g.cell_volume();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for row in 0..n {
            let (cols, vals) = lp.row(row);
            for (cc, vv) in cols.iter().zip(vals) {
                m[(row, *cc)] += vv / vol;
            }
        }
        let min_re = m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re - c)
            .fold(f64::INFINITY, f64::min);
        worst_gap = worst_gap.max(r.lambda - min_re);
    }
    let elapsed = t0.elapsed();
    report(
        "criterion 4 (principal-eigenvalue minimality)",
        worst_gap <= 1e-8 && elapsed < Duration::from_secs(30),
        &format!("worst lambda - min Re = {:.2e}, {:?}", worst_gap, elapsed),
    );
}

#[test]
fn criterion_05_optimal_drift_fixed_point() {
    let (fp, g, _mask, elapsed) = drift_optimum_128();
    let row = golden(2, 1.0);
    let rel = (fp.eig.lambda - row.lambda).abs() / row.lambda;
    let h = g.spacing()[0];
    report(
        "criterion 5 (optimal-drift fixed point)",
        rel < 0.02 && fp.nonlinear_residual <= 10.0 * h && *elapsed < Duration::from_secs(60),
        &format!(
            "lambda {:.6} vs golden {:.6} (rel {:.4}), nonlinear residual {:.4} <= {:.4}, {:?}",
            fp.eig.lambda,
            row.lambda,
            rel,
            fp.nonlinear_residual,
            10.0 * h,
            elapsed
        ),
    );
}

#[test]
fn criterion_06_shape_recovery() {
    let (res, g, elapsed) = criterion6_run();
    let m = PI / 4.0;
    let oracle = radial_eigen(2, ball_radius_for_measure(m, 2), 0.0, 4000).unwrap();
    let rel = (res.eig.lambda - oracle.lambda).abs() / oracle.lambda;
    let sym = best_fit_disk_symdiff(&res.omega);
    let meas = measure(&res.omega);
    let pass = sym <= 0.05 * m
        && rel < 0.02
        && (meas - m).abs() <= g.cell_volume() + 1e-12
        && *elapsed < Duration::from_secs(180);
    report(
        "criterion 6 (shape recovery)",
        pass,
        &format!(
            "symdiff {:.4} <= {:.4}, lambda {:.5} vs {:.5} (rel {:.4}), measure {:.6} vs m = {:.6}, {:?}",
            sym,
            0.05 * m,
            res.eig.lambda,
            oracle.lambda,
            rel,
            meas,
            m,
            elapsed
        ),
    );
}

#[test]
fn criterion_07_faber_krahn_with_drift() {
    // converged runs first
    let mut worst: f64 = f64::INFINITY;
    let mut details = String::new();
    {
        let (res, _, _) = criterion6_run();
        let m = measure(&res.omega);
        let bound = radial_eigen(2, ball_radius_for_measure(m, 2), 0.0, 4000)
            .unwrap()
            .lambda;
        let margin = res.eig.lambda / bound - 1.0;
        worst = worst.min(margin);
        details.push_str(&format!("shape run margin {:+.4}", margin));
    }
    {
        let (fp, _, mask, _) = drift_optimum_128();
        let m = measure(mask);
        let bound = radial_eigen(2, ball_radius_for_measure(m, 2), 1.0, 4000)
            .unwrap()
            .lambda;
        let margin = fp.eig.lambda / bound - 1.0;
        worst = worst.min(margin);
        details.push_str(&format!(", drift run margin {:+.4}", margin));
    }
    // 20 random feasible probes (shapes inside the box, drifts of norm tau)
    let tau = 1.0;
    let g = make_grid([96, 96], [3.0, 3.0], [0.0, 0.0]).unwrap();
    let mut rng = SplitMix64::new(4242);
    for probe in 0..20 {
        let cx = rng.range_f64(0.8, 2.2);
        let cy = rng.range_f64(0.8, 2.2);
        let r0 = rng.range_f64(0.25, 0.7);
        let shape = if probe % 3 == 0 {
            ShapeSpec::Rectangle {
                min: [cx - r0, cy - 0.6 * r0],
                max: [cx + r0, cy + 0.6 * r0],
            }
        } else {
            ShapeSpec::Disk {
                center: [cx, cy],
                radius: r0,
            }
        };
        let mask = mask_from_shape(&g, &shape).unwrap();
        let m = measure(&mask);
        if m == 0.0 {
            continue;
        }
        let mut v = VectorField::zeros(&g);
        for axis in 0..2 {
            for val in v.component_mut(axis).values_mut() {
                *val = rng.range_f64(-1.0, 1.0);
            }
        }
        let sup = v.sup_norm();
        for axis in 0..2 {
            for val in v.component_mut(axis).values_mut() {
                *val *= tau / sup;
            }
        }
        let lam = principal_eig_drift(&g, &mask, &v, tau, 1e-9)
            .unwrap()
            .lambda;
        let bound = radial_eigen(2, ball_radius_for_measure(m, 2), tau, 2000)
            .unwrap()
            .lambda;
        worst = worst.min(lam / bound - 1.0);
    }
    report(
        "criterion 7 (Faber-Krahn with drift)",
        worst >= -0.02,
        &format!("worst margin {:+.4} (slack -0.02), {}", worst, details),
    );
}

#[test]
fn criterion_08_lagrange_multiplier() {
    // plane fixture: constructed multiplier = 1
    let (g, u, mask) = plane_fixture(128, 1.0);
    let phi = ScalarField::zeros(&g);
    let (hat, _fit) = estimate_lagrange(&u, &phi, 0.0, &mask, &g, 32, 7).unwrap();
    let plane_ok = (hat - 1.0).abs() < 0.05;

    // converged optima carry a positive multiplier
    let (res6, g6, _) = criterion6_run();
    let phi6 = ScalarField::zeros(g6);
    let (hat6, _) =
        estimate_lagrange(&res6.eig.u, &phi6, res6.eig.lambda, &res6.omega, g6, 32, 7).unwrap();

    let (res8, g8) = disk_optimum_256();
    let phi8 = ScalarField::zeros(g8);
    let (hat8, _) =
        estimate_lagrange(&res8.eig.u, &phi8, res8.eig.lambda, &res8.omega, g8, 32, 7).unwrap();
    let (q, _) = optimality_residual(&res8.eig.u, &phi8, hat8, &res8.omega, g8).unwrap();
    let median = q.values[2];
    // the multiplier matches the oracle boundary slope: the golden slope
    // scales as 1/R^2 when the unit ball shrinks to measure pi/4
    let row = golden(2, 0.0);
    let slope_sq = (row.slope_at_r / 0.25).powi(2);
    let slope_ok = (hat8 - slope_sq).abs() / slope_sq < 0.10;
    report(
        "criterion 8 (Lagrange multiplier)",
        plane_ok && hat6 > 0.0 && hat8 > 0.0 && (0.8..=1.2).contains(&median) && slope_ok,
        &format!(
            "plane {:.4} (want 1 +- 5%), optima multipliers {:.4} / {:.4}, median ratio {:.4}, oracle slope^2 {:.4}",
            hat, hat6, hat8, median, slope_sq
        ),
    );
}

#[test]
fn criterion_09_monotonicity_suites() {
    // domain monotonicity of lambda over 20 nested pairs
    let g = make_grid([48, 48], [1.0, 1.0], [0.0, 0.0]).unwrap();
    let mut rng = SplitMix64::new(99);
    let tau = 0.8;
    let mut lambda_ok = true;
    let mut pairs = 0usize;
    while pairs < 20 {
        let x0 = rng.range_f64(0.02, 0.25);
        let y0 = rng.range_f64(0.02, 0.25);
        let x1 = rng.range_f64(0.65, 0.98);
        let y1 = rng.range_f64(0.65, 0.98);
        let inner_margin = rng.range_f64(0.05, 0.15);
        let big = mask_from_shape(
            &g,
            &ShapeSpec::Rectangle {
                min: [x0, y0],
                max: [x1, y1],
            },
        )
        .unwrap();
        let small = mask_from_shape(
            &g,
            &ShapeSpec::Rectangle {
                min: [x0 + inner_margin, y0 + inner_margin],
                max: [x1 - inner_margin, y1 - inner_margin],
            },
        )
        .unwrap();
        let v = VectorField::from_fn(&g, |x, y| {
            let a = (3.0 * x + 1.0).sin();
            let b = (2.0 * y - 0.5).cos();
            let s = (a * a + b * b).sqrt().max(1e-9);
            [tau * a / s, tau * b / s]
        });
        let (ls, lb) = match (
            principal_eig_drift(&g, &small, &v, tau, 1e-10),
            principal_eig_drift(&g, &big, &v, tau, 1e-10),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        lambda_ok &= lb.lambda <= ls.lambda + 1e-8;
        pairs += 1;
    }

    // torsion comparison on 20 nested pairs
    let mut torsion_ok = true;
    let phi = ScalarField::zeros(&g);
    for k in 0..20 {
        let r1 = 0.12 + 0.01 * k as f64;
        let r2 = r1 + 0.1;
        let m1 = mask_from_shape(
            &g,
            &ShapeSpec::Disk {
                center: [0.5, 0.5],
                radius: r1,
            },
        )
        .unwrap();
        let m2 = mask_from_shape(
            &g,
            &ShapeSpec::Disk {
                center: [0.5, 0.5],
                radius: r2,
            },
        )
        .unwrap();
        let w1 = dso::eigen::torsion(&g, &m1, &phi).unwrap();
        let w2 = dso::eigen::torsion(&g, &m2, &phi).unwrap();
        for idx in 0..g.node_count() {
            if w1.values()[idx] > w2.values()[idx] + 1e-10 {
                torsion_ok = false;
            }
        }
    }

    // radial eigenvalue strictly decreasing in tau
    let mut tau_ok = true;
    let mut prev = f64::INFINITY;
    for tau in [0.0, 0.5, 1.0, 2.0] {
        let lam = radial_eigen(2, 1.0, tau, 2000).unwrap().lambda;
        tau_ok &= lam < prev - 1e-8;
        prev = lam;
    }
    report(
        "criterion 9 (monotonicity suites)",
        lambda_ok && torsion_ok && tau_ok,
        &format!(
            "domain monotonicity {}, torsion comparison {}, radial tau-monotonicity {}",
            lambda_ok, torsion_ok, tau_ok
        ),
    );
}

#[test]
fn criterion_10_monotonicity_formulas() {
    // plane fixture: Weiss constant within 3%, Almgren N = 1 within 2%
    let (g, u, _mask) = plane_fixture(128, 1.0);
    let phi = ScalarField::zeros(&g);
    let x0 = [0.5, 0.5];
    let radii = radii_ladder(&g, x0);
    let w = weiss_energy(&u, &phi, 1.0, x0, &radii).unwrap();
    let expect = PI / 2.0;
    let mut plane_w_ok = true;
    for (_, val) in &w {
        plane_w_ok &= (val - expect).abs() / expect < 0.03;
    }
    let prof = almgren_frequency(&u, &phi, x0, &radii, 0.0).unwrap();
    let mut plane_n_ok = true;
    for (_, n, _) in &prof {
        plane_n_ok &= (n - 1.0).abs() < 0.02;
    }

    // converged shape optimum: fitted slope of W(r) + C r nonnegative
    let (res, g8) = disk_optimum_256();
    let phi8 = ScalarField::zeros(g8);
    let (hat, _) =
        estimate_lagrange(&res.eig.u, &phi8, res.eig.lambda, &res.omega, g8, 32, 7).unwrap();
    let centers = select_profile_centers(&res.omega, g8, 3);
    let mut slope_ok = !centers.is_empty();
    for c in &centers {
        let ladder = radii_ladder(g8, *c);
        let prof = weiss_energy(&res.eig.u, &phi8, hat, *c, &ladder).unwrap();
        let cfit = fitted_weiss_constant(&prof);
        // least-squares slope of W(r) + C r over the ladder
        let pts: Vec<(f64, f64)> = prof.iter().map(|(r, w)| (*r, w + cfit * r)).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        slope_ok &= slope >= -1e-9;
    }

    // converged drift optimum: exp(2 tau r) N(r) nondecreasing (2% dips)
    let (fp, gd, maskd) = drift_optimum_inner();
    let phid = ScalarField::zeros(gd);
    let centers = select_profile_centers(maskd, gd, 3);
    let mut drift_n_ok = !centers.is_empty();
    for c in &centers {
        let ladder = radii_ladder(gd, *c);
        let prof = almgren_frequency(&fp.eig.u, &phid, *c, &ladder, 1.0).unwrap();
        for k in 1..prof.len() {
            drift_n_ok &= prof[k].2 >= prof[k - 1].2 * (1.0 - 0.02);
        }
    }
    report(
        "criterion 10 (monotonicity formulas)",
        plane_w_ok && plane_n_ok && slope_ok && drift_n_ok,
        &format!(
            "plane Weiss {}, plane Almgren {}, optimum Weiss slope {}, drift Almgren {}",
            plane_w_ok, plane_n_ok, slope_ok, drift_n_ok
        ),
    );
}

#[test]
fn criterion_11_determinism() {
    // two CLI runs of the criterion 6 configuration, bit-identical outputs
    let dir = std::env::temp_dir().join("dso-acceptance-determinism");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config = r#"{
  "command": "optimize-shape",
  "grid": { "n": [192, 192], "extent": [3.0, 3.0] },
  "m": 0.7853981633974483,
  "seed": 11
}
"#;
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, config).unwrap();
    let bin = env!("CARGO_BIN_EXE_dso");
    for out in ["a", "b"] {
        let status = std::process::Command::new(bin)
            .args([
                "optimize-shape",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                dir.join(out).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success(), "run {} failed", out);
    }
    let mut all_ok = true;
    let mut checked = Vec::new();
    for f in [
        "omega.msk",
        "u.fld",
        "eig.csv",
        "history.csv",
        "resolved_config.json",
    ] {
        let a = std::fs::read(dir.join("a").join(f)).unwrap();
        let b = std::fs::read(dir.join("b").join(f)).unwrap();
        let same = a == b;
        all_ok &= same;
        checked.push(format!("{}:{}", f, if same { "ok" } else { "DIFFERS" }));
    }
    report("criterion 11 (determinism)", all_ok, &checked.join(", "));
}

#[test]
fn criterion_12_perimeter_and_lipschitz_proxies() {
    let (coarse, _gc) = coarse_optimum_96();
    let (fine, _gf, _) = criterion6_run();
    let pc = perimeter_estimate(&coarse.omega);
    let pf = perimeter_estimate(&fine.omega);
    let ratio_p = pf / pc;
    let perimeter_ok = (1.0 / 1.3..=1.3).contains(&ratio_p);
    let ratio_l = lipschitz_check(&coarse.eig.u, &fine.eig.u).unwrap();
    let lipschitz_ok = (0.8..=1.25).contains(&ratio_l);
    report(
        "criterion 12 (perimeter and Lipschitz proxies)",
        perimeter_ok && lipschitz_ok,
        &format!(
            "perimeter {:.4} -> {:.4} (ratio {:.3}), max-gradient ratio {:.3}",
            pc, pf, ratio_p, ratio_l
        ),
    );
}
