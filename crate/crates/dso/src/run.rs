//! Command dispatch: build the inputs from a validated configuration,
//! call the solvers, write every artifact into the output directory.

use crate::config::{Command, DiagnoseInputs, DriftConfig, DriftData, RunConfig, ShapeConfig};
use crate::diagnostics::{diagnose, DiagnosticsReport};
use crate::eigen::{
    optimal_drift_fixed_point, principal_eig_drift, principal_eig_selfadjoint, EigenResult,
};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::io;
use crate::mask::DomainMask;
use crate::radial::radial_eigen;
use crate::shape::{joint_optimize, optimize_shape_fixed_drift, Drift, ShapeOptConfig};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Exit status of a run: `Converged` maps to process code 0, `Flagged`
/// (ran, but a convergence flag is down) to 2. Hard errors map to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Flagged,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::Flagged => 2,
        }
    }
}

fn ensure_out_dir(config: &RunConfig, out_override: Option<&Path>) -> Result<PathBuf> {
    let dir = match out_override {
        Some(p) => p.to_path_buf(),
        None => config
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from("out")),
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_resolved_config(config: &RunConfig, dir: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(config).map_err(|e| Error::Config {
        path: "resolved_config.json".into(),
        message: e.to_string(),
    })?;
    fs::write(dir.join("resolved_config.json"), text + "\n")?;
    Ok(())
}

struct Problem {
    grid: Grid,
    box_mask: DomainMask,
    omega: DomainMask,
}

fn build_problem(config: &RunConfig, base: &Path) -> Result<Problem> {
    let grid = config.grid.build()?;
    let box_mask = config
        .box_shape
        .clone()
        .unwrap_or(ShapeConfig::Full)
        .build(&grid, base)?;
    let omega = match &config.domain_shape {
        Some(s) => s.build(&grid, base)?.intersect(&box_mask)?,
        None => box_mask.clone(),
    };
    Ok(Problem {
        grid,
        box_mask,
        omega,
    })
}

fn drift_to_shape_drift(data: &DriftData) -> Drift {
    match data {
        DriftData::Zero => Drift::None,
        DriftData::GradPhi { phi } => Drift::GradientOf(phi.clone()),
        DriftData::Field { v, tau } => Drift::Field {
            v: v.clone(),
            tau: *tau,
        },
        DriftData::Optimal { .. } => Drift::None,
    }
}

fn write_eig_bundle(dir: &Path, eig: &EigenResult, heatmap: bool) -> Result<()> {
    fs::write(dir.join("eig.csv"), io::eigen_csv(eig))?;
    fs::write(dir.join("u.fld"), io::write_fld(&eig.u))?;
    if heatmap {
        fs::write(dir.join("u.ppm"), io::field_ppm(&eig.u))?;
    }
    Ok(())
}

fn write_drift_fields(dir: &Path, v: &VectorField) -> Result<()> {
    fs::write(dir.join("v_x.fld"), io::write_fld(v.component(0)))?;
    fs::write(dir.join("v_y.fld"), io::write_fld(v.component(1)))?;
    Ok(())
}

fn report_csv(rep: &DiagnosticsReport) -> String {
    let f = io::fmt_f64;
    let mut out = String::new();
    let _ = writeln!(out, "block,key,value");
    let _ = writeln!(out, "lagrange,lambda_u,{}", f(rep.lambda_u));
    let _ = writeln!(
        out,
        "lagrange,fit_residual,{}",
        f(rep.lagrange_fit_residual)
    );
    for (name, k) in [("min", 0), ("q1", 1), ("median", 2), ("q3", 3), ("max", 4)] {
        let _ = writeln!(
            out,
            "optimality,{},{}",
            name,
            f(rep.opt_residual_stats.values[k])
        );
        let _ = writeln!(
            out,
            "optimality,{}_cell,{}",
            name, rep.opt_residual_stats.cells[k]
        );
    }
    let _ = writeln!(
        out,
        "optimality,interior_cells,{}",
        rep.opt_residual_stats.count
    );
    if let Some(fraction) = rep.boundary_contact_fraction {
        let _ = writeln!(out, "optimality,contact_fraction,{}", f(fraction));
    }
    let _ = writeln!(out, "perimeter,perimeter,{}", f(rep.perimeter));
    if let Some(ratio) = rep.lipschitz_ratio {
        let _ = writeln!(out, "lipschitz,max_gradient_ratio,{}", f(ratio));
    }
    let _ = writeln!(out, "nondegeneracy,min_ratio,{}", f(rep.nondeg_min));
    for (r, v) in &rep.nondeg_profile {
        let _ = writeln!(out, "nondegeneracy,r={},{}", f(*r), f(*v));
    }
    out.push_str("\nblock,center_x,center_y,r,value\n");
    for (p, c) in rep
        .weiss_profiles
        .iter()
        .zip(&rep.weiss_monotonicity_constants)
    {
        for (r, w) in &p.rows {
            let _ = writeln!(
                out,
                "weiss,{},{},{},{}",
                f(p.center[0]),
                f(p.center[1]),
                f(*r),
                f(*w)
            );
        }
        let _ = writeln!(
            out,
            "weiss_constant,{},{},,{}",
            f(p.center[0]),
            f(p.center[1]),
            f(*c)
        );
    }
    for p in &rep.density_profiles {
        for (r, d) in &p.rows {
            let _ = writeln!(
                out,
                "density,{},{},{},{}",
                f(p.center[0]),
                f(p.center[1]),
                f(*r),
                f(*d)
            );
        }
    }
    out.push_str("\nblock,center_x,center_y,r,N,exp_2taur_N\n");
    for p in &rep.almgren_profiles {
        for (r, n, en) in &p.rows {
            let _ = writeln!(
                out,
                "almgren,{},{},{},{},{}",
                f(p.center[0]),
                f(p.center[1]),
                f(*r),
                f(*n),
                f(*en)
            );
        }
    }
    out
}

/// Execute a validated configuration. Artifacts land in the output
/// directory; the status distinguishes clean convergence from flagged
/// results.
pub fn run(config: &RunConfig, base: &Path, out_override: Option<&Path>) -> Result<RunStatus> {
    let dir = ensure_out_dir(config, out_override)?;
    write_resolved_config(config, &dir)?;
    let tol = &config.tolerances;
    match config.command {
        Command::Eig => {
            let p = build_problem(config, base)?;
            let drift = config.drift.load(&p.grid, base)?;
            let (eig, v) = match &drift {
                DriftData::Zero => (
                    principal_eig_selfadjoint(
                        &p.grid,
                        &p.omega,
                        &ScalarField::zeros(&p.grid),
                        tol.eig_tol,
                    )?,
                    None,
                ),
                DriftData::GradPhi { phi } => (
                    principal_eig_selfadjoint(&p.grid, &p.omega, phi, tol.eig_tol)?,
                    None,
                ),
                DriftData::Field { v, tau } => (
                    principal_eig_drift(&p.grid, &p.omega, v, *tau, tol.eig_tol)?,
                    None,
                ),
                DriftData::Optimal { tau } => {
                    let fp = optimal_drift_fixed_point(
                        &p.grid,
                        &p.omega,
                        *tau,
                        tol.tol_lambda,
                        tol.grad_tol,
                    )?;
                    (fp.eig, Some(fp.drift))
                }
            };
            write_eig_bundle(&dir, &eig, config.heatmap)?;
            if let Some(v) = v {
                write_drift_fields(&dir, &v)?;
            }
            Ok(RunStatus::Converged)
        }
        Command::OptimizeDrift => {
            let p = build_problem(config, base)?;
            let tau = config.tau.unwrap_or(match &config.drift {
                DriftConfig::Optimal { tau } => *tau,
                _ => 0.0,
            });
            let fp =
                optimal_drift_fixed_point(&p.grid, &p.omega, tau, tol.tol_lambda, tol.grad_tol)?;
            write_eig_bundle(&dir, &fp.eig, config.heatmap)?;
            write_drift_fields(&dir, &fp.drift)?;
            let mut extra = String::from("lambda,nonlinear_residual,steps,damped\n");
            let _ = writeln!(
                extra,
                "{},{},{},{}",
                io::fmt_f64(fp.eig.lambda),
                io::fmt_f64(fp.nonlinear_residual),
                fp.lambda_history.len(),
                if fp.damped { 1 } else { 0 }
            );
            fs::write(dir.join("fixed_point.csv"), extra)?;
            Ok(RunStatus::Converged)
        }
        Command::OptimizeShape | Command::Joint => {
            let p = build_problem(config, base)?;
            let m = config.m.ok_or_else(|| Error::Config {
                path: "m".into(),
                message: "measure budget m is required".into(),
            })?;
            let mut cfg = ShapeOptConfig::new(m);
            cfg.tol_lambda = tol.tol_lambda;
            cfg.eig_tol = tol.eig_tol;
            cfg.seed = config.seed;
            if let Some(ps) = config.penalty_start {
                cfg.penalty_start = Some(ps);
            }
            if let Some(g) = config.penalty_growth {
                cfg.penalty_growth = g;
            }
            if let Some(mo) = config.max_outer {
                cfg.max_outer = mo;
            }
            let (res, v) = if config.command == Command::Joint {
                let tau = config.tau.unwrap_or(0.0);
                let (res, v) = joint_optimize(&p.grid, &p.box_mask, m, tau, &cfg)?;
                (res, Some(v))
            } else {
                let drift = config.drift.load(&p.grid, base)?;
                let sd = drift_to_shape_drift(&drift);
                (
                    optimize_shape_fixed_drift(&p.grid, &p.box_mask, &sd, &cfg)?,
                    None,
                )
            };
            fs::write(dir.join("omega.msk"), io::write_msk(&res.omega))?;
            write_eig_bundle(&dir, &res.eig, config.heatmap)?;
            fs::write(dir.join("history.csv"), io::history_csv(&res.history))?;
            if let Some(v) = v {
                write_drift_fields(&dir, &v)?;
            }
            if res.converged {
                Ok(RunStatus::Converged)
            } else {
                Ok(RunStatus::Flagged)
            }
        }
        Command::Diagnose => {
            let inputs: &DiagnoseInputs = config.inputs.as_ref().ok_or_else(|| Error::Config {
                path: "inputs".into(),
                message: "diagnose requires inputs".into(),
            })?;
            let u = io::read_fld_file(&base.join(&inputs.u_file))?;
            let omega = io::read_msk_file(&base.join(&inputs.mask_file))?;
            let grid = u.grid().clone();
            if !omega.grid().same_as(&grid) {
                return Err(Error::GridMismatch("mask and field grids disagree".into()));
            }
            let phi = match &inputs.phi_file {
                Some(f) => io::read_fld_file(&base.join(f))?,
                None => ScalarField::zeros(&grid),
            };
            let mut rep = diagnose(
                &u,
                &phi,
                inputs.lambda,
                &omega,
                &grid,
                inputs.tau,
                config.seed,
            )?;
            if let Some(fine) = &inputs.u_fine_file {
                let u_fine = io::read_fld_file(&base.join(fine))?;
                rep.lipschitz_ratio = Some(crate::diagnostics::lipschitz_check(&u, &u_fine)?);
            }
            fs::write(dir.join("report.csv"), report_csv(&rep))?;
            Ok(RunStatus::Converged)
        }
        Command::Radial => {
            let spec = config.radial.as_ref().ok_or_else(|| Error::Config {
                path: "radial".into(),
                message: "radial command requires the radial block".into(),
            })?;
            let sol = radial_eigen(spec.d, spec.r, spec.tau, spec.n_nodes)?;
            fs::write(dir.join("radial.csv"), io::golden_csv(&[sol], None))?;
            Ok(RunStatus::Converged)
        }
        Command::Golden => {
            let rows = golden_table()?;
            let epoch = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            fs::write(
                dir.join("radial_golden.csv"),
                io::golden_csv(&rows, Some(epoch)),
            )?;
            Ok(RunStatus::Converged)
        }
    }
}

/// The standard golden table: unit ball in d = 2 at tau in {0, 1} and
/// d = 3 at tau = 0, all at n = 100000 radial nodes.
pub fn golden_table() -> Result<Vec<crate::radial::RadialSolution>> {
    let n = 100_000;
    Ok(vec![
        radial_eigen(2, 1.0, 0.0, n)?,
        radial_eigen(2, 1.0, 1.0, n)?,
        radial_eigen(3, 1.0, 0.0, n)?,
    ])
}
