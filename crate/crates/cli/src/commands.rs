//! Command implementations. Each command builds the coefficient set from the
//! configuration, runs the corresponding core operation, writes its artifacts
//! under the output directory, and returns a process exit code.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use lichnerowicz::analysis::{check_assumptions, compute_bracket};
use lichnerowicz::coefficients::{
    assemble_geometric, manufacture_h, validate_coefficients, AssemblyDiagnostics, CoefficientSet,
    GeometricData,
};
use lichnerowicz::error::{Error, Result};
use lichnerowicz::grid::{make_grid, Grid, ScalarField, SymTensorField, VectorField};
use lichnerowicz::io::{read_field, write_coefficient_set, write_field};
use lichnerowicz::nonexistence::ne_conditions;
use lichnerowicz::solver::{outer_solve, residual, verify_solution};
use lichnerowicz::truncation::TruncationContext;
use serde::Serialize;
use serde_json::json;

use crate::config::{CoefficientsSection, FieldSpec, RunConfig};
use crate::expr;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_ASSUMPTIONS: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Maps core errors onto the documented exit codes.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Precondition(_) | Error::NoSupersolution(_) => EXIT_ASSUMPTIONS,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Inconsistent(_) => EXIT_INTERNAL,
        _ => EXIT_CONFIG,
    }
}

pub struct Invocation {
    pub cfg: RunConfig,
    pub seed: Option<u64>,
}

fn build_grid(cfg: &RunConfig) -> Result<Grid> {
    make_grid(cfg.grid.d, &cfg.grid.n, &cfg.grid.l)
}

fn field_from_spec(grid: &Grid, spec: &FieldSpec) -> Result<ScalarField> {
    match spec {
        FieldSpec::Const(v) => Ok(ScalarField::constant(grid, *v)),
        FieldSpec::Expr(src) => {
            let e = expr::parse(src, grid.dim())?;
            Ok(ScalarField::from_fn(grid, |x| e.eval(x)))
        }
        FieldSpec::File { file } => {
            let path = Path::new(file);
            let dir = path.parent().unwrap_or_else(|| Path::new("."));
            let name = path
                .file_name()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Config(format!("bad field path '{file}'")))?;
            let f = read_field(dir, name)?;
            if f.grid() != grid {
                return Err(Error::Config(format!(
                    "field '{file}' lives on a different grid than the configuration"
                )));
            }
            ScalarField::from_values(grid, f.values().to_vec())
        }
    }
}

/// The coefficient set plus, for manufactured mode, the reference solution
/// and, for geometric mode, the assembly diagnostics.
pub fn build_coefficients(
    cfg: &RunConfig,
) -> Result<(
    Grid,
    CoefficientSet,
    Option<ScalarField>,
    Option<AssemblyDiagnostics>,
)> {
    let grid = build_grid(cfg)?;
    match &cfg.coefficients {
        CoefficientsSection::Direct {
            n,
            a,
            b,
            csq,
            dsq,
            cd,
            h,
        } => {
            let cs = CoefficientSet::new(
                *n,
                field_from_spec(&grid, a)?,
                field_from_spec(&grid, b)?,
                field_from_spec(&grid, csq)?,
                field_from_spec(&grid, dsq)?,
                field_from_spec(&grid, cd)?,
                field_from_spec(&grid, h)?,
            )?;
            Ok((grid, cs, None, None))
        }
        CoefficientsSection::Geometric {
            n,
            tau,
            pi,
            nu,
            w,
            sigma,
            r,
        } => {
            let d = grid.dim();
            if w.len() != d {
                return Err(Error::Config(format!(
                    "w needs {d} components, got {}",
                    w.len()
                )));
            }
            if sigma.len() != d * (d + 1) / 2 {
                return Err(Error::Config(format!(
                    "sigma needs {} upper-triangle components, got {}",
                    d * (d + 1) / 2,
                    sigma.len()
                )));
            }
            let w_field = VectorField::new(
                w.iter()
                    .map(|s| field_from_spec(&grid, s))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let sigma_field = SymTensorField::new(
                &grid,
                sigma
                    .iter()
                    .map(|s| field_from_spec(&grid, s))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            let r_field = match r {
                Some(spec) => field_from_spec(&grid, spec)?,
                None => ScalarField::constant(&grid, 0.0),
            };
            let gd = GeometricData {
                tau: field_from_spec(&grid, tau)?,
                pi: field_from_spec(&grid, pi)?,
                nu: *nu,
                w: w_field,
                sigma: sigma_field,
                r: r_field,
                r_override: r.is_some(),
            };
            let (cs, diag) = assemble_geometric(&gd, *n)?;
            Ok((grid, cs, None, Some(diag)))
        }
        CoefficientsSection::Manufactured {
            n,
            u_star,
            a,
            b,
            csq,
            dsq,
            cd,
        } => {
            let u = field_from_spec(&grid, u_star)?;
            let cs = manufacture_h(
                &u,
                &field_from_spec(&grid, a)?,
                &field_from_spec(&grid, b)?,
                &field_from_spec(&grid, csq)?,
                &field_from_spec(&grid, dsq)?,
                &field_from_spec(&grid, cd)?,
                *n,
            )?;
            Ok((grid, cs, Some(u), None))
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output.directory);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn timestamp() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn emit_report<T: Serialize>(
    dir: &Path,
    file: &str,
    command: &str,
    seed: Option<u64>,
    body: &T,
) -> Result<()> {
    let doc = json!({
        "command": command,
        "timestamp": timestamp(),
        "seed": seed,
        "report": body,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    fs::write(dir.join(file), &text)?;
    println!("{text}");
    Ok(())
}

pub fn cmd_check(inv: &Invocation) -> Result<i32> {
    let (_, cs, _, _) = build_coefficients(&inv.cfg)?;
    let validation = validate_coefficients(&cs);
    let report = check_assumptions(&cs)?;
    let dir = out_dir(&inv.cfg)?;
    emit_report(
        &dir,
        "check_report.json",
        "check",
        inv.seed,
        &json!({"assumptions": report, "validation": validation}),
    )?;
    Ok(if report.all_pass && validation.all_pass {
        EXIT_OK
    } else {
        EXIT_ASSUMPTIONS
    })
}

pub fn cmd_solve(inv: &Invocation) -> Result<i32> {
    let (_, cs, _, _) = build_coefficients(&inv.cfg)?;
    let assumptions = check_assumptions(&cs)?;
    let dir = out_dir(&inv.cfg)?;
    if !assumptions.all_pass {
        emit_report(
            &dir,
            "solve_report.json",
            "solve",
            inv.seed,
            &json!({"assumptions": assumptions, "solve": null}),
        )?;
        return Ok(EXIT_ASSUMPTIONS);
    }
    let bracket = compute_bracket(&cs, &assumptions)?;
    let ctx = TruncationContext::new(&cs, bracket)?;
    let report = outer_solve(&cs, &ctx, &inv.cfg.solver)?;
    let verify = if report.u.values().iter().all(|&v| v > 0.0) {
        Some(verify_solution(&report.u, &cs, &bracket)?)
    } else {
        None
    };

    if inv.cfg.output.emit_trace {
        let mut csv = String::from("iter,delta_inf,res_inf,res_l2,u_min,u_max\n");
        for row in &report.trace {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.iter, row.delta_inf, row.res_inf, row.res_l2, row.u_min, row.u_max
            ));
        }
        let mut f = fs::File::create(dir.join("trace.csv"))?;
        f.write_all(csv.as_bytes())?;
    }
    if inv.cfg.output.emit_fields {
        write_field(&dir, "u", &report.u)?;
    }
    emit_report(
        &dir,
        "solve_report.json",
        "solve",
        inv.seed,
        &json!({"assumptions": assumptions, "solve": report, "verify": verify}),
    )?;
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    })
}

pub fn cmd_nonexist(inv: &Invocation) -> Result<i32> {
    let (_, cs, _, _) = build_coefficients(&inv.cfg)?;
    let report = ne_conditions(&cs)?;
    let dir = out_dir(&inv.cfg)?;
    emit_report(&dir, "nonexist_report.json", "nonexist", inv.seed, &report)?;
    Ok(if report.consistency { EXIT_OK } else { EXIT_INTERNAL })
}

pub fn cmd_assemble(inv: &Invocation) -> Result<i32> {
    if !matches!(inv.cfg.coefficients, CoefficientsSection::Geometric { .. }) {
        return Err(Error::Config(
            "assemble requires coefficients.mode = \"geometric\"".into(),
        ));
    }
    let (_, cs, _, diag) = build_coefficients(&inv.cfg)?;
    let dir = out_dir(&inv.cfg)?;
    write_coefficient_set(&dir.join("coefficients"), &cs)?;
    let validation = validate_coefficients(&cs);
    emit_report(
        &dir,
        "assemble_report.json",
        "assemble",
        inv.seed,
        &json!({"diagnostics": diag, "validation": validation}),
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_manufacture(inv: &Invocation) -> Result<i32> {
    if !matches!(inv.cfg.coefficients, CoefficientsSection::Manufactured { .. }) {
        return Err(Error::Config(
            "manufacture requires coefficients.mode = \"manufactured\"".into(),
        ));
    }
    let (_, cs, u_star, _) = build_coefficients(&inv.cfg)?;
    let u_star = u_star.expect("manufactured mode always yields a reference solution");
    let dir = out_dir(&inv.cfg)?;
    write_coefficient_set(&dir.join("coefficients"), &cs)?;
    write_field(&dir, "u_star", &u_star)?;
    let (_, res_inf, res_l2) = residual(&u_star, &cs)?;
    emit_report(
        &dir,
        "manufacture_report.json",
        "manufacture",
        inv.seed,
        &json!({"residual_inf": res_inf, "residual_l2": res_l2}),
    )?;
    Ok(EXIT_OK)
}

pub fn run(command: &str, inv: &Invocation) -> Result<i32> {
    match command {
        "check" => cmd_check(inv),
        "solve" => cmd_solve(inv),
        "nonexist" => cmd_nonexist(inv),
        "assemble" => cmd_assemble(inv),
        "manufacture" => cmd_manufacture(inv),
        other => Err(Error::Config(format!(
            "unknown command '{other}' (expected check, solve, nonexist, assemble, manufacture)"
        ))),
    }
}
