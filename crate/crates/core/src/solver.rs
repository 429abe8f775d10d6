//! Monotone fixed-point iteration u_{k+1} = (A + F2)^-1 F1(u_k) started from
//! the constant subsolution, with two realizations of the inner inverse:
//! a damped spectral contraction and a Newton-PCG mode, both gated by the
//! same residual postcondition. The final iterate is verified against the
//! untruncated equation.

use serde::{Deserialize, Serialize};

use crate::analysis::{check_assumptions, Bracket};
use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{field_min, inv_helmholtz, laplacian, norm_inf, norm_l2, ScalarField};
use crate::power::powr;
use crate::truncation::{f2_derivative, nemytskii_apply, Nonlinearity, TruncationContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerMethod {
    Contraction,
    Newton,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sup-norm increment threshold for the outer iteration.
    pub tol_outer: f64,
    /// Relative residual threshold for each inner solve.
    pub tol_inner: f64,
    /// Final untruncated residual threshold.
    pub tol_residual: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub inner_method: InnerMethod,
    pub monotonicity_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_outer: 1e-10,
            tol_inner: 1e-12,
            tol_residual: 1e-8,
            max_outer: 500,
            max_inner: 10_000,
            inner_method: InnerMethod::Contraction,
            monotonicity_tolerance: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tol_outer", self.tol_outer),
            ("tol_inner", self.tol_inner),
            ("tol_residual", self.tol_residual),
            ("monotonicity_tolerance", self.monotonicity_tolerance),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config("iteration budgets must be positive".into()));
        }
        Ok(())
    }
}

/// Strong form of the operator A: -Lap u + (h - csq) u.
pub fn apply_a(u: &ScalarField, cs: &CoefficientSet) -> ScalarField {
    laplacian(u).scale(-1.0).add(&cs.q().mul(u))
}

/// Bilinear form value [A(u)](v) = int grad u . grad v + (h - csq) u v.
pub fn a_form(u: &ScalarField, v: &ScalarField, cs: &CoefficientSet) -> f64 {
    use crate::grid::{gradient, integrate};
    let gu = gradient(u);
    let gv = gradient(v);
    let mut total = integrate(&cs.q().mul(&u.mul(v)));
    for (a, b) in gu.components().iter().zip(gv.components()) {
        total += integrate(&a.mul(b));
    }
    total
}

/// Untruncated nonlinear right-hand side
/// dsq u^(2*2s+1) + 2 cd u^(2s+1) - b u^(2s-1) + a u^-(2s+1); needs u > 0.
pub fn nonlinear_rhs(u: &ScalarField, cs: &CoefficientSet) -> Result<ScalarField> {
    if field_min(u) <= 0.0 {
        return Err(Error::Domain(
            "nonlinear right-hand side needs u > 0 at every grid point".into(),
        ));
    }
    let ts = cs.twostar();
    let (a, b, dsq, cd) = (
        cs.a().values(),
        cs.b().values(),
        cs.dsq().values(),
        cs.cd().values(),
    );
    let vals = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            dsq[i] * powr(ui, 2.0 * ts + 1.0) + 2.0 * cd[i] * powr(ui, ts + 1.0)
                - b[i] * powr(ui, ts - 1.0)
                + a[i] * powr(ui, -(ts + 1.0))
        })
        .collect();
    ScalarField::from_values(u.grid(), vals)
}

/// Residual of the untruncated equation: -Lap u + (h-csq) u - RHS(u),
/// returned with its sup and L2 norms.
pub fn residual(u: &ScalarField, cs: &CoefficientSet) -> Result<(ScalarField, f64, f64)> {
    let res = apply_a(u, cs).sub(&nonlinear_rhs(u, cs)?);
    let inf = norm_inf(&res);
    let l2 = norm_l2(&res);
    Ok((res, inf, l2))
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub res_inf: f64,
    pub res_l2: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub in_bracket: bool,
    /// min u - theta_low and theta_high - max u.
    pub bracket_margins: (f64, f64),
}

/// Residual norms plus bracket membership and positivity margin.
pub fn verify_solution(
    u: &ScalarField,
    cs: &CoefficientSet,
    bracket: &Bracket,
) -> Result<VerifyReport> {
    let (_, res_inf, res_l2) = residual(u, cs)?;
    let u_min = field_min(u);
    let u_max = u.max();
    let lo_margin = u_min - bracket.theta_low;
    let hi_margin = bracket.theta_high - u_max;
    Ok(VerifyReport {
        res_inf,
        res_l2,
        u_min,
        u_max,
        in_bracket: lo_margin >= -1e-12 && hi_margin >= -1e-12,
        bracket_margins: (lo_margin, hi_margin),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InnerStats {
    pub iters: usize,
    /// Max observed ratio of successive increment norms (contraction mode).
    pub contraction_factor: Option<f64>,
    /// Shift used by the contraction preconditioner.
    pub shift: f64,
}

fn inner_gate(cs: &CoefficientSet) -> Result<ScalarField> {
    let q = cs.q();
    let q_min = field_min(&q);
    if q_min < 0.0 {
        return Err(Error::Precondition(format!(
            "h - |C|^2 is negative at a grid point (min = {q_min:e}); the inner solver requires it nonnegative"
        )));
    }
    Ok(q)
}

/// Solve -Lap u + (h-csq) u + f2(., u) = g.
///
/// Contraction mode: u <- (-Lap + c)^-1 [g - (q - c) u - f2(u)] with
/// c = esssup q + L + 1, L the Lipschitz bound of f2 on the bracket.
/// Newton mode: damped Newton with spectrally preconditioned CG.
pub fn inner_solve(
    g: &ScalarField,
    cs: &CoefficientSet,
    ctx: &TruncationContext,
    cfg: &SolverConfig,
    initial: Option<&ScalarField>,
) -> Result<(ScalarField, InnerStats)> {
    cfg.validate()?;
    let q = inner_gate(cs)?;
    let lip = ctx.lipschitz_f2(cs);
    let shift = cs.q().max() + lip + 1.0;
    let tol = cfg.tol_inner * (1.0 + norm_inf(g));
    let mid = 0.5 * (ctx.bracket().theta_low + ctx.bracket().theta_high);
    let u0 = initial
        .cloned()
        .unwrap_or_else(|| ScalarField::constant(g.grid(), mid));

    match cfg.inner_method {
        InnerMethod::Contraction => contraction_solve(g, cs, ctx, cfg, &q, shift, tol, u0),
        InnerMethod::Newton => newton_solve(g, cs, ctx, cfg, &q, shift, tol, u0),
    }
}

#[allow(clippy::too_many_arguments)]
fn contraction_solve(
    g: &ScalarField,
    cs: &CoefficientSet,
    ctx: &TruncationContext,
    cfg: &SolverConfig,
    q: &ScalarField,
    shift: f64,
    tol: f64,
    mut u: ScalarField,
) -> Result<(ScalarField, InnerStats)> {
    let q_minus_c = q.map(|v| v - shift);
    let mut prev_delta: Option<f64> = None;
    let mut factor_max: Option<f64> = None;
    for iter in 1..=cfg.max_inner {
        let f2u = nemytskii_apply(&u, Nonlinearity::F2, cs, ctx);
        let rhs = g.sub(&q_minus_c.mul(&u)).sub(&f2u);
        let u_next = inv_helmholtz(&rhs, shift)?;
        let diff = u_next.sub(&u);
        let delta = norm_inf(&diff);
        if let Some(pd) = prev_delta {
            // only meaningful while increments are well above rounding noise
            if pd > 1e-11 && delta > 0.0 {
                let ratio = delta / pd;
                factor_max = Some(factor_max.map_or(ratio, |m: f64| m.max(ratio)));
            }
        }
        prev_delta = Some(delta);
        // residual identity: res(u_m) = (-Lap + c)(u_m - u_{m+1})
        let res = laplacian(&diff).scale(-1.0).sub(&diff.scale(shift));
        let res_inf = norm_inf(&res);
        let stalled = delta <= 100.0 * f64::EPSILON * norm_inf(&u_next).max(1.0);
        u = u_next;
        if res_inf < tol || stalled {
            // the identity measures the residual at the previous iterate;
            // confirm at the accepted one, allowing the rounding floor of
            // the evaluated operator terms
            let (res, opscale) = inner_residual(&u, g, q, cs, ctx);
            let tol_eff = tol.max(100.0 * f64::EPSILON * opscale);
            if norm_inf(&res) < tol_eff {
                return Ok((
                    u,
                    InnerStats {
                        iters: iter,
                        contraction_factor: factor_max,
                        shift,
                    },
                ));
            }
        }
    }
    Err(Error::NonConvergence {
        context: "inner contraction".into(),
        iters: cfg.max_inner,
        residual: prev_delta.unwrap_or(f64::NAN) * shift,
    })
}

/// Residual of the truncated inner equation together with the magnitude of
/// the terms that produced it; the latter sets the attainable rounding floor.
fn inner_residual(
    u: &ScalarField,
    g: &ScalarField,
    q: &ScalarField,
    cs: &CoefficientSet,
    ctx: &TruncationContext,
) -> (ScalarField, f64) {
    let lap = laplacian(u);
    let qu = q.mul(u);
    let f2u = nemytskii_apply(u, Nonlinearity::F2, cs, ctx);
    let res = lap.scale(-1.0).add(&qu).add(&f2u).sub(g);
    let opscale = norm_inf(&lap) + norm_inf(&qu) + norm_inf(&f2u) + norm_inf(g);
    (res, opscale)
}

fn dot(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

/// Preconditioned CG for (-Lap + w) x = rhs with preconditioner (-Lap + cbar)^-1.
fn pcg(
    w: &ScalarField,
    rhs: &ScalarField,
    rel_tol: f64,
    max_iters: usize,
) -> Result<ScalarField> {
    let grid = rhs.grid();
    let cbar = {
        let mean =
            w.values().iter().sum::<f64>() / w.grid().len() as f64;
        mean.max(1e-10)
    };
    let mut x = ScalarField::constant(grid, 0.0);
    let mut r = rhs.clone();
    let rhs_norm = dot(&r, &r).sqrt().max(1e-300);
    let mut z = inv_helmholtz(&r, cbar)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iters {
        if dot(&r, &r).sqrt() <= rel_tol * rhs_norm {
            return Ok(x);
        }
        let ap = laplacian(&p).scale(-1.0).add(&w.mul(&p));
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // operator lost definiteness numerically; bail with current iterate
            return Ok(x);
        }
        let alpha = rz / pap;
        x = x.add(&p.scale(alpha));
        r = r.sub(&ap.scale(alpha));
        z = inv_helmholtz(&r, cbar)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = z.add(&p.scale(beta));
    }
    Ok(x)
}

#[allow(clippy::too_many_arguments)]
fn newton_solve(
    g: &ScalarField,
    cs: &CoefficientSet,
    ctx: &TruncationContext,
    cfg: &SolverConfig,
    q: &ScalarField,
    shift: f64,
    tol: f64,
    mut u: ScalarField,
) -> Result<(ScalarField, InnerStats)> {
    let max_newton = cfg.max_inner.min(200);
    let mut res_norm = f64::INFINITY;
    for iter in 1..=max_newton {
        let (res, opscale) = inner_residual(&u, g, q, cs, ctx);
        res_norm = norm_inf(&res);
        let tol_eff = tol.max(100.0 * f64::EPSILON * opscale);
        if res_norm < tol_eff {
            return Ok((
                u,
                InnerStats {
                    iters: iter,
                    contraction_factor: None,
                    shift,
                },
            ));
        }
        // Jacobian weight q + f2'(u); keep it positive where the clamp flattens f2
        let bp = ctx.b_plus().values();
        let a = cs.a().values();
        let w = ScalarField::from_values(
            u.grid(),
            u.values()
                .iter()
                .enumerate()
                .map(|(i, &ui)| {
                    (q.values()[i] + f2_derivative(bp[i], a[i], ui, ctx)).max(1e-10)
                })
                .collect(),
        )?;
        let cg_tol = (res_norm / (1.0 + norm_inf(g))).min(1e-2).max(1e-13);
        let step = pcg(&w, &res.scale(-1.0), cg_tol, 500)?;
        // damping: halve until the residual does not grow
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = u.add(&step.scale(lambda));
            let f2c = nemytskii_apply(&candidate, Nonlinearity::F2, cs, ctx);
            let res_c = laplacian(&candidate)
                .scale(-1.0)
                .add(&q.mul(&candidate))
                .add(&f2c)
                .sub(g);
            if norm_inf(&res_c) <= res_norm * (1.0 - 1e-4 * lambda) || lambda < 1e-8 {
                accepted = Some(candidate);
                break;
            }
            lambda *= 0.5;
        }
        u = accepted.ok_or(Error::NonConvergence {
            context: "inner newton line search".into(),
            iters: iter,
            residual: res_norm,
        })?;
    }
    Err(Error::NonConvergence {
        context: "inner newton".into(),
        iters: max_newton,
        residual: res_norm,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub delta_inf: f64,
    pub res_inf: f64,
    pub res_l2: f64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub u: ScalarField,
    pub outer_iters: usize,
    pub converged: bool,
    pub monotone: bool,
    pub bracket_ok: bool,
    pub trace: Vec<TraceRow>,
    pub bracket: Bracket,
    pub inner_method: InnerMethod,
    pub lipschitz_f2: f64,
    pub shift: f64,
    /// Max observed inner contraction ratio across all inner solves.
    pub contraction_factor_max: Option<f64>,
    pub final_res_inf: f64,
    pub final_res_l2: f64,
}

/// Monotone outer iteration from the constant subsolution theta_low.
pub fn outer_solve(
    cs: &CoefficientSet,
    ctx: &TruncationContext,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let report = check_assumptions(cs)?;
    if !report.all_pass {
        return Err(Error::Precondition(
            "outer_solve requires assumptions (A1)-(A4) to pass".into(),
        ));
    }
    inner_gate(cs)?;

    let bracket = *ctx.bracket();
    let grid = cs.grid().clone();
    let mut u = ScalarField::constant(&grid, bracket.theta_low);
    let mut trace = Vec::new();
    let mut monotone = true;
    let mut bracket_ok = true;
    let mut converged = false;
    let mut factor_max: Option<f64> = None;
    let mut outer_iters = 0;
    let mut final_res = (f64::INFINITY, f64::INFINITY);
    let lip = ctx.lipschitz_f2(cs);
    let shift = cs.q().max() + lip + 1.0;

    for k in 1..=cfg.max_outer {
        outer_iters = k;
        let g = nemytskii_apply(&u, Nonlinearity::F1, cs, ctx);
        let (u_next, stats) = inner_solve(&g, cs, ctx, cfg, Some(&u))?;
        if let Some(f) = stats.contraction_factor {
            factor_max = Some(factor_max.map_or(f, |m: f64| m.max(f)));
        }
        let diff = u_next.sub(&u);
        let delta = norm_inf(&diff);
        if diff.min() < -cfg.monotonicity_tolerance {
            monotone = false;
        }
        let u_min = field_min(&u_next);
        let u_max = u_next.max();
        if u_min < bracket.theta_low - 1e-12 || u_max > bracket.theta_high + 1e-12 {
            bracket_ok = false;
        }
        let (res_inf, res_l2) = if u_min > 0.0 {
            let (_, ri, rl) = residual(&u_next, cs)?;
            (ri, rl)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        trace.push(TraceRow {
            iter: k,
            delta_inf: delta,
            res_inf,
            res_l2,
            u_min,
            u_max,
        });
        u = u_next;
        final_res = (res_inf, res_l2);
        if delta < cfg.tol_outer && res_inf < cfg.tol_residual {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        u,
        outer_iters,
        converged: converged && bracket_ok,
        monotone,
        bracket_ok,
        trace,
        bracket,
        inner_method: cfg.inner_method,
        lipschitz_f2: lip,
        shift,
        contraction_factor_max: factor_max,
        final_res_inf: final_res.0,
        final_res_l2: final_res.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{check_assumptions, compute_bracket};
    use crate::coefficients::manufacture_h;
    use crate::grid::{integrate, make_grid, Grid};
    use crate::truncation::f2_eval;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    fn t1(n: usize) -> Grid {
        make_grid(1, &[n], &[TAU]).unwrap()
    }

    fn benchmark(grid: &Grid) -> (CoefficientSet, TruncationContext) {
        let cs = CoefficientSet::constants(grid, 3, 1.0, 2.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let rep = check_assumptions(&cs).unwrap();
        let bracket = compute_bracket(&cs, &rep).unwrap();
        let ctx = TruncationContext::new(&cs, bracket).unwrap();
        (cs, ctx)
    }

    #[test]
    fn apply_a_constant() {
        let g = t1(16);
        let cs = CoefficientSet::constants(&g, 3, 1.0, 0.0, 0.3, 1.0, 0.0, 1.5).unwrap();
        let u = ScalarField::constant(&g, 1.0);
        let out = apply_a(&u, &cs);
        assert!(norm_inf(&out.sub(&ScalarField::constant(&g, 1.2))) < 1e-12);
    }

    #[test]
    fn a_form_symmetry_and_coercivity() {
        use rand::prelude::*;
        let g = t1(32);
        let cs = CoefficientSet::constants(&g, 3, 1.0, 2.0, 0.0, 1.0, 0.0, 0.7).unwrap();
        let kappa = 1f64.min(0.7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (amp, phase, offset) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..TAU),
                rng.random_range(-1.0..1.0),
            );
            let u = ScalarField::from_fn(&g, |x| amp * (x[0] + phase).sin() + offset);
            let v = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos() + 0.3);
            let auv = a_form(&u, &v, &cs);
            let avu = a_form(&v, &u, &cs);
            assert!((auv - avu).abs() < 1e-12 * (auv.abs() + 1.0));
            let h1 = crate::grid::h1_norm_sq(&u);
            assert!(a_form(&u, &u, &cs) >= kappa * h1 - 1e-12);
        }
    }

    #[test]
    fn inner_solve_constant_matches_bisection_oracle() {
        let g = t1(32);
        let (cs, ctx) = benchmark(&g);
        let cfg = SolverConfig::default();
        let g_val = 0.8;
        let rhs = ScalarField::constant(&g, g_val);
        let (u, _) = inner_solve(&rhs, &cs, &ctx, &cfg, None).unwrap();
        // oracle: bisection on q*x + f2(x) = g (q = 0 here)
        let target = |x: f64| f2_eval(2.0, 1.0, x, &ctx) - g_val;
        let (mut lo, mut hi) = (1e-3, 50.0);
        assert!(target(lo) < 0.0 && target(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if target(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let spread = u.max() - field_min(&u);
        assert!(spread < 1e-10, "output should be constant, spread {spread:e}");
        assert_relative_eq!(u.values()[0], root, max_relative = 1e-9);
    }

    #[test]
    fn inner_solve_roundtrip_and_determinism() {
        let g = t1(32);
        let (cs, ctx) = benchmark(&g);
        let cfg = SolverConfig::default();
        let rhs = ScalarField::from_fn(&g, |x| 0.9 + 0.2 * x[0].sin());
        let (u1, _) = inner_solve(&rhs, &cs, &ctx, &cfg, None).unwrap();
        let back = apply_a(&u1, &cs).add(&nemytskii_apply(&u1, Nonlinearity::F2, &cs, &ctx));
        assert!(norm_inf(&back.sub(&rhs)) < 1e-10);
        let (u2, _) = inner_solve(&rhs, &cs, &ctx, &cfg, None).unwrap();
        assert_eq!(u1.values(), u2.values(), "repeated solves must be bitwise identical");
    }

    #[test]
    fn newton_inner_agrees_with_contraction() {
        let g = t1(32);
        let (cs, ctx) = benchmark(&g);
        let rhs = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * (2.0 * x[0]).cos());
        let contraction = SolverConfig::default();
        let newton = SolverConfig {
            inner_method: InnerMethod::Newton,
            ..Default::default()
        };
        let (u1, _) = inner_solve(&rhs, &cs, &ctx, &contraction, None).unwrap();
        let (u2, _) = inner_solve(&rhs, &cs, &ctx, &newton, None).unwrap();
        assert!(norm_inf(&u1.sub(&u2)) < 1e-9);
    }

    #[test]
    fn outer_solve_benchmark_constant_instance() {
        let g = t1(64);
        let (cs, ctx) = benchmark(&g);
        let cfg = SolverConfig::default();
        let report = outer_solve(&cs, &ctx, &cfg).unwrap();
        assert!(report.converged, "trace: {:?}", report.trace.last());
        assert!(report.monotone);
        assert!(report.bracket_ok);
        assert!(report.final_res_inf < 1e-8);
        // every iterate is a constant field
        for row in &report.trace {
            assert!(row.u_max - row.u_min < 1e-10);
        }
        // u = 1 solves the scalar equation 1 - 2 + 1 = 0; verify it directly
        let one = ScalarField::constant(&g, 1.0);
        let v = verify_solution(&one, &cs, ctx.bracket()).unwrap();
        assert!(v.res_inf < 1e-12);
    }

    #[test]
    fn outer_solve_manufactured_instance() {
        let g = t1(64);
        let u_star = ScalarField::from_fn(&g, |x| 1.5 + 0.5 * x[0].sin());
        let one = ScalarField::constant(&g, 1.0);
        let two = ScalarField::constant(&g, 2.0);
        let zero = ScalarField::constant(&g, 0.0);
        let cs = manufacture_h(&u_star, &one, &two, &zero, &one, &zero, 3).unwrap();
        let (_, ri, _) = residual(&u_star, &cs).unwrap();
        assert!(ri < 1e-9, "manufactured residual {ri:e}");
        let rep = check_assumptions(&cs).unwrap();
        assert!(rep.all_pass);
        let bracket = compute_bracket(&cs, &rep).unwrap();
        let ctx = TruncationContext::new(&cs, bracket).unwrap();
        let cfg = SolverConfig {
            inner_method: InnerMethod::Newton,
            ..Default::default()
        };
        let report = outer_solve(&cs, &ctx, &cfg).unwrap();
        assert!(report.converged);
        let v = verify_solution(&report.u, &cs, &bracket).unwrap();
        assert!(v.res_inf < 1e-8);
        assert!(v.in_bracket);
    }

    #[test]
    fn outer_solve_rejects_assumption_failure() {
        let g = t1(16);
        // (A4) fails: essinf h = 0 < min r ~ 1.96
        let cs = CoefficientSet::constants(&g, 3, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let fake = Bracket {
            theta_low: 0.5,
            theta_high: 2.0,
            delta0: 1.0,
        };
        let ctx = TruncationContext::new(&cs, fake).unwrap();
        assert!(matches!(
            outer_solve(&cs, &ctx, &SolverConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let g = t1(16);
        // h = csq + dsq + 2cd - b + a makes u = 1 an exact solution
        let (a, b, csq, dsq, cd) = (1.3, 0.4, 0.2, 0.8, 0.1);
        let h = csq + dsq + 2.0 * cd - b + a;
        let cs = CoefficientSet::constants(&g, 3, a, b, csq, dsq, cd, h).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        let (_, ri, _) = residual(&one, &cs).unwrap();
        assert!(ri < 1e-13);
        // perturbing moves the residual away from zero, continuously
        let mut last = f64::INFINITY;
        for &eps in &[1e-2, 1e-4, 1e-6] {
            let (_, ri, _) = residual(&one.map(|v| v + eps), &cs).unwrap();
            assert!(ri > 0.0 && ri < last);
            last = ri;
        }
        // nonpositive samples are rejected
        let bad = ScalarField::from_fn(&g, |x| x[0].sin());
        assert!(matches!(residual(&bad, &cs), Err(Error::Domain(_))));
    }

    #[test]
    fn truncated_and_untruncated_residual_coincide_at_convergence() {
        let g = t1(64);
        let (cs, ctx) = benchmark(&g);
        let report = outer_solve(&cs, &ctx, &SolverConfig::default()).unwrap();
        let u = &report.u;
        let f1 = nemytskii_apply(u, Nonlinearity::F1, &cs, &ctx);
        let f2 = nemytskii_apply(u, Nonlinearity::F2, &cs, &ctx);
        let truncated_rhs = f1.sub(&f2);
        let untruncated = nonlinear_rhs(u, &cs).unwrap();
        assert!(norm_inf(&truncated_rhs.sub(&untruncated)) < 1e-12 * norm_inf(&untruncated).max(1.0));
    }

    #[test]
    fn contraction_factor_bound() {
        let g = t1(32);
        let (cs, ctx) = benchmark(&g);
        let cfg = SolverConfig::default();
        let report = outer_solve(&cs, &ctx, &cfg).unwrap();
        let q_min = field_min(&cs.q());
        let bound = (report.shift - q_min) / report.shift;
        if let Some(f) = report.contraction_factor_max {
            assert!(f <= bound + 1e-6, "factor {f} vs bound {bound}");
        }
    }

    #[test]
    fn mean_value_identity_of_apply_a() {
        // integral of apply_a(u) equals integral of q u (Laplacian integrates to zero)
        let g = t1(32);
        let cs = CoefficientSet::constants(&g, 3, 1.0, 0.0, 0.0, 1.0, 0.0, 0.9).unwrap();
        let u = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * (3.0 * x[0]).sin());
        let lhs = integrate(&apply_a(&u, &cs));
        let rhs = integrate(&cs.q().mul(&u));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }
}
