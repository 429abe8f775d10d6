//! Coefficient fields of the Lichnerowicz equation
//!
//! ```text
//! -Lap u + (h - csq) u = dsq u^(2*2s+1) + 2 cd u^(2s+1) - b u^(2s-1) + a u^-(2s+1)
//! ```
//!
//! with `2s = 2N/(N-2)`, assembled either directly or from geometric
//! constraint data (tau, pi, W, sigma, nu, R), plus a manufactured-solution
//! constructor used for verification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{
    derivative, divergence, field_min, gradient, laplacian, norm_inf, Grid, ScalarField,
    SymTensorField, VectorField,
};
use crate::power::powr;

/// The six coefficient fields plus the exponent dimension N.
///
/// N drives only the exponents and constants, so it is decoupled from the
/// grid dimension; desk-scale 1-D grids can exercise the full nonlinearity.
#[derive(Clone, Debug)]
pub struct CoefficientSet {
    n_param: u32,
    a: ScalarField,
    b: ScalarField,
    csq: ScalarField,
    dsq: ScalarField,
    cd: ScalarField,
    h: ScalarField,
}

impl CoefficientSet {
    pub fn new(
        n_param: u32,
        a: ScalarField,
        b: ScalarField,
        csq: ScalarField,
        dsq: ScalarField,
        cd: ScalarField,
        h: ScalarField,
    ) -> Result<Self> {
        if n_param < 3 {
            return Err(Error::Domain(format!(
                "exponent dimension N must be >= 3, got {n_param}"
            )));
        }
        let grid = a.grid();
        for (name, f) in [("b", &b), ("csq", &csq), ("dsq", &dsq), ("cd", &cd), ("h", &h)] {
            if f.grid() != grid {
                return Err(Error::Config(format!("field {name} lives on a different grid")));
            }
        }
        Ok(Self { n_param, a, b, csq, dsq, cd, h })
    }

    /// All-constant coefficient set, convenient for benchmarks.
    pub fn constants(
        grid: &Grid,
        n_param: u32,
        a: f64,
        b: f64,
        csq: f64,
        dsq: f64,
        cd: f64,
        h: f64,
    ) -> Result<Self> {
        Self::new(
            n_param,
            ScalarField::constant(grid, a),
            ScalarField::constant(grid, b),
            ScalarField::constant(grid, csq),
            ScalarField::constant(grid, dsq),
            ScalarField::constant(grid, cd),
            ScalarField::constant(grid, h),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn n_param(&self) -> u32 {
        self.n_param
    }

    /// Critical exponent 2* = 2N/(N-2).
    pub fn twostar(&self) -> f64 {
        2.0 * self.n_param as f64 / (self.n_param as f64 - 2.0)
    }

    /// kappa_N = (N-2)/(4(N-1)).
    pub fn kappa_n(&self) -> f64 {
        kappa_n(self.n_param)
    }

    pub fn a(&self) -> &ScalarField {
        &self.a
    }
    pub fn b(&self) -> &ScalarField {
        &self.b
    }
    pub fn csq(&self) -> &ScalarField {
        &self.csq
    }
    pub fn dsq(&self) -> &ScalarField {
        &self.dsq
    }
    pub fn cd(&self) -> &ScalarField {
        &self.cd
    }
    pub fn h(&self) -> &ScalarField {
        &self.h
    }

    /// The zeroth-order linear coefficient q = h - csq.
    pub fn q(&self) -> ScalarField {
        self.h.sub(&self.csq)
    }
}

pub fn kappa_n(n_param: u32) -> f64 {
    (n_param as f64 - 2.0) / (4.0 * (n_param as f64 - 1.0))
}

/// Geometric constraint data feeding [`assemble_geometric`].
#[derive(Clone, Debug)]
pub struct GeometricData {
    pub tau: ScalarField,
    pub pi: ScalarField,
    pub nu: f64,
    pub w: VectorField,
    pub sigma: SymTensorField,
    pub r: ScalarField,
    /// True when R was overridden away from the flat-torus value 0.
    pub r_override: bool,
}

/// Conformal Killing operator on the flat torus:
/// (DW)_ij = d_i W_j + d_j W_i - (2/d) delta_ij div W.
pub fn conformal_killing(w: &VectorField) -> SymTensorField {
    let grid = w.grid().clone();
    let d = grid.dim();
    let div = divergence(w);
    let mut comps = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let mut entry = derivative(w.component(j), i).add(&derivative(w.component(i), j));
            if i == j {
                entry = entry.sub(&div.scale(2.0 / d as f64));
            }
            comps.push(entry);
        }
    }
    SymTensorField::new(&grid, comps).expect("component count is d(d+1)/2 by construction")
}

/// Diagnostics attached to a geometric assembly.
#[derive(Clone, Debug, Serialize)]
pub struct AssemblyDiagnostics {
    /// sup norm of div(sigma); reported, not enforced.
    pub sigma_divergence_residual: f64,
    /// sup norm of tr(sigma); enforced below 1e-10.
    pub sigma_trace_residual: f64,
    /// True when R was overridden away from 0 on the flat torus.
    pub nongeometric_h: bool,
}

/// Assemble the coefficient fields from geometric data:
/// a = kappa(|sigma+DW|^2 + pi^2), b = kappa((N-1)/N tau^2 - 4 nu),
/// C = -sqrt(kappa) pi^-1 div(DW), D = sqrt(kappa) pi^-1 (N-1)/N grad tau,
/// h = kappa R.
pub fn assemble_geometric(
    gd: &GeometricData,
    n_param: u32,
) -> Result<(CoefficientSet, AssemblyDiagnostics)> {
    if n_param < 3 {
        return Err(Error::Domain(format!(
            "exponent dimension N must be >= 3, got {n_param}"
        )));
    }
    let grid = gd.tau.grid().clone();
    if grid.dim() != n_param as usize {
        return Err(Error::Config(format!(
            "geometric assembly requires grid dimension d = N; got d = {}, N = {n_param}",
            grid.dim()
        )));
    }
    let pi_min_abs = gd.pi.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(pi_min_abs > 0.0) {
        return Err(Error::SingularData(
            "pi vanishes at a grid point; coefficient assembly divides by pi".into(),
        ));
    }

    let trace_res = norm_inf(&gd.sigma.trace());
    let sigma_scale = norm_inf(&gd.sigma.frobenius_sq()).sqrt().max(1.0);
    if trace_res > 1e-10 * sigma_scale {
        return Err(Error::Config(format!(
            "sigma is not trace-free: sup |tr sigma| = {trace_res:e}"
        )));
    }
    let div_res = {
        let div = gd.sigma.divergence();
        div.components().iter().map(norm_inf).fold(0.0, f64::max)
    };

    let kappa = kappa_n(n_param);
    let nf = n_param as f64;
    let dw = conformal_killing(&gd.w);
    let total = gd.sigma.add(&dw);

    let a = total
        .frobenius_sq()
        .add(&gd.pi.mul(&gd.pi))
        .scale(kappa);
    let b = gd
        .tau
        .mul(&gd.tau)
        .scale((nf - 1.0) / nf)
        .map(|v| kappa * (v - 4.0 * gd.nu));

    let inv_pi = gd.pi.map(|p| 1.0 / p);
    let div_dw = dw.divergence();
    let c_vec = VectorField::new(
        div_dw
            .components()
            .iter()
            .map(|c| c.mul(&inv_pi).scale(-kappa.sqrt()))
            .collect(),
    )?;
    let grad_tau = gradient(&gd.tau);
    let d_vec = VectorField::new(
        grad_tau
            .components()
            .iter()
            .map(|c| c.mul(&inv_pi).scale(kappa.sqrt() * (nf - 1.0) / nf))
            .collect(),
    )?;

    let csq = c_vec.norm_sq();
    let dsq = d_vec.norm_sq();
    let cd = c_vec.dot(&d_vec);
    let h = gd.r.scale(kappa);

    let cs = CoefficientSet::new(n_param, a, b, csq, dsq, cd, h)?;
    Ok((
        cs,
        AssemblyDiagnostics {
            sigma_divergence_residual: div_res,
            sigma_trace_residual: trace_res,
            nongeometric_h: gd.r_override,
        },
    ))
}

/// One validated condition on a coefficient set.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub pass: bool,
    /// Signed margin; positive means the condition holds with room.
    pub margin: f64,
    /// Grid index of the worst sample, when meaningful.
    pub worst_index: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionCheck>,
    pub all_pass: bool,
}

impl ValidationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn pointwise_check(name: &str, f: &ScalarField, strict: bool) -> ConditionCheck {
    let idx = f.argmin();
    let margin = f.values()[idx];
    ConditionCheck {
        name: name.to_string(),
        pass: if strict { margin > 0.0 } else { margin >= 0.0 },
        margin,
        worst_index: Some(idx),
    }
}

/// Check (A1)-surrogate finiteness, (A2) positivity of a and sign of cd,
/// and the Cauchy-Schwarz coupling cd^2 <= csq * dsq. Reports, never errors.
pub fn validate_coefficients(cs: &CoefficientSet) -> ValidationReport {
    let mut conditions = Vec::new();

    let finite = [cs.a(), cs.b(), cs.csq(), cs.dsq(), cs.cd(), cs.h()]
        .iter()
        .all(|f| f.values().iter().all(|v| v.is_finite()));
    conditions.push(ConditionCheck {
        name: "a1_bounded".into(),
        pass: finite,
        margin: if finite { 0.0 } else { f64::NEG_INFINITY },
        worst_index: None,
    });

    conditions.push(pointwise_check("a2_essinf_a_positive", cs.a(), true));
    conditions.push(pointwise_check("a2_cd_nonnegative", cs.cd(), false));
    conditions.push(pointwise_check("csq_nonnegative", cs.csq(), false));
    conditions.push(pointwise_check("dsq_nonnegative", cs.dsq(), false));

    let slack = cs
        .csq()
        .mul(cs.dsq())
        .sub(&cs.cd().mul(cs.cd()));
    // allow rounding at the Cauchy-Schwarz boundary
    let tol = 1e-12
        * (norm_inf(cs.csq()) * norm_inf(cs.dsq())).max(1.0);
    let idx = slack.argmin();
    conditions.push(ConditionCheck {
        name: "cauchy_schwarz_cd".into(),
        pass: slack.values()[idx] >= -tol,
        margin: slack.values()[idx],
        worst_index: Some(idx),
    });

    let all_pass = conditions.iter().all(|c| c.pass);
    ValidationReport { conditions, all_pass }
}

/// Method of manufactured solutions: pick h so that `u_star` solves the
/// equation exactly on the grid, given the other five coefficient fields.
pub fn manufacture_h(
    u_star: &ScalarField,
    a: &ScalarField,
    b: &ScalarField,
    csq: &ScalarField,
    dsq: &ScalarField,
    cd: &ScalarField,
    n_param: u32,
) -> Result<CoefficientSet> {
    if field_min(u_star) <= 0.0 {
        return Err(Error::Domain(
            "manufactured solution must be positive at every grid point".into(),
        ));
    }
    let ts = 2.0 * n_param as f64 / (n_param as f64 - 2.0);
    let lap = laplacian(u_star);
    let u = u_star.values();
    let mut h_vals = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let ui = u[i];
        let nl = dsq.values()[i] * powr(ui, 2.0 * ts + 1.0)
            + 2.0 * cd.values()[i] * powr(ui, ts + 1.0)
            - b.values()[i] * powr(ui, ts - 1.0)
            + a.values()[i] * powr(ui, -(ts + 1.0));
        h_vals.push(csq.values()[i] + (lap.values()[i] + nl) / ui);
    }
    let h = ScalarField::from_values(u_star.grid(), h_vals)?;
    CoefficientSet::new(
        n_param,
        a.clone(),
        b.clone(),
        csq.clone(),
        dsq.clone(),
        cd.clone(),
        h,
    )
}
