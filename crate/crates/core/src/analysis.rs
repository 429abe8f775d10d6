//! Assumption checks (A1)-(A4), minimization of the supersolution function
//! r(t), and construction of the constant sub/supersolution bracket.

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::{field_max, field_min, lambda1, norm_inf};
use crate::power::powr;

/// The L-infinity / essinf surrogates entering r(t) and the bracket.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CoefficientNorms {
    /// max sqrt(csq)
    pub c_inf: f64,
    /// max sqrt(dsq)
    pub d_inf: f64,
    /// max a
    pub a_inf: f64,
    /// min a
    pub a_min: f64,
    /// min b
    pub b_min: f64,
    /// max |b|
    pub b_abs_inf: f64,
    /// min h
    pub h_min: f64,
    /// max h
    pub h_max: f64,
    /// min csq
    pub csq_min: f64,
    /// min (h - csq)
    pub q_min: f64,
}

pub fn coefficient_norms(cs: &CoefficientSet) -> CoefficientNorms {
    CoefficientNorms {
        c_inf: field_max(cs.csq()).max(0.0).sqrt(),
        d_inf: field_max(cs.dsq()).max(0.0).sqrt(),
        a_inf: field_max(cs.a()),
        a_min: field_min(cs.a()),
        b_min: field_min(cs.b()),
        b_abs_inf: norm_inf(cs.b()),
        h_min: field_min(cs.h()),
        h_max: field_max(cs.h()),
        csq_min: field_min(cs.csq()),
        q_min: field_min(&cs.q()),
    }
}

/// r(t) = (||C|| + ||D|| t^{2*})^2 - essinf B * t^{2*-2} + ||A|| / t^{2*+2}.
pub fn r_of_t(t: f64, cs: &CoefficientSet) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("r(t) needs t > 0, got {t}")));
    }
    Ok(r_from_norms(t, &coefficient_norms(cs), cs.twostar()))
}

fn r_from_norms(t: f64, n: &CoefficientNorms, ts: f64) -> f64 {
    let head = n.c_inf + n.d_inf * powr(t, ts);
    head * head - n.b_min * powr(t, ts - 2.0) + n.a_inf * powr(t, -(ts + 2.0))
}

/// Outcome of minimizing r over t > 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RMinimum {
    /// Minimizer, when the infimum is attained.
    pub t_star: Option<f64>,
    /// Infimum of r; may be -inf when ||D|| = 0 and essinf B > 0.
    pub r_inf: f64,
    pub attained: bool,
    pub unbounded_below: bool,
    /// Coarse log-grid used to bracket the minimizer.
    pub scan: Option<ScanInfo>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanInfo {
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
}

fn golden_section_log(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    // minimize f(e^s) over s in [lo, hi]
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let g = |s: f64| f(s.exp());
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = g(x2);
        }
    }
    let s = 0.5 * (lo + hi);
    (s.exp(), g(s))
}

/// Minimize r over t > 0 to relative tolerance `tol`.
pub fn minimize_r(cs: &CoefficientSet, tol: f64) -> Result<RMinimum> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let norms = coefficient_norms(cs);
    let ts = cs.twostar();

    if norms.d_inf == 0.0 {
        if norms.b_min > 0.0 {
            // -essinf B * t^{2*-2} decreases without bound
            return Ok(RMinimum {
                t_star: None,
                r_inf: f64::NEG_INFINITY,
                attained: false,
                unbounded_below: true,
                scan: None,
            });
        }
        if norms.b_min == 0.0 {
            // r = ||C||^2 + ||A||/t^{2*+2}: infimum ||C||^2 in the limit t -> inf
            let attained = norms.a_inf == 0.0;
            return Ok(RMinimum {
                t_star: if attained { Some(1.0) } else { None },
                r_inf: norms.c_inf * norms.c_inf,
                attained,
                unbounded_below: false,
                scan: None,
            });
        }
        // b_min < 0: both tails blow up, interior minimum exists
    }

    // bracket the minimizer on a coarse log grid, expanding if it sits on an edge
    let r = |t: f64| r_from_norms(t, &norms, ts);
    let mut lo = -18.5; // ln t
    let mut hi = 18.5;
    let points = 512;
    loop {
        let step = (hi - lo) / (points - 1) as f64;
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for i in 0..points {
            let v = r((lo + i as f64 * step).exp());
            if v < best_val {
                best_val = v;
                best = i;
            }
        }
        if best == 0 {
            lo -= 18.0;
            hi = lo + 37.0;
            if lo < -300.0 {
                return Err(Error::Inconsistent("minimizer of r escapes to t -> 0".into()));
            }
            continue;
        }
        if best == points - 1 {
            hi += 18.0;
            lo = hi - 37.0;
            if hi > 300.0 {
                return Err(Error::Inconsistent("minimizer of r escapes to t -> inf".into()));
            }
            continue;
        }
        let s_lo = lo + (best - 1) as f64 * step;
        let s_hi = lo + (best + 1) as f64 * step;
        let (t_star, r_star) = golden_section_log(r, s_lo, s_hi, (tol / 10.0).min(1e-8));
        return Ok(RMinimum {
            t_star: Some(t_star),
            r_inf: r_star,
            attained: true,
            unbounded_below: false,
            scan: Some(ScanInfo {
                t_lo: lo.exp(),
                t_hi: hi.exp(),
                points,
            }),
        });
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Signed margin; positive means the assumption holds strictly.
    pub margin: f64,
}

/// Verdicts for (A1)-(A4) with the derived constants.
#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub a1_bounded: Check,
    pub a2_essinf_a_positive: Check,
    pub a2_cd_nonnegative: Check,
    pub a3_spectral: Check,
    pub a4_supersolution: Check,
    /// Reported separately: whether h - csq > 0 at every grid point.
    pub q_positive: Check,
    pub lambda1: f64,
    /// Coercivity constant min(1, essinf(h - csq)).
    pub kappa: f64,
    pub norms: CoefficientNorms,
    pub rmin: f64,
    pub rargmin: Option<f64>,
    pub r_unbounded_below: bool,
    pub all_pass: bool,
}

/// Evaluate (A1)-(A4) with discrete essinf/esssup surrogates.
pub fn check_assumptions(cs: &CoefficientSet) -> Result<AssumptionReport> {
    let norms = coefficient_norms(cs);
    let lam1 = lambda1(cs.grid());
    let rmin = minimize_r(cs, 1e-10)?;

    let finite = [cs.a(), cs.b(), cs.csq(), cs.dsq(), cs.cd(), cs.h()]
        .iter()
        .all(|f| f.values().iter().all(|v| v.is_finite()));
    let a1 = Check {
        pass: finite,
        margin: if finite { 0.0 } else { f64::NEG_INFINITY },
    };
    let a2a = Check {
        pass: norms.a_min > 0.0,
        margin: norms.a_min,
    };
    let cd_min = field_min(cs.cd());
    let a2cd = Check {
        pass: cd_min >= 0.0,
        margin: cd_min,
    };
    let a3 = Check {
        pass: norms.q_min > -lam1,
        margin: norms.q_min + lam1,
    };
    let a4_margin = norms.h_min - rmin.r_inf;
    let a4 = Check {
        pass: a4_margin > 0.0,
        margin: a4_margin,
    };
    let q_pos = Check {
        pass: norms.q_min > 0.0,
        margin: norms.q_min,
    };
    let all_pass = a1.pass && a2a.pass && a2cd.pass && a3.pass && a4.pass;
    Ok(AssumptionReport {
        a1_bounded: a1,
        a2_essinf_a_positive: a2a,
        a2_cd_nonnegative: a2cd,
        a3_spectral: a3,
        a4_supersolution: a4,
        q_positive: q_pos,
        lambda1: lam1,
        kappa: 1f64.min(norms.q_min),
        norms,
        rmin: rmin.r_inf,
        rargmin: rmin.t_star,
        r_unbounded_below: rmin.unbounded_below,
        all_pass,
    })
}

/// Constant subsolution / supersolution pair with the supremal bound delta0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bracket {
    pub theta_low: f64,
    pub theta_high: f64,
    /// Supremal constant subsolution bound; +inf when every constant works.
    pub delta0: f64,
}

/// psi(theta) = essinf a * theta^-(2*+2) - esssup|b| * theta^(2*-2)
///            - (esssup h - essinf csq); strictly decreasing in theta.
pub fn psi(theta: f64, cs: &CoefficientSet) -> f64 {
    let n = coefficient_norms(cs);
    let ts = cs.twostar();
    n.a_min * powr(theta, -(ts + 2.0)) - n.b_abs_inf * powr(theta, ts - 2.0)
        - (n.h_max - n.csq_min)
}

/// Pointwise subsolution slack at the constant c: min over p of RHS(c, p) - q(p) c.
/// Nonnegative iff c passes the untruncated subsolution inequality everywhere.
pub fn subsolution_margin(cs: &CoefficientSet, c: f64) -> f64 {
    pointwise_slack(cs, c, 1.0)
}

/// Pointwise supersolution slack at the constant c: min over p of q(p) c - RHS(c, p).
pub fn supersolution_margin(cs: &CoefficientSet, c: f64) -> f64 {
    pointwise_slack(cs, c, -1.0)
}

fn pointwise_slack(cs: &CoefficientSet, c: f64, sign: f64) -> f64 {
    let ts = cs.twostar();
    let p_hi = powr(c, 2.0 * ts + 1.0);
    let p_mid = powr(c, ts + 1.0);
    let p_low = powr(c, ts - 1.0);
    let p_neg = powr(c, -(ts + 1.0));
    let mut worst = f64::INFINITY;
    let (a, b, csq, dsq, cd, h) = (
        cs.a().values(),
        cs.b().values(),
        cs.csq().values(),
        cs.dsq().values(),
        cs.cd().values(),
        cs.h().values(),
    );
    for i in 0..a.len() {
        let rhs = dsq[i] * p_hi + 2.0 * cd[i] * p_mid - b[i] * p_low + a[i] * p_neg;
        let lhs = (h[i] - csq[i]) * c;
        worst = worst.min(sign * (rhs - lhs));
    }
    worst
}

fn bisect_delta0(cs: &CoefficientSet) -> f64 {
    // psi is strictly decreasing with psi(0+) = +inf; a sign change to the
    // right may not exist, in which case every constant is a subsolution.
    let mut hi = 1.0;
    let mut doublings = 0;
    while psi(hi, cs) > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    while psi(lo, cs) <= 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    while (hi - lo) > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if psi(mid, cs) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Build the constant bracket (theta_low, theta_high) with delta0.
///
/// theta_high is the minimizer of r when it exists; any t with
/// r(t) < essinf h is accepted as fallback. theta_low = min(delta0, theta_high)/2.
/// Both ends are post-checked against the untruncated pointwise inequalities.
pub fn compute_bracket(cs: &CoefficientSet, report: &AssumptionReport) -> Result<Bracket> {
    if !report.a4_supersolution.pass {
        return Err(Error::NoSupersolution(format!(
            "(A4) fails: essinf h = {} does not exceed min r = {}",
            report.norms.h_min, report.rmin
        )));
    }
    if !report.all_pass {
        return Err(Error::Precondition(
            "compute_bracket requires (A1)-(A4) to pass".into(),
        ));
    }

    let h_min = report.norms.h_min;
    let theta_high = match report.rargmin {
        Some(t_star) if report.rmin < h_min => t_star,
        _ => {
            // growing log grid: smallest t with r(t) < essinf h
            let mut found = None;
            let mut span = 2.0f64;
            let mut points = 64usize;
            'outer: while span <= 1e12 {
                let lo = (1.0 / span).ln();
                let hi = span.ln();
                let step = (hi - lo) / (points - 1) as f64;
                for i in 0..points {
                    let t = (lo + i as f64 * step).exp();
                    if r_of_t(t, cs)? < h_min {
                        found = Some(t);
                        break 'outer;
                    }
                }
                span *= 16.0;
                points *= 2;
            }
            found.ok_or_else(|| {
                Error::Inconsistent(
                    "(A4) passes but no t with r(t) < essinf h was found".into(),
                )
            })?
        }
    };

    let delta0 = bisect_delta0(cs);
    if delta0 <= 0.0 {
        return Err(Error::Inconsistent("delta0 collapsed to zero".into()));
    }
    let theta_low = 0.5 * delta0.min(theta_high);

    // pointwise post-checks of the untruncated inequalities
    let scale = report.norms.a_inf.max(report.norms.h_max.abs()).max(1.0);
    let sub = subsolution_margin(cs, theta_low);
    if sub < -1e-12 * scale {
        return Err(Error::Inconsistent(format!(
            "theta_low = {theta_low} fails the pointwise subsolution inequality (slack {sub:e})"
        )));
    }
    let sup = supersolution_margin(cs, theta_high);
    if sup < -1e-12 * scale {
        return Err(Error::Inconsistent(format!(
            "theta_high = {theta_high} fails the pointwise supersolution inequality (slack {sup:e})"
        )));
    }

    Ok(Bracket {
        theta_low,
        theta_high,
        delta0,
    })
}
