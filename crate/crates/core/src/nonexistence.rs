//! Nonexistence certificates. At an interior minimum of a positive solution
//! the equation forces h - |C|^2 >= f(z) with f(z) = d z^N - b z + a z^(1-N)
//! and z the (2*-2)-th power of the minimum value. The oracle computes the
//! exact minimum of f at every grid point; the closed-form conditions
//! NE1-NE5 (plus the trivial NE0) are global bounds that imply the oracle.

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::power::powr;

/// f(z) = d z^N - b z + a z^(1-N) for z > 0 (here d, a, b are point values,
/// with d standing for |D|^2 and analogously for the others).
pub fn f_of_z(a: f64, b: f64, d: f64, n: u32, z: f64) -> f64 {
    let nn = n as f64;
    d * powr(z, nn) - b * z + a * powr(z, 1.0 - nn)
}

/// Derivative criterion g(z) = N d z^(2N-1) - b z^N - (N-1) a; its unique
/// positive root is the minimizer of f.
fn derf(a: f64, b: f64, d: f64, n: u32, z: f64) -> f64 {
    let nn = n as f64;
    nn * d * powr(z, 2.0 * nn - 1.0) - b * powr(z, nn) - (nn - 1.0) * a
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PointwiseOracleResult {
    pub z_bar: f64,
    pub f_min: f64,
    /// f_min - (h - csq) at the point; NaN when no ambient field is attached.
    pub margin: f64,
}

/// Unique minimizer and minimum of f via bisection on the strictly
/// sign-changing derivative, cross-checked against the two closed-form
/// values obtained by substituting the critical-point equation into f:
/// ((2N-1)a - (N-1)b z_bar^N) / (N z_bar^(N-1)) and
/// ((2N-1)d z_bar^N - N b z_bar) / (N-1).
pub fn pointwise_min_f(a: f64, b: f64, d: f64, n: u32) -> Result<PointwiseOracleResult> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension must be >= 3, got {n}")));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("pointwise_min_f needs a > 0, got {a}")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!("pointwise_min_f needs d > 0, got {d}")));
    }
    let nn = n as f64;
    // bracket the root: g(0+) = -(N-1)a < 0, g(+inf) = +inf
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    while derf(a, b, d, n, lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Domain("minimizer bracket collapsed".into()));
        }
    }
    while derf(a, b, d, n, hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain("minimizer bracket diverged".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if derf(a, b, d, n, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let z_bar = 0.5 * (lo + hi);
    let scale = nn * d * powr(z_bar, 2.0 * nn - 1.0) + b.abs() * powr(z_bar, nn) + (nn - 1.0) * a;
    let res = derf(a, b, d, n, z_bar).abs();
    if res > 1e-10 * scale {
        return Err(Error::Inconsistent(format!(
            "critical-point residual {res:e} exceeds tolerance (scale {scale:e})"
        )));
    }
    let f_direct = f_of_z(a, b, d, n, z_bar);
    let f_formula = ((2.0 * nn - 1.0) * a - (nn - 1.0) * b * powr(z_bar, nn))
        / (nn * powr(z_bar, nn - 1.0));
    let f_alt = ((2.0 * nn - 1.0) * d * powr(z_bar, nn) - nn * b * z_bar) / (nn - 1.0);
    let tol = 1e-10 * f_direct.abs().max(1.0);
    if (f_direct - f_formula).abs() > tol || (f_direct - f_alt).abs() > tol {
        return Err(Error::Inconsistent(format!(
            "minimum-value formulas disagree: {f_direct} vs {f_formula} vs {f_alt}"
        )));
    }
    Ok(PointwiseOracleResult {
        z_bar,
        f_min: f_direct,
        margin: f64::NAN,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleOutcome {
    pub certified: bool,
    /// min over grid points of f_min - (h - csq).
    pub min_margin: f64,
    pub worst_point: usize,
}

/// Certifies nonexistence when h - csq < min_z f at every grid point.
pub fn oracle_check(cs: &CoefficientSet) -> Result<OracleOutcome> {
    let n = cs.n_param();
    let (a, b, dsq) = (cs.a().values(), cs.b().values(), cs.dsq().values());
    let hc = cs.q();
    let mut min_margin = f64::INFINITY;
    let mut worst = 0usize;
    for i in 0..a.len() {
        if !(dsq[i] > 0.0) {
            return Err(Error::Domain(format!(
                "oracle_check needs dsq > 0 everywhere; dsq = {} at index {i}",
                dsq[i]
            )));
        }
        let pr = pointwise_min_f(a[i], b[i], dsq[i], n)?;
        let margin = pr.f_min - hc.values()[i];
        if margin < min_margin {
            min_margin = margin;
            worst = i;
        }
    }
    Ok(OracleOutcome {
        certified: min_margin > 0.0,
        min_margin,
        worst_point: worst,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionOutcome {
    pub applicable: bool,
    pub satisfied: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub worst_point: Option<usize>,
}

impl ConditionOutcome {
    fn inapplicable() -> Self {
        Self {
            applicable: false,
            satisfied: false,
            lhs: f64::NAN,
            rhs: f64::NAN,
            worst_point: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonexistenceReport {
    pub standing_hypotheses: bool,
    pub oracle_certified: bool,
    pub oracle_min_margin: f64,
    pub oracle_worst_point: Option<usize>,
    pub ne0: ConditionOutcome,
    pub ne1: ConditionOutcome,
    pub ne2: ConditionOutcome,
    pub ne3: ConditionOutcome,
    pub ne4: ConditionOutcome,
    pub ne5: ConditionOutcome,
    /// Every satisfied condition implied the oracle certificate.
    pub consistency: bool,
}

impl NonexistenceReport {
    pub fn any_satisfied(&self) -> bool {
        [&self.ne0, &self.ne1, &self.ne2, &self.ne3, &self.ne4, &self.ne5]
            .iter()
            .any(|c| c.satisfied)
    }
}

/// The f-lower-bound of condition NE1: with b <= 0 the minimizer obeys
/// z_bar^(2N-1) <= (N-1)a/(Nd), which bounds f(z_bar) from below by
/// d^((N-2)/(2N-1)) ((2N-1) N^(1/(2N-1)) a^((2N-2)/(2N-1)) d^(1/(2N-1))
///  - (N-1)^(2N/(2N-1)) b) / (N^((N+1)/(2N-1)) (N-1)^((N-1)/(2N-1)) a^((N-2)/(2N-1))).
/// At b = 0 the bound is attained. `d` is the squared magnitude dsq.
pub fn ne1_bound(a: f64, b: f64, d: f64, n: u32) -> f64 {
    let nn = n as f64;
    let m = 2.0 * nn - 1.0;
    let numer = powr(d, (nn - 2.0) / m)
        * (m * powr(nn, 1.0 / m) * powr(a, (2.0 * nn - 2.0) / m) * powr(d, 1.0 / m)
            - powr(nn - 1.0, 2.0 * nn / m) * b);
    let denom = powr(nn, (nn + 1.0) / m) * powr(nn - 1.0, (nn - 1.0) / m) * powr(a, (nn - 2.0) / m);
    numer / denom
}

fn max_over<F: Fn(usize) -> f64>(len: usize, keep: impl Fn(usize) -> bool, f: F) -> (f64, Option<usize>) {
    let mut best = f64::NEG_INFINITY;
    let mut idx = None;
    for i in 0..len {
        if keep(i) {
            let v = f(i);
            if v > best {
                best = v;
                idx = Some(i);
            }
        }
    }
    (best, idx)
}

/// Evaluates NE0-NE5 and the pointwise oracle, checking their mutual
/// consistency. Violated standing hypotheses (a > 0, <C,D> >= 0, dsq > 0)
/// mark every condition inapplicable instead of erroring.
pub fn ne_conditions(cs: &CoefficientSet) -> Result<NonexistenceReport> {
    let n = cs.n_param();
    let nn = n as f64;
    let m = 2.0 * nn - 1.0;
    let (a, b, dsq, cd) = (
        cs.a().values(),
        cs.b().values(),
        cs.dsq().values(),
        cs.cd().values(),
    );
    let hc_field = cs.q();
    let hc = hc_field.values();
    let len = a.len();

    let standing = (0..len).all(|i| a[i] > 0.0 && cd[i] >= 0.0 && dsq[i] > 0.0);
    if !standing {
        return Ok(NonexistenceReport {
            standing_hypotheses: false,
            oracle_certified: false,
            oracle_min_margin: f64::NAN,
            oracle_worst_point: None,
            ne0: ConditionOutcome::inapplicable(),
            ne1: ConditionOutcome::inapplicable(),
            ne2: ConditionOutcome::inapplicable(),
            ne3: ConditionOutcome::inapplicable(),
            ne4: ConditionOutcome::inapplicable(),
            ne5: ConditionOutcome::inapplicable(),
            consistency: true,
        });
    }

    let b_inf = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let b_thresh = 1e-14 * (1.0 + b_inf);
    let b_nonzero = |i: usize| b[i].abs() > b_thresh;

    // NE0: b <= 0 and h - csq <= 0 everywhere
    let ne0 = {
        let applicable = (0..len).all(|i| b[i] <= 0.0 && hc[i] <= 0.0);
        let (lhs, worst) = max_over(len, |_| true, |i| hc[i].max(b[i]));
        ConditionOutcome {
            applicable,
            satisfied: applicable,
            lhs,
            rhs: 0.0,
            worst_point: worst,
        }
    };

    // NE1: b <= 0 everywhere, strict upper bound on (h-c)/ne1_bound form
    let ne1 = {
        let applicable = (0..len).all(|i| b[i] <= 0.0);
        let rhs = 1.0 / (powr(nn, (nn + 1.0) / m) * powr(nn - 1.0, (nn - 1.0) / m));
        if applicable {
            let (lhs, worst) = max_over(len, |_| true, |i| {
                let denom = powr(dsq[i], (nn - 2.0) / m)
                    * (m * powr(nn, 1.0 / m)
                        * powr(a[i], (2.0 * nn - 2.0) / m)
                        * powr(dsq[i], 1.0 / m)
                        - powr(nn - 1.0, 2.0 * nn / m) * b[i]);
                hc[i] * powr(a[i], (nn - 2.0) / m) / denom
            });
            ConditionOutcome {
                applicable,
                satisfied: lhs < rhs,
                lhs,
                rhs,
                worst_point: worst,
            }
        } else {
            ConditionOutcome {
                rhs,
                ..ConditionOutcome::inapplicable()
            }
        }
    };

    // NE2: h - csq < 0 everywhere, strict; max over {b != 0}
    let ne2 = {
        let applicable = (0..len).all(|i| hc[i] < 0.0);
        let rhs = -powr(nn + 1.0, (nn + 1.0) / m) * powr(nn - 2.0, (nn - 2.0) / m) / (4.0 * m);
        if applicable {
            let (lhs, worst) = max_over(len, b_nonzero, |i| {
                hc[i] * powr(dsq[i], (nn + 1.0) / m) * powr(a[i], (nn - 2.0) / m) / (b[i] * b[i])
            });
            ConditionOutcome {
                applicable,
                satisfied: lhs < rhs,
                lhs,
                rhs,
                worst_point: worst,
            }
        } else {
            ConditionOutcome {
                rhs,
                ..ConditionOutcome::inapplicable()
            }
        }
    };

    // NE3: h - csq < 0 everywhere, non-strict; max over {b != 0}
    let ne3 = {
        let applicable = (0..len).all(|i| hc[i] < 0.0);
        let rhs = -(nn - 1.0) / powr(nn, nn / (nn - 1.0));
        if applicable {
            let (lhs, worst) = max_over(len, b_nonzero, |i| {
                hc[i] * powr(dsq[i], 1.0 / (nn - 1.0)) / powr(b[i].abs(), nn / (nn - 1.0))
            });
            ConditionOutcome {
                applicable,
                satisfied: lhs <= rhs,
                lhs,
                rhs,
                worst_point: worst,
            }
        } else {
            ConditionOutcome {
                rhs,
                ..ConditionOutcome::inapplicable()
            }
        }
    };

    let rhs45 = m / (2.0 * powr(nn - 1.0, (nn - 1.0) / m) * powr(nn, nn / m));

    // NE4: dsq^(2N/(2N-1)) a^((2N-2)/(2N-1)) - b^2 > 0 everywhere, non-strict bound
    let ne4 = {
        let denom =
            |i: usize| powr(dsq[i], 2.0 * nn / m) * powr(a[i], (2.0 * nn - 2.0) / m) - b[i] * b[i];
        let applicable = (0..len).all(|i| denom(i) > 0.0);
        if applicable {
            let (lhs, worst) = max_over(len, |_| true, |i| {
                hc[i] * powr(dsq[i], (nn + 1.0) / m) * powr(a[i], (nn - 2.0) / m) / denom(i)
            });
            ConditionOutcome {
                applicable,
                satisfied: lhs <= rhs45,
                lhs,
                rhs: rhs45,
                worst_point: worst,
            }
        } else {
            ConditionOutcome {
                rhs: rhs45,
                ..ConditionOutcome::inapplicable()
            }
        }
    };

    // NE5: b > 0 and dsq^((N-1)/(2N-1)+1/(N-1)) a^(N/(2N-1)) - b^(N/(N-1)) > 0
    let ne5 = {
        let dexp = (nn - 1.0) / m + 1.0 / (nn - 1.0);
        let denom = |i: usize| {
            powr(dsq[i], dexp) * powr(a[i], nn / m) - powr(b[i], nn / (nn - 1.0))
        };
        let applicable = (0..len).all(|i| b[i] > 0.0 && denom(i) > 0.0);
        if applicable {
            let (lhs, worst) = max_over(len, |_| true, |i| {
                hc[i] * powr(dsq[i], 1.0 / (nn - 1.0)) / denom(i)
            });
            ConditionOutcome {
                applicable,
                satisfied: lhs <= rhs45,
                lhs,
                rhs: rhs45,
                worst_point: worst,
            }
        } else {
            ConditionOutcome {
                rhs: rhs45,
                ..ConditionOutcome::inapplicable()
            }
        }
    };

    let oracle = oracle_check(cs)?;
    let any = [&ne0, &ne1, &ne2, &ne3, &ne4, &ne5].iter().any(|c| c.satisfied);
    let consistency = !any || oracle.certified;

    Ok(NonexistenceReport {
        standing_hypotheses: true,
        oracle_certified: oracle.certified,
        oracle_min_margin: oracle.min_margin,
        oracle_worst_point: Some(oracle.worst_point),
        ne0,
        ne1,
        ne2,
        ne3,
        ne4,
        ne5,
        consistency,
    })
}
