//! Truncated nonlinearities f1, f2 with the B = B+ - B- split, pointwise and
//! as field maps (Nemytskii operators). Outside [theta_low, theta_high] the
//! argument is clamped, which keeps both maps nondecreasing and bounded.

use crate::analysis::Bracket;
use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::power::powr;

/// Which of the two truncated nonlinearities to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonlinearity {
    F1,
    F2,
}

/// Precomputed split b = b_plus - b_minus together with the bracket.
#[derive(Clone, Debug)]
pub struct TruncationContext {
    bracket: Bracket,
    twostar: f64,
    b_plus: ScalarField,
    b_minus: ScalarField,
}

impl TruncationContext {
    pub fn new(cs: &CoefficientSet, bracket: Bracket) -> Result<Self> {
        if !(bracket.theta_low > 0.0 && bracket.theta_high > bracket.theta_low) {
            return Err(Error::Precondition(format!(
                "invalid bracket: theta_low = {}, theta_high = {}",
                bracket.theta_low, bracket.theta_high
            )));
        }
        Ok(Self {
            bracket,
            twostar: cs.twostar(),
            b_plus: cs.b().map(|v| v.max(0.0)),
            b_minus: cs.b().map(|v| (-v).max(0.0)),
        })
    }

    pub fn bracket(&self) -> &Bracket {
        &self.bracket
    }

    pub fn b_plus(&self) -> &ScalarField {
        &self.b_plus
    }

    pub fn b_minus(&self) -> &ScalarField {
        &self.b_minus
    }

    fn clamp(&self, xi: f64) -> f64 {
        xi.clamp(self.bracket.theta_low, self.bracket.theta_high)
    }

    /// Lipschitz bound of f2 on the bracket:
    /// esssup[(2*-1) b_plus Theta^(2*-2) + (2*+1) a / theta^(2*+2)].
    pub fn lipschitz_f2(&self, cs: &CoefficientSet) -> f64 {
        let ts = self.twostar;
        let th = self.bracket.theta_high;
        let tl = self.bracket.theta_low;
        let pow_b = powr(th, ts - 2.0);
        let pow_a = powr(tl, -(ts + 2.0));
        self.b_plus
            .values()
            .iter()
            .zip(cs.a().values())
            .map(|(&bp, &a)| (ts - 1.0) * bp * pow_b + (ts + 1.0) * a * pow_a)
            .fold(0.0, f64::max)
    }
}

/// f1 at one point: dsq xi^(2*2s+1) + 2 cd xi^(2s+1) + b_minus xi^(2s-1),
/// with xi clamped to the bracket.
pub fn f1_eval(dsq: f64, cd: f64, b_minus: f64, xi: f64, ctx: &TruncationContext) -> f64 {
    let z = ctx.clamp(xi);
    let ts = ctx.twostar;
    dsq * powr(z, 2.0 * ts + 1.0) + 2.0 * cd * powr(z, ts + 1.0) + b_minus * powr(z, ts - 1.0)
}

/// f2 at one point: b_plus xi^(2s-1) - a / xi^(2s+1), with xi clamped.
pub fn f2_eval(b_plus: f64, a: f64, xi: f64, ctx: &TruncationContext) -> f64 {
    let z = ctx.clamp(xi);
    let ts = ctx.twostar;
    b_plus * powr(z, ts - 1.0) - a * powr(z, -(ts + 1.0))
}

/// Pointwise derivative of f2 in xi; zero outside the bracket (clamped flats).
pub fn f2_derivative(b_plus: f64, a: f64, xi: f64, ctx: &TruncationContext) -> f64 {
    if xi < ctx.bracket.theta_low || xi > ctx.bracket.theta_high {
        return 0.0;
    }
    let ts = ctx.twostar;
    (ts - 1.0) * b_plus * powr(xi, ts - 2.0) + (ts + 1.0) * a * powr(xi, -(ts + 2.0))
}

/// Nemytskii operator: apply f1 or f2 pointwise to a field.
pub fn nemytskii_apply(
    u: &ScalarField,
    which: Nonlinearity,
    cs: &CoefficientSet,
    ctx: &TruncationContext,
) -> ScalarField {
    match which {
        Nonlinearity::F1 => {
            let dsq = cs.dsq().values();
            let cd = cs.cd().values();
            let bm = ctx.b_minus.values();
            let vals = u
                .values()
                .iter()
                .enumerate()
                .map(|(i, &xi)| f1_eval(dsq[i], cd[i], bm[i], xi, ctx))
                .collect();
            ScalarField::from_values(u.grid(), vals).expect("f1 is bounded by the clamp")
        }
        Nonlinearity::F2 => {
            let bp = ctx.b_plus.values();
            let a = cs.a().values();
            let vals = u
                .values()
                .iter()
                .enumerate()
                .map(|(i, &xi)| f2_eval(bp[i], a[i], xi, ctx))
                .collect();
            ScalarField::from_values(u.grid(), vals).expect("f2 is bounded by the clamp")
        }
    }
}
