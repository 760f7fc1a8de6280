//! The Euler-angle decomposition behind the one-qubit completeness relation.
//!
//! The relation equates the two-parameter circuit `H · Z(α₁) · H · Z(α₂) · H`
//! (time order) with a phase `β₀` next to `Z(β₁) · H · Z(β₂) · H · Z(β₃)`.
//! The β parameters are explicit functions of the α's via two complex
//! intermediates; the binding correctness contract is the semantic check,
//! which the rewrite [`apply_euler`] enforces on every application.

use crate::angle::{arg_0_2pi, normalize_angle, Angle};
use crate::diagram::{Diagram, Dialect, Path};
use crate::error::{Error, Result};
use crate::num::{lit, Real, C};
use crate::rules::{apply_rule_with, catalog, Direction, PostCheck, RuleInstance};
use serde::Serialize;

/// Which branch of the case table produced the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EulerCase {
    #[serde(rename = "v0")]
    V0,
    #[serde(rename = "u0")]
    U0,
    #[serde(rename = "generic")]
    Generic,
}

/// Result of the Euler parameter computation, with the complex
/// intermediates retained for diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct EulerParams<S> {
    pub beta0: Angle<S>,
    pub beta1: Angle<S>,
    pub beta2: Angle<S>,
    pub beta3: Angle<S>,
    pub u: C<S>,
    pub v: C<S>,
    pub case: EulerCase,
}

impl<S: Real> EulerParams<S> {
    pub fn betas(&self) -> [Angle<S>; 4] {
        [self.beta0, self.beta1, self.beta2, self.beta3]
    }
}

/// Compute `(β₀, β₁, β₂, β₃)` from `(α₁, α₂)`.
///
/// Case selection treats `|v| ≤ 1e-12` (resp. `|u|`) as zero; arguments use
/// the principal value mapped into `[0, 2π)`. `β₀` is computed from the raw
/// β values first and everything is normalized afterwards — normalizing
/// `β₁..β₃` early would shift `β₀` by π.
pub fn euler_params<S: Real>(alpha1: Angle<S>, alpha2: Angle<S>) -> EulerParams<S> {
    let a1 = alpha1.value();
    let a2 = alpha2.value();
    let two = lit::<S>(2.0);
    let u = C::new(-((a1 + a2) / two).sin(), ((a1 - a2) / two).cos());
    let v = C::new(((a1 + a2) / two).cos(), -((a1 - a2) / two).sin());
    let eps = S::angle_eps();
    let (b1, b2, b3, case) = if v.norm() <= eps {
        (two * arg_0_2pi(u.re, u.im), S::zero(), S::zero(), EulerCase::V0)
    } else if u.norm() <= eps {
        (two * arg_0_2pi(v.re, v.im), S::PI(), S::zero(), EulerCase::U0)
    } else {
        let au = arg_0_2pi(u.re, u.im);
        let av = arg_0_2pi(v.re, v.im);
        let ratio = u.norm() / v.norm();
        (au + av, two * arg_0_2pi(ratio, S::one()), au - av, EulerCase::Generic)
    };
    let b0 = (S::PI() + a1 + a2 - b1 - b2 - b3) / two;
    EulerParams {
        beta0: Angle::new(normalize_angle(b0)),
        beta1: Angle::new(b1),
        beta2: Angle::new(b2),
        beta3: Angle::new(b3),
        u,
        v,
        case,
    }
}

/// Apply the Euler relation forward at `path`: the subterm must be an
/// instance of the relation's two-parameter side in the given dialect.
/// The rewrite is checked semantically on every application.
pub fn apply_euler<S: Real>(d: &Diagram<S>, path: &Path, dialect: Dialect) -> Result<Diagram<S>> {
    let rule = catalog::euler_rule::<S>(dialect);
    let bindings = crate::rules::match_rule(&rule, d, path, Direction::Forward)
        .ok_or_else(|| Error::PatternMismatch(path.clone()))?;
    let inst = RuleInstance {
        rule: rule.name.to_string(),
        bindings,
        path: path.clone(),
        dir: Direction::Forward,
    };
    let (out, _) = apply_rule_with(d, &inst, &rule, PostCheck::Always)?;
    Ok(out)
}

/// JSON image of the parameters, as printed by the command-line tool.
#[derive(Debug, Serialize)]
pub struct EulerJson {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub case: EulerCase,
}

impl<S: Real> EulerParams<S> {
    pub fn to_json(&self) -> EulerJson {
        let f = |x: S| x.to_f64().unwrap();
        EulerJson {
            beta0: f(self.beta0.value()),
            beta1: f(self.beta1.value()),
            beta2: f(self.beta2.value()),
            beta3: f(self.beta3.value()),
            u: [f(self.u.re), f(self.u.im)],
            v: [f(self.v.re), f(self.v.im)],
            case: self.case,
        }
    }
}
