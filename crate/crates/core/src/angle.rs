//! Rotation angles, kept in the canonical range `[0, 2π)`.

use crate::num::{lit, Real};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// An angle in radians, normalized into `[0, 2π)` on construction.
///
/// Arithmetic re-normalizes, so `Angle` values can be compared
/// structurally: two gates with the same rotation always carry the
/// same representative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle<S>(S);

impl<S: Real> Angle<S> {
    pub fn new(radians: S) -> Self {
        Angle(normalize_angle(radians))
    }

    pub fn zero() -> Self {
        Angle(S::zero())
    }

    pub fn pi() -> Self {
        Angle(S::PI())
    }

    /// Raw value of the canonical representative.
    pub fn value(self) -> S {
        self.0
    }

    /// Half of the canonical representative, as a plain scalar.
    pub fn half(self) -> S {
        self.0 / lit(2.0)
    }

    /// Distance on the circle, accounting for wrap-around at 2π.
    pub fn circle_dist(self, other: Self) -> S {
        let d = (self.0 - other.0).abs();
        d.min(S::TAU() - d)
    }

    /// Equality up to the angle tolerance, modulo 2π.
    pub fn approx_eq(self, other: Self) -> bool {
        self.circle_dist(other) <= S::angle_eps()
    }

    pub fn is_zero(self) -> bool {
        self.approx_eq(Angle::zero())
    }

    pub fn is_pi(self) -> bool {
        self.approx_eq(Angle::pi())
    }
}

/// Map an arbitrary real into `[0, 2π)`.
pub fn normalize_angle<S: Real>(x: S) -> S {
    let tau = S::TAU();
    let mut r = x - tau * (x / tau).floor();
    // Floating-point floor can leave r == 2π for inputs just below a multiple.
    if r >= tau {
        r = r - tau;
    }
    if r < S::zero() {
        r = r + tau;
    }
    r
}

/// Map the principal argument of a complex number into `[0, 2π)`.
pub fn arg_0_2pi<S: Real>(re: S, im: S) -> S {
    normalize_angle(im.atan2(re))
}

impl<S: Real> Add for Angle<S> {
    type Output = Angle<S>;
    fn add(self, rhs: Self) -> Self {
        Angle::new(self.0 + rhs.0)
    }
}

impl<S: Real> Sub for Angle<S> {
    type Output = Angle<S>;
    fn sub(self, rhs: Self) -> Self {
        Angle::new(self.0 - rhs.0)
    }
}

impl<S: Real> Neg for Angle<S> {
    type Output = Angle<S>;
    fn neg(self) -> Self {
        Angle::new(-self.0)
    }
}

impl<S: Real> fmt::Display for Angle<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
