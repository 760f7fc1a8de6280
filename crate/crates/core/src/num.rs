//! Scalar abstraction: everything numeric is generic over a real type.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar backing all angles and matrix entries: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used when comparing angles against distinguished constants.
    fn angle_eps() -> Self {
        Self::from_f64(1e-12).unwrap()
    }

    /// Default tolerance for semantic (matrix) comparisons.
    fn default_tol() -> Self {
        Self::from_f64(1e-9).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the chosen real scalar.
pub type C<S> = Complex<S>;

/// Shorthand for converting an `f64` literal into the scalar type.
pub(crate) fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("f64 literal converts into any Real")
}

/// e^{iθ} as a complex scalar.
///
/// Canonical quarter-turn angles evaluate exactly: an angle stored as the
/// float π denotes a half turn, and `sin` of that float returning 1.2e-16
/// would smear a systematic bias over long gate products.
pub fn cis<S: Real>(theta: S) -> C<S> {
    let half = S::PI();
    let quarter = S::FRAC_PI_2();
    if theta == S::zero() {
        C::new(S::one(), S::zero())
    } else if theta == quarter {
        C::new(S::zero(), S::one())
    } else if theta == half {
        C::new(-S::one(), S::zero())
    } else if theta == half + quarter {
        C::new(S::zero(), -S::one())
    } else {
        C::new(theta.cos(), theta.sin())
    }
}
