//! Dense unitary interpretation of diagrams and semantic equivalence.
//!
//! Interpretation follows the standard conventions: the first wire is the
//! most significant index, `Seq` composes by matrix product with the
//! last-applied factor leftmost, `Par` is the Kronecker product, and the
//! control constructor embeds its body as the lower diagonal block.

use crate::diagram::{Diagram, Dialect};
use crate::error::{Error, Result};
use crate::matrix::{kron, matmul, max_abs_diff, CMat, DenseUnitary, Tolerance};
use crate::num::{cis, Real, C};

pub const DEFAULT_MAX_WIRES: usize = 12;

/// Interpreter configuration; the cap bounds the 2^wires matrix dimension.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_wires: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_wires: DEFAULT_MAX_WIRES }
    }
}

fn hadamard<S: Real>() -> CMat<S> {
    let s = S::one() / S::SQRT_2();
    let mut m = CMat::zeros(2, 2);
    m.set(0, 0, C::new(s, S::zero()));
    m.set(0, 1, C::new(s, S::zero()));
    m.set(1, 0, C::new(s, S::zero()));
    m.set(1, 1, C::new(-s, S::zero()));
    m
}

fn z_rotation<S: Real>(theta: S) -> CMat<S> {
    let mut m = CMat::zeros(2, 2);
    m.set(0, 0, C::new(S::one(), S::zero()));
    m.set(1, 1, cis(theta));
    m
}

fn cnot<S: Real>() -> CMat<S> {
    let mut m = CMat::zeros(4, 4);
    let one = C::new(S::one(), S::zero());
    m.set(0, 0, one);
    m.set(1, 1, one);
    m.set(2, 3, one);
    m.set(3, 2, one);
    m
}

/// Σ |y,x><x,y| on `n + m` wires.
pub fn swap_matrix<S: Real>(n: usize, m: usize) -> CMat<S> {
    let dn = 1usize << n;
    let dm = 1usize << m;
    let mut out = CMat::zeros(dn * dm, dn * dm);
    let one = C::new(S::one(), S::zero());
    for x in 0..dn {
        for y in 0..dm {
            out.set(y * dn + x, x * dm + y, one);
        }
    }
    out
}

fn interpret_unchecked<S: Real>(d: &Diagram<S>) -> Result<CMat<S>> {
    Ok(match d {
        Diagram::Phase(a) => CMat::phase_scalar(a.value()),
        Diagram::H => hadamard(),
        Diagram::Z(a) => z_rotation(a.value()),
        Diagram::Cnot => cnot(),
        Diagram::Id(n) => CMat::identity(1usize << n),
        Diagram::Swap(n, m) => swap_matrix(*n, *m),
        Diagram::Seq(children) => {
            let mut acc: Option<CMat<S>> = None;
            for c in children {
                let m = interpret_unchecked(c)?;
                acc = Some(match acc {
                    None => m,
                    // later factors act after earlier ones
                    Some(prev) => matmul(&m, &prev)?,
                });
            }
            acc.expect("type checking rejects empty Seq")
        }
        Diagram::Par(children) => {
            let mut acc = CMat::identity(1);
            for c in children {
                acc = kron(&acc, &interpret_unchecked(c)?);
            }
            acc
        }
        Diagram::Ctrl(body) => interpret_unchecked(body)?.controlled(),
    })
}

/// Interpret a diagram in the given dialect.
pub fn interpret_with<S: Real>(d: &Diagram<S>, dialect: Dialect, limits: Limits) -> Result<DenseUnitary<S>> {
    let wires = d.wires()?;
    if wires > limits.max_wires {
        return Err(Error::CapExceeded { wires, cap: limits.max_wires });
    }
    d.validate_dialect(dialect)?;
    interpret_unchecked(d)
}

/// Interpret under the default wire cap.
pub fn interpret<S: Real>(d: &Diagram<S>, dialect: Dialect) -> Result<DenseUnitary<S>> {
    interpret_with(d, dialect, Limits::default())
}

/// Outcome of a semantic comparison. The comparison is sensitive to global
/// phase: both languages contain phase generators, so it is observable.
#[derive(Debug, Clone, Copy)]
pub struct EquivReport<S> {
    pub equal: bool,
    pub max_abs_diff: S,
}

pub fn equiv_with<S: Real>(
    d1: &Diagram<S>,
    d2: &Diagram<S>,
    dialect: Dialect,
    tol: Tolerance<S>,
    limits: Limits,
) -> Result<EquivReport<S>> {
    let w1 = d1.wires()?;
    let w2 = d2.wires()?;
    if w1 != w2 {
        return Err(Error::ArityMismatch { expected: w1, got: w2 });
    }
    let m1 = interpret_with(d1, dialect, limits)?;
    let m2 = interpret_with(d2, dialect, limits)?;
    let diff = max_abs_diff(&m1, &m2)?;
    Ok(EquivReport { equal: diff <= tol.eps, max_abs_diff: diff })
}

pub fn equiv<S: Real>(d1: &Diagram<S>, d2: &Diagram<S>, dialect: Dialect, tol: Tolerance<S>) -> Result<EquivReport<S>> {
    equiv_with(d1, d2, dialect, tol, Limits::default())
}

/// `M · M† = I` within tolerance.
pub fn is_unitary<S: Real>(m: &CMat<S>, tol: Tolerance<S>) -> bool {
    crate::matrix::is_unitary(m, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    type D = Diagram<f64>;

    fn diff_to(d: &D, rows: Vec<Vec<(f64, f64)>>) -> f64 {
        let m = interpret(d, Dialect::Cqc).unwrap();
        let expect = CMat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|(re, im)| C::new(re, im)).collect())
                .collect(),
        );
        max_abs_diff(&m, &expect).unwrap()
    }

    #[test]
    fn hadamard_matrix() {
        let s = FRAC_1_SQRT_2;
        let d = diff_to(&D::H, vec![vec![(s, 0.0), (s, 0.0)], vec![(s, 0.0), (-s, 0.0)]]);
        assert!(d < 1e-15);
    }

    #[test]
    fn controlled_h_is_block_diagonal() {
        let m = interpret(&D::ctrl(D::H), Dialect::Cqc).unwrap();
        let s = FRAC_1_SQRT_2;
        let expect = CMat::from_rows(vec![
            vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(s, 0.0), C::new(s, 0.0)],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(s, 0.0), C::new(-s, 0.0)],
        ]);
        assert!(max_abs_diff(&m, &expect).unwrap() < 1e-15);
    }

    #[test]
    fn swap_1_1_matrix() {
        let m = interpret(&D::Swap(1, 1), Dialect::Cqc).unwrap();
        let expect = swap_matrix::<f64>(1, 1);
        assert!(max_abs_diff(&m, &expect).unwrap() == 0.0);
        assert_eq!(m.get(1, 2), C::new(1.0, 0.0));
        assert_eq!(m.get(2, 1), C::new(1.0, 0.0));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let m = interpret(&D::Cnot, Dialect::Qc).unwrap();
        // |10> -> |11>, first wire most significant
        assert_eq!(m.get(3, 2), C::new(1.0, 0.0));
        assert_eq!(m.get(2, 3), C::new(1.0, 0.0));
        assert_eq!(m.get(0, 0), C::new(1.0, 0.0));
    }

    #[test]
    fn equiv_spec_cases() {
        let hh = D::seq(vec![D::H, D::H]);
        let r = equiv(&hh, &D::Id(1), Dialect::Cqc, Tolerance::default()).unwrap();
        assert!(r.equal && r.max_abs_diff < 1e-15);

        let r = equiv(&D::phase(TAU), &D::Id(0), Dialect::Cqc, Tolerance::default()).unwrap();
        assert!(r.equal);

        let r = equiv(&D::phase(PI), &D::Id(0), Dialect::Cqc, Tolerance::default()).unwrap();
        assert!(!r.equal);
        assert!((r.max_abs_diff - 2.0).abs() < 1e-15);

        assert!(matches!(
            equiv(&D::H, &D::Id(2), Dialect::Cqc, Tolerance::default()),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn cap_and_dialect_errors() {
        let d = D::Id(3);
        assert!(matches!(
            interpret_with(&d, Dialect::Cqc, Limits { max_wires: 2 }),
            Err(Error::CapExceeded { wires: 3, cap: 2 })
        ));
        assert!(matches!(
            interpret(&D::ctrl(D::H), Dialect::Qc),
            Err(Error::DialectViolation { .. })
        ));
    }

    #[test]
    fn flatten_and_expand_swaps_preserve_semantics() {
        let d = D::seq(vec![
            D::par(vec![D::phase(0.3), D::Swap(2, 1)]),
            D::par(vec![D::H, D::Id(1), D::H]),
            D::Id(3),
        ]);
        let m = interpret(&d, Dialect::Cqc).unwrap();
        let mf = interpret(&d.flatten().unwrap(), Dialect::Cqc).unwrap();
        let me = interpret(&d.expand_swaps(), Dialect::Cqc).unwrap();
        assert!(max_abs_diff(&m, &mf).unwrap() <= 1e-12);
        assert!(max_abs_diff(&m, &me).unwrap() <= 1e-12);
    }

    #[test]
    fn expanded_swap_matches_permutation_oracle() {
        for (n, m) in [(2, 1), (1, 2), (2, 2)] {
            let d = D::Swap(n, m).expand_swaps();
            let got = interpret(&d, Dialect::Cqc).unwrap();
            let expect = swap_matrix::<f64>(n, m);
            assert!(max_abs_diff(&got, &expect).unwrap() <= 1e-12, "swap({n},{m})");
        }
    }
}
