//! Term templates: one description serves as builder and matcher for both
//! sides of most rules.

use super::{Bindings, CompKind, TermView};
use crate::angle::Angle;
use crate::diagram::Diagram;
use crate::error::Result;
use crate::num::{lit, Real};

/// Angle slot in a pattern.
#[derive(Debug, Clone)]
pub enum APat<S> {
    Const(Angle<S>),
    Var(&'static str),
    /// Negation of a variable.
    Neg(&'static str),
    /// Half of a variable's canonical representative.
    Half(&'static str),
    /// Negated half.
    NegHalf(&'static str),
    /// Sum of two variables.
    Sum(&'static str, &'static str),
}

/// Wire-count slot in a pattern.
#[derive(Debug, Clone)]
pub enum WPat {
    Const(usize),
    Var(&'static str),
}

/// A diagram shape with slots.
#[derive(Debug, Clone)]
pub enum Pat<S> {
    Phase(APat<S>),
    H,
    Z(APat<S>),
    Cnot,
    Id(WPat),
    SwapP(WPat, WPat),
    SeqP(Vec<Pat<S>>),
    ParP(Vec<Pat<S>>),
    CtrlP(Box<Pat<S>>),
    /// Whole-subterm slot.
    AnyD(&'static str),
}

/// Controlled-phase shorthand used all over the controllable catalog.
pub fn cphase_pat<S: Real>(a: APat<S>) -> Pat<S> {
    Pat::CtrlP(Box::new(Pat::Phase(a)))
}

/// Doubly controlled π shorthand.
pub fn ccpi_pat<S: Real>() -> Pat<S> {
    Pat::CtrlP(Box::new(Pat::CtrlP(Box::new(Pat::Phase(APat::Const(Angle::new(S::PI())))))))
}

pub fn build<S: Real>(pat: &Pat<S>, b: &Bindings<S>) -> Result<Diagram<S>> {
    Ok(match pat {
        Pat::Phase(a) => Diagram::Phase(eval_angle(a, b)?),
        Pat::H => Diagram::H,
        Pat::Z(a) => Diagram::Z(eval_angle(a, b)?),
        Pat::Cnot => Diagram::Cnot,
        Pat::Id(w) => Diagram::Id(eval_wire(w, b)?),
        Pat::SwapP(n, m) => Diagram::Swap(eval_wire(n, b)?, eval_wire(m, b)?),
        Pat::SeqP(ps) => {
            Diagram::Seq(ps.iter().map(|p| build(p, b)).collect::<Result<Vec<_>>>()?)
        }
        Pat::ParP(ps) => {
            Diagram::Par(ps.iter().map(|p| build(p, b)).collect::<Result<Vec<_>>>()?)
        }
        Pat::CtrlP(p) => Diagram::ctrl(build(p, b)?),
        Pat::AnyD(name) => b.diagram(name)?.clone(),
    })
}

fn eval_angle<S: Real>(a: &APat<S>, b: &Bindings<S>) -> Result<Angle<S>> {
    Ok(match a {
        APat::Const(v) => *v,
        APat::Var(x) => b.angle(x)?,
        APat::Neg(x) => -b.angle(x)?,
        APat::Half(x) => Angle::new(b.angle(x)?.half()),
        APat::NegHalf(x) => Angle::new(-b.angle(x)?.half()),
        APat::Sum(x, y) => b.angle(x)? + b.angle(y)?,
    })
}

fn eval_wire<S: Real>(w: &WPat, b: &Bindings<S>) -> Result<usize> {
    Ok(match w {
        WPat::Const(n) => *n,
        WPat::Var(x) => b.wire(x)?,
    })
}

/// Bind or check an angle slot against a concrete angle.
fn unify_angle<S: Real>(a: &APat<S>, got: Angle<S>, b: &mut Bindings<S>) -> bool {
    match a {
        APat::Const(v) => got.approx_eq(*v),
        APat::Var(x) => match b.angles.get(*x) {
            Some(v) => got.approx_eq(*v),
            None => {
                b.angles.insert(x.to_string(), got);
                true
            }
        },
        APat::Neg(x) => match b.angles.get(*x) {
            Some(v) => got.approx_eq(-*v),
            None => {
                b.angles.insert(x.to_string(), -got);
                true
            }
        },
        APat::Half(x) => match b.angles.get(*x) {
            Some(v) => got.approx_eq(Angle::new(v.half())),
            None => {
                b.angles.insert(x.to_string(), Angle::new(got.value() * lit::<S>(2.0)));
                true
            }
        },
        APat::NegHalf(x) => match b.angles.get(*x) {
            Some(v) => got.approx_eq(Angle::new(-v.half())),
            None => {
                b.angles.insert(x.to_string(), Angle::new(-(got.value() * lit::<S>(2.0))));
                true
            }
        },
        APat::Sum(x, y) => match (b.angles.get(*x).copied(), b.angles.get(*y).copied()) {
            (Some(vx), Some(vy)) => got.approx_eq(vx + vy),
            (Some(vx), None) => {
                b.angles.insert(y.to_string(), got - vx);
                true
            }
            (None, Some(vy)) => {
                b.angles.insert(x.to_string(), got - vy);
                true
            }
            (None, None) => {
                // canonical even split
                let half = Angle::new(got.half());
                b.angles.insert(x.to_string(), half);
                b.angles.insert(y.to_string(), got - half);
                true
            }
        },
    }
}

fn unify_wire(w: &WPat, got: usize, b: &mut Bindings<impl Real>) -> bool {
    match w {
        WPat::Const(n) => *n == got,
        WPat::Var(x) => match b.wires.get(*x) {
            Some(v) => *v == got,
            None => {
                b.wires.insert(x.to_string(), got);
                true
            }
        },
    }
}

fn unify_node<S: Real>(pat: &Pat<S>, term: &Diagram<S>, b: &mut Bindings<S>) -> bool {
    match (pat, term) {
        (Pat::AnyD(name), t) => match b.diagrams.get(*name) {
            Some(bound) => bound.approx_eq(t),
            None => {
                b.diagrams.insert(name.to_string(), t.clone());
                true
            }
        },
        (Pat::Phase(a), Diagram::Phase(got)) => unify_angle(a, *got, b),
        (Pat::H, Diagram::H) | (Pat::Cnot, Diagram::Cnot) => true,
        (Pat::Z(a), Diagram::Z(got)) => unify_angle(a, *got, b),
        (Pat::Id(w), Diagram::Id(n)) => unify_wire(w, *n, b),
        (Pat::SwapP(wn, wm), Diagram::Swap(n, m)) => unify_wire(wn, *n, b) && unify_wire(wm, *m, b),
        (Pat::SeqP(ps), Diagram::Seq(cs)) | (Pat::ParP(ps), Diagram::Par(cs)) => {
            ps.len() == cs.len() && ps.iter().zip(cs).all(|(p, c)| unify_node(p, c, b))
        }
        (Pat::CtrlP(p), Diagram::Ctrl(body)) => unify_node(p, body, b),
        _ => false,
    }
}

/// Match a pattern against a term view. Composite patterns match whole
/// nodes of the same kind or a window of a composite's children.
pub fn match_view<S: Real>(pat: &Pat<S>, view: &TermView<S>) -> Option<(Bindings<S>, usize)> {
    let mut b = Bindings::new();
    match view {
        TermView::Node(t) => unify_node(pat, t, &mut b).then(|| (b, 0)),
        TermView::Window(kind, items) => {
            let ps = match (pat, kind) {
                (Pat::SeqP(ps), CompKind::Seq) | (Pat::ParP(ps), CompKind::Par) => ps,
                _ => return None,
            };
            if items.len() < ps.len() {
                return None;
            }
            ps.iter()
                .zip(&items[..ps.len()])
                .all(|(p, c)| unify_node(p, c, &mut b))
                .then(|| (b, ps.len()))
        }
    }
}
