//! The concrete rule sets.
//!
//! Shapes fixed here are pinned by the semantic checks in the test suites:
//! every rule must interpret identically on both sides for random
//! parameters, so a transcription mistake in any builder fails loudly.

use super::pattern::{ccpi_pat, cphase_pat};
use super::{
    APat, Bindings, Pat, ParamSpec, Rule, RuleKind, Side, TermView, WPat, WireChoice,
};
use crate::angle::{arg_0_2pi, Angle};
use crate::diagram::{Diagram, Dialect};

use crate::euler::euler_params;
use crate::matrix::matmul;
use crate::num::{lit, Real};
use crate::semantics::{interpret_with, Limits};
use crate::structure::{
    ccphase, cnot_cqc, ctrl_h_conjugator, lambda_circuit, split_conjugation, swap_def_cqc,
};
use std::sync::Arc;

use Diagram::{Cnot, Id, Par, Phase, Seq, Swap, Z};

fn pi<S: Real>() -> Angle<S> {
    Angle::new(S::PI())
}

fn zero<S: Real>() -> Angle<S> {
    Angle::zero()
}

fn rule<S: Real>(
    name: &'static str,
    dialect: Dialect,
    kind: RuleKind,
    params: Vec<ParamSpec>,
    lhs: Side<S>,
    rhs: Side<S>,
) -> Rule<S> {
    Rule { name, dialect, kind, params, lhs, rhs, guard: None }
}

fn template_rule<S: Real>(
    name: &'static str,
    dialect: Dialect,
    kind: RuleKind,
    params: Vec<ParamSpec>,
    lhs: Pat<S>,
    rhs: Pat<S>,
) -> Rule<S> {
    rule(name, dialect, kind, params, Side::from_pattern(lhs), Side::from_pattern(rhs))
}

/// `ph(2π) = empty`: with canonical angles the 2π phase is stored as 0.
fn phase_2pi<S: Real>(dialect: Dialect) -> Rule<S> {
    template_rule(
        "phase_2pi",
        dialect,
        RuleKind::Primitive,
        vec![],
        Pat::Phase(APat::Const(zero())),
        Pat::Id(WPat::Const(0)),
    )
}

/// `ph(α₁) ∘ ph(α₂) = ph(α₁+α₂)`; scalars also merge inside tensors.
fn phase_add<S: Real>(dialect: Dialect) -> Rule<S> {
    let lhs_pat: Pat<S> =
        Pat::SeqP(vec![Pat::Phase(APat::Var("a1")), Pat::Phase(APat::Var("a2"))]);
    let lhs_build = Side::from_pattern(lhs_pat).build;
    let matcher: super::ViewMatcher<S> = Arc::new(|view| {
        let bind = |x: Angle<S>, y: Angle<S>| {
            Some((Bindings::new().with_angle("a1", x).with_angle("a2", y), 2))
        };
        match view {
            TermView::Node(Seq(cs)) | TermView::Node(Par(cs)) if cs.len() == 2 => {
                match (&cs[0], &cs[1]) {
                    (Phase(x), Phase(y)) => bind(*x, *y).map(|(b, _)| (b, 0)),
                    _ => None,
                }
            }
            TermView::Window(_, items) if items.len() >= 2 => match (&items[0], &items[1]) {
                (Phase(x), Phase(y)) => bind(*x, *y),
                _ => None,
            },
            _ => None,
        }
    });
    rule(
        "phase_add",
        dialect,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("a1"), ParamSpec::Angle("a2")],
        Side { build: lhs_build, matches: Some(matcher) },
        Side::from_pattern(Pat::Phase(APat::Sum("a1", "a2"))),
    )
}

fn hh<S: Real>(dialect: Dialect) -> Rule<S> {
    template_rule(
        "hh",
        dialect,
        RuleKind::Primitive,
        vec![],
        Pat::SeqP(vec![Pat::H, Pat::H]),
        Pat::Id(WPat::Const(1)),
    )
}

/// The swap generator equals its gate-level definition.
fn swap_def<S: Real>(dialect: Dialect) -> Rule<S> {
    let rhs = match dialect {
        Dialect::Qc => Seq(vec![
            Cnot,
            Par(vec![Diagram::H, Diagram::H]),
            Cnot,
            Par(vec![Diagram::H, Diagram::H]),
            Cnot,
        ]),
        Dialect::Cqc => swap_def_cqc(),
    };
    rule(
        "swap_def",
        dialect,
        RuleKind::Primitive,
        vec![],
        Side::constant(Swap(1, 1)),
        Side::constant(rhs),
    )
}

fn rotation_pat<S: Real>(dialect: Dialect, a: APat<S>) -> Pat<S> {
    match dialect {
        Dialect::Qc => Pat::Z(a),
        Dialect::Cqc => cphase_pat(a),
    }
}

fn rotation_term<S: Real>(dialect: Dialect, a: Angle<S>) -> Diagram<S> {
    match dialect {
        Dialect::Qc => Z(a),
        Dialect::Cqc => Diagram::ctrl(Phase(a)),
    }
}

/// The one-qubit completeness relation. The two-parameter side
/// `H · R(α₁) · H · R(α₂) · H` rewrites to `ph(β₀) ⊗ R(β₁) · H · R(β₂) · H · R(β₃)`
/// with the β's computed from the α's; `R` is the dialect's rotation.
pub fn euler_rule<S: Real>(dialect: Dialect) -> Rule<S> {
    let lhs: Pat<S> = Pat::SeqP(vec![
        Pat::H,
        rotation_pat(dialect, APat::Var("a1")),
        Pat::H,
        rotation_pat(dialect, APat::Var("a2")),
        Pat::H,
    ]);
    let rhs_build: super::Builder<S> = Arc::new(move |b: &Bindings<S>| {
        let p = euler_params(b.angle("a1")?, b.angle("a2")?);
        Ok(Par(vec![
            Phase(p.beta0),
            Seq(vec![
                rotation_term(dialect, p.beta1),
                Diagram::H,
                rotation_term(dialect, p.beta2),
                Diagram::H,
                rotation_term(dialect, p.beta3),
            ]),
        ]))
    });
    // Backward matching: bind the β's structurally, recover the α's from
    // the 2x2 matrix, and accept only if the β formulas reproduce the
    // bound values.
    let shape: Pat<S> = Pat::ParP(vec![
        Pat::Phase(APat::Var("b0")),
        Pat::SeqP(vec![
            rotation_pat(dialect, APat::Var("b1")),
            Pat::H,
            rotation_pat(dialect, APat::Var("b2")),
            Pat::H,
            rotation_pat(dialect, APat::Var("b3")),
        ]),
    ]);
    let rhs_match: super::ViewMatcher<S> = Arc::new(move |view| {
        let (bound, consumed) = super::pattern::match_view(&shape, view)?;
        let term = view.to_term(if consumed == 0 { 0 } else { consumed });
        let m = interpret_with(&term, dialect, Limits::default()).ok()?;
        // with U the instance's matrix, H·U·H = R(α₂)·H·R(α₁) has a fixed
        // 1/√2 top-left entry and the α's in the off-diagonal arguments
        let h = interpret_with(&Diagram::H, dialect, Limits::default()).ok()?;
        let m = matmul(&h, &matmul(&m, &h).ok()?).ok()?;
        let inv_sqrt2 = S::one() / S::SQRT_2();
        let tol = lit::<S>(1e-9);
        if (m.get(0, 0).re - inv_sqrt2).abs() > tol || m.get(0, 0).im.abs() > tol {
            return None;
        }
        let a1 = Angle::new(arg_0_2pi(m.get(0, 1).re, m.get(0, 1).im));
        let a2 = Angle::new(arg_0_2pi(m.get(1, 0).re, m.get(1, 0).im));
        let p = euler_params(a1, a2);
        let close = |x: Angle<S>, y: Angle<S>| x.circle_dist(y) <= lit::<S>(1e-8);
        (close(p.beta0, bound.angle("b0").ok()?)
            && close(p.beta1, bound.angle("b1").ok()?)
            && close(p.beta2, bound.angle("b2").ok()?)
            && close(p.beta3, bound.angle("b3").ok()?))
        .then(|| (Bindings::new().with_angle("a1", a1).with_angle("a2", a2), consumed))
    });
    let lhs_side = Side::from_pattern(lhs);
    rule(
        "euler",
        dialect,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("a1"), ParamSpec::Angle("a2")],
        lhs_side,
        Side { build: rhs_build, matches: Some(rhs_match) },
    )
}

/// `Z(0) = id`.
fn z_zero<S: Real>() -> Rule<S> {
    template_rule(
        "z_zero",
        Dialect::Qc,
        RuleKind::Primitive,
        vec![],
        Pat::Z(APat::Const(zero())),
        Pat::Id(WPat::Const(1)),
    )
}

/// `Z(α₁) ∘ Z(α₂) = Z(α₁+α₂)`.
fn z_add<S: Real>() -> Rule<S> {
    template_rule(
        "z_add",
        Dialect::Qc,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("a1"), ParamSpec::Angle("a2")],
        Pat::SeqP(vec![Pat::Z(APat::Var("a1")), Pat::Z(APat::Var("a2"))]),
        Pat::Z(APat::Sum("a1", "a2")),
    )
}

/// A rotation on the control wire commutes through CNOT.
fn z_cnot_commute<S: Real>() -> Rule<S> {
    let zpad = |a: APat<S>| Pat::ParP(vec![Pat::Z(a), Pat::Id(WPat::Const(1))]);
    template_rule(
        "z_cnot_commute",
        Dialect::Qc,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("a")],
        Pat::SeqP(vec![Pat::Cnot, zpad(APat::Var("a")), Pat::Cnot]),
        zpad(APat::Var("a")),
    )
}

/// `(id ⊗ H) ∘ CNOT ∘ (id ⊗ H)` equals the two-wire controlled π phase.
fn cz_hadamard<S: Real>() -> Rule<S> {
    let hpad = Par(vec![Id(1), Diagram::H]);
    rule(
        "cz_hadamard",
        Dialect::Qc,
        RuleKind::Primitive,
        vec![],
        Side::constant(Seq(vec![hpad.clone(), Cnot, hpad])),
        Side::constant(lambda_circuit(2, S::PI())),
    )
}

/// `λⁿ(2π) = id_n`, one instance per wire count.
fn mc_phase_2pi<S: Real>(n: usize, name: &'static str) -> Rule<S> {
    rule(
        name,
        Dialect::Qc,
        RuleKind::Primitive,
        vec![],
        Side::constant(lambda_circuit(n, S::TAU())),
        Side::constant(Id(n)),
    )
}

fn id1<S: Real>() -> Pat<S> {
    Pat::Id(WPat::Const(1))
}

/// Conjugation instance: Hadamards around a controlled phase.
fn conj_h_cphase<S: Real>() -> Rule<S> {
    template_rule(
        "conj_h_cphase",
        Dialect::Cqc,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("a")],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![Pat::H, cphase_pat(APat::Var("a")), Pat::H]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), Pat::H]),
            Pat::CtrlP(Box::new(cphase_pat(APat::Var("a")))),
            Pat::ParP(vec![id1(), Pat::H]),
        ]),
    )
}

/// Conjugation instance: controlled phases around a Hadamard.
fn conj_cphase_h<S: Real>() -> Rule<S> {
    template_rule(
        "conj_cphase_h",
        Dialect::Cqc,
        RuleKind::Primitive,
        vec![ParamSpec::Angle("b")],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![
            cphase_pat(APat::Var("b")),
            Pat::H,
            cphase_pat(APat::Neg("b")),
        ]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), cphase_pat(APat::Var("b"))]),
            Pat::CtrlP(Box::new(Pat::H)),
            Pat::ParP(vec![id1(), cphase_pat(APat::Neg("b"))]),
        ]),
    )
}

/// Conjugation instance: Hadamard on the upper wire around the doubly
/// controlled π.
fn conj_h_ccpi<S: Real>() -> Rule<S> {
    let hpad = || Pat::ParP(vec![Pat::H, id1()]);
    template_rule(
        "conj_h_ccpi",
        Dialect::Cqc,
        RuleKind::Primitive,
        vec![],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![hpad(), ccpi_pat(), hpad()]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), Pat::H, id1()]),
            Pat::CtrlP(Box::new(ccpi_pat())),
            Pat::ParP(vec![id1(), Pat::H, id1()]),
        ]),
    )
}

/// Conjugation instance: doubly controlled π around a lower-wire Hadamard.
fn conj_ccpi_h<S: Real>() -> Rule<S> {
    let hlow = || Pat::ParP(vec![id1(), Pat::H]);
    template_rule(
        "conj_ccpi_h",
        Dialect::Cqc,
        RuleKind::Primitive,
        vec![],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![ccpi_pat(), hlow(), ccpi_pat()]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), ccpi_pat()]),
            Pat::CtrlP(Box::new(hlow())),
            Pat::ParP(vec![id1(), ccpi_pat()]),
        ]),
    )
}

pub fn primitive_rules<S: Real>(dialect: Dialect) -> Vec<Rule<S>> {
    let mut out = vec![
        phase_2pi(dialect),
        phase_add(dialect),
        swap_def(dialect),
        hh(dialect),
        euler_rule(dialect),
    ];
    match dialect {
        Dialect::Qc => {
            out.push(z_zero());
            out.push(z_add());
            out.push(z_cnot_commute());
            out.push(cz_hadamard());
            out.push(mc_phase_2pi(3, "mc_phase_2pi_3"));
            out.push(mc_phase_2pi(4, "mc_phase_2pi_4"));
            out.push(mc_phase_2pi(5, "mc_phase_2pi_5"));
            out.push(mc_phase_2pi(6, "mc_phase_2pi_6"));
        }
        Dialect::Cqc => {
            out.push(conj_h_cphase());
            out.push(conj_cphase_h());
            out.push(conj_h_ccpi());
            out.push(conj_ccpi_h());
        }
    }
    out
}

/// `C(ph(0)) = id`.
fn cphase_zero<S: Real>() -> Rule<S> {
    template_rule(
        "cphase_zero",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        cphase_pat(APat::Const(zero())),
        Pat::Id(WPat::Const(1)),
    )
}

/// `ph(−π) = ph(π)`: holds by representation since angles are canonical.
fn phase_neg_pi<S: Real>() -> Rule<S> {
    rule(
        "phase_neg_pi",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Side::constant(Phase(Angle::new(-S::PI()))),
        Side::constant(Phase(pi())),
    )
}

fn h_euler_rhs<S: Real>(phase: S, rot: S) -> Diagram<S> {
    Par(vec![
        Diagram::phase(phase),
        Seq(vec![
            Diagram::ctrl(Diagram::phase(rot)),
            Diagram::H,
            Diagram::ctrl(Diagram::phase(rot)),
            Diagram::H,
            Diagram::ctrl(Diagram::phase(rot)),
        ]),
    ])
}

/// The Euler image of the bare Hadamard.
fn h_euler<S: Real>() -> Rule<S> {
    rule(
        "h_euler",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Side::constant(Diagram::H),
        Side::constant(h_euler_rhs(lit::<S>(1.75) * S::PI(), S::FRAC_PI_2())),
    )
}

/// Same with the inverse rotations.
fn h_euler_var<S: Real>() -> Rule<S> {
    rule(
        "h_euler_var",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Side::constant(Diagram::H),
        Side::constant(h_euler_rhs(S::FRAC_PI_4(), lit::<S>(1.5) * S::PI())),
    )
}

/// NOT-conjugation of a controlled phase: flips the rotation and leaves a
/// global phase.
fn x_conj_cphase<S: Real>() -> Rule<S> {
    let cpi = || cphase_pat(APat::Const(pi()));
    template_rule(
        "x_conj_cphase",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![ParamSpec::Angle("a")],
        Pat::SeqP(vec![
            Pat::H,
            cpi(),
            Pat::H,
            cphase_pat(APat::Var("a")),
            Pat::H,
            cpi(),
            Pat::H,
        ]),
        Pat::ParP(vec![Pat::Phase(APat::Var("a")), cphase_pat(APat::Neg("a"))]),
    )
}

/// `C(H) = (id ⊗ H) ∘ C(H) ∘ (id ⊗ H)`.
fn conj_h_h<S: Real>() -> Rule<S> {
    template_rule(
        "conj_h_h",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Pat::CtrlP(Box::new(Pat::H)),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), Pat::H]),
            Pat::CtrlP(Box::new(Pat::H)),
            Pat::ParP(vec![id1(), Pat::H]),
        ]),
    )
}

/// Offset-1 variant of [`conj_h_ccpi`].
fn conj_h_ccpi_low<S: Real>() -> Rule<S> {
    let hlow = || Pat::ParP(vec![id1(), Pat::H]);
    template_rule(
        "conj_h_ccpi_low",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![hlow(), ccpi_pat(), hlow()]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![Pat::Id(WPat::Const(2)), Pat::H]),
            Pat::CtrlP(Box::new(ccpi_pat())),
            Pat::ParP(vec![Pat::Id(WPat::Const(2)), Pat::H]),
        ]),
    )
}

/// Offset-1 variant of [`conj_ccpi_h`].
fn conj_ccpi_h_low<S: Real>() -> Rule<S> {
    let hup = || Pat::ParP(vec![Pat::H, id1()]);
    template_rule(
        "conj_ccpi_h_low",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Pat::CtrlP(Box::new(Pat::SeqP(vec![ccpi_pat(), hup(), ccpi_pat()]))),
        Pat::SeqP(vec![
            Pat::ParP(vec![id1(), ccpi_pat()]),
            Pat::CtrlP(Box::new(hup())),
            Pat::ParP(vec![id1(), ccpi_pat()]),
        ]),
    )
}

/// Controlled Hadamard in terms of the doubly controlled π: conjugate with
/// the one-qubit circuit that rotates H's eigenbasis onto the Z basis.
fn ctrl_h_reduce<S: Real>() -> Rule<S> {
    let g = ctrl_h_conjugator::<S>();
    let rhs = Seq(vec![
        Par(vec![Id(1), g.clone()]),
        ccphase(S::PI()),
        Par(vec![Id(1), g.dagger()]),
    ]);
    rule(
        "ctrl_h_reduce",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Side::constant(Diagram::ctrl(Diagram::H)),
        Side::constant(rhs),
    )
}

/// Doubly controlled phase as single-controlled phases and CNOTs. Not
/// applicable at π, where the left side is already a basic gate; without
/// the guard the reduction loop would never terminate.
fn cc_phase_reduce<S: Real>() -> Rule<S> {
    let cnot = || {
        vec![
            Pat::ParP(vec![id1(), Pat::H]),
            ccpi_pat(),
            Pat::ParP(vec![id1(), Pat::H]),
        ]
    };
    let mut rhs = vec![Pat::ParP(vec![cphase_pat(APat::Half("a")), id1()])];
    rhs.extend(cnot());
    rhs.push(Pat::ParP(vec![id1(), cphase_pat(APat::NegHalf("a"))]));
    rhs.extend(cnot());
    rhs.push(Pat::ParP(vec![id1(), cphase_pat(APat::Half("a"))]));
    let mut r = template_rule(
        "cc_phase_reduce",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![ParamSpec::Angle("a")],
        Pat::CtrlP(Box::new(cphase_pat(APat::Var("a")))),
        Pat::SeqP(rhs),
    );
    r.guard = Some(Arc::new(|b: &Bindings<S>| {
        b.angle("a").map(|a| !a.is_pi()).unwrap_or(false)
    }));
    r
}

/// Triply controlled π phase in terms of doubly controlled phases: the
/// same halving recursion, with the third wire routed next to the first
/// two by swaps.
fn ccc_pi_reduce<S: Real>() -> Rule<S> {
    let half = S::FRAC_PI_2();
    let lower = |d: Diagram<S>| Par(vec![Id(1), d]);
    let upper = |d: Diagram<S>| Par(vec![d, Id(1)]);
    let rhs = Seq(vec![
        upper(ccphase(half)),
        lower(cnot_cqc()),
        lower(Swap(1, 1)),
        upper(ccphase(-half)),
        lower(Swap(1, 1)),
        lower(cnot_cqc()),
        lower(Swap(1, 1)),
        upper(ccphase(half)),
        lower(Swap(1, 1)),
    ]);
    rule(
        "ccc_pi_reduce",
        Dialect::Cqc,
        RuleKind::Derived,
        vec![],
        Side::constant(Diagram::ctrl(ccphase(S::PI()))),
        Side::constant(rhs),
    )
}

pub fn derived_rules<S: Real>() -> Vec<Rule<S>> {
    vec![
        cphase_zero(),
        phase_neg_pi(),
        h_euler(),
        x_conj_cphase(),
        h_euler_var(),
        conj_h_h(),
        conj_h_ccpi_low(),
        conj_ccpi_h_low(),
        ctrl_h_reduce(),
        cc_phase_reduce(),
        ccc_pi_reduce(),
    ]
}

/// A rotation slides along the wires it does not touch.
fn naturality<S: Real>(dialect: Dialect) -> Rule<S> {
    let mut r = template_rule(
        "naturality",
        dialect,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("n", 1, 2),
            ParamSpec::Wire("m", 1, 2),
            ParamSpec::Diagram("f", WireChoice::SameAs("n")),
        ],
        Pat::SeqP(vec![
            Pat::ParP(vec![Pat::AnyD("f"), Pat::Id(WPat::Var("m"))]),
            Pat::SwapP(WPat::Var("n"), WPat::Var("m")),
        ]),
        Pat::SeqP(vec![
            Pat::SwapP(WPat::Var("n"), WPat::Var("m")),
            Pat::ParP(vec![Pat::Id(WPat::Var("m")), Pat::AnyD("f")]),
        ]),
    );
    r.guard = Some(Arc::new(|b: &Bindings<S>| {
        match (b.diagram("f"), b.wire("n")) {
            (Ok(f), Ok(n)) => f.wires().map(|w| w == n).unwrap_or(false),
            _ => false,
        }
    }));
    r
}

/// Two opposite swaps cancel.
fn swap_involution<S: Real>(dialect: Dialect) -> Rule<S> {
    let lhs = Side::from_pattern(Pat::SeqP(vec![
        Pat::SwapP(WPat::Var("n"), WPat::Var("m")),
        Pat::SwapP(WPat::Var("m"), WPat::Var("n")),
    ]));
    let rhs_build: super::Builder<S> =
        Arc::new(|b: &Bindings<S>| Ok(Id(b.wire("n")? + b.wire("m")?)));
    let rhs_match: super::ViewMatcher<S> = Arc::new(|view| match view {
        TermView::Node(Id(k)) if *k >= 2 => {
            Some((Bindings::new().with_wire("n", 1).with_wire("m", k - 1), 0))
        }
        _ => None,
    });
    rule(
        "swap_involution",
        dialect,
        RuleKind::Coherence,
        vec![ParamSpec::Wire("n", 1, 2), ParamSpec::Wire("m", 1, 2)],
        lhs,
        Side { build: rhs_build, matches: Some(rhs_match) },
    )
}

/// Swaps against nothing are identities.
fn swap_unit<S: Real>(dialect: Dialect, left: bool) -> Rule<S> {
    let (name, lhs) = if left {
        ("swap_unit_left", Pat::SwapP(WPat::Const(0), WPat::Var("n")))
    } else {
        ("swap_unit_right", Pat::SwapP(WPat::Var("n"), WPat::Const(0)))
    };
    template_rule(
        name,
        dialect,
        RuleKind::Coherence,
        vec![ParamSpec::Wire("n", 0, 3)],
        lhs,
        Pat::Id(WPat::Var("n")),
    )
}

/// Peel one wire off a block swap.
fn swap_split<S: Real>(dialect: Dialect) -> Rule<S> {
    let lhs = Side::from_pattern(Pat::SwapP(WPat::Var("a"), WPat::Var("b")));
    let rhs_build: super::Builder<S> = Arc::new(|bn: &Bindings<S>| {
        let a = bn.wire("a")?;
        let b = bn.wire("b")?;
        Ok(if a >= 2 {
            Seq(vec![
                Par(vec![Id(1), Swap(a - 1, b)]),
                Par(vec![Swap(1, b), Id(a - 1)]),
            ])
        } else {
            Seq(vec![
                Par(vec![Swap(1, 1), Id(b - 1)]),
                Par(vec![Id(1), Swap(1, b - 1)]),
            ])
        })
    });
    let mut r = rule(
        "swap_split",
        dialect,
        RuleKind::Coherence,
        vec![ParamSpec::Wire("a", 1, 3), ParamSpec::Wire("b", 1, 3)],
        lhs,
        Side { build: rhs_build, matches: None },
    );
    r.guard = Some(Arc::new(|bn: &Bindings<S>| {
        match (bn.wire("a"), bn.wire("b")) {
            (Ok(a), Ok(b)) => a >= 1 && b >= 1 && a * b > 1,
            _ => false,
        }
    }));
    r
}

/// `f ⊗ g = (f ⊗ id) ∘ (id ⊗ g)`: splits one tensor factor off a parallel
/// block so the control can distribute over it.
fn tensor_split<S: Real>(dialect: Dialect) -> Rule<S> {
    let lhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        let pre = b.wire("pre")?;
        let f = b.diagram("f")?.clone();
        let rest = b.diagram("rest")?.clone();
        Par(vec![Id(pre), f, rest]).flatten()
    });
    let lhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let cs = match view {
            TermView::Node(Par(cs)) => cs,
            _ => return None,
        };
        let first_non_id = cs.iter().position(|c| !matches!(c, Id(_)))?;
        let pre: usize = cs[..first_non_id]
            .iter()
            .map(|c| if let Id(n) = c { *n } else { 0 })
            .sum();
        let rest: Vec<Diagram<S>> = cs[first_non_id + 1..].to_vec();
        if !rest.iter().any(|c| !matches!(c, Id(_))) {
            return None;
        }
        let f = cs[first_non_id].clone();
        let rest = Par(rest).flatten().ok()?;
        Some((
            Bindings::new().with_wire("pre", pre).with_diagram("f", f).with_diagram("rest", rest),
            0,
        ))
    });
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        let pre = b.wire("pre")?;
        let f = b.diagram("f")?.clone();
        let rest = b.diagram("rest")?.clone();
        let fw = f.wires()?;
        let rw = rest.wires()?;
        Seq(vec![
            Par(vec![Id(pre), f, Id(rw)]),
            Par(vec![Id(pre + fw), rest]),
        ])
        .flatten()
    });
    rule(
        "tensor_split",
        dialect,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("pre", 0, 1),
            ParamSpec::Diagram("f", WireChoice::UpTo(2)),
            ParamSpec::Diagram("rest", WireChoice::UpTo(2)),
        ],
        Side { build: lhs_build, matches: Some(lhs_match) },
        Side { build: rhs_build, matches: None },
    )
}

/// Control distributes over sequential composition.
fn ctrl_seq<S: Real>() -> Rule<S> {
    let lhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        Diagram::ctrl(Seq(vec![b.diagram("head")?.clone(), b.diagram("tail")?.clone()])).flatten()
    });
    let lhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let body = match view {
            TermView::Node(Diagram::Ctrl(body)) => body.as_ref(),
            _ => return None,
        };
        let cs = match body {
            Seq(cs) if cs.len() >= 2 => cs,
            _ => return None,
        };
        let head = cs[0].clone();
        let tail =
            if cs.len() == 2 { cs[1].clone() } else { Seq(cs[1..].to_vec()) };
        Some((Bindings::new().with_diagram("head", head).with_diagram("tail", tail), 0))
    });
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        Ok(Seq(vec![
            Diagram::ctrl(b.diagram("head")?.clone()),
            Diagram::ctrl(b.diagram("tail")?.clone()),
        ]))
    });
    rule(
        "ctrl_seq",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("n", 1, 2),
            ParamSpec::Diagram("head", WireChoice::SameAs("n")),
            ParamSpec::Diagram("tail", WireChoice::SameAs("n")),
        ],
        Side { build: lhs_build, matches: Some(lhs_match) },
        Side { build: rhs_build, matches: None },
    )
}

/// Controlling an identity adds a wire.
fn ctrl_id<S: Real>() -> Rule<S> {
    let lhs = Side::from_pattern(Pat::CtrlP(Box::new(Pat::Id(WPat::Var("n")))));
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| Ok(Id(b.wire("n")? + 1)));
    let rhs_match: super::ViewMatcher<S> = Arc::new(|view| match view {
        TermView::Node(Id(k)) if *k >= 1 => Some((Bindings::new().with_wire("n", k - 1), 0)),
        _ => None,
    });
    rule(
        "ctrl_id",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![ParamSpec::Wire("n", 0, 3)],
        lhs,
        Side { build: rhs_build, matches: Some(rhs_match) },
    )
}

/// Strength: trailing identities pass through the control.
fn ctrl_pad_right<S: Real>() -> Rule<S> {
    let lhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        Ok(Diagram::ctrl(Par(vec![b.diagram("f")?.clone(), Id(b.wire("k")?)])))
    });
    let lhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let body = match view {
            TermView::Node(Diagram::Ctrl(body)) => body.as_ref(),
            _ => return None,
        };
        let cs = match body {
            Par(cs) if cs.len() == 2 => cs,
            _ => return None,
        };
        match (&cs[0], &cs[1]) {
            (f, Id(k)) if !matches!(f, Id(_)) => {
                Some((Bindings::new().with_diagram("f", f.clone()).with_wire("k", *k), 0))
            }
            _ => None,
        }
    });
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        Ok(Par(vec![Diagram::ctrl(b.diagram("f")?.clone()), Id(b.wire("k")?)]))
    });
    let rhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let cs = match view {
            TermView::Node(Par(cs)) if cs.len() == 2 => cs,
            _ => return None,
        };
        match (&cs[0], &cs[1]) {
            (Diagram::Ctrl(f), Id(k)) => Some((
                Bindings::new().with_diagram("f", f.as_ref().clone()).with_wire("k", *k),
                0,
            )),
            _ => None,
        }
    });
    rule(
        "ctrl_pad_right",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![ParamSpec::Wire("k", 1, 2), ParamSpec::Diagram("f", WireChoice::UpTo(2))],
        Side { build: lhs_build, matches: Some(lhs_match) },
        Side { build: rhs_build, matches: Some(rhs_match) },
    )
}

/// Route a padded gate to the front of the controlled block with swaps.
fn ctrl_move_front<S: Real>() -> Rule<S> {
    let lhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        Diagram::ctrl(
            Par(vec![Id(b.wire("p")?), b.diagram("f")?.clone(), Id(b.wire("q")?)]).flatten()?,
        )
        .flatten()
    });
    let lhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let body = match view {
            TermView::Node(Diagram::Ctrl(body)) => body.as_ref(),
            _ => return None,
        };
        let cs = match body {
            Par(cs) => cs,
            _ => return None,
        };
        // exactly one non-identity child, preceded by at least one wire
        let non_id: Vec<usize> =
            cs.iter().enumerate().filter(|(_, c)| !matches!(c, Id(_))).map(|(i, _)| i).collect();
        if non_id.len() != 1 {
            return None;
        }
        let i = non_id[0];
        let p: usize = cs[..i].iter().map(|c| if let Id(n) = c { *n } else { 0 }).sum();
        let q: usize = cs[i + 1..].iter().map(|c| if let Id(n) = c { *n } else { 0 }).sum();
        let f = cs[i].clone();
        if p == 0 || f.wires().map(|w| w == 0).unwrap_or(true) {
            return None;
        }
        Some((
            Bindings::new().with_wire("p", p).with_wire("q", q).with_diagram("f", f),
            0,
        ))
    });
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        let p = b.wire("p")?;
        let q = b.wire("q")?;
        let f = b.diagram("f")?.clone();
        let nf = f.wires()?;
        Seq(vec![
            Par(vec![Id(1), Swap(p, nf), Id(q)]).flatten()?,
            Diagram::ctrl(Par(vec![f, Id(p + q)])),
            Par(vec![Id(1), Swap(nf, p), Id(q)]).flatten()?,
        ])
        .flatten()
    });
    rule(
        "ctrl_move_front",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("p", 1, 2),
            ParamSpec::Wire("q", 0, 1),
            ParamSpec::Diagram("f", WireChoice::UpTo(2)),
        ],
        Side { build: lhs_build, matches: Some(lhs_match) },
        Side { build: rhs_build, matches: None },
    )
}

/// The swap-conjugation coherence law as a rule.
fn swap_conjugation_rule<S: Real>() -> Rule<S> {
    let pad = |k: usize, s: Diagram<S>, l: usize| Par(vec![Id(k), s, Id(l)]);
    let lhs_build: super::Builder<S> = Arc::new(move |b: &Bindings<S>| {
        let (k, p, q, l) = (b.wire("k")?, b.wire("p")?, b.wire("q")?, b.wire("l")?);
        let f = b.diagram("f")?.clone();
        Seq(vec![
            pad(k + 1, Swap(q, p), l),
            Diagram::ctrl(f),
            pad(k + 1, Swap(p, q), l),
        ])
        .flatten()
    });
    let rhs_build: super::Builder<S> = Arc::new(move |b: &Bindings<S>| {
        let (k, p, q, l) = (b.wire("k")?, b.wire("p")?, b.wire("q")?, b.wire("l")?);
        let f = b.diagram("f")?.clone();
        Diagram::ctrl(
            Seq(vec![
                pad(k, Swap(q, p), l),
                f,
                pad(k, Swap(p, q), l),
            ])
            .flatten()?,
        )
        .flatten()
    });
    let mut r = rule(
        "swap_conjugation",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("k", 0, 1),
            ParamSpec::Wire("p", 1, 1),
            ParamSpec::Wire("q", 1, 1),
            ParamSpec::Wire("l", 0, 1),
            ParamSpec::Diagram("f", WireChoice::SumPlus(&["k", "p", "q", "l"], 0)),
        ],
        Side { build: lhs_build, matches: None },
        Side { build: rhs_build, matches: None },
    );
    r.guard = Some(Arc::new(|b: &Bindings<S>| {
        matches!((b.wire("p"), b.wire("q")), (Ok(p), Ok(q)) if p >= 1 && q >= 1)
    }));
    r
}

/// The conjugation law as a rule over diagram slots.
fn conjugation_rule<S: Real>() -> Rule<S> {
    let lhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        let g = b.diagram("g")?.clone();
        let f = b.diagram("f")?.clone();
        Diagram::ctrl(Seq(vec![g.clone(), f, g.dagger()]).flatten()?).flatten()
    });
    let lhs_match: super::ViewMatcher<S> = Arc::new(|view| {
        let body = match view {
            TermView::Node(Diagram::Ctrl(body)) => body.as_ref().flatten().ok()?,
            _ => return None,
        };
        let (g, f) = split_conjugation(&body)?;
        Some((Bindings::new().with_diagram("g", g).with_diagram("f", f), 0))
    });
    let rhs_build: super::Builder<S> = Arc::new(|b: &Bindings<S>| {
        let g = b.diagram("g")?.clone();
        let f = b.diagram("f")?.clone();
        Seq(vec![
            Par(vec![Id(1), g.clone()]),
            Diagram::ctrl(f),
            Par(vec![Id(1), g.dagger()]),
        ])
        .flatten()
    });
    rule(
        "conjugation",
        Dialect::Cqc,
        RuleKind::Coherence,
        vec![
            ParamSpec::Wire("n", 1, 2),
            ParamSpec::Diagram("g", WireChoice::SameAs("n")),
            ParamSpec::Diagram("f", WireChoice::SameAs("n")),
        ],
        Side { build: lhs_build, matches: Some(lhs_match) },
        Side { build: rhs_build, matches: None },
    )
}

pub fn coherence_rules<S: Real>(dialect: Dialect) -> Vec<Rule<S>> {
    let mut out = vec![
        naturality(dialect),
        swap_involution(dialect),
        swap_unit(dialect, true),
        swap_unit(dialect, false),
        swap_split(dialect),
        tensor_split(dialect),
    ];
    if dialect == Dialect::Cqc {
        out.push(ctrl_seq());
        out.push(ctrl_id());
        out.push(ctrl_pad_right());
        out.push(ctrl_move_front());
        out.push(swap_conjugation_rule());
        out.push(conjugation_rule());
    }
    out
}
