//! Control-functor structure: multi-controlled phase builders, conjugation
//! rewrites, layerization of gate-fragment circuits, and the semantic
//! checker for the conjugation condition on basic gate pairs.

use crate::angle::Angle;
use crate::diagram::{Diagram, Dialect, Path};
use crate::error::{Error, Result};
use crate::matrix::{max_abs_diff, CMat, Tolerance};
use crate::num::{cis, lit, Real};
use crate::semantics::{interpret_with, Limits};
use rand::Rng;
use serde::Serialize;

use Diagram::{Ctrl, Id, Par, Phase, Seq, Swap};

/// Controlled phase on one wire: `C(ph(α))`.
pub fn cphase<S: Real>(alpha: S) -> Diagram<S> {
    Diagram::ctrl(Diagram::phase(alpha))
}

/// Doubly controlled phase on two wires: `C(C(ph(α)))`.
pub fn ccphase<S: Real>(alpha: S) -> Diagram<S> {
    Diagram::ctrl(cphase(alpha))
}

/// CNOT expressed in the controllable language: `(id ⊗ H) ∘ CC(π) ∘ (id ⊗ H)`.
pub fn cnot_cqc<S: Real>() -> Diagram<S> {
    Seq(vec![
        Par(vec![Id(1), Diagram::H]),
        ccphase(S::PI()),
        Par(vec![Id(1), Diagram::H]),
    ])
}

/// The two-wire swap written with controllable gates only; interprets to
/// the permutation Σ|y,x><x,y| exactly.
pub fn swap_def_cqc<S: Real>() -> Diagram<S> {
    Seq(vec![
        Par(vec![Id(1), Diagram::H]),
        ccphase(S::PI()),
        Par(vec![Diagram::H, Diagram::H]),
        ccphase(S::PI()),
        Par(vec![Diagram::H, Diagram::H]),
        ccphase(S::PI()),
        Par(vec![Id(1), Diagram::H]),
    ])
}

/// One-wire circuit `g` with `g† ∘ Z(π) ∘ g = H`; conjugating the doubly
/// controlled π phase with it yields the controlled Hadamard.
pub fn ctrl_h_conjugator<S: Real>() -> Diagram<S> {
    Seq(vec![
        cphase(lit::<S>(1.5) * S::PI()),
        Diagram::H,
        cphase(lit::<S>(1.75) * S::PI()),
        Diagram::H,
        cphase(S::FRAC_PI_2()),
    ])
}

/// Multi-controlled phase in the vanilla language.
///
/// `λ⁰(α)` is the global phase, `λ¹(α)` the Z-rotation, and `λⁿ⁺²`
/// recurses with halved angles: the phase block on the first `n+1` wires,
/// a CNOT onto the last wire, the negated block on wires `1..n, n+2`
/// (routed there by swaps), the CNOT again, and the positive block on
/// `1..n, n+2`. Unfolded, the circuit holds 3^(n-1) rotation gates with
/// angles ±α/2^(n-1).
pub fn lambda_circuit<S: Real>(n: usize, alpha: S) -> Diagram<S> {
    match n {
        0 => Diagram::phase(alpha),
        1 => Diagram::z(alpha),
        _ => {
            let half = alpha / lit(2.0);
            let m = n - 2;
            let tail_cnot = Par(vec![Id(m), Diagram::Cnot]);
            let tail_swap = || Par(vec![Id(m), Swap(1, 1)]);
            Seq(vec![
                Par(vec![lambda_circuit(n - 1, half), Id(1)]),
                tail_cnot.clone(),
                tail_swap(),
                Par(vec![lambda_circuit(n - 1, -half), Id(1)]),
                tail_swap(),
                tail_cnot,
                tail_swap(),
                Par(vec![lambda_circuit(n - 1, half), Id(1)]),
                tail_swap(),
            ])
        }
    }
}

/// Multi-controlled phase in the controllable language; same recursion as
/// [`lambda_circuit`] with the CNOT spelled via the doubly controlled π.
pub fn mu_circuit<S: Real>(n: usize, alpha: S) -> Diagram<S> {
    match n {
        0 => Diagram::phase(alpha),
        1 => cphase(alpha),
        _ => {
            let half = alpha / lit(2.0);
            let m = n - 2;
            let tail_cnot = || Par(vec![Id(m), cnot_cqc()]);
            let tail_swap = || Par(vec![Id(m), Swap(1, 1)]);
            Seq(vec![
                Par(vec![mu_circuit(n - 1, half), Id(1)]),
                tail_cnot(),
                tail_swap(),
                Par(vec![mu_circuit(n - 1, -half), Id(1)]),
                tail_swap(),
                tail_cnot(),
                tail_swap(),
                Par(vec![mu_circuit(n - 1, half), Id(1)]),
                tail_swap(),
            ])
        }
    }
}

/// Closed form of the multi-controlled phase: e^{iα} on |1…1>, identity
/// elsewhere.
pub fn multi_controlled_phase_matrix<S: Real>(n: usize, alpha: S) -> CMat<S> {
    let dim = 1usize << n;
    let mut m = CMat::identity(dim);
    m.set(dim - 1, dim - 1, cis(alpha));
    m
}

/// Membership in the reduced gate set: identities, global phases,
/// controlled phases, the doubly controlled π phase, and Hadamard.
pub fn is_gate_atom<S: Real>(d: &Diagram<S>) -> bool {
    match d {
        Id(_) | Phase(_) | Diagram::H => true,
        Ctrl(inner) => match inner.as_ref() {
            Phase(_) => true,
            Ctrl(inner2) => matches!(inner2.as_ref(), Phase(a) if a.is_pi()),
            _ => false,
        },
        _ => false,
    }
}

/// Check that a diagram is built from gate-set atoms with `Seq`/`Par` only.
/// Returns the path of the first offending subterm.
pub fn check_gate_fragment<S: Real>(d: &Diagram<S>) -> Result<()> {
    fn walk<S: Real>(d: &Diagram<S>, path: &mut Path) -> Result<()> {
        if is_gate_atom(d) {
            return Ok(());
        }
        match d {
            Seq(cs) | Par(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    path.push(i);
                    walk(c, path)?;
                    path.pop();
                }
                Ok(())
            }
            _ => Err(Error::NotInFragment(path.clone())),
        }
    }
    walk(d, &mut Vec::new())
}

/// One gate padded with identities: realizes `id_p ⊗ gate ⊗ id_q`.
#[derive(Debug, Clone)]
pub struct Layer<S> {
    pub left_pad: usize,
    pub gate: Diagram<S>,
    pub right_pad: usize,
}

impl<S: Real> Layer<S> {
    pub fn to_diagram(&self) -> Diagram<S> {
        pad_gate(self.gate.clone(), self.left_pad, self.right_pad)
    }
}

/// `Par(Id(left), x, Id(right))`, flattened.
pub fn pad_gate<S: Real>(x: Diagram<S>, left: usize, right: usize) -> Diagram<S> {
    Par(vec![Id(left), x, Id(right)])
        .flatten()
        .expect("padding a well-typed gate")
}

/// Split a gate-fragment circuit into single-gate layers, leftmost gate of
/// each parallel block first. Re-composing the layers sequentially is
/// semantically exact.
pub fn layerize<S: Real>(d: &Diagram<S>) -> Result<Vec<Layer<S>>> {
    let total = d.wires()?;
    let flat = d.flatten()?;
    let mut out = Vec::new();
    collect_layers(&flat, 0, total, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn collect_layers<S: Real>(
    d: &Diagram<S>,
    offset: usize,
    total: usize,
    path: &mut Path,
    out: &mut Vec<Layer<S>>,
) -> Result<()> {
    match d {
        Id(_) => Ok(()),
        _ if is_gate_atom(d) => {
            let w = d.wires()?;
            out.push(Layer { left_pad: offset, gate: d.clone(), right_pad: total - offset - w });
            Ok(())
        }
        Seq(cs) => {
            for (i, c) in cs.iter().enumerate() {
                path.push(i);
                collect_layers(c, offset, total, path, out)?;
                path.pop();
            }
            Ok(())
        }
        Par(cs) => {
            let mut cursor = offset;
            for (i, c) in cs.iter().enumerate() {
                path.push(i);
                collect_layers(c, cursor, total, path, out)?;
                path.pop();
                cursor += c.wires()?;
            }
            Ok(())
        }
        _ => Err(Error::NotInFragment(path.clone())),
    }
}

/// Sequential recomposition of layers on `wires` wires.
pub fn reassemble_layers<S: Real>(layers: &[Layer<S>], wires: usize) -> Diagram<S> {
    if layers.is_empty() {
        return Id(wires);
    }
    Seq(layers.iter().map(|l| l.to_diagram()).collect())
        .flatten()
        .expect("layers are well typed")
}

/// Rewrite direction for the structural conjugation operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjDirection {
    Forward,
    Backward,
}

/// Split the children of a controlled `Seq` into `(g, f, g†)` with `g` as
/// large as possible: the longest prefix whose syntactic dagger mirrors the
/// suffix. Returns `(g, f)` as diagrams on the body's wires.
pub fn split_conjugation<S: Real>(body: &Diagram<S>) -> Option<(Diagram<S>, Diagram<S>)> {
    let wires = body.wires().ok()?;
    let children: Vec<Diagram<S>> = match body {
        Seq(cs) => cs.clone(),
        _ => return None,
    };
    let len = children.len();
    let mut best: Option<usize> = None;
    for r in 1..=len / 2 {
        let ok = (0..r).all(|i| {
            children[len - 1 - i]
                .structurally_equal(&children[i].dagger())
                .unwrap_or(false)
        });
        if ok {
            best = Some(r);
        }
    }
    let r = best?;
    let g = Seq(children[..r].to_vec()).flatten().ok()?;
    let middle = children[r..len - r].to_vec();
    let f = if middle.is_empty() {
        Id(wires)
    } else {
        Seq(middle).flatten().ok()?
    };
    Some((g, f))
}

fn post_check<S: Real>(
    name: &str,
    before: &Diagram<S>,
    after: &Diagram<S>,
    dialect: Dialect,
) -> Result<()> {
    let limits = Limits::default();
    let a = interpret_with(before, dialect, limits)?;
    let b = interpret_with(after, dialect, limits)?;
    let diff = max_abs_diff(&a, &b)?;
    if diff > S::default_tol() {
        return Err(Error::SemanticDrift { rule: name.to_string(), max_diff: diff.to_f64().unwrap() });
    }
    Ok(())
}

/// The conjugation rewrite at a position.
///
/// Forward: `C(g then f then g†)` becomes `(id⊗g) then C(f) then (id⊗g†)`,
/// where the wrapping factors must be syntactic daggers of each other.
/// Backward undoes it. Every application is checked semantically.
pub fn conjugate_control<S: Real>(
    d: &Diagram<S>,
    path: &[usize],
    dir: ConjDirection,
) -> Result<Diagram<S>> {
    let sub = d.subterm_at(path)?.flatten()?;
    let replacement = match dir {
        ConjDirection::Forward => {
            let body = match &sub {
                Ctrl(body) => body.as_ref().clone(),
                _ => return Err(Error::PatternMismatch(path.to_vec())),
            };
            let (g, f) = split_conjugation(&body.flatten()?)
                .ok_or_else(|| Error::PatternMismatch(path.to_vec()))?;
            Seq(vec![
                Par(vec![Id(1), g.clone()]),
                Diagram::ctrl(f),
                Par(vec![Id(1), g.dagger()]),
            ])
        }
        ConjDirection::Backward => {
            let cs = match &sub {
                Seq(cs) if cs.len() == 3 => cs,
                _ => return Err(Error::PatternMismatch(path.to_vec())),
            };
            let (g, mid, gd) = (&cs[0], &cs[1], &cs[2]);
            let f = match mid {
                Ctrl(f) => f.as_ref().clone(),
                _ => return Err(Error::PatternMismatch(path.to_vec())),
            };
            // flatten splices `Par(Id(1), g)`: find the identity that pads
            // the control wire and peel one wire off it
            let strip = |side: &Diagram<S>| -> Option<Diagram<S>> {
                let cs = match side.flatten().ok()? {
                    Par(cs) => cs,
                    _ => return None,
                };
                let first_wire = cs.iter().position(|c| c.wires().map_or(false, |w| w > 0))?;
                let k = match &cs[first_wire] {
                    Id(k) => *k,
                    _ => return None,
                };
                let mut rest = cs;
                if k == 1 {
                    rest.remove(first_wire);
                } else {
                    rest[first_wire] = Id(k - 1);
                }
                Par(rest).flatten().ok()
            };
            let g = strip(g).ok_or_else(|| Error::PatternMismatch(path.to_vec()))?;
            let gd = strip(gd).ok_or_else(|| Error::PatternMismatch(path.to_vec()))?;
            if !gd.structurally_equal(&g.dagger())? {
                return Err(Error::PatternMismatch(path.to_vec()));
            }
            Diagram::ctrl(Seq(vec![g.clone(), f, g.dagger()]))
        }
    };
    let out = d.replace_at(path, replacement)?.flatten()?;
    post_check("conjugation", d, &out, Dialect::Cqc)?;
    Ok(out)
}

/// The swap-conjugation coherence rewrite at a position.
///
/// Forward direction pushes a swap conjugation inside the control:
/// `(id_{k+1} ⊗ σ ⊗ id_ℓ) wrapping C(f)` becomes `C(σ-wrapped f)`.
pub fn swap_conjugation<S: Real>(
    d: &Diagram<S>,
    path: &[usize],
    dir: ConjDirection,
) -> Result<Diagram<S>> {
    let sub = d.subterm_at(path)?.flatten()?;
    let replacement = match dir {
        ConjDirection::Forward => {
            let (k1, q, p, l, f) = match_swap_wrap(&sub, true)
                .ok_or_else(|| Error::PatternMismatch(path.to_vec()))?;
            let k = k1 - 1;
            Diagram::ctrl(Seq(vec![
                pad3(k, Swap(q, p), l),
                f,
                pad3(k, Swap(p, q), l),
            ]))
        }
        ConjDirection::Backward => {
            let body = match &sub {
                Ctrl(body) => body.flatten()?,
                _ => return Err(Error::PatternMismatch(path.to_vec())),
            };
            let (k, q, p, l, f) = match_swap_wrap(&body, false)
                .ok_or_else(|| Error::PatternMismatch(path.to_vec()))?;
            Seq(vec![
                pad3(k + 1, Swap(q, p), l),
                Diagram::ctrl(f),
                pad3(k + 1, Swap(p, q), l),
            ])
        }
    };
    let out = d.replace_at(path, replacement)?.flatten()?;
    post_check("swap_conjugation", d, &out, Dialect::Cqc)?;
    Ok(out)
}

fn pad3<S: Real>(left: usize, mid: Diagram<S>, right: usize) -> Diagram<S> {
    Par(vec![Id(left), mid, Id(right)]).flatten().expect("well typed padding")
}

/// Match `pad(k, σ_{q,p}, ℓ) ∘ X ∘ pad(k, σ_{p,q}, ℓ)`; when `expect_ctrl`
/// the middle factor must be a control and its body is returned, otherwise
/// the middle is returned as-is.
fn match_swap_wrap<S: Real>(
    d: &Diagram<S>,
    expect_ctrl: bool,
) -> Option<(usize, usize, usize, usize, Diagram<S>)> {
    let cs = match d {
        Seq(cs) if cs.len() == 3 => cs,
        _ => return None,
    };
    let (k, q, p, l) = match_padded_swap(&cs[0])?;
    let (k2, p2, q2, l2) = match_padded_swap(&cs[2])?;
    if k != k2 || p != p2 || q != q2 || l != l2 {
        return None;
    }
    let mid = if expect_ctrl {
        match &cs[1] {
            Ctrl(body) => body.as_ref().clone(),
            _ => return None,
        }
    } else {
        cs[1].clone()
    };
    Some((k, q, p, l, mid))
}

/// Decompose a flattened `Par` as `Id(k) ⊗ Swap(a, b) ⊗ Id(ℓ)`.
fn match_padded_swap<S: Real>(d: &Diagram<S>) -> Option<(usize, usize, usize, usize)> {
    match d {
        Swap(a, b) => Some((0, *a, *b, 0)),
        Par(cs) => {
            let mut k = 0;
            let mut l = 0;
            let mut swap = None;
            for c in cs {
                match (c, swap.is_some()) {
                    (Id(n), false) => k += n,
                    (Id(n), true) => l += n,
                    (Swap(a, b), false) => swap = Some((*a, *b)),
                    _ => return None,
                }
            }
            let (a, b) = swap?;
            Some((k, a, b, l))
        }
        _ => None,
    }
}

/// Kind of justification for one case of the conjugation-condition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionCaseKind {
    /// One side is an identity or a bare phase; commutation is immediate.
    Trivial,
    /// Both sides are controlled phases; diagonal gates commute.
    Diagonal,
    /// A named relation of the controllable language covers the case.
    Relation,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCase {
    pub x: String,
    pub y: String,
    pub offset: Option<usize>,
    pub kind: ConditionCaseKind,
    pub relation: Option<&'static str>,
    pub max_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub cases: Vec<ConditionCase>,
    pub all_pass: bool,
}

/// Gate-set schemas used when enumerating the conjugation condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSchema {
    Identity(usize),
    GlobalPhase,
    CtrlPhase,
    CtrlCtrlPi,
    Hadamard,
}

impl GateSchema {
    pub fn wires(self) -> usize {
        match self {
            GateSchema::Identity(n) => n,
            GateSchema::GlobalPhase => 0,
            GateSchema::CtrlPhase => 1,
            GateSchema::CtrlCtrlPi => 2,
            GateSchema::Hadamard => 1,
        }
    }

    pub fn label(self) -> String {
        match self {
            GateSchema::Identity(n) => format!("id({n})"),
            GateSchema::GlobalPhase => "ph(a)".into(),
            GateSchema::CtrlPhase => "C(ph(a))".into(),
            GateSchema::CtrlCtrlPi => "C(C(ph(pi)))".into(),
            GateSchema::Hadamard => "H".into(),
        }
    }

    fn instantiate<S: Real>(self, angle: S) -> Diagram<S> {
        match self {
            GateSchema::Identity(n) => Id(n),
            GateSchema::GlobalPhase => Diagram::phase(angle),
            GateSchema::CtrlPhase => cphase(angle),
            GateSchema::CtrlCtrlPi => ccphase(S::PI()),
            GateSchema::Hadamard => Diagram::H,
        }
    }

    fn has_angle(self) -> bool {
        matches!(self, GateSchema::GlobalPhase | GateSchema::CtrlPhase)
    }

    pub fn all() -> Vec<GateSchema> {
        vec![
            GateSchema::Identity(1),
            GateSchema::Identity(2),
            GateSchema::GlobalPhase,
            GateSchema::CtrlPhase,
            GateSchema::CtrlCtrlPi,
            GateSchema::Hadamard,
        ]
    }
}

/// Which named relation the table assigns to a gate pair and offset.
fn table_relation(x: GateSchema, y: GateSchema, i: usize) -> Option<&'static str> {
    use GateSchema::*;
    match (x, y, i) {
        (CtrlPhase, Hadamard, 1) => Some("conj_h_cphase"),
        (Hadamard, CtrlPhase, 1) => Some("conj_cphase_h"),
        (CtrlCtrlPi, Hadamard, 1) => Some("conj_h_ccpi_low"),
        (CtrlCtrlPi, Hadamard, 2) => Some("conj_h_ccpi"),
        (Hadamard, CtrlCtrlPi, 1) => Some("conj_ccpi_h_low"),
        (Hadamard, CtrlCtrlPi, 2) => Some("conj_ccpi_h"),
        (Hadamard, Hadamard, 1) => Some("conj_h_h"),
        _ => None,
    }
}

fn case_kind(x: GateSchema, y: GateSchema, i: usize) -> (ConditionCaseKind, Option<&'static str>) {
    use GateSchema::*;
    if matches!(x, Identity(_) | GlobalPhase) || matches!(y, Identity(_) | GlobalPhase) {
        return (ConditionCaseKind::Trivial, None);
    }
    if matches!(x, CtrlPhase | CtrlCtrlPi) && matches!(y, CtrlPhase | CtrlCtrlPi) {
        return (ConditionCaseKind::Diagonal, None);
    }
    match table_relation(x, y, i) {
        Some(r) => (ConditionCaseKind::Relation, Some(r)),
        None => (ConditionCaseKind::Relation, None),
    }
}

/// `f_{x,i} = id_{max(0,i−n)} ⊗ x ⊗ id_{max(0,m−i)}` on `max(n,m)`-ish wires;
/// together with `g_{y,i}` below it realizes every overlap of an `x` layer
/// and a `y` layer at relative offset `i`.
fn offset_pair<S: Real>(
    x: &Diagram<S>,
    y: &Diagram<S>,
    i: usize,
) -> Result<(Diagram<S>, Diagram<S>)> {
    let n = x.wires()?;
    let m = y.wires()?;
    let f = pad_gate(x.clone(), i.saturating_sub(n), m.saturating_sub(i));
    let g = pad_gate(y.clone(), n.saturating_sub(i), i.saturating_sub(m));
    Ok((f, g))
}

/// Verify the conjugation condition semantically for every pair of gate
/// schemas and every overlap offset.
pub fn check_conjugation_condition<S: Real>(
    tol: Tolerance<S>,
    angle_samples: usize,
    rng: &mut impl Rng,
) -> ConditionReport {
    let schemas = GateSchema::all();
    let mut cases = Vec::new();
    for &x in &schemas {
        for &y in &schemas {
            let n = x.wires();
            let m = y.wires();
            let offsets: Vec<usize> = if n + m >= 1 { (1..n + m).collect() } else { Vec::new() };
            let (kind0, _) = case_kind(x, y, 1);
            if offsets.is_empty() {
                // 0-wire pairs never overlap; record the trivial pass
                cases.push(ConditionCase {
                    x: x.label(),
                    y: y.label(),
                    offset: None,
                    kind: kind0,
                    relation: None,
                    max_diff: 0.0,
                    pass: true,
                });
                continue;
            }
            for i in offsets {
                let (kind, relation) = case_kind(x, y, i);
                let samples = if x.has_angle() || y.has_angle() { angle_samples.max(1) } else { 1 };
                let mut worst = S::zero();
                let mut ok = true;
                for _ in 0..samples {
                    let ax = lit::<S>(rng.gen_range(0.0..std::f64::consts::TAU));
                    let ay = lit::<S>(rng.gen_range(0.0..std::f64::consts::TAU));
                    match condition_diff(&x.instantiate(ax), &y.instantiate(ay), i) {
                        Ok(d) => {
                            worst = worst.max(d);
                            ok &= d <= tol.eps;
                        }
                        Err(_) => ok = false,
                    }
                }
                cases.push(ConditionCase {
                    x: x.label(),
                    y: y.label(),
                    offset: Some(i),
                    kind,
                    relation,
                    max_diff: worst.to_f64().unwrap_or(f64::NAN),
                    pass: ok,
                });
            }
        }
    }
    let all_pass = cases.iter().all(|c| c.pass);
    ConditionReport { cases, all_pass }
}

/// Semantic gap of the conjugation identity for one `(x, y, i)` instance:
/// `C(g† ∘ f ∘ g)` against `(id ⊗ g†) ∘ C(f) ∘ (id ⊗ g)`.
pub fn condition_diff<S: Real>(x: &Diagram<S>, y: &Diagram<S>, i: usize) -> Result<S> {
    let (f, g) = offset_pair(x, y, i)?;
    let lhs = Diagram::ctrl(Seq(vec![g.clone(), f.clone(), g.dagger()]));
    let rhs = Seq(vec![
        Par(vec![Id(1), g.clone()]),
        Diagram::ctrl(f),
        Par(vec![Id(1), g.dagger()]),
    ]);
    let limits = Limits::default();
    let a = interpret_with(&lhs, Dialect::Cqc, limits)?;
    let b = interpret_with(&rhs, Dialect::Cqc, limits)?;
    max_abs_diff(&a, &b)
}

/// Convenience: `Angle`-taking wrappers used by the rule catalog.
pub fn cphase_angle<S: Real>(a: Angle<S>) -> Diagram<S> {
    Ctrl(Box::new(Phase(a)))
}
