//! The diagram AST shared by both circuit languages.
//!
//! A diagram is a term over generators, identities, swaps, sequential and
//! parallel composition, and the control constructor. Every well-typed
//! diagram is an endomorphism: it has the same number of input and output
//! wires. The vanilla language (`Dialect::Qc`) owns the `Z` and `Cnot`
//! generators and forbids `Ctrl`; the controllable language (`Dialect::Cqc`)
//! owns `Ctrl` and forbids `Z` and `Cnot`.

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::num::Real;

/// Which circuit language a diagram is meant to live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dialect {
    /// Vanilla circuits: phases, `H`, `Z(α)`, `CNOT`.
    Qc,
    /// Controllable circuits: phases, `H`, and the `Ctrl` constructor.
    Cqc,
}

impl Dialect {
    pub fn name(self) -> &'static str {
        match self {
            Dialect::Qc => "qc",
            Dialect::Cqc => "cqc",
        }
    }
}

impl std::fmt::Display for Dialect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Address of a subterm: child indices from the root. Indexing steps into
/// `Seq`/`Par` children; a `Ctrl` body is child `0`.
pub type Path = Vec<usize>;

/// A circuit term.
#[derive(Debug, Clone)]
pub enum Diagram<S> {
    /// Global phase, a 0-wire generator.
    Phase(Angle<S>),
    /// Hadamard, one wire.
    H,
    /// Z-rotation, one wire (vanilla dialect only).
    Z(Angle<S>),
    /// Controlled NOT with the control on the first wire (vanilla only).
    Cnot,
    /// Identity on `n` wires.
    Id(usize),
    /// Block permutation exchanging the first `n` wires with the next `m`.
    Swap(usize, usize),
    /// Sequential composition, first child applied first.
    Seq(Vec<Diagram<S>>),
    /// Parallel composition, first child on the topmost wires.
    Par(Vec<Diagram<S>>),
    /// Control constructor: one extra wire on top (controllable only).
    Ctrl(Box<Diagram<S>>),
}

use Diagram::*;

impl<S: Real> Diagram<S> {
    pub fn phase(radians: S) -> Self {
        Phase(Angle::new(radians))
    }

    pub fn z(radians: S) -> Self {
        Z(Angle::new(radians))
    }

    pub fn ctrl(body: Diagram<S>) -> Self {
        Ctrl(Box::new(body))
    }

    /// `n` nested controls around `body`.
    pub fn ctrl_n(n: usize, body: Diagram<S>) -> Self {
        let mut d = body;
        for _ in 0..n {
            d = Diagram::ctrl(d);
        }
        d
    }

    pub fn seq(children: Vec<Diagram<S>>) -> Self {
        Seq(children)
    }

    pub fn par(children: Vec<Diagram<S>>) -> Self {
        Par(children)
    }

    /// Wire count of an endomorphism diagram; fails on ill-typed `Seq`.
    pub fn wires(&self) -> Result<usize> {
        self.wires_at(&mut Vec::new())
    }

    fn wires_at(&self, path: &mut Path) -> Result<usize> {
        match self {
            Phase(_) => Ok(0),
            H | Z(_) => Ok(1),
            Cnot => Ok(2),
            Id(n) => Ok(*n),
            Swap(n, m) => Ok(n + m),
            Seq(children) => {
                if children.is_empty() {
                    return Err(Error::TypeError(path.clone()));
                }
                let mut first = None;
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    let w = c.wires_at(path)?;
                    path.pop();
                    match first {
                        None => first = Some(w),
                        Some(f) if f != w => {
                            path.push(i);
                            let e = Error::TypeError(path.clone());
                            path.pop();
                            return Err(e);
                        }
                        _ => {}
                    }
                }
                Ok(first.unwrap())
            }
            Par(children) => {
                let mut total = 0;
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    total += c.wires_at(path)?;
                    path.pop();
                }
                Ok(total)
            }
            Ctrl(body) => {
                path.push(0);
                let w = body.wires_at(path)?;
                path.pop();
                Ok(1 + w)
            }
        }
    }

    /// Domain and codomain wire counts (equal: all diagrams are endomorphisms).
    pub fn arity(&self) -> Result<(usize, usize)> {
        let w = self.wires()?;
        Ok((w, w))
    }

    /// Paths of nodes that are illegal in the given dialect.
    pub fn dialect_violations(&self, dialect: Dialect) -> Vec<Path> {
        let mut out = Vec::new();
        self.collect_violations(dialect, &mut Vec::new(), &mut out);
        out
    }

    fn collect_violations(&self, dialect: Dialect, path: &mut Path, out: &mut Vec<Path>) {
        let illegal = match (self, dialect) {
            (Ctrl(_), Dialect::Qc) => true,
            (Z(_), Dialect::Cqc) | (Cnot, Dialect::Cqc) => true,
            _ => false,
        };
        if illegal {
            out.push(path.clone());
        }
        match self {
            Seq(children) | Par(children) => {
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    c.collect_violations(dialect, path, out);
                    path.pop();
                }
            }
            Ctrl(body) => {
                path.push(0);
                body.collect_violations(dialect, path, out);
                path.pop();
            }
            _ => {}
        }
    }

    pub fn validate_dialect(&self, dialect: Dialect) -> Result<()> {
        match self.dialect_violations(dialect).into_iter().next() {
            None => Ok(()),
            Some(path) => Err(Error::DialectViolation { path, dialect: dialect.name() }),
        }
    }

    /// Canonical flattened form.
    ///
    /// - no `Seq` directly under `Seq`, no `Par` under `Par`;
    /// - identity children of a `Seq` are dropped (an all-identity `Seq`
    ///   of arity `n` collapses to `Id(n)`);
    /// - adjacent `Id` children of a `Par` merge, `Id(0)` children vanish,
    ///   and 0-wire children move to the front of the list;
    /// - single-child `Seq`/`Par` unwrap.
    ///
    /// The input must type-check; `flatten` preserves arity and semantics.
    pub fn flatten(&self) -> Result<Diagram<S>> {
        let w = self.wires()?;
        Ok(self.flatten_inner(w))
    }

    fn flatten_inner(&self, wires: usize) -> Diagram<S> {
        match self {
            Seq(children) => {
                let mut out: Vec<Diagram<S>> = Vec::new();
                for c in children {
                    let fc = c.flatten_inner(wires);
                    match fc {
                        Seq(inner) => out.extend(inner),
                        Id(_) => {}
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Id(wires),
                    1 => out.pop().unwrap(),
                    _ => Seq(out),
                }
            }
            Par(children) => {
                let mut out: Vec<Diagram<S>> = Vec::new();
                for c in children {
                    let cw = c.wires().expect("type-checked above");
                    let fc = c.flatten_inner(cw);
                    match fc {
                        Par(inner) => out.extend(inner),
                        Id(0) => {}
                        other => out.push(other),
                    }
                }
                // 0-wire children go first, preserving relative order;
                // identities merge only after the move makes them adjacent
                let (zero, rest): (Vec<_>, Vec<_>) =
                    out.into_iter().partition(|c| c.wires().expect("typed") == 0);
                let mut out: Vec<Diagram<S>> = zero;
                for c in rest {
                    if let (Some(Id(a)), Id(b)) = (out.last_mut(), &c) {
                        *a += b;
                        continue;
                    }
                    out.push(c);
                }
                match out.len() {
                    0 => Id(wires),
                    1 => out.pop().unwrap(),
                    _ => Par(out),
                }
            }
            Ctrl(body) => Ctrl(Box::new(body.flatten_inner(wires - 1))),
            other => other.clone(),
        }
    }

    /// Rewrite every `Swap(n, m)` into `Swap(1, 1)` nodes padded with
    /// identities; swaps with a zero side become identities.
    pub fn expand_swaps(&self) -> Diagram<S> {
        match self {
            Swap(n, m) => expand_swap(*n, *m),
            Seq(children) => Seq(children.iter().map(|c| c.expand_swaps()).collect()),
            Par(children) => Par(children.iter().map(|c| c.expand_swaps()).collect()),
            Ctrl(body) => Ctrl(Box::new(body.expand_swaps())),
            other => other.clone(),
        }
    }

    /// Syntactic adjoint: reverses sequencing and negates rotation angles.
    pub fn dagger(&self) -> Diagram<S> {
        match self {
            Phase(a) => Phase(-*a),
            H => H,
            Z(a) => Z(-*a),
            Cnot => Cnot,
            Id(n) => Id(*n),
            Swap(n, m) => Swap(*m, *n),
            Seq(children) => Seq(children.iter().rev().map(|c| c.dagger()).collect()),
            Par(children) => Par(children.iter().map(|c| c.dagger()).collect()),
            Ctrl(body) => Ctrl(Box::new(body.dagger())),
        }
    }

    /// Immutable children access for path traversal.
    fn child(&self, idx: usize) -> Option<&Diagram<S>> {
        match self {
            Seq(cs) | Par(cs) => cs.get(idx),
            Ctrl(body) if idx == 0 => Some(body),
            _ => None,
        }
    }

    pub fn subterm_at(&self, path: &[usize]) -> Result<&Diagram<S>> {
        let mut cur = self;
        for (depth, &idx) in path.iter().enumerate() {
            cur = cur.child(idx).ok_or_else(|| Error::InvalidPath(path[..=depth].to_vec()))?;
        }
        Ok(cur)
    }

    /// Replace the subterm at `path` with `replacement`; the replacement must
    /// have the same arity as the subterm it displaces.
    pub fn replace_at(&self, path: &[usize], replacement: Diagram<S>) -> Result<Diagram<S>> {
        let target = self.subterm_at(path)?;
        let expected = target.wires()?;
        let got = replacement.wires()?;
        if expected != got {
            return Err(Error::ArityMismatch { expected, got });
        }
        Ok(self.replace_unchecked(path, replacement))
    }

    /// Replacement without the arity check; used by rewrite internals that
    /// have already validated the instance.
    pub(crate) fn replace_unchecked(&self, path: &[usize], replacement: Diagram<S>) -> Diagram<S> {
        if path.is_empty() {
            return replacement;
        }
        let idx = path[0];
        match self {
            Seq(cs) => {
                let mut cs = cs.clone();
                cs[idx] = cs[idx].replace_unchecked(&path[1..], replacement);
                Seq(cs)
            }
            Par(cs) => {
                let mut cs = cs.clone();
                cs[idx] = cs[idx].replace_unchecked(&path[1..], replacement);
                Par(cs)
            }
            Ctrl(body) => Ctrl(Box::new(body.replace_unchecked(&path[1..], replacement))),
            _ => unreachable!("path validated before replacement"),
        }
    }

    /// Structural equality with angle comparison up to the angle tolerance.
    pub fn approx_eq(&self, other: &Diagram<S>) -> bool {
        match (self, other) {
            (Phase(a), Phase(b)) | (Z(a), Z(b)) => a.approx_eq(*b),
            (H, H) | (Cnot, Cnot) => true,
            (Id(a), Id(b)) => a == b,
            (Swap(a, b), Swap(c, d)) => a == c && b == d,
            (Seq(xs), Seq(ys)) | (Par(xs), Par(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.approx_eq(y))
            }
            (Ctrl(a), Ctrl(b)) => a.approx_eq(b),
            _ => false,
        }
    }

    /// Equality on flattened forms: the structural notion of "same diagram".
    pub fn structurally_equal(&self, other: &Diagram<S>) -> Result<bool> {
        Ok(self.flatten()?.approx_eq(&other.flatten()?))
    }

    /// Every path in the term, in pre-order (root first).
    pub fn all_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect_paths(&mut cur, &mut out);
        out
    }

    fn collect_paths(&self, cur: &mut Path, out: &mut Vec<Path>) {
        out.push(cur.clone());
        match self {
            Seq(cs) | Par(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    cur.push(i);
                    c.collect_paths(cur, out);
                    cur.pop();
                }
            }
            Ctrl(body) => {
                cur.push(0);
                body.collect_paths(cur, out);
                cur.pop();
            }
            _ => {}
        }
    }

    /// Number of nodes in the term.
    pub fn size(&self) -> usize {
        match self {
            Seq(cs) | Par(cs) => 1 + cs.iter().map(|c| c.size()).sum::<usize>(),
            Ctrl(body) => 1 + body.size(),
            _ => 1,
        }
    }

    /// Structural content hash, used by proof traces to pin intermediate
    /// states. FNV-1a over the tree; cheap enough to run once per rewrite.
    pub fn term_hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        self.fnv_visit(&mut h);
        format!("{h:016x}")
    }

    fn fnv_visit(&self, h: &mut u64) {
        const PRIME: u64 = 0x100000001b3;
        let mut mix = |x: u64| {
            *h ^= x;
            *h = h.wrapping_mul(PRIME);
        };
        match self {
            Phase(a) => {
                mix(1);
                mix(a.value().to_f64().unwrap().to_bits());
            }
            H => mix(2),
            Z(a) => {
                mix(3);
                mix(a.value().to_f64().unwrap().to_bits());
            }
            Cnot => mix(4),
            Id(n) => {
                mix(5);
                mix(*n as u64);
            }
            Swap(n, m) => {
                mix(6);
                mix(*n as u64);
                mix(*m as u64);
            }
            Seq(cs) => {
                mix(7);
                mix(cs.len() as u64);
                for c in cs {
                    c.fnv_visit(h);
                }
            }
            Par(cs) => {
                mix(8);
                mix(cs.len() as u64);
                for c in cs {
                    c.fnv_visit(h);
                }
            }
            Ctrl(body) => {
                mix(9);
                body.fnv_visit(h);
            }
        }
    }

    /// Mutable access to a subterm; used by the rewrite engine.
    pub(crate) fn subterm_mut(&mut self, path: &[usize]) -> Result<&mut Diagram<S>> {
        let mut cur = self;
        for (depth, &idx) in path.iter().enumerate() {
            let next = match cur {
                Seq(cs) | Par(cs) => cs.get_mut(idx),
                Ctrl(body) if idx == 0 => Some(body.as_mut()),
                _ => None,
            };
            cur = next.ok_or_else(|| Error::InvalidPath(path[..=depth].to_vec()))?;
        }
        Ok(cur)
    }

    /// One-level re-canonicalization of this node, assuming children are
    /// already canonical: splice same-kind children, drop identities (of
    /// the node's unit), reorder and merge as `flatten` would, and collapse
    /// empty or singleton composites.
    pub(crate) fn shallow_normalize(&mut self) {
        match self {
            Seq(cs) => {
                let old = std::mem::take(cs);
                let mut dropped_wires = None;
                let mut out = Vec::with_capacity(old.len());
                for c in old {
                    match c {
                        Seq(inner) => out.extend(inner),
                        Id(n) => dropped_wires = Some(n),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => *self = Id(dropped_wires.unwrap_or(0)),
                    1 => *self = out.pop().unwrap(),
                    _ => *cs = out,
                }
            }
            Par(cs) => {
                let old = std::mem::take(cs);
                let mut flat = Vec::with_capacity(old.len());
                for c in old {
                    match c {
                        Par(inner) => flat.extend(inner),
                        Id(0) => {}
                        other => flat.push(other),
                    }
                }
                let (zero, rest): (Vec<_>, Vec<_>) =
                    flat.into_iter().partition(|c| c.wires().map_or(false, |w| w == 0));
                let mut out: Vec<Diagram<S>> = zero;
                for c in rest {
                    if let (Some(Id(a)), Id(b)) = (out.last_mut(), &c) {
                        *a += b;
                        continue;
                    }
                    out.push(c);
                }
                match out.len() {
                    0 => *self = Id(0),
                    1 => *self = out.pop().unwrap(),
                    _ => *cs = out,
                }
            }
            _ => {}
        }
    }

    /// Re-canonicalize every node along a path, leaf-side first. After a
    /// splice at `path` this restores the global canonical form without
    /// touching untouched subtrees.
    pub(crate) fn renormalize_spine(&mut self, path: &[usize]) -> Result<()> {
        for depth in (0..=path.len()).rev() {
            match self.subterm_mut(&path[..depth]) {
                Ok(node) => node.shallow_normalize(),
                // an ancestor collapsed below this depth; keep walking up
                Err(_) => continue,
            }
        }
        Ok(())
    }
}

/// Decomposition of `Swap(n, m)` into a lattice of `Swap(1, 1)` nodes.
///
/// Zero sides collapse to identities; bigger blocks peel one wire at a
/// time, which keeps the decomposition deterministic.
fn expand_swap<S: Real>(n: usize, m: usize) -> Diagram<S> {
    if n == 0 || m == 0 {
        return Id(n + m);
    }
    if n == 1 && m == 1 {
        return Swap(1, 1);
    }
    if n >= 2 {
        // σ_{n,m} = (σ_{1,m} ⊗ id_{n-1}) ∘ (id_1 ⊗ σ_{n-1,m}), applied bottom-up
        Seq(vec![
            Par(vec![Id(1), expand_swap(n - 1, m)]),
            Par(vec![expand_swap(1, m), Id(n - 1)]),
        ])
    } else {
        // σ_{1,m} = (id_1 ⊗ σ_{1,m-1}) ∘ (σ_{1,1} ⊗ id_{m-1})
        Seq(vec![
            Par(vec![Swap(1, 1), Id(m - 1)]),
            Par(vec![Id(1), expand_swap(1, m - 1)]),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type D = Diagram<f64>;

    #[test]
    fn arity_of_generators() {
        assert_eq!(D::Cnot.arity().unwrap(), (2, 2));
        assert_eq!(D::Id(0).arity().unwrap(), (0, 0));
        assert_eq!(D::ctrl(D::ctrl(D::H)).arity().unwrap(), (3, 3));
    }

    #[test]
    fn seq_type_error_carries_path() {
        let bad = D::seq(vec![D::H, D::Cnot]);
        match bad.wires() {
            Err(Error::TypeError(path)) => assert_eq!(path, vec![1]),
            other => panic!("expected type error, got {other:?}"),
        }
    }

    #[test]
    fn dialect_validation() {
        let c = D::ctrl(D::H);
        assert_eq!(c.dialect_violations(Dialect::Qc), vec![Vec::<usize>::new()]);
        assert!(c.dialect_violations(Dialect::Cqc).is_empty());
        let z = D::z(PI);
        assert_eq!(z.dialect_violations(Dialect::Cqc), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn flatten_spec_cases() {
        let d = D::seq(vec![D::seq(vec![D::H, D::H]), D::Id(1)]);
        assert!(d.flatten().unwrap().approx_eq(&D::seq(vec![D::H, D::H])));

        let d = D::par(vec![D::Id(1), D::Id(2)]);
        assert!(d.flatten().unwrap().approx_eq(&D::Id(3)));

        let d = D::par(vec![D::phase(0.3), D::H]);
        let f = d.flatten().unwrap();
        assert!(f.approx_eq(&D::par(vec![D::phase(0.3), D::H])));
        assert_eq!(f.arity().unwrap(), (1, 1));

        // 0-wire children move to the front
        let d = D::par(vec![D::H, D::phase(0.3)]);
        assert!(d.flatten().unwrap().approx_eq(&D::par(vec![D::phase(0.3), D::H])));

        // identities separated only by 0-wire children still merge
        let d = D::par(vec![D::Id(1), D::phase(0.3), D::Id(2)]);
        assert!(d.flatten().unwrap().approx_eq(&D::par(vec![D::phase(0.3), D::Id(3)])));
    }

    #[test]
    fn flatten_idempotent_and_arity_preserving() {
        let d = D::seq(vec![
            D::par(vec![D::H, D::seq(vec![D::H, D::Id(1), D::H])]),
            D::Id(2),
            D::seq(vec![D::Cnot]),
        ]);
        let f = d.flatten().unwrap();
        assert_eq!(f.wires().unwrap(), d.wires().unwrap());
        assert!(f.flatten().unwrap().approx_eq(&f));
    }

    #[test]
    fn expand_swaps_zero_side() {
        assert!(D::Swap(1, 0).expand_swaps().flatten().unwrap().approx_eq(&D::Id(1)));
        assert!(D::Swap(1, 1).expand_swaps().approx_eq(&D::Swap(1, 1)));
    }

    #[test]
    fn expanded_swaps_contain_only_atomic_swaps() {
        for (n, m) in [(2, 1), (1, 2), (2, 2), (3, 2)] {
            let e = D::Swap(n, m).expand_swaps().flatten().unwrap();
            for p in e.all_paths() {
                if let Swap(a, b) = e.subterm_at(&p).unwrap() {
                    assert_eq!((a, b), (&1, &1));
                }
            }
            assert_eq!(e.wires().unwrap(), n + m);
        }
    }

    #[test]
    fn dagger_spec_cases() {
        let a = 0.8;
        assert!(D::phase(a).dagger().approx_eq(&D::phase(-a)));
        let d = D::seq(vec![D::H, D::ctrl(D::phase(a))]);
        let expect = D::seq(vec![D::ctrl(D::phase(-a)), D::H]);
        assert!(d.dagger().approx_eq(&expect));
        assert!(d.dagger().dagger().approx_eq(&d));
    }

    #[test]
    fn paths_and_replacement() {
        let d = D::seq(vec![D::H, D::H]);
        assert!(d.subterm_at(&[1]).unwrap().approx_eq(&D::H));
        let r = d.replace_at(&[1], D::seq(vec![D::H, D::H, D::H])).unwrap();
        assert!(r.approx_eq(&D::seq(vec![D::H, D::seq(vec![D::H, D::H, D::H])])));
        // replacing a 1-wire subterm with a 2-wire one is refused
        assert!(matches!(
            d.replace_at(&[0], D::Cnot),
            Err(Error::ArityMismatch { expected: 1, got: 2 })
        ));
        // dialect violations are not replace_at's business
        let c = D::ctrl(D::H);
        let r = c.replace_at(&[0], D::z(PI)).unwrap();
        assert_eq!(r.dialect_violations(Dialect::Cqc).len(), 1);
        // invalid path
        assert!(matches!(d.subterm_at(&[5]), Err(Error::InvalidPath(_))));
    }
}
