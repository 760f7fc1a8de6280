//! The relation sets of both circuit languages as executable rewrite rules.
//!
//! A [`Rule`] is a named bidirectional relation: two term builders over a
//! parameter binding, optional structural matchers for discovering
//! bindings at a position, and an optional guard. Applying a rule replaces
//! the matched subterm (or a window of adjacent children inside a `Seq` or
//! `Par`) with the other side and re-flattens; in debug builds every
//! application is also re-checked semantically. Applications are recorded
//! in [`ProofTrace`]s that replay deterministically.

pub mod catalog;
mod pattern;

pub use pattern::{APat, Pat, WPat};

use crate::diagram::{Diagram, Dialect, Path};
use crate::error::{Error, Result};
use crate::matrix::{max_abs_diff, Tolerance};
use crate::num::{lit, Real};
use crate::semantics::{interpret_with, Limits, DEFAULT_MAX_WIRES};
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Primitive,
    Derived,
    Coherence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn tag(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        match s {
            "fwd" => Some(Direction::Forward),
            "bwd" => Some(Direction::Backward),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Parameter values a rule is instantiated with.
#[derive(Debug, Clone, Default)]
pub struct Bindings<S> {
    pub angles: BTreeMap<String, crate::angle::Angle<S>>,
    pub wires: BTreeMap<String, usize>,
    pub diagrams: BTreeMap<String, Diagram<S>>,
}

impl<S: Real> Bindings<S> {
    pub fn new() -> Self {
        Bindings { angles: BTreeMap::new(), wires: BTreeMap::new(), diagrams: BTreeMap::new() }
    }

    pub fn with_angle(mut self, name: &str, a: crate::angle::Angle<S>) -> Self {
        self.angles.insert(name.to_string(), a);
        self
    }

    pub fn with_wire(mut self, name: &str, n: usize) -> Self {
        self.wires.insert(name.to_string(), n);
        self
    }

    pub fn with_diagram(mut self, name: &str, d: Diagram<S>) -> Self {
        self.diagrams.insert(name.to_string(), d);
        self
    }

    pub fn angle(&self, name: &str) -> Result<crate::angle::Angle<S>> {
        self.angles.get(name).copied().ok_or_else(|| Error::MissingBinding(name.to_string()))
    }

    pub fn wire(&self, name: &str) -> Result<usize> {
        self.wires.get(name).copied().ok_or_else(|| Error::MissingBinding(name.to_string()))
    }

    pub fn diagram(&self, name: &str) -> Result<&Diagram<S>> {
        self.diagrams.get(name).ok_or_else(|| Error::MissingBinding(name.to_string()))
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (k, v) in &self.angles {
            parts.push(format!("{k}={}", crate::term::format_angle(*v)));
        }
        for (k, v) in &self.wires {
            parts.push(format!("{k}={v}"));
        }
        for (k, v) in &self.diagrams {
            parts.push(format!("{k}={v}"));
        }
        parts.join(", ")
    }
}

impl<S: Real> Serialize for Bindings<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut st = s.serialize_struct("Bindings", 3)?;
        let angles: BTreeMap<&str, f64> =
            self.angles.iter().map(|(k, v)| (k.as_str(), v.value().to_f64().unwrap())).collect();
        let diagrams: BTreeMap<&str, String> =
            self.diagrams.iter().map(|(k, v)| (k.as_str(), v.to_string())).collect();
        st.serialize_field("angles", &angles)?;
        st.serialize_field("wires", &self.wires)?;
        st.serialize_field("diagrams", &diagrams)?;
        st.end()
    }
}

/// Declared parameter slots, used to sample random bindings for the
/// numeric soundness check.
#[derive(Debug, Clone)]
pub enum ParamSpec {
    /// Angle drawn uniformly from `[0, 2π)`.
    Angle(&'static str),
    /// Wire count drawn uniformly from the inclusive range.
    Wire(&'static str, usize, usize),
    /// Random diagram slot with the given wire choice.
    Diagram(&'static str, WireChoice),
}

#[derive(Debug, Clone)]
pub enum WireChoice {
    Fixed(usize),
    UpTo(usize),
    SameAs(&'static str),
    /// Sum of previously sampled wire parameters plus a constant.
    SumPlus(&'static [&'static str], usize),
}

/// Where a match was found relative to the addressed subterm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompKind {
    Seq,
    Par,
}

/// What a matcher sees: either a whole subterm or the tail of a composite
/// node's children starting at the addressed index.
pub enum TermView<'a, S> {
    Node(&'a Diagram<S>),
    Window(CompKind, &'a [Diagram<S>]),
}

impl<'a, S: Real> TermView<'a, S> {
    /// Materialize the viewed term (for semantic inspection in matchers).
    pub fn to_term(&self, consumed: usize) -> Diagram<S> {
        match self {
            TermView::Node(d) => (*d).clone(),
            TermView::Window(kind, items) => {
                let children = items[..consumed].to_vec();
                match kind {
                    CompKind::Seq => Diagram::Seq(children),
                    CompKind::Par => Diagram::Par(children),
                }
            }
        }
    }
}

pub type Builder<S> = Arc<dyn Fn(&Bindings<S>) -> Result<Diagram<S>> + Send + Sync>;
pub type ViewMatcher<S> = Arc<dyn Fn(&TermView<S>) -> Option<(Bindings<S>, usize)> + Send + Sync>;
pub type Guard<S> = Arc<dyn Fn(&Bindings<S>) -> bool + Send + Sync>;

/// One side of a rule: how to build it and (optionally) how to recognize it.
#[derive(Clone)]
pub struct Side<S> {
    pub build: Builder<S>,
    pub matches: Option<ViewMatcher<S>>,
}

impl<S: Real> Side<S> {
    pub fn from_pattern(pat: Pat<S>) -> Self {
        let pat = Arc::new(pat);
        let build_pat = pat.clone();
        Side {
            build: Arc::new(move |b| pattern::build(&build_pat, b)),
            matches: Some(Arc::new(move |view| pattern::match_view(&pat, view))),
        }
    }

    /// A fixed term: matching is structural comparison.
    pub fn constant(term: Diagram<S>) -> Self {
        let term = Arc::new(term.flatten().expect("constant rule sides are well typed"));
        let t1 = term.clone();
        let t2 = term.clone();
        Side {
            build: Arc::new(move |_| Ok((*t1).clone())),
            matches: Some(Arc::new(move |view| match view {
                TermView::Node(d) => d.approx_eq(&t2).then(|| (Bindings::new(), 0)),
                TermView::Window(kind, items) => {
                    let cs = match (&*t2, kind) {
                        (Diagram::Seq(cs), CompKind::Seq) => cs,
                        (Diagram::Par(cs), CompKind::Par) => cs,
                        _ => return None,
                    };
                    if items.len() < cs.len() {
                        return None;
                    }
                    items[..cs.len()]
                        .iter()
                        .zip(cs)
                        .all(|(a, b)| a.approx_eq(b))
                        .then(|| (Bindings::new(), cs.len()))
                }
            })),
        }
    }
}

/// A named bidirectional rewrite rule.
#[derive(Clone)]
pub struct Rule<S> {
    pub name: &'static str,
    pub dialect: Dialect,
    pub kind: RuleKind,
    pub params: Vec<ParamSpec>,
    pub lhs: Side<S>,
    pub rhs: Side<S>,
    pub guard: Option<Guard<S>>,
}

impl<S: Real> Rule<S> {
    fn side(&self, dir: Direction) -> (&Side<S>, &Side<S>) {
        match dir {
            Direction::Forward => (&self.lhs, &self.rhs),
            Direction::Backward => (&self.rhs, &self.lhs),
        }
    }

    pub fn guard_ok(&self, b: &Bindings<S>) -> bool {
        self.guard.as_ref().map_or(true, |g| g(b))
    }
}

impl<S> std::fmt::Debug for Rule<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rule")
            .field("name", &self.name)
            .field("dialect", &self.dialect)
            .field("kind", &self.kind)
            .finish()
    }
}

/// A rule application: which rule, where, in which direction, with which
/// parameters.
#[derive(Debug, Clone)]
pub struct RuleInstance<S> {
    pub rule: String,
    pub bindings: Bindings<S>,
    pub path: Path,
    pub dir: Direction,
}

impl<S: Real> Serialize for RuleInstance<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut st = s.serialize_struct("RuleInstance", 4)?;
        st.serialize_field("rule", &self.rule)?;
        st.serialize_field("path", &self.path)?;
        st.serialize_field("dir", self.dir.tag())?;
        st.serialize_field("bindings", &self.bindings)?;
        st.end()
    }
}

/// When to re-interpret both sides after an application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostCheck {
    /// Only in builds with debug assertions (tests).
    Debug,
    /// On every application; applications on diagrams too wide to
    /// interpret are skipped.
    Always,
    Never,
}

fn post_check_enabled(check: PostCheck) -> bool {
    match check {
        PostCheck::Always => true,
        PostCheck::Never => false,
        PostCheck::Debug => cfg!(debug_assertions),
    }
}

/// Try to match one side of a rule at a position of a flattened diagram.
pub fn match_rule<S: Real>(
    rule: &Rule<S>,
    d: &Diagram<S>,
    path: &[usize],
    dir: Direction,
) -> Option<Bindings<S>> {
    let (src, _) = rule.side(dir);
    let matcher = src.matches.as_ref()?;
    let sub = d.subterm_at(path).ok()?;
    if let Some((b, _)) = matcher(&TermView::Node(sub)) {
        if rule.guard_ok(&b) {
            return Some(b);
        }
    }
    if !path.is_empty() {
        let parent = d.subterm_at(&path[..path.len() - 1]).ok()?;
        let idx = path[path.len() - 1];
        let (kind, children) = match parent {
            Diagram::Seq(cs) => (CompKind::Seq, cs),
            Diagram::Par(cs) => (CompKind::Par, cs),
            _ => return None,
        };
        if let Some((b, k)) = matcher(&TermView::Window(kind, &children[idx..])) {
            // a window of the full width is the whole-node case again
            if k < children.len() || idx > 0 {
                if rule.guard_ok(&b) {
                    return Some(b);
                }
            } else if rule.guard_ok(&b) {
                return Some(b);
            }
        }
    }
    None
}

/// All positions (with bindings) where the rule matches.
pub fn find_matches<S: Real>(
    rule: &Rule<S>,
    d: &Diagram<S>,
    dir: Direction,
) -> Vec<(Path, Bindings<S>)> {
    d.all_paths()
        .into_iter()
        .filter_map(|p| match_rule(rule, d, &p, dir).map(|b| (p, b)))
        .collect()
}

/// Does the window starting at the children slice correspond to the built
/// source term? `Seq` sources may sit inside `Par` parents when every
/// child is 0-wire (composition and tensor agree on scalars).
fn window_corresponds<S: Real>(src: &Diagram<S>, kind: CompKind, items: &[Diagram<S>]) -> Option<usize> {
    let cs = match (src, kind) {
        (Diagram::Seq(cs), CompKind::Seq) | (Diagram::Par(cs), CompKind::Par) => cs,
        (Diagram::Seq(cs), CompKind::Par) => {
            if !cs.iter().all(|c| c.wires().map_or(false, |w| w == 0)) {
                return None;
            }
            cs
        }
        _ => return None,
    };
    if items.len() < cs.len() {
        return None;
    }
    items[..cs.len()].iter().zip(cs).all(|(a, b)| a.approx_eq(b)).then(|| cs.len())
}

/// Apply a rule instance to a flattened diagram.
///
/// The source side is rebuilt from the instance's bindings and verified
/// against the subterm (or window) at the instance's path, so replaying a
/// recorded instance on a different diagram fails instead of corrupting it.
pub fn apply_rule_with<S: Real>(
    d: &Diagram<S>,
    inst: &RuleInstance<S>,
    rule: &Rule<S>,
    check: PostCheck,
) -> Result<(Diagram<S>, TraceStep<S>)> {
    let mut out = d.clone();
    let step = apply_mut(&mut out, inst, rule, check)?;
    Ok((out, step))
}

/// In-place application: the workhorse behind [`apply_rule_with`], the
/// trace recorder, and replay. Mutates only the spine above the rewrite
/// position, so long derivations stay linear in total work.
pub(crate) fn apply_mut<S: Real>(
    d: &mut Diagram<S>,
    inst: &RuleInstance<S>,
    rule: &Rule<S>,
    check: PostCheck,
) -> Result<TraceStep<S>> {
    if !rule.guard_ok(&inst.bindings) {
        return Err(Error::NoMatch { rule: inst.rule.clone(), path: inst.path.clone() });
    }
    let (src, dst) = rule.side(inst.dir);
    let src_term = (src.build)(&inst.bindings)?.flatten()?;
    let dst_term = (dst.build)(&inst.bindings)?.flatten()?;
    let no_match = || Error::NoMatch { rule: inst.rule.clone(), path: inst.path.clone() };

    let before = if post_check_enabled(check) && d.wires()? <= DEFAULT_MAX_WIRES {
        Some(interpret_with(d, rule.dialect, Limits::default())?)
    } else {
        None
    };

    if inst.path.is_empty() {
        if !d.approx_eq(&src_term) {
            return Err(no_match());
        }
        *d = dst_term;
    } else {
        let parent_path = &inst.path[..inst.path.len() - 1];
        let idx = inst.path[inst.path.len() - 1];
        enum Splice {
            Window(usize),
            CtrlBody,
        }
        // decide the replacement span immutably, then splice
        let span = {
            let parent = d.subterm_at(parent_path)?;
            match parent {
                Diagram::Seq(cs) | Diagram::Par(cs) => {
                    if idx >= cs.len() {
                        return Err(Error::InvalidPath(inst.path.clone()));
                    }
                    let kind = if matches!(parent, Diagram::Seq(_)) {
                        CompKind::Seq
                    } else {
                        CompKind::Par
                    };
                    if cs[idx].approx_eq(&src_term) {
                        Splice::Window(1)
                    } else {
                        Splice::Window(
                            window_corresponds(&src_term, kind, &cs[idx..]).ok_or_else(no_match)?,
                        )
                    }
                }
                Diagram::Ctrl(body) if idx == 0 => {
                    if !body.approx_eq(&src_term) {
                        return Err(no_match());
                    }
                    Splice::CtrlBody
                }
                _ => return Err(no_match()),
            }
        };
        let parent = d.subterm_mut(parent_path)?;
        match (parent, span) {
            (Diagram::Seq(cs), Splice::Window(k)) => {
                let insert = match dst_term {
                    Diagram::Seq(inner) => inner,
                    other => vec![other],
                };
                cs.splice(idx..idx + k, insert);
            }
            (Diagram::Par(cs), Splice::Window(k)) => {
                let insert = match dst_term {
                    Diagram::Par(inner) => inner,
                    other => vec![other],
                };
                cs.splice(idx..idx + k, insert);
            }
            (Diagram::Ctrl(body), Splice::CtrlBody) => **body = dst_term,
            _ => unreachable!("span decision covered this shape"),
        }
        d.renormalize_spine(parent_path)?;
    }

    if let Some(before) = before {
        let after = interpret_with(d, rule.dialect, Limits::default())?;
        let diff = max_abs_diff(&before, &after)?;
        if diff > S::default_tol() {
            return Err(Error::SemanticDrift {
                rule: inst.rule.clone(),
                max_diff: diff.to_f64().unwrap(),
            });
        }
    }

    Ok(TraceStep { instance: inst.clone(), post_hash: d.term_hash() })
}

/// One recorded application.
#[derive(Debug, Clone)]
pub struct TraceStep<S> {
    pub instance: RuleInstance<S>,
    pub post_hash: String,
}

/// An ordered list of rule applications witnessing a derivation.
#[derive(Debug, Clone)]
pub struct ProofTrace<S> {
    pub dialect: Dialect,
    pub initial: Diagram<S>,
    pub initial_hash: String,
    pub steps: Vec<TraceStep<S>>,
    pub final_diagram: Diagram<S>,
}

impl<S: Real> ProofTrace<S> {
    pub fn new(dialect: Dialect, initial: Diagram<S>) -> Self {
        let initial_hash = initial.term_hash();
        let final_diagram = initial.clone();
        ProofTrace { dialect, initial, initial_hash, steps: Vec::new(), final_diagram }
    }

    pub fn record(&mut self, step: TraceStep<S>, current: &Diagram<S>) {
        self.steps.push(step);
        self.final_diagram = current.clone();
    }

    /// Re-run every step from the initial diagram, verifying each recorded
    /// post-state hash.
    pub fn replay(&self, registry: &RuleRegistry<S>) -> Result<Diagram<S>> {
        let mut cur = self.initial.flatten()?;
        for (i, step) in self.steps.iter().enumerate() {
            let rule = registry
                .get(&step.instance.rule)
                .ok_or_else(|| Error::UnknownRule(step.instance.rule.clone()))?;
            let recorded = apply_mut(&mut cur, &step.instance, rule, PostCheck::Never)?;
            if recorded.post_hash != step.post_hash {
                return Err(Error::ReplayMismatch { step: i });
            }
        }
        Ok(cur)
    }
}

impl<S: Real> Serialize for ProofTrace<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        let mut st = s.serialize_struct("ProofTrace", 4)?;
        st.serialize_field("dialect", self.dialect.name())?;
        st.serialize_field("initial", &self.initial.to_string())?;
        let steps: Vec<&RuleInstance<S>> = self.steps.iter().map(|t| &t.instance).collect();
        st.serialize_field("steps", &steps)?;
        st.serialize_field("final", &self.final_diagram.to_string())?;
        st.end()
    }
}

/// The rule set of a dialect, indexed by name.
pub struct RuleRegistry<S> {
    pub dialect: Dialect,
    rules: Vec<Arc<Rule<S>>>,
    by_name: HashMap<&'static str, usize>,
}

impl<S: Real> RuleRegistry<S> {
    fn from_rules(dialect: Dialect, rules: Vec<Rule<S>>) -> Self {
        let rules: Vec<Arc<Rule<S>>> = rules.into_iter().map(Arc::new).collect();
        let by_name = rules.iter().enumerate().map(|(i, r)| (r.name, i)).collect();
        RuleRegistry { dialect, rules, by_name }
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Rule<S>>> {
        self.by_name.get(name).map(|&i| &self.rules[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Rule<S>>> {
        self.rules.iter()
    }

    pub fn of_kind(&self, kind: RuleKind) -> impl Iterator<Item = &Arc<Rule<S>>> {
        self.rules.iter().filter(move |r| r.kind == kind)
    }

    pub fn apply(
        &self,
        d: &Diagram<S>,
        inst: &RuleInstance<S>,
        check: PostCheck,
    ) -> Result<(Diagram<S>, TraceStep<S>)> {
        let rule = self.get(&inst.rule).ok_or_else(|| Error::UnknownRule(inst.rule.clone()))?;
        apply_rule_with(d, inst, rule, check)
    }
}

/// The primitive relation set of a dialect plus the coherence helper rules.
pub fn builtin_rules<S: Real>(dialect: Dialect) -> Vec<Rule<S>> {
    let mut rules = catalog::primitive_rules(dialect);
    rules.extend(catalog::coherence_rules(dialect));
    rules
}

/// The derived relations of the controllable language.
pub fn derived_rules<S: Real>() -> Vec<Rule<S>> {
    catalog::derived_rules()
}

/// Full registry for a dialect: primitives, coherence helpers, and (for
/// the controllable language) the derived relations.
pub fn registry<S: Real>(dialect: Dialect) -> RuleRegistry<S> {
    let mut rules = builtin_rules(dialect);
    if dialect == Dialect::Cqc {
        rules.extend(derived_rules());
    }
    RuleRegistry::from_rules(dialect, rules)
}

/// Outcome of a numeric soundness check of one rule.
#[derive(Debug, Clone, Serialize)]
pub struct SoundnessReport {
    pub rule: String,
    pub kind: RuleKind,
    pub samples: usize,
    pub max_diff: f64,
    pub failure: Option<String>,
    pub pass: bool,
}

/// Draw random bindings for a rule's parameter slots.
pub fn sample_bindings<S: Real>(rule: &Rule<S>, rng: &mut impl Rng) -> Result<Bindings<S>> {
    for _attempt in 0..100 {
        let mut b = Bindings::new();
        for p in &rule.params {
            match p {
                ParamSpec::Angle(name) => {
                    let theta = lit::<S>(rng.gen_range(0.0..std::f64::consts::TAU));
                    b.angles.insert(name.to_string(), crate::angle::Angle::new(theta));
                }
                ParamSpec::Wire(name, lo, hi) => {
                    b.wires.insert(name.to_string(), rng.gen_range(*lo..=*hi));
                }
                ParamSpec::Diagram(name, choice) => {
                    let wires = match choice {
                        WireChoice::Fixed(n) => *n,
                        WireChoice::UpTo(n) => rng.gen_range(1..=*n),
                        WireChoice::SameAs(other) => b.wire(other)?,
                        WireChoice::SumPlus(names, c) => {
                            let mut total = *c;
                            for n in *names {
                                total += b.wire(n)?;
                            }
                            total
                        }
                    };
                    let d = if wires == 0 {
                        Diagram::Id(0)
                    } else {
                        crate::gen::random_diagram_on(rng, rule.dialect, wires, 3)
                    };
                    b.diagrams.insert(name.to_string(), d);
                }
            }
        }
        if rule.guard_ok(&b) {
            return Ok(b);
        }
    }
    Err(Error::NoMatch { rule: rule.name.to_string(), path: vec![] })
}

/// Numerically verify a rule: draw bindings, interpret both sides, and
/// report the worst deviation. Rules without parameters are checked once.
pub fn soundness_check<S: Real>(
    rule: &Rule<S>,
    samples: usize,
    tol: Tolerance<S>,
    rng: &mut impl Rng,
) -> SoundnessReport {
    let effective = if rule.params.is_empty() { 1 } else { samples.max(1) };
    let mut max_diff = 0.0f64;
    let mut failure = None;
    for _ in 0..effective {
        let outcome = sample_bindings(rule, rng).and_then(|b| {
            let lhs = (rule.lhs.build)(&b)?.flatten()?;
            let rhs = (rule.rhs.build)(&b)?.flatten()?;
            let ml = interpret_with(&lhs, rule.dialect, Limits::default())?;
            let mr = interpret_with(&rhs, rule.dialect, Limits::default())?;
            Ok((b, max_abs_diff(&ml, &mr)?))
        });
        match outcome {
            Ok((b, diff)) => {
                let diff = diff.to_f64().unwrap();
                if diff > max_diff {
                    max_diff = diff;
                }
                if diff > tol.eps.to_f64().unwrap() && failure.is_none() {
                    failure = Some(b.describe());
                }
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(format!("error: {e}"));
                }
            }
        }
    }
    SoundnessReport {
        rule: rule.name.to_string(),
        kind: rule.kind,
        samples: effective,
        max_diff,
        failure: failure.clone(),
        pass: failure.is_none(),
    }
}

/// Build a registry and validate every derived rule at registration time.
pub fn validated_registry<S: Real>(
    dialect: Dialect,
    samples: usize,
    tol: Tolerance<S>,
    rng: &mut impl Rng,
) -> Result<RuleRegistry<S>> {
    let reg = registry::<S>(dialect);
    for rule in reg.of_kind(RuleKind::Derived) {
        let report = soundness_check(rule, samples, tol, rng);
        if !report.pass {
            return Err(Error::RegistrationFailed { rule: report.rule, max_diff: report.max_diff });
        }
    }
    Ok(reg)
}

/// Driver that applies rules to a working diagram while recording a trace.
pub struct Rewriter<'r, S> {
    registry: &'r RuleRegistry<S>,
    pub current: Diagram<S>,
    pub trace: ProofTrace<S>,
    check: PostCheck,
    budget: usize,
    steps_taken: usize,
}

impl<'r, S: Real> Rewriter<'r, S> {
    pub fn new(registry: &'r RuleRegistry<S>, initial: Diagram<S>, budget: usize, check: PostCheck) -> Result<Self> {
        let flat = initial.flatten()?;
        Ok(Rewriter {
            registry,
            current: flat.clone(),
            trace: ProofTrace::new(registry.dialect, flat),
            check,
            budget,
            steps_taken: 0,
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Apply one rule instance and record it.
    pub fn apply(&mut self, rule: &str, path: Path, dir: Direction, bindings: Bindings<S>) -> Result<()> {
        if self.steps_taken >= self.budget {
            return Err(Error::NonTermination(self.budget));
        }
        let rule_obj = self
            .registry
            .get(rule)
            .ok_or_else(|| Error::UnknownRule(rule.to_string()))?
            .clone();
        let inst = RuleInstance { rule: rule.to_string(), bindings, path, dir };
        let step = apply_mut(&mut self.current, &inst, &rule_obj, self.check)?;
        self.trace.steps.push(step);
        self.steps_taken += 1;
        Ok(())
    }

    pub fn finish(mut self) -> (Diagram<S>, ProofTrace<S>) {
        self.trace.final_diagram = self.current.clone();
        (self.current, self.trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Tolerance;
    use crate::semantics::equiv;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use std::f64::consts::{PI, TAU};

    type D = Diagram<f64>;

    fn reg(dialect: Dialect) -> RuleRegistry<f64> {
        registry(dialect)
    }

    #[test]
    fn registry_primitive_counts() {
        assert_eq!(reg(Dialect::Cqc).of_kind(RuleKind::Primitive).count(), 9);
        assert_eq!(reg(Dialect::Qc).of_kind(RuleKind::Primitive).count(), 13);
        assert!(reg(Dialect::Cqc).of_kind(RuleKind::Derived).count() >= 11);
    }

    #[test]
    fn hh_matches_and_applies() {
        let r = reg(Dialect::Cqc);
        let rule = r.get("hh").unwrap();
        let d = D::seq(vec![D::H, D::H]);
        let b = match_rule(rule, &d, &[], Direction::Forward).expect("match at root");
        let inst = RuleInstance { rule: "hh".into(), bindings: b, path: vec![], dir: Direction::Forward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::Id(1)));
        // window inside a longer sequence
        let d3 = D::seq(vec![D::H, D::H, D::H]).flatten().unwrap();
        let b = match_rule(rule, &d3, &[0], Direction::Forward).expect("window match");
        let inst = RuleInstance { rule: "hh".into(), bindings: b, path: vec![0], dir: Direction::Forward };
        let (out, _) = r.apply(&d3, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::H));
        // no match against an interposed rotation
        let bad = D::seq(vec![D::H, crate::structure::cphase(PI), D::H]);
        assert!(match_rule(rule, &bad, &[], Direction::Forward).is_none());
        assert!(match_rule(rule, &bad, &[0], Direction::Forward).is_none());
    }

    #[test]
    fn phase_add_matches_in_seq_and_par() {
        let r = reg(Dialect::Cqc);
        let rule = r.get("phase_add").unwrap();
        let d = D::seq(vec![D::phase(0.3), D::phase(0.4)]);
        let b = match_rule(rule, &d, &[], Direction::Forward).unwrap();
        assert!(b.angle("a1").unwrap().approx_eq(crate::angle::Angle::new(0.3)));
        let inst = RuleInstance { rule: "phase_add".into(), bindings: b, path: vec![], dir: Direction::Forward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::phase(0.7)));

        // inside a Par: the two phases sit in front of the wire gates
        let d = D::par(vec![D::phase(0.3), D::phase(0.4), D::H]).flatten().unwrap();
        let b = match_rule(rule, &d, &[0], Direction::Forward).expect("par window");
        let inst = RuleInstance { rule: "phase_add".into(), bindings: b, path: vec![0], dir: Direction::Forward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::par(vec![D::phase(0.7), D::H])));
    }

    #[test]
    fn addition_backward_splits_a_phase() {
        let r = reg(Dialect::Cqc);
        let d = D::phase(1.0);
        let rule = r.get("phase_add").unwrap();
        let b = match_rule(rule, &d, &[], Direction::Backward).expect("backward match");
        let inst = RuleInstance { rule: "phase_add".into(), bindings: b, path: vec![], dir: Direction::Backward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        match &out {
            Diagram::Seq(cs) => assert_eq!(cs.len(), 2),
            other => panic!("expected a split, got {other}"),
        }
        assert!(equiv(&out, &d, Dialect::Cqc, Tolerance::default()).unwrap().equal);
        // caller-chosen split applies too
        let b = Bindings::new()
            .with_angle("a1", crate::angle::Angle::new(0.25))
            .with_angle("a2", crate::angle::Angle::new(0.75));
        let inst = RuleInstance { rule: "phase_add".into(), bindings: b, path: vec![], dir: Direction::Backward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::seq(vec![D::phase(0.25), D::phase(0.75)])));
    }

    #[test]
    fn two_pi_phase_rewrites_to_nothing() {
        let r = reg(Dialect::Cqc);
        let rule = r.get("phase_2pi").unwrap();
        let d = D::phase(TAU);
        let b = match_rule(rule, &d, &[], Direction::Forward).unwrap();
        let inst = RuleInstance { rule: "phase_2pi".into(), bindings: b, path: vec![], dir: Direction::Forward };
        let (out, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        assert!(out.approx_eq(&D::Id(0)));
        assert!(match_rule(rule, &D::phase(1.0), &[], Direction::Forward).is_none());
    }

    #[test]
    fn apply_then_unapply_restores_structure() {
        let r = reg(Dialect::Cqc);
        let rule = r.get("conj_h_cphase").unwrap();
        let d = D::ctrl(D::seq(vec![D::H, crate::structure::cphase(0.9), D::H]));
        let b = match_rule(rule, &d, &[], Direction::Forward).unwrap();
        let inst = RuleInstance { rule: rule.name.into(), bindings: b.clone(), path: vec![], dir: Direction::Forward };
        let (mid, _) = r.apply(&d, &inst, PostCheck::Always).unwrap();
        let back = RuleInstance { rule: rule.name.into(), bindings: b, path: vec![], dir: Direction::Backward };
        let (out, _) = r.apply(&mid, &back, PostCheck::Always).unwrap();
        assert!(out.structurally_equal(&d).unwrap());
    }

    #[test]
    fn corrupted_rule_fails_soundness() {
        // a deliberately wrong relation: H = Z(π)
        let bad = Rule {
            name: "broken",
            dialect: Dialect::Qc,
            kind: RuleKind::Derived,
            params: vec![],
            lhs: Side::constant(D::H),
            rhs: Side::constant(D::z(PI)),
            guard: None,
        };
        let mut rng = StdRng::seed_from_u64(1);
        let report = soundness_check(&bad, 10, Tolerance::default(), &mut rng);
        assert!(!report.pass);
        // max entry of |H - Z(π)| is 1/√2
        assert!((report.max_diff - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12, "diff was {}", report.max_diff);
    }

    #[test]
    fn all_rules_pass_a_quick_soundness_check() {
        let mut rng = StdRng::seed_from_u64(2);
        for dialect in [Dialect::Qc, Dialect::Cqc] {
            for rule in reg(dialect).iter() {
                let report = soundness_check(rule, 12, Tolerance::default(), &mut rng);
                assert!(report.pass, "{} failed: {:?} (diff {})", report.rule, report.failure, report.max_diff);
            }
        }
    }

    #[test]
    fn trace_replay_reproduces_hashes() {
        let r = reg(Dialect::Cqc);
        let d = D::seq(vec![
            D::par(vec![D::phase(TAU), D::Id(1)]),
            D::H,
            D::H,
        ])
        .flatten()
        .unwrap();
        let mut rw = Rewriter::new(&r, d, 100, PostCheck::Always).unwrap();
        let b = match_rule(r.get("hh").unwrap(), &rw.current, &[1], Direction::Forward).unwrap();
        rw.apply("hh", vec![1], Direction::Forward, b).unwrap();
        let b = match_rule(r.get("phase_2pi").unwrap(), &rw.current, &[0], Direction::Forward).unwrap();
        rw.apply("phase_2pi", vec![0], Direction::Forward, b).unwrap();
        let (out, trace) = rw.finish();
        assert!(out.approx_eq(&D::Id(1)));
        let replayed = trace.replay(&r).unwrap();
        assert!(replayed.approx_eq(&out));
        // serialized form carries the instances
        let js = serde_json::to_value(&trace).unwrap();
        assert_eq!(js["steps"].as_array().unwrap().len(), 2);
        assert_eq!(js["steps"][0]["rule"], "hh");
    }

    #[test]
    fn mc2pi_rules_hold_for_small_sizes() {
        let r = reg(Dialect::Qc);
        for n in 3..=4 {
            let name = format!("mc_phase_2pi_{n}");
            let rule = r.get(&name).unwrap();
            let lhs = (rule.lhs.build)(&Bindings::new()).unwrap();
            let rhs = (rule.rhs.build)(&Bindings::new()).unwrap();
            let rep = equiv(&lhs, &rhs, Dialect::Qc, Tolerance::default()).unwrap();
            assert!(rep.equal, "n={n} diff {}", rep.max_abs_diff);
        }
    }

    #[test]
    fn cz_rule_interprets_to_diag_1_1_1_m1() {
        let r = reg(Dialect::Qc);
        let rule = r.get("cz_hadamard").unwrap();
        for side in [&rule.lhs, &rule.rhs] {
            let t = (side.build)(&Bindings::new()).unwrap();
            let m = crate::semantics::interpret(&t, Dialect::Qc).unwrap();
            for (i, want) in [1.0, 1.0, 1.0, -1.0].iter().enumerate() {
                assert!((m.get(i, i).re - want).abs() < 1e-12);
                assert!(m.get(i, i).im.abs() < 1e-12);
            }
        }
    }
}
