//! Control at the matrix level: alternative control maps, their points,
//! and the compatibility / commutation / exhaustivity properties of
//! families of controls.
//!
//! The syntactic `Ctrl` constructor always means the standard control; the
//! variants here act on interpretations, where the alternative notions are
//! properties of matrices rather than new term formers.

use crate::error::{Error, Result};
use crate::matrix::{kron, matmul, max_abs_diff, CMat, Tolerance};
use crate::num::{cis, lit, Real, C};
use serde::Serialize;

/// A control map: sends a `dim`-dimensional unitary to one on
/// `control_dim · dim` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlVariant {
    /// Fire on |1>.
    C1,
    /// Fire on |0>.
    C0,
    /// Fire on |−>.
    CMinus,
    /// Fire on level `k` of a `d`-dimensional control.
    CK { dim: usize, level: usize },
    /// The Z-basis control of the two-functor presentation; coincides with
    /// [`ControlVariant::C1`] on matrices.
    CZ,
    /// The X-basis control; coincides with [`ControlVariant::CMinus`].
    CX,
    /// Conjugates the target by NOTs on every wire and ignores the control
    /// qubit. Functorial, but not compatible with the standard control.
    CSharp,
}

use ControlVariant::*;

/// A state of the control system, used as a candidate point.
#[derive(Debug, Clone)]
pub struct Point<S> {
    pub amplitudes: Vec<C<S>>,
}

impl<S: Real> Point<S> {
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![C::new(S::zero(), S::zero()); dim];
        amplitudes[k] = C::new(S::one(), S::zero());
        Point { amplitudes }
    }

    pub fn plus() -> Self {
        let s = S::one() / S::SQRT_2();
        Point { amplitudes: vec![C::new(s, S::zero()), C::new(s, S::zero())] }
    }

    pub fn minus() -> Self {
        let s = S::one() / S::SQRT_2();
        Point { amplitudes: vec![C::new(s, S::zero()), C::new(-s, S::zero())] }
    }

    pub fn norm(&self) -> S {
        self.amplitudes.iter().fold(S::zero(), |a, z| a + z.norm_sqr()).sqrt()
    }

    /// Column-matrix form (a morphism from the unit into the control).
    pub fn as_column(&self) -> CMat<S> {
        let mut m = CMat::zeros(self.amplitudes.len(), 1);
        for (i, z) in self.amplitudes.iter().enumerate() {
            m.set(i, 0, *z);
        }
        m
    }
}

impl ControlVariant {
    pub fn control_dim(self) -> usize {
        match self {
            CK { dim, .. } => dim,
            _ => 2,
        }
    }

    pub fn label(self) -> String {
        match self {
            C1 => "C1".into(),
            C0 => "C0".into(),
            CMinus => "C-".into(),
            CK { dim, level } => format!("C{level}@{dim}"),
            CZ => "CZ".into(),
            CX => "CX".into(),
            CSharp => "C#".into(),
        }
    }

    /// Candidate (true, false) points, when the variant declares them.
    pub fn declared_points<S: Real>(self) -> Option<(Point<S>, Point<S>)> {
        match self {
            C1 | CZ => Some((Point::basis(2, 1), Point::basis(2, 0))),
            C0 => Some((Point::basis(2, 0), Point::basis(2, 1))),
            CMinus | CX => Some((Point::minus(), Point::plus())),
            CK { dim, level } => {
                Some((Point::basis(dim, level), Point::basis(dim, (level + 1) % dim)))
            }
            CSharp => None,
        }
    }
}

fn projector_sum<S: Real>(dim: usize, blocks: impl Fn(usize) -> Option<CMat<S>>, n: usize) -> CMat<S> {
    let mut out = CMat::zeros(dim * n, dim * n);
    for k in 0..dim {
        let block = blocks(k).unwrap_or_else(|| CMat::identity(n));
        for i in 0..n {
            for j in 0..n {
                out.set(k * n + i, k * n + j, block.get(i, j));
            }
        }
    }
    out
}

/// Projector onto a state, `|v><v|`.
fn rank_one<S: Real>(v: &Point<S>) -> CMat<S> {
    let d = v.amplitudes.len();
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, v.amplitudes[i] * v.amplitudes[j].conj());
        }
    }
    m
}

/// NOT on every qubit of a `2^n`-dimensional space.
fn not_all<S: Real>(dim: usize) -> CMat<S> {
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        m.set(i, dim - 1 - i, C::new(S::one(), S::zero()));
    }
    m
}

/// Apply a control variant to a unitary.
pub fn apply_variant<S: Real>(v: ControlVariant, u: &CMat<S>) -> Result<CMat<S>> {
    if u.rows() != u.cols() {
        return Err(Error::DimMismatch(u.rows(), u.cols(), u.cols(), u.cols()));
    }
    let n = u.rows();
    Ok(match v {
        C1 | CZ => projector_sum(2, |k| (k == 1).then(|| u.clone()), n),
        C0 => projector_sum(2, |k| (k == 0).then(|| u.clone()), n),
        CMinus | CX => {
            let plus = rank_one(&Point::<S>::plus());
            let minus = rank_one(&Point::<S>::minus());
            let a = kron(&plus, &CMat::identity(n));
            let b = kron(&minus, u);
            let mut out = CMat::zeros(2 * n, 2 * n);
            for i in 0..2 * n {
                for j in 0..2 * n {
                    out.set(i, j, a.get(i, j) + b.get(i, j));
                }
            }
            out
        }
        CK { dim, level } => {
            // the target must live on qudits of the same dimension
            let mut p = n;
            while p > 1 {
                if p % dim != 0 {
                    return Err(Error::DimMismatch(n, n, dim, dim));
                }
                p /= dim;
            }
            projector_sum(dim, |k| (k == level).then(|| u.clone()), n)
        }
        CSharp => {
            if !n.is_power_of_two() {
                return Err(Error::DimMismatch(n, n, 2, 2));
            }
            let x = not_all::<S>(n);
            let conj = matmul(&x, &matmul(u, &x)?)?;
            kron(&CMat::identity(2), &conj)
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointsReport {
    pub variant: String,
    pub true_diff: f64,
    pub false_diff: f64,
    pub ok: bool,
}

/// Verify the declared points: the true point fires the operation, the
/// false point annihilates it.
pub fn check_points<S: Real>(
    v: ControlVariant,
    f: &CMat<S>,
    tol: Tolerance<S>,
) -> Result<PointsReport> {
    let (t, fls) = v
        .declared_points::<S>()
        .ok_or_else(|| Error::MissingBinding(format!("points of {}", v.label())))?;
    let n = f.rows();
    let cf = apply_variant(v, f)?;
    let t_col = t.as_column();
    let f_col = fls.as_column();
    let lhs_t = matmul(&cf, &kron(&t_col, &CMat::identity(n)))?;
    let rhs_t = kron(&t_col, f);
    let true_diff = max_abs_diff(&lhs_t, &rhs_t)?.to_f64().unwrap();
    let lhs_f = matmul(&cf, &kron(&f_col, &CMat::identity(n)))?;
    let rhs_f = kron(&f_col, &CMat::identity(n));
    let false_diff = max_abs_diff(&lhs_f, &rhs_f)?.to_f64().unwrap();
    let eps = tol.eps.to_f64().unwrap();
    Ok(PointsReport {
        variant: v.label(),
        true_diff,
        false_diff,
        ok: true_diff <= eps && false_diff <= eps,
    })
}

/// Permutation exchanging two control registers of dimensions `a` and `b`.
fn exchange<S: Real>(a: usize, b: usize) -> CMat<S> {
    let mut m = CMat::zeros(a * b, a * b);
    for x in 0..a {
        for y in 0..b {
            m.set(y * a + x, x * b + y, C::new(S::one(), S::zero()));
        }
    }
    m
}

/// Compatibility: swapping the two control wires exchanges the order of
/// nested controls.
pub fn check_compatible<S: Real>(
    v1: ControlVariant,
    v2: ControlVariant,
    f: &CMat<S>,
    tol: Tolerance<S>,
) -> Result<bool> {
    let n = f.rows();
    let sw = kron(&exchange::<S>(v2.control_dim(), v1.control_dim()), &CMat::identity(n));
    let lhs = matmul(&apply_variant(v1, &apply_variant(v2, f)?)?, &sw)?;
    let rhs = matmul(&sw, &apply_variant(v2, &apply_variant(v1, f)?)?)?;
    Ok(max_abs_diff(&lhs, &rhs)? <= tol.eps)
}

/// Commutation of two controlled operations on the same control wire.
pub fn check_commute<S: Real>(
    v1: ControlVariant,
    v2: ControlVariant,
    f: &CMat<S>,
    g: &CMat<S>,
    tol: Tolerance<S>,
) -> Result<bool> {
    if v1.control_dim() != v2.control_dim() {
        return Err(Error::DimMismatch(v1.control_dim(), 0, v2.control_dim(), 0));
    }
    let a = apply_variant(v1, f)?;
    let b = apply_variant(v2, g)?;
    let lhs = matmul(&b, &a)?;
    let rhs = matmul(&a, &b)?;
    Ok(max_abs_diff(&lhs, &rhs)? <= tol.eps)
}

/// Exhaustivity of a commuting family: firing the same operation on every
/// control level in sequence acts as the uncontrolled operation.
pub fn check_exhaustive<S: Real>(
    family: &[ControlVariant],
    f: &CMat<S>,
    tol: Tolerance<S>,
) -> Result<bool> {
    let d = family.first().map(|v| v.control_dim()).unwrap_or(2);
    if family.iter().any(|v| v.control_dim() != d) {
        return Err(Error::DimMismatch(d, 0, 0, 0));
    }
    let n = f.rows();
    let mut acc = CMat::identity(d * n);
    for v in family {
        acc = matmul(&apply_variant(*v, f)?, &acc)?;
    }
    let expect = kron(&CMat::identity(d), f);
    Ok(max_abs_diff(&acc, &expect)? <= tol.eps)
}

/// Functoriality of a variant: preservation of products and identities.
pub fn check_functorial<S: Real>(
    v: ControlVariant,
    u1: &CMat<S>,
    u2: &CMat<S>,
    tol: Tolerance<S>,
) -> Result<bool> {
    let prod = matmul(u1, u2)?;
    let lhs = apply_variant(v, &prod)?;
    let rhs = matmul(&apply_variant(v, u1)?, &apply_variant(v, u2)?)?;
    let ident = apply_variant(v, &CMat::<S>::identity(u1.rows()))?;
    Ok(max_abs_diff(&lhs, &rhs)? <= tol.eps
        && max_abs_diff(&ident, &CMat::<S>::identity(v.control_dim() * u1.rows()))? <= tol.eps)
}

/// `U ↦ Σ_k |k><k| ⊗ U^k` on a `d`-level control: preserves identities but
/// fails to be functorial for `d > 2`.
pub fn power_map<S: Real>(d: usize, u: &CMat<S>) -> Result<CMat<S>> {
    let n = u.rows();
    let mut pow = CMat::identity(n);
    let mut out = CMat::zeros(d * n, d * n);
    for k in 0..d {
        if k > 0 {
            pow = matmul(&pow, u)?;
        }
        for i in 0..n {
            for j in 0..n {
                out.set(k * n + i, k * n + j, pow.get(i, j));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCheck {
    pub name: String,
    pub diff: f64,
    pub ok: bool,
}

/// The Hadamard expression of the phase-only presentation: a −π/4 global
/// phase next to Z(π/2) · X(π/2) · Z(π/2), read as one-qubit rotations of
/// the two control bases.
pub fn czcx_hadamard_witness<S: Real>(tol: Tolerance<S>) -> Result<WitnessCheck> {
    let quarter = CMat::phase_scalar(S::FRAC_PI_2());
    let zrot = apply_variant(CZ, &quarter)?;
    let xrot = apply_variant(CX, &quarter)?;
    let prod = matmul(&zrot, &matmul(&xrot, &zrot)?)?;
    let m = prod.scale(cis(-S::FRAC_PI_4()));
    let s = S::one() / S::SQRT_2();
    let mut h = CMat::zeros(2, 2);
    h.set(0, 0, C::new(s, S::zero()));
    h.set(0, 1, C::new(s, S::zero()));
    h.set(1, 0, C::new(s, S::zero()));
    h.set(1, 1, C::new(-s, S::zero()));
    let diff = max_abs_diff(&m, &h)?.to_f64().unwrap();
    Ok(WitnessCheck {
        name: "czcx_hadamard".into(),
        diff,
        ok: diff <= tol.eps.to_f64().unwrap(),
    })
}

/// Fixed matrices for the recorded negative witnesses.
pub mod witness {
    use super::*;

    /// Hadamard as a plain matrix.
    pub fn hadamard<S: Real>() -> CMat<S> {
        let s = S::one() / S::SQRT_2();
        CMat::from_rows(vec![
            vec![C::new(s, S::zero()), C::new(s, S::zero())],
            vec![C::new(s, S::zero()), C::new(-s, S::zero())],
        ])
    }

    /// diag(1, e^{iθ}).
    pub fn z_rot<S: Real>(theta: f64) -> CMat<S> {
        let mut m = CMat::identity(2);
        m.set(1, 1, cis(lit::<S>(theta)));
        m
    }

    /// The qutrit cycle |k> -> |k+1 mod 3>.
    pub fn qutrit_cycle<S: Real>() -> CMat<S> {
        let one = C::new(S::one(), S::zero());
        let mut m = CMat::zeros(3, 3);
        m.set(1, 0, one);
        m.set(2, 1, one);
        m.set(0, 2, one);
        m
    }

    /// diag(1, e^{0.7i}, e^{1.9i}).
    pub fn qutrit_phases<S: Real>() -> CMat<S> {
        let mut m = CMat::identity(3);
        m.set(1, 1, cis(lit::<S>(0.7)));
        m.set(2, 2, cis(lit::<S>(1.9)));
        m
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub pair: String,
    pub compatible: bool,
    pub commute: Option<bool>,
}

/// Everything the `variants` command reports.
#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub dim: usize,
    pub points: Vec<PointsReport>,
    pub functorial: Vec<WitnessCheck>,
    pub pairs: Vec<PairReport>,
    pub exhaustive: Vec<WitnessCheck>,
    pub witnesses: Vec<WitnessCheck>,
    pub all_expected: bool,
}

/// Run the conformance checks for control dimension 2 or 3.
pub fn conformance_report<S: Real>(
    dim: usize,
    tol: Tolerance<S>,
    rng: &mut impl rand::Rng,
) -> Result<ConformanceReport> {
    let mut report = ConformanceReport {
        dim,
        points: Vec::new(),
        functorial: Vec::new(),
        pairs: Vec::new(),
        exhaustive: Vec::new(),
        witnesses: Vec::new(),
        all_expected: true,
    };
    let expect = |ok: bool, all: &mut bool| *all &= ok;

    match dim {
        2 => {
            let f: CMat<S> = crate::gen::random_unitary(2, rng);
            let g: CMat<S> = crate::gen::random_unitary(2, rng);
            for v in [C1, C0, CMinus, CZ, CX] {
                let p = check_points(v, &f, tol)?;
                expect(p.ok, &mut report.all_expected);
                report.points.push(p);
            }
            for v in [C1, C0, CMinus, CZ, CX, CSharp] {
                let ok = check_functorial(v, &f, &g, tol)?;
                expect(ok, &mut report.all_expected);
                report.functorial.push(WitnessCheck {
                    name: format!("functorial_{}", v.label()),
                    diff: f64::NAN,
                    ok,
                });
            }
            // C1 and C0 are compatible and commute
            let compat = check_compatible(C1, C0, &f, tol)?;
            let comm = check_commute(C1, C0, &f, &g, tol)?;
            expect(compat && comm, &mut report.all_expected);
            report.pairs.push(PairReport {
                pair: "C1/C0".into(),
                compatible: compat,
                commute: Some(comm),
            });
            // C1 and C- are compatible but do not commute (fixed witness)
            let compat = check_compatible(C1, CMinus, &f, tol)?;
            let comm = check_commute(C1, CMinus, &witness::hadamard(), &witness::z_rot(1.0), tol)?;
            expect(compat && !comm, &mut report.all_expected);
            report.pairs.push(PairReport {
                pair: "C1/C-".into(),
                compatible: compat,
                commute: Some(comm),
            });
            // C# is not compatible with C1
            let compat = check_compatible(C1, CSharp, &f, tol)?;
            expect(!compat, &mut report.all_expected);
            report.pairs.push(PairReport { pair: "C1/C#".into(), compatible: compat, commute: None });
            // the two-basis family: compatible, neither commuting nor exhaustive
            let compat = check_compatible(CZ, CX, &f, tol)?;
            let comm = check_commute(CZ, CX, &witness::hadamard(), &witness::z_rot(1.0), tol)?;
            let exh = check_exhaustive(&[CZ, CX], &f, tol)?;
            expect(compat && !comm && !exh, &mut report.all_expected);
            report.pairs.push(PairReport {
                pair: "CZ/CX".into(),
                compatible: compat,
                commute: Some(comm),
            });
            report.exhaustive.push(WitnessCheck {
                name: "exhaustive_CZ_CX".into(),
                diff: f64::NAN,
                ok: exh,
            });
            // the level family is exhaustive
            let exh = check_exhaustive(&[C0, C1], &f, tol)?;
            expect(exh, &mut report.all_expected);
            report.exhaustive.push(WitnessCheck {
                name: "exhaustive_levels".into(),
                diff: f64::NAN,
                ok: exh,
            });
            let w = czcx_hadamard_witness(Tolerance::new(lit::<S>(1e-12)).unwrap())?;
            expect(w.ok, &mut report.all_expected);
            report.witnesses.push(w);
        }
        3 => {
            let f: CMat<S> = crate::gen::random_unitary(3, rng);
            let g: CMat<S> = crate::gen::random_unitary(3, rng);
            let family: Vec<ControlVariant> =
                (0..3).map(|level| CK { dim: 3, level }).collect();
            for v in &family {
                let p = check_points(*v, &f, tol)?;
                expect(p.ok, &mut report.all_expected);
                report.points.push(p);
                let ok = check_functorial(*v, &f, &g, tol)?;
                expect(ok, &mut report.all_expected);
                report.functorial.push(WitnessCheck {
                    name: format!("functorial_{}", v.label()),
                    diff: f64::NAN,
                    ok,
                });
            }
            let exh = check_exhaustive(&family, &f, tol)?;
            expect(exh, &mut report.all_expected);
            report.exhaustive.push(WitnessCheck {
                name: "exhaustive_levels".into(),
                diff: f64::NAN,
                ok: exh,
            });
            // the power map is not functorial at d = 3 (fixed witness)
            let u = witness::qutrit_cycle::<S>();
            let v = witness::qutrit_phases::<S>();
            let lhs = power_map(3, &matmul(&u, &v)?)?;
            let rhs = matmul(&power_map(3, &u)?, &power_map(3, &v)?)?;
            let diff = max_abs_diff(&lhs, &rhs)?.to_f64().unwrap();
            let broken = diff > 0.5;
            expect(broken, &mut report.all_expected);
            report.witnesses.push(WitnessCheck {
                name: "power_map_not_functorial".into(),
                diff,
                ok: broken,
            });
        }
        other => {
            return Err(Error::DimMismatch(other, 0, 2, 3));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::random_unitary;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    #[test]
    fn c1_of_not_is_cnot() {
        let mut x = CMat::<f64>::zeros(2, 2);
        x.set(0, 1, C::new(1.0, 0.0));
        x.set(1, 0, C::new(1.0, 0.0));
        let cx = apply_variant(C1, &x).unwrap();
        let cnot = crate::semantics::interpret(&crate::Diagram::Cnot, crate::Dialect::Qc).unwrap();
        assert!(max_abs_diff(&cx, &cnot).unwrap() < 1e-15);
        // identities are preserved
        let id = apply_variant(C1, &CMat::<f64>::identity(4)).unwrap();
        assert!(max_abs_diff(&id, &CMat::identity(8)).unwrap() == 0.0);
    }

    #[test]
    fn cminus_of_z_pi_matches_formula() {
        let zpi = witness::z_rot::<f64>(std::f64::consts::PI);
        let m = apply_variant(CMinus, &zpi).unwrap();
        let plus = rank_one(&Point::<f64>::plus());
        let minus = rank_one(&Point::<f64>::minus());
        let expect_a = kron(&plus, &CMat::identity(2));
        let expect_b = kron(&minus, &zpi);
        let mut expect = CMat::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                expect.set(i, j, expect_a.get(i, j) + expect_b.get(i, j));
            }
        }
        assert!(max_abs_diff(&m, &expect).unwrap() < 1e-15);
    }

    #[test]
    fn points_pass_and_swapped_points_fail() {
        let mut rng = StdRng::seed_from_u64(31);
        let f = random_unitary::<f64>(2, &mut rng);
        for v in [C1, C0, CMinus] {
            assert!(check_points(v, &f, tol()).unwrap().ok, "{}", v.label());
        }
        // swapping the candidates breaks the check
        let cf = apply_variant(C1, &f).unwrap();
        let wrong_true = Point::<f64>::basis(2, 0).as_column();
        let lhs = matmul(&cf, &kron(&wrong_true, &CMat::identity(2))).unwrap();
        let rhs = kron(&wrong_true, &f);
        assert!(max_abs_diff(&lhs, &rhs).unwrap() > 0.1);
    }

    #[test]
    fn qutrit_points() {
        let mut rng = StdRng::seed_from_u64(32);
        let f = random_unitary::<f64>(3, &mut rng);
        for level in 0..3 {
            assert!(check_points(CK { dim: 3, level }, &f, tol()).unwrap().ok);
        }
    }

    #[test]
    fn compat_and_commute_facts() {
        let mut rng = StdRng::seed_from_u64(33);
        let f = random_unitary::<f64>(2, &mut rng);
        let g = random_unitary::<f64>(2, &mut rng);
        assert!(check_compatible(C1, C0, &f, tol()).unwrap());
        assert!(check_commute(C1, C0, &f, &g, tol()).unwrap());
        assert!(check_compatible(C1, CMinus, &f, tol()).unwrap());
        // recorded non-commuting witness
        assert!(!check_commute(C1, CMinus, &witness::hadamard(), &witness::z_rot(1.0), tol()).unwrap());
        assert!(!check_compatible(C1, CSharp, &witness::hadamard(), tol()).unwrap());
    }

    #[test]
    fn csharp_is_functorial_on_two_qubits() {
        let mut rng = StdRng::seed_from_u64(34);
        let u = random_unitary::<f64>(4, &mut rng);
        let v = random_unitary::<f64>(4, &mut rng);
        assert!(check_functorial(CSharp, &u, &v, tol()).unwrap());
    }

    #[test]
    fn exhaustive_families() {
        let mut rng = StdRng::seed_from_u64(35);
        let f2 = random_unitary::<f64>(2, &mut rng);
        assert!(check_exhaustive(&[C0, C1], &f2, tol()).unwrap());
        let f3 = random_unitary::<f64>(3, &mut rng);
        let fam: Vec<_> = (0..3).map(|level| CK { dim: 3, level }).collect();
        assert!(check_exhaustive(&fam, &f3, tol()).unwrap());
        assert!(!check_exhaustive(&[CZ, CX], &f2, tol()).unwrap());
    }

    #[test]
    fn nested_standard_controls_have_composite_points() {
        let mut rng = StdRng::seed_from_u64(36);
        let f = random_unitary::<f64>(2, &mut rng);
        let nested = apply_variant(C1, &apply_variant(C1, &f).unwrap()).unwrap();
        // true point |1>⊗|1>, false point |0>⊗(anything)
        let t = kron(&Point::<f64>::basis(2, 1).as_column(), &Point::<f64>::basis(2, 1).as_column());
        let arbitrary = Point::<f64> {
            amplitudes: vec![C::new(0.6, 0.0), C::new(0.0, 0.8)],
        };
        let fls = kron(&Point::<f64>::basis(2, 0).as_column(), &arbitrary.as_column());
        let lhs = matmul(&nested, &kron(&t, &CMat::identity(2))).unwrap();
        assert!(max_abs_diff(&lhs, &kron(&t, &f)).unwrap() <= 1e-10);
        let lhs = matmul(&nested, &kron(&fls, &CMat::identity(2))).unwrap();
        assert!(max_abs_diff(&lhs, &kron(&fls, &CMat::identity(2))).unwrap() <= 1e-10);
    }

    #[test]
    fn power_map_breaks_on_the_recorded_witness() {
        let u = witness::qutrit_cycle::<f64>();
        let v = witness::qutrit_phases::<f64>();
        let lhs = power_map(3, &matmul(&u, &v).unwrap()).unwrap();
        let rhs = matmul(&power_map(3, &u).unwrap(), &power_map(3, &v).unwrap()).unwrap();
        let diff = max_abs_diff(&lhs, &rhs).unwrap();
        assert!(diff > 0.5, "diff {diff}");
        // but it does preserve identities
        let id = power_map(3, &CMat::<f64>::identity(3)).unwrap();
        assert!(max_abs_diff(&id, &CMat::identity(9)).unwrap() == 0.0);
    }

    #[test]
    fn hadamard_witness_matches_and_degrades() {
        let w = czcx_hadamard_witness::<f64>(Tolerance::new(1e-12).unwrap()).unwrap();
        assert!(w.ok, "diff {}", w.diff);
        // dropping the global phase breaks it by |1 - e^{iπ/4}|
        let quarter = CMat::<f64>::phase_scalar(std::f64::consts::FRAC_PI_2);
        let zrot = apply_variant(CZ, &quarter).unwrap();
        let xrot = apply_variant(CX, &quarter).unwrap();
        let prod = matmul(&zrot, &matmul(&xrot, &zrot).unwrap()).unwrap();
        let diff = max_abs_diff(&prod, &witness::hadamard()).unwrap();
        // entries of H have magnitude 1/√2, so the entrywise gap is scaled
        let expect = (C::new(1.0, 0.0) - cis(std::f64::consts::FRAC_PI_4)).norm()
            * std::f64::consts::FRAC_1_SQRT_2;
        assert!((diff - expect).abs() < 1e-12);
        // degenerate X rotation also breaks it
        let xid = apply_variant(CX, &CMat::phase_scalar(0.0)).unwrap();
        let prod = matmul(&zrot, &matmul(&xid, &zrot).unwrap()).unwrap();
        let m = prod.scale(cis(-std::f64::consts::FRAC_PI_4));
        assert!(max_abs_diff(&m, &witness::hadamard()).unwrap() > 0.1);
    }

    #[test]
    fn conformance_reports_are_green() {
        let mut rng = StdRng::seed_from_u64(37);
        for dim in [2, 3] {
            let r = conformance_report::<f64>(dim, tol(), &mut rng).unwrap();
            assert!(r.all_expected, "dim {dim}: {r:?}");
        }
    }
}
