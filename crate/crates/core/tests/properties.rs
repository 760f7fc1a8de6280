//! Structural and semantic invariants over randomly generated diagrams.

use ctrlprop::diagram::{Diagram, Dialect};
use ctrlprop::gen::{random_diagram, GenConfig};
use ctrlprop::matrix::{matmul, max_abs_diff, Tolerance};
use ctrlprop::num::C;
use ctrlprop::semantics::{interpret, is_unitary};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

type D = Diagram<f64>;

fn diagram_from_seed(seed: u64, dialect: Dialect, wires: usize, depth: usize) -> D {
    let mut rng = StdRng::seed_from_u64(seed);
    random_diagram(&mut rng, dialect, GenConfig { max_wires: wires, max_depth: depth })
}

fn dialect_of(flag: bool) -> Dialect {
    if flag {
        Dialect::Qc
    } else {
        Dialect::Cqc
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flatten_is_idempotent_and_preserves_arity(seed: u64, qc: bool) {
        let d = diagram_from_seed(seed, dialect_of(qc), 6, 12);
        let f = d.flatten().unwrap();
        prop_assert_eq!(f.wires().unwrap(), d.wires().unwrap());
        prop_assert!(f.flatten().unwrap().approx_eq(&f));
    }

    #[test]
    fn dagger_is_an_involution(seed: u64, qc: bool) {
        let d = diagram_from_seed(seed, dialect_of(qc), 6, 10);
        prop_assert!(d.dagger().dagger().approx_eq(&d));
        let (dom, cod) = d.arity().unwrap();
        let (ddom, dcod) = d.dagger().arity().unwrap();
        prop_assert_eq!((dom, cod), (dcod, ddom));
    }

    #[test]
    fn print_parse_round_trip(seed: u64, qc: bool) {
        let d = diagram_from_seed(seed, dialect_of(qc), 6, 10);
        let text = d.to_string();
        let back: D = text.parse().unwrap();
        prop_assert!(back.approx_eq(&d), "text was: {}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn expanded_swaps_are_atomic(seed: u64) {
        let d = diagram_from_seed(seed, Dialect::Cqc, 6, 8);
        let e = d.expand_swaps().flatten().unwrap();
        for p in e.all_paths() {
            if let Diagram::Swap(a, b) = e.subterm_at(&p).unwrap() {
                prop_assert_eq!((*a, *b), (1, 1));
            }
        }
    }

    #[test]
    fn angles_stay_canonical(x in -50.0f64..50.0) {
        let a = ctrlprop::angle::Angle::<f64>::new(x);
        prop_assert!((0.0..std::f64::consts::TAU).contains(&a.value()));
        prop_assert!((-a + a).is_zero());
    }
}

// Matrix-level invariants go through the interpreter, so they use fewer,
// smaller cases.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_preserves_semantics(seed: u64, qc: bool) {
        let dialect = dialect_of(qc);
        let d = diagram_from_seed(seed, dialect, 4, 8);
        let m = interpret(&d, dialect).unwrap();
        let mf = interpret(&d.flatten().unwrap(), dialect).unwrap();
        let me = interpret(&d.expand_swaps(), dialect).unwrap();
        prop_assert!(max_abs_diff(&m, &mf).unwrap() <= 1e-12);
        prop_assert!(max_abs_diff(&m, &me).unwrap() <= 1e-12);
    }

    #[test]
    fn interpretations_are_unitary(seed: u64, qc: bool) {
        let dialect = dialect_of(qc);
        let d = diagram_from_seed(seed, dialect, 4, 8);
        prop_assert!(is_unitary(&interpret(&d, dialect).unwrap(), Tolerance::default()));
    }

    #[test]
    fn dagger_interprets_to_the_adjoint(seed: u64, qc: bool) {
        let dialect = dialect_of(qc);
        let d = diagram_from_seed(seed, dialect, 4, 8);
        let m = interpret(&d, dialect).unwrap();
        let md = interpret(&d.dagger(), dialect).unwrap();
        prop_assert!(max_abs_diff(&md, &m.dagger()).unwrap() <= 1e-10);
    }

    #[test]
    fn composition_order_conventions(seed_a: u64, seed_b: u64, qc: bool) {
        let dialect = dialect_of(qc);
        let mut rng_a = StdRng::seed_from_u64(seed_a);
        let mut rng_b = StdRng::seed_from_u64(seed_b);
        let a: D = ctrlprop::gen::random_diagram_on(&mut rng_a, dialect, 2, 5);
        let b: D = ctrlprop::gen::random_diagram_on(&mut rng_b, dialect, 2, 5);
        // sequencing: the later factor multiplies on the left
        let seq = interpret(&D::seq(vec![a.clone(), b.clone()]), dialect).unwrap();
        let prod = matmul(&interpret(&b, dialect).unwrap(), &interpret(&a, dialect).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&seq, &prod).unwrap() <= 1e-12);
        // tensoring: the first factor is the most significant block
        let par = interpret(&D::par(vec![a.clone(), b.clone()]), dialect).unwrap();
        let kr = ctrlprop::matrix::kron(&interpret(&a, dialect).unwrap(), &interpret(&b, dialect).unwrap());
        prop_assert!(max_abs_diff(&par, &kr).unwrap() <= 1e-12);
    }

    #[test]
    fn control_is_a_functor(seed_a: u64, seed_b: u64) {
        let mut rng_a = StdRng::seed_from_u64(seed_a);
        let mut rng_b = StdRng::seed_from_u64(seed_b);
        let f: D = ctrlprop::gen::random_diagram_on(&mut rng_a, Dialect::Cqc, 2, 5);
        let g: D = ctrlprop::gen::random_diagram_on(&mut rng_b, Dialect::Cqc, 2, 5);
        let lhs = interpret(&D::ctrl(D::seq(vec![f.clone(), g.clone()])), Dialect::Cqc).unwrap();
        let rhs = interpret(&D::seq(vec![D::ctrl(f), D::ctrl(g)]), Dialect::Cqc).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs).unwrap() <= 1e-12);
        let id = interpret(&D::ctrl(D::Id(2)), Dialect::Cqc).unwrap();
        prop_assert!(max_abs_diff(&id, &ctrlprop::matrix::CMat::identity(8)).unwrap() == 0.0);
    }

    #[test]
    fn controlled_block_has_identity_corner(seed: u64) {
        let d = diagram_from_seed(seed, Dialect::Cqc, 3, 6);
        let n = 1usize << d.wires().unwrap();
        let m = interpret(&D::ctrl(d), Dialect::Cqc).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
                prop_assert!((m.get(i, j) - want).norm() <= 1e-12);
            }
        }
    }
}
