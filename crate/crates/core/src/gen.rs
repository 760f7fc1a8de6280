//! Random generators used across the test suites: well-typed random
//! diagrams in either dialect, random unitaries, and rewrite perturbation.

use crate::diagram::{Diagram, Dialect};
use crate::matrix::CMat;
use crate::num::{lit, Real, C};
use rand::Rng;

/// Configuration for random diagram generation.
#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_wires: usize,
    pub max_depth: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_wires: 6, max_depth: 12 }
    }
}

/// A random type-correct, dialect-correct endomorphism on at most
/// `cfg.max_wires` wires.
pub fn random_diagram<S: Real>(rng: &mut impl Rng, dialect: Dialect, cfg: GenConfig) -> Diagram<S> {
    let wires = rng.gen_range(1..=cfg.max_wires.max(1));
    random_diagram_on(rng, dialect, wires, cfg.max_depth)
}

/// A random endomorphism on exactly `wires` wires.
pub fn random_diagram_on<S: Real>(
    rng: &mut impl Rng,
    dialect: Dialect,
    wires: usize,
    depth: usize,
) -> Diagram<S> {
    let d = gen_term(rng, dialect, wires, depth);
    d.flatten().expect("generator produces well-typed terms")
}

fn random_angle<S: Real>(rng: &mut impl Rng) -> S {
    lit(rng.gen_range(0.0..std::f64::consts::TAU))
}

fn gen_atom<S: Real>(rng: &mut impl Rng, dialect: Dialect, wires: usize) -> Diagram<S> {
    match wires {
        0 => Diagram::phase(random_angle(rng)),
        1 => match dialect {
            Dialect::Qc => {
                if rng.gen_bool(0.5) {
                    Diagram::H
                } else {
                    Diagram::z(random_angle(rng))
                }
            }
            Dialect::Cqc => {
                if rng.gen_bool(0.5) {
                    Diagram::H
                } else {
                    Diagram::ctrl(Diagram::phase(random_angle(rng)))
                }
            }
        },
        2 => match (dialect, rng.gen_range(0..3)) {
            (Dialect::Qc, 0) => Diagram::Cnot,
            (Dialect::Cqc, 0) => Diagram::ctrl_n(2, Diagram::phase(random_angle(rng))),
            (_, 1) => Diagram::Swap(1, 1),
            _ => Diagram::par(vec![
                gen_atom(rng, dialect, 1),
                gen_atom(rng, dialect, 1),
            ]),
        },
        n => {
            if rng.gen_bool(0.3) {
                let a = rng.gen_range(1..n);
                Diagram::Swap(a, n - a)
            } else {
                let a = rng.gen_range(1..n);
                Diagram::par(vec![gen_atom(rng, dialect, a), gen_atom(rng, dialect, n - a)])
            }
        }
    }
}

fn gen_term<S: Real>(rng: &mut impl Rng, dialect: Dialect, wires: usize, depth: usize) -> Diagram<S> {
    if depth == 0 || wires == 0 {
        return gen_atom(rng, dialect, wires);
    }
    match rng.gen_range(0..10) {
        0 | 1 | 2 => gen_atom(rng, dialect, wires),
        3 | 4 | 5 => {
            let k = rng.gen_range(2..=3);
            Diagram::seq((0..k).map(|_| gen_term(rng, dialect, wires, depth - 1)).collect())
        }
        6 | 7 => {
            if wires == 1 {
                // widen with a phase component instead of splitting
                Diagram::par(vec![
                    Diagram::phase(random_angle(rng)),
                    gen_term(rng, dialect, 1, depth - 1),
                ])
            } else {
                let a = rng.gen_range(1..wires);
                Diagram::par(vec![
                    gen_term(rng, dialect, a, depth - 1),
                    gen_term(rng, dialect, wires - a, depth - 1),
                ])
            }
        }
        8 => match dialect {
            Dialect::Cqc => Diagram::ctrl(gen_term(rng, dialect, wires - 1, depth - 1)),
            Dialect::Qc => gen_atom(rng, dialect, wires),
        },
        _ => {
            if wires >= 2 && rng.gen_bool(0.5) {
                let a = rng.gen_range(1..wires);
                Diagram::Swap(a, wires - a)
            } else {
                Diagram::Id(wires)
            }
        }
    }
}

/// Random unitary of the given dimension: Gram-Schmidt on a complex
/// Gaussian matrix, with a random diagonal phase.
pub fn random_unitary<S: Real>(dim: usize, rng: &mut impl Rng) -> CMat<S> {
    let gauss = |rng: &mut dyn rand::RngCore| -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    // columns of a random Gaussian matrix
    let mut cols: Vec<Vec<C<S>>> = (0..dim)
        .map(|_| (0..dim).map(|_| C::new(lit(gauss(rng)), lit(gauss(rng)))).collect())
        .collect();
    // modified Gram-Schmidt
    for j in 0..dim {
        for k in 0..j {
            let mut dot = C::new(S::zero(), S::zero());
            for i in 0..dim {
                dot = dot + cols[k][i].conj() * cols[j][i];
            }
            for i in 0..dim {
                let corr = dot * cols[k][i];
                cols[j][i] = cols[j][i] - corr;
            }
        }
        let norm = cols[j].iter().fold(S::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        for i in 0..dim {
            cols[j][i] = cols[j][i] / norm;
        }
    }
    let mut m = CMat::zeros(dim, dim);
    for j in 0..dim {
        let phase = crate::num::cis::<S>(random_angle(rng));
        for i in 0..dim {
            m.set(i, j, cols[j][i] * phase);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{is_unitary, Tolerance};
    use crate::semantics::{interpret, is_unitary as sem_unitary};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_diagrams_type_check_and_validate() {
        let mut rng = StdRng::seed_from_u64(42);
        for dialect in [Dialect::Qc, Dialect::Cqc] {
            for _ in 0..200 {
                let d: Diagram<f64> = random_diagram(&mut rng, dialect, GenConfig::default());
                let w = d.wires().expect("type-correct");
                assert!(w <= 6);
                assert!(d.validate_dialect(dialect).is_ok());
            }
        }
    }

    #[test]
    fn generated_diagrams_interpret_to_unitaries() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..40 {
            let d: Diagram<f64> =
                random_diagram(&mut rng, Dialect::Cqc, GenConfig { max_wires: 4, max_depth: 8 });
            let m = interpret(&d, Dialect::Cqc).unwrap();
            assert!(sem_unitary(&m, Tolerance::default()));
        }
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = StdRng::seed_from_u64(44);
        for dim in [2, 3, 4, 8] {
            let u: CMat<f64> = random_unitary(dim, &mut rng);
            assert!(is_unitary(&u, Tolerance::default()), "dim {dim}");
        }
    }
}
