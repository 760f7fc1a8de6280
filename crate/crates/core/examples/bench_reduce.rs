use ctrlprop::diagram::{Diagram, Dialect};
use ctrlprop::gen::{random_diagram, GenConfig};
use ctrlprop::matrix::max_abs_diff;
use ctrlprop::semantics::interpret;
use ctrlprop::translate::{encode, g_reduce};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn count_ccpi(d: &Diagram<f64>) -> usize {
    match d {
        Diagram::Ctrl(b) => match b.as_ref() {
            Diagram::Ctrl(b2) if matches!(b2.as_ref(), Diagram::Phase(_)) => 1,
            other => count_ccpi(other),
        },
        Diagram::Seq(cs) | Diagram::Par(cs) => cs.iter().map(count_ccpi).sum(),
        _ => 0,
    }
}

fn main() {
    let mut rng = StdRng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let c: Diagram<f64> = random_diagram(&mut rng, Dialect::Cqc, GenConfig { max_wires: 4, max_depth: 10 });
        let (red, _) = g_reduce(&c).unwrap();
        let enc = encode(&red).unwrap();
        let me = interpret(&enc, Dialect::Qc).unwrap();
        let mr = interpret(&red, Dialect::Cqc).unwrap();
        let d = max_abs_diff(&me, &mr).unwrap();
        if d > worst { worst = d; }
        if d > 5e-13 {
            println!("i={i} size={} ccpi={} drift={d:.3e}", red.size(), count_ccpi(&red));
        }
    }
    println!("worst drift: {worst:.3e}");
}
