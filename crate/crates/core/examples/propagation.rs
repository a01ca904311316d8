//! Frequency with which a small coefficient sits below a large one, over
//! random perturbations, next to the union bound.

use smoothdt::oracle::{propagation_bound, propagation_frequency, CoeffForm};
use smoothdt::rng::stream;
use smoothdt::tree::{parity_tree, random_tree};
use smoothdt::SubsetIndex;

fn main() -> smoothdt::Result<()> {
    let (n, c, b) = (8, 0.1, 0.05);
    let targets = [
        ("parity(1,2,3)", parity_tree(SubsetIndex::from_vars(&[1, 2, 3], n)?, n)?),
        ("random size 8", random_tree(n, 8, &mut stream(4, "tree", 0))?),
    ];
    for (name, tree) in &targets {
        println!("{name}");
        for a in [0.0, 1e-4, 1e-3, 1e-2, 3e-2] {
            let f = propagation_frequency(tree, &vec![0.0; n], c, a, b, n, CoeffForm::Normalized, 10_000, 1)?;
            let bound = propagation_bound(CoeffForm::Normalized, a, b, c, n);
            println!(
                "  a = {a:<7} frequency {:.4} ± {:.4}  bound {bound:.3e}",
                f.estimate, f.stderr
            );
        }
    }
    Ok(())
}
