//! Perturbed product distributions, sampling, and the dataset CSV format.

use smoothdt::dist::{estimate_means, perturb, random_base_mu, sample_seeded, Dataset};
use smoothdt::rng::stream;
use smoothdt::tree::random_tree;

fn main() -> smoothdt::Result<()> {
    let (n, c) = (6, 0.1);
    let base = random_base_mu(n, c, &mut stream(1, "base-mu", 0));
    let pert = perturb(&base, c, &mut stream(1, "delta", 0))?;
    let dist = pert.dist();
    for (i, b) in base.iter().enumerate() {
        println!(
            "x{}: base {b:+.3} delta {:+.3} mu {:+.3} sigma {:.3}",
            i + 1,
            pert.delta[i],
            dist.mu()[i],
            dist.sigma()[i]
        );
    }

    let xs = sample_seeded(dist, 50_000, 9);
    let est = estimate_means(&xs, c)?;
    let worst = est
        .iter()
        .zip(dist.mu())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("largest empirical mean error over 50000 draws: {worst:.4}");

    let tree = random_tree(n, 5, &mut stream(1, "tree", 0))?;
    let data = Dataset::label(&tree, xs.into_iter().take(5).collect(), dist.mu().to_vec())?;
    data.write_csv(std::io::stdout())?;
    Ok(())
}
