//! Learn a random tree from examples drawn under perturbed means.
//!
//! cargo run --release --example learn_tree -- [n] [size] [m] [seed]

use smoothdt::dist::{perturb, random_base_mu, sample_seeded, Dataset};
use smoothdt::learner::{exact_error, learn, LearnerConfig, Verdict};
use smoothdt::rng::stream;
use smoothdt::tree::{random_tree, serialize_tree};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> smoothdt::Result<()> {
    let (n, size, m, seed) = (arg(1, 12usize), arg(2, 8usize), arg(3, 100_000usize), arg(4, 3u64));
    let c = 0.1;
    let tree = random_tree(n, size, &mut stream(seed, "tree", 0))?;
    let base = random_base_mu(n, c, &mut stream(seed, "base-mu", 0));
    let dist = perturb(&base, c, &mut stream(seed, "delta", 0))?.into_dist();
    let data = Dataset::label(&tree, sample_seeded(&dist, m, seed), dist.mu().to_vec())?;
    println!("target: {}", serialize_tree(&tree));

    let out = learn(&data, &LearnerConfig::new(c).with_depth_cap(n))?;
    let p = out.diagnostics.params;
    println!(
        "t = {:.4}, D = {}, frontier sizes {:?}",
        p.threshold, p.depth_cap, out.diagnostics.frontier_sizes
    );
    match &out.verdict {
        Verdict::Fail { level, frontier_size } => println!("FAIL at level {level} with {frontier_size} sets"),
        Verdict::Learned(h) => {
            println!(
                "hypothesis has {} terms, error {:.5}",
                h.poly().len(),
                exact_error(h, &dist, &tree)?
            );
        }
    }
    Ok(())
}
