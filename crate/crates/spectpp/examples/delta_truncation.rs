//! Delta-truncated categorical rejection: drop the highest-ratio categories
//! carrying less than delta target mass, shrink the constant, and account
//! for the induced total-variation error.
//!
//! ```bash
//! cargo run --example delta_truncation
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use spectpp::categorical::{
    exact_const, rejection_sample_until_accept, truncated_const, CategoricalDist,
};

fn main() {
    // A rare category with five times its proposal mass dominates the exact
    // constant even though it barely matters for samples.
    let target = CategoricalDist::new(vec![0.95, 0.05]).unwrap();
    let proposal = CategoricalDist::new(vec![0.99, 0.01]).unwrap();
    println!(
        "exact constant: {:.4}",
        exact_const(&target, &proposal).unwrap()
    );

    println!("\n delta    constant   excluded   tv_bound   effective_tv");
    for delta in [0.0, 0.01, 0.1, 0.3] {
        let r = truncated_const(&target, &proposal, delta).unwrap();
        println!(
            "{delta:>6}    {:>8.4}   {:?}   {:>8.4}   {:>8.5}",
            r.constant, r.excluded, r.tv_bound, r.effective_tv
        );
    }

    // Sample a million draws at delta = 0.1 and measure the realized
    // total-variation distance: it stays under the effective bound.
    let delta = 0.1;
    let r = truncated_const(&target, &proposal, delta).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let n = 1_000_000;
    let mut counts = [0u64; 2];
    for _ in 0..n {
        counts[rejection_sample_until_accept(&target, &proposal, r.constant, &mut rng)] += 1;
    }
    let tv = 0.5
        * (0..2)
            .map(|x| (counts[x] as f64 / n as f64 - target.prob(x)).abs())
            .sum::<f64>();
    println!(
        "\nempirical TV over {n} draws at delta={delta}: {tv:.5} \
         (effective bound {:.5}, budget {delta})",
        r.effective_tv
    );
    println!(
        "acceptance rate improved roughly {:.1}x over exact sampling",
        exact_const(&target, &proposal).unwrap() / r.constant
    );
}
