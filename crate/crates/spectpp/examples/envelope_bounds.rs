//! Build piecewise-linear bounds around a log-normal mixture and audit them.
//!
//! ```bash
//! cargo run --example envelope_bounds
//! ```

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use spectpp::dist::{ContinuousDensity, Density, MixtureDensity};
use spectpp::envelope::{build_grid, get_bounds, BoundDirection};

fn main() {
    let mixture = MixtureDensity::new(
        vec![
            ContinuousDensity::log_normal(-0.4, 0.5).unwrap(),
            ContinuousDensity::log_normal(0.8, 0.35).unwrap(),
        ],
        vec![0.45, 0.55],
    )
    .unwrap();

    // The grid spans the 0.5%..99.5% quantiles and contains every component
    // inflection point, so each segment is purely convex or concave per
    // component.
    let grid = build_grid(&mixture, &mixture, 0.995, 16).unwrap();
    let (lo, hi) = grid.span();
    println!(
        "grid: {} segments on [{lo:.4}, {hi:.4}]",
        grid.segment_count()
    );
    println!(
        "component inflection points: {:?}",
        mixture.inflection_points()
    );

    let upper = get_bounds(&mixture, &grid, BoundDirection::Upper).unwrap();
    let lower = get_bounds(&mixture, &grid, BoundDirection::Lower).unwrap();

    println!("\n segment            pdf(left)   upper(left)   lower(left)");
    for i in 0..grid.segment_count() {
        let x = grid.left[i];
        println!(
            "[{:>8.4}, {:>8.4}]   {:>8.5}    {:>8.5}      {:>8.5}",
            grid.left[i],
            grid.right[i],
            mixture.pdf(x).unwrap(),
            upper.y_left[i],
            lower.y_left[i],
        );
    }

    // Random-point audit: the bounds must bracket the density everywhere.
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut worst_gap = 0.0_f64;
    for _ in 0..10_000 {
        let x = rng.random_range(lo..hi);
        let f = mixture.pdf(x).unwrap();
        let u = upper.eval(x).unwrap();
        let l = lower.eval(x).unwrap();
        assert!(u >= f - 1e-12 && l <= f + 1e-12, "bound violated at {x}");
        worst_gap = worst_gap.max(u - l);
    }
    println!("\naudit passed on 10000 random points; widest bound gap {worst_gap:.5}");
}
