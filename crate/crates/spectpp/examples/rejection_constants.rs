//! Compare the three rejection-constant routes: the closed form for
//! exponential pairs, the piecewise-linear envelope, and the dense-grid
//! scan. The envelope always sits between the scan and a few percent above.
//!
//! ```bash
//! cargo run --example rejection_constants
//! ```

use spectpp::dist::{ContinuousDensity, Density, MixtureDensity};
use spectpp::envelope::{analytic_exponential_const, build_grid, rejection_const_on_grid};
use spectpp::oracles::mc_rejection_const;

fn main() {
    // Exponential pair with a dominating proposal: the ratio peaks at zero
    // and the closed form is rate_t / rate_p.
    let proposal = ContinuousDensity::exponential(1.0).unwrap();
    let target = ContinuousDensity::exponential(2.0).unwrap();
    println!("exponential proposal rate 1 vs target rate 2:");
    println!(
        "  closed form        {:.6}",
        analytic_exponential_const(1.0, 2.0, 0.99)
    );
    report_pair(&proposal, &target);

    // Reversed rates: unbounded ratio, so the domain is cut at the target's
    // 99th percentile before evaluating.
    println!("\nreversed rates (domain-restricted at the 99th percentile):");
    println!(
        "  closed form        {:.6}",
        analytic_exponential_const(2.0, 1.0, 0.99)
    );

    // A mixture pair with no closed form at all.
    let proposal = MixtureDensity::new(
        vec![
            ContinuousDensity::log_normal(0.0, 0.6).unwrap(),
            ContinuousDensity::gamma(2.0, 1.5).unwrap(),
        ],
        vec![0.5, 0.5],
    )
    .unwrap();
    let target = MixtureDensity::new(
        vec![
            ContinuousDensity::log_normal(0.25, 0.7).unwrap(),
            ContinuousDensity::weibull(1.6, 1.2).unwrap(),
        ],
        vec![0.6, 0.4],
    )
    .unwrap();
    println!("\nlog-normal/gamma mixture proposal vs log-normal/weibull target:");
    report_pair(&proposal, &target);
}

fn report_pair(proposal: &dyn Density, target: &dyn Density) {
    for n in [64, 512, 4096] {
        let grid = build_grid(proposal, target, 0.995, n).unwrap();
        let envelope = rejection_const_on_grid(proposal, target, &grid).unwrap();
        let oracle = mc_rejection_const(proposal, target, grid.span(), 100_000).unwrap();
        println!(
            "  envelope n={n:<5} {envelope:.6}   dense-grid scan {:.6}   gap {:+.3}%",
            oracle.constant,
            100.0 * (envelope / oracle.constant - 1.0)
        );
    }
}
