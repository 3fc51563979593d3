//! Reduced Hawkes configuration sweep: average accepted step as dimension,
//! sparsity, adjacency strength and decay vary. Mirrors the synthetic
//! acceptance-ratio study; heavier interactions mean earlier rejections.
//!
//! ```bash
//! cargo run --example hawkes_sweep
//! ```

use spectpp::harness::{cmd_sweep, SweepConfig};

fn main() {
    let out_dir = std::env::temp_dir().join("spectpp_sweep_example");
    let cfg = SweepConfig {
        dims: vec![10, 40],
        sparsities: vec![0.1, 0.5, 0.9],
        a_maxes: vec![0.05, 0.5],
        decays: vec![0.2, 1.0],
        n_seeds: 4,
        warmup_events: 50,
        n_events: 100,
        step: 5,
        seed: 1,
        out_dir: out_dir.clone(),
    };
    let rows = cmd_sweep(&cfg).unwrap();

    println!(" dim  sparsity  a_max  decay   avg step   acceptance");
    for &dim in &cfg.dims {
        for &sp in &cfg.sparsities {
            for &am in &cfg.a_maxes {
                for &dc in &cfg.decays {
                    let sel: Vec<_> = rows
                        .iter()
                        .filter(|r| {
                            r.dim == dim && r.sparsity == sp && r.a_max == am && r.decay == dc
                        })
                        .collect();
                    let step = sel.iter().map(|r| r.avg_step).sum::<f64>() / sel.len() as f64;
                    let acc = sel.iter().map(|r| r.acceptance_rate).sum::<f64>() / sel.len() as f64;
                    println!("{dim:>4}  {sp:>8}  {am:>5}  {dc:>5}   {step:>8.3}   {acc:>9.3}");
                }
            }
        }
    }

    let agg = |f: &dyn Fn(&spectpp::harness::SweepRow) -> bool| {
        let sel: Vec<f64> = rows.iter().filter(|r| f(r)).map(|r| r.avg_step).collect();
        sel.iter().sum::<f64>() / sel.len() as f64
    };
    println!(
        "\naggregate step by dimension: 10 -> {:.3}, 40 -> {:.3}",
        agg(&|r| r.dim == 10),
        agg(&|r| r.dim == 40)
    );
    println!(
        "aggregate step by sparsity: 0.1 -> {:.3}, 0.5 -> {:.3}, 0.9 -> {:.3}",
        agg(&|r| r.sparsity == 0.1),
        agg(&|r| r.sparsity == 0.5),
        agg(&|r| r.sparsity == 0.9)
    );
    println!("\nCSV written to {}", out_dir.display());
}
