//! Jump-process workload: regimes of constant intensity with random jumps.
//! A windowed-rate model tracks the data and the speculative sampler accepts
//! long runs inside regimes, paying only at the jumps.
//!
//! ```bash
//! cargo run --example jump_process
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use spectpp::metrics::{acceptance_rate, avg_accepted_step};
use spectpp::models::{generate_jump_process, EventSeq, JumpProcessConfig, WindowedRateModel};
use spectpp::speculative::{speculative_sample, SpecConfig};

fn main() {
    let cfg = JumpProcessConfig::default();
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let jump = generate_jump_process(&cfg, &mut rng).unwrap();
    println!(
        "generated {} events over {} regimes (span {:.1})",
        jump.seq.len(),
        jump.regimes.len(),
        jump.seq.t_end
    );
    for (i, (dur, rate)) in jump.regimes.iter().take(5).enumerate() {
        println!("  regime {i}: duration {dur:>7.2}, rate {rate:.3}");
    }
    println!("  ...");

    // Track the data with the windowed-rate model and continue it
    // speculatively with a long step.
    let model = WindowedRateModel::new(64, 1.0).unwrap();
    let prefix = 200.min(jump.seq.len());
    let history = EventSeq::new(
        jump.seq.times[..prefix].to_vec(),
        jump.seq.marks[..prefix].to_vec(),
        jump.seq.times[prefix - 1],
    )
    .unwrap();

    let spec_cfg = SpecConfig {
        step: 15,
        alpha: 0.99,
        seed: 17,
        ..Default::default()
    };
    let run = speculative_sample(&model, &history, 2000, &spec_cfg).unwrap();
    println!("\nspeculative continuation of 2000 events with step 15:");
    println!("  rounds              {}", run.rounds.len());
    println!(
        "  average accepted step {:.2}",
        avg_accepted_step(&run.rounds)
    );
    println!(
        "  acceptance rate       {:.3}",
        acceptance_rate(&run.rounds)
    );

    let full_rounds = run
        .rounds
        .iter()
        .filter(|r| r.accepted_run_length == 15)
        .count();
    println!(
        "  rounds fully accepted {} / {} (jumps show up as early rejections)",
        full_rounds,
        run.rounds.len()
    );
}
