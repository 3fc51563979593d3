//! Speculative versus conventional sampling on a two-mark Hawkes model:
//! accepted-step statistics, rejection constants, call counts, and the
//! distributional metrics that certify the samples agree.
//!
//! ```bash
//! cargo run --example speculative_hawkes
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use spectpp::metrics::{
    acceptance_rate, avg_accepted_step, kl_per_event, llr, mmd_per_event, SampleSet,
};
use spectpp::models::{EventSeq, HawkesModel, HawkesParams};
use spectpp::speculative::{autoregressive_sample, speculative_sample, SpecConfig};

fn main() {
    let model = HawkesModel::new(
        HawkesParams::new(vec![0.4, 0.3], vec![vec![0.25, 0.15], vec![0.1, 0.3]], 1.2).unwrap(),
    );

    // A shared starting history, then ten continuations per variant.
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let history = autoregressive_sample(&model, &EventSeq::empty(), 30, &mut rng);
    let n_events = 100;
    let samples = 10;

    let mut spec_seqs = Vec::new();
    let mut rounds = Vec::new();
    for s in 0..samples {
        let cfg = SpecConfig {
            step: 5,
            seed: 100 + s as u64,
            ..Default::default()
        };
        let run = speculative_sample(&model, &history, n_events, &cfg).unwrap();
        rounds.extend(run.rounds);
        spec_seqs.push(run.seq);
    }
    let mut auto_seqs = Vec::new();
    for s in 0..samples {
        let mut rng = ChaCha12Rng::seed_from_u64(900 + s as u64);
        auto_seqs.push(autoregressive_sample(&model, &history, n_events, &mut rng));
    }

    println!("speculative rounds: {}", rounds.len());
    println!(
        "average accepted step (of 5): {:.3}",
        avg_accepted_step(&rounds)
    );
    println!("acceptance rate: {:.3}", acceptance_rate(&rounds));
    let finite_marks: Vec<f64> = rounds
        .iter()
        .flat_map(|r| r.mark_constants.iter().copied())
        .filter(|m| m.is_finite())
        .collect();
    println!(
        "mean time constant {:.4}, mean mark constant {:.4}",
        rounds
            .iter()
            .flat_map(|r| r.time_constants.iter())
            .sum::<f64>()
            / rounds.iter().map(|r| r.time_constants.len()).sum::<usize>() as f64,
        finite_marks.iter().sum::<f64>() / finite_marks.len() as f64,
    );

    let spec_set = SampleSet::from_continuations(vec![history.clone()], vec![spec_seqs]).unwrap();
    let auto_set = SampleSet::from_continuations(vec![history.clone()], vec![auto_seqs]).unwrap();
    let eps = 1.0 / (2.0 * samples as f64);
    println!("\nspeculative vs conventional samples:");
    println!(
        "  per-event mark KL  {:.4}",
        kl_per_event(&spec_set, &auto_set, 2, eps).unwrap()
    );
    println!(
        "  per-event time MMD {:+.4}",
        mmd_per_event(&spec_set, &auto_set).unwrap()
    );
    println!(
        "  log-likelihood ratio {:+.4}",
        llr(&model, &spec_set, &auto_set).unwrap()
    );
}
