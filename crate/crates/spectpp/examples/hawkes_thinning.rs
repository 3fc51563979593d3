//! Simulate a multivariate Hawkes process by thinning and check the
//! realized rates against the branching-process prediction
//! rate = (I - A)^-1 mu.
//!
//! ```bash
//! cargo run --example hawkes_thinning
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use spectpp::models::{EventSeq, HawkesModel, HawkesParams};

fn main() {
    let params = HawkesParams::new(
        vec![0.4, 0.2, 0.3],
        vec![
            vec![0.25, 0.10, 0.05],
            vec![0.05, 0.30, 0.10],
            vec![0.10, 0.05, 0.20],
        ],
        1.5,
    )
    .unwrap();
    println!("spectral radius: {:.4}", params.spectral_radius());

    // Stationary per-mark rates solve r = mu + A r.
    let expected = solve_rates(&params);
    let model = HawkesModel::new(params);

    let t_end = 20_000.0;
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let seq = model.thinning_sample(&EventSeq::empty(), t_end, &mut rng);
    println!("simulated {} events on [0, {t_end}]", seq.len());

    println!("\n mark   expected rate   realized rate");
    for d in 0..3 {
        let count = seq.marks.iter().filter(|&&m| m == d).count();
        println!(
            "   {d}        {:.4}          {:.4}",
            expected[d],
            count as f64 / t_end
        );
    }

    let ll = model.exact_log_likelihood(&seq);
    println!("\njoint log-likelihood of the realization: {ll:.1}");
}

/// Solves (I - A) r = mu by Gauss elimination; tiny fixed-size system.
fn solve_rates(params: &HawkesParams) -> Vec<f64> {
    let n = params.dim();
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = if i == j { 1.0 } else { 0.0 } - params.adjacency[i][j];
        }
        m[i][n] = params.baselines[i];
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}
