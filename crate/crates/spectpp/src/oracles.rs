//! Independent ground-truth machinery: dense-grid rejection constants,
//! brute-force sequence enumeration for the discrete model, and
//! Kolmogorov-Smirnov statistics. None of this sits on the sampling fast
//! path; it exists to certify the fast path.

use serde::Serialize;

use crate::dist::Density;
use crate::error::{Error, Result};
use crate::models::{DiscreteModel, TppModel};

/// Dense-grid estimate of the optimal rejection constant.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub constant: f64,
    pub grid_points_used: usize,
    pub max_ratio_location: f64,
}

/// Maximum of the raw density ratio f_T / f_P over a dense geometric grid on
/// `span`. Ratios are formed in log space so extreme tails cannot overflow.
/// A lower bound on the true constant over the span, converging from below
/// as `points` grows.
pub fn mc_rejection_const(
    proposal: &dyn Density,
    target: &dyn Density,
    span: (f64, f64),
    points: usize,
) -> Result<OracleReport> {
    let (lo, hi) = span;
    if points < 1000 {
        return Err(Error::InvalidConfig(format!(
            "dense grid needs at least 1000 points, got {points}"
        )));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad span ({lo}, {hi})")));
    }
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let mut best = f64::NEG_INFINITY;
    let mut best_x = lo;
    for i in 0..points {
        let x = if i + 1 == points {
            hi
        } else {
            lo * ratio.powi(i as i32)
        };
        let log_ratio = target.ln_pdf(x)? - proposal.ln_pdf(x)?;
        if log_ratio > best {
            best = log_ratio;
            best_x = x;
        }
    }
    Ok(OracleReport {
        constant: best.exp(),
        grid_points_used: points,
        max_ratio_location: best_x,
    })
}

/// One enumerated trajectory of the discrete model: (bin, mark) per event.
pub type DiscreteSequence = Vec<(usize, usize)>;

/// Exhaustively enumerates every length-`horizon` trajectory of a discrete
/// model with its exact chained probability. Guarded to stay at toy scale.
pub fn brute_force_sequence_dist(
    model: &DiscreteModel,
    horizon: usize,
) -> Result<Vec<(DiscreteSequence, f64)>> {
    let outcomes = model.bin_count() * model.mark_count();
    if outcomes > 16 {
        return Err(Error::BudgetExceeded(format!(
            "{outcomes} outcomes per step exceeds the enumeration budget of 16"
        )));
    }
    if horizon > 4 {
        return Err(Error::BudgetExceeded(format!(
            "horizon {horizon} exceeds the enumeration budget of 4"
        )));
    }

    let mut table: Vec<(DiscreteSequence, f64, usize)> = vec![(Vec::new(), 1.0, 0)];
    for _ in 0..horizon {
        let mut next = Vec::with_capacity(table.len() * outcomes);
        for (prefix, prob, state) in &table {
            for bin in 0..model.bin_count() {
                for mark in 0..model.mark_count() {
                    let p = model.step_prob(*state, bin, mark);
                    let mut seq = prefix.clone();
                    seq.push((bin, mark));
                    next.push((seq, prob * p, model.state_of(bin, mark)));
                }
            }
        }
        table = next;
    }
    Ok(table.into_iter().map(|(seq, p, _)| (seq, p)).collect())
}

/// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut worst = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        let hi = ((i + 1) as f64 / n - c).abs();
        let lo = (c - i as f64 / n).abs();
        worst = worst.max(hi).max(lo);
    }
    worst
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut worst = 0.0_f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// Critical value of the two-sided KS test at significance `alpha` for the
/// two-sample case with sizes (n, m); asymptotic Kolmogorov approximation.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
