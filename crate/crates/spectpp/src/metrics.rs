//! Sample-quality metrics: per-event KL between empirical mark
//! distributions, per-event MMD on inter-arrival times, the model
//! log-likelihood ratio, and the average accepted step.

use crate::error::{Error, Result};
use crate::models::{EventSeq, TppModel};
use crate::speculative::RoundStats;

/// Sampled continuations grouped per starting history: `groups[b][s]` is the
/// s-th sampled continuation of history b, every sample in a group sharing
/// the same length.
#[derive(Debug, Clone)]
pub struct SampleSet {
    histories: Vec<EventSeq>,
    groups: Vec<Vec<Vec<(f64, usize)>>>,
}

impl SampleSet {
    pub fn new(histories: Vec<EventSeq>, groups: Vec<Vec<Vec<(f64, usize)>>>) -> Result<Self> {
        if histories.len() != groups.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} histories but {} groups",
                histories.len(),
                groups.len()
            )));
        }
        for (b, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::ShapeMismatch(format!("group {b} has no samples")));
            }
            let len = group[0].len();
            if group.iter().any(|s| s.len() != len) {
                return Err(Error::ShapeMismatch(format!(
                    "group {b} is ragged; all samples must share a length"
                )));
            }
        }
        Ok(SampleSet { histories, groups })
    }

    /// Builds a set from full sequences that extend the given histories.
    pub fn from_continuations(
        histories: Vec<EventSeq>,
        samples: Vec<Vec<EventSeq>>,
    ) -> Result<Self> {
        let groups = histories
            .iter()
            .zip(&samples)
            .map(|(h, group)| group.iter().map(|s| s.events_from(h.len())).collect())
            .collect();
        SampleSet::new(histories, groups)
    }

    pub fn batch_count(&self) -> usize {
        self.groups.len()
    }

    pub fn sample_count(&self, batch: usize) -> usize {
        self.groups[batch].len()
    }

    pub fn event_count(&self, batch: usize) -> usize {
        self.groups[batch][0].len()
    }

    pub fn histories(&self) -> &[EventSeq] {
        &self.histories
    }

    pub fn groups(&self) -> &[Vec<Vec<(f64, usize)>>] {
        &self.groups
    }

    fn check_compatible(&self, other: &SampleSet) -> Result<()> {
        if self.batch_count() != other.batch_count() {
            return Err(Error::ShapeMismatch(format!(
                "batch counts differ: {} vs {}",
                self.batch_count(),
                other.batch_count()
            )));
        }
        for b in 0..self.batch_count() {
            if self.event_count(b) != other.event_count(b) {
                return Err(Error::ShapeMismatch(format!(
                    "group {b} lengths differ: {} vs {}",
                    self.event_count(b),
                    other.event_count(b)
                )));
            }
        }
        Ok(())
    }
}

/// Per-event KL divergence between empirical mark distributions.
///
/// Frequencies at each (history, position) cell are smoothed by `epsilon`
/// per category before normalization; the spec-recommended smoothing is
/// 1 / (2 S) with S samples.
pub fn kl_per_event(a: &SampleSet, b: &SampleSet, mark_count: usize, epsilon: f64) -> Result<f64> {
    a.check_compatible(b)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(
            "smoothing epsilon must be positive".into(),
        ));
    }
    let mut total = 0.0;
    let mut cells = 0usize;
    for bidx in 0..a.batch_count() {
        let len = a.event_count(bidx);
        for l in 0..len {
            let p = smoothed_marks(&a.groups[bidx], l, mark_count, epsilon);
            let q = smoothed_marks(&b.groups[bidx], l, mark_count, epsilon);
            let mut kl = 0.0;
            for d in 0..mark_count {
                if p[d] > 0.0 {
                    kl += p[d] * (p[d] / q[d]).ln();
                }
            }
            total += kl;
            cells += 1;
        }
    }
    Ok(total / cells.max(1) as f64)
}

fn smoothed_marks(group: &[Vec<(f64, usize)>], l: usize, d: usize, eps: f64) -> Vec<f64> {
    let mut counts = vec![eps; d];
    for sample in group {
        counts[sample[l].1] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// Per-event MMD on inter-arrival times with a Gaussian kernel.
///
/// At each (history, position) cell the unbiased U-statistic
/// E k(x,x') + E k(y,y') - 2 E k(x,y) is estimated over the samples, with
/// the kernel bandwidth set by the median absolute pairwise difference of
/// the pooled values (floored at 1e-12 for degenerate cells).
pub fn mmd_per_event(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    a.check_compatible(b)?;
    let mut total = 0.0;
    let mut cells = 0usize;
    for bidx in 0..a.batch_count() {
        let len = a.event_count(bidx);
        for l in 0..len {
            let xs: Vec<f64> = a.groups[bidx].iter().map(|s| s[l].0).collect();
            let ys: Vec<f64> = b.groups[bidx].iter().map(|s| s[l].0).collect();
            total += mmd_cell(&xs, &ys);
            cells += 1;
        }
    }
    Ok(total / cells.max(1) as f64)
}

fn median_abs_pairwise(pooled: &[f64]) -> f64 {
    let mut diffs = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
    for i in 0..pooled.len() {
        for j in (i + 1)..pooled.len() {
            diffs.push((pooled[i] - pooled[j]).abs());
        }
    }
    diffs.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    let n = diffs.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        diffs[n / 2]
    } else {
        0.5 * (diffs[n / 2 - 1] + diffs[n / 2])
    }
}

fn mmd_cell(xs: &[f64], ys: &[f64]) -> f64 {
    let mut pooled = xs.to_vec();
    pooled.extend_from_slice(ys);
    let bandwidth = median_abs_pairwise(&pooled).max(1e-12);
    let k = |u: f64, v: f64| (-(u - v) * (u - v) / (2.0 * bandwidth * bandwidth)).exp();

    let n = xs.len() as f64;
    let m = ys.len() as f64;
    let mut kxx = 0.0;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if i != j {
                kxx += k(xs[i], xs[j]);
            }
        }
    }
    let mut kyy = 0.0;
    for i in 0..ys.len() {
        for j in 0..ys.len() {
            if i != j {
                kyy += k(ys[i], ys[j]);
            }
        }
    }
    let mut kxy = 0.0;
    for &x in xs {
        for &y in ys {
            kxy += k(x, y);
        }
    }
    kxx / (n * (n - 1.0)) + kyy / (m * (m - 1.0)) - 2.0 * kxy / (n * m)
}

/// Mean per-event log-density difference, both sets scored by the same
/// model along their own chained histories. Zero density anywhere flags the
/// whole value as negative infinity.
pub fn llr<M: TppModel>(model: &M, new: &SampleSet, old: &SampleSet) -> Result<f64> {
    new.check_compatible(old)?;
    Ok(mean_log_density(model, new) - mean_log_density(model, old))
}

fn mean_log_density<M: TppModel>(model: &M, set: &SampleSet) -> f64 {
    let mut total = 0.0;
    let mut events = 0usize;
    for (history, group) in set.histories.iter().zip(&set.groups) {
        let start = model.encode(history);
        for sample in group {
            let mut state = start.clone();
            for &(tau, mark) in sample {
                match model.decode(&state).ln_density(tau, mark) {
                    Ok(v) if v.is_finite() => total += v,
                    _ => return f64::NEG_INFINITY,
                }
                state = model.advance(&state, tau, mark);
                events += 1;
            }
        }
    }
    total / events.max(1) as f64
}

/// Mean accepted run length across rounds.
pub fn avg_accepted_step(rounds: &[RoundStats]) -> f64 {
    if rounds.is_empty() {
        return 0.0;
    }
    rounds
        .iter()
        .map(|r| r.accepted_run_length as f64)
        .sum::<f64>()
        / rounds.len() as f64
}

/// Accepted proposals over evaluated proposals, where a round evaluates its
/// kept prefix plus the rejection that stopped it.
pub fn acceptance_rate(rounds: &[RoundStats]) -> f64 {
    let mut accepted = 0usize;
    let mut evaluated = 0usize;
    for r in rounds {
        accepted += r.accepted_run_length;
        evaluated += r.accepted_run_length + usize::from(r.accepted_run_length < r.proposals_made);
    }
    if evaluated == 0 {
        0.0
    } else {
        accepted as f64 / evaluated as f64
    }
}
