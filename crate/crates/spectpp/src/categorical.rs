//! Rejection constants for categorical distributions, exact and
//! delta-truncated, with total-variation error accounting.

use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability vector over D categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalDist {
    probs: Vec<f64>,
}

impl CategoricalDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter(
                "categorical needs at least one category".into(),
            ));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter(
                "categorical probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "categorical probabilities must sum to 1, got {total}"
            )));
        }
        Ok(CategoricalDist { probs })
    }

    /// Normalizes arbitrary nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let slack = 1.0 - probs.iter().sum::<f64>();
        let last = probs.len() - 1;
        probs[last] += slack;
        CategoricalDist::new(probs)
    }

    pub fn uniform(d: usize) -> Self {
        CategoricalDist::from_weights(&vec![1.0; d]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        self.sample_u(rng.random())
    }

    /// Inverse-CDF category pick from a pre-drawn uniform.
    pub fn sample_u(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

/// Exact rejection constant max_x p_T(x) / p_P(x).
///
/// Categories with zero target mass contribute ratio 0 whatever the proposal
/// assigns them; a category with target mass but no proposal mass makes the
/// constant unbounded.
pub fn exact_const(target: &CategoricalDist, proposal: &CategoricalDist) -> Result<f64> {
    if target.dim() != proposal.dim() {
        return Err(Error::ShapeMismatch(format!(
            "target has {} categories, proposal {}",
            target.dim(),
            proposal.dim()
        )));
    }
    let mut best = 0.0_f64;
    for x in 0..target.dim() {
        let pt = target.prob(x);
        if pt == 0.0 {
            continue;
        }
        let pp = proposal.prob(x);
        if pp == 0.0 {
            return Err(Error::UnboundedRatio(format!(
                "category {x} has target mass {pt} but zero proposal mass"
            )));
        }
        best = best.max(pt / pp);
    }
    Ok(best)
}

/// Which prefix rule the truncation uses.
///
/// `StrictlyBelowDelta` excludes the maximal prefix of highest-ratio
/// categories whose cumulative target mass stays strictly below delta, which
/// keeps the excluded mass under the total-variation budget. The literal
/// `AtLeastDelta` reading stops one step later and may exclude delta or more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationRule {
    StrictlyBelowDelta,
    AtLeastDelta,
}

/// Result of delta-truncated constant computation.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedConstResult {
    pub constant: f64,
    /// Categories excluded from the constant (ratio strictly above it).
    pub excluded: Vec<usize>,
    /// Target mass of the excluded set; at most delta.
    pub tv_bound: f64,
    /// Sharper bound accounting for the partial coverage excluded
    /// categories still get through clamped acceptance.
    pub effective_tv: f64,
}

/// Delta-truncated rejection constant.
///
/// Ratios are sorted descending (ties broken by ascending category index)
/// and the highest-ratio prefix is dropped while its cumulative target mass
/// permits; the constant is the ratio of the first surviving category. With
/// delta = 0 this reduces to `exact_const`.
pub fn truncated_const(
    target: &CategoricalDist,
    proposal: &CategoricalDist,
    delta: f64,
) -> Result<TruncatedConstResult> {
    truncated_const_with_rule(target, proposal, delta, TruncationRule::StrictlyBelowDelta)
}

pub fn truncated_const_with_rule(
    target: &CategoricalDist,
    proposal: &CategoricalDist,
    delta: f64,
    rule: TruncationRule,
) -> Result<TruncatedConstResult> {
    if target.dim() != proposal.dim() {
        return Err(Error::ShapeMismatch(format!(
            "target has {} categories, proposal {}",
            target.dim(),
            proposal.dim()
        )));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }

    // Ratio per category; zero-target categories never constrain M and sort
    // to the back. Unbounded categories (p_T > 0, p_P = 0) sort to the front
    // and must end up excluded.
    let mut order: Vec<usize> = (0..target.dim()).collect();
    let ratio = |x: usize| -> f64 {
        let pt = target.prob(x);
        if pt == 0.0 {
            0.0
        } else if proposal.prob(x) == 0.0 {
            f64::INFINITY
        } else {
            pt / proposal.prob(x)
        }
    };
    order.sort_by(|&a, &b| ratio(b).partial_cmp(&ratio(a)).unwrap().then(a.cmp(&b)));

    let mut cut = 0;
    let mut cum = 0.0;
    for (i, &x) in order.iter().enumerate() {
        let next = cum + target.prob(x);
        let still_excludable = match rule {
            TruncationRule::StrictlyBelowDelta => next < delta,
            TruncationRule::AtLeastDelta => cum < delta,
        };
        if still_excludable && i + 1 < order.len() {
            cum = next;
            cut = i + 1;
        } else {
            break;
        }
    }

    let m_delta = ratio(order[cut]);
    if m_delta.is_infinite() {
        return Err(Error::UnboundedRatio(format!(
            "category {} survives truncation with target mass {} and zero proposal mass",
            order[cut],
            target.prob(order[cut])
        )));
    }

    let mut excluded: Vec<usize> = (0..target.dim()).filter(|&x| ratio(x) > m_delta).collect();
    excluded.sort_unstable();
    let tv_bound: f64 = excluded
        .iter()
        .map(|&x| target.prob(x))
        .sum::<f64>()
        .max(0.0);
    let eff = effective_tv(target, proposal, m_delta, &excluded);

    Ok(TruncatedConstResult {
        constant: m_delta,
        excluded,
        tv_bound,
        effective_tv: eff,
    })
}

/// Partial-coverage total-variation estimate: excluded categories are still
/// drawn from the proposal and accepted with clamped probability, so the
/// sampled distribution loses only the uncovered remainder of their mass.
pub fn effective_tv(
    target: &CategoricalDist,
    proposal: &CategoricalDist,
    m_delta: f64,
    excluded: &[usize],
) -> f64 {
    excluded
        .iter()
        .map(|&x| {
            let pt = target.prob(x);
            let covered = if pt == 0.0 {
                1.0
            } else {
                (m_delta * proposal.prob(x) / pt).min(1.0)
            };
            pt * (1.0 - covered)
        })
        .sum::<f64>()
        .max(0.0)
}

/// One rejection-sampling step: draws a category from the proposal and
/// accepts it with probability min(1, p_T(x) / (M p_P(x))).
pub fn rejection_sample(
    target: &CategoricalDist,
    proposal: &CategoricalDist,
    m: f64,
    rng: &mut dyn RngCore,
) -> (usize, bool) {
    debug_assert!(m > 0.0);
    let x = proposal.sample(rng);
    let accept_prob = (target.prob(x) / (m * proposal.prob(x))).min(1.0);
    let accepted = rng.random::<f64>() < accept_prob;
    (x, accepted)
}

/// Repeats `rejection_sample` until acceptance.
pub fn rejection_sample_until_accept(
    target: &CategoricalDist,
    proposal: &CategoricalDist,
    m: f64,
    rng: &mut dyn RngCore,
) -> usize {
    loop {
        let (x, ok) = rejection_sample(target, proposal, m, rng);
        if ok {
            return x;
        }
    }
}
