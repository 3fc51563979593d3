//! Jump process data generator and the windowed-rate model that tracks it.
//!
//! The data behaves as a renewal process most of the time but jumps between
//! regimes of different constant intensity: regime durations are drawn first,
//! then a rate per regime, then homogeneous events inside each regime,
//! stitched together.

use rand::Rng;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::categorical::CategoricalDist;
use crate::dist::ContinuousDensity;
use crate::error::{Error, Result};
use crate::models::{EventSeq, NextEventDist, TimeDist, TppModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpProcessConfig {
    pub n_regimes: usize,
    /// Mean of the exponential regime-duration law.
    pub mean_duration: f64,
    /// Uniform range the per-regime rate is drawn from.
    pub rate_range: (f64, f64),
}

impl Default for JumpProcessConfig {
    fn default() -> Self {
        JumpProcessConfig {
            n_regimes: 20,
            mean_duration: 50.0,
            rate_range: (0.1, 5.0),
        }
    }
}

impl JumpProcessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_regimes == 0 {
            return Err(Error::InvalidConfig("need at least one regime".into()));
        }
        if !(self.mean_duration > 0.0) {
            return Err(Error::InvalidConfig(
                "mean duration must be positive".into(),
            ));
        }
        let (lo, hi) = self.rate_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidConfig(format!(
                "rate range must satisfy 0 < lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// Generated sequence plus the latent (duration, rate) pairs per regime.
#[derive(Debug, Clone)]
pub struct JumpProcess {
    pub seq: EventSeq,
    pub regimes: Vec<(f64, f64)>,
}

/// Stitches homogeneous segments: duration, then rate, then events.
pub fn generate_jump_process(
    cfg: &JumpProcessConfig,
    rng: &mut dyn RngCore,
) -> Result<JumpProcess> {
    cfg.validate()?;
    let duration = ContinuousDensity::exponential(1.0 / cfg.mean_duration)?;
    let mut seq = EventSeq::empty();
    let mut regimes = Vec::with_capacity(cfg.n_regimes);
    let mut t = 0.0;
    for _ in 0..cfg.n_regimes {
        use crate::dist::Density;
        let dur = duration.sample(rng);
        let rate = rng.random_range(cfg.rate_range.0..cfg.rate_range.1);
        let end = t + dur;
        let mut cursor = t;
        loop {
            let gap = -rng.random::<f64>().max(f64::MIN_POSITIVE).ln() / rate;
            cursor += gap;
            if cursor > end {
                break;
            }
            seq.times.push(cursor);
            seq.marks.push(0);
        }
        regimes.push((dur, rate));
        t = end;
    }
    seq.t_end = t;
    Ok(JumpProcess { seq, regimes })
}

/// Single-mark model whose decoded time law is exponential at the empirical
/// rate of the last `window` inter-event times. Stands in for the trained
/// rate-tracking encoder on jump-process data; within a regime the estimate
/// settles and proposals match targets closely.
#[derive(Debug, Clone)]
pub struct WindowedRateModel {
    pub window: usize,
    pub fallback_rate: f64,
}

impl WindowedRateModel {
    pub fn new(window: usize, fallback_rate: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        if !(fallback_rate > 0.0) {
            return Err(Error::InvalidParameter(
                "fallback rate must be positive".into(),
            ));
        }
        Ok(WindowedRateModel {
            window,
            fallback_rate,
        })
    }

    fn rate(&self, state: &[f64]) -> f64 {
        if state.is_empty() {
            return self.fallback_rate;
        }
        let total: f64 = state.iter().sum();
        if total <= 0.0 {
            self.fallback_rate
        } else {
            state.len() as f64 / total
        }
    }
}

impl TppModel for WindowedRateModel {
    /// Ring of the most recent inter-event times, oldest first.
    type State = Vec<f64>;

    fn mark_count(&self) -> usize {
        1
    }

    fn initial_state(&self) -> Vec<f64> {
        Vec::new()
    }

    fn advance(&self, state: &Vec<f64>, dt: f64, _mark: usize) -> Vec<f64> {
        let mut next = state.clone();
        next.push(dt);
        if next.len() > self.window {
            next.remove(0);
        }
        next
    }

    fn decode(&self, state: &Vec<f64>) -> NextEventDist {
        let rate = self.rate(state);
        NextEventDist {
            time: TimeDist::Catalog(ContinuousDensity::exponential(rate).expect("positive rate")),
            marks: CategoricalDist::new(vec![1.0]).unwrap(),
        }
    }
}
