//! Generative TPP models behind a shared encoder/decoder contract:
//! multivariate Hawkes, a jump-rate model, and the renewal / alternating-mark
//! / finite discrete toys used for validation.
//!
//! A model turns a history into a state, advances the state one event at a
//! time, and decodes any state into the factorized next-event law
//! p(tau) * p(mark). Advancing is deterministic, so re-encoding a full
//! history and advancing incrementally agree.

pub mod hawkes;
pub mod jump;
pub mod toys;

pub use hawkes::{
    hawkes_time_rejection_const, make_hawkes_config, HawkesConfigResult, HawkesJointDist,
    HawkesModel, HawkesParams, HawkesTimeDensity,
};
pub use jump::{generate_jump_process, JumpProcess, JumpProcessConfig, WindowedRateModel};
pub use toys::{toy_models, AlternatingModel, DiscreteModel, RenewalModel, ToyModels};

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::categorical::CategoricalDist;
use crate::dist::{ContinuousDensity, Density, MixtureDensity};
use crate::error::{Error, Result};

/// A realization of a marked TPP: strictly increasing arrival times with
/// integer marks, observed on (0, t_end].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeq {
    pub times: Vec<f64>,
    pub marks: Vec<usize>,
    pub t_end: f64,
}

impl EventSeq {
    pub fn new(times: Vec<f64>, marks: Vec<usize>, t_end: f64) -> Result<Self> {
        if times.len() != marks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} times but {} marks",
                times.len(),
                marks.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev) {
                return Err(Error::InvalidParameter(format!(
                    "times must be strictly increasing and positive, got {t} after {prev}"
                )));
            }
            prev = t;
        }
        if prev > t_end {
            return Err(Error::InvalidParameter(format!(
                "last event {prev} beyond horizon {t_end}"
            )));
        }
        Ok(EventSeq {
            times,
            marks,
            t_end,
        })
    }

    pub fn empty() -> Self {
        EventSeq {
            times: Vec::new(),
            marks: Vec::new(),
            t_end: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Appends an event `dt` after the last one, extending the horizon.
    pub fn push(&mut self, dt: f64, mark: usize) {
        debug_assert!(dt > 0.0, "inter-event times must be positive");
        let t = self.last_time() + dt;
        self.times.push(t);
        self.marks.push(mark);
        self.t_end = self.t_end.max(t);
    }

    /// Inter-event times with t_0 = 0.
    pub fn inter_event_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let dt = t - prev;
                prev = t;
                dt
            })
            .collect()
    }

    /// (dt, mark) pairs for events at positions `from..`.
    pub fn events_from(&self, from: usize) -> Vec<(f64, usize)> {
        let mut prev = if from == 0 { 0.0 } else { self.times[from - 1] };
        self.times[from..]
            .iter()
            .zip(&self.marks[from..])
            .map(|(&t, &m)| {
                let dt = t - prev;
                prev = t;
                (dt, m)
            })
            .collect()
    }

    /// Drops events past the first `n`, shrinking the horizon to the last
    /// kept event.
    pub fn truncate_events(&mut self, n: usize) {
        if n < self.times.len() {
            self.times.truncate(n);
            self.marks.truncate(n);
            self.t_end = self.last_time();
        }
    }
}

/// Time distribution over quantile-style bins: each bin is represented by a
/// positive delta-time value.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTimeDist {
    pub bins: Arc<Vec<f64>>,
    pub probs: CategoricalDist,
}

impl QuantizedTimeDist {
    pub fn new(bins: Arc<Vec<f64>>, probs: CategoricalDist) -> Result<Self> {
        if bins.len() != probs.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} bins but {} probabilities",
                bins.len(),
                probs.dim()
            )));
        }
        if bins.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidParameter(
                "bin values must be positive".into(),
            ));
        }
        Ok(QuantizedTimeDist { bins, probs })
    }

    /// Index of the bin whose value matches `tau` (within roundoff).
    pub fn bin_index(&self, tau: f64) -> Option<usize> {
        self.bins
            .iter()
            .position(|&b| (b - tau).abs() <= 1e-9 * b.max(1.0))
    }

    /// Nearest bin, for re-encoding externally produced sequences.
    pub fn nearest_bin(&self, tau: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &b) in self.bins.iter().enumerate() {
            let d = (b - tau).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// The decoder's time marginal.
#[derive(Debug, Clone)]
pub enum TimeDist {
    Catalog(ContinuousDensity),
    Mixture(MixtureDensity),
    /// Total-intensity law of an exponential-kernel Hawkes state.
    HawkesTotal(HawkesTimeDensity),
    Quantized(QuantizedTimeDist),
}

impl TimeDist {
    pub fn as_density(&self) -> Option<&dyn Density> {
        match self {
            TimeDist::Catalog(d) => Some(d),
            TimeDist::Mixture(d) => Some(d),
            TimeDist::HawkesTotal(d) => Some(d),
            TimeDist::Quantized(_) => None,
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            TimeDist::Catalog(d) => d.sample(rng),
            TimeDist::Mixture(d) => d.sample(rng),
            TimeDist::HawkesTotal(d) => d.sample(rng),
            TimeDist::Quantized(q) => q.bins[q.probs.sample(rng)],
        }
    }

    /// Inverse-CDF draw from two pre-drawn uniforms: `u_select` picks a
    /// mixture component or time bin, `u_value` maps through the quantile.
    /// Same law as `sample`, but the randomness is consumed up front.
    pub fn sample_from_uniforms(&self, u_select: f64, u_value: f64) -> Result<f64> {
        let u = u_value.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        match self {
            TimeDist::Catalog(d) => d.quantile(u),
            TimeDist::Mixture(d) => {
                let mut acc = 0.0;
                let mut chosen = d.components().len() - 1;
                for (i, w) in d.weights().iter().enumerate() {
                    acc += w;
                    if u_select < acc {
                        chosen = i;
                        break;
                    }
                }
                d.components()[chosen].quantile(u)
            }
            TimeDist::HawkesTotal(d) => d.quantile(u),
            TimeDist::Quantized(q) => Ok(q.bins[q.probs.sample_u(u_select)]),
        }
    }

    /// Density (or bin probability) at a sampled delta time.
    pub fn density_at(&self, tau: f64) -> Result<f64> {
        match self {
            TimeDist::Quantized(q) => q
                .bin_index(tau)
                .map(|i| q.probs.prob(i))
                .ok_or_else(|| Error::Domain(format!("no time bin matches tau={tau}"))),
            _ => self.as_density().unwrap().pdf(tau),
        }
    }

    pub fn ln_density_at(&self, tau: f64) -> Result<f64> {
        match self {
            TimeDist::Quantized(_) => Ok(self.density_at(tau)?.ln()),
            _ => self.as_density().unwrap().ln_pdf(tau),
        }
    }

    /// Probability of no event within `tau` of the last one.
    pub fn survival(&self, tau: f64) -> f64 {
        match self {
            TimeDist::Quantized(q) => q
                .bins
                .iter()
                .zip(q.probs.probs())
                .filter(|(&b, _)| b > tau)
                .map(|(_, &p)| p)
                .sum(),
            _ => 1.0 - self.as_density().unwrap().cdf(tau),
        }
    }
}

/// Factorized next-event law p(tau, mark | history) = p(tau) * p(mark).
#[derive(Debug, Clone)]
pub struct NextEventDist {
    pub time: TimeDist,
    pub marks: CategoricalDist,
}

impl NextEventDist {
    /// Samples a (delta time, mark) pair; time first, then mark.
    pub fn sample(&self, rng: &mut dyn RngCore) -> (f64, usize) {
        let tau = self.time.sample(rng);
        let mark = self.marks.sample(rng);
        (tau, mark)
    }

    pub fn ln_density(&self, tau: f64, mark: usize) -> Result<f64> {
        let lt = self.time.ln_density_at(tau)?;
        let pm = self.marks.prob(mark);
        Ok(lt + pm.ln())
    }
}

/// The encoder/decoder contract shared by every generative model here.
pub trait TppModel: Send + Sync {
    type State: Clone + Send + Sync;

    fn mark_count(&self) -> usize;

    fn initial_state(&self) -> Self::State;

    /// Deterministic state transition by one event.
    fn advance(&self, state: &Self::State, dt: f64, mark: usize) -> Self::State;

    /// Next-event distribution at a state.
    fn decode(&self, state: &Self::State) -> NextEventDist;

    /// Folds `advance` over a full history.
    fn encode(&self, history: &EventSeq) -> Self::State {
        let mut state = self.initial_state();
        let mut prev = 0.0;
        for (&t, &m) in history.times.iter().zip(&history.marks) {
            state = self.advance(&state, t - prev, m);
            prev = t;
        }
        state
    }

    /// Sum of per-event log densities plus the final log survival term.
    /// Returns negative infinity when any event has zero density.
    fn log_likelihood(&self, seq: &EventSeq) -> f64 {
        let mut state = self.initial_state();
        let mut prev = 0.0;
        let mut ll = 0.0;
        for (&t, &m) in seq.times.iter().zip(&seq.marks) {
            let dist = self.decode(&state);
            match dist.ln_density(t - prev, m) {
                Ok(v) if v.is_finite() => ll += v,
                _ => return f64::NEG_INFINITY,
            }
            state = self.advance(&state, t - prev, m);
            prev = t;
        }
        let tail = seq.t_end - prev;
        if tail > 0.0 {
            let s = self.decode(&state).time.survival(tail);
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ll += s.ln();
        }
        ll
    }
}
