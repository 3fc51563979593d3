//! Speculative multi-event sampling.
//!
//! Each round draws `step` proposals i.i.d. from the frozen next-event
//! distribution, advances the candidate states as a chain, decodes every
//! target distribution in one batched pass, computes a rejection-constant
//! pair per slot against the frozen proposal, flags every slot independently,
//! and keeps the prefix before the `top_k`-th flagged rejection. The state
//! rolls back to the last kept event and the proposal becomes its decoded
//! target, which is why the first slot of the next round is auto-accepted.
//!
//! Stopping at the first rejection reproduces exact ancestral sampling: an
//! accepted slot is a rejection-sampling draw from its own target, and a
//! rejected slot is discarded wholesale and replaced next round by a direct
//! draw from that same target.

use std::time::Instant;

use rand::Rng;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::{exact_const, truncated_const, CategoricalDist};
use crate::envelope::{self, RejectionConstants};
use crate::error::{Error, Result};
use crate::models::{hawkes_time_rejection_const, EventSeq, NextEventDist, TimeDist, TppModel};

/// Knobs of a speculative run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecConfig {
    /// Proposals per round (the speculative step l).
    pub step: usize,
    /// Stop at the k-th flagged rejection; 1 is exact.
    pub top_k: usize,
    /// Categorical truncation budget for mark (and quantized-time) constants.
    pub delta: f64,
    /// Percentile coverage of envelope grids.
    pub alpha: f64,
    /// Geometric grid points of envelope grids.
    pub grid_n: usize,
    pub seed: u64,
    /// Parallel within-round verification (identical output either way).
    pub parallel: bool,
    /// Force envelope grids even where a closed-form constant exists.
    pub envelope_time_constants: bool,
}

impl Default for SpecConfig {
    fn default() -> Self {
        SpecConfig {
            step: 5,
            top_k: 1,
            delta: 0.0,
            alpha: 0.995,
            grid_n: 512,
            seed: 0,
            parallel: false,
            envelope_time_constants: false,
        }
    }
}

impl SpecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step < 1 {
            return Err(Error::InvalidConfig("step must be at least 1".into()));
        }
        if self.top_k < 1 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if !(self.alpha > 0.5 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0.5, 1), got {}",
                self.alpha
            )));
        }
        if self.grid_n < 2 {
            return Err(Error::InvalidConfig("grid_n must be at least 2".into()));
        }
        Ok(())
    }
}

/// Wall time per pipeline component, in milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ComponentTimings {
    /// State advancement (the encoder side).
    pub encode_ms: f64,
    /// Target-distribution decoding.
    pub decode_ms: f64,
    /// Proposal event sampling.
    pub sample_ms: f64,
    pub rejection_const_ms: f64,
}

impl ComponentTimings {
    pub fn accumulate(&mut self, other: &ComponentTimings) {
        self.encode_ms += other.encode_ms;
        self.decode_ms += other.decode_ms;
        self.sample_ms += other.sample_ms;
        self.rejection_const_ms += other.rejection_const_ms;
    }

    pub fn total_ms(&self) -> f64 {
        self.encode_ms + self.decode_ms + self.sample_ms + self.rejection_const_ms
    }
}

/// Invocations of the batched model entry points. A speculative round costs
/// one advance call and one decode call regardless of the step size; the
/// conventional sampler pays one of each per event.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CallCounts {
    pub advance_calls: u64,
    pub decode_calls: u64,
}

impl CallCounts {
    pub fn total(&self) -> u64 {
        self.advance_calls + self.decode_calls
    }
}

/// Per-round bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct RoundStats {
    pub proposals_made: usize,
    pub accepted_run_length: usize,
    /// 0-based slot of the first flagged rejection, if any.
    pub first_rejection: Option<usize>,
    pub time_constants: Vec<f64>,
    pub mark_constants: Vec<f64>,
    /// Largest target mass lost to envelope domain restriction this round.
    pub truncated_time_mass: f64,
    /// Set when delta-truncation or domain restriction makes the round
    /// approximate rather than exact.
    pub inexact: bool,
    pub timings: ComponentTimings,
}

/// A finished sampling run: the extended sequence plus diagnostics.
#[derive(Debug, Clone)]
pub struct SamplingRun {
    pub seq: EventSeq,
    pub rounds: Vec<RoundStats>,
    pub timings: ComponentTimings,
    pub calls: CallCounts,
}

impl SamplingRun {
    /// Events appended beyond the starting history.
    pub fn new_events(&self, history_len: usize) -> Vec<(f64, usize)> {
        self.seq.events_from(history_len)
    }
}

/// Rejection constant for a pair of decoded time distributions, along with
/// the target mass outside the certified span.
///
/// Closed forms are used where the pair admits one (exponential pairs,
/// Hawkes total-intensity pairs, categorical bins); everything else goes
/// through the piecewise-linear envelope at the configured (alpha, grid_n).
/// An unbounded categorical ratio yields an infinite constant, which the
/// acceptance step turns into a sure rejection.
pub fn time_rejection_const(
    proposal: &TimeDist,
    target: &TimeDist,
    cfg: &SpecConfig,
) -> Result<(f64, f64)> {
    use crate::dist::ContinuousDensity;
    match (proposal, target) {
        (TimeDist::Quantized(p), TimeDist::Quantized(t)) => {
            if p.bins != t.bins {
                return Err(Error::ShapeMismatch(
                    "time bins differ between proposal and target".into(),
                ));
            }
            match truncated_const(&t.probs, &p.probs, cfg.delta) {
                Ok(r) => Ok((r.constant, 0.0)),
                Err(Error::UnboundedRatio(_)) => Ok((f64::INFINITY, 0.0)),
                Err(e) => Err(e),
            }
        }
        (TimeDist::Quantized(_), _) | (_, TimeDist::Quantized(_)) => Err(Error::ShapeMismatch(
            "cannot pair quantized and continuous time distributions".into(),
        )),
        (TimeDist::HawkesTotal(p), TimeDist::HawkesTotal(t)) if !cfg.envelope_time_constants => {
            hawkes_time_rejection_const(p, t).map(|m| (m, 0.0))
        }
        (
            TimeDist::Catalog(ContinuousDensity::Exponential { rate: rp }),
            TimeDist::Catalog(ContinuousDensity::Exponential { rate: rt }),
        ) if !cfg.envelope_time_constants => {
            let m = envelope::analytic_exponential_const(*rp, *rt, cfg.alpha);
            let mass = if rp > rt { 1.0 - cfg.alpha } else { 0.0 };
            Ok((m, mass))
        }
        (p, t) => {
            let pd = p.as_density().expect("continuous by construction");
            let td = t.as_density().expect("continuous by construction");
            let grid = envelope::build_grid(pd, td, cfg.alpha, cfg.grid_n)?;
            let m = envelope::rejection_const_on_grid(pd, td, &grid)?;
            Ok((m, envelope::truncated_mass(td, &grid)))
        }
    }
}

/// The (time, mark) constant pair for one proposal/target pair of decoded
/// next-event distributions, with the truncated target mass of the time
/// side. Infinite constants mean the proposal cannot dominate that factor
/// and the event is surely rejected.
pub fn rejection_constants(
    proposal: &NextEventDist,
    target: &NextEventDist,
    cfg: &SpecConfig,
) -> Result<RejectionConstants> {
    let (time_constant, truncated_mass) = time_rejection_const(&proposal.time, &target.time, cfg)?;
    let mark_constant = mark_rejection_const(&proposal.marks, &target.marks, cfg.delta)?;
    Ok(RejectionConstants {
        time_constant,
        mark_constant,
        truncated_mass,
    })
}

fn mark_rejection_const(
    proposal: &CategoricalDist,
    target: &CategoricalDist,
    delta: f64,
) -> Result<f64> {
    // delta = 0 reduces to the exact constant; skip the sort.
    let result = if delta == 0.0 {
        exact_const(target, proposal)
    } else {
        truncated_const(target, proposal, delta).map(|r| r.constant)
    };
    match result {
        Ok(m) => Ok(m),
        Err(Error::UnboundedRatio(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Clamped per-factor acceptance probability of a proposed event under the
/// factorized decoder. An infinite constant forces the factor to zero; a
/// zero proposal density at its own sample signals corrupted inputs.
pub fn acceptance_probability(
    target: &NextEventDist,
    proposal: &NextEventDist,
    m_time: f64,
    m_mark: f64,
    tau: f64,
    mark: usize,
) -> Result<f64> {
    let pp_time = proposal.time.density_at(tau)?;
    if !(pp_time > 0.0) {
        return Err(Error::Domain(format!(
            "proposal time density vanishes at its own sample tau={tau}"
        )));
    }
    let time_factor = if m_time.is_infinite() {
        0.0
    } else {
        let pt_time = target.time.density_at(tau)?;
        (pt_time / (m_time * pp_time)).min(1.0)
    };

    let pp_mark = proposal.marks.prob(mark);
    if !(pp_mark > 0.0) {
        return Err(Error::Domain(format!(
            "proposal mark probability vanishes at its own sample mark={mark}"
        )));
    }
    let mark_factor = if m_mark.is_infinite() {
        0.0
    } else {
        (target.marks.prob(mark) / (m_mark * pp_mark)).min(1.0)
    };

    Ok(time_factor * mark_factor)
}

/// Mixes a master seed with run coordinates into an independent stream
/// seed; used by the harness to give every (history, sample) pair its own
/// reproducible randomness.
pub fn derive_seed(seed: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(tag));
    h = splitmix64(h ^ splitmix64(a));
    splitmix64(h ^ splitmix64(b))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Deterministic per-(sequence, round, purpose) stream. Parallel work inside
/// a round consumes no randomness, so execution order cannot matter.
fn stream_rng(seed: u64, seq_idx: u64, round: u64, purpose: u64) -> ChaCha12Rng {
    let mut h = splitmix64(seed ^ 0xA0761D6478BD642F);
    h = splitmix64(h ^ splitmix64(seq_idx));
    h = splitmix64(h ^ splitmix64(round));
    h = splitmix64(h ^ purpose);
    ChaCha12Rng::seed_from_u64(h)
}

struct Runner<'m, M: TppModel> {
    model: &'m M,
    cfg: SpecConfig,
    seq_idx: u64,
    round: u64,
    state: M::State,
    proposal: NextEventDist,
    produced: Vec<(f64, usize)>,
    rounds: Vec<RoundStats>,
    timings: ComponentTimings,
    calls: CallCounts,
}

impl<'m, M: TppModel> Runner<'m, M> {
    fn new(model: &'m M, history: &EventSeq, cfg: &SpecConfig, seq_idx: u64) -> Self {
        let start = Instant::now();
        let state = model.encode(history);
        let mut timings = ComponentTimings::default();
        timings.encode_ms += ms_since(start);
        let mut calls = CallCounts::default();
        calls.advance_calls += 1;

        let start = Instant::now();
        let proposal = model.decode(&state);
        timings.decode_ms += ms_since(start);
        calls.decode_calls += 1;

        Runner {
            model,
            cfg: cfg.clone(),
            seq_idx,
            round: 0,
            state,
            proposal,
            produced: Vec::new(),
            rounds: Vec::new(),
            timings,
            calls,
        }
    }

    fn run_round(&mut self) -> Result<()> {
        let l = self.cfg.step;
        let round = self.round;
        self.round += 1;

        // Fixed-order randomness: per slot a time-select uniform, a
        // time-value uniform, and a mark uniform from the proposal stream,
        // then all acceptance uniforms; every draw happens before any
        // verification work, so parallel execution cannot reorder them.
        let mut proposal_rng = stream_rng(self.cfg.seed, self.seq_idx, round, 0);
        let mut accept_rng = stream_rng(self.cfg.seed, self.seq_idx, round, 1);
        let draws: Vec<(f64, f64, f64)> = (0..l)
            .map(|_| {
                (
                    proposal_rng.random::<f64>(),
                    proposal_rng.random::<f64>(),
                    proposal_rng.random::<f64>(),
                )
            })
            .collect();
        let accept_us: Vec<f64> = (0..l).map(|_| accept_rng.random::<f64>()).collect();

        let start = Instant::now();
        let proposal = &self.proposal;
        let events: Vec<(f64, usize)> = draws
            .iter()
            .map(|&(u_sel, u_val, u_mark)| {
                let tau = proposal
                    .time
                    .sample_from_uniforms(u_sel, u_val)
                    .expect("uniforms are clamped into the open unit interval");
                (tau, proposal.marks.sample_u(u_mark))
            })
            .collect();
        let sample_ms = ms_since(start);

        // Candidate states form a chain; one batched advance call.
        let start = Instant::now();
        let mut states = Vec::with_capacity(l);
        let mut cursor = self.state.clone();
        for &(tau, mark) in &events {
            cursor = self.model.advance(&cursor, tau, mark);
            states.push(cursor.clone());
        }
        let encode_ms = ms_since(start);
        self.calls.advance_calls += 1;

        // One batched decode call for all candidate states.
        let start = Instant::now();
        let model = self.model;
        let targets: Vec<NextEventDist> = self.map_slots(l, |j| model.decode(&states[j]));
        let decode_ms = ms_since(start);
        self.calls.decode_calls += 1;

        // Constants and acceptance probabilities per slot, each pairing the
        // frozen proposal with that slot's target. Envelope grids are heavy
        // enough to parallelize; analytic constants are not.
        let start = Instant::now();
        let cfg = &self.cfg;
        let slot_const = |j: usize| -> Result<(f64, f64, f64, f64)> {
            // Slot 0 verifies the proposal against itself; every closed-form
            // constant is exactly one there, so only envelope grids (whose
            // slack is part of the contract) need the full computation.
            if j == 0 && !cfg.envelope_time_constants {
                return Ok((1.0, 1.0, 0.0, 1.0));
            }
            let target = if j == 0 { proposal } else { &targets[j - 1] };
            let constants = rejection_constants(proposal, target, cfg)
                .map_err(|e| e.with_round(round as usize))?;
            let (tau, mark) = events[j];
            let p_acc = acceptance_probability(
                target,
                proposal,
                constants.time_constant,
                constants.mark_constant,
                tau,
                mark,
            )?;
            Ok((
                constants.time_constant,
                constants.mark_constant,
                constants.truncated_mass,
                p_acc,
            ))
        };
        let slot_results: Vec<Result<(f64, f64, f64, f64)>> = if cfg.envelope_time_constants {
            self.map_slots(l, slot_const)
        } else {
            (0..l).map(slot_const).collect()
        };
        let rejection_const_ms = ms_since(start);

        let mut time_constants = Vec::with_capacity(l);
        let mut mark_constants = Vec::with_capacity(l);
        let mut trunc_mass = 0.0_f64;
        let mut rejected = Vec::with_capacity(l);
        for (j, r) in slot_results.into_iter().enumerate() {
            let (m_time, m_mark, trunc, p_acc) = r?;
            time_constants.push(m_time);
            mark_constants.push(m_mark);
            trunc_mass = trunc_mass.max(trunc);
            rejected.push(accept_us[j] >= p_acc);
        }

        // Keep everything before the top_k-th flagged rejection.
        let mut kept = l;
        let mut seen = 0;
        let mut first_rejection = None;
        for (j, &rej) in rejected.iter().enumerate() {
            if rej {
                if first_rejection.is_none() {
                    first_rejection = Some(j);
                }
                seen += 1;
                if seen == self.cfg.top_k {
                    kept = j;
                    break;
                }
            }
        }

        self.produced.extend_from_slice(&events[..kept]);
        if kept > 0 {
            self.state = states[kept - 1].clone();
            self.proposal = targets[kept - 1].clone();
        }

        let timings = ComponentTimings {
            encode_ms,
            decode_ms,
            sample_ms,
            rejection_const_ms,
        };
        self.timings.accumulate(&timings);
        self.rounds.push(RoundStats {
            proposals_made: l,
            accepted_run_length: kept,
            first_rejection,
            time_constants,
            mark_constants,
            truncated_time_mass: trunc_mass,
            inexact: self.cfg.delta > 0.0 || trunc_mass > 0.0,
            timings,
        });
        Ok(())
    }

    fn map_slots<T: Send>(&self, n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
        if self.cfg.parallel && n > 1 {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }

    fn finish(self, history: &EventSeq, n_events: usize) -> SamplingRun {
        let mut seq = history.clone();
        for &(tau, mark) in self.produced.iter().take(n_events) {
            seq.push(tau, mark);
        }
        SamplingRun {
            seq,
            rounds: self.rounds,
            timings: self.timings,
            calls: self.calls,
        }
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn positive_time_sample(time: &TimeDist, rng: &mut dyn RngCore) -> f64 {
    loop {
        let tau = time.sample(rng);
        if tau > 0.0 {
            return tau;
        }
    }
}

fn round_budget(n_events: usize) -> u64 {
    1000 + 200 * n_events as u64
}

/// Extends `history` by `n_events` speculative events.
pub fn speculative_sample<M: TppModel>(
    model: &M,
    history: &EventSeq,
    n_events: usize,
    cfg: &SpecConfig,
) -> Result<SamplingRun> {
    cfg.validate()?;
    let mut runner = Runner::new(model, history, cfg, 0);
    let budget = round_budget(n_events);
    while runner.produced.len() < n_events {
        runner.run_round()?;
        if runner.round > budget {
            return Err(Error::BudgetExceeded(format!(
                "no acceptance progress after {budget} rounds"
            )));
        }
    }
    Ok(runner.finish(history, n_events))
}

/// Lockstep batched variant: every sequence keeps generating until the
/// shortest one is complete, then overshoot is trimmed to exactly
/// `n_events`. A batch of one reproduces `speculative_sample` bit for bit.
pub fn batched_speculative_sample<M: TppModel>(
    model: &M,
    histories: &[EventSeq],
    n_events: usize,
    cfg: &SpecConfig,
) -> Result<Vec<SamplingRun>> {
    cfg.validate()?;
    if histories.is_empty() {
        return Err(Error::InvalidConfig("batch must be non-empty".into()));
    }
    let mut runners: Vec<Runner<M>> = histories
        .iter()
        .enumerate()
        .map(|(i, h)| Runner::new(model, h, cfg, i as u64))
        .collect();
    let budget = round_budget(n_events);
    while runners.iter().any(|r| r.produced.len() < n_events) {
        if cfg.parallel {
            runners
                .par_iter_mut()
                .map(|r| r.run_round())
                .collect::<Result<Vec<_>>>()?;
        } else {
            for r in &mut runners {
                r.run_round()?;
            }
        }
        if runners[0].round > budget {
            return Err(Error::BudgetExceeded(format!(
                "no acceptance progress after {budget} rounds"
            )));
        }
    }
    Ok(runners
        .into_iter()
        .zip(histories)
        .map(|(r, h)| r.finish(h, n_events))
        .collect())
}

/// Conventional one-event-at-a-time sampling with the same instrumentation
/// as the speculative path.
pub fn autoregressive_run<M: TppModel, R: Rng>(
    model: &M,
    history: &EventSeq,
    n_events: usize,
    rng: &mut R,
) -> SamplingRun {
    let mut timings = ComponentTimings::default();
    let mut calls = CallCounts::default();

    let start = Instant::now();
    let mut state = model.encode(history);
    timings.encode_ms += ms_since(start);
    calls.advance_calls += 1;

    let mut seq = history.clone();
    for _ in 0..n_events {
        let start = Instant::now();
        let dist = model.decode(&state);
        timings.decode_ms += ms_since(start);
        calls.decode_calls += 1;

        let start = Instant::now();
        let tau = positive_time_sample(&dist.time, rng);
        let mark = dist.marks.sample(rng);
        timings.sample_ms += ms_since(start);

        let start = Instant::now();
        state = model.advance(&state, tau, mark);
        timings.encode_ms += ms_since(start);
        calls.advance_calls += 1;

        seq.push(tau, mark);
    }
    SamplingRun {
        seq,
        rounds: Vec::new(),
        timings,
        calls,
    }
}

/// Ground-truth sequential sampling; one decode per event.
pub fn autoregressive_sample<M: TppModel, R: Rng>(
    model: &M,
    history: &EventSeq,
    n_events: usize,
    rng: &mut R,
) -> EventSeq {
    autoregressive_run(model, history, n_events, rng).seq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ContinuousDensity;
    use crate::models::toys::default_discrete_model;
    use crate::models::{toy_models, AlternatingModel, HawkesModel, HawkesParams, RenewalModel};

    fn hawkes_1d() -> HawkesModel {
        HawkesModel::new(HawkesParams::new(vec![0.8], vec![vec![0.45]], 1.0).unwrap())
    }

    fn hawkes_2d() -> HawkesModel {
        HawkesModel::new(
            HawkesParams::new(vec![0.4, 0.3], vec![vec![0.25, 0.15], vec![0.1, 0.3]], 1.2).unwrap(),
        )
    }

    #[test]
    fn config_validation() {
        assert!(SpecConfig::default().validate().is_ok());
        assert!(SpecConfig {
            step: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SpecConfig {
            top_k: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SpecConfig {
            delta: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SpecConfig {
            alpha: 0.4,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_events_leaves_history_unchanged() {
        let model = hawkes_1d();
        let history = EventSeq::new(vec![0.5, 1.0], vec![0, 0], 1.0).unwrap();
        let run = speculative_sample(&model, &history, 0, &SpecConfig::default()).unwrap();
        assert_eq!(run.seq, history);

        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let seq = autoregressive_sample(&model, &history, 0, &mut rng);
        assert_eq!(seq, history);
    }

    #[test]
    fn renewal_model_accepts_every_proposal() {
        let toys = toy_models();
        let cfg = SpecConfig {
            step: 5,
            seed: 3,
            ..Default::default()
        };
        let run = speculative_sample(&toys.renewal, &EventSeq::empty(), 60, &cfg).unwrap();
        for r in &run.rounds {
            assert_eq!(r.accepted_run_length, 5);
            assert_eq!(r.first_rejection, None);
            for m in r.time_constants.iter().chain(&r.mark_constants) {
                assert!((m - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(run.rounds.len(), 12);
        assert_eq!(run.seq.len(), 60);
    }

    #[test]
    fn strict_alternating_accepts_exactly_one_per_round() {
        let toys = toy_models();
        let cfg = SpecConfig {
            step: 4,
            seed: 5,
            ..Default::default()
        };
        let run = speculative_sample(&toys.alternating, &EventSeq::empty(), 40, &cfg).unwrap();
        // First round has no mark history: slot 0 auto-accepted, slot 1
        // pairs a uniform proposal against a one-hot target and may pass.
        for r in run.rounds.iter().skip(1) {
            assert_eq!(r.accepted_run_length, 1, "mark flip must reject slot 1");
            assert!(r.mark_constants[1].is_infinite());
        }
        // Marks alternate in the output.
        for w in run.seq.marks.windows(2) {
            assert_eq!(w[1], 1 - w[0]);
        }
    }

    #[test]
    fn first_slot_of_each_round_is_auto_accepted() {
        let model = hawkes_2d();
        let cfg = SpecConfig {
            step: 6,
            seed: 7,
            ..Default::default()
        };
        let run = speculative_sample(&model, &EventSeq::empty(), 300, &cfg).unwrap();
        for r in &run.rounds {
            assert!(r.accepted_run_length >= 1);
            assert!((r.time_constants[0] - 1.0).abs() < 1e-9);
            assert!((r.mark_constants[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn determinism_across_parallelism() {
        let model = hawkes_2d();
        let history = EventSeq::new(vec![0.3, 0.7, 1.4], vec![0, 1, 0], 1.4).unwrap();
        let serial = SpecConfig {
            step: 5,
            seed: 11,
            parallel: false,
            ..Default::default()
        };
        let parallel = SpecConfig {
            parallel: true,
            ..serial.clone()
        };
        let a = speculative_sample(&model, &history, 120, &serial).unwrap();
        let b = speculative_sample(&model, &history, 120, &parallel).unwrap();
        assert_eq!(a.seq, b.seq);
        let c = speculative_sample(&model, &history, 120, &serial).unwrap();
        assert_eq!(a.seq, c.seq);
    }

    #[test]
    fn batch_of_one_matches_single_run() {
        let model = hawkes_1d();
        let history = EventSeq::empty();
        let cfg = SpecConfig {
            step: 4,
            seed: 13,
            ..Default::default()
        };
        let single = speculative_sample(&model, &history, 50, &cfg).unwrap();
        let batched =
            batched_speculative_sample(&model, std::slice::from_ref(&history), 50, &cfg).unwrap();
        assert_eq!(batched.len(), 1);
        assert_eq!(batched[0].seq, single.seq);
    }

    #[test]
    fn batched_outputs_are_trimmed_to_length() {
        let toys = toy_models();
        let histories = vec![EventSeq::empty(); 8];
        let cfg = SpecConfig {
            step: 5,
            seed: 17,
            ..Default::default()
        };
        let runs = batched_speculative_sample(&toys.renewal, &histories, 23, &cfg).unwrap();
        for run in &runs {
            assert_eq!(run.seq.len(), 23);
            // Full acceptance: ceil(23 / 5) rounds.
            assert_eq!(run.rounds.len(), 5);
        }
        assert!(batched_speculative_sample(&toys.renewal, &[], 5, &cfg).is_err());
    }

    #[test]
    fn acceptance_probability_examples() {
        let exp1 = NextEventDist {
            time: TimeDist::Catalog(ContinuousDensity::exponential(1.0).unwrap()),
            marks: CategoricalDist::new(vec![1.0]).unwrap(),
        };
        let exp2 = NextEventDist {
            time: TimeDist::Catalog(ContinuousDensity::exponential(2.0).unwrap()),
            marks: CategoricalDist::new(vec![1.0]).unwrap(),
        };

        // Identical distributions, unit constants: probability one.
        let p = acceptance_probability(&exp1, &exp1, 1.0, 1.0, 0.7, 0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);

        // Ratio attains the constant at tau -> 0.
        let p = acceptance_probability(&exp2, &exp1, 2.0, 1.0, 1e-12, 0).unwrap();
        assert!((p - 1.0).abs() < 1e-9);

        // And decays below it elsewhere: 2 e^{-2} / (2 e^{-1}) = e^{-1}.
        let p = acceptance_probability(&exp2, &exp1, 2.0, 1.0, 1.0, 0).unwrap();
        assert!((p - (-1.0_f64).exp()).abs() < 1e-12);

        // Infinite mark constant forces rejection.
        let p = acceptance_probability(&exp1, &exp1, 1.0, f64::INFINITY, 0.5, 0).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn autoregressive_renewal_times_match_analytic_cdf() {
        let rate = 1.4;
        let model = RenewalModel::exponential(rate, CategoricalDist::uniform(2)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(47);
        let seq = autoregressive_sample(&model, &EventSeq::empty(), 100_000, &mut rng);
        let taus = seq.inter_event_times();
        let d = ContinuousDensity::exponential(rate).unwrap();
        let stat = crate::oracles::ks_statistic(&taus, |x| {
            use crate::dist::Density;
            d.cdf(x)
        });
        let crit = 1.6276 / (taus.len() as f64).sqrt();
        assert!(stat < crit, "KS {stat} over 1% critical {crit}");
    }

    #[test]
    fn autoregressive_hawkes_matches_thinning() {
        // In one dimension the factorized decoder is the exact law, so the
        // decode-and-draw path must agree with thinning.
        let model = hawkes_1d();
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let thinned = model.thinning_sample(&EventSeq::empty(), 30_000.0, &mut rng);
        let auto = autoregressive_sample(&model, &EventSeq::empty(), thinned.len(), &mut rng);
        let a = thinned.inter_event_times();
        let b = auto.inter_event_times();
        let stat = crate::oracles::ks_two_sample(&a, &b);
        let crit = crate::oracles::ks_two_sample_critical(a.len(), b.len(), 0.01);
        assert!(stat < crit, "KS {stat} over {crit}");
    }

    #[test]
    fn speculative_matches_autoregressive_distribution_on_hawkes() {
        // Two-sample KS between speculative and conventional inter-event
        // times from the same model.
        let model = hawkes_1d();
        let cfg = SpecConfig {
            step: 5,
            seed: 19,
            ..Default::default()
        };
        let mut spec_taus = Vec::new();
        let mut auto_taus = Vec::new();
        for s in 0..40 {
            let cfg_s = SpecConfig {
                seed: 1000 + s,
                ..cfg.clone()
            };
            let run = speculative_sample(&model, &EventSeq::empty(), 150, &cfg_s).unwrap();
            spec_taus.extend(run.seq.inter_event_times());
            let mut rng = ChaCha12Rng::seed_from_u64(5000 + s);
            let seq = autoregressive_sample(&model, &EventSeq::empty(), 150, &mut rng);
            auto_taus.extend(seq.inter_event_times());
        }
        let stat = crate::oracles::ks_two_sample(&spec_taus, &auto_taus);
        let crit = crate::oracles::ks_two_sample_critical(spec_taus.len(), auto_taus.len(), 0.01);
        assert!(stat < crit, "KS {stat} over {crit}");
    }

    #[test]
    fn envelope_time_constants_also_sample_correctly() {
        // Force the envelope path on the Hawkes time marginal and check the
        // sampler still reproduces the conventional distribution.
        let model = hawkes_1d();
        let cfg = SpecConfig {
            step: 4,
            alpha: 0.9995,
            grid_n: 256,
            envelope_time_constants: true,
            ..Default::default()
        };
        let mut spec_taus = Vec::new();
        let mut auto_taus = Vec::new();
        for s in 0..12 {
            let cfg_s = SpecConfig {
                seed: 300 + s,
                ..cfg.clone()
            };
            let run = speculative_sample(&model, &EventSeq::empty(), 120, &cfg_s).unwrap();
            for r in &run.rounds {
                assert!(r.inexact, "domain-restricted runs are flagged inexact");
                assert!(r.time_constants[0] >= 1.0 - 1e-9);
            }
            spec_taus.extend(run.seq.inter_event_times());
            let mut rng = ChaCha12Rng::seed_from_u64(900 + s);
            auto_taus.extend(
                autoregressive_sample(&model, &EventSeq::empty(), 120, &mut rng)
                    .inter_event_times(),
            );
        }
        let stat = crate::oracles::ks_two_sample(&spec_taus, &auto_taus);
        let crit = crate::oracles::ks_two_sample_critical(spec_taus.len(), auto_taus.len(), 0.01);
        assert!(stat < crit, "KS {stat} over {crit}");
    }

    #[test]
    fn top_k_counts_rejections_not_slots() {
        let toys = toy_models();
        let cfg = SpecConfig {
            step: 6,
            top_k: 2,
            seed: 23,
            ..Default::default()
        };
        let run = speculative_sample(&toys.alternating, &EventSeq::empty(), 60, &cfg).unwrap();
        // Strict alternation rejects every slot after the first, so top-2
        // keeps exactly two events per round.
        for r in run.rounds.iter().skip(1) {
            assert_eq!(r.accepted_run_length, 2);
            assert_eq!(r.first_rejection, Some(1));
        }
    }

    #[test]
    fn call_counts_reflect_batched_rounds() {
        let toys = toy_models();
        let cfg = SpecConfig {
            step: 5,
            seed: 29,
            ..Default::default()
        };
        let run = speculative_sample(&toys.renewal, &EventSeq::empty(), 100, &cfg).unwrap();
        let rounds = run.rounds.len() as u64;
        assert_eq!(run.calls.advance_calls, rounds + 1);
        assert_eq!(run.calls.decode_calls, rounds + 1);

        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let auto = autoregressive_run(&toys.renewal, &EventSeq::empty(), 100, &mut rng);
        assert_eq!(auto.calls.advance_calls, 101);
        assert_eq!(auto.calls.decode_calls, 100);
    }

    #[test]
    fn discrete_toy_time_constants_use_categorical_path() {
        let model = default_discrete_model();
        let cfg = SpecConfig {
            step: 3,
            seed: 37,
            ..Default::default()
        };
        let run = speculative_sample(&model, &EventSeq::empty(), 30, &cfg).unwrap();
        for r in &run.rounds {
            assert!(!r.inexact, "delta=0 quantized rounds are exact");
            for m in &r.time_constants {
                assert!(m.is_finite() && *m > 0.0);
            }
        }
    }

    #[test]
    fn smoothed_alternating_accepts_occasionally() {
        let model =
            AlternatingModel::new(ContinuousDensity::exponential(1.0).unwrap(), 0.999).unwrap();
        let cfg = SpecConfig {
            step: 5,
            seed: 41,
            ..Default::default()
        };
        let run = speculative_sample(&model, &EventSeq::empty(), 400, &cfg).unwrap();
        let avg = crate::metrics::avg_accepted_step(&run.rounds);
        assert!(avg >= 1.0 && avg < 1.05, "avg step {avg}");
    }

    #[test]
    fn renewal_quantized_roundtrip() {
        // A renewal model over quantized time bins exercises the
        // categorical-vs-categorical time path end to end.
        use crate::models::QuantizedTimeDist;
        use std::sync::Arc;
        let q = QuantizedTimeDist::new(
            Arc::new(vec![0.5, 1.0, 2.0]),
            CategoricalDist::new(vec![0.25, 0.5, 0.25]).unwrap(),
        )
        .unwrap();
        let model = RenewalModel::new(NextEventDist {
            time: TimeDist::Quantized(q),
            marks: CategoricalDist::new(vec![0.7, 0.3]).unwrap(),
        });
        let cfg = SpecConfig {
            step: 4,
            seed: 43,
            ..Default::default()
        };
        let run = speculative_sample(&model, &EventSeq::empty(), 40, &cfg).unwrap();
        assert_eq!(run.seq.len(), 40);
        for r in &run.rounds {
            assert_eq!(r.accepted_run_length, 4);
        }
    }
}
