//! Small closed-form models used to validate the samplers: a history-free
//! renewal model, the alternating-mark model, and a finite discrete model
//! whose full sequence distribution can be enumerated.

use std::sync::Arc;

use crate::categorical::CategoricalDist;
use crate::dist::ContinuousDensity;
use crate::error::{Error, Result};
use crate::models::{NextEventDist, QuantizedTimeDist, TimeDist, TppModel};

/// TPP with a stationary next-event law unaffected by past events.
#[derive(Debug, Clone)]
pub struct RenewalModel {
    next: NextEventDist,
}

impl RenewalModel {
    pub fn new(next: NextEventDist) -> Self {
        RenewalModel { next }
    }

    pub fn exponential(rate: f64, marks: CategoricalDist) -> Result<Self> {
        Ok(RenewalModel {
            next: NextEventDist {
                time: TimeDist::Catalog(ContinuousDensity::exponential(rate)?),
                marks,
            },
        })
    }
}

impl TppModel for RenewalModel {
    type State = ();

    fn mark_count(&self) -> usize {
        self.next.marks.dim()
    }

    fn initial_state(&self) {}

    fn advance(&self, _state: &(), _dt: f64, _mark: usize) {}

    fn decode(&self, _state: &()) -> NextEventDist {
        self.next.clone()
    }
}

/// Two-mark model where the next mark flips the previous one with
/// probability `flip_prob` (1.0 reproduces the strict alternation of taxi
/// pickup/dropoff data). The time density is shared and history-free.
#[derive(Debug, Clone)]
pub struct AlternatingModel {
    time: ContinuousDensity,
    flip_prob: f64,
}

impl AlternatingModel {
    pub fn new(time: ContinuousDensity, flip_prob: f64) -> Result<Self> {
        if !(flip_prob > 0.0 && flip_prob <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "flip probability must lie in (0, 1], got {flip_prob}"
            )));
        }
        Ok(AlternatingModel { time, flip_prob })
    }

    /// Deterministic mark flip.
    pub fn strict(time: ContinuousDensity) -> Self {
        AlternatingModel {
            time,
            flip_prob: 1.0,
        }
    }
}

impl TppModel for AlternatingModel {
    type State = Option<usize>;

    fn mark_count(&self) -> usize {
        2
    }

    fn initial_state(&self) -> Option<usize> {
        None
    }

    fn advance(&self, _state: &Option<usize>, _dt: f64, mark: usize) -> Option<usize> {
        Some(mark)
    }

    fn decode(&self, state: &Option<usize>) -> NextEventDist {
        let marks = match state {
            None => CategoricalDist::uniform(2),
            Some(last) => {
                let mut probs = vec![0.0; 2];
                probs[1 - last] = self.flip_prob;
                probs[*last] = 1.0 - self.flip_prob;
                CategoricalDist::new(probs).expect("valid flip probabilities")
            }
        };
        NextEventDist {
            time: TimeDist::Catalog(self.time.clone()),
            marks,
        }
    }
}

/// Finite model over B time bins and D marks with explicit per-state
/// transition rows. The state is the previous (bin, mark) pair (row 0 is the
/// start state), so the full sequence distribution is enumerable.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    bins: Arc<Vec<f64>>,
    mark_count: usize,
    time_rows: Vec<CategoricalDist>,
    mark_rows: Vec<CategoricalDist>,
}

impl DiscreteModel {
    pub fn new(
        bins: Vec<f64>,
        mark_count: usize,
        time_rows: Vec<CategoricalDist>,
        mark_rows: Vec<CategoricalDist>,
    ) -> Result<Self> {
        let b = bins.len();
        if b == 0 || mark_count == 0 {
            return Err(Error::InvalidParameter(
                "need at least one bin and one mark".into(),
            ));
        }
        if bins.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter(
                "bin values must be positive".into(),
            ));
        }
        let states = 1 + b * mark_count;
        if time_rows.len() != states || mark_rows.len() != states {
            return Err(Error::ShapeMismatch(format!(
                "expected {states} transition rows, got {} time and {} mark rows",
                time_rows.len(),
                mark_rows.len()
            )));
        }
        if time_rows.iter().any(|r| r.dim() != b) {
            return Err(Error::ShapeMismatch("time rows must span the bins".into()));
        }
        if mark_rows.iter().any(|r| r.dim() != mark_count) {
            return Err(Error::ShapeMismatch("mark rows must span the marks".into()));
        }
        Ok(DiscreteModel {
            bins: Arc::new(bins),
            mark_count,
            time_rows,
            mark_rows,
        })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn state_count(&self) -> usize {
        1 + self.bins.len() * self.mark_count
    }

    pub fn state_of(&self, bin: usize, mark: usize) -> usize {
        1 + bin * self.mark_count + mark
    }

    pub fn bin_of(&self, tau: f64) -> Option<usize> {
        self.bins
            .iter()
            .position(|&b| (b - tau).abs() <= 1e-9 * b.max(1.0))
    }

    /// Exact probability of one step (bin, mark) out of a state.
    pub fn step_prob(&self, state: usize, bin: usize, mark: usize) -> f64 {
        self.time_rows[state].prob(bin) * self.mark_rows[state].prob(mark)
    }
}

impl TppModel for DiscreteModel {
    type State = usize;

    fn mark_count(&self) -> usize {
        self.mark_count
    }

    fn initial_state(&self) -> usize {
        0
    }

    fn advance(&self, _state: &usize, dt: f64, mark: usize) -> usize {
        let bin = self.bin_of(dt).unwrap_or_else(|| {
            // Nearest bin for externally produced sequences.
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (i, &b) in self.bins.iter().enumerate() {
                if (b - dt).abs() < best_d {
                    best_d = (b - dt).abs();
                    best = i;
                }
            }
            best
        });
        self.state_of(bin, mark)
    }

    fn decode(&self, state: &usize) -> NextEventDist {
        NextEventDist {
            time: TimeDist::Quantized(
                QuantizedTimeDist::new(self.bins.clone(), self.time_rows[*state].clone())
                    .expect("validated at construction"),
            ),
            marks: self.mark_rows[*state].clone(),
        }
    }
}

/// The validation trio.
pub struct ToyModels {
    pub renewal: RenewalModel,
    pub alternating: AlternatingModel,
    pub discrete: DiscreteModel,
}

/// Fixed instances used across the test-suite: an exponential renewal model,
/// the strict alternating model, and a 3-bin x 2-mark discrete model with
/// everywhere-positive transition rows.
pub fn toy_models() -> ToyModels {
    let renewal =
        RenewalModel::exponential(1.0, CategoricalDist::new(vec![0.6, 0.4]).unwrap()).unwrap();

    let alternating = AlternatingModel::strict(ContinuousDensity::log_normal(0.0, 0.6).unwrap());

    let discrete = default_discrete_model();

    ToyModels {
        renewal,
        alternating,
        discrete,
    }
}

/// 3 bins x 2 marks; rows vary by state but keep every outcome's probability
/// at 0.08 or more so empirical checks have healthy expected counts.
pub fn default_discrete_model() -> DiscreteModel {
    let bins = vec![0.5, 1.0, 2.0];
    let mark_count = 2;
    let states = 1 + bins.len() * mark_count;
    let mut time_rows = Vec::with_capacity(states);
    let mut mark_rows = Vec::with_capacity(states);
    // Start state.
    time_rows.push(CategoricalDist::new(vec![0.4, 0.35, 0.25]).unwrap());
    mark_rows.push(CategoricalDist::new(vec![0.55, 0.45]).unwrap());
    for bin in 0..bins.len() {
        for mark in 0..mark_count {
            let t = match bin {
                0 => vec![0.5, 0.3, 0.2],
                1 => vec![0.25, 0.5, 0.25],
                _ => vec![0.2, 0.3, 0.5],
            };
            let m = if mark == 0 {
                vec![0.35, 0.65]
            } else {
                vec![0.6, 0.4]
            };
            time_rows.push(CategoricalDist::new(t).unwrap());
            mark_rows.push(CategoricalDist::new(m).unwrap());
        }
    }
    DiscreteModel::new(bins, mark_count, time_rows, mark_rows).unwrap()
}
