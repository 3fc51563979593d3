//! # spectpp
//!
//! Exact speculative (parallel multi-event) sampling for autoregressive
//! temporal point processes.
//!
//! Autoregressive TPP sampling is inherently sequential: decode the
//! next-event distribution, draw one event, advance, repeat. This crate
//! implements a draft-and-verify alternative: the frozen next-event
//! distribution proposes a block of future events, the model verifies all of
//! them in one batched pass, and the prefix before the first rejection is
//! kept. Rejection constants come from closed forms where a pair admits one
//! (exponential and Hawkes total-intensity pairs, categorical marks) and
//! from piecewise-linear density envelopes on convexity-respecting grids
//! everywhere else.
//!
//! The main pieces:
//!
//! - [`dist`] — the continuous density catalog (exponential, Gamma,
//!   log-normal, Weibull, mixtures) with analytic derivatives and inflection
//!   points.
//! - [`envelope`] — piecewise-linear upper/lower bounds and the
//!   edge-maximum rejection constant.
//! - [`categorical`] — exact and delta-truncated categorical constants with
//!   total-variation accounting.
//! - [`models`] — multivariate Hawkes (thinning, exact likelihood), a jump
//!   process, and the renewal / alternating / discrete validation toys.
//! - [`speculative`] — the speculative sampling engine and its
//!   autoregressive reference.
//! - [`metrics`] — per-event KL, MMD, log-likelihood ratio, average step.
//! - [`oracles`] — dense-grid constants, brute-force sequence enumeration,
//!   KS statistics.
//! - [`harness`] — experiment configs, dataset generation, sampling runs,
//!   and report files behind the `spectpp` binary.
//!
//! ```
//! use spectpp::models::{HawkesModel, HawkesParams, EventSeq};
//! use spectpp::speculative::{speculative_sample, SpecConfig};
//!
//! let model = HawkesModel::new(
//!     HawkesParams::new(vec![0.5], vec![vec![0.4]], 1.0).unwrap(),
//! );
//! let cfg = SpecConfig { step: 5, seed: 7, ..Default::default() };
//! let run = speculative_sample(&model, &EventSeq::empty(), 100, &cfg).unwrap();
//! assert_eq!(run.seq.len(), 100);
//! let step = spectpp::metrics::avg_accepted_step(&run.rounds);
//! assert!(step > 1.0);
//! ```
//!
//! Runnable walkthroughs live in `examples/`; the `spectpp` binary wraps the
//! harness with `generate`, `sample`, `report`, and `sweep` subcommands.

pub mod categorical;
pub mod dist;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod models;
pub mod oracles;
pub mod special;
pub mod speculative;

pub use error::{Error, Result};
