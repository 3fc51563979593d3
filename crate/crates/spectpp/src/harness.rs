//! Experiment harness behind the `spectpp` binary: dataset generation,
//! sampling runs (conventional and speculative), metric reports, and the
//! Hawkes sweep. Everything is a plain function over config structs so tests
//! drive it without a shell.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::categorical::CategoricalDist;
use crate::dist::ContinuousDensity;
use crate::error::{Error, Result};
use crate::metrics::{self, SampleSet};
use crate::models::toys::default_discrete_model;
use crate::models::{
    generate_jump_process, make_hawkes_config, AlternatingModel, DiscreteModel, EventSeq,
    HawkesModel, HawkesParams, JumpProcessConfig, RenewalModel, TppModel, WindowedRateModel,
};
use crate::speculative::{
    autoregressive_run, batched_speculative_sample, derive_seed, CallCounts, ComponentTimings,
    SamplingRun, SpecConfig,
};

/// A model named by what builds it; random Hawkes configs are resolved into
/// concrete parameters before anything is written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Hawkes {
        params: HawkesParams,
    },
    HawkesRandom {
        dim: usize,
        sparsity: f64,
        a_max: f64,
        decay: f64,
    },
    Renewal {
        rate: f64,
        mark_probs: Vec<f64>,
    },
    Alternating {
        flip_prob: f64,
        location: f64,
        scale: f64,
    },
    Discrete,
    Jump {
        window: usize,
    },
}

/// Runtime-dispatched model instance.
pub enum AnyModel {
    Hawkes(HawkesModel),
    Renewal(RenewalModel),
    Alternating(AlternatingModel),
    Discrete(DiscreteModel),
    Jump(WindowedRateModel),
}

macro_rules! with_model {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            AnyModel::Hawkes($m) => $body,
            AnyModel::Renewal($m) => $body,
            AnyModel::Alternating($m) => $body,
            AnyModel::Discrete($m) => $body,
            AnyModel::Jump($m) => $body,
        }
    };
}

impl ModelSpec {
    /// Resolves random specs into concrete ones; `seed` feeds the draw.
    pub fn resolve(&self, seed: u64) -> Result<ModelSpec> {
        match self {
            ModelSpec::HawkesRandom {
                dim,
                sparsity,
                a_max,
                decay,
            } => {
                let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, 0xC0, 0, 0));
                let cfg = make_hawkes_config(*dim, *sparsity, *a_max, *decay, &mut rng)?;
                Ok(ModelSpec::Hawkes { params: cfg.params })
            }
            other => Ok(other.clone()),
        }
    }

    pub fn build(&self) -> Result<AnyModel> {
        Ok(match self {
            ModelSpec::Hawkes { params } => {
                let params = HawkesParams::new(
                    params.baselines.clone(),
                    params.adjacency.clone(),
                    params.decay,
                )?;
                AnyModel::Hawkes(HawkesModel::new(params))
            }
            ModelSpec::HawkesRandom { .. } => {
                return Err(Error::InvalidConfig(
                    "random hawkes spec must be resolved before building".into(),
                ))
            }
            ModelSpec::Renewal { rate, mark_probs } => AnyModel::Renewal(
                RenewalModel::exponential(*rate, CategoricalDist::new(mark_probs.clone())?)?,
            ),
            ModelSpec::Alternating {
                flip_prob,
                location,
                scale,
            } => AnyModel::Alternating(AlternatingModel::new(
                ContinuousDensity::log_normal(*location, *scale)?,
                *flip_prob,
            )?),
            ModelSpec::Discrete => AnyModel::Discrete(default_discrete_model()),
            ModelSpec::Jump { window } => AnyModel::Jump(WindowedRateModel::new(*window, 1.0)?),
        })
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    write_text(path, &out)
}

fn read_jsonl(path: &Path) -> Result<Vec<EventSeq>> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<EventSeq>(l).map_err(Error::from))
        .collect()
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub model: ModelSpec,
    pub n_sequences: usize,
    /// Horizon for intensity-driven generation (hawkes).
    pub t_end: f64,
    /// Event count for decode-driven generation (renewal/alternating/discrete).
    pub n_events: usize,
    pub jump: JumpProcessConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            model: ModelSpec::Discrete,
            n_sequences: 10,
            t_end: 100.0,
            n_events: 100,
            jump: JumpProcessConfig::default(),
            seed: 0,
            out_dir: PathBuf::from("data"),
        }
    }
}

#[derive(Debug)]
pub struct GenerateOutput {
    pub data_path: PathBuf,
    pub model_path: PathBuf,
    pub sequences: Vec<EventSeq>,
}

/// Writes `data.jsonl` (one sequence per line) and `model.json` (the
/// resolved generating spec).
pub fn cmd_generate(cfg: &GenerateConfig) -> Result<GenerateOutput> {
    if cfg.n_sequences == 0 {
        return Err(Error::InvalidConfig("n_sequences must be positive".into()));
    }
    let resolved = cfg.model.resolve(cfg.seed)?;
    let model = resolved.build()?;
    let mut sequences = Vec::with_capacity(cfg.n_sequences);
    for i in 0..cfg.n_sequences {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0xD0, i as u64, 0));
        let seq = match &model {
            AnyModel::Hawkes(m) => m.thinning_sample(&EventSeq::empty(), cfg.t_end, &mut rng),
            AnyModel::Jump(_) => generate_jump_process(&cfg.jump, &mut rng)?.seq,
            other => with_model!(other, m => {
                autoregressive_run(m, &EventSeq::empty(), cfg.n_events, &mut rng).seq
            }),
        };
        sequences.push(seq);
    }

    let data_path = cfg.out_dir.join("data.jsonl");
    let model_path = cfg.out_dir.join("model.json");
    write_jsonl(&data_path, &sequences)?;
    write_text(
        &model_path,
        &format!("{}\n", serde_json::to_string_pretty(&resolved)?),
    )?;
    Ok(GenerateOutput {
        data_path,
        model_path,
        sequences,
    })
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Autoregressive,
    Speculative,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleConfig {
    pub model: ModelSpec,
    /// Starting histories; empty history when absent.
    pub data: Option<PathBuf>,
    /// Cap on how many histories to read from `data`.
    pub n_histories: usize,
    /// Samples per history and variant.
    pub n_samples: usize,
    pub n_events: usize,
    pub mode: SamplingMode,
    pub spec: SpecConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            model: ModelSpec::Discrete,
            data: None,
            n_histories: 1,
            n_samples: 10,
            n_events: 100,
            mode: SamplingMode::Both,
            spec: SpecConfig::default(),
            seed: 0,
            out_dir: PathBuf::from("run"),
        }
    }
}

/// Aggregate of one sampling variant, serialized into `stats.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingReport {
    pub variant: String,
    pub n_sequences: usize,
    pub n_events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_constant_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mark_constant_mean: Option<f64>,
    pub unbounded_mark_slots: u64,
    pub inexact_rounds: u64,
    pub rounds: u64,
    pub timings_ms: ComponentTimings,
    pub calls: CallCounts,
}

fn finite_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        if v.is_finite() {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

/// Aggregates a set of speculative runs into a report.
pub fn speculative_report(runs: &[SamplingRun], n_events: usize) -> SamplingReport {
    let rounds: Vec<_> = runs.iter().flat_map(|r| r.rounds.iter()).collect();
    let mut timings = ComponentTimings::default();
    let mut calls = CallCounts::default();
    for r in runs {
        timings.accumulate(&r.timings);
        calls.advance_calls += r.calls.advance_calls;
        calls.decode_calls += r.calls.decode_calls;
    }
    let all: Vec<crate::speculative::RoundStats> = rounds.iter().map(|r| (*r).clone()).collect();
    SamplingReport {
        variant: "speculative".into(),
        n_sequences: runs.len(),
        n_events,
        avg_step: Some(metrics::avg_accepted_step(&all)),
        acceptance_rate: Some(metrics::acceptance_rate(&all)),
        time_constant_mean: finite_mean(
            rounds.iter().flat_map(|r| r.time_constants.iter().copied()),
        ),
        mark_constant_mean: finite_mean(
            rounds.iter().flat_map(|r| r.mark_constants.iter().copied()),
        ),
        unbounded_mark_slots: rounds
            .iter()
            .flat_map(|r| r.mark_constants.iter())
            .filter(|m| m.is_infinite())
            .count() as u64,
        inexact_rounds: rounds.iter().filter(|r| r.inexact).count() as u64,
        rounds: rounds.len() as u64,
        timings_ms: timings,
        calls,
    }
}

fn autoregressive_report(runs: &[SamplingRun], n_events: usize) -> SamplingReport {
    let mut timings = ComponentTimings::default();
    let mut calls = CallCounts::default();
    for r in runs {
        timings.accumulate(&r.timings);
        calls.advance_calls += r.calls.advance_calls;
        calls.decode_calls += r.calls.decode_calls;
    }
    SamplingReport {
        variant: "autoregressive".into(),
        n_sequences: runs.len(),
        n_events,
        avg_step: None,
        acceptance_rate: None,
        time_constant_mean: None,
        mark_constant_mean: None,
        unbounded_mark_slots: 0,
        inexact_rounds: 0,
        rounds: 0,
        timings_ms: timings,
        calls,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub model: ModelSpec,
    pub spec: SpecConfig,
    pub mode: SamplingMode,
    pub n_histories: usize,
    pub n_samples: usize,
    pub n_events: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct SampleOutput {
    pub manifest: RunManifest,
    pub reports: Vec<SamplingReport>,
    pub out_dir: PathBuf,
}

/// Runs the requested variants and writes `histories.jsonl`, per-variant
/// sample files, `stats.json`, and `manifest.json`.
pub fn cmd_sample(cfg: &SampleConfig) -> Result<SampleOutput> {
    cfg.spec.validate()?;
    if cfg.n_samples == 0 {
        return Err(Error::InvalidConfig("n_samples must be positive".into()));
    }
    let resolved = cfg.model.resolve(cfg.seed)?;
    let model = resolved.build()?;

    let histories: Vec<EventSeq> = match &cfg.data {
        Some(path) => {
            let all = read_jsonl(path)?;
            if all.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "no sequences in {}",
                    path.display()
                )));
            }
            all.into_iter().take(cfg.n_histories.max(1)).collect()
        }
        None => vec![EventSeq::empty(); cfg.n_histories.max(1)],
    };

    let mut reports = Vec::new();
    let mut auto_seqs: Vec<EventSeq> = Vec::new();
    let mut spec_seqs: Vec<EventSeq> = Vec::new();

    if matches!(cfg.mode, SamplingMode::Autoregressive | SamplingMode::Both) {
        let mut runs = Vec::new();
        for (b, h) in histories.iter().enumerate() {
            for s in 0..cfg.n_samples {
                let mut rng =
                    ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0xA1, b as u64, s as u64));
                runs.push(
                    with_model!(&model, m => autoregressive_run(m, h, cfg.n_events, &mut rng)),
                );
            }
        }
        auto_seqs = runs.iter().map(|r| r.seq.clone()).collect();
        reports.push(autoregressive_report(&runs, cfg.n_events));
    }

    if matches!(cfg.mode, SamplingMode::Speculative | SamplingMode::Both) {
        let mut runs = Vec::new();
        for (b, h) in histories.iter().enumerate() {
            for s in 0..cfg.n_samples {
                let run_cfg = SpecConfig {
                    seed: derive_seed(cfg.seed, 0xA2, b as u64, s as u64),
                    ..cfg.spec.clone()
                };
                let mut batch = with_model!(&model, m => batched_speculative_sample(m, std::slice::from_ref(h), cfg.n_events, &run_cfg))?;
                runs.push(batch.remove(0));
            }
        }
        spec_seqs = runs.iter().map(|r| r.seq.clone()).collect();
        reports.push(speculative_report(&runs, cfg.n_events));
    }

    write_jsonl(&cfg.out_dir.join("histories.jsonl"), &histories)?;
    if !auto_seqs.is_empty() {
        write_jsonl(&cfg.out_dir.join("autoregressive.jsonl"), &auto_seqs)?;
    }
    if !spec_seqs.is_empty() {
        write_jsonl(&cfg.out_dir.join("speculative.jsonl"), &spec_seqs)?;
    }
    let manifest = RunManifest {
        model: resolved,
        spec: cfg.spec.clone(),
        mode: cfg.mode,
        n_histories: histories.len(),
        n_samples: cfg.n_samples,
        n_events: cfg.n_events,
        seed: cfg.seed,
    };
    write_text(
        &cfg.out_dir.join("stats.json"),
        &format!("{}\n", serde_json::to_string_pretty(&reports)?),
    )?;
    write_text(
        &cfg.out_dir.join("manifest.json"),
        &format!("{}\n", serde_json::to_string_pretty(&manifest)?),
    )?;
    Ok(SampleOutput {
        manifest,
        reports,
        out_dir: cfg.out_dir.clone(),
    })
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub variant: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportSummary {
    pub rows: Vec<MetricRow>,
    pub sampling: Vec<SamplingReport>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn group_sets(
    histories: &[EventSeq],
    seqs: &[EventSeq],
    n_samples: usize,
) -> Result<Vec<SampleSet>> {
    histories
        .iter()
        .enumerate()
        .map(|(b, h)| {
            let group = seqs[b * n_samples..(b + 1) * n_samples].to_vec();
            SampleSet::from_continuations(vec![h.clone()], vec![group])
        })
        .collect()
}

/// Per-history metric values of one comparison, reduced to mean and std.
fn metric_rows<M: TppModel>(
    model: &M,
    mark_count: usize,
    n_samples: usize,
    variant: &str,
    a_sets: &[SampleSet],
    b_sets: &[SampleSet],
) -> Result<Vec<MetricRow>> {
    let eps = 1.0 / (2.0 * n_samples as f64);
    let mut kl = Vec::new();
    let mut mmd = Vec::new();
    let mut llr = Vec::new();
    for (a, b) in a_sets.iter().zip(b_sets) {
        kl.push(metrics::kl_per_event(a, b, mark_count, eps)?);
        mmd.push(metrics::mmd_per_event(a, b)?);
        llr.push(metrics::llr(model, a, b)?);
    }
    Ok(vec![
        row("mmd", variant, &mmd),
        row("kl", variant, &kl),
        row("llr", variant, &llr),
    ])
}

fn row(metric: &str, variant: &str, values: &[f64]) -> MetricRow {
    let (mean, std) = mean_std(values);
    MetricRow {
        metric: metric.into(),
        variant: variant.into(),
        mean,
        std,
    }
}

fn rows_to_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from("metric,variant,mean,std\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            r.metric, r.variant, r.mean, r.std
        ));
    }
    out
}

fn timings_csv(reports: &[SamplingReport]) -> String {
    let mut out =
        String::from("variant,encode_ms,decode_ms,sample_ms,rejection_const_ms,total_ms\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3},{:.3},{:.3}\n",
            r.variant,
            r.timings_ms.encode_ms,
            r.timings_ms.decode_ms,
            r.timings_ms.sample_ms,
            r.timings_ms.rejection_const_ms,
            r.timings_ms.total_ms(),
        ));
    }
    out
}

/// Reads a `cmd_sample` output directory (mode `both`), compares speculative
/// against conventional samples plus the conventional split baseline, and
/// writes `metrics.csv`, `timings.csv`, and `summary.json`.
pub fn cmd_report(dir: &Path) -> Result<ReportSummary> {
    let manifest: RunManifest = serde_json::from_str(&read_text(&dir.join("manifest.json"))?)?;
    let reports: Vec<SamplingReport> = serde_json::from_str(&read_text(&dir.join("stats.json"))?)?;
    let histories = read_jsonl(&dir.join("histories.jsonl"))?;
    let auto = read_jsonl(&dir.join("autoregressive.jsonl"))?;
    let spec = read_jsonl(&dir.join("speculative.jsonl"))?;

    let n = manifest.n_samples;
    if n < 4 {
        return Err(Error::InvalidConfig(
            "report needs at least 4 samples per history for the split baseline".into(),
        ));
    }
    let model = manifest.model.build()?;
    let mark_count = with_model!(&model, m => m.mark_count());

    // Split the conventional samples into halves for the baseline.
    let half = n / 2;
    let mut base_a = Vec::new();
    let mut base_b = Vec::new();
    for b in 0..histories.len() {
        let group = &auto[b * n..(b + 1) * n];
        base_a.push(SampleSet::from_continuations(
            vec![histories[b].clone()],
            vec![group[..half].to_vec()],
        )?);
        base_b.push(SampleSet::from_continuations(
            vec![histories[b].clone()],
            vec![group[half..].to_vec()],
        )?);
    }
    let auto_sets = group_sets(&histories, &auto, n)?;
    let spec_sets = group_sets(&histories, &spec, n)?;

    let variant = format!("top{}", manifest.spec.top_k);
    let mut rows =
        with_model!(&model, m => metric_rows(m, mark_count, half, "true", &base_a, &base_b))?;
    rows.extend(
        with_model!(&model, m => metric_rows(m, mark_count, n, &variant, &spec_sets, &auto_sets))?,
    );

    if let Some(spec_report) = reports.iter().find(|r| r.variant == "speculative") {
        rows.push(MetricRow {
            metric: "step".into(),
            variant: variant.clone(),
            mean: spec_report.avg_step.unwrap_or(f64::NAN),
            std: 0.0,
        });
    }

    write_text(&dir.join("metrics.csv"), &rows_to_csv(&rows))?;
    write_text(&dir.join("timings.csv"), &timings_csv(&reports))?;
    let summary = ReportSummary {
        rows,
        sampling: reports,
    };
    write_text(
        &dir.join("summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary)?),
    )?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub sparsities: Vec<f64>,
    pub a_maxes: Vec<f64>,
    pub decays: Vec<f64>,
    pub n_seeds: u64,
    pub warmup_events: usize,
    pub n_events: usize,
    pub step: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dims: vec![10, 40],
            sparsities: vec![0.1, 0.5, 0.9],
            a_maxes: vec![0.05, 0.5],
            decays: vec![0.2, 1.0],
            n_seeds: 5,
            warmup_events: 50,
            n_events: 100,
            step: 5,
            seed: 0,
            out_dir: PathBuf::from("sweep"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub dim: usize,
    pub sparsity: f64,
    pub a_max: f64,
    pub decay: f64,
    pub seed: u64,
    pub avg_step: f64,
    pub acceptance_rate: f64,
    pub rescaled: bool,
}

fn sweep_one(
    cfg: &SweepConfig,
    dim: usize,
    sparsity: f64,
    a_max: f64,
    decay: f64,
    seed: u64,
) -> Result<SweepRow> {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0xE0, seed, dim as u64));
    let drawn = make_hawkes_config(dim, sparsity, a_max, decay, &mut rng)?;
    let model = HawkesModel::new(drawn.params);
    let mut warm_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0xE1, seed, dim as u64));
    let history = crate::speculative::autoregressive_sample(
        &model,
        &EventSeq::empty(),
        cfg.warmup_events,
        &mut warm_rng,
    );
    // The sweep follows the synthetic-experiment setup: rejection constants
    // come from the true intensities via the exact joint scheme.
    let (_, rounds) = crate::models::hawkes::hawkes_joint_speculative_sample(
        &model,
        &history,
        cfg.n_events,
        cfg.step,
        1,
        derive_seed(cfg.seed, 0xE2, seed, dim as u64),
    )?;
    Ok(SweepRow {
        dim,
        sparsity,
        a_max,
        decay,
        seed,
        avg_step: metrics::avg_accepted_step(&rounds),
        acceptance_rate: metrics::acceptance_rate(&rounds),
        rescaled: drawn.rescaled,
    })
}

/// Runs the full configuration grid in a worker pool (deterministic output
/// order) and writes raw rows plus per-configuration aggregates.
pub fn cmd_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut jobs = Vec::new();
    for &dim in &cfg.dims {
        for &sparsity in &cfg.sparsities {
            for &a_max in &cfg.a_maxes {
                for &decay in &cfg.decays {
                    for seed in 0..cfg.n_seeds {
                        jobs.push((dim, sparsity, a_max, decay, seed));
                    }
                }
            }
        }
    }
    if jobs.is_empty() {
        return Err(Error::InvalidConfig("sweep axes must be non-empty".into()));
    }
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(dim, sp, am, dc, seed)| sweep_one(cfg, dim, sp, am, dc, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut raw = String::from("dim,sparsity,a_max,decay,seed,avg_step,acceptance_rate,rescaled\n");
    for r in &rows {
        raw.push_str(&format!(
            "{},{},{},{},{},{:.6},{:.6},{}\n",
            r.dim, r.sparsity, r.a_max, r.decay, r.seed, r.avg_step, r.acceptance_rate, r.rescaled
        ));
    }
    write_text(&cfg.out_dir.join("sweep.csv"), &raw)?;

    // Per-configuration aggregate over seeds, plot-ready for the step heatmap.
    let mut agg = String::from("dim,sparsity,a_max,decay,avg_step_mean\n");
    for &dim in &cfg.dims {
        for &sparsity in &cfg.sparsities {
            for &a_max in &cfg.a_maxes {
                for &decay in &cfg.decays {
                    let vals: Vec<f64> = rows
                        .iter()
                        .filter(|r| {
                            r.dim == dim
                                && r.sparsity == sparsity
                                && r.a_max == a_max
                                && r.decay == decay
                        })
                        .map(|r| r.avg_step)
                        .collect();
                    let (mean, _) = mean_std(&vals);
                    agg.push_str(&format!("{dim},{sparsity},{a_max},{decay},{mean:.6}\n"));
                }
            }
        }
    }
    write_text(&cfg.out_dir.join("sweep_agg.csv"), &agg)?;
    Ok(rows)
}
