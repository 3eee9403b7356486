//! Training on growing graphs.
//!
//! The trainer runs per-sample SGD epochs and enlarges the training graph
//! at epoch boundaries, either on a fixed increment or adaptively when the
//! gradient norm sinks to the level of the estimated graph-vs-limit
//! gradient gap. Training stops early once the mean gradient norm falls
//! under `gamma * c + epsilon`, the point past which a larger graph is
//! needed for further provable progress.

mod grad_distance;
mod io;
mod teacher;

pub use grad_distance::{grad_distance_estimate, GradDistanceEstimate, SignalPairSource};
pub use io::{load_dataset, save_dataset};
pub use teacher::{teacher_student_dataset, SignalFamily, TeacherStudentTask};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{gnn_backward, gnn_forward, loss_and_grad, Activation, LossKind, ParamTensor};
use crate::graphon::gamma_constant;
use crate::seed;

/// How the training graph grows at epoch boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Growth {
    /// Add `delta` nodes after every epoch (`delta = 0` trains at fixed n).
    FixedIncrement { delta: usize },
    /// After each epoch, estimate the gradient distance to a `ref_n`-node
    /// reference graph over `trials` trials and double n when the distance
    /// estimate plus `epsilon` reaches the mean gradient norm.
    Adaptive { epsilon: f64, ref_n: usize, trials: usize },
}

/// Whether an epoch updates after every sample or once on the averaged
/// gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    #[default]
    PerSample,
    FullBatch,
}

/// Step size, schedule, and stopping configuration. Constructed through
/// [`TrainConfig::new`], which enforces the descent-lemma step bound
/// `eta < 1/lipschitz_estimate` up front.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub n0: usize,
    pub n_max: usize,
    pub growth: Growth,
    /// Spectral band threshold entering the stopping rule.
    pub c: f64,
    /// Stopping slack added to `gamma * c`.
    pub epsilon: f64,
    /// Caller-supplied bound on the gradient smoothness constant.
    pub lipschitz_estimate: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub loss: LossKind,
    pub batch: BatchMode,
    /// Record per-epoch wall time in the log. Off by default so logs are
    /// byte-reproducible; timing then lives only in the run manifest.
    pub record_wall_time: bool,
}

impl TrainConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eta: f64,
        epochs: usize,
        n0: usize,
        n_max: usize,
        growth: Growth,
        c: f64,
        epsilon: f64,
        lipschitz_estimate: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::config(format!("eta must be positive and finite, got {eta}")));
        }
        if !(lipschitz_estimate > 0.0 && lipschitz_estimate.is_finite()) {
            return Err(Error::config(format!(
                "lipschitz_estimate must be positive and finite, got {lipschitz_estimate}"
            )));
        }
        if eta >= 1.0 / lipschitz_estimate {
            return Err(Error::config(format!(
                "eta = {eta} violates the step bound: must be < 1/lipschitz_estimate = {}",
                1.0 / lipschitz_estimate
            )));
        }
        if epochs == 0 {
            return Err(Error::config("epochs must be >= 1"));
        }
        if n0 == 0 || n0 > n_max {
            return Err(Error::config(format!(
                "need 1 <= n0 <= n_max, got n0 {n0}, n_max {n_max}"
            )));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::config(format!("c must be in (0,1], got {c}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
        }
        if let Growth::Adaptive { epsilon: eps, ref_n, trials } = growth {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::config(format!("adaptive epsilon must be positive, got {eps}")));
            }
            if ref_n < n_max {
                return Err(Error::config(format!(
                    "adaptive ref_n = {ref_n} must be at least n_max = {n_max}"
                )));
            }
            if trials == 0 {
                return Err(Error::config("adaptive trials must be >= 1"));
            }
        }
        Ok(TrainConfig {
            eta,
            epochs,
            n0,
            n_max,
            growth,
            c,
            epsilon,
            lipschitz_estimate,
            seed,
            shuffle: true,
            loss: LossKind::default(),
            batch: BatchMode::default(),
            record_wall_time: false,
        })
    }
}

/// Activations and loss shared by every pass over a dataset.
#[derive(Debug, Clone, Copy)]
pub struct SgdOptions {
    pub eta: f64,
    pub hidden: Activation,
    pub readout: Activation,
    pub loss: LossKind,
    pub shuffle: bool,
    pub batch: BatchMode,
}

impl SgdOptions {
    pub fn from_config(cfg: &TrainConfig, hidden: Activation, readout: Activation) -> Self {
        SgdOptions {
            eta: cfg.eta,
            hidden,
            readout,
            loss: cfg.loss,
            shuffle: cfg.shuffle,
            batch: cfg.batch,
        }
    }
}

/// One training sample: an optional per-sample GSO plus input and target
/// node signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub gso: Option<DMatrix<f64>>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

/// An in-memory dataset of samples sharing feature dimensions (graph sizes
/// may differ between samples).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    f_in: usize,
    f_out: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let first =
            samples.first().ok_or_else(|| Error::shape("dataset needs at least one sample"))?;
        let (f_in, f_out) = (first.x.ncols(), first.y.ncols());
        for (idx, sample) in samples.iter().enumerate() {
            let n = sample.x.nrows();
            if sample.y.nrows() != n {
                return Err(Error::shape(format!(
                    "sample {idx}: x has {n} rows but y has {}",
                    sample.y.nrows()
                )));
            }
            if sample.x.ncols() != f_in || sample.y.ncols() != f_out {
                return Err(Error::shape(format!(
                    "sample {idx}: features ({}, {}) differ from dataset ({f_in}, {f_out})",
                    sample.x.ncols(),
                    sample.y.ncols()
                )));
            }
            if let Some(gso) = &sample.gso {
                if gso.nrows() != n || gso.ncols() != n {
                    return Err(Error::shape(format!(
                        "sample {idx}: GSO is {}x{} but the signal has {n} nodes",
                        gso.nrows(),
                        gso.ncols()
                    )));
                }
            }
        }
        Ok(Dataset { samples, f_in, f_out })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn f_in(&self) -> usize {
        self.f_in
    }

    pub fn f_out(&self) -> usize {
        self.f_out
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }
}

/// Epoch means returned by [`sgd_epoch`]: per-sample loss and gradient
/// norm averages in per-sample mode, loss average and averaged-gradient
/// norm in full-batch mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub mean_grad_norm: f64,
}

/// One pass over the dataset. Per-sample mode updates after every sample
/// in (optionally shuffled) order; full-batch mode takes a single step on
/// the averaged gradient. Non-finite losses or gradients abort with the
/// offending sample index. Deterministic per `(params, dataset, seed)`.
pub fn sgd_epoch(
    params: &mut ParamTensor,
    dataset: &Dataset,
    shared_gso: Option<&DMatrix<f64>>,
    opts: &SgdOptions,
    seed_value: u64,
) -> Result<EpochStats> {
    let m = dataset.len();
    let mut order: Vec<usize> = (0..m).collect();
    if opts.shuffle && matches!(opts.batch, BatchMode::PerSample) {
        let mut rng = seed::stream(seed_value, &[seed::tag::SHUFFLE]);
        for i in (1..m).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
    }

    let mut loss_sum = 0.0;
    let mut grad_norm_sum = 0.0;
    let mut batch_grad: Option<ParamTensor> = None;
    for &idx in &order {
        let sample = &dataset.samples[idx];
        let gso = sample.gso.as_ref().or(shared_gso).ok_or_else(|| {
            Error::config(format!("sample {idx} has no GSO and no shared GSO was given"))
        })?;
        let (yhat, cache) = gnn_forward(params, gso, &sample.x, opts.hidden, opts.readout)?;
        let (loss, d_yhat) = loss_and_grad(opts.loss, &sample.y, &yhat)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite { context: "loss".to_string(), sample_index: Some(idx) });
        }
        let grad = gnn_backward(params, &cache, gso, &d_yhat, opts.hidden, opts.readout)?;
        if !grad.has_finite_values() {
            return Err(Error::NonFinite {
                context: "gradient".to_string(),
                sample_index: Some(idx),
            });
        }
        loss_sum += loss;
        match opts.batch {
            BatchMode::PerSample => {
                grad_norm_sum += grad.frobenius_norm();
                params.add_scaled(&grad, -opts.eta)?;
            }
            BatchMode::FullBatch => match &mut batch_grad {
                None => batch_grad = Some(grad),
                Some(acc) => acc.add_scaled(&grad, 1.0)?,
            },
        }
    }

    let mf = m as f64;
    let mean_grad_norm = match opts.batch {
        BatchMode::PerSample => grad_norm_sum / mf,
        BatchMode::FullBatch => {
            let mut mean_grad = batch_grad.expect("non-empty dataset");
            mean_grad.scale(1.0 / mf);
            let norm = mean_grad.frobenius_norm();
            params.add_scaled(&mean_grad, -opts.eta)?;
            norm
        }
    };
    Ok(EpochStats { mean_loss: loss_sum / mf, mean_grad_norm })
}

/// The adaptive growth test: keep training at the current size only while
/// the estimated gradient gap plus slack stays below the gradient norm;
/// grow as soon as that fails. Non-finite inputs trigger growth rather
/// than silently continuing at the current size.
pub fn adaptive_grow_condition(estimate: f64, epsilon: f64, grad_norm: f64) -> bool {
    let gap = estimate + epsilon;
    gap >= grad_norm || gap.is_nan() || grad_norm.is_nan()
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    /// Graph size the epoch trained at.
    pub n: usize,
    pub mean_loss: f64,
    pub mean_grad_norm: f64,
    /// Present on adaptive-growth runs.
    pub grad_dist_est: Option<f64>,
    /// Present when wall-time recording is enabled.
    pub wall_time_s: Option<f64>,
}

/// Per-epoch training history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
}

impl TrainLog {
    /// CSV with header `epoch,n,mean_loss,mean_grad_norm,grad_dist_est,wall_time_s`;
    /// optional fields render as empty cells.
    pub fn write_csv(&self, writer: &mut impl std::io::Write) -> Result<()> {
        writeln!(writer, "epoch,n,mean_loss,mean_grad_norm,grad_dist_est,wall_time_s")?;
        for r in &self.records {
            let est = r.grad_dist_est.map(|v| v.to_string()).unwrap_or_default();
            let wall = r.wall_time_s.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                writer,
                "{},{},{},{},{est},{wall}",
                r.epoch, r.n, r.mean_loss, r.mean_grad_norm
            )?;
        }
        Ok(())
    }
}

/// A task that can produce fresh training data at any graph size.
pub trait GrowingTask {
    /// Fresh epoch data at graph size `n`; deterministic per `(n, seed)`.
    fn sample_epoch(&self, n: usize, seed_value: u64) -> Result<Dataset>;

    /// Gradient-distance estimate backing adaptive growth. Tasks without a
    /// graphon limit return `None`, which makes adaptive growth a config
    /// error.
    fn grad_distance(
        &self,
        _params: &ParamTensor,
        _opts: &SgdOptions,
        _n: usize,
        _ref_n: usize,
        _trials: usize,
        _seed_value: u64,
    ) -> Result<Option<GradDistanceEstimate>> {
        Ok(None)
    }
}

/// Result of a growing-graph training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ParamTensor,
    pub log: TrainLog,
    /// True when the gradient-norm stopping rule fired before the epoch
    /// budget ran out.
    pub stopped_early: bool,
}

/// Trains for up to `cfg.epochs` epochs, growing the graph between epochs
/// per `cfg.growth`, starting from `init_params`. The stopping rule
/// compares each epoch's mean gradient norm against
/// `gamma(L, F, K) * c + epsilon`.
pub fn train_growing<T: GrowingTask>(
    cfg: &TrainConfig,
    task: &T,
    init_params: ParamTensor,
    hidden: Activation,
    readout: Activation,
) -> Result<TrainOutcome> {
    let opts = SgdOptions::from_config(cfg, hidden, readout);
    let gamma = gamma_constant(
        init_params.layers(),
        init_params.hidden_width(),
        init_params.taps_per_layer(),
    )?;
    let stop_threshold = gamma * cfg.c + cfg.epsilon;

    let mut params = init_params;
    let mut log = TrainLog::default();
    let mut n = cfg.n0.min(cfg.n_max);
    let mut stopped_early = false;
    for epoch_idx in 0..cfg.epochs {
        let epoch_u64 = epoch_idx as u64;
        let dataset =
            task.sample_epoch(n, seed::derive(cfg.seed, &[seed::tag::EPOCH, epoch_u64]))?;
        let started = std::time::Instant::now();
        let stats = sgd_epoch(
            &mut params,
            &dataset,
            None,
            &opts,
            seed::derive(cfg.seed, &[seed::tag::SHUFFLE, epoch_u64]),
        )?;
        let wall = cfg.record_wall_time.then(|| started.elapsed().as_secs_f64());

        let grad_est = match cfg.growth {
            Growth::Adaptive { ref_n, trials, .. } => {
                let est = task
                    .grad_distance(
                        &params,
                        &opts,
                        n,
                        ref_n,
                        trials,
                        seed::derive(cfg.seed, &[seed::tag::TRIAL, epoch_u64]),
                    )?
                    .ok_or_else(|| {
                        Error::config("adaptive growth needs a task with a graphon limit")
                    })?;
                Some(est.mean)
            }
            Growth::FixedIncrement { .. } => None,
        };

        log.records.push(TrainRecord {
            epoch: epoch_idx + 1,
            n,
            mean_loss: stats.mean_loss,
            mean_grad_norm: stats.mean_grad_norm,
            grad_dist_est: grad_est,
            wall_time_s: wall,
        });

        if stats.mean_grad_norm <= stop_threshold {
            stopped_early = true;
            break;
        }
        if epoch_idx + 1 < cfg.epochs {
            n = match cfg.growth {
                Growth::FixedIncrement { delta } => (n + delta).min(cfg.n_max),
                Growth::Adaptive { epsilon, .. } => {
                    let est = grad_est.expect("adaptive epochs always estimate");
                    if adaptive_grow_condition(est, epsilon, stats.mean_grad_norm) {
                        (n * 2).min(cfg.n_max)
                    } else {
                        n
                    }
                }
            };
        }
    }
    Ok(TrainOutcome { params, log, stopped_early })
}
