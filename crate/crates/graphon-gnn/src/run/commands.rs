//! The eight subcommand bodies and their config schemas.
//!
//! Each function takes the parsed config (with the effective seed already
//! injected under `"seed"`) and the run directory, writes its outputs, and
//! returns the file names it created. Config structs reject unknown keys;
//! value checks that can fail before any computation starts are reported
//! as config errors.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flocking::{
    generate_dataset, init_swarm, relative_cost, rollout, trajectory_csv_header, FlockConfig,
    ImitationTask, Policy, Trajectory,
};
use crate::gnn::{
    load_params, params_to_csv, project_nonamplifying, save_params, Activation, LossKind,
    ParamTensor,
};
use crate::graphon::{
    l2_graphon_distance, l2_signal_distance, sample_stochastic, spectral_summary, Graphon,
    GraphonSignal,
};
use crate::seed::{self, tag};
use crate::train::{
    adaptive_grow_condition, grad_distance_estimate, save_dataset, train_growing, BatchMode,
    Growth, SignalFamily, TeacherStudentTask, TrainConfig, TrainLog,
};

fn write_output(run_dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::write(run_dir.join(name), bytes)?;
    Ok(())
}

fn write_json(run_dir: &Path, name: &str, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(run_dir, name, text.as_bytes())
}

fn parse_config<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T> {
    Ok(serde_json::from_value(value.clone())?)
}

fn activation(name: &str) -> Result<Activation> {
    Activation::from_name(name)
}

fn default_hidden_name() -> String {
    "tanh".to_string()
}

fn default_readout_name() -> String {
    "identity".to_string()
}

/// Network shape plus initialization options, shared by the training and
/// sweep configs. Parameters are drawn from the seeded initializer, scaled
/// by `init_scale`, and optionally projected onto the non-amplifying set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSection {
    /// Feature widths per layer, input first.
    pub dims: Vec<usize>,
    /// Filter taps per layer.
    pub taps: usize,
    /// Project the initialized filters onto the non-amplifying set.
    #[serde(default)]
    pub project: bool,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    1.0
}

impl NetSection {
    fn build(&self, seed_value: u64) -> Result<ParamTensor> {
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::config(format!(
                "init_scale must be finite and >= 0, got {}",
                self.init_scale
            )));
        }
        let mut params = ParamTensor::random_init(&self.dims, self.taps, seed_value)?;
        if self.init_scale != 1.0 {
            params.scale(self.init_scale);
        }
        if self.project {
            params = project_nonamplifying(&params, 0.0)?;
        }
        Ok(params)
    }
}

/// The trainer schedule as it appears in configs. The master seed is not a
/// key in this section; it comes from the config root.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub eta: f64,
    pub epochs: usize,
    pub n0: usize,
    pub n_max: usize,
    pub growth: Growth,
    pub c: f64,
    pub epsilon: f64,
    pub lipschitz_estimate: f64,
    #[serde(default = "default_true")]
    pub shuffle: bool,
    #[serde(default)]
    pub loss: LossKind,
    #[serde(default)]
    pub batch: BatchMode,
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_true() -> bool {
    true
}

impl TrainSection {
    fn build(&self, seed_value: u64) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::new(
            self.eta,
            self.epochs,
            self.n0,
            self.n_max,
            self.growth,
            self.c,
            self.epsilon,
            self.lipschitz_estimate,
            seed_value,
        )?;
        cfg.shuffle = self.shuffle;
        cfg.loss = self.loss;
        cfg.batch = self.batch;
        cfg.record_wall_time = self.record_wall_time;
        Ok(cfg)
    }
}

/// Emits a warning on stderr when the log shows a growth step that was
/// clamped to `n_max`. Reconstructs the would-be size from consecutive
/// records; stderr is not part of the reproducible output surface.
fn warn_if_clamped(cfg: &TrainConfig, log: &TrainLog) {
    for pair in log.records.windows(2) {
        let (before, after) = (&pair[0], &pair[1]);
        let unclamped = match cfg.growth {
            Growth::FixedIncrement { delta } => {
                if delta == 0 {
                    return;
                }
                before.n + delta
            }
            Growth::Adaptive { epsilon, .. } => {
                let grew = match before.grad_dist_est {
                    Some(est) => adaptive_grow_condition(est, epsilon, before.mean_grad_norm),
                    None => false,
                };
                if !grew {
                    continue;
                }
                before.n * 2
            }
        };
        if unclamped > cfg.n_max && after.n == cfg.n_max {
            eprintln!("warning: growth clamped to n_max = {} at epoch {}", cfg.n_max, after.epoch);
            return;
        }
    }
}

fn training_outputs(
    run_dir: &Path,
    params_stem: &str,
    outcome: &crate::train::TrainOutcome,
    hidden: Activation,
    seed_value: u64,
) -> Result<Vec<String>> {
    let mut log_csv = Vec::new();
    outcome.log.write_csv(&mut log_csv)?;
    write_output(run_dir, "train_log.csv", &log_csv)?;

    let params_bin = format!("{params_stem}.bin");
    save_params(run_dir.join(&params_bin), &outcome.params, hidden, seed_value)?;
    let params_csv_name = format!("{params_stem}.csv");
    let mut params_csv = Vec::new();
    params_to_csv(&outcome.params, &mut params_csv)?;
    write_output(run_dir, &params_csv_name, &params_csv)?;

    let last = outcome.log.records.last().expect("training always logs at least one epoch");
    write_json(
        run_dir,
        "outcome.json",
        &json!({
            "stopped_early": outcome.stopped_early,
            "epochs_run": outcome.log.records.len(),
            "final_n": last.n,
            "final_mean_loss": last.mean_loss,
            "final_mean_grad_norm": last.mean_grad_norm,
        }),
    )?;
    Ok(vec!["train_log.csv".into(), params_bin, params_csv_name, "outcome.json".into()])
}

// ---------------------------------------------------------------------------
// graphon-check

fn default_sizes() -> Vec<usize> {
    vec![4, 8, 16, 32, 64, 128]
}

fn default_grid_factor() -> usize {
    8
}

fn default_signal_grid() -> usize {
    4096
}

fn default_slack() -> f64 {
    1e-3
}

/// Sweeps the step-object approximation bounds: at each size the sampled
/// step signal must sit within `lipschitz/n` of the original signal and
/// the induced step graphon within `2*lipschitz/n` (plus quadrature slack)
/// of the original graphon.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphonCheckConfig {
    graphon: Value,
    /// Signal to check; defaults to `X(u) = u`.
    signal: Option<Value>,
    #[serde(default = "default_sizes")]
    sizes: Vec<usize>,
    /// Graphon-distance quadrature uses at least `grid_factor * n` points.
    #[serde(default = "default_grid_factor")]
    grid_factor: usize,
    /// Quadrature grid for the signal distance.
    #[serde(default = "default_signal_grid")]
    signal_grid: usize,
    /// Additive slack on the graphon bound covering quadrature error.
    #[serde(default = "default_slack")]
    slack: f64,
    /// Accepted for schema uniformity; this sweep draws nothing random.
    #[serde(rename = "seed", default)]
    _seed: u64,
}

pub fn graphon_check(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: GraphonCheckConfig = parse_config(value)?;
    let graphon = Graphon::from_json_value(&cfg.graphon)?;
    let signal = match &cfg.signal {
        None => GraphonSignal::linear(),
        Some(v) => GraphonSignal::from_json_value(v)?,
    };
    let signal_lip = signal.lipschitz_bound().ok_or_else(|| {
        Error::config("graphon-check needs a smooth signal with a Lipschitz bound")
    })?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::config("sizes must be a non-empty list of n >= 1"));
    }
    if cfg.grid_factor == 0 || cfg.signal_grid == 0 {
        return Err(Error::config("grid_factor and signal_grid must be >= 1"));
    }
    if !(cfg.slack.is_finite() && cfg.slack >= 0.0) {
        return Err(Error::config(format!("slack must be finite and >= 0, got {}", cfg.slack)));
    }
    let graphon_lip = graphon.lipschitz_constant();

    let mut csv = Vec::new();
    writeln!(
        csv,
        "n,signal_distance,signal_bound,graphon_distance,graphon_bound,signal_ok,graphon_ok"
    )?;
    let mut first_violation: Option<usize> = None;
    for &n in &cfg.sizes {
        let step_signal = GraphonSignal::step(signal.sample(n)?)?;
        let signal_distance = l2_signal_distance(&signal, &step_signal, cfg.signal_grid)?;
        let signal_bound = signal_lip / n as f64;

        let step = graphon.step_graphon(n)?;
        let graphon_distance = l2_graphon_distance(&graphon, &step, cfg.grid_factor * n)?;
        let graphon_bound = 2.0 * graphon_lip / n as f64 + cfg.slack;

        let signal_ok = signal_distance <= signal_bound;
        let graphon_ok = graphon_distance <= graphon_bound;
        if !(signal_ok && graphon_ok) && first_violation.is_none() {
            first_violation = Some(n);
        }
        writeln!(
            csv,
            "{n},{signal_distance},{signal_bound},{graphon_distance},{graphon_bound},{signal_ok},{graphon_ok}"
        )?;
    }
    write_output(run_dir, "graphon_check.csv", &csv)?;
    if let Some(n) = first_violation {
        return Err(Error::domain(format!(
            "approximation bound violated at n = {n}; see graphon_check.csv"
        )));
    }
    Ok(vec!["graphon_check.csv".into()])
}

// ---------------------------------------------------------------------------
// spectra

fn default_band_threshold() -> f64 {
    0.5
}

/// Dumps GSO spectra across sizes, with band cardinalities and (when a
/// reference size is given) eigenvalue margins against the reference GSO.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectraConfig {
    graphon: Value,
    sizes: Vec<usize>,
    #[serde(default = "default_band_threshold")]
    c: f64,
    /// Size of the reference graph margins are computed against.
    #[serde(default)]
    reference_n: Option<usize>,
    /// Bernoulli-sample the graphs instead of using templates.
    #[serde(default)]
    stochastic: bool,
    #[serde(default)]
    seed: u64,
}

pub fn spectra(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: SpectraConfig = parse_config(value)?;
    let graphon = Graphon::from_json_value(&cfg.graphon)?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::config("sizes must be a non-empty list of n >= 1"));
    }
    let gso_at = |n: usize| -> Result<nalgebra::DMatrix<f64>> {
        let template = graphon.template_graph(n)?;
        let graph = if cfg.stochastic { sample_stochastic(&template, cfg.seed)? } else { template };
        Ok(graph.gso())
    };
    let reference = cfg.reference_n.map(gso_at).transpose()?;

    let mut summary_csv = Vec::new();
    writeln!(summary_csv, "n,c,band_cardinality,eigenvalue_margin")?;
    let mut eigen_csv = Vec::new();
    writeln!(eigen_csv, "n,index,lambda")?;
    for &n in &cfg.sizes {
        let gso = gso_at(n)?;
        // The subject spectrum is the second argument; margins compare the
        // size-n eigenvalues against the reference spectrum.
        let summary = match &reference {
            Some(r) => spectral_summary(r, Some(&gso), cfg.c)?,
            None => spectral_summary(&gso, None, cfg.c)?,
        };
        let margin = summary.eigenvalue_margin.map(|m| m.to_string()).unwrap_or_default();
        writeln!(summary_csv, "{n},{},{},{margin}", summary.c, summary.band_cardinality)?;
        for (index, lambda) in summary.eigenvalues.iter().enumerate() {
            writeln!(eigen_csv, "{n},{index},{lambda}")?;
        }
    }
    write_output(run_dir, "spectra_summary.csv", &summary_csv)?;
    write_output(run_dir, "eigenvalues.csv", &eigen_csv)?;
    Ok(vec!["spectra_summary.csv".into(), "eigenvalues.csv".into()])
}

// ---------------------------------------------------------------------------
// train-ts

/// Teacher-student training on a growing graph sequence. The teacher is
/// always projected onto the non-amplifying set so its outputs stay
/// bounded; the student starts from the seeded initializer.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainTsConfig {
    graphon: Value,
    /// Input signal family; defaults to random smooth draws.
    input: Option<Value>,
    samples_per_epoch: usize,
    teacher: NetSection,
    student: NetSection,
    #[serde(default = "default_hidden_name")]
    hidden: String,
    #[serde(default = "default_readout_name")]
    readout: String,
    train: TrainSection,
    #[serde(default)]
    seed: u64,
}

pub fn train_ts(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: TrainTsConfig = parse_config(value)?;
    let graphon = Graphon::from_json_value(&cfg.graphon)?;
    let input = match &cfg.input {
        None => SignalFamily::random_smooth(),
        Some(v) => SignalFamily::from_json_value(v)?,
    };
    let hidden = activation(&cfg.hidden)?;
    let readout = activation(&cfg.readout)?;

    let teacher_raw = cfg.teacher.build(seed::derive(cfg.seed, &[tag::PARAM_INIT, 0]))?;
    let teacher = project_nonamplifying(&teacher_raw, 0.0)?;
    if cfg.student.dims.first() != cfg.teacher.dims.first()
        || cfg.student.dims.last() != cfg.teacher.dims.last()
    {
        return Err(Error::config(format!(
            "student dims {:?} must match the teacher's input and output widths {:?}",
            cfg.student.dims, cfg.teacher.dims
        )));
    }
    let student = cfg.student.build(seed::derive(cfg.seed, &[tag::PARAM_INIT, 1]))?;

    let task =
        TeacherStudentTask::new(graphon, teacher, hidden, readout, input, cfg.samples_per_epoch)?;
    let train_cfg = cfg.train.build(cfg.seed)?;
    let outcome = train_growing(&train_cfg, &task, student, hidden, readout)?;
    warn_if_clamped(&train_cfg, &outcome.log);
    training_outputs(run_dir, "student_params", &outcome, hidden, cfg.seed)
}

// ---------------------------------------------------------------------------
// grad-dist

fn default_trials() -> usize {
    50
}

/// Gradient-distance sweep: for each size, how far per-sample gradients on
/// an n-node sampled graph sit from gradients on a large reference graph,
/// using teacher-generated labels and the same parameters on both sides.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GradDistConfig {
    graphon: Value,
    input: Option<Value>,
    /// Label generator; always projected.
    teacher: NetSection,
    /// The network whose gradients are compared.
    net: NetSection,
    #[serde(default = "default_hidden_name")]
    hidden: String,
    #[serde(default = "default_readout_name")]
    readout: String,
    sizes: Vec<usize>,
    /// Reference graph size; defaults to 8x the largest entry of `sizes`.
    #[serde(default)]
    ref_n: Option<usize>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    loss: LossKind,
    #[serde(default)]
    seed: u64,
}

pub fn grad_dist(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: GradDistConfig = parse_config(value)?;
    let graphon = Graphon::from_json_value(&cfg.graphon)?;
    let input = match &cfg.input {
        None => SignalFamily::random_smooth(),
        Some(v) => SignalFamily::from_json_value(v)?,
    };
    let hidden = activation(&cfg.hidden)?;
    let readout = activation(&cfg.readout)?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::config("sizes must be a non-empty list of n >= 1"));
    }
    let max_n = *cfg.sizes.iter().max().expect("sizes checked non-empty");
    let ref_n = cfg.ref_n.unwrap_or(8 * max_n);
    if max_n > ref_n {
        return Err(Error::config(format!("every size must be <= ref_n = {ref_n}, got {max_n}")));
    }

    let teacher_raw = cfg.teacher.build(seed::derive(cfg.seed, &[tag::PARAM_INIT, 0]))?;
    let teacher = project_nonamplifying(&teacher_raw, 0.0)?;
    let net = cfg.net.build(seed::derive(cfg.seed, &[tag::PARAM_INIT, 1]))?;
    let task = TeacherStudentTask::new(graphon, teacher, hidden, readout, input, 1)?;

    let mut trials_csv = Vec::new();
    writeln!(trials_csv, "n,ref_n,trial,distance")?;
    let mut summary_csv = Vec::new();
    writeln!(summary_csv, "n,ref_n,trials,mean,median")?;
    for &n in &cfg.sizes {
        let estimate = grad_distance_estimate(
            &net,
            task.graphon(),
            n,
            ref_n,
            cfg.trials,
            &task,
            hidden,
            readout,
            cfg.loss,
            seed::derive(cfg.seed, &[tag::TRIAL, n as u64]),
        )?;
        for (trial, distance) in estimate.per_trial.iter().enumerate() {
            writeln!(trials_csv, "{n},{ref_n},{trial},{distance}")?;
        }
        writeln!(summary_csv, "{n},{ref_n},{},{},{}", cfg.trials, estimate.mean, estimate.median)?;
    }
    write_output(run_dir, "grad_dist.csv", &trials_csv)?;
    write_output(run_dir, "grad_dist_summary.csv", &summary_csv)?;
    Ok(vec!["grad_dist.csv".into(), "grad_dist_summary.csv".into()])
}

// ---------------------------------------------------------------------------
// flock-gen

/// Expert dataset generation: `episodes` expert rollouts of
/// `flock.horizon` steps each at swarm size `n`, saved in the trainer's
/// binary container next to a JSON manifest.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlockGenConfig {
    n: usize,
    episodes: usize,
    flock: FlockConfig,
    #[serde(default)]
    seed: u64,
}

pub fn flock_gen(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: FlockGenConfig = parse_config(value)?;
    let dataset = generate_dataset(cfg.n, cfg.episodes, cfg.flock.horizon, &cfg.flock, cfg.seed)?;
    save_dataset(run_dir.join("dataset.bin"), &dataset)?;
    write_json(
        run_dir,
        "dataset_manifest.json",
        &json!({
            "n": cfg.n,
            "episodes": cfg.episodes,
            "horizon": cfg.flock.horizon,
            "seed": cfg.seed,
            "num_samples": dataset.len(),
            "config": serde_json::to_value(&cfg.flock)?,
        }),
    )?;
    Ok(vec!["dataset.bin".into(), "dataset_manifest.json".into()])
}

// ---------------------------------------------------------------------------
// flock-train

/// Imitation training of a flocking policy while the swarm grows. Fresh
/// expert rollouts are generated every epoch at the current size. The
/// readout is always the identity, matching how the policy is rolled out.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlockTrainConfig {
    flock: FlockConfig,
    episodes_per_epoch: usize,
    student: NetSection,
    #[serde(default = "default_hidden_name")]
    hidden: String,
    train: TrainSection,
    #[serde(default)]
    seed: u64,
}

pub fn flock_train(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: FlockTrainConfig = parse_config(value)?;
    if cfg.student.dims.first() != Some(&6) || cfg.student.dims.last() != Some(&2) {
        return Err(Error::config(format!(
            "flocking policies need dims starting at 6 and ending at 2, got {:?}",
            cfg.student.dims
        )));
    }
    let hidden = activation(&cfg.hidden)?;
    let task = ImitationTask::new(cfg.flock.clone(), cfg.episodes_per_epoch)?;
    let train_cfg = cfg.train.build(cfg.seed)?;
    let student = cfg.student.build(seed::derive(cfg.seed, &[tag::PARAM_INIT]))?;
    let outcome = train_growing(&train_cfg, &task, student, hidden, Activation::Identity)?;
    warn_if_clamped(&train_cfg, &outcome.log);
    training_outputs(run_dir, "params", &outcome, hidden, cfg.seed)
}

// ---------------------------------------------------------------------------
// flock-eval

/// Rolls a saved policy and the expert from shared initial states and
/// reports per-episode costs plus the summed relative cost. Episodes where
/// either controller causes a collision are retried with fresh derived
/// seeds, up to 10 retries each.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlockEvalConfig {
    /// Path to a parameter container written by flock-train.
    params: String,
    flock: FlockConfig,
    n: usize,
    episodes: usize,
    /// Also export both full trajectories in the step-per-row CSV format.
    #[serde(default)]
    write_trajectories: bool,
    #[serde(default)]
    seed: u64,
}

pub fn flock_eval(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: FlockEvalConfig = parse_config(value)?;
    if cfg.episodes == 0 || cfg.flock.horizon == 0 {
        return Err(Error::config("need episodes >= 1 and flock.horizon >= 1"));
    }
    cfg.flock.validate()?;
    let (params, hidden, _) = load_params(&cfg.params)?;

    let horizon = cfg.flock.horizon;
    let mut expert_trajs: Vec<Trajectory> = Vec::with_capacity(cfg.episodes);
    let mut policy_trajs: Vec<Trajectory> = Vec::with_capacity(cfg.episodes);
    for e in 0..cfg.episodes as u64 {
        let mut attempt = 0u64;
        let (expert_traj, policy_traj) = loop {
            let episode_seed = seed::derive(cfg.seed, &[tag::EPISODE, e, attempt]);
            let result = (|| -> Result<(Trajectory, Trajectory)> {
                let initial = init_swarm(cfg.n, &cfg.flock, episode_seed)?;
                let expert_traj = rollout(initial.clone(), &Policy::Expert, &cfg.flock, horizon)?;
                let policy = Policy::Gnn { params: &params, hidden };
                let policy_traj = rollout(initial, &policy, &cfg.flock, horizon)?;
                Ok((expert_traj, policy_traj))
            })();
            match result {
                Ok(pair) => break pair,
                Err(Error::Singularity { .. }) if attempt < 10 => attempt += 1,
                Err(other) => return Err(other),
            }
        };
        expert_trajs.push(expert_traj);
        policy_trajs.push(policy_traj);
    }

    let mut eval_csv = Vec::new();
    writeln!(
        eval_csv,
        "episode,policy_cost_sum,expert_cost_sum,policy_cost_mean,expert_cost_mean"
    )?;
    for (e, (policy_traj, expert_traj)) in policy_trajs.iter().zip(&expert_trajs).enumerate() {
        let policy_sum = policy_traj.total_velocity_variation();
        let expert_sum = expert_traj.total_velocity_variation();
        let steps = horizon as f64;
        writeln!(
            eval_csv,
            "{e},{policy_sum},{expert_sum},{},{}",
            policy_sum / steps,
            expert_sum / steps
        )?;
    }
    write_output(run_dir, "eval.csv", &eval_csv)?;

    let cost = relative_cost(&policy_trajs, &expert_trajs)?;
    let policy_total: f64 = policy_trajs.iter().map(Trajectory::total_velocity_variation).sum();
    let expert_total: f64 = expert_trajs.iter().map(Trajectory::total_velocity_variation).sum();
    let mut summary_csv = Vec::new();
    writeln!(summary_csv, "episodes,policy_cost,expert_cost,relative_cost,expert_cost_zero")?;
    writeln!(
        summary_csv,
        "{},{policy_total},{expert_total},{},{}",
        cfg.episodes, cost.value, cost.expert_cost_zero
    )?;
    write_output(run_dir, "eval_summary.csv", &summary_csv)?;

    let mut outputs = vec!["eval.csv".to_string(), "eval_summary.csv".to_string()];
    if cfg.write_trajectories {
        for (name, trajs) in
            [("trajectories_policy.csv", &policy_trajs), ("trajectories_expert.csv", &expert_trajs)]
        {
            let mut csv = Vec::new();
            trajectory_csv_header(&mut csv)?;
            for (e, traj) in trajs.iter().enumerate() {
                traj.write_csv_rows(e, &mut csv)?;
            }
            write_output(run_dir, name, &csv)?;
            outputs.push(name.to_string());
        }
    }
    Ok(outputs)
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportInput {
    /// CSV file from an earlier run.
    path: String,
    /// Value written to the `source` column for this file's rows.
    label: String,
}

/// Merges CSVs from earlier runs into one long-format table with columns
/// `source,row,field,value`, ready for any plotting tool. Cell text is
/// passed through byte-for-byte.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    inputs: Vec<ReportInput>,
    /// Accepted for schema uniformity; merging is deterministic anyway.
    #[serde(rename = "seed", default)]
    _seed: u64,
}

pub fn report(value: &Value, run_dir: &Path) -> Result<Vec<String>> {
    let cfg: ReportConfig = parse_config(value)?;
    if cfg.inputs.is_empty() {
        return Err(Error::config("report needs at least one input"));
    }
    for input in &cfg.inputs {
        if input.label.is_empty() || input.label.contains(',') {
            return Err(Error::config(format!(
                "label for {} must be non-empty and comma-free",
                input.path
            )));
        }
    }

    let mut csv = Vec::new();
    writeln!(csv, "source,row,field,value")?;
    for input in &cfg.inputs {
        let text = fs::read_to_string(&input.path)?;
        let mut lines = text.lines();
        let header =
            lines.next().ok_or_else(|| Error::shape(format!("{} is empty", input.path)))?;
        let fields: Vec<&str> = header.split(',').collect();
        for (row, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != fields.len() {
                return Err(Error::shape(format!(
                    "{} row {row}: {} cells under a {}-field header",
                    input.path,
                    cells.len(),
                    fields.len()
                )));
            }
            for (field, cell) in fields.iter().zip(cells) {
                writeln!(csv, "{},{row},{field},{cell}", input.label)?;
            }
        }
    }
    write_output(run_dir, "report.csv", &csv)?;
    Ok(vec!["report.csv".into()])
}
