//! Episode rollouts, imitation datasets, and policy evaluation.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gnn::{gnn_forward, Activation, ParamTensor};
use crate::seed;
use crate::train::{Dataset, GrowingTask, Sample};

use super::{
    agent_features, comm_graph, expert_controller, init_swarm, step_dynamics, velocity_variation,
    FlockConfig, FlockState,
};

/// Controller run by [`rollout`]: the centralized expert, or a trained
/// network reading the per-agent features through the communication GSO.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Expert,
    Gnn { params: &'a ParamTensor, hidden: Activation },
}

/// Everything recorded at one step: the state the controller saw, the
/// communication graph, the features, the applied actions, and the
/// velocity variation of that state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub state: FlockState,
    pub adjacency: DMatrix<f64>,
    pub features: DMatrix<f64>,
    pub actions: DMatrix<f64>,
    pub sigma_v: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Velocity variation summed over recorded steps: the episode cost.
    pub fn total_velocity_variation(&self) -> f64 {
        self.steps.iter().map(|s| s.sigma_v).sum()
    }

    /// Appends one CSV row per (step, agent) under the header written by
    /// [`trajectory_csv_header`].
    pub fn write_csv_rows(&self, episode: usize, writer: &mut impl Write) -> Result<()> {
        for (t, step) in self.steps.iter().enumerate() {
            for agent in 0..step.state.n() {
                writeln!(
                    writer,
                    "{episode},{t},{agent},{},{},{},{},{},{},{}",
                    step.state.positions()[(agent, 0)],
                    step.state.positions()[(agent, 1)],
                    step.state.velocities()[(agent, 0)],
                    step.state.velocities()[(agent, 1)],
                    step.actions[(agent, 0)],
                    step.actions[(agent, 1)],
                    step.sigma_v,
                )?;
            }
        }
        Ok(())
    }
}

/// Header for the trajectory CSV format.
pub fn trajectory_csv_header(writer: &mut impl Write) -> Result<()> {
    writeln!(writer, "episode,step,agent,rx,ry,vx,vy,ux,uy,sigma_v")?;
    Ok(())
}

fn at_step(err: Error, t: usize) -> Error {
    match err {
        Error::Singularity { i, j, .. } => Error::Singularity { i, j, step: Some(t) },
        other => other,
    }
}

/// Runs `horizon` steps from `initial`: per step, build the communication
/// graph, compute features, pick actions (expert formula, or the network
/// applied to the features with an identity readout, clamped per axis),
/// and integrate. Collisions abort with the step at which they happened.
pub fn rollout(
    initial: FlockState,
    policy: &Policy,
    config: &FlockConfig,
    horizon: usize,
) -> Result<Trajectory> {
    config.validate()?;
    if let Policy::Gnn { params, .. } = policy {
        if params.input_dim() != 6 || params.output_dim() != 2 {
            return Err(Error::shape(format!(
                "flocking policy needs 6 input and 2 output features, got {} and {}",
                params.input_dim(),
                params.output_dim()
            )));
        }
    }
    let mut state = initial;
    let mut steps = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let graph = comm_graph(state.positions(), config.comm_radius)?;
        let features = agent_features(&state, graph.adjacency()).map_err(|e| at_step(e, t))?;
        let actions = match policy {
            Policy::Expert => expert_controller(&state, config).map_err(|e| at_step(e, t))?,
            Policy::Gnn { params, hidden } => {
                let (raw, _) =
                    gnn_forward(params, &graph.gso(), &features, *hidden, Activation::Identity)?;
                raw.map(|v| v.clamp(-config.u_bound, config.u_bound))
            }
        };
        let sigma_v = velocity_variation(&state);
        let next = step_dynamics(&state, &actions, config.dt)?;
        steps.push(TrajectoryStep {
            state,
            adjacency: graph.adjacency().clone(),
            features,
            actions,
            sigma_v,
        });
        state = next;
    }
    Ok(Trajectory { steps })
}

/// Expert imitation data: one sample per (episode, step) holding the
/// communication GSO, the features, and the expert's action projected
/// onto the `[-u_bound, u_bound]` action box. The expert itself runs
/// unclamped (see [`expert_controller`]), but the learner can only emit
/// actions inside the box, so targets outside it would push training
/// toward unreachable outputs. Episodes that collide are retried with a
/// fresh derived seed, up to 10 retries each.
pub fn generate_dataset(
    n: usize,
    episodes: usize,
    horizon: usize,
    config: &FlockConfig,
    seed_value: u64,
) -> Result<Dataset> {
    config.validate()?;
    if episodes == 0 || horizon == 0 {
        return Err(Error::config(format!(
            "need episodes >= 1 and horizon >= 1, got {episodes} and {horizon}"
        )));
    }
    let mut samples = Vec::with_capacity(episodes * horizon);
    for e in 0..episodes as u64 {
        let mut attempt = 0u64;
        let trajectory = loop {
            let episode_seed = seed::derive(seed_value, &[seed::tag::EPISODE, e, attempt]);
            let initial = init_swarm(n, config, episode_seed)?;
            match rollout(initial, &Policy::Expert, config, horizon) {
                Ok(t) => break t,
                Err(Error::Singularity { .. }) if attempt < 10 => attempt += 1,
                Err(other) => return Err(other),
            }
        };
        let n_f = n as f64;
        for step in &trajectory.steps {
            let y = step.actions.map(|u| u.clamp(-config.u_bound, config.u_bound));
            samples.push(Sample { gso: Some(&step.adjacency / n_f), x: step.features.clone(), y });
        }
    }
    Dataset::new(samples)
}

/// Expert-imitation task for the growing trainer: every epoch gets a fresh
/// batch of expert rollouts at whatever swarm size the schedule has reached.
/// There is no graphon behind the communication graphs, so the
/// gradient-distance hook stays at its `None` default and adaptive growth
/// is unavailable for this task.
#[derive(Debug, Clone)]
pub struct ImitationTask {
    config: FlockConfig,
    episodes_per_epoch: usize,
}

impl ImitationTask {
    pub fn new(config: FlockConfig, episodes_per_epoch: usize) -> Result<Self> {
        config.validate()?;
        if episodes_per_epoch == 0 {
            return Err(Error::config("need episodes_per_epoch >= 1"));
        }
        Ok(ImitationTask { config, episodes_per_epoch })
    }

    pub fn config(&self) -> &FlockConfig {
        &self.config
    }
}

impl GrowingTask for ImitationTask {
    fn sample_epoch(&self, n: usize, seed_value: u64) -> Result<Dataset> {
        generate_dataset(n, self.episodes_per_epoch, self.config.horizon, &self.config, seed_value)
    }
}

/// Episode cost of a policy relative to the expert, over paired episodes
/// with shared initial states: the ratio of summed velocity variations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeCost {
    pub value: f64,
    /// Set when the expert cost is zero; `value` is then the infinity
    /// sentinel rather than a ratio.
    pub expert_cost_zero: bool,
}

pub fn relative_cost(
    policy_trajs: &[Trajectory],
    expert_trajs: &[Trajectory],
) -> Result<RelativeCost> {
    if policy_trajs.is_empty() || policy_trajs.len() != expert_trajs.len() {
        return Err(Error::shape(format!(
            "need matching non-empty episode lists, got {} and {}",
            policy_trajs.len(),
            expert_trajs.len()
        )));
    }
    for (idx, (p, e)) in policy_trajs.iter().zip(expert_trajs).enumerate() {
        if p.len() != e.len() {
            return Err(Error::shape(format!(
                "episode {idx}: policy has {} steps but expert has {}",
                p.len(),
                e.len()
            )));
        }
    }
    let policy_cost: f64 = policy_trajs.iter().map(Trajectory::total_velocity_variation).sum();
    let expert_cost: f64 = expert_trajs.iter().map(Trajectory::total_velocity_variation).sum();
    if expert_cost == 0.0 {
        return Ok(RelativeCost { value: f64::INFINITY, expert_cost_zero: true });
    }
    Ok(RelativeCost { value: policy_cost / expert_cost, expert_cost_zero: false })
}
