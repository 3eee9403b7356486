//! Behavior cloning of the flocking expert onto a decentralized GNN.
//!
//! The policy only sees per-agent neighbor aggregates through the
//! communication graph, yet it is trained to reproduce the centralized
//! expert's accelerations. Training follows the growing schedule: every
//! epoch adds agents, so the policy is exposed to denser graphs as it
//! improves. Evaluation rolls the trained policy and the expert from the
//! same initial states and compares summed velocity variations. Run with
//!
//! ```bash
//! cargo run --example flocking_imitation
//! ```

use graphon_gnn::flocking::{
    init_swarm, relative_cost, rollout, FlockConfig, ImitationTask, Policy, Trajectory,
};
use graphon_gnn::gnn::{Activation, ParamTensor};
use graphon_gnn::seed;
use graphon_gnn::train::{train_growing, Growth, TrainConfig};
use graphon_gnn::Result;

fn evaluate(params: &ParamTensor, config: &FlockConfig, n: usize, episodes: u64) -> Result<f64> {
    let mut expert_trajs: Vec<Trajectory> = Vec::new();
    let mut policy_trajs: Vec<Trajectory> = Vec::new();
    for e in 0..episodes {
        let initial = init_swarm(n, config, seed::derive(1000, &[e]))?;
        expert_trajs.push(rollout(initial.clone(), &Policy::Expert, config, config.horizon)?);
        let policy = Policy::Gnn { params, hidden: Activation::Tanh };
        policy_trajs.push(rollout(initial, &policy, config, config.horizon)?);
    }
    Ok(relative_cost(&policy_trajs, &expert_trajs)?.value)
}

fn main() -> Result<()> {
    let config = FlockConfig { horizon: 40, ..FlockConfig::default() };
    let task = ImitationTask::new(config.clone(), 2)?;

    let init = ParamTensor::random_init(&[6, 8, 2], 3, 17)?;
    let train_cfg = TrainConfig::new(
        2e-3,                                // eta
        4,                                   // epochs
        8,                                   // n0
        16,                                  // n_max
        Growth::FixedIncrement { delta: 4 }, // 8, 12, 16, 16
        1e-9,
        1e-9,
        400.0, // lipschitz_estimate
        2,     // seed
    )?;

    println!("training: 2 expert episodes x {} steps per epoch", config.horizon);
    let outcome =
        train_growing(&train_cfg, &task, init.clone(), Activation::Tanh, Activation::Identity)?;
    for r in &outcome.log.records {
        println!(
            "  epoch {} at n = {:>2}: mean loss {:>10.4}, grad norm {:>8.4}",
            r.epoch, r.n, r.mean_loss, r.mean_grad_norm
        );
    }

    let eval_n = 16;
    println!();
    println!("relative cost vs the expert over 3 shared episodes at n = {eval_n}");
    println!("  untrained policy: {:.3}", evaluate(&init, &config, eval_n, 3)?);
    println!("  trained policy:   {:.3}", evaluate(&outcome.params, &config, eval_n, 3)?);
    println!("  (1.0 would match the expert exactly)");
    Ok(())
}
