//! The centralized expert controller reaching velocity consensus.
//!
//! Agents start in a disc with random velocities. The expert accelerates
//! every agent toward the swarm-mean velocity and adds a short-range
//! repulsion so nobody collides. Velocity variation (the summed squared
//! deviation from the mean velocity) is the cost a learned policy will
//! later be judged by. Run with
//!
//! ```bash
//! cargo run --example flocking_expert
//! ```

use graphon_gnn::flocking::{init_swarm, rollout, FlockConfig, Policy};
use graphon_gnn::Result;

fn main() -> Result<()> {
    let config = FlockConfig { horizon: 200, ..FlockConfig::default() };
    let n = 25;
    let initial = init_swarm(n, &config, 0)?;
    println!(
        "{} agents, dt = {} s, horizon = {} steps ({} s simulated)",
        n,
        config.dt,
        config.horizon,
        config.dt * config.horizon as f64
    );

    let trajectory = rollout(initial, &Policy::Expert, &config, config.horizon)?;
    println!();
    println!("{:>5} {:>14} {:>14}", "step", "sigma_v", "min distance");
    for step in trajectory.steps.iter().step_by(40) {
        println!(
            "{:>5} {:>14.6} {:>14.4}",
            step.state.t(),
            step.sigma_v,
            step.state.min_pairwise_distance()
        );
    }
    let first = trajectory.steps.first().expect("horizon > 0");
    let last = trajectory.steps.last().expect("horizon > 0");
    let closest = trajectory
        .steps
        .iter()
        .map(|s| s.state.min_pairwise_distance())
        .fold(f64::INFINITY, f64::min);
    println!();
    println!(
        "sigma_v dropped to {:.4}% of its initial value; closest approach {:.3} m",
        100.0 * last.sigma_v / first.sigma_v,
        closest
    );
    Ok(())
}
