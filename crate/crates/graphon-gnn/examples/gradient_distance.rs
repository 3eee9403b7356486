//! How far small-graph gradients sit from large-graph gradients.
//!
//! For a fixed parameter tensor, each trial draws one labeled signal and
//! evaluates the loss gradient twice: on an n-node stochastic graph and on
//! a much larger reference graph from the same graphon. The Frobenius
//! distance between the two gradients shrinks as n grows, which is what
//! makes training on small graphs transfer to large ones. Run with
//!
//! ```bash
//! cargo run --example gradient_distance
//! ```

use graphon_gnn::gnn::{project_nonamplifying, Activation, LossKind, ParamTensor};
use graphon_gnn::graphon::Graphon;
use graphon_gnn::train::{grad_distance_estimate, SignalFamily, TeacherStudentTask};
use graphon_gnn::Result;

fn main() -> Result<()> {
    let graphon = Graphon::from_json("{\"family\": \"additive\"}")?;
    let teacher = project_nonamplifying(&ParamTensor::random_init(&[1, 3, 1], 2, 21)?, 0.0)?;
    let task = TeacherStudentTask::new(
        graphon,
        teacher,
        Activation::Tanh,
        Activation::Identity,
        SignalFamily::random_smooth(),
        1,
    )?;
    let params = project_nonamplifying(&ParamTensor::random_init(&[1, 3, 1], 2, 8)?, 0.0)?;

    let ref_n = 256;
    let trials = 20;
    println!("{trials} trials per size, reference graph of {ref_n} nodes");
    println!("{:>4} {:>12} {:>12}", "n", "mean", "median");
    let mut medians = Vec::new();
    for n in [8, 16, 32, 64] {
        let estimate = grad_distance_estimate(
            &params,
            task.graphon(),
            n,
            ref_n,
            trials,
            &task,
            Activation::Tanh,
            Activation::Identity,
            LossKind::HalfMeanSquare,
            3,
        )?;
        println!("{n:>4} {:>12.6} {:>12.6}", estimate.mean, estimate.median);
        medians.push(estimate.median);
    }
    println!();
    println!("medians decrease monotonically: {}", medians.windows(2).all(|w| w[1] < w[0]));
    Ok(())
}
