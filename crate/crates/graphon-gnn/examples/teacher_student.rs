//! Fitting a hidden teacher network while the training graph grows.
//!
//! Every epoch draws fresh stochastic graphs and smooth input signals,
//! labels them with a frozen teacher GNN, and runs per-sample SGD on the
//! student. Between epochs the graph size increases, so early epochs are
//! cheap and later epochs train where gradients are closest to the
//! infinite-size limit. Run with
//!
//! ```bash
//! cargo run --example teacher_student
//! ```

use graphon_gnn::gnn::{project_nonamplifying, Activation, ParamTensor};
use graphon_gnn::graphon::Graphon;
use graphon_gnn::train::{train_growing, Growth, SignalFamily, TeacherStudentTask, TrainConfig};
use graphon_gnn::Result;

fn main() -> Result<()> {
    let graphon = Graphon::from_json("{\"family\": \"additive\"}")?;
    let teacher = project_nonamplifying(&ParamTensor::random_init(&[1, 4, 1], 2, 99)?, 0.0)?;
    let task = TeacherStudentTask::new(
        graphon,
        teacher,
        Activation::Tanh,
        Activation::Identity,
        SignalFamily::random_smooth(),
        32,
    )?;

    // Start the student far from the teacher so descent dominates noise.
    let mut student = ParamTensor::random_init(&[1, 4, 1], 2, 7)?;
    for l in 0..student.layers() {
        for k in 0..student.taps_per_layer() {
            student.tap_mut(l, k).add_scalar_mut(0.3);
        }
    }

    let config = TrainConfig::new(
        0.1,                                  // eta
        6,                                    // epochs
        16,                                   // n0
        96,                                   // n_max
        Growth::FixedIncrement { delta: 16 }, // +16 nodes per epoch
        1e-9,                                 // c, kept tiny so the demo never stops early
        1e-9,                                 // epsilon
        9.0,                                  // lipschitz_estimate
        5,                                    // seed
    )?;
    let outcome = train_growing(&config, &task, student, Activation::Tanh, Activation::Identity)?;

    println!("{:>5} {:>4} {:>12} {:>15}", "epoch", "n", "mean loss", "mean grad norm");
    for r in &outcome.log.records {
        println!("{:>5} {:>4} {:>12.6} {:>15.6}", r.epoch, r.n, r.mean_loss, r.mean_grad_norm);
    }
    let first = &outcome.log.records[0];
    let last = outcome.log.records.last().expect("log is never empty");
    println!();
    println!(
        "loss {:.6} -> {:.6} while n grew {} -> {}; stopped early: {}",
        first.mean_loss, last.mean_loss, first.n, last.n, outcome.stopped_early
    );
    Ok(())
}
