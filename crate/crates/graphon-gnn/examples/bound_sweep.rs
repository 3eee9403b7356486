//! How fast step objects converge to what they discretize.
//!
//! Sampling a Lipschitz signal at `n` grid points and stretching the
//! values back into a step function lands within `lipschitz/n` of the
//! original in L2. The same holds for the graphon against the step
//! graphon induced by the template graph, at rate `2*lipschitz/n`. This
//! sweep prints both distances next to their bounds, which is what the
//! `graphon-check` subcommand writes as CSV. Run with
//!
//! ```bash
//! cargo run --example bound_sweep
//! ```

use graphon_gnn::graphon::{l2_graphon_distance, l2_signal_distance, Graphon, GraphonSignal};
use graphon_gnn::Result;

fn main() -> Result<()> {
    let graphon = Graphon::from_json("{\"family\": \"additive\"}")?;
    let signal = GraphonSignal::linear();
    let signal_lip = signal.lipschitz_bound().expect("smooth signals have a bound");
    let graphon_lip = graphon.lipschitz_constant();
    let slack = 1e-3;

    println!("W(u,v) = (u+v)/2, X(u) = u");
    println!(
        "{:>4} {:>13} {:>10} {:>14} {:>12}",
        "n", "signal dist", "bound", "graphon dist", "bound+slack"
    );
    for n in [4, 8, 16, 32, 64, 128] {
        let step_signal = GraphonSignal::step(signal.sample(n)?)?;
        let d_signal = l2_signal_distance(&signal, &step_signal, 4096)?;
        let b_signal = signal_lip / n as f64;

        let step_graphon = graphon.step_graphon(n)?;
        let d_graphon = l2_graphon_distance(&graphon, &step_graphon, 8 * n)?;
        let b_graphon = 2.0 * graphon_lip / n as f64 + slack;

        assert!(d_signal <= b_signal, "signal bound failed at n = {n}");
        assert!(d_graphon <= b_graphon, "graphon bound failed at n = {n}");
        println!("{n:>4} {d_signal:>13.6} {b_signal:>10.6} {d_graphon:>14.6} {b_graphon:>12.6}");
    }
    println!();
    println!("every row satisfies distance <= bound; both decay like 1/n");
    Ok(())
}
