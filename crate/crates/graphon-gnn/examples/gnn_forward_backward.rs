//! One forward and backward pass through a polynomial graph filter bank.
//!
//! The network alternates graph filters `sum_k H_lk S^k x` with pointwise
//! nonlinearities. Parameters never depend on the graph size, so the same
//! tensor runs on any GSO. The backward pass is hand-rolled reverse mode;
//! here one parameter entry is checked against a central finite
//! difference. Run with
//!
//! ```bash
//! cargo run --example gnn_forward_backward
//! ```

use nalgebra::DMatrix;

use graphon_gnn::gnn::{
    gnn_backward, gnn_forward, loss_and_grad, Activation, LossKind, ParamTensor,
};
use graphon_gnn::graphon::{sample_stochastic, Graphon};
use graphon_gnn::Result;

fn main() -> Result<()> {
    let n = 12;
    let graphon = Graphon::from_json("{\"family\": \"additive\"}")?;
    let gso = sample_stochastic(&graphon.template_graph(n)?, 4)?.gso();

    // Two layers, widths 1 -> 3 -> 2, filters of order 2.
    let params = ParamTensor::random_init(&[1, 3, 2], 3, 42)?;
    let x = DMatrix::from_fn(n, 1, |i, _| (i as f64 / n as f64).sin());
    let y = DMatrix::zeros(n, 2);

    let (yhat, cache) = gnn_forward(&params, &gso, &x, Activation::Tanh, Activation::Identity)?;
    let (loss, d_yhat) = loss_and_grad(LossKind::HalfMeanSquare, &y, &yhat)?;
    let grad =
        gnn_backward(&params, &cache, &gso, &d_yhat, Activation::Tanh, Activation::Identity)?;

    println!("{} nodes, dims {:?}, {} taps per layer", n, params.dims(), params.taps_per_layer());
    println!("output shape: {}x{}", yhat.nrows(), yhat.ncols());
    println!("loss against the zero target: {loss:.6}");
    println!("gradient Frobenius norm:      {:.6}", grad.frobenius_norm());

    // Central finite difference on one entry of the layer-0, order-1 tap.
    let h = 1e-6;
    let probe = |shift: f64| -> Result<f64> {
        let mut p = params.clone();
        p.tap_mut(0, 1)[(0, 2)] += shift;
        let (out, _) = gnn_forward(&p, &gso, &x, Activation::Tanh, Activation::Identity)?;
        Ok(loss_and_grad(LossKind::HalfMeanSquare, &y, &out)?.0)
    };
    let numeric = (probe(h)? - probe(-h)?) / (2.0 * h);
    let analytic = grad.tap(0, 1)[(0, 2)];
    println!();
    println!("d loss / d H_0,1[0,2]");
    println!("  reverse mode:      {analytic:.10}");
    println!("  finite difference: {numeric:.10}");
    println!("  |difference|:      {:.2e}", (analytic - numeric).abs());
    Ok(())
}
