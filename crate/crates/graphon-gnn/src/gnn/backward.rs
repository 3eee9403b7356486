//! Reverse-mode differentiation through the graph convolutional network.
//!
//! With a symmetric GSO the adjoint of each shift is the shift itself, so
//! backpropagation reuses the forward machinery: tap gradients contract the
//! cached shifted inputs against the layer delta, and the delta moves
//! upstream through the same polynomial filter with transposed taps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gnn::{Activation, ForwardCache, ParamTensor};

/// Gradient of a scalar loss with respect to every tap, given the cache of
/// the forward pass that produced the output and `d_output` = dLoss/dY.
/// The GSO must be the (symmetric) matrix used in that forward pass.
pub fn gnn_backward(
    params: &ParamTensor,
    cache: &ForwardCache,
    s: &DMatrix<f64>,
    d_output: &DMatrix<f64>,
    hidden: Activation,
    readout: Activation,
) -> Result<ParamTensor> {
    let layers = params.layers();
    if cache.layers.len() != layers {
        return Err(Error::shape(format!(
            "cache has {} layers but the network has {layers}",
            cache.layers.len()
        )));
    }
    let last = &cache.layers[layers - 1];
    if d_output.shape() != last.preact.shape() {
        return Err(Error::shape(format!(
            "d_output is {:?} but the network output is {:?}",
            d_output.shape(),
            last.preact.shape()
        )));
    }

    let k = params.taps_per_layer();
    let mut grad = ParamTensor::zeros(params.dims(), k)?;
    let mut delta: Option<DMatrix<f64>> = None;
    for l in (0..layers).rev() {
        let layer = &cache.layers[l];
        let act = if l + 1 == layers { readout } else { hidden };
        let upstream = match delta.take() {
            None => d_output.clone(),
            Some(d) => d,
        };
        // delta_l = upstream .* rho'(Z_l)
        let delta_l = upstream.zip_map(&layer.preact, |u, z| u * act.derivative(z));

        for t in 0..k {
            *grad.tap_mut(l, t) = layer.shifted[t].transpose() * &delta_l;
        }

        if l > 0 {
            // Upstream gradient: sum_k S^k delta_l H_lk^T (S symmetric).
            let mut g = &delta_l * params.tap(l, 0).transpose();
            let mut shifted = delta_l;
            for t in 1..k {
                shifted = s * shifted;
                g.gemm(1.0, &shifted, &params.tap(l, t).transpose(), 1.0);
            }
            delta = Some(g);
        }
    }
    Ok(grad)
}

/// Norm of the full parameter Jacobian of the network output, measured in
/// the induced-signal geometry: each output entry's gradient tensor
/// contributes its squared Frobenius norm, and the total is divided by `n`
/// because a step signal on `n` blocks has squared L2 norm
/// `||vector||^2 / n`. This is the quantity the `F^(2L) sqrt(K)` cap
/// bounds for non-amplifying filters and unit-norm input.
pub fn output_gradient_norm(
    params: &ParamTensor,
    s: &DMatrix<f64>,
    x: &DMatrix<f64>,
    hidden: Activation,
    readout: Activation,
) -> Result<f64> {
    let (y, cache) = crate::gnn::gnn_forward(params, s, x, hidden, readout)?;
    let (n, f_out) = y.shape();
    let mut total = 0.0;
    let mut seed_matrix = DMatrix::zeros(n, f_out);
    for i in 0..n {
        for f in 0..f_out {
            seed_matrix[(i, f)] = 1.0;
            let g = gnn_backward(params, &cache, s, &seed_matrix, hidden, readout)?;
            total += g.iter_values().map(|v| v * v).sum::<f64>();
            seed_matrix[(i, f)] = 0.0;
        }
    }
    Ok((total / n as f64).sqrt())
}
