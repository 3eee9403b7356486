//! Forward pass: polynomial graph convolutions and the layer cache that
//! the manual backward pass consumes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gnn::{Activation, ParamTensor};

/// Everything the backward pass needs from one layer: the `S^k`-shifted
/// copies of the layer input and the pre-activation.
#[derive(Debug, Clone)]
pub struct LayerCache {
    /// `shifted[k] = S^k X_{l-1}`, for `k = 0..K-1`.
    pub shifted: Vec<DMatrix<f64>>,
    /// `Z_l = sum_k S^k X_{l-1} H_lk`, before the nonlinearity.
    pub preact: DMatrix<f64>,
}

/// Per-layer caches from one forward pass, in layer order.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub layers: Vec<LayerCache>,
}

fn check_gso(s: &DMatrix<f64>, n: usize) -> Result<()> {
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::shape(format!(
            "GSO must be {n}x{n} to match the signal, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(())
}

/// Applies the graph convolution `y = sum_k S^k x taps[k]` by iterated
/// shifting; `S^k` is never formed explicitly. `x` is `n x F_in`, each tap
/// `F_in x F_out`.
pub fn filter_apply(
    s: &DMatrix<f64>,
    x: &DMatrix<f64>,
    taps: &[DMatrix<f64>],
) -> Result<DMatrix<f64>> {
    if taps.is_empty() {
        return Err(Error::shape("filter_apply needs at least one tap"));
    }
    check_gso(s, x.nrows())?;
    let f_in = x.ncols();
    if taps.iter().any(|t| t.nrows() != f_in) {
        return Err(Error::shape(format!(
            "tap rows must match signal features: signal has {f_in} columns, taps are {}x{}",
            taps[0].nrows(),
            taps[0].ncols()
        )));
    }
    let f_out = taps[0].ncols();
    if taps.iter().any(|t| t.ncols() != f_out) {
        return Err(Error::shape("all taps in one filter must share F_out"));
    }

    let mut y = x * &taps[0];
    let mut shifted = x.clone();
    for tap in &taps[1..] {
        shifted = s * shifted;
        y.gemm(1.0, &shifted, tap, 1.0);
    }
    Ok(y)
}

/// Runs the full network: `X_l = rho(sum_k S^k X_{l-1} H_lk)` with
/// `hidden` as `rho` on interior layers and `readout` on the last one.
/// Returns the output signal and the cache for [`gnn_backward`].
///
/// [`gnn_backward`]: crate::gnn::gnn_backward
pub fn gnn_forward(
    params: &ParamTensor,
    s: &DMatrix<f64>,
    x: &DMatrix<f64>,
    hidden: Activation,
    readout: Activation,
) -> Result<(DMatrix<f64>, ForwardCache)> {
    if x.ncols() != params.input_dim() {
        return Err(Error::shape(format!(
            "input has {} features but the network expects {}",
            x.ncols(),
            params.input_dim()
        )));
    }
    check_gso(s, x.nrows())?;

    let layers = params.layers();
    let k = params.taps_per_layer();
    let mut cache = ForwardCache { layers: Vec::with_capacity(layers) };
    let mut current = x.clone();
    for l in 0..layers {
        let taps = params.layer_taps(l);
        let mut shifted_blocks = Vec::with_capacity(k);
        shifted_blocks.push(current.clone());
        for t in 1..k {
            let next = s * &shifted_blocks[t - 1];
            shifted_blocks.push(next);
        }
        let mut preact = &shifted_blocks[0] * &taps[0];
        for t in 1..k {
            preact.gemm(1.0, &shifted_blocks[t], &taps[t], 1.0);
        }
        let act = if l + 1 == layers { readout } else { hidden };
        current = preact.map(|z| act.apply(z));
        cache.layers.push(LayerCache { shifted: shifted_blocks, preact });
    }
    Ok((current, cache))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn path2_gso() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0])
    }

    #[test]
    fn identity_tap_is_identity() {
        let s = path2_gso();
        let x = DMatrix::from_column_slice(2, 1, &[3.0, -1.0]);
        let taps = vec![DMatrix::from_element(1, 1, 1.0)];
        assert_eq!(filter_apply(&s, &x, &taps).unwrap(), x);
    }

    #[test]
    fn single_shift_on_two_node_path() {
        let s = path2_gso();
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        // taps (0, 1): y = S x.
        let taps = vec![DMatrix::from_element(1, 1, 0.0), DMatrix::from_element(1, 1, 1.0)];
        let y = filter_apply(&s, &x, &taps).unwrap();
        assert_eq!(y[(0, 0)], 0.0);
        assert_eq!(y[(1, 0)], 0.5);
    }

    #[test]
    fn zero_input_stays_zero() {
        let s = path2_gso();
        let x = DMatrix::zeros(2, 3);
        let taps: Vec<DMatrix<f64>> =
            (0..4).map(|k| DMatrix::from_element(3, 2, k as f64 * 0.3 - 0.2)).collect();
        let y = filter_apply(&s, &x, &taps).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_explicit_powers() {
        let mut rng = crate::seed::stream(3, &[crate::seed::tag::GRAPH]);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let (f_in, f_out, k) =
                (rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=4));
            let mut s = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen::<f64>() / n as f64;
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
            let x = DMatrix::from_fn(n, f_in, |_, _| rng.gen::<f64>() - 0.5);
            let taps: Vec<DMatrix<f64>> = (0..k)
                .map(|_| DMatrix::from_fn(f_in, f_out, |_, _| rng.gen::<f64>() - 0.5))
                .collect();

            let fast = filter_apply(&s, &x, &taps).unwrap();
            let mut power = DMatrix::identity(n, n);
            let mut explicit = DMatrix::zeros(n, f_out);
            for tap in &taps {
                explicit += &power * &x * tap;
                power = &power * &s;
            }
            assert!((&fast - &explicit).abs().max() < 1e-12);
        }
    }

    #[test]
    fn forward_hand_value_with_tanh() {
        // Two-node path, x = [1, 0], taps (0, 1), one layer:
        // y = tanh(S x) = [0, tanh(0.5)].
        let mut params = ParamTensor::zeros(&[1, 1], 2).unwrap();
        params.tap_mut(0, 1)[(0, 0)] = 1.0;
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let (y, _) =
            gnn_forward(&params, &path2_gso(), &x, Activation::Tanh, Activation::Tanh).unwrap();
        assert_abs_diff_eq!(y[(0, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y[(1, 0)], 0.462117, epsilon = 1e-6);
        assert_abs_diff_eq!(y[(1, 0)], 0.5f64.tanh(), epsilon = 1e-15);
    }

    #[test]
    fn single_identity_layer_equals_filter_apply() {
        let mut rng = crate::seed::stream(5, &[crate::seed::tag::GRAPH]);
        let n = 5;
        let s = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.1 });
        let x = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>());
        let mut params = ParamTensor::zeros(&[2, 3], 3).unwrap();
        for k in 0..3 {
            *params.tap_mut(0, k) = DMatrix::from_fn(2, 3, |_, _| rng.gen::<f64>() - 0.5);
        }
        let (y, _) =
            gnn_forward(&params, &s, &x, Activation::Identity, Activation::Identity).unwrap();
        let direct = filter_apply(&s, &x, params.layer_taps(0)).unwrap();
        assert_eq!(y, direct);
    }

    #[test]
    fn readout_activation_applies_to_last_layer_only() {
        let mut params = ParamTensor::zeros(&[1, 1, 1], 1).unwrap();
        params.tap_mut(0, 0)[(0, 0)] = 1.0;
        params.tap_mut(1, 0)[(0, 0)] = 1.0;
        let s = path2_gso();
        let x = DMatrix::from_column_slice(2, 1, &[2.0, 0.0]);
        // Hidden tanh squashes, identity readout passes through: tanh(2).
        let (y, _) = gnn_forward(&params, &s, &x, Activation::Tanh, Activation::Identity).unwrap();
        assert_abs_diff_eq!(y[(0, 0)], 2.0f64.tanh(), epsilon = 1e-15);
        // Tanh readout squashes once more.
        let (y2, _) = gnn_forward(&params, &s, &x, Activation::Tanh, Activation::Tanh).unwrap();
        assert_abs_diff_eq!(y2[(0, 0)], 2.0f64.tanh().tanh(), epsilon = 1e-15);
    }

    #[test]
    fn shape_errors() {
        let s = path2_gso();
        let x3 = DMatrix::zeros(3, 1);
        let taps = vec![DMatrix::from_element(1, 1, 1.0)];
        assert!(filter_apply(&s, &x3, &taps).is_err());
        let bad_taps = vec![DMatrix::from_element(2, 1, 1.0)];
        let x2 = DMatrix::zeros(2, 1);
        assert!(filter_apply(&s, &x2, &bad_taps).is_err());
        let params = ParamTensor::zeros(&[2, 1], 1).unwrap();
        assert!(gnn_forward(&params, &s, &x2, Activation::Tanh, Activation::Tanh).is_err());
    }

    #[test]
    fn permutation_equivariance() {
        let mut rng = crate::seed::stream(9, &[crate::seed::tag::GRAPH]);
        for _ in 0..10 {
            let n = rng.gen_range(3..=8);
            let mut s = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen::<f64>() / n as f64;
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
            let x = DMatrix::from_fn(n, 2, |_, _| rng.gen::<f64>() - 0.5);
            let params = ParamTensor::random_init(&[2, 3, 1], 3, rng.gen()).unwrap();

            // Random permutation via Fisher-Yates.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let p = DMatrix::from_fn(n, n, |i, j| if perm[i] == j { 1.0 } else { 0.0 });

            let (y, _) = gnn_forward(&params, &s, &x, Activation::Tanh, Activation::Tanh).unwrap();
            let s_p = &p * &s * p.transpose();
            let x_p = &p * &x;
            let (y_p, _) =
                gnn_forward(&params, &s_p, &x_p, Activation::Tanh, Activation::Tanh).unwrap();
            assert!((&y_p - &p * &y).abs().max() < 1e-12);
        }
    }
}
