//! Polynomial graph-convolutional networks over a fixed graph shift
//! operator.
//!
//! A layer computes `X_l = rho(sum_k S^k X_{l-1} H_lk)` where `S` is the
//! GSO, `H_lk` are `F_in x F_out` tap matrices, and `rho` is a pointwise
//! nonlinearity. The parameter tensor `{H_lk}` never depends on the graph
//! size `n`, so the same parameters run on any graph in a growing sequence;
//! everything size-dependent lives in `S` and the signals.

mod backward;
mod forward;
mod io;
mod loss;

pub use backward::{gnn_backward, output_gradient_norm};
pub use forward::{filter_apply, gnn_forward, ForwardCache, LayerCache};
pub use io::{load_params, params_to_csv, save_params};
pub use loss::{loss_and_grad, LossKind};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Pointwise nonlinearity. All variants preserve zero, so an all-zero
/// input signal propagates to an all-zero output regardless of depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// Default: 1-Lipschitz with 1-Lipschitz derivative, as the gradient
    /// approximation bounds assume.
    Tanh,
    Identity,
    /// Outside the smoothness assumptions (the derivative jumps at 0) but
    /// available for experiments.
    Relu,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative at `z`; ReLU uses the subgradient choice `rho'(0) = 0`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::config(format!("unknown activation '{other}'"))),
        }
    }
}

/// The full parameter set of a GNN: `taps[l][k]` is the `F_l x F_{l+1}`
/// tap matrix of order `k` in layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor {
    dims: Vec<usize>,
    taps: Vec<Vec<DMatrix<f64>>>,
}

impl ParamTensor {
    /// All-zero parameters for `dims = [F_0, ..., F_L]` with `K` taps per
    /// layer.
    pub fn zeros(dims: &[usize], k: usize) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::shape(format!(
                "ParamTensor needs at least input and output dims, got {dims:?}"
            )));
        }
        if dims.contains(&0) || k == 0 {
            return Err(Error::shape(format!("dims and K must be >= 1, got dims {dims:?}, K {k}")));
        }
        let taps =
            dims.windows(2).map(|w| (0..k).map(|_| DMatrix::zeros(w[0], w[1])).collect()).collect();
        Ok(ParamTensor { dims: dims.to_vec(), taps })
    }

    /// Independent uniform draws on `[-a, a]` with
    /// `a = 1/(K * max(F_in, F_out))` per layer; deterministic per seed.
    pub fn random_init(dims: &[usize], k: usize, seed_value: u64) -> Result<Self> {
        let mut params = ParamTensor::zeros(dims, k)?;
        let mut rng = seed::stream(seed_value, &[seed::tag::PARAM_INIT]);
        for l in 0..params.layers() {
            let a = 1.0 / (k * params.dims[l].max(params.dims[l + 1])) as f64;
            for tap in &mut params.taps[l] {
                for i in 0..tap.nrows() {
                    for j in 0..tap.ncols() {
                        tap[(i, j)] = a * (2.0 * rng.gen::<f64>() - 1.0);
                    }
                }
            }
        }
        Ok(params)
    }

    /// `[F_0, ..., F_L]`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layers(&self) -> usize {
        self.taps.len()
    }

    pub fn taps_per_layer(&self) -> usize {
        self.taps[0].len()
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// The width `F` entering the architecture constants: the largest
    /// hidden dimension, or 1 for single-layer networks without one.
    pub fn hidden_width(&self) -> usize {
        self.dims[1..self.dims.len() - 1].iter().copied().max().unwrap_or(1)
    }

    pub fn tap(&self, l: usize, k: usize) -> &DMatrix<f64> {
        &self.taps[l][k]
    }

    pub fn tap_mut(&mut self, l: usize, k: usize) -> &mut DMatrix<f64> {
        &mut self.taps[l][k]
    }

    pub fn layer_taps(&self, l: usize) -> &[DMatrix<f64>] {
        &self.taps[l]
    }

    pub fn param_count(&self) -> usize {
        self.taps.iter().flatten().map(|t| t.len()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.taps.iter().flatten().flat_map(|t| t.iter()).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self += alpha * other`; shapes must match.
    pub fn add_scaled(&mut self, other: &ParamTensor, alpha: f64) -> Result<()> {
        self.check_same_shape(other)?;
        for (mine, theirs) in self.taps.iter_mut().flatten().zip(other.taps.iter().flatten()) {
            *mine += theirs * alpha;
        }
        Ok(())
    }

    /// `self *= alpha`.
    pub fn scale(&mut self, alpha: f64) {
        for tap in self.taps.iter_mut().flatten() {
            *tap *= alpha;
        }
    }

    /// Frobenius distance `||self - other||`.
    pub fn distance_to(&self, other: &ParamTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        let sum: f64 = self
            .taps
            .iter()
            .flatten()
            .zip(other.taps.iter().flatten())
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
            .sum();
        Ok(sum.sqrt())
    }

    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.taps.iter().flatten().flat_map(|t| t.iter().copied())
    }

    pub fn has_finite_values(&self) -> bool {
        self.iter_values().all(|v| v.is_finite())
    }

    fn check_same_shape(&self, other: &ParamTensor) -> Result<()> {
        if self.dims != other.dims || self.taps_per_layer() != other.taps_per_layer() {
            return Err(Error::shape(format!(
                "parameter shape mismatch: dims {:?} K {} vs dims {:?} K {}",
                self.dims,
                self.taps_per_layer(),
                other.dims,
                other.taps_per_layer()
            )));
        }
        Ok(())
    }
}

/// Rescales each per-pair tap sequence so its 1-norm is at most
/// `1 - margin`, which caps the spectral response at `1 - margin` on all
/// of `[-1, 1]` and makes every layer non-amplifying. Taps already inside
/// the cap are untouched, so the projection is idempotent.
pub fn project_nonamplifying(params: &ParamTensor, margin: f64) -> Result<ParamTensor> {
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::domain(format!("margin must be in [0,1), got {margin}")));
    }
    let cap = 1.0 - margin;
    let mut out = params.clone();
    let k = params.taps_per_layer();
    for l in 0..params.layers() {
        let (rows, cols) = (params.dims[l], params.dims[l + 1]);
        for g in 0..rows {
            for f in 0..cols {
                let norm1: f64 = (0..k).map(|t| params.tap(l, t)[(g, f)].abs()).sum();
                if norm1 > cap {
                    let scale = cap / norm1;
                    for t in 0..k {
                        out.tap_mut(l, t)[(g, f)] *= scale;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Polynomial frequency response `h(lambda) = sum_k taps[k] * lambda^k` on
/// the GSO spectrum domain `[-1, 1]`.
pub fn spectral_response(taps: &[f64], lambda: f64) -> Result<f64> {
    if taps.is_empty() {
        return Err(Error::shape("spectral_response needs at least one tap"));
    }
    if !(-1.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda must be in [-1,1], got {lambda}")));
    }
    // Horner evaluation from the highest order down.
    let mut acc = 0.0;
    for &h in taps.iter().rev() {
        acc = acc * lambda + h;
    }
    Ok(acc)
}

/// Parameter-gradient norm cap `F^(2L) * sqrt(K)` for non-amplifying
/// filters and unit-norm input.
pub fn grad_norm_bound(l: usize, f: usize, k: usize) -> Result<f64> {
    if l == 0 || f == 0 || k == 0 {
        return Err(Error::domain(format!(
            "grad_norm_bound needs L, F, K >= 1, got ({l},{f},{k})"
        )));
    }
    Ok((f as f64).powi(2 * l as i32) * (k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn activations_preserve_zero() {
        for act in [Activation::Tanh, Activation::Identity, Activation::Relu] {
            assert_eq!(act.apply(0.0), 0.0);
        }
    }

    #[test]
    fn activation_derivatives_match_finite_differences() {
        let h = 1e-7;
        for act in [Activation::Tanh, Activation::Identity] {
            for z in [-2.0, -0.3, 0.0, 0.7, 1.9] {
                let fd = (act.apply(z + h) - act.apply(z - h)) / (2.0 * h);
                assert_abs_diff_eq!(act.derivative(z), fd, epsilon = 1e-6);
            }
        }
        assert_eq!(Activation::Relu.derivative(1.0), 1.0);
        assert_eq!(Activation::Relu.derivative(-1.0), 0.0);
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
    }

    #[test]
    fn activation_names_round_trip() {
        for act in [Activation::Tanh, Activation::Identity, Activation::Relu] {
            assert_eq!(Activation::from_name(act.name()).unwrap(), act);
        }
        assert!(Activation::from_name("sigmoid").is_err());
    }

    #[test]
    fn zeros_shapes_and_counts() {
        let p = ParamTensor::zeros(&[1, 4, 2], 3).unwrap();
        assert_eq!(p.layers(), 2);
        assert_eq!(p.taps_per_layer(), 3);
        assert_eq!(p.tap(0, 0).shape(), (1, 4));
        assert_eq!(p.tap(1, 2).shape(), (4, 2));
        assert_eq!(p.param_count(), 3 * 4 + 3 * 8);
        assert_eq!(p.hidden_width(), 4);
        assert_eq!(ParamTensor::zeros(&[1, 1], 2).unwrap().hidden_width(), 1);
        assert!(ParamTensor::zeros(&[3], 1).is_err());
        assert!(ParamTensor::zeros(&[1, 0, 1], 1).is_err());
        assert!(ParamTensor::zeros(&[1, 1], 0).is_err());
    }

    #[test]
    fn random_init_range_and_determinism() {
        let dims = [2usize, 3, 1];
        let p = ParamTensor::random_init(&dims, 4, 7).unwrap();
        let q = ParamTensor::random_init(&dims, 4, 7).unwrap();
        assert_eq!(p, q);
        let r = ParamTensor::random_init(&dims, 4, 8).unwrap();
        assert_ne!(p, r);
        for l in 0..2 {
            let a = 1.0 / (4 * dims[l].max(dims[l + 1])) as f64;
            for k in 0..4 {
                assert!(p.tap(l, k).iter().all(|v| v.abs() <= a));
            }
        }
    }

    #[test]
    fn projection_rescales_overweight_pairs() {
        let mut p = ParamTensor::zeros(&[1, 1], 2).unwrap();
        p.tap_mut(0, 0)[(0, 0)] = 2.0;
        let projected = project_nonamplifying(&p, 1e-3).unwrap();
        assert_abs_diff_eq!(projected.tap(0, 0)[(0, 0)], 0.999, epsilon = 1e-12);
        assert_eq!(projected.tap(0, 1)[(0, 0)], 0.0);
        // Idempotent, and a no-op within the cap.
        let twice = project_nonamplifying(&projected, 1e-3).unwrap();
        assert_eq!(projected, twice);
        let mut small = ParamTensor::zeros(&[1, 1], 2).unwrap();
        small.tap_mut(0, 0)[(0, 0)] = 0.4;
        small.tap_mut(0, 1)[(0, 0)] = -0.3;
        assert_eq!(project_nonamplifying(&small, 1e-3).unwrap(), small);
    }

    #[test]
    fn projection_caps_spectral_response() {
        use rand::Rng;
        let mut rng = crate::seed::stream(11, &[crate::seed::tag::PARAM_INIT]);
        for _ in 0..50 {
            let mut p = ParamTensor::zeros(&[1, 1], 5).unwrap();
            for k in 0..5 {
                p.tap_mut(0, k)[(0, 0)] = 4.0 * rng.gen::<f64>() - 2.0;
            }
            let projected = project_nonamplifying(&p, 1e-3).unwrap();
            let taps: Vec<f64> = (0..5).map(|k| projected.tap(0, k)[(0, 0)]).collect();
            for i in 0..=100 {
                let lambda = -1.0 + 0.02 * i as f64;
                let h = spectral_response(&taps, lambda).unwrap();
                assert!(h.abs() <= 1.0 - 1e-3 + 1e-12, "|h({lambda})| = {} escapes cap", h.abs());
            }
        }
    }

    #[test]
    fn spectral_response_hand_values() {
        assert_abs_diff_eq!(
            spectral_response(&[1.0, 2.0, 3.0], 0.5).unwrap(),
            2.75,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            spectral_response(&[1.0, 2.0, 3.0], 0.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(spectral_response(&[1.0], 1.5).is_err());
        assert!(spectral_response(&[], 0.5).is_err());
    }

    #[test]
    fn grad_norm_bound_values() {
        assert_abs_diff_eq!(grad_norm_bound(2, 2, 4).unwrap(), 32.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grad_norm_bound(3, 1, 9).unwrap(), 3.0, epsilon = 1e-12);
        assert!(grad_norm_bound(0, 1, 1).is_err());
    }

    #[test]
    fn add_scaled_and_distance() {
        let mut p = ParamTensor::zeros(&[1, 1], 1).unwrap();
        let mut g = ParamTensor::zeros(&[1, 1], 1).unwrap();
        p.tap_mut(0, 0)[(0, 0)] = 1.0;
        g.tap_mut(0, 0)[(0, 0)] = 1.0;
        p.add_scaled(&g, -0.1).unwrap();
        assert_abs_diff_eq!(p.tap(0, 0)[(0, 0)], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(p.distance_to(&g).unwrap(), 0.1, epsilon = 1e-12);
        let other = ParamTensor::zeros(&[1, 2, 1], 1).unwrap();
        assert!(p.add_scaled(&other, 1.0).is_err());
        assert!(p.distance_to(&other).is_err());
    }
}
