//! Imitation losses and their gradients.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which squared-error normalization to use.
///
/// `HalfMeanSquare` divides by `2 * numel`, which makes the loss on an
/// `n`-node graph equal (up to the constant feature count) to the squared
/// L2 distance of the induced step signals. That keeps losses and
/// parameter gradients directly comparable across graph sizes, and its
/// gradient map `yhat - y -> (yhat - y)/numel` is 1-Lipschitz.
/// `HalfSquare` is the unnormalized `||.||^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    HalfMeanSquare,
    HalfSquare,
}

/// Loss value and gradient with respect to the prediction `yhat`.
pub fn loss_and_grad(
    kind: LossKind,
    y: &DMatrix<f64>,
    yhat: &DMatrix<f64>,
) -> Result<(f64, DMatrix<f64>)> {
    if y.shape() != yhat.shape() {
        return Err(Error::shape(format!(
            "loss shapes differ: target {:?} vs prediction {:?}",
            y.shape(),
            yhat.shape()
        )));
    }
    let diff = yhat - y;
    let sq = diff.iter().map(|v| v * v).sum::<f64>();
    match kind {
        LossKind::HalfMeanSquare => {
            let numel = y.len() as f64;
            Ok((sq / (2.0 * numel), diff / numel))
        }
        LossKind::HalfSquare => Ok((sq / 2.0, diff)),
    }
}
