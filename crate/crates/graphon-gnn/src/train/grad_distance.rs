//! Monte-Carlo estimate of the gradient gap between a finite training
//! graph and the graphon limit.
//!
//! The limit-side gradient is not computable directly, so it is stood in
//! for by the gradient on a large reference graph sampled from the same
//! graphon (its own bias decays with the reference size, which is why a
//! much larger `ref_n` works as a proxy). Each trial draws a fresh
//! signal pair and fresh graphs at both sizes from trial-indexed seeds,
//! evaluates the same parameter tensor on both, and records the Frobenius
//! distance between the two gradient tensors. The expectation is taken
//! over both graph and signal draws.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gnn::{gnn_backward, gnn_forward, loss_and_grad, Activation, LossKind, ParamTensor};
use crate::graphon::{sample_stochastic, Graphon, GraphonSignal};
use crate::seed;

/// Per-trial gradient distances with their mean and median.
#[derive(Debug, Clone, PartialEq)]
pub struct GradDistanceEstimate {
    pub per_trial: Vec<f64>,
    pub mean: f64,
    pub median: f64,
}

impl GradDistanceEstimate {
    fn from_trials(mut per_trial: Vec<f64>) -> Self {
        let mean = per_trial.iter().sum::<f64>() / per_trial.len() as f64;
        let mut sorted = per_trial.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let mid = sorted.len() / 2;
        let median =
            if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
        per_trial.shrink_to_fit();
        GradDistanceEstimate { per_trial, mean, median }
    }
}

/// Supplies the estimator's per-trial signal pairs: one input signal per
/// network input feature and one label signal per output feature. The
/// label may be built from the reference graph (e.g. a teacher network's
/// output read back as a step signal), which is why the reference GSO is
/// passed in.
pub trait SignalPairSource {
    fn draw_pair(
        &self,
        ref_gso: &DMatrix<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<GraphonSignal>, Vec<GraphonSignal>)>;
}

fn signals_to_matrix(signals: &[GraphonSignal], n: usize) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(n, signals.len());
    for (col, sig) in signals.iter().enumerate() {
        for (row, value) in sig.sample(n)?.into_iter().enumerate() {
            out[(row, col)] = value;
        }
    }
    Ok(out)
}

fn side_gradient(
    params: &ParamTensor,
    gso: &DMatrix<f64>,
    x_sigs: &[GraphonSignal],
    y_sigs: &[GraphonSignal],
    hidden: Activation,
    readout: Activation,
    loss: LossKind,
) -> Result<ParamTensor> {
    let n = gso.nrows();
    let x = signals_to_matrix(x_sigs, n)?;
    let y = signals_to_matrix(y_sigs, n)?;
    let (yhat, cache) = gnn_forward(params, gso, &x, hidden, readout)?;
    let (_, d_yhat) = loss_and_grad(loss, &y, &yhat)?;
    gnn_backward(params, &cache, gso, &d_yhat, hidden, readout)
}

/// Estimates the expected Frobenius distance between the loss gradient on
/// an `n`-node stochastic graph and on a `ref_n`-node reference graph,
/// both sampled from `graphon`, at the given parameters.
///
/// Trials run in parallel; per-trial seeds derive from the trial index
/// alone, so the result is bitwise independent of thread count and trial
/// execution order. With `n == ref_n` the two sides see identical graphs
/// and signals and every trial distance is exactly zero.
#[allow(clippy::too_many_arguments)]
pub fn grad_distance_estimate<S: SignalPairSource + Sync>(
    params: &ParamTensor,
    graphon: &Graphon,
    n: usize,
    ref_n: usize,
    trials: usize,
    source: &S,
    hidden: Activation,
    readout: Activation,
    loss: LossKind,
    seed_value: u64,
) -> Result<GradDistanceEstimate> {
    if n == 0 || n > ref_n {
        return Err(Error::domain(format!("need 1 <= n <= ref_n, got n {n}, ref_n {ref_n}")));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let template_n = graphon.template_graph(n)?;
    let template_ref = graphon.template_graph(ref_n)?;

    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let trial_seed = seed::derive(seed_value, &[seed::tag::TRIAL, t]);
            let graph_n = sample_stochastic(&template_n, trial_seed)?;
            let graph_ref = sample_stochastic(&template_ref, trial_seed)?;
            let ref_gso = graph_ref.gso();
            let mut rng = seed::stream(trial_seed, &[seed::tag::SIGNAL]);
            let (x_sigs, y_sigs) = source.draw_pair(&ref_gso, &mut rng)?;
            if x_sigs.len() != params.input_dim() || y_sigs.len() != params.output_dim() {
                return Err(Error::shape(format!(
                    "signal pair has ({}, {}) features but the network expects ({}, {})",
                    x_sigs.len(),
                    y_sigs.len(),
                    params.input_dim(),
                    params.output_dim()
                )));
            }
            let grad_n =
                side_gradient(params, &graph_n.gso(), &x_sigs, &y_sigs, hidden, readout, loss)?;
            let grad_ref =
                side_gradient(params, &ref_gso, &x_sigs, &y_sigs, hidden, readout, loss)?;
            grad_n.distance_to(&grad_ref)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GradDistanceEstimate::from_trials(per_trial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::project_nonamplifying;
    use crate::train::teacher::test_task;
    use approx::assert_abs_diff_eq;

    fn projected_params(seed_value: u64) -> ParamTensor {
        let p = ParamTensor::random_init(&[1, 4, 1], 3, seed_value).unwrap();
        project_nonamplifying(&p, 0.05).unwrap()
    }

    #[test]
    fn equal_sizes_give_exactly_zero() {
        let task = test_task(1);
        let params = projected_params(11);
        let est = grad_distance_estimate(
            &params,
            task.graphon(),
            24,
            24,
            5,
            &task,
            Activation::Tanh,
            Activation::Identity,
            LossKind::HalfMeanSquare,
            99,
        )
        .unwrap();
        assert!(est.per_trial.iter().all(|&d| d == 0.0));
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.median, 0.0);
    }

    #[test]
    fn estimate_is_deterministic_and_seed_sensitive() {
        let task = test_task(1);
        let params = projected_params(4);
        let run = |seed_value| {
            grad_distance_estimate(
                &params,
                task.graphon(),
                12,
                48,
                6,
                &task,
                Activation::Tanh,
                Activation::Identity,
                LossKind::HalfMeanSquare,
                seed_value,
            )
            .unwrap()
        };
        let a = run(7);
        let b = run(7);
        assert!(a.per_trial.iter().zip(&b.per_trial).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = run(8);
        assert_ne!(a.per_trial, c.per_trial);
    }

    #[test]
    fn result_does_not_depend_on_thread_count() {
        let task = test_task(1);
        let params = projected_params(4);
        let run = || {
            grad_distance_estimate(
                &params,
                task.graphon(),
                10,
                40,
                8,
                &task,
                Activation::Tanh,
                Activation::Identity,
                LossKind::HalfMeanSquare,
                21,
            )
            .unwrap()
        };
        let parallel = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(run);
        assert!(parallel
            .per_trial
            .iter()
            .zip(&serial.per_trial)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn mean_and_median_reductions() {
        let est = GradDistanceEstimate::from_trials(vec![3.0, 1.0, 2.0]);
        assert_abs_diff_eq!(est.mean, 2.0);
        assert_abs_diff_eq!(est.median, 2.0);
        let even = GradDistanceEstimate::from_trials(vec![4.0, 1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(even.median, 2.5);
        assert_abs_diff_eq!(even.mean, 2.5);
    }

    #[test]
    fn rejects_bad_arguments() {
        let task = test_task(1);
        let params = projected_params(4);
        let call = |n, ref_n, trials| {
            grad_distance_estimate(
                &params,
                task.graphon(),
                n,
                ref_n,
                trials,
                &task,
                Activation::Tanh,
                Activation::Identity,
                LossKind::HalfMeanSquare,
                0,
            )
        };
        assert!(call(0, 8, 1).is_err());
        assert!(call(16, 8, 1).is_err());
        assert!(call(4, 8, 0).is_err());
    }

    #[test]
    fn estimate_shrinks_as_n_grows() {
        let task = test_task(1);
        let params = projected_params(2);
        let run = |n| {
            grad_distance_estimate(
                &params,
                task.graphon(),
                n,
                256,
                20,
                &task,
                Activation::Tanh,
                Activation::Identity,
                LossKind::HalfMeanSquare,
                5,
            )
            .unwrap()
            .median
        };
        let small = run(8);
        let large = run(64);
        assert!(
            large < small,
            "median distance should shrink with n: n=8 gives {small}, n=64 gives {large}"
        );
    }
}
