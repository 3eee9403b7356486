//! Step objects: the embeddings of finite graphs and signals back into
//! graphon space.
//!
//! A graph on `n` nodes induces the step graphon that is constant on each
//! cell `I_i x I_j` of the uniform partition `I_i = [(i-1)/n, i/n)` (with
//! the last interval closed at 1). Likewise a vector on `n` nodes induces a
//! step signal on `[0,1]`. These embeddings are what the L2 distances and
//! transfer bounds are stated over.

use nalgebra::DMatrix;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graphon::sample::SampledGraph;

/// Index of the uniform block containing `u` (last block absorbs `u = 1`).
pub(crate) fn block_index(u: f64, n: usize) -> usize {
    ((u * n as f64).floor() as usize).min(n - 1)
}

/// A piecewise-constant graphon on `n x n` uniform blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    values: DMatrix<f64>,
}

impl StepGraphon {
    /// Wraps a square symmetric block matrix with values in `[0,1]`.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        let n = values.nrows();
        if n == 0 || values.ncols() != n {
            return Err(Error::shape(format!(
                "step graphon needs a square non-empty block matrix, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[(i, j)];
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::domain(format!(
                        "step graphon block ({i},{j}) = {v} outside [0,1]"
                    )));
                }
                if values[(i, j)] != values[(j, i)] {
                    return Err(Error::domain(format!("step graphon not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(StepGraphon { values })
    }

    /// The step graphon induced by a finite graph: block `(i,j)` holds the
    /// adjacency entry, so stochastic graphs map to 0/1 steps and templates
    /// to their edge probabilities (diagonal blocks are zero either way).
    pub fn induced(graph: &SampledGraph) -> Self {
        StepGraphon { values: graph.adjacency().clone() }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Value on the block containing `(u,v)`; defined for `u, v` in `[0,1]`.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let n = self.n();
        self.values[(block_index(u, n), block_index(v, n))]
    }

    /// Exact L2 norm over `[0,1]^2`: each block contributes `value^2 / n^2`.
    pub fn l2_norm(&self) -> f64 {
        let n2 = (self.n() * self.n()) as f64;
        (self.values.iter().map(|v| v * v).sum::<f64>() / n2).sqrt()
    }
}

/// A signal on `[0,1]`: either a smooth closed form or a step function.
///
/// The smooth family is `X(u) = offset + slope*u + sine_amp*sin(pi*u)/pi`,
/// chosen because its Lipschitz constant is exactly `|slope| + |sine_amp|`
/// so normalized-Lipschitz inputs are easy to construct and to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphonSignal {
    Smooth { offset: f64, slope: f64, sine_amp: f64 },
    Step(Vec<f64>),
}

impl GraphonSignal {
    /// `X(u) = u`.
    pub fn linear() -> Self {
        GraphonSignal::Smooth { offset: 0.0, slope: 1.0, sine_amp: 0.0 }
    }

    /// `X(u) = sin(pi*u)/pi`.
    pub fn sine() -> Self {
        GraphonSignal::Smooth { offset: 0.0, slope: 0.0, sine_amp: 1.0 }
    }

    /// `X(u) = c`.
    pub fn constant(c: f64) -> Self {
        GraphonSignal::Smooth { offset: c, slope: 0.0, sine_amp: 0.0 }
    }

    /// The step signal with value `values[i]` on block `I_i`.
    pub fn step(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::shape("step signal needs at least one block".to_string()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("step signal value {v} is not finite")));
        }
        Ok(GraphonSignal::Step(values))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            GraphonSignal::Smooth { offset, slope, sine_amp } => {
                offset
                    + slope * u
                    + sine_amp * (std::f64::consts::PI * u).sin() / std::f64::consts::PI
            }
            GraphonSignal::Step(values) => values[block_index(u, values.len())],
        }
    }

    /// Values at the sampling grid `u_i = (i-1)/n` (1-indexed), i.e. the
    /// node signal a graph on `n` nodes reads off this graphon signal.
    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("signal sampling needs n >= 1".to_string()));
        }
        Ok((0..n).map(|i| self.eval(i as f64 / n as f64)).collect())
    }

    /// L2 norm on `[0,1]`; exact for steps, midpoint quadrature otherwise.
    pub fn l2_norm(&self, grid_m: usize) -> Result<f64> {
        match self {
            GraphonSignal::Step(values) => {
                Ok((values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt())
            }
            GraphonSignal::Smooth { .. } => {
                if grid_m < 2 {
                    return Err(Error::domain(format!("l2_norm needs grid_m >= 2, got {grid_m}")));
                }
                let g = grid_m as f64;
                let sum: f64 = (0..grid_m)
                    .map(|i| {
                        let x = self.eval((i as f64 + 0.5) / g);
                        x * x
                    })
                    .sum();
                Ok((sum / g).sqrt())
            }
        }
    }

    /// Lipschitz constant for smooth signals; `None` for steps, which are
    /// not Lipschitz across block boundaries.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            GraphonSignal::Smooth { slope, sine_amp, .. } => Some(slope.abs() + sine_amp.abs()),
            GraphonSignal::Step(_) => None,
        }
    }

    /// Parses `{"family": ..., "params": {...}}` with families `linear`,
    /// `sine`, `constant`, `smooth`, and `step`.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Spec {
            family: String,
            #[serde(default)]
            params: Option<Value>,
        }
        let spec: Spec = serde_json::from_value(value.clone())
            .map_err(|e| Error::config(format!("signal spec: {e}")))?;
        let params = spec.params.unwrap_or(Value::Null);
        let no_params = |params: &Value, family: &str| -> Result<()> {
            match params {
                Value::Null => Ok(()),
                Value::Object(map) if map.is_empty() => Ok(()),
                other => Err(Error::config(format!(
                    "signal family '{family}' takes no params, got {other}"
                ))),
            }
        };
        match spec.family.as_str() {
            "linear" => {
                no_params(&params, "linear")?;
                Ok(GraphonSignal::linear())
            }
            "sine" => {
                no_params(&params, "sine")?;
                Ok(GraphonSignal::sine())
            }
            "constant" => {
                #[derive(serde::Deserialize)]
                #[serde(deny_unknown_fields)]
                struct P {
                    value: f64,
                }
                let p: P = serde_json::from_value(params)
                    .map_err(|e| Error::config(format!("signal family 'constant': {e}")))?;
                Ok(GraphonSignal::constant(p.value))
            }
            "smooth" => {
                #[derive(serde::Deserialize)]
                #[serde(deny_unknown_fields)]
                struct P {
                    #[serde(default)]
                    offset: f64,
                    #[serde(default)]
                    slope: f64,
                    #[serde(default)]
                    sine_amp: f64,
                }
                let p: P = serde_json::from_value(params)
                    .map_err(|e| Error::config(format!("signal family 'smooth': {e}")))?;
                Ok(GraphonSignal::Smooth { offset: p.offset, slope: p.slope, sine_amp: p.sine_amp })
            }
            "step" => {
                #[derive(serde::Deserialize)]
                #[serde(deny_unknown_fields)]
                struct P {
                    values: Vec<f64>,
                }
                let p: P = serde_json::from_value(params)
                    .map_err(|e| Error::config(format!("signal family 'step': {e}")))?;
                GraphonSignal::step(p.values)
            }
            other => Err(Error::config(format!("unknown signal family '{other}'"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        GraphonSignal::from_json_value(&value)
    }
}
