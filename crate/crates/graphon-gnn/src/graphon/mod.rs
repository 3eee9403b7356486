//! Graphon families and the operations that connect them to finite graphs.
//!
//! A graphon is a symmetric measurable `W: [0,1]^2 -> [0,1]`. Evaluating `W`
//! on the regular grid `u_i = (i-1)/n` yields a weighted template graph;
//! drawing Bernoulli edges from the template yields a stochastic graph. Both
//! embed back into graphon space as step functions, which is what lets a
//! fixed quadrature distance compare a graphon against any of its sampled
//! graphs.

mod bounds;
mod distance;
mod sample;
mod spectral;
mod step;

pub use bounds::{connectivity_check, gamma_constant, ConnectivityReport};
pub use distance::{l2_graphon_distance, l2_signal_distance, GraphonKernel};
pub use sample::{sample_stochastic, GraphKind, SampledGraph};
pub use spectral::{eigen_desc, eigenvalues_desc, spectral_summary, SpectralSummary};
pub use step::{GraphonSignal, StepGraphon};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A bounded symmetric kernel on `[0,1]^2` with values in `[0,1]`.
///
/// Families are closed under the operations in this module: each knows its
/// own Lipschitz constant, so callers can check the normalized-Lipschitz
/// assumption that the approximation bounds require.
#[derive(Debug, Clone, PartialEq)]
pub enum Graphon {
    /// `W(u,v) = p` (Erdos-Renyi limit).
    Constant { p: f64 },
    /// `W(u,v) = u*v`.
    Product,
    /// `W(u,v) = (u+v)/2`.
    Additive,
    /// `W(u,v) = exp(-beta*|u-v|)`.
    ExpDistance { beta: f64 },
    /// Bilinear interpolation of a symmetric `m x m` table with values in
    /// `[0,1]`, grid points at `j/(m-1)`.
    Grid { table: DMatrix<f64> },
}

impl Graphon {
    pub fn constant(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(Error::domain(format!("constant graphon needs p in [0,1], got {p}")));
        }
        Ok(Graphon::Constant { p })
    }

    pub fn exp_distance(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::domain(format!("exp_distance graphon needs beta >= 0, got {beta}")));
        }
        Ok(Graphon::ExpDistance { beta })
    }

    /// Builds the grid family from an explicit table. The table must be
    /// square with side >= 2, symmetric, and valued in `[0,1]`.
    pub fn grid(table: DMatrix<f64>) -> Result<Self> {
        let m = table.nrows();
        if m < 2 || table.ncols() != m {
            return Err(Error::domain(format!(
                "grid graphon needs a square table with side >= 2, got {}x{}",
                table.nrows(),
                table.ncols()
            )));
        }
        for i in 0..m {
            for j in 0..m {
                let v = table[(i, j)];
                if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                    return Err(Error::domain(format!(
                        "grid table entry ({i},{j}) = {v} outside [0,1]"
                    )));
                }
                if table[(i, j)] != table[(j, i)] {
                    return Err(Error::domain(format!("grid table is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Graphon::Grid { table })
    }

    /// Loads a grid table from CSV: row-major, comma-separated, no header.
    pub fn grid_from_csv(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::config(format!(
                            "grid csv line {}: cannot parse '{}' as a number",
                            line_no + 1,
                            cell.trim()
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::config(format!(
                "grid csv must be square: got {m} rows with unequal lengths"
            )));
        }
        let table = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
        Graphon::grid(table)
    }

    /// Evaluates `W(u,v)`. Errors if either coordinate leaves `[0,1]`.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("graphon arguments ({u},{v}) outside [0,1]^2")));
        }
        Ok(self.eval_unchecked(u, v))
    }

    /// Evaluation without the domain check, for quadrature loops whose grid
    /// points are in `[0,1]` by construction.
    pub(crate) fn eval_unchecked(&self, u: f64, v: f64) -> f64 {
        match self {
            Graphon::Constant { p } => *p,
            Graphon::Product => u * v,
            Graphon::Additive => (u + v) / 2.0,
            Graphon::ExpDistance { beta } => (-beta * (u - v).abs()).exp(),
            Graphon::Grid { table } => bilinear(table, u, v),
        }
    }

    /// A constant `A` such that `|W(u,v) - W(u',v')| <= A(|u-u'| + |v-v'|)`.
    /// The approximation bounds assume `A <= 1` (normalized Lipschitz).
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            Graphon::Constant { .. } => 0.0,
            Graphon::Product => 1.0,
            Graphon::Additive => 0.5,
            Graphon::ExpDistance { beta } => *beta,
            Graphon::Grid { table } => {
                let m = table.nrows();
                let mut max_diff = 0.0f64;
                for i in 0..m {
                    for j in 0..m {
                        if i + 1 < m {
                            max_diff = max_diff.max((table[(i + 1, j)] - table[(i, j)]).abs());
                        }
                        if j + 1 < m {
                            max_diff = max_diff.max((table[(i, j + 1)] - table[(i, j)]).abs());
                        }
                    }
                }
                (m as f64 - 1.0) * max_diff
            }
        }
    }

    pub fn is_normalized_lipschitz(&self) -> bool {
        self.lipschitz_constant() <= 1.0
    }

    /// Maximum degree `d_W = max_v int W(u,v) du`, estimated by midpoint
    /// quadrature on `grid_m` points in each coordinate.
    pub fn max_degree(&self, grid_m: usize) -> Result<f64> {
        if grid_m < 2 {
            return Err(Error::domain(format!("max_degree needs grid_m >= 2, got {grid_m}")));
        }
        let g = grid_m as f64;
        let mut best = 0.0f64;
        for j in 0..grid_m {
            let v = (j as f64 + 0.5) / g;
            let mut acc = 0.0;
            for i in 0..grid_m {
                let u = (i as f64 + 0.5) / g;
                acc += self.eval_unchecked(u, v);
            }
            best = best.max(acc / g);
        }
        Ok(best)
    }

    /// Weighted template graph on `n` nodes: entry `(i,j)`, `i != j`, is
    /// `W(u_i, u_j)` at the grid points `u_i = (i-1)/n` (1-indexed); the
    /// diagonal is zero so the template is a loop-free weighted adjacency.
    pub fn template_graph(&self, n: usize) -> Result<SampledGraph> {
        if n == 0 {
            return Err(Error::domain("template_graph needs n >= 1".to_string()));
        }
        let nf = n as f64;
        let adjacency = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                self.eval_unchecked(i as f64 / nf, j as f64 / nf)
            }
        });
        Ok(SampledGraph::template(adjacency))
    }

    /// Step-function approximation of `W` on `n` uniform blocks, diagonal
    /// included: block `(i,j)` holds `W(u_i, u_j)`.
    ///
    /// This is the object the `2/n` approximation bound speaks about. It is
    /// intentionally not the induced step graphon of [`Self::template_graph`],
    /// whose zeroed diagonal carries `O(n^{-1/2})` of L2 mass and would
    /// break the bound for n >= 16.
    pub fn step_graphon(&self, n: usize) -> Result<StepGraphon> {
        if n == 0 {
            return Err(Error::domain("step_graphon needs n >= 1".to_string()));
        }
        let nf = n as f64;
        let values =
            DMatrix::from_fn(n, n, |i, j| self.eval_unchecked(i as f64 / nf, j as f64 / nf));
        StepGraphon::new(values)
    }

    /// Parses the JSON form `{"family": ..., "params": {...}}`.
    pub fn from_json_value(value: &Value) -> Result<Self> {
        let spec: GraphonSpec = serde_json::from_value(value.clone())
            .map_err(|e| Error::config(format!("graphon spec: {e}")))?;
        let params = spec.params.unwrap_or(Value::Null);
        match spec.family.as_str() {
            "constant" => {
                let p: ConstantParams = parse_params(params, "constant")?;
                Graphon::constant(p.p)
            }
            "product" => {
                no_params(params, "product")?;
                Ok(Graphon::Product)
            }
            "additive" => {
                no_params(params, "additive")?;
                Ok(Graphon::Additive)
            }
            "exp_distance" => {
                let p: ExpDistanceParams = parse_params(params, "exp_distance")?;
                Graphon::exp_distance(p.beta)
            }
            "grid" => {
                let p: GridParams = parse_params(params, "grid")?;
                match (p.path, p.values) {
                    (Some(path), None) => Graphon::grid_from_csv(path),
                    (None, Some(rows)) => {
                        let m = rows.len();
                        if rows.iter().any(|r| r.len() != m) {
                            return Err(Error::config("grid values must form a square table"));
                        }
                        Graphon::grid(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
                    }
                    _ => Err(Error::config("grid graphon needs exactly one of 'path' or 'values'")),
                }
            }
            other => Err(Error::config(format!("unknown graphon family '{other}'"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Graphon::from_json_value(&value)
    }

    /// Serializes to the same JSON form `from_json` accepts. Grid tables are
    /// inlined as `values` so the output is self-contained.
    pub fn to_json_value(&self) -> Value {
        match self {
            Graphon::Constant { p } => {
                serde_json::json!({"family": "constant", "params": {"p": p}})
            }
            Graphon::Product => serde_json::json!({"family": "product"}),
            Graphon::Additive => serde_json::json!({"family": "additive"}),
            Graphon::ExpDistance { beta } => {
                serde_json::json!({"family": "exp_distance", "params": {"beta": beta}})
            }
            Graphon::Grid { table } => {
                let rows: Vec<Vec<f64>> = (0..table.nrows())
                    .map(|i| (0..table.ncols()).map(|j| table[(i, j)]).collect())
                    .collect();
                serde_json::json!({"family": "grid", "params": {"values": rows}})
            }
        }
    }
}

fn bilinear(table: &DMatrix<f64>, u: f64, v: f64) -> f64 {
    let m = table.nrows();
    let scale = (m - 1) as f64;
    let x = u * scale;
    let y = v * scale;
    let i0 = (x.floor() as usize).min(m - 2);
    let j0 = (y.floor() as usize).min(m - 2);
    let fx = x - i0 as f64;
    let fy = y - j0 as f64;
    (1.0 - fx) * (1.0 - fy) * table[(i0, j0)]
        + fx * (1.0 - fy) * table[(i0 + 1, j0)]
        + (1.0 - fx) * fy * table[(i0, j0 + 1)]
        + fx * fy * table[(i0 + 1, j0 + 1)]
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphonSpec {
    family: String,
    #[serde(default)]
    params: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpDistanceParams {
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridParams {
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    values: Option<Vec<Vec<f64>>>,
}

fn parse_params<T: serde::de::DeserializeOwned>(params: Value, family: &str) -> Result<T> {
    serde_json::from_value(params)
        .map_err(|e| Error::config(format!("graphon family '{family}': {e}")))
}

fn no_params(params: Value, family: &str) -> Result<()> {
    match params {
        Value::Null => Ok(()),
        Value::Object(map) if map.is_empty() => Ok(()),
        other => {
            Err(Error::config(format!("graphon family '{family}' takes no params, got {other}")))
        }
    }
}
