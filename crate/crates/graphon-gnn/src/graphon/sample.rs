//! Template and stochastic graphs sampled from a graphon.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

/// Whether a graph still carries edge probabilities (template) or realized
/// 0/1 edges (stochastic).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Template,
    Stochastic,
}

/// A finite graph on the graphon grid, stored as a dense symmetric adjacency
/// with zero diagonal. The graph shift operator is fixed to `A/n`, which
/// keeps every eigenvalue in `[-1,1]` and makes graph convolutions converge
/// to their graphon counterparts as `n` grows.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    kind: GraphKind,
    adjacency: DMatrix<f64>,
}

impl SampledGraph {
    pub(crate) fn template(adjacency: DMatrix<f64>) -> Self {
        SampledGraph { kind: GraphKind::Template, adjacency }
    }

    /// Wraps an externally built 0/1 adjacency (square, symmetric, zero
    /// diagonal) as a stochastic graph.
    pub fn stochastic(adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n || n == 0 {
            return Err(Error::shape(format!(
                "adjacency must be square and non-empty, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::domain(format!("adjacency has a self-loop at node {i}")));
            }
            for j in 0..n {
                let v = adjacency[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::domain(format!(
                        "stochastic adjacency entry ({i},{j}) = {v} is not 0/1"
                    )));
                }
                if adjacency[(i, j)] != adjacency[(j, i)] {
                    return Err(Error::domain(format!("adjacency is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(SampledGraph { kind: GraphKind::Stochastic, adjacency })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Graph shift operator `S = A/n`.
    pub fn gso(&self) -> DMatrix<f64> {
        &self.adjacency / self.n() as f64
    }

    /// Mean off-diagonal weight: realized edge fraction for stochastic
    /// graphs, expected edge fraction for templates. Defined as 0 for n = 1.
    pub fn edge_density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                total += self.adjacency[(i, j)];
            }
        }
        total / (n * (n - 1) / 2) as f64
    }
}

/// Realizes a stochastic graph from a template: each upper-triangle entry
/// becomes an independent Bernoulli edge with the template weight as its
/// probability, mirrored below the diagonal. Deterministic per seed.
pub fn sample_stochastic(template: &SampledGraph, seed_value: u64) -> Result<SampledGraph> {
    if template.kind() != GraphKind::Template {
        return Err(Error::domain(
            "sample_stochastic takes a template graph, got a stochastic one".to_string(),
        ));
    }
    let n = template.n();
    let mut rng = seed::stream(seed_value, &[seed::tag::GRAPH, n as u64]);
    let mut adjacency = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            // gen() is in [0,1), so p = 0 never fires and p = 1 always does.
            let edge = rng.gen::<f64>() < template.adjacency[(i, j)];
            if edge {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    Ok(SampledGraph { kind: GraphKind::Stochastic, adjacency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::Graphon;

    #[test]
    fn extreme_probabilities_are_deterministic() {
        let full = Graphon::constant(1.0).unwrap().template_graph(6).unwrap();
        let g = sample_stochastic(&full, 0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 0.0 } else { 1.0 };
                assert_eq!(g.adjacency()[(i, j)], expect);
            }
        }
        let empty = Graphon::constant(0.0).unwrap().template_graph(6).unwrap();
        let g = sample_stochastic(&empty, 0).unwrap();
        assert_eq!(g.adjacency().sum(), 0.0);
    }

    #[test]
    fn sampling_is_symmetric_and_loop_free() {
        let t = Graphon::Additive.template_graph(20).unwrap();
        let g = sample_stochastic(&t, 99).unwrap();
        assert_eq!(g.adjacency(), &g.adjacency().transpose());
        for i in 0..20 {
            assert_eq!(g.adjacency()[(i, i)], 0.0);
        }
        assert_eq!(g.kind(), GraphKind::Stochastic);
    }

    #[test]
    fn same_seed_same_graph() {
        let t = Graphon::Additive.template_graph(30).unwrap();
        let a = sample_stochastic(&t, 1234).unwrap();
        let b = sample_stochastic(&t, 1234).unwrap();
        assert_eq!(a.adjacency(), b.adjacency());
        let c = sample_stochastic(&t, 1235).unwrap();
        assert_ne!(a.adjacency(), c.adjacency());
    }

    #[test]
    fn rejects_resampling_a_stochastic_graph() {
        let t = Graphon::constant(0.5).unwrap().template_graph(5).unwrap();
        let g = sample_stochastic(&t, 1).unwrap();
        assert!(sample_stochastic(&g, 2).is_err());
    }

    #[test]
    fn mean_edge_density_tracks_probability() {
        // 1000 stochastic draws of an Erdos-Renyi(0.5) graph on 100 nodes.
        // The density estimator averages 1000 * 4950 Bernoullis, so +-0.01
        // is over 50 standard errors.
        let t = Graphon::constant(0.5).unwrap().template_graph(100).unwrap();
        let mean: f64 =
            (0..1000).map(|k| sample_stochastic(&t, k).unwrap().edge_density()).sum::<f64>()
                / 1000.0;
        assert!((mean - 0.5).abs() < 0.01, "mean density {mean} too far from 0.5");
    }

    #[test]
    fn gso_divides_by_n() {
        let t = Graphon::constant(1.0).unwrap().template_graph(4).unwrap();
        let g = sample_stochastic(&t, 0).unwrap();
        let s = g.gso();
        assert_eq!(s[(0, 1)], 0.25);
        assert_eq!(s[(0, 0)], 0.0);
    }

    #[test]
    fn stochastic_wrapper_validates() {
        let ok = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(SampledGraph::stochastic(ok).is_ok());
        let loops = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(SampledGraph::stochastic(loops).is_err());
        let weighted = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert!(SampledGraph::stochastic(weighted).is_err());
    }
}
