//! Transferability constants and sampling-regime checks.

use crate::error::{Error, Result};
use crate::graphon::Graphon;

/// The architecture constant `gamma = 12 * sqrt(K * F^(L-1)) * L^2 * F^(2L-2)`
/// that scales the non-transferable part of the gradient approximation
/// bound: gradients on sampled graphs approach the graphon gradient up to
/// `gamma * c` plus a term vanishing in the graph size, where `c` is the
/// spectral band threshold.
pub fn gamma_constant(l: usize, f: usize, k: usize) -> Result<f64> {
    if l == 0 || f == 0 || k == 0 {
        return Err(Error::domain(format!("gamma_constant needs L, F, K >= 1, got ({l},{f},{k})")));
    }
    let (lf, ff, kf) = (l as f64, f as f64, k as f64);
    Ok(12.0 * (kf * ff.powi(l as i32 - 1)).sqrt() * lf * lf * ff.powi(2 * l as i32 - 2))
}

/// Outcome of the connectivity-regime check: with probability at least
/// `1 - xi`, sampled graphs of size `n` are connected enough for the
/// spectral arguments when `n - log(2n/xi)/d_W > 2/d_W`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivityReport {
    pub holds: bool,
    /// Maximum degree `d_W = max_v int W(u,v) du`.
    pub d_w: f64,
    /// Degenerate graphons (`d_W = 0`) never satisfy the condition.
    pub degenerate: bool,
}

/// Checks the minimum-size condition for confidence `1 - xi` at graph size
/// `n`, with `d_W` estimated on a `grid_m`-point quadrature grid.
pub fn connectivity_check(
    graphon: &Graphon,
    n: usize,
    xi: f64,
    grid_m: usize,
) -> Result<ConnectivityReport> {
    if n == 0 {
        return Err(Error::domain("connectivity_check needs n >= 1".to_string()));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::domain(format!("connectivity_check needs xi in (0,1), got {xi}")));
    }
    if grid_m < 16 {
        return Err(Error::domain(format!("connectivity_check needs grid_m >= 16, got {grid_m}")));
    }
    let d_w = graphon.max_degree(grid_m)?;
    if d_w == 0.0 {
        return Ok(ConnectivityReport { holds: false, d_w, degenerate: true });
    }
    let nf = n as f64;
    let holds = nf - (2.0 * nf / xi).ln() / d_w > 2.0 / d_w;
    Ok(ConnectivityReport { holds, d_w, degenerate: false })
}
