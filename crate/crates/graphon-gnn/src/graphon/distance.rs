//! L2 distances between graphons, step graphons, and signals.
//!
//! Distances use midpoint quadrature. When either argument is a step
//! object, the grid is refined to a common multiple of the block counts so
//! that no quadrature cell straddles a block boundary; for two step objects
//! the result is then exact.

use crate::error::{Error, Result};
use crate::graphon::step::{GraphonSignal, StepGraphon};
use crate::graphon::Graphon;

/// Anything evaluable as a kernel on `[0,1]^2`, with an optional block
/// structure hint for quadrature alignment.
pub trait GraphonKernel {
    fn kernel_value(&self, u: f64, v: f64) -> f64;
    fn block_count(&self) -> Option<usize> {
        None
    }
}

impl GraphonKernel for Graphon {
    fn kernel_value(&self, u: f64, v: f64) -> f64 {
        self.eval_unchecked(u, v)
    }
}

impl GraphonKernel for StepGraphon {
    fn kernel_value(&self, u: f64, v: f64) -> f64 {
        self.eval(u, v)
    }

    fn block_count(&self) -> Option<usize> {
        Some(self.n())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Smallest grid that is >= `grid_m` and a multiple of every block count.
fn effective_grid(grid_m: usize, blocks: &[Option<usize>]) -> usize {
    let base = blocks.iter().flatten().fold(1usize, |acc, &b| lcm(acc, b));
    base * grid_m.div_ceil(base)
}

/// `||a - b||_{L2([0,1]^2)}` by midpoint quadrature on at least `grid_m`
/// points per coordinate.
pub fn l2_graphon_distance<A, B>(a: &A, b: &B, grid_m: usize) -> Result<f64>
where
    A: GraphonKernel,
    B: GraphonKernel,
{
    if grid_m < 2 {
        return Err(Error::domain(format!("l2_graphon_distance needs grid_m >= 2, got {grid_m}")));
    }
    let g = effective_grid(grid_m, &[a.block_count(), b.block_count()]);
    let gf = g as f64;
    let mut sum = 0.0;
    for i in 0..g {
        let u = (i as f64 + 0.5) / gf;
        for j in 0..g {
            let v = (j as f64 + 0.5) / gf;
            let d = a.kernel_value(u, v) - b.kernel_value(u, v);
            sum += d * d;
        }
    }
    Ok((sum / (gf * gf)).sqrt())
}

/// `||a - b||_{L2([0,1])}` by midpoint quadrature on at least `grid_m`
/// points, refined to align with step blocks.
pub fn l2_signal_distance(a: &GraphonSignal, b: &GraphonSignal, grid_m: usize) -> Result<f64> {
    if grid_m < 2 {
        return Err(Error::domain(format!("l2_signal_distance needs grid_m >= 2, got {grid_m}")));
    }
    let blocks = |s: &GraphonSignal| match s {
        GraphonSignal::Step(v) => Some(v.len()),
        GraphonSignal::Smooth { .. } => None,
    };
    let g = effective_grid(grid_m, &[blocks(a), blocks(b)]);
    let gf = g as f64;
    let mut sum = 0.0;
    for i in 0..g {
        let u = (i as f64 + 0.5) / gf;
        let d = a.eval(u) - b.eval(u);
        sum += d * d;
    }
    Ok((sum / gf).sqrt())
}
