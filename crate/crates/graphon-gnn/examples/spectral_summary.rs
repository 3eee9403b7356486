//! Spectra of normalized shift operators across graph sizes.
//!
//! The GSO `A/n` keeps every eigenvalue in `[-1, 1]`, so spectra of
//! different sizes are directly comparable. The band cardinality counts
//! eigenvalues with magnitude at least `c`; the margin measures how far
//! the banded eigenvalues of one GSO sit from the spectrum of another.
//! Run with
//!
//! ```bash
//! cargo run --example spectral_summary
//! ```

use nalgebra::DMatrix;

use graphon_gnn::graphon::{spectral_summary, Graphon};
use graphon_gnn::Result;

fn main() -> Result<()> {
    // Complete graph on 4 nodes: the GSO spectrum is known in closed form,
    // (n-1)/n once and -1/n with multiplicity n-1.
    let k4 = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 0.25 });
    let summary = spectral_summary(&k4, None, 0.5)?;
    println!("K4 with GSO A/4");
    println!("  eigenvalues: {:?}", summary.eigenvalues);
    println!("  band |lambda| >= 0.5: {} eigenvalue(s)", summary.band_cardinality);
    println!();

    // Growing templates of one graphon: the top of the spectrum settles
    // down as n grows, which is why filters keep working as graphs grow.
    let graphon = Graphon::from_json("{\"family\": \"additive\"}")?;
    let reference = graphon.template_graph(512)?.gso();
    println!("additive graphon templates against a 512-node reference, c = 0.3");
    println!("{:>4} {:>10} {:>10} {:>6} {:>12}", "n", "lambda_1", "lambda_n", "band", "margin");
    for n in [8, 16, 32, 64, 128] {
        let gso = graphon.template_graph(n)?.gso();
        // The subject spectrum is the second argument.
        let s = spectral_summary(&reference, Some(&gso), 0.3)?;
        let first = s.eigenvalues.first().copied().unwrap_or(f64::NAN);
        let last = s.eigenvalues.last().copied().unwrap_or(f64::NAN);
        let margin = s.eigenvalue_margin.expect("reference given");
        println!("{n:>4} {first:>10.5} {last:>10.5} {:>6} {margin:>12.6}", s.band_cardinality);
    }
    Ok(())
}
