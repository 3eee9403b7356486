//! Spectral summaries of graph shift operators.
//!
//! The transferability analysis tracks two quantities of a GSO spectrum:
//! how many eigenvalues sit outside the band `(-c, c)` (the band
//! cardinality), and how far those eigenvalues are from the rest of a
//! second spectrum (the eigenvalue margin). Eigenvalues are index-paired
//! after sorting both spectra in descending order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues (descending) and band statistics of one GSO, optionally
/// compared against a second spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Spectrum of the subject GSO, sorted descending by value.
    pub eigenvalues: Vec<f64>,
    /// Band threshold the summary was computed at.
    pub c: f64,
    /// Number of eigenvalues with `|lambda| >= c`.
    pub band_cardinality: usize,
    /// For each subject eigenvalue with `|lambda_i| >= c`, the distance to
    /// the nearest *other-index* eigenvalue of the comparison spectrum;
    /// this is the minimum over those. `None` when no comparison GSO was
    /// given; infinite when the band is empty.
    pub eigenvalue_margin: Option<f64>,
}

fn check_symmetric(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::shape(format!(
            "{name} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                return Err(Error::domain(format!("{name} is not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn eigenvalues_desc(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m, "gso")?;
    let mut vals: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(vals)
}

/// Eigenvalues (descending) with matching eigenvector columns.
pub fn eigen_desc(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_symmetric(m, "gso")?;
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Computes band cardinality of `gso_b` (or `gso_a` when no second GSO is
/// given) at threshold `c`, plus the eigenvalue margin between the two
/// spectra when both are present.
pub fn spectral_summary(
    gso_a: &DMatrix<f64>,
    gso_b: Option<&DMatrix<f64>>,
    c: f64,
) -> Result<SpectralSummary> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain(format!("band threshold c must be in (0,1], got {c}")));
    }
    let spectrum_a = eigenvalues_desc(gso_a)?;
    let (subject, margin) = match gso_b {
        None => (spectrum_a, None),
        Some(b) => {
            let spectrum_b = eigenvalues_desc(b)?;
            let mut margin = f64::INFINITY;
            for (i, &lb) in spectrum_b.iter().enumerate() {
                if lb.abs() < c {
                    continue;
                }
                for (j, &la) in spectrum_a.iter().enumerate() {
                    if j != i {
                        margin = margin.min((lb - la).abs());
                    }
                }
            }
            (spectrum_b, Some(margin))
        }
    };
    let band_cardinality = subject.iter().filter(|l| l.abs() >= c).count();
    Ok(SpectralSummary { eigenvalues: subject, c, band_cardinality, eigenvalue_margin: margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{sample_stochastic, Graphon};
    use approx::assert_abs_diff_eq;

    /// GSO of the complete graph on n nodes: (J - I)/n.
    fn complete_gso(n: usize) -> DMatrix<f64> {
        let t = Graphon::constant(1.0).unwrap().template_graph(n).unwrap();
        sample_stochastic(&t, 0).unwrap().gso()
    }

    #[test]
    fn complete_graph_spectrum() {
        let vals = eigenvalues_desc(&complete_gso(4)).unwrap();
        let expect = [0.75, -0.25, -0.25, -0.25];
        for (v, e) in vals.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn band_cardinality_counts_magnitudes() {
        let s = spectral_summary(&complete_gso(4), None, 0.5).unwrap();
        assert_eq!(s.band_cardinality, 1);
        assert_eq!(s.eigenvalue_margin, None);
        // At a low threshold the repeated -0.25 eigenvalues join the band.
        let s = spectral_summary(&complete_gso(4), None, 0.2).unwrap();
        assert_eq!(s.band_cardinality, 4);
    }

    #[test]
    fn margin_matches_hand_example() {
        // A-spectrum {1, 0, 0, 0}: rank-one all-ones matrix J/4.
        let a = DMatrix::from_element(4, 4, 0.25);
        let b = complete_gso(4);
        let s = spectral_summary(&a, Some(&b), 0.5).unwrap();
        // Only lambda_1(B) = 0.75 is in the band; its nearest other-index
        // eigenvalue of A is 0.
        assert_abs_diff_eq!(s.eigenvalue_margin.unwrap(), 0.75, epsilon = 1e-12);
        assert_eq!(s.band_cardinality, 1);
        assert_eq!(s.eigenvalues.len(), 4);
        assert_abs_diff_eq!(s.eigenvalues[0], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn empty_band_gives_infinite_margin() {
        let a = complete_gso(8);
        // All eigenvalues of (J-I)/8 have magnitude <= 0.875 < 0.9.
        let s = spectral_summary(&a, Some(&a), 0.9).unwrap();
        assert_eq!(s.band_cardinality, 0);
        assert_eq!(s.eigenvalue_margin, Some(f64::INFINITY));
    }

    #[test]
    fn self_margin_matches_brute_force_on_small_graphs() {
        for n in 2..=8usize {
            let t = Graphon::Additive.template_graph(n).unwrap();
            let gso = sample_stochastic(&t, n as u64).unwrap().gso();
            let c = 0.05;
            let s = spectral_summary(&gso, Some(&gso), c).unwrap();
            let vals = eigenvalues_desc(&gso).unwrap();
            let mut brute = f64::INFINITY;
            for i in 0..n {
                if vals[i].abs() < c {
                    continue;
                }
                for j in 0..n {
                    if i != j {
                        brute = brute.min((vals[i] - vals[j]).abs());
                    }
                }
            }
            let margin = s.eigenvalue_margin.unwrap();
            if brute.is_infinite() {
                assert!(margin.is_infinite());
            } else {
                assert_abs_diff_eq!(margin, brute, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gso_eigenvalues_stay_in_unit_interval() {
        for (w, seed_v) in
            [(Graphon::constant(1.0).unwrap(), 1u64), (Graphon::Additive, 2), (Graphon::Product, 3)]
        {
            let t = w.template_graph(24).unwrap();
            for g in [t.gso(), sample_stochastic(&t, seed_v).unwrap().gso()] {
                let vals = eigenvalues_desc(&g).unwrap();
                for v in vals {
                    assert!(
                        (-1.0 - 1e-12..=1.0 + 1e-12).contains(&v),
                        "eigenvalue {v} escapes [-1,1]"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(eigenvalues_desc(&m).is_err());
        assert!(spectral_summary(&m, None, 0.5).is_err());
    }

    #[test]
    fn rejects_bad_threshold() {
        let m = complete_gso(3);
        assert!(spectral_summary(&m, None, 0.0).is_err());
        assert!(spectral_summary(&m, None, 1.5).is_err());
    }

    #[test]
    fn eigen_desc_reconstructs_matrix() {
        let m = complete_gso(5);
        let (vals, vecs) = eigen_desc(&m).unwrap();
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals.clone()));
        let rebuilt = &vecs * lambda * vecs.transpose();
        assert!((&rebuilt - &m).abs().max() < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }
}
