//! Brute-force reference computations used to validate the closed forms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::adiabatic_elimination_check;
use crate::error::{Error, Result};
use crate::integrator::Options;
use crate::specfun::{displacement_element, Xi};

/// exp[iξ(a† + a)] on the Fock space truncated at `dim` states, from the
/// eigendecomposition of the real symmetric position matrix a† + a.
pub fn displacement_matrix(xi: f64, dim: usize) -> DMatrix<C64> {
    let x = DMatrix::from_fn(dim, dim, |i, j| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(x);
    let v = eig.eigenvectors.map(C64::from);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, xi * l)));
    &v * phases * v.transpose()
}

/// L^a_n(x) = Σ_k (−1)^k C(n+a, n−k) x^k / k!.
pub fn laguerre_series(a: u32, n: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..=n {
        let binom = binomial(n + a, n - k);
        let mut term = binom;
        for i in 1..=k {
            term *= x / f64::from(i);
        }
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Worst deviations of the closed-form displacement elements from the
/// truncated matrix exponential over m, n ≤ `n_max` and the given ξ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisplacementReport {
    pub max_element_error: f64,
    /// max_m |Σ_n |⟨m|D|n⟩|² − 1| with n summed to `row_cutoff`.
    pub max_row_unitarity_error: f64,
}

pub fn displacement_check(n_max: u32, xis: &[f64]) -> Result<DisplacementReport> {
    let dim = n_max as usize + 60;
    let row_cutoff = n_max + 60;
    let mut report = DisplacementReport { max_element_error: 0.0, max_row_unitarity_error: 0.0 };
    for &xi in xis {
        let x = Xi::new(xi)?;
        let reference = displacement_matrix(xi, dim);
        for m in 0..=n_max {
            for n in 0..=n_max {
                let err = (displacement_element(m, n, x) - reference[(m as usize, n as usize)]).norm();
                report.max_element_error = report.max_element_error.max(err);
            }
            let row: f64 = (0..=row_cutoff).map(|n| displacement_element(m, n, x).norm_sqr()).sum();
            report.max_row_unitarity_error = report.max_row_unitarity_error.max((row - 1.0).abs());
        }
    }
    Ok(report)
}

/// Slope of the least-squares line through (ln x, ln y).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::arg("need at least two matching points for a slope"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::arg("log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EliminationPoint {
    /// Δ/Ω.
    pub ratio: f64,
    pub max_population_error: f64,
    pub max_upper_population: f64,
    pub max_norm_drift: f64,
}

/// Full-integrator comparison over several Δ/Ω, with the log-log slope of
/// the population error against Ω/Δ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EliminationReport {
    pub points: Vec<EliminationPoint>,
    pub slope: f64,
}

/// Tolerances for the elimination scan. The comparison is dominated by the
/// (Ω/Δ)² physics, which is converged here to better than 1e-12.
pub const SCAN_OPTIONS: Options = Options {
    atol: 1e-9,
    rtol: 1e-9,
    max_steps: 50_000_000,
    initial_step: None,
    max_step: None,
};

pub fn elimination_scan(ratios: &[f64], samples: usize, opts: &Options) -> Result<EliminationReport> {
    let points = ratios
        .iter()
        .map(|&ratio| {
            let c = adiabatic_elimination_check(1.0, ratio, samples, opts)?;
            Ok(EliminationPoint {
                ratio,
                max_population_error: c.max_population_error,
                max_upper_population: c.max_upper_population,
                max_norm_drift: c.max_norm_drift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = ratios.iter().map(|r| 1.0 / r).collect();
    let errs: Vec<f64> = points.iter().map(|p| p.max_population_error).collect();
    let slope = loglog_slope(&inv, &errs)?;
    Ok(EliminationReport { points, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::laguerre;
    use approx::assert_abs_diff_eq;

    #[test]
    fn series_matches_recurrence() {
        for a in 0..6 {
            for n in 0..12 {
                for x in [0.0, 0.25, 0.5, 1.3, 4.0] {
                    let s = laguerre_series(a, n, x);
                    assert_abs_diff_eq!(laguerre(a, n, x), s, epsilon = 1e-10 * s.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn matrix_exponential_is_unitary() {
        let d = displacement_matrix(0.4, 30);
        let gram = d.adjoint() * &d;
        assert!((gram - DMatrix::identity(30, 30)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_matrix_exponential() {
        let r = displacement_check(6, &[-0.3, 0.05, 0.5]).unwrap();
        assert!(r.max_element_error < 1e-9, "{r:?}");
        assert!(r.max_row_unitarity_error < 1e-9, "{r:?}");
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert_abs_diff_eq!(loglog_slope(&xs, &ys).unwrap(), 2.0, epsilon = 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }
}
