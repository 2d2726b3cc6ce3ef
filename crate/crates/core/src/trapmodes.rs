//! Axial equilibrium and normal modes of a linear ion chain.
//!
//! Positions are in units of ℓ = (e²/4πε₀Mω_x²)^{1/3}, in which the
//! potential reads Σ u_s²/2 + Σ_{s<t} 1/|u_s − u_t|. Mode eigenvalues μ_p
//! are squared mode frequencies in units of ω_x².

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_IONS: usize = 50;
const FORCE_TOLERANCE: f64 = 1e-12;
const MAX_NEWTON_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapConfig {
    pub n_ions: usize,
    /// Axial trap frequency (rad/s).
    pub omega_x: f64,
    /// Ion mass (kg).
    pub mass: f64,
}

impl TrapConfig {
    pub fn new(n_ions: usize, omega_x: f64, mass: f64) -> Result<Self> {
        if n_ions == 0 || n_ions > MAX_IONS {
            return Err(Error::arg(format!("ion count must be in 1..={MAX_IONS}, got {n_ions}")));
        }
        if !(omega_x > 0.0 && omega_x.is_finite()) {
            return Err(Error::arg(format!("trap frequency must be positive, got {omega_x}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::arg(format!("ion mass must be positive, got {mass}")));
        }
        Ok(TrapConfig { n_ions, omega_x, mass })
    }

    /// Middle ion of the chain (the lower of the two for even N).
    pub fn center_ion(&self) -> usize {
        (self.n_ions - 1) / 2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSystem {
    /// μ_p in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Column p is the normalised eigenvector b^(p); row s is the ion.
    pub vectors: DMatrix<f64>,
    /// Dimensionless equilibrium positions u_s, ascending.
    pub positions: Vec<f64>,
}

impl ModeSystem {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// b^(p)_s.
    pub fn b(&self, mode: usize, ion: usize) -> f64 {
        self.vectors[(ion, mode)]
    }

    pub fn mode_frequency(&self, mode: usize, omega_x: f64) -> f64 {
        omega_x * self.eigenvalues[mode].sqrt()
    }
}

fn gradient(u: &[f64]) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(n, |s, _| {
        let coulomb: f64 = (0..n)
            .filter(|&t| t != s)
            .map(|t| {
                let d = u[s] - u[t];
                -d.signum() / (d * d)
            })
            .sum();
        u[s] + coulomb
    })
}

fn hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for s in 0..n {
        let mut diag = 1.0;
        for t in 0..n {
            if t != s {
                let k = 2.0 / (u[s] - u[t]).abs().powi(3);
                h[(s, t)] = -k;
                diag += k;
            }
        }
        h[(s, s)] = diag;
    }
    h
}

fn energy(u: &[f64]) -> f64 {
    let mut e: f64 = u.iter().map(|x| 0.5 * x * x).sum();
    for s in 0..u.len() {
        for t in (s + 1)..u.len() {
            e += 1.0 / (u[t] - u[s]).abs();
        }
    }
    e
}

fn ordered(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

fn symmetrize(u: &mut [f64]) {
    let n = u.len();
    for s in 0..n / 2 {
        let v = 0.5 * (u[n - 1 - s] - u[s]);
        u[s] = -v;
        u[n - 1 - s] = v;
    }
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Equilibrium positions of `n` ions, by damped Newton iteration from an
/// evenly spaced start.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_IONS {
        return Err(Error::arg(format!("ion count must be in 1..={MAX_IONS}, got {n}")));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    // Uniform spacing near the known minimum spacing ≈ 2.018 N^−0.559.
    let spacing = 2.018 / (n as f64).powf(0.559);
    let mut u: Vec<f64> = (0..n).map(|s| (s as f64 - (n as f64 - 1.0) / 2.0) * spacing).collect();

    let mut residual = f64::INFINITY;
    for _ in 0..MAX_NEWTON_STEPS {
        let g = gradient(&u);
        residual = max_abs(&g);
        if residual <= FORCE_TOLERANCE {
            return Ok(u);
        }
        // The potential is strictly convex on the ordered region, so the
        // Hessian is positive definite there.
        let step = hessian(&u)
            .cholesky()
            .ok_or_else(|| Error::Numerical("Hessian lost positive definiteness".into()))?
            .solve(&(-&g));

        let e0 = energy(&u);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, d)| x + lambda * d).collect();
            if ordered(&trial) && (energy(&trial) <= e0 || max_abs(&gradient(&trial)) < residual) {
                u = trial;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::Numerical(format!(
                    "line search stalled for N = {n} at residual force {residual:.3e}"
                )));
            }
        }
        symmetrize(&mut u);
    }
    Err(Error::Numerical(format!(
        "equilibrium for N = {n} did not converge in {MAX_NEWTON_STEPS} Newton steps \
         (residual force {residual:.3e}, tolerance {FORCE_TOLERANCE:.0e})"
    )))
}

/// Normal modes of the chain described by `cfg`.
pub fn mode_eigensystem(cfg: &TrapConfig) -> Result<ModeSystem> {
    modes_for(cfg.n_ions)
}

/// Normal modes for `n` ions. The result is dimensionless and does not
/// depend on the trap frequency or mass.
pub fn modes_for(n: usize) -> Result<ModeSystem> {
    let positions = equilibrium_positions(n)?;
    let eig = SymmetricEigen::new(hessian(&positions));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (p, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        // first non-negligible component positive
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-10) {
            if *first < 0.0 {
                col = -col;
            }
        }
        vectors.set_column(p, &col);
    }
    Ok(ModeSystem { eigenvalues, vectors, positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Bisection on the single unknown of the symmetric 3-ion chain
    /// (positions −u, 0, u): u = 1/u² + 1/(2u)².
    fn three_ion_bisection() -> f64 {
        let f = |u: f64| u - 1.0 / (u * u) - 1.0 / (4.0 * u * u);
        let (mut lo, mut hi) = (0.5, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn single_ion_sits_at_center() {
        assert_eq!(equilibrium_positions(1).unwrap(), vec![0.0]);
        let m = modes_for(1).unwrap();
        assert_eq!(m.eigenvalues, vec![1.0]);
        assert_eq!(m.b(0, 0), 1.0);
    }

    #[test]
    fn two_ions_closed_form() {
        let u = equilibrium_positions(2).unwrap();
        let expected = 2f64.powf(-2.0 / 3.0);
        assert_abs_diff_eq!(u[0], -expected, epsilon = 1e-12);
        assert_abs_diff_eq!(u[1], expected, epsilon = 1e-12);
        let m = modes_for(2).unwrap();
        assert_abs_diff_eq!(m.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.eigenvalues[1], 3.0, epsilon = 1e-12);
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(m.b(0, 0), r, epsilon = 1e-12);
        assert_abs_diff_eq!(m.b(0, 1), r, epsilon = 1e-12);
        assert_abs_diff_eq!(m.b(1, 0), r, epsilon = 1e-12);
        assert_abs_diff_eq!(m.b(1, 1), -r, epsilon = 1e-12);
    }

    #[test]
    fn three_ions_match_bisection() {
        let u = equilibrium_positions(3).unwrap();
        let oracle = three_ion_bisection();
        assert_abs_diff_eq!(oracle, 1.0772, epsilon = 1e-4);
        assert_abs_diff_eq!(u[2], oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(u[1], 0.0, epsilon = 1e-15);
        let m = modes_for(3).unwrap();
        assert_abs_diff_eq!(m.eigenvalues[2], 29.0 / 5.0, epsilon = 1e-10);
    }

    #[test]
    fn residual_force_below_tolerance() {
        for n in [5, 12, 30, MAX_IONS] {
            let u = equilibrium_positions(n).unwrap();
            assert!(max_abs(&gradient(&u)) <= FORCE_TOLERANCE, "N = {n}");
            for s in 0..n {
                assert_abs_diff_eq!(u[s], -u[n - 1 - s], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(equilibrium_positions(0).is_err());
        assert!(equilibrium_positions(51).is_err());
        assert!(TrapConfig::new(2, -1.0, 1e-26).is_err());
        assert!(TrapConfig::new(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn modes_are_orthonormal_with_com_and_breathing() {
        for n in 2..=20 {
            let m = modes_for(n).unwrap();
            assert_abs_diff_eq!(m.eigenvalues[0], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(m.eigenvalues[1], 3.0, epsilon = 1e-10);
            let gram = m.vectors.transpose() * &m.vectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-10);
            for s in 0..n {
                assert_abs_diff_eq!(m.b(0, s), 1.0 / (n as f64).sqrt(), epsilon = 1e-10);
            }
            assert!(m.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
