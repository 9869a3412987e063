use num_complex::Complex64;

use super::{pair_log_sum, pair_log_sum_complex};
use crate::error::{param, Error, Result};
use crate::jacobi::SpectralMeasure;

/// `ln(l^{n-1} Π|λ_j - λ_k|² / Π|z_j - z_k|²)` for the chart
/// `(λ_1..λ_n, w_1..w_{n-1}, l) -> (Re z, Im z)`.
pub fn log_jacobian_gaussian(mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> Result<f64> {
    let n = mu.len();
    if z.len() != n {
        return Err(param(format!("expected {n} eigenvalues, got {}", z.len())));
    }
    let lam: Vec<f64> = mu.lambdas().collect();
    let dz = pair_log_sum_complex(z);
    if !dz.is_finite() {
        return Err(Error::SingularJacobian("coincident eigenvalues".into()));
    }
    Ok((n as f64 - 1.0) * l.ln() + 2.0 * pair_log_sum(&lam) - 2.0 * dz)
}

pub fn jacobian_gaussian(mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> Result<f64> {
    log_jacobian_gaussian(mu, l, z).map(f64::exp)
}

/// `ln(l^m Π|λ_j| Π_{j<k≤m}|λ_j - λ_k|² / Π_{j<k≤m+1}|z_j - z_k|²)` for the
/// chart `(λ_1..λ_m, w_1..w_m, l) -> (r_1..r_m, θ_1..θ_m, r_{m+1})`.
///
/// `mu` carries `m + 1` atoms, one of which is the zero eigenvalue.
pub fn log_jacobian_laguerre_semidefinite(mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> Result<f64> {
    let size = mu.len();
    if z.len() != size {
        return Err(param(format!("expected {size} eigenvalues, got {}", z.len())));
    }
    let zi = mu.zero_atom();
    let lam: Vec<f64> = mu.lambdas().enumerate().filter(|&(i, _)| i != zi).map(|(_, x)| x).collect();
    let dz = pair_log_sum_complex(z);
    if !dz.is_finite() {
        return Err(Error::SingularJacobian("coincident eigenvalues".into()));
    }
    let m = lam.len() as f64;
    Ok(m * l.ln() + lam.iter().map(|x| x.abs().ln()).sum::<f64>() + 2.0 * pair_log_sum(&lam) - 2.0 * dz)
}

pub fn jacobian_laguerre_semidefinite(mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> Result<f64> {
    log_jacobian_laguerre_semidefinite(mu, l, z).map(f64::exp)
}
