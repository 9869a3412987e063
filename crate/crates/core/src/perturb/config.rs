use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Points with modulus at or below this are treated as zero by [`arg_sum`].
pub const ZERO_ARG_TOL: f64 = 0.0;

/// `Σ Arg z_j` with principal arguments and the convention `Arg 0 = 0`.
pub fn arg_sum(z: &[Complex64], zero_tol: f64) -> f64 {
    z.iter().filter(|v| v.norm() > zero_tol).map(|v| v.im.atan2(v.re)).sum()
}

/// All eigenvalues strictly in the upper half-plane.
pub fn config_gaussian(z: &[Complex64]) -> bool {
    !z.is_empty() && z.iter().all(|v| v.im > 0.0 && v.re.is_finite() && v.im.is_finite())
}

/// Upper half-plane with `Σ Arg z_j < π/2`.
pub fn config_laguerre_definite(z: &[Complex64]) -> bool {
    config_gaussian(z) && arg_sum(z, ZERO_ARG_TOL) < FRAC_PI_2
}

/// Upper half-plane with `|Σ Arg z_j - π/2| <= tol`.
pub fn config_laguerre_semidefinite(z: &[Complex64], tol: f64) -> bool {
    config_gaussian(z) && (arg_sum(z, ZERO_ARG_TOL) - FRAC_PI_2).abs() <= tol
}

/// Points `r_j e^{iθ_j}` with the last angle fixed to `π/2 - Σ θ_j`.
pub fn z_from_polar(r: &[f64], theta: &[f64]) -> Vec<Complex64> {
    assert_eq!(r.len(), theta.len() + 1, "need one more radius than free angle");
    let last = FRAC_PI_2 - theta.iter().sum::<f64>();
    r.iter().zip(theta.iter().copied().chain(std::iter::once(last))).map(|(&rj, t)| Complex64::from_polar(rj, t)).collect()
}
