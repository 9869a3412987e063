//! Closed-form joint densities and their normalization constants.
//!
//! All densities are returned as natural logs. Points outside the support
//! give `-inf`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, LN_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{coupling_log_density, CouplingLaw, EnsembleSpec};
use crate::error::{param, Result};
use crate::jacobi::SpectralMeasure;
use crate::perturb::{
    arg_sum, config_gaussian, config_laguerre_definite, config_laguerre_semidefinite, log_jacobian_gaussian,
    log_jacobian_laguerre_semidefinite, ZERO_ARG_TOL,
};
use crate::special::ln_gamma;

/// Tolerance on `|Σ Arg z - π/2|` for the singular Laguerre support.
pub const SEMIDEFINITE_ARG_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub spec: EnsembleSpec,
    pub law: CouplingLaw,
}

pub fn log_g(beta: f64, n: usize) -> f64 {
    let base = ln_gamma(1.0 + beta / 2.0);
    0.5 * n as f64 * TAU.ln() + (1..=n).map(|j| ln_gamma(1.0 + beta * j as f64 / 2.0) - base).sum::<f64>()
}

pub fn log_c(beta: f64, n: usize) -> f64 {
    n as f64 * ln_gamma(beta / 2.0) - ln_gamma(beta * n as f64 / 2.0)
}

pub fn log_l(beta: f64, n: usize, a: f64) -> f64 {
    let nf = n as f64;
    let base = ln_gamma(1.0 + beta / 2.0);
    nf * (a * beta / 2.0 + 1.0 + (nf - 1.0) * beta / 2.0) * LN_2
        + (1..=n)
            .map(|j| {
                let jf = j as f64;
                ln_gamma(1.0 + beta * jf / 2.0) + ln_gamma(1.0 + beta * a / 2.0 + beta * (jf - 1.0) / 2.0) - base
            })
            .sum::<f64>()
}

pub fn log_d(beta: f64, m: usize, n: usize) -> f64 {
    ln_gamma(beta * (n - m) as f64 / 2.0) + m as f64 * ln_gamma(beta / 2.0) - ln_gamma(beta * n as f64 / 2.0)
}

pub fn log_h(beta: f64, n: usize) -> f64 {
    n as f64 * (beta / 2.0 - 1.0) * LN_2 + log_g(beta, n) + log_c(beta, n)
}

pub fn log_q(beta: f64, n: usize, a: f64) -> f64 {
    n as f64 * (beta / 2.0 - 1.0) * LN_2 + log_l(beta, n, a) + log_c(beta, n)
}

pub fn log_t(beta: f64, m: usize, n: usize) -> f64 {
    let a = m.abs_diff(n) as f64 + 1.0 - 2.0 / beta;
    ((m + 1) as f64).ln() + (m + 1) as f64 * (beta / 2.0 - 1.0) * LN_2 + log_l(beta, m, a) + log_d(beta, m, n)
}

/// The log normalization constants relevant to `spec`, keyed by name.
pub fn log_norm_constants(spec: &EnsembleSpec) -> Result<BTreeMap<&'static str, f64>> {
    spec.validate()?;
    let mut out = BTreeMap::new();
    match *spec {
        EnsembleSpec::Gaussian { beta, n } => {
            out.insert("g", log_g(beta, n));
            out.insert("c", log_c(beta, n));
            out.insert("h", log_h(beta, n));
        }
        EnsembleSpec::Laguerre { beta, n, m } => {
            let a = spec.laguerre_a().expect("laguerre");
            if m >= n {
                out.insert("l", log_l(beta, n, a));
                out.insert("c", log_c(beta, n));
                out.insert("q", log_q(beta, n, a));
            } else {
                out.insert("l", log_l(beta, m, a));
                out.insert("d", log_d(beta, m, n));
                out.insert("t", log_t(beta, m, n));
            }
        }
    }
    Ok(out)
}

fn pairs_real(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            s += (x[j] - x[k]).abs().ln();
        }
    }
    s
}

fn pairs_complex(z: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for j in 0..z.len() {
        for k in j + 1..z.len() {
            s += (z[j] - z[k]).norm().ln();
        }
    }
    s
}

/// `Σ_{j,k} ln|z_j - z̄_k|`, diagonal terms included.
fn reflected_pairs(z: &[Complex64]) -> f64 {
    z.iter().flat_map(|a| z.iter().map(move |b| (a - b.conj()).norm().ln())).sum()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(param(format!("expected {expected} points, got {got}")));
    }
    Ok(())
}

/// Joint log density of `(λ, w)` with respect to `dλ_1..dλ_n dw_1..dw_{n-1}`.
///
/// For singular Laguerre models `mu` has `m + 1` atoms, the one closest to
/// zero playing the role of the kernel weight `w_0`.
pub fn log_density_spectral(spec: &EnsembleSpec, mu: &SpectralMeasure) -> Result<f64> {
    spec.validate()?;
    let lam: Vec<f64> = mu.lambdas().collect();
    let w: Vec<f64> = mu.weights().collect();
    if w.iter().any(|&x| !(x > 0.0)) {
        return Ok(f64::NEG_INFINITY);
    }
    let beta = spec.beta();
    let log_w: f64 = w.iter().map(|x| x.ln()).sum();
    match *spec {
        EnsembleSpec::Gaussian { n, .. } => {
            check_len(n, lam.len())?;
            Ok(-log_g(beta, n) - log_c(beta, n) - 0.5 * lam.iter().map(|x| x * x).sum::<f64>()
                + beta * pairs_real(&lam)
                + (beta / 2.0 - 1.0) * log_w)
        }
        EnsembleSpec::Laguerre { n, m, .. } if m >= n => {
            check_len(n, lam.len())?;
            if lam.iter().any(|&x| !(x > 0.0)) {
                return Ok(f64::NEG_INFINITY);
            }
            let a = spec.laguerre_a().expect("laguerre");
            Ok(-log_l(beta, n, a) - log_c(beta, n)
                + lam.iter().map(|x| beta * a / 2.0 * x.ln() - x / 2.0).sum::<f64>()
                + beta * pairs_real(&lam)
                + (beta / 2.0 - 1.0) * log_w)
        }
        EnsembleSpec::Laguerre { n, m, .. } => {
            check_len(m + 1, lam.len())?;
            let zi = mu.zero_atom();
            let rest: Vec<f64> = lam.iter().enumerate().filter(|&(i, _)| i != zi).map(|(_, &x)| x).collect();
            if rest.iter().any(|&x| !(x > 0.0)) {
                return Ok(f64::NEG_INFINITY);
            }
            let a = spec.laguerre_a().expect("laguerre");
            let w0 = w[zi];
            Ok(-log_l(beta, m, a) - log_d(beta, m, n)
                + rest.iter().map(|x| beta * a / 2.0 * x.ln() - x / 2.0).sum::<f64>()
                + beta * pairs_real(&rest)
                + (beta * (n - m) as f64 / 2.0 - 1.0) * w0.ln()
                + (beta / 2.0 - 1.0) * (log_w - w0.ln()))
        }
    }
}

/// `ln F(l) - (βn/2 - 1) ln l`.
fn coupling_term(params: &DensityParams, l: f64) -> Result<f64> {
    let (beta, n) = (params.spec.beta(), params.spec.n());
    Ok(coupling_log_density(&params.law, beta, n, l)? - (beta * n as f64 / 2.0 - 1.0) * l.ln())
}

/// Joint log density of the eigenvalues of a perturbed Gaussian model with
/// respect to `d²z_1..d²z_n`.
pub fn log_density_perturbed_gaussian(params: &DensityParams, z: &[Complex64]) -> Result<f64> {
    let EnsembleSpec::Gaussian { beta, n } = params.spec else {
        return Err(param("Gaussian density needs a Gaussian spec"));
    };
    params.spec.validate()?;
    check_len(n, z.len())?;
    if !config_gaussian(z) {
        return Ok(f64::NEG_INFINITY);
    }
    let l: f64 = z.iter().map(|v| v.im).sum();
    let mut cross = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            cross += z[j].im * z[k].im;
        }
    }
    Ok(-log_h(beta, n) - 0.5 * z.iter().map(|v| v.re * v.re).sum::<f64>() - cross
        + (beta / 2.0 - 1.0) * reflected_pairs(z)
        + 2.0 * pairs_complex(z)
        + coupling_term(params, l)?)
}

/// `ln Re Π z_j` from moduli and arguments, stable near `Σ Arg = π/2`.
pub fn log_real_product(z: &[Complex64]) -> f64 {
    let margin = FRAC_PI_2 - arg_sum(z, ZERO_ARG_TOL);
    z.iter().map(|v| v.norm().ln()).sum::<f64>() + margin.sin().ln()
}

/// Joint log density for a perturbed Laguerre model with `m ≥ n`, with
/// respect to `d²z_1..d²z_n`.
pub fn log_density_perturbed_laguerre(params: &DensityParams, z: &[Complex64]) -> Result<f64> {
    let EnsembleSpec::Laguerre { beta, n, m } = params.spec else {
        return Err(param("Laguerre density needs a Laguerre spec"));
    };
    params.spec.validate()?;
    if m < n {
        return Err(param("m < n uses the singular Laguerre density"));
    }
    check_len(n, z.len())?;
    if !config_laguerre_definite(z) {
        return Ok(f64::NEG_INFINITY);
    }
    let a = params.spec.laguerre_a().expect("laguerre");
    let l: f64 = z.iter().map(|v| v.im).sum();
    let power = beta * a / 2.0;
    let re_prod = if power == 0.0 { 0.0 } else { power * log_real_product(z) };
    Ok(-log_q(beta, n, a) - 0.5 * z.iter().map(|v| v.re).sum::<f64>()
        + re_prod
        + (beta / 2.0 - 1.0) * reflected_pairs(z)
        + 2.0 * pairs_complex(z)
        + coupling_term(params, l)?)
}

/// Joint log density of the `m + 1` non-trivial eigenvalues of a perturbed
/// Laguerre model with `m < n`, with respect to
/// `dr_1..dr_{m+1} dθ_1..dθ_m` on the manifold `Σ Arg z_j = π/2`.
pub fn log_density_perturbed_laguerre_semidef(params: &DensityParams, z: &[Complex64]) -> Result<f64> {
    let EnsembleSpec::Laguerre { beta, n, m } = params.spec else {
        return Err(param("Laguerre density needs a Laguerre spec"));
    };
    params.spec.validate()?;
    if m >= n {
        return Err(param("m ≥ n uses the definite Laguerre density"));
    }
    check_len(m + 1, z.len())?;
    if !config_laguerre_semidefinite(z, SEMIDEFINITE_ARG_TOL) {
        return Ok(f64::NEG_INFINITY);
    }
    let l: f64 = z.iter().map(|v| v.im).sum();
    Ok(-log_t(beta, m, n) - 0.5 * z.iter().map(|v| v.re).sum::<f64>()
        + beta * (n - m - 1) as f64 / 2.0 * z.iter().map(|v| v.norm().ln()).sum::<f64>()
        + (beta / 2.0 - 1.0) * reflected_pairs(z)
        + 2.0 * pairs_complex(z)
        + coupling_term(params, l)?)
}

/// Dispatches on the spec: Gaussian, Laguerre `m ≥ n`, or Laguerre `m < n`.
pub fn log_density_perturbed(params: &DensityParams, z: &[Complex64]) -> Result<f64> {
    match params.spec {
        EnsembleSpec::Gaussian { .. } => log_density_perturbed_gaussian(params, z),
        EnsembleSpec::Laguerre { n, m, .. } if m >= n => log_density_perturbed_laguerre(params, z),
        EnsembleSpec::Laguerre { .. } => log_density_perturbed_laguerre_semidef(params, z),
    }
}

/// `log p_z + log|J| + log(#z orderings / #λ orderings) - log p_{λ,w} - log F`
/// for a triple `(μ, l, z)` related by the forward map.
///
/// The ordering term is `ln(m + 1)` in the singular Laguerre case, where
/// `m + 1` eigenvalues correspond to `m` non-zero atoms, and zero otherwise.
pub fn change_of_variables_residual(params: &DensityParams, mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> Result<f64> {
    let spec = params.spec;
    let log_pz = log_density_perturbed(params, z)?;
    let log_pmu = log_density_spectral(&spec, mu)?;
    let log_f = coupling_log_density(&params.law, spec.beta(), spec.n(), l)?;
    let (log_jac, labels) = match spec {
        EnsembleSpec::Laguerre { m, .. } if spec.is_semidefinite() => {
            (log_jacobian_laguerre_semidefinite(mu, l, z)?, ((m + 1) as f64).ln())
        }
        _ => (log_jacobian_gaussian(mu, l, z)?, 0.0),
    };
    Ok(log_pz + log_jac + labels - log_pmu - log_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_perturbed;
    use crate::perturb::{forward_map, sample_measure, sample_spectrum};
    use crate::rng::RngStream;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn small_constants() {
        assert!((log_g(2.0, 2) - (4.0 * PI).ln()).abs() < 1e-14);
        assert!(log_c(2.0, 1).abs() < 1e-15);
        assert!((log_c(2.0, 3) - (-(2.0f64).ln())).abs() < 1e-14);
        assert!((log_h(2.0, 1) - 0.5 * TAU.ln()).abs() < 1e-14);
        // Dirichlet(1/2,1/2) normalizer is π
        assert!((log_d(1.0, 1, 2) - PI.ln()).abs() < 1e-14);
        let k = log_norm_constants(&EnsembleSpec::laguerre(1.0, 2, 5).unwrap()).unwrap();
        assert_eq!(k.keys().copied().collect::<Vec<_>>(), vec!["d", "l", "t"]);
    }

    #[test]
    fn laguerre_one_by_one_is_chi_squared() {
        // n = 1: λ ~ χ²_{βm}, so l_{β,1,a} = 2^{βm/2} Γ(βm/2)
        for (beta, m) in [(1.0, 3usize), (2.0, 1), (0.5, 4)] {
            let a = (m - 1) as f64 + 1.0 - 2.0 / beta;
            let k = beta * m as f64 / 2.0;
            assert!((log_l(beta, 1, a) - (k * LN_2 + ln_gamma(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_n1_reduces_to_normal_times_coupling() {
        let params =
            DensityParams { spec: EnsembleSpec::gaussian(2.0, 1).unwrap(), law: CouplingLaw::CustomGamma { shape: 1.0, scale: 1.0 } };
        let v = log_density_perturbed_gaussian(&params, &[c(0.0, 1.0)]).unwrap();
        assert!((v - (-1.0 - 0.5 * TAU.ln())).abs() < 1e-15);
        for beta in [0.5, 1.0, 4.0] {
            let params = DensityParams { spec: EnsembleSpec::gaussian(beta, 1).unwrap(), law: CouplingLaw::ChiHalf };
            let z = c(0.3, 0.7);
            let expect = -0.5 * 0.09 - 0.5 * TAU.ln() + coupling_log_density(&params.law, beta, 1, 0.7).unwrap();
            assert!((log_density_perturbed_gaussian(&params, &[z]).unwrap() - expect).abs() < 1e-13);
        }
        assert_eq!(log_density_perturbed_gaussian(&params, &[c(0.0, -1.0)]).unwrap(), f64::NEG_INFINITY);
        assert!(log_density_perturbed_gaussian(&params, &[c(0.0, 1.0), c(1.0, 1.0)]).is_err());
    }

    #[test]
    fn outside_support_is_neg_inf() {
        let params = DensityParams { spec: EnsembleSpec::laguerre(1.0, 3, 2).unwrap(), law: CouplingLaw::GammaType { sigma: 1.0 } };
        assert_eq!(log_density_perturbed_laguerre(&params, &[c(-1.0, 1.0), c(1.0, 1.0)]).unwrap(), f64::NEG_INFINITY);
        let params = DensityParams { spec: EnsembleSpec::laguerre(1.0, 1, 3).unwrap(), law: params.law };
        assert_eq!(log_density_perturbed_laguerre_semidef(&params, &[c(1.0, 0.1), c(1.0, 0.1)]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn spectral_density_n1() {
        let mu = SpectralMeasure::new(vec![(0.5, 1.0)]).unwrap();
        let v = log_density_spectral(&EnsembleSpec::gaussian(1.0, 1).unwrap(), &mu).unwrap();
        assert!((v - (-0.125 - 0.5 * TAU.ln())).abs() < 1e-15);
    }

    #[test]
    fn change_of_variables_on_draws() {
        let law = CouplingLaw::GammaType { sigma: 1.0 };
        let mut rng = RngStream::new(41);
        for spec in [
            EnsembleSpec::gaussian(2.0, 1).unwrap(),
            EnsembleSpec::gaussian(0.5, 4).unwrap(),
            EnsembleSpec::gaussian(4.0, 6).unwrap(),
            EnsembleSpec::laguerre(1.0, 3, 2).unwrap(),
            EnsembleSpec::laguerre(2.0, 1, 3).unwrap(),
            EnsembleSpec::laguerre(0.5, 2, 5).unwrap(),
        ] {
            let params = DensityParams { spec, law };
            for _ in 0..100 {
                let s = sample_perturbed(&mut rng, &spec, &law).unwrap();
                let mu = sample_measure(&s).unwrap();
                let z = forward_map(&mu, s.l).unwrap();
                let r = change_of_variables_residual(&params, &mu, s.l, z.as_slice()).unwrap();
                assert!(r.abs() < 1e-6, "{spec:?}: residual {r}");
            }
        }
    }

    #[test]
    fn full_spectrum_feeds_semidefinite_density() {
        let law = CouplingLaw::ChiHalf;
        let spec = EnsembleSpec::laguerre(1.0, 1, 3).unwrap();
        let s = sample_perturbed(&mut RngStream::new(5), &spec, &law).unwrap();
        let mut z = sample_spectrum(&s).unwrap();
        z.remove_smallest(1);
        let v = log_density_perturbed(&DensityParams { spec, law }, z.as_slice()).unwrap();
        assert!(v.is_finite());
    }
}
