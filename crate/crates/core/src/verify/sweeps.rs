use std::f64::consts::{FRAC_PI_2, LN_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::complex_det;
use super::{ks_one_sample_stat, law_cdf, max_or_nan, par_draws, TestReport};
use crate::density::{change_of_variables_residual, log_c, log_density_perturbed, log_g, DensityParams};
use crate::dist::{log_pdf, DistSpec};
use crate::ensembles::{sample_perturbed, CouplingLaw, EnsembleSpec};
use crate::error::{param, Error, Result};
use crate::jacobi::SpectralMeasure;
use crate::perturb::{
    arg_sum, config_gaussian, config_laguerre_definite, config_laguerre_semidefinite, eigenvalues_direct, forward_map, identity_suite,
    inverse_map, laguerre_product_identities, log_jacobian_gaussian, log_jacobian_laguerre_semidefinite, sample_measure, sample_spectrum,
    PerturbedSpectrum,
};
use crate::poly::{match_nearest, matched_distance};
use crate::rng::RngStream;
use crate::special::ln_gamma;

const ROUNDTRIP_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-8;
const CHANGE_OF_VARIABLES_TOL: f64 = 1e-6;
const JACOBIAN_TOL: f64 = 1e-5;
const DISPLAY_TOL: f64 = 1e-10;
const MC_TOL: f64 = 0.02;
const KS_LEVEL: f64 = 1e-3;

fn scale_of(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.norm()).fold(1.0, f64::max)
}

/// Max `|log p_z + log|J| - log p_{λ,w} - log F|` over model draws.
pub fn change_of_variables_sweep(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let params = DensityParams { spec: *spec, law: *law };
    let residuals = par_draws(rng, samples, |r| -> Result<f64> {
        let s = sample_perturbed(r, spec, law)?;
        let mu = sample_measure(&s)?;
        let z = forward_map(&mu, s.l)?;
        Ok(change_of_variables_residual(&params, &mu, s.l, z.as_slice())?.abs())
    });
    let worst = max_or_nan(residuals.into_iter().map(|r| r.unwrap_or(f64::NAN)));
    Ok(TestReport::from_residual("change_of_variables", samples, worst, worst, CHANGE_OF_VARIABLES_TOL, rng))
}

/// Mean over model draws of `p_z(z) |J| / (p_{λ,w} F)`, the analytic density
/// scored against the density the sampler induces on `z`.
pub fn normalization_mc(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let params = DensityParams { spec: *spec, law: *law };
    let scores = par_draws(rng, samples, |r| -> Result<f64> {
        let s = sample_perturbed(r, spec, law)?;
        let mu = sample_measure(&s)?;
        let z = forward_map(&mu, s.l)?;
        Ok(change_of_variables_residual(&params, &mu, s.l, z.as_slice())?.exp())
    });
    let scores: Vec<f64> = scores.into_iter().map(|r| r.unwrap_or(f64::NAN)).collect();
    let mean = scores.iter().sum::<f64>() / samples.max(1) as f64;
    Ok(TestReport::from_residual("normalization_mc", samples, mean, (mean - 1.0).abs(), MC_TOL, rng))
}

/// Independent product proposal on `(Re z_j, Im z_j)`.
struct Proposal {
    re: DistSpec,
    re_shift: f64,
    im: DistSpec,
}

impl Proposal {
    fn for_spec(spec: &EnsembleSpec, law: &CouplingLaw) -> Result<Self> {
        let (beta, n) = (spec.beta(), spec.n());
        let coupling = law.dist(beta, n)?;
        let mean_l = match coupling {
            DistSpec::Gamma { shape, scale } => shape * scale,
            DistSpec::Chi { k } => LN_2.exp().sqrt() * (ln_gamma((k + 1.0) / 2.0) - ln_gamma(k / 2.0)).exp(),
            _ => unreachable!("coupling laws are gamma or chi"),
        };
        let im = if n == 1 { coupling } else { DistSpec::Gamma { shape: beta / 2.0, scale: 1.5 * mean_l / (beta * n as f64 / 2.0) } };
        match *spec {
            EnsembleSpec::Gaussian { .. } => {
                let sigma = if n == 1 { 1.0 } else { 1.0 + (n as f64).sqrt() };
                Ok(Self { re: DistSpec::Normal { sigma }, re_shift: 0.0, im })
            }
            EnsembleSpec::Laguerre { m, .. } if m >= n => {
                let a = spec.laguerre_a().expect("laguerre");
                let re = if n == 1 {
                    DistSpec::Gamma { shape: beta * m as f64 / 2.0, scale: 2.0 }
                } else {
                    let shape = (1.0 + beta * a / 2.0).max(0.5);
                    DistSpec::Gamma { shape, scale: 1.5 * beta * m as f64 / shape }
                };
                Ok(Self { re, re_shift: 0.0, im })
            }
            EnsembleSpec::Laguerre { .. } => {
                Err(Error::Unsupported("singular Laguerre eigenvalues live on a manifold; use normalization_mc".into()))
            }
        }
    }

    fn draw(&self, rng: &mut RngStream, n: usize) -> Result<(Vec<Complex64>, f64)> {
        let mut z = Vec::with_capacity(n);
        let mut log_q = 0.0;
        for _ in 0..n {
            let x = self.re.sample(rng)? + self.re_shift;
            let y = self.im.sample(rng)?;
            log_q += log_pdf(&self.re, x - self.re_shift) + log_pdf(&self.im, y);
            z.push(Complex64::new(x, y));
        }
        Ok((z, log_q))
    }
}

/// Importance-sampling estimate of `∫ p_z d²z` from a product proposal that
/// does not use the matrix model.
pub fn normalization_independent(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let proposal = Proposal::for_spec(spec, law)?;
    let params = DensityParams { spec: *spec, law: *law };
    let n = spec.n();
    let weights = par_draws(rng, samples, |r| -> Result<f64> {
        let (z, log_q) = proposal.draw(r, n)?;
        Ok((log_density_perturbed(&params, &z)? - log_q).exp())
    });
    let weights: Vec<f64> = weights.into_iter().map(|r| r.unwrap_or(f64::NAN)).collect();
    let mean = weights.iter().sum::<f64>() / samples.max(1) as f64;
    Ok(TestReport::from_residual("normalization_independent", samples, mean, (mean - 1.0).abs(), MC_TOL, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JacobianCase {
    Gaussian { n: usize },
    LaguerreSemidef { m: usize },
}

fn real_det(n: usize, m: &[f64]) -> f64 {
    complex_det(n, m.iter().map(|&v| Complex64::new(v, 0.0)).collect()).re
}

fn fd_step(x: f64, floor: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(floor)
}

fn matched(base: &[Complex64], z: PerturbedSpectrum) -> Vec<Complex64> {
    let z = z.into_vec();
    match_nearest(base, &z).into_iter().map(|j| z[j]).collect()
}

/// Central-difference `|det|` of `(λ, w_1..w_{n-1}, l) -> (Re z, Im z)`.
fn fd_gaussian(mu: &SpectralMeasure, l: f64, base: &[Complex64]) -> Result<f64> {
    let n = mu.len();
    let mut theta: Vec<f64> = mu.lambdas().collect();
    theta.extend(mu.weights().take(n - 1));
    theta.push(l);
    let eval = |t: &[f64]| -> Result<Vec<f64>> {
        let last = 1.0 - t[n..2 * n - 1].iter().sum::<f64>();
        let atoms = (0..n).map(|j| (t[j], if j + 1 < n { t[n + j] } else { last })).collect();
        let z = matched(base, forward_map(&SpectralMeasure::from_atoms_unchecked(atoms), t[2 * n - 1])?);
        Ok(z.iter().map(|v| v.re).chain(z.iter().map(|v| v.im)).collect())
    };
    let dim = 2 * n;
    let mut jac = vec![0.0; dim * dim];
    for c in 0..dim {
        let h = fd_step(theta[c], if c < n { 1.0 } else { 0.0 });
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[c] += h;
        down[c] -= h;
        let (fu, fd) = (eval(&up)?, eval(&down)?);
        for r in 0..dim {
            jac[r * dim + c] = (fu[r] - fd[r]) / (up[c] - down[c]);
        }
    }
    Ok(real_det(dim, &jac).abs())
}

/// Central-difference `|det|` of
/// `(λ_1..λ_m, w_1..w_m, l) -> (r_1..r_m, θ_1..θ_m, r_{m+1})`.
fn fd_semidefinite(mu: &SpectralMeasure, l: f64, base: &[Complex64]) -> Result<f64> {
    let zi = mu.zero_atom();
    let nonzero: Vec<(f64, f64)> = mu.atoms().iter().enumerate().filter(|&(i, _)| i != zi).map(|(_, &a)| a).collect();
    let m = nonzero.len();
    let mut theta: Vec<f64> = nonzero.iter().map(|a| a.0).collect();
    theta.extend(nonzero.iter().map(|a| a.1));
    theta.push(l);
    let eval = |t: &[f64]| -> Result<Vec<f64>> {
        let w0 = 1.0 - t[m..2 * m].iter().sum::<f64>();
        let mut atoms: Vec<(f64, f64)> = (0..m).map(|j| (t[j], t[m + j])).collect();
        atoms.push((0.0, w0));
        let z = matched(base, forward_map(&SpectralMeasure::from_atoms_unchecked(atoms), t[2 * m])?);
        let mut out: Vec<f64> = z[..m].iter().map(|v| v.norm()).collect();
        out.extend(z[..m].iter().map(|v| v.arg()));
        out.push(z[m].norm());
        Ok(out)
    };
    let dim = 2 * m + 1;
    let mut jac = vec![0.0; dim * dim];
    for c in 0..dim {
        let h = fd_step(theta[c], if c < m { 1.0 } else { 0.0 });
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[c] += h;
        down[c] -= h;
        let (fu, fd) = (eval(&up)?, eval(&down)?);
        for r in 0..dim {
            jac[r * dim + c] = (fu[r] - fd[r]) / (up[c] - down[c]);
        }
    }
    Ok(real_det(dim, &jac).abs())
}

/// Max relative deviation between the analytic Jacobian and a central
/// finite-difference determinant over β = 2 model draws.
pub fn jacobian_check(case: JacobianCase, trials: usize, rng: &RngStream) -> Result<TestReport> {
    let law = CouplingLaw::GammaType { sigma: 1.0 };
    let (spec, name) = match case {
        JacobianCase::Gaussian { n } => (EnsembleSpec::gaussian(2.0, n)?, format!("jacobian_gaussian_n{n}")),
        JacobianCase::LaguerreSemidef { m } => (EnsembleSpec::laguerre(2.0, m, m + 2)?, format!("jacobian_laguerre_semidef_m{m}")),
    };
    let devs = par_draws(rng, trials, |r| -> Result<f64> {
        let s = sample_perturbed(r, &spec, &law)?;
        let mu = sample_measure(&s)?;
        let z = forward_map(&mu, s.l)?;
        let (analytic, fd) = match case {
            JacobianCase::Gaussian { .. } => (log_jacobian_gaussian(&mu, s.l, z.as_slice())?.exp(), fd_gaussian(&mu, s.l, z.as_slice())?),
            JacobianCase::LaguerreSemidef { .. } => {
                (log_jacobian_laguerre_semidefinite(&mu, s.l, z.as_slice())?.exp(), fd_semidefinite(&mu, s.l, z.as_slice())?)
            }
        };
        Ok((fd - analytic).abs() / analytic)
    });
    let worst = max_or_nan(devs.into_iter().map(|r| r.unwrap_or(f64::NAN)));
    Ok(TestReport::from_residual(name, trials, worst, worst, JACOBIAN_TOL, rng))
}

/// Max relative residual of the trace and product identities over draws.
pub fn identity_sweep(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let residuals = par_draws(rng, samples, |r| -> Result<f64> {
        let s = sample_perturbed(r, spec, law)?;
        let mu = sample_measure(&s)?;
        let z = forward_map(&mu, s.l)?;
        let mut worst = identity_suite(&mu, s.l, z.as_slice()).max();
        if let (Some(b), true) = (&s.bidiagonal, spec.is_semidefinite()) {
            worst = max_or_nan([worst, laguerre_product_identities(b, &mu)?.max()]);
        }
        Ok(worst)
    });
    let worst = max_or_nan(residuals.into_iter().map(|r| r.unwrap_or(f64::NAN)));
    Ok(TestReport::from_residual("identities", samples, worst, worst, IDENTITY_TOL, rng))
}

struct RoundtripDraw {
    forward_inverse: f64,
    inverse_forward: f64,
    two_route: f64,
    constraint: f64,
}

fn roundtrip_draw(r: &mut RngStream, spec: &EnsembleSpec, law: &CouplingLaw) -> Result<RoundtripDraw> {
    let s = sample_perturbed(r, spec, law)?;
    let mu = sample_measure(&s)?;
    let z = forward_map(&mu, s.l)?;
    let scale = scale_of(z.as_slice());

    let back = inverse_map(z.as_slice())?;
    let mut fi = (back.l - s.l).abs() / scale;
    for (a, b) in back.measure.atoms().iter().zip(mu.atoms()) {
        fi = fi.max((a.0 - b.0).abs() / scale).max((a.1 - b.1).abs());
    }
    let again = forward_map(&back.measure, back.l)?;
    let ifw = matched_distance(again.as_slice(), z.as_slice()) / scale;

    let full = sample_spectrum(&s)?;
    let direct = eigenvalues_direct(&s.jacobi, s.l)?;
    let two_route = matched_distance(full.as_slice(), direct.as_slice()) / scale_of(full.as_slice());

    let constraint = if spec.is_semidefinite() { (arg_sum(z.as_slice(), 0.0) - FRAC_PI_2).abs() } else { 0.0 };
    Ok(RoundtripDraw { forward_inverse: fi, inverse_forward: ifw, two_route, constraint })
}

/// Forward/inverse roundtrips, direct-versus-forward spectra, and for
/// singular Laguerre models the `Σ Arg = π/2` constraint.
pub fn roundtrip_sweep(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<Vec<TestReport>> {
    let draws: Vec<RoundtripDraw> = par_draws(rng, samples, |r| roundtrip_draw(r, spec, law)).into_iter().collect::<Result<_>>()?;
    let report = |name: &str, f: fn(&RoundtripDraw) -> f64| {
        let worst = max_or_nan(draws.iter().map(f));
        TestReport::from_residual(name, samples, worst, worst, ROUNDTRIP_TOL, rng)
    };
    let mut out = vec![
        report("roundtrip_forward_inverse", |d| d.forward_inverse),
        report("roundtrip_inverse_forward", |d| d.inverse_forward),
        report("two_route_spectra", |d| d.two_route),
    ];
    if spec.is_semidefinite() {
        out.push(report("semidefinite_constraint", |d| d.constraint));
    }
    Ok(out)
}

/// Counts draws whose spectrum leaves the configuration space of the model.
pub fn configuration_sweep(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let flags = par_draws(rng, samples, |r| -> Result<bool> {
        let s = sample_perturbed(r, spec, law)?;
        let mut z = sample_spectrum(&s)?;
        Ok(match *spec {
            EnsembleSpec::Gaussian { .. } => config_gaussian(z.as_slice()),
            EnsembleSpec::Laguerre { n, m, .. } if m >= n => config_laguerre_definite(z.as_slice()),
            EnsembleSpec::Laguerre { n, m, .. } => {
                let tol = 1e-8 * s.jacobi.norm_inf().max(1.0);
                let removed = z.remove_smallest(n - m - 1);
                removed.iter().all(|v| v.norm() < tol) && config_laguerre_semidefinite(z.as_slice(), 1e-8)
            }
        })
    });
    let violations = flags.into_iter().filter(|f| !matches!(f, Ok(true))).count() as f64;
    Ok(TestReport::from_residual("configuration_space", samples, violations, violations, 1.0, rng))
}

/// One-sample KS of a sampler against the numerically integrated density.
pub fn sampler_law_check(dist: &DistSpec, samples: usize, rng: &RngStream) -> Result<TestReport> {
    dist.validate()?;
    if samples == 0 {
        return Err(Error::Empty("sampler law check"));
    }
    let mut r = rng.substream(0);
    let mut xs: Vec<f64> = (0..samples).map(|_| dist.sample(&mut r)).collect::<Result<_>>()?;
    xs.sort_by(f64::total_cmp);
    let (d, p) = ks_one_sample_stat(&law_cdf(dist, &xs))?;
    let name = serde_json::to_string(dist).expect("spec serializes");
    Ok(TestReport::from_p_value(format!("sampler_law {name}"), samples, d, p, KS_LEVEL, rng))
}

fn reflected_and_pairs(z: &[Complex64]) -> (f64, f64, f64) {
    let mut reflected = 0.0;
    let mut pairs = 0.0;
    let mut cross = 0.0;
    for (j, a) in z.iter().enumerate() {
        for (k, b) in z.iter().enumerate() {
            reflected += (a - b.conj()).norm().ln();
            if j < k {
                pairs += (a - b).norm().ln();
                cross += a.im * b.im;
            }
        }
    }
    (reflected, pairs, cross)
}

fn random_upper_points(r: &mut RngStream, n: usize) -> Result<Vec<Complex64>> {
    (0..n)
        .map(|_| {
            let x = DistSpec::Normal { sigma: 1.5 }.sample(r)?;
            let y = DistSpec::Gamma { shape: 1.0, scale: 1.0 }.sample(r)?;
            Ok(Complex64::new(x, y))
        })
        .collect()
}

/// The displayed density for a Gaussian coupling row `N(0, σ)`:
/// `1/((√2σ)^{βn} Γ(βn/2) c g) Π|z_j - z̄_k|^{β/2-1} Π|z_j - z_k|² exp(...)`.
pub fn gaussian_coupling_display(beta: f64, sigma: f64, z: &[Complex64]) -> f64 {
    let n = z.len();
    let bn = beta * n as f64;
    let (reflected, pairs, cross) = reflected_and_pairs(z);
    -(bn * (std::f64::consts::SQRT_2 * sigma).ln() + ln_gamma(bn / 2.0) + log_c(beta, n) + log_g(beta, n))
        + (beta / 2.0 - 1.0) * reflected
        + 2.0 * pairs
        - 0.5 * z.iter().map(|v| v.re * v.re).sum::<f64>()
        - cross
        - z.iter().map(|v| v.im).sum::<f64>() / (2.0 * sigma * sigma)
}

/// Unnormalized display for `l ~ χ_{βn/2}`:
/// `Π|z_j - z̄_k|^{β/2-1} Π|z_j - z_k|² exp(-½Σ|z_j|² - 2Σ_{j<k} Im z_j Im z_k)`.
pub fn chi_half_display(beta: f64, z: &[Complex64]) -> f64 {
    let (reflected, pairs, cross) = reflected_and_pairs(z);
    (beta / 2.0 - 1.0) * reflected + 2.0 * pairs - 0.5 * z.iter().map(|v| v.norm_sqr()).sum::<f64>() - 2.0 * cross
}

/// Max `|log p_z - log display|` at random upper half-plane points, with the
/// Gaussian-row coupling law `GammaType(σ)`.
pub fn gaussian_coupling_display_check(beta: f64, sigma: f64, n: usize, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let spec = EnsembleSpec::gaussian(beta, n)?;
    if !(sigma > 0.0) {
        return Err(param("sigma must be positive"));
    }
    let params = DensityParams { spec, law: CouplingLaw::GammaType { sigma } };
    let diffs = par_draws(rng, samples, |r| -> Result<f64> {
        let z = random_upper_points(r, n)?;
        Ok((log_density_perturbed(&params, &z)? - gaussian_coupling_display(beta, sigma, &z)).abs())
    });
    let worst = max_or_nan(diffs.into_iter().map(|r| r.unwrap_or(f64::NAN)));
    Ok(TestReport::from_residual(
        format!("gaussian_coupling_display beta={beta} sigma={sigma} n={n}"),
        samples,
        worst,
        worst,
        DISPLAY_TOL,
        rng,
    ))
}

/// Compares log-density differences between pairs of random points with the
/// unnormalized `χ_{βn/2}` display.
pub fn chi_half_display_check(beta: f64, n: usize, samples: usize, rng: &RngStream) -> Result<TestReport> {
    let spec = EnsembleSpec::gaussian(beta, n)?;
    let params = DensityParams { spec, law: CouplingLaw::ChiHalf };
    let diffs = par_draws(rng, samples, |r| -> Result<f64> {
        let z1 = random_upper_points(r, n)?;
        let z2 = random_upper_points(r, n)?;
        let exact = log_density_perturbed(&params, &z1)? - log_density_perturbed(&params, &z2)?;
        let shown = chi_half_display(beta, &z1) - chi_half_display(beta, &z2);
        Ok((exact - shown).abs())
    });
    let worst = max_or_nan(diffs.into_iter().map(|r| r.unwrap_or(f64::NAN)));
    Ok(TestReport::from_residual(format!("chi_half_display beta={beta} n={n}"), samples, worst, worst, DISPLAY_TOL, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_n1_is_one() {
        let r = jacobian_check(JacobianCase::Gaussian { n: 1 }, 5, &RngStream::new(1)).unwrap();
        assert!(r.statistic < 1e-9, "{r:?}");
    }

    #[test]
    fn small_sweeps_pass() {
        let law = CouplingLaw::GammaType { sigma: 1.0 };
        let rng = RngStream::new(2);
        for spec in [EnsembleSpec::gaussian(1.0, 3).unwrap(), EnsembleSpec::laguerre(2.0, 2, 4).unwrap()] {
            assert!(change_of_variables_sweep(&spec, &law, 50, &rng).unwrap().pass);
            assert!(identity_sweep(&spec, &law, 50, &rng).unwrap().pass);
            assert!(configuration_sweep(&spec, &law, 50, &rng).unwrap().pass);
            assert!(roundtrip_sweep(&spec, &law, 50, &rng).unwrap().iter().all(|r| r.pass));
        }
        assert!(jacobian_check(JacobianCase::Gaussian { n: 3 }, 10, &rng).unwrap().pass);
        assert!(jacobian_check(JacobianCase::LaguerreSemidef { m: 2 }, 10, &rng).unwrap().pass);
    }

    #[test]
    fn gaussian_n1_independent_ratio_is_one() {
        let spec = EnsembleSpec::gaussian(2.0, 1).unwrap();
        let r = normalization_independent(&spec, &CouplingLaw::GammaType { sigma: 1.0 }, 100, &RngStream::new(3)).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn displays_agree_at_beta_two() {
        let rng = RngStream::new(4);
        assert!(gaussian_coupling_display_check(2.0, 1.0, 3, 50, &rng).unwrap().pass);
        assert!(gaussian_coupling_display_check(2.0, 2.0, 2, 50, &rng).unwrap().pass);
        assert!(chi_half_display_check(1.0, 3, 50, &rng).unwrap().pass);
    }

    #[test]
    fn display_offset_away_from_beta_two() {
        // the display lacks the factor 2^{n(β/2-1)} carried by the normalized density
        let r = gaussian_coupling_display_check(1.0, 1.0, 2, 20, &RngStream::new(5)).unwrap();
        assert!((r.statistic - LN_2).abs() < 1e-12, "{r:?}");
    }
}
