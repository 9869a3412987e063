//! Eigenvalues of `J + il·E₁₁` and the bijection with `(μ, l)`.

mod config;
mod identities;
mod jacobian;

pub use config::{arg_sum, config_gaussian, config_laguerre_definite, config_laguerre_semidefinite, z_from_polar, ZERO_ARG_TOL};
pub use identities::{identity_suite, laguerre_product_identities, IdentityReport};
pub use jacobian::{jacobian_gaussian, jacobian_laguerre_semidefinite, log_jacobian_gaussian, log_jacobian_laguerre_semidefinite};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::PerturbedSample;
use crate::error::{param, Error, Result};
use crate::jacobi::{char_poly_coeffs, spectral_measure, symmetric_tridiagonal_eigen, JacobiMatrix, SpectralMeasure};
use crate::poly::{poly_roots, ComplexPoly};

/// Log of the Vandermonde ratio above which the inverse map is flagged.
pub const ILL_CONDITIONED_LOG_RATIO: f64 = 27.631_021_115_928_547; // ln 1e12

/// Eigenvalues of a rank-one perturbation, sorted by `(Re, Im)` descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerturbedSpectrum(Vec<Complex64>);

impl PerturbedSpectrum {
    pub fn new(mut z: Vec<Complex64>) -> Self {
        z.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        Self(z)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops the `count` entries of smallest modulus, returning them.
    pub fn remove_smallest(&mut self, count: usize) -> Vec<Complex64> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[a].norm().total_cmp(&self.0[b].norm()));
        let mut drop: Vec<usize> = order[..count.min(order.len())].to_vec();
        drop.sort_unstable_by(|a, b| b.cmp(a));
        drop.into_iter().map(|i| self.0.remove(i)).collect()
    }
}

/// Eigenvalues of `J + il·E₁₁` as roots of its characteristic polynomial.
///
/// Blocks of `J` not containing `e_1` are unaffected by the perturbation and
/// contribute their real eigenvalues.
pub fn eigenvalues_direct(j: &JacobiMatrix, l: f64) -> Result<PerturbedSpectrum> {
    check_l(l)?;
    let blocks = j.blocks();
    let p = char_poly_coeffs(&blocks[0], Complex64::new(0.0, l));
    let mut z = poly_roots(&p)?;
    for b in &blocks[1..] {
        let (vals, _) = symmetric_tridiagonal_eigen(b.diag(), b.offdiag())?;
        z.extend(vals.into_iter().map(|v| Complex64::new(v, 0.0)));
    }
    Ok(PerturbedSpectrum::new(z))
}

/// Roots of `Π(z - λ_j) - il Σ_j w_j Π_{k≠j}(z - λ_k)`, refined on the secular
/// equation `1 + il m(z) = 0` anchored at the nearest atom.
pub fn forward_map(mu: &SpectralMeasure, l: f64) -> Result<PerturbedSpectrum> {
    mu.validate()?;
    check_l(l)?;
    let lam: Vec<f64> = mu.lambdas().collect();
    let w: Vec<f64> = mu.weights().collect();
    let n = lam.len();
    let il = Complex64::new(0.0, l);
    let real_roots: Vec<Complex64> = lam.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut coeffs = ComplexPoly::from_roots(&real_roots).coeffs().to_vec();
    for j in 0..n {
        let others: Vec<Complex64> = (0..n).filter(|&k| k != j).map(|k| real_roots[k]).collect();
        for (c, q) in coeffs.iter_mut().zip(ComplexPoly::from_roots(&others).coeffs()) {
            *c -= il * w[j] * q;
        }
    }
    let p = ComplexPoly::from_monic(coeffs)?;
    let raw = poly_roots(&p)?;
    let polished = raw
        .iter()
        .enumerate()
        .map(|(i, &z0)| {
            let gap = raw.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &zk)| (zk - z0).norm()).fold(f64::INFINITY, f64::min);
            secular_polish(&lam, &w, l, z0, 0.25 * gap)
        })
        .collect();
    Ok(PerturbedSpectrum::new(polished))
}

fn secular_polish(lam: &[f64], w: &[f64], l: f64, z0: Complex64, max_move: f64) -> Complex64 {
    let j = (0..lam.len()).min_by(|&a, &b| (z0 - lam[a]).norm().total_cmp(&(z0 - lam[b]).norm())).expect("non-empty measure");
    let il = Complex64::new(0.0, l);
    let one = Complex64::new(1.0, 0.0);
    let mut d = z0 - lam[j];
    for _ in 0..60 {
        let z = d + lam[j];
        let (mut s, mut ds) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (k, (&lk, &wk)) in lam.iter().zip(w).enumerate() {
            if k != j {
                let r = (Complex64::new(lk, 0.0) - z).inv();
                s += wk * r;
                ds += wk * r * r;
            }
        }
        let h = d * (one + il * s) - il * w[j];
        let dh = one + il * s + d * il * ds;
        let step = h / dh;
        if !step.re.is_finite() || !step.im.is_finite() {
            return z0;
        }
        d -= step;
        if step.norm() <= 2.0 * f64::EPSILON * d.norm() {
            break;
        }
    }
    let z = d + lam[j];
    if (z - z0).norm() <= max_move && z.re.is_finite() && z.im.is_finite() {
        z
    } else {
        z0
    }
}

/// Result of inverting the forward map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseImage {
    pub measure: SpectralMeasure,
    pub l: f64,
    /// `ln(Π|λ_j - λ_k|² / Π|z_j - z_k|²)`.
    pub log_vandermonde_ratio: f64,
}

impl InverseImage {
    pub fn is_ill_conditioned(&self) -> bool {
        self.log_vandermonde_ratio > ILL_CONDITIONED_LOG_RATIO
    }
}

/// Recovers `(μ, l)` from eigenvalues in the open upper half-plane.
///
/// `λ` are the real roots of the real part of `Π(z - z_j)`, each refined
/// relative to its nearest `z_k`; `l = Σ Im z_j`; and
/// `w_j = (i/l) Π_k(λ_j - z_k) / Π_{k≠j}(λ_j - λ_k)`.
pub fn inverse_map(z: &[Complex64]) -> Result<InverseImage> {
    if z.is_empty() {
        return Err(Error::Empty("perturbed spectrum"));
    }
    if let Some(bad) = z.iter().find(|v| !(v.im > 0.0) || !v.re.is_finite() || !v.im.is_finite()) {
        return Err(param(format!("eigenvalue {bad} is not in the open upper half-plane")));
    }
    let n = z.len();
    let l: f64 = z.iter().map(|v| v.im).sum();
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let real = ComplexPoly::from_roots(z).real_part();
    let approx = if n == 1 { vec![Complex64::new(z[0].re, 0.0)] } else { poly_roots(&real)? };
    if let Some(bad) = approx.iter().find(|r| r.im.abs() > 1e-6 * scale) {
        return Err(Error::InconsistentSpectrum(format!("real part polynomial has complex root {bad}")));
    }

    let mut lam = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    for r in &approx {
        let (k, lk, dk) = refine_real_root(z, r.re);
        lam.push(lk);
        anchor.push((k, dk));
    }

    let i_over_l = Complex64::new(0.0, 1.0 / l);
    let mut atoms = Vec::with_capacity(n);
    for j in 0..n {
        let mut num = i_over_l;
        for (k, &zk) in z.iter().enumerate() {
            num *= if k == anchor[j].0 { anchor[j].1 } else { lam[j] - zk };
        }
        let den: f64 = (0..n).filter(|&k| k != j).map(|k| lam[j] - lam[k]).product();
        let wj = num / den;
        if !(wj.re > 0.0) || wj.im.abs() > 1e-8 {
            return Err(Error::InconsistentSpectrum(format!("weight at {} is {wj}", lam[j])));
        }
        atoms.push((lam[j], wj.re));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InconsistentSpectrum(format!("weights sum to {total}")));
    }
    let measure = SpectralMeasure::new(atoms.into_iter().map(|(x, w)| (x, w / total)).collect())
        .map_err(|e| Error::InconsistentSpectrum(e.to_string()))?;
    let log_vandermonde_ratio = 2.0 * pair_log_sum(&lam) - 2.0 * pair_log_sum_complex(z);
    Ok(InverseImage { measure, l, log_vandermonde_ratio })
}

/// Newton on `Re[(ε - i y_k) Π_{m≠k}(x_k + ε - z_m)] = 0` for the `z_k` nearest `x0`.
/// Returns the anchor, the root, and `λ - z_k` computed without cancellation.
fn refine_real_root(z: &[Complex64], x0: f64) -> (usize, f64, Complex64) {
    let k = (0..z.len()).min_by(|&a, &b| (z[a] - x0).norm().total_cmp(&(z[b] - x0).norm())).expect("non-empty spectrum");
    let (xk, yk) = (z[k].re, z[k].im);
    let mut eps = x0 - xk;
    let start = eps;
    for _ in 0..60 {
        let x = xk + eps;
        let mut q = Complex64::new(1.0, 0.0);
        let mut dlog = Complex64::new(0.0, 0.0);
        for (m, &zm) in z.iter().enumerate() {
            if m != k {
                q *= x - zm;
                dlog += (x - zm).inv();
            }
        }
        let d = Complex64::new(eps, -yk);
        let g = (d * q).re;
        let dg = (q + d * q * dlog).re;
        let step = g / dg;
        if !step.is_finite() {
            eps = start;
            break;
        }
        eps -= step;
        if step.abs() <= 2.0 * f64::EPSILON * eps.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    if (eps - start).abs() > 1e-6 * (1.0 + xk.abs() + yk) {
        eps = start;
    }
    (k, xk + eps, Complex64::new(eps, -yk))
}

fn check_l(l: f64) -> Result<()> {
    if !(l >= 0.0) || !l.is_finite() {
        return Err(param(format!("coupling l must be finite and non-negative, got {l}")));
    }
    Ok(())
}

pub(crate) fn pair_log_sum(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            s += (x[j] - x[k]).abs().ln();
        }
    }
    s
}

pub(crate) fn pair_log_sum_complex(z: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for j in 0..z.len() {
        for k in j + 1..z.len() {
            s += (z[j] - z[k]).norm().ln();
        }
    }
    s
}

/// Spectral measure of the block of `J` containing `e_1`.
///
/// For singular Laguerre draws the zero atom is set exactly and its weight is
/// taken from the kernel vector of the bidiagonal factor.
pub fn sample_measure(sample: &PerturbedSample) -> Result<SpectralMeasure> {
    let lead = sample.jacobi.leading_block();
    match (&sample.bidiagonal, sample.spec.is_semidefinite()) {
        (Some(b), true) => {
            let m = b.main().iter().position(|&x| x == 0.0).unwrap_or(b.n());
            if m == 0 || lead.n() != m + 1 {
                return spectral_measure(&lead);
            }
            let (x, y) = (&b.main()[..m], &b.upper()[..m]);
            // nonzero spectrum from C Cᵀ, C the m × (m+1) top of the factor
            let diag: Vec<f64> = x.iter().zip(y).map(|(a, c)| a * a + c * c).collect();
            let off: Vec<f64> = (0..m - 1).map(|j| y[j] * x[j + 1]).collect();
            let (vals, first) = symmetric_tridiagonal_eigen(&diag, &off)?;
            let mut log_v = vec![0.0; m + 1];
            for j in (0..m).rev() {
                log_v[j] = log_v[j + 1] + y[j].ln() - x[j].ln();
            }
            let top = log_v.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(2.0 * v));
            let log_norm = top + log_v.iter().map(|v| (2.0 * v - top).exp()).sum::<f64>().ln();
            let w0 = (2.0 * log_v[0] - log_norm).exp();
            let raw: Vec<f64> = vals.iter().zip(&first).map(|(l, u)| x[0] * x[0] * u * u / l).collect();
            let total = raw.iter().sum::<f64>() + w0;
            let mut atoms: Vec<(f64, f64)> = vals.iter().zip(&raw).map(|(&l, &w)| (l, w / total)).collect();
            atoms.push((0.0, w0 / total));
            Ok(SpectralMeasure::from_atoms_unchecked(atoms))
        }
        _ => spectral_measure(&lead),
    }
}

/// All `n` eigenvalues of `J + il·E₁₁` for a model draw, via the forward map.
pub fn sample_spectrum(sample: &PerturbedSample) -> Result<PerturbedSpectrum> {
    let mu = sample_measure(sample)?;
    let mut z = forward_map(&mu, sample.l)?.into_vec();
    for b in &sample.jacobi.blocks()[1..] {
        let (vals, _) = symmetric_tridiagonal_eigen(b.diag(), b.offdiag())?;
        z.extend(vals.into_iter().map(|v| Complex64::new(v, 0.0)));
    }
    Ok(PerturbedSpectrum::new(z))
}
