//! Tridiagonal and dense β-ensembles and the coupling laws for `l`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{chi_unchecked, gamma_unchecked, log_pdf, std_normal, DistSpec};
use crate::error::{param, Error, Result};
use crate::jacobi::{bidiag_square, Bidiagonal, DenseHermitian, JacobiMatrix};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Gaussian { beta: f64, n: usize },
    Laguerre { beta: f64, n: usize, m: usize },
}

impl EnsembleSpec {
    pub fn gaussian(beta: f64, n: usize) -> Result<Self> {
        let s = Self::Gaussian { beta, n };
        s.validate()?;
        Ok(s)
    }

    pub fn laguerre(beta: f64, m: usize, n: usize) -> Result<Self> {
        let s = Self::Laguerre { beta, n, m };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (beta, n) = (self.beta(), self.n());
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(param(format!("beta must be positive, got {beta}")));
        }
        if n == 0 {
            return Err(param("n must be at least 1"));
        }
        if let Self::Laguerre { m, .. } = self {
            if *m == 0 {
                return Err(param("m must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Self::Gaussian { beta, .. } | Self::Laguerre { beta, .. } => beta,
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::Gaussian { n, .. } | Self::Laguerre { n, .. } => n,
        }
    }

    /// Laguerre exponent `a = |m - n| + 1 - 2/β`.
    pub fn laguerre_a(&self) -> Option<f64> {
        match *self {
            Self::Laguerre { beta, n, m } => Some(m.abs_diff(n) as f64 + 1.0 - 2.0 / beta),
            Self::Gaussian { .. } => None,
        }
    }

    /// True for Laguerre with `m < n`, where `J` is singular.
    pub fn is_semidefinite(&self) -> bool {
        matches!(*self, Self::Laguerre { n, m, .. } if m < n)
    }
}

/// Law of the coupling strength `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingLaw {
    /// `Gamma(βn/2, 2σ²)`, the norm of a Gaussian coupling vector.
    GammaType {
        sigma: f64,
    },
    /// `χ_{βn/2}`.
    ChiHalf,
    CustomGamma {
        shape: f64,
        scale: f64,
    },
}

impl CouplingLaw {
    pub fn dist(&self, beta: f64, n: usize) -> Result<DistSpec> {
        let half = beta * n as f64 / 2.0;
        let d = match *self {
            Self::GammaType { sigma } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(param(format!("sigma must be positive, got {sigma}")));
                }
                DistSpec::Gamma { shape: half, scale: 2.0 * sigma * sigma }
            }
            Self::ChiHalf => DistSpec::Chi { k: half },
            Self::CustomGamma { shape, scale } => DistSpec::Gamma { shape, scale },
        };
        d.validate()?;
        Ok(d)
    }
}

/// Draws the tridiagonal Gaussian model: `b_j ~ N(0,1)`, `a_j ~ χ̃_{β(n-j)}`.
pub fn sample_gbeta(rng: &mut RngStream, beta: f64, n: usize) -> Result<JacobiMatrix> {
    EnsembleSpec::gaussian(beta, n)?;
    let diag = (0..n).map(|_| std_normal(rng)).collect();
    let offdiag = (1..n).map(|j| chi_unchecked(rng, beta * (n - j) as f64) / std::f64::consts::SQRT_2).collect();
    JacobiMatrix::new(diag, offdiag)
}

/// Draws the bidiagonal Laguerre model and its square `J = BᵀB`.
///
/// For `m < n` the coefficients past index `m` are exact zeros, so `J` splits
/// into an `(m+1)`-block and a zero block.
pub fn sample_lbeta(rng: &mut RngStream, beta: f64, m: usize, n: usize) -> Result<(Bidiagonal, JacobiMatrix)> {
    EnsembleSpec::laguerre(beta, m, n)?;
    let x = (1..=n).map(|j| if j <= m { chi_unchecked(rng, beta * (m + 1 - j) as f64) } else { 0.0 }).collect();
    let y = (1..n).map(|j| if j <= m { chi_unchecked(rng, beta * (n - j) as f64) } else { 0.0 }).collect();
    let b = Bidiagonal::new(x, y)?;
    let j = bidiag_square(&b);
    Ok((b, j))
}

/// Draws a dense GOE/GUE (`Gaussian`) or real/complex Wishart `G*G` (`Laguerre`),
/// normalized to match the tridiagonal models.
pub fn sample_dense(rng: &mut RngStream, spec: &EnsembleSpec) -> Result<DenseHermitian> {
    spec.validate()?;
    let beta = spec.beta();
    let field = if beta == 1.0 {
        1u8
    } else if beta == 2.0 {
        2u8
    } else {
        return Err(Error::Unsupported(format!("no dense model for beta = {beta}")));
    };
    let n = spec.n();
    let zero = Complex64::new(0.0, 0.0);
    let mut data = vec![zero; n * n];
    match *spec {
        EnsembleSpec::Gaussian { .. } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for r in 0..n {
                data[r * n + r] = Complex64::new(std_normal(rng), 0.0);
                for c in r + 1..n {
                    let re = s * std_normal(rng);
                    let im = if field == 2 { s * std_normal(rng) } else { 0.0 };
                    data[r * n + c] = Complex64::new(re, im);
                    data[c * n + r] = Complex64::new(re, -im);
                }
            }
        }
        EnsembleSpec::Laguerre { m, .. } => {
            let g: Vec<Complex64> = (0..m * n)
                .map(|_| {
                    let re = std_normal(rng);
                    let im = if field == 2 { std_normal(rng) } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect();
            for r in 0..n {
                for c in r..n {
                    let v: Complex64 = (0..m).map(|k| g[k * n + r].conj() * g[k * n + c]).sum();
                    data[r * n + c] = v;
                    data[c * n + r] = v.conj();
                }
            }
        }
    }
    DenseHermitian::new(n, field, data)
}

pub fn sample_coupling(rng: &mut RngStream, law: &CouplingLaw, beta: f64, n: usize) -> Result<f64> {
    let d = law.dist(beta, n)?;
    Ok(match d {
        DistSpec::Gamma { shape, scale } => gamma_unchecked(rng, shape, scale),
        DistSpec::Chi { k } => chi_unchecked(rng, k),
        other => other.sample(rng)?,
    })
}

/// Log density `log F(l)` of the coupling law.
pub fn coupling_log_density(law: &CouplingLaw, beta: f64, n: usize, l: f64) -> Result<f64> {
    Ok(log_pdf(&law.dist(beta, n)?, l))
}

/// One draw of `(J, l)`, with the bidiagonal factor for Laguerre models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedSample {
    pub spec: EnsembleSpec,
    pub jacobi: JacobiMatrix,
    pub l: f64,
    pub bidiagonal: Option<Bidiagonal>,
}

/// Draws `J` first, then `l`.
pub fn sample_perturbed(rng: &mut RngStream, spec: &EnsembleSpec, law: &CouplingLaw) -> Result<PerturbedSample> {
    spec.validate()?;
    law.dist(spec.beta(), spec.n())?;
    let (jacobi, bidiagonal) = match *spec {
        EnsembleSpec::Gaussian { beta, n } => (sample_gbeta(rng, beta, n)?, None),
        EnsembleSpec::Laguerre { beta, n, m } => {
            let (b, j) = sample_lbeta(rng, beta, m, n)?;
            (j, Some(b))
        }
    };
    let l = sample_coupling(rng, law, spec.beta(), spec.n())?;
    Ok(PerturbedSample { spec: *spec, jacobi, l, bidiagonal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_shapes() {
        let s: EnsembleSpec = serde_json::from_str(r#"{"kind":"gaussian","beta":2,"n":8}"#).unwrap();
        assert_eq!(s, EnsembleSpec::Gaussian { beta: 2.0, n: 8 });
        let s: EnsembleSpec = serde_json::from_str(r#"{"kind":"laguerre","beta":1,"n":5,"m":2}"#).unwrap();
        assert!(s.is_semidefinite());
        assert_eq!(s.laguerre_a(), Some(2.0));
        let c: CouplingLaw = serde_json::from_str(r#"{"kind":"gamma_type","sigma":1.0}"#).unwrap();
        assert_eq!(c, CouplingLaw::GammaType { sigma: 1.0 });
        let c: CouplingLaw = serde_json::from_str(r#"{"kind":"chi_half"}"#).unwrap();
        assert_eq!(c, CouplingLaw::ChiHalf);
    }

    #[test]
    fn gaussian_one_by_one() {
        let mut rng = RngStream::new(1);
        let j = sample_gbeta(&mut rng, 2.0, 1).unwrap();
        assert_eq!(j.n(), 1);
        assert!(j.offdiag().is_empty());
    }

    #[test]
    fn invalid_parameters() {
        let mut rng = RngStream::new(1);
        assert!(sample_gbeta(&mut rng, 0.0, 3).is_err());
        assert!(sample_gbeta(&mut rng, 2.0, 0).is_err());
        assert!(sample_lbeta(&mut rng, 1.0, 0, 3).is_err());
        assert!(sample_coupling(&mut rng, &CouplingLaw::GammaType { sigma: 0.0 }, 2.0, 3).is_err());
        let spec = EnsembleSpec::gaussian(4.0, 3).unwrap();
        assert!(matches!(sample_dense(&mut rng, &spec), Err(Error::Unsupported(_))));
    }

    #[test]
    fn laguerre_structural_zeros() {
        let mut rng = RngStream::new(2);
        let (b, j) = sample_lbeta(&mut rng, 1.0, 2, 5).unwrap();
        assert!(b.main()[..2].iter().all(|&x| x > 0.0));
        assert_eq!(&b.main()[2..], &[0.0, 0.0, 0.0]);
        assert_eq!(&b.upper()[2..], &[0.0, 0.0]);
        assert_eq!(&j.offdiag()[2..], &[0.0, 0.0]);
        assert_eq!(&j.diag()[3..], &[0.0, 0.0]);
        let (b, _) = sample_lbeta(&mut rng, 1.0, 1, 1).unwrap();
        assert_eq!(b.n(), 1);
    }

    #[test]
    fn gaussian_moments() {
        // E tr J² = n + 2 Σ E a_j² = n + β n(n-1)/2
        let (beta, n, draws) = (2.0, 4, 40_000);
        let mut rng = RngStream::new(3);
        let mut acc = 0.0;
        for _ in 0..draws {
            let j = sample_gbeta(&mut rng, beta, n).unwrap();
            acc += j.diag().iter().map(|b| b * b).sum::<f64>() + 2.0 * j.offdiag().iter().map(|a| a * a).sum::<f64>();
        }
        let mean = acc / draws as f64;
        let expect = n as f64 + beta * (n * (n - 1)) as f64 / 2.0;
        assert!((mean - expect).abs() < 0.05 * expect, "{mean} vs {expect}");
    }

    #[test]
    fn dense_matches_tridiagonal_trace_moments() {
        let mut rng = RngStream::new(4);
        for spec in [EnsembleSpec::gaussian(1.0, 4).unwrap(), EnsembleSpec::laguerre(2.0, 3, 4).unwrap()] {
            let draws = 20_000;
            let (mut dense, mut tri) = (0.0, 0.0);
            for _ in 0..draws {
                let h = sample_dense(&mut rng, &spec).unwrap();
                dense += h.data().iter().map(|v| v.norm_sqr()).sum::<f64>();
                let s = sample_perturbed(&mut rng, &spec, &CouplingLaw::ChiHalf).unwrap();
                tri += s.jacobi.diag().iter().map(|b| b * b).sum::<f64>() + 2.0 * s.jacobi.offdiag().iter().map(|a| a * a).sum::<f64>();
            }
            let (d, t) = (dense / draws as f64, tri / draws as f64);
            assert!((d - t).abs() < 0.05 * t, "{spec:?}: {d} vs {t}");
        }
    }

    #[test]
    fn coupling_density_integrates_and_matches_law() {
        let law = CouplingLaw::GammaType { sigma: 1.5 };
        let lp = coupling_log_density(&law, 2.0, 3, 2.0).unwrap();
        // Gamma(3, 4.5) at 2
        let expect = 2.0 * 2.0f64.ln() - 2.0 / 4.5 - crate::special::ln_gamma(3.0) - 3.0 * 4.5f64.ln();
        assert!((lp - expect).abs() < 1e-13);
        assert_eq!(coupling_log_density(&law, 2.0, 3, -1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn draws_are_deterministic() {
        let spec = EnsembleSpec::laguerre(0.5, 3, 6).unwrap();
        let law = CouplingLaw::GammaType { sigma: 1.0 };
        let a = sample_perturbed(&mut RngStream::new(9), &spec, &law).unwrap();
        let b = sample_perturbed(&mut RngStream::new(9), &spec, &law).unwrap();
        assert_eq!(a, b);
    }
}
