//! Exact samplers and log-densities for the normal, χ, χ̃, χ² and Gamma laws.
//!
//! Conventions:
//! * `Normal(σ)` has density `exp(-x²/2σ²) / sqrt(2πσ²)`.
//! * `ChiSquared(k)` is `Gamma(k/2, 2)`.
//! * `Chi(k)` is the square root of a `ChiSquared(k)` draw.
//! * `ChiTilde(k)` is `Chi(k) / sqrt(2)`, density `2 x^{k-1} e^{-x²} / Γ(k/2)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::rng::RngStream;
use crate::special::{ln_gamma, LN_SQRT_2PI};

use std::f64::consts::{LN_2, SQRT_2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Normal { sigma: f64 },
    Chi { k: f64 },
    ChiTilde { k: f64 },
    ChiSquared { k: f64 },
    Gamma { shape: f64, scale: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(param(format!("{name} must be positive and finite, got {v}")))
    }
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Normal { sigma } => positive("sigma", sigma),
            DistSpec::Chi { k } | DistSpec::ChiTilde { k } | DistSpec::ChiSquared { k } => positive("k", k),
            DistSpec::Gamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            DistSpec::Normal { sigma } => sigma * std_normal(rng),
            DistSpec::Chi { k } => chi_unchecked(rng, k),
            DistSpec::ChiTilde { k } => chi_unchecked(rng, k) / SQRT_2,
            DistSpec::ChiSquared { k } => gamma_unchecked(rng, 0.5 * k, 2.0),
            DistSpec::Gamma { shape, scale } => gamma_unchecked(rng, shape, scale),
        })
    }

    /// Lower end of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            DistSpec::Normal { .. } => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }
}

/// Natural log of the density at `x`; `-inf` outside the support.
pub fn log_pdf(dist: &DistSpec, x: f64) -> f64 {
    match *dist {
        DistSpec::Normal { sigma } => -0.5 * (x / sigma).powi(2) - sigma.ln() - LN_SQRT_2PI,
        _ if x <= 0.0 || !x.is_finite() => f64::NEG_INFINITY,
        DistSpec::Chi { k } => (1.0 - 0.5 * k) * LN_2 - ln_gamma(0.5 * k) + (k - 1.0) * x.ln() - 0.5 * x * x,
        DistSpec::ChiTilde { k } => LN_2 - ln_gamma(0.5 * k) + (k - 1.0) * x.ln() - x * x,
        DistSpec::ChiSquared { k } => -0.5 * k * LN_2 - ln_gamma(0.5 * k) + (0.5 * k - 1.0) * x.ln() - 0.5 * x,
        DistSpec::Gamma { shape, scale } => (shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - ln_gamma(shape),
    }
}

#[inline]
pub(crate) fn std_normal(rng: &mut RngStream) -> f64 {
    rng.sample(StandardNormal)
}

/// Marsaglia–Tsang squeeze/rejection; shapes below one are boosted by
/// drawing `shape + 1` and multiplying by `U^{1/shape}`.
pub(crate) fn gamma_unchecked(rng: &mut RngStream, shape: f64, scale: f64) -> f64 {
    if shape < 1.0 {
        let g = gamma_unchecked(rng, shape + 1.0, 1.0);
        let u = rng.uniform_open();
        return scale * g * (u.ln() / shape).exp();
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = std_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return scale * d * v;
        }
    }
}

#[inline]
pub(crate) fn chi_unchecked(rng: &mut RngStream, k: f64) -> f64 {
    gamma_unchecked(rng, 0.5 * k, 2.0).sqrt()
}

pub fn sample_normal(rng: &mut RngStream, sigma: f64) -> Result<f64> {
    DistSpec::Normal { sigma }.sample(rng)
}

pub fn sample_gamma(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    DistSpec::Gamma { shape, scale }.sample(rng)
}

pub fn sample_chi(rng: &mut RngStream, k: f64) -> Result<f64> {
    DistSpec::Chi { k }.sample(rng)
}

pub fn sample_chi_tilde(rng: &mut RngStream, k: f64) -> Result<f64> {
    DistSpec::ChiTilde { k }.sample(rng)
}

pub fn sample_chi_squared(rng: &mut RngStream, k: f64) -> Result<f64> {
    DistSpec::ChiSquared { k }.sample(rng)
}
