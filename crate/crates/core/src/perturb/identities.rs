use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::pair_log_sum;
use crate::error::{param, Result};
use crate::jacobi::{Bidiagonal, SpectralMeasure};

/// Relative residual of each identity, keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IdentityReport(BTreeMap<String, f64>);

impl IdentityReport {
    fn insert(&mut self, name: &str, residual: f64) {
        self.0.insert(name.to_string(), residual);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn max(&self) -> f64 {
        self.0.values().fold(0.0, |a, &b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn rel(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Relative error of `exp(a)` against `exp(b)`.
fn log_rel(a: f64, b: f64) -> f64 {
    (a - b).exp_m1().abs()
}

/// Trace identities linking a triple `(μ, l, z)`.
///
/// `el`, `sum`, `lambda_squared` and `prod_w` always; `w0` when `μ` has an
/// atom at zero (to 1e-10 of the largest atom).
pub fn identity_suite(mu: &SpectralMeasure, l: f64, z: &[Complex64]) -> IdentityReport {
    let lam: Vec<f64> = mu.lambdas().collect();
    let w: Vec<f64> = mu.weights().collect();
    let n = lam.len();
    let mut report = IdentityReport::default();

    let im_sum: f64 = z.iter().map(|v| v.im).sum();
    report.insert("el", rel(l, im_sum, l));

    let lam_sum: f64 = lam.iter().sum();
    let re_sum: f64 = z.iter().map(|v| v.re).sum();
    let abs_scale = lam.iter().map(|x| x.abs()).sum::<f64>().max(l);
    report.insert("sum", rel(lam_sum, re_sum, abs_scale));

    let lam_sq: f64 = lam.iter().map(|x| x * x).sum();
    let mut cross = 0.0;
    for j in 0..z.len() {
        for k in j + 1..z.len() {
            cross += z[j].im * z[k].im;
        }
    }
    let rhs = z.iter().map(|v| v.re * v.re).sum::<f64>() + 2.0 * cross;
    report.insert("lambda_squared", rel(lam_sq, rhs, lam_sq.max(l * l)));

    let lhs: f64 = w.iter().map(|x| x.ln()).sum();
    let mut all_pairs = 0.0;
    for zj in z {
        for zk in z {
            all_pairs += (zj.conj() - zk).norm().ln();
        }
    }
    let rhs = -(n as f64) * (2.0 * l).ln() + all_pairs - 2.0 * pair_log_sum(&lam);
    report.insert("prod_w", log_rel(lhs, rhs));

    let zi = mu.zero_atom();
    let top = lam.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if n > 1 && lam[zi].abs() <= 1e-10 * top {
        let lhs = w[zi].ln();
        let rhs = z.iter().map(|v| v.norm().ln()).sum::<f64>()
            - l.ln()
            - lam.iter().enumerate().filter(|&(i, _)| i != zi).map(|(_, x)| x.abs().ln()).sum::<f64>();
        report.insert("w0", log_rel(lhs, rhs));
    }
    report
}

/// Product identities for a singular Laguerre draw, in terms of the
/// bidiagonal entries `x_j, y_j` and the measure of its `(m+1)`-block:
///
/// `product_i`: `Π_{j≤m} (x_j y_j)^{m-j+1} = Π_{j=0}^m w_j^{1/2} Π|λ_j - λ_k| Π λ_j`
///
/// `product_ii`: `Π y_j² = w_0 Π λ_j`
pub fn laguerre_product_identities(b: &Bidiagonal, mu: &SpectralMeasure) -> Result<IdentityReport> {
    let m = b.main().iter().position(|&x| x == 0.0).ok_or_else(|| param("bidiagonal factor has no structural zero"))?;
    if mu.len() != m + 1 {
        return Err(param(format!("measure has {} atoms, expected {}", mu.len(), m + 1)));
    }
    let zi = mu.zero_atom();
    let lam: Vec<f64> = mu.lambdas().enumerate().filter(|&(i, _)| i != zi).map(|(_, x)| x).collect();
    let log_lam: f64 = lam.iter().map(|x| x.ln()).sum();
    let w0 = mu.atoms()[zi].1;

    let lhs: f64 = (0..m).map(|j| (m - j) as f64 * (b.main()[j].ln() + b.upper()[j].ln())).sum();
    let rhs = 0.5 * mu.weights().map(f64::ln).sum::<f64>() + pair_log_sum(&lam) + log_lam;
    let mut report = IdentityReport::default();
    report.insert("product_i", log_rel(lhs, rhs));

    let lhs: f64 = 2.0 * b.upper()[..m].iter().map(|y| y.ln()).sum::<f64>();
    report.insert("product_ii", log_rel(lhs, w0.ln() + log_lam));
    Ok(report)
}
