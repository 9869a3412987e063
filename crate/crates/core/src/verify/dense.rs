use num_complex::Complex64;
use serde::Serialize;

use super::{ks_two_sample_stat, max_or_nan, par_draws, TestReport};
use crate::dist::std_normal;
use crate::ensembles::{sample_coupling, sample_dense, sample_gbeta, sample_lbeta, CouplingLaw, EnsembleSpec};
use crate::error::{Error, Result};
use crate::jacobi::{char_poly_coeffs, tridiagonalize, JacobiMatrix};
use crate::rng::RngStream;

const SIGNIFICANCE: f64 = 1e-3;
const PROBE_TOL: f64 = 1e-8;

/// Abscissa at which two characteristic polynomials are compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbePoint(pub Complex64);

/// `count` points on a circle, offset by a quarter step so none lies on the real axis.
pub fn probe_points(center: Complex64, radius: f64, count: usize) -> Vec<ProbePoint> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * (k as f64 + 0.25) / count as f64;
            ProbePoint(center + Complex64::from_polar(radius, t))
        })
        .collect()
}

/// Determinant of a row-major complex matrix by LU with partial pivoting.
pub fn complex_det(n: usize, mut m: Vec<Complex64>) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a * n + col].norm().total_cmp(&m[b * n + col].norm())).expect("non-empty column");
        if m[piv * n + col] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..n {
                m.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col + 1..n {
                let t = m[col * n + c];
                m[r * n + c] -= f * t;
            }
        }
    }
    det
}

/// Unitary `U` (row-major) with `U u = e_1` for a unit vector `u`.
fn unitary_to_e1(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let phase = if u[0].norm() > 0.0 { u[0] / u[0].norm() } else { Complex64::new(1.0, 0.0) };
    let alpha = -phase;
    let mut v = u.to_vec();
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            let id = if r == c { 1.0 } else { 0.0 };
            let p = Complex64::new(id, 0.0) - v[r] * v[c].conj() * (2.0 / vv);
            out[r * n + c] = alpha.conj() * p;
        }
    }
    out
}

fn coefficients(j: &JacobiMatrix) -> Vec<f64> {
    j.diag().iter().chain(j.offdiag()).copied().collect()
}

struct DenseDraw {
    dense: Vec<f64>,
    model: Vec<f64>,
    probe_residual: f64,
}

fn one_draw(rng: &mut RngStream, spec: &EnsembleSpec, law: &CouplingLaw) -> Result<DenseDraw> {
    let (beta, n) = (spec.beta(), spec.n());
    let h = sample_dense(rng, spec)?;
    let field = h.beta();
    let model = match *spec {
        EnsembleSpec::Gaussian { .. } => sample_gbeta(rng, beta, n)?,
        EnsembleSpec::Laguerre { m, .. } => sample_lbeta(rng, beta, m, n)?.1,
    };
    let tri = tridiagonalize(&h);

    // rank-one coupling Γ = l u u*
    let (u, l) = match *law {
        CouplingLaw::GammaType { sigma } => {
            let row: Vec<Complex64> = (0..n)
                .map(|_| {
                    let re = sigma * std_normal(rng);
                    let im = if field == 2 { sigma * std_normal(rng) } else { 0.0 };
                    Complex64::new(re, im)
                })
                .collect();
            let l: f64 = row.iter().map(|c| c.norm_sqr()).sum();
            (row.iter().map(|c| c.conj() / l.sqrt()).collect::<Vec<_>>(), l)
        }
        _ => {
            let row: Vec<Complex64> = (0..n)
                .map(|_| {
                    let im = if field == 2 { std_normal(rng) } else { 0.0 };
                    Complex64::new(std_normal(rng), im)
                })
                .collect();
            let norm = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            (row.iter().map(|c| c / norm).collect(), sample_coupling(rng, law, beta, n)?)
        }
    };
    let il = Complex64::new(0.0, l);
    let rotated = h.conjugated(&unitary_to_e1(&u));
    let reduced = tridiagonalize(&rotated);
    let poly = char_poly_coeffs(&reduced.jacobi, il);

    let center = h.data().iter().step_by(n + 1).map(|v| v.re).sum::<f64>() / n as f64;
    let radius = 1.5 * (h.frobenius() + l) + 1.0;
    let mut worst = 0.0f64;
    for ProbePoint(p) in probe_points(Complex64::new(center, 0.0), radius, 2 * n + 1) {
        let m: Vec<Complex64> = (0..n * n)
            .map(|k| {
                let (r, c) = (k / n, k % n);
                let mut v = -h.get(r, c) - il * u[r] * u[c].conj();
                if r == c {
                    v += p;
                }
                v
            })
            .collect();
        let a = complex_det(n, m);
        let b = poly.eval(p);
        worst = worst.max((a - b).norm() / a.norm().max(b.norm()));
    }
    Ok(DenseDraw { dense: coefficients(&tri.jacobi), model: coefficients(&model), probe_residual: worst })
}

/// Dense versus tridiagonal models: one KS report per Jacobi coefficient,
/// at a Bonferroni-corrected level, and one determinant-probe report.
pub fn cross_validate_dense(spec: &EnsembleSpec, law: &CouplingLaw, samples: usize, rng: &RngStream) -> Result<Vec<TestReport>> {
    spec.validate()?;
    let beta = spec.beta();
    if beta != 1.0 && beta != 2.0 {
        return Err(Error::Unsupported(format!("no dense model for beta = {beta}")));
    }
    let draws: Vec<DenseDraw> = par_draws(rng, samples, |r| one_draw(r, spec, law)).into_iter().collect::<Result<_>>()?;
    let n = spec.n();
    let count = 2 * n - 1;
    let level = SIGNIFICANCE / count as f64;
    let mut reports = Vec::with_capacity(count + 1);
    for k in 0..count {
        let name = if k < n { format!("dense_coefficient_b{}", k + 1) } else { format!("dense_coefficient_a{}", k - n + 1) };
        let a: Vec<f64> = draws.iter().map(|d| d.dense[k]).collect();
        let b: Vec<f64> = draws.iter().map(|d| d.model[k]).collect();
        let (stat, p) = if samples == 0 { (0.0, 1.0) } else { ks_two_sample_stat(&a, &b)? };
        reports.push(TestReport::from_p_value(name, samples, stat, p, level, rng));
    }
    let worst = max_or_nan(draws.iter().map(|d| d.probe_residual));
    reports.push(TestReport::from_residual("dense_probe_determinants", samples, worst, worst, PROBE_TOL, rng));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrix() {
        let c = |r: f64, i: f64| Complex64::new(r, i);
        let m = vec![c(2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)];
        assert!((complex_det(2, m) - c(6.0, -1.0)).norm() < 1e-15);
        assert_eq!(complex_det(2, vec![c(0.0, 0.0); 4]), c(0.0, 0.0));
    }

    #[test]
    fn householder_to_e1() {
        let u = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        let q = unitary_to_e1(&u);
        let e = [q[0] * u[0] + q[1] * u[1], q[2] * u[0] + q[3] * u[1]];
        assert!((e[0] - 1.0).norm() < 1e-15 && e[1].norm() < 1e-15);
    }

    #[test]
    fn probes_are_off_axis() {
        let p = probe_points(Complex64::new(0.0, 0.0), 2.0, 5);
        assert!(p.iter().all(|ProbePoint(z)| z.im.abs() > 0.1 && (z.norm() - 2.0).abs() < 1e-15));
    }

    #[test]
    fn small_gue_and_loe_cross_check() {
        let law = CouplingLaw::GammaType { sigma: 1.0 };
        let rng = RngStream::new(5);
        for spec in [EnsembleSpec::gaussian(2.0, 4).unwrap(), EnsembleSpec::laguerre(1.0, 2, 4).unwrap()] {
            let reports = cross_validate_dense(&spec, &law, 300, &rng).unwrap();
            assert!(reports.iter().all(|r| r.pass), "{reports:#?}");
        }
        let unsupported = cross_validate_dense(&EnsembleSpec::gaussian(4.0, 2).unwrap(), &law, 1, &rng);
        assert!(matches!(unsupported, Err(Error::Unsupported(_))));
    }
}
