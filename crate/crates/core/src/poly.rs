//! Monic complex polynomials and simultaneous root finding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

const MAX_ITERATIONS: usize = 200;

/// Monic polynomial stored by ascending coefficients `κ_0..κ_n`, `κ_n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn from_monic(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            Some(c) if *c == Complex64::new(1.0, 0.0) => {}
            _ => return Err(param("leading coefficient must be exactly one")),
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(param("polynomial coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    /// `Π (z - r_j)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &v) in c.iter().enumerate() {
                next[i + 1] += v;
                next[i] -= v * r;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value, derivative, and the rounding bound `Σ |κ_j| |z|^j`.
    fn eval_with_bound(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let r = z.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            bound = bound * r + c.norm();
        }
        (p, dp, bound)
    }

    /// Coefficients of `(p + p̄)/2`, real when `p̄` is the conjugate-coefficient polynomial.
    pub fn real_part(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect() }
    }

    /// Fujiwara's bound on root moduli.
    fn root_bound(&self) -> f64 {
        let n = self.degree();
        (1..=n)
            .map(|j| {
                let c = self.coeffs[n - j].norm();
                if j == n {
                    (c / 2.0).powf(1.0 / j as f64)
                } else {
                    c.powf(1.0 / j as f64)
                }
            })
            .fold(0.0, f64::max)
            * 2.0
    }
}

/// All roots of a monic polynomial, by Aberth-Ehrlich iteration from a
/// perturbed circle followed by Newton polishing.
///
/// Exactly-zero low-order coefficients are deflated as exact zero roots.
pub fn poly_roots(p: &ComplexPoly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Err(param("constant polynomial has no roots"));
    }
    let zero = Complex64::new(0.0, 0.0);
    let lead_zeros = p.coeffs.iter().take_while(|c| **c == zero).count();
    let mut roots = vec![zero; lead_zeros];
    let q = ComplexPoly { coeffs: p.coeffs[lead_zeros..].to_vec() };
    let m = q.degree();
    if m == 0 {
        return Ok(roots);
    }
    if m == 1 {
        roots.push(-q.coeffs[0]);
        return Ok(roots);
    }

    let center = -q.coeffs[m - 1] / m as f64;
    let radius = q.root_bound().max(f64::MIN_POSITIVE);
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            state = splitmix(state);
            let jitter = (state >> 11) as f64 / (1u64 << 53) as f64;
            let angle = std::f64::consts::TAU * (k as f64 + 0.25 + 0.5 * jitter) / m as f64;
            center + Complex64::from_polar(radius * (0.5 + 0.5 * jitter), angle)
        })
        .collect();
    let mut done = vec![false; m];

    let mut iterations = 0;
    while done.iter().any(|d| !d) {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence { iterations, partial_roots: z });
        }
        iterations += 1;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (v, dv, bound) = q.eval_with_bound(z[i]);
            if v.norm() <= 4.0 * f64::EPSILON * bound {
                done[i] = true;
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..m).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                done[i] = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
    }

    for r in &mut z {
        *r = newton_polish(&q, *r);
    }
    roots.extend(z);
    Ok(roots)
}

fn newton_polish(q: &ComplexPoly, mut z: Complex64) -> Complex64 {
    let (mut v, _, _) = q.eval_with_bound(z);
    for _ in 0..3 {
        let (_, dv, _) = q.eval_with_bound(z);
        if dv == Complex64::new(0.0, 0.0) {
            break;
        }
        let cand = z - v / dv;
        let (cv, _, _) = q.eval_with_bound(cand);
        if cv.norm() < v.norm() {
            z = cand;
            v = cv;
        } else {
            break;
        }
    }
    z
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Greedy nearest matching: for each `a[i]` the index of its partner in `b`.
pub fn match_nearest(a: &[Complex64], b: &[Complex64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
        }
    }
    out
}

/// Largest distance between `a` and `b` after nearest matching.
pub fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    match_nearest(a, b).iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_and_quadratic() {
        let p = ComplexPoly::from_monic(vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(poly_roots(&p).unwrap(), vec![c(1.0, 0.0)]);
        let p = ComplexPoly::from_monic(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = poly_roots(&p).unwrap();
        assert!(matched_distance(&r, &[c(0.0, 1.0), c(0.0, -1.0)]) < 1e-15);
    }

    #[test]
    fn double_root() {
        let p = ComplexPoly::from_roots(&[c(0.0, 1.0), c(0.0, 1.0)]);
        let r = poly_roots(&p).unwrap();
        assert!(r.iter().all(|z| (z - c(0.0, 1.0)).norm() < 1e-7));
    }

    #[test]
    fn exact_zero_roots_are_deflated() {
        let p = ComplexPoly::from_monic(vec![c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = poly_roots(&p).unwrap();
        assert_eq!(&r[..2], &[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((r[2] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_monic() {
        assert!(ComplexPoly::from_monic(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        assert!(ComplexPoly::from_monic(vec![]).is_err());
        assert!(poly_roots(&ComplexPoly::from_monic(vec![c(1.0, 0.0)]).unwrap()).is_err());
    }

    #[test]
    fn recovers_random_roots() {
        let mut s = 1u64;
        for n in 1..=14 {
            let roots: Vec<Complex64> = (0..n)
                .map(|_| {
                    s = splitmix(s);
                    let a = (s >> 11) as f64 / (1u64 << 53) as f64;
                    s = splitmix(s);
                    let b = (s >> 11) as f64 / (1u64 << 53) as f64;
                    c(6.0 * a - 3.0, 2.0 * b)
                })
                .collect();
            let found = poly_roots(&ComplexPoly::from_roots(&roots)).unwrap();
            assert!(matched_distance(&found, &roots) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn wilkinson_like_clusters() {
        let roots: Vec<Complex64> = (1..=10).map(|k| c(k as f64, 0.01 * k as f64)).collect();
        let found = poly_roots(&ComplexPoly::from_roots(&roots)).unwrap();
        assert!(matched_distance(&found, &roots) < 1e-6);
    }
}
