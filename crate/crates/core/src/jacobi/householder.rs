use num_complex::Complex64;

use super::JacobiMatrix;
use crate::error::{param, Result};

/// Relative size below which a Householder column counts as exhausted.
const BREAKDOWN: f64 = 1e-12;

/// Dense Hermitian matrix over the reals (`beta = 1`) or complexes (`beta = 2`).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHermitian {
    n: usize,
    beta: u8,
    data: Vec<Complex64>,
}

impl DenseHermitian {
    /// Row-major entries; symmetry is checked to 1e-12 relative and then enforced.
    pub fn new(n: usize, beta: u8, data: Vec<Complex64>) -> Result<Self> {
        if beta != 1 && beta != 2 {
            return Err(param(format!("dense field must be beta 1 or 2, got {beta}")));
        }
        if n == 0 || data.len() != n * n {
            return Err(param("dense matrix must be n x n with n >= 1"));
        }
        let scale = data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut data = data;
        for r in 0..n {
            for c in r..n {
                let (u, l) = (data[r * n + c], data[c * n + r]);
                if (u - l.conj()).norm() > 1e-12 * scale.max(1.0) || (beta == 1 && u.im != 0.0) {
                    return Err(param(format!("entry ({r},{c}) breaks the symmetry")));
                }
                let avg = (u + l.conj()) * 0.5;
                let avg = if r == c { Complex64::new(avg.re, 0.0) } else { avg };
                data[r * n + c] = avg;
                data[c * n + r] = avg.conj();
            }
        }
        Ok(Self { n, beta, data })
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(n, 1, data.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> u8 {
        self.beta
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `U H U*` for a unitary `U` given row-major.
    pub fn conjugated(&self, u: &[Complex64]) -> Self {
        let n = self.n;
        let uh = matmul(n, u, &self.data);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                out[r * n + c] = (0..n).map(|k| uh[r * n + k] * u[c * n + k].conj()).sum();
            }
        }
        let mut h = Self { n, beta: self.beta, data: out };
        h.symmetrize();
        h
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for r in 0..n {
            self.data[r * n + r].im = 0.0;
            for c in r + 1..n {
                let avg = (self.data[r * n + c] + self.data[c * n + r].conj()) * 0.5;
                self.data[r * n + c] = avg;
                self.data[c * n + r] = avg.conj();
            }
        }
    }
}

/// A Jacobi matrix together with the unitary `S` (row-major) such that
/// `J = S H S*` and `S e_1 = e_1`.
#[derive(Clone, Debug)]
pub struct Tridiagonalization {
    pub jacobi: JacobiMatrix,
    pub unitary: Vec<Complex64>,
}

/// Householder reduction of a Hermitian matrix to Jacobi form, fixing `e_1`.
///
/// When a column below the diagonal is numerically exhausted the coupling is
/// set to exactly zero and the reduction continues with the next column. A
/// trailing block whose norm is numerically zero is returned as exact zeros.
pub fn tridiagonalize(h: &DenseHermitian) -> Tridiagonalization {
    let n = h.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut a = h.data.clone();
    let mut s = identity(n);
    let tol = BREAKDOWN * h.frobenius().max(f64::MIN_POSITIVE);
    let mut broken = vec![false; n.saturating_sub(1)];

    for k in 0..n.saturating_sub(1) {
        let x: Vec<Complex64> = (k + 1..n).map(|r| a[r * n + k]).collect();
        let sigma = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if sigma <= tol {
            for r in k + 1..n {
                a[r * n + k] = zero;
                a[k * n + r] = zero;
            }
            broken[k] = true;
            continue;
        }
        if x[1..].iter().all(|v| *v == zero) {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * sigma;
        let mut v = x;
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        reflect_rows(&mut a, n, k + 1, &v, vv);
        reflect_cols(&mut a, n, k + 1, &v, vv);
        reflect_rows(&mut s, n, k + 1, &v, vv);
        for r in k + 2..n {
            a[r * n + k] = zero;
            a[k * n + r] = zero;
        }
    }

    let mut d = vec![Complex64::new(1.0, 0.0); n];
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let c = a[(k + 1) * n + k];
        let mag = c.norm();
        d[k + 1] = if mag > 0.0 { d[k] * c.conj() / mag } else { Complex64::new(1.0, 0.0) };
        offdiag.push(if broken[k] { 0.0 } else { mag });
    }
    let mut diag: Vec<f64> = (0..n).map(|k| a[k * n + k].re).collect();

    // zero out numerically null blocks that follow a breakdown
    let mut start = 0;
    for end in 0..n {
        if end + 1 == n || broken[end] {
            if start > 0 {
                let block: f64 =
                    diag[start..=end].iter().map(|b| b * b).sum::<f64>() + 2.0 * offdiag[start..end].iter().map(|b| b * b).sum::<f64>();
                if block.sqrt() <= tol {
                    diag[start..=end].iter_mut().for_each(|b| *b = 0.0);
                    offdiag[start..end].iter_mut().for_each(|b| *b = 0.0);
                }
            }
            start = end + 1;
        }
    }

    for r in 0..n {
        for c in 0..n {
            s[r * n + c] *= d[r];
        }
    }
    let jacobi = JacobiMatrix::new(diag, offdiag).expect("finite Householder output");
    Tridiagonalization { jacobi, unitary: s }
}

/// `M ← (I - 2vv*/v*v) M` restricted to rows `off..`.
fn reflect_rows(m: &mut [Complex64], n: usize, off: usize, v: &[Complex64], vv: f64) {
    for c in 0..n {
        let t: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * m[(off + i) * n + c]).sum();
        let f = t * (2.0 / vv);
        for (i, vi) in v.iter().enumerate() {
            m[(off + i) * n + c] -= vi * f;
        }
    }
}

/// `M ← M (I - 2vv*/v*v)` restricted to columns `off..`.
fn reflect_cols(m: &mut [Complex64], n: usize, off: usize, v: &[Complex64], vv: f64) {
    for r in 0..n {
        let t: Complex64 = v.iter().enumerate().map(|(i, vi)| m[r * n + off + i] * vi).sum();
        let f = t * (2.0 / vv);
        for (i, vi) in v.iter().enumerate() {
            m[r * n + off + i] -= f * vi.conj();
        }
    }
}

pub(crate) fn identity(n: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub(crate) fn matmul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for k in 0..n {
            let x = a[r * n + k];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in 0..n {
                out[r * n + c] += x * b[k * n + c];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;

    fn random_hermitian(rng: &mut RngStream, n: usize, beta: u8) -> DenseHermitian {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in r..n {
                let re = rng.random_range(-1.0..1.0);
                let im = if beta == 2 && r != c { rng.random_range(-1.0..1.0) } else { 0.0 };
                data[r * n + c] = Complex64::new(re, im);
                data[c * n + r] = Complex64::new(re, -im);
            }
        }
        DenseHermitian::new(n, beta, data).unwrap()
    }

    fn check_similarity(h: &DenseHermitian, t: &Tridiagonalization, tol: f64) {
        let n = h.n();
        let back = h.conjugated(&t.unitary);
        let dense = t.jacobi.to_dense();
        for k in 0..n * n {
            assert!((back.data()[k] - Complex64::new(dense[k], 0.0)).norm() < tol, "entry {k}");
        }
        assert!((t.unitary[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for r in 1..n {
            assert_eq!(t.unitary[r * n], Complex64::new(0.0, 0.0));
            assert_eq!(t.unitary[r], Complex64::new(0.0, 0.0));
        }
        let uu =
            matmul(n, &t.unitary, &t.unitary.iter().enumerate().map(|(k, _)| t.unitary[(k % n) * n + k / n].conj()).collect::<Vec<_>>());
        for k in 0..n * n {
            let want = if k / n == k % n { 1.0 } else { 0.0 };
            assert!((uu[k] - Complex64::new(want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn real_and_complex_reductions() {
        let mut rng = RngStream::new(21);
        for beta in [1u8, 2] {
            for n in [1, 2, 5, 9] {
                let h = random_hermitian(&mut rng, n, beta);
                let t = tridiagonalize(&h);
                assert!(t.jacobi.offdiag().iter().all(|&a| a >= 0.0));
                check_similarity(&h, &t, 1e-13);
            }
        }
    }

    #[test]
    fn tridiagonal_input_is_unchanged() {
        let j = JacobiMatrix::new(vec![1.0, -2.0, 0.5], vec![0.7, 1.3]).unwrap();
        let h = DenseHermitian::from_real(3, &j.to_dense()).unwrap();
        let t = tridiagonalize(&h);
        for (a, b) in j.diag().iter().chain(j.offdiag()).zip(t.jacobi.diag().iter().chain(t.jacobi.offdiag())) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rank_deficient_gives_exact_zeros() {
        // H = v vᵀ + u uᵀ has rank two; e_1 is not orthogonal to either
        let n = 5;
        let v = [1.0, 0.5, -0.3, 0.8, 0.1];
        let u = [0.2, -1.0, 0.4, 0.0, 0.9];
        let data: Vec<f64> = (0..n * n).map(|k| v[k / n] * v[k % n] + u[k / n] * u[k % n]).collect();
        let h = DenseHermitian::from_real(n, &data).unwrap();
        let t = tridiagonalize(&h);
        assert_eq!(t.jacobi.offdiag()[2], 0.0);
        assert_eq!(t.jacobi.offdiag()[3], 0.0);
        assert_eq!(t.jacobi.diag()[3], 0.0);
        assert_eq!(t.jacobi.diag()[4], 0.0);
        check_similarity(&h, &t, 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let data = vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(DenseHermitian::new(2, 1, data).is_err());
        assert!(DenseHermitian::new(1, 4, vec![Complex64::new(1.0, 0.0)]).is_err());
    }
}
