use super::{JacobiMatrix, SpectralMeasure};
use crate::error::{Error, Result};

/// Rebuilds the unique Jacobi matrix whose spectral measure is `mu`.
///
/// Lanczos on `diag(λ)` started from `√w`, with full reorthogonalization.
pub fn reconstruct_jacobi(mu: &SpectralMeasure) -> Result<JacobiMatrix> {
    mu.validate()?;
    let n = mu.len();
    let lam: Vec<f64> = mu.lambdas().collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut q: Vec<f64> = mu.weights().map(f64::sqrt).collect();
    let nq = norm(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let scale = lam.iter().fold(0.0f64, |m, l| m.max(l.abs())).max(f64::MIN_POSITIVE);

    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let mut r: Vec<f64> = q.iter().zip(&lam).map(|(v, l)| v * l).collect();
        let b = dot(&q, &r);
        diag.push(b);
        basis.push(q);
        if k + 1 == n {
            break;
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &r);
                r.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let a = norm(&r);
        if a <= 1e-13 * scale {
            return Err(Error::DegenerateMeasure(format!("Krylov space exhausted after {} steps", k + 1)));
        }
        offdiag.push(a);
        q = r.into_iter().map(|x| x / a).collect();
    }
    JacobiMatrix::new(diag, offdiag)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::spectral_measure;
    use crate::rng::RngStream;
    use rand::Rng;

    #[test]
    fn symmetric_two_atoms() {
        let mu = SpectralMeasure::new(vec![(1.0, 0.5), (-1.0, 0.5)]).unwrap();
        let j = reconstruct_jacobi(&mu).unwrap();
        assert!(j.diag().iter().all(|b| b.abs() < 1e-15));
        assert!((j.offdiag()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_atom() {
        let mu = SpectralMeasure::new(vec![(2.5, 1.0)]).unwrap();
        let j = reconstruct_jacobi(&mu).unwrap();
        assert_eq!(j.diag(), &[2.5]);
    }

    #[test]
    fn duplicate_atoms_rejected() {
        let mu = SpectralMeasure::from_atoms_unchecked(vec![(1.0, 0.5), (1.0, 0.5)]);
        assert!(matches!(reconstruct_jacobi(&mu), Err(Error::DegenerateMeasure(_))));
    }

    #[test]
    fn roundtrip_random() {
        let mut rng = RngStream::new(11);
        for n in 1..=12 {
            let diag = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let off = (0..n - 1).map(|_| rng.random_range(0.3..2.0)).collect();
            let j = JacobiMatrix::new(diag, off).unwrap();
            let back = reconstruct_jacobi(&spectral_measure(&j).unwrap()).unwrap();
            for (a, b) in j.diag().iter().chain(j.offdiag()).zip(back.diag().iter().chain(back.offdiag())) {
                assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
            }
        }
    }
}
