//! Kolmogorov-Smirnov statistics with asymptotic p-values.

use crate::error::{Error, Result};

/// Kolmogorov survival function `Q(λ) = P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let t = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * t).exp()).sum();
        (1.0 - (std::f64::consts::TAU).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    let root = n_eff.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

/// Two-sample statistic `D` and its asymptotic p-value.
pub fn ks_two_sample_stat(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    Ok((d, p_value(d, n_eff)))
}

/// One-sample statistic for ascending `xs` with CDF values `cdf`.
pub fn ks_one_sample_stat(cdf: &[f64]) -> Result<(f64, f64)> {
    if cdf.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    let n = cdf.len() as f64;
    let d = cdf.iter().enumerate().map(|(i, &f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n)).fold(0.0, f64::max);
    Ok((d, p_value(d, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::sample_normal;
    use crate::rng::RngStream;

    #[test]
    fn q_limits() {
        assert_eq!(kolmogorov_q(0.0), 1.0);
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.9495) - 0.001).abs() < 1e-5);
        // both series agree where they meet
        let (lo, hi) = (kolmogorov_q(1.1799999), kolmogorov_q(1.18));
        assert!((lo - hi).abs() < 1e-6);
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(ks_two_sample_stat(&a, &a).unwrap(), (0.0, 1.0));
        assert!(ks_two_sample_stat(&[], &a).is_err());
    }

    #[test]
    fn separated_normals() {
        let mut rng = RngStream::new(1);
        let a: Vec<f64> = (0..10_000).map(|_| sample_normal(&mut rng, 1.0).unwrap()).collect();
        let b: Vec<f64> = (0..10_000).map(|_| 3.0 + sample_normal(&mut rng, 1.0).unwrap()).collect();
        assert!(ks_two_sample_stat(&a, &b).unwrap().1 < 1e-10);
    }

    #[test]
    fn calibration_under_null() {
        let base = RngStream::new(2);
        let mut rejections = 0;
        for rep in 0..200 {
            let mut rng = base.substream(rep);
            let a: Vec<f64> = (0..10_000).map(|_| sample_normal(&mut rng, 1.0).unwrap()).collect();
            let b: Vec<f64> = (0..10_000).map(|_| sample_normal(&mut rng, 1.0).unwrap()).collect();
            if ks_two_sample_stat(&a, &b).unwrap().1 < 1e-3 {
                rejections += 1;
            }
        }
        assert!(rejections <= 1, "{rejections} rejections");
    }
}
