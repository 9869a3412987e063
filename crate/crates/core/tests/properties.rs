use num_complex::Complex64;
use proptest::prelude::*;
use rankone::jacobi::{reconstruct_jacobi, spectral_measure, JacobiMatrix, SpectralMeasure};
use rankone::perturb::{config_gaussian, forward_map, inverse_map};
use rankone::poly::matched_distance;

/// Well separated atoms in `[-3, 3]` with weights bounded below.
fn measure() -> impl Strategy<Value = SpectralMeasure> {
    (1usize..7).prop_flat_map(|n| {
        (prop::collection::vec(0.2f64..1.0, n), prop::collection::vec(0.05f64..1.0, n)).prop_map(|(gaps, w)| {
            let total: f64 = w.iter().sum();
            let mut x = -3.0;
            let atoms = gaps
                .iter()
                .zip(&w)
                .map(|(g, wi)| {
                    x += g;
                    (x, wi / total)
                })
                .collect();
            SpectralMeasure::new(atoms).unwrap()
        })
    })
}

fn jacobi() -> impl Strategy<Value = JacobiMatrix> {
    (1usize..8).prop_flat_map(|n| {
        (prop::collection::vec(-2.0f64..2.0, n), prop::collection::vec(0.3f64..2.0, n - 1))
            .prop_map(|(a, b)| JacobiMatrix::new(a, b).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn forward_spectrum_is_in_upper_half_plane(mu in measure(), l in 0.01f64..5.0) {
        let z = forward_map(&mu, l).unwrap();
        prop_assert_eq!(z.len(), mu.len());
        prop_assert!(config_gaussian(z.as_slice()));
        let im: f64 = z.as_slice().iter().map(|v| v.im).sum();
        prop_assert!((im - l).abs() < 1e-9 * l.max(1.0));
    }

    #[test]
    fn inverse_undoes_forward(mu in measure(), l in 0.05f64..5.0) {
        let z = forward_map(&mu, l).unwrap();
        let back = inverse_map(z.as_slice()).unwrap();
        prop_assert!((back.l - l).abs() < 1e-8 * l.max(1.0));
        let d = matched_distance(&mu.lambdas().map(|x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
            &back.measure.lambdas().map(|x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        prop_assert!(d < 1e-8, "atoms moved by {}", d);
        for (a, b) in mu.weights().zip(back.measure.weights()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn lanczos_recovers_jacobi(j in jacobi()) {
        let mu = spectral_measure(&j).unwrap();
        let back = reconstruct_jacobi(&mu).unwrap();
        for (a, b) in j.diag().iter().zip(back.diag()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in j.offdiag().iter().zip(back.offdiag()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn moments_match_trace_powers(j in jacobi()) {
        let mu = spectral_measure(&j).unwrap();
        for (k, m) in j.e1_moments(5).into_iter().enumerate() {
            prop_assert!((mu.moment(k as i32) - m).abs() < 1e-9 * m.abs().max(1.0));
        }
    }
}
