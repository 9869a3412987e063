//! Statistical and numerical verification suites.
//!
//! Every suite takes a base [`RngStream`] and draws sample `i` from its
//! substream `i`, so results do not depend on thread scheduling.

mod dense;
mod ks;
mod quad;
mod sweeps;

pub use dense::{complex_det, cross_validate_dense, probe_points, ProbePoint};
pub use ks::{kolmogorov_q, ks_one_sample_stat, ks_two_sample_stat};
pub use quad::{integrate, law_cdf};
pub use sweeps::{
    change_of_variables_sweep, chi_half_display, chi_half_display_check, configuration_sweep, gaussian_coupling_display,
    gaussian_coupling_display_check, identity_sweep, jacobian_check, normalization_independent, normalization_mc, roundtrip_sweep,
    sampler_law_check, JacobianCase,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub name: String,
    pub samples: usize,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub seed: u64,
    pub stream: u64,
}

impl TestReport {
    /// Passes when `p >= threshold`.
    pub fn from_p_value(name: impl Into<String>, samples: usize, statistic: f64, p: f64, threshold: f64, rng: &RngStream) -> Self {
        Self {
            name: name.into(),
            samples,
            statistic,
            p_value: Some(p),
            max_residual: None,
            threshold,
            pass: p >= threshold,
            seed: rng.seed(),
            stream: rng.stream_id(),
        }
    }

    /// Passes when `residual < threshold`; NaN fails.
    pub fn from_residual(name: impl Into<String>, samples: usize, statistic: f64, residual: f64, threshold: f64, rng: &RngStream) -> Self {
        Self {
            name: name.into(),
            samples,
            statistic,
            p_value: None,
            max_residual: Some(residual),
            threshold,
            pass: residual < threshold,
            seed: rng.seed(),
            stream: rng.stream_id(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// KS two-sample report; see [`ks_two_sample_stat`].
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestReport> {
    let (d, p) = ks_two_sample_stat(a, b)?;
    Ok(TestReport::from_p_value("ks_two_sample", a.len().min(b.len()), d, p, 1e-3, &RngStream::new(0)))
}

/// Evaluates `f` on substreams `0..count` of `rng` in parallel, in index order.
pub(crate) fn par_draws<T: Send>(rng: &RngStream, count: usize, f: impl Fn(&mut RngStream) -> T + Sync + Send) -> Vec<T> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            f(&mut r)
        })
        .collect()
}

/// Largest value, NaN-propagating.
pub(crate) fn max_or_nan(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Caps the rayon pool at `RMT_THREADS` workers when the variable is set.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("RMT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_json_line() {
        let r = TestReport::from_residual("x", 3, 0.5, 0.5, 1.0, &RngStream::new(7));
        assert!(r.pass);
        let line = r.to_json_line();
        assert_eq!(line, r#"{"name":"x","samples":3,"statistic":0.5,"max_residual":0.5,"threshold":1.0,"pass":true,"seed":7,"stream":0}"#);
        let r = TestReport::from_residual("x", 3, f64::NAN, f64::NAN, 1.0, &RngStream::new(7));
        assert!(!r.pass);
    }

    #[test]
    fn parallel_draws_are_ordered_and_stable() {
        use rand::Rng;
        let base = RngStream::new(3);
        let a = par_draws(&base, 100, |r| r.random::<u64>());
        let b: Vec<u64> = (0..100).map(|i| base.substream(i).random::<u64>()).collect();
        assert_eq!(a, b);
    }
}
