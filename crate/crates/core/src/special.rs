//! Special functions used by the densities.

/// Natural logarithm of `|Γ(x)|`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log(2π) / 2`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_arguments_are_log_factorials() {
        let mut fact = 1.0_f64;
        for k in 1..20 {
            fact *= k as f64;
            let got = ln_gamma(k as f64 + 1.0);
            assert!((got - fact.ln()).abs() <= 4.0 * f64::EPSILON * fact.ln().abs().max(1.0));
        }
    }

    #[test]
    fn half_integer_and_small_arguments() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5) - sqrt_pi.ln()).abs() < 1e-15);
        assert!((ln_gamma(1.5) - (0.5 * sqrt_pi).ln()).abs() < 1e-15);
        // Γ(x) ~ 1/x - γ as x -> 0
        let x = 1e-3_f64;
        let approx = (1.0 / x - 0.577_215_664_901_532_9 + 0.989_055_995_327_972_6 * x).ln();
        assert!((ln_gamma(x) - approx).abs() < 1e-8);
        // Stirling at the top of the range
        let x = 1000.0_f64;
        let stirling = (x - 0.5) * x.ln() - x + LN_SQRT_2PI + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3));
        assert!((ln_gamma(x) - stirling).abs() / stirling < 1e-15);
    }
}
