//! Adaptive Gauss-Kronrod quadrature and numerically integrated CDFs.

use crate::dist::{log_pdf, DistSpec};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `∫_a^b f` to absolute tolerance `tol`, by recursive bisection.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || !err.is_finite() {
            return v;
        }
        let c = 0.5 * (a + b);
        go(f, a, c, 0.5 * tol, depth - 1) + go(f, c, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    go(&f, a, b, tol, 40)
}

/// CDF of `dist` at each point of the ascending slice `xs`, by integrating
/// `exp(log_pdf)` between consecutive points.
///
/// Positive laws are integrated in `s = x^p`, with `p` the small-`x` power of
/// the density, which makes the integrand bounded near zero. Long ranges are
/// split at a grid scaled to the law so no panel misses the bulk.
pub fn law_cdf(dist: &DistSpec, xs: &[f64]) -> Vec<f64> {
    const TOL: f64 = 1e-15;
    let (power, width, lower) = match *dist {
        DistSpec::Normal { sigma } => (None, sigma, -40.0 * sigma),
        DistSpec::Chi { k } => (Some(k), 1.0, 0.0),
        DistSpec::ChiTilde { k } => (Some(k), std::f64::consts::FRAC_1_SQRT_2, 0.0),
        DistSpec::ChiSquared { k } => (Some(k / 2.0), 1.0 + (2.0 * k).sqrt(), 0.0),
        DistSpec::Gamma { shape, scale } => (Some(shape), scale * (1.0 + shape.sqrt()), 0.0),
    };
    let step = 0.05 * width;
    let f = |s: f64| match power {
        None => log_pdf(dist, s).exp(),
        Some(p) if s > 0.0 => {
            let x = s.powf(1.0 / p);
            (log_pdf(dist, x) - p.ln() + (1.0 / p - 1.0) * s.ln()).exp()
        }
        Some(_) => 0.0,
    };
    let to_s = |x: f64| match power {
        None => x,
        Some(p) => x.powf(p),
    };
    let piece = |a: f64, b: f64| -> f64 {
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = ((lo / step).floor() * step + step).min(b);
            let hi = if hi <= lo { (lo + step).min(b) } else { hi };
            total += integrate(f, to_s(lo), to_s(hi), TOL);
            lo = hi;
        }
        total
    };
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut prev = lower;
    for &x in xs {
        let x = x.max(prev);
        acc += piece(prev, x);
        out.push(acc);
        prev = x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-14) - 9.0).abs() < 1e-13);
        assert!((integrate(f64::exp, 0.0, 1.0, 1e-14) - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert_eq!(integrate(f64::exp, 1.0, 1.0, 1e-14), 0.0);
    }

    #[test]
    fn laws_have_unit_mass() {
        for k in [0.5, 1.0, 2.0, 3.7, 10.0] {
            for d in [DistSpec::Chi { k }, DistSpec::ChiTilde { k }, DistSpec::ChiSquared { k }] {
                let top = law_cdf(&d, &[200.0])[0];
                assert!((top - 1.0).abs() < 1e-11, "{d:?}: {top}");
            }
        }
        let n = law_cdf(&DistSpec::Normal { sigma: 2.0 }, &[0.0, 80.0]);
        assert!((n[0] - 0.5).abs() < 1e-13 && (n[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_cdf_closed_form() {
        let xs = [0.1, 0.5, 1.0, 4.0];
        let cdf = law_cdf(&DistSpec::ChiSquared { k: 2.0 }, &xs);
        for (x, c) in xs.iter().zip(cdf) {
            assert!((c - (1.0 - (-x / 2.0).exp())).abs() < 1e-13);
        }
    }
}
