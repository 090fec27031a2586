//! Univariate standard-normal density, tails, and quantile.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Lower tail Φ(x).
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail Q(x) = P(X > x).
pub fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Quantile Φ⁻¹(p) for p in (0, 1).
///
/// Hastings' rational initial guess refined by Newton steps on the upper
/// tail; accurate to machine precision over the usable range.
pub fn quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0 && p.is_finite(), "p must be in (0, 1), got {p}");
    if p == 0.5 {
        return 0.0;
    }
    let tail = p.min(1.0 - p);
    let t = (-2.0 * tail.ln()).sqrt();
    let mut x = t - (2.515517 + t * (0.802853 + t * 0.010328))
        / (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));
    for _ in 0..4 {
        let density = pdf(x);
        if density < 1e-300 {
            break;
        }
        // Q(x) decreases in x, so the Newton step is (Q(x) - tail) / pdf(x).
        let step = (upper_tail(x) - tail) / density;
        x += step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    if p < 0.5 {
        -x
    } else {
        x
    }
}

/// Threshold h with P(X > h) = p, i.e. Q⁻¹(p).
pub fn upper_tail_quantile(p: f64) -> f64 {
    -quantile(p)
}
