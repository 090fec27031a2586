//! Classical post-hoc corrections: shrinkage of R² and the univariate
//! restriction-of-range correction with explicit selection on the predictor.

use crate::error::{Error, Result};

/// Wherry shrinkage adjustment: 1 - (1 - R²)(n - 1)/(n - k - 1).
///
/// The adjusted value can be negative for weak fits in small samples, which
/// is the well-known pathology of applying the correction near R² = 0.
pub fn shrinkage_adjust(r_squared: f64, n: usize, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&r_squared) {
        return Err(Error::OutOfRange {
            what: "r_squared",
            value: r_squared,
        });
    }
    if k == 0 {
        return Err(Error::OutOfRange {
            what: "predictor count",
            value: 0.0,
        });
    }
    if n <= k + 1 {
        return Err(Error::DegreesOfFreedomExhausted { n, k });
    }
    Ok(1.0 - (1.0 - r_squared) * (n - 1) as f64 / (n - k - 1) as f64)
}

/// Univariate range-restriction correction with selection on the predictor:
/// rᶜ = r·u / sqrt(1 - r² + r²u²), where `sd_ratio` u is the unrestricted-to-
/// restricted standard-deviation ratio.
pub fn range_restriction_correct(r: f64, sd_ratio: f64) -> Result<f64> {
    if !r.is_finite() || r <= -1.0 || r >= 1.0 {
        return Err(Error::OutOfRange { what: "r", value: r });
    }
    if sd_ratio <= 0.0 || !sd_ratio.is_finite() {
        return Err(Error::InvalidRatio { ratio: sd_ratio });
    }
    Ok(r * sd_ratio / (1.0 - r * r + r * r * sd_ratio * sd_ratio).sqrt())
}
