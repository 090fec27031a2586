//! Classification-rate appraisal of a test: fourfold tables induced by a
//! latent bivariate-normal test/criterion model, proportion correct, gain
//! over random admission, and hit rate.

use crate::error::{Error, Result};
use crate::matrix::{gram_factor, CorrelationMatrix};
use crate::normal::{cdf, upper_tail, upper_tail_quantile};
use crate::sampler::SeedSpec;

use rand::Rng;
use rand_distr::StandardNormal;

// Gauss-Legendre points and weights as (weight, node) pairs; the node set is
// symmetric, so each entry is evaluated at 1 ± node on the half interval.
#[allow(clippy::excessive_precision)]
const GL_6: [(f64, f64); 3] = [
    (0.1713244923791705, -0.9324695142031522),
    (0.3607615730481384, -0.6612093864662647),
    (0.4679139345726904, -0.2386191860831970),
];
#[allow(clippy::excessive_precision)]
const GL_12: [(f64, f64); 6] = [
    (0.04717533638651177, -0.9815606342467191),
    (0.1069393259953183, -0.9041172563704750),
    (0.1600783285433464, -0.7699026741943050),
    (0.2031674267230659, -0.5873179542866171),
    (0.2334925365383547, -0.3678314989981802),
    (0.2491470458134029, -0.1252334085114692),
];
#[allow(clippy::excessive_precision)]
const GL_20: [(f64, f64); 10] = [
    (0.01761400713915212, -0.9931285991850949),
    (0.04060142980038694, -0.9639719272779138),
    (0.06267204833410906, -0.9122344282513259),
    (0.08327674157670475, -0.8391169718222188),
    (0.1019301198172404, -0.7463319064601508),
    (0.1181945319615184, -0.6360536807265150),
    (0.1316886384491766, -0.5108670019508271),
    (0.1420961093183821, -0.3737060887154196),
    (0.1491729864726037, -0.2277858511416451),
    (0.1527533871307259, -0.07652652113349733),
];

fn quadrature(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL_6
    } else if rho_abs < 0.75 {
        &GL_12
    } else {
        &GL_20
    }
}

/// Upper-orthant probability P(X > h, Y > k) for a standard bivariate normal
/// with correlation `rho`.
///
/// Fixed-order Gauss-Legendre quadrature of the correlation-integral
/// representation (Drezner-Wesolowsky, with the Genz treatment of |rho| near
/// one); absolute accuracy is far inside 1e-7 over the whole parameter range.
pub fn binorm_upper(h: f64, k: f64, rho: f64) -> f64 {
    assert!(h.is_finite() && k.is_finite(), "thresholds must be finite");
    assert!((-1.0..=1.0).contains(&rho), "correlation {rho} outside [-1, 1]");

    // Canonical argument order makes the (h, k) symmetry exact.
    let (h, k) = if h <= k { (h, k) } else { (k, h) };

    if rho == 0.0 {
        return upper_tail(h) * upper_tail(k);
    }
    if rho == 1.0 {
        return upper_tail(h.max(k));
    }
    if rho == -1.0 {
        return (upper_tail(h) - upper_tail(-k)).max(0.0);
    }
    let value = if rho.abs() <= 0.925 {
        orthant_moderate(h, k, rho)
    } else if rho > 0.925 {
        orthant_extreme_positive(h, k, rho)
    } else {
        // P(X > h, Y > k; rho) = P(X > h) - P(X > h, -Y > -k; -rho).
        upper_tail(h) - binorm_upper(h, -k, -rho)
    };
    value.clamp(0.0, 1.0)
}

// sin-substituted correlation integral, exact cancellation-free form for
// moderate correlations.
fn orthant_moderate(h: f64, k: f64, rho: f64) -> f64 {
    let hk = h * k;
    let hs = (h * h + k * k) / 2.0;
    let asr = 0.5 * libm::asin(rho);
    let mut acc = 0.0;
    for &(w, x) in quadrature(rho.abs()) {
        for sign in [-1.0, 1.0] {
            let sn = libm::sin(asr * (sign * x + 1.0));
            acc += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
    }
    acc * asr / (2.0 * std::f64::consts::PI) + upper_tail(h) * upper_tail(k)
}

// Expansion about rho = 1 plus a quadrature remainder over sqrt(1 - r²).
fn orthant_extreme_positive(h: f64, k: f64, rho: f64) -> f64 {
    let hk = h * k;
    let a_sq = (1.0 - rho) * (1.0 + rho);
    let mut a = a_sq.sqrt();
    let b_sq = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    let exponent = -0.5 * (b_sq / a_sq + hk);

    let mut acc = 0.0;
    if exponent > -100.0 {
        acc = a
            * exponent.exp()
            * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0 + c * d * a_sq * a_sq / 5.0);
    }
    if -hk < 100.0 {
        let b = b_sq.sqrt();
        acc -= (-0.5 * hk).exp()
            * (2.0 * std::f64::consts::PI).sqrt()
            * cdf(-b / a)
            * b
            * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
    }
    a /= 2.0;
    for &(w, x) in &GL_20 {
        for sign in [-1.0, 1.0] {
            let xi = a * (sign * x + 1.0);
            let xi_sq = xi * xi;
            let r_s = (1.0 - xi_sq).sqrt();
            let expo = -0.5 * (b_sq / xi_sq + hk);
            if expo > -100.0 {
                acc += a
                    * w
                    * expo.exp()
                    * ((-hk * (1.0 - r_s) / (2.0 * (1.0 + r_s))).exp() / r_s
                        - (1.0 + c * xi_sq * (1.0 + d * xi_sq)));
            }
        }
    }
    -acc / (2.0 * std::f64::consts::PI) + cdf(-h.max(k))
}

/// Joint proportions of decision × outcome, each cell in [0, 1], summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourfoldTable {
    /// Passes the test and would succeed on the criterion.
    pub tp: f64,
    /// Passes the test but would fail the criterion.
    pub fp: f64,
    /// Fails the test but would succeed on the criterion.
    pub fn_: f64,
    /// Fails the test and would fail the criterion.
    pub tn: f64,
}

impl FourfoldTable {
    pub fn new(tp: f64, fp: f64, fn_: f64, tn: f64) -> Result<Self> {
        for (name, v) in [("tp", tp), ("fp", fp), ("fn", fn_), ("tn", tn)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTable {
                    reason: format!("cell {name} = {v} must be a proportion"),
                });
            }
        }
        let total = tp + fp + fn_ + tn;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidTable {
                reason: format!("cells sum to {total}, expected 1"),
            });
        }
        Ok(Self { tp, fp, fn_, tn })
    }

    /// Proportion of applicants passing the cut-off.
    pub fn quota(&self) -> f64 {
        self.tp + self.fp
    }

    /// Proportion of applicants who would succeed if admitted.
    pub fn positive_base_rate(&self) -> f64 {
        self.tp + self.fn_
    }

    pub fn negative_base_rate(&self) -> f64 {
        self.fp + self.tn
    }
}

/// Proportion correct, gain over random admission, and hit rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityReport {
    /// Total proportion of correct classifications, tp + tn.
    pub prc: f64,
    /// prc - max(b⁺, b⁻); negative when the test loses to random admission.
    pub gain: f64,
    /// tp / b⁺: probability that a qualified candidate passes.
    pub hit_rate: f64,
}

/// Fourfold table induced by dichotomizing a standard bivariate normal with
/// the given latent (tetrachoric) correlation at thresholds chosen to hit the
/// requested quota and positive base rate.
pub fn fourfold_from(validity: f64, base_rate: f64, quota: f64) -> Result<FourfoldTable> {
    if !(-1.0..=1.0).contains(&validity) || !validity.is_finite() {
        return Err(Error::OutOfRange {
            what: "validity",
            value: validity,
        });
    }
    for (name, v) in [("base rate", base_rate), ("quota", quota)] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::DegenerateRate { what: name, value: v });
        }
    }
    let h = upper_tail_quantile(quota);
    let k = upper_tail_quantile(base_rate);
    let tp = binorm_upper(h, k, validity);
    let clamp = |v: f64| if v < 0.0 && v > -1e-9 { 0.0 } else { v };
    FourfoldTable::new(
        tp,
        clamp(quota - tp),
        clamp(base_rate - tp),
        clamp(1.0 - quota - base_rate + tp),
    )
}

/// Classification-rate summary of a fourfold table.
pub fn utility(t: &FourfoldTable) -> Result<UtilityReport> {
    let b_pos = t.positive_base_rate();
    let b_neg = t.negative_base_rate();
    if b_pos <= 0.0 {
        return Err(Error::ZeroBaseRate);
    }
    let prc = t.tp + t.tn;
    Ok(UtilityReport {
        prc,
        gain: prc - b_pos.max(b_neg),
        hit_rate: t.tp / b_pos,
    })
}

/// One cell of a classification-rate grid, with the print-style rounding to
/// whole percentage points alongside the exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub validity: f64,
    pub base_rate: f64,
    pub quota: f64,
    pub table: FourfoldTable,
    pub report: UtilityReport,
    pub percent_correct: i32,
    pub gain_loss: i32,
    pub hit_rate_pct: i32,
}

/// Grid of classification-rate summaries over validities × base rates ×
/// quotas. Cells are ordered base-rate-major, then quota, then validity.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationGrid {
    pub validities: Vec<f64>,
    pub base_rates: Vec<f64>,
    pub quotas: Vec<f64>,
    pub cells: Vec<GridCell>,
}

impl ClassificationGrid {
    pub fn cell(&self, validity_idx: usize, base_rate_idx: usize, quota_idx: usize) -> &GridCell {
        let per_row = self.validities.len();
        let row = base_rate_idx * self.quotas.len() + quota_idx;
        &self.cells[row * per_row + validity_idx]
    }
}

/// Percent correct, gain/loss, and hit rate over a parameter grid, rounded to
/// integer percentage points only at this emission layer.
pub fn utility_grid(validities: &[f64], base_rates: &[f64], quotas: &[f64]) -> Result<ClassificationGrid> {
    if validities.is_empty() {
        return Err(Error::EmptyInput { what: "validities" });
    }
    if base_rates.is_empty() {
        return Err(Error::EmptyInput { what: "base rates" });
    }
    if quotas.is_empty() {
        return Err(Error::EmptyInput { what: "quotas" });
    }
    let mut cells = Vec::with_capacity(validities.len() * base_rates.len() * quotas.len());
    for &b in base_rates {
        for &q in quotas {
            for &v in validities {
                let table = fourfold_from(v, b, q)?;
                let report = utility(&table)?;
                cells.push(GridCell {
                    validity: v,
                    base_rate: b,
                    quota: q,
                    table,
                    report,
                    percent_correct: (100.0 * report.prc).round() as i32,
                    gain_loss: (100.0 * report.gain).round() as i32,
                    hit_rate_pct: (100.0 * report.hit_rate).round() as i32,
                });
            }
        }
    }
    Ok(ClassificationGrid {
        validities: validities.to_vec(),
        base_rates: base_rates.to_vec(),
        quotas: quotas.to_vec(),
        cells,
    })
}

/// Monte Carlo estimate of an orthant probability with its binomial standard
/// error. Independent check on [`binorm_upper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthantEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Fraction of draws from N(0, [[1, rho], [rho, 1]]) landing in the upper
/// orthant. Uses the same gram transform and stream order as the sampler, so
/// the count equals what a materialized sample would give, without holding
/// ten million rows in memory.
pub fn mc_orthant_oracle(
    h: f64,
    k: f64,
    rho: f64,
    draws: usize,
    seed: SeedSpec,
) -> Result<OrthantEstimate> {
    if draws == 0 {
        return Err(Error::EmptyInput { what: "draws" });
    }
    let sigma = CorrelationMatrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]])?;
    let a = gram_factor(&sigma)?;
    let (a10, a11) = (a.entry(1, 0), a.entry(1, 1));
    let mut rng = seed.rng();
    let mut hits = 0usize;
    for _ in 0..draws {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let y0 = z0;
        let y1 = a10 * z0 + a11 * z1;
        if y0 > h && y1 > k {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    Ok(OrthantEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / draws as f64).sqrt(),
        draws,
    })
}
