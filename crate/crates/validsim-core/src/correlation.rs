//! Correlation estimation and the pooling estimators.
//!
//! Three ways of turning sub-sample data into a validity estimate live here:
//! averaging per-sub-sample multiple correlations ([`pda_pool`]), computing
//! one multiple correlation from the aggregated scores (compose
//! [`corr_matrix`] with [`multiple_correlations`]), and correlating the
//! criterion with an unweighted sum of standardized predictors
//! ([`sum_score_validity`]).

use crate::error::{Error, Result};
use crate::matrix::{spd_inverse, CorrelationMatrix};
use crate::sampler::ScoreMatrix;

/// Relative variance floor below which a column counts as constant.
fn degenerate_ssq_floor(n: usize, mean: f64) -> f64 {
    let scale = 1e-12 * (1.0 + mean.abs());
    n as f64 * scale * scale
}

/// All p multiple correlations of a variable set, one per variable serving as
/// criterion; entries lie in the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipleCorrelationVector {
    values: Vec<f64>,
}

impl MultipleCorrelationVector {
    /// Build from raw values; every entry must lie in [0, 1].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "multiple correlation",
                    value: v,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One department's published statistics: sub-sample size and reported
/// multiple correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeptRecord {
    pub n: usize,
    pub r: f64,
}

impl DeptRecord {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewRows { rows: 0, min: 1 });
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange {
                what: "reported multiple correlation",
                value: r,
            });
        }
        Ok(Self { n, r })
    }
}

/// Population value and the three estimates for one criterion, with the bias
/// (population minus estimate) of each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRecord {
    pub criterion: usize,
    pub pop: f64,
    pub pda: f64,
    pub agr: f64,
    pub sum: f64,
    pub bias_pda: f64,
    pub bias_agr: f64,
    pub bias_sum: f64,
}

impl EstimateRecord {
    pub fn new(criterion: usize, pop: f64, pda: f64, agr: f64, sum: f64) -> Self {
        Self {
            criterion,
            pop,
            pda,
            agr,
            sum,
            bias_pda: bias(pop, pda),
            bias_agr: bias(pop, agr),
            bias_sum: bias(pop, sum),
        }
    }

    /// Gap between the bias magnitudes of averaged-estimate pooling and score
    /// aggregation; positive when pooling estimates is the more biased route.
    pub fn diff(&self) -> f64 {
        self.bias_pda.abs() - self.bias_agr.abs()
    }
}

/// Pearson correlation of two equally long slices given their means and
/// centered sums of squares.
fn pearson(a: &[f64], b: &[f64], mean_a: f64, mean_b: f64, ssq_a: f64, ssq_b: f64) -> f64 {
    let mut cross = 0.0;
    for (x, y) in a.iter().zip(b) {
        cross += (x - mean_a) * (y - mean_b);
    }
    (cross / (ssq_a * ssq_b).sqrt()).clamp(-1.0, 1.0)
}

/// Product-moment correlation matrix of the columns of `y`.
pub fn corr_matrix(y: &ScoreMatrix) -> Result<CorrelationMatrix> {
    let n = y.rows();
    let p = y.cols();
    if n < 3 {
        return Err(Error::TooFewRows { rows: n, min: 3 });
    }
    if p < 2 {
        return Err(Error::TooFewColumns { cols: p, min: 2 });
    }

    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); p];
    for row in 0..n {
        for (j, col) in cols.iter_mut().enumerate() {
            col.push(y.value(row, j));
        }
    }
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let ssqs: Vec<f64> = cols
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| (v - m) * (v - m)).sum::<f64>())
        .collect();
    for (j, (&ssq, &mean)) in ssqs.iter().zip(&means).enumerate() {
        if ssq <= degenerate_ssq_floor(n, mean) {
            return Err(Error::DegenerateColumn { col: j });
        }
    }

    let mut entries = vec![0.0; p * p];
    for i in 0..p {
        entries[i * p + i] = 1.0;
        for j in 0..i {
            let r = pearson(&cols[i], &cols[j], means[i], means[j], ssqs[i], ssqs[j]);
            entries[i * p + j] = r;
            entries[j * p + i] = r;
        }
    }
    Ok(CorrelationMatrix::from_parts_unchecked(p, entries))
}

/// All p multiple correlations at once from the inverse correlation matrix:
/// the i'th value is sqrt(1 - 1/r^ii) with r^ii the i'th diagonal element of
/// the inverse. Applied to a population matrix this yields population
/// validities; applied to a sample matrix, sample estimates.
pub fn multiple_correlations(r: &CorrelationMatrix) -> Result<MultipleCorrelationVector> {
    let p = r.order();
    let inv = spd_inverse(r)?;
    let values = (0..p)
        .map(|i| {
            let rii = inv[i * p + i];
            (1.0 - 1.0 / rii).max(0.0).sqrt()
        })
        .collect();
    Ok(MultipleCorrelationVector { values })
}

/// Validity of the unweighted sum of standardized predictors: the Pearson
/// correlation between the criterion column and the sum of the remaining
/// columns, each standardized by its total-sample mean and (n-1) standard
/// deviation.
pub fn sum_score_validity(y: &ScoreMatrix, criterion: usize) -> Result<f64> {
    let n = y.rows();
    let p = y.cols();
    if n < 3 {
        return Err(Error::TooFewRows { rows: n, min: 3 });
    }
    if p < 2 {
        return Err(Error::TooFewColumns { cols: p, min: 2 });
    }
    assert!(criterion < p, "criterion index {criterion} out of range for {p} variables");

    let mut means = vec![0.0; p];
    for row in 0..n {
        for (j, m) in means.iter_mut().enumerate() {
            *m += y.value(row, j);
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut ssqs = vec![0.0; p];
    for row in 0..n {
        for (j, s) in ssqs.iter_mut().enumerate() {
            let d = y.value(row, j) - means[j];
            *s += d * d;
        }
    }
    for (j, &ssq) in ssqs.iter().enumerate() {
        if ssq <= degenerate_ssq_floor(n, means[j]) {
            return Err(Error::DegenerateColumn { col: j });
        }
    }
    let sds: Vec<f64> = ssqs.iter().map(|s| (s / (n - 1) as f64).sqrt()).collect();

    let mut sums = Vec::with_capacity(n);
    let mut crit = Vec::with_capacity(n);
    for row in 0..n {
        let mut acc = 0.0;
        for j in 0..p {
            if j != criterion {
                acc += (y.value(row, j) - means[j]) / sds[j];
            }
        }
        sums.push(acc);
        crit.push(y.value(row, criterion));
    }

    let sum_mean = sums.iter().sum::<f64>() / n as f64;
    let sum_ssq = sums.iter().map(|v| (v - sum_mean) * (v - sum_mean)).sum::<f64>();
    if sum_ssq <= degenerate_ssq_floor(n, sum_mean) {
        return Err(Error::DegenerateColumn { col: criterion });
    }
    Ok(pearson(
        &sums,
        &crit,
        sum_mean,
        means[criterion],
        sum_ssq,
        ssqs[criterion],
    ))
}

/// Pool per-sub-sample multiple correlations by a weight-proportional average
/// per entry; with equal weights this is the arithmetic mean.
///
/// Addends are accumulated in value order, so the result is exactly invariant
/// under reordering of the sub-samples.
pub fn pda_pool(
    per_subsample: &[MultipleCorrelationVector],
    weights: &[usize],
) -> Result<MultipleCorrelationVector> {
    let first = per_subsample.first().ok_or(Error::EmptyInput {
        what: "per-sub-sample estimates",
    })?;
    if weights.len() != per_subsample.len() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: per_subsample.len(),
            got: weights.len(),
        });
    }
    let len = first.len();
    for v in per_subsample {
        if v.len() != len {
            return Err(Error::LengthMismatch {
                what: "estimate vectors",
                expected: len,
                got: v.len(),
            });
        }
    }
    if let Some(&w) = weights.iter().find(|&&w| w == 0) {
        return Err(Error::OutOfRange {
            what: "pooling weight",
            value: w as f64,
        });
    }

    let total: usize = weights.iter().sum();
    let mut values = Vec::with_capacity(len);
    for entry in 0..len {
        let mut terms: Vec<(f64, usize)> = per_subsample
            .iter()
            .zip(weights)
            .map(|(v, &w)| (v.value(entry), w))
            .collect();
        terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let weighted: f64 = terms.iter().map(|&(v, w)| v * w as f64).sum();
        values.push((weighted / total as f64).min(1.0));
    }
    Ok(MultipleCorrelationVector { values })
}

/// Weighted pooling of published departmental statistics, the scalar case of
/// [`pda_pool`].
pub fn pool_departments(records: &[DeptRecord]) -> Result<f64> {
    let vectors: Vec<MultipleCorrelationVector> = records
        .iter()
        .map(|d| MultipleCorrelationVector::new(vec![d.r]))
        .collect::<Result<_>>()?;
    let weights: Vec<usize> = records.iter().map(|d| d.n).collect();
    Ok(pda_pool(&vectors, &weights)?.value(0))
}

/// Bias of an estimate: population parameter minus sample estimate. Negative
/// means the estimate exceeds the population value.
pub fn bias(pop: f64, estimate: f64) -> f64 {
    pop - estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{standard_normal_matrix, SeedSpec};

    fn general_case_sigma() -> CorrelationMatrix {
        CorrelationMatrix::from_rows(&[
            vec![1.0, 0.6, 0.2],
            vec![0.6, 1.0, 0.3],
            vec![0.2, 0.3, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn identical_columns_correlate_perfectly() {
        let x = standard_normal_matrix(50, 1, SeedSpec::new(1, 0));
        let mut values = Vec::new();
        for row in 0..50 {
            values.push(x.value(row, 0));
            values.push(x.value(row, 0));
        }
        let y = ScoreMatrix::new(50, 2, values).unwrap();
        let r = corr_matrix(&y).unwrap();
        assert_eq!(r.entry(0, 1), 1.0);
    }

    #[test]
    fn negated_column_correlates_minus_one() {
        let x = standard_normal_matrix(50, 1, SeedSpec::new(2, 0));
        let mut values = Vec::new();
        for row in 0..50 {
            values.push(x.value(row, 0));
            values.push(-x.value(row, 0));
        }
        let y = ScoreMatrix::new(50, 2, values).unwrap();
        let r = corr_matrix(&y).unwrap();
        assert_eq!(r.entry(0, 1), -1.0);
    }

    #[test]
    fn constant_column_is_degenerate() {
        let y = ScoreMatrix::new(4, 2, vec![0.5, 1.0, 0.5, 2.0, 0.5, 3.0, 0.5, 4.0]).unwrap();
        assert_eq!(corr_matrix(&y), Err(Error::DegenerateColumn { col: 0 }));
    }

    #[test]
    fn population_validities_match_table_values() {
        let r = multiple_correlations(&general_case_sigma()).unwrap();
        assert!((r.value(0) - 0.600).abs() < 5e-4);
        assert!((r.value(1) - 0.627).abs() < 5e-4);
        assert!((r.value(2) - 0.301).abs() < 5e-4);

        let identity = CorrelationMatrix::identity(4);
        assert_eq!(multiple_correlations(&identity).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn two_variable_multiple_correlation_is_absolute_r() {
        for &rho in &[-0.8, -0.3, 0.0, 0.45, 0.9] {
            let m = CorrelationMatrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
            let r = multiple_correlations(&m).unwrap();
            assert!((r.value(0) - rho.abs()).abs() < 1e-12);
            assert!((r.value(1) - rho.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn validity_grid_matches_fixed_predictor_intercorrelation() {
        let pairs = [(0.0, 0.0), (0.1, 0.1), (0.1, 0.2), (0.2, 0.3), (0.4, 0.2)];
        let expected = [0.000, 0.112, 0.202, 0.301, 0.403];
        for (&(v1, v2), &want) in pairs.iter().zip(&expected) {
            let sigma = CorrelationMatrix::from_two_predictors(0.6, v1, v2).unwrap();
            let got = multiple_correlations(&sigma).unwrap().value(2);
            assert!((got - want).abs() < 5e-4, "({v1},{v2}): {got} vs {want}");
        }
    }

    #[test]
    fn sum_validity_equals_one_for_identical_pair() {
        let x = standard_normal_matrix(40, 1, SeedSpec::new(3, 0));
        let mut values = Vec::new();
        for row in 0..40 {
            values.push(x.value(row, 0));
            values.push(x.value(row, 0));
        }
        let y = ScoreMatrix::new(40, 2, values).unwrap();
        assert!((sum_score_validity(&y, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chemistry_departments_pool_to_point_459() {
        let records = [
            DeptRecord::new(85, 0.436).unwrap(),
            DeptRecord::new(49, 0.498).unwrap(),
        ];
        let pooled = pool_departments(&records).unwrap();
        assert!((pooled - 61.462 / 134.0).abs() < 1e-12);
        assert_eq!((pooled * 1000.0).round() / 1000.0, 0.459);
    }

    #[test]
    fn pooling_edge_cases() {
        let single = MultipleCorrelationVector::new(vec![0.3, 0.4]).unwrap();
        let pooled = pda_pool(std::slice::from_ref(&single), &[17]).unwrap();
        assert_eq!(pooled, single);

        let a = MultipleCorrelationVector::new(vec![0.2]).unwrap();
        let b = MultipleCorrelationVector::new(vec![0.4]).unwrap();
        let mean = pda_pool(&[a.clone(), b.clone()], &[5, 5]).unwrap();
        assert!((mean.value(0) - 0.3).abs() < 1e-15);

        assert_eq!(
            pda_pool(&[], &[]),
            Err(Error::EmptyInput { what: "per-sub-sample estimates" })
        );
        assert!(matches!(
            pda_pool(&[a, b], &[1]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn bias_is_population_minus_estimate() {
        assert!((bias(0.301, 0.369) - (-0.068)).abs() < 1e-15);
        assert_eq!(bias(0.5, 0.5), 0.0);
        assert!((bias(0.000, 0.270) - (-0.270)).abs() < 1e-15);
    }

    #[test]
    fn estimate_record_keeps_bias_consistent() {
        let rec = EstimateRecord::new(2, 0.301, 0.369, 0.336, 0.311);
        assert_eq!(rec.bias_pda, rec.pop - rec.pda);
        assert_eq!(rec.bias_agr, rec.pop - rec.agr);
        assert_eq!(rec.bias_sum, rec.pop - rec.sum);
        assert!((rec.diff() - (0.068 - 0.035)).abs() < 1e-12);
    }
}
