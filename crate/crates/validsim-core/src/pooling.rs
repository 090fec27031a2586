//! Experiment harness: runs simulation cells over (population matrix, number
//! of sub-samples, sub-sample size, replications) and aggregates the three
//! estimators into bias tables and validity sweeps.
//!
//! Replications execute in parallel; every replication owns a dedicated
//! random substream derived from (cell ordinal, replication index), so
//! results are bit-identical no matter how work is scheduled.

use rayon::prelude::*;

use crate::correlation::{
    corr_matrix, multiple_correlations, pda_pool, sum_score_validity, EstimateRecord,
    MultipleCorrelationVector,
};
use crate::error::{Error, Result};
use crate::matrix::{gram_factor, CorrelationMatrix};
use crate::sampler::{mvn_sample, split_subsamples, SeedSpec};

/// Retry budget for replications whose sub-samples come out singular.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 32;

/// Retries jump to a disjoint high band of the stream space, so attempt 0 of
/// replication r keeps the plain `ordinal * replications + r` stream index.
const ATTEMPT_BAND_SHIFT: u32 = 48;

/// Index of the criterion variable in sweep population matrices (two
/// predictors followed by the criterion).
pub const SWEEP_CRITERION: usize = 2;

/// One experiment cell: population matrix, partition shape, replication count
/// and master seed, plus the variable indices to report on.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub sigma: CorrelationMatrix,
    pub nss: usize,
    pub sss: usize,
    pub replications: usize,
    pub master_seed: u64,
    pub criteria: Vec<usize>,
}

impl SimDesign {
    /// Validate a design; `criteria = None` reports every variable.
    pub fn new(
        sigma: CorrelationMatrix,
        nss: usize,
        sss: usize,
        replications: usize,
        master_seed: u64,
        criteria: Option<Vec<usize>>,
    ) -> Result<Self> {
        let p = sigma.order();
        if nss < 1 {
            return Err(Error::InvalidDesign {
                reason: "need at least one sub-sample".into(),
            });
        }
        if sss < p + 2 {
            return Err(Error::InvalidDesign {
                reason: format!(
                    "sub-sample size {sss} too small: correlation matrices of {p} variables need at least {} rows",
                    p + 2
                ),
            });
        }
        if replications < 1 {
            return Err(Error::InvalidDesign {
                reason: "need at least one replication".into(),
            });
        }
        let mut criteria = criteria.unwrap_or_else(|| (0..p).collect());
        criteria.sort_unstable();
        criteria.dedup();
        if criteria.is_empty() {
            return Err(Error::InvalidDesign {
                reason: "criteria set is empty".into(),
            });
        }
        if let Some(&bad) = criteria.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidDesign {
                reason: format!("criterion index {bad} out of range for {p} variables"),
            });
        }
        Ok(Self {
            sigma,
            nss,
            sss,
            replications,
            master_seed,
            criteria,
        })
    }

    /// Total sample size per replication.
    pub fn total_sample_size(&self) -> usize {
        self.nss * self.sss
    }
}

/// Monte Carlo standard errors of the replication means, one per estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorSes {
    pub pda: f64,
    pub agr: f64,
    pub sum: f64,
}

/// Result of one cell: estimates averaged over replications, their Monte
/// Carlo standard errors (zero when replications = 1, where no spread is
/// observable), and how many replications had to be redrawn.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub design: SimDesign,
    pub per_criterion: Vec<EstimateRecord>,
    pub mc_se: Vec<EstimatorSes>,
    pub resample_count: usize,
}

struct RepEstimates {
    pda: Vec<f64>,
    agr: Vec<f64>,
    sum: Vec<f64>,
    extra_attempts: usize,
}

fn estimate_once(design: &SimDesign, seed: SeedSpec) -> Result<RepEstimates> {
    let y = mvn_sample(&design.sigma, design.total_sample_size(), seed)?;
    let parts = split_subsamples(&y, design.nss, design.sss)?;

    let per_part: Vec<MultipleCorrelationVector> = parts
        .iter()
        .map(|part| multiple_correlations(&corr_matrix(part)?))
        .collect::<Result<_>>()?;
    let weights = vec![design.sss; design.nss];
    let pooled = pda_pool(&per_part, &weights)?;

    let aggregated = multiple_correlations(&corr_matrix(&y)?)?;

    let mut pda = Vec::with_capacity(design.criteria.len());
    let mut agr = Vec::with_capacity(design.criteria.len());
    let mut sum = Vec::with_capacity(design.criteria.len());
    for &c in &design.criteria {
        pda.push(pooled.value(c));
        agr.push(aggregated.value(c));
        sum.push(sum_score_validity(&y, c)?);
    }
    Ok(RepEstimates {
        pda,
        agr,
        sum,
        extra_attempts: 0,
    })
}

fn replicate(design: &SimDesign, cell_ordinal: usize, rep: usize) -> Result<RepEstimates> {
    let base = cell_ordinal as u64 * design.replications as u64 + rep as u64;
    assert!(
        base < 1u64 << ATTEMPT_BAND_SHIFT,
        "stream index space exhausted"
    );
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let stream = ((attempt as u64) << ATTEMPT_BAND_SHIFT) | base;
        let seed = SeedSpec::new(design.master_seed, stream);
        match estimate_once(design, seed) {
            Ok(mut est) => {
                est.extra_attempts = attempt;
                return Ok(est);
            }
            // A singular or constant sub-sample invalidates the whole
            // replication; silently dropping the offending sub-sample would
            // bias the pooled estimate.
            Err(Error::SingularMatrix { .. }) | Err(Error::DegenerateColumn { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::SingularSubsample {
        replication: rep,
        attempts: MAX_RESAMPLE_ATTEMPTS,
    })
}

fn mean_and_se(samples: &[Vec<f64>], pick: impl Fn(&Vec<f64>) -> f64) -> (f64, f64) {
    let n = samples.len();
    let mean = samples.iter().map(&pick).sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ssd = samples
        .iter()
        .map(|s| {
            let d = pick(s) - mean;
            d * d
        })
        .sum::<f64>();
    (mean, (ssd / ((n - 1) as f64 * n as f64)).sqrt())
}

/// Run one cell at a given ordinal within a larger experiment; the ordinal
/// keeps substreams disjoint across cells that share a master seed.
pub fn run_cell_at(design: &SimDesign, cell_ordinal: usize) -> Result<CellResult> {
    let pop = multiple_correlations(&design.sigma)?;

    let reps: Vec<Result<RepEstimates>> = (0..design.replications)
        .into_par_iter()
        .map(|rep| replicate(design, cell_ordinal, rep))
        .collect();
    // Deterministic fold in replication order; the first error wins.
    let mut collected = Vec::with_capacity(design.replications);
    for rep in reps {
        collected.push(rep?);
    }
    let resample_count = collected.iter().map(|r| r.extra_attempts).sum();

    let mut per_criterion = Vec::with_capacity(design.criteria.len());
    let mut mc_se = Vec::with_capacity(design.criteria.len());
    for (slot, &criterion) in design.criteria.iter().enumerate() {
        let pda_samples: Vec<Vec<f64>> = collected.iter().map(|r| r.pda.clone()).collect();
        let (pda_mean, pda_se) = mean_and_se(&pda_samples, |s| s[slot]);
        let agr_samples: Vec<Vec<f64>> = collected.iter().map(|r| r.agr.clone()).collect();
        let (agr_mean, agr_se) = mean_and_se(&agr_samples, |s| s[slot]);
        let sum_samples: Vec<Vec<f64>> = collected.iter().map(|r| r.sum.clone()).collect();
        let (sum_mean, sum_se) = mean_and_se(&sum_samples, |s| s[slot]);
        per_criterion.push(EstimateRecord::new(
            criterion,
            pop.value(criterion),
            pda_mean,
            agr_mean,
            sum_mean,
        ));
        mc_se.push(EstimatorSes {
            pda: pda_se,
            agr: agr_se,
            sum: sum_se,
        });
    }
    Ok(CellResult {
        design: design.clone(),
        per_criterion,
        mc_se,
        resample_count,
    })
}

/// Run a standalone cell (ordinal zero).
pub fn run_cell(design: &SimDesign) -> Result<CellResult> {
    run_cell_at(design, 0)
}

/// Stacked bias blocks sharing one population matrix, ordered by sub-sample
/// size increasing towards the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasTables {
    pub blocks: Vec<CellResult>,
}

/// Run every design and assemble the block structure of a bias table.
/// All designs must share the population matrix.
pub fn reproduce_bias_tables(designs: &[SimDesign]) -> Result<BiasTables> {
    let first = designs.first().ok_or(Error::EmptyInput { what: "designs" })?;
    if designs.iter().any(|d| d.sigma != first.sigma) {
        return Err(Error::MismatchedSigma);
    }
    let mut ordered: Vec<&SimDesign> = designs.iter().collect();
    ordered.sort_by_key(|d| (d.sss, d.nss));
    let blocks = ordered
        .iter()
        .enumerate()
        .map(|(ordinal, design)| run_cell_at(design, ordinal))
        .collect::<Result<_>>()?;
    Ok(BiasTables { blocks })
}

/// Mean absolute bias per estimator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorMeans {
    pub pda: f64,
    pub agr: f64,
    pub sum: f64,
}

/// One validity level of a sweep: its cells in column order plus row means of
/// absolute bias and the pda-versus-agr magnitude gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub predictor_validities: (f64, f64),
    pub population_validity: f64,
    pub cells: Vec<CellResult>,
    pub mean_abs_bias: EstimatorMeans,
    pub diff: f64,
}

/// Bias as a function of population validity across partition shapes.
/// Column means average the absolute bias of all estimators at one shape;
/// the grand mean averages every entry in the table.
#[derive(Debug, Clone, PartialEq)]
pub struct ValiditySweep {
    pub r12: f64,
    pub cell_shapes: Vec<(usize, usize)>,
    pub replications: usize,
    pub master_seed: u64,
    pub rows: Vec<SweepRow>,
    pub col_means: Vec<f64>,
    pub grand_mean: f64,
}

/// Sweep the harness over validity levels built from predictor-correlation
/// pairs with fixed predictor intercorrelation `r12`, running every
/// (validity, shape) cell and summarizing bias magnitudes by row and column.
pub fn validity_sweep(
    validities: &[(f64, f64)],
    r12: f64,
    cells: &[(usize, usize)],
    replications: usize,
    master_seed: u64,
) -> Result<ValiditySweep> {
    if validities.is_empty() {
        return Err(Error::EmptyInput { what: "validities" });
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput { what: "cells" });
    }

    let mut rows = Vec::with_capacity(validities.len());
    for (v_idx, &(v1, v2)) in validities.iter().enumerate() {
        let sigma = CorrelationMatrix::from_two_predictors(r12, v1, v2)?;
        gram_factor(&sigma)?; // reject inconsistent validity pairs up front
        let population_validity = multiple_correlations(&sigma)?.value(SWEEP_CRITERION);

        let mut row_cells = Vec::with_capacity(cells.len());
        for (c_idx, &(nss, sss)) in cells.iter().enumerate() {
            let design = SimDesign::new(
                sigma.clone(),
                nss,
                sss,
                replications,
                master_seed,
                Some(vec![SWEEP_CRITERION]),
            )?;
            row_cells.push(run_cell_at(&design, v_idx * cells.len() + c_idx)?);
        }

        let len = row_cells.len() as f64;
        let mean_abs_bias = EstimatorMeans {
            pda: row_cells.iter().map(|c| c.per_criterion[0].bias_pda.abs()).sum::<f64>() / len,
            agr: row_cells.iter().map(|c| c.per_criterion[0].bias_agr.abs()).sum::<f64>() / len,
            sum: row_cells.iter().map(|c| c.per_criterion[0].bias_sum.abs()).sum::<f64>() / len,
        };
        rows.push(SweepRow {
            predictor_validities: (v1, v2),
            population_validity,
            cells: row_cells,
            mean_abs_bias,
            diff: mean_abs_bias.pda - mean_abs_bias.agr,
        });
    }

    let mut col_means = Vec::with_capacity(cells.len());
    for c_idx in 0..cells.len() {
        let mut acc = 0.0;
        for row in &rows {
            let rec = &row.cells[c_idx].per_criterion[0];
            acc += rec.bias_pda.abs() + rec.bias_agr.abs() + rec.bias_sum.abs();
        }
        col_means.push(acc / (3 * rows.len()) as f64);
    }
    let grand_mean = col_means.iter().sum::<f64>() / col_means.len() as f64;

    Ok(ValiditySweep {
        r12,
        cell_shapes: cells.to_vec(),
        replications,
        master_seed,
        rows,
        col_means,
        grand_mean,
    })
}
