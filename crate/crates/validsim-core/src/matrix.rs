//! Small dense symmetric matrices: population/sample correlation structures,
//! their gram (Cholesky) factors, and inversion for well-conditioned inputs.

use crate::error::{Error, Result};

/// Pivots below this are rejected as indefinite; pivots in `[PSD_PIVOT_TOL, 0]`
/// are treated as exact rank deficiency and clamped to zero.
pub const PSD_PIVOT_TOL: f64 = -1e-10;

/// Inversion demands every Cholesky pivot strictly above this.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-10;

/// Symmetric p×p correlation matrix with unit diagonal.
///
/// Construction checks symmetry (exact), the unit diagonal, and that every
/// off-diagonal entry lies in [-1, 1]. Positive semidefiniteness is *not*
/// checked here; [`gram_factor`] raises [`Error::NotPositiveSemidefinite`]
/// when a factorization is actually needed.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    order: usize,
    entries: Vec<f64>, // row-major, order × order
}

impl CorrelationMatrix {
    /// Build from a row-major entry buffer of length `order * order`.
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidMatrix {
                reason: "order must be at least 1".into(),
            });
        }
        if entries.len() != order * order {
            return Err(Error::InvalidMatrix {
                reason: format!(
                    "expected {} entries for order {}, got {}",
                    order * order,
                    order,
                    entries.len()
                ),
            });
        }
        for (idx, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMatrix {
                    reason: format!("non-finite entry {v} at index {idx}"),
                });
            }
        }
        for i in 0..order {
            if entries[i * order + i] != 1.0 {
                return Err(Error::InvalidMatrix {
                    reason: format!("diagonal entry ({i},{i}) is {}, must be 1", entries[i * order + i]),
                });
            }
            for j in 0..i {
                let a = entries[i * order + j];
                let b = entries[j * order + i];
                if a != b {
                    return Err(Error::InvalidMatrix {
                        reason: format!("asymmetric at ({i},{j}): {a} vs {b}"),
                    });
                }
                if !(-1.0..=1.0).contains(&a) {
                    return Err(Error::InvalidMatrix {
                        reason: format!("off-diagonal entry ({i},{j}) = {a} outside [-1, 1]"),
                    });
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        let mut entries = Vec::with_capacity(order * order);
        for row in rows {
            if row.len() != order {
                return Err(Error::InvalidMatrix {
                    reason: format!("row length {} does not match order {}", row.len(), order),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(order, entries)
    }

    /// Identity correlation matrix (all variables uncorrelated).
    pub fn identity(order: usize) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            entries[i * order + i] = 1.0;
        }
        Self { order, entries }
    }

    /// 3×3 matrix for two predictors with intercorrelation `r12` and
    /// criterion correlations (`v1`, `v2`); the third variable is the criterion.
    pub fn from_two_predictors(r12: f64, v1: f64, v2: f64) -> Result<Self> {
        Self::from_rows(&[
            vec![1.0, r12, v1],
            vec![r12, 1.0, v2],
            vec![v1, v2, 1.0],
        ])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest absolute elementwise difference to another matrix of equal order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order, "orders must match");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_parts_unchecked(order: usize, entries: Vec<f64>) -> Self {
        Self { order, entries }
    }
}

/// Lower-triangular factor A with A·Aᵀ equal to the source correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor {
    order: usize,
    lower: Vec<f64>, // row-major, zero above the diagonal
}

impl GramFactor {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.order + j]
    }

    /// y = A·x for a length-`order` vector, written into `out`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let p = self.order;
        debug_assert_eq!(x.len(), p);
        debug_assert_eq!(out.len(), p);
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.lower[i * p..i * p + i + 1];
            *slot = row.iter().zip(x).map(|(l, v)| l * v).sum();
        }
    }

    /// A·Aᵀ, for round-trip checks.
    pub fn reconstruct(&self) -> CorrelationMatrix {
        let p = self.order;
        let mut entries = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..=i.min(j) {
                    acc += self.lower[i * p + k] * self.lower[j * p + k];
                }
                entries[i * p + j] = acc;
            }
        }
        CorrelationMatrix::from_parts_unchecked(p, entries)
    }
}

/// Cholesky factorization of a correlation matrix, Σ = A·Aᵀ.
///
/// Pivots below [`PSD_PIVOT_TOL`] raise [`Error::NotPositiveSemidefinite`];
/// pivots in `[PSD_PIVOT_TOL, 0]` are clamped to zero, which handles exactly
/// rank-deficient inputs such as a perfectly correlated pair of variables.
pub fn gram_factor(sigma: &CorrelationMatrix) -> Result<GramFactor> {
    let p = sigma.order();
    let mut lower = vec![0.0; p * p];
    for j in 0..p {
        let mut d = sigma.entry(j, j);
        for k in 0..j {
            d -= lower[j * p + k] * lower[j * p + k];
        }
        if d < PSD_PIVOT_TOL {
            return Err(Error::NotPositiveSemidefinite { col: j, pivot: d });
        }
        if d <= 0.0 {
            // Rank deficiency: the residual column is zero.
            lower[j * p + j] = 0.0;
            continue;
        }
        let ljj = d.sqrt();
        lower[j * p + j] = ljj;
        for i in j + 1..p {
            let mut acc = sigma.entry(i, j);
            for k in 0..j {
                acc -= lower[i * p + k] * lower[j * p + k];
            }
            lower[i * p + j] = acc / ljj;
        }
    }
    Ok(GramFactor { order: p, lower })
}

/// Inverse of a symmetric positive-definite correlation matrix via its
/// Cholesky factor. Any pivot at or below [`SINGULAR_PIVOT_TOL`] raises
/// [`Error::SingularMatrix`].
pub fn spd_inverse(r: &CorrelationMatrix) -> Result<Vec<f64>> {
    let p = r.order();
    // Strict factorization: no clamping allowed here.
    let mut lower = vec![0.0; p * p];
    for j in 0..p {
        let mut d = r.entry(j, j);
        for k in 0..j {
            d -= lower[j * p + k] * lower[j * p + k];
        }
        if d <= SINGULAR_PIVOT_TOL {
            return Err(Error::SingularMatrix { col: j, pivot: d });
        }
        let ljj = d.sqrt();
        lower[j * p + j] = ljj;
        for i in j + 1..p {
            let mut acc = r.entry(i, j);
            for k in 0..j {
                acc -= lower[i * p + k] * lower[j * p + k];
            }
            lower[i * p + j] = acc / ljj;
        }
    }

    // Forward-substitute columns of the identity to get L⁻¹.
    let mut linv = vec![0.0; p * p];
    for j in 0..p {
        linv[j * p + j] = 1.0 / lower[j * p + j];
        for i in j + 1..p {
            let mut acc = 0.0;
            for k in j..i {
                acc -= lower[i * p + k] * linv[k * p + j];
            }
            linv[i * p + j] = acc / lower[i * p + i];
        }
    }

    // R⁻¹ = L⁻ᵀ·L⁻¹.
    let mut inv = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut acc = 0.0;
            for k in i.max(j)..p {
                acc += linv[k * p + i] * linv[k * p + j];
            }
            inv[i * p + j] = acc;
            inv[j * p + i] = acc;
        }
    }
    Ok(inv)
}
