//! Shared fixtures for the workspace benchmarks.

use validsim_core::CorrelationMatrix;

/// The three-variable population used throughout the benchmarks: correlated
/// predictors with unequal criterion validities.
pub fn benchmark_sigma() -> CorrelationMatrix {
    CorrelationMatrix::from_rows(&[
        vec![1.0, 0.6, 0.2],
        vec![0.6, 1.0, 0.3],
        vec![0.2, 0.3, 1.0],
    ])
    .expect("static matrix is valid")
}

/// A larger, well-conditioned correlation matrix for linear-algebra paths.
pub fn benchmark_sigma_order(p: usize) -> CorrelationMatrix {
    let mut entries = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            entries[i * p + j] = if i == j {
                1.0
            } else {
                0.3 / (1.0 + (i as f64 - j as f64).abs())
            };
        }
    }
    CorrelationMatrix::new(p, entries).expect("banded matrix is valid")
}
