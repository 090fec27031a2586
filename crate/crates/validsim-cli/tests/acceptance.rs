//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured values (visible with `cargo test -- --nocapture`; cargo's own
//! per-test ok/FAILED line reports the verdict either way).
//!
//! Run with `cargo test -p validsim-cli --test acceptance`.

use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;

use validsim_core::{
    binorm_upper, fourfold_from, mc_orthant_oracle, multiple_correlations, run_cell,
    shrinkage_adjust, utility_grid, utility, validity_sweep, CorrelationMatrix, SeedSpec, SimDesign,
};

fn general_case_sigma() -> CorrelationMatrix {
    CorrelationMatrix::from_rows(&[
        vec![1.0, 0.6, 0.2],
        vec![0.6, 1.0, 0.3],
        vec![0.2, 0.3, 1.0],
    ])
    .unwrap()
}

fn zero_validity_sigma() -> CorrelationMatrix {
    CorrelationMatrix::from_rows(&[
        vec![1.0, 0.6, 0.0],
        vec![0.6, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap()
}

const VALIDITY_PAIRS: [(f64, f64); 5] = [(0.0, 0.0), (0.1, 0.1), (0.1, 0.2), (0.2, 0.3), (0.4, 0.2)];

/// Criterion 1: analytic population validities at three decimals, under one
/// second of runtime.
#[test]
fn acceptance_01_population_validities() {
    let start = Instant::now();
    let tol = 5e-4;

    let general = multiple_correlations(&general_case_sigma()).unwrap();
    for (i, want) in [0.600, 0.627, 0.301].into_iter().enumerate() {
        assert!(
            (general.value(i) - want).abs() < tol,
            "general case variable {}: {} vs {want}",
            i + 1,
            general.value(i)
        );
    }

    let null = multiple_correlations(&zero_validity_sigma()).unwrap();
    for (i, want) in [0.600, 0.600, 0.000].into_iter().enumerate() {
        assert!(
            (null.value(i) - want).abs() < tol,
            "zero-validity case variable {}: {} vs {want}",
            i + 1,
            null.value(i)
        );
    }

    let sweep_row = [0.000, 0.112, 0.202, 0.301, 0.403];
    for (&(v1, v2), &want) in VALIDITY_PAIRS.iter().zip(&sweep_row) {
        let sigma = CorrelationMatrix::from_two_predictors(0.6, v1, v2).unwrap();
        let got = multiple_correlations(&sigma).unwrap().value(2);
        assert!((got - want).abs() < tol, "pair ({v1}, {v2}): {got} vs {want}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[criterion 1] population validities: PASS ({elapsed:?})");
}

/// E[sqrt(B)] for B ~ Beta(1, b) by Simpson quadrature (u² substitution).
fn expected_sqrt_beta_one(b: f64) -> f64 {
    let steps = 40_000;
    let h = 1.0 / steps as f64;
    let f = |u: f64| 2.0 * b * u * u * (1.0 - u * u).powf(b - 1.0);
    let mut acc = f(0.0) + f(1.0);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Criterion 2: null-inflation levels at zero validity, bracketed by Monte
/// Carlo confidence intervals and tied to the exact Beta null distribution.
#[test]
fn acceptance_02_null_inflation() {
    let start = Instant::now();
    let replications = 500;

    let mut summaries = Vec::new();
    for (nss, sss, pda_low, pda_high, seed) in [
        (40usize, 25usize, 0.24, 0.29, 2001u64),
        (20, 50, 0.14, 0.19, 2002),
    ] {
        let design =
            SimDesign::new(zero_validity_sigma(), nss, sss, replications, seed, Some(vec![2])).unwrap();
        let cell = run_cell(&design).unwrap();
        let rec = &cell.per_criterion[0];

        assert!(
            rec.pda > pda_low && rec.pda < pda_high,
            "({nss},{sss}): mean pda {} outside [{pda_low}, {pda_high}]",
            rec.pda
        );
        if (nss, sss) == (40, 25) {
            assert!(
                rec.agr > 0.03 && rec.agr < 0.06,
                "({nss},{sss}): mean agr {} outside [0.03, 0.06]",
                rec.agr
            );
        }

        // Exact null distribution of a two-predictor sample multiple
        // correlation: R² ~ Beta(1, (sss - 3) / 2).
        let oracle = expected_sqrt_beta_one((sss as f64 - 3.0) / 2.0);
        let se = cell.mc_se[0].pda;
        assert!(
            (rec.pda - oracle).abs() < 2.0 * se,
            "({nss},{sss}): mean pda {} vs Beta oracle {oracle} (2 mc_se = {})",
            rec.pda,
            2.0 * se
        );
        summaries.push(format!(
            "({nss},{sss}) pda {:.3} agr {:.3} oracle {:.4}",
            rec.pda, rec.agr, oracle
        ));
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "[criterion 2] null inflation: PASS ({}; {elapsed:?})",
        summaries.join("; ")
    );
}

/// Criterion 3: averaged estimates are the most biased route at small
/// sub-sample sizes and low validity, across 20 master seeds; column-mean
/// bias magnitude decreases with sub-sample size.
#[test]
fn acceptance_03_bias_ordering() {
    let cells = [(40usize, 25usize), (20, 50)];
    // Population validities .000, .112, .202 -- everything at or below .21.
    let low_validity_pairs = [(0.0, 0.0), (0.1, 0.1), (0.1, 0.2)];
    let seeds: Vec<u64> = (0..20).map(|s| 3000 + s).collect();
    let replications = 60;

    let mean_and_se = |values: &[f64]| {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ssd = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        (mean, (ssd / ((n - 1.0) * n)).sqrt())
    };

    for &(v1, v2) in &low_validity_pairs {
        let sigma = CorrelationMatrix::from_two_predictors(0.6, v1, v2).unwrap();
        let validity = multiple_correlations(&sigma).unwrap().value(2);
        for &(nss, sss) in &cells {
            let per_seed: Vec<(f64, f64)> = seeds
                .par_iter()
                .map(|&seed| {
                    let design = SimDesign::new(
                        sigma.clone(),
                        nss,
                        sss,
                        replications,
                        seed,
                        Some(vec![2]),
                    )
                    .unwrap();
                    let rec = run_cell(&design).unwrap().per_criterion[0];
                    (rec.bias_pda.abs(), rec.bias_agr.abs())
                })
                .collect();
            let pda: Vec<f64> = per_seed.iter().map(|p| p.0).collect();
            let agr: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
            let (mean_pda, se_pda) = mean_and_se(&pda);
            let (mean_agr, se_agr) = mean_and_se(&agr);
            let margin = 2.0 * (se_pda * se_pda + se_agr * se_agr).sqrt();
            assert!(
                mean_pda - mean_agr > margin,
                "validity {validity:.3}, cell ({nss},{sss}): |bias pda| {mean_pda:.4} \
                 not above |bias agr| {mean_agr:.4} by the combined-error margin {margin:.4}"
            );
        }
    }

    let sweep = validity_sweep(&VALIDITY_PAIRS, 0.6, &[(40, 25), (20, 50), (13, 77)], 300, 3100)
        .unwrap();
    assert!(
        sweep.col_means[0] > sweep.col_means[1] && sweep.col_means[1] > sweep.col_means[2],
        "column means not decreasing: {:?}",
        sweep.col_means
    );
    // Bias decay for the pooled-estimate route itself: at zero validity the
    // inflation at sub-samples of 25 dwarfs that at 77 for the same pooled
    // sample size.
    let null_row = &sweep.rows[0];
    let pda_small = null_row.cells[0].per_criterion[0].bias_pda.abs();
    let pda_large = null_row.cells[2].per_criterion[0].bias_pda.abs();
    assert!(
        pda_small > pda_large,
        "pda bias magnitude {pda_small:.4} at sss=25 not above {pda_large:.4} at sss=77"
    );
    println!(
        "[criterion 3] bias ordering: PASS (cmns {:.3} > {:.3} > {:.3}; \
         null pda bias {:.3} at sss=25 vs {:.3} at sss=77)",
        sweep.col_means[0], sweep.col_means[1], sweep.col_means[2], pda_small, pda_large
    );
}

/// Gauss-Jordan solve, independent of the library's Cholesky route.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot_vals = a[col].clone();
        let pivot = pivot_vals[col];
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / pivot;
                for (k, &pv) in pivot_vals.iter().enumerate().skip(col) {
                    a[row][k] -= factor * pv;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Criterion 4: the inverse-matrix formula agrees with explicit
/// normal-equations regression on 1000 random matrices of order <= 6.
#[test]
fn acceptance_04_oracle_equivalence() {
    let mut rng = SeedSpec::new(0x0C0FFEE, 0).rng();
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, p: usize) -> CorrelationMatrix {
        let g: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut acc = if i == j { 0.5 } else { 0.0 };
                for k in 0..p {
                    acc += g[i * p + k] * g[j * p + k];
                }
                s[i * p + j] = acc;
            }
        }
        let mut entries = vec![0.0; p * p];
        for i in 0..p {
            entries[i * p + i] = 1.0;
            for j in 0..i {
                let val = (s[i * p + j] / (s[i * p + i] * s[j * p + j]).sqrt()).clamp(-1.0, 1.0);
                entries[i * p + j] = val;
                entries[j * p + i] = val;
            }
        }
        CorrelationMatrix::new(p, entries).unwrap()
    }

    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let p = 2 + trial % 5;
        let r = random_matrix(&mut rng, p);
        let fast = multiple_correlations(&r).unwrap();
        for i in 0..p {
            let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
            let sub: Vec<Vec<f64>> = others
                .iter()
                .map(|&row| others.iter().map(|&col| r.entry(row, col)).collect())
                .collect();
            let v: Vec<f64> = others.iter().map(|&j| r.entry(i, j)).collect();
            let w = gauss_solve(sub, v.clone());
            let slow = v
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .max(0.0)
                .sqrt();
            let err = (fast.value(i) - slow).abs();
            worst = worst.max(err);
            assert!(err < 1e-10, "trial {trial} variable {i}: error {err:.3e}");
        }
    }
    println!("[criterion 4] oracle equivalence: PASS (worst error {worst:.2e})");
}

/// One published row: (base rate %, quota %) and a (%C, G/L, HR) triple per
/// validity level.
type PublishedRow = ((u32, u32), [(i32, i32, i32); 3]);

/// Published grid for validities .50/.30/.15 over base rates 50-70 and quotas
/// 70-30: (%C, G/L, HR) per validity, transcribed row by row.
#[rustfmt::skip]
const PUBLISHED_GRID: [PublishedRow; 25] = [
    ((50, 70), [(64, 40, 84), (58,   8, 78), (54,   4, 60)]),
    ((50, 60), [(66, 16, 76), (60,   9, 70), (55,   4, 65)]),
    ((50, 50), [(67, 17, 67), (60,  10, 60), (55,   5, 55)]),
    ((50, 40), [(66, 16, 56), (60,   9, 50), (55,   5, 45)]),
    ((50, 30), [(64, 14, 44), (59,   9, 38), (54,   4, 34)]),
    ((55, 70), [(67, 12, 83), (60,   5, 77), (56,   1, 74)]),
    ((55, 60), [(67, 12, 74), (60,   5, 68), (56,   0, 64)]),
    ((55, 50), [(67, 11, 65), (60,   4, 58), (54,  -1, 54)]),
    ((55, 40), [(65, 10, 55), (54,   4, 48), (54,  -1, 44)]),
    ((55, 30), [(62,  7, 43), (56,   1, 38), (52,  -3, 34)]),
    ((60, 70), [(68,  9, 82), (62,   2, 77), (58,  -2, 73)]),
    ((60, 60), [(68,  8, 73), (61,   1, 67), (56,  -3, 64)]),
    ((60, 50), [(66,  6, 64), (60,   0, 58), (54,  -5, 54)]),
    ((60, 40), [(63,  3, 53), (57,  -3, 48), (52,  -8, 44)]),
    ((60, 30), [(60,  0, 41), (54,  -6, 36), (50, -10, 34)]),
    ((65, 70), [(70,  5, 81), (64,  -1, 76), (60,  -5, 73)]),
    ((65, 60), [(68,  3, 72), (62,  -3, 66), (57,  -8, 63)]),
    ((65, 50), [(65,  0, 62), (59,  -6, 57), (55, -10, 54)]),
    ((65, 40), [(62, -3, 52), (55, -10, 46), (51, -14, 43)]),
    ((65, 30), [(57, -8, 39), (51, -14, 36), (48, -18, 33)]),
    ((70, 70), [(72,  1, 80), (66,  -4, 66), (62,  -8, 73)]),
    ((70, 60), [(68, -2, 70), (63,  -8, 67), (58, -12, 63)]),
    ((70, 50), [(64, -6, 60), (58, -12, 56), (54, -16, 53)]),
    ((70, 40), [(59, -11, 49), (54, -16, 46), (50, -20, 43)]),
    ((70, 30), [(53, -17, 38), (49, -21, 35), (45, -24, 33)]),
];

/// Cells of the published grid that are inconsistent with their own row and
/// column neighbors (transcription slips in the source); the computed values
/// are reported instead of matched.
const DOCUMENTED_DISCREPANCIES: [(usize, u32, u32); 4] = [
    // (validity index into [.50, .30, .15], base rate %, quota %)
    (0, 50, 70), // G/L printed 40; the row's own %C 64 implies 64 - 50 = 14
    (1, 55, 40), // %C printed 54; the row's own G/L 4 implies 55 + 4 = 59
    (1, 70, 70), // HR printed 66; adjacent base-rate rows give 76 and 77
    (2, 50, 70), // HR printed 60; adjacent base-rate rows give 74 and 73
];

/// Criterion 5: the classification grid reproduces the published table to
/// one percentage point outside the documented discrepancy list, and the
/// worked fourfold illustration lands within .005.
#[test]
fn acceptance_05_decision_utility() {
    let start = Instant::now();
    let validities = [0.50, 0.30, 0.15];
    let base_rates = [0.50, 0.55, 0.60, 0.65, 0.70];
    let quotas = [0.70, 0.60, 0.50, 0.40, 0.30];
    let grid = utility_grid(&validities, &base_rates, &quotas).unwrap();

    let mut mismatches = Vec::new();
    for (row, ((b_pct, q_pct), per_validity)) in PUBLISHED_GRID.iter().enumerate() {
        let bi = row / 5;
        let qi = row % 5;
        assert_eq!((base_rates[bi] * 100.0).round() as u32, *b_pct);
        assert_eq!((quotas[qi] * 100.0).round() as u32, *q_pct);
        for (vi, &(pc, gl, hr)) in per_validity.iter().enumerate() {
            let cell = grid.cell(vi, bi, qi);
            let off = (cell.percent_correct - pc)
                .abs()
                .max((cell.gain_loss - gl).abs())
                .max((cell.hit_rate_pct - hr).abs());
            if off > 1 {
                mismatches.push((vi, *b_pct, *q_pct, (pc, gl, hr), cell.clone()));
            }
        }
    }

    assert!(
        mismatches.len() <= 5,
        "{} cells off by more than one point",
        mismatches.len()
    );
    for (vi, b, q, published, cell) in &mismatches {
        assert!(
            DOCUMENTED_DISCREPANCIES.contains(&(*vi, *b, *q)),
            "undocumented mismatch at validity {}, b+ {b}, q {q}: published {published:?}, \
             computed ({}, {}, {})",
            validities[*vi],
            cell.percent_correct,
            cell.gain_loss,
            cell.hit_rate_pct
        );
        println!(
            "[criterion 5] documented discrepancy at r = {:.2}, b+ = {b}, q = {q}: \
             published (%C, G/L, HR) = {published:?}, computed = ({}, {}, {})",
            validities[*vi], cell.percent_correct, cell.gain_loss, cell.hit_rate_pct
        );
    }
    assert_eq!(
        mismatches.len(),
        DOCUMENTED_DISCREPANCIES.len(),
        "discrepancy list is stale"
    );

    // Worked illustration: validity .15, base rate .60, quota .30.
    let t = fourfold_from(0.15, 0.60, 0.30).unwrap();
    for (name, got, want) in [
        ("tp", t.tp, 0.2),
        ("fp", t.fp, 0.1),
        ("fn", t.fn_, 0.4),
        ("tn", t.tn, 0.3),
    ] {
        assert!((got - want).abs() < 5e-3, "{name}: {got} vs {want}");
    }
    let report = utility(&t).unwrap();
    assert!((report.hit_rate - 0.333).abs() < 5e-3, "hit rate {}", report.hit_rate);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "[criterion 5] decision utility: PASS (71/75 cells within one point, \
         4 documented discrepancies; {elapsed:?})"
    );
}

/// Criterion 6: orthant probabilities match the median-threshold closed form
/// to 1e-7 and a ten-million-draw Monte Carlo oracle on a 5x5x5 grid.
#[test]
fn acceptance_06_orthant_accuracy() {
    // Closed form at median thresholds: 1/4 + asin(rho) / 2 pi.
    for step in -9i32..=9 {
        let rho = step as f64 / 10.0;
        let closed = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        let got = binorm_upper(0.0, 0.0, rho);
        assert!(
            (got - closed).abs() < 1e-7,
            "rho {rho}: {got} vs closed form {closed}"
        );
    }

    let thresholds = [-1.5, -0.5, 0.0, 0.5, 1.5];
    let correlations = [-0.9, -0.45, 0.0, 0.45, 0.9];
    let mut grid = Vec::new();
    for &h in &thresholds {
        for &k in &thresholds {
            for &rho in &correlations {
                grid.push((h, k, rho));
            }
        }
    }
    let worst = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &(h, k, rho))| {
            let est =
                mc_orthant_oracle(h, k, rho, 10_000_000, SeedSpec::new(4242, idx as u64)).unwrap();
            let exact = binorm_upper(h, k, rho);
            let err = (exact - est.probability).abs();
            // The 1e-7 term is the quadrature accuracy budget; it only
            // matters for cells so deep in a tail that no draw lands there.
            let tol = 4.0 * est.std_error + 1e-7;
            assert!(
                err < tol,
                "h={h} k={k} rho={rho}: exact {exact}, mc {} ± {}",
                est.probability,
                est.std_error
            );
            if est.std_error > 0.0 { err / est.std_error } else { 0.0 }
        })
        .reduce(|| 0.0, f64::max);
    println!("[criterion 6] orthant accuracy: PASS (worst deviation {worst:.2} mc standard errors)");
}

/// Criterion 7: the pool subcommand reproduces the worked weighted average.
#[test]
fn acceptance_07_weighted_pooling() {
    let output = Command::new(env!("CARGO_BIN_EXE_validsim"))
        .args(["pool", "--dept", "85:0.436", "--dept", "49:0.498"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let report = String::from_utf8(output.stdout).unwrap();
    assert!(
        report.contains("pooled multiple correlation: 0.459"),
        "{report}"
    );
    println!("[criterion 7] weighted pooling: PASS (85:0.436 + 49:0.498 -> 0.459)");
}

/// Criterion 8: shrinkage can push an adjusted R² negative, and never raises
/// it, exhaustively over small samples.
#[test]
fn acceptance_08_shrinkage_pathology() {
    let pathological = shrinkage_adjust(0.2, 10, 3).unwrap();
    assert!(
        pathological < 0.0,
        "expected a negative adjusted R², got {pathological}"
    );

    let mut checked = 0usize;
    for n in 4..=15usize {
        for k in 1..=(n - 2) {
            for step in 0..=100 {
                let r_squared = step as f64 / 100.0;
                let adjusted = shrinkage_adjust(r_squared, n, k).unwrap();
                assert!(
                    adjusted <= r_squared,
                    "adjusted {adjusted} above raw {r_squared} at n={n}, k={k}"
                );
                if r_squared == 1.0 {
                    assert_eq!(adjusted, 1.0);
                } else {
                    assert!(adjusted < r_squared);
                }
                checked += 1;
            }
        }
    }
    println!(
        "[criterion 8] shrinkage pathology: PASS (example adjusted R² {pathological}; \
         {checked} grid points confirm adjusted <= raw)"
    );
}

/// Criterion 9: byte-identical reports for identical configs, regardless of
/// available parallelism.
#[test]
fn acceptance_09_byte_identical_reports() {
    let dir = std::env::temp_dir().join("validsim-acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("cell.toml");
    std::fs::write(
        &config_path,
        r#"
command = "simulate"
seed = 90210
replications = 40
format = "csv"

[simulate]
sigma = [[1.0, 0.6, 0.0], [0.6, 1.0, 0.0], [0.0, 0.0, 1.0]]
nss = 8
sss = 25
"#,
    )
    .unwrap();

    let run = |threads: &str, args: &[&str]| -> Vec<u8> {
        let output = Command::new(env!("CARGO_BIN_EXE_validsim"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    let simulate_args = ["simulate", "--config", config_path.to_str().unwrap()];
    let first = run("1", &simulate_args);
    let second = run("4", &simulate_args);
    let third = run("2", &simulate_args);
    assert_eq!(first, second, "simulate output varies with thread count");
    assert_eq!(first, third);

    let sweep_args = [
        "sweep",
        "--replications",
        "10",
        "--seed",
        "31337",
        "--format",
        "csv",
    ];
    let first = run("1", &sweep_args);
    let second = run("4", &sweep_args);
    assert_eq!(first, second, "sweep output varies with thread count");

    println!("[criterion 9] determinism: PASS (byte-identical across 1, 2 and 4 threads)");
}
