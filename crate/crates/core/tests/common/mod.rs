//! Shared synthetic fixtures and independent oracles for integration tests.
#![allow(dead_code)]

use flexbound::data::{self, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// 3 columns with x3 = x1 + x2 + N(0, σ), σ = 0.05 × range(x1 + x2).
pub fn linear_truth(seed: u64, rows: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05 * 2.0).unwrap();
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            vec![a, b, a + b + noise.sample(&mut rng)]
        })
        .collect();
    Dataset::complete(vec!["x1".into(), "x2".into(), "x3".into()], &data).unwrap()
}

/// Hide `fraction` of all cells MCAR. Returns (masked, eval_mask).
pub fn hide(truth: &Dataset, fraction: f64, seed: u64) -> (Dataset, Vec<bool>) {
    let cols: Vec<usize> = (0..truth.n_cols()).collect();
    data::mask_mcar(truth, fraction, &cols, seed ^ 0xA5A5).unwrap()
}

/// Solve a small dense linear system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Ordinary least squares fill: for each incomplete row, regress every missing
/// column on that row's observed columns (with intercept) over the complete rows.
pub fn ols_fill(masked: &Dataset) -> Vec<(usize, usize, f64)> {
    let complete = masked.complete_row_indices();
    let mut fills = Vec::new();
    for r in 0..masked.n_rows() {
        let obs: Vec<usize> = (0..masked.n_cols()).filter(|&c| masked.is_observed(r, c)).collect();
        for target in (0..masked.n_cols()).filter(|&c| !masked.is_observed(r, c)) {
            let p = obs.len() + 1;
            let mut xtx = vec![vec![0.0; p]; p];
            let mut xty = vec![0.0; p];
            for &cr in &complete {
                let row = masked.row(cr);
                let feat: Vec<f64> = std::iter::once(1.0).chain(obs.iter().map(|&c| row[c])).collect();
                for i in 0..p {
                    xty[i] += feat[i] * row[target];
                    for j in 0..p {
                        xtx[i][j] += feat[i] * feat[j];
                    }
                }
            }
            let beta = solve(xtx, xty);
            let row = masked.row(r);
            let pred = beta[0] + obs.iter().enumerate().map(|(k, &c)| beta[k + 1] * row[c]).sum::<f64>();
            fills.push((r, target, pred));
        }
    }
    fills
}

pub fn rmse_of_fills(truth: &Dataset, fills: &[(usize, usize, f64)]) -> f64 {
    let s: f64 = fills.iter().map(|&(r, c, v)| (truth.get(r, c).unwrap() - v).powi(2)).sum();
    (s / fills.len() as f64).sqrt()
}

/// Binary decision task: x1, x2 uniform, x3 = x1 + x2 + small noise, label = [x1 > x2].
/// x3 alone says nothing about the label; it only helps by recovering a missing x1 or x2.
pub fn decision_truth(seed: u64, rows: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..1.0);
            let b: f64 = rng.random_range(0.0..1.0);
            let y = if a > b { 1.0 } else { 0.0 };
            vec![a, b, a + b + noise.sample(&mut rng), y]
        })
        .collect();
    Dataset::complete(vec!["x1".into(), "x2".into(), "x3".into(), "y".into()], &data).unwrap()
}
