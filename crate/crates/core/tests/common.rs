//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

/// `σ_k` by enumerating all `k`-subsets of the retained entries.
pub fn sigma_subsets(values: &[f64], k: usize, skip: &[usize]) -> f64 {
    let kept: Vec<f64> = values.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, &v)| v).collect();
    if k > kept.len() {
        return 0.0;
    }
    let m = kept.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == k {
            total += (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| kept[i]).product::<f64>();
        }
    }
    total
}

/// `σ_j` with the convention `σ_{-1} = σ_{-2} = 0`.
pub fn sigma_signed(values: &[f64], k: i64, skip: &[usize]) -> f64 {
    if k < 0 {
        0.0
    } else {
        sigma_subsets(values, k as usize, skip)
    }
}

/// `F = σ_n/σ_k` and its first and second eigenvalue derivatives by the
/// quotient rule applied to subset sums.
pub struct QuotientRule {
    pub f: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
}

pub fn quotient_rule(values: &[f64], k: usize) -> QuotientRule {
    let n = values.len();
    let (ni, ki) = (n as i64, k as i64);
    let a = sigma_signed(values, ni, &[]);
    let b = sigma_signed(values, ki, &[]);
    let ap: Vec<f64> = (0..n).map(|p| sigma_signed(values, ni - 1, &[p])).collect();
    let bp: Vec<f64> = (0..n).map(|p| sigma_signed(values, ki - 1, &[p])).collect();
    let grad = (0..n).map(|p| (ap[p] * b - a * bp[p]) / (b * b)).collect();
    let mut hess = vec![vec![0.0; n]; n];
    for p in 0..n {
        for r in 0..n {
            let (apr, bpr) = if p == r {
                (0.0, 0.0)
            } else {
                (sigma_signed(values, ni - 2, &[p, r]), sigma_signed(values, ki - 2, &[p, r]))
            };
            hess[p][r] = apr / b - (ap[p] * bp[r] + ap[r] * bp[p]) / (b * b) - a * bpr / (b * b)
                + 2.0 * a * bp[p] * bp[r] / (b * b * b);
        }
    }
    QuotientRule { f: a / b, grad, hess }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
