//! Robust location, scale and skewness summaries behind the adjusted boxplot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quartiles, medcouple and skew-adjusted fences of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub medcouple: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 values, got {}",
            sample.len()
        )));
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at index {i}")));
    }
    Ok(())
}

fn sorted_copy(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Quantile of an ascending sample by linear interpolation between order
/// statistics (Hyndman & Fan type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    match sorted.get(lo + 1) {
        Some(&next) if frac > 0.0 => sorted[lo] + frac * (next - sorted[lo]),
        _ => sorted[lo],
    }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Medcouple of a sample: the median of the kernel
/// `h(a, b) = ((a - m) - (m - b)) / (a - b)` over all pairs `a >= m >= b`,
/// where `m` is the sample median.
///
/// Pairs with both members tied at the median get the sign kernel
/// (`-1`, `0` or `+1` depending on their positions in the tied block), which
/// keeps the statistic antisymmetric under negation. Evaluation is the naive
/// `O(n^2)` pair enumeration.
pub fn medcouple(sample: &[f64]) -> Result<f64> {
    check_sample(sample)?;
    let sorted = sorted_copy(sample);
    Ok(medcouple_sorted(&sorted))
}

fn medcouple_sorted(sorted: &[f64]) -> f64 {
    let m = median_of_sorted(sorted);
    // Both halves in decreasing order: ties with `m` sit at the tail of
    // `upper` and at the head of `lower`.
    let upper: Vec<f64> = sorted.iter().rev().copied().filter(|&v| v >= m).collect();
    let lower: Vec<f64> = sorted.iter().rev().copied().filter(|&v| v <= m).collect();
    let ties = sorted.iter().filter(|&&v| v == m).count();
    let first_tie = upper.len() - ties;

    let mut kernel = Vec::with_capacity(upper.len() * lower.len());
    for (i, &a) in upper.iter().enumerate() {
        for (j, &b) in lower.iter().enumerate() {
            let h = if a == m && b == m {
                let p = (i - first_tie) as i64;
                let q = j as i64;
                (ties as i64 - 1 - p - q).signum() as f64
            } else {
                ((a - m) - (m - b)) / (a - b)
            };
            kernel.push(h);
        }
    }
    kernel.sort_by(f64::total_cmp);
    median_of_sorted(&kernel).clamp(-1.0, 1.0)
}

/// Quartiles, medcouple and the skew-adjusted whisker fences of Hubert and
/// Vandervieren.
///
/// For `mc >= 0` the fences are `q1 - 1.5 e^(-4 mc) iqr` and
/// `q3 + 1.5 e^(3 mc) iqr`; for `mc < 0` the exponents become `-3 mc` and
/// `4 mc`. With `mc = 0` this is Tukey's boxplot.
pub fn adjusted_boxplot(sample: &[f64]) -> Result<BoxplotStats> {
    check_sample(sample)?;
    let sorted = sorted_copy(sample);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let mc = medcouple_sorted(&sorted);
    let (lo_exp, hi_exp) = if mc >= 0.0 {
        (-4.0 * mc, 3.0 * mc)
    } else {
        (-3.0 * mc, 4.0 * mc)
    };
    Ok(BoxplotStats {
        q1,
        median,
        q3,
        iqr,
        medcouple: mc,
        lower_fence: q1 - 1.5 * lo_exp.exp() * iqr,
        upper_fence: q3 + 1.5 * hi_exp.exp() * iqr,
    })
}
