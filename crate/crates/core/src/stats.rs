//! Descriptive statistics, empirical quantiles and correlation measures.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (divisor `n − 1`).
    pub std: f64,
    /// `E[((X−μ)/σ)³]` with population moments; `None` below 3 observations.
    pub skewness: Option<f64>,
    /// Raw kurtosis (normal = 3); `None` below 4 observations.
    pub kurtosis: Option<f64>,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Central moments `(m2, m3, m4)` with divisor `n`.
pub(crate) fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let m = mean(x);
    let n = x.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

pub fn summary_stats(x: &[f64]) -> Result<SummaryStats> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "observations for summary statistics",
            needed: 2,
            got: n,
        });
    }
    let mean = mean(x);
    let std = variance(x).sqrt();
    let (m2, m3, m4) = central_moments(x);
    let needs_higher = n >= 3;
    if needs_higher && !(m2 > 0.0) {
        return Err(Error::Degenerate(
            "constant series has undefined skewness and kurtosis".into(),
        ));
    }
    let skewness = (n >= 3).then(|| m3 / m2.powf(1.5));
    let kurtosis = (n >= 4).then(|| m4 / (m2 * m2));
    Ok(SummaryStats {
        n,
        mean,
        std,
        skewness,
        kurtosis,
    })
}

/// `min { x : F̂ₙ(x) ≥ p }` over the sorted sample.
pub fn empirical_quantile(x: &[f64], p: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientData {
            what: "quantile sample",
            needed: 1,
            got: 0,
        });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("quantile level must lie in (0,1], got {p}")));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_quantile(&sorted, p))
}

/// Quantile of an already sorted sample: the `⌈np⌉`-th order statistic.
pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let np = n as f64 * p;
    // guard against np landing a hair above an integer through rounding
    let k = if (np - np.round()).abs() < 1e-9 * n as f64 {
        np.round() as usize
    } else {
        np.ceil() as usize
    };
    sorted[k.clamp(1, n) - 1]
}

/// Mean ranks (1-based), ties share the average of their positions.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            what: "paired observations",
            needed: 2,
            got: x.len(),
        });
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Degenerate("constant input has no correlation".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Kendall τ-a: `(n_c − n_d) / (n(n−1)/2)`; tied pairs count as neither.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    let mut s: i64 = 0;
    for i in 0..n {
        let (xi, yi) = (x[i], y[i]);
        for j in (i + 1)..n {
            let a = (x[j] - xi).partial_cmp(&0.0).map_or(0, |o| o as i64);
            let b = (y[j] - yi).partial_cmp(&0.0).map_or(0, |o| o as i64);
            s += a * b;
        }
    }
    Ok(s as f64 / (n as f64 * (n - 1) as f64 / 2.0))
}

/// Spearman `1 − 6Σd²/(n(n²−1))` on mean ranks.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let (rx, ry) = (ranks(x), ranks(y));
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelations {
    pub pearson: f64,
    pub kendall: f64,
    pub spearman: f64,
}

pub fn rank_correlations(x: &[f64], y: &[f64]) -> Result<RankCorrelations> {
    Ok(RankCorrelations {
        pearson: pearson(x, y)?,
        kendall: kendall_tau(x, y)?,
        spearman: spearman_rho(x, y)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_point_summary() {
        let s = summary_stats(&[-1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_abs_diff_eq!(s.std, 2f64.sqrt(), epsilon = 1e-15);
        assert!(s.skewness.is_none() && s.kurtosis.is_none());
    }

    #[test]
    fn constant_series_has_no_skewness() {
        assert!(matches!(
            summary_stats(&[2.0; 10]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn known_moments() {
        // symmetric, platykurtic
        let s = summary_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(s.skewness.unwrap(), 0.0, epsilon = 1e-15);
        // m2 = 1.25, m4 = 2.5625 → 1.64
        assert_abs_diff_eq!(s.kurtosis.unwrap(), 1.64, epsilon = 1e-12);
    }

    #[test]
    fn quantile_examples() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&x, 0.5).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&x, 1.0).unwrap(), 10.0);
        assert_eq!(empirical_quantile(&x, 0.95).unwrap(), 10.0);
        assert_eq!(empirical_quantile(&x, 0.9).unwrap(), 9.0);
        assert!(empirical_quantile(&x, 0.0).is_err());
        assert!(empirical_quantile(&x, 1.2).is_err());
    }

    #[test]
    fn perfect_correlations() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin() + i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let c = rank_correlations(&x, &y).unwrap();
        assert_abs_diff_eq!(c.pearson, 1.0, epsilon = 1e-12);
        assert_eq!(c.kendall, 1.0);
        assert_eq!(c.spearman, 1.0);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = rank_correlations(&x, &z).unwrap();
        assert_abs_diff_eq!(c.pearson, -1.0, epsilon = 1e-12);
        assert_eq!(c.kendall, -1.0);
        assert_eq!(c.spearman, -1.0);
    }

    #[test]
    fn correlation_errors() {
        assert!(matches!(
            rank_correlations(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(rank_correlations(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn mean_ranks_for_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn kendall_ties_count_as_neither() {
        // pairs: (1,2) tie in x; (1,3) conc; (2,3) conc → 2/3
        let t = kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(t, 2.0 / 3.0, epsilon = 1e-15);
    }

    fn two_pass_mean_std(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let c: f64 = x.iter().map(|v| v - m).sum::<f64>() / n;
        let m = m + c;
        let ss: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        (m, (ss / (n - 1.0)).sqrt())
    }

    proptest! {
        #[test]
        fn quantile_monotone_in_level(
            x in prop::collection::vec(-100.0f64..100.0, 1..60),
            a in 0.001f64..1.0,
            b in 0.001f64..1.0,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(empirical_quantile(&x, lo).unwrap() <= empirical_quantile(&x, hi).unwrap());
            let max = x.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert_eq!(empirical_quantile(&x, 1.0).unwrap(), max);
        }

        #[test]
        fn rank_measures_invariant_under_increasing_maps(
            pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let fx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let gy: Vec<f64> = y.iter().map(|v| v * v * v + 2.0 * v).collect();
            let t0 = kendall_tau(&x, &y).unwrap();
            let t1 = kendall_tau(&fx, &gy).unwrap();
            prop_assert!((t0 - t1).abs() < 1e-12);
            let s0 = spearman_rho(&x, &y).unwrap();
            let s1 = spearman_rho(&fx, &gy).unwrap();
            prop_assert!((s0 - s1).abs() < 1e-12);
        }

        #[test]
        fn mean_std_match_two_pass(x in prop::collection::vec(-1e3f64..1e3, 2..200)) {
            let s = summary_stats(&x);
            let (m, sd) = two_pass_mean_std(&x);
            match s {
                Ok(s) => {
                    prop_assert!((s.mean - m).abs() <= 1e-12 * m.abs().max(1.0));
                    prop_assert!((s.std - sd).abs() <= 1e-12 * sd.max(1e-300));
                }
                Err(_) => prop_assert!(x.iter().all(|v| *v == x[0])),
            }
        }
    }
}
