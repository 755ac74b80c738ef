//! VaR violation series, Kupiec unconditional coverage and the
//! Engle-Manganelli dynamic quantile test.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dist::{chi2_sf, t_ppf};
use crate::error::{invalid, Error, Result};
use crate::htest::ols_fit;
use crate::linalg::Matrix;
use crate::series::format_f64;
use crate::stats::{mean, sorted_quantile, variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationSeries {
    pub indicators: Vec<u8>,
    /// Nominal violation probability `1 − q`.
    pub p: f64,
    pub var_path: Vec<f64>,
    pub losses: Vec<f64>,
    pub n_violations: usize,
}

impl ViolationSeries {
    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }

    /// Observed violation frequency.
    pub fn empirical_coverage(&self) -> f64 {
        self.n_violations as f64 / self.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "loss", "var", "violation"])?;
        for i in 0..self.len() {
            wtr.write_record([
                i.to_string(),
                format_f64(self.losses[i]),
                format_f64(self.var_path[i]),
                self.indicators[i].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("coverage p must lie in (0, 1), got {p}")))
    }
}

/// `I_t = 1` iff `loss_t > VaR_t`.
pub fn violation_series(losses: &[f64], var_path: &[f64], p: f64) -> Result<ViolationSeries> {
    check_p(p)?;
    if losses.len() != var_path.len() {
        return Err(Error::LengthMismatch {
            left: losses.len(),
            right: var_path.len(),
        });
    }
    if losses.is_empty() {
        return Err(Error::InsufficientData {
            what: "backtest observations",
            needed: 1,
            got: 0,
        });
    }
    let indicators: Vec<u8> = losses.iter().zip(var_path).map(|(l, v)| u8::from(l > v)).collect();
    let n_violations = indicators.iter().map(|&i| i as usize).sum();
    Ok(ViolationSeries {
        indicators,
        p,
        var_path: var_path.to_vec(),
        losses: losses.to_vec(),
        n_violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestKind {
    KupiecUc,
    EmDq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub test: BacktestKind,
    #[serde(rename = "stat")]
    pub statistic: f64,
    pub dof: usize,
    #[serde(rename = "p")]
    pub p_value: f64,
    pub n_violations: usize,
    pub n_obs: usize,
    pub coverage: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lags: Option<usize>,
}

impl BacktestResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `LR_uc = −2 log[(1−p)^T₀ p^T₁ / ((1−π̂)^T₀ π̂^T₁)]` against χ²(1).
pub fn kupiec_uc(v: &ViolationSeries) -> Result<BacktestResult> {
    check_p(v.p)?;
    if v.is_empty() {
        return Err(Error::InsufficientData {
            what: "backtest observations",
            needed: 1,
            got: 0,
        });
    }
    let t1 = v.n_violations as f64;
    let t0 = v.len() as f64 - t1;
    let pi = t1 / (t0 + t1);
    let lr = -2.0 * (xlogy(t0, 1.0 - v.p) + xlogy(t1, v.p) - xlogy(t0, 1.0 - pi) - xlogy(t1, pi));
    let lr = lr.max(0.0);
    Ok(BacktestResult {
        test: BacktestKind::KupiecUc,
        statistic: lr,
        dof: 1,
        p_value: chi2_sf(lr, 1.0),
        n_violations: v.n_violations,
        n_obs: v.len(),
        coverage: v.p,
        lags: None,
    })
}

/// Regresses `Hit_t = I_t − p` on an intercept, `K` lagged hits and `K`
/// lagged VaR values (standardized), then `DQ = Φ̂′Z′ZΦ̂ / (p(1−p))` against
/// χ²(2K+1).
pub fn em_dq(v: &ViolationSeries, lags: usize) -> Result<BacktestResult> {
    check_p(v.p)?;
    if lags == 0 {
        return Err(invalid("DQ test needs at least one lag"));
    }
    let t = v.len();
    if t <= 2 * lags + 5 {
        return Err(Error::InsufficientData {
            what: "backtest observations for the DQ test",
            needed: 2 * lags + 6,
            got: t,
        });
    }
    let hit: Vec<f64> = v.indicators.iter().map(|&i| i as f64 - v.p).collect();
    let sd = variance(&v.var_path).sqrt();
    if !(sd > 0.0) {
        return Err(Error::RankDeficient(lags + 1));
    }
    let m = mean(&v.var_path);
    let var_std: Vec<f64> = v.var_path.iter().map(|x| (x - m) / sd).collect();

    let n = t - lags;
    let mut cols = Vec::with_capacity(2 * lags);
    for k in 1..=lags {
        cols.push(hit[lags - k..t - k].to_vec());
    }
    for k in 1..=lags {
        cols.push(var_std[lags - k..t - k].to_vec());
    }
    let y = &hit[lags..];
    let fit = ols_fit(y, &Matrix::from_columns(&cols)?, true)?;
    let explained: f64 = y.iter().zip(&fit.residuals).map(|(a, e)| (a - e) * (a - e)).sum();
    let dq = explained / (v.p * (1.0 - v.p));
    let dof = 2 * lags + 1;
    Ok(BacktestResult {
        test: BacktestKind::EmDq,
        statistic: dq,
        dof,
        p_value: chi2_sf(dq, dof as f64),
        n_violations: v.n_violations,
        n_obs: n,
        coverage: v.p,
        lags: Some(lags),
    })
}

/// Expanding-window VaR model for rolling backtests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum RollingMethod {
    Historical,
    Gaussian,
    Student { nu: f64 },
}

pub const MIN_WINDOW: usize = 250;

/// VaR at `t` estimated from `losses[..t]` for `t = window..T`. Returns the
/// path aligned with `losses[window..]`.
pub fn rolling_var(losses: &[f64], q: f64, method: RollingMethod, window: usize) -> Result<Vec<f64>> {
    if !(0.5..1.0).contains(&q) {
        return Err(invalid(format!("confidence level must lie in [0.5, 1), got {q}")));
    }
    if window < MIN_WINDOW {
        return Err(invalid(format!("rolling window must be at least {MIN_WINDOW}, got {window}")));
    }
    if losses.len() <= window {
        return Err(Error::InsufficientData {
            what: "losses beyond the initial window",
            needed: window + 1,
            got: losses.len(),
        });
    }
    if losses.iter().any(|x| !x.is_finite()) {
        return Err(invalid("losses contain non-finite values"));
    }
    let factor = match method {
        RollingMethod::Historical => 0.0,
        RollingMethod::Gaussian => crate::dist::norm_ppf(q),
        RollingMethod::Student { nu } => {
            if !(nu > 2.0) {
                return Err(invalid(format!("Student VaR needs nu > 2, got {nu}")));
            }
            t_ppf(q, nu) * ((nu - 2.0) / nu).sqrt()
        }
    };
    let mut sorted: Vec<f64> = losses[..window].to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut s1, mut s2) = (0.0, 0.0);
    let m0 = mean(&losses[..window]);
    for x in &losses[..window] {
        s1 += x - m0;
        s2 += (x - m0) * (x - m0);
    }
    let mut out = Vec::with_capacity(losses.len() - window);
    for t in window..losses.len() {
        let n = t as f64;
        let value = match method {
            RollingMethod::Historical => sorted_quantile(&sorted, q),
            _ => {
                // shifted sums keep the running variance accurate
                let mu = m0 + s1 / n;
                let var = (s2 - s1 * s1 / n) / (n - 1.0);
                mu + factor * var.max(0.0).sqrt()
            }
        };
        out.push(value);
        let x = losses[t];
        let pos = sorted.partition_point(|v| *v < x);
        sorted.insert(pos, x);
        s1 += x - m0;
        s2 += (x - m0) * (x - m0);
    }
    Ok(out)
}

/// Rolling VaR, violation series and both backtests in one pass.
pub fn rolling_backtest(
    losses: &[f64],
    q: f64,
    method: RollingMethod,
    window: usize,
    lags: usize,
) -> Result<(ViolationSeries, BacktestResult, BacktestResult)> {
    let path = rolling_var(losses, q, method, window)?;
    let v = violation_series(&losses[window..], &path, 1.0 - q)?;
    let uc = kupiec_uc(&v)?;
    let dq = em_dq(&v, lags)?;
    Ok((v, uc, dq))
}
