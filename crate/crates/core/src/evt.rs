//! Extreme-value fits: GEV on block maxima, GPD on threshold excesses, Hill
//! tail index, mean-excess curve, KS threshold selection and return levels.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dist::norm_ppf;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, Matrix};
use crate::optim::{nelder_mead, numerical_hessian, NelderMeadOptions};
use crate::series::{fingerprint, format_f64};
use crate::stats::{mean, variance};

/// Below this `|ξ|` the exponential/Gumbel limits are used.
pub const XI_ZERO: f64 = 1e-6;

/// One maximum per full block; a trailing partial block is dropped.
pub fn block_maxima(x: &[f64], block_size: usize) -> Result<Vec<f64>> {
    if block_size < 2 {
        return Err(invalid(format!("block size must be at least 2, got {block_size}")));
    }
    if x.len() < 2 * block_size {
        return Err(Error::InsufficientData {
            what: "observations for two full blocks",
            needed: 2 * block_size,
            got: x.len(),
        });
    }
    Ok(x.chunks_exact(block_size)
        .map(|b| b.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

// ---------------------------------------------------------------- GEV

/// `H_{ξ,μ,σ}(x)`.
pub fn gev_cdf(x: f64, xi: f64, mu: f64, sigma: f64) -> f64 {
    let y = (x - mu) / sigma;
    if xi.abs() < XI_ZERO {
        return (-(-y).exp()).exp();
    }
    let s = 1.0 + xi * y;
    if s <= 0.0 {
        return if xi > 0.0 { 0.0 } else { 1.0 };
    }
    (-(-(xi * y).ln_1p() / xi).exp()).exp()
}

/// Inverse of `gev_cdf`: `μ − (σ/ξ)[1 − (−ln p)^(−ξ)]`, `p ∈ (0, 1)`.
pub fn gev_quantile(p: f64, xi: f64, mu: f64, sigma: f64) -> f64 {
    let l = -(-p.ln()).ln();
    if xi.abs() < XI_ZERO {
        return mu + sigma * l;
    }
    mu + sigma / xi * (xi * l).exp_m1()
}

pub fn gev_ln_pdf(x: f64, xi: f64, mu: f64, sigma: f64) -> f64 {
    let y = (x - mu) / sigma;
    if xi.abs() < XI_ZERO {
        return -sigma.ln() - y - (-y).exp();
    }
    let s = 1.0 + xi * y;
    if s <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let l = (xi * y).ln_1p();
    -sigma.ln() - (1.0 + 1.0 / xi) * l - (-l / xi).exp()
}

fn gev_loglik(m: &[f64], xi: f64, mu: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    m.iter().map(|x| gev_ln_pdf(*x, xi, mu, sigma)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevFit {
    pub xi: f64,
    pub mu: f64,
    pub sigma: f64,
    pub loglik: f64,
    /// `[ξ, μ, σ]`; `None` when the observed information is not invertible.
    pub std_errors: Option<[f64; 3]>,
    pub block_size: Option<usize>,
    pub block_count: usize,
}

impl GevFit {
    pub fn cdf(&self, x: f64) -> f64 {
        gev_cdf(x, self.xi, self.mu, self.sigma)
    }
}

/// Maximum likelihood GEV fit on block maxima.
pub fn fit_gev(maxima: &[f64], block_size: Option<usize>) -> Result<GevFit> {
    let k = maxima.len();
    if k < 20 {
        return Err(Error::InsufficientData {
            what: "block maxima",
            needed: 20,
            got: k,
        });
    }
    if maxima.iter().any(|v| !v.is_finite()) {
        return Err(invalid("maxima contain non-finite values"));
    }
    let v = variance(maxima);
    if !(v > 0.0) {
        return Err(Error::Degenerate("constant maxima".into()));
    }
    // Gumbel moment start
    let s0 = (6.0 * v).sqrt() / std::f64::consts::PI;
    let m0 = mean(maxima) - 0.577_215_664_901_532_9 * s0;
    let scale = s0;
    let obj = |p: &[f64]| -gev_loglik(maxima, p[0], m0 + p[1] * scale, scale * p[2].exp()) / k as f64;
    let nm = NelderMeadOptions {
        initial_step: 0.1,
        f_tol: 1e-13,
        x_tol: 1e-10,
        max_iter: 5000,
    };
    let mut best: Option<crate::optim::Minimum> = None;
    for xi0 in [0.1, -0.1, 0.01, 0.4] {
        let r = nelder_mead(obj, &[xi0, 0.0, 0.0], nm);
        let r = nelder_mead(obj, &r.x, nm);
        if r.value.is_finite() && best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::Convergence("GEV likelihood never finite".into()))?;
    let (xi, mu, sigma) = (best.x[0], m0 + best.x[1] * scale, scale * best.x[2].exp());
    let loglik = gev_loglik(maxima, xi, mu, sigma);
    let negll = |p: &[f64]| -gev_loglik(maxima, p[0], p[1], p[2]);
    let std_errors = inverse_info_se(negll, &[xi, mu, sigma], &[1e-4, 1e-4 * scale, 1e-4 * sigma])
        .map(|se| [se[0], se[1], se[2]]);
    Ok(GevFit {
        xi,
        mu,
        sigma,
        loglik,
        std_errors,
        block_size,
        block_count: k,
    })
}

fn inverse_info_se<F: Fn(&[f64]) -> f64>(negll: F, x: &[f64], steps: &[f64]) -> Option<Vec<f64>> {
    let h = numerical_hessian(negll, x, Some(steps));
    if h.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let l = cholesky(&Matrix::from_rows(&h).ok()?).ok()?;
    let inv = cholesky_inverse(&l);
    Some((0..x.len()).map(|i| inv[(i, i)].sqrt()).collect())
}

/// Expected number of blocks between exceedances of `u`: `1/(1 − H(u))`.
pub fn return_level(fit: &GevFit, u: f64) -> Result<f64> {
    let h = fit.cdf(u);
    if !(h < 1.0) {
        return Err(invalid(format!("level {u} lies at or beyond the right end of the fitted law")));
    }
    Ok(1.0 / (1.0 - h))
}

// ---------------------------------------------------------------- GPD

/// GPD CDF of an excess `e ≥ 0`.
pub fn gpd_cdf(e: f64, xi: f64, beta: f64) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    if xi.abs() < XI_ZERO {
        return -(-e / beta).exp_m1();
    }
    let s = 1.0 + xi * e / beta;
    if s <= 0.0 {
        return 1.0;
    }
    -(-(xi * e / beta).ln_1p() / xi).exp_m1()
}

/// GPD quantile of the excess distribution, `p ∈ [0, 1)`.
pub fn gpd_quantile(p: f64, xi: f64, beta: f64) -> f64 {
    let l = -(-p).ln_1p();
    if xi.abs() < XI_ZERO {
        return beta * l;
    }
    beta * (xi * l).exp_m1() / xi
}

/// `−N_u ln β − (1 + 1/ξ) Σ ln(1 + ξ e_i/β)`.
pub fn gpd_loglik(excesses: &[f64], xi: f64, beta: f64) -> f64 {
    if !(beta > 0.0) {
        return f64::NEG_INFINITY;
    }
    let n = excesses.len() as f64;
    if xi.abs() < XI_ZERO {
        return -n * beta.ln() - excesses.iter().sum::<f64>() / beta;
    }
    let mut s = 0.0;
    for e in excesses {
        let t = xi * e / beta;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        s += t.ln_1p();
    }
    -n * beta.ln() - (1.0 + 1.0 / xi) * s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub xi: f64,
    pub beta: f64,
    pub threshold: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    pub loglik: f64,
    /// `[ξ, β]`; withheld when `ξ̂ ≤ −0.5` (irregular likelihood) or the
    /// observed information is not invertible.
    pub std_errors: Option<[f64; 2]>,
    /// Set when `ξ̂ ≤ −0.5`.
    pub irregular: bool,
    /// Fingerprint of the sample the fit was computed from.
    pub data_fingerprint: String,
}

/// Maximum likelihood GPD fit on the excesses `x − u` of points above `u`.
pub fn fit_gpd(losses: &[f64], u: f64) -> Result<GpdFit> {
    if !u.is_finite() {
        return Err(invalid("threshold must be finite"));
    }
    let max = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if u >= max {
        return Err(invalid(format!("threshold {u} is at or above the sample maximum {max}")));
    }
    let excesses: Vec<f64> = losses.iter().filter(|x| **x > u).map(|x| x - u).collect();
    if excesses.len() < 30 {
        return Err(Error::InsufficientData {
            what: "threshold exceedances",
            needed: 30,
            got: excesses.len(),
        });
    }
    let m = mean(&excesses);
    let v = variance(&excesses);
    let obj = |p: &[f64]| -gpd_loglik(&excesses, p[0], m * p[1].exp()) / excesses.len() as f64;
    let mut starts = vec![[0.0, 0.0]];
    if v > 0.0 {
        // method of moments
        let r = m * m / v;
        let xi0 = (0.5 * (1.0 - r)).clamp(-0.4, 0.9);
        let b0 = 0.5 * m * (r + 1.0);
        starts.push([xi0, (b0 / m).ln()]);
    }
    starts.push([0.3, 0.0]);
    starts.push([-0.2, 0.0]);
    let nm = NelderMeadOptions {
        initial_step: 0.1,
        f_tol: 1e-14,
        x_tol: 1e-11,
        max_iter: 5000,
    };
    let best = starts
        .iter()
        .map(|s| {
            let r = nelder_mead(obj, s, nm);
            nelder_mead(obj, &r.x, nm)
        })
        .filter(|r| r.value.is_finite())
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::Convergence("GPD likelihood never finite".into()))?;
    let (xi, beta) = (best.x[0], m * best.x[1].exp());
    let irregular = xi <= -0.5;
    let std_errors = if irregular {
        None
    } else {
        let negll = |p: &[f64]| -gpd_loglik(&excesses, p[0], p[1]);
        inverse_info_se(negll, &[xi, beta], &[1e-4, 1e-4 * beta]).map(|s| [s[0], s[1]])
    };
    Ok(GpdFit {
        xi,
        beta,
        threshold: u,
        n_exceed: excesses.len(),
        n_total: losses.len(),
        loglik: gpd_loglik(&excesses, xi, beta),
        std_errors,
        irregular,
        data_fingerprint: fingerprint(losses),
    })
}

// ---------------------------------------------------------------- Hill

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillFit {
    pub alpha_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub threshold: f64,
    pub n_tail: usize,
}

/// Hill estimator on tail points, all of which must exceed `u > 0`:
/// `1/α̂ = mean(ln x_i − ln u)`, 95% interval `α̂(1 ± z_{0.975}/√N)`.
pub fn hill_estimator(tail: &[f64], u: f64) -> Result<HillFit> {
    if !(u > 0.0) {
        return Err(invalid(format!("Hill threshold must be positive, got {u}")));
    }
    if tail.len() < 10 {
        return Err(Error::InsufficientData {
            what: "tail points",
            needed: 10,
            got: tail.len(),
        });
    }
    if let Some(bad) = tail.iter().find(|x| !(**x > u)) {
        return Err(invalid(format!("tail point {bad} does not exceed the threshold {u}")));
    }
    let lu = u.ln();
    let s: f64 = tail.iter().map(|x| x.ln() - lu).sum();
    let n = tail.len() as f64;
    let alpha_hat = n / s;
    let half = norm_ppf(0.975) / n.sqrt();
    Ok(HillFit {
        alpha_hat,
        ci_low: alpha_hat * (1.0 - half),
        ci_high: alpha_hat * (1.0 + half),
        threshold: u,
        n_tail: tail.len(),
    })
}

/// Hill estimator on the points of `x` strictly above `u`.
pub fn hill_above(x: &[f64], u: f64) -> Result<HillFit> {
    let tail: Vec<f64> = x.iter().cloned().filter(|v| *v > u).collect();
    hill_estimator(&tail, u)
}

// ---------------------------------------------------------------- diagnostics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanExcessPoint {
    pub u: f64,
    pub mean_excess: f64,
    pub n_exceed: usize,
    /// Fewer than five exceedances.
    pub sparse: bool,
}

/// `e_n(u) = Σ(x_i − u)⁺ / N_u` at each grid threshold.
pub fn mean_excess_curve(x: &[f64], grid: &[f64]) -> Result<Vec<MeanExcessPoint>> {
    if grid.is_empty() {
        return Err(invalid("threshold grid is empty"));
    }
    if x.is_empty() {
        return Err(Error::InsufficientData {
            what: "mean-excess sample",
            needed: 1,
            got: 0,
        });
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    // suffix sums for O(log n) evaluation per grid point
    let mut suffix = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = suffix[i + 1] + sorted[i];
    }
    grid.iter()
        .map(|&u| {
            let first = sorted.partition_point(|v| *v <= u);
            let n_u = sorted.len() - first;
            if n_u == 0 {
                return Err(invalid(format!("threshold {u} has no exceedances")));
            }
            Ok(MeanExcessPoint {
                u,
                mean_excess: suffix[first] / n_u as f64 - u,
                n_exceed: n_u,
                sparse: n_u < 5,
            })
        })
        .collect()
}

/// Writes `u,mean_excess,n_exceed,sparse` rows for external plotting.
pub fn write_mean_excess<W: Write>(curve: &[MeanExcessPoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["u", "mean_excess", "n_exceed", "sparse"])?;
    for p in curve {
        wtr.write_record([format_f64(p.u), format_f64(p.mean_excess), p.n_exceed.to_string(), p.sparse.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub u: f64,
    pub ks_distance: f64,
    /// Pareto tail index `n / Σ ln(x_i/u)` (the power-law density exponent
    /// minus one).
    pub alpha_hat: f64,
    pub n_tail: usize,
    pub candidates: usize,
}

/// KS-distance minimizing threshold. Candidates are every `step`-th positive
/// order statistic leaving at least `min_tail` points at or above it, with
/// `step = max(5, ⌈n₊/2000⌉)`; each tail gets the closed-form Pareto MLE.
pub fn select_threshold_ks(x: &[f64], min_tail: usize) -> Result<ThresholdSelection> {
    if min_tail < 2 {
        return Err(invalid("min_tail must be at least 2"));
    }
    if x.len() < 2 * min_tail {
        return Err(Error::InsufficientData {
            what: "observations (twice min_tail)",
            needed: 2 * min_tail,
            got: x.len(),
        });
    }
    let mut pos: Vec<f64> = x.iter().cloned().filter(|v| *v > 0.0 && v.is_finite()).collect();
    pos.sort_by(f64::total_cmp);
    let n = pos.len();
    if n < min_tail {
        return Err(Error::InsufficientData {
            what: "positive observations",
            needed: min_tail,
            got: n,
        });
    }
    let logs: Vec<f64> = pos.iter().map(|v| v.ln()).collect();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + logs[i];
    }
    let step = 5usize.max(n.div_ceil(2000));
    let last = n - min_tail;
    let mut best: Option<ThresholdSelection> = None;
    let mut candidates = 0;
    let mut i = 0;
    while i <= last {
        // skip duplicated values so the tail starts at the first copy
        if i > 0 && pos[i] == pos[i - 1] {
            i += 1;
            continue;
        }
        candidates += 1;
        let m = n - i;
        let lu = logs[i];
        let s = suffix[i] - m as f64 * lu;
        if s > 0.0 {
            let alpha = m as f64 / s;
            let mf = m as f64;
            let mut d: f64 = 0.0;
            for (j, l) in logs[i..].iter().enumerate() {
                let f = -(-alpha * (l - lu)).exp_m1();
                d = d.max((j + 1) as f64 / mf - f).max(f - j as f64 / mf);
            }
            if best.as_ref().is_none_or(|b| d < b.ks_distance) {
                best = Some(ThresholdSelection {
                    u: pos[i],
                    ks_distance: d,
                    alpha_hat: alpha,
                    n_tail: m,
                    candidates: 0,
                });
            }
        }
        i += step;
    }
    let mut best = best.ok_or_else(|| Error::Degenerate("no candidate threshold has a spread tail".into()))?;
    best.candidates = candidates;
    Ok(best)
}
