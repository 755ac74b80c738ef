//! OLS kernel, residual diagnostics, normality tests, unit-root and
//! cointegration tests, and Monte Carlo calibration of non-standard nulls.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{chi2_ppf, chi2_sf, kolmogorov_sf, norm_cdf};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_inverse, cholesky_solve, cholesky_with_tol, Matrix};
use crate::mc::replicate;
use crate::rng::RngStream;
use crate::stats::{central_moments, mean, sorted_quantile};

/// Significance levels reported in critical-value maps.
pub const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

pub fn level_key(level: f64) -> String {
    format!("{}%", (level * 100.0).round() as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfVariant {
    /// No deterministic terms.
    N,
    /// Constant.
    C,
    /// Constant and linear trend.
    Ct,
}

impl std::str::FromStr for DfVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "nc" | "none" => Ok(DfVariant::N),
            "c" => Ok(DfVariant::C),
            "ct" => Ok(DfVariant::Ct),
            _ => Err(invalid(format!("unknown regression variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefDist {
    Chi2,
    StudentT,
    Normal,
    Ks,
    DickeyFuller { variant: DfVariant },
    McEmpirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: String,
    #[serde(rename = "stat")]
    pub statistic: f64,
    pub dist: RefDist,
    pub dof: Option<f64>,
    #[serde(rename = "p")]
    pub p_value: Option<f64>,
    pub critical_values: Option<BTreeMap<String, f64>>,
    #[serde(rename = "reject")]
    pub reject_at: Option<BTreeMap<String, bool>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lag: Option<usize>,
    pub n_obs: usize,
}

impl TestResult {
    /// Decision at `level`: the critical-value map when it has the level,
    /// otherwise `p < level`.
    pub fn rejects(&self, level: f64) -> Option<bool> {
        if let Some(r) = self.reject_at.as_ref().and_then(|m| m.get(&level_key(level))) {
            return Some(*r);
        }
        self.p_value.map(|p| p < level)
    }

    fn chi2(test: &str, statistic: f64, k: f64, n_obs: usize) -> Self {
        let mut cv = BTreeMap::new();
        let mut rej = BTreeMap::new();
        for l in LEVELS {
            let c = chi2_ppf(1.0 - l, k);
            cv.insert(level_key(l), c);
            rej.insert(level_key(l), statistic > c);
        }
        TestResult {
            test: test.into(),
            statistic,
            dist: RefDist::Chi2,
            dof: Some(k),
            p_value: Some(chi2_sf(statistic, k).clamp(0.0, 1.0)),
            critical_values: Some(cv),
            reject_at: Some(rej),
            lag: None,
            n_obs,
        }
    }

    /// Left-tailed decision against a critical-value map.
    fn left_tailed(
        test: &str,
        statistic: f64,
        dist: RefDist,
        cv: BTreeMap<String, f64>,
        p_value: Option<f64>,
        n_obs: usize,
    ) -> Self {
        let rej = cv.iter().map(|(k, c)| (k.clone(), statistic < *c)).collect();
        TestResult {
            test: test.into(),
            statistic,
            dist,
            dof: None,
            p_value,
            critical_values: Some(cv),
            reject_at: Some(rej),
            lag: None,
            n_obs,
        }
    }
}

// ---------------------------------------------------------------- OLS

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// Intercept first when requested, then the columns of `X` in order.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Centered with an intercept, uncentered without.
    pub r_squared: f64,
    pub ssr: f64,
    /// `SSR / (T − k)`.
    pub sigma2: f64,
}

impl OlsFit {
    pub fn t_stat(&self, i: usize) -> f64 {
        self.coefficients[i] / self.std_errors[i]
    }
}

const RANK_TOL: f64 = 1e-10;

/// Least squares of `y` on the columns of `x`, optionally prepending a
/// constant column.
pub fn ols_fit(y: &[f64], x: &Matrix, intercept: bool) -> Result<OlsFit> {
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.rows(),
        });
    }
    let design = if intercept {
        let mut d = Matrix::zeros(x.rows(), x.cols() + 1);
        for i in 0..x.rows() {
            d[(i, 0)] = 1.0;
            for j in 0..x.cols() {
                d[(i, j + 1)] = x[(i, j)];
            }
        }
        d
    } else {
        x.clone()
    };
    ols_design(y, &design, intercept)
}

fn ols_design(y: &[f64], x: &Matrix, centered: bool) -> Result<OlsFit> {
    let (t, k) = (x.rows(), x.cols());
    if k == 0 {
        return Err(invalid("design matrix has no columns"));
    }
    if t <= k {
        return Err(Error::InsufficientData {
            what: "regression observations (more than regressors)",
            needed: k + 1,
            got: t,
        });
    }
    if y.iter().any(|v| !v.is_finite()) || x.to_rows().iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("regression data contain non-finite values"));
    }
    // scale columns to unit norm so the pivot test measures collinearity
    let mut scale = vec![0.0; k];
    for i in 0..t {
        for (s, v) in scale.iter_mut().zip(x.row(i)) {
            *s += v * v;
        }
    }
    for (j, s) in scale.iter_mut().enumerate() {
        *s = s.sqrt();
        if *s == 0.0 {
            return Err(Error::RankDeficient(j));
        }
    }
    let mut xs = x.clone();
    for i in 0..t {
        for j in 0..k {
            xs[(i, j)] /= scale[j];
        }
    }
    let gram = xs.gram();
    let l = match cholesky_with_tol(&gram, RANK_TOL) {
        Ok(l) => l,
        Err(Error::NotPositiveDefinite { column, .. }) => return Err(Error::RankDeficient(column)),
        Err(e) => return Err(e),
    };
    let mut b = cholesky_solve(&l, &xs.t_mul_vec(y));
    let residual = |b: &[f64]| -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, yi)| yi - xs.row(i).iter().zip(b).map(|(a, c)| a * c).sum::<f64>())
            .collect()
    };
    // one round of iterative refinement
    let mut e = residual(&b);
    let db = cholesky_solve(&l, &xs.t_mul_vec(&e));
    b.iter_mut().zip(&db).for_each(|(a, d)| *a += d);
    e = residual(&b);

    let ssr: f64 = e.iter().map(|v| v * v).sum();
    let sst: f64 = if centered {
        let m = mean(y);
        y.iter().map(|v| (v - m) * (v - m)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let sigma2 = ssr / (t - k) as f64;
    let inv = cholesky_inverse(&l);
    let coefficients: Vec<f64> = b.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let std_errors: Vec<f64> = (0..k)
        .map(|j| (sigma2 * inv[(j, j)]).max(0.0).sqrt() / scale[j])
        .collect();
    Ok(OlsFit {
        coefficients,
        std_errors,
        residuals: e,
        r_squared,
        ssr,
        sigma2,
    })
}

// ---------------------------------------------------------------- diagnostics

fn demeaned_with_variance(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = mean(x);
    let d: Vec<f64> = x.iter().map(|v| v - m).collect();
    let ss: f64 = d.iter().map(|v| v * v).sum();
    if !(ss > 0.0) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    Ok((d, ss))
}

/// Sample autocorrelations `τ̂_1..τ̂_h`.
pub fn autocorrelations(x: &[f64], h: usize) -> Result<Vec<f64>> {
    let (d, ss) = demeaned_with_variance(x)?;
    Ok((1..=h)
        .map(|k| d[k..].iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / ss)
        .collect())
}

/// Ljung-Box `Q = T(T+2) Σ τ̂_k²/(T−k)` against `χ²(h − model_dof)`.
pub fn ljung_box(x: &[f64], h: usize, model_dof: usize) -> Result<TestResult> {
    let t = x.len();
    if h == 0 || h >= t {
        return Err(invalid(format!("lag count must satisfy 1 <= h < T, got h={h}, T={t}")));
    }
    if h <= model_dof {
        return Err(invalid(format!(
            "degrees of freedom h - model_dof must be positive, got {h} - {model_dof}"
        )));
    }
    let tau = autocorrelations(x, h)?;
    let tf = t as f64;
    let q = tf
        * (tf + 2.0)
        * tau
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (tf - (i + 1) as f64))
            .sum::<f64>();
    let mut r = TestResult::chi2("ljung_box", q, (h - model_dof) as f64, t);
    r.lag = Some(h);
    Ok(r)
}

/// Jarque-Bera `T/6·S² + T/24·(K−3)²` against `χ²(2)`.
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    let t = x.len();
    if t < 8 {
        return Err(Error::InsufficientData {
            what: "Jarque-Bera observations",
            needed: 8,
            got: t,
        });
    }
    let (m2, m3, m4) = central_moments(x);
    if !(m2 > 0.0) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let s = m3 / m2.powf(1.5);
    let k = m4 / (m2 * m2);
    let tf = t as f64;
    let jb = tf / 6.0 * s * s + tf / 24.0 * (k - 3.0) * (k - 3.0);
    Ok(TestResult::chi2("jarque_bera", jb, 2.0, t))
}

fn sorted_copy(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(invalid("sample contains NaN"));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `sup_x |F̂_a(x) − F̂_b(x)|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let (sa, sb) = (sorted_copy(a)?, sorted_copy(b)?);
    let (n, m) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov with the asymptotic Kolmogorov p-value at
/// `√(nm/(n+m))·D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData {
            what: "KS sample",
            needed: 1,
            got: 0,
        });
    }
    let d = ks_distance(a, b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let ne = (n * m / (n + m)).sqrt();
    Ok(ks_result("ks_two_sample", d, ne, a.len() + b.len()))
}

/// `sup_x |F̂(x) − F(x)|` for a continuous reference CDF.
pub fn ks_statistic_one_sample<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> Result<f64> {
    let s = sorted_copy(x)?;
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |d: f64, (i, &v)| {
        let f = cdf(v);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

pub fn ks_one_sample<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> Result<TestResult> {
    if x.is_empty() {
        return Err(Error::InsufficientData {
            what: "KS sample",
            needed: 1,
            got: 0,
        });
    }
    let d = ks_statistic_one_sample(x, cdf)?;
    Ok(ks_result("ks_one_sample", d, (x.len() as f64).sqrt(), x.len()))
}

fn ks_result(test: &str, d: f64, ne: f64, n_obs: usize) -> TestResult {
    // asymptotic critical values of √n·D
    let asym = [(0.01, 1.627_61), (0.05, 1.358_10), (0.10, 1.223_85)];
    let cv: BTreeMap<String, f64> = asym.iter().map(|(l, c)| (level_key(*l), c / ne)).collect();
    let rej = cv.iter().map(|(k, c)| (k.clone(), d > *c)).collect();
    TestResult {
        test: test.into(),
        statistic: d,
        dist: RefDist::Ks,
        dof: None,
        p_value: Some(kolmogorov_sf(ne * d)),
        critical_values: Some(cv),
        reject_at: Some(rej),
        lag: None,
        n_obs,
    }
}

fn lilliefors_distance(x: &[f64]) -> Result<f64> {
    let (d, ss) = demeaned_with_variance(x)?;
    let sd = (ss / (x.len() - 1) as f64).sqrt();
    let z: Vec<f64> = d.iter().map(|v| v / sd).collect();
    ks_statistic_one_sample(&z, norm_cdf)
}

/// Simulated null distribution of the Lilliefors statistic at sample size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LillieforsTable {
    pub n: usize,
    pub runs: usize,
    sorted: Vec<f64>,
}

impl LillieforsTable {
    pub fn quantile(&self, p: f64) -> f64 {
        sorted_quantile(&self.sorted, p)
    }

    /// `(#{D* ≥ d} + 1)/(runs + 1)`.
    pub fn p_value(&self, d: f64) -> f64 {
        let below = self.sorted.partition_point(|v| *v < d);
        ((self.sorted.len() - below) as f64 + 1.0) / (self.runs as f64 + 1.0)
    }
}

pub fn lilliefors_table(n: usize, runs: usize, stream: &RngStream) -> Result<LillieforsTable> {
    check_runs(runs)?;
    if n < 5 {
        return Err(Error::InsufficientData {
            what: "Lilliefors sample size",
            needed: 5,
            got: n,
        });
    }
    let mut sorted = replicate(stream, runs, |_, s| {
        let x: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        lilliefors_distance(&x).unwrap_or(0.0)
    });
    sorted.sort_by(f64::total_cmp);
    Ok(LillieforsTable { n, runs, sorted })
}

/// Lilliefors normality test with critical values simulated at the sample
/// size.
pub fn lilliefors(x: &[f64], runs: usize, stream: &RngStream) -> Result<TestResult> {
    if x.len() < 5 {
        return Err(Error::InsufficientData {
            what: "Lilliefors observations",
            needed: 5,
            got: x.len(),
        });
    }
    lilliefors_distance(x)?;
    let table = lilliefors_table(x.len(), runs, stream)?;
    lilliefors_with_table(x, &table)
}

pub fn lilliefors_with_table(x: &[f64], table: &LillieforsTable) -> Result<TestResult> {
    if x.len() != table.n {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: table.n,
        });
    }
    let d = lilliefors_distance(x)?;
    let cv: BTreeMap<String, f64> = LEVELS
        .iter()
        .map(|l| (level_key(*l), table.quantile(1.0 - l)))
        .collect();
    let rej = cv.iter().map(|(k, c)| (k.clone(), d > *c)).collect();
    Ok(TestResult {
        test: "lilliefors".into(),
        statistic: d,
        dist: RefDist::McEmpirical,
        dof: None,
        p_value: Some(table.p_value(d)),
        critical_values: Some(cv),
        reject_at: Some(rej),
        lag: None,
        n_obs: x.len(),
    })
}

/// Engle's LM test: regress `e²_t` on a constant and `e²_{t−1..t−lags}`;
/// statistic `(T − lags)·R²` against `χ²(lags)`.
pub fn arch_lm(residuals: &[f64], lags: usize) -> Result<TestResult> {
    let t = residuals.len();
    if lags == 0 {
        return Err(invalid("ARCH-LM needs at least one lag"));
    }
    if t <= lags + 1 {
        return Err(Error::InsufficientData {
            what: "ARCH-LM observations (more than lags + 1)",
            needed: lags + 2,
            got: t,
        });
    }
    let e2: Vec<f64> = residuals.iter().map(|v| v * v).collect();
    let n = t - lags;
    let y = &e2[lags..];
    let mut x = Matrix::zeros(n, lags);
    for i in 0..n {
        for j in 0..lags {
            x[(i, j)] = e2[lags + i - j - 1];
        }
    }
    let m = mean(y);
    if y.iter().all(|v| (v - m).abs() <= 1e-15 * m.abs().max(1e-300)) {
        return Err(Error::Degenerate("squared residuals are constant".into()));
    }
    let fit = ols_fit(y, &x, true)?;
    let mut r = TestResult::chi2("arch_lm", n as f64 * fit.r_squared, lags as f64, t);
    r.lag = Some(lags);
    Ok(r)
}

/// `d = Σ(e_t − e_{t−1})² / Σe_t²`.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientData {
            what: "Durbin-Watson residuals",
            needed: 2,
            got: residuals.len(),
        });
    }
    let den: f64 = residuals.iter().map(|v| v * v).sum();
    if !(den > 0.0) {
        return Err(Error::Degenerate("all residuals are zero".into()));
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((num / den).clamp(0.0, 4.0))
}

// ---------------------------------------------------------------- unit roots

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagSelection {
    Fixed,
    Aic,
    Bic,
}

impl std::str::FromStr for LagSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(LagSelection::Fixed),
            "aic" => Ok(LagSelection::Aic),
            "bic" => Ok(LagSelection::Bic),
            _ => Err(invalid(format!("unknown lag selection {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfOptions {
    pub variant: DfVariant,
    /// `None` uses `⌊12·(T/100)^0.25⌋`.
    pub max_lag: Option<usize>,
    pub selection: LagSelection,
}

impl Default for AdfOptions {
    fn default() -> Self {
        Self {
            variant: DfVariant::C,
            max_lag: None,
            selection: LagSelection::Bic,
        }
    }
}

pub fn default_max_lag(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25)).floor() as usize
}

fn deterministic_count(v: DfVariant) -> usize {
    match v {
        DfVariant::N => 0,
        DfVariant::C => 1,
        DfVariant::Ct => 2,
    }
}

/// Regression of `Δy_t` on `y_{t−1}`, deterministic terms and `p` lagged
/// differences, over the differences with index `start..`. Column 0 is the
/// lagged level.
fn df_regression(y: &[f64], variant: DfVariant, p: usize, start: usize) -> Result<OlsFit> {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let n = dy.len() - start;
    let k = 1 + deterministic_count(variant) + p;
    let mut x = Matrix::zeros(n, k);
    for r in 0..n {
        let t = start + r;
        x[(r, 0)] = y[t];
        let mut c = 1;
        if variant != DfVariant::N {
            x[(r, c)] = 1.0;
            c += 1;
        }
        if variant == DfVariant::Ct {
            x[(r, c)] = (t + 1) as f64;
            c += 1;
        }
        for i in 1..=p {
            x[(r, c)] = dy[t - i];
            c += 1;
        }
    }
    ols_design(&dy[start..], &x, variant != DfVariant::N)
}

/// Dickey-Fuller t-ratio on `γ` for a fixed lag order.
pub fn df_statistic(y: &[f64], variant: DfVariant, lag: usize) -> Result<f64> {
    if y.len() < lag + 4 + deterministic_count(variant) {
        return Err(Error::InsufficientData {
            what: "Dickey-Fuller observations",
            needed: lag + 4 + deterministic_count(variant),
            got: y.len(),
        });
    }
    Ok(df_regression(y, variant, lag, lag)?.t_stat(0))
}

fn select_lag(y: &[f64], variant: DfVariant, max_lag: usize, sel: LagSelection) -> Result<usize> {
    if sel == LagSelection::Fixed || max_lag == 0 {
        return Ok(max_lag);
    }
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_lag {
        // common estimation sample for every candidate
        let fit = df_regression(y, variant, p, max_lag)?;
        let n = fit.residuals.len() as f64;
        let k = (1 + deterministic_count(variant) + p) as f64;
        let penalty = match sel {
            LagSelection::Aic => 2.0 * k,
            _ => k * n.ln(),
        };
        let ic = n * (fit.ssr / n).ln() + penalty;
        if ic < best.0 {
            best = (ic, p);
        }
    }
    Ok(best.1)
}

/// Built-in critical values: the standard table for variant `n`, MacKinnon
/// response surfaces for `c` and `ct`.
pub fn df_critical_values(variant: DfVariant, t: usize) -> BTreeMap<String, f64> {
    let t = t as f64;
    let surface = |c: [f64; 4]| c[0] + c[1] / t + c[2] / (t * t) + c[3] / (t * t * t);
    let rows: [(f64, f64); 3] = match variant {
        DfVariant::N => [(0.01, -2.58), (0.05, -1.96), (0.10, -1.64)],
        DfVariant::C => [
            (0.01, surface([-3.43035, -6.5393, -16.786, -79.433])),
            (0.05, surface([-2.86154, -2.8903, -4.234, -40.040])),
            (0.10, surface([-2.56677, -1.5384, -2.809, 0.0])),
        ],
        DfVariant::Ct => [
            (0.01, surface([-3.95877, -9.0531, -28.428, -134.155])),
            (0.05, surface([-3.41049, -4.3904, -9.036, -45.374])),
            (0.10, surface([-3.12705, -2.5856, -3.925, -22.380])),
        ],
    };
    rows.iter().map(|(l, c)| (level_key(*l), *c)).collect()
}

fn adf_core(y: &[f64], opts: &AdfOptions) -> Result<(f64, usize, usize)> {
    let t = y.len();
    let max_lag = opts.max_lag.unwrap_or_else(|| {
        // keep enough observations for the largest candidate regression
        let room = t.saturating_sub(2 * (deterministic_count(opts.variant) + 4)) / 2;
        default_max_lag(t).min(room)
    });
    if t <= max_lag + 3 + deterministic_count(opts.variant) {
        return Err(Error::InsufficientData {
            what: "ADF observations (more than max_lag + 3)",
            needed: max_lag + 4 + deterministic_count(opts.variant),
            got: t,
        });
    }
    let lag = select_lag(y, opts.variant, max_lag, opts.selection)?;
    let fit = df_regression(y, opts.variant, lag, lag)?;
    Ok((fit.t_stat(0), lag, fit.residuals.len()))
}

/// Augmented Dickey-Fuller test with built-in critical values.
pub fn adf_test(y: &[f64], opts: &AdfOptions) -> Result<TestResult> {
    let (stat, lag, n) = adf_core(y, opts)?;
    let mut r = TestResult::left_tailed(
        "adf",
        stat,
        RefDist::DickeyFuller {
            variant: opts.variant,
        },
        df_critical_values(opts.variant, n),
        None,
        y.len(),
    );
    r.lag = Some(lag);
    Ok(r)
}

/// Augmented Dickey-Fuller test decided against a simulated table.
pub fn adf_test_with_table(y: &[f64], opts: &AdfOptions, table: &McCriticalTable) -> Result<TestResult> {
    if table.variant != opts.variant {
        return Err(invalid("critical table was simulated for another variant"));
    }
    let (stat, lag, _) = adf_core(y, opts)?;
    let mut r = TestResult::left_tailed(
        "adf",
        stat,
        RefDist::McEmpirical,
        table.quantiles.clone(),
        None,
        y.len(),
    );
    r.lag = Some(lag);
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCriticalTable {
    pub variant: DfVariant,
    pub sample_length: usize,
    /// Left-tail quantiles keyed by level (`"5%"` is the 0.05 quantile).
    pub quantiles: BTreeMap<String, f64>,
    pub runs: usize,
}

fn check_runs(runs: usize) -> Result<()> {
    if runs < 1000 {
        Err(Error::InsufficientData {
            what: "Monte Carlo runs",
            needed: 1000,
            got: runs,
        })
    } else {
        Ok(())
    }
}

fn random_walk(s: &mut RngStream, t: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(t);
    let mut level = 0.0;
    for _ in 0..t {
        level += s.normal();
        y.push(level);
    }
    y
}

/// Sorted Dickey-Fuller statistics simulated under a Gaussian random walk.
pub fn df_null_statistics(variant: DfVariant, t: usize, runs: usize, stream: &RngStream) -> Result<Vec<f64>> {
    check_runs(runs)?;
    if t < 25 {
        return Err(Error::InsufficientData {
            what: "simulated sample length",
            needed: 25,
            got: t,
        });
    }
    let stats: Result<Vec<f64>> =
        replicate(stream, runs, |_, s| df_statistic(&random_walk(s, t), variant, 0))
            .into_iter()
            .collect();
    let mut stats = stats?;
    stats.sort_by(f64::total_cmp);
    Ok(stats)
}

/// Monte Carlo quantiles of the DF `γ` t-ratio at sample length `t`.
pub fn df_mc_critical_values(
    variant: DfVariant,
    t: usize,
    runs: usize,
    stream: &RngStream,
) -> Result<McCriticalTable> {
    let stats = df_null_statistics(variant, t, runs, stream)?;
    Ok(McCriticalTable {
        variant,
        sample_length: t,
        quantiles: LEVELS
            .iter()
            .map(|l| (level_key(*l), sorted_quantile(&stats, *l)))
            .collect(),
        runs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CointOptions {
    pub runs: usize,
    pub seed: u64,
    /// Maximum ADF lag on the residuals; `None` uses the default rule.
    pub max_lag: Option<usize>,
    pub selection: LagSelection,
}

impl Default for CointOptions {
    fn default() -> Self {
        Self {
            runs: 2000,
            seed: 20_240_601,
            max_lag: None,
            selection: LagSelection::Bic,
        }
    }
}

fn eg_statistic(y: &[f64], x: &[f64], opts: &AdfOptions) -> Result<(f64, usize)> {
    let design = Matrix::from_columns(&[x.to_vec()])?;
    let step1 = ols_fit(y, &design, true)?;
    let (stat, lag, _) = adf_core(&step1.residuals, opts)?;
    Ok((stat, lag))
}

/// Engle-Granger two-step test. The residual unit-root statistic is compared
/// with its own null distribution, simulated from independent random walks
/// of the observed length using the lag order chosen on the data.
pub fn engle_granger_coint(y: &[f64], x: &[f64], opts: &CointOptions) -> Result<TestResult> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.len(),
        });
    }
    if y.len() < 30 {
        return Err(Error::InsufficientData {
            what: "cointegration observations",
            needed: 30,
            got: y.len(),
        });
    }
    let mx = mean(x);
    if x.iter().all(|v| *v == mx) {
        return Err(Error::Degenerate("regressor is constant".into()));
    }
    check_runs(opts.runs)?;
    let adf = AdfOptions {
        variant: DfVariant::N,
        max_lag: opts.max_lag,
        selection: opts.selection,
    };
    let (stat, lag) = eg_statistic(y, x, &adf)?;
    let fixed = AdfOptions {
        variant: DfVariant::N,
        max_lag: Some(lag),
        selection: LagSelection::Fixed,
    };
    let t = y.len();
    let stream = RngStream::new(opts.seed, 0);
    let sims: Result<Vec<f64>> = replicate(&stream, opts.runs, |_, s| {
        let a = random_walk(s, t);
        let b = random_walk(s, t);
        eg_statistic(&a, &b, &fixed).map(|r| r.0)
    })
    .into_iter()
    .collect();
    let mut sims = sims?;
    sims.sort_by(f64::total_cmp);
    let at_or_below = sims.partition_point(|v| *v <= stat);
    let p = (at_or_below as f64 + 1.0) / (opts.runs as f64 + 1.0);
    let cv = LEVELS
        .iter()
        .map(|l| (level_key(*l), sorted_quantile(&sims, *l)))
        .collect();
    let mut r = TestResult::left_tailed("engle_granger", stat, RefDist::McEmpirical, cv, Some(p), t);
    r.lag = Some(lag);
    Ok(r)
}
