//! Operations shared by the subcommands and the pipeline runner, so both
//! front ends produce the same JSON for the same request.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tailkit_core::backtest::{em_dq, kupiec_uc, rolling_var, violation_series, BacktestResult, RollingMethod};
use tailkit_core::evt::{
    block_maxima, fit_gev, fit_gpd, hill_above, mean_excess_curve, select_threshold_ks, write_mean_excess, GevFit, GpdFit, HillFit,
    MeanExcessPoint, ThresholdSelection,
};
use tailkit_core::garch::{fit_ar_garch, FitOptions, GarchFit, InnovationKind};
use tailkit_core::htest::{adf_test, arch_lm, durbin_watson, jarque_bera, lilliefors, ljung_box, AdfOptions};
use tailkit_core::htest::{DfVariant, LagSelection};
use tailkit_core::risk::{
    conditional_var, es_gaussian, es_gaussian_sample, es_gpd, es_historical, es_student, es_student_sample,
    var_gaussian, var_gaussian_sample, var_gpd, var_historical, var_mc, var_student, var_student_sample, RiskEstimate,
    RiskKind, RiskMethod,
};
use tailkit_core::series::{fingerprint, load_csv, ColumnSpec, CsvOptions};
use tailkit_core::stats::{empirical_quantile, summary_stats};
use tailkit_core::{Convention, ReturnSeries, RngStream};

use crate::error::{usage, CliError, CliResult};
use crate::json::to_value;

/// Where a CSV series comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    pub column: ColumnSpec,
    #[serde(default = "default_convention")]
    pub convention: Convention,
    #[serde(default = "default_separator")]
    pub separator: char,
    #[serde(default)]
    pub skip_invalid: bool,
    #[serde(default)]
    pub date_column: Option<ColumnSpec>,
}

fn default_convention() -> Convention {
    Convention::Price
}

fn default_separator() -> char {
    ','
}

pub fn load_series(input: &InputSpec) -> CliResult<ReturnSeries> {
    if !input.separator.is_ascii() {
        return Err(usage(format!("separator must be a single ASCII character, got {:?}", input.separator)));
    }
    let opts = CsvOptions {
        separator: input.separator as u8,
        skip_invalid: input.skip_invalid,
        date_column: input.date_column.clone(),
        convention: input.convention,
    };
    Ok(load_csv(&input.path, &input.column, &opts)?)
}

pub fn write_series_csv(series: &ReturnSeries, path: &Path) -> CliResult<()> {
    series.write_csv(File::create(path)?)?;
    Ok(())
}

pub fn series_report(series: &ReturnSeries) -> Value {
    let dates = series.timestamps().map(|t| {
        json!({
            "first": t[0].format("%Y-%m-%d").to_string(),
            "last": t[t.len() - 1].format("%Y-%m-%d").to_string(),
        })
    });
    json!({
        "convention": series.convention(),
        "n": series.len(),
        "fingerprint": fingerprint(series.values()),
        "dates": dates,
    })
}

pub fn summary(values: &[f64]) -> CliResult<Value> {
    to_value(&summary_stats(values)?)
}

// ---------------------------------------------------------------- tests

fn default_runs() -> usize {
    5000
}

/// Single-series diagnostic tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestSpec {
    LjungBox {
        lags: usize,
        #[serde(default)]
        model_dof: usize,
    },
    JarqueBera,
    Lilliefors {
        #[serde(default = "default_runs")]
        runs: usize,
    },
    ArchLm {
        lags: usize,
    },
    DurbinWatson,
    Adf {
        variant: DfVariant,
        #[serde(default)]
        max_lag: Option<usize>,
        #[serde(default = "default_selection")]
        selection: LagSelection,
    },
}

fn default_selection() -> LagSelection {
    LagSelection::Bic
}

impl TestSpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, TestSpec::Lilliefors { .. })
    }
}

pub fn run_test(spec: &TestSpec, x: &[f64], stream: Option<RngStream>) -> CliResult<Value> {
    let r = match *spec {
        TestSpec::LjungBox { lags, model_dof } => ljung_box(x, lags, model_dof)?,
        TestSpec::JarqueBera => jarque_bera(x)?,
        TestSpec::Lilliefors { runs } => {
            let stream = stream.ok_or_else(|| usage("the Lilliefors test simulates its table and needs a seed"))?;
            lilliefors(x, runs, &stream)?
        }
        TestSpec::ArchLm { lags } => arch_lm(x, lags)?,
        TestSpec::DurbinWatson => {
            return Ok(json!({ "test": "durbin_watson", "stat": durbin_watson(x)?, "n_obs": x.len() }));
        }
        TestSpec::Adf {
            variant,
            max_lag,
            selection,
        } => adf_test(
            x,
            &AdfOptions {
                variant,
                max_lag,
                selection,
            },
        )?,
    };
    to_value(&r)
}

// ---------------------------------------------------------------- GARCH

pub fn fit_garch(x: &[f64], innovation: InnovationKind, restarts: Option<usize>) -> CliResult<GarchFit> {
    let mut opts = FitOptions::default();
    if let Some(r) = restarts {
        opts.restarts = r;
    }
    Ok(fit_ar_garch(x, innovation, &opts)?)
}

// ---------------------------------------------------------------- EVT

/// A threshold given directly or as an empirical quantile of the data.
pub fn resolve_threshold(threshold: Option<f64>, quantile: Option<f64>, x: &[f64]) -> CliResult<f64> {
    match (threshold, quantile) {
        (Some(u), None) => Ok(u),
        (None, Some(p)) => Ok(empirical_quantile(x, p)?),
        _ => Err(usage("give exactly one of threshold and threshold_quantile")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvtSpec {
    Gpd {
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default)]
        threshold_quantile: Option<f64>,
    },
    Gev {
        block_size: usize,
    },
    Hill {
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default)]
        threshold_quantile: Option<f64>,
    },
    /// KS-minimizing power-law threshold.
    Threshold {
        min_tail: usize,
    },
    MeanExcess {
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvtOutput {
    Gpd(GpdFit),
    Gev(GevFit),
    Hill(HillFit),
    Threshold(ThresholdSelection),
    MeanExcess(Vec<MeanExcessPoint>),
}

impl EvtOutput {
    pub fn to_json(&self) -> CliResult<Value> {
        match self {
            EvtOutput::Gpd(f) => to_value(f),
            EvtOutput::Gev(f) => to_value(f),
            EvtOutput::Hill(f) => to_value(f),
            EvtOutput::Threshold(f) => to_value(f),
            EvtOutput::MeanExcess(c) => to_value(c),
        }
    }
}

pub fn fit_evt(spec: &EvtSpec, x: &[f64]) -> CliResult<EvtOutput> {
    Ok(match spec {
        EvtSpec::Gpd {
            threshold,
            threshold_quantile,
        } => EvtOutput::Gpd(fit_gpd(x, resolve_threshold(*threshold, *threshold_quantile, x)?)?),
        EvtSpec::Gev { block_size } => {
            let m = block_maxima(x, *block_size)?;
            EvtOutput::Gev(fit_gev(&m, Some(*block_size))?)
        }
        EvtSpec::Hill {
            threshold,
            threshold_quantile,
        } => EvtOutput::Hill(hill_above(x, resolve_threshold(*threshold, *threshold_quantile, x)?)?),
        EvtSpec::Threshold { min_tail } => EvtOutput::Threshold(select_threshold_ks(x, *min_tail)?),
        EvtSpec::MeanExcess { points } => {
            if *points < 2 {
                return Err(usage("the mean-excess grid needs at least 2 points"));
            }
            // from the median to the 99th percentile
            let lo = empirical_quantile(x, 0.5)?;
            let hi = empirical_quantile(x, 0.99)?;
            let step = (hi - lo) / (*points - 1) as f64;
            let grid: Vec<f64> = (0..*points).map(|i| lo + step * i as f64).collect();
            EvtOutput::MeanExcess(mean_excess_curve(x, &grid)?)
        }
    })
}

pub fn write_mean_excess_csv(curve: &[MeanExcessPoint], path: &Path) -> CliResult<()> {
    write_mean_excess(curve, File::create(path)?)?;
    Ok(())
}

// ---------------------------------------------------------------- risk

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskSpec {
    pub method: RiskMethod,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    /// Inline GPD fit when no fitted tail is supplied.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub threshold_quantile: Option<f64>,
}

fn default_q() -> f64 {
    0.99
}

/// Data available to a risk request. With `garch`, the estimate is taken on
/// the fit's innovations and mapped to the one-step conditional scale.
pub struct RiskInputs<'a> {
    pub data: Option<&'a [f64]>,
    pub gpd: Option<&'a GpdFit>,
    pub garch: Option<&'a GarchFit>,
}

pub fn estimate_risk(kind: RiskKind, spec: &RiskSpec, inputs: &RiskInputs) -> CliResult<RiskEstimate> {
    let data = match inputs.garch {
        Some(fit) => Some(fit.z.as_slice()),
        None => inputs.data,
    };
    let need_data = || data.ok_or_else(|| usage(format!("{:?} risk needs input data", spec.method)));
    let need_nu = || spec.nu.ok_or_else(|| usage("the Student method needs nu"));
    let q = spec.q;
    let est = match spec.method {
        RiskMethod::Historical => match kind {
            RiskKind::Var => var_historical(need_data()?, q)?,
            RiskKind::Es => es_historical(need_data()?, q)?,
        },
        RiskMethod::Mc => match kind {
            RiskKind::Var => var_mc(need_data()?, q)?,
            RiskKind::Es => RiskEstimate {
                method: RiskMethod::Mc,
                ..es_historical(need_data()?, q)?
            },
        },
        RiskMethod::Gaussian => match (spec.mu, spec.sigma, kind) {
            (Some(m), Some(s), RiskKind::Var) => var_gaussian(m, s, q)?,
            (Some(m), Some(s), RiskKind::Es) => es_gaussian(m, s, q)?,
            (None, None, RiskKind::Var) => var_gaussian_sample(need_data()?, q)?,
            (None, None, RiskKind::Es) => es_gaussian_sample(need_data()?, q)?,
            _ => return Err(usage("give both mu and sigma, or neither to use sample moments")),
        },
        RiskMethod::Student => match (spec.mu, spec.sigma, kind) {
            (Some(m), Some(s), RiskKind::Var) => var_student(m, s, need_nu()?, q)?,
            (Some(m), Some(s), RiskKind::Es) => es_student(m, s, need_nu()?, q)?,
            (None, None, RiskKind::Var) => var_student_sample(need_data()?, need_nu()?, q)?,
            (None, None, RiskKind::Es) => es_student_sample(need_data()?, need_nu()?, q)?,
            _ => return Err(usage("give both mu and sigma, or neither to use sample moments")),
        },
        RiskMethod::Gpd => {
            let inline;
            let fit = match inputs.gpd {
                Some(f) => f,
                None => {
                    let x = need_data()?;
                    inline = fit_gpd(x, resolve_threshold(spec.threshold, spec.threshold_quantile, x)?)?;
                    &inline
                }
            };
            match kind {
                RiskKind::Var => var_gpd(fit, q)?,
                RiskKind::Es => es_gpd(fit, q)?,
            }
        }
    };
    match inputs.garch {
        Some(fit) => Ok(conditional_var(fit, &est)?),
        None => Ok(est),
    }
}

// ---------------------------------------------------------------- backtest

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BacktestTest {
    Kupiec,
    Dq,
}

impl std::str::FromStr for BacktestTest {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "kupiec" => Ok(BacktestTest::Kupiec),
            "dq" => Ok(BacktestTest::Dq),
            _ => Err(usage(format!("unknown backtest {s:?} (kupiec or dq)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BacktestSpec {
    pub test: BacktestTest,
    /// Nominal violation probability `1 − q`.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default = "default_rolling")]
    pub model: RollingMethod,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_p() -> f64 {
    0.01
}

fn default_lags() -> usize {
    1
}

fn default_rolling() -> RollingMethod {
    RollingMethod::Historical
}

fn default_window() -> usize {
    tailkit_core::backtest::MIN_WINDOW
}

/// Backtest of `losses` against `var_path` when given, otherwise against a
/// rolling ex-ante VaR computed from the losses themselves.
pub fn run_backtest(
    spec: &BacktestSpec,
    losses: &[f64],
    var_path: Option<&[f64]>,
    csv_out: Option<&Path>,
) -> CliResult<BacktestResult> {
    let v = match var_path {
        Some(path) => violation_series(losses, path, spec.p)?,
        None => {
            let path = rolling_var(losses, 1.0 - spec.p, spec.model, spec.window)?;
            violation_series(&losses[spec.window..], &path, spec.p)?
        }
    };
    if let Some(p) = csv_out {
        v.write_csv(File::create(p)?)?;
    }
    Ok(match spec.test {
        BacktestTest::Kupiec => kupiec_uc(&v)?,
        BacktestTest::Dq => em_dq(&v, spec.lags)?,
    })
}
