//! Declarative pipelines: a JSON config listing steps that run in order, each
//! reading the latest output of the kind it needs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tailkit_core::evt::GpdFit;
use tailkit_core::garch::{GarchFit, InnovationKind};
use tailkit_core::risk::{RiskKind, RiskMethod};
use tailkit_core::series::{to_returns, ReturnMode};
use tailkit_core::{Convention, ReturnSeries, RngStream};

use crate::error::{CliError, CliResult};
use crate::json::to_value;
use crate::ops::{
    estimate_risk, fit_evt, fit_garch, load_series, run_backtest, run_test, series_report, summary, BacktestSpec,
    EvtOutput, EvtSpec, InputSpec, RiskInputs, RiskSpec, TestSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The current series.
    #[default]
    Series,
    /// Standardized innovations of the latest GARCH fit.
    Z,
}

fn normal() -> InnovationKind {
    InnovationKind::Normal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Load,
    ToReturns {
        mode: ReturnMode,
    },
    ToLosses,
    SummaryStats {
        #[serde(default)]
        on: Source,
    },
    Test {
        #[serde(default)]
        on: Source,
        test: TestSpec,
    },
    FitGarch {
        #[serde(default = "normal")]
        innovation: InnovationKind,
        #[serde(default)]
        restarts: Option<usize>,
    },
    FitEvt {
        #[serde(default)]
        on: Source,
        fit: EvtSpec,
    },
    Var {
        risk: RiskSpec,
        #[serde(default)]
        on: Source,
        /// Scale the innovation estimate by the latest GARCH fit.
        #[serde(default)]
        conditional: bool,
    },
    Es {
        risk: RiskSpec,
        #[serde(default)]
        on: Source,
        #[serde(default)]
        conditional: bool,
    },
    Backtest {
        backtest: BacktestSpec,
    },
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Load => "load",
            Step::ToReturns { .. } => "to_returns",
            Step::ToLosses => "to_losses",
            Step::SummaryStats { .. } => "summary_stats",
            Step::Test { .. } => "test",
            Step::FitGarch { .. } => "fit_garch",
            Step::FitEvt { .. } => "fit_evt",
            Step::Var { .. } => "var",
            Step::Es { .. } => "es",
            Step::Backtest { .. } => "backtest",
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, Step::Test { test, .. } if test.is_stochastic())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Receives `report.json` and any CSV exports.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub steps: Vec<Step>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every step against what earlier steps will have produced,
    /// without touching any data.
    pub fn validate(&self) -> CliResult<()> {
        if self.steps.is_empty() {
            return Err(CliError::Config("no steps".into()));
        }
        let mut convention: Option<Convention> = None;
        let (mut garch, mut gpd) = (false, false);
        for (index, step) in self.steps.iter().enumerate() {
            let fail = |msg: String| CliError::Step {
                index,
                op: step.name().into(),
                source: Box::new(CliError::Config(msg)),
            };
            if step.is_stochastic() && self.seed.is_none() {
                return Err(fail("stochastic step needs a seed".into()));
            }
            if !matches!(step, Step::Load) && convention.is_none() {
                return Err(fail("no series loaded yet".into()));
            }
            let source_ok = |on: &Source| *on == Source::Series || garch;
            match step {
                Step::Load => {
                    let input = self.input.as_ref().ok_or_else(|| fail("load needs an input".into()))?;
                    convention = Some(input.convention);
                }
                Step::ToReturns { mode } => {
                    if convention != Some(Convention::Price) {
                        return Err(fail("to_returns needs a price series".into()));
                    }
                    convention = Some(match mode {
                        ReturnMode::Simple => Convention::SimpleReturn,
                        ReturnMode::Log => Convention::LogReturn,
                    });
                }
                Step::ToLosses => {
                    if convention == Some(Convention::Price) {
                        return Err(fail("to_losses needs a return series".into()));
                    }
                    convention = Some(Convention::Loss);
                }
                Step::SummaryStats { on } | Step::Test { on, .. } => {
                    if !source_ok(on) {
                        return Err(fail("innovations requested before fit_garch".into()));
                    }
                }
                Step::FitGarch { .. } => garch = true,
                Step::FitEvt { on, fit } => {
                    if !source_ok(on) {
                        return Err(fail("innovations requested before fit_garch".into()));
                    }
                    if matches!(fit, EvtSpec::Gpd { .. }) {
                        gpd = true;
                    }
                }
                Step::Var { risk, on, conditional } | Step::Es { risk, on, conditional } => {
                    if *conditional && !garch {
                        return Err(fail("conditional estimate before fit_garch".into()));
                    }
                    if !source_ok(on) {
                        return Err(fail("innovations requested before fit_garch".into()));
                    }
                    let inline = risk.threshold.is_some() || risk.threshold_quantile.is_some();
                    if risk.method == RiskMethod::Gpd && !gpd && !inline {
                        return Err(fail("gpd method needs a prior GPD fit or a threshold".into()));
                    }
                }
                Step::Backtest { .. } => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub op: String,
    pub output: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub versions: Value,
    pub seed: Option<u64>,
    pub steps: Vec<StepReport>,
    /// The only field that differs between identical runs.
    pub wall_time_secs: f64,
}

#[derive(Default)]
struct State {
    series: Option<ReturnSeries>,
    garch: Option<GarchFit>,
    gpd: Option<GpdFit>,
}

impl State {
    fn series(&self) -> &ReturnSeries {
        // validation guarantees a load precedes every other step
        self.series.as_ref().expect("series loaded")
    }

    fn garch(&self) -> &GarchFit {
        self.garch.as_ref().expect("garch fitted")
    }

    fn data(&self, on: Source) -> &[f64] {
        match on {
            Source::Series => self.series().values(),
            Source::Z => &self.garch().z,
        }
    }
}

pub fn versions() -> Value {
    serde_json::json!({
        "tailkit_cli": env!("CARGO_PKG_VERSION"),
        "tailkit_core": tailkit_core::VERSION,
    })
}

/// Validates, then runs every step in order. The first failing step aborts
/// the run with its index.
pub fn run_pipeline(config: &PipelineConfig) -> CliResult<RunReport> {
    config.validate()?;
    let start = Instant::now();
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut state = State::default();
    let mut steps = Vec::with_capacity(config.steps.len());
    for (index, step) in config.steps.iter().enumerate() {
        let output = run_step(config, index, step, &mut state).map_err(|e| CliError::Step {
            index,
            op: step.name().into(),
            source: Box::new(e),
        })?;
        steps.push(StepReport {
            index,
            op: step.name().into(),
            output,
        });
    }
    let report = RunReport {
        versions: versions(),
        seed: config.seed,
        steps,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &config.output_dir {
        let text = crate::json::to_string(&to_value(&report)?)?;
        std::fs::write(dir.join("report.json"), text + "\n")?;
    }
    Ok(report)
}

fn run_step(config: &PipelineConfig, index: usize, step: &Step, state: &mut State) -> CliResult<Value> {
    match step {
        Step::Load => {
            let input = config.input.as_ref().expect("validated input");
            let s = load_series(input)?;
            let out = series_report(&s);
            state.series = Some(s);
            Ok(out)
        }
        Step::ToReturns { mode } => {
            let s = to_returns(state.series(), *mode)?;
            let out = series_report(&s);
            state.series = Some(s);
            Ok(out)
        }
        Step::ToLosses => {
            let s = state.series().to_losses()?;
            let out = series_report(&s);
            state.series = Some(s);
            Ok(out)
        }
        Step::SummaryStats { on } => summary(state.data(*on)),
        Step::Test { on, test } => {
            let stream = config.seed.map(|s| RngStream::new(s, index as u64));
            run_test(test, state.data(*on), stream)
        }
        Step::FitGarch { innovation, restarts } => {
            let fit = fit_garch(state.series().values(), *innovation, *restarts)?;
            let out = to_value(&fit)?;
            state.garch = Some(fit);
            Ok(out)
        }
        Step::FitEvt { on, fit } => {
            let out = fit_evt(fit, state.data(*on))?;
            if let (EvtOutput::MeanExcess(curve), Some(dir)) = (&out, &config.output_dir) {
                crate::ops::write_mean_excess_csv(curve, &dir.join(format!("step{index}_mean_excess.csv")))?;
            }
            let value = out.to_json()?;
            if let EvtOutput::Gpd(g) = out {
                state.gpd = Some(g);
            }
            Ok(value)
        }
        Step::Var { risk, on, conditional } => risk_step(RiskKind::Var, risk, *on, *conditional, state),
        Step::Es { risk, on, conditional } => risk_step(RiskKind::Es, risk, *on, *conditional, state),
        Step::Backtest { backtest } => {
            let csv = config
                .output_dir
                .as_ref()
                .map(|d| d.join(format!("step{index}_violations.csv")));
            to_value(&run_backtest(backtest, state.series().values(), None, csv.as_deref())?)
        }
    }
}

fn risk_step(kind: RiskKind, risk: &RiskSpec, on: Source, conditional: bool, state: &State) -> CliResult<Value> {
    let inline = risk.threshold.is_some() || risk.threshold_quantile.is_some();
    let inputs = RiskInputs {
        data: Some(state.data(on)),
        gpd: if inline { None } else { state.gpd.as_ref() },
        garch: if conditional { state.garch.as_ref() } else { None },
    };
    to_value(&estimate_risk(kind, risk, &inputs)?)
}
