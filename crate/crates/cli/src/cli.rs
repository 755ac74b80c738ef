//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tailkit_core::backtest::RollingMethod;
use tailkit_core::copula::{
    copula_loglik, fit_cml, fit_tau_inversion, pseudo_observations, sample_copula, tail_dependence,
    tail_dependence_numeric, CopulaFit, CopulaSpec, Family, PseudoSample,
};
use tailkit_core::evt::GpdFit;
use tailkit_core::garch::{simulate_garch, GarchFit, GarchSpec, Innovation, InnovationKind};
use tailkit_core::htest::{
    df_mc_critical_values, engle_granger_coint, ks_two_sample, CointOptions, DfVariant, LagSelection,
};
use tailkit_core::mc::{estimate_pi, mc_integrate, IntegrationBox};
use tailkit_core::risk::{RiskKind, RiskMethod};
use tailkit_core::series::{format_f64, to_returns, ColumnSpec, ReturnMode};
use tailkit_core::stats::kendall_tau;
use tailkit_core::{Convention, ReturnSeries, RngStream};

use crate::error::{usage, CliError, CliResult};
use crate::json::{to_string, to_value};
use crate::ops::{
    estimate_risk, fit_evt, fit_garch, load_series, run_backtest, run_test, series_report, summary,
    write_mean_excess_csv, write_series_csv, BacktestSpec, BacktestTest, EvtOutput, EvtSpec, InputSpec, RiskInputs,
    RiskSpec, TestSpec,
};
use crate::pipeline::{run_pipeline, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "tailkit", version, about = "Tail-risk toolkit: diagnostics, GARCH, EVT, VaR/ES, backtests, copulas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Headered CSV file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Value column, by header name or 0-based index.
    #[arg(long, default_value = "1")]
    pub column: ColumnSpec,
    /// price, simple-return, log-return or loss.
    #[arg(long)]
    pub convention: Option<Convention>,
    /// Field separator.
    #[arg(long, default_value = ",")]
    pub sep: char,
    /// Drop unparseable rows instead of failing.
    #[arg(long)]
    pub skip_invalid: bool,
    /// Optional date column.
    #[arg(long)]
    pub date_column: Option<ColumnSpec>,
    /// Flip the sign of a return series into losses.
    #[arg(long)]
    pub negate: bool,
}

impl InputArgs {
    fn spec(&self, default: Convention) -> CliResult<InputSpec> {
        let path = self.input.clone().ok_or_else(|| usage("--input is required"))?;
        let convention = self.convention.unwrap_or(if self.negate { Convention::LogReturn } else { default });
        Ok(InputSpec {
            path,
            column: self.column.clone(),
            convention,
            separator: self.sep,
            skip_invalid: self.skip_invalid,
            date_column: self.date_column.clone(),
        })
    }

    fn load(&self, default: Convention) -> CliResult<ReturnSeries> {
        let s = load_series(&self.spec(default)?)?;
        if !self.negate {
            return Ok(s);
        }
        if !matches!(s.convention(), Convention::SimpleReturn | Convention::LogReturn) {
            return Err(usage("--negate needs a return series"));
        }
        Ok(s.to_losses()?)
    }

    /// Analysis commands treat values as given (loss convention) by default.
    fn values(&self) -> CliResult<Vec<f64>> {
        Ok(self.load(Convention::Loss)?.into_values())
    }

    fn second(&self, column: &ColumnSpec) -> CliResult<Vec<f64>> {
        let mut spec = self.spec(Convention::Loss)?;
        spec.column = column.clone();
        Ok(load_series(&spec)?.into_values())
    }
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed; falls back to TAILKIT_SEED.
    #[arg(long, env = "TAILKIT_SEED")]
    pub seed: Option<u64>,
}

impl SeedArg {
    fn stream(&self) -> CliResult<RngStream> {
        self.seed
            .map(|s| RngStream::new(s, 0))
            .ok_or_else(|| usage("this command is stochastic: pass --seed or set TAILKIT_SEED"))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TestName {
    Summary,
    LjungBox,
    JarqueBera,
    Lilliefors,
    ArchLm,
    DurbinWatson,
    Adf,
    Ks,
    Coint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvtMethod {
    Gpd,
    Gev,
    Hill,
    Threshold,
    MeanExcess,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Simple,
    Log,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RollingArg {
    Historical,
    Gaussian,
    Student,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Integrand {
    /// e^x
    Exp,
    /// x^2
    Square,
    /// sin x
    Sin,
    /// Standard normal density.
    NormalPdf,
    /// The constant 1.
    One,
}

impl Integrand {
    fn eval(self, x: f64) -> f64 {
        match self {
            Integrand::Exp => x.exp(),
            Integrand::Square => x * x,
            Integrand::Sin => x.sin(),
            Integrand::NormalPdf => (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Integrand::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CopulaFitMethod {
    Cml,
    Tau,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// historical, gaussian, student, gpd or mc.
    #[arg(long)]
    pub method: RiskMethod,
    #[arg(long, default_value_t = 0.99)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Inline GPD threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Inline GPD threshold as an empirical quantile.
    #[arg(long)]
    pub threshold_quantile: Option<f64>,
    /// GPD fit JSON from `fit-evt --method gpd`.
    #[arg(long)]
    pub gpd_fit: Option<PathBuf>,
    /// GARCH fit JSON from `fit-garch`; makes the estimate conditional.
    #[arg(long)]
    pub garch_fit: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct CopulaParams {
    #[arg(long)]
    pub family: Family,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
}

impl CopulaParams {
    fn spec(&self) -> CliResult<CopulaSpec> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("--{name} is required for this family")));
        let spec = match self.family {
            Family::Independence => CopulaSpec::Independence,
            Family::Gaussian => CopulaSpec::Gaussian { rho: need(self.rho, "rho")? },
            Family::StudentT => CopulaSpec::StudentT {
                rho: need(self.rho, "rho")?,
                nu: need(self.nu, "nu")?,
            },
            Family::Clayton => CopulaSpec::Clayton { theta: need(self.theta, "theta")? },
            Family::Gumbel => CopulaSpec::Gumbel { theta: need(self.theta, "theta")? },
            Family::Frank => CopulaSpec::Frank { theta: need(self.theta, "theta")? },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Subcommand)]
pub enum CopulaCommand {
    /// Fit a family to two columns through their pseudo-observations.
    Fit {
        #[arg(long)]
        family: Family,
        #[arg(long, value_enum, default_value = "cml")]
        method: CopulaFitMethod,
        /// Student-t degrees of freedom for tau inversion.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        x_column: ColumnSpec,
        #[arg(long)]
        y_column: ColumnSpec,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Draw pairs from a copula.
    Sample {
        #[command(flatten)]
        params: CopulaParams,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Write `u,v` rows here instead of embedding them in the JSON.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Lower and upper tail-dependence coefficients.
    Tails {
        #[command(flatten)]
        params: CopulaParams,
        /// Evaluate the limits numerically instead of in closed form.
        #[arg(long)]
        numeric: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Estimate pi from uniform draws in the unit square.
    Pi {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Plain Monte Carlo integral of a built-in integrand over [a, b].
    Integrate {
        #[arg(long, value_enum, default_value = "exp")]
        integrand: Integrand,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Simulated Dickey-Fuller critical values.
    DfCritical {
        #[arg(long, default_value = "c")]
        variant: DfVariant,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 100_000)]
        runs: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Simulate an AR(1)-GARCH(1,1) path.
    Garch {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        beta1: f64,
        /// Student-t innovations with this many degrees of freedom.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        t: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load one CSV column and describe it.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Write the normalized series as `timestamp,value`.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Convert prices to returns, optionally as losses.
    Returns {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value = "log")]
        mode: ModeArg,
        /// Flip the sign of the returns.
        #[arg(long)]
        losses: bool,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Summary statistics and diagnostic tests.
    ///
    /// `adf` runs a single augmented Dickey-Fuller regression of the chosen
    /// variant. The full procedure is manual: start from `--variant ct`; if the
    /// unit root is not rejected, check the trend term and step down to `c`,
    /// then to `n`, stopping at the first variant whose deterministic terms
    /// matter. Reject a unit root only in the variant where you stop.
    Test {
        #[arg(value_enum)]
        name: TestName,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 10)]
        lags: usize,
        #[arg(long, default_value_t = 0)]
        model_dof: usize,
        /// Monte Carlo runs for simulated null distributions.
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value = "c")]
        variant: DfVariant,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long, default_value = "bic")]
        selection: LagSelection,
        /// Second column for two-series tests (ks, coint).
        #[arg(long)]
        column2: Option<ColumnSpec>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Fit AR(1)-GARCH(1,1) by conditional maximum likelihood.
    FitGarch {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "normal")]
        innovation: InnovationKind,
        #[arg(long)]
        restarts: Option<usize>,
        /// Write `t,sigma,z` rows of the filtered paths.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Extreme-value fits and diagnostics.
    FitEvt {
        #[arg(long, value_enum)]
        method: EvtMethod,
        #[command(flatten)]
        input: InputArgs,
        /// Use the standardized innovations of this GARCH fit as data.
        #[arg(long)]
        garch_fit: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        #[arg(long)]
        threshold_quantile: Option<f64>,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = 50)]
        min_tail: usize,
        /// Mean-excess grid size.
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Mean-excess curve as CSV.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Value-at-Risk.
    Var(RiskArgs),
    /// Expected shortfall.
    Es(RiskArgs),
    /// Kupiec or dynamic-quantile backtest of a VaR path.
    Backtest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        test: BacktestTest,
        /// Nominal violation probability.
        #[arg(long, default_value_t = 0.01)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        lags: usize,
        /// Column holding an ex-ante VaR path; without it a rolling VaR is used.
        #[arg(long)]
        var_column: Option<ColumnSpec>,
        #[arg(long, value_enum, default_value = "historical")]
        model: RollingArg,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, default_value_t = tailkit_core::backtest::MIN_WINDOW)]
        window: usize,
        /// Violation series as CSV.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Bivariate copulas.
    #[command(subcommand)]
    Copula(CopulaCommand),
    /// Monte Carlo utilities.
    #[command(subcommand)]
    Mc(McCommand),
    /// Run a JSON pipeline config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_error_exit(e: clap::Error) -> i32 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            0
        }
        _ => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            report_error(&err);
            2
        }
    }
}

fn report_error(e: &CliError) {
    let body = to_value(&e.envelope()).and_then(|v| to_string(&v));
    match body {
        Ok(s) => eprintln!("{s}"),
        Err(_) => eprintln!("{e}"),
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => return parse_error_exit(e),
    };
    match run(cli.command).and_then(|v| to_string(&v)) {
        Ok(s) => {
            use std::io::Write;
            // a closed stdout (e.g. `| head`) is not a failure of the command
            let _ = writeln!(std::io::stdout().lock(), "{s}");
            0
        }
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> CliResult<Value> {
    match command {
        Command::Ingest { input, csv_out } => {
            let s = input.load(Convention::Price)?;
            if let Some(p) = csv_out {
                write_series_csv(&s, &p)?;
            }
            Ok(series_report(&s))
        }
        Command::Returns {
            input,
            mode,
            losses,
            csv_out,
        } => {
            let prices = input.load(Convention::Price)?;
            let mode = match mode {
                ModeArg::Simple => ReturnMode::Simple,
                ModeArg::Log => ReturnMode::Log,
            };
            let mut r = to_returns(&prices, mode)?;
            if losses {
                r = r.to_losses()?;
            }
            if let Some(p) = csv_out {
                write_series_csv(&r, &p)?;
            }
            Ok(series_report(&r))
        }
        Command::Test {
            name,
            input,
            lags,
            model_dof,
            runs,
            variant,
            max_lag,
            selection,
            column2,
            seed,
        } => {
            let x = input.values()?;
            let spec = match name {
                TestName::Summary => return summary(&x),
                TestName::Ks | TestName::Coint => {
                    let col = column2.ok_or_else(|| usage("two-series tests need --column2"))?;
                    let y = input.second(&col)?;
                    let r = if matches!(name, TestName::Ks) {
                        ks_two_sample(&x, &y)?
                    } else {
                        let opts = CointOptions {
                            runs: runs.unwrap_or(2000),
                            seed: seed.seed.ok_or_else(|| usage("coint simulates its null: pass --seed"))?,
                            max_lag,
                            selection,
                        };
                        engle_granger_coint(&x, &y, &opts)?
                    };
                    return to_value(&r);
                }
                TestName::LjungBox => TestSpec::LjungBox { lags, model_dof },
                TestName::JarqueBera => TestSpec::JarqueBera,
                TestName::Lilliefors => TestSpec::Lilliefors {
                    runs: runs.unwrap_or(5000),
                },
                TestName::ArchLm => TestSpec::ArchLm { lags },
                TestName::DurbinWatson => TestSpec::DurbinWatson,
                TestName::Adf => TestSpec::Adf {
                    variant,
                    max_lag,
                    selection,
                },
            };
            let stream = if spec.is_stochastic() { Some(seed.stream()?) } else { None };
            run_test(&spec, &x, stream)
        }
        Command::FitGarch {
            input,
            innovation,
            restarts,
            csv_out,
        } => {
            let fit = fit_garch(&input.values()?, innovation, restarts)?;
            if let Some(p) = csv_out {
                write_garch_paths(&fit, &p)?;
            }
            to_value(&fit)
        }
        Command::FitEvt {
            method,
            input,
            garch_fit,
            threshold,
            threshold_quantile,
            block_size,
            min_tail,
            points,
            csv_out,
        } => {
            let x = match garch_fit {
                Some(p) => {
                    if input.input.is_some() {
                        return Err(usage("give either --input or --garch-fit"));
                    }
                    read_json::<GarchFit>(&p)?.z
                }
                None => input.values()?,
            };
            let spec = match method {
                EvtMethod::Gpd => EvtSpec::Gpd {
                    threshold,
                    threshold_quantile,
                },
                EvtMethod::Hill => EvtSpec::Hill {
                    threshold,
                    threshold_quantile,
                },
                EvtMethod::Gev => EvtSpec::Gev {
                    block_size: block_size.ok_or_else(|| usage("gev needs --block-size"))?,
                },
                EvtMethod::Threshold => EvtSpec::Threshold { min_tail },
                EvtMethod::MeanExcess => EvtSpec::MeanExcess { points },
            };
            let out = fit_evt(&spec, &x)?;
            if let (EvtOutput::MeanExcess(curve), Some(p)) = (&out, csv_out) {
                write_mean_excess_csv(curve, &p)?;
            }
            out.to_json()
        }
        Command::Var(args) => risk(RiskKind::Var, args),
        Command::Es(args) => risk(RiskKind::Es, args),
        Command::Backtest {
            input,
            test,
            p,
            lags,
            var_column,
            model,
            nu,
            window,
            csv_out,
        } => {
            let losses = input.values()?;
            let var_path = var_column.map(|c| input.second(&c)).transpose()?;
            let model = match model {
                RollingArg::Historical => RollingMethod::Historical,
                RollingArg::Gaussian => RollingMethod::Gaussian,
                RollingArg::Student => RollingMethod::Student {
                    nu: nu.ok_or_else(|| usage("the student model needs --nu"))?,
                },
            };
            let spec = BacktestSpec {
                test,
                p,
                lags,
                model,
                window,
            };
            to_value(&run_backtest(&spec, &losses, var_path.as_deref(), csv_out.as_deref())?)
        }
        Command::Copula(c) => copula(c),
        Command::Mc(c) => mc(c),
        Command::Pipeline { config } => {
            let cfg = PipelineConfig::from_file(&config)?;
            to_value(&run_pipeline(&cfg)?)
        }
    }
}

fn risk(kind: RiskKind, args: RiskArgs) -> CliResult<Value> {
    let garch: Option<GarchFit> = args.garch_fit.as_deref().map(read_json).transpose()?;
    let gpd: Option<GpdFit> = args.gpd_fit.as_deref().map(read_json).transpose()?;
    let data = match (&args.input.input, &garch) {
        (Some(_), Some(_)) => return Err(usage("conditional estimates use the fit's innovations: drop --input")),
        (Some(_), None) => Some(args.input.values()?),
        (None, _) => None,
    };
    let spec = RiskSpec {
        method: args.method,
        q: args.q,
        mu: args.mu,
        sigma: args.sigma,
        nu: args.nu,
        threshold: args.threshold,
        threshold_quantile: args.threshold_quantile,
    };
    let inputs = RiskInputs {
        data: data.as_deref(),
        gpd: gpd.as_ref(),
        garch: garch.as_ref(),
    };
    to_value(&estimate_risk(kind, &spec, &inputs)?)
}

fn write_garch_paths(fit: &GarchFit, path: &Path) -> CliResult<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(File::create(path)?);
    writeln!(w, "t,sigma,z")?;
    for (t, (s, z)) in fit.sigma_path.iter().zip(&fit.z).enumerate() {
        writeln!(w, "{},{},{}", t + 1, format_f64(*s), format_f64(*z))?;
    }
    w.flush()?;
    Ok(())
}

fn write_pairs_csv(s: &PseudoSample, path: &Path) -> CliResult<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(File::create(path)?);
    writeln!(w, "u,v")?;
    for (u, v) in s.u.iter().zip(&s.v) {
        writeln!(w, "{},{}", format_f64(*u), format_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

fn copula(c: CopulaCommand) -> CliResult<Value> {
    match c {
        CopulaCommand::Fit {
            family,
            method,
            nu,
            x_column,
            y_column,
            input,
        } => {
            let x = input.second(&x_column)?;
            let y = input.second(&y_column)?;
            let sample = pseudo_observations(&x, &y)?;
            let tau = kendall_tau(&sample.u, &sample.v)?;
            let fit = match method {
                CopulaFitMethod::Cml => fit_cml(&sample, family)?,
                CopulaFitMethod::Tau => {
                    let spec = fit_tau_inversion(tau, family, nu)?;
                    CopulaFit {
                        spec,
                        loglik: copula_loglik(&spec, &sample)?,
                        n: sample.len(),
                    }
                }
            };
            let mut v = to_value(&fit)?;
            v["kendall_tau"] = json!(tau);
            Ok(v)
        }
        CopulaCommand::Sample {
            params,
            n,
            seed,
            csv_out,
        } => {
            let spec = params.spec()?;
            let s = sample_copula(&mut seed.stream()?, &spec, n)?;
            let tau = if n >= 2 { Some(kendall_tau(&s.u, &s.v)?) } else { None };
            let mut v = json!({ "spec": spec, "n": n, "kendall_tau": tau });
            match csv_out {
                Some(p) => write_pairs_csv(&s, &p)?,
                None => {
                    v["u"] = json!(s.u);
                    v["v"] = json!(s.v);
                }
            }
            Ok(v)
        }
        CopulaCommand::Tails { params, numeric } => {
            let spec = params.spec()?;
            let t = if numeric {
                tail_dependence_numeric(&spec)?
            } else {
                tail_dependence(&spec)?
            };
            to_value(&t)
        }
    }
}

fn mc(c: McCommand) -> CliResult<Value> {
    match c {
        McCommand::Pi { n, seed } => to_value(&estimate_pi(&mut seed.stream()?, n)?),
        McCommand::Integrate { integrand, a, b, n, seed } => {
            let domain = IntegrationBox(vec![(a, b)]);
            to_value(&mc_integrate(&mut seed.stream()?, |x| integrand.eval(x[0]), &domain, n)?)
        }
        McCommand::DfCritical { variant, t, runs, seed } => {
            to_value(&df_mc_critical_values(variant, t, runs, &seed.stream()?)?)
        }
        McCommand::Garch {
            mu,
            theta,
            omega,
            alpha1,
            beta1,
            nu,
            t,
            seed,
            csv_out,
        } => {
            let spec = GarchSpec {
                innovation: match nu {
                    Some(nu) => Innovation::StudentT { nu },
                    None => Innovation::Normal,
                },
                ..GarchSpec::normal(mu, theta, omega, alpha1, beta1)
            };
            let r = simulate_garch(&mut seed.stream()?, &spec, t)?;
            let series = ReturnSeries::new(r, Convention::Loss)?;
            if let Some(p) = csv_out {
                write_series_csv(&series, &p)?;
            }
            let mut v = series_report(&series);
            v["spec"] = to_value(&spec)?;
            Ok(v)
        }
    }
}
