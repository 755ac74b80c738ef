//! AR(1)-GARCH(1,1): conditional likelihood, filtering, simulation,
//! maximum-likelihood fitting and volatility forecasts.
//!
//! Conventions: `μ_t = μ + θ r_{t−1}`, `a_t = r_t − μ_t`,
//! `σ²_t = ω + α₁ a²_{t−1} + β σ²_{t−1}`. The first observation is
//! conditioned on, so paths have length `T − 1`. The pre-sample residual is
//! replaced by its expectation, giving `σ²_1 = ω + (α₁ + β) σ₀²`.

use serde::{Deserialize, Serialize};

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, cholesky_inverse, Matrix};
use crate::optim::{nelder_mead, numerical_hessian, NelderMeadOptions};
use crate::rng::RngStream;
use crate::series::fingerprint;
use crate::stats::{mean, variance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Innovation {
    Normal,
    /// Student-t rescaled to unit variance.
    StudentT { nu: f64 },
}

impl Innovation {
    /// Log-density of the unit-variance law.
    pub fn ln_density(&self, z: f64) -> f64 {
        match *self {
            Innovation::Normal => crate::dist::norm_pdf(z).ln(),
            Innovation::StudentT { nu } => {
                let s = ((nu - 2.0) / nu).sqrt();
                crate::dist::t_ln_pdf(z / s, nu) - s.ln()
            }
        }
    }

    fn draw(&self, s: &mut RngStream) -> f64 {
        match *self {
            Innovation::Normal => s.normal(),
            Innovation::StudentT { nu } => s.student_t(nu) * ((nu - 2.0) / nu).sqrt(),
        }
    }
}

/// Innovation family requested from the fitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationKind {
    Normal,
    StudentT,
}

impl std::str::FromStr for InnovationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" | "gaussian" => Ok(InnovationKind::Normal),
            "student" | "student_t" | "t" => Ok(InnovationKind::StudentT),
            _ => Err(invalid(format!("unknown innovation law {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchSpec {
    pub mu: f64,
    pub theta: f64,
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub innovation: Innovation,
}

impl GarchSpec {
    pub fn normal(mu: f64, theta: f64, omega: f64, alpha1: f64, beta1: f64) -> Self {
        Self {
            mu,
            theta,
            omega,
            alpha1,
            beta1,
            innovation: Innovation::Normal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.theta, self.omega, self.alpha1, self.beta1];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("GARCH parameters must be finite"));
        }
        if self.alpha1 < 0.0 || self.beta1 < 0.0 || self.omega < 0.0 {
            return Err(invalid(format!(
                "omega, alpha1, beta1 must be nonnegative, got {}, {}, {}",
                self.omega, self.alpha1, self.beta1
            )));
        }
        if self.alpha1 + self.beta1 >= 1.0 {
            return Err(invalid(format!(
                "alpha1 + beta1 must be below 1, got {}",
                self.alpha1 + self.beta1
            )));
        }
        if self.omega == 0.0 {
            return Err(Error::Degenerate(
                "omega = 0 gives a variance path without a positive floor".into(),
            ));
        }
        if let Innovation::StudentT { nu } = self.innovation {
            if !(nu > 2.0) || !nu.is_finite() {
                return Err(invalid(format!("Student degrees of freedom must exceed 2, got {nu}")));
            }
        }
        Ok(())
    }

    /// `ω / (1 − α₁ − β)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha1 - self.beta1)
    }
}

/// Choice of the pre-sample variance `σ₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sigma0 {
    #[default]
    SampleVariance,
    Fixed(f64),
}

impl Sigma0 {
    fn resolve(&self, r: &[f64]) -> Result<f64> {
        let v = match *self {
            Sigma0::SampleVariance => variance(r),
            Sigma0::Fixed(v) => v,
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Degenerate(format!("initial variance must be positive, got {v}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filtered {
    pub sigma: Vec<f64>,
    pub z: Vec<f64>,
}

fn check_len(r: &[f64]) -> Result<()> {
    if r.len() < 10 {
        return Err(Error::InsufficientData {
            what: "GARCH observations",
            needed: 10,
            got: r.len(),
        });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(invalid("series contains non-finite values"));
    }
    Ok(())
}

/// Runs the variance recursion, calling `visit(σ_t, z_t)` for `t = 1..T−1`.
fn recurse<F: FnMut(f64, f64)>(r: &[f64], spec: &GarchSpec, s0: f64, mut visit: F) -> Result<()> {
    let mut var = spec.omega + (spec.alpha1 + spec.beta1) * s0;
    for t in 1..r.len() {
        if !(var > 0.0) || !var.is_finite() {
            return Err(Error::Degenerate(format!("conditional variance {var} at t = {t}")));
        }
        let a = r[t] - spec.mu - spec.theta * r[t - 1];
        let sigma = var.sqrt();
        visit(sigma, a / sigma);
        var = spec.omega + spec.alpha1 * a * a + spec.beta1 * var;
    }
    Ok(())
}

pub fn filter_standardized(r: &[f64], spec: &GarchSpec, init: Sigma0) -> Result<Filtered> {
    check_len(r)?;
    spec.validate()?;
    let s0 = init.resolve(r)?;
    let mut out = Filtered {
        sigma: Vec::with_capacity(r.len() - 1),
        z: Vec::with_capacity(r.len() - 1),
    };
    recurse(r, spec, s0, |s, z| {
        out.sigma.push(s);
        out.z.push(z);
    })?;
    Ok(out)
}

/// `Σ_{t≥1} [−ln σ_t + ln g(z_t)]`.
pub fn garch_loglik(r: &[f64], spec: &GarchSpec, init: Sigma0) -> Result<f64> {
    check_len(r)?;
    spec.validate()?;
    let s0 = init.resolve(r)?;
    loglik_unchecked(r, spec, s0)
}

fn loglik_unchecked(r: &[f64], spec: &GarchSpec, s0: f64) -> Result<f64> {
    // log σ_t is accumulated through running products of σ_t, flushed every
    // 16 steps, to keep one logarithm per block
    let mut quad = 0.0;
    let mut log_sigma = 0.0;
    let mut prod = 1.0;
    let mut count = 0;
    let mut visit = |sigma: f64, quad_term: f64| {
        quad += quad_term;
        prod *= sigma;
        count += 1;
        if count == 16 {
            log_sigma += prod.ln();
            prod = 1.0;
            count = 0;
        }
    };
    let n = (r.len() - 1) as f64;
    let constant = match spec.innovation {
        Innovation::Normal => {
            recurse(r, spec, s0, |s, z| visit(s, -0.5 * z * z))?;
            -0.5 * (2.0 * std::f64::consts::PI).ln() * n
        }
        Innovation::StudentT { nu } => {
            let k = 0.5 * (nu + 1.0);
            recurse(r, spec, s0, |s, z| visit(s, -k * (z * z / (nu - 2.0)).ln_1p()))?;
            (ln_gamma(k) - ln_gamma(0.5 * nu) - 0.5 * (std::f64::consts::PI * (nu - 2.0)).ln()) * n
        }
    };
    let ll = constant + quad - log_sigma - prod.ln();
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::Degenerate("log-likelihood is not finite".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPath {
    pub returns: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Innovations driving `t = 1..T−1`.
    pub z: Vec<f64>,
}

/// Simulates `T` returns. `σ₀²` is the unconditional variance, so the filter
/// run with `Sigma0::Fixed(spec.unconditional_variance())` recovers `z`.
pub fn simulate_garch_path(stream: &mut RngStream, spec: &GarchSpec, t: usize) -> Result<SimulatedPath> {
    spec.validate()?;
    if t < 2 {
        return Err(Error::InsufficientData {
            what: "simulated length",
            needed: 2,
            got: t,
        });
    }
    if !(spec.theta.abs() < 1.0) {
        return Err(invalid(format!("simulation needs |theta| < 1, got {}", spec.theta)));
    }
    let v = spec.unconditional_variance();
    let mut returns = Vec::with_capacity(t);
    let mut sigma = Vec::with_capacity(t - 1);
    let mut zs = Vec::with_capacity(t - 1);
    returns.push(spec.mu / (1.0 - spec.theta) + v.sqrt() * spec.innovation.draw(stream));
    let mut var = spec.omega + (spec.alpha1 + spec.beta1) * v;
    for i in 1..t {
        let z = spec.innovation.draw(stream);
        let s = var.sqrt();
        let a = s * z;
        returns.push(spec.mu + spec.theta * returns[i - 1] + a);
        sigma.push(s);
        zs.push(z);
        var = spec.omega + spec.alpha1 * a * a + spec.beta1 * var;
    }
    Ok(SimulatedPath {
        returns,
        sigma,
        z: zs,
    })
}

pub fn simulate_garch(stream: &mut RngStream, spec: &GarchSpec, t: usize) -> Result<Vec<f64>> {
    Ok(simulate_garch_path(stream, spec, t)?.returns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchStdErrors {
    pub mu: f64,
    pub theta: f64,
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub spec: GarchSpec,
    pub loglik: f64,
    pub sigma_path: Vec<f64>,
    pub z: Vec<f64>,
    /// `None` when the observed information is not invertible.
    pub std_errors: Option<GarchStdErrors>,
    pub sigma0_sq: f64,
    pub last_return: f64,
    /// A parameter sits on the edge of the admissible region.
    pub at_boundary: bool,
    pub converged: bool,
    pub z_fingerprint: String,
}

impl GarchFit {
    /// `μ_{T+1} = μ + θ r_T`.
    pub fn next_mean(&self) -> f64 {
        self.spec.mu + self.spec.theta * self.last_return
    }

    /// One-step conditional standard deviation.
    pub fn next_sigma(&self) -> f64 {
        forecast_sigma(self, 1).map(|v| v[0]).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub sigma0: Sigma0,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            sigma0: Sigma0::SampleVariance,
        }
    }
}

const NU_MAX: f64 = 500.0;

fn to_spec(p: &[f64], kind: InnovationKind) -> GarchSpec {
    let (ea, eb) = (p[3].exp(), p[4].exp());
    let d = 1.0 + ea + eb;
    GarchSpec {
        mu: p[0],
        theta: p[1].tanh(),
        omega: p[2].exp(),
        alpha1: ea / d,
        beta1: eb / d,
        innovation: match kind {
            InnovationKind::Normal => Innovation::Normal,
            InnovationKind::StudentT => Innovation::StudentT {
                nu: (2.0 + p[5].exp()).min(NU_MAX),
            },
        },
    }
}

fn from_spec(s: &GarchSpec) -> Vec<f64> {
    let rest = 1.0 - s.alpha1 - s.beta1;
    let mut p = vec![
        s.mu,
        s.theta.clamp(-0.999, 0.999).atanh(),
        s.omega.ln(),
        (s.alpha1.max(1e-8) / rest).ln(),
        (s.beta1.max(1e-8) / rest).ln(),
    ];
    if let Innovation::StudentT { nu } = s.innovation {
        p.push((nu - 2.0).ln());
    }
    p
}

/// Conditional maximum likelihood for AR(1)-GARCH(1,1).
///
/// Parameters are searched in an unconstrained space (`tanh` for `θ`, `log`
/// for `ω`, a logistic map onto `{α₁, β > 0, α₁ + β < 1}`, `ν = 2 + e^x`)
/// with a Nelder-Mead search started from several variance splits.
pub fn fit_ar_garch(r: &[f64], kind: InnovationKind, opts: &FitOptions) -> Result<GarchFit> {
    if r.len() < 250 {
        return Err(Error::InsufficientData {
            what: "GARCH fitting observations",
            needed: 250,
            got: r.len(),
        });
    }
    check_len(r)?;
    let var = variance(r);
    if !(var > 0.0) {
        return Err(Error::Degenerate("constant series".into()));
    }
    let s0 = opts.sigma0.resolve(r)?;
    let n = (r.len() - 1) as f64;
    let objective = |p: &[f64]| -> f64 {
        let spec = to_spec(p, kind);
        if spec.alpha1 + spec.beta1 >= 1.0 || !(spec.omega > 0.0) {
            return f64::NAN;
        }
        match loglik_unchecked(r, &spec, s0) {
            Ok(ll) => -ll / n,
            Err(_) => f64::NAN,
        }
    };

    let m = mean(r);
    let rho1 = {
        let d: Vec<f64> = r.iter().map(|v| v - m).collect();
        let num: f64 = d.windows(2).map(|w| w[0] * w[1]).sum();
        (num / d.iter().map(|v| v * v).sum::<f64>()).clamp(-0.9, 0.9)
    };
    let splits = [(0.05, 0.90), (0.10, 0.80), (0.15, 0.60), (0.05, 0.50), (0.30, 0.30), (0.02, 0.95)];
    let nm = NelderMeadOptions {
        initial_step: 0.3,
        f_tol: 1e-12,
        x_tol: 1e-8,
        max_iter: 4000,
    };
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for &(a, b) in splits.iter().take(opts.restarts.max(1)) {
        let start = GarchSpec {
            mu: m * (1.0 - rho1),
            theta: rho1,
            omega: var * (1.0 - a - b),
            alpha1: a,
            beta1: b,
            innovation: match kind {
                InnovationKind::Normal => Innovation::Normal,
                InnovationKind::StudentT => Innovation::StudentT { nu: 8.0 },
            },
        };
        let cand = nelder_mead(objective, &from_spec(&start), nm);
        if cand.value.is_finite() && best.as_ref().is_none_or(|b| cand.value < b.0) {
            best = Some((cand.value, cand.x, cand.converged));
        }
    }
    // restart from the best optimum to shake off a collapsed simplex
    if let Some((v, x, _)) = best.clone() {
        let polish = nelder_mead(objective, &x, NelderMeadOptions { initial_step: 0.05, ..nm });
        if polish.value <= v {
            best = Some((polish.value, polish.x, polish.converged));
        }
    }
    let (_, p, converged) =
        best.ok_or_else(|| Error::Convergence("no restart reached a finite likelihood".into()))?;
    let spec = to_spec(&p, kind);
    let loglik = loglik_unchecked(r, &spec, s0)?;
    let mut sigma_path = Vec::with_capacity(r.len() - 1);
    let mut z = Vec::with_capacity(r.len() - 1);
    recurse(r, &spec, s0, |s, e| {
        sigma_path.push(s);
        z.push(e);
    })?;
    let at_boundary = spec.alpha1 < 1e-6
        || spec.beta1 < 1e-6
        || spec.alpha1 + spec.beta1 > 1.0 - 1e-6
        || spec.theta.abs() > 1.0 - 1e-6
        || matches!(spec.innovation, Innovation::StudentT { nu } if nu >= NU_MAX);
    let std_errors = if at_boundary {
        None
    } else {
        natural_std_errors(r, &spec, s0)
    };
    Ok(GarchFit {
        spec,
        loglik,
        z_fingerprint: fingerprint(&z),
        sigma_path,
        z,
        std_errors,
        sigma0_sq: s0,
        last_return: r[r.len() - 1],
        at_boundary,
        converged,
    })
}

/// Square roots of the diagonal of the inverse observed information, from a
/// finite-difference Hessian in the natural parameters.
fn natural_std_errors(r: &[f64], spec: &GarchSpec, s0: f64) -> Option<GarchStdErrors> {
    let student = matches!(spec.innovation, Innovation::StudentT { .. });
    let mut x = vec![spec.mu, spec.theta, spec.omega, spec.alpha1, spec.beta1];
    if let Innovation::StudentT { nu } = spec.innovation {
        x.push(nu);
    }
    let build = |p: &[f64]| GarchSpec {
        mu: p[0],
        theta: p[1],
        omega: p[2],
        alpha1: p[3],
        beta1: p[4],
        innovation: if student {
            Innovation::StudentT { nu: p[5] }
        } else {
            Innovation::Normal
        },
    };
    let negll = |p: &[f64]| {
        let s = build(p);
        if s.validate().is_err() {
            return f64::NAN;
        }
        loglik_unchecked(r, &s, s0).map_or(f64::NAN, |v| -v)
    };
    let steps: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1e-2)).collect();
    let h = numerical_hessian(negll, &x, Some(&steps));
    if h.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let m = Matrix::from_rows(&h).ok()?;
    let l = cholesky(&m).ok()?;
    let inv = cholesky_inverse(&l);
    let se = |i: usize| inv[(i, i)].sqrt();
    Some(GarchStdErrors {
        mu: se(0),
        theta: se(1),
        omega: se(2),
        alpha1: se(3),
        beta1: se(4),
        nu: student.then(|| se(5)),
    })
}

/// `σ_{T+k}` forecasts for `k = 1..=horizon`.
pub fn forecast_sigma(fit: &GarchFit, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(invalid("forecast horizon must be at least 1"));
    }
    let s = &fit.spec;
    let (sigma_t, z_t) = match (fit.sigma_path.last(), fit.z.last()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(invalid("fit has an empty volatility path")),
    };
    let a_t = sigma_t * z_t;
    let mut var = s.omega + s.alpha1 * a_t * a_t + s.beta1 * sigma_t * sigma_t;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        out.push(var.sqrt());
        var = s.omega + (s.alpha1 + s.beta1) * var;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series() -> Vec<f64> {
        vec![0.3, -0.5, 1.2, 0.1, -0.9, 0.4, 0.0, -0.2, 0.8, -1.1, 0.6]
    }

    #[test]
    fn iid_normal_special_case() {
        let r = series();
        let omega = 0.7;
        let spec = GarchSpec::normal(0.1, 0.0, omega, 0.0, 0.0);
        let ll = garch_loglik(&r, &spec, Sigma0::SampleVariance).unwrap();
        let want: f64 = r[1..]
            .iter()
            .map(|x| -0.5 * (2.0 * std::f64::consts::PI * omega).ln() - (x - 0.1).powi(2) / (2.0 * omega))
            .sum();
        assert_abs_diff_eq!(ll, want, epsilon = 1e-12);
        let f = filter_standardized(&r, &spec, Sigma0::SampleVariance).unwrap();
        for (z, x) in f.z.iter().zip(&r[1..]) {
            assert_abs_diff_eq!(*z, (x - 0.1) / omega.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let r = series();
        let bad = [
            GarchSpec::normal(0.0, 0.0, 0.0, 0.0, 0.5),
            GarchSpec::normal(0.0, 0.0, 0.1, -0.1, 0.5),
            GarchSpec::normal(0.0, 0.0, 0.1, 0.5, 0.5),
            GarchSpec {
                innovation: Innovation::StudentT { nu: 2.0 },
                ..GarchSpec::normal(0.0, 0.0, 0.1, 0.1, 0.5)
            },
        ];
        for s in bad {
            assert!(garch_loglik(&r, &s, Sigma0::SampleVariance).is_err(), "{s:?}");
            assert!(filter_standardized(&r, &s, Sigma0::SampleVariance).is_err());
        }
        assert!(garch_loglik(&r[..9], &GarchSpec::normal(0.0, 0.0, 0.1, 0.1, 0.5), Sigma0::SampleVariance).is_err());
    }

    #[test]
    fn simulation_is_reproducible_and_validated() {
        let spec = GarchSpec::normal(0.0, 0.2, 0.1, 0.1, 0.8);
        let a = simulate_garch(&mut RngStream::new(5, 1), &spec, 300).unwrap();
        let b = simulate_garch(&mut RngStream::new(5, 1), &spec, 300).unwrap();
        assert_eq!(a, b);
        let unit = GarchSpec::normal(0.0, 0.0, 0.1, 0.2, 0.8);
        assert!(simulate_garch(&mut RngStream::new(5, 1), &unit, 300).is_err());
    }

    #[test]
    fn forecast_constant_without_dynamics() {
        let spec = GarchSpec::normal(0.0, 0.0, 0.49, 0.0, 0.0);
        let r: Vec<f64> = simulate_garch(&mut RngStream::new(1, 0), &spec, 300).unwrap();
        let f = filter_standardized(&r, &spec, Sigma0::SampleVariance).unwrap();
        let fit = GarchFit {
            spec,
            loglik: 0.0,
            z_fingerprint: fingerprint(&f.z),
            sigma_path: f.sigma,
            z: f.z,
            std_errors: None,
            sigma0_sq: 0.49,
            last_return: r[r.len() - 1],
            at_boundary: false,
            converged: true,
        };
        for s in forecast_sigma(&fit, 10).unwrap() {
            assert_abs_diff_eq!(s, 0.7, epsilon = 1e-15);
        }
        assert!(forecast_sigma(&fit, 0).is_err());
    }

    #[test]
    fn fit_rejects_constant_and_short() {
        assert!(fit_ar_garch(&[0.5; 300], InnovationKind::Normal, &FitOptions::default()).is_err());
        assert!(fit_ar_garch(&series(), InnovationKind::Normal, &FitOptions::default()).is_err());
    }

    #[test]
    fn transform_round_trip() {
        let s = GarchSpec {
            innovation: Innovation::StudentT { nu: 6.0 },
            ..GarchSpec::normal(0.01, -0.3, 0.05, 0.12, 0.83)
        };
        let back = to_spec(&from_spec(&s), InnovationKind::StudentT);
        assert_abs_diff_eq!(back.theta, s.theta, epsilon = 1e-12);
        assert_abs_diff_eq!(back.omega, s.omega, epsilon = 1e-12);
        assert_abs_diff_eq!(back.alpha1, s.alpha1, epsilon = 1e-12);
        assert_abs_diff_eq!(back.beta1, s.beta1, epsilon = 1e-12);
        match back.innovation {
            Innovation::StudentT { nu } => assert_abs_diff_eq!(nu, 6.0, epsilon = 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn loglik_matches_direct_density_sum() {
        let r = series();
        for inn in [Innovation::Normal, Innovation::StudentT { nu: 4.5 }] {
            let spec = GarchSpec {
                innovation: inn,
                ..GarchSpec::normal(0.05, 0.3, 0.2, 0.15, 0.7)
            };
            let f = filter_standardized(&r, &spec, Sigma0::Fixed(0.4)).unwrap();
            let want: f64 = f.sigma.iter().zip(&f.z).map(|(s, z)| inn.ln_density(*z) - s.ln()).sum();
            let ll = garch_loglik(&r, &spec, Sigma0::Fixed(0.4)).unwrap();
            assert_abs_diff_eq!(ll, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn student_density_has_unit_variance() {
        let inn = Innovation::StudentT { nu: 5.0 };
        let q = crate::quad::integrate(|z| z * z * inn.ln_density(z).exp(), -200.0, 200.0, 1e-10, 1e-10);
        assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-4);
    }
}
