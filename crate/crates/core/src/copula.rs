//! Bivariate copulas: Gaussian, Student-t, Clayton, Gumbel, Frank.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dist::{norm_cdf, norm_ppf, norm_sf, t_cdf, t_ppf};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::mc::sample_mvnormal;
use crate::optim::brent_minimize;
use crate::quad::integrate;
use crate::rng::RngStream;
use crate::stats::ranks;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaSpec {
    Independence,
    Gaussian { rho: f64 },
    StudentT { rho: f64, nu: f64 },
    Clayton { theta: f64 },
    Gumbel { theta: f64 },
    Frank { theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independence" => Ok(Family::Independence),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "t" | "student" | "student_t" => Ok(Family::StudentT),
            "clayton" => Ok(Family::Clayton),
            "gumbel" => Ok(Family::Gumbel),
            "frank" => Ok(Family::Frank),
            _ => Err(invalid(format!("unknown copula family {s:?}"))),
        }
    }
}

impl CopulaSpec {
    pub fn family(&self) -> Family {
        match self {
            CopulaSpec::Independence => Family::Independence,
            CopulaSpec::Gaussian { .. } => Family::Gaussian,
            CopulaSpec::StudentT { .. } => Family::StudentT,
            CopulaSpec::Clayton { .. } => Family::Clayton,
            CopulaSpec::Gumbel { .. } => Family::Gumbel,
            CopulaSpec::Frank { .. } => Family::Frank,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CopulaSpec::Independence => true,
            CopulaSpec::Gaussian { rho } => rho.abs() < 1.0,
            CopulaSpec::StudentT { rho, nu } => rho.abs() < 1.0 && nu > 2.0 && nu.is_finite(),
            CopulaSpec::Clayton { theta } => theta > 0.0 && theta.is_finite(),
            CopulaSpec::Gumbel { theta } => theta >= 1.0 && theta.is_finite(),
            CopulaSpec::Frank { theta } => theta != 0.0 && theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("copula parameters outside the family domain: {self:?}")))
        }
    }

    /// Population Kendall τ implied by the parameters.
    pub fn kendall_tau(&self) -> f64 {
        match *self {
            CopulaSpec::Independence => 0.0,
            CopulaSpec::Gaussian { rho } | CopulaSpec::StudentT { rho, .. } => 2.0 / PI * rho.asin(),
            CopulaSpec::Clayton { theta } => theta / (theta + 2.0),
            CopulaSpec::Gumbel { theta } => 1.0 - 1.0 / theta,
            CopulaSpec::Frank { theta } => frank_tau(theta),
        }
    }
}

/// Debye function `D₁(θ) = θ⁻¹ ∫₀^θ t/(eᵗ − 1) dt`.
fn debye1(theta: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 1.0 } else { t / t.exp_m1() };
    integrate(f, 0.0, theta, 1e-15, 1e-14).value / theta
}

fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        // series: τ ≈ θ/9 near zero
        return theta / 9.0;
    }
    1.0 + 4.0 * (debye1(theta) - 1.0) / theta
}

fn check_unit(u: f64, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("copula arguments must lie in [0, 1], got ({u}, {v})")))
    }
}

/// `ln(u^−θ + v^−θ − 1)` without overflow.
fn clayton_log_sum(u: f64, v: f64, theta: f64) -> f64 {
    let a = -theta * u.ln();
    let b = -theta * v.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + ((lo - hi).exp() - (-hi).exp()).ln_1p()
}

/// Bivariate normal CDF from Plackett's identity `∂Φ₂/∂ρ = φ₂`, integrated
/// down from `ρ = 1` (base `Φ(min(x, y))`) when `ρ > 0` and up from `ρ = −1`
/// (base `max(Φ(x) + Φ(y) − 1, 0)`) when `ρ < 0`, so no term cancels.
/// `r = sin t` removes the `1/√(1 − r²)` factor.
fn bvn_cdf(x: f64, y: f64, rho: f64) -> f64 {
    // (x² − 2xy·sin t + y²)/(2cos²t) = [(x−y)²/(1−sin t) + (x+y)²/(1+sin t)]/4,
    // with 1 ± sin t from half angles to avoid cancellation
    let (d, s) = ((x - y) * (x - y), (x + y) * (x + y));
    let f = |t: f64| {
        let one_minus = 2.0 * (0.25 * PI - 0.5 * t).sin().powi(2);
        let one_plus = 2.0 * (0.25 * PI + 0.5 * t).sin().powi(2);
        let term = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
        (-0.25 * (term(d, one_minus) + term(s, one_plus))).exp() / (2.0 * PI)
    };
    if rho == 0.0 {
        return norm_cdf(x) * norm_cdf(y);
    }
    let c = if rho > 0.0 {
        norm_cdf(x.min(y)) - integrate(f, rho.asin(), 0.5 * PI, 1e-17, 1e-14).value
    } else {
        (norm_cdf(x) - norm_sf(y)).max(0.0) + integrate(f, -0.5 * PI, rho.asin(), 1e-17, 1e-14).value
    };
    c.clamp(0.0, 1.0)
}

/// `∂C/∂u` of the t copula at quantiles `(x, y)`.
fn t_h(x: f64, y: f64, rho: f64, nu: f64) -> f64 {
    let scale = ((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
    t_cdf((y - rho * x) / scale, nu + 1.0)
}

/// `C(u, v) = ∫_{−∞}^{x} t_ν(s)·h(y | s) ds`, integrated on `s = x − r/(1 − r)`.
fn t_copula_cdf(u: f64, v: f64, rho: f64, nu: f64) -> f64 {
    let x = t_ppf(u, nu);
    let y = t_ppf(v, nu);
    let f = |r: f64| {
        let w = 1.0 - r;
        if w <= 0.0 {
            return 0.0;
        }
        let s = x - r / w;
        crate::dist::t_pdf(s, nu) * t_h(s, y, rho, nu) / (w * w)
    };
    integrate(f, 0.0, 1.0, 1e-15, 1e-13).value.clamp(0.0, u.min(v))
}

/// `C(u, v)`. Arguments on the boundary of the unit square return the
/// grounding and margin limits.
pub fn copula_cdf(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    spec.validate()?;
    check_unit(u, v)?;
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(v);
    }
    if v == 1.0 {
        return Ok(u);
    }
    let c = match *spec {
        CopulaSpec::Independence => u * v,
        CopulaSpec::Gaussian { rho } => bvn_cdf(norm_ppf(u), norm_ppf(v), rho),
        CopulaSpec::StudentT { rho, nu } => t_copula_cdf(u, v, rho, nu),
        CopulaSpec::Clayton { theta } => (-clayton_log_sum(u, v, theta) / theta).exp(),
        CopulaSpec::Gumbel { theta } => {
            let s = (-u.ln()).powf(theta) + (-v.ln()).powf(theta);
            (-s.powf(1.0 / theta)).exp()
        }
        CopulaSpec::Frank { theta } => {
            let r = (-theta * u).exp_m1() * (-theta * v).exp_m1() / (-theta).exp_m1();
            -r.ln_1p() / theta
        }
    };
    Ok(c.clamp((u + v - 1.0).max(0.0), u.min(v)))
}

fn ln_density_unchecked(spec: &CopulaSpec, u: f64, v: f64) -> f64 {
    match *spec {
        CopulaSpec::Independence => 0.0,
        CopulaSpec::Gaussian { rho } => {
            let (x, y) = (norm_ppf(u), norm_ppf(v));
            let s = 1.0 - rho * rho;
            -0.5 * s.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s)
        }
        CopulaSpec::StudentT { rho, nu } => {
            let (x, y) = (t_ppf(u, nu), t_ppf(v, nu));
            let s = 1.0 - rho * rho;
            ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu) - 2.0 * ln_gamma(0.5 * (nu + 1.0)) - 0.5 * s.ln()
                - 0.5 * (nu + 2.0) * ((x * x + y * y - 2.0 * rho * x * y) / (nu * s)).ln_1p()
                + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
        }
        CopulaSpec::Clayton { theta } => {
            (1.0 + theta).ln() - (theta + 1.0) * (u.ln() + v.ln())
                - (2.0 + 1.0 / theta) * clayton_log_sum(u, v, theta)
        }
        CopulaSpec::Gumbel { theta } => {
            let (x, y) = (-u.ln(), -v.ln());
            let s = x.powf(theta) + y.powf(theta);
            let a = s.powf(1.0 / theta);
            -a + x + y + (theta - 1.0) * (x.ln() + y.ln()) - (2.0 - 1.0 / theta) * s.ln() + (a + theta - 1.0).ln()
        }
        CopulaSpec::Frank { theta } => {
            if theta < 0.0 {
                // c(u, v; θ) = c(u, 1 − v; −θ)
                return ln_density_unchecked(&CopulaSpec::Frank { theta: -theta }, u, 1.0 - v);
            }
            let d = -(-theta).exp_m1() - (-theta * u).exp_m1() * (-theta * v).exp_m1();
            theta.ln() + (-(-theta).exp_m1()).ln() - theta * (u + v) - 2.0 * d.ln()
        }
    }
}

/// Copula density `c(u, v) = ∂²C/∂u∂v` on the open unit square.
pub fn copula_density(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    Ok(copula_ln_density(spec, u, v)?.exp())
}

pub fn copula_ln_density(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    spec.validate()?;
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(invalid(format!("density arguments must lie in (0, 1), got ({u}, {v})")));
    }
    Ok(ln_density_unchecked(spec, u, v))
}

/// Conditional distribution `h(v | u) = ∂C(u, v)/∂u`.
pub fn conditional_cdf(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64> {
    spec.validate()?;
    if !(u > 0.0 && u < 1.0) || !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("conditional arguments out of range: ({u}, {v})")));
    }
    if v == 0.0 || v == 1.0 {
        return Ok(v);
    }
    let h = match *spec {
        CopulaSpec::Independence => v,
        CopulaSpec::Gaussian { rho } => norm_cdf((norm_ppf(v) - rho * norm_ppf(u)) / (1.0 - rho * rho).sqrt()),
        CopulaSpec::StudentT { rho, nu } => t_h(t_ppf(u, nu), t_ppf(v, nu), rho, nu),
        CopulaSpec::Clayton { theta } => {
            (-(theta + 1.0) * u.ln() - (1.0 + 1.0 / theta) * clayton_log_sum(u, v, theta)).exp()
        }
        CopulaSpec::Gumbel { theta } => gumbel_h(u, v, theta),
        CopulaSpec::Frank { theta } => {
            let a = (-theta * u).exp_m1();
            let b = (-theta * v).exp_m1();
            (-theta * u).exp() * b / ((-theta).exp_m1() + a * b)
        }
    };
    Ok(h.clamp(0.0, 1.0))
}

fn gumbel_h(u: f64, v: f64, theta: f64) -> f64 {
    let (x, y) = (-u.ln(), -v.ln());
    let s = x.powf(theta) + y.powf(theta);
    (-s.powf(1.0 / theta) + x + (theta - 1.0) * x.ln() + (1.0 / theta - 1.0) * s.ln()).exp()
}

/// Solves `h(v | u) = w` for `v`.
fn inverse_conditional(spec: &CopulaSpec, u: f64, w: f64) -> f64 {
    match *spec {
        CopulaSpec::Independence => w,
        CopulaSpec::Clayton { theta } => {
            let a = -theta * u.ln();
            let e = (-theta / (1.0 + theta) * w.ln()).exp_m1();
            if e <= 0.0 {
                return 1.0;
            }
            let ln_term = a + e.ln() + ((-a).exp() / e).ln_1p();
            (-ln_term / theta).exp()
        }
        CopulaSpec::Frank { theta } => {
            let b = w * (-theta).exp_m1() / (w + (1.0 - w) * (-theta * u).exp());
            -b.ln_1p() / theta
        }
        _ => {
            // bisection on the monotone conditional CDF
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let h = match *spec {
                    CopulaSpec::Gumbel { theta } => gumbel_h(u, mid, theta),
                    _ => conditional_cdf(spec, u, mid).unwrap_or(f64::NAN),
                };
                if h < w {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }
}

/// Pseudo-observations on the open unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoSample {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PseudoSample {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        if u.iter().chain(&v).any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(invalid("pseudo-observations must lie strictly inside (0, 1)"));
        }
        Ok(Self { u, v })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// `rank/(n + 1)` per margin, ties at their mean rank.
pub fn pseudo_observations(x: &[f64], y: &[f64]) -> Result<PseudoSample> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InsufficientData {
            what: "paired observations",
            needed: 1,
            got: 0,
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("observations contain non-finite values"));
    }
    let d = x.len() as f64 + 1.0;
    Ok(PseudoSample {
        u: ranks(x).into_iter().map(|r| r / d).collect(),
        v: ranks(y).into_iter().map(|r| r / d).collect(),
    })
}

/// Parameter from Kendall's τ. The t copula takes `nu` from the caller.
pub fn fit_tau_inversion(tau: f64, family: Family, nu: Option<f64>) -> Result<CopulaSpec> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(invalid(format!("Kendall tau must lie in (-1, 1), got {tau}")));
    }
    let spec = match family {
        Family::Independence => CopulaSpec::Independence,
        Family::Gaussian => CopulaSpec::Gaussian {
            rho: (PI * tau / 2.0).sin(),
        },
        Family::StudentT => CopulaSpec::StudentT {
            rho: (PI * tau / 2.0).sin(),
            nu: nu.ok_or_else(|| invalid("t copula tau inversion needs nu"))?,
        },
        Family::Gumbel => {
            if tau < 0.0 {
                return Err(invalid(format!("gumbel copula needs tau >= 0, got {tau}")));
            }
            CopulaSpec::Gumbel {
                theta: 1.0 / (1.0 - tau),
            }
        }
        Family::Clayton => {
            if tau <= 0.0 {
                return Err(invalid(format!("clayton copula needs tau > 0, got {tau}")));
            }
            CopulaSpec::Clayton {
                theta: 2.0 * tau / (1.0 - tau),
            }
        }
        Family::Frank => {
            if tau == 0.0 {
                return Err(invalid("frank copula needs tau != 0"));
            }
            CopulaSpec::Frank {
                theta: tau.signum() * invert_frank_tau(tau.abs())?,
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn invert_frank_tau(tau: f64) -> Result<f64> {
    let mut hi = 1.0;
    while frank_tau(hi) < tau {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(invalid(format!("frank copula cannot reach tau {tau}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < tau {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaFit {
    pub spec: CopulaSpec,
    pub loglik: f64,
    pub n: usize,
}

pub fn copula_loglik(spec: &CopulaSpec, sample: &PseudoSample) -> Result<f64> {
    spec.validate()?;
    Ok(sample
        .u
        .iter()
        .zip(&sample.v)
        .map(|(u, v)| ln_density_unchecked(spec, *u, *v))
        .sum())
}

/// Grid scan then Brent refinement between the neighbours of the best point.
fn maximize_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> Result<(f64, f64)> {
    let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|x| f(*x)).map(|v| if v.is_finite() { v } else { f64::NEG_INFINITY }).collect();
    let best = (0..grid).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    if vals[best] == f64::NEG_INFINITY {
        return Err(Error::Convergence("copula likelihood never finite".into()));
    }
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(grid - 1)];
    let m = brent_minimize(|x| -f(x), a, b, 1e-10, 500);
    if !m.converged {
        return Err(Error::Convergence("copula likelihood maximization did not converge".into()));
    }
    if -m.value >= vals[best] {
        Ok((m.x[0], -m.value))
    } else {
        Ok((xs[best], vals[best]))
    }
}

pub const CML_MIN_OBS: usize = 50;

/// Canonical maximum likelihood on pseudo-observations. The t copula profiles
/// `ν` over the integers 3..=30.
pub fn fit_cml(sample: &PseudoSample, family: Family) -> Result<CopulaFit> {
    let n = sample.len();
    if n < CML_MIN_OBS {
        return Err(Error::InsufficientData {
            what: "pseudo-observations for copula likelihood",
            needed: CML_MIN_OBS,
            got: n,
        });
    }
    let sample = PseudoSample::new(sample.u.clone(), sample.v.clone())?;
    let ll = |spec: CopulaSpec| copula_loglik(&spec, &sample).unwrap_or(f64::NEG_INFINITY);
    const RHO_MAX: f64 = 0.995;
    let (spec, loglik) = match family {
        Family::Independence => (CopulaSpec::Independence, 0.0),
        Family::Gaussian => {
            let (rho, l) = maximize_scalar(|rho| ll(CopulaSpec::Gaussian { rho }), -RHO_MAX, RHO_MAX, 41)?;
            (CopulaSpec::Gaussian { rho }, l)
        }
        Family::StudentT => {
            let mut best: Option<(CopulaSpec, f64)> = None;
            for nu in 3..=30 {
                let nu = nu as f64;
                let (rho, l) = maximize_scalar(|rho| ll(CopulaSpec::StudentT { rho, nu }), -RHO_MAX, RHO_MAX, 21)?;
                if best.as_ref().is_none_or(|b| l > b.1) {
                    best = Some((CopulaSpec::StudentT { rho, nu }, l));
                }
            }
            best.ok_or_else(|| Error::Convergence("t copula profile failed".into()))?
        }
        Family::Clayton => {
            let (s, l) = maximize_scalar(|s| ll(CopulaSpec::Clayton { theta: s.exp() }), (1e-3f64).ln(), 50f64.ln(), 41)?;
            (CopulaSpec::Clayton { theta: s.exp() }, l)
        }
        Family::Gumbel => {
            let (s, l) = maximize_scalar(|s| ll(CopulaSpec::Gumbel { theta: s.exp() }), 0.0, 30f64.ln(), 41)?;
            (CopulaSpec::Gumbel { theta: s.exp().max(1.0) }, l)
        }
        Family::Frank => {
            let f = |theta: f64| {
                if theta == 0.0 {
                    0.0
                } else {
                    ll(CopulaSpec::Frank { theta })
                }
            };
            let (theta, l) = maximize_scalar(f, -60.0, 60.0, 61)?;
            let theta = if theta == 0.0 { 1e-8 } else { theta };
            (CopulaSpec::Frank { theta }, l)
        }
    };
    Ok(CopulaFit { spec, loglik, n })
}

/// Draws `n` pairs. Elliptical families go through the multivariate normal
/// sampler; Archimedean families invert the conditional distribution.
pub fn sample_copula(stream: &mut RngStream, spec: &CopulaSpec, n: usize) -> Result<PseudoSample> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let inside = |x: f64| x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
    match *spec {
        CopulaSpec::Gaussian { rho } | CopulaSpec::StudentT { rho, .. } => {
            let cov = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]])?;
            let z = sample_mvnormal(stream, n, &cov)?;
            for row in z {
                let (a, b) = match *spec {
                    CopulaSpec::StudentT { nu, .. } => {
                        let s = (stream.chi_squared(nu) / nu).sqrt();
                        (t_cdf(row[0] / s, nu), t_cdf(row[1] / s, nu))
                    }
                    _ => (norm_cdf(row[0]), norm_cdf(row[1])),
                };
                u.push(inside(a));
                v.push(inside(b));
            }
        }
        _ => {
            for _ in 0..n {
                let a = inside(stream.uniform_open0());
                let w = inside(stream.uniform_open0());
                u.push(a);
                v.push(inside(inverse_conditional(spec, a, w)));
            }
        }
    }
    Ok(PseudoSample { u, v })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDependence {
    pub lambda_lower: f64,
    pub lambda_upper: f64,
}

/// Closed-form tail-dependence coefficients.
pub fn tail_dependence(spec: &CopulaSpec) -> Result<TailDependence> {
    spec.validate()?;
    let (lower, upper) = match *spec {
        CopulaSpec::Independence | CopulaSpec::Gaussian { .. } | CopulaSpec::Frank { .. } => (0.0, 0.0),
        CopulaSpec::StudentT { rho, nu } => {
            let l = 2.0 * t_cdf(-((nu + 1.0) * (1.0 - rho) / (1.0 + rho)).sqrt(), nu + 1.0);
            (l, l)
        }
        CopulaSpec::Clayton { theta } => (2f64.powf(-1.0 / theta), 0.0),
        CopulaSpec::Gumbel { theta } => (0.0, 2.0 - 2f64.powf(1.0 / theta)),
    };
    Ok(TailDependence {
        lambda_lower: lower,
        lambda_upper: upper,
    })
}

/// Aitken-accelerated limit of `f(10⁻ᵏ)`, `k = 2..=7`; `None` when the
/// accelerated sequence has not settled.
fn extrapolate_limit<F: Fn(f64) -> Result<f64>>(f: F) -> Result<Option<f64>> {
    let seq: Vec<f64> = (2..=7).map(|k| f(10f64.powi(-k))).collect::<Result<_>>()?;
    let acc: Vec<f64> = seq
        .windows(3)
        .map(|w| {
            let d = w[2] - 2.0 * w[1] + w[0];
            if d.abs() < 1e-14 {
                w[2]
            } else {
                w[2] - (w[2] - w[1]).powi(2) / d
            }
        })
        .collect();
    let n = acc.len();
    let (a, b) = (acc[n - 2], acc[n - 1]);
    Ok(if (a - b).abs() < 1e-3 {
        Some(b.clamp(0.0, 1.0))
    } else {
        None
    })
}

/// Tail dependence from `C(q,q)/q` and `(1 − 2q + C(q,q))/(1 − q)` evaluated
/// towards the corners.
pub fn tail_dependence_numeric(spec: &CopulaSpec) -> Result<TailDependence> {
    spec.validate()?;
    let lower = extrapolate_limit(|q| Ok(copula_cdf(spec, q, q)? / q))?;
    let upper = extrapolate_limit(|q| {
        let p = 1.0 - q;
        Ok((2.0 * q - 1.0 + copula_cdf(spec, p, p)?) / q)
    })?;
    match (lower, upper) {
        (Some(l), Some(u)) => Ok(TailDependence {
            lambda_lower: l,
            lambda_upper: u,
        }),
        _ => Err(Error::Convergence("tail dependence limit did not settle".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn families() -> Vec<CopulaSpec> {
        vec![
            CopulaSpec::Independence,
            CopulaSpec::Gaussian { rho: 0.6 },
            CopulaSpec::Gaussian { rho: -0.8 },
            CopulaSpec::StudentT { rho: 0.5, nu: 4.0 },
            CopulaSpec::StudentT { rho: -0.3, nu: 10.0 },
            CopulaSpec::Clayton { theta: 0.5 },
            CopulaSpec::Clayton { theta: 4.0 },
            CopulaSpec::Gumbel { theta: 1.0 },
            CopulaSpec::Gumbel { theta: 3.0 },
            CopulaSpec::Frank { theta: 5.0 },
            CopulaSpec::Frank { theta: -4.0 },
        ]
    }

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
    }

    #[test]
    fn independence_and_gumbel_one() {
        assert_abs_diff_eq!(copula_cdf(&CopulaSpec::Independence, 0.3, 0.5).unwrap(), 0.15, epsilon = 1e-15);
        let g = CopulaSpec::Gumbel { theta: 1.0 };
        for u in grid(20) {
            for v in grid(20) {
                assert_abs_diff_eq!(copula_cdf(&g, u, v).unwrap(), u * v, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn frechet_bounds_and_margins() {
        for spec in families() {
            for u in grid(12) {
                assert_abs_diff_eq!(copula_cdf(&spec, u, 1.0).unwrap(), u, epsilon = 1e-10);
                assert_abs_diff_eq!(copula_cdf(&spec, 1.0, u).unwrap(), u, epsilon = 1e-10);
                assert_eq!(copula_cdf(&spec, u, 0.0).unwrap(), 0.0);
                for v in grid(12) {
                    let c = copula_cdf(&spec, u, v).unwrap();
                    assert!(c >= (u + v - 1.0).max(0.0) - 1e-12 && c <= u.min(v) + 1e-12, "{spec:?} {u} {v} {c}");
                }
            }
        }
    }

    #[test]
    fn margins_near_one_continuous() {
        for spec in families() {
            let u = 0.37;
            let c = copula_cdf(&spec, u, 1.0 - 1e-9).unwrap();
            assert_abs_diff_eq!(c, u, epsilon = 1e-7);
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for spec in [
            CopulaSpec::Frank { theta: 2.0 },
            CopulaSpec::Frank { theta: -3.0 },
            CopulaSpec::Clayton { theta: 1.5 },
            CopulaSpec::Gumbel { theta: 1.8 },
            CopulaSpec::Gaussian { rho: 0.4 },
            CopulaSpec::StudentT { rho: 0.4, nu: 6.0 },
        ] {
            let q = crate::quad::integrate_2d(
                |u, v| copula_density(&spec, u, v).unwrap(),
                (0.0, 1.0),
                (0.0, 1.0),
                1e-7,
            );
            assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn density_matches_cdf_cross_difference() {
        let h = 1e-4;
        for spec in families() {
            for (u, v) in [(0.3, 0.6), (0.7, 0.2), (0.5, 0.5)] {
                let c = |a: f64, b: f64| copula_cdf(&spec, a, b).unwrap();
                let fd = (c(u + h, v + h) - c(u + h, v - h) - c(u - h, v + h) + c(u - h, v - h)) / (4.0 * h * h);
                let d = copula_density(&spec, u, v).unwrap();
                assert!((fd - d).abs() < 1e-3 * (1.0 + d), "{spec:?} {u} {v}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn conditional_matches_cdf_derivative() {
        let h = 1e-6;
        for spec in families() {
            for (u, v) in [(0.3, 0.6), (0.8, 0.1)] {
                let fd = (copula_cdf(&spec, u + h, v).unwrap() - copula_cdf(&spec, u - h, v).unwrap()) / (2.0 * h);
                let got = conditional_cdf(&spec, u, v).unwrap();
                assert!((fd - got).abs() < 1e-6, "{spec:?}: {fd} vs {got}");
                let back = inverse_conditional(&spec, u, got);
                if !matches!(spec, CopulaSpec::Gaussian { .. } | CopulaSpec::StudentT { .. }) {
                    assert_abs_diff_eq!(back, v, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn density_limits() {
        let f = CopulaSpec::Frank { theta: 1e-8 };
        let g = CopulaSpec::Gaussian { rho: 0.0 };
        for u in grid(9) {
            for v in grid(9) {
                assert_abs_diff_eq!(copula_density(&f, u, v).unwrap(), 1.0, epsilon = 1e-4);
                assert_abs_diff_eq!(copula_density(&g, u, v).unwrap(), 1.0, epsilon = 1e-14);
            }
        }
        assert!(copula_density(&f, 0.0, 0.5).is_err());
    }

    #[test]
    fn tau_inversion_examples() {
        assert_abs_diff_eq!(
            match fit_tau_inversion(0.5, Family::Gumbel, None).unwrap() {
                CopulaSpec::Gumbel { theta } => theta,
                _ => f64::NAN,
            },
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(fit_tau_inversion(0.5, Family::Clayton, None).unwrap(), CopulaSpec::Clayton { theta: 2.0 });
        match fit_tau_inversion(0.5, Family::Gaussian, None).unwrap() {
            CopulaSpec::Gaussian { rho } => assert_abs_diff_eq!(rho, 0.5f64.sqrt(), epsilon = 1e-12),
            s => panic!("{s:?}"),
        }
        assert!(fit_tau_inversion(-0.2, Family::Gumbel, None).is_err());
        assert!(fit_tau_inversion(0.3, Family::StudentT, None).is_err());
        for tau in [-0.6, -0.1, 0.05, 0.3, 0.8] {
            let s = fit_tau_inversion(tau, Family::Frank, None).unwrap();
            assert_abs_diff_eq!(s.kendall_tau(), tau, epsilon = 1e-10);
        }
    }

    #[test]
    fn frank_tau_matches_quadrature_oracle() {
        // τ = 4∫∫ C dC − 1 = 1 − 4∫∫ ∂C/∂u ∂C/∂v
        let spec = CopulaSpec::Frank { theta: 3.0 };
        let h = 1e-6;
        let q = crate::quad::integrate_2d(
            |u, v| {
                let cu = conditional_cdf(&spec, u, v).unwrap();
                let cv = (copula_cdf(&spec, u, (v + h).min(1.0)).unwrap()
                    - copula_cdf(&spec, u, (v - h).max(0.0)).unwrap())
                    / ((v + h).min(1.0) - (v - h).max(0.0));
                cu * cv
            },
            (0.0, 1.0),
            (0.0, 1.0),
            1e-8,
        );
        assert_abs_diff_eq!(spec.kendall_tau(), 1.0 - 4.0 * q.value, epsilon = 1e-5);
    }

    #[test]
    fn pseudo_observation_examples() {
        assert_eq!(pseudo_observations(&[4.0], &[1.0]).unwrap().u, vec![0.5]);
        let p = pseudo_observations(&[1.0, 2.0, 3.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(p.u, vec![0.25, 0.5, 0.75]);
        assert_eq!(p.v, vec![0.5; 3]);
        assert!(pseudo_observations(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tail_dependence_examples() {
        let t = tail_dependence(&CopulaSpec::Gumbel { theta: 2.0 }).unwrap();
        assert_abs_diff_eq!(t.lambda_upper, 2.0 - 2f64.sqrt(), epsilon = 1e-12);
        let n = tail_dependence_numeric(&CopulaSpec::Gumbel { theta: 2.0 }).unwrap();
        assert_abs_diff_eq!(n.lambda_upper, 2.0 - 2f64.sqrt(), epsilon = 1e-3);
        assert_abs_diff_eq!(n.lambda_lower, 0.0, epsilon = 1e-3);
        let n = tail_dependence_numeric(&CopulaSpec::Clayton { theta: 2.0 }).unwrap();
        assert_abs_diff_eq!(n.lambda_lower, 0.5f64.sqrt(), epsilon = 1e-3);
        assert_abs_diff_eq!(n.lambda_upper, 0.0, epsilon = 1e-3);
        let i = tail_dependence_numeric(&CopulaSpec::Independence).unwrap();
        assert_abs_diff_eq!(i.lambda_lower, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(i.lambda_upper, 0.0, epsilon = 1e-6);
        let g = tail_dependence(&CopulaSpec::Gaussian { rho: 0.5 }).unwrap();
        assert_eq!((g.lambda_lower, g.lambda_upper), (0.0, 0.0));
    }

    #[test]
    fn cml_rejects_small_samples() {
        let p = pseudo_observations(&grid(10), &grid(10)).unwrap();
        assert!(fit_cml(&p, Family::Gumbel).is_err());
    }

    proptest! {
        #[test]
        fn rectangle_inequality(
            family in 0usize..11,
            a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0,
        ) {
            let spec = families()[family];
            let (u1, u2) = if a <= b { (a, b) } else { (b, a) };
            let (v1, v2) = if c <= d { (c, d) } else { (d, c) };
            let cc = |u, v| copula_cdf(&spec, u, v).unwrap();
            prop_assert!(cc(u2, v2) - cc(u2, v1) - cc(u1, v2) + cc(u1, v1) >= -1e-12);
        }

        #[test]
        fn frechet_bounds_random(
            rho in -0.99f64..0.99, theta in 0.01f64..20.0,
            u in 0.0f64..=1.0, v in 0.0f64..=1.0,
        ) {
            for spec in [
                CopulaSpec::Gaussian { rho },
                CopulaSpec::Clayton { theta },
                CopulaSpec::Gumbel { theta: 1.0 + theta },
                CopulaSpec::Frank { theta: theta - 10.0 },
            ] {
                if spec.validate().is_err() {
                    continue;
                }
                let c = copula_cdf(&spec, u, v).unwrap();
                prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-12);
                prop_assert!(c <= u.min(v) + 1e-12);
            }
        }
    }
}
