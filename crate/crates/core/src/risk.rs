//! Value-at-Risk and Expected Shortfall. Positive values are losses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{norm_pdf, norm_ppf, t_pdf, t_ppf};
use crate::error::{invalid, Error, Result};
use crate::evt::{GpdFit, XI_ZERO};
use crate::garch::GarchFit;
use crate::series::fingerprint;
use crate::stats::{mean, variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskKind {
    Var,
    Es,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskMethod {
    Historical,
    Gaussian,
    Student,
    Gpd,
    Mc,
}

impl std::str::FromStr for RiskMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "historical" => Ok(RiskMethod::Historical),
            "gaussian" | "normal" => Ok(RiskMethod::Gaussian),
            "student" => Ok(RiskMethod::Student),
            "gpd" => Ok(RiskMethod::Gpd),
            "mc" => Ok(RiskMethod::Mc),
            _ => Err(invalid(format!("unknown risk method {s:?}"))),
        }
    }
}

/// What an estimate was computed from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fingerprint: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub params: BTreeMap<String, f64>,
    /// Set for GARCH-conditional estimates.
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub conditional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub kind: RiskKind,
    pub method: RiskMethod,
    pub q: f64,
    pub value: f64,
    pub inputs: Provenance,
}

fn check_q(q: f64) -> Result<()> {
    if (0.5..1.0).contains(&q) {
        Ok(())
    } else {
        Err(invalid(format!("confidence level must lie in [0.5, 1), got {q}")))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("sigma must be nonnegative, got {sigma}")))
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn sample_provenance(losses: &[f64]) -> Provenance {
    Provenance {
        n: Some(losses.len()),
        fingerprint: Some(fingerprint(losses)),
        ..Default::default()
    }
}

fn sorted_losses(losses: &[f64]) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(Error::InsufficientData {
            what: "loss observations",
            needed: 1,
            got: 0,
        });
    }
    if losses.iter().any(|v| !v.is_finite()) {
        return Err(invalid("losses contain non-finite values"));
    }
    let mut s = losses.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Order-statistic index `m = np` when `np` is an integer, `⌊np⌋ + 1`
/// otherwise (1-based, clamped to `[1, n]`).
pub fn historical_rank(n: usize, q: f64) -> usize {
    let np = n as f64 * q;
    let m = if (np - np.round()).abs() <= 1e-9 * np.max(1.0) {
        np.round() as usize
    } else {
        np.floor() as usize + 1
    };
    m.clamp(1, n)
}

/// `X_(m)` of the sorted losses.
pub fn var_historical(losses: &[f64], q: f64) -> Result<RiskEstimate> {
    check_q(q)?;
    let s = sorted_losses(losses)?;
    Ok(RiskEstimate {
        kind: RiskKind::Var,
        method: RiskMethod::Historical,
        q,
        value: s[historical_rank(s.len(), q) - 1],
        inputs: sample_provenance(losses),
    })
}

/// Historical VaR of simulated losses.
pub fn var_mc(simulated: &[f64], q: f64) -> Result<RiskEstimate> {
    Ok(RiskEstimate {
        method: RiskMethod::Mc,
        ..var_historical(simulated, q)?
    })
}

/// Mean of the losses strictly above the historical VaR.
pub fn es_historical(losses: &[f64], q: f64) -> Result<RiskEstimate> {
    let var = var_historical(losses, q)?;
    let tail: Vec<f64> = losses.iter().cloned().filter(|x| *x > var.value).collect();
    if tail.is_empty() {
        return Err(Error::Degenerate(format!(
            "no loss strictly exceeds the historical VaR {}",
            var.value
        )));
    }
    Ok(RiskEstimate {
        kind: RiskKind::Es,
        value: mean(&tail),
        ..var
    })
}

/// `μ + σ z_q`.
pub fn var_gaussian(mu: f64, sigma: f64, q: f64) -> Result<RiskEstimate> {
    check_q(q)?;
    check_sigma(sigma)?;
    Ok(RiskEstimate {
        kind: RiskKind::Var,
        method: RiskMethod::Gaussian,
        q,
        value: mu + sigma * norm_ppf(q),
        inputs: Provenance {
            params: params(&[("mu", mu), ("sigma", sigma)]),
            ..Default::default()
        },
    })
}

/// `μ + σ ψ(z_q)/(1 − q)`.
pub fn es_gaussian(mu: f64, sigma: f64, q: f64) -> Result<RiskEstimate> {
    let var = var_gaussian(mu, sigma, q)?;
    Ok(RiskEstimate {
        kind: RiskKind::Es,
        value: mu + sigma * norm_pdf(norm_ppf(q)) / (1.0 - q),
        ..var
    })
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 2.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("Student VaR needs nu > 2, got {nu}")))
    }
}

/// `μ + t_ν(q)·σ·√((ν−2)/ν)`, `σ` being the standard deviation.
pub fn var_student(mu: f64, sigma: f64, nu: f64, q: f64) -> Result<RiskEstimate> {
    check_q(q)?;
    check_sigma(sigma)?;
    check_nu(nu)?;
    Ok(RiskEstimate {
        kind: RiskKind::Var,
        method: RiskMethod::Student,
        q,
        value: mu + t_ppf(q, nu) * sigma * ((nu - 2.0) / nu).sqrt(),
        inputs: Provenance {
            params: params(&[("mu", mu), ("sigma", sigma), ("nu", nu)]),
            ..Default::default()
        },
    })
}

/// `μ + σ√((ν−2)/ν) · g_ν(t_q)(ν + t_q²)/((ν − 1)(1 − q))`.
pub fn es_student(mu: f64, sigma: f64, nu: f64, q: f64) -> Result<RiskEstimate> {
    let var = var_student(mu, sigma, nu, q)?;
    let tq = t_ppf(q, nu);
    let tail = t_pdf(tq, nu) * (nu + tq * tq) / ((nu - 1.0) * (1.0 - q));
    Ok(RiskEstimate {
        kind: RiskKind::Es,
        value: mu + sigma * ((nu - 2.0) / nu).sqrt() * tail,
        ..var
    })
}

fn sample_moments(losses: &[f64]) -> Result<(f64, f64)> {
    if losses.len() < 2 {
        return Err(Error::InsufficientData {
            what: "loss observations for moments",
            needed: 2,
            got: losses.len(),
        });
    }
    Ok((mean(losses), variance(losses).sqrt()))
}

fn from_sample(mut r: RiskEstimate, losses: &[f64]) -> RiskEstimate {
    r.inputs.n = Some(losses.len());
    r.inputs.fingerprint = Some(fingerprint(losses));
    r
}

/// Gaussian VaR with sample mean and standard deviation.
pub fn var_gaussian_sample(losses: &[f64], q: f64) -> Result<RiskEstimate> {
    let (m, s) = sample_moments(losses)?;
    Ok(from_sample(var_gaussian(m, s, q)?, losses))
}

pub fn es_gaussian_sample(losses: &[f64], q: f64) -> Result<RiskEstimate> {
    let (m, s) = sample_moments(losses)?;
    Ok(from_sample(es_gaussian(m, s, q)?, losses))
}

/// Student VaR with sample mean and standard deviation.
pub fn var_student_sample(losses: &[f64], nu: f64, q: f64) -> Result<RiskEstimate> {
    let (m, s) = sample_moments(losses)?;
    Ok(from_sample(var_student(m, s, nu, q)?, losses))
}

pub fn es_student_sample(losses: &[f64], nu: f64, q: f64) -> Result<RiskEstimate> {
    let (m, s) = sample_moments(losses)?;
    Ok(from_sample(es_student(m, s, nu, q)?, losses))
}

fn gpd_tail_ratio(fit: &GpdFit, q: f64) -> Result<f64> {
    check_q(q)?;
    let ratio = fit.n_total as f64 * (1.0 - q) / fit.n_exceed as f64;
    if ratio > 1.0 + 1e-12 {
        return Err(invalid(format!(
            "level {q} lies below the threshold coverage 1 - N_u/n = {}",
            1.0 - fit.n_exceed as f64 / fit.n_total as f64
        )));
    }
    Ok(ratio.min(1.0))
}

/// `u + (β/ξ)[(n(1−q)/N_u)^(−ξ) − 1]`, log limit for `ξ → 0`.
pub fn var_gpd(fit: &GpdFit, q: f64) -> Result<RiskEstimate> {
    let ratio = gpd_tail_ratio(fit, q)?;
    let value = if fit.xi.abs() < XI_ZERO {
        fit.threshold - fit.beta * ratio.ln()
    } else {
        fit.threshold + fit.beta / fit.xi * (-fit.xi * ratio.ln()).exp_m1()
    };
    Ok(RiskEstimate {
        kind: RiskKind::Var,
        method: RiskMethod::Gpd,
        q,
        value,
        inputs: Provenance {
            n: Some(fit.n_total),
            fingerprint: Some(fit.data_fingerprint.clone()),
            params: params(&[
                ("xi", fit.xi),
                ("beta", fit.beta),
                ("u", fit.threshold),
                ("n_exceed", fit.n_exceed as f64),
            ]),
            conditional: false,
        },
    })
}

/// `(VaR + β − ξu)/(1 − ξ)`, defined for `ξ < 1`.
pub fn es_gpd(fit: &GpdFit, q: f64) -> Result<RiskEstimate> {
    if !(fit.xi < 1.0) {
        return Err(invalid(format!("GPD expected shortfall needs xi < 1, got {}", fit.xi)));
    }
    let var = var_gpd(fit, q)?;
    Ok(RiskEstimate {
        kind: RiskKind::Es,
        value: (var.value + fit.beta - fit.xi * fit.threshold) / (1.0 - fit.xi),
        ..var
    })
}

fn check_innovation_provenance(fit: &GarchFit, z_risk: &RiskEstimate) -> Result<()> {
    match &z_risk.inputs.fingerprint {
        Some(f) if *f == fit.z_fingerprint => Ok(()),
        _ => Err(invalid(
            "innovation risk estimate was not computed on this fit's standardized innovations",
        )),
    }
}

/// One-step conditional risk `μ_{T+1} + σ_{T+1}·VaR_q(Z)`. The GARCH model is
/// fitted to losses, so `z` are loss-sign innovations.
pub fn conditional_var(fit: &GarchFit, z_risk: &RiskEstimate) -> Result<RiskEstimate> {
    check_innovation_provenance(fit, z_risk)?;
    let mu = fit.next_mean();
    let sigma = fit.next_sigma();
    let mut inputs = z_risk.inputs.clone();
    inputs.conditional = true;
    inputs.params.insert("mu_next".into(), mu);
    inputs.params.insert("sigma_next".into(), sigma);
    inputs.params.insert("z_value".into(), z_risk.value);
    Ok(RiskEstimate {
        value: mu + sigma * z_risk.value,
        inputs,
        ..z_risk.clone()
    })
}

/// In-sample ex-ante path `μ_t + σ_t·VaR_q(Z)` for `t = 1..T−1`.
pub fn conditional_var_path(fit: &GarchFit, returns: &[f64], z_risk: &RiskEstimate) -> Result<Vec<f64>> {
    check_innovation_provenance(fit, z_risk)?;
    if returns.len() != fit.sigma_path.len() + 1 {
        return Err(Error::LengthMismatch {
            left: returns.len(),
            right: fit.sigma_path.len() + 1,
        });
    }
    Ok(fit
        .sigma_path
        .iter()
        .enumerate()
        .map(|(i, s)| fit.spec.mu + fit.spec.theta * returns[i] + s * z_risk.value)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one_to(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64).collect()
    }

    #[test]
    fn historical_examples() {
        assert_eq!(var_historical(&one_to(100), 0.95).unwrap().value, 95.0);
        assert_eq!(var_historical(&one_to(10), 0.95).unwrap().value, 10.0);
        assert_eq!(var_historical(&[3.5], 0.99).unwrap().value, 3.5);
        assert!(var_historical(&[], 0.99).is_err());
        assert!(var_historical(&one_to(10), 0.4).is_err());
        assert!(var_historical(&one_to(10), 1.0).is_err());
    }

    #[test]
    fn es_historical_examples() {
        assert_eq!(es_historical(&one_to(100), 0.95).unwrap().value, 98.0);
        let mut x = vec![1.0; 19];
        x.push(7.0);
        // VaR is X_(19) = 1, the single tail point is 7
        assert_eq!(es_historical(&x, 0.95).unwrap().value, 7.0);
        assert!(es_historical(&[2.0; 50], 0.95).is_err());
    }

    #[test]
    fn gaussian_examples() {
        assert_abs_diff_eq!(var_gaussian(0.0, 1.0, 0.99).unwrap().value, 2.33, epsilon = 0.005);
        assert_abs_diff_eq!(var_gaussian(0.0, 1.0, 0.95).unwrap().value, 1.65, epsilon = 0.006);
        assert_eq!(var_gaussian(0.3, 0.0, 0.99).unwrap().value, 0.3);
        assert_eq!(es_gaussian(0.3, 0.0, 0.99).unwrap().value, 0.3);
        assert!(var_gaussian(0.0, -1.0, 0.99).is_err());
        // ψ(z_0.99)/0.01
        let z = 2.326_347_874_040_841_f64;
        let want = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() / 0.01;
        assert_abs_diff_eq!(es_gaussian(0.0, 1.0, 0.99).unwrap().value, want, epsilon = 1e-9);
        assert_abs_diff_eq!(want, 2.665, epsilon = 1e-3);
    }

    #[test]
    fn student_examples() {
        let g = var_gaussian(0.1, 2.0, 0.99).unwrap().value;
        let t = var_student(0.1, 2.0, 1e6, 0.99).unwrap().value;
        assert_abs_diff_eq!(t, g, epsilon = 1e-3);
        assert!(var_student(0.0, 1.0, 2.0, 0.99).is_err());
    }

    #[test]
    fn student_matches_inversion_oracle() {
        // bisection on the location-scale t CDF
        let (mu, sigma, nu, q) = (0.2, 1.5, 3.0_f64, 0.99);
        let s = sigma * ((nu - 2.0) / nu).sqrt();
        let cdf = |x: f64| crate::dist::t_cdf((x - mu) / s, nu);
        let (mut lo, mut hi) = (mu, mu + 100.0 * s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert_abs_diff_eq!(var_student(mu, sigma, nu, q).unwrap().value, 0.5 * (lo + hi), epsilon = 1e-8);
    }

    #[test]
    fn student_es_matches_quadrature() {
        let (nu, q) = (5.0_f64, 0.975);
        let s = ((nu - 2.0) / nu).sqrt();
        let v = var_student(0.0, 1.0, nu, q).unwrap().value;
        let tail = crate::quad::integrate(
            |x| x * crate::dist::t_pdf(x / s, nu) / s,
            v,
            v + 2000.0,
            1e-12,
            1e-12,
        );
        let es = es_student(0.0, 1.0, nu, q).unwrap().value;
        assert_abs_diff_eq!(es, tail.value / (1.0 - q), epsilon = 1e-5);
    }

    fn toy_gpd(xi: f64) -> GpdFit {
        GpdFit {
            xi,
            beta: 0.8,
            threshold: 2.0,
            n_exceed: 50,
            n_total: 1000,
            loglik: 0.0,
            std_errors: None,
            irregular: false,
            data_fingerprint: "0".into(),
        }
    }

    #[test]
    fn gpd_var_examples() {
        // n(1−q)/N_u = 1
        assert_abs_diff_eq!(var_gpd(&toy_gpd(0.3), 0.95).unwrap().value, 2.0, epsilon = 1e-12);
        assert!(var_gpd(&toy_gpd(0.3), 0.9).is_err());
        // ξ → 0 continuity
        let a = var_gpd(&toy_gpd(0.0), 0.995).unwrap().value;
        let b = var_gpd(&toy_gpd(1e-5), 0.995).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-4);
        let es = es_gpd(&toy_gpd(0.3), 0.99).unwrap().value;
        assert!(es > var_gpd(&toy_gpd(0.3), 0.99).unwrap().value);
    }

    proptest! {
        #[test]
        fn var_monotone_in_q(
            x in prop::collection::vec(-10.0f64..10.0, 2..200),
            a in 0.5f64..0.999,
            b in 0.5f64..0.999,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(var_historical(&x, lo).unwrap().value <= var_historical(&x, hi).unwrap().value);
            prop_assert!(var_gaussian(0.1, 1.3, lo).unwrap().value <= var_gaussian(0.1, 1.3, hi).unwrap().value);
            prop_assert!(var_student(0.1, 1.3, 4.0, lo).unwrap().value <= var_student(0.1, 1.3, 4.0, hi).unwrap().value + 1e-12);
            let g = toy_gpd(0.2);
            let (glo, ghi) = (lo.max(0.95), hi.max(0.95));
            prop_assert!(var_gpd(&g, glo).unwrap().value <= var_gpd(&g, ghi).unwrap().value);
        }

        #[test]
        fn translation_scale_equivariance(
            x in prop::collection::vec(-10.0f64..10.0, 3..200),
            shift in -5.0f64..5.0,
            scale in 0.1f64..10.0,
            q in 0.5f64..0.999,
        ) {
            let y: Vec<f64> = x.iter().map(|v| shift + scale * v).collect();
            let tol = 1e-9 * (1.0 + shift.abs() + scale * 10.0);
            let h0 = var_historical(&x, q).unwrap().value;
            let h1 = var_historical(&y, q).unwrap().value;
            prop_assert!((h1 - (shift + scale * h0)).abs() <= tol);
            if let (Ok(g0), Ok(g1)) = (var_gaussian_sample(&x, q), var_gaussian_sample(&y, q)) {
                prop_assert!((g1.value - (shift + scale * g0.value)).abs() <= tol);
            }
            if let (Ok(s0), Ok(s1)) = (var_student_sample(&x, 5.0, q), var_student_sample(&y, 5.0, q)) {
                prop_assert!((s1.value - (shift + scale * s0.value)).abs() <= tol);
            }
        }

        #[test]
        fn es_dominates_var(
            x in prop::collection::vec(-10.0f64..10.0, 2..200),
            q in 0.5f64..0.999,
            mu in -1.0f64..1.0,
            sigma in 0.0f64..3.0,
        ) {
            if let Ok(es) = es_historical(&x, q) {
                prop_assert!(es.value >= var_historical(&x, q).unwrap().value);
            }
            prop_assert!(es_gaussian(mu, sigma, q).unwrap().value >= var_gaussian(mu, sigma, q).unwrap().value);
            prop_assert!(es_student(mu, sigma, 4.0, q).unwrap().value >= var_student(mu, sigma, 4.0, q).unwrap().value - 1e-12);
        }

        #[test]
        fn median_level_returns_location(mu in -5.0f64..5.0, sigma in 0.0f64..5.0, nu in 2.1f64..50.0) {
            prop_assert!((var_gaussian(mu, sigma, 0.5).unwrap().value - mu).abs() < 1e-12);
            prop_assert!((var_student(mu, sigma, nu, 0.5).unwrap().value - mu).abs() < 1e-12);
        }
    }
}
