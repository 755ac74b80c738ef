//! CDF, survival and quantile kernels for the reference distributions used by
//! the tests and risk measures.
//!
//! Special functions come from `libm` (erfc) and `statrs` (inverse erfc,
//! regularized incomplete beta and gamma); everything here adds domain
//! checking and the Kolmogorov distribution.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::{beta, erf, gamma};

use crate::error::{invalid, Result};

/// A single kernel evaluation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum Kernel {
    NormCdf { x: f64 },
    NormPpf { p: f64 },
    TCdf { x: f64, nu: f64 },
    TPpf { p: f64, nu: f64 },
    Chi2Sf { x: f64, k: f64 },
}

impl Kernel {
    pub fn evaluate(self) -> Result<f64> {
        match self {
            Kernel::NormCdf { x } => {
                check_not_nan(x)?;
                Ok(norm_cdf(x))
            }
            Kernel::NormPpf { p } => {
                check_open_prob(p)?;
                Ok(norm_ppf(p))
            }
            Kernel::TCdf { x, nu } => {
                check_not_nan(x)?;
                check_dof(nu)?;
                Ok(t_cdf(x, nu))
            }
            Kernel::TPpf { p, nu } => {
                check_open_prob(p)?;
                check_dof(nu)?;
                Ok(t_ppf(p, nu))
            }
            Kernel::Chi2Sf { x, k } => {
                check_not_nan(x)?;
                if !(k >= 1.0) {
                    return Err(invalid(format!("chi-squared dof must be >= 1, got {k}")));
                }
                Ok(chi2_sf(x, k))
            }
        }
    }
}

fn check_not_nan(x: f64) -> Result<()> {
    if x.is_nan() {
        Err(invalid("argument is NaN"))
    } else {
        Ok(())
    }
}

fn check_open_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("probability must lie in (0,1), got {p}")))
    }
}

fn check_dof(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("degrees of freedom must be positive, got {nu}")))
    }
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Standard normal quantile; `p` must lie in `(0,1)`.
pub fn norm_ppf(p: f64) -> f64 {
    -SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Density of the standard Student-t.
pub fn t_pdf(x: f64, nu: f64) -> f64 {
    t_ln_pdf(x, nu).exp()
}

pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    gamma::ln_gamma(0.5 * (nu + 1.0))
        - gamma::ln_gamma(0.5 * nu)
        - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta::beta_reg(0.5 * nu, 0.5, nu / (nu + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student-t quantile; `p` must lie in `(0,1)`.
pub fn t_ppf(p: f64, nu: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let lower = p.min(1.0 - p);
    let y = beta::inv_beta_reg(0.5 * nu, 0.5, 2.0 * lower);
    let mut x = (nu * (1.0 - y) / y).sqrt();
    if p < 0.5 {
        x = -x;
    }
    // one Newton polish on the CDF
    let f = t_pdf(x, nu);
    if f > 0.0 {
        let step = (t_cdf(x, nu) - p) / f;
        if step.is_finite() && step.abs() < 1e-3 * (1.0 + x.abs()) {
            x -= step;
        }
    }
    x
}

/// Chi-squared survival function `P(X > x)`.
pub fn chi2_sf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma::gamma_ur(0.5 * k, 0.5 * x)
}

pub fn chi2_cdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma::gamma_lr(0.5 * k, 0.5 * x)
}

/// Chi-squared quantile by safeguarded Newton iteration.
pub fn chi2_ppf(p: f64, k: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0 && k > 0.0);
    // Wilson-Hilferty start
    let z = norm_ppf(p);
    let h = 2.0 / (9.0 * k);
    let mut x = (k * (1.0 - h + z * h.sqrt()).powi(3)).max(1e-8);
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let c = chi2_cdf(x, k);
        if c < p {
            lo = x;
        } else {
            hi = x;
        }
        let dens = chi2_pdf(x, k);
        let mut next = if dens > 0.0 { x - (c - p) / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x + 1.0 };
        }
        if (next - x).abs() <= 1e-14 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

pub fn chi2_pdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 0.5 * k;
    ((a - 1.0) * x.ln() - 0.5 * x - a * std::f64::consts::LN_2 - gamma::ln_gamma(a)).exp()
}

/// Asymptotic Kolmogorov survival function
/// `P(K > r) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2k²r²)`.
pub fn kolmogorov_sf(r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r < 0.2 {
        // the alternating series converges slowly here; the value is 1 to
        // machine precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * r * r).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_reference_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert_abs_diff_eq!(norm_cdf(1.96), 0.975_002_104_851_780, epsilon = 1e-15);
        assert_abs_diff_eq!(norm_ppf(0.975), 1.959_963_984_540_054, epsilon = 1e-12);
        // 2.33 at 99%, 1.65 at 95%
        assert_abs_diff_eq!(norm_ppf(0.99), 2.33, epsilon = 0.005);
        assert_abs_diff_eq!(norm_ppf(0.95), 1.65, epsilon = 0.006);
        assert_abs_diff_eq!(norm_ppf(0.99), 2.326_347_874_040_841, epsilon = 1e-10);
    }

    #[test]
    fn student_reference_points() {
        assert_abs_diff_eq!(t_ppf(0.975, 10.0), 2.228_138_851_964_938_5, epsilon = 1e-9);
        assert_abs_diff_eq!(t_ppf(0.99, 3.0), 4.540_702_858_471_383, epsilon = 1e-8);
        assert_abs_diff_eq!(t_cdf(2.0, 5.0), 0.949_030_260_585_070_3, epsilon = 1e-10);
        assert_abs_diff_eq!(t_ppf(0.01, 4.0), -3.746_947_387_981_137_5, epsilon = 1e-8);
        assert_abs_diff_eq!(t_cdf(t_ppf(0.3, 2.5), 2.5), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn chi_squared_reference_points() {
        // the 5.99 threshold for two degrees of freedom
        assert_abs_diff_eq!(chi2_sf(5.99, 2.0), 0.05, epsilon = 1e-3);
        assert_abs_diff_eq!(chi2_sf(5.991_464_547_107_979, 2.0), 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(chi2_ppf(0.95, 1.0), 3.841_458_820_694_124, epsilon = 1e-9);
        assert_abs_diff_eq!(chi2_ppf(0.95, 3.0), 7.814_727_903_251_178, epsilon = 1e-9);
        assert_eq!(chi2_sf(0.0, 4.0), 1.0);
    }

    #[test]
    fn kolmogorov_reference_points() {
        assert_abs_diff_eq!(kolmogorov_sf(1.36), 0.049_485_876_755_377_876, epsilon = 1e-9);
        assert_abs_diff_eq!(kolmogorov_sf(1.0), 0.269_999_671_677_355_3, epsilon = 1e-9);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn kernel_domain_errors() {
        assert!(Kernel::NormPpf { p: 0.0 }.evaluate().is_err());
        assert!(Kernel::NormPpf { p: 1.0 }.evaluate().is_err());
        assert!(Kernel::TPpf { p: 0.5, nu: 0.0 }.evaluate().is_err());
        assert!(Kernel::Chi2Sf { x: 1.0, k: 0.5 }.evaluate().is_err());
        assert_eq!(Kernel::NormCdf { x: 0.0 }.evaluate().unwrap(), 0.5);
    }
}
