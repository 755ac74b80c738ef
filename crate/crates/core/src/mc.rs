//! Random variate generation and Monte Carlo estimation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky, Matrix};
use crate::rng::RngStream;

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
    pub n: usize,
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("draw count must be at least 1"))
    } else {
        Ok(())
    }
}

pub fn sample_uniform(stream: &mut RngStream, n: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    check_count(n)?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("uniform bounds need a < b, got [{a}, {b})")));
    }
    let width = b - a;
    Ok((0..n)
        .map(|_| {
            let x = a + width * stream.uniform();
            // rounding can land exactly on b for huge widths
            if x < b {
                x
            } else {
                a
            }
        })
        .collect())
}

/// Box-Muller transform, cosine branch: `√(−2 ln u1) · cos(2π u2)`.
pub fn box_muller(u1: f64, u2: f64) -> f64 {
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn sample_normal_box_muller(stream: &mut RngStream, n: usize) -> Result<Vec<f64>> {
    check_count(n)?;
    Ok((0..n).map(|_| stream.normal()).collect())
}

/// Target laws for inverse-transform sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InverseTarget {
    /// Exponential with rate `alpha` (mean `1/alpha`).
    Exponential { alpha: f64 },
    /// Pareto type I with tail index `alpha` and scale `x_m`.
    Pareto { alpha: f64, x_m: f64 },
}

impl InverseTarget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InverseTarget::Exponential { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            InverseTarget::Pareto { alpha, x_m }
                if alpha > 0.0 && x_m > 0.0 && alpha.is_finite() && x_m.is_finite() =>
            {
                Ok(())
            }
            _ => Err(invalid(format!("non-positive parameter in {self:?}"))),
        }
    }

    /// `F⁻¹(u)` for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            InverseTarget::Exponential { alpha } => -(-u).ln_1p() / alpha,
            InverseTarget::Pareto { alpha, x_m } => x_m * (1.0 - u).powf(-1.0 / alpha),
        }
    }
}

pub fn sample_inverse_transform(
    stream: &mut RngStream,
    n: usize,
    target: InverseTarget,
) -> Result<Vec<f64>> {
    check_count(n)?;
    target.validate()?;
    Ok((0..n).map(|_| target.quantile(stream.uniform())).collect())
}

/// Draws `n` rows from `N(0, cov)` as `L·z` with `L` the Cholesky factor.
pub fn sample_mvnormal(stream: &mut RngStream, n: usize, cov: &Matrix) -> Result<Vec<Vec<f64>>> {
    check_count(n)?;
    let l = cholesky(cov)?;
    let d = l.rows();
    let mut z = vec![0.0; d];
    Ok((0..n)
        .map(|_| {
            z.iter_mut().for_each(|v| *v = stream.normal());
            l.mul_vec(&z)
        })
        .collect())
}

/// Sample covariance (divisor `n − 1`) of row samples.
pub fn sample_covariance(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "covariance rows",
            needed: 2,
            got: n,
        });
    }
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = Matrix::zeros(d, d);
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            cov[(i, j)] /= (n - 1) as f64;
        }
    }
    Ok(cov)
}

/// Estimates π from the share of uniform points of `[−1,1]²` inside the unit
/// disk.
pub fn estimate_pi(stream: &mut RngStream, n: usize) -> Result<McEstimate> {
    check_count(n)?;
    let mut inside = 0usize;
    for _ in 0..n {
        let x = 2.0 * stream.uniform() - 1.0;
        let y = 2.0 * stream.uniform() - 1.0;
        if x * x + y * y <= 1.0 {
            inside += 1;
        }
    }
    Ok(pi_from_hits(inside, n))
}

/// Estimate from a raw count: `4·p̂` with standard error `4·√(p̂(1−p̂)/n)`.
pub fn pi_from_hits(inside: usize, n: usize) -> McEstimate {
    let p = inside as f64 / n as f64;
    McEstimate {
        value: 4.0 * p,
        std_error: 4.0 * (p * (1.0 - p) / n as f64).sqrt(),
        n,
    }
}

/// Axis-aligned integration box, one `(lower, upper)` pair per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationBox(pub Vec<(f64, f64)>);

impl IntegrationBox {
    pub fn unit(dim: usize) -> Self {
        Self(vec![(0.0, 1.0); dim])
    }

    pub fn volume(&self) -> f64 {
        self.0.iter().map(|(a, b)| b - a).product()
    }
}

/// Plain Monte Carlo integration of `f` over a box:
/// value `V·mean f(Xᵢ)`, standard error `V·sd(f(Xᵢ))/√n`.
pub fn mc_integrate<F>(
    stream: &mut RngStream,
    f: F,
    domain: &IntegrationBox,
    n: usize,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "integration draws",
            needed: 2,
            got: n,
        });
    }
    if domain.0.is_empty() {
        return Err(invalid("integration domain has no dimensions"));
    }
    let volume = domain.volume();
    if !(volume > 0.0) || !volume.is_finite() || domain.0.iter().any(|(a, b)| !(b > a)) {
        return Err(invalid(format!(
            "integration domain must have finite positive volume, got {volume}"
        )));
    }
    let mut point = vec![0.0; domain.0.len()];
    // Welford accumulation
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        for (x, (a, b)) in point.iter_mut().zip(&domain.0) {
            *x = a + (b - a) * stream.uniform();
        }
        let y = f(&point);
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(McEstimate {
        value: volume * mean,
        std_error: volume * var.max(0.0).sqrt() / (n as f64).sqrt(),
        n,
    })
}

/// Runs `job` once per child stream `0..runs` of `stream`, in parallel, and
/// returns the results ordered by child index.
pub fn replicate<T, F>(stream: &RngStream, runs: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut RngStream) -> T + Sync,
{
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut child = stream.fork(i as u64);
            job(i, &mut child)
        })
        .collect()
}
