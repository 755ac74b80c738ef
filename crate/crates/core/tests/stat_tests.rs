use tailkit_core::garch::{simulate_garch, GarchSpec};
use tailkit_core::htest::{
    adf_test, arch_lm, df_null_statistics, durbin_watson, engle_granger_coint, jarque_bera, ks_two_sample,
    lilliefors_table, lilliefors_with_table, ljung_box, ols_fit, AdfOptions, CointOptions, DfVariant,
};
use tailkit_core::linalg::Matrix;
use tailkit_core::mc::{replicate, sample_inverse_transform, InverseTarget};
use tailkit_core::RngStream;

fn normals(s: &mut RngStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| s.normal()).collect()
}

fn random_walk(s: &mut RngStream, n: usize) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            level += s.normal();
            level
        })
        .collect()
}

fn ar1(s: &mut RngStream, n: usize, theta: f64) -> Vec<f64> {
    let mut y = 0.0;
    (0..n)
        .map(|_| {
            y = theta * y + s.normal();
            y
        })
        .collect()
}

fn rejection_rate(flags: &[bool]) -> f64 {
    flags.iter().filter(|f| **f).count() as f64 / flags.len() as f64
}

#[test]
fn ljung_box_power_and_size() {
    let y = ar1(&mut RngStream::new(71, 0), 1000, 0.9);
    assert_eq!(ljung_box(&y, 10, 0).unwrap().rejects(0.05), Some(true));
    let flags = replicate(&RngStream::new(72, 0), 500, |_, s| {
        ljung_box(&normals(s, 1000), 10, 0).unwrap().rejects(0.05) == Some(true)
    });
    let r = rejection_rate(&flags);
    assert!((0.03..=0.07).contains(&r), "{r}");
}

#[test]
fn jarque_bera_size_and_power() {
    let flags = replicate(&RngStream::new(73, 0), 500, |_, s| {
        jarque_bera(&normals(s, 10_000)).unwrap().statistic > 5.99
    });
    let r = rejection_rate(&flags);
    assert!((0.03..=0.07).contains(&r), "{r}");
    let mut s = RngStream::new(74, 0);
    let t4: Vec<f64> = (0..10_000).map(|_| s.student_t(4.0)).collect();
    assert_eq!(jarque_bera(&t4).unwrap().rejects(0.05), Some(true));
}

#[test]
fn two_sample_ks_size() {
    let p_values = replicate(&RngStream::new(75, 0), 500, |_, s| {
        ks_two_sample(&normals(s, 1000), &normals(s, 1000)).unwrap().p_value.unwrap()
    });
    let r = p_values.iter().filter(|p| **p < 0.05).count() as f64 / 500.0;
    assert!((0.02..=0.08).contains(&r), "{r}");
    // p-values spread over the unit interval
    let low = p_values.iter().filter(|p| **p < 0.5).count() as f64 / 500.0;
    assert!((0.4..=0.6).contains(&low), "{low}");
}

#[test]
fn lilliefors_size_and_power() {
    let table = lilliefors_table(100, 5000, &RngStream::new(76, 0)).unwrap();
    let size = replicate(&RngStream::new(77, 0), 500, |_, s| {
        lilliefors_with_table(&normals(s, 100), &table).unwrap().rejects(0.05) == Some(true)
    });
    let r = rejection_rate(&size);
    assert!((0.03..=0.07).contains(&r), "size {r}");
    let power = replicate(&RngStream::new(78, 0), 200, |_, s| {
        let x = sample_inverse_transform(s, 100, InverseTarget::Exponential { alpha: 1.0 }).unwrap();
        lilliefors_with_table(&x, &table).unwrap().rejects(0.05) == Some(true)
    });
    let p = rejection_rate(&power);
    assert!(p > 0.9, "power {p}");
}

#[test]
fn arch_lm_size_and_power() {
    let below = replicate(&RngStream::new(79, 0), 500, |_, s| {
        arch_lm(&normals(s, 1000), 1).unwrap().statistic < 3.84
    });
    let r = rejection_rate(&below);
    assert!((0.93..=0.97).contains(&r), "{r}");
    let spec = GarchSpec::normal(0.0, 0.0, 1.0, 0.5, 0.0);
    let x = simulate_garch(&mut RngStream::new(80, 0), &spec, 1000).unwrap();
    assert_eq!(arch_lm(&x, 1).unwrap().rejects(0.05), Some(true));
}

#[test]
fn durbin_watson_spurious_and_iid() {
    let mut s = RngStream::new(81, 0);
    let y = random_walk(&mut s, 1000);
    let x = random_walk(&mut s, 1000);
    let fit = ols_fit(&y, &Matrix::from_columns(&[x]).unwrap(), true).unwrap();
    let d = durbin_watson(&fit.residuals).unwrap();
    assert!(d < 0.5, "{d}");
    let d = durbin_watson(&normals(&mut s, 1000)).unwrap();
    assert!((d - 2.0).abs() < 0.15, "{d}");
}

#[test]
fn adf_examples() {
    let opts = AdfOptions {
        variant: DfVariant::N,
        ..Default::default()
    };
    let mut s = RngStream::new(82, 0);
    let walk = random_walk(&mut s, 500);
    assert_eq!(adf_test(&walk, &opts).unwrap().rejects(0.05), Some(false));
    let stationary = ar1(&mut s, 500, 0.5);
    assert_eq!(adf_test(&stationary, &opts).unwrap().rejects(0.05), Some(true));
    let noise = normals(&mut s, 500);
    assert!(adf_test(&noise, &opts).unwrap().statistic < -1.96);
}

/// Bootstrap standard error of the empirical 5% quantile.
fn quantile_se(sorted: &[f64], s: &mut RngStream) -> f64 {
    let n = sorted.len();
    let k = (0.05 * n as f64) as usize;
    let reps: Vec<f64> = (0..400)
        .map(|_| {
            let mut b: Vec<f64> = (0..n).map(|_| sorted[(s.uniform() * n as f64) as usize]).collect();
            b.sort_by(f64::total_cmp);
            b[k]
        })
        .collect();
    let m = reps.iter().sum::<f64>() / reps.len() as f64;
    (reps.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64).sqrt()
}

#[test]
fn df_quantile_error_halves_with_four_times_the_runs() {
    let small = df_null_statistics(DfVariant::C, 100, 2000, &RngStream::new(83, 0)).unwrap();
    let large = df_null_statistics(DfVariant::C, 100, 8000, &RngStream::new(84, 0)).unwrap();
    let mut s = RngStream::new(85, 0);
    let ratio = quantile_se(&large, &mut s) / quantile_se(&small, &mut s);
    assert!((0.35..=0.7).contains(&ratio), "{ratio}");
}

#[test]
fn engle_granger_examples() {
    let opts = CointOptions::default();
    let mut s = RngStream::new(86, 0);
    let y = random_walk(&mut s, 500);
    let x = random_walk(&mut s, 500);
    assert_eq!(engle_granger_coint(&y, &x, &opts).unwrap().rejects(0.05), Some(false));
    // y_t = 0.5 y_{t-1} + 0.8 x_t + e_t
    let mut yc = Vec::with_capacity(500);
    let mut prev = 0.0;
    for xt in &x {
        prev = 0.5 * prev + 0.8 * xt + s.normal();
        yc.push(prev);
    }
    assert_eq!(engle_granger_coint(&yc, &x, &opts).unwrap().rejects(0.05), Some(true));
}
