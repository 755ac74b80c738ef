use tailkit_core::copula::{fit_cml, fit_tau_inversion, sample_copula, CopulaSpec, Family, PseudoSample};
use tailkit_core::htest::ks_one_sample;
use tailkit_core::mc::replicate;
use tailkit_core::stats::kendall_tau;
use tailkit_core::RngStream;

fn parameter(spec: &CopulaSpec) -> f64 {
    match *spec {
        CopulaSpec::Gaussian { rho } | CopulaSpec::StudentT { rho, .. } => rho,
        CopulaSpec::Clayton { theta } | CopulaSpec::Gumbel { theta } | CopulaSpec::Frank { theta } => theta,
        CopulaSpec::Independence => 0.0,
    }
}

#[test]
fn gaussian_zero_correlation_sample_has_no_concordance() {
    let s = sample_copula(&mut RngStream::new(41, 0), &CopulaSpec::Gaussian { rho: 0.0 }, 10_000).unwrap();
    let tau = kendall_tau(&s.u, &s.v).unwrap();
    assert!(tau.abs() < 0.03, "{tau}");
}

#[test]
fn gumbel_sample_tau() {
    let s = sample_copula(&mut RngStream::new(42, 0), &CopulaSpec::Gumbel { theta: 2.0 }, 10_000).unwrap();
    let tau = kendall_tau(&s.u, &s.v).unwrap();
    assert!((tau - 0.5).abs() < 0.03, "{tau}");
}

#[test]
fn sampled_margins_are_uniform() {
    let specs = [
        CopulaSpec::Gaussian { rho: 0.6 },
        CopulaSpec::StudentT { rho: -0.4, nu: 4.0 },
        CopulaSpec::Clayton { theta: 3.0 },
        CopulaSpec::Gumbel { theta: 2.0 },
        CopulaSpec::Frank { theta: -5.0 },
    ];
    for spec in specs {
        let passed = replicate(&RngStream::new(43, 0), 100, |_, s| {
            let p = sample_copula(s, &spec, 500).unwrap();
            let ku = ks_one_sample(&p.u, |x| x).unwrap().rejects(0.05) == Some(false);
            let kv = ks_one_sample(&p.v, |x| x).unwrap().rejects(0.05) == Some(false);
            (ku, kv)
        });
        let u_ok = passed.iter().filter(|p| p.0).count();
        let v_ok = passed.iter().filter(|p| p.1).count();
        assert!(u_ok >= 90 && v_ok >= 90, "{spec:?}: {u_ok}, {v_ok} of 100");
    }
}

#[test]
fn tau_inversion_round_trip_for_each_family() {
    let cases = [
        (CopulaSpec::Gaussian { rho: 0.5 }, None),
        (CopulaSpec::StudentT { rho: -0.3, nu: 5.0 }, Some(5.0)),
        (CopulaSpec::Clayton { theta: 2.0 }, None),
        (CopulaSpec::Gumbel { theta: 1.5 }, None),
        (CopulaSpec::Frank { theta: 4.0 }, None),
    ];
    let (runs, n) = (40, 1000);
    for (spec, nu) in cases {
        let est = replicate(&RngStream::new(44, 0), runs, |_, s| {
            let p = sample_copula(s, &spec, n).unwrap();
            let tau = kendall_tau(&p.u, &p.v).unwrap();
            parameter(&fit_tau_inversion(tau, spec.family(), nu).unwrap())
        });
        let mean = est.iter().sum::<f64>() / runs as f64;
        let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
        let se = sd / (runs as f64).sqrt();
        let truth = parameter(&spec);
        assert!((mean - truth).abs() < 3.0 * se, "{spec:?}: mean {mean}, se {se}");
    }
}

#[test]
fn cml_on_independent_uniforms_stays_at_gumbel_boundary() {
    let mut s = RngStream::new(45, 0);
    let u: Vec<f64> = (0..5000).map(|_| s.uniform_open0()).collect();
    let v: Vec<f64> = (0..5000).map(|_| s.uniform_open0()).collect();
    let fit = fit_cml(&PseudoSample::new(u, v).unwrap(), Family::Gumbel).unwrap();
    let theta = parameter(&fit.spec);
    assert!((1.0..=1.05).contains(&theta), "{theta}");
}

#[test]
fn cml_recovers_gumbel_parameter() {
    let s = sample_copula(&mut RngStream::new(46, 0), &CopulaSpec::Gumbel { theta: 2.0 }, 5000).unwrap();
    let fit = fit_cml(&s, Family::Gumbel).unwrap();
    let theta = parameter(&fit.spec);
    assert!((theta - 2.0).abs() < 0.15, "{theta}");
}
