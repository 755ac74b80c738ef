use std::io::Write;

use tailkit_core::linalg::Matrix;
use tailkit_core::mc::{estimate_pi, replicate, sample_mvnormal, sample_normal_box_muller};
use tailkit_core::series::{load_csv, to_returns, ColumnSpec, CsvOptions, ReturnMode};
use tailkit_core::stats::{kendall_tau, summary_stats};
use tailkit_core::RngStream;

fn csv_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn csv_ingestion_and_returns() {
    let f = csv_file("date,close\n2024-01-02,100\n2024-01-03,110\n2024-01-04,99\n");
    let col = ColumnSpec::Name("close".into());
    let s = load_csv(f.path(), &col, &CsvOptions::default()).unwrap();
    assert_eq!(s.values(), &[100.0, 110.0, 99.0]);
    let r = to_returns(&s, ReturnMode::Simple).unwrap();
    assert!((r.values()[0] - 0.1).abs() < 1e-15);
    assert!((r.values()[1] + 0.1).abs() < 1e-15);

    let blank = csv_file("close\n100\n\n101\n,\n102\n");
    assert!(load_csv(blank.path(), &col, &CsvOptions::default()).is_err());
    let skip = CsvOptions {
        skip_invalid: true,
        ..Default::default()
    };
    assert_eq!(load_csv(blank.path(), &col, &skip).unwrap().len(), 3);
}

#[test]
fn normal_kurtosis_and_independent_tau() {
    let mut s = RngStream::new(101, 0);
    let x: Vec<f64> = (0..1_000_000).map(|_| s.normal()).collect();
    let k = summary_stats(&x).unwrap().kurtosis.unwrap();
    assert!((k - 3.0).abs() < 0.05, "{k}");
    let a: Vec<f64> = (0..10_000).map(|_| s.normal()).collect();
    let b: Vec<f64> = (0..10_000).map(|_| s.normal()).collect();
    assert!(kendall_tau(&a, &b).unwrap().abs() < 0.03);
}

#[test]
fn box_muller_moments() {
    let x = sample_normal_box_muller(&mut RngStream::new(102, 0), 1_000_000).unwrap();
    let st = summary_stats(&x).unwrap();
    assert!(st.mean.abs() < 0.004 && (st.std - 1.0).abs() < 0.004, "{st:?}");
}

#[test]
fn mvnormal_identity_has_no_cross_covariance() {
    let rows = sample_mvnormal(&mut RngStream::new(103, 0), 100_000, &Matrix::identity(3)).unwrap();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let c = rows.iter().map(|r| r[i] * r[j]).sum::<f64>() / rows.len() as f64;
            assert!(c.abs() < 0.02, "cov[{i}][{j}] = {c}");
        }
    }
}

#[test]
fn pi_interval_coverage() {
    let covered = replicate(&RngStream::new(104, 0), 100, |_, s| {
        let e = estimate_pi(s, 10_000).unwrap();
        (e.value - std::f64::consts::PI).abs() <= 1.96 * e.std_error
    });
    let hits = covered.iter().filter(|c| **c).count();
    assert!((90..=99).contains(&hits), "{hits}");
}

#[test]
fn seeded_streams_replay() {
    let a = estimate_pi(&mut RngStream::new(7, 3), 1000).unwrap();
    let b = estimate_pi(&mut RngStream::new(7, 3), 1000).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let big = estimate_pi(&mut RngStream::new(7, 0), 1_000_000).unwrap();
    assert!((big.value - std::f64::consts::PI).abs() < 0.005);
}
