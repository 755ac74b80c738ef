//! Ingestion and representation of price / return / loss series.

use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Sign and scale convention of a series' values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Price,
    SimpleReturn,
    LogReturn,
    /// Positive values are losses.
    Loss,
}

impl std::str::FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "price" => Ok(Convention::Price),
            "simple-return" | "simple" => Ok(Convention::SimpleReturn),
            "log-return" | "log" => Ok(Convention::LogReturn),
            "loss" => Ok(Convention::Loss),
            other => Err(invalid(format!("unknown convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    Simple,
    Log,
}

/// An ordered series of finite observations with an optional date index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    timestamps: Option<Vec<NaiveDate>>,
    values: Vec<f64>,
    convention: Convention,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, convention: Convention) -> Result<Self> {
        Self::build(None, values, convention)
    }

    pub fn with_timestamps(
        timestamps: Vec<NaiveDate>,
        values: Vec<f64>,
        convention: Convention,
    ) -> Result<Self> {
        Self::build(Some(timestamps), values, convention)
    }

    fn build(
        timestamps: Option<Vec<NaiveDate>>,
        values: Vec<f64>,
        convention: Convention,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData {
                what: "series values",
                needed: 1,
                got: 0,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("value at index {i} is not finite")));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.len() {
                return Err(Error::LengthMismatch {
                    left: ts.len(),
                    right: values.len(),
                });
            }
            if let Some(i) = ts.windows(2).position(|w| w[1] <= w[0]) {
                return Err(invalid(format!(
                    "timestamps must be strictly increasing (index {})",
                    i + 1
                )));
            }
        }
        Ok(Self {
            timestamps,
            values,
            convention,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn timestamps(&self) -> Option<&[NaiveDate]> {
        self.timestamps.as_deref()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flips the sign of a return series into loss convention.
    pub fn to_losses(&self) -> Result<ReturnSeries> {
        match self.convention {
            Convention::Loss => Ok(self.clone()),
            Convention::SimpleReturn | Convention::LogReturn => Ok(Self {
                timestamps: self.timestamps.clone(),
                values: self.values.iter().map(|v| -v).collect(),
                convention: Convention::Loss,
            }),
            Convention::Price => Err(invalid(
                "convert prices to returns before switching to losses",
            )),
        }
    }

    /// Writes `timestamp,value` rows; the timestamp column holds the row
    /// index when the series has no dates.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["timestamp", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            let t = match &self.timestamps {
                Some(ts) => ts[i].format("%Y-%m-%d").to_string(),
                None => i.to_string(),
            };
            wtr.write_record([t, format_f64(*v)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// JSON array of `{t, v}` objects.
    pub fn to_json(&self) -> serde_json::Value {
        let points = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = match &self.timestamps {
                    Some(ts) => serde_json::Value::String(ts[i].format("%Y-%m-%d").to_string()),
                    None => serde_json::Value::from(i),
                };
                serde_json::json!({ "t": t, "v": v })
            })
            .collect();
        serde_json::Value::Array(points)
    }
}

/// Formats a float with 17 significant digits so it parses back bit-exactly.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

/// FNV-1a digest of the bit patterns of `x`, as 16 hex digits. Used to tie
/// derived estimates to the exact vector they were computed from.
pub fn fingerprint(x: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in x {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Column selector for CSV ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSpec {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for ColumnSpec {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSpec::Index(i),
            Err(_) => ColumnSpec::Name(s.to_string()),
        })
    }
}

impl ColumnSpec {
    fn resolve(&self, headers: &csv::StringRecord) -> Result<usize> {
        match self {
            ColumnSpec::Index(i) if *i < headers.len() => Ok(*i),
            ColumnSpec::Index(i) => Err(Error::MissingColumn(format!("#{i}"))),
            ColumnSpec::Name(name) => headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::MissingColumn(name.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvOptions {
    /// Field separator; `;` for files with decimal-comma locales' exports.
    pub separator: u8,
    /// Drop rows whose value cell is blank or unparseable instead of failing.
    pub skip_invalid: bool,
    /// Optional date column (`YYYY-MM-DD` or `DD/MM/YYYY`).
    pub date_column: Option<ColumnSpec>,
    pub convention: Convention,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            separator: b',',
            skip_invalid: false,
            date_column: None,
            convention: Convention::Price,
        }
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%d/%m/%Y"))
        .ok()
}

/// Reads one numeric column of a headered CSV file.
pub fn load_csv(path: &Path, column: &ColumnSpec, opts: &CsvOptions) -> Result<ReturnSeries> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_csv(file, column, opts)
}

pub fn read_csv<R: std::io::Read>(
    reader: R,
    column: &ColumnSpec,
    opts: &CsvOptions,
) -> Result<ReturnSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.separator)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = column.resolve(&headers)?;
    let date_col = opts
        .date_column
        .as_ref()
        .map(|c| c.resolve(&headers))
        .transpose()?;

    let mut values = Vec::new();
    let mut dates = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // data rows are 1-based after the header line
        let row = i + 2;
        let cell = rec.get(col).unwrap_or("").trim();
        let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
        let date = match date_col {
            Some(dc) => {
                let raw = rec.get(dc).unwrap_or("");
                match parse_date(raw) {
                    Some(d) => Some(d),
                    None if opts.skip_invalid => continue,
                    None => {
                        return Err(Error::Parse {
                            row,
                            value: raw.to_string(),
                        })
                    }
                }
            }
            None => None,
        };
        match parsed {
            Some(v) => {
                values.push(v);
                if let Some(d) = date {
                    dates.push(d);
                }
            }
            None if opts.skip_invalid => continue,
            None => {
                return Err(Error::Parse {
                    row,
                    value: cell.to_string(),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::InsufficientData {
            what: "parsed rows",
            needed: 1,
            got: 0,
        });
    }
    if date_col.is_some() {
        ReturnSeries::with_timestamps(dates, values, opts.convention)
    } else {
        ReturnSeries::new(values, opts.convention)
    }
}

/// Price series to simple (`P_t/P_{t−1} − 1`) or log (`ln(P_t/P_{t−1})`)
/// returns; the result has one observation fewer.
pub fn to_returns(series: &ReturnSeries, mode: ReturnMode) -> Result<ReturnSeries> {
    if series.convention() != Convention::Price {
        return Err(invalid(format!(
            "to_returns expects a price series, got {:?}",
            series.convention()
        )));
    }
    let p = series.values();
    if p.len() < 2 {
        return Err(Error::InsufficientData {
            what: "prices",
            needed: 2,
            got: p.len(),
        });
    }
    let values: Vec<f64> = match mode {
        ReturnMode::Simple => {
            if let Some(i) = p[..p.len() - 1].iter().position(|&x| x == 0.0) {
                return Err(invalid(format!("zero price at index {i}")));
            }
            p.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
        }
        ReturnMode::Log => {
            if let Some(i) = p.iter().position(|&x| x <= 0.0) {
                return Err(invalid(format!(
                    "log returns need positive prices (index {i} is {})",
                    p[i]
                )));
            }
            p.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
        }
    };
    let convention = match mode {
        ReturnMode::Simple => Convention::SimpleReturn,
        ReturnMode::Log => Convention::LogReturn,
    };
    match series.timestamps() {
        Some(ts) => ReturnSeries::with_timestamps(ts[1..].to_vec(), values, convention),
        None => ReturnSeries::new(values, convention),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prices(v: &[f64]) -> ReturnSeries {
        ReturnSeries::new(v.to_vec(), Convention::Price).unwrap()
    }

    #[test]
    fn simple_and_log_returns() {
        let r = to_returns(&prices(&[100.0, 110.0]), ReturnMode::Simple).unwrap();
        assert!((r.values()[0] - 0.10).abs() < 1e-15);
        let r = to_returns(&prices(&[100.0, 100.0]), ReturnMode::Log).unwrap();
        assert_eq!(r.values(), &[0.0]);
        assert_eq!(r.convention(), Convention::LogReturn);
    }

    #[test]
    fn log_returns_reject_nonpositive_price() {
        assert!(to_returns(&prices(&[100.0, -5.0]), ReturnMode::Log).is_err());
        assert!(to_returns(&prices(&[100.0]), ReturnMode::Simple).is_err());
    }

    #[test]
    fn series_invariants() {
        assert!(ReturnSeries::new(vec![], Convention::Loss).is_err());
        assert!(ReturnSeries::new(vec![1.0, f64::NAN], Convention::Loss).is_err());
        let d = |s| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert!(ReturnSeries::with_timestamps(
            vec![d("2020-01-02"), d("2020-01-02")],
            vec![1.0, 2.0],
            Convention::Price
        )
        .is_err());
    }

    #[test]
    fn csv_value_column() {
        let data = "date,close\n2020-01-01,1.5\n2020-01-02,2.5\n2020-01-03,3.5\n";
        let opts = CsvOptions {
            date_column: Some(ColumnSpec::Name("date".into())),
            ..Default::default()
        };
        let s = read_csv(data.as_bytes(), &ColumnSpec::Name("close".into()), &opts).unwrap();
        assert_eq!(s.values(), &[1.5, 2.5, 3.5]);
        assert_eq!(s.timestamps().unwrap().len(), 3);
        let s = read_csv(data.as_bytes(), &ColumnSpec::Index(1), &CsvOptions::default()).unwrap();
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn csv_blank_cell_rejected_unless_skipped() {
        let data = "close\n1.0\n\n3.0\n";
        // csv skips fully empty lines, so use an explicit empty field
        let data2 = "a,close\nx,1.0\ny,\nz,3.0\n";
        let col = ColumnSpec::Name("close".into());
        assert_eq!(read_csv(data.as_bytes(), &col, &CsvOptions::default()).unwrap().len(), 2);
        let err = read_csv(data2.as_bytes(), &col, &CsvOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
        let opts = CsvOptions {
            skip_invalid: true,
            ..Default::default()
        };
        assert_eq!(read_csv(data2.as_bytes(), &col, &opts).unwrap().len(), 2);
    }

    #[test]
    fn csv_semicolon_and_errors() {
        let data = "d;v\n02/01/2020;1\n03/01/2020;2\n";
        let opts = CsvOptions {
            separator: b';',
            date_column: Some(ColumnSpec::Index(0)),
            ..Default::default()
        };
        let s = read_csv(data.as_bytes(), &ColumnSpec::Name("v".into()), &opts).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        let missing = read_csv(data.as_bytes(), &ColumnSpec::Name("w".into()), &opts);
        assert!(matches!(missing, Err(Error::MissingColumn(_))));
        let empty = read_csv("v\n".as_bytes(), &ColumnSpec::Index(0), &CsvOptions::default());
        assert!(matches!(empty, Err(Error::InsufficientData { .. })));
        let nofile = load_csv(
            Path::new("/nonexistent/file.csv"),
            &ColumnSpec::Index(0),
            &CsvOptions::default(),
        );
        assert!(matches!(nofile, Err(Error::MissingFile(_))));
    }

    #[test]
    fn csv_and_json_export() {
        let s = ReturnSeries::new(vec![0.1, -0.25], Convention::LogReturn).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("timestamp,value\n0,"));
        let back = read_csv(text.as_bytes(), &ColumnSpec::Name("value".into()), &CsvOptions::default())
            .unwrap();
        assert_eq!(back.values(), s.values());
        let j = s.to_json();
        assert_eq!(j[1]["t"], 1);
        assert_eq!(j[1]["v"], -0.25);
    }

    #[test]
    fn losses_flip_sign() {
        let s = ReturnSeries::new(vec![0.1, -0.2], Convention::SimpleReturn).unwrap();
        assert_eq!(s.to_losses().unwrap().values(), &[-0.1, 0.2]);
        assert!(prices(&[1.0]).to_losses().is_err());
    }

    proptest! {
        #[test]
        fn simple_and_log_agree_to_first_order(p0 in 1.0f64..1e4, r in -0.45f64..0.45) {
            let p1 = p0 * (1.0 + r);
            let s = to_returns(&prices(&[p0, p1]), ReturnMode::Simple).unwrap().values()[0];
            let l = to_returns(&prices(&[p0, p1]), ReturnMode::Log).unwrap().values()[0];
            // |s − ln(1+s)| ≤ s²/(2(1−|s|)) on |s| < 1
            prop_assert!((s - l).abs() <= s * s / 2.0 / (1.0 - s.abs()) + 1e-12);
        }

        #[test]
        fn formatted_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let back: f64 = format_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
