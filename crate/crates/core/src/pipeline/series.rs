use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::History;
use crate::scada::TruthRecord;

/// Truth CSV channels after `t`; angles are degrees on disk.
pub const TRUTH_CHANNELS: [&str; 4] = ["v_mag", "v_angle", "i_mag", "i_angle"];
/// Historical series channels after `t`.
pub const HISTORY_CHANNELS: [&str; 3] = ["v", "p", "q"];

/// Validated time series: strictly increasing `t` and finite named channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFile {
    channels: Vec<String>,
    t: Vec<f64>,
    /// Column-major channel data, same order as `channels`.
    data: Vec<Vec<f64>>,
}

impl SeriesFile {
    pub fn new(channels: Vec<String>, t: Vec<f64>, data: Vec<Vec<f64>>) -> Result<Self> {
        if channels.len() != data.len() || data.iter().any(|c| c.len() != t.len()) {
            return Err(Error::invalid("series channels and times differ in length"));
        }
        let series = Self { channels, t, data };
        series.check("<memory>")?;
        Ok(series)
    }

    fn check(&self, path: &str) -> Result<()> {
        let fail = |row: usize, message: String| Error::Series {
            path: path.to_string(),
            row,
            message,
        };
        if self.t.is_empty() {
            return Err(Error::Ingest {
                path: path.to_string(),
                message: "no rows".into(),
            });
        }
        for (i, t) in self.t.iter().enumerate() {
            if !t.is_finite() {
                return Err(fail(i + 1, format!("non-finite time {t}")));
            }
            if i > 0 && *t <= self.t[i - 1] {
                return Err(fail(i + 1, format!("time {t} does not increase")));
            }
            for (name, col) in self.channels.iter().zip(&self.data) {
                if !col[i].is_finite() {
                    return Err(fail(i + 1, format!("non-finite value in {name}")));
                }
            }
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .position(|c| c == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.t.len()
    }

    /// Last time minus first time.
    pub fn span(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// CSV with header `t,<channels>`; values use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.t.len() {
            let mut row = vec![self.t[i].to_string()];
            row.extend(self.data.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<series>", e))?;
        Ok(())
    }
}

/// Parse a series from any reader; `label` names the source in errors.
pub fn read_series<R: Read>(reader: R, label: &str, expected: &[&str]) -> Result<SeriesFile> {
    let ingest = |message: String| Error::Ingest {
        path: label.to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| ingest(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t").ok_or_else(|| ingest("missing channel t".into()))?;
    let cols: Vec<usize> = expected
        .iter()
        .map(|name| col(name).ok_or_else(|| ingest(format!("missing channel {name}"))))
        .collect::<Result<_>>()?;

    let mut t = Vec::new();
    let mut data = vec![Vec::new(); expected.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Series {
            path: label.to_string(),
            row,
            message: e.to_string(),
        })?;
        let parse = |c: usize, name: &str| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse::<f64>().map_err(|_| Error::Series {
                path: label.to_string(),
                row,
                message: format!("cannot parse {name} value {raw:?}"),
            })
        };
        t.push(parse(t_col, "t")?);
        for (j, (&c, name)) in cols.iter().zip(expected).enumerate() {
            data[j].push(parse(c, name)?);
        }
    }
    let series = SeriesFile {
        channels: expected.iter().map(|s| s.to_string()).collect(),
        t,
        data,
    };
    series.check(label)?;
    Ok(series)
}

/// Load and validate a CSV series with the `expected` channels.
pub fn load_series(path: &Path, expected: &[&str]) -> Result<SeriesFile> {
    let file = File::open(path).map_err(|e| Error::Ingest {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_series(file, &path.display().to_string(), expected)
}

/// Truth records with angles converted from degrees to radians.
pub fn truth_from_series(series: &SeriesFile) -> Result<Vec<TruthRecord>> {
    let ch = |n: &str| {
        series
            .channel(n)
            .ok_or_else(|| Error::invalid(format!("truth series lacks {n}")))
    };
    let (v, va, i, ia) = (ch("v_mag")?, ch("v_angle")?, ch("i_mag")?, ch("i_angle")?);
    series
        .times()
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let rec = TruthRecord {
                t,
                v_true: v[k],
                delta_v_true: va[k].to_radians(),
                i_true: i[k],
                delta_i_true: ia[k].to_radians(),
            };
            rec.validate().map_err(|e| Error::Series {
                path: "truth".into(),
                row: k + 1,
                message: e.to_string(),
            })?;
            Ok(rec)
        })
        .collect()
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthRecord>> {
    truth_from_series(&load_series(path, &TRUTH_CHANNELS)?)
}

pub fn history_from_series(series: &SeriesFile) -> Result<History> {
    let ch = |n: &str| {
        series
            .channel(n)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::invalid(format!("history series lacks {n}")))
    };
    History::new(series.times().to_vec(), ch("v")?, ch("p")?, ch("q")?)
}

pub fn load_history(path: &Path) -> Result<History> {
    history_from_series(&load_series(path, &HISTORY_CHANNELS)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<SeriesFile> {
        read_series(text.as_bytes(), "test.csv", &TRUTH_CHANNELS)
    }

    #[test]
    fn empty_file_has_no_rows() {
        let err = read("t,v_mag,v_angle,i_mag,i_angle\n").unwrap_err();
        assert!(err.to_string().contains("no rows"), "{err}");
    }

    #[test]
    fn duplicate_time_names_row_two() {
        let err = read("t,v_mag,v_angle,i_mag,i_angle\n0,1,0,1,0\n0,1,0,1,0\n").unwrap_err();
        match err {
            Error::Series { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn three_rows_span() {
        let s = read("t,v_mag,v_angle,i_mag,i_angle\n0.5,1,0,1,0\n1.0,1,0,1,0\n2.25,1,0,1,0\n").unwrap();
        assert_eq!(s.rows(), 3);
        assert_eq!(s.span(), 1.75);
    }

    #[test]
    fn missing_channel_is_named() {
        let err = read("t,v_mag,v_angle,i_mag\n0,1,0,1\n").unwrap_err();
        assert!(err.to_string().contains("i_angle"), "{err}");
    }

    #[test]
    fn non_finite_value_names_row() {
        let err = read("t,v_mag,v_angle,i_mag,i_angle\n0,1,0,1,0\n1,NaN,0,1,0\n").unwrap_err();
        assert!(matches!(err, Error::Series { row: 2, .. }), "{err}");
        let err = read("t,v_mag,v_angle,i_mag,i_angle\n0,1,0,1,0\n1,x,0,1,0\n").unwrap_err();
        assert!(matches!(err, Error::Series { row: 2, .. }), "{err}");
    }

    #[test]
    fn column_order_is_free_and_angles_convert() {
        let s = read("i_angle,t,v_mag,i_mag,v_angle\n-30,0,1.0,0.5,90\n").unwrap();
        let truth = truth_from_series(&s).unwrap();
        assert_eq!(truth[0].delta_v_true, 90f64.to_radians());
        assert_eq!(truth[0].delta_i_true, (-30f64).to_radians());
        assert_eq!(truth[0].i_true, 0.5);
    }

    #[test]
    fn negative_magnitude_rejected() {
        let s = read("t,v_mag,v_angle,i_mag,i_angle\n0,-1,0,1,0\n").unwrap();
        assert!(truth_from_series(&s).is_err());
    }
}
