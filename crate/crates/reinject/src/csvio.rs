//! CSV input and output for simulation records.
//!
//! Files are plain comma-separated text: a single header row, then one row
//! per time sample. The first column is always `t_s`; every other column is
//! a recorded signal named with its unit suffix (`v_load_a_V`, `i_grid_a_A`,
//! `p_W`, ...). Values are written with Rust's shortest round-trip float
//! formatting, so reading a file back yields bit-identical numbers and two
//! runs of the same scenario produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use crate::error::{Error, Result};
use crate::scenario::SignalSelection;
use crate::signal::{SignalBundle, TimeSeries};

/// Write the selected signals of `bundle` to `path`.
///
/// The time column is always present regardless of the selection. Signals
/// keep the order in which the simulation recorded them.
pub fn write_csv(path: &str, bundle: &SignalBundle, selection: &SignalSelection) -> Result<()> {
    if bundle.series.is_empty() {
        return Err(Error::Io {
            path: path.to_string(),
            message: "refusing to write a bundle with no signals".to_string(),
        });
    }
    let file = File::create(path).map_err(|e| Error::io(path, &e))?;
    let mut out = BufWriter::new(file);
    let chosen: Vec<&TimeSeries> = bundle
        .series
        .iter()
        .filter(|s| selection.includes(&s.name))
        .collect();

    let mut line = String::from("t_s");
    for s in &chosen {
        line.push(',');
        line.push_str(&s.name);
    }
    line.push('\n');
    out.write_all(line.as_bytes()).map_err(|e| Error::io(path, &e))?;

    let n = bundle.samples();
    for k in 0..n {
        line.clear();
        line.push_str(&(k as f64 * bundle.dt).to_string());
        for s in &chosen {
            line.push(',');
            line.push_str(&s.values[k].to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| Error::io(path, &e))?;
    }
    out.flush().map_err(|e| Error::io(path, &e))
}

/// A CSV file read back into memory, column oriented.
#[derive(Debug)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<&Vec<f64>> {
        let idx = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[idx])
    }

    /// Number of data rows.
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    /// Extract a named column as a time series, inferring the sample step
    /// from the mandatory `t_s` column and checking the grid is uniform.
    pub fn time_series(&self, name: &str) -> Result<TimeSeries> {
        let t = self
            .column("t_s")
            .ok_or_else(|| Error::analysis("csv file has no t_s column"))?;
        if t.len() < 2 {
            return Err(Error::analysis(format!(
                "csv file has {} data row(s); need at least 2 to infer the sample step",
                t.len()
            )));
        }
        let dt = t[1] - t[0];
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::analysis(format!(
                "t_s column does not increase: first step is {dt}"
            )));
        }
        for k in 1..t.len() {
            let step = t[k] - t[k - 1];
            if (step - dt).abs() > 1e-6 * dt {
                return Err(Error::analysis(format!(
                    "t_s column is not uniformly sampled: step {step} at row {} \
                     vs {dt} at the start",
                    k + 1
                )));
            }
        }
        let values = self.column(name).ok_or_else(|| {
            Error::analysis(format!(
                "csv file has no column `{name}`; available: {}",
                self.headers.join(", ")
            ))
        })?;
        Ok(TimeSeries::new(name, dt, values.clone()))
    }
}

/// Read a whole CSV file produced by [`write_csv`] (or any file with the
/// same shape: one header row, uniform numeric rows).
pub fn read_csv(path: &str) -> Result<CsvTable> {
    let file = File::open(path).map_err(|e| Error::io(path, &e))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, &e))?,
        None => return Err(Error::analysis(format!("csv file {path} is empty"))),
    };
    let headers: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
    if headers.iter().any(|h| h.is_empty()) {
        return Err(Error::analysis(format!(
            "csv file {path} has an empty column name in its header"
        )));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (idx, line) in lines.enumerate() {
        let row_no = idx + 2; // 1-based, after the header
        let line = line.map_err(|e| Error::io(path, &e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = 0;
        for (col, field) in line.split(',').enumerate() {
            fields += 1;
            if col >= headers.len() {
                break;
            }
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::analysis(format!(
                    "csv row {row_no}, column `{}`: not a number: `{}`",
                    headers[col],
                    field.trim()
                ))
            })?;
            columns[col].push(value);
        }
        if fields != headers.len() {
            return Err(Error::analysis(format!(
                "csv row {row_no} has {fields} field(s) but the header names {}",
                headers.len()
            )));
        }
    }
    Ok(CsvTable { headers, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bundle() -> SignalBundle {
        let mut b = SignalBundle::new(1e-5, 0xabcd);
        b.push("v_load_a_V", vec![0.0, 0.125, -3.5e-7, 8981.462390204987])
            .unwrap();
        b.push("i_grid_a_A", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        b.push("p_W", vec![-1.5, 0.0, 1.5, 3.0]).unwrap();
        b
    }

    #[test]
    fn round_trip_preserves_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let path = path.to_str().unwrap();
        let bundle = sample_bundle();
        write_csv(path, &bundle, &SignalSelection::All).unwrap();

        let table = read_csv(path).unwrap();
        assert_eq!(
            table.headers,
            vec!["t_s", "v_load_a_V", "i_grid_a_A", "p_W"],
            "time first, then signals in recording order"
        );
        assert_eq!(table.rows(), 4);
        let v = table.column("v_load_a_V").unwrap();
        assert_eq!(v[3], 8981.462390204987, "float survives the text round trip");
        assert_eq!(v[2], -3.5e-7);
        let t = table.column("t_s").unwrap();
        for (k, &tv) in t.iter().enumerate() {
            assert_eq!(tv, k as f64 * 1e-5, "time column at row {k}");
        }
    }

    #[test]
    fn identical_bundles_produce_byte_identical_files() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        write_csv(p1.to_str().unwrap(), &sample_bundle(), &SignalSelection::All).unwrap();
        write_csv(p2.to_str().unwrap(), &sample_bundle(), &SignalSelection::All).unwrap();
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b, "same data must serialize identically");
    }

    #[test]
    fn selection_filters_columns_but_keeps_time() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let path = path.to_str().unwrap();
        let sel = SignalSelection::Prefixes(vec!["p".into()]);
        write_csv(path, &sample_bundle(), &sel).unwrap();
        let table = read_csv(path).unwrap();
        assert_eq!(table.headers, vec!["t_s", "p_W"]);
    }

    #[test]
    fn time_series_extraction_infers_the_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let path = path.to_str().unwrap();
        write_csv(path, &sample_bundle(), &SignalSelection::All).unwrap();
        let ts = read_csv(path).unwrap().time_series("i_grid_a_A").unwrap();
        assert_eq!(ts.dt, 1e-5);
        assert_eq!(ts.values, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn empty_bundles_are_refused() {
        let bundle = SignalBundle::new(1e-5, 0);
        let err = write_csv("/tmp/never_written.csv", &bundle, &SignalSelection::All).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(!std::path::Path::new("/tmp/never_written.csv").exists());
    }

    #[test]
    fn missing_files_and_columns_give_distinct_errors() {
        let missing_file = read_csv("/nonexistent/nowhere.csv").unwrap_err();
        assert_eq!(missing_file.exit_code(), 3, "unreadable file is an i/o error");

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let path = path.to_str().unwrap();
        write_csv(path, &sample_bundle(), &SignalSelection::All).unwrap();
        let table = read_csv(path).unwrap();
        let err = table.time_series("v_load_b_V").unwrap_err();
        assert_eq!(err.exit_code(), 4, "missing column is an analysis error");
        assert!(err.to_string().contains("v_load_b_V"), "{err}");
        assert!(
            err.to_string().contains("available"),
            "should list what exists: {err}"
        );
    }

    #[test]
    fn malformed_rows_are_rejected_with_their_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let path = path.to_str().unwrap();

        std::fs::write(path, "t_s,x\n0,1\n1e-5,oops\n").unwrap();
        let err = read_csv(path).unwrap_err();
        assert!(err.to_string().contains("row 3"), "wrong location: {err}");
        assert_eq!(err.exit_code(), 4);

        std::fs::write(path, "t_s,x\n0,1\n1e-5\n").unwrap();
        let err = read_csv(path).unwrap_err();
        assert!(err.to_string().contains("row 3"), "wrong location: {err}");

        std::fs::write(path, "t_s,x\n0,1\n2e-5,2\n3e-5,3\n").unwrap();
        let err = read_csv(path).unwrap().time_series("x").unwrap_err();
        assert!(
            err.to_string().contains("not uniformly sampled"),
            "irregular grid must be refused: {err}"
        );
    }
}
