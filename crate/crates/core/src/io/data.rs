//! Comma-separated data files with a header row and `#` comments.
//!
//! Comment lines of the form `# key = value` carry metadata such as the
//! initial concentration of a batch test. Numbers are written in their
//! shortest round-trip form, so re-reading a written file reproduces every
//! value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::asm1::{Particulates, Solubles};
use crate::calibration::SteadyDataPoint;
use crate::error::{Error, Result};
use crate::induction::BatchCurve;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Source line of every row.
    pub lines: Vec<u64>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: &Path, line: Option<u64>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_table(&text, path)
}

pub fn parse_table(text: &str, path: &Path) -> Result<Table> {
    let mut meta = BTreeMap::new();
    for line in text.lines() {
        if let Some(comment) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(path, e.position().map(|p| p.line()), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(parse_error(path, None, "missing header row"));
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_error(path, e.position().map(|p| p.line()), e.to_string()))?;
        let line = record.position().map(|p| p.line());
        let row = record
            .iter()
            .zip(&headers)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(path, line, format!("column {name}: {field:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
        lines.push(line.unwrap_or(0));
    }
    Ok(Table {
        meta,
        headers,
        rows,
        lines,
    })
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io_error(dir))?;
        }
    }
    std::fs::write(path, render_table(table)).map_err(io_error(path))
}

pub fn render_table(table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in &table.meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&table.headers.join(","));
    out.push('\n');
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn required_column(table: &Table, path: &Path, name: &str) -> Result<Vec<f64>> {
    table
        .column(name)
        .ok_or_else(|| parse_error(path, Some(1), format!("missing column {name:?}")))
}

pub const BATCH_TIME: &str = "time_h";
pub const BATCH_SBL: &str = "sbl_m";
pub const BATCH_X_INIT: &str = "x_init_kg_m3";

pub fn batch_curve_table(curve: &BatchCurve) -> Table {
    let mut t = Table::new(&[BATCH_TIME, BATCH_SBL]).with_meta(BATCH_X_INIT, format_float(curve.x_init));
    for (time, h) in curve.times.iter().zip(&curve.sbl) {
        t.push(vec![*time, *h]);
    }
    t
}

pub fn read_batch_curve(path: &Path) -> Result<BatchCurve> {
    let table = read_table(path)?;
    let x_init = table
        .meta
        .get(BATCH_X_INIT)
        .ok_or_else(|| parse_error(path, None, format!("missing '# {BATCH_X_INIT} = ...' comment")))?;
    let x_init: f64 = x_init
        .parse()
        .map_err(|_| parse_error(path, None, format!("{BATCH_X_INIT}: {x_init:?} is not a number")))?;
    let times = required_column(&table, path, BATCH_TIME)?;
    let sbl = required_column(&table, path, BATCH_SBL)?;
    for (i, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(parse_error(path, Some(table.lines[i + 1]), "time stamps must be strictly increasing"));
        }
    }
    if let Some(i) = sbl.iter().position(|h| *h < 0.0) {
        return Err(parse_error(path, Some(table.lines[i]), "sludge blanket level must be non-negative"));
    }
    BatchCurve::new(times, sbl, x_init).map_err(|e| parse_error(path, None, e.to_string()))
}

pub fn write_batch_curve(path: &Path, curve: &BatchCurve) -> Result<()> {
    write_table(path, &batch_curve_table(curve))
}

pub const STEADY_COLUMNS: [&str; 6] = ["z_m", "tss", "cod", "s_o", "s_no", "s_nh"];

pub fn steady_data_table(data: &[SteadyDataPoint]) -> Table {
    let mut t = Table::new(&STEADY_COLUMNS);
    for d in data {
        t.push(vec![d.z, d.tss, d.cod, d.s_o, d.s_no, d.s_nh]);
    }
    t
}

pub fn read_steady_data(path: &Path) -> Result<Vec<SteadyDataPoint>> {
    let table = read_table(path)?;
    let cols = STEADY_COLUMNS
        .iter()
        .map(|c| required_column(&table, path, c))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(table.rows.len());
    for i in 0..table.rows.len() {
        let v: Vec<f64> = cols.iter().map(|c| c[i]).collect();
        if v[1..].iter().any(|x| *x < 0.0) {
            return Err(parse_error(path, Some(table.lines[i]), "concentrations must be non-negative"));
        }
        out.push(SteadyDataPoint {
            z: v[0],
            tss: v[1],
            cod: v[2],
            s_o: v[3],
            s_no: v[4],
            s_nh: v[5],
        });
    }
    Ok(out)
}

pub fn write_steady_data(path: &Path, data: &[SteadyDataPoint]) -> Result<()> {
    write_table(path, &steady_data_table(data))
}

/// Header names of all thirteen components.
pub fn component_names() -> Vec<&'static str> {
    Particulates::NAMES.iter().chain(Solubles::NAMES.iter()).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn batch_curve_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let curve = BatchCurve::new(
            vec![0.0, 0.1, 0.2, 0.30000000000000004, 0.4],
            vec![1.0, 0.9, 0.7, 0.5, 1e-7],
            1.1,
        )
        .unwrap();
        write_batch_curve(&path, &curve).unwrap();
        assert_eq!(read_batch_curve(&path).unwrap(), curve);
    }

    #[test]
    fn missing_metadata_is_reported() {
        let err = parse_table("time_h,sbl_m\n0,1\n", Path::new("c.csv")).map(|_| ());
        assert!(err.is_ok());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "time_h,sbl_m\n0,1\n0.1,0.9\n0.2,0.8\n0.3,0.7\n0.4,0.6\n").unwrap();
        let msg = read_batch_curve(&path).unwrap_err().to_string();
        assert!(msg.contains("x_init_kg_m3"), "{msg}");
    }

    #[test]
    fn bad_number_names_file_and_line() {
        let text = "# x_init_kg_m3 = 2\ntime_h,sbl_m\n0,1\n0.1,abc\n";
        let err = parse_table(text, Path::new("data/c.csv")).unwrap_err();
        match &err {
            Error::Parse { line, .. } => assert_eq!(*line, Some(4)),
            e => panic!("unexpected {e}"),
        }
        assert!(err.to_string().starts_with("data/c.csv:4:"), "{err}");
    }

    #[test]
    fn unordered_times_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "# x_init_kg_m3 = 2\ntime_h,sbl_m\n0,1\n0.2,0.9\n0.1,0.8\n0.3,0.7\n0.4,0.6\n").unwrap();
        let msg = read_batch_curve(&path).unwrap_err().to_string();
        assert!(msg.contains(":5:"), "{msg}");
    }

    #[test]
    fn steady_data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("steady.csv");
        let data = vec![
            SteadyDataPoint {
                z: -0.6,
                tss: 3.3e-46,
                cod: 18.4,
                s_o: 3.3,
                s_no: 6.87,
                s_nh: 0.031,
            },
            SteadyDataPoint {
                z: 1.0,
                tss: 9656.9,
                cod: 18.1,
                s_o: 0.0,
                s_no: 1.35,
                s_nh: 1.57,
            },
        ];
        write_steady_data(&path, &data).unwrap();
        assert_eq!(read_steady_data(&path).unwrap(), data);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_identically(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_float(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
