use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// One row of a grid result.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    pub value: f64,
    pub error: f64,
}

/// A closed-form value the run can be compared against.
#[derive(Debug, Clone, Serialize)]
pub struct Reference {
    pub name: String,
    pub value: f64,
    pub tag: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub version: String,
    pub inputs: Value,
    pub seed: u64,
    pub rng: String,
    pub results: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<Reference>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &str, inputs: Value, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            version: cxhyp::VERSION.to_string(),
            inputs,
            seed,
            rng: cxhyp::rng::RNG_ALGORITHM.to_string(),
            results: Value::Null,
            references: Vec::new(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            rows: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any f64.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Grid rows as CSV with header `xi_0,…,xi_{d−1},value,error`.
pub fn grid_csv(rows: &[Row]) -> Result<String, String> {
    if rows.is_empty() {
        return Err("no results to write".into());
    }
    let dim = rows[0].xi.as_ref().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..dim).map(|i| format!("xi_{i}")).collect();
    header.push("value".into());
    header.push("error".into());
    w.write_record(&header).map_err(|e| e.to_string())?;
    for r in rows {
        let mut rec: Vec<String> = r.xi.iter().flatten().map(|x| fmt_float(*x)).collect();
        rec.push(fmt_float(r.value));
        rec.push(fmt_float(r.error));
        w.write_record(&rec).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_values_round_trip() {
        let rows = vec![
            Row { xi: Some(vec![0.1, -1.0 / 3.0]), value: std::f64::consts::PI, error: 1e-300 },
            Row { xi: Some(vec![f64::MIN_POSITIVE, 0.7]), value: -55.122269653889539, error: 0.0 },
        ];
        let text = grid_csv(&rows).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for (rec, row) in reader.records().zip(&rows) {
            let rec = rec.unwrap();
            let parsed: Vec<f64> = rec.iter().map(|s| s.parse().unwrap()).collect();
            let mut want = row.xi.clone().unwrap();
            want.extend([row.value, row.error]);
            assert_eq!(
                parsed.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                want.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn empty_results_are_refused() {
        assert!(grid_csv(&[]).is_err());
    }
}
