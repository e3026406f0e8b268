//! Monthly data files (`t,U,UR,D`) and metadata-stamped output tables.

use std::fs;
use std::path::Path;

use unemp::datafit::MonthlySeries;
use unemp::Error as CoreError;

use crate::error::{CliError, CliResult};
use crate::format::num;

pub const SERIES_HEADER: [&str; 4] = ["t", "U", "UR", "D"];

/// Reads a monthly series. Lines starting with `#` are skipped. Errors
/// name the data row (1-based, header excluded) and column.
pub fn read_series(path: &Path) -> CliResult<MonthlySeries> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_series(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_series(text: &str) -> CliResult<MonthlySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::config(format!("unreadable header: {e}")))?
        .clone();
    let found: Vec<&str> = header.iter().collect();
    for (i, want) in SERIES_HEADER.iter().enumerate() {
        if found.get(i) != Some(want) {
            return Err(CliError::config(format!(
                "header must be {} but column {} is {}",
                SERIES_HEADER.join(","),
                i + 1,
                found.get(i).map_or("missing".to_string(), |s| format!("'{s}'")),
            )));
        }
    }
    if found.len() > SERIES_HEADER.len() {
        return Err(CliError::config(format!(
            "header has extra column '{}'",
            found[SERIES_HEADER.len()]
        )));
    }

    let mut cols: [Vec<f64>; 4] = Default::default();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::config(format!("row {row}: {e}")))?;
        if record.len() != SERIES_HEADER.len() {
            return Err(CliError::config(format!(
                "row {row}: expected {} columns, found {}",
                SERIES_HEADER.len(),
                record.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            let name = SERIES_HEADER[c];
            if field.is_empty() {
                return Err(CliError::config(format!("row {row}, column {name}: missing value")));
            }
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::config(format!("row {row}, column {name}: '{field}' is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::config(format!(
                    "row {row}, column {name}: value is not finite"
                )));
            }
            if name == "UR" && !(v > 0.0 && v < 1.0) {
                return Err(CliError::config(format!(
                    "row {row}, column UR: {v} is not a fraction in (0, 1)"
                )));
            }
            cols[c].push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(CliError::config("no data rows"));
    }
    let [t, u, ur, d] = cols;
    MonthlySeries::new(t, u, ur, d).map_err(|e| match e {
        CoreError::DataValidation { row, message } => CliError::config(format!("row {row}: {message}")),
        other => other.into(),
    })
}

/// Provenance recorded at the top of every output file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Metadata::default();
        m.push("tool", "unemp");
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.push(key, num(value));
    }

    /// Single `#`-prefixed line of `key=value` pairs.
    pub fn comment_line(&self) -> String {
        let body: Vec<String> = self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("# {}\n", body.join(" "))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

/// CSV text: metadata line, header, then one row per sample.
pub fn table(meta: &Metadata, header: &[&str], columns: &[&[f64]]) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "columns differ in length");
    assert_eq!(header.len(), columns.len());
    let mut out = meta.comment_line();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| num(c[r])))
            .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii"));
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "# comment\nt,U,UR,D\n1,464450,0.067,4848\n2,470000,0.068,5000\n";

    #[test]
    fn reads_a_valid_file() {
        let s = parse_series(GOOD).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.unemployed[1], 470000.0);
        assert_eq!(s.rate[0], 0.067);
    }

    fn message(text: &str) -> String {
        match parse_series(text).unwrap_err() {
            CliError::Config(m) => m,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_name_row_and_column() {
        assert!(message("t,U,RATE,D\n1,2,0.1,3\n").contains("column 3"));
        assert!(message("t,U,UR,D\n1,2,0.1,3\n2,x,0.1,3\n").contains("row 2, column U"));
        assert!(message("t,U,UR,D\n1,2,6.7,3\n").contains("row 1, column UR"));
        assert!(message("t,U,UR,D\n1,2,0.1\n").contains("row 1: expected 4"));
        assert!(message("t,U,UR,D\n1,2,0.1,\n").contains("row 1, column D: missing"));
        assert!(message("t,U,UR,D\n").contains("no data"));
    }

    #[test]
    fn table_layout() {
        let mut m = Metadata::new("test");
        m.push("preset", "p");
        let text = table(&m, &["t", "x"], &[&[0.0, 1.0], &[0.5, 1e-9]]);
        assert_eq!(
            text,
            "# tool=unemp version=0.1.0 command=test preset=p\nt,x\n0,0.5\n1,1e-9\n"
        );
        // Output tables read back through the comment-skipping reader.
        let back = parse_series(&table(&m, &SERIES_HEADER, &[&[1.0], &[2.0], &[0.5], &[3.0]])).unwrap();
        assert_eq!(back.vacancies, vec![3.0]);
    }
}
