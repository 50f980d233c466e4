use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchReport, BenchRow, CellStatus};
use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

/// Scientific notation with three significant digits and a two-digit
/// exponent, e.g. `9.62e-01`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

type ConfigKey = (String, usize, usize);

/// Column configurations in order of first appearance, and sorted qubit
/// counts.
fn layout(r: &BenchReport) -> (Vec<ConfigKey>, Vec<usize>) {
    let mut configs: Vec<ConfigKey> = Vec::new();
    let mut qubits: Vec<usize> = Vec::new();
    for row in &r.rows {
        let key = row.config_key();
        if !configs.contains(&key) {
            configs.push(key);
        }
        if !qubits.contains(&row.n_qubits) {
            qubits.push(row.n_qubits);
        }
    }
    qubits.sort_unstable();
    (configs, qubits)
}

fn find<'a>(r: &'a BenchReport, n: usize, key: &ConfigKey) -> Option<&'a BenchRow> {
    r.rows.iter().find(|row| row.n_qubits == n && &row.config_key() == key)
}

fn label(key: &ConfigKey) -> String {
    let (kind, batch, points) = key;
    format!("{kind} batch {batch} of {points}")
}

/// Renders a report. CSV and markdown pivot to one line per qubit count
/// and one column (pair) per `(kind, batch, dataset)` configuration; JSON
/// is the full report.
pub fn emit_report(r: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(r).expect("report serializes"),
        ReportFormat::Csv => csv_table(r),
        ReportFormat::Markdown => markdown_table(r),
    }
}

fn csv_table(r: &BenchReport) -> String {
    let (configs, qubits) = layout(r);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["qubits".to_string()];
    for key in &configs {
        header.push(format!("{} mean", label(key)));
        header.push(format!("{} std", label(key)));
    }
    w.write_record(&header).expect("in-memory write");
    for n in qubits {
        let mut record = vec![n.to_string()];
        for key in &configs {
            match find(r, n, key).and_then(|row| Some((row.mean_epoch_seconds?, row.std_epoch_seconds?))) {
                Some((m, s)) => {
                    record.push(format_sci(m));
                    record.push(format_sci(s));
                }
                None => record.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn markdown_table(r: &BenchReport) -> String {
    let (configs, qubits) = layout(r);
    let mut out = String::from("| Qubits |");
    for key in &configs {
        let _ = write!(out, " {} |", label(key));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(configs.len()));
    out.push('\n');
    for n in qubits {
        let _ = write!(out, "| {n} |");
        for key in &configs {
            let cell = match find(r, n, key) {
                Some(BenchRow {
                    status: CellStatus::Ok,
                    mean_epoch_seconds: Some(m),
                    std_epoch_seconds: Some(s),
                    ..
                }) => format!("{} ± {}", format_sci(*m), format_sci(*s)),
                Some(row) if row.status == CellStatus::Failed => "failed".into(),
                Some(_) => "skipped".into(),
                None => "—".into(),
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    let _ = write!(
        out,
        "\nMean ± std of per-epoch wall-clock seconds over {} epochs; {} thread(s), {} backend.\n",
        r.epochs, r.threads, r.backend
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, kind: &str, batch: usize, mean: f64) -> BenchRow {
        BenchRow {
            n_qubits: n,
            model_kind: kind.into(),
            batch_size: batch,
            dataset_size: 32,
            n_params: 1 << (2 * n),
            status: CellStatus::Ok,
            note: None,
            epoch_seconds: vec![mean; 2],
            mean_epoch_seconds: Some(mean),
            std_epoch_seconds: Some(0.0),
        }
    }

    #[test]
    fn sci_format() {
        assert_eq!(format_sci(0.962), "9.62e-01");
        assert_eq!(format_sci(1100.0), "1.10e+03");
        assert_eq!(format_sci(0.0345), "3.45e-02");
        assert_eq!(format_sci(0.0), "0.00e+00");
        assert_eq!(format_sci(1.0e-12), "1.00e-12");
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = emit_report(&BenchReport::empty(), ReportFormat::Csv);
        assert_eq!(csv, "qubits\n");
    }

    #[test]
    fn one_row_csv_parses() {
        let mut r = BenchReport::empty();
        r.rows.push(row(3, "FullUnitary", 32, 0.5));
        let text = emit_report(&r, ReportFormat::Csv);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let records: Vec<_> = rdr.records().map(|x| x.unwrap()).collect();
        assert_eq!(records.len(), 1);
        assert_eq!(&records[0][0], "3");
        assert_eq!(&records[0][1], "5.00e-01");
    }

    #[test]
    fn pivot_and_missing_cells() {
        let mut r = BenchReport::empty();
        r.rows.push(row(2, "FullUnitary", 32, 0.5));
        r.rows.push(row(1, "FullUnitary", 32, 0.25));
        r.rows.push(row(1, "Ansatz", 32, 2.0));
        let mut skipped = row(2, "Ansatz", 32, 0.0);
        skipped.status = CellStatus::Skipped;
        skipped.mean_epoch_seconds = None;
        skipped.std_epoch_seconds = None;
        r.rows.push(skipped);
        let csv = emit_report(&r, ReportFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2.50e-01,0.00e+00,2.00e+00"));
        assert!(lines[2].ends_with(",,"));
        let md = emit_report(&r, ReportFormat::Markdown);
        assert!(md.contains("| 1 | 2.50e-01 ± 0.00e+00 | 2.00e+00 ± 0.00e+00 |"));
        assert!(md.contains("skipped"));
    }

    #[test]
    fn json_round_trip() {
        let mut r = BenchReport::empty();
        r.rows.push(row(4, "Ansatz", 1, 0.123456789));
        let back: BenchReport = serde_json::from_str(&emit_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn format_names() {
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!("xml".parse::<ReportFormat>().is_err());
    }
}
