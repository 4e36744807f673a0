use super::{ComparisonTable, HarnessError};
use crate::netsim::MetricsReport;

/// 17 significant digits, enough to round-trip any `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

/// Time series `t,e_s,e_r,th` followed by `# key,value` summary lines.
pub fn report_csv(report: &MetricsReport) -> String {
    let mut w = writer();
    w.write_record(["t", "e_s", "e_r", "th"]).expect("in-memory write");
    for s in &report.series {
        w.write_record([real(s.t), real(s.e_s), real(s.e_r), real(s.th)])
            .expect("in-memory write");
    }
    let mut out = finish(w);
    for (k, v) in report.summary() {
        out.push_str(&format!("# {k},{}\n", real(v)));
    }
    out
}

/// Comparison rows in table order.
pub fn table_csv(table: &ComparisonTable) -> String {
    let mut w = writer();
    w.write_record(["policy", "mean_threshold_error_m", "packets_sent", "mean_update_frequency_hz"])
        .expect("in-memory write");
    for r in &table.rows {
        w.write_record([r.policy.clone(), real(r.mean_error), r.packets_sent.to_string(), real(r.mean_frequency)])
            .expect("in-memory write");
    }
    finish(w)
}

pub enum CsvSource<'a> {
    Report(&'a MetricsReport),
    Table(&'a ComparisonTable),
}

pub fn emit_csv(src: CsvSource<'_>) -> String {
    match src {
        CsvSource::Report(r) => report_csv(r),
        CsvSource::Table(t) => table_csv(t),
    }
}

/// Reads back the `t,e_s,e_r,th` rows of [`report_csv`] output, skipping comments.
pub fn parse_series_csv(text: &str) -> Result<Vec<[f64; 4]>, HarnessError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| HarnessError::Csv(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "e_s", "e_r", "th"] {
        return Err(HarnessError::Csv(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| HarnessError::Csv(e.to_string()))?;
            let mut row = [0.0; 4];
            for (slot, field) in row.iter_mut().zip(rec.iter()) {
                *slot = field.parse().map_err(|_| HarnessError::Csv(format!("bad number {field:?}")))?;
            }
            Ok(row)
        })
        .collect()
}
