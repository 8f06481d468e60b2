use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::bootstrap::BootstrapCI;
use super::MetricsError;
use crate::nn::NUM_CLASSES;

/// Evaluation summary of one model, one row of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelResult {
    pub model: String,
    pub recall: BootstrapCI,
    pub precision: BootstrapCI,
    pub f1: BootstrapCI,
    /// Mean seconds per image.
    pub inference_time_s: f64,
    pub parameters: usize,
}

const HEADERS: [&str; 6] = [
    "Model",
    "Recall (CI)",
    "Precision (CI)",
    "F1-score (CI)",
    "Inference Time",
    "#Parameters",
];

/// `point (lo–hi)` with three decimals and an en dash.
pub fn format_ci(ci: &BootstrapCI) -> String {
    format!("{:.3} ({:.3}\u{2013}{:.3})", ci.point, ci.lo, ci.hi)
}

fn cells(r: &ModelResult) -> [String; 6] {
    [
        r.model.clone(),
        format_ci(&r.recall),
        format_ci(&r.precision),
        format_ci(&r.f1),
        format!("{:.4}", r.inference_time_s),
        r.parameters.to_string(),
    ]
}

/// Aligned plain-text table, one row per model.
pub fn emit_report(results: &[ModelResult]) -> Result<String, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let rows: Vec<[String; 6]> = results.iter().map(cells).collect();
    let mut widths = HEADERS.map(|h| h.chars().count());
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: Vec<&str>| {
        cols.iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join(" | ")
            .trim_end()
            .to_string()
    };
    let mut out = line(HEADERS.to_vec());
    out.push('\n');
    out.push_str(&widths.map(|w| "-".repeat(w)).join("-|-"));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    Ok(out)
}

/// Machine-readable form of the report with separate bound columns.
pub fn emit_report_csv(results: &[ModelResult]) -> Result<String, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "model",
        "recall",
        "recall_lo",
        "recall_hi",
        "precision",
        "precision_lo",
        "precision_hi",
        "f1",
        "f1_lo",
        "f1_hi",
        "inference_time_s",
        "parameters",
    ])?;
    for r in results {
        let mut rec = vec![r.model.clone()];
        for ci in [&r.recall, &r.precision, &r.f1] {
            rec.extend([ci.point, ci.lo, ci.hi].map(|v| v.to_string()));
        }
        rec.push(r.inference_time_s.to_string());
        rec.push(r.parameters.to_string());
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One line of the predictions interchange file
/// (`id,label,pred,p0,p1,p2,p3,p4`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub label: usize,
    pub pred: usize,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl PredictionRecord {
    pub fn new(
        id: impl Into<String>,
        label: usize,
        pred: usize,
        probs: [f64; NUM_CLASSES],
    ) -> Self {
        let [p0, p1, p2, p3, p4] = probs;
        Self {
            id: id.into(),
            label,
            pred,
            p0,
            p1,
            p2,
            p3,
            p4,
        }
    }

    pub fn probabilities(&self) -> [f64; NUM_CLASSES] {
        [self.p0, self.p1, self.p2, self.p3, self.p4]
    }
}

pub fn write_predictions_csv<W: Write>(
    out: W,
    records: &[PredictionRecord],
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(["id", "label", "pred", "p0", "p1", "p2", "p3", "p4"])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| MetricsError::Csv(e.to_string()))?;
    Ok(())
}

/// Reads a predictions file, rejecting class codes outside `0..5`.
pub fn read_predictions_csv<R: Read>(input: R) -> Result<Vec<PredictionRecord>, MetricsError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "label", "pred", "p0", "p1", "p2", "p3", "p4"] {
        return Err(MetricsError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let rec: PredictionRecord = rec?;
        if let Some(bad) = [rec.label, rec.pred]
            .into_iter()
            .find(|&c| c >= NUM_CLASSES)
        {
            return Err(MetricsError::InvalidClass(bad));
        }
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ci(point: f64, lo: f64, hi: f64) -> BootstrapCI {
        BootstrapCI {
            point,
            lo,
            hi,
            level: 0.95,
            iterations: 10_000,
            seed: 0,
        }
    }

    fn result() -> ModelResult {
        ModelResult {
            model: "MobileNet-V1".into(),
            recall: ci(0.982, 0.977, 0.988),
            precision: ci(0.981, 0.975, 0.986),
            f1: ci(0.981, 0.976, 0.987),
            inference_time_s: 0.0295,
            parameters: 3_212_357,
        }
    }

    #[test]
    fn ci_formatting() {
        assert_eq!(format_ci(&ci(0.982, 0.977, 0.988)), "0.982 (0.977–0.988)");
        assert_eq!(format_ci(&ci(1.0, 1.0, 1.0)), "1.000 (1.000–1.000)");
    }

    #[test]
    fn table_layout() {
        let text = emit_report(&[result()]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("Model        | Recall (CI)         | Precision (CI)"));
        assert!(lines[0].ends_with("| Inference Time | #Parameters"));
        assert_eq!(
            lines[2],
            "MobileNet-V1 | 0.982 (0.977–0.988) | 0.981 (0.975–0.986) | 0.981 (0.976–0.987) | 0.0295         | 3212357"
        );
        assert!(matches!(emit_report(&[]), Err(MetricsError::EmptyInput)));
    }

    #[test]
    fn report_csv() {
        let csv = emit_report_csv(&[result()]).unwrap();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("model,recall,recall_lo"));
        assert_eq!(
            lines.next().unwrap(),
            "MobileNet-V1,0.982,0.977,0.988,0.981,0.975,0.986,0.981,0.976,0.987,0.0295,3212357"
        );
    }

    #[test]
    fn predictions_round_trip() {
        let records = vec![
            PredictionRecord::new("1.2.3", 0, 0, [0.9, 0.025, 0.025, 0.025, 0.025]),
            PredictionRecord::new("abc", 4, 2, [0.1, 0.1, 0.5, 0.1, 0.2]),
        ];
        let mut buf = Vec::new();
        write_predictions_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,label,pred,p0,p1,p2,p3,p4\n1.2.3,0,0,0.9,"));
        assert_eq!(read_predictions_csv(buf.as_slice()).unwrap(), records);
        let bad = "id,label,pred,p0,p1,p2,p3,p4\nx,5,0,1,0,0,0,0\n";
        assert!(matches!(
            read_predictions_csv(bad.as_bytes()),
            Err(MetricsError::InvalidClass(5))
        ));
    }
}
