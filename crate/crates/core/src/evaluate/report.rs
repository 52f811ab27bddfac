use super::cv::PooledPrediction;
use super::metrics::MetricsReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Text,
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `doc_id,fold,true_label,predicted_label,positive_score`
pub fn prediction_dump_csv(predictions: &[PooledPrediction]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["doc_id", "fold", "true_label", "predicted_label", "positive_score"])?;
    for p in predictions {
        w.write_record([
            p.doc_id.as_str(),
            &p.fold.to_string(),
            p.truth.as_str(),
            p.prediction.label.as_str(),
            &p.prediction.positive_score().to_string(),
        ])?;
    }
    csv_string(w)
}

/// One row per report: classifier name, accuracy, AUROC and weighted F, all
/// as percentages with two decimals. Rows keep the input order.
pub fn render_results_table(reports: &[MetricsReport], format: TableFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Empty("no results to tabulate".into()));
    }
    let header = ["Classifier", "Accuracy", "AUROC", "F-Measure"];
    let rows: Vec<[String; 4]> = reports
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                format!("{:.2}", r.accuracy),
                format!("{:.2}", r.auroc),
                format!("{:.2}", r.f_measure),
            ]
        })
        .collect();
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            for row in &rows {
                w.write_record(row)?;
            }
            csv_string(w)
        }
        TableFormat::Text => {
            let mut widths = header.map(str::len);
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.len());
                }
            }
            let mut out = String::new();
            let line = |cells: [&str; 4], out: &mut String| {
                out.push_str(&format!("{:<w$}", cells[0], w = widths[0]));
                for (c, w) in cells[1..].iter().zip(&widths[1..]) {
                    out.push_str(&format!("  {c:>w$}"));
                }
                out.push('\n');
            };
            line(header, &mut out);
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            line([&rule[0], &rule[1], &rule[2], &rule[3]], &mut out);
            for row in &rows {
                line([&row[0], &row[1], &row[2], &row[3]], &mut out);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{DmnbParams, ModelSpec};
    use crate::evaluate::metrics::{ConfusionMatrix, LabelMetrics};
    use crate::featurize::NGramConfig;

    fn report(name: &str, acc: f64) -> MetricsReport {
        let lm = LabelMetrics {
            precision: 0.0,
            recall: 0.0,
            f_measure: 0.0,
            support: 0,
        };
        MetricsReport {
            name: name.into(),
            spec: ModelSpec::Dmnb(DmnbParams::default()),
            ngram: NGramConfig::default(),
            folds: 10,
            seed: 1,
            accuracy: acc,
            auroc: 82.3,
            f_measure: 77.899,
            per_label: [lm, lm],
            confusion: ConfusionMatrix::default(),
        }
    }

    #[test]
    fn two_decimal_rows_in_order() {
        let csv = render_results_table(&[report("dmnb", 78.19), report("mnb", 66.99)], TableFormat::Csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Classifier,Accuracy,AUROC,F-Measure");
        assert_eq!(lines[1], "dmnb,78.19,82.30,77.90");
        assert_eq!(lines[2], "mnb,66.99,82.30,77.90");
    }

    #[test]
    fn aligned_text() {
        let text = render_results_table(&[report("dmnb", 78.19)], TableFormat::Text).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains("78.19"));
        assert_eq!(lines[0].len(), lines[2].len());
    }

    #[test]
    fn empty_is_an_error() {
        assert!(render_results_table(&[], TableFormat::Text).is_err());
    }
}
