//! Plain-text renderings of evaluation results.

use std::fmt::Write as _;

use dsgnn_core::gnn::LayerKind;
use dsgnn_core::pipeline::{CvResult, EvalMetrics, TrainOutcome};

/// Four decimals like the published table; undefined ratios print as `n/a`.
pub fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

/// Confusion matrix, the four metrics and, when given, the per-fold
/// cross-validation accuracies. Positive class is "no attack".
pub fn metrics_report(kind: LayerKind, m: &EvalMetrics, cv: Option<&CvResult>) -> String {
    let c = &m.counts;
    let mut out = String::new();
    writeln!(out, "layer {}", kind.display_name()).unwrap();
    writeln!(out, "samples {}", c.total()).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "confusion (positive = no-attack)").unwrap();
    writeln!(out, "{:<22}{:>20}{:>20}", "", "pred no-attack", "pred attack").unwrap();
    writeln!(out, "{:<22}{:>20}{:>20}", "actual no-attack", format!("TP {}", c.tp), format!("FN {}", c.fn_)).unwrap();
    writeln!(out, "{:<22}{:>20}{:>20}", "actual attack", format!("FP {}", c.fp), format!("TN {}", c.tn)).unwrap();
    writeln!(out).unwrap();
    for (name, v) in [
        ("accuracy", m.accuracy),
        ("precision", m.precision),
        ("recall", m.recall),
        ("f1", m.f1),
    ] {
        writeln!(out, "{name:<10} {}", fmt_metric(v)).unwrap();
    }
    if let Some(cv) = cv {
        writeln!(out).unwrap();
        writeln!(out, "cross-validation").unwrap();
        for (i, a) in cv.fold_accuracies.iter().enumerate() {
            writeln!(out, "fold {:<5} {a:.4}", i + 1).unwrap();
        }
        writeln!(out, "{:<10} {:.4}", "mean", cv.mean_accuracy).unwrap();
    }
    out
}

/// `epoch,train_loss,validation_loss` with an empty last column when no
/// validation set was used.
pub fn loss_curve_csv(outcome: &TrainOutcome) -> String {
    let mut out = String::from("epoch,train_loss,validation_loss\n");
    for (e, l) in outcome.loss_curve.iter().enumerate() {
        let v = outcome.validation_curve.get(e).map_or(String::new(), |v| v.to_string());
        writeln!(out, "{e},{l},{v}").unwrap();
    }
    out
}

/// One column of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableColumn {
    pub observers: usize,
    pub kind: LayerKind,
    pub cv: Option<CvResult>,
    pub test: EvalMetrics,
}

/// Columns grouped by observer count then layer kind; rows are CV mean
/// accuracy, test accuracy, precision, recall and F1.
pub fn comparison_table(columns: &[TableColumn]) -> String {
    let label_width = 18;
    let width = 11;
    let mut out = String::new();
    let mut header = format!("{:<label_width$}", "Observer Nodes");
    let mut layers = format!("{:<label_width$}", "GNN Layer");
    for c in columns {
        write!(header, "|{:>width$}", c.observers).unwrap();
        write!(layers, "|{:>width$}", c.kind.display_name()).unwrap();
    }
    writeln!(out, "{header}").unwrap();
    writeln!(out, "{layers}").unwrap();
    writeln!(out, "{}", "-".repeat(label_width + columns.len() * (width + 1))).unwrap();
    type Row = fn(&TableColumn) -> Option<f64>;
    let rows: [(&str, Row); 5] = [
        ("CV Avg. Accuracy", |c| c.cv.as_ref().map(|cv| cv.mean_accuracy)),
        ("Test Accuracy", |c| c.test.accuracy),
        ("Precision", |c| c.test.precision),
        ("Recall", |c| c.test.recall),
        ("F1-score", |c| c.test.f1),
    ];
    for (name, get) in rows {
        write!(out, "{name:<label_width$}").unwrap();
        for c in columns {
            write!(out, "|{:>width$}", fmt_metric(get(c))).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsgnn_core::pipeline::ConfusionCounts;

    fn metrics() -> EvalMetrics {
        EvalMetrics::from_counts(ConfusionCounts {
            tp: 3,
            fp: 1,
            fn_: 0,
            tn: 2,
        })
    }

    #[test]
    fn report_lists_confusion_and_metrics() {
        let cv = CvResult {
            fold_accuracies: vec![0.5, 1.0],
            mean_accuracy: 0.75,
        };
        let r = metrics_report(LayerKind::Gat, &metrics(), Some(&cv));
        for needle in ["TP 3", "FP 1", "FN 0", "TN 2", "accuracy   0.8333", "precision  0.7500", "recall     1.0000", "f1         0.8571", "fold 2", "mean       0.7500"] {
            assert!(r.contains(needle), "missing {needle:?} in\n{r}");
        }
    }

    #[test]
    fn undefined_ratios_print_as_na() {
        let m = EvalMetrics::from_counts(ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 4,
        });
        let r = metrics_report(LayerKind::Gcn, &m, None);
        assert!(r.contains("precision  n/a") && !r.contains("cross-validation"), "{r}");
    }

    #[test]
    fn table_has_one_column_per_case() {
        let cols: Vec<TableColumn> = [150, 250]
            .iter()
            .flat_map(|&k| {
                LayerKind::ALL.map(|kind| TableColumn {
                    observers: k,
                    kind,
                    cv: None,
                    test: metrics(),
                })
            })
            .collect();
        let t = comparison_table(&cols);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0].matches('|').count(), 6);
        assert!(lines[1].contains("GraphSAGE"));
        assert!(lines[3].starts_with("CV Avg. Accuracy") && lines[3].contains("n/a"));
        assert!(lines[4].contains("0.8333"));
    }
}
