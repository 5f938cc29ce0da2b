//! Metrics export: JSON mirroring the result-table row structure, plus CSV.
//! All percentages carry two decimal places.

use super::MetricsReport;

/// Rounds to two decimals (the table convention).
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn pct(v: f64) -> f64 {
    round2(v * 100.0)
}

pub fn metrics_to_json(report: &MetricsReport) -> serde_json::Value {
    serde_json::json!({
        "manipulated_article_detection": {
            "overall_accuracy": pct(report.detection_accuracy),
        },
        "manipulated_entity_identification": {
            "overall_precision": pct(report.entity_overall.precision),
            "overall_recall": pct(report.entity_overall.recall),
            "overall_f_score": pct(report.entity_overall.f1),
            "manipulated_precision": pct(report.entity_manipulated.precision),
            "manipulated_recall": pct(report.entity_manipulated.recall),
            "manipulated_f_score": pct(report.entity_manipulated.f1),
            "overall_micro_precision": pct(report.entity_overall_micro.precision),
            "overall_micro_recall": pct(report.entity_overall_micro.recall),
            "overall_micro_f_score": pct(report.entity_overall_micro.f1),
        },
        "sample_sizes": {
            "articles": report.n_articles,
            "entities": report.n_entities,
        },
    })
}

pub fn metrics_to_csv(report: &MetricsReport) -> String {
    let rows = [
        ("overall_accuracy", pct(report.detection_accuracy)),
        ("overall_precision", pct(report.entity_overall.precision)),
        ("overall_recall", pct(report.entity_overall.recall)),
        ("overall_f_score", pct(report.entity_overall.f1)),
        (
            "manipulated_precision",
            pct(report.entity_manipulated.precision),
        ),
        ("manipulated_recall", pct(report.entity_manipulated.recall)),
        ("manipulated_f_score", pct(report.entity_manipulated.f1)),
    ];
    let mut out = String::from("metric,value\n");
    for (name, value) in rows {
        out.push_str(&format!("{name},{value:.2}\n"));
    }
    out
}
