//! Text-table and JSON renderings of evaluation results.

use std::fmt::Write;

use argimg_core::eval::EvalReport;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct NamedReport<'a> {
    pub run: &'a str,
    pub baseline: Option<&'a str>,
    #[serde(flatten)]
    pub report: &'a EvalReport,
}

pub fn to_json(report: &NamedReport<'_>) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

pub fn to_table(report: &NamedReport<'_>, per_group: bool) -> String {
    let r = report.report;
    let mut out = String::new();
    for n in &r.notices {
        let _ = writeln!(out, "# {n}");
    }
    let _ = writeln!(out, "run: {}", report.run);
    if let Some(b) = report.baseline {
        let _ = writeln!(out, "baseline: {b}");
    }
    if per_group {
        let _ = writeln!(out, "{:>6}  {:<6}  {:>7}  {:>7}  {:>7}", "topic", "stance", "P@10", "P@1", "AP");
        for g in &r.per_group {
            let _ = writeln!(
                out,
                "{:>6}  {:<6}  {:>7.4}  {:>7.4}  {:>7.4}",
                g.topic_id, g.stance, g.precision_at_10, g.precision_at_1, g.average_precision
            );
        }
    }
    let _ = writeln!(out, "{:<10} {:>7}", "groups", r.groups);
    let _ = writeln!(out, "{:<10} {:>7.4}", "P@10", r.precision_at_10);
    let _ = writeln!(out, "{:<10} {:>7.4}", "P@1", r.precision_at_1);
    let _ = writeln!(out, "{:<10} {:>7.4}", "MAP", r.map);
    if let Some(c) = &r.comparison {
        let _ = writeln!(out, "{:<10} {:>7.4}", "t", c.t_statistic);
        let _ = writeln!(out, "{:<10} {:>7.0}", "df", c.df);
        let _ = writeln!(out, "{:<10} {:>7.4}", "p-value", c.p_value);
    }
    out
}
