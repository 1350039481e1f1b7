use std::collections::{BTreeMap, BTreeSet};

use super::{EvalReport, Tally};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportAxis {
    TaskCategory,
    ElementCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Markdown,
    Csv,
}

fn pct(t: Option<&Tally>) -> String {
    match t.and_then(Tally::accuracy) {
        Some(a) => format!("{:.2}", a * 100.0),
        None => "—".into(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per report, one column per category seen in any report, then
/// Overall. Cells are percentages with two decimals; a category a report
/// never saw is shown as an em dash.
pub fn format_report(reports: &[EvalReport], axis: ReportAxis, style: ReportStyle) -> String {
    fn pick(r: &EvalReport, axis: ReportAxis) -> &BTreeMap<String, Tally> {
        match axis {
            ReportAxis::TaskCategory => &r.by_task_category,
            ReportAxis::ElementCategory => &r.by_element_category,
        }
    }
    let cats: BTreeSet<&String> = reports.iter().flat_map(|r| pick(r, axis).keys()).collect();
    let mut header = vec!["predictor".to_string()];
    header.extend(cats.iter().map(|c| c.to_string()));
    header.push("Overall".into());
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.predictor.clone()];
            row.extend(cats.iter().map(|c| pct(pick(r, axis).get(*c))));
            row.push(pct(Some(&r.overall)));
            row
        })
        .collect();
    let mut out = String::new();
    match style {
        ReportStyle::Markdown => {
            let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
            out.push_str(&line(&header));
            out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
            for row in &rows {
                out.push_str(&line(row));
            }
        }
        ReportStyle::Csv => {
            for row in std::iter::once(&header).chain(&rows) {
                out.push_str(&row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(name: &str, cats: &[(&str, u64, u64)]) -> EvalReport {
        let by: BTreeMap<String, Tally> =
            cats.iter().map(|(c, s, t)| (c.to_string(), Tally { successes: *s, total: *t })).collect();
        let overall = Tally { successes: cats.iter().map(|c| c.1).sum(), total: cats.iter().map(|c| c.2).sum() };
        EvalReport {
            predictor: name.into(),
            runs: 1,
            records: overall.total as usize,
            overall,
            overall_accuracy: overall.accuracy().unwrap_or(0.0),
            by_task_category: by.clone(),
            by_element_category: by,
            per_run_accuracies: vec![],
            mean: 0.0,
            stddev: 0.0,
            predictor_failures: 0,
        }
    }

    #[test]
    fn single_category_two_columns() {
        let s = format_report(&[report("m", &[("Navigation", 1, 3)])], ReportAxis::TaskCategory, ReportStyle::Markdown);
        assert_eq!(s, "| predictor | Navigation | Overall |\n|---|---|---|\n| m | 33.33 | 33.33 |\n");
    }

    #[test]
    fn missing_cells_dash() {
        let rs = [report("a", &[("X", 1, 1)]), report("b", &[("Y", 0, 2)])];
        let s = format_report(&rs, ReportAxis::ElementCategory, ReportStyle::Csv);
        assert_eq!(s, "predictor,X,Y,Overall\na,100.00,—,100.00\nb,—,0.00,0.00\n");
    }
}
