//! Flat CSV outputs.

use std::io::Write;

use boxloc::eval::{CriteriaReport, DeviationReport};
use boxloc::heuristic::Frontier;

pub const FRONTIER_HEADER: [&str; 8] = [
    "r",
    "min_access",
    "total_cost",
    "fixed_cost",
    "operational_cost",
    "num_boxes",
    "selected",
    "tour",
];

fn num(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per entry, by increasing minimum access.
pub fn write_frontier<W: Write>(out: W, frontier: &Frontier) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRONTIER_HEADER)?;
    let mut entries: Vec<_> = frontier.entries.iter().collect();
    entries.sort_by(|a, b| a.solution.min_access.total_cmp(&b.solution.min_access));
    for e in entries {
        let s = &e.solution;
        w.write_record([
            num(e.r_satisfied),
            num(s.min_access),
            num(s.total_cost),
            num(s.fixed_cost),
            num(s.operational_cost),
            s.selected.len().to_string(),
            s.selected.join(";"),
            s.tour.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_criteria<W: Write>(out: W, report: &CriteriaReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["criterion", "value"])?;
    for (label, value) in report.rows() {
        w.write_record([label.to_string(), num(value)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_deviation<W: Write>(out: W, report: &DeviationReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "heuristic_cost", "exact_cost", "percent_deviation"])?;
    for p in &report.pairs {
        w.write_record([num(p.r), num(p.heuristic_cost), num(p.exact_cost), num(p.percent())])?;
    }
    w.flush()?;
    Ok(())
}
