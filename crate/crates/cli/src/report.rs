//! Run summaries and the CSV artifact for multi-start experiments.

use cc_pareto::bench::AnalyticFacts;
use cc_pareto::cc1::{CC1Config, CC1Trace, Termination};
use serde::Serialize;

/// One row per start: where the run began, where it ended, how it stopped.
#[derive(Debug, Clone, Serialize)]
pub struct StartRow {
    pub start_x: Vec<f64>,
    pub start_f: Vec<f64>,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub iters: u64,
    pub status: Termination,
}

/// Everything a frontier experiment produced: the config it ran under, one
/// row per start, and aggregate statistics.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub config: CC1Config,
    pub rows: Vec<StartRow>,
    pub starts: usize,
    pub converged: usize,
    /// Largest `|residual|` of a converged final image under the problem's
    /// analytic frontier identity, when one is known.
    pub max_frontier_residual: Option<f64>,
    /// Paths written on behalf of this run.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn new(
        problem_id: &str,
        cfg: &CC1Config,
        traces: &[CC1Trace],
        facts: Option<&AnalyticFacts>,
    ) -> Self {
        let rows: Vec<StartRow> = traces
            .iter()
            .map(|trace| {
                let start = trace.start();
                StartRow {
                    start_x: start.x.clone(),
                    start_f: start.f.clone(),
                    x: trace.final_x.clone(),
                    f: trace.final_f.clone(),
                    iters: trace.records.len() as u64,
                    status: trace.termination,
                }
            })
            .collect();
        let converged = traces.iter().filter(|t| t.termination.converged()).count();
        let max_frontier_residual = facts.and_then(|fa| fa.frontier_residual).map(|residual| {
            traces
                .iter()
                .filter(|t| t.termination.converged())
                .map(|t| residual(&t.final_f).abs())
                .fold(0.0, f64::max)
        });
        RunReport {
            problem: problem_id.to_string(),
            config: cfg.clone(),
            rows,
            starts: traces.len(),
            converged,
            max_frontier_residual,
            files: Vec::new(),
        }
    }

    /// The CSV artifact: header, then one row per start. Floats print in
    /// the shortest round-trip form, so identical runs give identical bytes.
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.start_x.len());
        let m = self.rows.first().map_or(0, |r| r.start_f.len());
        let mut head: Vec<String> = Vec::new();
        head.extend((1..=n).map(|d| format!("start_x_{d}")));
        head.extend((1..=m).map(|i| format!("start_f_{i}")));
        head.extend((1..=n).map(|d| format!("x_{d}")));
        head.extend((1..=m).map(|i| format!("f_{i}")));
        head.push("iters".into());
        head.push("status".into());
        let mut out = head.join(",");
        out.push('\n');
        for row in &self.rows {
            let mut cells: Vec<String> = Vec::new();
            cells.extend(row.start_x.iter().map(|v| format!("{v}")));
            cells.extend(row.start_f.iter().map(|v| format!("{v}")));
            cells.extend(row.x.iter().map(|v| format!("{v}")));
            cells.extend(row.f.iter().map(|v| format!("{v}")));
            cells.push(row.iters.to_string());
            cells.push(termination_label(row.status));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn print_summary(&self) {
        println!("problem: {}", self.problem);
        println!("starts: {}  converged: {}", self.starts, self.converged);
        if let Some(residual) = self.max_frontier_residual {
            println!("max frontier residual: {residual:.3e}");
        }
        for path in &self.files {
            println!("wrote {path}");
        }
    }
}

/// The kebab-case wire name of a termination status (as in the JSON output).
pub fn termination_label(t: Termination) -> String {
    serde_json::to_value(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "unknown".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cc_pareto::bench;
    use cc_pareto::cc1;

    #[test]
    fn csv_has_one_row_per_start_and_stable_header() {
        let named = bench::get("schaffer").unwrap();
        let cfg = CC1Config::default();
        let runs = cc1::multi_start(&named.problem, 3, 7, &cfg).unwrap();
        let traces: Vec<CC1Trace> = runs.into_iter().collect::<cc_pareto::Result<_>>().unwrap();
        let report = RunReport::new("schaffer", &cfg, &traces, Some(&named.facts));
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "start_x_1,start_f_1,start_f_2,x_1,f_1,f_2,iters,status"
        );
        assert_eq!(lines.count(), 3);
        assert_eq!(report.starts, 3);
        assert!(report.converged <= report.starts);
    }

    #[test]
    fn frontier_residual_aggregates_over_converged_runs() {
        let named = bench::get("schaffer").unwrap();
        let cfg = CC1Config::default();
        let runs = cc1::multi_start(&named.problem, 5, 1, &cfg).unwrap();
        let traces: Vec<CC1Trace> = runs.into_iter().collect::<cc_pareto::Result<_>>().unwrap();
        let report = RunReport::new("schaffer", &cfg, &traces, Some(&named.facts));
        let residual = report.max_frontier_residual.unwrap();
        assert!(residual <= 1e-3, "residual {residual}");
    }

    #[test]
    fn termination_labels_are_kebab_case() {
        assert_eq!(
            termination_label(Termination::StepTolerance),
            "step-tolerance"
        );
        assert_eq!(termination_label(Termination::SumStalled), "sum-stalled");
        assert_eq!(
            termination_label(Termination::OuterBudgetReached),
            "outer-budget-reached"
        );
    }
}
