//! Result rows: cost in units of
//! 10^7 with two decimals, time in seconds, and `*` in every cell of a row
//! whose limit was hit.

use itlp::solution::{Solution, SolveStatus};
use itlp::{VariantKind, VariantSpec};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BenchRow {
    pub name: String,
    pub seed: u64,
    pub variant: String,
    pub link_mode: String,
    pub engine: String,
    pub status: String,
    /// Unscaled objective; `None` without a solution.
    pub objective: Option<f64>,
    pub time: f64,
    /// Open terminals, or links for min-links.
    pub count: Option<usize>,
    pub nodes: usize,
    pub lp_solves: usize,
    pub limit_hit: bool,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn from_solution(name: &str, seed: u64, spec: &VariantSpec, engine: &str, sol: &Solution) -> Self {
        let has = sol.status.has_solution();
        Self {
            name: name.to_string(),
            seed,
            variant: spec.kind.to_string(),
            link_mode: spec.link_mode.to_string(),
            engine: engine.to_string(),
            status: sol.status.to_string(),
            objective: has.then_some(sol.objective),
            time: sol.meta.wall_time,
            count: has.then(|| sol.reported_count()),
            nodes: sol.meta.nodes,
            lp_solves: sol.meta.lp_solves,
            limit_hit: sol.meta.limit_reached || sol.status == SolveStatus::TimeLimit,
            error: None,
        }
    }

    pub fn failed(name: &str, seed: u64, spec_kind: &str, engine: &str, error: String) -> Self {
        Self {
            name: name.to_string(),
            seed,
            variant: spec_kind.to_string(),
            link_mode: String::new(),
            engine: engine.to_string(),
            status: "error".into(),
            objective: None,
            time: 0.0,
            count: None,
            nodes: 0,
            lp_solves: 0,
            limit_hit: false,
            error: Some(error),
        }
    }

    /// Cost, time and count cells as displayed.
    pub fn cells(&self) -> [String; 3] {
        if self.limit_hit {
            return ["*".into(), "*".into(), "*".into()];
        }
        match (self.objective, self.count) {
            (Some(obj), Some(count)) => [format!("{:.2}", obj / 1e7), format!("{:.2}", self.time), count.to_string()],
            _ => ["-".into(), format!("{:.2}", self.time), "-".into()],
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.seed.to_string(),
            self.variant.clone(),
            self.link_mode.clone(),
            self.engine.clone(),
            self.status.clone(),
            self.objective.map_or(String::new(), |v| format!("{v:.6}")),
            self.objective.map_or(String::new(), |v| format!("{:.2}", v / 1e7)),
            format!("{:.3}", self.time),
            self.count.map_or(String::new(), |c| c.to_string()),
            self.nodes.to_string(),
            self.lp_solves.to_string(),
            self.limit_hit.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

pub(crate) const CSV_HEADER: [&str; 14] = [
    "name", "seed", "variant", "link_mode", "engine", "status", "objective", "cost_1e7", "time_s", "count", "nodes",
    "lp_solves", "limit_hit", "error",
];

pub(crate) fn count_title(spec: &VariantSpec) -> &'static str {
    match spec.kind {
        VariantKind::MinLinks => "# links",
        _ => "# terminals",
    }
}

pub(crate) fn print_header(spec: &VariantSpec) {
    println!("{:<16} {:>14} {:>10} {:>12}  Status", "Name", "Cost (x10^7)", "Time (s)", count_title(spec));
}

pub(crate) fn print_row(row: &BenchRow) {
    let [cost, time, count] = row.cells();
    let status = match &row.error {
        Some(e) => format!("error: {e}"),
        None => row.status.clone(),
    };
    println!("{:<16} {:>14} {:>10} {:>12}  {}", row.name, cost, time, count, status);
}
