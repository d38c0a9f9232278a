//! Solver output and independent feasibility checking.

use std::collections::BTreeMap;
use std::fmt;

use crate::config::Configuration;
use crate::formulation::Family;
use crate::instance::Instance;
use crate::variant::{LinkMode, StructuralInfeasibility, VariantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// A solution without an optimality proof (heuristic, or limit hit).
    Feasible,
    Infeasible,
    /// A limit was hit before any solution was found.
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "optimal" => SolveStatus::Optimal,
            "feasible" => SolveStatus::Feasible,
            "infeasible" => SolveStatus::Infeasible,
            "time_limit" => SolveStatus::TimeLimit,
            other => return Err(format!("unknown status {other:?}")),
        })
    }
}

/// Why no solution exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// More links requested than a complete graph on the admissible
    /// terminals has; detected without solving anything.
    Structural(StructuralInfeasibility),
    /// No configuration meets the terminal and link counts.
    Cardinality,
    /// The root relaxation has no feasible point.
    Lp,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Structural(s) => write!(f, "structural: {s}"),
            Infeasibility::Cardinality => f.write_str("no configuration meets the cardinality rows"),
            Infeasibility::Lp => f.write_str("root relaxation infeasible"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteFlow {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub m: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadFlow {
    pub i: usize,
    pub j: usize,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Breakdown {
    pub routing_road: f64,
    pub routing_intermodal: f64,
    pub fixed_cost_total: f64,
    /// Link costs (min-links) or handling costs (handling variant).
    pub link_cost_total: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.routing_road + self.routing_intermodal + self.fixed_cost_total + self.link_cost_total
    }

    pub fn compute(
        inst: &Instance,
        variant: &VariantSpec,
        config: &Configuration,
        routes: &[RouteFlow],
        roads: &[RoadFlow],
    ) -> Self {
        let routing_road = roads.iter().map(|r| r.amount * inst.road_cost().get(r.i, r.j)).sum();
        let routing_intermodal =
            routes.iter().map(|r| r.amount * inst.route_cost(r.i, r.j, r.k, r.m)).sum();
        let fixed_cost_total = if variant.kind.charges_fixed_costs() {
            config.open().iter().map(|&k| inst.fixed_cost()[k]).sum()
        } else {
            0.0
        };
        let link_cost_total =
            config.links().iter().map(|&(k, m)| variant.link_cost(inst.inter_cost(), k, m)).sum();
        Self {
            routing_road,
            routing_intermodal,
            fixed_cost_total,
            link_cost_total,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveMeta {
    /// Seconds.
    pub wall_time: f64,
    pub nodes: usize,
    pub lp_solves: usize,
    /// Proven lower bound, when the solver has one.
    pub best_bound: Option<f64>,
    pub limit_reached: bool,
    /// Relative gap to a caller-supplied reference objective.
    pub reference_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub variant: VariantSpec,
    pub status: SolveStatus,
    pub infeasibility: Option<Infeasibility>,
    pub configuration: Configuration,
    pub routes: Vec<RouteFlow>,
    pub roads: Vec<RoadFlow>,
    pub objective: f64,
    pub breakdown: Breakdown,
    pub meta: SolveMeta,
}

impl Solution {
    pub fn infeasible(variant: &VariantSpec, why: Infeasibility) -> Self {
        Self {
            variant: variant.clone(),
            status: SolveStatus::Infeasible,
            infeasibility: Some(why),
            configuration: Configuration::empty(),
            routes: Vec::new(),
            roads: Vec::new(),
            objective: f64::INFINITY,
            breakdown: Breakdown::default(),
            meta: SolveMeta::default(),
        }
    }

    pub fn without_solution(variant: &VariantSpec) -> Self {
        Self {
            status: SolveStatus::TimeLimit,
            infeasibility: None,
            ..Self::infeasible(variant, Infeasibility::Lp)
        }
    }

    /// A solution whose objective is recomputed from its flows and
    /// configuration.
    pub fn from_flows(
        inst: &Instance,
        variant: &VariantSpec,
        configuration: Configuration,
        routes: Vec<RouteFlow>,
        roads: Vec<RoadFlow>,
        status: SolveStatus,
    ) -> Self {
        let breakdown = Breakdown::compute(inst, variant, &configuration, &routes, &roads);
        Self {
            variant: variant.clone(),
            status,
            infeasibility: None,
            configuration,
            routes,
            roads,
            objective: breakdown.total(),
            breakdown,
            meta: SolveMeta::default(),
        }
    }

    /// Sum of flow routed through a single terminal (`k == m`).
    pub fn self_route_flow(&self) -> f64 {
        self.routes.iter().filter(|r| r.k == r.m).map(|r| r.amount).sum()
    }

    /// The count shown in result tables: links for variants that fix the
    /// link count, open terminals otherwise.
    pub fn reported_count(&self) -> usize {
        match self.variant.kind {
            crate::variant::VariantKind::MinLinks => self.configuration.links().len(),
            _ => self.configuration.open().len(),
        }
    }
}

/// Largest violation in one constraint family and where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub at: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub residuals: BTreeMap<Family, Residual>,
    /// Most negative flow, as a positive number.
    pub negativity: f64,
    /// Malformed indices or configuration.
    pub structure_errors: Vec<String>,
    /// `|claimed - recomputed| / max(1, |recomputed|)`.
    pub objective_mismatch: f64,
    /// `|claimed - Σ breakdown| / max(1, |claimed|)`.
    pub breakdown_mismatch: f64,
    pub self_route_flow: f64,
    /// `Some` on instances whose costs obey the triangle inequality:
    /// whether single-terminal flow is at most `1e-7 Σq`.
    pub self_route_ok: Option<bool>,
    /// Scale used for flow residuals: `max(1, max q, max C)`.
    pub scale: f64,
}

/// Relative tolerance used by [`CheckReport::ok`].
pub const CHECK_TOL: f64 = 1e-6;
pub const OBJECTIVE_TOL: f64 = 1e-6;

impl CheckReport {
    /// Families whose residual exceeds `CHECK_TOL * scale`.
    pub fn violated(&self) -> Vec<(Family, &Residual)> {
        let lim = CHECK_TOL * self.scale;
        self.residuals.iter().filter(|(_, r)| r.value > lim).map(|(f, r)| (*f, r)).collect()
    }

    pub fn ok(&self) -> bool {
        self.violated().is_empty()
            && self.negativity <= CHECK_TOL * self.scale
            && self.structure_errors.is_empty()
            && self.objective_mismatch <= OBJECTIVE_TOL
            && self.breakdown_mismatch <= OBJECTIVE_TOL
            && self.self_route_ok != Some(false)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lim = CHECK_TOL * self.scale;
        for (family, r) in &self.residuals {
            let mark = if r.value > lim { "VIOLATED" } else { "ok" };
            writeln!(f, "{:<16} {:>12.3e}  {mark}{}", family.as_str(), r.value, if r.at.is_empty() {
                String::new()
            } else {
                format!(" at {}", r.at)
            })?;
        }
        writeln!(f, "{:<16} {:>12.3e}", "nonnegativity", self.negativity)?;
        writeln!(f, "{:<16} {:>12.3e}", "objective", self.objective_mismatch)?;
        writeln!(f, "{:<16} {:>12.3e}", "breakdown", self.breakdown_mismatch)?;
        match self.self_route_ok {
            Some(ok) => writeln!(
                f,
                "{:<16} {:>12.3e}  {}",
                "self_routes",
                self.self_route_flow,
                if ok { "ok" } else { "VIOLATED" }
            )?,
            None => writeln!(f, "{:<16} {:>12.3e}  (not checked)", "self_routes", self.self_route_flow)?,
        }
        for e in &self.structure_errors {
            writeln!(f, "error: {e}")?;
        }
        Ok(())
    }
}

fn bump(residuals: &mut BTreeMap<Family, Residual>, family: Family, value: f64, at: impl FnOnce() -> String) {
    let entry = residuals.entry(family).or_insert(Residual { value: 0.0, at: String::new() });
    if value > entry.value {
        entry.value = value;
        entry.at = at();
    }
}

/// Recomputes every constraint family from the solution's flows and
/// configuration. Violations are reported, never raised.
pub fn check_solution(inst: &Instance, variant: &VariantSpec, sol: &Solution) -> CheckReport {
    let n = inst.n();
    let p = inst.p();
    let mut report = CheckReport {
        residuals: BTreeMap::new(),
        negativity: 0.0,
        structure_errors: Vec::new(),
        objective_mismatch: 0.0,
        breakdown_mismatch: 0.0,
        self_route_flow: 0.0,
        self_route_ok: None,
        scale: inst
            .demand()
            .values()
            .iter()
            .chain(inst.capacity())
            .fold(1.0f64, |a, &b| a.max(b)),
    };
    if !sol.status.has_solution() {
        if !sol.routes.is_empty() || !sol.roads.is_empty() {
            report.structure_errors.push(format!("{} solution carries flows", sol.status));
        }
        return report;
    }
    if let Err(e) = variant.check(p) {
        report.structure_errors.push(e.to_string());
        return report;
    }
    for r in &sol.routes {
        if r.i >= n || r.j >= n || r.k >= p || r.m >= p {
            report.structure_errors.push(format!("route ({}, {}, {}, {}) out of range", r.i, r.j, r.k, r.m));
        }
    }
    for r in &sol.roads {
        if r.i >= n || r.j >= n {
            report.structure_errors.push(format!("road ({}, {}) out of range", r.i, r.j));
        }
    }
    let config = &sol.configuration;
    if config.open().iter().any(|&k| k >= p) || config.links().iter().any(|&(k, m)| k == m || m >= p) {
        report.structure_errors.push("configuration index out of range".into());
    }
    if !report.structure_errors.is_empty() {
        return report;
    }

    let mut served = vec![0.0; n * n];
    let mut through = vec![0.0; p];
    let mut route_sum: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    for r in &sol.routes {
        served[r.i * n + r.j] += r.amount;
        through[r.k] += r.amount;
        through[r.m] += r.amount;
        *route_sum.entry((r.i, r.j, r.k, r.m)).or_default() += r.amount;
        report.negativity = report.negativity.max(-r.amount);
    }
    for r in &sol.roads {
        served[r.i * n + r.j] += r.amount;
        report.negativity = report.negativity.max(-r.amount);
    }
    let res = &mut report.residuals;
    for family in [Family::DemandBalance, Family::Capacity, Family::LinkTail, Family::LinkHead, Family::RouteLink] {
        res.insert(family, Residual { value: 0.0, at: String::new() });
    }
    for i in 0..n {
        for j in 0..n {
            let v = (served[i * n + j] - inst.demand().get(i, j)).abs();
            bump(res, Family::DemandBalance, v, || format!("pair ({i}, {j})"));
        }
    }
    for k in 0..p {
        let cap = if config.is_open(k) { inst.capacity()[k] } else { 0.0 };
        bump(res, Family::Capacity, through[k] - cap, || format!("terminal {k}"));
    }
    for &(k, m) in config.links() {
        if !config.is_open(k) {
            bump(res, Family::LinkTail, 1.0, || format!("link ({k}, {m})"));
        }
        if !config.is_open(m) {
            bump(res, Family::LinkHead, 1.0, || format!("link ({k}, {m})"));
        }
    }
    for (&(i, j, k, m), &x) in &route_sum {
        let on = if k == m { config.is_open(k) } else { config.has_link(k, m) };
        let limit = if on { inst.demand().get(i, j) } else { 0.0 };
        bump(res, Family::RouteLink, x - limit, || format!("route ({i}, {j}, {k}, {m})"));
    }
    if let Some(l) = variant.l {
        let count = config.links().len();
        let v = match variant.link_mode {
            LinkMode::Exact => count.abs_diff(l),
            LinkMode::AtMost => count.saturating_sub(l),
        };
        bump(res, Family::LinkCount, v as f64, || format!("{count} links for l = {l}"));
        res.entry(Family::LinkCount).or_insert(Residual { value: 0.0, at: String::new() });
    }
    if let Some(q) = variant.q_terminals {
        let count = config.open().len();
        bump(res, Family::TerminalCount, count.abs_diff(q) as f64, || format!("{count} terminals for q = {q}"));
        res.entry(Family::TerminalCount).or_insert(Residual { value: 0.0, at: String::new() });
    }

    let recomputed = Breakdown::compute(inst, variant, config, &sol.routes, &sol.roads).total();
    report.objective_mismatch = (sol.objective - recomputed).abs() / recomputed.abs().max(1.0);
    report.breakdown_mismatch = (sol.objective - sol.breakdown.total()).abs() / sol.objective.abs().max(1.0);
    report.self_route_flow = sol.self_route_flow();
    if inst.triangle_ok() {
        report.self_route_ok = Some(report.self_route_flow <= 1e-7 * inst.total_demand());
    }
    report
}
