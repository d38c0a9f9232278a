//! The four model variants as solver-agnostic mixed 0-1 programs.
//!
//! Variables are routes `x[i][j][k][m]` (flow from customer `i` to `j` via
//! terminals `k` then `m`), road flows `w[i][j]`, terminal indicators
//! `z[k][k]` and link indicators `z[k][m]`.
//!
//! Two schemes exist. [`Scheme::Reduced`] is what the solvers use: one link
//! variable per unordered pair (symmetry holds by construction) and no
//! variables or rows for customer pairs without demand. [`Scheme::Literal`]
//! builds every index combination, ordered link variables plus explicit
//! symmetry rows, and exists to reproduce the textbook model sizes.
//!
//! Route-to-link coupling is `x[i][j][k][m] <= q[i][j] * z[k][m]`; the demand
//! is the tightest constant that keeps the coupling valid.

use std::collections::BTreeMap;
use std::fmt;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{LpProblem, Relation};
use crate::variant::{LinkMode, StructuralInfeasibility, VariantSpec};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    Route { i: usize, j: usize, k: usize, m: usize },
    Road { i: usize, j: usize },
    Link { k: usize, m: usize },
    Terminal { k: usize },
}

impl VarRole {
    /// Canonical name: `x_i_j_k_m`, `w_i_j` or `z_k_m` (`z_k_k` for a
    /// terminal).
    pub fn name(&self) -> String {
        match *self {
            VarRole::Route { i, j, k, m } => format!("x_{i}_{j}_{k}_{m}"),
            VarRole::Road { i, j } => format!("w_{i}_{j}"),
            VarRole::Link { k, m } => format!("z_{k}_{m}"),
            VarRole::Terminal { k } => format!("z_{k}_{k}"),
        }
    }

    pub fn is_binary_role(&self) -> bool {
        matches!(self, VarRole::Link { .. } | VarRole::Terminal { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipVar {
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub role: VarRole,
}

/// Constraint family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Road plus intermodal flow meets each demand exactly.
    DemandBalance,
    /// Inbound plus outbound terminal throughput within capacity.
    Capacity,
    /// A link needs its first terminal open.
    LinkTail,
    /// A link needs its second terminal open.
    LinkHead,
    /// `z[k][m] = z[m][k]`; literal scheme only.
    LinkSymmetry,
    /// Number of established links.
    LinkCount,
    /// Route flow only over established links.
    RouteLink,
    /// Number of open terminals.
    TerminalCount,
    /// Total flow on a link within its endpoints' capacities.
    LinkThroughput,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::DemandBalance,
        Family::Capacity,
        Family::LinkTail,
        Family::LinkHead,
        Family::LinkSymmetry,
        Family::LinkCount,
        Family::RouteLink,
        Family::TerminalCount,
        Family::LinkThroughput,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::DemandBalance => "demand_balance",
            Family::Capacity => "capacity",
            Family::LinkTail => "link_tail",
            Family::LinkHead => "link_head",
            Family::LinkSymmetry => "link_symmetry",
            Family::LinkCount => "link_count",
            Family::RouteLink => "route_link",
            Family::TerminalCount => "terminal_count",
            Family::LinkThroughput => "link_throughput",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub family: Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Reduced,
    Literal,
}

/// How route flows are tied to link indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linking {
    /// One row per route, `x <= q z`.
    #[default]
    PerRoute,
    /// One row per link, `Σ x <= min(C_k, C_m, Σq) z`. Exact at 0/1 link
    /// values, far smaller, and usually the tighter relaxation when
    /// capacities bind.
    PerLink,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelOptions {
    pub scheme: Scheme,
    pub linking: Linking,
    /// Skip routes whose unit cost is no better than the direct road. Such
    /// routes can always be shifted to road without loss, so optimal values
    /// are unchanged.
    pub prune_dominated_routes: bool,
}

impl ModelOptions {
    /// Options used to evaluate fixed configurations. With every indicator
    /// fixed, per-link rows are as tight as per-route rows and far fewer.
    pub fn search() -> Self {
        Self {
            scheme: Scheme::Reduced,
            linking: Linking::PerLink,
            prune_dominated_routes: true,
        }
    }

    pub fn literal() -> Self {
        Self {
            scheme: Scheme::Literal,
            ..Self::default()
        }
    }
}

/// A linear model with 0-1 indicators, minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub variables: Vec<MipVar>,
    pub rows: Vec<MipRow>,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub scheme: Scheme,
    /// Set when the cardinality rows cannot be met by any graph; such
    /// models carry no variables or rows.
    pub structural_infeasibility: Option<StructuralInfeasibility>,
    /// Rows left without variables after fixing indicators that do not
    /// hold.
    pub violated_fixed_rows: Vec<Family>,
    n: usize,
    p: usize,
    pairs: Vec<(usize, usize)>,
    route_var: Vec<usize>,
    road_var: Vec<usize>,
    z_var: Vec<usize>,
}

impl MipModel {
    fn empty(inst: &Instance, scheme: Scheme) -> Self {
        Self {
            variables: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
            scheme,
            structural_infeasibility: None,
            violated_fixed_rows: Vec::new(),
            n: inst.n(),
            p: inst.p(),
            pairs: Vec::new(),
            route_var: Vec::new(),
            road_var: Vec::new(),
            z_var: vec![NONE; inst.p() * inst.p()],
        }
    }

    fn add_var(&mut self, role: VarRole, cost: f64) -> usize {
        let integer = role.is_binary_role();
        self.variables.push(MipVar {
            lower: 0.0,
            upper: if integer { 1.0 } else { f64::INFINITY },
            integer,
            role,
        });
        self.objective.push(cost);
        self.variables.len() - 1
    }

    fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64, family: Family) {
        self.rows.push(MipRow { coeffs, relation, rhs, family });
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_structurally_infeasible(&self) -> bool {
        self.structural_infeasibility.is_some()
    }

    /// Customer pairs that carry variables.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Variable of route `(pair, k, m)` if it exists.
    pub fn route(&self, pair: usize, k: usize, m: usize) -> Option<usize> {
        let v = *self.route_var.get((pair * self.p + k) * self.p + m)?;
        (v != NONE).then_some(v)
    }

    pub fn road(&self, pair: usize) -> Option<usize> {
        self.road_var.get(pair).copied().filter(|&v| v != NONE)
    }

    /// Indicator variable for ordered sites `(k, m)`; `k == m` is the
    /// terminal itself.
    pub fn indicator(&self, k: usize, m: usize) -> Option<usize> {
        let v = *self.z_var.get(k * self.p + m)?;
        (v != NONE).then_some(v)
    }

    pub fn binary_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().enumerate().filter(|(_, v)| v.integer).map(|(i, _)| i)
    }

    /// Objective of a full assignment.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(values).map(|(c, v)| c * v).sum::<f64>()
    }

    /// LP relaxation: indicators become continuous in `[0, 1]`.
    pub fn to_lp(&self) -> LpProblem {
        let mut lp = LpProblem::new();
        for (v, &c) in self.variables.iter().zip(&self.objective) {
            lp.add_var(c, v.lower, v.upper);
        }
        for row in &self.rows {
            lp.add_row(row.coeffs.clone(), row.relation, row.rhs);
        }
        lp
    }

    /// LP over the variables that are not fixed by their bounds; fixed
    /// values are folded into the right-hand sides. Returns the problem and
    /// the model variable behind each LP column.
    pub fn to_compact_lp(&self) -> (LpProblem, Vec<usize>) {
        let mut col = vec![NONE; self.variables.len()];
        let mut map = Vec::new();
        let mut lp = LpProblem::new();
        for (idx, (v, &c)) in self.variables.iter().zip(&self.objective).enumerate() {
            if v.lower != v.upper {
                col[idx] = lp.add_var(c, v.lower, v.upper);
                map.push(idx);
            }
        }
        for row in &self.rows {
            let mut rhs = row.rhs;
            let mut coeffs = Vec::with_capacity(row.coeffs.len());
            for &(j, a) in &row.coeffs {
                if col[j] == NONE {
                    rhs -= a * self.variables[j].lower;
                } else {
                    coeffs.push((col[j], a));
                }
            }
            if !coeffs.is_empty() {
                lp.add_row(coeffs, row.relation, rhs);
            }
        }
        (lp, map)
    }
}

fn check_inputs(inst: &Instance, variant: &VariantSpec) -> Result<()> {
    inst.validated()?;
    variant.check(inst.p())
}

/// Builds the model of any variant.
pub fn build(inst: &Instance, variant: &VariantSpec, opts: &ModelOptions) -> Result<MipModel> {
    check_inputs(inst, variant)?;
    let mut model = MipModel::empty(inst, opts.scheme);
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        model.structural_infeasibility = Some(s);
        return Ok(model);
    }
    match opts.scheme {
        Scheme::Reduced => build_reduced(inst, variant, opts, &mut model),
        Scheme::Literal => build_literal(inst, variant, &mut model),
    }
    Ok(model)
}

pub fn build_base(inst: &Instance, l: usize, mode: LinkMode) -> Result<MipModel> {
    build(inst, &VariantSpec::base(l, mode), &ModelOptions::default())
}

pub fn build_min_links(inst: &Instance, q_terminals: usize) -> Result<MipModel> {
    build(inst, &VariantSpec::min_links(q_terminals), &ModelOptions::default())
}

pub fn build_handling(
    inst: &Instance,
    l: usize,
    handling_cost: crate::instance::Matrix,
    mode: LinkMode,
) -> Result<MipModel> {
    build(inst, &VariantSpec::handling(l, handling_cost, mode), &ModelOptions::default())
}

pub fn build_pl(inst: &Instance, q_terminals: usize, l: usize, mode: LinkMode) -> Result<MipModel> {
    build(inst, &VariantSpec::pl(q_terminals, l, mode), &ModelOptions::default())
}

fn link_relation(mode: LinkMode) -> Relation {
    match mode {
        LinkMode::Exact => Relation::Eq,
        LinkMode::AtMost => Relation::Le,
    }
}

fn build_reduced(inst: &Instance, variant: &VariantSpec, opts: &ModelOptions, model: &mut MipModel) {
    let p = inst.p();
    let kind = variant.kind;
    model.pairs = inst.demand_pairs();
    let npairs = model.pairs.len();

    for k in 0..p {
        let f = if kind.charges_fixed_costs() { inst.fixed_cost()[k] } else { 0.0 };
        model.z_var[k * p + k] = model.add_var(VarRole::Terminal { k }, f);
    }
    for k in 0..p {
        for m in (k + 1)..p {
            let cost = variant.link_cost(inst.inter_cost(), k, m);
            let v = model.add_var(VarRole::Link { k, m }, cost);
            model.z_var[k * p + m] = v;
            model.z_var[m * p + k] = v;
        }
    }

    model.route_var = vec![NONE; npairs * p * p];
    model.road_var = vec![NONE; npairs];
    for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
        let road = inst.road_cost().get(i, j);
        for k in 0..p {
            for m in 0..p {
                let c = inst.route_cost(i, j, k, m);
                if opts.prune_dominated_routes && c >= road {
                    continue;
                }
                model.route_var[(pi * p + k) * p + m] = model.add_var(VarRole::Route { i, j, k, m }, c);
            }
        }
        model.road_var[pi] = model.add_var(VarRole::Road { i, j }, road);
    }

    // demand balance
    for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> =
            (0..p * p).filter_map(|km| model.route(pi, km / p, km % p)).map(|v| (v, 1.0)).collect();
        coeffs.push((model.road_var[pi], 1.0));
        model.add_row(coeffs, Relation::Eq, inst.demand().get(i, j), Family::DemandBalance);
    }

    // capacity: every route through k counts once per endpoint at k
    let mut through: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); p];
    for pi in 0..npairs {
        for k in 0..p {
            for m in 0..p {
                if let Some(v) = model.route(pi, k, m) {
                    *through[k].entry(v).or_default() += 1.0;
                    *through[m].entry(v).or_default() += 1.0;
                }
            }
        }
    }
    for (k, flows) in through.into_iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = flows.into_iter().collect();
        coeffs.push((model.z_var[k * p + k], -inst.capacity()[k]));
        model.add_row(coeffs, Relation::Le, 0.0, Family::Capacity);
    }

    for k in 0..p {
        for m in (k + 1)..p {
            let z = model.z_var[k * p + m];
            model.add_row(vec![(z, 1.0), (model.z_var[k * p + k], -1.0)], Relation::Le, 0.0, Family::LinkTail);
            model.add_row(vec![(z, 1.0), (model.z_var[m * p + m], -1.0)], Relation::Le, 0.0, Family::LinkHead);
        }
    }

    if let Some(l) = variant.l {
        let coeffs = (0..p)
            .flat_map(|k| ((k + 1)..p).map(move |m| (k, m)))
            .map(|(k, m)| (model.z_var[k * p + m], 1.0))
            .collect();
        model.add_row(coeffs, link_relation(variant.link_mode), l as f64, Family::LinkCount);
    }

    if matches!(opts.linking, Linking::PerRoute | Linking::Both) {
        for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
            let q = inst.demand().get(i, j);
            for k in 0..p {
                for m in 0..p {
                    if let Some(x) = model.route(pi, k, m) {
                        let z = model.z_var[k * p + m];
                        model.add_row(vec![(x, 1.0), (z, -q)], Relation::Le, 0.0, Family::RouteLink);
                    }
                }
            }
        }
    }

    if let Some(q) = variant.q_terminals {
        let coeffs = (0..p).map(|k| (model.z_var[k * p + k], 1.0)).collect();
        model.add_row(coeffs, Relation::Eq, q as f64, Family::TerminalCount);
    }

    if matches!(opts.linking, Linking::PerLink | Linking::Both) {
        let total = inst.total_demand();
        for k in 0..p {
            for m in (k + 1)..p {
                let mut coeffs: Vec<(usize, f64)> = (0..npairs)
                    .flat_map(|pi| [model.route(pi, k, m), model.route(pi, m, k)])
                    .flatten()
                    .map(|v| (v, 1.0))
                    .collect();
                if coeffs.is_empty() {
                    continue;
                }
                let cap = inst.capacity()[k].min(inst.capacity()[m]).min(total);
                coeffs.push((model.z_var[k * p + m], -cap));
                model.add_row(coeffs, Relation::Le, 0.0, Family::LinkThroughput);
            }
        }
    }
}

fn build_literal(inst: &Instance, variant: &VariantSpec, model: &mut MipModel) {
    let n = inst.n();
    let p = inst.p();
    let kind = variant.kind;
    model.pairs = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();

    for k in 0..p {
        for m in 0..p {
            let (role, cost) = if k == m {
                let f = if kind.charges_fixed_costs() { inst.fixed_cost()[k] } else { 0.0 };
                (VarRole::Terminal { k }, f)
            } else {
                // the link cost is charged once per unordered pair
                let c = if k < m { variant.link_cost(inst.inter_cost(), k, m) } else { 0.0 };
                (VarRole::Link { k, m }, c)
            };
            model.z_var[k * p + m] = model.add_var(role, cost);
        }
    }
    let npairs = model.pairs.len();
    model.route_var = vec![NONE; npairs * p * p];
    model.road_var = vec![NONE; npairs];
    for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
        for k in 0..p {
            for m in 0..p {
                let c = inst.route_cost(i, j, k, m);
                model.route_var[(pi * p + k) * p + m] = model.add_var(VarRole::Route { i, j, k, m }, c);
            }
        }
        model.road_var[pi] = model.add_var(VarRole::Road { i, j }, inst.road_cost().get(i, j));
    }

    for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> =
            (0..p * p).map(|km| (model.route_var[pi * p * p + km], 1.0)).collect();
        coeffs.push((model.road_var[pi], 1.0));
        model.add_row(coeffs, Relation::Eq, inst.demand().get(i, j), Family::DemandBalance);
    }
    for k in 0..p {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for pi in 0..npairs {
            for m in 0..p {
                *acc.entry(model.route_var[(pi * p + k) * p + m]).or_default() += 1.0;
                *acc.entry(model.route_var[(pi * p + m) * p + k]).or_default() += 1.0;
            }
        }
        let mut coeffs: Vec<(usize, f64)> = acc.into_iter().collect();
        coeffs.push((model.z_var[k * p + k], -inst.capacity()[k]));
        model.add_row(coeffs, Relation::Le, 0.0, Family::Capacity);
    }
    // z[k][m] <= z[k][k], z[k][m] <= z[m][m] and symmetry, over all ordered
    // pairs; diagonal instances cancel to empty rows
    let pair_row = |a: usize, b: usize, rel: Relation| -> (Vec<(usize, f64)>, Relation) {
        if a == b {
            (Vec::new(), rel)
        } else {
            (vec![(a, 1.0), (b, -1.0)], rel)
        }
    };
    for (family, other, rel) in [
        (Family::LinkTail, 0u8, Relation::Le),
        (Family::LinkHead, 1u8, Relation::Le),
        (Family::LinkSymmetry, 2u8, Relation::Eq),
    ] {
        for k in 0..p {
            for m in 0..p {
                let zkm = model.z_var[k * p + m];
                let target = match other {
                    0 => model.z_var[k * p + k],
                    1 => model.z_var[m * p + m],
                    _ => model.z_var[m * p + k],
                };
                let (coeffs, rel) = pair_row(zkm, target, rel);
                model.add_row(coeffs, rel, 0.0, family);
            }
        }
    }
    if let Some(l) = variant.l {
        // ordered off-diagonal pairs count each link twice
        let coeffs = (0..p)
            .flat_map(|k| (0..p).map(move |m| (k, m)))
            .filter(|(k, m)| k != m)
            .map(|(k, m)| (model.z_var[k * p + m], 1.0))
            .collect();
        model.add_row(coeffs, link_relation(variant.link_mode), 2.0 * l as f64, Family::LinkCount);
    }
    for (pi, &(i, j)) in model.pairs.clone().iter().enumerate() {
        let q = inst.demand().get(i, j);
        for k in 0..p {
            for m in 0..p {
                let x = model.route_var[(pi * p + k) * p + m];
                let z = model.z_var[k * p + m];
                model.add_row(vec![(x, 1.0), (z, -q)], Relation::Le, 0.0, Family::RouteLink);
            }
        }
    }
    if let Some(q) = variant.q_terminals {
        let coeffs = (0..p).map(|k| (model.z_var[k * p + k], 1.0)).collect();
        model.add_row(coeffs, Relation::Eq, q as f64, Family::TerminalCount);
    }
}

/// Value of indicator `(k, m)` under `config`.
fn indicator_value(config: &Configuration, k: usize, m: usize) -> f64 {
    let on = if k == m { config.is_open(k) } else { config.has_link(k, m) };
    if on {
        1.0
    } else {
        0.0
    }
}

/// Fixes every indicator to the configuration's value. The result has no
/// indicator variables: their contribution moves into the objective
/// constant and right-hand sides, single-variable rows become bounds, and
/// `<= 0` rows over nonnegative variables with positive coefficients fix
/// those variables at zero. Rows left empty and violated are recorded in
/// `violated_fixed_rows`.
pub fn fix_configuration(model: &MipModel, config: &Configuration) -> Result<MipModel> {
    config.check(model.p)?;
    let p = model.p;
    let tol = 1e-9;
    let mut fixed_val = vec![f64::NAN; model.variables.len()];
    for k in 0..p {
        for m in 0..p {
            if let Some(v) = model.indicator(k, m) {
                fixed_val[v] = indicator_value(config, k, m);
            }
        }
    }

    let mut out = model.clone();
    out.rows.clear();
    out.violated_fixed_rows.clear();
    let mut new_id = vec![NONE; model.variables.len()];
    out.variables.clear();
    out.objective.clear();
    for (idx, v) in model.variables.iter().enumerate() {
        if fixed_val[idx].is_nan() {
            new_id[idx] = out.variables.len();
            out.variables.push(v.clone());
            out.objective.push(model.objective[idx]);
        } else {
            out.objective_constant += model.objective[idx] * fixed_val[idx];
        }
    }
    let remap = |table: &[usize]| -> Vec<usize> {
        table.iter().map(|&v| if v == NONE { NONE } else { new_id[v] }).collect()
    };
    out.route_var = remap(&model.route_var);
    out.road_var = remap(&model.road_var);
    out.z_var = vec![NONE; p * p];

    for row in &model.rows {
        let mut rhs = row.rhs;
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for &(j, a) in &row.coeffs {
            if fixed_val[j].is_nan() {
                coeffs.push((new_id[j], a));
            } else {
                rhs -= a * fixed_val[j];
            }
        }
        match coeffs.len() {
            0 => {
                let ok = match row.relation {
                    Relation::Le => 0.0 <= rhs + tol,
                    Relation::Ge => 0.0 >= rhs - tol,
                    Relation::Eq => rhs.abs() <= tol,
                };
                if !ok {
                    out.violated_fixed_rows.push(row.family);
                }
            }
            1 => {
                let (j, a) = coeffs[0];
                let v = &mut out.variables[j];
                let bound = rhs / a;
                let (upper, lower) = match (row.relation, a > 0.0) {
                    (Relation::Le, true) | (Relation::Ge, false) => (true, false),
                    (Relation::Le, false) | (Relation::Ge, true) => (false, true),
                    (Relation::Eq, _) => (true, true),
                };
                if upper {
                    v.upper = v.upper.min(bound);
                }
                if lower {
                    v.lower = v.lower.max(bound);
                }
                if v.lower > v.upper {
                    out.violated_fixed_rows.push(row.family);
                    v.upper = v.lower;
                }
            }
            _ => {
                let zero_forcing = row.relation == Relation::Le
                    && rhs.abs() <= tol
                    && coeffs.iter().all(|&(j, a)| a > 0.0 && out.variables[j].lower == 0.0);
                if zero_forcing {
                    for &(j, _) in &coeffs {
                        out.variables[j].upper = 0.0;
                    }
                } else {
                    out.rows.push(MipRow {
                        coeffs,
                        relation: row.relation,
                        rhs,
                        family: row.family,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Row and variable counts of a built model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelStats {
    pub num_constraints: usize,
    pub num_variables: usize,
    pub num_binaries: usize,
    pub per_family: BTreeMap<Family, usize>,
}

pub fn model_stats(model: &MipModel) -> ModelStats {
    let mut per_family = BTreeMap::new();
    for row in &model.rows {
        *per_family.entry(row.family).or_insert(0) += 1;
    }
    ModelStats {
        num_constraints: model.rows.len(),
        num_variables: model.variables.len(),
        num_binaries: model.variables.iter().filter(|v| v.integer).count(),
        per_family,
    }
}

/// Counts of the textbook (literal) model of the base variant for an
/// instance shaped like `inst`.
pub fn literal_model_stats(inst: &Instance, variant: &VariantSpec) -> Result<ModelStats> {
    if variant.structural_infeasibility(inst.p()).is_some() {
        return Err(Error::InvalidVariant(
            "structurally infeasible variants have no rows to count".into(),
        ));
    }
    Ok(model_stats(&build(inst, variant, &ModelOptions::literal())?))
}
