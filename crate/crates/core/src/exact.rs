//! Exact optimization: configuration evaluation, a brute-force oracle and
//! branch-and-bound over the indicator variables.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::formulation::{build, fix_configuration, Linking, MipModel, ModelOptions, Scheme, VarRole};
use crate::instance::Instance;
use crate::lp::{solve_lp, solve_lp_from, Basis, LpOptions, LpProblem, LpStatus};
use crate::solution::{Infeasibility, RoadFlow, RouteFlow, Solution, SolveStatus};
use crate::variant::{max_links, LinkMode, VariantSpec};

/// Flows below this are left out of reported solutions.
const FLOW_EPS: f64 = 1e-12;

/// Solves routing LPs for fixed configurations, caching objectives.
pub struct Evaluator<'a> {
    inst: &'a Instance,
    variant: VariantSpec,
    model: MipModel,
    lp_opts: LpOptions,
    cache: HashMap<Configuration, Option<f64>>,
    lp_solves: usize,
}

struct Routed {
    objective: f64,
    values: Vec<f64>,
    fixed: MipModel,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a Instance, variant: &VariantSpec) -> Result<Self> {
        let model = build(inst, variant, &ModelOptions::search())?;
        Ok(Self {
            inst,
            variant: variant.clone(),
            model,
            lp_opts: LpOptions::default(),
            cache: HashMap::new(),
            lp_solves: 0,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn variant(&self) -> &VariantSpec {
        &self.variant
    }

    pub fn lp_solves(&self) -> usize {
        self.lp_solves
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    fn route(&mut self, config: &Configuration) -> Result<Option<Routed>> {
        config.check(self.inst.p())?;
        if self.model.is_structurally_infeasible() || !config.meets_cardinality(&self.variant) {
            return Ok(None);
        }
        let fixed = fix_configuration(&self.model, config)?;
        if !fixed.violated_fixed_rows.is_empty() {
            return Ok(None);
        }
        let (lp, map) = fixed.to_compact_lp();
        let sol = solve_lp(&lp, &self.lp_opts)?;
        self.lp_solves += 1;
        if sol.status != LpStatus::Optimal {
            return Err(Error::InvalidLp(format!("routing LP for {config} ended {}", sol.status)));
        }
        let mut values: Vec<f64> = fixed.variables.iter().map(|v| v.lower).collect();
        for (col, &var) in map.iter().enumerate() {
            values[var] = sol.primal[col];
        }
        Ok(Some(Routed {
            objective: fixed.evaluate(&values),
            values,
            fixed,
        }))
    }

    /// Objective of the best routing under `config`, or `None` when the
    /// configuration violates the variant's cardinality rows.
    pub fn cost(&mut self, config: &Configuration) -> Result<Option<f64>> {
        if let Some(&c) = self.cache.get(config) {
            return Ok(c);
        }
        let c = self.route(config)?.map(|r| r.objective);
        self.cache.insert(config.clone(), c);
        Ok(c)
    }

    /// Full solution for `config`, status `Feasible`.
    pub fn solve(&mut self, config: &Configuration) -> Result<Solution> {
        let Some(routed) = self.route(config)? else {
            return Ok(Solution::infeasible(&self.variant, Infeasibility::Cardinality));
        };
        let mut routes = Vec::new();
        let mut roads = Vec::new();
        for (v, &amount) in routed.fixed.variables.iter().zip(&routed.values) {
            if amount <= FLOW_EPS {
                continue;
            }
            match v.role {
                VarRole::Route { i, j, k, m } => routes.push(RouteFlow { i, j, k, m, amount }),
                VarRole::Road { i, j } => roads.push(RoadFlow { i, j, amount }),
                _ => {}
            }
        }
        let sol = Solution::from_flows(self.inst, &self.variant, config.clone(), routes, roads, SolveStatus::Feasible);
        self.cache.insert(config.clone(), Some(sol.objective));
        Ok(sol)
    }
}

/// Routing LP for one configuration plus the variant's fixed, link or
/// handling costs.
pub fn evaluate_configuration(inst: &Instance, variant: &VariantSpec, config: &Configuration) -> Result<Solution> {
    let start = Instant::now();
    let mut ev = Evaluator::new(inst, variant)?;
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        return Ok(Solution::infeasible(variant, Infeasibility::Structural(s)));
    }
    let mut sol = ev.solve(config)?;
    sol.meta.lp_solves = ev.lp_solves();
    sol.meta.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

/// Largest number of link pairs brute force accepts.
pub const BRUTE_FORCE_MAX_PAIRS: usize = 12;
/// Largest number of configurations brute force enumerates.
pub const BRUTE_FORCE_MAX_CONFIGS: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn link_count_range(variant: &VariantSpec, pairs: usize) -> (usize, usize) {
    match (variant.l, variant.link_mode) {
        (Some(l), LinkMode::Exact) => (l, l),
        (Some(l), LinkMode::AtMost) => (0, l.min(pairs)),
        (None, _) => (0, pairs),
    }
}

fn open_sets(p: usize, variant: &VariantSpec) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u32..(1u32 << p))
        .filter(move |mask| variant.q_terminals.map_or(true, |q| mask.count_ones() as usize == q))
        .map(move |mask| (0..p).filter(|&k| mask >> k & 1 == 1).collect())
}

/// Number of configurations brute force would visit.
pub fn enumeration_count(p: usize, variant: &VariantSpec) -> u128 {
    open_sets(p, variant)
        .map(|open| {
            let pairs = max_links(open.len());
            let (lo, hi) = link_count_range(variant, pairs);
            (lo..=hi).map(|c| binomial(pairs, c)).sum::<u128>()
        })
        .sum()
}

fn check_enumeration_cap(p: usize, variant: &VariantSpec) -> Result<()> {
    if max_links(p) > BRUTE_FORCE_MAX_PAIRS {
        return Err(Error::EnumerationCap(format!(
            "{} site pairs exceed the brute-force cap of {BRUTE_FORCE_MAX_PAIRS}",
            max_links(p)
        )));
    }
    let count = enumeration_count(p, variant);
    if count > BRUTE_FORCE_MAX_CONFIGS {
        return Err(Error::EnumerationCap(format!(
            "{count} configurations exceed the brute-force cap of {BRUTE_FORCE_MAX_CONFIGS}"
        )));
    }
    Ok(())
}

/// Every configuration meeting the variant's cardinality rows, in
/// increasing order of open set and then link subset.
pub fn enumerate_configurations(p: usize, variant: &VariantSpec) -> Result<Vec<Configuration>> {
    check_enumeration_cap(p, variant)?;
    let mut out = Vec::new();
    for open in open_sets(p, variant) {
        let pairs: Vec<(usize, usize)> = open
            .iter()
            .enumerate()
            .flat_map(|(a, &k)| open[a + 1..].iter().map(move |&m| (k, m)))
            .collect();
        let (lo, hi) = link_count_range(variant, pairs.len());
        for mask in 0u32..(1u32 << pairs.len()) {
            let c = mask.count_ones() as usize;
            if c < lo || c > hi {
                continue;
            }
            let links = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &l)| l);
            out.push(Configuration::new(open.iter().copied(), links));
        }
    }
    Ok(out)
}

/// Enumerates every admissible configuration and returns the cheapest.
pub fn brute_force(inst: &Instance, variant: &VariantSpec) -> Result<Solution> {
    brute_force_filtered(inst, variant, |_| true)
}

/// [`brute_force`] restricted to configurations accepted by `keep`.
/// Ties go to the smaller configuration.
pub fn brute_force_filtered(
    inst: &Instance,
    variant: &VariantSpec,
    keep: impl Fn(&Configuration) -> bool,
) -> Result<Solution> {
    let start = Instant::now();
    inst.validated()?;
    variant.check(inst.p())?;
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        return Ok(Solution::infeasible(variant, Infeasibility::Structural(s)));
    }
    let configs = enumerate_configurations(inst.p(), variant)?;
    let mut ev = Evaluator::new(inst, variant)?;
    let mut best: Option<(f64, Configuration)> = None;
    for config in configs.into_iter().filter(|c| keep(c)) {
        let Some(c) = ev.cost(&config)? else { continue };
        if best.as_ref().map_or(true, |(b, _)| c < b - 1e-9 * b.abs().max(1.0)) {
            best = Some((c, config));
        }
    }
    let Some((_, config)) = best else {
        return Ok(Solution::infeasible(variant, Infeasibility::Cardinality));
    };
    let mut sol = ev.solve(&config)?;
    sol.status = SolveStatus::Optimal;
    sol.meta.lp_solves = ev.lp_solves();
    sol.meta.best_bound = Some(sol.objective);
    sol.meta.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Most fractional indicator; ties to the larger objective coefficient,
    /// then the lowest index.
    #[default]
    MostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeSelection {
    /// Depth-first until an incumbent exists, then best bound.
    #[default]
    BestBoundPlunge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbParams {
    pub time_limit: Duration,
    pub node_limit: Option<usize>,
    /// Stop once `(incumbent - bound) / max(1, |incumbent|)` is at most this.
    pub gap: f64,
    pub branching: Branching,
    pub node_selection: NodeSelection,
    /// Rows tying route flow to link indicators in the relaxation.
    pub linking: Linking,
    /// Start each node's LP from its parent's optimal basis.
    pub warm_start: bool,
    pub integrality_tol: f64,
    /// Keep every solved node's fixings and bound in the result.
    pub record_nodes: bool,
}

impl Default for BnbParams {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(3600),
            node_limit: None,
            gap: 0.0,
            branching: Branching::MostFractional,
            node_selection: NodeSelection::BestBoundPlunge,
            linking: Linking::PerRoute,
            warm_start: true,
            integrality_tol: 1e-6,
            record_nodes: false,
        }
    }
}

impl BnbParams {
    fn check(&self) -> Result<()> {
        if self.time_limit.is_zero() || self.node_limit == Some(0) {
            return Err(Error::InvalidVariant("limits must be positive".into()));
        }
        if !(self.gap >= 0.0) || !(self.integrality_tol > 0.0 && self.integrality_tol < 0.5) {
            return Err(Error::InvalidVariant("gap must be >= 0 and integrality tolerance in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Indicator fixed at a node: `(k, m, value)` with `k == m` for a terminal.
pub type Fixing = (usize, usize, bool);

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub fixings: Vec<Fixing>,
    /// Relaxation value; `None` when the relaxation was infeasible.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult {
    pub solution: Solution,
    pub nodes: Vec<NodeRecord>,
}

struct Node {
    /// Per binary column: -1 free, 0 or 1 fixed.
    fix: Vec<i8>,
    parent_bound: f64,
    depth: usize,
    seq: usize,
    basis: Option<std::rc::Rc<Basis>>,
}

/// Branch-and-bound over the indicators; see [`BnbParams`].
pub fn solve_bnb(inst: &Instance, variant: &VariantSpec, params: &BnbParams) -> Result<Solution> {
    Ok(solve_bnb_recorded(inst, variant, params)?.solution)
}

/// [`solve_bnb`] that also returns the node log when
/// `params.record_nodes` is set.
pub fn solve_bnb_recorded(inst: &Instance, variant: &VariantSpec, params: &BnbParams) -> Result<BnbResult> {
    let start = Instant::now();
    inst.validated()?;
    variant.check(inst.p())?;
    params.check()?;
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        let mut solution = Solution::infeasible(variant, Infeasibility::Structural(s));
        solution.meta.wall_time = start.elapsed().as_secs_f64();
        return Ok(BnbResult { solution, nodes: Vec::new() });
    }
    let opts = ModelOptions {
        scheme: Scheme::Reduced,
        linking: params.linking,
        prune_dominated_routes: true,
    };
    let model = build(inst, variant, &opts)?;
    let mut search = Search {
        inst,
        variant,
        params,
        start,
        binaries: model.binary_vars().collect(),
        lp: model.to_lp(),
        model,
        ev: Evaluator::new(inst, variant)?,
        incumbent: None,
        lp_solves: 0,
        nodes_solved: 0,
        log: Vec::new(),
    };
    search.run()
}

struct Search<'a> {
    inst: &'a Instance,
    variant: &'a VariantSpec,
    params: &'a BnbParams,
    start: Instant,
    model: MipModel,
    binaries: Vec<usize>,
    lp: LpProblem,
    ev: Evaluator<'a>,
    incumbent: Option<(f64, Configuration)>,
    lp_solves: usize,
    nodes_solved: usize,
    log: Vec<NodeRecord>,
}

impl Search<'_> {
    fn prune_level(&self) -> f64 {
        match &self.incumbent {
            Some((v, _)) => v - 1e-9 * v.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    fn offer(&mut self, config: &Configuration) -> Result<()> {
        if let Some(c) = self.ev.cost(config)? {
            let better = match &self.incumbent {
                None => true,
                Some((v, inc)) => c < v - 1e-9 * v.abs().max(1.0) || (c <= *v && config < inc),
            };
            if better {
                self.incumbent = Some((c, config.clone()));
            }
        }
        Ok(())
    }

    fn indicator_of(&self, var: usize) -> (usize, usize) {
        match self.model.variables[var].role {
            VarRole::Terminal { k } => (k, k),
            VarRole::Link { k, m } => (k, m),
            _ => unreachable!("binary columns are indicators"),
        }
    }

    fn fixings(&self, fix: &[i8]) -> Vec<Fixing> {
        self.binaries
            .iter()
            .zip(fix)
            .filter(|(_, &f)| f >= 0)
            .map(|(&v, &f)| {
                let (k, m) = self.indicator_of(v);
                (k, m, f == 1)
            })
            .collect()
    }

    /// Configuration from rounded indicator values, repaired to meet the
    /// cardinality rows.
    fn round(&self, z: &[f64]) -> Option<Configuration> {
        let p = self.inst.p();
        let val = |k: usize, m: usize| z[self.model.indicator(k, m).expect("indicator")];
        let mut config = Configuration::empty();
        for k in 0..p {
            if val(k, k) >= 0.5 {
                config.open_terminal(k);
            }
        }
        for k in 0..p {
            for m in (k + 1)..p {
                if val(k, m) >= 0.5 {
                    config.add_link(k, m);
                }
            }
        }
        if let Some(q) = self.variant.q_terminals {
            while config.open().len() > q {
                let &k = config
                    .open()
                    .iter()
                    .min_by(|&&a, &&b| val(a, a).total_cmp(&val(b, b)).then(a.cmp(&b)))
                    .expect("nonempty");
                config.close_terminal(k);
            }
            while config.open().len() < q {
                let k = (0..p)
                    .filter(|&k| !config.is_open(k))
                    .max_by(|&a, &b| val(a, a).total_cmp(&val(b, b)).then(b.cmp(&a)))
                    .expect("q <= p");
                config.open_terminal(k);
            }
        }
        if let Some(l) = self.variant.l {
            while config.links().len() > l {
                let &(k, m) = config
                    .links()
                    .iter()
                    .min_by(|a, b| val(a.0, a.1).total_cmp(&val(b.0, b.1)).then(a.cmp(b)))
                    .expect("nonempty");
                config.remove_link(k, m);
            }
            if self.variant.link_mode == LinkMode::Exact {
                let restricted = self.variant.q_terminals.is_some();
                while config.links().len() < l {
                    let candidate = (0..p)
                        .flat_map(|k| ((k + 1)..p).map(move |m| (k, m)))
                        .filter(|&(k, m)| !config.has_link(k, m))
                        .filter(|&(k, m)| !restricted || (config.is_open(k) && config.is_open(m)))
                        .max_by(|a, b| val(a.0, a.1).total_cmp(&val(b.0, b.1)).then(b.cmp(a)))?;
                    config.add_link(candidate.0, candidate.1);
                }
            }
        }
        config.meets_cardinality(self.variant).then_some(config)
    }

    fn limit_hit(&self) -> bool {
        self.start.elapsed() >= self.params.time_limit
            || self.params.node_limit.is_some_and(|lim| self.nodes_solved >= lim)
    }

    fn run(&mut self) -> Result<BnbResult> {
        let lp_opts = LpOptions::default();
        let tol = self.params.integrality_tol;
        let mut pool: Vec<Node> = vec![Node {
            fix: vec![-1; self.binaries.len()],
            parent_bound: f64::NEG_INFINITY,
            depth: 0,
            seq: 0,
            basis: None,
        }];
        let mut next_seq = 1;
        let mut limit_reached = false;
        let mut root_infeasible = false;
        // bound of the most recently processed node, covers the pool-empty case
        let mut open_bound = f64::INFINITY;

        while !pool.is_empty() {
            if self.limit_hit() {
                limit_reached = true;
                break;
            }
            if let Some((inc, _)) = &self.incumbent {
                let lb = pool.iter().map(|n| n.parent_bound).fold(f64::INFINITY, f64::min);
                if (inc - lb) / inc.abs().max(1.0) <= self.params.gap && self.params.gap > 0.0 {
                    break;
                }
            }
            let idx = if self.incumbent.is_none() {
                pool.len() - 1
            } else {
                let mut best = 0;
                for (i, n) in pool.iter().enumerate() {
                    let b = &pool[best];
                    if n.parent_bound < b.parent_bound || (n.parent_bound == b.parent_bound && n.seq < b.seq) {
                        best = i;
                    }
                }
                best
            };
            let node = pool.swap_remove(idx);
            if node.parent_bound >= self.prune_level() {
                continue;
            }

            let mut lp = self.lp.clone();
            for (&v, &f) in self.binaries.iter().zip(&node.fix) {
                if f >= 0 {
                    lp.lower[v] = f as f64;
                    lp.upper[v] = f as f64;
                }
            }
            let warm = if self.params.warm_start { node.basis.as_deref() } else { None };
            let sol = solve_lp_from(&lp, &lp_opts, warm)?;
            self.lp_solves += 1;
            self.nodes_solved += 1;
            let bound = match sol.status {
                LpStatus::Optimal => Some(sol.objective),
                LpStatus::Infeasible => None,
                other => return Err(Error::InvalidLp(format!("node relaxation ended {other}"))),
            };
            if self.params.record_nodes {
                self.log.push(NodeRecord { fixings: self.fixings(&node.fix), bound });
            }
            let Some(bound) = bound else {
                if node.depth == 0 {
                    root_infeasible = true;
                }
                continue;
            };
            open_bound = open_bound.min(bound);
            if bound >= self.prune_level() {
                continue;
            }

            let z = &sol.primal;
            let mut pick: Option<(usize, f64)> = None;
            for (pos, &v) in self.binaries.iter().enumerate() {
                let frac = z[v] - z[v].floor();
                let score = frac.min(1.0 - frac);
                if score <= tol {
                    continue;
                }
                let better = match pick {
                    None => true,
                    Some((bp, bs)) => {
                        let bv = self.binaries[bp];
                        score > bs + 1e-12
                            || ((score - bs).abs() <= 1e-12 && self.lp.objective[v] > self.lp.objective[bv])
                    }
                };
                if better {
                    pick = Some((pos, score));
                }
            }

            if let Some(config) = self.round(z) {
                self.offer(&config)?;
            }
            let Some((pos, _)) = pick else {
                // integral: the relaxation is this configuration's routing LP
                continue;
            };
            if bound >= self.prune_level() {
                continue;
            }
            let basis = self.params.warm_start.then(|| std::rc::Rc::new(sol.basis.clone()));
            let up_first = z[self.binaries[pos]] >= 0.5;
            let order: [i8; 2] = if up_first { [0, 1] } else { [1, 0] };
            // the preferred child goes last so depth-first search takes it next
            for f in order {
                let mut fix = node.fix.clone();
                fix[pos] = f;
                pool.push(Node {
                    fix,
                    parent_bound: bound,
                    depth: node.depth + 1,
                    seq: next_seq,
                    basis: basis.clone(),
                });
                next_seq += 1;
            }
        }

        let wall = |s: &Self| s.start.elapsed().as_secs_f64();
        let mut solution = match self.incumbent.clone() {
            Some((_, config)) => {
                let mut sol = self.ev.solve(&config)?;
                sol.status = if limit_reached || !pool.is_empty() { SolveStatus::Feasible } else { SolveStatus::Optimal };
                sol
            }
            None if limit_reached => Solution::without_solution(self.variant),
            None if root_infeasible => Solution::infeasible(self.variant, Infeasibility::Lp),
            None => Solution::infeasible(self.variant, Infeasibility::Cardinality),
        };
        let pool_bound = pool.iter().map(|n| n.parent_bound).fold(f64::INFINITY, f64::min);
        solution.meta.best_bound = match solution.status {
            SolveStatus::Optimal => Some(solution.objective),
            SolveStatus::Feasible | SolveStatus::TimeLimit => {
                Some(pool_bound.min(self.incumbent.as_ref().map_or(open_bound, |(v, _)| *v)))
            }
            SolveStatus::Infeasible => None,
        };
        solution.meta.nodes = self.nodes_solved;
        solution.meta.lp_solves = self.lp_solves + self.ev.lp_solves();
        solution.meta.limit_reached = limit_reached;
        solution.meta.wall_time = wall(self);
        Ok(BnbResult {
            solution,
            nodes: std::mem::take(&mut self.log),
        })
    }
}
