//! Local-search matheuristic over configurations.
//!
//! A greedy construction picks links by estimated routing savings, then a
//! variable-neighborhood descent (toggle terminal, add/remove link, swap
//! link, swap terminal) accepts strict improvements of the routing LP
//! objective. Restarts perturb the best configuration with a random
//! two-link exchange plus one terminal flip. Every configuration visited
//! meets the variant's cardinality rows; equality link counts are restored
//! after a terminal closes by re-adding the links with the best estimated
//! savings.
//!
//! Runs are deterministic for a given seed as long as the time budget is
//! not what stops them: restarts and non-improving rounds are counted, and
//! the budget only caps the total.

use std::time::{Duration, Instant};

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::config::{link_key, Configuration};
use crate::error::{Error, Result};
use crate::exact::Evaluator;
use crate::instance::Instance;
use crate::solution::{Solution, SolveStatus};
use crate::variant::{LinkMode, VariantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    ToggleTerminal,
    AddRemoveLink,
    SwapLink,
    SwapTerminal,
}

impl Move {
    pub const DEFAULT_ORDER: [Move; 4] = [Move::ToggleTerminal, Move::AddRemoveLink, Move::SwapLink, Move::SwapTerminal];
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicParams {
    pub time_budget: Duration,
    /// Stop after this many consecutive restarts without improvement.
    pub max_non_improving: usize,
    pub restarts: usize,
    pub neighborhoods: Vec<Move>,
    pub seed: u64,
    /// Objective to report the gap against, e.g. a known optimum.
    pub reference: Option<f64>,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self {
            time_budget: Duration::from_secs(5),
            max_non_improving: 8,
            restarts: 24,
            neighborhoods: Move::DEFAULT_ORDER.to_vec(),
            seed: 0,
            reference: None,
        }
    }
}

impl HeuristicParams {
    fn check(&self) -> Result<()> {
        if self.time_budget.is_zero() {
            return Err(Error::InvalidVariant("time budget must be positive".into()));
        }
        if self.neighborhoods.is_empty() {
            return Err(Error::InvalidVariant("at least one neighborhood is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub best: f64,
    /// Seconds since the start.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    pub solution: Solution,
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
}

/// Per-link routing savings if the link were added on its own to `config`.
struct Estimator<'a> {
    inst: &'a Instance,
    variant: &'a VariantSpec,
    pairs: Vec<(usize, usize)>,
}

impl<'a> Estimator<'a> {
    fn new(inst: &'a Instance, variant: &'a VariantSpec) -> Self {
        Self { inst, variant, pairs: inst.demand_pairs() }
    }

    /// Current best unit cost per demand pair under `config`, ignoring
    /// capacities.
    fn unit_costs(&self, config: &Configuration) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j)| {
                let mut best = self.inst.road_cost().get(i, j);
                for &(k, m) in config.links() {
                    best = best.min(self.inst.route_cost(i, j, k, m)).min(self.inst.route_cost(i, j, m, k));
                }
                best
            })
            .collect()
    }

    /// Savings of adding link `(k, m)` given current unit costs, scaled down
    /// when the diverted volume exceeds an endpoint's capacity, minus the
    /// link's own cost and the fixed cost of terminals it would open.
    fn link_gain(&self, config: &Configuration, unit: &[f64], k: usize, m: usize) -> f64 {
        let mut saving = 0.0;
        let mut volume = 0.0;
        for (pi, &(i, j)) in self.pairs.iter().enumerate() {
            let via = self.inst.route_cost(i, j, k, m).min(self.inst.route_cost(i, j, m, k));
            if via < unit[pi] {
                let q = self.inst.demand().get(i, j);
                saving += q * (unit[pi] - via);
                volume += q;
            }
        }
        let cap = self.inst.capacity()[k].min(self.inst.capacity()[m]);
        if volume > cap {
            saving *= cap / volume;
        }
        let mut cost = self.variant.link_cost(self.inst.inter_cost(), k, m);
        if self.variant.kind.charges_fixed_costs() {
            for t in [k, m] {
                if !config.is_open(t) {
                    cost += self.inst.fixed_cost()[t];
                }
            }
        }
        saving - cost
    }
}

fn all_pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |k| ((k + 1)..p).map(move |m| (k, m)))
}

struct Noise(Option<Xoshiro256PlusPlus>);

impl Noise {
    /// Multiplier in `[0.8, 1.2]`, or exactly 1 without noise.
    fn factor(&mut self) -> f64 {
        match &mut self.0 {
            None => 1.0,
            Some(rng) => 0.8 + 0.4 * unit(rng),
        }
    }
}

fn unit(rng: &mut Xoshiro256PlusPlus) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn below(rng: &mut Xoshiro256PlusPlus, n: usize) -> usize {
    (unit(rng) * n as f64) as usize % n.max(1)
}

/// Adds links by marginal estimated gain until `target` links exist
/// (`force`) or no positive gain remains. With `within_open` only pairs of
/// open terminals qualify.
fn add_links_greedily(
    est: &Estimator,
    config: &mut Configuration,
    target: usize,
    force: bool,
    within_open: bool,
    noise: &mut Noise,
) {
    let p = est.inst.p();
    while config.links().len() < target {
        let unit = est.unit_costs(config);
        let mut best: Option<((usize, usize), f64)> = None;
        for (k, m) in all_pairs(p) {
            if config.has_link(k, m) || (within_open && !(config.is_open(k) && config.is_open(m))) {
                continue;
            }
            let g = est.link_gain(config, &unit, k, m);
            let g = if g > 0.0 { g * noise.factor() } else { g / noise.factor() };
            if best.map_or(true, |(_, bg)| g > bg) {
                best = Some(((k, m), g));
            }
        }
        match best {
            Some(((k, m), g)) if force || g > 0.0 => config.add_link(k, m),
            _ => break,
        }
    }
}

/// Terminals ranked by the summed gain of their incident links, best first.
fn ranked_terminals(est: &Estimator, noise: &mut Noise) -> Vec<usize> {
    let p = est.inst.p();
    let empty = Configuration::empty();
    let unit = est.unit_costs(&empty);
    let mut score = vec![0.0; p];
    for (k, m) in all_pairs(p) {
        // links alone, without the terminals' fixed costs
        let mut g = est.link_gain(&empty, &unit, k, m);
        if est.variant.kind.charges_fixed_costs() {
            g += est.inst.fixed_cost()[k] + est.inst.fixed_cost()[m];
        }
        let g = g.max(0.0);
        score[k] += g;
        score[m] += g;
    }
    let mut order: Vec<(usize, f64)> = (0..p)
        .map(|k| {
            let f = if est.variant.kind.charges_fixed_costs() { est.inst.fixed_cost()[k] } else { 0.0 };
            (k, (score[k] - f) * noise.factor())
        })
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.into_iter().map(|(k, _)| k).collect()
}

/// Greedy configuration meeting the variant's cardinality rows. Seed 0 is
/// the pure greedy; other seeds perturb the scores by up to 20%.
pub fn greedy_construct(inst: &Instance, variant: &VariantSpec, seed: u64) -> Result<Configuration> {
    inst.validated()?;
    variant.check(inst.p())?;
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        return Err(Error::InfeasibleCardinality(s.to_string()));
    }
    let est = Estimator::new(inst, variant);
    let mut noise = Noise((seed != 0).then(|| Xoshiro256PlusPlus::seed_from_u64(seed)));
    let mut config = Configuration::empty();
    if let Some(q) = variant.q_terminals {
        for k in ranked_terminals(&est, &mut noise).into_iter().take(q) {
            config.open_terminal(k);
        }
    }
    let within_open = variant.q_terminals.is_some();
    match (variant.l, variant.link_mode) {
        (Some(l), LinkMode::Exact) => add_links_greedily(&est, &mut config, l, true, within_open, &mut noise),
        (Some(l), LinkMode::AtMost) => add_links_greedily(&est, &mut config, l, false, within_open, &mut noise),
        (None, _) => {
            let max = crate::variant::max_links(inst.p());
            add_links_greedily(&est, &mut config, max, false, within_open, &mut noise)
        }
    }
    if !config.meets_cardinality(variant) {
        return Err(Error::InfeasibleCardinality(format!("greedy could not meet the cardinality rows of {}", variant.kind)));
    }
    Ok(config)
}

struct Searcher<'a, 'b> {
    ev: &'b mut Evaluator<'a>,
    est: Estimator<'a>,
    variant: &'a VariantSpec,
    params: &'b HeuristicParams,
    start: Instant,
    iteration: usize,
    trace: Vec<TracePoint>,
    best: Option<(f64, Configuration)>,
}

impl Searcher<'_, '_> {
    fn out_of_time(&self) -> bool {
        self.start.elapsed() >= self.params.time_budget
    }

    fn cost(&mut self, config: &Configuration) -> Result<Option<f64>> {
        let c = self.ev.cost(config)?;
        self.iteration += 1;
        if let Some(v) = c {
            if self.best.as_ref().map_or(true, |(b, _)| v < *b) {
                self.best = Some((v, config.clone()));
                self.trace.push(TracePoint {
                    iteration: self.iteration,
                    best: v,
                    elapsed: self.start.elapsed().as_secs_f64(),
                });
            }
        }
        Ok(c)
    }

    fn has_terminal_count(&self) -> bool {
        self.variant.q_terminals.is_some()
    }

    fn links_fixed(&self) -> bool {
        self.variant.l.is_some() && self.variant.link_mode == LinkMode::Exact
    }

    /// Restores an equality link count after links were lost.
    fn repair(&self, config: &mut Configuration) {
        if let (Some(l), LinkMode::Exact) = (self.variant.l, self.variant.link_mode) {
            let mut quiet = Noise(None);
            add_links_greedily(&self.est, config, l, true, self.has_terminal_count(), &mut quiet);
        }
    }

    /// Closes open terminals without links when terminal counts are free.
    fn drop_isolated(&self, config: &mut Configuration) {
        if self.has_terminal_count() {
            return;
        }
        let isolated: Vec<usize> = config.open().iter().copied().filter(|&k| config.degree(k) == 0).collect();
        for k in isolated {
            config.close_terminal(k);
        }
    }

    fn neighbors(&self, config: &Configuration, mv: Move) -> Vec<Configuration> {
        let p = self.est.inst.p();
        let mut out = Vec::new();
        let unit = self.est.unit_costs(config);
        match mv {
            Move::ToggleTerminal if !self.has_terminal_count() => {
                for k in 0..p {
                    let mut c = config.clone();
                    if c.is_open(k) {
                        c.close_terminal(k);
                        self.repair(&mut c);
                    } else {
                        c.open_terminal(k);
                    }
                    out.push(c);
                }
            }
            Move::AddRemoveLink if !self.links_fixed() => {
                let limit = self.variant.l.unwrap_or(usize::MAX);
                if config.links().len() < limit {
                    let mut adds: Vec<((usize, usize), f64)> = all_pairs(p)
                        .filter(|&(k, m)| !config.has_link(k, m))
                        .filter(|&(k, m)| !self.has_terminal_count() || (config.is_open(k) && config.is_open(m)))
                        .map(|(k, m)| ((k, m), self.est.link_gain(config, &unit, k, m)))
                        .collect();
                    adds.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                    for ((k, m), _) in adds {
                        let mut c = config.clone();
                        c.add_link(k, m);
                        out.push(c);
                    }
                }
                for &(k, m) in config.links() {
                    let mut c = config.clone();
                    c.remove_link(k, m);
                    self.drop_isolated(&mut c);
                    out.push(c);
                }
            }
            Move::SwapLink => {
                for &(k, m) in config.links() {
                    let mut base = config.clone();
                    base.remove_link(k, m);
                    self.drop_isolated(&mut base);
                    let base_unit = self.est.unit_costs(&base);
                    let mut adds: Vec<((usize, usize), f64)> = all_pairs(p)
                        .filter(|&(a, b)| (a, b) != (k, m) && !base.has_link(a, b))
                        .filter(|&(a, b)| !self.has_terminal_count() || (base.is_open(a) && base.is_open(b)))
                        .map(|(a, b)| ((a, b), self.est.link_gain(&base, &base_unit, a, b)))
                        .collect();
                    adds.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
                    for ((a, b), _) in adds.into_iter().take(SWAP_CANDIDATES) {
                        let mut c = base.clone();
                        c.add_link(a, b);
                        out.push(c);
                    }
                }
            }
            Move::SwapTerminal => {
                for &k in config.open() {
                    for t in (0..p).filter(|&t| !config.is_open(t)) {
                        let mut c = config.clone();
                        let moved: Vec<(usize, usize)> =
                            config.links().iter().copied().filter(|&(a, b)| a == k || b == k).collect();
                        c.close_terminal(k);
                        c.open_terminal(t);
                        for (a, b) in moved {
                            let other = if a == k { b } else { a };
                            if other != t {
                                let (x, y) = link_key(t, other);
                                c.add_link(x, y);
                            }
                        }
                        self.repair(&mut c);
                        out.push(c);
                    }
                }
            }
            _ => {}
        }
        out.retain(|c| c != config && c.meets_cardinality(self.variant));
        out
    }

    /// Variable-neighborhood descent with first improvement.
    fn descend(&mut self, start: Configuration) -> Result<Option<(f64, Configuration)>> {
        let Some(mut value) = self.cost(&start)? else { return Ok(None) };
        let mut current = start;
        let order = self.params.neighborhoods.clone();
        let mut idx = 0;
        while idx < order.len() {
            if self.out_of_time() {
                break;
            }
            let mut improved = false;
            for cand in self.neighbors(&current, order[idx]) {
                if self.out_of_time() {
                    break;
                }
                if let Some(v) = self.cost(&cand)? {
                    if v < value - 1e-9 * value.abs().max(1.0) {
                        value = v;
                        current = cand;
                        improved = true;
                        break;
                    }
                }
            }
            idx = if improved { 0 } else { idx + 1 };
        }
        Ok(Some((value, current)))
    }

    /// Random two-link exchange plus one terminal flip.
    fn perturb(&self, config: &Configuration, rng: &mut Xoshiro256PlusPlus) -> Configuration {
        let p = self.est.inst.p();
        let mut c = config.clone();
        for _ in 0..2 {
            let links: Vec<(usize, usize)> = c.links().iter().copied().collect();
            if !links.is_empty() {
                let (k, m) = links[below(rng, links.len())];
                c.remove_link(k, m);
            }
            let free: Vec<(usize, usize)> = all_pairs(p)
                .filter(|&(k, m)| !c.has_link(k, m))
                .filter(|&(k, m)| !self.has_terminal_count() || (c.is_open(k) && c.is_open(m)))
                .collect();
            if !free.is_empty() && (self.links_fixed() || c.links().len() < self.variant.l.unwrap_or(usize::MAX)) {
                let (k, m) = free[below(rng, free.len())];
                c.add_link(k, m);
            }
        }
        if self.has_terminal_count() {
            let open: Vec<usize> = c.open().iter().copied().collect();
            let closed: Vec<usize> = (0..p).filter(|&k| !c.is_open(k)).collect();
            if !open.is_empty() && !closed.is_empty() {
                let k = open[below(rng, open.len())];
                let t = closed[below(rng, closed.len())];
                c.close_terminal(k);
                c.open_terminal(t);
            }
        } else {
            let k = below(rng, p);
            if c.is_open(k) {
                c.close_terminal(k);
            } else {
                c.open_terminal(k);
            }
        }
        self.repair(&mut c);
        if let Some(l) = self.variant.l {
            while c.links().len() > l {
                let &(k, m) = c.links().iter().next().expect("nonempty");
                c.remove_link(k, m);
            }
        }
        c
    }
}

/// Most promising additions tried per removed link in a swap.
const SWAP_CANDIDATES: usize = 8;

/// Local search from `start`; returns the best configuration found with
/// status `Feasible`.
pub fn local_search(
    inst: &Instance,
    variant: &VariantSpec,
    start: &Configuration,
    params: &HeuristicParams,
) -> Result<Solution> {
    params.check()?;
    let began = Instant::now();
    let mut ev = Evaluator::new(inst, variant)?;
    if !start.meets_cardinality(variant) {
        return Err(Error::InvalidConfiguration(format!("start {start} does not meet the cardinality rows")));
    }
    let mut s = Searcher {
        est: Estimator::new(inst, variant),
        ev: &mut ev,
        variant,
        params,
        start: began,
        iteration: 0,
        trace: Vec::new(),
        best: None,
    };
    let (_, config) = s.descend(start.clone())?.expect("start meets cardinality");
    let mut sol = ev.solve(&config)?;
    sol.status = SolveStatus::Feasible;
    sol.meta.lp_solves = ev.lp_solves();
    sol.meta.wall_time = began.elapsed().as_secs_f64();
    sol.meta.reference_gap = params.reference.map(|r| (sol.objective - r) / r.abs().max(1.0));
    Ok(sol)
}

pub fn solve_heuristic(inst: &Instance, variant: &VariantSpec, params: &HeuristicParams) -> Result<Solution> {
    Ok(solve_heuristic_traced(inst, variant, params)?.solution)
}

/// Multi-start local search; also returns the best-objective trace.
pub fn solve_heuristic_traced(
    inst: &Instance,
    variant: &VariantSpec,
    params: &HeuristicParams,
) -> Result<HeuristicResult> {
    params.check()?;
    let began = Instant::now();
    inst.validated()?;
    variant.check(inst.p())?;
    if let Some(s) = variant.structural_infeasibility(inst.p()) {
        let mut solution = Solution::infeasible(variant, crate::solution::Infeasibility::Structural(s));
        solution.meta.wall_time = began.elapsed().as_secs_f64();
        return Ok(HeuristicResult { solution, trace: Vec::new(), evaluations: 0 });
    }
    let mut ev = Evaluator::new(inst, variant)?;
    let mut s = Searcher {
        est: Estimator::new(inst, variant),
        ev: &mut ev,
        variant,
        params,
        start: began,
        iteration: 0,
        trace: Vec::new(),
        best: None,
    };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(params.seed);
    let first = greedy_construct(inst, variant, 0)?;
    let mut incumbent = s.descend(first)?;
    let mut idle = 0;
    for restart in 1..=params.restarts {
        if s.out_of_time() || idle >= params.max_non_improving {
            break;
        }
        let Some((best_value, best_config)) = incumbent.clone() else { break };
        // alternate between perturbing the best and a noisy fresh greedy
        let start = if restart % 2 == 1 {
            s.perturb(&best_config, &mut rng)
        } else {
            greedy_construct(inst, variant, rng.next_u64() | 1)?
        };
        if !start.meets_cardinality(variant) {
            idle += 1;
            continue;
        }
        match s.descend(start)? {
            Some((v, c)) if v < best_value - 1e-9 * best_value.abs().max(1.0) => {
                incumbent = Some((v, c));
                idle = 0;
            }
            _ => idle += 1,
        }
    }
    let trace = std::mem::take(&mut s.trace);
    let evaluations = s.iteration;
    let Some((_, config)) = incumbent else {
        return Ok(HeuristicResult {
            solution: Solution::infeasible(variant, crate::solution::Infeasibility::Cardinality),
            trace,
            evaluations,
        });
    };
    let mut sol = ev.solve(&config)?;
    sol.status = SolveStatus::Feasible;
    sol.meta.lp_solves = ev.lp_solves();
    sol.meta.wall_time = began.elapsed().as_secs_f64();
    sol.meta.limit_reached = began.elapsed() >= params.time_budget;
    sol.meta.reference_gap = params.reference.map(|r| (sol.objective - r) / r.abs().max(1.0));
    Ok(HeuristicResult { solution: sol, trace, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force;
    use crate::generator::{generate, GenSpec};
    use crate::instance::{Matrix, Point};

    #[test]
    fn l0_at_most_is_empty() {
        let inst = generate(&GenSpec::new(5, 4, 1)).unwrap();
        let c = greedy_construct(&inst, &VariantSpec::base(0, LinkMode::AtMost), 0).unwrap();
        assert_eq!(c, Configuration::empty());
    }

    #[test]
    fn two_sites_exact_one_link() {
        let inst = generate(&GenSpec::new(4, 2, 3)).unwrap();
        let c = greedy_construct(&inst, &VariantSpec::base(1, LinkMode::Exact), 0).unwrap();
        assert_eq!(c, Configuration::new([0, 1], [(0, 1)]));
    }

    #[test]
    fn dominant_far_pair_gets_link() {
        let customers = vec![Point::new(0.0, 0.0), Point::new(10_000.0, 0.0)];
        let sites = vec![Point::new(100.0, 0.0), Point::new(9_900.0, 0.0)];
        let demand = Matrix::from_rows(vec![vec![0.0, 500.0], vec![0.0, 0.0]]).unwrap();
        let inst = Instance::from_coordinates(customers, sites, demand, vec![10.0, 10.0], vec![1e4, 1e4], 0.5).unwrap();
        let variant = VariantSpec::base(1, LinkMode::AtMost);
        let c = greedy_construct(&inst, &variant, 0).unwrap();
        assert_eq!(c, Configuration::new([0, 1], [(0, 1)]));
        let mut ev = Evaluator::new(&inst, &variant).unwrap();
        assert!(ev.cost(&c).unwrap().unwrap() < inst.all_road_cost());
    }

    #[test]
    fn structural_infeasibility_is_an_error_for_greedy() {
        let inst = generate(&GenSpec::new(3, 3, 1)).unwrap();
        assert!(greedy_construct(&inst, &VariantSpec::base(4, LinkMode::Exact), 0).is_err());
    }

    #[test]
    fn optimum_start_is_a_fixed_point() {
        let inst = generate(&GenSpec::new(5, 4, 8)).unwrap();
        let variant = VariantSpec::base(2, LinkMode::Exact);
        let opt = brute_force(&inst, &variant).unwrap();
        let sol = local_search(&inst, &variant, &opt.configuration, &HeuristicParams::default()).unwrap();
        assert_eq!(sol.configuration, opt.configuration);
        assert_eq!(sol.status, SolveStatus::Feasible);
    }

    #[test]
    fn trace_is_nonincreasing_and_never_below_optimum() {
        let inst = generate(&GenSpec::new(5, 4, 21)).unwrap();
        for variant in [
            VariantSpec::base(3, LinkMode::AtMost),
            VariantSpec::min_links(3),
            VariantSpec::pl(3, 2, LinkMode::Exact),
        ] {
            let res = solve_heuristic_traced(&inst, &variant, &HeuristicParams::default()).unwrap();
            assert!(res.trace.windows(2).all(|w| w[1].best <= w[0].best));
            let opt = brute_force(&inst, &variant).unwrap().objective;
            assert!(res.solution.objective >= opt - 1e-6 * opt.max(1.0));
            assert!(res.solution.configuration.meets_cardinality(&variant));
        }
    }
}
