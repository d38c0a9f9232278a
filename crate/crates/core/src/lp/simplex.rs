//! Bounded-variable revised primal simplex.
//!
//! Every row `a·x {<=,=,>=} b` gets a logical `r` with `a·x + r = b`, bounded
//! `[0, ∞)`, `[0, 0]` or `(-∞, 0]` by relation. The starting basis is all
//! logicals (or a supplied warm basis). Phase 1 minimizes the sum of bound
//! violations of basic variables with costs recomputed every iteration and
//! the step stopped at the first breakpoint; phase 2 runs once the basis is
//! primal feasible. Pricing is Dantzig's rule with a Harris two-pass ratio
//! test. After [`STALL_THRESHOLD`] consecutive degenerate pivots the solver
//! switches to Bland's smallest-index rule for both the entering and the
//! leaving choice until a nondegenerate step is made.
//!
//! The inverse is kept in product form and rebuilt from scratch every
//! [`REFACTOR_INTERVAL`] pivots, or earlier once the eta file holds more
//! than [`ETA_GROWTH`] times the nonzeros it had after the last rebuild;
//! basic values are recomputed from the fresh factorization each time.
//! Basic columns that have become numerically dependent are swapped for
//! logicals during the rebuild and the iteration carries on from there.
//! Optimality and infeasibility are only declared on a fresh factorization.

use super::eta::EtaFile;
use super::{Basis, LpOptions, LpProblem, LpSolution, LpStatus, Relation, VarStatus};
use crate::error::{Error, Result};

pub const REFACTOR_INTERVAL: usize = 100;
pub const STALL_THRESHOLD: usize = 50;
pub const ETA_GROWTH: usize = 4;

/// Steps at or below this length count as degenerate.
const DEGENERATE_STEP: f64 = 1e-12;
/// Eta entries below this magnitude are dropped.
const ETA_DROP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    Free,
}

struct Simplex<'a> {
    opts: &'a LpOptions,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    b: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basic: Vec<usize>,
    eta: EtaFile,
    eta_budget: usize,
    pivots_since_refactor: usize,
    iterations: usize,
    bland: bool,
    degenerate_run: usize,
}

pub fn solve_lp(prob: &LpProblem, opts: &LpOptions) -> Result<LpSolution> {
    solve_lp_from(prob, opts, None)
}

/// Solves starting from `warm` when it is a well-formed basis for `prob`;
/// otherwise from the all-logical basis. Columns of a warm basis that turn
/// out singular are swapped for logicals.
pub fn solve_lp_from(prob: &LpProblem, opts: &LpOptions, warm: Option<&Basis>) -> Result<LpSolution> {
    prob.check()?;
    let mut s = Simplex::new(prob, opts);
    match warm {
        Some(basis) if s.install(basis) => s.refactor(true)?,
        _ => s.refactor(false)?,
    }
    s.compute_basic_values();
    let status = s.run()?;
    let sol = s.finish(prob, status);
    super::audit::record(prob, &sol, opts.tol.opt);
    Ok(sol)
}

impl<'a> Simplex<'a> {
    fn new(prob: &LpProblem, opts: &'a LpOptions) -> Self {
        let n = prob.num_vars();
        let m = prob.num_rows();
        let mut counts = vec![0usize; n + 1];
        for row in &prob.rows {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts;
        let mut fill = col_start.clone();
        let nnz = col_start[n];
        let mut col_idx = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (r, row) in prob.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                col_idx[fill[j]] = r;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut cost = prob.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lo = prob.lower.clone();
        let mut hi = prob.upper.clone();
        for row in &prob.rows {
            let (l, h) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut x = vec![0.0; n + m];
        let mut state = vec![State::Free; n + m];
        for j in 0..n {
            state[j] = Self::resting_state(lo[j], hi[j], State::Lower);
            x[j] = Self::resting_value(lo[j], hi[j], state[j]);
        }
        let basic: Vec<usize> = (n..n + m).collect();
        for (i, &j) in basic.iter().enumerate() {
            state[j] = State::Basic(i);
        }

        Self {
            opts,
            n,
            m,
            col_start,
            col_idx,
            col_val,
            cost,
            lo,
            hi,
            b: prob.rows.iter().map(|r| r.rhs).collect(),
            x,
            state,
            basic,
            eta: EtaFile::default(),
            eta_budget: 0,
            pivots_since_refactor: 0,
            iterations: 0,
            bland: false,
            degenerate_run: 0,
        }
    }

    /// Nonbasic state honouring `wanted` when that bound is finite.
    fn resting_state(lo: f64, hi: f64, wanted: State) -> State {
        match (lo.is_finite(), hi.is_finite(), wanted) {
            (true, true, State::Upper) => State::Upper,
            (true, _, _) => State::Lower,
            (false, true, _) => State::Upper,
            (false, false, _) => State::Free,
        }
    }

    fn resting_value(lo: f64, hi: f64, st: State) -> f64 {
        match st {
            State::Lower => lo,
            State::Upper => hi,
            _ => 0.0,
        }
    }

    fn install(&mut self, basis: &Basis) -> bool {
        let total = self.n + self.m;
        if basis.status.len() != total
            || basis.status.iter().filter(|s| **s == VarStatus::Basic).count() != self.m
        {
            return false;
        }
        let mut basic = Vec::with_capacity(self.m);
        for (j, st) in basis.status.iter().enumerate() {
            let st = match st {
                VarStatus::Basic => {
                    basic.push(j);
                    self.state[j] = State::Basic(basic.len() - 1);
                    continue;
                }
                VarStatus::AtLower => State::Lower,
                VarStatus::AtUpper => State::Upper,
                VarStatus::Free => State::Free,
            };
            let st = Self::resting_state(self.lo[j], self.hi[j], st);
            self.state[j] = st;
            self.x[j] = Self::resting_value(self.lo[j], self.hi[j], st);
        }
        self.basic = basic;
        true
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_start[j], self.col_start[j + 1]);
        (&self.col_idx[a..b], &self.col_val[a..b])
    }

    fn scatter(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            let (idx, val) = self.column(j);
            for (&r, &a) in idx.iter().zip(val) {
                out[r] += a;
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            let (idx, val) = self.column(j);
            idx.iter().zip(val).map(|(&r, &a)| y[r] * a).sum()
        } else {
            y[j - self.n]
        }
    }

    /// Rebuilds the product-form inverse of the current basis. With
    /// `repair`, structural columns that cannot be pivoted in are made
    /// nonbasic and replaced by their slot's logical.
    fn refactor(&mut self, repair: bool) -> Result<()> {
        let m = self.m;
        let n = self.n;
        let mut slot = vec![usize::MAX; m];
        let mut structurals = Vec::new();
        for &j in &self.basic {
            if j >= n {
                slot[j - n] = j;
            } else {
                structurals.push(j);
            }
        }
        structurals.sort_by_key(|&j| (self.col_start[j + 1] - self.col_start[j], j));
        self.eta.clear();
        let mut work = vec![0.0; m];
        let mut failed = Vec::new();
        for j in structurals {
            self.scatter(j, &mut work);
            self.eta.ftran(&mut work);
            let mut best = usize::MAX;
            let mut best_abs = 0.0;
            for (r, &v) in work.iter().enumerate() {
                if slot[r] == usize::MAX && v.abs() > best_abs {
                    best = r;
                    best_abs = v.abs();
                }
            }
            if best == usize::MAX || best_abs < self.opts.tol.pivot {
                if repair {
                    failed.push(j);
                    continue;
                }
                return Err(Error::SingularBasis {
                    iteration: self.iterations,
                    pivot: best_abs,
                });
            }
            self.eta.push(best, &work, ETA_DROP);
            slot[best] = j;
        }
        for (r, s) in slot.iter_mut().enumerate() {
            if *s == usize::MAX {
                *s = n + r;
            }
        }
        for j in failed {
            let st = Self::resting_state(self.lo[j], self.hi[j], State::Lower);
            self.state[j] = st;
            self.x[j] = Self::resting_value(self.lo[j], self.hi[j], st);
        }
        for (i, &j) in slot.iter().enumerate() {
            self.state[j] = State::Basic(i);
        }
        self.basic = slot;
        self.eta_budget = ETA_GROWTH * (self.eta.nnz() + m);
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn compute_basic_values(&mut self) {
        let mut rhs = self.b.clone();
        for j in 0..self.n + self.m {
            if matches!(self.state[j], State::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                let (idx, val) = self.column(j);
                for (&r, &a) in idx.iter().zip(val) {
                    rhs[r] -= a * xj;
                }
            } else {
                rhs[j - self.n] -= xj;
            }
        }
        self.eta.ftran(&mut rhs);
        for (i, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs[i];
        }
    }

    /// Phase-1 cost of basic position `i`, or `None` when it is feasible.
    fn infeasibility_cost(&self, i: usize) -> Option<f64> {
        let j = self.basic[i];
        let tol = self.opts.tol.feas;
        if self.x[j] < self.lo[j] - tol {
            Some(-1.0)
        } else if self.x[j] > self.hi[j] + tol {
            Some(1.0)
        } else {
            None
        }
    }

    fn duals(&self, phase1: bool) -> Vec<f64> {
        let mut y: Vec<f64> = (0..self.m)
            .map(|i| {
                if phase1 {
                    self.infeasibility_cost(i).unwrap_or(0.0)
                } else {
                    self.cost[self.basic[i]]
                }
            })
            .collect();
        self.eta.btran(&mut y);
        y
    }

    /// Entering variable and its direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64], phase1: bool, rejected: &[usize]) -> Option<(usize, f64)> {
        let tol = self.opts.tol.opt;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.state[j];
            if matches!(st, State::Basic(_)) || self.lo[j] == self.hi[j] || rejected.contains(&j) {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.cost[j] };
            let d = c - self.dot(y, j);
            let dir = match st {
                State::Lower if d < -tol => 1.0,
                State::Upper if d > tol => -1.0,
                State::Free if d < -tol => 1.0,
                State::Free if d > tol => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Distance to the next breakpoint of basic position `i` when it moves
    /// at `rate` per unit step, with the bound it lands on.
    fn breakpoint(&self, i: usize, rate: f64, phase1: bool) -> Option<(f64, State)> {
        let j = self.basic[i];
        let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
        let tol = self.opts.tol.feas;
        if rate > 0.0 {
            if phase1 && x < lo - tol {
                Some(((lo - x) / rate, State::Lower))
            } else if hi.is_finite() && x <= hi + tol {
                Some((((hi - x) / rate).max(0.0), State::Upper))
            } else {
                None
            }
        } else if phase1 && x > hi + tol {
            Some(((x - hi) / -rate, State::Upper))
        } else if lo.is_finite() && x >= lo - tol {
            Some((((x - lo) / -rate).max(0.0), State::Lower))
        } else {
            None
        }
    }

    fn run(&mut self) -> Result<LpStatus> {
        let mut alpha = vec![0.0; self.m];
        let mut rejected: Vec<usize> = Vec::new();
        loop {
            if self.iterations >= self.opts.iteration_limit {
                return Ok(LpStatus::IterationLimit);
            }
            let phase1 = (0..self.m).any(|i| self.infeasibility_cost(i).is_some());
            let y = self.duals(phase1);
            let Some((q, dir)) = self.price(&y, phase1, &rejected) else {
                if self.pivots_since_refactor > 0 {
                    rejected.clear();
                    self.refactor(true)?;
                    self.compute_basic_values();
                    continue;
                }
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };

            self.scatter(q, &mut alpha);
            self.eta.ftran(&mut alpha);

            let range = self.hi[q] - self.lo[q];
            let Some((theta, leave)) = self.ratio_test(&alpha, dir, phase1) else {
                if range.is_finite() {
                    self.flip(q, dir, range, &alpha);
                    continue;
                }
                if phase1 {
                    rejected.push(q);
                    continue;
                }
                return Ok(LpStatus::Unbounded);
            };
            if range <= theta {
                self.flip(q, dir, range, &alpha);
                continue;
            }
            let (r, target) = leave;
            self.pivot(q, dir, theta, r, target, &alpha);
            rejected.clear();
            if self.pivots_since_refactor >= REFACTOR_INTERVAL || self.eta.nnz() > self.eta_budget {
                self.refactor(true)?;
                self.compute_basic_values();
            }
        }
    }

    /// Chooses the leaving position; returns the step and `(position, bound)`.
    fn ratio_test(&self, alpha: &[f64], dir: f64, phase1: bool) -> Option<(f64, (usize, State))> {
        let piv = self.opts.tol.pivot;
        let feas = self.opts.tol.feas;
        let mut cands: Vec<(usize, f64, f64, State)> = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= piv {
                continue;
            }
            let rate = -dir * a;
            if let Some((theta, target)) = self.breakpoint(i, rate, phase1) {
                cands.push((i, theta, rate.abs(), target));
            }
        }
        if cands.is_empty() {
            return None;
        }
        let chosen = if self.bland {
            let min = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            let cut = min + DEGENERATE_STEP * (1.0 + min);
            cands
                .iter()
                .filter(|c| c.1 <= cut)
                .min_by_key(|c| self.basic[c.0])
                .copied()?
        } else {
            let relaxed = cands
                .iter()
                .map(|&(_, theta, rate, _)| theta + feas / rate)
                .fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= relaxed)
                .max_by(|a, b| a.2.total_cmp(&b.2).then(b.0.cmp(&a.0)))
                .copied()?
        };
        Some((chosen.1, (chosen.0, chosen.3)))
    }

    fn flip(&mut self, q: usize, dir: f64, range: f64, alpha: &[f64]) {
        let step = dir * range;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.basic[i];
                self.x[j] -= step * a;
            }
        }
        if dir > 0.0 {
            self.state[q] = State::Upper;
            self.x[q] = self.hi[q];
        } else {
            self.state[q] = State::Lower;
            self.x[q] = self.lo[q];
        }
        self.iterations += 1;
        self.note_step(range);
    }

    fn pivot(&mut self, q: usize, dir: f64, theta: f64, r: usize, target: State, alpha: &[f64]) {
        let step = dir * theta;
        self.x[q] += step;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.basic[i];
                self.x[j] -= step * a;
            }
        }
        let leaving = self.basic[r];
        let st = if self.lo[leaving] == self.hi[leaving] { State::Lower } else { target };
        self.x[leaving] = Self::resting_value(self.lo[leaving], self.hi[leaving], st);
        self.state[leaving] = st;
        self.basic[r] = q;
        self.state[q] = State::Basic(r);
        self.eta.push(r, alpha, ETA_DROP);
        self.pivots_since_refactor += 1;
        self.iterations += 1;
        self.note_step(theta);
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run > STALL_THRESHOLD {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    fn finish(self, prob: &LpProblem, status: LpStatus) -> LpSolution {
        let duals = if status == LpStatus::Optimal {
            self.duals(false)
        } else {
            vec![0.0; self.m]
        };
        let primal = self.x[..self.n].to_vec();
        let status_vec = self
            .state
            .iter()
            .map(|s| match s {
                State::Basic(_) => VarStatus::Basic,
                State::Lower => VarStatus::AtLower,
                State::Upper => VarStatus::AtUpper,
                State::Free => VarStatus::Free,
            })
            .collect();
        LpSolution {
            status,
            objective: prob.objective_value(&primal),
            primal,
            duals,
            iterations: self.iterations,
            basis: Basis { status: status_vec },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Tolerances;

    fn opts() -> LpOptions {
        LpOptions::default()
    }

    #[test]
    fn lower_bound_row() {
        let mut p = LpProblem::new();
        let x = p.add_var(1.0, 0.0, 10.0);
        p.add_row(vec![(x, 1.0)], Relation::Ge, 3.0);
        let s = solve_lp(&p, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 3.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray() {
        let mut p = LpProblem::new();
        p.add_var(-1.0, 0.0, f64::INFINITY);
        let s = solve_lp(&p, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_rows() {
        let mut p = LpProblem::new();
        let x = p.add_var(1.0, 0.0, 1.0);
        p.add_row(vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve_lp(&p, &opts()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_and_free_variable() {
        // min x + 2y, x + y = 4, x - y >= -2, x free, y in [0, 3]
        let mut p = LpProblem::new();
        let x = p.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
        let y = p.add_var(2.0, 0.0, 3.0);
        p.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        p.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Ge, -2.0);
        let s = solve_lp(&p, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 4.0).abs() < 1e-9, "{}", s.objective);
        assert!(p.max_violation(&s.primal) < 1e-9);
    }

    #[test]
    fn bound_flip_only() {
        // min -x - y, x, y in [0, 1], x + y <= 5: both flip to upper
        let mut p = LpProblem::new();
        p.add_var(-1.0, 0.0, 1.0);
        p.add_var(-1.0, 0.0, 1.0);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Le, 5.0);
        let s = solve_lp(&p, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.primal, vec![1.0, 1.0]);
    }

    #[test]
    fn iteration_limit_reported() {
        let mut p = LpProblem::new();
        for _ in 0..5 {
            p.add_var(-1.0, 0.0, 1.0);
        }
        let o = LpOptions { iteration_limit: 2, tol: Tolerances::default() };
        assert_eq!(solve_lp(&p, &o).unwrap().status, LpStatus::IterationLimit);
    }

    #[test]
    fn warm_start_reaches_same_optimum_quickly() {
        let mut p = LpProblem::new();
        let vars: Vec<usize> = (0..6).map(|j| p.add_var(-(j as f64 + 1.0), 0.0, 4.0)).collect();
        p.add_row(vars.iter().map(|&j| (j, 1.0)).collect(), Relation::Le, 7.0);
        p.add_row(vec![(0, 1.0), (5, 2.0)], Relation::Le, 5.0);
        let cold = solve_lp(&p, &opts()).unwrap();
        let warm = solve_lp_from(&p, &opts(), Some(&cold.basis)).unwrap();
        assert_eq!(warm.status, LpStatus::Optimal);
        assert!((cold.objective - warm.objective).abs() < 1e-9);
        assert_eq!(warm.iterations, 0);
    }

    #[test]
    fn malformed_warm_basis_is_ignored() {
        let mut p = LpProblem::new();
        p.add_var(1.0, 0.0, 1.0);
        p.add_row(vec![(0, 1.0)], Relation::Ge, 0.5);
        let bogus = Basis { status: vec![VarStatus::Basic, VarStatus::Basic] };
        let s = solve_lp_from(&p, &opts(), Some(&bogus)).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-12);
    }
}
