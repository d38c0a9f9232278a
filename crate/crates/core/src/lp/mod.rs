//! Continuous linear programs with bounded variables.
//!
//! Problems are stated as `min c·x` subject to sparse rows `a·x {<=,=,>=} b`
//! and `lower <= x <= upper`, solved by [`solve_lp`], a bounded-variable
//! primal simplex.

pub mod audit;
mod eta;
mod simplex;

use std::fmt;

use crate::error::{Error, Result};

pub use simplex::{solve_lp, solve_lp_from, REFACTOR_INTERVAL, STALL_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(LpRow { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::InvalidLp("bound vectors do not match the objective".into()));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
            if !self.objective[j].is_finite() {
                return Err(Error::InvalidLp(format!("variable {j} has cost {}", self.objective[j])));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidLp(format!("row {r} has rhs {}", row.rhs)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::InvalidLp(format!("row {r} references variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidLp(format!("row {r} has coefficient {a}")));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn row_activity(&self, r: usize, x: &[f64]) -> f64 {
        self.rows[r].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let act = self.row_activity(r, x);
            let v = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Lagrangian lower bound `b·y + min_{l<=x<=u} (c - Aᵀy)·x` for row
    /// duals `y`. Wrong-signed duals are clipped to zero first, so the value
    /// is a valid bound on the optimum for any input. Reduced costs within
    /// `tol` of zero are treated as zero on infinite bounds.
    pub fn lagrangian_bound(&self, duals: &[f64], tol: f64) -> f64 {
        let y: Vec<f64> = self
            .rows
            .iter()
            .zip(duals)
            .map(|(row, &v)| match row.relation {
                Relation::Le => v.min(0.0),
                Relation::Ge => v.max(0.0),
                Relation::Eq => v,
            })
            .collect();
        let mut d = self.objective.clone();
        let mut bound = 0.0;
        for (row, &yr) in self.rows.iter().zip(&y) {
            bound += row.rhs * yr;
            for &(j, a) in &row.coeffs {
                d[j] -= a * yr;
            }
        }
        for j in 0..self.num_vars() {
            let dj = d[j];
            let scale = tol * (1.0 + self.objective[j].abs());
            let bnd = if dj >= 0.0 { self.lower[j] } else { self.upper[j] };
            if bnd.is_finite() {
                bound += dj * bnd;
            } else if dj.abs() > scale {
                return f64::NEG_INFINITY;
            }
        }
        bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feas: f64,
    pub opt: f64,
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-7,
            opt: 1e-7,
            pivot: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub tol: Tolerances,
    pub iteration_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            iteration_limit: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration-limit",
        })
    }
}

/// Status of one variable in a simplex basis. Structural variables come
/// first, then one logical per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Row duals; `<=` rows carry nonpositive values, `>=` rows nonnegative.
    pub duals: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_catches_bad_bounds_and_indices() {
        let mut p = LpProblem::new();
        p.add_var(1.0, 2.0, 1.0);
        assert!(p.check().is_err());
        let mut p = LpProblem::new();
        p.add_var(1.0, 0.0, 1.0);
        p.add_row(vec![(3, 1.0)], Relation::Le, 1.0);
        assert!(p.check().is_err());
    }

    #[test]
    fn lagrangian_bound_clips_wrong_signs() {
        // min x, x >= 3, 0 <= x <= 10
        let mut p = LpProblem::new();
        p.add_var(1.0, 0.0, 10.0);
        p.add_row(vec![(0, 1.0)], Relation::Ge, 3.0);
        assert_eq!(p.lagrangian_bound(&[1.0], 1e-9), 3.0);
        assert_eq!(p.lagrangian_bound(&[-1.0], 1e-9), 0.0);
    }
}
