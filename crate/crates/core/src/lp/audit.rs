//! Opt-in per-thread checking of every LP solved.
//!
//! When enabled, each optimal solve is checked for primal feasibility and
//! weak duality (the Lagrangian bound of the returned duals may not exceed
//! the returned objective). Residuals are relative: row and bound
//! violations are divided by `1 + max |rhs|, |bound|`, duality excess by
//! `max(1, |objective|)`.

use std::cell::RefCell;

use super::{LpProblem, LpSolution, LpStatus};

/// Relative residual above which a solve counts as a failure.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AuditStats {
    pub solves: usize,
    pub optimal: usize,
    pub max_primal_residual: f64,
    pub max_duality_excess: f64,
    pub failures: usize,
}

thread_local! {
    static AUDIT: RefCell<Option<AuditStats>> = const { RefCell::new(None) };
}

/// Starts auditing on this thread, clearing earlier counts.
pub fn enable() {
    AUDIT.with(|a| *a.borrow_mut() = Some(AuditStats::default()));
}

/// Stops auditing and returns what was recorded.
pub fn disable() -> Option<AuditStats> {
    AUDIT.with(|a| a.borrow_mut().take())
}

pub fn snapshot() -> Option<AuditStats> {
    AUDIT.with(|a| *a.borrow())
}

pub(super) fn record(prob: &LpProblem, sol: &LpSolution, tol: f64) {
    AUDIT.with(|a| {
        let mut guard = a.borrow_mut();
        let Some(stats) = guard.as_mut() else { return };
        stats.solves += 1;
        if sol.status != LpStatus::Optimal {
            return;
        }
        stats.optimal += 1;
        let scale = prob
            .rows
            .iter()
            .map(|r| r.rhs.abs())
            .chain(prob.lower.iter().chain(&prob.upper).filter(|v| v.is_finite()).map(|v| v.abs()))
            .fold(0.0, f64::max);
        let primal = prob.max_violation(&sol.primal) / (1.0 + scale);
        let bound = prob.lagrangian_bound(&sol.duals, tol);
        let excess = ((bound - sol.objective) / sol.objective.abs().max(1.0)).max(0.0);
        stats.max_primal_residual = stats.max_primal_residual.max(primal);
        stats.max_duality_excess = stats.max_duality_excess.max(excess);
        if primal > AUDIT_TOL || excess > AUDIT_TOL {
            stats.failures += 1;
        }
    });
}
