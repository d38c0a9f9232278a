use itlp::lp::{solve_lp, LpOptions, LpProblem, LpStatus, Relation};
use proptest::prelude::*;

/// Minimum over all vertices of a box-bounded LP with `<=`/`>=` rows,
/// found by solving every square subsystem of active constraints.
fn vertex_oracle(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    // each candidate active constraint: (coefficients, rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &p.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &row.coeffs {
            a[j] += v;
        }
        planes.push((a, row.rhs));
    }
    for j in 0..n {
        for bound in [p.lower[j], p.upper[j]] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            planes.push((a, bound));
        }
    }
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn rec(
        depth: usize,
        start: usize,
        pick: &mut Vec<usize>,
        planes: &[(Vec<f64>, f64)],
        p: &LpProblem,
        best: &mut Option<f64>,
    ) {
        let n = pick.len();
        if depth == n {
            let mut a: Vec<Vec<f64>> = pick.iter().map(|&k| planes[k].0.clone()).collect();
            let mut b: Vec<f64> = pick.iter().map(|&k| planes[k].1).collect();
            // Gaussian elimination with partial pivoting
            for c in 0..n {
                let r = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
                if a[r][c].abs() < 1e-12 {
                    return;
                }
                a.swap(c, r);
                b.swap(c, r);
                for r2 in 0..n {
                    if r2 != c {
                        let f = a[r2][c] / a[c][c];
                        for k in 0..n {
                            a[r2][k] -= f * a[c][k];
                        }
                        b[r2] -= f * b[c];
                    }
                }
            }
            let x: Vec<f64> = (0..n).map(|i| b[i] / a[i][i]).collect();
            if p.max_violation(&x) <= 1e-9 {
                let v = p.objective_value(&x);
                if best.map_or(true, |b| v < b) {
                    *best = Some(v);
                }
            }
            return;
        }
        for k in start..planes.len() {
            pick[depth] = k;
            rec(depth + 1, k + 1, pick, planes, p, best);
        }
    }
    rec(0, 0, &mut pick, &planes, p, &mut best);
    best
}

fn small_lp() -> impl Strategy<Value = LpProblem> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5i32..=5, n),
            prop::collection::vec((0i32..=2, 1i32..=4), n),
            prop::collection::vec((prop::collection::vec(-3i32..=3, n), any::<bool>(), -4i32..=8), m),
        )
            .prop_map(move |(cost, bounds, rows)| {
                let mut p = LpProblem::new();
                for j in 0..n {
                    let (lo, width) = bounds[j];
                    p.add_var(cost[j] as f64, lo as f64, (lo + width) as f64);
                }
                for (coeffs, le, rhs) in rows {
                    let c = coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| a != 0)
                        .map(|(j, &a)| (j, a as f64))
                        .collect();
                    p.add_row(c, if le { Relation::Le } else { Relation::Ge }, rhs as f64);
                }
                p
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn agrees_with_vertex_enumeration(p in small_lp()) {
        let s = solve_lp(&p, &LpOptions::default()).unwrap();
        match vertex_oracle(&p) {
            None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(s.status, LpStatus::Optimal);
                prop_assert!((s.objective - best).abs() <= 1e-7 * best.abs().max(1.0),
                    "simplex {} vs oracle {}", s.objective, best);
                prop_assert!(p.max_violation(&s.primal) <= 1e-7);
                let dual = p.lagrangian_bound(&s.duals, 1e-7);
                prop_assert!(s.objective >= dual - 1e-6 * s.objective.abs().max(1.0));
                prop_assert!((s.objective - dual).abs() <= 1e-6 * s.objective.abs().max(1.0),
                    "strong duality gap {} vs {}", s.objective, dual);
            }
        }
    }

    #[test]
    fn row_permutation_invariance(p in small_lp(), seed in any::<u64>()) {
        let mut q = p.clone();
        // deterministic Fisher-Yates driven by the seed
        let mut state = seed;
        for i in (1..q.rows.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            q.rows.swap(i, j);
        }
        let a = solve_lp(&p, &LpOptions::default()).unwrap();
        let b = solve_lp(&q, &LpOptions::default()).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert!((a.objective - b.objective).abs() <= 1e-9 * a.objective.abs().max(1.0));
        }
    }
}

fn rows_le(p: &mut LpProblem, rows: &[(&[f64], f64)]) {
    for (coeffs, rhs) in rows {
        let c = coeffs.iter().enumerate().filter(|(_, a)| **a != 0.0).map(|(j, &a)| (j, a)).collect();
        p.add_row(c, Relation::Le, *rhs);
    }
}

#[test]
fn beale_cycling_example_terminates() {
    let mut p = LpProblem::new();
    for c in [-0.75, 20.0, -0.5, 6.0] {
        p.add_var(c, 0.0, f64::INFINITY);
    }
    rows_le(
        &mut p,
        &[
            (&[0.25, -8.0, -1.0, 9.0], 0.0),
            (&[0.5, -12.0, -0.5, 3.0], 0.0),
            (&[0.0, 0.0, 1.0, 0.0], 1.0),
        ],
    );
    let s = solve_lp(&p, &LpOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 1.25).abs() < 1e-9, "{}", s.objective);
}

#[test]
fn kuhn_cycling_example_terminates() {
    let mut p = LpProblem::new();
    for c in [-2.0, -3.0, 1.0, 12.0] {
        p.add_var(c, 0.0, f64::INFINITY);
    }
    rows_le(
        &mut p,
        &[
            (&[-2.0, -9.0, 1.0, 9.0], 0.0),
            (&[1.0 / 3.0, 1.0, -1.0 / 3.0, -2.0], 0.0),
            (&[2.0, 3.0, -1.0, -12.0], 2.0),
        ],
    );
    let s = solve_lp(&p, &LpOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 2.0).abs() < 1e-9, "{}", s.objective);
}

/// Many rows through the origin make every early pivot degenerate; the
/// stall fallback must still reach the optimum.
#[test]
fn massively_degenerate_vertex() {
    let n = 12;
    let mut p = LpProblem::new();
    for j in 0..n {
        p.add_var(-((j % 5) as f64 + 1.0), 0.0, f64::INFINITY);
    }
    let mut state: u64 = 12345;
    for _ in 0..60 {
        let mut coeffs = Vec::new();
        for j in 0..n {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let v = ((state >> 40) % 7) as f64 - 2.0;
            if v != 0.0 {
                coeffs.push((j, v));
            }
        }
        p.add_row(coeffs, Relation::Le, 0.0);
    }
    p.add_row((0..n).map(|j| (j, 1.0)).collect(), Relation::Le, 10.0);
    let s = solve_lp(&p, &LpOptions::default()).unwrap();
    assert!(matches!(s.status, LpStatus::Optimal | LpStatus::Unbounded));
    if s.status == LpStatus::Optimal {
        assert!(p.max_violation(&s.primal) < 1e-7);
        let dual = p.lagrangian_bound(&s.duals, 1e-7);
        assert!((s.objective - dual).abs() <= 1e-6 * s.objective.abs().max(1.0));
    }
}
