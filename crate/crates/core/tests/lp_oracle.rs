//! Bundled simplex against exhaustive vertex enumeration on small boxed LPs.

use ccopt_core::lp::{solve_lp, DenseSimplex, LpBackend, LpProblem, LpStatus, PricingRule, SimplexOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves the square system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn dense(row: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(j, a) in row {
        v[j] += a;
    }
    v
}

/// Minimum over all basic feasible points; `None` if no vertex is feasible.
fn vertex_optimum(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, &h) in p.ineq_lhs.iter().zip(&p.ineq_rhs) {
        planes.push((dense(row, n), h));
    }
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let eqs: Vec<(Vec<f64>, f64)> = p.eq_lhs.iter().zip(&p.eq_rhs).map(|(r, &b)| (dense(r, n), b)).collect();
    let free = n - eqs.len();
    let mut best: Option<f64> = None;
    let m = planes.len();
    let mut idx: Vec<usize> = (0..free).collect();
    loop {
        let mut a: Vec<Vec<f64>> = eqs.iter().map(|e| e.0.clone()).collect();
        let mut b: Vec<f64> = eqs.iter().map(|e| e.1).collect();
        for &i in &idx {
            a.push(planes[i].0.clone());
            b.push(planes[i].1);
        }
        if let Some(x) = solve_square(a, b) {
            if p.max_violation(&x) <= 1e-9 {
                let v = p.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // next combination
        let mut pos = free;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            if idx[pos] < m - free + pos {
                idx[pos] += 1;
                for q in pos + 1..free {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.random_range(1..4);
    let mut lp = LpProblem::new();
    for _ in 0..n {
        lp.add_variable(rng.random_range(-5.0..0.0), rng.random_range(0.0..5.0), rng.random_range(-2.0..2.0));
    }
    for _ in 0..rng.random_range(0..6) {
        let row = (0..n).map(|j| (j, rng.random_range(-3.0..3.0))).collect();
        lp.add_le(row, rng.random_range(-4.0..4.0));
    }
    if n > 1 && rng.random_bool(0.3) {
        let row = (0..n).map(|j| (j, rng.random_range(-1.0..1.0))).collect();
        lp.add_eq(row, rng.random_range(-1.0..1.0));
    }
    lp
}

fn audit(p: &LpProblem, x: &[f64]) {
    for (row, &h) in p.ineq_lhs.iter().zip(&p.ineq_rhs) {
        let v: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
        assert!(v - h <= 1e-7);
    }
    for (row, &b) in p.eq_lhs.iter().zip(&p.eq_rhs) {
        let v: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
        assert!((v - b).abs() <= 1e-7);
    }
    for (v, &(lo, hi)) in x.iter().zip(&p.bounds) {
        assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
    }
}

#[test]
fn agrees_with_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bland = DenseSimplex::new(SimplexOptions { pricing: PricingRule::Bland, ..Default::default() });
    let mut infeasible = 0;
    for case in 0..400 {
        let p = random_lp(&mut rng);
        let truth = vertex_optimum(&p);
        for sol in [solve_lp(&p).unwrap(), bland.solve(&p).unwrap()] {
            match truth {
                None => {
                    assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
                }
                Some(v) => {
                    assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                    assert!((sol.objective_value - v).abs() <= 1e-7 * (1.0 + v.abs()), "case {case}: {} vs {v}", sol.objective_value);
                    audit(&p, &sol.x);
                    let direct: f64 = p.objective.iter().zip(&sol.x).map(|(c, x)| c * x).sum();
                    assert!((direct - sol.objective_value).abs() <= 1e-9 * (1.0 + direct.abs()));
                }
            }
        }
        infeasible += truth.is_none() as usize;
    }
    assert!(infeasible > 10 && infeasible < 300, "{infeasible} infeasible cases");
}

#[test]
fn unbounded_directions() {
    // min −x − y with x − y ≤ 1, y free above
    let mut lp = LpProblem::new();
    lp.add_variable(0.0, f64::INFINITY, -1.0);
    lp.add_variable(0.0, f64::INFINITY, -1.0);
    lp.add_le(vec![(0, 1.0), (1, -1.0)], 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    // free variable with cost and no rows
    let mut lp = LpProblem::new();
    lp.add_variable(f64::NEG_INFINITY, f64::INFINITY, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn repeated_and_concurrent_solves_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let problems: Vec<LpProblem> = (0..40).map(|_| random_lp(&mut rng)).collect();
    let first: Vec<_> = problems.iter().map(|p| solve_lp(p).unwrap()).collect();
    let threaded: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = problems.iter().map(|p| s.spawn(move || solve_lp(p).unwrap())).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (a, b) in first.iter().zip(&threaded) {
        assert_eq!(a.status, b.status);
        assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }
}

proptest! {
    #[test]
    fn positive_scaling_of_the_objective(seed in 0u64..10_000, lambda in 0.01..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_lp(&mut rng);
        let base = solve_lp(&p).unwrap();
        let mut q = p.clone();
        q.objective.iter_mut().for_each(|c| *c *= lambda);
        let scaled = solve_lp(&q).unwrap();
        prop_assert_eq!(base.status, scaled.status);
        if base.status == LpStatus::Optimal {
            prop_assert!((scaled.objective_value - lambda * base.objective_value).abs() <= 1e-7 * (1.0 + scaled.objective_value.abs()));
            for (a, b) in base.x.iter().zip(&scaled.x) {
                prop_assert!((a - b).abs() <= 1e-7);
            }
        }
    }
}
