//! Simplex solver checked against brute-force vertex enumeration.

use headland_smooth::lp::{dual_bound, solve, LinearProgram, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense constraint `a x <= b`.
struct Halfspace {
    a: Vec<f64>,
    b: f64,
}

fn halfspaces(lp: &LinearProgram) -> Vec<Halfspace> {
    let n = lp.num_vars();
    let mut out = Vec::new();
    for (row, &h) in lp.rows().iter().zip(lp.rhs()) {
        let mut a = vec![0.0; n];
        for &(j, v) in row {
            a[j] += v;
        }
        out.push(Halfspace { a, b: h });
    }
    for j in 0..n {
        if lp.upper()[j].is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            out.push(Halfspace { a, b: lp.upper()[j] });
        }
        if lp.lower()[j].is_finite() {
            let mut a = vec![0.0; n];
            a[j] = -1.0;
            out.push(Halfspace { a, b: -lp.lower()[j] });
        }
    }
    out
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
            rhs[r] -= f * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (rhs[c] - s) / m[c][c];
    }
    Some(x)
}

fn next_combination(idx: &mut [usize], total: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < total - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum objective over all basic feasible solutions, `None` if there are none.
/// Only valid for bounded problems (all variables boxed here).
fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let hs = halfspaces(lp);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best: Option<f64> = None;
    loop {
        let m = idx.iter().map(|&i| hs[i].a.clone()).collect();
        let rhs = idx.iter().map(|&i| hs[i].b).collect();
        if let Some(x) = solve_square(m, rhs) {
            let feasible = hs
                .iter()
                .all(|h| h.a.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() <= h.b + 1e-9);
            if feasible {
                let obj = lp.objective(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        if !next_combination(&mut idx, hs.len()) {
            break;
        }
    }
    best
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn random_lp(rng: &mut ChaCha8Rng, integer: bool) -> LinearProgram {
    let n = rng.gen_range(1..=10);
    // Keep the enumeration tractable: C(m + 2n, n) stays below ~4e5.
    let mut m_max = 20;
    while m_max > 0 && binomial(m_max + 2 * n, n) > 4e5 {
        m_max -= 1;
    }
    let m = rng.gen_range(0..=m_max);
    let coef = |rng: &mut ChaCha8Rng| {
        if integer {
            rng.gen_range(-3i32..=3) as f64
        } else {
            rng.gen_range(-1.0..1.0)
        }
    };
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        let c = coef(rng);
        lp.set_cost(j, c);
        let lo = rng.gen_range(-5.0..0.0f64);
        let up = lo + rng.gen_range(0.5..6.0f64);
        let (lo, up) = if integer { (lo.round(), up.round().max(lo.round())) } else { (lo, up) };
        lp.set_bounds(j, lo, up);
    }
    for _ in 0..m {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (j, coef(rng))).collect();
        let rhs = if integer { rng.gen_range(-2i32..=4) as f64 } else { rng.gen_range(-1.0..3.0) };
        lp.add_row(&row, rhs);
    }
    lp
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut optimal, mut infeasible) = (0, 0);
    for k in 0..120 {
        let lp = random_lp(&mut rng, k % 3 == 0);
        let sol = solve(&lp).unwrap();
        match vertex_oracle(&lp) {
            Some(best) => {
                assert_eq!(sol.status, LpStatus::Optimal, "instance {k}\n{}", lp.to_text());
                assert!(
                    (sol.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "instance {k}: {} vs {best}\n{}",
                    sol.objective,
                    lp.to_text()
                );
                let h_inf = lp.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(lp.max_row_violation(&sol.x) <= 1e-7 * (1.0 + h_inf));
                assert!(lp.max_bound_violation(&sol.x) <= 1e-9);
                assert!(dual_bound(&lp, &sol.duals) <= sol.objective + 1e-7);
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "instance {k}\n{}", lp.to_text());
                infeasible += 1;
            }
        }
    }
    assert!(optimal >= 50 && infeasible >= 1, "{optimal} {infeasible}");
}

#[test]
fn duals_certify_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..40 {
        let lp = random_lp(&mut rng, false);
        let sol = solve(&lp).unwrap();
        if sol.status == LpStatus::Optimal {
            let bound = dual_bound(&lp, &sol.duals);
            assert!(bound <= sol.objective + 1e-7);
            assert!(bound >= sol.objective - 1e-6 * (1.0 + sol.objective.abs()), "{bound} {}", sol.objective);
        }
    }
}

#[test]
fn cost_scaling_keeps_solution_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let lp = random_lp(&mut rng, false);
        let base = solve(&lp).unwrap();
        if base.status != LpStatus::Optimal {
            continue;
        }
        for k in [1e-3, 7.5, 1e4] {
            let mut scaled = lp.clone();
            for j in 0..lp.num_vars() {
                scaled.set_cost(j, lp.cost()[j] * k);
            }
            let s = solve(&scaled).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!(lp.max_row_violation(&s.x) <= 1e-7 * 10.0);
            let expect = base.objective * k;
            assert!((s.objective - expect).abs() <= 1e-9 * expect.abs().max(1.0) * 1e3, "{} vs {expect}", s.objective);
        }
    }
}

#[test]
fn solver_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let lp = random_lp(&mut rng, true);
        let a = solve(&lp).unwrap();
        let b = solve(&lp).unwrap();
        assert_eq!(a, b);
    }
}
