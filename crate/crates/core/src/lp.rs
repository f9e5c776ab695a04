//! Linear programs `min c x  s.t.  G x <= h,  lo <= x <= up` and a dense
//! bounded-variable two-phase primal simplex solver.
//!
//! Costs spanning more than eight orders of magnitude are optimised
//! lexicographically: first the large tier, then the small tier restricted to
//! the optimal face of the first. Pricing uses Dantzig's rule and falls back
//! to Bland's rule after a run of degenerate pivots.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sparse inequality-form linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    cost: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables with zero cost and free bounds.
    pub fn new(n: usize) -> Self {
        Self {
            cost: vec![0.0; n],
            rows: Vec::new(),
            rhs: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_cost(&mut self, j: usize, c: f64) {
        self.cost[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, up: f64) {
        self.lower[j] = lo;
        self.upper[j] = up;
    }

    /// Appends `sum coeffs <= rhs`; repeated indices are summed, zeros dropped.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        let mut sorted = coeffs.to_vec();
        sorted.sort_by_key(|&(j, _)| j);
        for (j, v) in sorted {
            match row.last_mut() {
                Some((k, acc)) if *k == j => *acc += v,
                _ => row.push((j, v)),
            }
        }
        row.retain(|&(_, v)| v != 0.0);
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for (i, row) in self.rows.iter().enumerate() {
            if row.iter().any(|&(j, v)| j >= n || !v.is_finite()) {
                return Err(Error::InvalidLp(format!("row {i} has an invalid entry")));
            }
            if !self.rhs[i].is_finite() {
                return Err(Error::InvalidLp(format!("row {i} has a non-finite bound")));
            }
        }
        for j in 0..n {
            if !self.cost[j].is_finite() {
                return Err(Error::InvalidLp(format!("cost {j} is not finite")));
            }
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(Error::InvalidLp(format!("bounds of variable {j} are inconsistent")));
            }
            if self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!("bounds of variable {j} are inconsistent")));
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation `max_i (G x - h)_i`, or 0 when feasible.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, &h)| row.iter().map(|&(j, v)| v * x[j]).sum::<f64>() - h)
            .fold(0.0, f64::max)
    }

    /// Largest bound violation, or 0.
    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]))
            .fold(0.0, f64::max)
    }

    /// Plain-text dump for cross-checking with external solvers.
    ///
    /// Format: a header line `lp <vars> <rows>`, one `c` line with costs, one
    /// `bounds` line per variable, then one `row` line per inequality as
    /// `row <rhs> <index>:<coef> ...` meaning `sum coef*x[index] <= rhs`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lp {} {}", self.num_vars(), self.num_rows());
        let _ = write!(s, "c");
        for c in &self.cost {
            let _ = write!(s, " {c:e}");
        }
        s.push('\n');
        for j in 0..self.num_vars() {
            let _ = writeln!(s, "bounds {j} {:e} {:e}", self.lower[j], self.upper[j]);
        }
        for (row, h) in self.rows.iter().zip(&self.rhs) {
            let _ = write!(s, "row {h:e}");
            for (j, v) in row {
                let _ = write!(s, " {j}:{v:e}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row multipliers (non-positive) of the final basis.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Lower bound on the optimum from any non-positive row multipliers.
pub fn dual_bound(lp: &LinearProgram, duals: &[f64]) -> f64 {
    let mut reduced = lp.cost.clone();
    let mut bound = 0.0;
    for (i, row) in lp.rows.iter().enumerate() {
        let y = duals[i].min(0.0);
        bound += y * lp.rhs[i];
        for &(j, v) in row {
            reduced[j] -= y * v;
        }
    }
    for (j, &d) in reduced.iter().enumerate() {
        bound += if d > 0.0 {
            d * lp.lower[j]
        } else if d < 0.0 {
            d * lp.upper[j]
        } else {
            0.0
        };
    }
    if bound.is_nan() { f64::NEG_INFINITY } else { bound }
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const TIER_RATIO: f64 = 1e8;
const RATIO_TIE: f64 = 1e-12;

/// How an original variable maps onto internal non-negative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = shift + y`.
    Shifted { col: usize, shift: f64 },
    /// `x = shift - y`.
    Mirrored { col: usize, shift: f64 },
    /// `x = y+ - y-`.
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    width: usize,
    /// Row-major `m x width` matrix `B^-1 A`.
    t: Vec<f64>,
    /// Original constraint columns (after row sign flips), for refreshes.
    a: Vec<f64>,
    b: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    /// For nonbasic columns: true when at the upper bound.
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    beta: Vec<f64>,
    /// Columns forming the identity in the initial basis, per row.
    unit_cols: Vec<usize>,
    iterations: usize,
}

enum StepResult {
    Optimal,
    Unbounded,
    Progress,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] { self.upper[j] } else { 0.0 }
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for every column.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.width..(i + 1) * self.width];
                for (dj, tij) in d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for i in 0..self.m {
            d[self.basis[i]] = 0.0;
        }
        d
    }

    fn choose_entering(&self, d: &[f64], eligible: &[bool], bland: bool, tol: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.width {
            if self.is_basic[j] || !eligible[j] || self.upper[j] == 0.0 {
                continue;
            }
            let dir = if !self.at_upper[j] && d[j] < -tol {
                1.0
            } else if self.at_upper[j] && d[j] > tol {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            let score = d[j].abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// One iteration priced on `d[0]`; the other rows of `d` are kept in step.
    /// The flag reports a degenerate step.
    fn iterate(&mut self, d: &mut [Vec<f64>], eligible: &[bool], bland: bool, tol: f64) -> (StepResult, bool) {
        let Some((q, dir)) = self.choose_entering(&d[0], eligible, bland, tol) else {
            return (StepResult::Optimal, false);
        };
        // Ratio test over the basic variables.
        let mut best_limit = f64::INFINITY;
        let mut leave: Option<usize> = None;
        for i in 0..self.m {
            let alpha = self.at(i, q);
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * alpha;
            let k = self.basis[i];
            let limit = if rate < 0.0 {
                self.beta[i].max(0.0) / -rate
            } else if self.upper[k].is_finite() {
                (self.upper[k] - self.beta[i]).max(0.0) / rate
            } else {
                continue;
            };
            let take = match leave {
                None => true,
                Some(r) => {
                    if limit < best_limit - RATIO_TIE {
                        true
                    } else if limit <= best_limit + RATIO_TIE {
                        if bland {
                            k < self.basis[r]
                        } else {
                            alpha.abs() > self.at(r, q).abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if take {
                best_limit = if leave.is_none() { limit } else { best_limit.min(limit) };
                leave = Some(i);
            }
        }
        // The entering variable may reach its own opposite bound first.
        let flip = self.upper[q] <= best_limit;
        let theta = if flip { self.upper[q] } else { best_limit };
        if theta.is_infinite() {
            return (StepResult::Unbounded, false);
        }
        self.iterations += 1;
        for i in 0..self.m {
            let alpha = self.at(i, q);
            if alpha != 0.0 {
                self.beta[i] -= dir * alpha * theta;
            }
        }
        if flip {
            self.at_upper[q] = !self.at_upper[q];
        } else {
            let r = leave.expect("finite ratio comes from a row");
            let entering_value = self.nonbasic_value(q) + dir * theta;
            let k = self.basis[r];
            let leaves_at_upper = -dir * self.at(r, q) > 0.0;
            self.pivot(r, q, d);
            self.is_basic[k] = false;
            self.at_upper[k] = leaves_at_upper;
            self.is_basic[q] = true;
            self.at_upper[q] = false;
            self.basis[r] = q;
            self.beta[r] = entering_value;
        }
        (StepResult::Progress, theta <= FEAS_TOL)
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [Vec<f64>]) {
        let w = self.width;
        let p = self.t[r * w + q];
        let inv = 1.0 / p;
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<(usize, f64)> = self.t[r * w..(r + 1) * w]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for &(j, v) in &pivot_row {
                row[j] -= f * v;
            }
            row[q] = 0.0;
        }
        for dk in d.iter_mut() {
            let f = dk[q];
            if f != 0.0 {
                for &(j, v) in &pivot_row {
                    dk[j] -= f * v;
                }
                dk[q] = 0.0;
            }
        }
    }

    /// Runs iterations on `d[0]` until optimal or unbounded.
    fn optimize(&mut self, d: &mut [Vec<f64>], eligible: &[bool], tol: f64) -> Result<StepResult> {
        let mut degenerate_run = 0;
        let max_iter = self.iterations + 50 * (self.m + self.width) + 1000;
        loop {
            if self.iterations > max_iter {
                return Err(Error::LpFailed("stalled at the iteration limit"));
            }
            let bland = degenerate_run >= DEGENERATE_RUN;
            let (res, degenerate) = self.iterate(d, eligible, bland, tol);
            match res {
                StepResult::Progress => {
                    degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
                }
                other => return Ok(other),
            }
        }
    }

    /// Recomputes basic values from the original data to shed round-off.
    fn refresh_values(&mut self) {
        let w = self.width;
        let mut r = self.b.clone();
        for j in 0..w {
            if self.is_basic[j] {
                continue;
            }
            let xj = self.nonbasic_value(j);
            if xj != 0.0 {
                for (i, ri) in r.iter_mut().enumerate().take(self.m) {
                    *ri -= self.a[i * w + j] * xj;
                }
            }
        }
        for i in 0..self.m {
            let mut v = 0.0;
            for (k, rk) in r.iter().enumerate() {
                v += self.t[i * w + self.unit_cols[k]] * rk;
            }
            self.beta[i] = v;
        }
    }

    fn value(&self, j: usize) -> f64 {
        if self.is_basic[j] {
            let i = self.basis.iter().position(|&b| b == j).expect("basic column in basis");
            self.beta[i]
        } else {
            self.nonbasic_value(j)
        }
    }
}

/// Solves the program. Identical input yields bitwise identical output.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();
    let m = lp.num_rows();

    // Map variables onto non-negative columns.
    let mut maps = Vec::with_capacity(n);
    let mut col_upper = Vec::new();
    let mut col_cost = Vec::new();
    for j in 0..n {
        let (lo, up, c) = (lp.lower[j], lp.upper[j], lp.cost[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shifted { col: col_upper.len(), shift: lo });
            col_upper.push(up - lo);
            col_cost.push(c);
        } else if up.is_finite() {
            maps.push(VarMap::Mirrored { col: col_upper.len(), shift: up });
            col_upper.push(f64::INFINITY);
            col_cost.push(-c);
        } else {
            let pos = col_upper.len();
            maps.push(VarMap::Split { pos, neg: pos + 1 });
            col_upper.extend([f64::INFINITY, f64::INFINITY]);
            col_cost.extend([c, -c]);
        }
    }
    let ny = col_upper.len();

    // Rows in terms of the internal columns, with shifted right-hand sides.
    let mut dense_rows = vec![vec![0.0; ny]; m];
    let mut b = lp.rhs.clone();
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, v) in row {
            match maps[j] {
                VarMap::Shifted { col, shift } => {
                    dense_rows[i][col] += v;
                    b[i] -= v * shift;
                }
                VarMap::Mirrored { col, shift } => {
                    dense_rows[i][col] -= v;
                    b[i] -= v * shift;
                }
                VarMap::Split { pos, neg } => {
                    dense_rows[i][pos] += v;
                    dense_rows[i][neg] -= v;
                }
            }
        }
    }
    let negated: Vec<bool> = b.iter().map(|&v| v < 0.0).collect();
    let n_art = negated.iter().filter(|&&f| f).count();
    let width = ny + m + n_art;
    let slack0 = ny;
    let art0 = ny + m;

    let mut a = vec![0.0; m * width];
    let mut unit_cols = vec![0; m];
    let mut basis = vec![0; m];
    let mut k_art = 0;
    for i in 0..m {
        let sign = if negated[i] { -1.0 } else { 1.0 };
        for (j, &v) in dense_rows[i].iter().enumerate() {
            a[i * width + j] = sign * v;
        }
        a[i * width + slack0 + i] = sign;
        b[i] *= sign;
        if negated[i] {
            let col = art0 + k_art;
            a[i * width + col] = 1.0;
            unit_cols[i] = col;
            k_art += 1;
        } else {
            unit_cols[i] = slack0 + i;
        }
        basis[i] = unit_cols[i];
    }
    let mut upper = col_upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, m + n_art));
    let mut is_basic = vec![false; width];
    for &k in &basis {
        is_basic[k] = true;
    }
    let mut tab = Tableau {
        m,
        width,
        t: a.clone(),
        a,
        beta: b.clone(),
        b,
        upper,
        basis,
        at_upper: vec![false; width],
        is_basic,
        unit_cols,
        iterations: 0,
    };

    let h_norm = lp.rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let all = vec![true; width];

    // Phase 1.
    if n_art > 0 {
        let mut c1 = vec![0.0; width];
        for c in &mut c1[art0..] {
            *c = 1.0;
        }
        let mut d = vec![tab.reduced_costs(&c1)];
        tab.optimize(&mut d, &all, OPT_TOL)?;
        tab.refresh_values();
        let infeas: f64 = (art0..width).map(|j| tab.value(j)).sum();
        if infeas > 1e-7 * (1.0 + h_norm) {
            return Ok(failed(lp, LpStatus::Infeasible, tab.iterations));
        }
        drive_out_artificials(&mut tab, art0);
        for j in art0..width {
            tab.upper[j] = 0.0;
            tab.at_upper[j] = false;
        }
    }

    // Phase 2 with cost tiers.
    let mut cost = vec![0.0; width];
    cost[..ny].copy_from_slice(&col_cost);
    let tiers = split_tiers(&cost);
    let mut eligible = vec![true; width];
    for e in &mut eligible[art0..] {
        *e = false;
    }
    let mut d: Vec<Vec<f64>> = tiers.iter().map(|c| tab.reduced_costs(c)).collect();
    for (tier, costs) in tiers.iter().enumerate() {
        if tier > 0 {
            d.rotate_left(1);
        }
        let scale = costs.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
        if let StepResult::Unbounded = tab.optimize(&mut d, &eligible, OPT_TOL * scale)? {
            return Ok(failed(lp, LpStatus::Unbounded, tab.iterations));
        }
        // Later tiers stay on the optimal face of this one.
        for j in 0..width {
            if !tab.is_basic[j] && d[0][j].abs() > OPT_TOL * scale {
                eligible[j] = false;
            }
        }
    }
    tab.refresh_values();

    let mut x = vec![0.0; n];
    for (j, map) in maps.iter().enumerate() {
        x[j] = match *map {
            VarMap::Shifted { col, shift } => shift + tab.value(col),
            VarMap::Mirrored { col, shift } => shift - tab.value(col),
            VarMap::Split { pos, neg } => tab.value(pos) - tab.value(neg),
        };
        x[j] = x[j].clamp(lp.lower[j], lp.upper[j]);
    }

    // Row multipliers: slack i has zero cost, so its reduced cost is -y_i.
    let dc = tab.reduced_costs(&cost);
    let duals = (0..m).map(|i| -dc[slack0 + i]).collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: lp.objective(&x),
        x,
        duals,
        iterations: tab.iterations,
    })
}

fn failed(lp: &LinearProgram, status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        x: vec![0.0; lp.num_vars()],
        objective: match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        },
        duals: vec![0.0; lp.num_rows()],
        iterations,
    }
}

/// Pivots zero-level artificials out of the basis where possible.
fn drive_out_artificials(tab: &mut Tableau, art0: usize) {
    for r in 0..tab.m {
        if tab.basis[r] < art0 {
            continue;
        }
        let candidate = (0..art0)
            .filter(|&j| !tab.is_basic[j])
            .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()).then(b.cmp(&a)));
        if let Some(q) = candidate {
            if tab.at(r, q).abs() > 1e-7 {
                let k = tab.basis[r];
                let value = tab.nonbasic_value(q);
                let mut none: [Vec<f64>; 0] = [];
                tab.pivot(r, q, &mut none);
                tab.is_basic[k] = false;
                tab.at_upper[k] = false;
                tab.is_basic[q] = true;
                tab.at_upper[q] = false;
                tab.basis[r] = q;
                tab.beta[r] = value;
            }
        }
    }
    tab.refresh_values();
}

/// Splits costs into magnitude tiers, largest first. A single tier is
/// returned unless the nonzero magnitudes span more than `TIER_RATIO`.
fn split_tiers(cost: &[f64]) -> Vec<Vec<f64>> {
    let mags: Vec<f64> = cost.iter().map(|c| c.abs()).filter(|&c| c > 0.0).collect();
    let (lo, hi) = mags
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    if mags.is_empty() || hi / lo <= TIER_RATIO {
        return vec![cost.to_vec()];
    }
    let cut = (lo * hi).sqrt();
    let big = cost.iter().map(|&c| if c.abs() >= cut { c } else { 0.0 }).collect();
    let small = cost.iter().map(|&c| if c.abs() < cut { c } else { 0.0 }).collect();
    vec![big, small]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absolute_value_epigraph() {
        // x free, t >= |x - 1|.
        let mut lp = LinearProgram::new(2);
        lp.set_cost(1, 1.0);
        lp.add_row(&[(0, 1.0), (1, -1.0)], 1.0);
        lp.add_row(&[(0, -1.0), (1, -1.0)], -1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12 && s.objective.abs() < 1e-12);
    }

    #[test]
    fn simple_upper_bound() {
        let mut lp = LinearProgram::new(1);
        lp.set_cost(0, -1.0);
        lp.set_bounds(0, 0.0, f64::INFINITY);
        lp.add_row(&[(0, 1.0)], 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_flip_only() {
        let mut lp = LinearProgram::new(2);
        lp.set_cost(0, -1.0);
        lp.set_cost(1, 1.0);
        lp.set_bounds(0, -2.0, 5.0);
        lp.set_bounds(1, -3.0, 4.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.x, vec![5.0, -3.0]);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(&[(0, 1.0)], -1.0);
        lp.add_row(&[(0, -1.0)], -1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(1);
        lp.set_cost(0, -1.0);
        lp.add_row(&[(0, -1.0)], 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn huge_slack_weight_is_handled_lexicographically() {
        // min t + 1e16 s  s.t.  t >= 1 - x, x <= s, x <= 0.5, t, s >= 0.
        let mut lp = LinearProgram::new(3);
        lp.set_cost(1, 1.0);
        lp.set_cost(2, 1e16);
        lp.set_bounds(1, 0.0, f64::INFINITY);
        lp.set_bounds(2, 0.0, f64::INFINITY);
        lp.add_row(&[(0, -1.0), (1, -1.0)], -1.0);
        lp.add_row(&[(0, 1.0), (2, -1.0)], 0.0);
        lp.add_row(&[(0, 1.0)], 0.5);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.x[2].abs() < 1e-12, "{:?}", s.x);
        assert!((s.x[1] - 1.0).abs() < 1e-9);
        assert!(s.x[0].abs() < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's classic cycling example (with a bounding row).
        let mut lp = LinearProgram::new(4);
        for (j, c) in [-0.75, 150.0, -0.02, 6.0].into_iter().enumerate() {
            lp.set_cost(j, c);
            lp.set_bounds(j, 0.0, f64::INFINITY);
        }
        lp.add_row(&[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], 0.0);
        lp.add_row(&[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], 0.0);
        lp.add_row(&[(2, 1.0)], 1.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9, "{}", s.objective);
    }

    #[test]
    fn dump_lists_rows() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(&[(1, 2.0), (0, 1.0), (1, 1.0)], 4.0);
        let text = lp.to_text();
        assert!(text.starts_with("lp 2 1\n"));
        assert!(text.contains("row 4e0 0:1e0 1:3e0"));
    }

    #[test]
    fn rejects_inconsistent_bounds() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 1.0, 0.0);
        assert!(solve(&lp).is_err());
    }
}
