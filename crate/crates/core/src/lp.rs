//! Dense two-phase primal simplex.
//!
//! Problems are `min c.x` subject to rows `a.x {<=,=,>=} b` and per-variable
//! bounds `lo <= x <= hi` with finite `lo`. Free variables are split by the
//! caller. Pivoting uses Dantzig's rule and falls back to Bland's rule once a
//! run of degenerate pivots trips a counter; the tableau is rebuilt from the
//! original data every few hundred pivots to shed accumulated round-off.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const COND_LIMIT: f64 = 1e13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless optimal.
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Standard-form column indices of the final basis. Columns `0..n` are the
    /// structural variables, the rest are slacks in row order.
    pub basis: Vec<usize>,
    /// Row multipliers for the original rows (bound rows are not reported).
    pub duals: Vec<f64>,
    /// `c.x - b.y` in the scaled standard form, mapped back to problem units.
    pub duality_gap: f64,
    /// `max(0, -min reduced cost)`; zero for a dual-feasible basis.
    pub dual_infeasibility: f64,
    /// `sum |x_j d_j|` over standard-form columns.
    pub complementary_slackness: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degeneracy_limit: usize,
    pub refactor_every: usize,
    /// Print the final tableau to stderr.
    pub dump_tableau: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iterations: None, degeneracy_limit: 50, refactor_every: 200, dump_tableau: false }
    }
}

impl LpProblem {
    pub fn minimize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem { objective, rows: Vec::new(), senses: Vec::new(), rhs: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: &[f64], sense: RowSense, rhs: f64) -> &mut Self {
        let entries = coeffs.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
        self.add_sparse_row(entries, sense, rhs)
    }

    pub fn add_sparse_row(&mut self, entries: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> &mut Self {
        self.rows.push(entries);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.bounds[var] = (lo, hi);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective coefficient".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !self.rhs[i].is_finite() {
                return Err(Error::InvalidInput(format!("non-finite rhs in row {i}")));
            }
            for &(j, v) in row {
                if j >= n {
                    return Err(Error::DimensionMismatch { expected: n, found: j + 1 });
                }
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite coefficient in row {i}")));
                }
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() {
                return Err(Error::InvalidInput(format!("variable {j} has no finite lower bound; split it")));
            }
            if hi.is_nan() {
                return Err(Error::InvalidInput(format!("variable {j} has NaN upper bound")));
            }
        }
        Ok(())
    }

    /// Evaluate the row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// Largest violation of rows and bounds at `x`, relative to `1 + |b|`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, act) in self.activities(x).into_iter().enumerate() {
            let b = self.rhs[i];
            let v = match self.senses[i] {
                RowSense::Le => act - b,
                RowSense::Ge => b - act,
                RowSense::Eq => (act - b).abs(),
            };
            worst = worst.max(v / (1.0 + b.abs()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max((lo - x[j]) / (1.0 + lo.abs()));
            if hi.is_finite() {
                worst = worst.max((x[j] - hi) / (1.0 + hi.abs()));
            }
        }
        worst
    }
}

/// Sparse row, sense, shifted right-hand side, originating row.
type ShiftedRow = (Vec<(usize, f64)>, RowSense, f64, Option<usize>);

pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    solve_with(problem, &SolveOptions::default())
}

pub fn solve_with(problem: &LpProblem, opts: &SolveOptions) -> Result<LpSolution> {
    problem.validate()?;
    let std = StandardForm::build(problem);
    if let Some(status) = std.trivially_infeasible {
        return Ok(empty_solution(status));
    }
    let mut tab = Tableau::new(&std, opts);
    let status = tab.run()?;
    if opts.dump_tableau {
        eprint!("{}", tab.dump());
    }
    if status != LpStatus::Optimal {
        return Ok(LpSolution { iterations: tab.iterations, ..empty_solution(status) });
    }
    Ok(tab.extract(&std, problem))
}

fn empty_solution(status: LpStatus) -> LpSolution {
    LpSolution {
        status,
        x: Vec::new(),
        objective_value: match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            LpStatus::Optimal => 0.0,
        },
        basis: Vec::new(),
        duals: Vec::new(),
        duality_gap: 0.0,
        dual_infeasibility: 0.0,
        complementary_slackness: 0.0,
        iterations: 0,
    }
}

/// `min c.x'`, `A x' = b`, `x' >= 0` with `b >= 0`, scaled so that
/// `max |c| = max |b| = 1`.
struct StandardForm {
    n_struct: usize,
    n_cols: usize,
    /// Row-major, `m x n_cols`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Per standard row: which original row it came from (`None` for bound rows)
    /// and the factor the original row was multiplied by.
    origin: Vec<(Option<usize>, f64)>,
    offset: f64,
    c_scale: f64,
    b_scale: f64,
    trivially_infeasible: Option<LpStatus>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let mut trivially_infeasible = None;

        let mut rows: Vec<ShiftedRow> = Vec::new();
        for (i, row) in p.rows.iter().enumerate() {
            let shift: f64 = row.iter().map(|&(j, v)| v * p.bounds[j].0).sum();
            rows.push((row.clone(), p.senses[i], p.rhs[i] - shift, Some(i)));
        }
        for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
            if hi.is_finite() {
                if hi < lo {
                    trivially_infeasible = Some(LpStatus::Infeasible);
                }
                rows.push((vec![(j, 1.0)], RowSense::Le, hi - lo, None));
            }
        }
        let offset: f64 = p.objective.iter().zip(&p.bounds).map(|(c, (lo, _))| c * lo).sum();

        let n_slack = rows.iter().filter(|r| r.1 != RowSense::Eq).count();
        let n_cols = n + n_slack;
        let m = rows.len();
        let mut a = vec![0.0; m * n_cols];
        let mut b = vec![0.0; m];
        let mut origin = Vec::with_capacity(m);
        let mut slack = n;
        for (i, (entries, sense, rhs, orig)) in rows.into_iter().enumerate() {
            for (j, v) in entries {
                a[i * n_cols + j] += v;
            }
            match sense {
                RowSense::Le => {
                    a[i * n_cols + slack] = 1.0;
                    slack += 1;
                }
                RowSense::Ge => {
                    a[i * n_cols + slack] = -1.0;
                    slack += 1;
                }
                RowSense::Eq => {}
            }
            let mut factor = 1.0;
            b[i] = rhs;
            if rhs < 0.0 {
                factor = -1.0;
                b[i] = -rhs;
                for v in &mut a[i * n_cols..(i + 1) * n_cols] {
                    *v = -*v;
                }
            }
            origin.push((orig, factor));
        }

        let c_scale = p.objective.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let c_scale = if c_scale > 0.0 { c_scale } else { 1.0 };
        let b_scale = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let b_scale = if b_scale > 0.0 { b_scale } else { 1.0 };
        let mut c = vec![0.0; n_cols];
        for j in 0..n {
            c[j] = p.objective[j] / c_scale;
        }
        for v in &mut b {
            *v /= b_scale;
        }

        StandardForm { n_struct: n, n_cols, a, b, c, origin, offset, c_scale, b_scale, trivially_infeasible }
    }

    fn rows(&self) -> usize {
        self.b.len()
    }
}

struct Tableau<'a> {
    std: &'a StandardForm,
    opts: &'a SolveOptions,
    m: usize,
    /// Structural plus slack columns, then artificials.
    n_total: usize,
    width: usize,
    t: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Rows removed as redundant after phase one.
    dead: Vec<bool>,
    /// Row carrying each artificial column.
    art_rows: Vec<usize>,
    phase_one: bool,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(std: &'a StandardForm, opts: &'a SolveOptions) -> Self {
        let m = std.rows();
        let nc = std.n_cols;

        // Crash basis: any column with a single positive entry in an uncovered row.
        let mut basis = vec![usize::MAX; m];
        let mut row_scale = vec![1.0; m];
        let order: Vec<usize> = (std.n_struct..nc).chain(0..std.n_struct).collect();
        for j in order {
            let mut hit = None;
            let mut count = 0;
            for i in 0..m {
                let v = std.a[i * nc + j];
                if v != 0.0 {
                    count += 1;
                    hit = Some((i, v));
                }
            }
            if count == 1 {
                let (i, v) = hit.unwrap();
                if v > 0.0 && basis[i] == usize::MAX {
                    basis[i] = j;
                    row_scale[i] = 1.0 / v;
                }
            }
        }
        let missing: Vec<usize> = (0..m).filter(|&i| basis[i] == usize::MAX).collect();
        let n_art = missing.len();
        let n_total = nc + n_art;
        let width = n_total + 1;
        let mut t = vec![0.0; m * width];
        for i in 0..m {
            let s = row_scale[i];
            for j in 0..nc {
                t[i * width + j] = std.a[i * nc + j] * s;
            }
            t[i * width + n_total] = std.b[i] * s;
        }
        for (k, &i) in missing.iter().enumerate() {
            t[i * width + nc + k] = 1.0;
            basis[i] = nc + k;
        }
        let phase_one = n_art > 0;
        let mut cost = vec![0.0; n_total];
        if phase_one {
            for k in 0..n_art {
                cost[nc + k] = 1.0;
            }
        } else {
            cost[..nc].copy_from_slice(&std.c);
        }
        let mut tab = Tableau {
            std,
            opts,
            m,
            n_total,
            width,
            t,
            d: vec![0.0; width],
            cost,
            basis,
            dead: vec![false; m],
            art_rows: missing,
            phase_one,
            bland: false,
            degenerate_run: 0,
            iterations: 0,
            since_refactor: 0,
        };
        tab.recompute_reduced_costs();
        tab
    }

    fn recompute_reduced_costs(&mut self) {
        let w = self.width;
        let mut d = vec![0.0; w];
        d[..self.n_total].copy_from_slice(&self.cost);
        for i in 0..self.m {
            if self.dead[i] {
                continue;
            }
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    d[j] -= cb * self.t[i * w + j];
                }
            }
        }
        self.d = d;
    }

    fn run(&mut self) -> Result<LpStatus> {
        let limit = self.opts.max_iterations.unwrap_or(50 * (self.m + self.n_total) + 1000);
        if self.phase_one {
            match self.iterate(limit)? {
                LpStatus::Optimal => {}
                other => return Ok(other),
            }
            // objective of phase one is -d[rhs]
            let infeas = -self.d[self.n_total];
            if infeas > FEAS_TOL * (1.0 + self.m as f64).sqrt() {
                return Ok(LpStatus::Infeasible);
            }
            self.expel_artificials();
            self.phase_one = false;
            self.bland = false;
            self.degenerate_run = 0;
            self.cost = vec![0.0; self.n_total];
            self.cost[..self.std.n_cols].copy_from_slice(&self.std.c);
            self.recompute_reduced_costs();
        }
        self.iterate(limit)
    }

    fn expel_artificials(&mut self) {
        let nc = self.std.n_cols;
        for r in 0..self.m {
            if self.dead[r] || self.basis[r] < nc {
                continue;
            }
            let w = self.width;
            let pick = (0..nc).filter(|&j| self.t[r * w + j].abs() > PIVOT_TOL).max_by(|&a, &b| {
                self.t[r * w + a].abs().partial_cmp(&self.t[r * w + b].abs()).unwrap()
            });
            match pick {
                Some(j) => self.pivot(r, j),
                None => {
                    self.dead[r] = true;
                    for j in 0..w {
                        self.t[r * w + j] = 0.0;
                    }
                }
            }
        }
    }

    fn entering(&self) -> Option<usize> {
        let limit = if self.phase_one { self.n_total } else { self.std.n_cols };
        if self.bland {
            (0..limit).find(|&j| self.d[j] < -OPT_TOL)
        } else {
            let mut best = None;
            let mut best_val = -OPT_TOL;
            for j in 0..limit {
                if self.d[j] < best_val {
                    best_val = self.d[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, col: usize) -> Option<(usize, f64)> {
        let w = self.width;
        let rhs = self.n_total;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            if self.dead[i] {
                continue;
            }
            let a = self.t[i * w + col];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.t[i * w + rhs].max(0.0) / a;
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br);
                    if ratio < br && !tie {
                        Some((i, ratio))
                    } else if tie {
                        let better = if self.bland {
                            self.basis[i] < self.basis[bi]
                        } else {
                            a > self.t[bi * w + col]
                        };
                        if better { Some((i, ratio.min(br))) } else { Some((bi, br.min(ratio))) }
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best
    }

    fn iterate(&mut self, limit: usize) -> Result<LpStatus> {
        loop {
            let Some(col) = self.entering() else {
                return Ok(LpStatus::Optimal);
            };
            let Some((row, ratio)) = self.leaving(col) else {
                return Ok(LpStatus::Unbounded);
            };
            if ratio <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run >= self.opts.degeneracy_limit {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(row, col);
            self.iterations += 1;
            self.since_refactor += 1;
            if self.iterations > limit {
                return Err(Error::NumericalBreakdown(format!("simplex iteration limit {limit} exceeded")));
            }
            if self.since_refactor >= self.opts.refactor_every.max(self.m) {
                self.refactor()?;
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.t[r * w + c];
        let inv = 1.0 / piv;
        for j in 0..w {
            self.t[r * w + j] *= inv;
        }
        self.t[r * w + c] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                row[c] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        let f = self.d[c];
        if f != 0.0 {
            for (x, p) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * p;
            }
            self.d[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Rebuild `B^{-1} [A | b]` from the original data for the current basis.
    fn refactor(&mut self) -> Result<()> {
        self.since_refactor = 0;
        let live: Vec<usize> = (0..self.m).filter(|&i| !self.dead[i]).collect();
        let k = live.len();
        if k == 0 {
            return Ok(());
        }
        let entry = |i: usize, j: usize| -> f64 {
            if j < self.std.n_cols {
                self.std.a[i * self.std.n_cols + j]
            } else if self.art_rows[j - self.std.n_cols] == i {
                1.0
            } else {
                0.0
            }
        };
        let bmat = DMatrix::from_fn(k, k, |r, s| entry(live[r], self.basis[live[s]]));
        let lu = bmat.lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..k).map(|i| u[(i, i)].abs()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if dmin == 0.0 || dmax / dmin > COND_LIMIT {
            return Err(Error::NumericalBreakdown(format!(
                "basis condition estimate {:e} exceeds {:e}",
                if dmin == 0.0 { f64::INFINITY } else { dmax / dmin },
                COND_LIMIT
            )));
        }
        let w = self.width;
        let mut rhs = DMatrix::zeros(k, w);
        for (r, &i) in live.iter().enumerate() {
            for j in 0..self.n_total {
                rhs[(r, j)] = entry(i, j);
            }
            rhs[(r, self.n_total)] = self.std.b[i];
        }
        let Some(sol) = lu.solve(&rhs) else {
            return Err(Error::NumericalBreakdown("singular basis during refactorisation".into()));
        };
        // row s of the solution belongs to the basic variable of live row s
        for (s, &i) in live.iter().enumerate() {
            for j in 0..w {
                self.t[i * w + j] = sol[(s, j)];
            }
        }
        self.recompute_reduced_costs();
        Ok(())
    }

    fn extract(&self, std: &StandardForm, problem: &LpProblem) -> LpSolution {
        let w = self.width;
        let nc = std.n_cols;
        let mut xs = vec![0.0; nc];
        for i in 0..self.m {
            if !self.dead[i] && self.basis[i] < nc {
                xs[self.basis[i]] = self.t[i * w + self.n_total].max(0.0);
            }
        }
        let x: Vec<f64> =
            (0..std.n_struct).map(|j| problem.bounds[j].0 + xs[j] * std.b_scale).collect();
        let objective_value: f64 = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

        // Duals from B^T y = c_B on the live rows of the scaled standard form.
        let live: Vec<usize> = (0..self.m).filter(|&i| !self.dead[i]).collect();
        let k = live.len();
        let mut y_std = vec![0.0; self.m];
        if k > 0 {
            let bt = DMatrix::from_fn(k, k, |r, s| {
                let j = self.basis[live[r]];
                if j < nc { std.a[live[s] * nc + j] } else { 0.0 }
            });
            let cb: Vec<f64> = live.iter().map(|&i| {
                let j = self.basis[i];
                if j < nc { std.c[j] } else { 0.0 }
            }).collect();
            if let Some(y) = crate::linalg::solve(&bt, &cb) {
                for (r, &i) in live.iter().enumerate() {
                    y_std[i] = y[r];
                }
            }
        }
        let mut dual_infeasibility: f64 = 0.0;
        let mut complementary: f64 = 0.0;
        for j in 0..nc {
            let mut dj = std.c[j];
            for i in 0..self.m {
                dj -= std.a[i * nc + j] * y_std[i];
            }
            dual_infeasibility = dual_infeasibility.max(-dj);
            complementary += (xs[j] * dj).abs();
        }
        let primal_std: f64 = (0..nc).map(|j| std.c[j] * xs[j]).sum();
        let dual_std: f64 = (0..self.m).map(|i| std.b[i] * y_std[i]).sum();

        let mut duals = vec![0.0; problem.num_rows()];
        for (i, &(orig, factor)) in std.origin.iter().enumerate() {
            if let Some(r) = orig {
                duals[r] = y_std[i] * factor * std.c_scale;
            }
        }
        let unit = std.c_scale * std.b_scale;
        let _ = std.offset;
        LpSolution {
            status: LpStatus::Optimal,
            x,
            objective_value,
            basis: live.iter().map(|&i| self.basis[i]).filter(|&j| j < nc).collect(),
            duals,
            duality_gap: (primal_std - dual_std) * unit,
            dual_infeasibility: dual_infeasibility * std.c_scale,
            complementary_slackness: complementary * unit,
            iterations: self.iterations,
        }
    }

    fn dump(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "tableau {} x {} (phase {})", self.m, self.width, if self.phase_one { 1 } else { 2 });
        for i in 0..self.m {
            let _ = write!(s, "x{:<5}|", self.basis[i]);
            for j in 0..self.width {
                let _ = write!(s, " {:>10.4}", self.t[i * self.width + j]);
            }
            let _ = writeln!(s);
        }
        let _ = write!(s, "d     |");
        for v in &self.d {
            let _ = write!(s, " {:>10.4}", v);
        }
        let _ = writeln!(s);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lower_bound() {
        let mut p = LpProblem::minimize(vec![1.0]);
        p.add_row(&[1.0], RowSense::Ge, 1.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_variable_example() {
        // min x + y, x + y >= 2, x <= 0.5
        let mut p = LpProblem::minimize(vec![1.0, 1.0]);
        p.add_row(&[1.0, 1.0], RowSense::Ge, 2.0);
        p.add_row(&[1.0, 0.0], RowSense::Le, 0.5);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut p = LpProblem::minimize(vec![1.0]);
        p.add_row(&[1.0], RowSense::Ge, 1.0);
        p.add_row(&[1.0], RowSense::Le, 0.0);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let mut p = LpProblem::minimize(vec![-1.0, 0.0]);
        p.add_row(&[1.0, -1.0], RowSense::Le, 1.0);
        assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn variable_bounds_shift() {
        // min -x, 1 <= x <= 3
        let mut p = LpProblem::minimize(vec![-1.0]);
        p.set_bounds(0, 1.0, 3.0);
        let s = solve(&p).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.objective_value + 3.0).abs() < 1e-12);
    }

    #[test]
    fn free_variable_is_rejected() {
        let mut p = LpProblem::minimize(vec![1.0]);
        p.set_bounds(0, f64::NEG_INFINITY, 1.0);
        assert!(matches!(solve(&p), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice; min x
        let mut p = LpProblem::minimize(vec![1.0, 0.0]);
        p.add_row(&[1.0, 1.0], RowSense::Eq, 1.0);
        p.add_row(&[2.0, 2.0], RowSense::Eq, 2.0);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!(s.objective_value.abs() < 1e-12);
        assert!(s.dual_infeasibility < 1e-9);
    }

    #[test]
    fn duals_certify_optimum() {
        // min 2x + 3y, x + y >= 4, x + 3y >= 6
        let mut p = LpProblem::minimize(vec![2.0, 3.0]);
        p.add_row(&[1.0, 1.0], RowSense::Ge, 4.0);
        p.add_row(&[1.0, 3.0], RowSense::Ge, 6.0);
        let s = solve(&p).unwrap();
        assert!((s.objective_value - 9.0).abs() < 1e-10);
        let dual_obj: f64 = s.duals.iter().zip([4.0, 6.0]).map(|(y, b)| y * b).sum();
        assert!((dual_obj - s.objective_value).abs() < 1e-9);
        assert!(s.complementary_slackness < 1e-7);
    }

    #[test]
    fn tableau_dump_flag() {
        let mut p = LpProblem::minimize(vec![1.0]);
        p.add_row(&[1.0], RowSense::Ge, 1.0);
        let opts = SolveOptions { dump_tableau: true, ..Default::default() };
        assert_eq!(solve_with(&p, &opts).unwrap().status, LpStatus::Optimal);
    }
}
