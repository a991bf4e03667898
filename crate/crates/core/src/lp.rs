//! Dense linear programming with a primal simplex (Bland's rule), plus the
//! two game-theoretic reductions built on it: the zero-sum matrix game and
//! the utilitarian correlated equilibrium.
//!
//! Problems are stated in the inequality form
//!
//! ```text
//! maximize    c·x
//! subject to  A x <= b
//!             x >= 0
//! ```
//!
//! When some `b_i < 0` an auxiliary phase locates a feasible basis first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal_form::NormalFormGame;

/// Feasibility / optimality tolerance used by the pivoting rules.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Default pivot budget before giving up with [`LpStatus::IterationCap`].
/// Distinct right-hand-side offsets that break degenerate ties while
/// pivoting; removed again once an optimal basis is found.
fn perturbation(row: usize) -> f64 {
    1e-7 * (1.0 + (row as f64 * 0.618_033_988_749_895).fract())
}

/// Tableau entries smaller than this after a pivot are flushed to zero.
const ROUNDOFF: f64 = 1e-12;

pub const DEFAULT_ITERATION_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationCap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpReport {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Shadow prices of the `A x <= b` rows (only meaningful when optimal).
    pub dual: Vec<f64>,
    pub status: LpStatus,
    pub iterations: usize,
}

/// `maximize c·x  s.t.  A x <= b, x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    bounds: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, bounds: Vec<f64>) -> Result<Self> {
        if constraints.len() != bounds.len() {
            return Err(Error::InvalidInput(format!(
                "{} constraint rows but {} bounds",
                constraints.len(),
                bounds.len()
            )));
        }
        if let Some(row) = constraints.iter().find(|r| r.len() != objective.len()) {
            return Err(Error::InvalidInput(format!(
                "constraint row has {} coefficients, expected {}",
                row.len(),
                objective.len()
            )));
        }
        let all_finite = objective
            .iter()
            .chain(bounds.iter())
            .chain(constraints.iter().flatten())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("non-finite LP coefficient".into()));
        }
        Ok(Self {
            objective,
            constraints,
            bounds,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.bounds.len()
    }

    pub fn solve(&self) -> LpReport {
        self.solve_with_cap(DEFAULT_ITERATION_CAP)
    }

    pub fn solve_with_cap(&self, cap: usize) -> LpReport {
        Tableau::from_program(self).run(cap)
    }

    /// Checks `A x <= b + tol` and `x >= -tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|&v| v >= -tol)
            && self
                .constraints
                .iter()
                .zip(&self.bounds)
                .all(|(row, &b)| dot(row, x) <= b + tol)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense simplex tableau.
///
/// Row `i < m` reads `sum_j t[i][j] x_j = rhs_i` with `basis[i]` the basic
/// variable of that row. The last row holds reduced costs `d_j` and, in the
/// rhs cell, the negated objective constant.
struct Tableau {
    m: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    num_original: usize,
    /// Column of the auxiliary phase-one variable, if present.
    aux: Option<usize>,
    /// Unperturbed right-hand side.
    bounds: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn from_program(lp: &LinearProgram) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_vars();
        let needs_aux = lp.bounds.iter().any(|&b| b < 0.0);
        let num_cols = n + m + usize::from(needs_aux);
        let width = num_cols + 1;
        let mut cells = vec![0.0; (m + 1) * width];
        for i in 0..m {
            let row = &mut cells[i * width..(i + 1) * width];
            row[..n].copy_from_slice(&lp.constraints[i]);
            row[n + i] = 1.0;
            if needs_aux {
                row[n + m] = -1.0;
            }
            row[num_cols] = lp.bounds[i] + perturbation(i);
        }
        let obj = &mut cells[m * width..];
        obj[..n].copy_from_slice(&lp.objective);
        Tableau {
            m,
            width,
            cells,
            basis: (n..n + m).collect(),
            num_original: n,
            aux: needs_aux.then_some(n + m),
            bounds: lp.bounds.clone(),
            iterations: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.cells[i * self.width + self.width - 1]
    }

    fn num_cols(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let p = self.at(r, e);
        {
            let row = &mut self.cells[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[e] = 1.0;
        }
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let mut eliminate = |row: &mut [f64]| {
            let f = row[e];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * pv;
                    if v.abs() < ROUNDOFF {
                        *v = 0.0;
                    }
                }
                row[e] = 0.0;
            }
        };
        before.chunks_mut(w).for_each(&mut eliminate);
        after.chunks_mut(w).for_each(&mut eliminate);
        self.basis[r] = e;
        self.iterations += 1;
    }

    /// Bland's rule picks the entering column (lowest index with positive reduced cost).
    fn optimize(&mut self, cap: usize, allowed: impl Fn(usize) -> bool) -> LpStatus {
        loop {
            let obj_row = self.m;
            let entering =
                (0..self.num_cols()).find(|&j| allowed(j) && self.at(obj_row, j) > FEASIBILITY_TOL);
            let Some(e) = entering else {
                return LpStatus::Optimal;
            };
            if self.iterations >= cap {
                return LpStatus::IterationCap;
            }
            // Minimum ratio; ties go to the lowest basic index.
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, e);
                if a > FEASIBILITY_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leaving {
                        None => true,
                        Some((best, best_ratio)) => {
                            ratio < best_ratio
                                || (ratio == best_ratio && self.basis[i] < self.basis[best])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, e),
                None => return LpStatus::Unbounded,
            }
        }
    }

    /// Runs phase one with the auxiliary variable; returns false if infeasible.
    fn phase_one(&mut self, cap: usize) -> std::result::Result<(), LpStatus> {
        let Some(aux) = self.aux else { return Ok(()) };
        let w = self.width;
        let m = self.m;
        // Swap in the phase-one objective: maximize -aux.
        let original: Vec<f64> = self.cells[m * w..].to_vec();
        for v in &mut self.cells[m * w..] {
            *v = 0.0;
        }
        self.cells[m * w + aux] = -1.0;
        let most_negative = (0..m)
            .min_by(|&a, &b| self.rhs(a).total_cmp(&self.rhs(b)).then(a.cmp(&b)))
            .expect("phase one requires a constraint row");
        self.pivot(most_negative, aux);
        match self.optimize(cap, |_| true) {
            LpStatus::Optimal => {}
            other => return Err(other),
        }
        // Objective constant is stored negated: rhs of obj row = -(-aux) = aux level.
        if self.rhs(m) > 1e-7 {
            return Err(LpStatus::Infeasible);
        }
        if let Some(r) = self.basis.iter().position(|&b| b == aux) {
            // Degenerate: drive the auxiliary variable out of the basis.
            if let Some(e) =
                (0..self.num_cols()).find(|&j| j != aux && self.at(r, j).abs() > FEASIBILITY_TOL)
            {
                self.pivot(r, e);
            }
        }
        // Restore the real objective, expressed over the current nonbasic columns.
        for v in &mut self.cells[m * w..] {
            *v = 0.0;
        }
        for j in 0..self.num_original {
            self.cells[m * w + j] = original[j];
        }
        for i in 0..m {
            let b = self.basis[i];
            let cb = self.cells[m * w + b];
            if cb != 0.0 {
                for j in 0..w {
                    let v = self.cells[i * w + j];
                    self.cells[m * w + j] -= cb * v;
                }
                self.cells[m * w + b] = 0.0;
            }
        }
        self.cells[m * w + aux] = 0.0;
        Ok(())
    }

    /// Replaces the perturbed right-hand side by `B^{-1} b` for the true `b`;
    /// the slack columns hold `B^{-1}`.
    fn restore_bounds(&mut self) {
        let n = self.num_original;
        let w = self.width;
        for i in 0..=self.m {
            let row = &self.cells[i * w..(i + 1) * w];
            let v: f64 = self
                .bounds
                .iter()
                .enumerate()
                .map(|(k, b)| row[n + k] * b)
                .sum();
            self.cells[i * w + w - 1] = if v.abs() < ROUNDOFF { 0.0 } else { v };
        }
    }

    /// Dual simplex pivots until the restored basis is primal feasible again.
    fn dual_cleanup(&mut self, cap: usize, allowed: impl Fn(usize) -> bool) -> LpStatus {
        let obj_row = self.m;
        loop {
            let leaving = (0..self.m)
                .filter(|&i| self.rhs(i) < -FEASIBILITY_TOL)
                .min_by_key(|&i| self.basis[i]);
            let Some(r) = leaving else {
                return LpStatus::Optimal;
            };
            if self.iterations >= cap {
                return LpStatus::IterationCap;
            }
            let mut entering: Option<(usize, f64)> = None;
            for j in (0..self.num_cols()).filter(|&j| allowed(j)) {
                let a = self.at(r, j);
                if a < -FEASIBILITY_TOL {
                    let ratio = self.at(obj_row, j).min(0.0) / a;
                    if entering.map_or(true, |(_, best)| ratio < best) {
                        entering = Some((j, ratio));
                    }
                }
            }
            match entering {
                Some((e, _)) => self.pivot(r, e),
                None => return LpStatus::Infeasible,
            }
        }
    }

    fn run(mut self, cap: usize) -> LpReport {
        let n = self.num_original;
        let m = self.m;
        if let Err(status) = self.phase_one(cap) {
            return LpReport {
                objective: f64::NAN,
                primal: vec![0.0; n],
                dual: vec![0.0; m],
                status,
                iterations: self.iterations,
            };
        }
        let aux = self.aux;
        let mut status = self.optimize(cap, |j| Some(j) != aux);
        if status == LpStatus::Optimal {
            self.restore_bounds();
            status = self.dual_cleanup(cap, |j| Some(j) != aux);
        }
        let mut primal = vec![0.0; n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < n {
                primal[b] = self.rhs(i);
            }
        }
        let dual = (0..m).map(|i| -self.at(m, n + i)).collect();
        LpReport {
            objective: -self.rhs(m),
            primal,
            dual,
            status,
            iterations: self.iterations,
        }
    }
}

/// Row-major payoff matrix for the row player of a two-player zero-sum game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(
                "matrix needs at least one row and one column".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The column player's view: `-Mᵀ`.
    pub fn negated_transpose(&self) -> Matrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(-self.get(r, c));
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Expected payoff of `row` mixed against pure column `c`.
    pub fn row_payoff_against(&self, row: &MixedStrategy, c: usize) -> f64 {
        (0..self.rows).map(|r| row.0[r] * self.get(r, c)).sum()
    }

    /// Expected payoff of pure row `r` against mixed `col`.
    pub fn payoff_against_col(&self, r: usize, col: &MixedStrategy) -> f64 {
        (0..self.cols).map(|c| col.0[c] * self.get(r, c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy(pub Vec<f64>);

impl MixedStrategy {
    pub fn pure(len: usize, action: usize) -> Self {
        let mut p = vec![0.0; len];
        p[action] = 1.0;
        MixedStrategy(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.0.iter().all(|&p| (-tol..=1.0 + tol).contains(&p))
            && (self.0.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    /// Clamps tiny negatives from pivoting noise and renormalizes.
    fn from_weights(weights: &[f64]) -> Self {
        let clean: Vec<f64> = weights.iter().map(|&w| w.max(0.0)).collect();
        let total: f64 = clean.iter().sum();
        if total <= 0.0 {
            return MixedStrategy::pure(weights.len(), 0);
        }
        MixedStrategy(clean.into_iter().map(|w| w / total).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroSumSolution {
    pub value: f64,
    pub row: MixedStrategy,
    pub col: MixedStrategy,
}

fn status_error(what: &str, status: LpStatus) -> Error {
    Error::Solver(format!("{what}: simplex ended with status {status:?}"))
}

/// Security value and optimal mixed strategies of the zero-sum game `m`.
///
/// Weakly dominated rows and columns are removed first (exact comparisons, so
/// the value is unchanged). The remaining payoffs are rescaled into `[1, 2]`
/// and the column player's normalized program `max 1·y s.t. M' y <= 1` is
/// solved; the row player's strategy is read off the shadow prices.
pub fn solve_zero_sum(m: &Matrix) -> Result<ZeroSumSolution> {
    let min = m.entries.iter().copied().fold(f64::INFINITY, f64::min);
    let max = m.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(ZeroSumSolution {
            value: min,
            row: MixedStrategy::pure(m.rows, 0),
            col: MixedStrategy::pure(m.cols, 0),
        });
    }
    if let Some(solution) = pure_saddle_point(m) {
        return Ok(solution);
    }
    let (rows, cols) = undominated(m);
    let range = max - min;
    let constraints: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| {
            cols.iter()
                .map(|&c| (m.get(r, c) - min) / range + 1.0)
                .collect()
        })
        .collect();
    let lp = LinearProgram::new(vec![1.0; cols.len()], constraints, vec![1.0; rows.len()])?;
    let report = lp.solve();
    if report.status != LpStatus::Optimal {
        return Err(status_error("zero-sum game", report.status));
    }
    let z = report.objective;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Solver(format!(
            "zero-sum game: degenerate objective {z}"
        )));
    }
    let expand = |kept: &[usize], weights: &[f64], len: usize| {
        let mut full = vec![0.0; len];
        for (&k, &w) in kept.iter().zip(weights) {
            full[k] = w;
        }
        MixedStrategy::from_weights(&full)
    };
    Ok(ZeroSumSolution {
        value: (1.0 / z - 1.0) * range + min,
        row: expand(&rows, &report.dual, m.rows),
        col: expand(&cols, &report.primal, m.cols),
    })
}

/// Iterated elimination of weakly dominated strategies; among duplicates the
/// lowest index survives.
fn undominated(m: &Matrix) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..m.rows).collect();
    let mut cols: Vec<usize> = (0..m.cols).collect();
    loop {
        let before = rows.len() + cols.len();
        let dominated_row = |r: usize, rows: &[usize], cols: &[usize]| {
            rows.iter().any(|&o| {
                o != r
                    && cols.iter().all(|&c| m.get(o, c) >= m.get(r, c))
                    && (o < r || cols.iter().any(|&c| m.get(o, c) > m.get(r, c)))
            })
        };
        if let Some(pos) = rows.iter().position(|&r| dominated_row(r, &rows, &cols)) {
            rows.remove(pos);
        }
        let dominated_col = |c: usize, rows: &[usize], cols: &[usize]| {
            cols.iter().any(|&o| {
                o != c
                    && rows.iter().all(|&r| m.get(r, o) <= m.get(r, c))
                    && (o < c || rows.iter().any(|&r| m.get(r, o) < m.get(r, c)))
            })
        };
        if let Some(pos) = cols.iter().position(|&c| dominated_col(c, &rows, &cols)) {
            cols.remove(pos);
        }
        if rows.len() + cols.len() == before {
            return (rows, cols);
        }
    }
}

/// Exact answer when the pure maxmin equals the pure minmax.
fn pure_saddle_point(m: &Matrix) -> Option<ZeroSumSolution> {
    let (best_row, maxmin) = (0..m.rows)
        .map(|r| {
            (
                r,
                (0..m.cols)
                    .map(|c| m.get(r, c))
                    .fold(f64::INFINITY, f64::min),
            )
        })
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let (best_col, minmax) = (0..m.cols)
        .map(|c| {
            (
                c,
                (0..m.rows)
                    .map(|r| m.get(r, c))
                    .fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    (maxmin == minmax).then(|| ZeroSumSolution {
        value: maxmin,
        row: MixedStrategy::pure(m.rows, best_row),
        col: MixedStrategy::pure(m.cols, best_col),
    })
}

/// First welfare-maximizing joint action from which no player gains by a
/// unilateral deviation. Its point mass attains the welfare upper bound, so it
/// is an optimal utilitarian correlated equilibrium.
fn welfare_maximizing_pure_equilibrium(g: &NormalFormGame, welfare: &[f64]) -> Option<usize> {
    let space = g.action_space();
    let best = welfare.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut profile = vec![0; g.num_players()];
    (0..welfare.len())
        .filter(|&a| welfare[a] == best)
        .find(|&a| {
            space.decode_into(a, &mut profile);
            (0..g.num_players()).all(|i| {
                let base = a - profile[i] * space.stride(i);
                let own = g.utility(a, i);
                (0..g.action_counts()[i])
                    .all(|alt| g.utility(base + alt * space.stride(i), i) <= own)
            })
        })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelatedEquilibrium {
    /// Probability of each joint action, in the game's joint-action order.
    pub dist: Vec<f64>,
    /// Expected utility of each player under `dist`.
    pub values: Vec<f64>,
}

/// Correlated equilibrium maximizing the sum of expected utilities.
///
/// The normalization `sum p = 1` is relaxed to `sum p <= 1` with a strictly
/// positive (shifted) welfare objective; the incentive constraints are
/// homogeneous, so any optimum saturates the normalization and the origin is
/// a feasible starting vertex.
pub fn solve_utilitarian_ce(g: &NormalFormGame) -> Result<CorrelatedEquilibrium> {
    let n = g.num_players();
    let joint = g.num_joint();
    let space = g.action_space();
    let welfare: Vec<f64> = (0..joint).map(|a| g.payoffs(a).iter().sum()).collect();
    if let Some(a) = welfare_maximizing_pure_equilibrium(g, &welfare) {
        let mut dist = vec![0.0; joint];
        dist[a] = 1.0;
        return Ok(CorrelatedEquilibrium {
            dist,
            values: g.payoffs(a).to_vec(),
        });
    }
    let min_welfare = welfare.iter().copied().fold(f64::INFINITY, f64::min);
    let max_welfare = welfare.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if max_welfare > min_welfare {
        max_welfare - min_welfare
    } else {
        1.0
    };
    let objective: Vec<f64> = welfare
        .iter()
        .map(|w| (w - min_welfare) / spread + 1.0)
        .collect();

    let mut constraints = Vec::new();
    let mut bounds = Vec::new();
    constraints.push(vec![1.0; joint]);
    bounds.push(1.0);
    let mut profile = vec![0; n];
    for i in 0..n {
        let k = g.action_counts()[i];
        for from in 0..k {
            for to in 0..k {
                if from == to {
                    continue;
                }
                let mut row = vec![0.0; joint];
                for (a, coeff) in row.iter_mut().enumerate() {
                    space.decode_into(a, &mut profile);
                    if profile[i] != from {
                        continue;
                    }
                    let deviated = a - from * space.stride(i) + to * space.stride(i);
                    *coeff = g.utility(deviated, i) - g.utility(a, i);
                }
                let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if scale == 0.0 {
                    continue;
                }
                row.iter_mut().for_each(|v| *v /= scale);
                constraints.push(row);
                bounds.push(0.0);
            }
        }
    }
    let lp = LinearProgram::new(objective, constraints, bounds)?;
    let report = lp.solve();
    if report.status != LpStatus::Optimal {
        return Err(status_error("correlated equilibrium", report.status));
    }
    let dist = MixedStrategy::from_weights(&report.primal).0;
    let values = (0..n)
        .map(|i| (0..joint).map(|a| dist[a] * g.utility(a, i)).sum())
        .collect();
    Ok(CorrelatedEquilibrium { dist, values })
}
