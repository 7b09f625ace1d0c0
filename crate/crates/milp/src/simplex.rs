//! Bounded-variable revised simplex.
//!
//! Rows are stored as `a_i x + s_i = rhs_i` with one logical (slack) column
//! per row whose bounds encode the row sense: `[0, inf)` for `<=`,
//! `(-inf, 0]` for `>=` and `[0, 0]` for `=`. Structural variables always
//! carry finite bounds. The basis inverse is kept in product form (a file of
//! eta columns) and rebuilt from scratch every [`REFACTOR_EVERY`] pivots.
//!
//! Two algorithms share the representation:
//! * primal simplex, with a sum-of-infeasibilities phase one, Dantzig pricing,
//!   a Harris two-pass ratio test, and a switch to Bland's rule after a run of
//!   degenerate pivots;
//! * dual simplex, used to re-optimize after bound changes or appended rows
//!   (the branch-and-bound hot path), with the same anti-cycling fallback.

use std::time::Instant;

use crate::model::{ModelIR, Row, Sense};

const REFACTOR_EVERY: usize = 96;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_STREAK: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration budget ran out or the basis could not be kept
    /// nonsingular; the values must not be trusted.
    NumericFailure,
    TimeLimit,
    /// The dual simplex proved the optimum exceeds the cutoff set with
    /// [`SimplexEngine::set_cutoff`]; the point is not optimal.
    Cutoff,
}

/// Result of an LP solve. `duals` has one entry per row with the convention
/// `d_j = c_j - a_j^T y`; in a minimization a binding `<=` row has `y <= 0`
/// and a binding `>=` row has `y >= 0`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

/// Solve the LP relaxation of `model` (integrality flags are ignored).
pub fn solve_lp(model: &ModelIR) -> LpSolution {
    solve_lp_until(model, None)
}

pub fn solve_lp_until(model: &ModelIR, deadline: Option<Instant>) -> LpSolution {
    let mut engine = SimplexEngine::new(model);
    let status = engine.solve(deadline);
    engine.solution(status, model.objective_offset)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarState {
    Basic,
    Lower,
    Upper,
}

/// Snapshot of basis statuses, one per structural followed by one per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub structural: Vec<VarState>,
    pub logical: Vec<VarState>,
}

struct Eta {
    pivot: usize,
    pivot_value: f64,
    entries: Vec<(usize, f64)>,
}

pub struct SimplexEngine {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    x: Vec<f64>,
    etas: Vec<Eta>,
    pivots_since_refactor: usize,
    needs_refactor: bool,
    iterations: usize,
    work: Vec<f64>,
    cutoff: f64,
}

impl SimplexEngine {
    pub fn new(model: &ModelIR) -> Self {
        let n = model.vars.len();
        let mut engine = SimplexEngine {
            n,
            m: 0,
            cols: vec![Vec::new(); n],
            cost: model.vars.iter().map(|v| v.objective).collect(),
            lb: model.vars.iter().map(|v| v.lower).collect(),
            ub: model.vars.iter().map(|v| v.upper).collect(),
            rhs: Vec::new(),
            state: vec![VarState::Lower; n],
            head: Vec::new(),
            x: model.vars.iter().map(|v| v.lower).collect(),
            etas: Vec::new(),
            pivots_since_refactor: 0,
            needs_refactor: true,
            iterations: 0,
            work: Vec::new(),
            cutoff: f64::INFINITY,
        };
        for row in &model.rows {
            engine.push_row(row);
        }
        engine
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn push_row(&mut self, row: &Row) {
        let i = self.m;
        self.m += 1;
        let mut merged: Vec<(usize, f64)> = row.coeffs.iter().map(|&(v, c)| (v.0, c)).collect();
        merged.sort_by_key(|&(j, _)| j);
        let mut k = 0;
        while k < merged.len() {
            let j = merged[k].0;
            let mut c = 0.0;
            while k < merged.len() && merged[k].0 == j {
                c += merged[k].1;
                k += 1;
            }
            if c != 0.0 {
                self.cols[j].push((i, c));
            }
        }
        let (lo, hi) = match row.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        self.lb.push(lo);
        self.ub.push(hi);
        self.rhs.push(row.rhs);
        self.state.push(VarState::Basic);
        self.x.push(0.0);
        self.head.push(self.n + i);
        self.work.push(0.0);
        self.needs_refactor = true;
    }

    /// Append rows; their slacks enter the basis, so a previously optimal
    /// basis stays dual feasible.
    pub fn add_rows(&mut self, rows: &[Row]) {
        for row in rows {
            self.push_row(row);
        }
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lb[j] = lower;
        self.ub[j] = upper;
        match self.state[j] {
            VarState::Basic => {}
            VarState::Lower => self.x[j] = lower,
            VarState::Upper => self.x[j] = upper,
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j], self.ub[j])
    }

    pub fn basis(&self) -> Basis {
        Basis {
            structural: self.state[..self.n].to_vec(),
            logical: self.state[self.n..].to_vec(),
        }
    }

    /// Install a stored basis. Rows appended after the snapshot get basic
    /// slacks; an inconsistent basis is repaired at the next factorization.
    pub fn set_basis(&mut self, basis: &Basis) {
        for j in 0..self.n {
            self.state[j] = basis.structural.get(j).copied().unwrap_or(VarState::Lower);
        }
        for i in 0..self.m {
            self.state[self.n + i] = basis.logical.get(i).copied().unwrap_or(VarState::Basic);
        }
        for j in 0..self.n + self.m {
            self.fix_nonbasic_side(j);
        }
        self.head = (0..self.n + self.m)
            .filter(|&j| self.state[j] == VarState::Basic)
            .collect();
        self.needs_refactor = true;
    }

    fn fix_nonbasic_side(&mut self, j: usize) {
        match self.state[j] {
            VarState::Lower if self.lb[j] == f64::NEG_INFINITY => self.state[j] = VarState::Upper,
            VarState::Upper if self.ub[j] == f64::INFINITY => self.state[j] = VarState::Lower,
            _ => {}
        }
    }

    /// Objective value (offset excluded) above which the dual simplex may
    /// stop early with [`LpStatus::Cutoff`].
    pub fn set_cutoff(&mut self, cutoff: f64) {
        self.cutoff = cutoff;
    }

    pub fn state(&self, j: usize) -> VarState {
        self.state[j]
    }

    /// Reduced costs of the structural variables under the current basis.
    pub fn reduced_costs(&self) -> Vec<f64> {
        let y = self.phase_two_duals();
        (0..self.n).map(|j| self.reduced_cost(j, &y)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    // ---- linear algebra -------------------------------------------------

    fn ftran(&self, w: &mut [f64]) {
        for eta in &self.etas {
            let wp = w[eta.pivot];
            if wp != 0.0 {
                let q = wp / eta.pivot_value;
                w[eta.pivot] = q;
                for &(i, v) in &eta.entries {
                    w[i] -= v * q;
                }
            }
        }
    }

    fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = y[eta.pivot];
            for &(i, v) in &eta.entries {
                s -= v * y[i];
            }
            y[eta.pivot] = s / eta.pivot_value;
        }
    }

    fn push_eta(&mut self, pivot: usize, w: &[f64]) {
        let entries = w
            .iter()
            .enumerate()
            .filter(|&(i, v)| i != pivot && v.abs() > DROP_TOL)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            pivot,
            pivot_value: w[pivot],
            entries,
        });
    }

    fn load_column(&self, j: usize, w: &mut [f64]) {
        w.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for &(i, v) in &self.cols[j] {
                w[i] = v;
            }
        } else {
            w[j - self.n] = 1.0;
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, v)| v * y[i]).sum()
        } else {
            y[j - self.n]
        }
    }

    /// Rebuild the eta file for the current set of basic variables. Basic
    /// slacks keep their own row; structural columns are pivoted in sparse
    /// order, each on the eligible row with a large entry that the fewest
    /// remaining columns touch. Columns that cannot be pivoted leave the
    /// basis and uncovered rows get their slack back.
    fn refactor(&mut self) {
        self.etas.clear();
        self.pivots_since_refactor = 0;
        self.needs_refactor = false;
        let m = self.m;
        let n = self.n;
        let mut taken = vec![false; m];
        let mut new_head = vec![usize::MAX; m];
        let mut structs: Vec<usize> = Vec::new();
        for j in 0..n + m {
            if self.state[j] != VarState::Basic {
                continue;
            }
            if j >= n {
                taken[j - n] = true;
                new_head[j - n] = j;
            } else {
                structs.push(j);
            }
        }
        let mut row_count = vec![0usize; m];
        for &j in &structs {
            for &(i, _) in &self.cols[j] {
                row_count[i] += 1;
            }
        }
        structs.sort_by_key(|&j| {
            let active = self.cols[j].iter().filter(|&&(i, _)| !taken[i]).count();
            (active, j)
        });
        let mut w = vec![0.0; m];
        for &j in &structs {
            self.load_column(j, &mut w);
            self.ftran(&mut w);
            for &(i, _) in &self.cols[j] {
                row_count[i] -= 1;
            }
            let mut big: f64 = 0.0;
            for i in 0..m {
                if !taken[i] {
                    big = big.max(w[i].abs());
                }
            }
            if big < 1e-7 {
                self.state[j] = if (self.x[j] - self.ub[j]).abs() < (self.x[j] - self.lb[j]).abs() {
                    VarState::Upper
                } else {
                    VarState::Lower
                };
                continue;
            }
            let threshold = 0.1 * big;
            let mut best = usize::MAX;
            for i in 0..m {
                if taken[i] || w[i].abs() < threshold {
                    continue;
                }
                if best == usize::MAX
                    || row_count[i] < row_count[best]
                    || (row_count[i] == row_count[best] && w[i].abs() > w[best].abs())
                {
                    best = i;
                }
            }
            taken[best] = true;
            new_head[best] = j;
            self.push_eta(best, &w);
        }
        for i in 0..m {
            if new_head[i] == usize::MAX {
                let s = n + i;
                self.state[s] = VarState::Basic;
                new_head[i] = s;
            }
        }
        self.head = new_head;
        self.recompute_primal();
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Lower => self.lb[j],
            VarState::Upper => self.ub[j],
            VarState::Basic => self.x[j],
        }
    }

    fn recompute_primal(&mut self) {
        let mut r = self.rhs.clone();
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * v;
                }
            } else {
                r[j - self.n] -= v;
            }
        }
        self.ftran(&mut r);
        for p in 0..self.m {
            self.x[self.head[p]] = r[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] - PRIMAL_TOL {
            self.lb[j] - v
        } else if v > self.ub[j] + PRIMAL_TOL {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    fn is_primal_feasible(&self) -> bool {
        self.head.iter().all(|&b| self.infeasibility(b) == 0.0)
    }

    fn phase_two_duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self
            .head
            .iter()
            .map(|&b| if b < self.n { self.cost[b] } else { 0.0 })
            .collect();
        self.btran(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let c = if j < self.n { self.cost[j] } else { 0.0 };
        c - self.dot_column(j, y)
    }

    fn is_dual_feasible(&self, y: &[f64], tol: f64) -> bool {
        (0..self.n + self.m).all(|j| {
            if self.lb[j] == self.ub[j] {
                return true;
            }
            match self.state[j] {
                VarState::Basic => true,
                VarState::Lower => self.reduced_cost(j, y) >= -tol,
                VarState::Upper => self.reduced_cost(j, y) <= tol,
            }
        })
    }

    // ---- driver ----------------------------------------------------------

    pub fn solve(&mut self, deadline: Option<Instant>) -> LpStatus {
        let budget = 20 * (self.n + self.m) + 20_000;
        let start_iterations = self.iterations;
        if self.needs_refactor {
            self.refactor();
        } else {
            self.recompute_primal();
        }
        let mut tries = 0;
        loop {
            tries += 1;
            let status = if !self.is_primal_feasible()
                && self.is_dual_feasible(&self.phase_two_duals(), 1e-7)
            {
                match self.dual_simplex(deadline, start_iterations + budget) {
                    LpStatus::Optimal => self.primal_simplex(deadline, start_iterations + budget),
                    other => other,
                }
            } else {
                self.primal_simplex(deadline, start_iterations + budget)
            };
            if status != LpStatus::Optimal {
                return status;
            }
            // Confirm on a fresh factorization; drift sends us around again.
            self.refactor();
            let y = self.phase_two_duals();
            if self.is_primal_feasible() && self.is_dual_feasible(&y, 1e-7) {
                return LpStatus::Optimal;
            }
            if tries >= 4 {
                return LpStatus::NumericFailure;
            }
        }
    }

    fn primal_simplex(&mut self, deadline: Option<Instant>, max_iter: usize) -> LpStatus {
        let total = self.n + self.m;
        let mut y = vec![0.0; self.m];
        let mut w = std::mem::take(&mut self.work);
        let mut degenerate = 0usize;
        let mut bland = false;
        let result = loop {
            if self.iterations >= max_iter {
                break LpStatus::NumericFailure;
            }
            if self.iterations % 64 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        break LpStatus::TimeLimit;
                    }
                }
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            // Phase costs: +-1 on infeasible basics, true costs otherwise.
            let mut phase_one = false;
            for p in 0..self.m {
                let b = self.head[p];
                let v = self.x[b];
                y[p] = if v < self.lb[b] - PRIMAL_TOL {
                    phase_one = true;
                    -1.0
                } else if v > self.ub[b] + PRIMAL_TOL {
                    phase_one = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase_one {
                for p in 0..self.m {
                    let b = self.head[p];
                    y[p] = if b < self.n { self.cost[b] } else { 0.0 };
                }
            }
            self.btran(&mut y);

            let mut entering = usize::MAX;
            let mut best = 0.0;
            let mut entering_d = 0.0;
            for j in 0..total {
                let st = self.state[j];
                if st == VarState::Basic || self.lb[j] == self.ub[j] {
                    continue;
                }
                let c = if phase_one || j >= self.n { 0.0 } else { self.cost[j] };
                let d = c - self.dot_column(j, &y);
                let gain = match st {
                    VarState::Lower if d < -DUAL_TOL => -d,
                    VarState::Upper if d > DUAL_TOL => d,
                    _ => continue,
                };
                if bland {
                    entering = j;
                    entering_d = d;
                    break;
                }
                if gain > best {
                    best = gain;
                    entering = j;
                    entering_d = d;
                }
            }
            if entering == usize::MAX {
                break if phase_one {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            }

            let q = entering;
            self.load_column(q, &mut w);
            self.ftran(&mut w);
            let dir = if entering_d < 0.0 { 1.0 } else { -1.0 };

            // Ratio test: `blocking(p, slack)` is the step at which basic p
            // reaches its target bound (relaxed by `slack`) and which side
            // that bound is on.
            let blocking = |this: &Self, p: usize, slack: f64| -> Option<(f64, bool)> {
                let wp = w[p];
                if wp.abs() <= PIVOT_TOL {
                    return None;
                }
                let b = this.head[p];
                let v = this.x[b];
                let rate = -dir * wp;
                if rate < 0.0 {
                    if phase_one && v < this.lb[b] - PRIMAL_TOL {
                        return None;
                    }
                    let (target, lower) = if phase_one && v > this.ub[b] + PRIMAL_TOL {
                        (this.ub[b], false)
                    } else {
                        (this.lb[b], true)
                    };
                    if target == f64::NEG_INFINITY {
                        return None;
                    }
                    Some((((v - target + slack) / -rate).max(0.0), lower))
                } else {
                    if phase_one && v > this.ub[b] + PRIMAL_TOL {
                        return None;
                    }
                    let (target, lower) = if phase_one && v < this.lb[b] - PRIMAL_TOL {
                        (this.lb[b], true)
                    } else {
                        (this.ub[b], false)
                    };
                    if target == f64::INFINITY {
                        return None;
                    }
                    Some((((target - v + slack) / rate).max(0.0), lower))
                }
            };
            let flip = self.ub[q] - self.lb[q];
            let mut leave = usize::MAX;
            let mut leave_lower = true;
            let mut theta = flip;
            if bland {
                for p in 0..self.m {
                    if let Some((r, lower)) = blocking(self, p, 0.0) {
                        let better = r < theta - 1e-12
                            || (leave != usize::MAX
                                && r <= theta + 1e-12
                                && self.head[p] < self.head[leave]);
                        if better {
                            theta = r;
                            leave = p;
                            leave_lower = lower;
                        }
                    }
                }
            } else {
                let mut relaxed = f64::INFINITY;
                for p in 0..self.m {
                    if let Some((r, _)) = blocking(self, p, PRIMAL_TOL) {
                        relaxed = relaxed.min(r);
                    }
                }
                if relaxed < flip {
                    let mut best_w = 0.0;
                    for p in 0..self.m {
                        if let Some((r, lower)) = blocking(self, p, 0.0) {
                            if r <= relaxed && w[p].abs() > best_w {
                                best_w = w[p].abs();
                                leave = p;
                                leave_lower = lower;
                                theta = r;
                            }
                        }
                    }
                }
            }
            if leave == usize::MAX && theta == f64::INFINITY {
                break if phase_one {
                    LpStatus::NumericFailure
                } else {
                    LpStatus::Unbounded
                };
            }

            self.iterations += 1;
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            let step = dir * theta;
            self.x[q] += step;
            for p in 0..self.m {
                if w[p] != 0.0 {
                    let b = self.head[p];
                    self.x[b] -= w[p] * step;
                }
            }
            if leave == usize::MAX {
                self.state[q] = if dir > 0.0 {
                    VarState::Upper
                } else {
                    VarState::Lower
                };
                self.x[q] = self.nonbasic_value(q);
                continue;
            }
            let b = self.head[leave];
            self.state[b] = if leave_lower {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.x[b] = self.nonbasic_value(b);
            self.head[leave] = q;
            self.state[q] = VarState::Basic;
            self.push_eta(leave, &w);
            self.pivots_since_refactor += 1;
        };
        self.work = w;
        result
    }

    fn dual_simplex(&mut self, deadline: Option<Instant>, max_iter: usize) -> LpStatus {
        let total = self.n + self.m;
        let mut w = std::mem::take(&mut self.work);
        let mut rho = vec![0.0; self.m];
        let mut degenerate = 0usize;
        let mut bland = false;
        let result = loop {
            if self.iterations >= max_iter {
                break LpStatus::NumericFailure;
            }
            if self.iterations % 64 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        break LpStatus::TimeLimit;
                    }
                }
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let mut leave = usize::MAX;
            let mut worst = 0.0;
            for p in 0..self.m {
                let b = self.head[p];
                let inf = self.infeasibility(b);
                if inf > 0.0 {
                    if bland {
                        if leave == usize::MAX || b < self.head[leave] {
                            leave = p;
                        }
                    } else if inf > worst {
                        worst = inf;
                        leave = p;
                    }
                }
            }
            if leave == usize::MAX {
                break LpStatus::Optimal;
            }
            // with a dual feasible basis the objective is a lower bound
            if self.cutoff < f64::INFINITY
                && self.objective() > self.cutoff + 1e-9 * (1.0 + self.cutoff.abs())
            {
                break LpStatus::Cutoff;
            }
            let b = self.head[leave];
            let to_lower = self.x[b] < self.lb[b];
            let y = self.phase_two_duals();
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[leave] = 1.0;
            self.btran(&mut rho);

            // Candidates: (j, alpha_j, |d_j|)
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..total {
                let st = self.state[j];
                if st == VarState::Basic || self.lb[j] == self.ub[j] {
                    continue;
                }
                let alpha = self.dot_column(j, &rho);
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let eligible = match (to_lower, st) {
                    (true, VarState::Lower) => alpha < 0.0,
                    (true, VarState::Upper) => alpha > 0.0,
                    (false, VarState::Lower) => alpha > 0.0,
                    (false, VarState::Upper) => alpha < 0.0,
                    _ => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let dabs = match st {
                    VarState::Lower => d.max(0.0),
                    _ => (-d).max(0.0),
                };
                cands.push((j, alpha, dabs));
            }
            if cands.is_empty() {
                break LpStatus::Infeasible;
            }
            let mut entering = usize::MAX;
            let mut entering_alpha = 0.0;
            let mut step_ratio = 0.0;
            if bland {
                let mut best = f64::INFINITY;
                for &(j, a, d) in &cands {
                    let r = d / a.abs();
                    if r < best - 1e-12 || ((r - best).abs() <= 1e-12 && j < entering) {
                        best = r;
                        entering = j;
                        entering_alpha = a;
                    }
                }
                step_ratio = best;
            } else {
                let relaxed = cands
                    .iter()
                    .map(|&(_, a, d)| (d + DUAL_TOL) / a.abs())
                    .fold(f64::INFINITY, f64::min);
                let mut best_alpha = 0.0;
                for &(j, a, d) in &cands {
                    let r = d / a.abs();
                    if r <= relaxed && a.abs() > best_alpha {
                        best_alpha = a.abs();
                        entering = j;
                        entering_alpha = a;
                        step_ratio = r;
                    }
                }
            }
            let q = entering;
            self.load_column(q, &mut w);
            self.ftran(&mut w);
            let wp = w[leave];
            if wp.abs() <= PIVOT_TOL || (wp - entering_alpha).abs() > 1e-6 * (1.0 + wp.abs()) {
                if self.pivots_since_refactor == 0 {
                    break LpStatus::NumericFailure;
                }
                self.refactor();
                continue;
            }
            self.iterations += 1;
            if step_ratio <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            let target = if to_lower { self.lb[b] } else { self.ub[b] };
            let delta = (self.x[b] - target) / wp;
            self.x[q] += delta;
            for p in 0..self.m {
                if w[p] != 0.0 {
                    let bb = self.head[p];
                    self.x[bb] -= w[p] * delta;
                }
            }
            self.state[b] = if to_lower {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.x[b] = target;
            self.head[leave] = q;
            self.state[q] = VarState::Basic;
            self.push_eta(leave, &w);
            self.pivots_since_refactor += 1;
        };
        self.work = w;
        result
    }

    /// Package the current point. Duals and reduced costs are only
    /// meaningful when `status` is optimal.
    pub fn solution(&self, status: LpStatus, offset: f64) -> LpSolution {
        let y = self.phase_two_duals();
        let reduced_costs = (0..self.n).map(|j| self.reduced_cost(j, &y)).collect();
        LpSolution {
            status,
            objective: self.objective() + offset,
            primal: self.x[..self.n].to_vec(),
            duals: y,
            reduced_costs,
            iterations: self.iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarId;

    #[test]
    fn single_ge_row_has_unit_dual() {
        let mut m = ModelIR::new("t");
        let x = m.add_var("x", 0.0, 10.0, false, 1.0);
        m.add_constraint("c", vec![(x, 1.0)], Sense::Ge, 3.0);
        let sol = solve_lp(&m);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = ModelIR::new("t");
        let x = m.add_var("x", 0.0, 10.0, false, 1.0);
        m.add_constraint("a", vec![(x, 1.0)], Sense::Le, 1.0);
        m.add_constraint("b", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn bound_flip_without_rows() {
        let mut m = ModelIR::new("t");
        m.add_var("x", -2.0, 5.0, false, -1.0);
        m.add_var("y", -2.0, 5.0, false, 1.0);
        let sol = solve_lp(&m);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal, vec![5.0, -2.0]);
        assert!((sol.objective + 7.0).abs() < 1e-12);
    }

    #[test]
    fn dual_simplex_after_bound_change() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6
        let mut m = ModelIR::new("t");
        let x = m.add_var("x", 0.0, 10.0, false, -1.0);
        let y = m.add_var("y", 0.0, 10.0, false, -1.0);
        m.add_constraint("a", vec![(x, 1.0), (y, 2.0)], Sense::Le, 4.0);
        m.add_constraint("b", vec![(x, 3.0), (y, 1.0)], Sense::Le, 6.0);
        let mut e = SimplexEngine::new(&m);
        assert_eq!(e.solve(None), LpStatus::Optimal);
        assert!((e.objective() + 2.8).abs() < 1e-9);
        e.set_bounds(x.index(), 0.0, 1.0);
        assert_eq!(e.solve(None), LpStatus::Optimal);
        assert!((e.objective() + 2.5).abs() < 1e-9);
        e.add_rows(&[Row::new("c", vec![(VarId(1), 1.0)], Sense::Le, 1.0)]);
        assert_eq!(e.solve(None), LpStatus::Optimal);
        assert!((e.objective() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_and_negative_bounds() {
        // min 2a - b, a + b = 1, a - b >= -3, a in [-5, 5], b in [-5, 5]
        let mut m = ModelIR::new("t");
        let a = m.add_var("a", -5.0, 5.0, false, 2.0);
        let b = m.add_var("b", -5.0, 5.0, false, -1.0);
        m.add_constraint("e", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 1.0);
        m.add_constraint("g", vec![(a, 1.0), (b, -1.0)], Sense::Ge, -3.0);
        let sol = solve_lp(&m);
        assert_eq!(sol.status, LpStatus::Optimal);
        // a = -1, b = 2
        assert!((sol.objective + 4.0).abs() < 1e-9, "{}", sol.objective);
    }
}
