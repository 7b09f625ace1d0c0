//! LP-based branch-and-bound.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::time::{Duration, Instant};

use crate::error::ModelError;
use crate::model::{ModelIR, Row};
use crate::simplex::{Basis, LpStatus, SimplexEngine, VarState};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeOrder {
    #[default]
    BreadthFirst,
    BestBound,
    DepthFirst,
}

/// Separation hook. `lazy` is called on every integer-feasible candidate and
/// returns rows the candidate violates (empty accepts it); `user` is called
/// on fractional node solutions and may return valid cuts. Implementations
/// must be pure functions of the values they are given.
pub trait CutCallback {
    fn lazy(&self, values: &[f64]) -> Vec<Row>;

    fn user(&self, _values: &[f64]) -> Vec<Row> {
        Vec::new()
    }
}

#[derive(Clone)]
pub struct SearchOptions<'a> {
    pub node_order: NodeOrder,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// Also pool every accepted integer solution with objective at or below
    /// this value (improving incumbents are always pooled).
    pub pool_threshold: Option<f64>,
    pub callback: Option<&'a dyn CutCallback>,
    /// Rounds of user-cut separation per node (0 disables).
    pub user_cut_rounds: usize,
    pub warm_starts: Vec<Vec<f64>>,
    /// Branching priority per variable (higher first); empty means equal.
    /// Within the highest class holding a fractional variable the most
    /// fractional one is taken.
    pub priority: Vec<u8>,
}

impl Default for SearchOptions<'_> {
    fn default() -> Self {
        SearchOptions {
            node_order: NodeOrder::BreadthFirst,
            time_limit: None,
            node_limit: None,
            abs_gap: 1e-6,
            rel_gap: 0.0,
            pool_threshold: None,
            callback: None,
            user_cut_rounds: 0,
            warm_starts: Vec::new(),
            priority: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    /// Search stopped early (node limit, relative gap, numerical trouble)
    /// with an incumbent that is not proven optimal.
    Feasible,
    Infeasible,
    /// Time limit reached; incumbent and bound are the best known.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct MipResult {
    pub status: MipStatus,
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub pool: Vec<PoolEntry>,
    /// Rows appended by the lazy/user callbacks during the search.
    pub added_rows: Vec<Row>,
}

impl MipResult {
    pub fn gap(&self) -> Option<f64> {
        self.objective.map(|o| o - self.bound)
    }
}

struct Node {
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Basis>,
    bound: f64,
    seq: usize,
}

struct Queue {
    order: NodeOrder,
    fifo: VecDeque<Node>,
    heap: BinaryHeap<HeapNode>,
}

struct HeapNode(Node);

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    // max-heap: smaller bound (then smaller seq) pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

impl Queue {
    fn new(order: NodeOrder) -> Self {
        Queue {
            order,
            fifo: VecDeque::new(),
            heap: BinaryHeap::new(),
        }
    }

    fn push(&mut self, node: Node) {
        match self.order {
            NodeOrder::BestBound => self.heap.push(HeapNode(node)),
            _ => self.fifo.push_back(node),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self.order {
            NodeOrder::BreadthFirst => self.fifo.pop_front(),
            NodeOrder::DepthFirst => self.fifo.pop_back(),
            NodeOrder::BestBound => self.heap.pop().map(|h| h.0),
        }
    }

    fn min_bound(&self) -> f64 {
        let a = self.fifo.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        let b = self.heap.iter().map(|n| n.0.bound).fold(f64::INFINITY, f64::min);
        a.min(b)
    }

    fn is_empty(&self) -> bool {
        self.fifo.is_empty() && self.heap.is_empty()
    }
}

struct Search<'m, 'o> {
    model: &'m ModelIR,
    opts: &'m SearchOptions<'o>,
    rows: Vec<Row>,
    incumbent: Option<(Vec<f64>, f64)>,
    pool: Vec<PoolEntry>,
    integral_objective: bool,
}

impl Search<'_, '_> {
    fn cutoff(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::INFINITY, |(_, obj)| *obj - self.opts.abs_gap)
    }

    /// LP value (offset included) above which `node_bound` reaches the cutoff.
    fn lp_cutoff(&self) -> f64 {
        let c = self.cutoff();
        if c.is_finite() && self.integral_objective {
            c.ceil() - 1.0 + INTEGRALITY_TOL
        } else {
            c
        }
    }

    fn node_bound(&self, lp_objective: f64) -> f64 {
        if self.integral_objective {
            (lp_objective - INTEGRALITY_TOL).ceil()
        } else {
            lp_objective
        }
    }

    fn satisfies_rows(&self, values: &[f64]) -> bool {
        self.model.is_feasible(values, FEASIBILITY_TOL)
            && self.rows.iter().all(|r| r.violation(values) <= FEASIBILITY_TOL)
    }

    fn accept(&mut self, values: Vec<f64>) {
        let objective = self.model.objective_value(&values);
        let improving = self
            .incumbent
            .as_ref()
            .is_none_or(|(_, best)| objective < *best - 1e-9);
        let pooled = improving
            || self
                .opts
                .pool_threshold
                .is_some_and(|t| objective <= t + 1e-9);
        if pooled && !self.pool.iter().any(|p| p.values == values) {
            self.pool.push(PoolEntry {
                values: values.clone(),
                objective,
            });
        }
        if improving {
            self.incumbent = Some((values, objective));
        }
    }
}

fn most_fractional(model: &ModelIR, values: &[f64], priority: &[u8]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut best_key = (0u8, INTEGRALITY_TOL);
    for (j, v) in model.vars.iter().enumerate() {
        if !v.integer {
            continue;
        }
        let x = values[j];
        let frac = x - x.floor();
        let score = frac.min(1.0 - frac);
        if score <= INTEGRALITY_TOL {
            continue;
        }
        let class = priority.get(j).copied().unwrap_or(0);
        let better = match best {
            None => true,
            Some(_) => class > best_key.0 || (class == best_key.0 && score > best_key.1 + 1e-12),
        };
        if better {
            best_key = (class, score);
            best = Some((j, x));
        }
    }
    best
}

/// Tightened bounds for nonbasic integer variables whose reduced cost
/// would push the LP value past the cutoff (`slack` above the current
/// value) if they moved far from their bound.
fn reduced_cost_fixing(model: &ModelIR, engine: &SimplexEngine, slack: f64) -> Vec<(usize, f64, f64)> {
    if !slack.is_finite() || slack < 0.0 {
        return Vec::new();
    }
    let d = engine.reduced_costs();
    let mut out = Vec::new();
    for (j, var) in model.vars.iter().enumerate() {
        let (lo, hi) = engine.bounds(j);
        if !var.integer || lo == hi || !lo.is_finite() || !hi.is_finite() {
            continue;
        }
        let room = |dj: f64| (slack / dj.abs() + 1e-9).floor();
        match engine.state(j) {
            VarState::Lower if d[j] > 1e-9 && lo + room(d[j]) < hi => {
                out.push((j, lo, lo + room(d[j])));
            }
            VarState::Upper if d[j] < -1e-9 && hi - room(d[j]) > lo => {
                out.push((j, hi - room(d[j]), hi));
            }
            _ => {}
        }
    }
    out
}

fn round_integers(model: &ModelIR, values: &[f64]) -> Vec<f64> {
    model
        .vars
        .iter()
        .zip(values)
        .map(|(v, &x)| {
            let x = x.clamp(v.lower, v.upper);
            if v.integer {
                x.round()
            } else {
                x
            }
        })
        .collect()
}

/// Branch-and-bound over LP relaxations.
///
/// Branching picks the most fractional integer variable (lowest index on
/// ties). Integer-feasible node solutions are offered to the lazy callback;
/// returned rows are appended globally and the node is re-solved. When all
/// cost-carrying variables are integer with integral costs, node bounds are
/// rounded up to the next integer.
pub fn solve_mip(model: &ModelIR, opts: &SearchOptions<'_>) -> Result<MipResult, ModelError> {
    model.validate()?;
    let start = Instant::now();
    let deadline = opts.time_limit.map(|d| start + d);
    let n = model.num_vars();
    let mut search = Search {
        model,
        opts,
        rows: Vec::new(),
        incumbent: None,
        pool: Vec::new(),
        integral_objective: model.has_integral_objective(),
    };

    for ws in &opts.warm_starts {
        if ws.len() != n || !search.satisfies_rows(ws) {
            continue;
        }
        let candidate = round_integers(model, ws);
        if let Some(cb) = opts.callback {
            if !cb.lazy(&candidate).is_empty() {
                continue;
            }
        }
        search.accept(candidate);
    }

    let mut engine = SimplexEngine::new(model);
    let root_lb: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
    let root_ub: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
    let mut queue = Queue::new(opts.node_order);
    let mut seq = 0usize;
    queue.push(Node {
        changes: Vec::new(),
        basis: None,
        bound: f64::NEG_INFINITY,
        seq,
    });
    let mut nodes = 0usize;
    let mut limit_hit = false;
    let mut early_stop = false;
    let mut numeric_trouble = false;
    let mut unresolved_bound = f64::INFINITY;

    'tree: while let Some(node) = queue.pop() {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            queue.push(node);
            limit_hit = true;
            break;
        }
        if opts.node_limit.is_some_and(|l| nodes >= l) {
            queue.push(node);
            early_stop = true;
            break;
        }
        if node.bound >= search.cutoff() {
            continue;
        }
        if let Some((_, inc)) = &search.incumbent {
            if opts.rel_gap > 0.0 && nodes % 32 == 0 {
                let global = queue.min_bound().min(node.bound);
                if (inc - global) <= opts.rel_gap * inc.abs().max(1.0) {
                    queue.push(node);
                    early_stop = true;
                    break;
                }
            }
        }
        nodes += 1;
        for j in 0..n {
            engine.set_bounds(j, root_lb[j], root_ub[j]);
        }
        for &(j, lo, hi) in &node.changes {
            engine.set_bounds(j, lo, hi);
        }
        if let Some(b) = &node.basis {
            engine.set_basis(b);
        }
        let mut user_rounds = 0;
        loop {
            engine.set_cutoff(search.lp_cutoff() - model.objective_offset);
            let mut status = engine.solve(deadline);
            if status == LpStatus::NumericFailure {
                // retry once from the all-slack basis
                engine.set_basis(&Basis {
                    structural: Vec::new(),
                    logical: Vec::new(),
                });
                status = engine.solve(deadline);
            }
            match status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible | LpStatus::Cutoff => continue 'tree,
                LpStatus::TimeLimit => {
                    queue.push(node);
                    limit_hit = true;
                    break 'tree;
                }
                LpStatus::Unbounded | LpStatus::NumericFailure => {
                    numeric_trouble = true;
                    unresolved_bound = unresolved_bound.min(node.bound);
                    continue 'tree;
                }
            }
            let lp_obj = engine.objective() + model.objective_offset;
            let bound = search.node_bound(lp_obj).max(node.bound);
            if bound >= search.cutoff() {
                continue 'tree;
            }
            let values = engine.values().to_vec();
            match most_fractional(model, &values, &opts.priority) {
                None => {
                    let candidate = round_integers(model, &values);
                    if let Some(cb) = opts.callback {
                        let rows = cb.lazy(&candidate);
                        if !rows.is_empty() {
                            engine.add_rows(&rows);
                            search.rows.extend(rows);
                            continue;
                        }
                    }
                    search.accept(candidate);
                    continue 'tree;
                }
                Some((j, x)) => {
                    if user_rounds < opts.user_cut_rounds {
                        if let Some(cb) = opts.callback {
                            let rows: Vec<Row> = cb
                                .user(&values)
                                .into_iter()
                                .filter(|r| r.violation(&values) > 1e-6)
                                .collect();
                            if !rows.is_empty() {
                                user_rounds += 1;
                                engine.add_rows(&rows);
                                search.rows.extend(rows);
                                continue;
                            }
                        }
                    }
                    let basis = engine.basis();
                    let (lo, hi) = engine.bounds(j);
                    let mut node = node;
                    node.changes.extend(reduced_cost_fixing(
                        model,
                        &engine,
                        search.lp_cutoff() - lp_obj,
                    ));
                    let mut down = node.changes.clone();
                    down.push((j, lo, x.floor()));
                    let mut up = node.changes;
                    up.push((j, x.ceil(), hi));
                    // depth-first pops the last push, so "up" is explored first
                    for changes in [down, up] {
                        seq += 1;
                        queue.push(Node {
                            changes,
                            basis: Some(basis.clone()),
                            bound,
                            seq,
                        });
                    }
                    continue 'tree;
                }
            }
        }
    }

    let open_bound = queue.min_bound().min(unresolved_bound);
    let (values, objective) = match search.incumbent.take() {
        Some((v, o)) => (Some(v), Some(o)),
        None => (None, None),
    };
    let bound = match objective {
        Some(o) => open_bound.min(o),
        None => open_bound,
    };
    let finished = queue.is_empty() && !numeric_trouble;
    let status = if limit_hit {
        MipStatus::Limit
    } else if finished {
        if objective.is_some() {
            MipStatus::Optimal
        } else {
            MipStatus::Infeasible
        }
    } else if objective.is_some() && (early_stop || numeric_trouble) {
        MipStatus::Feasible
    } else {
        MipStatus::Limit
    };
    let rows = std::mem::take(&mut search.rows);
    let pool = search
        .pool
        .into_iter()
        .filter(|p| {
            model
                .rows
                .iter()
                .chain(&rows)
                .all(|r| r.violation(&p.values) <= FEASIBILITY_TOL)
        })
        .collect();
    Ok(MipResult {
        status,
        values,
        objective,
        bound: if finished && objective.is_some() {
            objective.unwrap()
        } else {
            bound
        },
        nodes,
        lp_iterations: engine.iterations(),
        pool,
        added_rows: rows,
    })
}
