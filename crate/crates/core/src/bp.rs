//! Branch-and-price over pseudo-schedules.
//!
//! A column is a complete multi-dock schedule. The master keeps one convex
//! weight per column, per-truck in/out rows, and coupling rows tying the
//! original arc variables to the columns so that branching can happen on
//! arcs. Pricing is the compact model with dual-adjusted costs.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use crossdock_milp::{
    solve_lp, solve_mip, CutCallback, LpSolution, LpStatus, MipStatus, ModelError, ModelIR,
    NodeOrder, Row, SearchOptions, Sense, VarId,
};
use thiserror::Error;

use crate::compact::{
    self, build_with, resolve_variant, Arc, BuildOptions, CompactError, Flavor, VarIndex, DUMMY,
};
use crate::core::{
    check_feasibility, evaluate, prune_dominated_scenarios, Assignment, CostBreakdown, Instance,
    Profile, Schedule, Variant,
};

/// Columns must price below this to enter the master.
pub const RC_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum BpError {
    #[error(transparent)]
    Compact(#[from] CompactError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("restricted master is infeasible at the root")]
    RmpInfeasible,
    #[error("master LP failed: {0:?}")]
    RmpLp(LpStatus),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// Arcs of a schedule with full scenario information on arcs into trucks.
fn schedule_arcs(inst: &Instance, variant: Variant, sched: &Schedule) -> Vec<Arc> {
    let node_of: HashMap<u32, usize> = inst
        .trucks
        .iter()
        .enumerate()
        .map(|(k, t)| (t.id, k + 1))
        .collect();
    let mut arcs = Vec::new();
    for dock in &sched.per_dock {
        let mut prev = DUMMY;
        for a in dock {
            let j = node_of[&a.truck];
            let s = match variant {
                Variant::SdPT => Some(a.scenario),
                Variant::SiPT => None,
            };
            arcs.push(Arc {
                from: prev,
                to: j,
                t: a.start,
                s,
            });
            prev = j;
        }
        if let Some(last) = dock.last() {
            let truck = compact::truck_of(inst, prev);
            arcs.push(Arc {
                from: prev,
                to: DUMMY,
                t: last.start + truck.span(last.scenario),
                s: None,
            });
        }
    }
    arcs.sort();
    arcs
}

/// One column of the master.
#[derive(Debug, Clone)]
pub struct PseudoSchedule {
    pub schedule: Schedule,
    /// Sorted arc set, in the variable space of the run's variant.
    pub arcs: Vec<Arc>,
    /// Served nodes.
    pub served: Vec<usize>,
    /// Waiting cost plus penalties of unserved trucks.
    pub cost: i64,
    pub fingerprint: u64,
}

impl PseudoSchedule {
    pub fn new(inst: &Instance, variant: Variant, schedule: Schedule) -> Result<Self, BpError> {
        let violations = check_feasibility(inst, &schedule);
        if !violations.is_empty() {
            return Err(BpError::Internal(format!(
                "column is not a feasible schedule: {}",
                violations[0]
            )));
        }
        let cost = evaluate(inst, &schedule).map_err(CompactError::from)?.total;
        let arcs = schedule_arcs(inst, variant, &schedule);
        let mut served: Vec<usize> = arcs
            .iter()
            .filter(|a| a.to != DUMMY)
            .map(|a| a.to)
            .collect();
        served.sort();
        let mut h = DefaultHasher::new();
        arcs.hash(&mut h);
        Ok(PseudoSchedule {
            schedule,
            arcs,
            served,
            cost,
            fingerprint: h.finish(),
        })
    }

    pub fn contains(&self, arc: &Arc) -> bool {
        self.arcs.binary_search(arc).is_ok()
    }

    fn respects(&self, fixes: &[BranchFix]) -> bool {
        fixes.iter().all(|f| self.contains(&f.arc) == f.one)
    }
}

/// Greedy chronological fill: trucks by arrival; each takes the earliest
/// start over all docks and scenarios that fits its window and the
/// resource profile, or is left unserved.
pub fn initial_schedule(inst: &Instance) -> Schedule {
    let mut order: Vec<usize> = (0..inst.trucks.len()).collect();
    order.sort_by_key(|&k| (inst.trucks[k].arrival, inst.trucks[k].id));
    let mut profile = Profile::new(inst.horizon);
    let mut free_at = vec![0u32; inst.docks as usize];
    let mut sched = Schedule::empty(inst.docks as usize);
    for k in order {
        let truck = &inst.trucks[k];
        let mut best: Option<(u32, usize, usize)> = None;
        for (d, &free) in free_at.iter().enumerate() {
            for s in 0..truck.scenarios.len() {
                let Some(last) = truck.latest_start(s) else {
                    continue;
                };
                let first = truck.arrival.max(free);
                if let Some(t) = (first..=last).find(|&t| profile.fits(inst, truck, s, t)) {
                    if best.is_none_or(|b| (t, d, s) < b) {
                        best = Some((t, d, s));
                    }
                }
            }
        }
        match best {
            Some((t, d, s)) => {
                profile.add(truck, s, t);
                free_at[d] = t + truck.span(s);
                sched.per_dock[d].push(Assignment {
                    truck: truck.id,
                    scenario: s,
                    start: t,
                });
            }
            None => {
                sched.unserved.insert(truck.id);
            }
        }
    }
    sched
}

pub fn initial_column(inst: &Instance, variant: Variant) -> Result<PseudoSchedule, BpError> {
    PseudoSchedule::new(inst, variant, initial_schedule(inst))
}

/// Column store with duplicate rejection.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    pub columns: Vec<PseudoSchedule>,
    by_fingerprint: HashMap<u64, Vec<usize>>,
}

impl ColumnPool {
    /// Adds the column unless an identical arc set is already stored.
    pub fn insert(&mut self, col: PseudoSchedule) -> bool {
        let slot = self.by_fingerprint.entry(col.fingerprint).or_default();
        if slot.iter().any(|&k| self.columns[k].arcs == col.arcs) {
            return false;
        }
        slot.push(self.columns.len());
        self.columns.push(col);
        true
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchFix {
    pub arc: Arc,
    pub one: bool,
}

/// Master duals. `u1`/`u2` are indexed by node (entry 0 unused).
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub alpha: f64,
    pub v: BTreeMap<Arc, f64>,
}

impl Duals {
    pub fn zero(trucks: usize) -> Self {
        Duals {
            u1: vec![0.0; trucks + 1],
            u2: vec![0.0; trucks + 1],
            alpha: 0.0,
            v: BTreeMap::new(),
        }
    }

    /// Reduced cost of a column under these duals.
    pub fn reduced_cost(&self, col: &PseudoSchedule) -> f64 {
        let mut rc = col.cost as f64 - self.alpha;
        for a in &col.arcs {
            if a.to != DUMMY {
                rc -= self.u1[a.to];
            }
            if a.from != DUMMY {
                rc -= self.u2[a.from];
            }
            rc -= self.v.get(a).copied().unwrap_or(0.0);
        }
        rc
    }

    fn same_prices(&self, other: &Duals) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
        let nonzero = |d: &Duals| -> Vec<(Arc, f64)> {
            d.v.iter().filter(|(_, x)| x.abs() > 1e-9).map(|(a, x)| (*a, *x)).collect()
        };
        let (va, vb) = (nonzero(self), nonzero(other));
        close(&self.u1, &other.u1)
            && close(&self.u2, &other.u2)
            && va.len() == vb.len()
            && va.iter().zip(&vb).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= 1e-9)
    }
}

/// The restricted master and the positions of its rows and variables.
#[derive(Debug, Clone)]
pub struct Rmp {
    pub model: ModelIR,
    pub lambda: Vec<VarId>,
    pub coupled: Vec<Arc>,
    pub x: Vec<VarId>,
    u1_rows: Vec<Option<usize>>,
    u2_rows: Vec<Option<usize>>,
    alpha_row: usize,
    v_rows: Vec<usize>,
}

pub fn build_rmp(inst: &Instance, columns: &[PseudoSchedule], fixes: &[BranchFix]) -> Rmp {
    let n = inst.trucks.len();
    let mut m = ModelIR::new(format!("{}-rmp", inst.name));
    let lambda: Vec<VarId> = columns
        .iter()
        .enumerate()
        .map(|(k, c)| m.add_var(format!("lambda_{k}"), 0.0, 1.0, false, c.cost as f64))
        .collect();
    let mut coupled: Vec<Arc> = columns.iter().flat_map(|c| c.arcs.iter().copied()).collect();
    coupled.extend(fixes.iter().map(|f| f.arc));
    coupled.sort();
    coupled.dedup();
    let x: Vec<VarId> = coupled
        .iter()
        .map(|a| {
            let (lo, hi) = match fixes.iter().find(|f| f.arc == *a) {
                Some(f) if f.one => (1.0, 1.0),
                Some(_) => (0.0, 0.0),
                None => (0.0, 1.0),
            };
            m.add_var(a.to_string(), lo, hi, true, 0.0)
        })
        .collect();

    let mut u1_rows = vec![None; n + 1];
    let mut u2_rows = vec![None; n + 1];
    for j in 1..=n {
        let into: Vec<(VarId, f64)> = columns
            .iter()
            .zip(&lambda)
            .filter(|(c, _)| c.served.binary_search(&j).is_ok())
            .map(|(_, &l)| (l, 1.0))
            .collect();
        if !into.is_empty() {
            u1_rows[j] = Some(m.add_constraint(format!("in_{j}"), into.clone(), Sense::Le, 1.0));
            // a served truck always has exactly one successor
            u2_rows[j] = Some(m.add_constraint(format!("out_{j}"), into, Sense::Le, 1.0));
        }
    }
    let alpha_row = m.add_constraint(
        "convexity",
        lambda.iter().map(|&l| (l, 1.0)).collect(),
        Sense::Eq,
        1.0,
    );
    let v_rows = coupled
        .iter()
        .zip(&x)
        .map(|(a, &xv)| {
            let mut row: Vec<(VarId, f64)> = columns
                .iter()
                .zip(&lambda)
                .filter(|(c, _)| c.contains(a))
                .map(|(_, &l)| (l, 1.0))
                .collect();
            row.push((xv, -1.0));
            m.add_constraint(format!("couple_{a}"), row, Sense::Eq, 0.0)
        })
        .collect();
    Rmp {
        model: m,
        lambda,
        coupled,
        x,
        u1_rows,
        u2_rows,
        alpha_row,
        v_rows,
    }
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub duals: Duals,
    pub objective: f64,
    pub lp: LpSolution,
}

/// Solves the master relaxation. Returns `Ok(None)` when it is infeasible
/// (possible only under branching fixes).
pub fn solve_rmp_lp(rmp: &Rmp, trucks: usize) -> Result<Option<RmpSolution>, BpError> {
    let lp = solve_lp(&rmp.model);
    match lp.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(None),
        other => return Err(BpError::RmpLp(other)),
    }
    let dual_of = |row: Option<usize>| -> Result<f64, BpError> {
        let Some(r) = row else { return Ok(0.0) };
        let y = lp.duals[r];
        if y > 1e-7 {
            return Err(BpError::Internal(format!("dual {y} of a <= row is positive")));
        }
        Ok(y.min(0.0))
    };
    let mut duals = Duals::zero(trucks);
    for j in 1..=trucks {
        duals.u1[j] = dual_of(rmp.u1_rows[j])?;
        duals.u2[j] = dual_of(rmp.u2_rows[j])?;
    }
    duals.alpha = lp.duals[rmp.alpha_row];
    for (a, &r) in rmp.coupled.iter().zip(&rmp.v_rows) {
        duals.v.insert(*a, lp.duals[r]);
    }
    Ok(Some(RmpSolution {
        duals,
        objective: lp.objective,
        lp,
    }))
}

/// Pricing model: the compact variable space with dual-adjusted costs.
/// Its objective value at any point is the reduced cost of the
/// corresponding column.
pub fn build_pricing(
    inst: &Instance,
    variant: Variant,
    duals: &Duals,
    fixes: &[BranchFix],
    opts: &BuildOptions,
) -> Result<compact::Built, BpError> {
    let mut built = build_with(inst, variant, opts, Flavor::Pricing)?;
    let index = &built.index;
    let m = &mut built.model;
    for (arc, v) in index.arcs.iter().zip(&index.arc_vars) {
        let mut c = m.vars[v.0].objective;
        if arc.to != DUMMY {
            c -= duals.u1[arc.to];
        }
        if arc.from != DUMMY {
            c -= duals.u2[arc.from];
        }
        c -= duals.v.get(arc).copied().unwrap_or(0.0);
        m.vars[v.0].objective = c;
    }
    m.objective_offset -= duals.alpha;
    for f in fixes {
        match (index.arc(&f.arc), f.one) {
            (Some(v), true) => m.vars[v.0].lower = 1.0,
            (Some(v), false) => m.vars[v.0].upper = 0.0,
            (None, true) => {
                // forced arc outside the variable space: make the model infeasible
                m.add_constraint(format!("forced_{}", f.arc), Vec::new(), Sense::Ge, 1.0);
            }
            (None, false) => {}
        }
    }
    Ok(built)
}

fn tricycle_row(index: &VarIndex, i: usize, j: usize, dummy_in: bool) -> Row {
    let mut coeffs = Vec::new();
    for (a, &v) in index.arcs.iter().zip(&index.arc_vars) {
        let hit = (a.from == i && a.to == j)
            || if dummy_in {
                a.from == DUMMY && (a.to == i || a.to == j)
            } else {
                a.to == DUMMY && (a.from == i || a.from == j)
            };
        if hit {
            coeffs.push((v, 1.0));
        }
    }
    let family = if dummy_in { "in" } else { "out" };
    Row::new(format!("tri_{family}_{i}_{j}"), coeffs, Sense::Le, 2.0)
}

/// Cuts `sum_t x(i,j,t) + sum_t x(i,0,t) + sum_t x(j,0,t) <= 2` and the twin
/// with arcs leaving the dummy, for every ordered pair of trucks whose sum
/// exceeds 2.
pub fn separate_tricycle(index: &VarIndex, values: &[f64]) -> Vec<Row> {
    let n = index.trucks;
    let mut to_dummy = vec![0.0; n + 1];
    let mut from_dummy = vec![0.0; n + 1];
    let mut pair: HashMap<(usize, usize), f64> = HashMap::new();
    for (a, &v) in index.arcs.iter().zip(&index.arc_vars) {
        let x = values[v.0];
        if x == 0.0 {
            continue;
        }
        match (a.from, a.to) {
            (DUMMY, DUMMY) => {}
            (DUMMY, j) => from_dummy[j] += x,
            (i, DUMMY) => to_dummy[i] += x,
            (i, j) => *pair.entry((i, j)).or_default() += x,
        }
    }
    let mut cuts = Vec::new();
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            let p = pair.get(&(i, j)).copied().unwrap_or(0.0);
            if p + to_dummy[i] + to_dummy[j] > 2.0 + 1e-6 {
                cuts.push(tricycle_row(index, i, j, false));
            }
            if p + from_dummy[i] + from_dummy[j] > 2.0 + 1e-6 {
                cuts.push(tricycle_row(index, i, j, true));
            }
        }
    }
    cuts
}

struct TricycleCuts<'a>(&'a VarIndex);

impl CutCallback for TricycleCuts<'_> {
    fn lazy(&self, values: &[f64]) -> Vec<Row> {
        separate_tricycle(self.0, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BpStatus {
    Optimal,
    Feasible,
    Limit,
    Infeasible,
    /// Pricing stalled without a proof; the incumbent is returned.
    Heuristic,
}

impl fmt::Display for BpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BpStatus::Optimal => "Optimal",
            BpStatus::Feasible => "Feasible",
            BpStatus::Limit => "Limit",
            BpStatus::Infeasible => "Infeasible",
            BpStatus::Heuristic => "Heuristic",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BpOptions {
    pub variant: Option<Variant>,
    pub build: BuildOptions,
    pub time_limit: Option<Duration>,
    /// Longest a single pricing solve may run; an unproven pricing that
    /// finds nothing ends the run as a heuristic.
    pub stall_time: Option<Duration>,
    /// Pooled pricing solutions at or below this value become columns.
    pub harvest_threshold: f64,
    pub node_order: NodeOrder,
    pub max_master_nodes: Option<usize>,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            variant: None,
            build: BuildOptions::default(),
            time_limit: None,
            stall_time: None,
            harvest_threshold: -RC_TOL,
            node_order: NodeOrder::BreadthFirst,
            max_master_nodes: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpStats {
    pub instance: String,
    pub variant: Variant,
    pub master_nodes: usize,
    /// Pricing problems solved.
    pub pricing_calls: usize,
    /// Pricing rounds settled from the previous proven optimum because only
    /// the convexity dual moved.
    pub pricing_reuses: usize,
    pub columns: usize,
    pub status: BpStatus,
    /// Root master LP value after column generation converged.
    pub root_bound: Option<f64>,
    pub bound: f64,
    /// Proven minimum reduced cost of the last pricing round.
    pub min_reduced_cost: Option<f64>,
    /// Master MIP objective minus master LP bound at the last solved node.
    pub rmp_gap: Option<f64>,
    pub seconds: f64,
}

impl BpStats {
    pub const CSV_HEADER: &'static str =
        "instance,master_nodes,pricing_calls,columns,status,gap,seconds";

    pub fn csv_row(&self, objective: Option<i64>) -> String {
        let gap = match (self.status, objective) {
            (BpStatus::Optimal, _) | (_, None) => String::new(),
            (_, Some(o)) => format!("{}", o as f64 - self.bound),
        };
        format!(
            "{},{},{},{},{},{},{:.3}",
            self.instance,
            self.master_nodes,
            self.pricing_calls,
            self.columns,
            self.status,
            gap,
            self.seconds
        )
    }

    pub fn has_certificate(&self) -> bool {
        self.status == BpStatus::Optimal
            && self.min_reduced_cost.is_some_and(|rc| rc >= -RC_TOL)
            && self.rmp_gap.is_some_and(|g| g < 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct BpOutcome {
    pub schedule: Schedule,
    pub cost: CostBreakdown,
    pub stats: BpStats,
}

struct PricingRound {
    added: usize,
    /// Proven minimum reduced cost, when the pricing search finished.
    proven_min: Option<f64>,
}

struct Run<'a> {
    inst: &'a Instance,
    variant: Variant,
    opts: &'a BpOptions,
    started: Instant,
    pool: ColumnPool,
    pricing_calls: usize,
    pricing_reuses: usize,
    /// Duals, fixes and proven optimum of the last finished pricing solve.
    last_pricing: Option<(Duals, Vec<BranchFix>, f64)>,
}

enum NodeEnd {
    Solved { lp_bound: f64, branch: Option<Arc> },
    Infeasible,
    Limit,
    Stalled,
}

impl Run<'_> {
    fn remaining(&self) -> Option<Duration> {
        self.opts
            .time_limit
            .map(|t| t.saturating_sub(self.started.elapsed()))
    }

    fn out_of_time(&self) -> bool {
        self.remaining().is_some_and(|r| r.is_zero())
    }

    fn price(&mut self, duals: &Duals, fixes: &[BranchFix]) -> Result<PricingRound, BpError> {
        if let Some((prev, prev_fixes, prev_min)) = &self.last_pricing {
            if prev_fixes == fixes && duals.same_prices(prev) {
                // objective moved by a constant only
                let shifted = prev_min + prev.alpha - duals.alpha;
                if shifted >= -RC_TOL {
                    self.pricing_reuses += 1;
                    return Ok(PricingRound {
                        added: 0,
                        proven_min: Some(shifted),
                    });
                }
            }
        }
        let built = build_pricing(self.inst, self.variant, duals, fixes, &self.opts.build)?;
        let warm: Vec<Vec<f64>> = self
            .pool
            .columns
            .iter()
            .filter(|c| c.respects(fixes))
            .filter_map(|c| compact::encode(self.inst, &built.index, built.model.num_vars(), &c.schedule))
            .collect();
        let cuts = TricycleCuts(&built.index);
        let limit = match (self.remaining(), self.opts.stall_time) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let search = SearchOptions {
            node_order: self.opts.node_order,
            time_limit: limit,
            pool_threshold: Some(self.opts.harvest_threshold),
            callback: Some(&cuts),
            warm_starts: warm,
            priority: compact::decision_priority(&built.model, &built.index),
            ..Default::default()
        };
        let result = solve_mip(&built.model, &search)?;
        self.pricing_calls += 1;
        let mut added = 0;
        for entry in &result.pool {
            if entry.objective > self.opts.harvest_threshold {
                continue;
            }
            let sched = compact::decode(self.inst, &built.index, &entry.values)?;
            let col = PseudoSchedule::new(self.inst, self.variant, sched)?;
            let rc = duals.reduced_cost(&col);
            if (rc - entry.objective).abs() > 1e-5 {
                return Err(BpError::Internal(format!(
                    "pricing objective {} but column reduced cost {rc}",
                    entry.objective
                )));
            }
            if self.pool.insert(col) {
                added += 1;
            }
        }
        let proven_min = match result.status {
            MipStatus::Optimal => result.objective,
            MipStatus::Infeasible => Some(f64::INFINITY),
            _ => None,
        };
        self.last_pricing = proven_min
            .filter(|v| v.is_finite())
            .map(|v| (duals.clone(), fixes.to_vec(), v));
        Ok(PricingRound { added, proven_min })
    }

    /// Column generation at one master node, then the master MIP.
    fn solve_node(
        &mut self,
        fixes: &[BranchFix],
        incumbent: Option<i64>,
        certificate: &mut (Option<f64>, Option<f64>),
    ) -> Result<NodeEnd, BpError> {
        loop {
            if self.out_of_time() {
                return Ok(NodeEnd::Limit);
            }
            let rmp = build_rmp(self.inst, &self.pool.columns, fixes);
            let Some(sol) = solve_rmp_lp(&rmp, self.inst.trucks.len())? else {
                if fixes.is_empty() {
                    return Err(BpError::RmpInfeasible);
                }
                // look for any schedule compatible with the fixes
                let round = self.price(&Duals::zero(self.inst.trucks.len()), fixes)?;
                if round.added > 0 {
                    continue;
                }
                return Ok(match round.proven_min {
                    Some(_) if self.pool.columns.iter().any(|c| c.respects(fixes)) => {
                        return Err(BpError::Internal("compatible column exists but master is infeasible".into()))
                    }
                    Some(_) => NodeEnd::Infeasible,
                    None if self.out_of_time() => NodeEnd::Limit,
                    None => NodeEnd::Stalled,
                });
            };
            let round = self.price(&sol.duals, fixes)?;
            if round.added > 0 {
                continue;
            }
            match round.proven_min {
                Some(rc) if rc >= -RC_TOL => {
                    certificate.0 = Some(rc);
                }
                Some(rc) => {
                    return Err(BpError::Internal(format!(
                        "pricing proved reduced cost {rc} but produced no new column"
                    )))
                }
                None if self.out_of_time() => return Ok(NodeEnd::Limit),
                None => return Ok(NodeEnd::Stalled),
            }
            // converged: master MIP
            let mip = solve_mip(
                &rmp.model,
                &SearchOptions {
                    time_limit: self.remaining(),
                    ..Default::default()
                },
            )?;
            let Some(mip_obj) = mip.objective else {
                return Ok(NodeEnd::Limit);
            };
            certificate.1 = Some(mip_obj - sol.objective);
            let settled = mip_obj - sol.objective < 1.0 - 1e-9
                || incumbent.is_some_and(|inc| (sol.objective - 1e-6).ceil() >= inc as f64);
            let branch = if settled {
                None
            } else {
                most_fractional(&rmp, &sol.lp.primal)
            };
            return Ok(NodeEnd::Solved {
                lp_bound: sol.objective,
                branch,
            });
        }
    }
}

fn most_fractional(rmp: &Rmp, primal: &[f64]) -> Option<Arc> {
    let mut best: Option<(f64, Arc)> = None;
    for (a, v) in rmp.coupled.iter().zip(&rmp.x) {
        let x = primal[v.0];
        let frac = (x - x.floor()).min(x.ceil() - x);
        if frac > 1e-6 && best.is_none_or(|b| frac > b.0 + 1e-12) {
            best = Some((frac, *a));
        }
    }
    best.map(|b| b.1)
}

pub fn branch_and_price(inst: &Instance, opts: &BpOptions) -> Result<BpOutcome, BpError> {
    let started = Instant::now();
    let variant = resolve_variant(inst, opts.variant);
    inst.validate().map_err(CompactError::from)?;
    if variant == Variant::SiPT && !inst.is_sipt() {
        return Err(CompactError::NotSipt.into());
    }
    let (pruned, dominance) = prune_dominated_scenarios(inst);
    let mut run = Run {
        inst: &pruned,
        variant,
        opts,
        started,
        pool: ColumnPool::default(),
        pricing_calls: 0,
        pricing_reuses: 0,
        last_pricing: None,
    };
    run.pool.insert(initial_column(&pruned, variant)?);

    let mut queue: VecDeque<(Vec<BranchFix>, f64)> = VecDeque::from([(Vec::new(), f64::NEG_INFINITY)]);
    let mut master_nodes = 0;
    let mut root_bound = None;
    let mut certificate = (None, None);
    let mut status = BpStatus::Optimal;
    let best_column = |pool: &ColumnPool| pool.columns.iter().map(|c| c.cost).min().unwrap();
    while let Some((fixes, parent_bound)) = queue.pop_front() {
        let incumbent = best_column(&run.pool);
        if (parent_bound - 1e-6).ceil() >= incumbent as f64 {
            continue;
        }
        if opts.max_master_nodes.is_some_and(|m| master_nodes >= m) {
            queue.push_front((fixes, parent_bound));
            status = BpStatus::Limit;
            break;
        }
        master_nodes += 1;
        match run.solve_node(&fixes, Some(incumbent), &mut certificate)? {
            NodeEnd::Solved { lp_bound, branch, .. } => {
                if fixes.is_empty() {
                    root_bound = Some(lp_bound);
                }
                if let Some(arc) = branch {
                    for one in [false, true] {
                        let mut child = fixes.clone();
                        child.push(BranchFix { arc, one });
                        queue.push_back((child, lp_bound));
                    }
                }
            }
            NodeEnd::Infeasible => {}
            NodeEnd::Limit => {
                queue.push_front((fixes, parent_bound));
                status = BpStatus::Limit;
                break;
            }
            NodeEnd::Stalled => {
                queue.push_front((fixes, parent_bound));
                status = BpStatus::Heuristic;
                break;
            }
        }
    }
    let incumbent = best_column(&run.pool);
    let bound = if status == BpStatus::Optimal {
        incumbent as f64
    } else {
        queue
            .iter()
            .map(|(_, b)| *b)
            .fold(incumbent as f64, f64::min)
            .max(root_bound.unwrap_or(f64::NEG_INFINITY))
            .min(incumbent as f64)
    };
    let best = run
        .pool
        .columns
        .iter()
        .find(|c| c.cost == incumbent)
        .unwrap();
    let schedule = dominance.restore(inst, &best.schedule);
    let cost = evaluate(inst, &schedule).map_err(CompactError::from)?;
    let stats = BpStats {
        instance: inst.name.clone(),
        variant,
        master_nodes,
        pricing_calls: run.pricing_calls,
        pricing_reuses: run.pricing_reuses,
        columns: run.pool.len(),
        status,
        root_bound,
        bound,
        min_reduced_cost: certificate.0,
        rmp_gap: certificate.1,
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok(BpOutcome {
        schedule,
        cost,
        stats,
    })
}
