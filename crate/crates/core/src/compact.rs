//! Compact time-indexed model.
//!
//! Nodes are truck positions shifted by one (`inst.trucks[k]` is node
//! `k + 1`); node 0 is the dummy truck that opens and closes every dock.
//! An arc `x(i, j, t, s)` fires at period `t`: truck `j` starts setting up
//! at `t` under scenario `s`, occupies the dock until `t + setup + p`, and
//! holds its resources over `t + setup + 1 ..= t + setup + p`. Arcs into the
//! dummy carry no scenario; under SiPT no arc carries one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use crossdock_milp::{
    solve_mip, CutCallback, MipResult, MipStatus, ModelError, ModelIR, NodeOrder, Row,
    SearchOptions, Sense, VarId,
};
use thiserror::Error;

use crate::core::{
    evaluate, prune_dominated_scenarios, Assignment, CoreError, CostBreakdown, Instance, Resource,
    Schedule, Truck, Variant,
};

pub const DUMMY: usize = 0;

#[derive(Debug, Error)]
pub enum CompactError {
    #[error(transparent)]
    Instance(#[from] CoreError),
    #[error("instance has scenario-dependent processing times; SiPT needs one per truck")]
    NotSipt,
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("cannot decode solution: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub t: u32,
    pub s: Option<usize>,
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.s {
            Some(s) => write!(f, "x_{}_{}_{}_{}", self.from, self.to, self.t, s),
            None => write!(f, "x_{}_{}_{}", self.from, self.to, self.t),
        }
    }
}

/// Variable lookup for a built model.
#[derive(Debug, Clone)]
pub struct VarIndex {
    pub variant: Variant,
    pub trucks: usize,
    pub arcs: Vec<Arc>,
    pub arc_vars: Vec<VarId>,
    arc_pos: HashMap<Arc, usize>,
    /// Per node, positions (into `arcs`) of arcs entering / leaving it.
    pub into: Vec<Vec<usize>>,
    pub out_of: Vec<Vec<usize>>,
    y: HashMap<(usize, u32, usize), VarId>,
    /// `eta[j][s]` for real nodes; `eta[0]` is empty.
    pub eta: Vec<Vec<VarId>>,
    /// Miss indicators (compact) or serve indicators (pricing), per node.
    pub z: Vec<Option<VarId>>,
    pub h: Vec<Option<VarId>>,
    /// Unused-dock counter.
    pub x000: VarId,
}

impl VarIndex {
    pub fn arc(&self, arc: &Arc) -> Option<VarId> {
        self.arc_pos.get(arc).map(|&p| self.arc_vars[p])
    }

    pub fn y(&self, j: usize, t: u32, s: usize) -> Option<VarId> {
        self.y.get(&(j, t, s)).copied()
    }

    pub fn num_y(&self) -> usize {
        self.y.len()
    }

    /// Arcs whose value is at least one half.
    pub fn active_arcs(&self, values: &[f64]) -> Vec<Arc> {
        self.arcs
            .iter()
            .zip(&self.arc_vars)
            .filter(|(_, v)| values[v.0] > 0.5)
            .map(|(a, _)| *a)
            .collect()
    }
}

pub fn truck_of(inst: &Instance, node: usize) -> &Truck {
    &inst.trucks[node - 1]
}

/// Processing time of node `j` for the scenario carried by an arc.
fn processing(inst: &Instance, j: usize, s: Option<usize>) -> u32 {
    let truck = truck_of(inst, j);
    match s {
        Some(s) => truck.scenarios[s].processing,
        None => truck.scenarios[0].processing,
    }
}

/// Scenario slots an arc into `j` may carry.
fn arc_scenarios(inst: &Instance, variant: Variant, j: usize) -> Vec<Option<usize>> {
    match variant {
        Variant::SdPT => (0..truck_of(inst, j).scenarios.len()).map(Some).collect(),
        Variant::SiPT => vec![None],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixRule {
    /// Arc fires after the successor's deadline.
    AfterDeadline,
    /// Arc fires before the successor arrives.
    BeforeArrival,
    /// Arc fires before the predecessor can possibly be done.
    PredecessorBusy,
    /// Successor cannot finish by its deadline.
    CompletionLate,
    /// First truck of a dock cannot finish inside the horizon.
    HorizonEnd,
    /// Resource period outside `(arrival + setup, deadline]`.
    YWindow,
}

impl FixRule {
    pub const ALL: [FixRule; 6] = [
        FixRule::AfterDeadline,
        FixRule::BeforeArrival,
        FixRule::PredecessorBusy,
        FixRule::CompletionLate,
        FixRule::HorizonEnd,
        FixRule::YWindow,
    ];

    /// Rules without which the model would admit infeasible schedules.
    pub fn is_structural(self) -> bool {
        !matches!(self, FixRule::PredecessorBusy | FixRule::HorizonEnd)
    }
}

/// Number of index tuples removed (or fixed to zero) per rule, plus the
/// per-scenario copies of dummy-closing arcs that are never created.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixingReport {
    pub counts: BTreeMap<FixRule, usize>,
    pub dummy_scenario_copies: usize,
}

impl FixingReport {
    pub fn count(&self, rule: FixRule) -> usize {
        self.counts.get(&rule).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.dummy_scenario_copies
    }

    fn bump(&mut self, rule: FixRule) {
        *self.counts.entry(rule).or_default() += 1;
    }
}

/// First fixing rule that applies to `arc`, checked in rule order.
pub fn arc_rule(inst: &Instance, arc: &Arc) -> Option<FixRule> {
    let t = arc.t;
    if arc.to == DUMMY {
        if arc.from == DUMMY {
            return None;
        }
        let pred = truck_of(inst, arc.from);
        let done = pred.arrival + pred.setup + pred.min_processing();
        return (t < done).then_some(FixRule::PredecessorBusy);
    }
    let succ = truck_of(inst, arc.to);
    let p = processing(inst, arc.to, arc.s);
    if t > succ.deadline {
        return Some(FixRule::AfterDeadline);
    }
    if t < succ.arrival {
        return Some(FixRule::BeforeArrival);
    }
    if arc.from != DUMMY {
        let pred = truck_of(inst, arc.from);
        if t < pred.arrival + pred.setup + pred.min_processing() {
            return Some(FixRule::PredecessorBusy);
        }
    }
    if t + succ.setup + p > succ.deadline {
        return Some(FixRule::CompletionLate);
    }
    if arc.from == DUMMY && t + succ.setup + p > inst.horizon {
        return Some(FixRule::HorizonEnd);
    }
    None
}

pub fn y_in_window(truck: &Truck, t: u32) -> bool {
    t > truck.arrival + truck.setup && t <= truck.deadline
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Eliminate every fixable tuple. When off, all tuples are created and
    /// only the structural rules are imposed through zero upper bounds.
    pub fixing: bool,
    /// Force each dock's closing arc to fire when its last truck finishes.
    pub symmetry: bool,
    /// Replace the per-start resource links by exact occupancy equalities
    /// `y(j,t',s) = sum of starts covering t'` and add per-period dock
    /// occupancy rows. Both are valid for every schedule and tighten the
    /// relaxation considerably.
    pub occupancy: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            fixing: true,
            symmetry: true,
            occupancy: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flavor {
    Compact,
    Pricing,
}

#[derive(Debug, Clone)]
pub struct Built {
    pub model: ModelIR,
    pub index: VarIndex,
    pub fixing: FixingReport,
    pub symmetry_rows: usize,
}

fn check_variant(inst: &Instance, variant: Variant) -> Result<(), CompactError> {
    inst.validate()?;
    if variant == Variant::SiPT && !inst.is_sipt() {
        return Err(CompactError::NotSipt);
    }
    Ok(())
}

/// Builds the compact model. The instance should already be free of
/// dominated scenarios (see [`solve_compact`], which prunes first).
pub fn build(inst: &Instance, variant: Variant, opts: &BuildOptions) -> Result<Built, CompactError> {
    build_with(inst, variant, opts, Flavor::Compact)
}

pub(crate) fn build_with(
    inst: &Instance,
    variant: Variant,
    opts: &BuildOptions,
    flavor: Flavor,
) -> Result<Built, CompactError> {
    check_variant(inst, variant)?;
    let n = inst.trucks.len();
    let horizon = inst.horizon;
    let docks = inst.docks as f64;
    let mut m = ModelIR::new(inst.name.clone());
    let mut report = FixingReport::default();

    // arcs
    let mut arcs = Vec::new();
    let mut ub_zero = Vec::new();
    for j in 1..=n {
        for s in arc_scenarios(inst, variant, j) {
            for i in (0..=n).filter(|&i| i != j) {
                for t in 0..=horizon {
                    let arc = Arc { from: i, to: j, t, s };
                    match arc_rule(inst, &arc) {
                        Some(rule) if opts.fixing => report.bump(rule),
                        Some(rule) => {
                            report.bump(rule);
                            arcs.push(arc);
                            ub_zero.push(rule.is_structural());
                        }
                        None => {
                            arcs.push(arc);
                            ub_zero.push(false);
                        }
                    }
                }
            }
        }
    }
    for i in 1..=n {
        if variant == Variant::SdPT {
            report.dummy_scenario_copies +=
                (truck_of(inst, i).scenarios.len() - 1) * (horizon as usize + 1);
        }
        for t in 0..=horizon {
            let arc = Arc {
                from: i,
                to: DUMMY,
                t,
                s: None,
            };
            match arc_rule(inst, &arc) {
                Some(rule) if opts.fixing => report.bump(rule),
                Some(rule) => {
                    report.bump(rule);
                    arcs.push(arc);
                    ub_zero.push(false);
                }
                None => {
                    arcs.push(arc);
                    ub_zero.push(false);
                }
            }
        }
    }
    let mut arc_vars = Vec::with_capacity(arcs.len());
    let mut arc_pos = HashMap::with_capacity(arcs.len());
    let mut into = vec![Vec::new(); n + 1];
    let mut out_of = vec![Vec::new(); n + 1];
    for (k, (arc, zero)) in arcs.iter().zip(&ub_zero).enumerate() {
        let cost = match (flavor, arc.to) {
            (_, DUMMY) => 0.0,
            _ => {
                let truck = truck_of(inst, arc.to);
                truck.wait_cost as f64 * (arc.t as f64 - truck.arrival as f64)
            }
        };
        let ub = if *zero { 0.0 } else { 1.0 };
        arc_vars.push(m.add_var(arc.to_string(), 0.0, ub, true, cost));
        arc_pos.insert(*arc, k);
        into[arc.to].push(k);
        out_of[arc.from].push(k);
    }

    // y, eta, z / h
    let mut y = HashMap::new();
    let mut eta = vec![Vec::new()];
    let mut z = vec![None];
    let mut h = vec![None];
    for j in 1..=n {
        let truck = truck_of(inst, j);
        for s in 0..truck.scenarios.len() {
            for t in 0..=horizon {
                let inside = y_in_window(truck, t);
                if !inside {
                    report.bump(FixRule::YWindow);
                    if opts.fixing {
                        continue;
                    }
                }
                let ub = if inside { 1.0 } else { 0.0 };
                y.insert((j, t, s), m.add_var(format!("y_{j}_{t}_{s}"), 0.0, ub, true, 0.0));
            }
        }
        let etas = (0..truck.scenarios.len())
            .map(|s| {
                let cost = match flavor {
                    Flavor::Compact => 0.0,
                    Flavor::Pricing => -(truck.miss_penalty as f64),
                };
                m.add_binary(format!("eta_{j}_{s}"), cost)
            })
            .collect();
        eta.push(etas);
        match flavor {
            Flavor::Compact => {
                z.push(Some(m.add_binary(format!("z_{j}"), truck.miss_penalty as f64)));
                h.push(None);
            }
            Flavor::Pricing => {
                z.push(None);
                h.push(Some(m.add_binary(format!("h_{j}"), 0.0)));
            }
        }
    }
    if flavor == Flavor::Pricing {
        m.objective_offset = inst.total_miss_penalty() as f64;
    }
    let x000 = m.add_var("x_0_0_0", 0.0, docks, true, 0.0);
    let index = VarIndex {
        variant,
        trucks: n,
        arcs,
        arc_vars,
        arc_pos,
        into,
        out_of,
        y,
        eta,
        z,
        h,
        x000,
    };
    let ix = &index;
    let var_of = |k: usize| ix.arc_vars[k];

    // dock rows
    let dummy_out: Vec<(VarId, f64)> = ix.out_of[DUMMY].iter().map(|&k| (var_of(k), 1.0)).collect();
    let dummy_in: Vec<(VarId, f64)> = ix.into[DUMMY].iter().map(|&k| (var_of(k), 1.0)).collect();
    match flavor {
        Flavor::Compact => {
            let mut out = dummy_out;
            out.push((x000, 1.0));
            m.add_constraint("dock_out", out, Sense::Eq, docks);
            let mut inn = dummy_in;
            inn.push((x000, 1.0));
            m.add_constraint("dock_in", inn, Sense::Eq, docks);
        }
        Flavor::Pricing => {
            m.add_constraint("dock_out", dummy_out, Sense::Le, docks);
            m.add_constraint("dock_in", dummy_in, Sense::Le, docks);
            // served trucks minus real-to-real arcs counts the used docks
            let mut chains: Vec<(VarId, f64)> =
                (1..=n).map(|j| (ix.h[j].unwrap(), 1.0)).collect();
            chains.extend(
                ix.arcs
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.from != DUMMY && a.to != DUMMY)
                    .map(|(k, _)| (var_of(k), -1.0)),
            );
            chains.push((x000, 1.0));
            m.add_constraint("chains", chains, Sense::Eq, docks);
        }
    }

    // degree and assignment rows
    for j in 1..=n {
        let etas: Vec<VarId> = ix.eta[j].clone();
        let inn: Vec<(VarId, f64)> = ix.into[j].iter().map(|&k| (var_of(k), 1.0)).collect();
        let out: Vec<(VarId, f64)> = ix.out_of[j].iter().map(|&k| (var_of(k), 1.0)).collect();
        match flavor {
            Flavor::Compact => {
                let mut row = inn;
                row.extend(etas.iter().map(|&e| (e, -1.0)));
                m.add_constraint(format!("in_{j}"), row, Sense::Eq, 0.0);
                let mut row = out;
                row.extend(etas.iter().map(|&e| (e, -1.0)));
                m.add_constraint(format!("out_{j}"), row, Sense::Eq, 0.0);
                let mut row: Vec<(VarId, f64)> = etas.iter().map(|&e| (e, 1.0)).collect();
                row.push((ix.z[j].unwrap(), 1.0));
                m.add_constraint(format!("assign_{j}"), row, Sense::Eq, 1.0);
            }
            Flavor::Pricing => {
                let hj = ix.h[j].unwrap();
                let mut flow = inn.clone();
                flow.extend(out.iter().map(|&(v, _)| (v, -1.0)));
                m.add_constraint(format!("flow_{j}"), flow, Sense::Eq, 0.0);
                let mut row = inn;
                row.push((hj, -1.0));
                m.add_constraint(format!("in_{j}"), row, Sense::Eq, 0.0);
                let mut row = out;
                row.push((hj, -1.0));
                m.add_constraint(format!("out_{j}"), row, Sense::Ge, 0.0);
                let mut row: Vec<(VarId, f64)> = etas.iter().map(|&e| (e, 1.0)).collect();
                row.push((hj, -1.0));
                m.add_constraint(format!("serve_{j}"), row, Sense::Eq, 0.0);
            }
        }
    }

    // sequencing and resource linking, one group per (j, t, s)
    let mut groups: BTreeMap<(usize, u32, Option<usize>), Vec<VarId>> = BTreeMap::new();
    for (k, a) in ix.arcs.iter().enumerate() {
        if a.to != DUMMY {
            groups.entry((a.to, a.t, a.s)).or_default().push(var_of(k));
        }
    }
    for (&(j, t, s), inflow) in &groups {
        let truck = truck_of(inst, j);
        let free = t + truck.setup + processing(inst, j, s);
        let lhs: Vec<(VarId, f64)> = inflow.iter().map(|&v| (v, 1.0)).collect();
        let mut row = lhs.clone();
        row.extend(
            ix.out_of[j]
                .iter()
                .filter(|&&k| ix.arcs[k].t >= free)
                .map(|&k| (var_of(k), -1.0)),
        );
        let tag = s.map_or(String::new(), |s| format!("_{s}"));
        m.add_constraint(format!("seq_{j}_{t}{tag}"), row, Sense::Le, 0.0);
        if opts.occupancy {
            continue;
        }
        for tp in t + truck.setup + 1..=free {
            let ys: Vec<VarId> = match s {
                Some(s) => ix.y(j, tp, s).into_iter().collect(),
                None => (0..truck.scenarios.len()).filter_map(|s| ix.y(j, tp, s)).collect(),
            };
            if ys.is_empty() {
                // only reachable for arcs already bounded at zero
                continue;
            }
            let mut row = lhs.clone();
            row.extend(ys.iter().map(|&v| (v, -1.0)));
            m.add_constraint(format!("link_{j}_{t}{tag}_{tp}"), row, Sense::Le, 0.0);
        }
    }

    if opts.occupancy {
        for j in 1..=n {
            let truck = truck_of(inst, j);
            for s in arc_scenarios(inst, variant, j) {
                let span = truck.setup + processing(inst, j, s);
                for tp in 0..=horizon {
                    let ys: Vec<VarId> = match s {
                        Some(s) => ix.y(j, tp, s).into_iter().collect(),
                        None => (0..truck.scenarios.len()).filter_map(|s| ix.y(j, tp, s)).collect(),
                    };
                    let mut row: Vec<(VarId, f64)> = ys.iter().map(|&v| (v, -1.0)).collect();
                    let first = tp.saturating_sub(span);
                    for t0 in first..tp.saturating_sub(truck.setup) {
                        if let Some(starts) = groups.get(&(j, t0, s)) {
                            row.extend(starts.iter().map(|&v| (v, 1.0)));
                        }
                    }
                    if row.is_empty() {
                        continue;
                    }
                    let tag = s.map_or(String::new(), |s| format!("_{s}"));
                    m.add_constraint(format!("occ_{j}_{tp}{tag}"), row, Sense::Eq, 0.0);
                }
            }
        }
        for t in 0..=horizon {
            let mut row = Vec::new();
            for (&(j, t0, s), starts) in &groups {
                let span = truck_of(inst, j).setup + processing(inst, j, s);
                if t0 <= t && t < t0 + span {
                    row.extend(starts.iter().map(|&v| (v, 1.0)));
                }
            }
            if row.len() > inst.docks as usize {
                m.add_constraint(format!("docks_{t}"), row, Sense::Le, docks);
            }
        }
    }

    for j in 1..=n {
        let truck = truck_of(inst, j);
        for (s, sc) in truck.scenarios.iter().enumerate() {
            let eta_js = ix.eta[j][s];
            let mut sum: Vec<(VarId, f64)> = (0..=horizon)
                .filter(|&t| y_in_window(truck, t))
                .filter_map(|t| ix.y(j, t, s))
                .map(|v| (v, 1.0))
                .collect();
            sum.push((eta_js, -(sc.processing as f64)));
            m.add_constraint(format!("ysum_{j}_{s}"), sum, Sense::Eq, 0.0);
            for t in 0..=horizon {
                if let Some(v) = ix.y(j, t, s) {
                    m.add_constraint(
                        format!("yle_{j}_{t}_{s}"),
                        vec![(v, 1.0), (eta_js, -1.0)],
                        Sense::Le,
                        0.0,
                    );
                }
            }
        }
    }

    for r in Resource::ALL {
        let cap = inst.capacity.of(r) as f64;
        for t in 0..=horizon {
            let mut row = Vec::new();
            let mut worst = 0.0;
            for j in 1..=n {
                let truck = truck_of(inst, j);
                let mut peak: f64 = 0.0;
                for (s, sc) in truck.scenarios.iter().enumerate() {
                    let d = sc.demand(r) as f64;
                    if let (Some(v), true) = (ix.y(j, t, s), d > 0.0) {
                        row.push((v, d));
                        peak = peak.max(d);
                    }
                }
                worst += peak;
            }
            // rows that can never bind are left out
            if worst > cap {
                m.add_constraint(format!("res_{}_{t}", r.name()), row, Sense::Le, cap);
            }
        }
    }

    let symmetry_rows = if opts.symmetry {
        add_symmetry(inst, &mut m, &index)
    } else {
        0
    };
    Ok(Built {
        model: m,
        index,
        fixing: report,
        symmetry_rows,
    })
}

/// Fixes to zero every arc and resource variable covered by a fixing rule
/// in a model built without elimination. Returns the per-rule counts.
pub fn apply_fixing(inst: &Instance, model: &mut ModelIR, index: &VarIndex) -> FixingReport {
    let mut report = FixingReport::default();
    for (arc, v) in index.arcs.iter().zip(&index.arc_vars) {
        if let Some(rule) = arc_rule(inst, arc) {
            report.bump(rule);
            model.vars[v.0].upper = 0.0;
        }
    }
    for (&(j, t, _), v) in &index.y {
        if !y_in_window(truck_of(inst, j), t) {
            report.bump(FixRule::YWindow);
            model.vars[v.0].upper = 0.0;
        }
    }
    if index.variant == Variant::SdPT {
        report.dummy_scenario_copies = (1..=index.trucks)
            .map(|i| (truck_of(inst, i).scenarios.len() - 1) * index.into[DUMMY].iter().filter(|&&k| index.arcs[k].from == i).count())
            .sum();
    }
    report
}

/// Adds `x(i,0,t) <= sum_s sum_l x(l,i,t - p_i^s - setup_i, s)` for every
/// dock-closing arc; arcs with an empty right side are fixed to zero.
/// Returns the number of rows added.
pub fn add_symmetry(inst: &Instance, model: &mut ModelIR, index: &VarIndex) -> usize {
    let mut rows = 0;
    for &k in &index.into[DUMMY] {
        let arc = index.arcs[k];
        let v = index.arc_vars[k];
        let truck = truck_of(inst, arc.from);
        let mut row = vec![(v, 1.0)];
        for &q in &index.into[arc.from] {
            let a = index.arcs[q];
            let span = truck.setup + processing(inst, arc.from, a.s);
            if a.t + span == arc.t {
                row.push((index.arc_vars[q], -1.0));
            }
        }
        if row.len() == 1 {
            model.vars[v.0].upper = 0.0;
        } else {
            model.add_constraint(format!("sym_{}_{}", arc.from, arc.t), row, Sense::Le, 0.0);
            rows += 1;
        }
    }
    rows
}

/// Greedy separation of `sum_{j in P} y(j,t,s_j) <= |P| - 1` at period `t`.
///
/// For each resource, trucks whose window contains `t` are ranked by their
/// largest `y(j,t,.)` value (scenario with that value selected) and taken
/// in that order until the selected demands exceed the capacity; the cut is
/// returned when it is violated by more than 1e-6.
pub fn separate_combinatorial(
    inst: &Instance,
    index: &VarIndex,
    values: &[f64],
    t: u32,
) -> Vec<Row> {
    let mut picks: Vec<(f64, usize, usize, VarId)> = Vec::new();
    for j in 1..=index.trucks {
        let truck = truck_of(inst, j);
        if !y_in_window(truck, t) {
            continue;
        }
        let best = (0..truck.scenarios.len())
            .filter_map(|s| index.y(j, t, s).map(|v| (values[v.0], s, v)))
            .fold(None, |acc: Option<(f64, usize, VarId)>, c| match acc {
                Some(a) if a.0 >= c.0 => Some(a),
                _ => Some(c),
            });
        if let Some((val, s, v)) = best {
            if val > 1e-9 {
                picks.push((val, j, s, v));
            }
        }
    }
    picks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut cuts = Vec::new();
    for r in Resource::ALL {
        let cap = inst.capacity.of(r);
        let mut used = 0;
        let mut lhs = 0.0;
        for (k, &(val, j, s, _)) in picks.iter().enumerate() {
            used += truck_of(inst, j).scenarios[s].demand(r);
            lhs += val;
            if used > cap {
                let size = k + 1;
                if lhs > size as f64 - 1.0 + 1e-6 {
                    let members: Vec<String> = picks[..size].iter().map(|p| format!("{}.{}", p.1, p.2)).collect();
                    cuts.push(Row::new(
                        format!("comb_{}_{t}_{}", r.name(), members.join("_")),
                        picks[..size].iter().map(|p| (p.3, 1.0)).collect(),
                        Sense::Le,
                        size as f64 - 1.0,
                    ));
                }
                break;
            }
        }
    }
    cuts
}

struct CombinatorialCuts<'a> {
    inst: &'a Instance,
    index: &'a VarIndex,
}

impl CutCallback for CombinatorialCuts<'_> {
    fn lazy(&self, _values: &[f64]) -> Vec<Row> {
        Vec::new()
    }

    fn user(&self, values: &[f64]) -> Vec<Row> {
        (0..=self.inst.horizon)
            .flat_map(|t| separate_combinatorial(self.inst, self.index, values, t))
            .collect()
    }
}

/// Reads dock chains out of an integer solution.
pub fn decode(inst: &Instance, index: &VarIndex, values: &[f64]) -> Result<Schedule, CompactError> {
    let n = index.trucks;
    let mut next: Vec<Option<Arc>> = vec![None; n + 1];
    let mut starts = Vec::new();
    for arc in index.active_arcs(values) {
        if arc.from == DUMMY {
            starts.push(arc);
        } else if next[arc.from].replace(arc).is_some() {
            return Err(CompactError::Decode(format!("truck node {} has two successors", arc.from)));
        }
    }
    if starts.len() > inst.docks as usize {
        return Err(CompactError::Decode(format!("{} chains for {} docks", starts.len(), inst.docks)));
    }
    let mut sched = Schedule::empty(inst.docks as usize);
    let mut served = vec![false; n + 1];
    for (d, first) in starts.iter().enumerate() {
        let mut arc = *first;
        while arc.to != DUMMY {
            let j = arc.to;
            if served[j] {
                return Err(CompactError::Decode(format!("truck node {j} visited twice")));
            }
            served[j] = true;
            let scenario = match arc.s {
                Some(s) => s,
                None => index.eta[j]
                    .iter()
                    .position(|v| values[v.0] > 0.5)
                    .ok_or_else(|| CompactError::Decode(format!("truck node {j} has no scenario")))?,
            };
            sched.per_dock[d].push(Assignment {
                truck: truck_of(inst, j).id,
                scenario,
                start: arc.t,
            });
            arc = next[j].ok_or_else(|| CompactError::Decode(format!("chain breaks after node {j}")))?;
        }
    }
    for j in 1..=n {
        let chosen = index.eta[j].iter().any(|v| values[v.0] > 0.5);
        if chosen != served[j] {
            return Err(CompactError::Decode(format!("truck node {j} scenario choice disagrees with arcs")));
        }
        if !served[j] {
            sched.unserved.insert(truck_of(inst, j).id);
        }
    }
    Ok(sched)
}

/// Variable values describing `sched` (indices relative to `inst`), or
/// `None` when the schedule uses tuples absent from the model.
pub fn encode(inst: &Instance, index: &VarIndex, num_vars: usize, sched: &Schedule) -> Option<Vec<f64>> {
    let mut x = vec![0.0; num_vars];
    let node_of: HashMap<u32, usize> = inst.trucks.iter().enumerate().map(|(k, t)| (t.id, k + 1)).collect();
    let mut used_docks = 0;
    for dock in &sched.per_dock {
        if dock.is_empty() {
            continue;
        }
        used_docks += 1;
        let mut prev = DUMMY;
        for a in dock {
            let j = *node_of.get(&a.truck)?;
            let s = match index.variant {
                Variant::SdPT => Some(a.scenario),
                Variant::SiPT => None,
            };
            let v = index.arc(&Arc { from: prev, to: j, t: a.start, s })?;
            x[v.0] = 1.0;
            x[index.eta[j].get(a.scenario)?.0] = 1.0;
            if let Some(h) = index.h[j] {
                x[h.0] = 1.0;
            }
            let truck = truck_of(inst, j);
            for tp in crate::core::occupancy(truck, a.scenario, a.start) {
                x[index.y(j, tp, a.scenario)?.0] = 1.0;
            }
            prev = j;
        }
        let last = dock.last().unwrap();
        let truck = truck_of(inst, prev);
        let done = last.start + truck.span(last.scenario);
        let v = index.arc(&Arc { from: prev, to: DUMMY, t: done, s: None })?;
        x[v.0] = 1.0;
    }
    for &id in &sched.unserved {
        if let Some(z) = index.z[*node_of.get(&id)?] {
            x[z.0] = 1.0;
        }
    }
    x[index.x000.0] = (inst.docks - used_docks) as f64;
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Limit,
    Infeasible,
}

impl SolveStatus {
    pub fn from_mip(status: MipStatus) -> Self {
        match status {
            MipStatus::Optimal => SolveStatus::Optimal,
            MipStatus::Feasible => SolveStatus::Feasible,
            MipStatus::Limit => SolveStatus::Limit,
            MipStatus::Infeasible => SolveStatus::Infeasible,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Limit => "Limit",
            SolveStatus::Infeasible => "Infeasible",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompactOptions {
    /// `None` picks SiPT when every truck has one processing time.
    pub variant: Option<Variant>,
    pub build: BuildOptions,
    pub combinatorial_cuts: bool,
    pub node_order: NodeOrder,
    pub time_limit: Option<Duration>,
    /// Seed the search with the greedy schedule.
    pub warm_start: bool,
    /// Branch on serve/miss and scenario choices before arcs.
    pub decision_priority: bool,
}

impl Default for CompactOptions {
    fn default() -> Self {
        CompactOptions {
            variant: None,
            build: BuildOptions::default(),
            combinatorial_cuts: false,
            node_order: NodeOrder::BreadthFirst,
            time_limit: None,
            warm_start: true,
            decision_priority: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompactStats {
    pub instance: String,
    pub variant: Variant,
    pub vars: usize,
    pub rows: usize,
    pub fixing: FixingReport,
    pub symmetry_rows: usize,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub status: SolveStatus,
    pub bound: f64,
    pub gap: Option<f64>,
    pub seconds: f64,
}

impl CompactStats {
    pub const CSV_HEADER: &'static str = "instance,variant,nodes,status,gap,seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3}",
            self.instance,
            self.variant,
            self.nodes,
            self.status,
            self.gap.map(|g| format!("{g}")).unwrap_or_default(),
            self.seconds
        )
    }
}

#[derive(Debug, Clone)]
pub struct CompactOutcome {
    pub schedule: Option<Schedule>,
    pub cost: Option<CostBreakdown>,
    pub stats: CompactStats,
}

/// Branching classes: serve indicators, then scenario choices, then the rest.
pub fn decision_priority(model: &ModelIR, index: &VarIndex) -> Vec<u8> {
    let mut p = vec![0u8; model.num_vars()];
    for v in index.z.iter().chain(&index.h).flatten() {
        p[v.0] = 2;
    }
    for v in index.eta.iter().flatten() {
        p[v.0] = 1;
    }
    p
}

pub fn resolve_variant(inst: &Instance, requested: Option<Variant>) -> Variant {
    requested.unwrap_or_else(|| inst.natural_variant())
}

pub fn solve_compact(inst: &Instance, opts: &CompactOptions) -> Result<CompactOutcome, CompactError> {
    let started = Instant::now();
    let variant = resolve_variant(inst, opts.variant);
    check_variant(inst, variant)?;
    let (pruned, dominance) = prune_dominated_scenarios(inst);
    let built = build(&pruned, variant, &opts.build)?;
    let mut warm = Vec::new();
    if opts.warm_start {
        let greedy = crate::bp::initial_schedule(&pruned);
        if let Some(v) = encode(&pruned, &built.index, built.model.num_vars(), &greedy) {
            warm.push(v);
        }
    }
    let cuts = CombinatorialCuts {
        inst: &pruned,
        index: &built.index,
    };
    let search = SearchOptions {
        node_order: opts.node_order,
        time_limit: opts.time_limit.map(|t| t.saturating_sub(started.elapsed())),
        callback: opts
            .combinatorial_cuts
            .then_some(&cuts as &dyn CutCallback),
        user_cut_rounds: if opts.combinatorial_cuts { 5 } else { 0 },
        warm_starts: warm,
        priority: if opts.decision_priority {
            decision_priority(&built.model, &built.index)
        } else {
            Vec::new()
        },
        ..Default::default()
    };
    let result: MipResult = solve_mip(&built.model, &search)?;
    let (schedule, cost) = match &result.values {
        Some(values) => {
            let sched = decode(&pruned, &built.index, values)?;
            let sched = dominance.restore(inst, &sched);
            let cost = evaluate(inst, &sched)?;
            let reported = result.objective.unwrap().round() as i64;
            if cost.total != reported {
                return Err(CompactError::Decode(format!(
                    "decoded cost {} differs from model objective {reported}",
                    cost.total
                )));
            }
            (Some(sched), Some(cost))
        }
        None => (None, None),
    };
    let status = SolveStatus::from_mip(result.status);
    let stats = CompactStats {
        instance: inst.name.clone(),
        variant,
        vars: built.model.num_vars(),
        rows: built.model.num_rows(),
        fixing: built.fixing,
        symmetry_rows: built.symmetry_rows,
        nodes: result.nodes,
        lp_iterations: result.lp_iterations,
        status,
        bound: result.bound,
        gap: (status != SolveStatus::Optimal).then(|| result.gap()).flatten(),
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok(CompactOutcome {
        schedule,
        cost,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::tests::toy1;
    use crate::core::{Capacity, ResourceScenario};
    use crate::instgen::{generate, GenParams};
    use crate::oracle::{brute_force, OracleLimits};
    use crossdock_milp::solve_lp;

    fn truck(id: u32, arrival: u32, deadline: u32, setup: u32, scenarios: Vec<ResourceScenario>) -> Truck {
        Truck {
            id,
            arrival,
            deadline,
            setup,
            wait_cost: 2,
            miss_penalty: 200,
            scenarios,
        }
    }

    fn solve_opt(inst: &Instance, opts: CompactOptions) -> i64 {
        let out = solve_compact(inst, &opts).unwrap();
        assert_eq!(out.stats.status, SolveStatus::Optimal);
        out.cost.unwrap().total
    }

    fn small(seed: u64, variant: Variant) -> Instance {
        let mut p = GenParams::new(10, 2, 4).with_seed(seed).with_variant(variant);
        p.scenario_count_range = (1, 3);
        generate(&p).unwrap()
    }

    #[test]
    fn toy1_starts_on_arrival() {
        let out = solve_compact(&toy1(), &CompactOptions::default()).unwrap();
        assert_eq!(out.cost.unwrap().total, 0);
        let sched = out.schedule.unwrap();
        assert_eq!(sched.assignment_of(1).unwrap().start, 1);
    }

    #[test]
    fn toy1_misses_when_workers_short() {
        let mut inst = toy1();
        inst.capacity = Capacity::new(2, 2, 5);
        let out = solve_compact(&inst, &CompactOptions::default()).unwrap();
        assert_eq!(out.cost.unwrap().total, 100);
        assert!(out.schedule.unwrap().unserved.contains(&1));
    }

    #[test]
    fn fixing_rules_on_examples() {
        let inst = Instance {
            name: "rules".into(),
            horizon: 10,
            docks: 1,
            capacity: Capacity::new(9, 9, 9),
            trucks: vec![
                truck(1, 2, 9, 1, vec![ResourceScenario::new(1, 1, 1, 3)]),
                truck(2, 5, 10, 1, vec![ResourceScenario::new(1, 1, 1, 2)]),
                truck(3, 0, 6, 1, vec![ResourceScenario::new(1, 1, 1, 3)]),
            ],
        };
        let a = |from, to, t| Arc { from, to, t, s: Some(0) };
        assert_eq!(arc_rule(&inst, &a(0, 2, 4)), Some(FixRule::BeforeArrival));
        assert_eq!(arc_rule(&inst, &a(0, 2, 5)), None);
        assert_eq!(arc_rule(&inst, &a(0, 3, 7)), Some(FixRule::AfterDeadline));
        assert_eq!(arc_rule(&inst, &a(0, 3, 3)), Some(FixRule::CompletionLate));
        assert_eq!(arc_rule(&inst, &a(0, 3, 2)), None);
        // truck 1 cannot be done before 2 + 1 + 3 = 6
        assert_eq!(arc_rule(&inst, &a(1, 2, 5)), Some(FixRule::PredecessorBusy));
        assert_eq!(arc_rule(&inst, &a(1, 2, 6)), None);
        let close = Arc { from: 1, to: DUMMY, t: 5, s: None };
        assert_eq!(arc_rule(&inst, &close), Some(FixRule::PredecessorBusy));
        assert!(!y_in_window(&inst.trucks[1], 6));
        assert!(y_in_window(&inst.trucks[1], 7));
    }

    #[test]
    fn fixing_report_matches_apply_fixing() {
        for seed in 0..4 {
            let inst = small(seed, Variant::SdPT);
            let fixed = build(&inst, Variant::SdPT, &BuildOptions::default()).unwrap();
            let mut open = build(
                &inst,
                Variant::SdPT,
                &BuildOptions { fixing: false, ..Default::default() },
            )
            .unwrap();
            let report = apply_fixing(&inst, &mut open.model, &open.index);
            assert_eq!(report, fixed.fixing, "seed {seed}");
            assert!(open.model.num_vars() > fixed.model.num_vars());
            assert_eq!(report.count(FixRule::HorizonEnd), 0);
        }
    }

    #[test]
    fn options_do_not_change_the_optimum() {
        for seed in 0..6 {
            let variant = if seed % 2 == 0 { Variant::SdPT } else { Variant::SiPT };
            let inst = small(seed, variant);
            let oracle = brute_force(&inst, &OracleLimits::default()).unwrap().cost.total;
            for (fixing, symmetry, occupancy) in [
                (true, true, true),
                (false, false, false),
                (true, false, true),
                (false, true, false),
            ] {
                let opts = CompactOptions {
                    build: BuildOptions { fixing, symmetry, occupancy },
                    ..Default::default()
                };
                assert_eq!(solve_opt(&inst, opts), oracle, "seed {seed} {fixing} {symmetry} {occupancy}");
            }
            let plain = CompactOptions {
                warm_start: false,
                decision_priority: false,
                combinatorial_cuts: true,
                ..Default::default()
            };
            assert_eq!(solve_opt(&inst, plain), oracle);
        }
    }

    #[test]
    fn occupancy_rows_tighten_the_relaxation() {
        for seed in 0..4 {
            let inst = small(seed, Variant::SdPT);
            let lp = |occupancy| {
                let b = build(&inst, Variant::SdPT, &BuildOptions { occupancy, ..Default::default() }).unwrap();
                solve_lp(&b.model).objective
            };
            assert!(lp(true) >= lp(false) - 1e-6);
        }
    }

    #[test]
    fn encode_then_decode_round_trips() {
        for seed in 0..4 {
            let inst = small(seed, Variant::SdPT);
            let b = build(&inst, Variant::SdPT, &BuildOptions::default()).unwrap();
            let sched = crate::bp::initial_schedule(&inst);
            let x = encode(&inst, &b.index, b.model.num_vars(), &sched).unwrap();
            for row in &b.model.rows {
                let lhs: f64 = row.coeffs.iter().map(|(v, c)| c * x[v.0]).sum();
                let ok = match row.sense {
                    Sense::Le => lhs <= row.rhs + 1e-9,
                    Sense::Ge => lhs >= row.rhs - 1e-9,
                    Sense::Eq => (lhs - row.rhs).abs() < 1e-9,
                };
                assert!(ok, "seed {seed}: row {} violated", row.name);
            }
            let back = decode(&inst, &b.index, &x).unwrap();
            assert_eq!(evaluate(&inst, &back).unwrap(), evaluate(&inst, &sched).unwrap());
        }
    }

    #[test]
    fn symmetry_pins_closing_arcs() {
        let inst = toy1();
        let b = build(&inst, Variant::SiPT, &BuildOptions::default()).unwrap();
        // truck 1 occupies its dock for 4 periods and may start in 1..=3
        assert!(b.symmetry_rows > 0);
        for &k in &b.index.into[DUMMY] {
            let arc = b.index.arcs[k];
            if arc.from == 1 {
                let v = b.index.arc_vars[k];
                let pinned = b.model.vars[v.0].upper == 0.0;
                assert_eq!(pinned, !(5..=7).contains(&arc.t), "closing arc at {}", arc.t);
            }
        }
    }

    #[test]
    fn combinatorial_cut_on_overloaded_period() {
        let inst = Instance {
            name: "comb".into(),
            horizon: 8,
            docks: 2,
            capacity: Capacity::new(5, 9, 9),
            trucks: vec![
                truck(1, 0, 8, 1, vec![ResourceScenario::new(3, 1, 1, 3)]),
                truck(2, 0, 8, 1, vec![ResourceScenario::new(3, 1, 1, 3)]),
            ],
        };
        let b = build(&inst, Variant::SiPT, &BuildOptions::default()).unwrap();
        let mut x = vec![0.0; b.model.num_vars()];
        x[b.index.y(1, 3, 0).unwrap().0] = 0.8;
        x[b.index.y(2, 3, 0).unwrap().0] = 0.7;
        let cuts = separate_combinatorial(&inst, &b.index, &x, 3);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].rhs, 1.0);
        assert_eq!(cuts[0].coeffs.len(), 2);
        assert!(cuts[0].name.starts_with("comb_personnel_3"));
        // satisfied at 0.5 + 0.5
        x[b.index.y(1, 3, 0).unwrap().0] = 0.5;
        x[b.index.y(2, 3, 0).unwrap().0] = 0.5;
        assert!(separate_combinatorial(&inst, &b.index, &x, 3).is_empty());
        // outside the windows nothing is separated
        assert!(separate_combinatorial(&inst, &b.index, &x, 1).is_empty());
    }

    #[test]
    fn sipt_requested_on_sdpt_instance_fails() {
        let mut inst = toy1();
        inst.trucks[0].scenarios.push(ResourceScenario::new(1, 1, 1, 2));
        let opts = CompactOptions { variant: Some(Variant::SiPT), ..Default::default() };
        assert!(matches!(solve_compact(&inst, &opts), Err(CompactError::NotSipt)));
    }

    #[test]
    fn csv_row_shape() {
        let out = solve_compact(&toy1(), &CompactOptions::default()).unwrap();
        let row = out.stats.csv_row();
        assert!(row.starts_with("toy1,SiPT,"));
        assert_eq!(row.split(',').count(), CompactStats::CSV_HEADER.split(',').count());
    }
}
