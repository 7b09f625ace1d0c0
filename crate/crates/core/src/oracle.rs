//! Exhaustive solver for tiny instances, used as ground truth.
//!
//! Every truck is either left unserved or given a scenario and a start
//! period inside its window. Dock feasibility of a set of placements is an
//! interval-overlap question (identical docks), so dock chains are recovered
//! afterwards by first-fit colouring in start order.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::core::{check_feasibility, evaluate, Assignment, CostBreakdown, Instance, Profile, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_trucks: usize,
    pub max_horizon: u32,
    pub max_scenarios: usize,
    pub max_docks: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_trucks: 6,
            max_horizon: 14,
            max_scenarios: 3,
            max_docks: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Depth-first search with bound pruning and incremental checks.
    #[default]
    Pruned,
    /// Every combination of placements, each checked in full. At most
    /// three trucks.
    Full,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for the oracle: {0}")]
    LimitExceeded(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub schedule: Schedule,
    pub cost: CostBreakdown,
    /// Leaves (full mode) or search nodes (pruned mode) visited.
    pub explored: u64,
}

pub const FULL_MODE_MAX_TRUCKS: usize = 3;

fn check_limits(inst: &Instance, limits: &OracleLimits) -> Result<(), OracleError> {
    let fail = |what: String| Err(OracleError::LimitExceeded(what));
    if inst.trucks.len() > limits.max_trucks {
        return fail(format!("{} trucks > {}", inst.trucks.len(), limits.max_trucks));
    }
    if inst.horizon > limits.max_horizon {
        return fail(format!("horizon {} > {}", inst.horizon, limits.max_horizon));
    }
    if inst.max_scenarios() > limits.max_scenarios {
        return fail(format!(
            "{} scenarios on one truck > {}",
            inst.max_scenarios(),
            limits.max_scenarios
        ));
    }
    if inst.docks > limits.max_docks {
        return fail(format!("{} docks > {}", inst.docks, limits.max_docks));
    }
    Ok(())
}

/// Placement choice for one truck; `None` leaves it unserved.
type Choice = Option<(usize, u32)>;

/// Options of truck `k` in enumeration order: scenarios in order, starts
/// ascending, unserved last.
fn options(inst: &Instance, k: usize) -> Vec<Choice> {
    let truck = &inst.trucks[k];
    let mut out = Vec::new();
    for s in 0..truck.scenarios.len() {
        if let Some(last) = truck.latest_start(s) {
            out.extend((truck.arrival..=last).map(|t| Some((s, t))));
        }
    }
    out.push(None);
    out
}

fn choice_cost(inst: &Instance, k: usize, c: Choice) -> i64 {
    let truck = &inst.trucks[k];
    match c {
        Some((_, t)) => truck.waiting_cost(t),
        None => truck.miss_penalty as i64,
    }
}

/// Assigns placements to docks by first-fit in start order. Returns `None`
/// when more than `docks` intervals overlap.
pub fn assign_docks(inst: &Instance, choices: &[Choice]) -> Option<Schedule> {
    let mut placed: Vec<(u32, usize, usize)> = choices
        .iter()
        .enumerate()
        .filter_map(|(k, c)| c.map(|(s, t)| (t, k, s)))
        .collect();
    placed.sort();
    let mut sched = Schedule::empty(inst.docks as usize);
    let mut free_at = vec![0u32; inst.docks as usize];
    for (t, k, s) in placed {
        let truck = &inst.trucks[k];
        let d = free_at.iter().position(|&f| f <= t)?;
        free_at[d] = t + truck.span(s);
        sched.per_dock[d].push(Assignment {
            truck: truck.id,
            scenario: s,
            start: t,
        });
    }
    sched.unserved = choices
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(k, _)| inst.trucks[k].id)
        .collect::<BTreeSet<_>>();
    Some(sched)
}

pub fn brute_force(inst: &Instance, limits: &OracleLimits) -> Result<OracleSolution, OracleError> {
    brute_force_with(inst, limits, OracleMode::Pruned)
}

pub fn brute_force_with(
    inst: &Instance,
    limits: &OracleLimits,
    mode: OracleMode,
) -> Result<OracleSolution, OracleError> {
    inst.validate().map_err(|e| OracleError::Invalid(e.to_string()))?;
    check_limits(inst, limits)?;
    let opts: Vec<Vec<Choice>> = (0..inst.trucks.len()).map(|k| options(inst, k)).collect();
    // leaving everything unserved is feasible, so this bound is never beaten
    // by an infeasible leaf and the first optimal leaf is always accepted
    let mut search = Search {
        inst,
        opts: &opts,
        best_cost: inst.total_miss_penalty() + 1,
        best: Vec::new(),
        current: Vec::with_capacity(inst.trucks.len()),
        explored: 0,
    };
    match mode {
        OracleMode::Pruned => {
            let mut profile = Profile::new(inst.horizon);
            search.pruned(&mut profile, 0);
        }
        OracleMode::Full => {
            if inst.trucks.len() > FULL_MODE_MAX_TRUCKS {
                return Err(OracleError::LimitExceeded(format!(
                    "full enumeration supports at most {FULL_MODE_MAX_TRUCKS} trucks"
                )));
            }
            search.full();
        }
    }
    let explored = search.explored;
    let schedule = assign_docks(inst, &search.best).expect("optimum is dock feasible");
    let cost = evaluate(inst, &schedule).expect("oracle schedule is well formed");
    debug_assert_eq!(cost.total, search.best_cost);
    Ok(OracleSolution {
        schedule,
        cost,
        explored,
    })
}

struct Search<'a> {
    inst: &'a Instance,
    opts: &'a [Vec<Choice>],
    best_cost: i64,
    best: Vec<Choice>,
    current: Vec<Choice>,
    explored: u64,
}

impl Search<'_> {
    fn partial_cost(&self) -> i64 {
        self.current
            .iter()
            .enumerate()
            .map(|(k, &c)| choice_cost(self.inst, k, c))
            .sum()
    }

    /// Cheapest option of each remaining truck taken in isolation against
    /// the current profile.
    fn remaining_bound(&self, profile: &Profile, from: usize) -> i64 {
        (from..self.opts.len())
            .map(|k| {
                let truck = &self.inst.trucks[k];
                self.opts[k]
                    .iter()
                    .filter(|c| match c {
                        Some((s, t)) => profile.fits(self.inst, truck, *s, *t),
                        None => true,
                    })
                    .map(|&c| choice_cost(self.inst, k, c))
                    .min()
                    .unwrap_or(0)
            })
            .sum()
    }

    fn pruned(&mut self, profile: &mut Profile, k: usize) {
        self.explored += 1;
        let partial = self.partial_cost();
        if k == self.opts.len() {
            if partial < self.best_cost {
                self.best_cost = partial;
                self.best = self.current.clone();
            }
            return;
        }
        if partial + self.remaining_bound(profile, k) >= self.best_cost {
            return;
        }
        let truck = &self.inst.trucks[k];
        for &c in &self.opts[k] {
            if partial + choice_cost(self.inst, k, c) >= self.best_cost {
                continue;
            }
            match c {
                Some((s, t)) => {
                    if !profile.fits(self.inst, truck, s, t) {
                        continue;
                    }
                    profile.add(truck, s, t);
                    self.current.push(c);
                    self.pruned(profile, k + 1);
                    self.current.pop();
                    profile.remove(truck, s, t);
                }
                None => {
                    self.current.push(c);
                    self.pruned(profile, k + 1);
                    self.current.pop();
                }
            }
        }
    }

    fn full(&mut self) {
        let k = self.current.len();
        if k == self.opts.len() {
            self.explored += 1;
            let Some(sched) = assign_docks(self.inst, &self.current) else {
                return;
            };
            if !check_feasibility(self.inst, &sched).is_empty() {
                return;
            }
            let cost = evaluate(self.inst, &sched).unwrap().total;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.current.clone();
            }
            return;
        }
        for i in 0..self.opts[k].len() {
            self.current.push(self.opts[k][i]);
            self.full();
            self.current.pop();
        }
    }
}
