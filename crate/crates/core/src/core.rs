//! Domain types, file I/O, cost evaluation, feasibility checking and
//! scenario dominance.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid {field}{}: {message}", truck_suffix(*.truck))]
    Invalid {
        field: &'static str,
        truck: Option<u32>,
        message: String,
    },
    #[error("unknown truck id {0}")]
    UnknownTruck(u32),
    #[error("truck {0} appears more than once in the schedule")]
    DuplicateTruck(u32),
    #[error("truck {0} is neither served nor unserved")]
    MissingTruck(u32),
    #[error("truck {truck} has no scenario {scenario}")]
    UnknownScenario { truck: u32, scenario: usize },
    #[error("dock count mismatch: instance has {expected}, schedule has {found}")]
    DockMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn truck_suffix(truck: Option<u32>) -> String {
    truck.map(|t| format!(" (truck {t})")).unwrap_or_default()
}

fn invalid(field: &'static str, truck: Option<u32>, message: impl Into<String>) -> CoreError {
    CoreError::Invalid {
        field,
        truck,
        message: message.into(),
    }
}

/// Problem variant: scenario-invariant or scenario-dependent processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    SiPT,
    SdPT,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::SiPT => "SiPT",
            Variant::SdPT => "SdPT",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sipt" => Ok(Variant::SiPT),
            "sdpt" => Ok(Variant::SdPT),
            other => Err(format!("unknown variant '{other}' (expected sipt or sdpt)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    Workers,
    Equipment,
    Vehicles,
}

impl Resource {
    pub const ALL: [Resource; 3] = [Resource::Workers, Resource::Equipment, Resource::Vehicles];

    pub fn name(self) -> &'static str {
        match self {
            Resource::Workers => "personnel",
            Resource::Equipment => "equipment",
            Resource::Vehicles => "vehicles",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One way of serving a truck (RDS): crew, machines, vehicles and the
/// resulting processing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceScenario {
    #[serde(rename = "personnel")]
    pub workers: u32,
    pub equipment: u32,
    pub vehicles: u32,
    pub processing: u32,
}

impl ResourceScenario {
    pub fn new(workers: u32, equipment: u32, vehicles: u32, processing: u32) -> Self {
        ResourceScenario {
            workers,
            equipment,
            vehicles,
            processing,
        }
    }

    pub fn demand(&self, r: Resource) -> u32 {
        match r {
            Resource::Workers => self.workers,
            Resource::Equipment => self.equipment,
            Resource::Vehicles => self.vehicles,
        }
    }

    /// General dominance: no more of any resource and no more time.
    pub fn weakly_dominates(&self, other: &ResourceScenario) -> bool {
        self.workers <= other.workers
            && self.equipment <= other.equipment
            && self.vehicles <= other.vehicles
            && self.processing <= other.processing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capacity {
    #[serde(rename = "personnel")]
    pub workers: u32,
    pub equipment: u32,
    pub vehicles: u32,
}

impl Capacity {
    pub fn new(workers: u32, equipment: u32, vehicles: u32) -> Self {
        Capacity {
            workers,
            equipment,
            vehicles,
        }
    }

    pub fn of(&self, r: Resource) -> u32 {
        match r {
            Resource::Workers => self.workers,
            Resource::Equipment => self.equipment,
            Resource::Vehicles => self.vehicles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truck {
    pub id: u32,
    pub arrival: u32,
    pub deadline: u32,
    pub setup: u32,
    pub wait_cost: u64,
    pub miss_penalty: u64,
    pub scenarios: Vec<ResourceScenario>,
}

impl Truck {
    /// Dock time (setup plus processing) under scenario `s`.
    pub fn span(&self, s: usize) -> u32 {
        self.setup + self.scenarios[s].processing
    }

    /// Latest period at which service may start under scenario `s`.
    pub fn latest_start(&self, s: usize) -> Option<u32> {
        let span = self.span(s);
        (self.deadline >= span && self.deadline - span >= self.arrival)
            .then(|| self.deadline - span)
    }

    pub fn fits_window(&self, s: usize, start: u32) -> bool {
        start >= self.arrival && start + self.span(s) <= self.deadline
    }

    pub fn min_processing(&self) -> u32 {
        self.scenarios.iter().map(|s| s.processing).min().unwrap_or(0)
    }

    pub fn max_processing(&self) -> u32 {
        self.scenarios.iter().map(|s| s.processing).max().unwrap_or(0)
    }

    /// Common processing time when every scenario shares one.
    pub fn uniform_processing(&self) -> Option<u32> {
        let p = self.scenarios.first()?.processing;
        self.scenarios.iter().all(|s| s.processing == p).then_some(p)
    }

    pub fn waiting_cost(&self, start: u32) -> i64 {
        self.wait_cost as i64 * (start as i64 - self.arrival as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    pub horizon: u32,
    pub docks: u32,
    pub capacity: Capacity,
    pub trucks: Vec<Truck>,
}

impl Instance {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.docks == 0 {
            return Err(invalid("docks", None, "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", None, "must be at least 1"));
        }
        let mut seen = BTreeSet::new();
        for t in &self.trucks {
            let id = Some(t.id);
            if t.id == 0 {
                return Err(invalid("id", id, "truck ids must be positive"));
            }
            if !seen.insert(t.id) {
                return Err(invalid("id", id, format!("duplicate truck id {}", t.id)));
            }
            if t.arrival >= t.deadline {
                return Err(invalid(
                    "arrival",
                    id,
                    format!("arrival {} not before deadline {}", t.arrival, t.deadline),
                ));
            }
            if t.deadline > self.horizon {
                return Err(invalid(
                    "deadline",
                    id,
                    format!("deadline {} beyond horizon {}", t.deadline, self.horizon),
                ));
            }
            if t.scenarios.is_empty() {
                return Err(invalid("scenarios", id, "at least one scenario required"));
            }
            if let Some(k) = t.scenarios.iter().position(|s| s.processing == 0) {
                return Err(invalid(
                    "processing",
                    id,
                    format!("scenario {k} has zero processing time"),
                ));
            }
        }
        Ok(())
    }

    pub fn truck(&self, id: u32) -> Option<&Truck> {
        self.trucks.iter().find(|t| t.id == id)
    }

    pub fn truck_index(&self, id: u32) -> Option<usize> {
        self.trucks.iter().position(|t| t.id == id)
    }

    pub fn total_scenarios(&self) -> usize {
        self.trucks.iter().map(|t| t.scenarios.len()).sum()
    }

    /// True when every truck's scenarios share one processing time.
    pub fn is_sipt(&self) -> bool {
        self.trucks.iter().all(|t| t.uniform_processing().is_some())
    }

    /// The variant this instance naturally belongs to.
    pub fn natural_variant(&self) -> Variant {
        if self.is_sipt() {
            Variant::SiPT
        } else {
            Variant::SdPT
        }
    }

    pub fn max_scenarios(&self) -> usize {
        self.trucks.iter().map(|t| t.scenarios.len()).max().unwrap_or(0)
    }

    /// Cost of leaving every truck unserved.
    pub fn total_miss_penalty(&self) -> i64 {
        self.trucks.iter().map(|t| t.miss_penalty as i64).sum()
    }
}

pub fn load_instance(source: &str) -> Result<Instance, CoreError> {
    let inst: Instance = serde_json::from_str(source)?;
    inst.validate()?;
    Ok(inst)
}

/// Canonical JSON text: fixed field order, two-space indent, trailing newline.
pub fn save_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, CoreError> {
    load_instance(&read_text(path.as_ref())?)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<(), CoreError> {
    write_text(path.as_ref(), &save_instance(inst))
}

pub(crate) fn read_text(path: &Path) -> Result<String, CoreError> {
    std::fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CoreError> {
    std::fs::write(path, text).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub truck: u32,
    pub scenario: usize,
    pub start: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub per_dock: Vec<Vec<Assignment>>,
    pub unserved: BTreeSet<u32>,
}

impl Schedule {
    pub fn empty(docks: usize) -> Self {
        Schedule {
            per_dock: vec![Vec::new(); docks],
            unserved: BTreeSet::new(),
        }
    }

    /// Schedule leaving every truck of `inst` unserved.
    pub fn all_unserved(inst: &Instance) -> Self {
        Schedule {
            per_dock: vec![Vec::new(); inst.docks as usize],
            unserved: inst.trucks.iter().map(|t| t.id).collect(),
        }
    }

    pub fn assignments(&self) -> impl Iterator<Item = &Assignment> {
        self.per_dock.iter().flatten()
    }

    pub fn served_count(&self) -> usize {
        self.per_dock.iter().map(Vec::len).sum()
    }

    pub fn assignment_of(&self, truck: u32) -> Option<&Assignment> {
        self.assignments().find(|a| a.truck == truck)
    }

    /// Canonical form: non-empty docks ordered by their first assignment,
    /// empty docks last. Dock identity carries no meaning.
    pub fn canonical(&self) -> Schedule {
        let mut docks = self.per_dock.clone();
        docks.sort_by_key(|d| d.first().map(|a| (0, a.start, a.truck)).unwrap_or((1, 0, 0)));
        Schedule {
            per_dock: docks,
            unserved: self.unserved.clone(),
        }
    }
}

/// On-disk form of a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub instance: String,
    pub docks: Vec<Vec<Assignment>>,
    pub unserved: Vec<u32>,
    pub objective: i64,
}

impl ScheduleFile {
    pub fn new(instance: &str, sched: &Schedule, objective: i64) -> Self {
        ScheduleFile {
            instance: instance.to_string(),
            docks: sched.per_dock.clone(),
            unserved: sched.unserved.iter().copied().collect(),
            objective,
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            per_dock: self.docks.clone(),
            unserved: self.unserved.iter().copied().collect(),
        }
    }
}

pub fn load_schedule(source: &str) -> Result<ScheduleFile, CoreError> {
    Ok(serde_json::from_str(source)?)
}

pub fn save_schedule(file: &ScheduleFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("schedule serializes");
    s.push('\n');
    s
}

pub fn read_schedule(path: impl AsRef<Path>) -> Result<ScheduleFile, CoreError> {
    load_schedule(&read_text(path.as_ref())?)
}

pub fn write_schedule(path: impl AsRef<Path>, file: &ScheduleFile) -> Result<(), CoreError> {
    write_text(path.as_ref(), &save_schedule(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CostBreakdown {
    pub waiting_cost: i64,
    pub miss_cost: i64,
    pub total: i64,
}

/// Checks that every truck is either served exactly once or unserved, and
/// that scenario indices exist.
fn check_structure(inst: &Instance, sched: &Schedule) -> Result<(), CoreError> {
    if sched.per_dock.len() != inst.docks as usize {
        return Err(CoreError::DockMismatch {
            expected: inst.docks as usize,
            found: sched.per_dock.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for a in sched.assignments() {
        let truck = inst.truck(a.truck).ok_or(CoreError::UnknownTruck(a.truck))?;
        if a.scenario >= truck.scenarios.len() {
            return Err(CoreError::UnknownScenario {
                truck: a.truck,
                scenario: a.scenario,
            });
        }
        if !seen.insert(a.truck) {
            return Err(CoreError::DuplicateTruck(a.truck));
        }
    }
    for &id in &sched.unserved {
        if inst.truck(id).is_none() {
            return Err(CoreError::UnknownTruck(id));
        }
        if !seen.insert(id) {
            return Err(CoreError::DuplicateTruck(id));
        }
    }
    if let Some(t) = inst.trucks.iter().find(|t| !seen.contains(&t.id)) {
        return Err(CoreError::MissingTruck(t.id));
    }
    Ok(())
}

pub fn evaluate(inst: &Instance, sched: &Schedule) -> Result<CostBreakdown, CoreError> {
    check_structure(inst, sched)?;
    let waiting_cost: i64 = sched
        .assignments()
        .map(|a| inst.truck(a.truck).unwrap().waiting_cost(a.start))
        .sum();
    let miss_cost: i64 = sched
        .unserved
        .iter()
        .map(|&id| inst.truck(id).unwrap().miss_penalty as i64)
        .sum();
    Ok(CostBreakdown {
        waiting_cost,
        miss_cost,
        total: waiting_cost + miss_cost,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Structure(String),
    BeforeArrival {
        truck: u32,
        start: u32,
        arrival: u32,
    },
    PastDeadline {
        truck: u32,
        completion: u32,
        deadline: u32,
    },
    Sequencing {
        dock: usize,
        before: u32,
        after: u32,
        earliest: u32,
        start: u32,
    },
    Resource {
        period: u32,
        resource: Resource,
        used: u32,
        capacity: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Structure(m) => write!(f, "structure: {m}"),
            Violation::BeforeArrival {
                truck,
                start,
                arrival,
            } => write!(f, "window: truck {truck} starts at {start} before arrival {arrival}"),
            Violation::PastDeadline {
                truck,
                completion,
                deadline,
            } => write!(
                f,
                "window: truck {truck} completes at {completion} after deadline {deadline}"
            ),
            Violation::Sequencing {
                dock,
                before,
                after,
                earliest,
                start,
            } => write!(
                f,
                "sequencing: dock {dock}, truck {after} starts at {start} but {before} frees the dock at {earliest}"
            ),
            Violation::Resource {
                period,
                resource,
                used,
                capacity,
            } => write!(f, "resource: {resource} at period {period} uses {used} > {capacity}"),
        }
    }
}

/// Resource usage per period for a set of placed trucks.
#[derive(Debug, Clone)]
pub struct Profile {
    dock_busy: Vec<u32>,
    usage: [Vec<u32>; 3],
}

impl Profile {
    pub fn new(horizon: u32) -> Self {
        let n = horizon as usize + 1;
        Profile {
            dock_busy: vec![0; n],
            usage: [vec![0; n], vec![0; n], vec![0; n]],
        }
    }

    /// Would placing `truck` with scenario `s` at `start` keep dock count and
    /// capacities within bounds? Window limits are not checked here.
    pub fn fits(&self, inst: &Instance, truck: &Truck, s: usize, start: u32) -> bool {
        let end = (start + truck.span(s)) as usize;
        if end > self.dock_busy.len() {
            return false;
        }
        if self.dock_busy[start as usize..end]
            .iter()
            .any(|&b| b >= inst.docks)
        {
            return false;
        }
        let sc = &truck.scenarios[s];
        for r in Resource::ALL {
            let d = sc.demand(r);
            if d == 0 {
                continue;
            }
            let cap = inst.capacity.of(r);
            for t in occupancy(truck, s, start) {
                if self.usage[r.index()][t as usize] + d > cap {
                    return false;
                }
            }
        }
        true
    }

    pub fn add(&mut self, truck: &Truck, s: usize, start: u32) {
        self.apply(truck, s, start, true);
    }

    pub fn remove(&mut self, truck: &Truck, s: usize, start: u32) {
        self.apply(truck, s, start, false);
    }

    fn apply(&mut self, truck: &Truck, s: usize, start: u32, add: bool) {
        let end = start + truck.span(s);
        for t in start..end {
            let b = &mut self.dock_busy[t as usize];
            *b = if add { *b + 1 } else { *b - 1 };
        }
        let sc = &truck.scenarios[s];
        for r in Resource::ALL {
            let d = sc.demand(r);
            for t in occupancy(truck, s, start) {
                let u = &mut self.usage[r.index()][t as usize];
                *u = if add { *u + d } else { *u - d };
            }
        }
    }
}

/// Periods during which a truck started at `start` holds its scenario's
/// resources: `start+setup+1 ..= start+setup+processing`.
pub fn occupancy(truck: &Truck, s: usize, start: u32) -> std::ops::RangeInclusive<u32> {
    let first = start + truck.setup + 1;
    first..=start + truck.span(s)
}

pub fn check_feasibility(inst: &Instance, sched: &Schedule) -> Vec<Violation> {
    if let Err(e) = check_structure(inst, sched) {
        return vec![Violation::Structure(e.to_string())];
    }
    let mut out = Vec::new();
    let mut usage = vec![[0u32; 3]; inst.horizon as usize + 1];
    for (dock, list) in sched.per_dock.iter().enumerate() {
        let mut prev: Option<(u32, u32)> = None;
        for a in list {
            let truck = inst.truck(a.truck).unwrap();
            let completion = a.start + truck.span(a.scenario);
            if a.start < truck.arrival {
                out.push(Violation::BeforeArrival {
                    truck: a.truck,
                    start: a.start,
                    arrival: truck.arrival,
                });
            }
            if completion > truck.deadline {
                out.push(Violation::PastDeadline {
                    truck: a.truck,
                    completion,
                    deadline: truck.deadline,
                });
            }
            if let Some((before, free)) = prev {
                if a.start < free {
                    out.push(Violation::Sequencing {
                        dock,
                        before,
                        after: a.truck,
                        earliest: free,
                        start: a.start,
                    });
                }
            }
            prev = Some((a.truck, completion));
            let sc = &truck.scenarios[a.scenario];
            for t in occupancy(truck, a.scenario, a.start) {
                // periods past the horizon are already a deadline violation
                if let Some(u) = usage.get_mut(t as usize) {
                    for r in Resource::ALL {
                        u[r.index()] += sc.demand(r);
                    }
                }
            }
        }
    }
    for (period, u) in usage.iter().enumerate() {
        for r in Resource::ALL {
            let cap = inst.capacity.of(r);
            if u[r.index()] > cap {
                out.push(Violation::Resource {
                    period: period as u32,
                    resource: r,
                    used: u[r.index()],
                    capacity: cap,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceKind {
    /// Strictly shorter processing with no more resources.
    TimeWise,
    /// Same processing, strictly fewer of at least one resource.
    ResourceWise,
    /// Exact duplicate of an earlier scenario.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub truck: u32,
    pub scenario: usize,
    pub by: usize,
    pub kind: DominanceKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DominanceReport {
    pub removed: Vec<Removal>,
    /// Per truck (instance order), original indices of retained scenarios.
    pub kept: Vec<Vec<usize>>,
}

impl DominanceReport {
    /// Maps scenario indices of a schedule for the pruned instance back to
    /// the original instance.
    pub fn restore(&self, inst: &Instance, sched: &Schedule) -> Schedule {
        let pos: HashMap<u32, usize> = inst
            .trucks
            .iter()
            .enumerate()
            .map(|(k, t)| (t.id, k))
            .collect();
        let mut out = sched.clone();
        for a in out.per_dock.iter_mut().flatten() {
            a.scenario = self.kept[pos[&a.truck]][a.scenario];
        }
        out
    }

    pub fn is_trivial(&self) -> bool {
        self.removed.is_empty()
    }
}

/// Removes scenarios strictly dominated by another scenario of the same
/// truck; among exact duplicates the first one survives.
pub fn prune_dominated_scenarios(inst: &Instance) -> (Instance, DominanceReport) {
    let mut out = inst.clone();
    let mut report = DominanceReport::default();
    for (truck, pruned) in inst.trucks.iter().zip(out.trucks.iter_mut()) {
        let sc = &truck.scenarios;
        let beats = |m: usize, k: usize| {
            m != k && sc[m].weakly_dominates(&sc[k]) && (sc[m] != sc[k] || m < k)
        };
        let mut kept = Vec::new();
        for k in 0..sc.len() {
            // a dominated scenario is always dominated by an undominated one
            match (0..sc.len()).find(|&m| beats(m, k) && !(0..sc.len()).any(|q| beats(q, m))) {
                Some(by) => {
                    let kind = if sc[by].processing < sc[k].processing {
                        DominanceKind::TimeWise
                    } else if sc[by] != sc[k] {
                        DominanceKind::ResourceWise
                    } else {
                        DominanceKind::Duplicate
                    };
                    report.removed.push(Removal {
                        truck: truck.id,
                        scenario: k,
                        by,
                        kind,
                    });
                }
                None => kept.push(k),
            }
        }
        pruned.scenarios = kept.iter().map(|&k| sc[k]).collect();
        report.kept.push(kept);
    }
    (out, report)
}
