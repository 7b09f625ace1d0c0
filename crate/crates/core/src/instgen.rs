//! Seeded random instances.
//!
//! The generator is ChaCha8 seeded with `seed` through `seed_from_u64`;
//! suite members use `seed + index`. Draws per truck, in order: arrival,
//! setup, window slack, wait cost, scenario count, then (SiPT only) one
//! processing time, then per scenario personnel, equipment, vehicles and
//! (SdPT only) processing. All draws are integer-uniform on inclusive
//! ranges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::core::{Capacity, Instance, Resource, ResourceScenario, Truck, Variant};

pub type Range = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub horizon: u32,
    pub docks: u32,
    pub trucks: u32,
    pub scenario_count_range: Range,
    pub arrival_range: Range,
    pub processing_range: Range,
    pub setup_range: Range,
    pub window_slack_range: Range,
    pub workers_range: Range,
    pub equipment_range: Range,
    pub vehicles_range: Range,
    pub wait_cost_range: Range,
    pub miss_multiplier: u64,
    /// Capacity factor as numerator / denominator.
    pub capacity_factor: (u32, u32),
    pub seed: u64,
    pub variant: Variant,
}

impl GenParams {
    /// Ranges derived from the horizon: arrivals in `[0, floor(0.75 T)]`,
    /// processing in `[ceil(T/8), floor(T/4)]`.
    pub fn new(horizon: u32, docks: u32, trucks: u32) -> Self {
        let pmin = horizon.div_ceil(8).max(1);
        let pmax = (horizon / 4).max(pmin);
        GenParams {
            horizon,
            docks,
            trucks,
            scenario_count_range: (1, 4),
            arrival_range: (0, horizon * 3 / 4),
            processing_range: (pmin, pmax),
            setup_range: (1, 3),
            window_slack_range: (3, 5),
            workers_range: (3, 6),
            equipment_range: (1, 3),
            vehicles_range: (3, 7),
            wait_cost_range: (5, 10),
            miss_multiplier: 100,
            capacity_factor: (4, 5),
            seed: 0,
            variant: Variant::SdPT,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.docks == 0 || self.trucks == 0 || self.horizon == 0 {
            return Err(GenError::Params("horizon, docks and trucks must be positive".into()));
        }
        let ranges = [
            ("scenario count", self.scenario_count_range),
            ("arrival", self.arrival_range),
            ("processing", self.processing_range),
            ("setup", self.setup_range),
            ("window slack", self.window_slack_range),
            ("personnel", self.workers_range),
            ("equipment", self.equipment_range),
            ("vehicles", self.vehicles_range),
            ("wait cost", self.wait_cost_range),
        ];
        for (name, (lo, hi)) in ranges {
            if lo > hi {
                return Err(GenError::Params(format!("{name} range [{lo}, {hi}] is empty")));
            }
        }
        if self.scenario_count_range.0 == 0 || self.processing_range.0 == 0 {
            return Err(GenError::Params(
                "scenario count and processing must be at least 1".into(),
            ));
        }
        if self.capacity_factor.1 == 0 {
            return Err(GenError::Params("capacity factor denominator is zero".into()));
        }
        let need = self.setup_range.1 + self.processing_range.0;
        if need > self.horizon {
            return Err(GenError::Params(format!(
                "horizon {} shorter than setup plus processing ({need})",
                self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("{trucks} trucks for {docks} docks is outside [3d, min(5d, 200)]")]
    TruckBound { docks: u32, trucks: u32 },
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
}

/// Raw per-truck draws before the deadline and capacity rules are applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruckDraw {
    pub arrival: u32,
    pub setup: u32,
    pub slack: u32,
    pub wait_cost: u32,
    pub scenarios: Vec<ResourceScenario>,
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): Range) -> u32 {
    rng.random_range(lo..=hi)
}

pub fn draw_truck(rng: &mut ChaCha8Rng, p: &GenParams) -> TruckDraw {
    let arrival = draw(rng, p.arrival_range);
    let setup = draw(rng, p.setup_range);
    let slack = draw(rng, p.window_slack_range);
    let wait_cost = draw(rng, p.wait_cost_range);
    let count = draw(rng, p.scenario_count_range);
    let shared = (p.variant == Variant::SiPT).then(|| draw(rng, p.processing_range));
    let scenarios = (0..count)
        .map(|_| {
            let workers = draw(rng, p.workers_range);
            let equipment = draw(rng, p.equipment_range);
            let vehicles = draw(rng, p.vehicles_range);
            let processing = shared.unwrap_or_else(|| draw(rng, p.processing_range));
            ResourceScenario::new(workers, equipment, vehicles, processing)
        })
        .collect();
    TruckDraw {
        arrival,
        setup,
        slack,
        wait_cost,
        scenarios,
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    params.validate()?;
    let mut rng = rng_for(params.seed);
    let t_max = params.horizon;
    let trucks: Vec<Truck> = (1..=params.trucks)
        .map(|id| {
            let d = draw_truck(&mut rng, params);
            let pmin = d.scenarios.iter().map(|s| s.processing).min().unwrap();
            let pmax = d.scenarios.iter().map(|s| s.processing).max().unwrap();
            // keep the fastest scenario placeable inside the horizon
            let arrival = d.arrival.min(t_max - d.setup - pmin);
            let deadline = (arrival + d.setup + pmax + d.slack).min(t_max);
            Truck {
                id,
                arrival,
                deadline,
                setup: d.setup,
                wait_cost: d.wait_cost as u64,
                miss_penalty: params.miss_multiplier * d.wait_cost as u64,
                scenarios: d.scenarios,
            }
        })
        .collect();
    let capacity = capacities(&trucks, params.docks, params.capacity_factor);
    let mut inst = Instance {
        name: String::new(),
        horizon: params.horizon,
        docks: params.docks,
        capacity,
        trucks,
    };
    inst.name = instance_name(&inst);
    debug_assert!(inst.validate().is_ok());
    Ok(inst)
}

/// `max(max_j min_s demand, ceil(factor * docks * mean demand))` per resource.
fn capacities(trucks: &[Truck], docks: u32, (num, den): (u32, u32)) -> Capacity {
    let cap = |r: Resource| {
        let floor = trucks
            .iter()
            .map(|t| t.scenarios.iter().map(|s| s.demand(r)).min().unwrap())
            .max()
            .unwrap_or(0);
        let (sum, count) = trucks
            .iter()
            .flat_map(|t| &t.scenarios)
            .fold((0u64, 0u64), |(s, c), sc| (s + sc.demand(r) as u64, c + 1));
        if count == 0 {
            return floor;
        }
        let scaled = (num as u64 * docks as u64 * sum).div_ceil(den as u64 * count);
        floor.max(scaled as u32)
    };
    Capacity::new(
        cap(Resource::Workers),
        cap(Resource::Equipment),
        cap(Resource::Vehicles),
    )
}

/// `tf-{T}-d-{docks}-tr-{trucks}-sce-{total scenarios}`.
pub fn instance_name(inst: &Instance) -> String {
    format_name(
        inst.horizon,
        inst.docks,
        inst.trucks.len() as u32,
        inst.total_scenarios(),
    )
}

pub fn format_name(horizon: u32, docks: u32, trucks: u32, scenarios: usize) -> String {
    format!("tf-{horizon}-d-{docks}-tr-{trucks}-sce-{scenarios}")
}

/// How many trucks to generate for a given dock count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruckRule {
    /// Every count in `lo*d ..= hi*d`.
    Factors { lo: u32, hi: u32 },
    /// `count` values starting at `from*d` in steps of `step`.
    Stepped { from: u32, step: u32, count: u32 },
    Fixed(Vec<u32>),
}

impl TruckRule {
    pub fn counts(&self, docks: u32) -> Vec<u32> {
        match self {
            TruckRule::Factors { lo, hi } => (lo * docks..=hi * docks).collect(),
            TruckRule::Stepped { from, step, count } => {
                (0..*count).map(|k| from * docks + k * step).collect()
            }
            TruckRule::Fixed(v) => v.clone(),
        }
    }
}

pub fn truck_bound_ok(docks: u32, trucks: u32) -> bool {
    trucks >= 3 * docks && trucks <= (5 * docks).min(200)
}

pub fn generate_suite(
    base: &GenParams,
    dock_values: &[u32],
    rule: &TruckRule,
) -> Result<Vec<Instance>, GenError> {
    let mut shapes = Vec::new();
    for &docks in dock_values {
        for trucks in rule.counts(docks) {
            if !truck_bound_ok(docks, trucks) {
                return Err(GenError::TruckBound { docks, trucks });
            }
            shapes.push((docks, trucks));
        }
    }
    shapes
        .into_iter()
        .enumerate()
        .map(|(k, (docks, trucks))| {
            generate(&GenParams {
                docks,
                trucks,
                seed: base.seed.wrapping_add(k as u64),
                ..base.clone()
            })
        })
        .collect()
}

/// Named suites.
///
/// * `paper`: docks 20, 22, 24 with 3d, 3d+5, ... (nine sizes each).
/// * `paper-small`: docks 2, 3, 4 with every count in 3d..4d.
/// * `smoke`: two docks with 6, 7 and 8 trucks.
pub fn named_suite(name: &str) -> Result<(Vec<u32>, TruckRule), GenError> {
    match name {
        "paper" => Ok((
            vec![20, 22, 24],
            TruckRule::Stepped {
                from: 3,
                step: 5,
                count: 9,
            },
        )),
        "paper-small" => Ok((vec![2, 3, 4], TruckRule::Factors { lo: 3, hi: 4 })),
        "smoke" => Ok((vec![2], TruckRule::Factors { lo: 3, hi: 4 })),
        other => Err(GenError::UnknownSuite(other.to_string())),
    }
}
