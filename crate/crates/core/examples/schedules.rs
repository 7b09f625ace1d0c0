//! Hand-built schedules: costing, feasibility checks, file round trip.
//!
//! cargo run --example schedules

use std::collections::BTreeSet;

use crossdock::{
    check_feasibility, evaluate, load_schedule, save_schedule, Assignment, Capacity, Instance,
    ResourceScenario, Schedule, ScheduleFile, Truck,
};

fn truck(id: u32, arrival: u32, deadline: u32, p: u32) -> Truck {
    Truck {
        id,
        arrival,
        deadline,
        setup: 1,
        wait_cost: 2,
        miss_penalty: 200,
        scenarios: vec![ResourceScenario::new(3, 1, 2, p)],
    }
}

fn main() {
    let inst = Instance {
        name: "hand".into(),
        horizon: 10,
        docks: 1,
        capacity: Capacity::new(5, 2, 4),
        trucks: vec![truck(1, 0, 6, 3), truck(2, 1, 10, 2)],
    };
    let at = |truck, start| Assignment { truck, scenario: 0, start };

    // truck 2 waits for the dock: starts at 4 instead of 1
    let good = Schedule { per_dock: vec![vec![at(1, 0), at(2, 4)]], unserved: BTreeSet::new() };
    println!("sequential: {:?}", evaluate(&inst, &good).unwrap());
    assert!(check_feasibility(&inst, &good).is_empty());

    // overlapping service on one dock
    let bad = Schedule { per_dock: vec![vec![at(1, 0), at(2, 2)]], unserved: BTreeSet::new() };
    for v in check_feasibility(&inst, &bad) {
        println!("violation: {v}");
    }

    let skip = Schedule { per_dock: vec![vec![at(1, 0)]], unserved: BTreeSet::from([2]) };
    println!("skip truck 2: {:?}", evaluate(&inst, &skip).unwrap());

    let cost = evaluate(&inst, &good).unwrap().total;
    let text = save_schedule(&ScheduleFile::new(&inst.name, &good, cost));
    let back = load_schedule(&text).unwrap();
    assert_eq!(back.schedule().canonical(), good.canonical());
    println!("{text}");
}
