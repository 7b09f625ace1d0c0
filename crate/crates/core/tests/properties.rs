use proptest::prelude::*;

use crossdock::bp::initial_schedule;
use crossdock::compact::{build, decode, encode, BuildOptions};
use crossdock::instgen::{generate, GenParams};
use crossdock::oracle::{brute_force, OracleLimits};
use crossdock::{
    check_feasibility, evaluate, load_instance, load_schedule, prune_dominated_scenarios,
    save_instance, save_schedule, Instance, ScheduleFile, Variant,
};
use crossdock_milp::Sense;

fn instance(horizon: u32, docks: u32, trucks: u32, seed: u64, sipt: bool) -> Instance {
    let variant = if sipt { Variant::SiPT } else { Variant::SdPT };
    let mut p = GenParams::new(horizon, docks, trucks).with_seed(seed).with_variant(variant);
    p.scenario_count_range = (1, 3);
    generate(&p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_instances_are_valid(
        horizon in 8u32..24, docks in 1u32..5, trucks in 1u32..12, seed in any::<u64>(), sipt in any::<bool>()
    ) {
        let inst = instance(horizon, docks, trucks, seed, sipt);
        prop_assert!(inst.validate().is_ok());
        prop_assert_eq!(inst.is_sipt() || !sipt, true);
        for t in &inst.trucks {
            prop_assert_eq!(t.miss_penalty, 100 * t.wait_cost);
            prop_assert!(t.deadline <= horizon);
            // the fastest scenario fits between arrival and deadline
            prop_assert!((0..t.scenarios.len()).any(|s| t.latest_start(s).is_some()));
        }
    }

    #[test]
    fn files_round_trip(seed in any::<u64>(), sipt in any::<bool>()) {
        let inst = instance(12, 2, 5, seed, sipt);
        let text = save_instance(&inst);
        prop_assert_eq!(&load_instance(&text).unwrap(), &inst);
        let sched = initial_schedule(&inst);
        let cost = evaluate(&inst, &sched).unwrap().total;
        let file = ScheduleFile::new(&inst.name, &sched, cost);
        let back = load_schedule(&save_schedule(&file)).unwrap();
        prop_assert_eq!(back.schedule().canonical(), sched.canonical());
        prop_assert_eq!(back.objective, cost);
    }

    #[test]
    fn greedy_schedule_is_feasible_and_bounds_the_optimum(
        docks in 1u32..3, trucks in 1u32..6, seed in any::<u64>(), sipt in any::<bool>()
    ) {
        let inst = instance(12, docks, trucks, seed, sipt);
        let sched = initial_schedule(&inst);
        prop_assert!(check_feasibility(&inst, &sched).is_empty());
        let greedy = evaluate(&inst, &sched).unwrap().total;
        let best = brute_force(&inst, &OracleLimits::default()).unwrap().cost.total;
        prop_assert!(best <= greedy);
    }

    #[test]
    fn encoded_schedules_satisfy_the_model(
        docks in 1u32..4, trucks in 1u32..9, seed in any::<u64>(), sipt in any::<bool>(),
        fixing in any::<bool>(), occupancy in any::<bool>()
    ) {
        let inst = instance(14, docks, trucks, seed, sipt);
        let variant = inst.natural_variant();
        let b = build(&inst, variant, &BuildOptions { fixing, symmetry: true, occupancy }).unwrap();
        let sched = initial_schedule(&inst);
        let x = encode(&inst, &b.index, b.model.num_vars(), &sched).unwrap();
        prop_assert!(b.model.max_violation(&x, true) < 1e-9);
        let obj = b.model.objective_value(&x).round() as i64;
        prop_assert_eq!(obj, evaluate(&inst, &sched).unwrap().total);
        let back = decode(&inst, &b.index, &x).unwrap();
        prop_assert_eq!(evaluate(&inst, &back).unwrap(), evaluate(&inst, &sched).unwrap());
        for row in &b.model.rows {
            let lhs = row.activity(&x);
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + 1e-9,
                Sense::Ge => lhs >= row.rhs - 1e-9,
                Sense::Eq => (lhs - row.rhs).abs() <= 1e-9,
            };
            prop_assert!(ok, "{}", row.name);
        }
    }

    #[test]
    fn pruning_leaves_no_dominated_pair(seed in any::<u64>(), sipt in any::<bool>()) {
        let mut p = GenParams::new(16, 2, 8).with_seed(seed);
        p.variant = if sipt { Variant::SiPT } else { Variant::SdPT };
        p.scenario_count_range = (2, 6);
        let inst = generate(&p).unwrap();
        let (pruned, report) = prune_dominated_scenarios(&inst);
        for t in &pruned.trucks {
            for (a, sa) in t.scenarios.iter().enumerate() {
                for (b, sb) in t.scenarios.iter().enumerate() {
                    prop_assert!(a == b || !sa.weakly_dominates(sb), "truck {} keeps {} and {}", t.id, a, b);
                }
            }
        }
        let total: usize = inst.trucks.iter().map(|t| t.scenarios.len()).sum();
        let kept: usize = pruned.trucks.iter().map(|t| t.scenarios.len()).sum();
        prop_assert_eq!(total, kept + report.removed.len());
        let sched = initial_schedule(&pruned);
        let restored = report.restore(&inst, &sched);
        prop_assert!(check_feasibility(&inst, &restored).is_empty());
        prop_assert_eq!(evaluate(&inst, &restored).unwrap(), evaluate(&pruned, &sched).unwrap());
    }
}
