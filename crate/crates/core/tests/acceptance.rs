//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crossdock::bp::{branch_and_price, build_pricing, separate_tricycle, BpOptions, BpOutcome, Duals};
use crossdock::compact::{
    add_symmetry, apply_fixing, build, decode, solve_compact, BuildOptions, CompactOptions,
    SolveStatus, DUMMY,
};
use crossdock::instgen::{draw_truck, generate, rng_for, GenParams};
use crossdock::oracle::{brute_force, OracleLimits};
use crossdock::{evaluate, prune_dominated_scenarios, save_instance, Instance, ResourceScenario, Variant};
use crossdock_milp::{solve_lp, solve_mip, LpStatus, ModelIR, SearchOptions, Sense, VarId};

const ORACLE_SEED: u64 = 7_000;
const MEDIUM_SEED: u64 = 31_000;
const MEDIUM_LIMIT: Duration = Duration::from_secs(300);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome { ok: true, detail }
    } else {
        Outcome {
            ok: false,
            detail: format!("{detail}; failing: {}", failures.join(", ")),
        }
    }
}

fn oracle_value(inst: &Instance) -> i64 {
    oracle_within(inst, &OracleLimits::default())
}

fn oracle_within(inst: &Instance, limits: &OracleLimits) -> i64 {
    brute_force(inst, limits)
        .unwrap_or_else(|e| panic!("{}: {e}", inst.name))
        .cost
        .total
}

fn compact_value(inst: &Instance, opts: &CompactOptions) -> Option<i64> {
    let out = solve_compact(inst, opts).ok()?;
    (out.stats.status == SolveStatus::Optimal).then(|| out.cost.map(|c| c.total))?
}

fn with_build(fixing: bool, symmetry: bool) -> CompactOptions {
    CompactOptions {
        build: BuildOptions { fixing, symmetry, ..Default::default() },
        ..Default::default()
    }
}

fn compact_vs_oracle(suite: &[Instance], oracle: &[i64]) -> Outcome {
    let started = Instant::now();
    let failures: Vec<String> = suite
        .par_iter()
        .zip(oracle)
        .filter_map(|(inst, &o)| {
            let c = compact_value(inst, &CompactOptions::default());
            (c != Some(o)).then(|| format!("{} ({c:?} vs {o})", inst.name))
        })
        .collect();
    outcome(&failures, format!("{} instances, {:.1?}", suite.len(), started.elapsed()))
}

fn bp_vs_oracle(suite: &[Instance], oracle: &[i64]) -> Outcome {
    let started = Instant::now();
    let failures: Vec<String> = suite
        .par_iter()
        .zip(oracle)
        .filter_map(|(inst, &o)| {
            let b = branch_and_price(inst, &BpOptions::default()).ok();
            let b = b.map(|b| b.cost.total);
            (b != Some(o)).then(|| format!("{} ({b:?} vs {o})", inst.name))
        })
        .collect();
    outcome(&failures, format!("{} instances, {:.1?}", suite.len(), started.elapsed()))
}

struct MediumRun {
    name: String,
    compact: Option<i64>,
    compact_status: Option<SolveStatus>,
    compact_secs: f64,
    bp: Option<BpOutcome>,
    bp_secs: f64,
}

fn medium_runs(suite: &[Instance]) -> Vec<MediumRun> {
    // sequential so that every solve gets the machine to itself
    suite
        .iter()
        .map(|inst| {
            let t0 = Instant::now();
            let c = solve_compact(
                inst,
                &CompactOptions { time_limit: Some(MEDIUM_LIMIT), ..Default::default() },
            )
            .ok();
            let compact_secs = t0.elapsed().as_secs_f64();
            let t1 = Instant::now();
            let bp = branch_and_price(inst, &BpOptions { time_limit: Some(MEDIUM_LIMIT), ..Default::default() }).ok();
            MediumRun {
                name: inst.name.clone(),
                compact: c.as_ref().and_then(|c| c.cost.map(|c| c.total)),
                compact_status: c.map(|c| c.stats.status),
                compact_secs,
                bp,
                bp_secs: t1.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn three_way(runs: &[MediumRun]) -> Outcome {
    let limit = MEDIUM_LIMIT.as_secs_f64();
    let failures: Vec<String> = runs
        .iter()
        .filter(|r| {
            let bp_ok = r.bp.as_ref().is_some_and(|b| {
                b.stats.status == crossdock::bp::BpStatus::Optimal && Some(b.cost.total) == r.compact
            });
            !(bp_ok
                && r.compact_status == Some(SolveStatus::Optimal)
                && r.compact_secs <= limit
                && r.bp_secs <= limit)
        })
        .map(|r| r.name.clone())
        .collect();
    let slowest = runs
        .iter()
        .map(|r| r.compact_secs.max(r.bp_secs))
        .fold(0.0, f64::max);
    outcome(
        &failures,
        format!("{} instances, slowest solve {slowest:.1}s", runs.len()),
    )
}

fn preprocessing_safety(suite: &[Instance], oracle: &[i64]) -> Outcome {
    let failures: Vec<String> = suite
        .par_iter()
        .zip(oracle)
        .filter_map(|(inst, &o)| {
            let mut values: Vec<Option<i64>> = [(true, true), (false, false), (true, false), (false, true)]
                .into_iter()
                .map(|(f, s)| compact_value(inst, &with_build(f, s)))
                .collect();
            // explicit post-build passes on an unreduced model
            let variant = inst.natural_variant();
            let mut b = build(inst, variant, &BuildOptions { fixing: false, symmetry: false, ..Default::default() }).ok()?;
            apply_fixing(inst, &mut b.model, &b.index);
            add_symmetry(inst, &mut b.model, &b.index);
            let r = solve_mip(&b.model, &SearchOptions::default()).ok()?;
            values.push(r.values.and_then(|x| {
                let s = decode(inst, &b.index, &x).ok()?;
                evaluate(inst, &s).ok().map(|c| c.total)
            }));
            values
                .iter()
                .any(|v| *v != Some(o))
                .then(|| format!("{} ({values:?} vs {o})", inst.name))
        })
        .collect();
    outcome(&failures, format!("{} instances x 5 settings", suite.len()))
}

/// Adds a strictly dominated copy of every truck's first scenario and an
/// exact duplicate of its last one on every other truck.
fn inject_dominated(inst: &Instance) -> (Instance, usize) {
    let mut out = inst.clone();
    let sipt = inst.is_sipt();
    let mut added = 0;
    for (k, t) in out.trucks.iter_mut().enumerate() {
        let s0 = t.scenarios[0];
        let worse = ResourceScenario::new(
            s0.workers + 1,
            s0.equipment,
            s0.vehicles + (k % 2) as u32,
            s0.processing + u32::from(!sipt),
        );
        t.scenarios.push(worse);
        added += 1;
        if k % 2 == 0 {
            let last = *t.scenarios.last().unwrap();
            t.scenarios.insert(0, last);
            added += 1;
        }
    }
    (out, added)
}

fn dominance_safety(suite: &[Instance], oracle: &[i64]) -> Outcome {
    let failures: Vec<String> = suite
        .par_iter()
        .zip(oracle)
        .filter_map(|(inst, &o)| {
            let (injected, added) = inject_dominated(inst);
            let (pruned, report) = prune_dominated_scenarios(&injected);
            let wide = OracleLimits { max_scenarios: 5, ..Default::default() };
            let full = oracle_within(&injected, &wide);
            let reduced = oracle_within(&pruned, &wide);
            let ok = full == o && reduced == o && report.removed.len() >= added;
            (!ok).then(|| format!("{} (full {full}, pruned {reduced}, base {o})", inst.name))
        })
        .collect();
    outcome(&failures, format!("{} instances", suite.len()))
}

fn scenario_monotonicity(suite: &[Instance], oracle: &[i64]) -> Outcome {
    let mut strict = 0;
    let mut failures = Vec::new();
    for (inst, &o) in suite.iter().zip(oracle) {
        let mut first = inst.clone();
        for t in &mut first.trucks {
            t.scenarios.truncate(1);
        }
        let restricted = oracle_value(&first);
        if restricted < o {
            failures.push(format!("{} ({restricted} < {o})", inst.name));
        } else if restricted > o {
            strict += 1;
        }
    }
    outcome(&failures, format!("{} instances, {strict} strictly worse with one scenario", suite.len()))
}

fn random_lp(rng: &mut ChaCha8Rng) -> ModelIR {
    let n = rng.random_range(1..=20);
    let m = rng.random_range(1..=20);
    let mut model = ModelIR::new("rand");
    let mut x0 = Vec::new();
    for j in 0..n {
        let lo = rng.random_range(-5..=0) as f64;
        let hi = lo + rng.random_range(0..=8) as f64;
        model.add_var(format!("x{j}"), lo, hi, false, rng.random_range(-6..=6) as f64);
        x0.push(rng.random_range(lo..=hi));
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((VarId(j), rng.random_range(-5..=5) as f64));
            }
        }
        let act: f64 = coeffs.iter().map(|&(v, a)| a * x0[v.0]).sum();
        let (sense, rhs) = match rng.random_range(0..3) {
            0 => (Sense::Le, act + rng.random_range(0.0..3.0)),
            1 => (Sense::Ge, act - rng.random_range(0.0..3.0)),
            _ => (Sense::Eq, act),
        };
        model.add_constraint(format!("r{i}"), coeffs, sense, rhs);
    }
    model
}

/// (|primal - dual|, worst complementary-slackness product, worst dual sign error).
fn duality_residuals(model: &ModelIR, x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let primal = model.objective_value(x);
    let mut d: Vec<f64> = model.vars.iter().map(|v| v.objective).collect();
    for (row, &yi) in model.rows.iter().zip(y) {
        for &(v, a) in &row.coeffs {
            d[v.0] -= a * yi;
        }
    }
    let mut dual = model.objective_offset;
    let (mut cs, mut sign): (f64, f64) = (0.0, 0.0);
    for (row, &yi) in model.rows.iter().zip(y) {
        dual += yi * row.rhs;
        cs = cs.max((yi * (row.rhs - row.activity(x))).abs());
        sign = sign.max(match row.sense {
            Sense::Le => yi,
            Sense::Ge => -yi,
            Sense::Eq => 0.0,
        });
    }
    for (j, v) in model.vars.iter().enumerate() {
        let (bound, gap) = if d[j] > 0.0 { (v.lower, x[j] - v.lower) } else { (v.upper, v.upper - x[j]) };
        dual += d[j] * bound;
        cs = cs.max((d[j] * gap).abs());
    }
    ((primal - dual).abs(), cs, sign)
}

fn lp_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    let (mut worst_gap, mut worst_cs): (f64, f64) = (0.0, 0.0);
    for k in 0..200 {
        let model = random_lp(&mut rng);
        let sol = solve_lp(&model);
        if sol.status != LpStatus::Optimal {
            failures.push(format!("lp{k} {:?}", sol.status));
            continue;
        }
        let (gap, cs, sign) = duality_residuals(&model, &sol.primal, &sol.duals);
        worst_gap = worst_gap.max(gap);
        worst_cs = worst_cs.max(cs);
        if gap > 1e-7 || cs > 1e-7 || sign > 1e-7 || model.max_violation(&sol.primal, false) > 1e-7 {
            failures.push(format!("lp{k}"));
        }
    }
    outcome(&failures, format!("200 LPs, max duality gap {worst_gap:.1e}, max slackness {worst_cs:.1e}"))
}

fn naive_tricycle(index: &crossdock::compact::VarIndex, x: &[f64]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for i in 1..=index.trucks {
        for j in 1..=index.trucks {
            if i == j {
                continue;
            }
            let mut leave = 0.0;
            let mut enter = 0.0;
            for (a, v) in index.arcs.iter().zip(&index.arc_vars) {
                let val = x[v.0];
                if a.from == i && a.to == j {
                    leave += val;
                    enter += val;
                }
                if a.to == DUMMY && (a.from == i || a.from == j) {
                    leave += val;
                }
                if a.from == DUMMY && (a.to == i || a.to == j) {
                    enter += val;
                }
            }
            if leave > 2.0 + 1e-6 {
                out.insert(format!("tri_out_{i}_{j}"));
            }
            if enter > 2.0 + 1e-6 {
                out.insert(format!("tri_in_{i}_{j}"));
            }
        }
    }
    out
}

fn tricycle_exactness(suite: &[Instance]) -> Outcome {
    let models: Vec<_> = suite
        .iter()
        .filter(|i| i.trucks.len() >= 3)
        .take(10)
        .map(|inst| {
            let d = Duals::zero(inst.trucks.len());
            build_pricing(inst, inst.natural_variant(), &d, &[], &BuildOptions::default()).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut failures = Vec::new();
    let mut cut_total = 0;
    for k in 0..1000 {
        let p = &models[k % models.len()];
        let density = rng.random_range(0.02..0.4);
        let mut x = vec![0.0; p.model.num_vars()];
        for v in &p.index.arc_vars {
            if rng.random_bool(density) {
                x[v.0] = 1.0;
            }
        }
        let fast: BTreeSet<String> = separate_tricycle(&p.index, &x).into_iter().map(|r| r.name).collect();
        cut_total += fast.len();
        if fast != naive_tricycle(&p.index, &x) {
            failures.push(format!("vector {k}"));
        }
    }
    outcome(&failures, format!("1000 vectors, {cut_total} cuts"))
}

fn generator_fidelity() -> Outcome {
    let mut failures = Vec::new();
    for variant in [Variant::SdPT, Variant::SiPT] {
        let p = GenParams::new(16, 4, 12).with_variant(variant);
        let mut rng = rng_for(99);
        let mut sets: [BTreeSet<u32>; 9] = Default::default();
        for _ in 0..10_000 {
            let d = draw_truck(&mut rng, &p);
            sets[0].insert(d.arrival);
            sets[1].insert(d.setup);
            sets[2].insert(d.slack);
            sets[3].insert(d.wait_cost);
            sets[4].insert(d.scenarios.len() as u32);
            for s in &d.scenarios {
                sets[5].insert(s.processing);
                sets[6].insert(s.workers);
                sets[7].insert(s.equipment);
                sets[8].insert(s.vehicles);
            }
            if variant == Variant::SiPT && d.scenarios.iter().any(|s| s.processing != d.scenarios[0].processing) {
                failures.push("SiPT processing differs".into());
            }
        }
        let ranges = [
            ("arrival", 0, 12),
            ("setup", 1, 3),
            ("slack", 3, 5),
            ("wait cost", 5, 10),
            ("scenarios", 1, 4),
            ("processing", 2, 4),
            ("personnel", 3, 6),
            ("equipment", 1, 3),
            ("vehicles", 3, 7),
        ];
        for ((what, lo, hi), seen) in ranges.into_iter().zip(&sets) {
            // every value in range observed, nothing outside it
            if *seen != (lo..=hi).collect::<BTreeSet<u32>>() {
                failures.push(format!("{what} {seen:?}"));
            }
        }
    }
    for seed in 0..20 {
        let p = GenParams::new(16, 4, 16).with_seed(seed);
        let a = generate(&p).unwrap();
        if a.trucks.iter().any(|t| t.miss_penalty != 100 * t.wait_cost) {
            failures.push(format!("penalty seed {seed}"));
        }
        let dir = tempfile::tempdir().unwrap();
        let (f1, f2) = (dir.path().join("a.json"), dir.path().join("b.json"));
        crossdock::write_instance(&f1, &a).unwrap();
        crossdock::write_instance(&f2, &generate(&p).unwrap()).unwrap();
        if std::fs::read(&f1).unwrap() != std::fs::read(&f2).unwrap() || save_instance(&a).is_empty() {
            failures.push(format!("bytes seed {seed}"));
        }
    }
    outcome(&failures, "10000 draws per variant, 20 seeds written twice".into())
}

fn bp_bookkeeping(runs: &[MediumRun]) -> Outcome {
    let mut failures = Vec::new();
    let mut one_node = 0;
    for r in runs {
        match &r.bp {
            Some(b) => {
                if b.stats.pricing_calls < 1 || !b.stats.has_certificate() {
                    failures.push(r.name.clone());
                }
                if b.stats.master_nodes == 1 {
                    one_node += 1;
                }
            }
            None => failures.push(r.name.clone()),
        }
    }
    outcome(
        &failures,
        format!("{one_node}/{} solved at a single master node", runs.len()),
    )
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut emit = |n: usize, name: &'static str, o: Outcome| {
        println!("{} [{n:>2}] {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };

    let suite = common::oracle_suite(50, ORACLE_SEED);
    let oracle: Vec<i64> = suite.par_iter().map(oracle_value).collect();

    emit(1, "compact matches oracle", compact_vs_oracle(&suite, &oracle));
    emit(2, "branch-and-price matches oracle", bp_vs_oracle(&suite, &oracle));
    let medium = medium_runs(&common::medium_suite(30, MEDIUM_SEED));
    emit(3, "medium three-way agreement", three_way(&medium));
    emit(4, "fixing and symmetry keep the optimum", preprocessing_safety(&suite, &oracle));
    emit(5, "dominance pruning keeps the optimum", dominance_safety(&suite, &oracle));
    emit(6, "first-scenario restriction never helps", scenario_monotonicity(&suite, &oracle));
    emit(7, "LP duality and complementary slackness", lp_soundness());
    emit(8, "tri-cycle separation exact", tricycle_exactness(&suite));
    emit(9, "generator ranges and reproducibility", generator_fidelity());
    emit(10, "branch-and-price certificates", bp_bookkeeping(&medium));

    let failed = results.iter().filter(|r| !r.2.ok).count();
    println!(
        "acceptance: {}/{} passed in {:.1?}",
        results.len() - failed,
        results.len(),
        started.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
