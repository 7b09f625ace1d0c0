use crossdock_milp::{
    solve_lp, solve_mip, CutCallback, LpStatus, MipStatus, ModelIR, NodeOrder, Row, SearchOptions,
    Sense, VarId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Duality residuals computed straight from the model data.
fn duality_residuals(model: &ModelIR, x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let primal = model.objective_value(x);
    let mut d: Vec<f64> = model.vars.iter().map(|v| v.objective).collect();
    for (row, &yi) in model.rows.iter().zip(y) {
        for &(v, a) in &row.coeffs {
            d[v.0] -= a * yi;
        }
    }
    let mut dual = model.objective_offset;
    let mut worst_cs: f64 = 0.0;
    let mut worst_sign: f64 = 0.0;
    for (row, &yi) in model.rows.iter().zip(y) {
        dual += yi * row.rhs;
        let slack = row.rhs - row.activity(x);
        worst_cs = worst_cs.max((yi * slack).abs());
        match row.sense {
            Sense::Le => worst_sign = worst_sign.max(yi),
            Sense::Ge => worst_sign = worst_sign.max(-yi),
            Sense::Eq => {}
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        let dj = d[j];
        dual += if dj > 0.0 { dj * v.lower } else { dj * v.upper };
        let gap = if dj > 0.0 {
            x[j] - v.lower
        } else {
            v.upper - x[j]
        };
        worst_cs = worst_cs.max((dj * gap).abs());
    }
    ((primal - dual).abs(), worst_cs, worst_sign)
}

fn random_feasible_lp(rng: &mut ChaCha8Rng) -> ModelIR {
    let n = rng.random_range(1..=20);
    let m = rng.random_range(1..=20);
    let mut model = ModelIR::new("rand");
    let mut x0 = Vec::new();
    for j in 0..n {
        let lo = rng.random_range(-5..=0) as f64;
        let hi = lo + rng.random_range(0..=8) as f64;
        let c = rng.random_range(-6..=6) as f64;
        model.add_var(format!("x{j}"), lo, hi, false, c);
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

#[test]
fn random_dense_lps_satisfy_strong_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let model = random_feasible_lp(&mut rng);
        let sol = solve_lp(&model);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(model.max_violation(&sol.primal, false) < 1e-7);
        let (gap, cs, sign) = duality_residuals(&model, &sol.primal, &sol.duals);
        assert!(gap < 1e-7, "duality gap {gap}");
        assert!(cs < 1e-7, "complementary slackness {cs}");
        assert!(sign < 1e-9, "dual sign {sign}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn lp_optimum_is_dual_certified(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_feasible_lp(&mut rng);
        let sol = solve_lp(&model);
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let (gap, cs, _) = duality_residuals(&model, &sol.primal, &sol.duals);
        prop_assert!(gap < 1e-7 && cs < 1e-7);
    }
}

#[test]
fn pure_lp_through_mip_matches_solve_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let model = random_feasible_lp(&mut rng);
        let lp = solve_lp(&model);
        let mip = solve_mip(&model, &SearchOptions::default()).unwrap();
        assert_eq!(mip.status, MipStatus::Optimal);
        assert!((mip.objective.unwrap() - lp.objective).abs() < 1e-9);
        assert_eq!(mip.nodes, 1);
    }
}

fn knapsack() -> (ModelIR, Vec<f64>, Vec<f64>, f64) {
    let values = vec![10.0, 13.0, 7.0];
    let weights = vec![3.0, 4.0, 2.0];
    let cap = 6.0;
    let mut m = ModelIR::new("knap");
    let vars: Vec<VarId> = values
        .iter()
        .enumerate()
        .map(|(k, v)| m.add_binary(format!("b{k}"), -v))
        .collect();
    m.add_constraint(
        "cap",
        vars.iter().zip(&weights).map(|(&v, &w)| (v, w)).collect(),
        Sense::Le,
        cap,
    );
    (m, values, weights, cap)
}

#[test]
fn knapsack_matches_subset_enumeration() {
    let (m, values, weights, cap) = knapsack();
    let mut best = 0.0;
    for mask in 0u32..8 {
        let (w, v) = (0..3)
            .filter(|k| mask & (1 << k) != 0)
            .fold((0.0, 0.0), |(w, v), k| (w + weights[k], v + values[k]));
        if w <= cap && v > best {
            best = v;
        }
    }
    for order in [NodeOrder::BreadthFirst, NodeOrder::BestBound, NodeOrder::DepthFirst] {
        let r = solve_mip(
            &m,
            &SearchOptions {
                node_order: order,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert_eq!(r.objective, Some(-best));
    }
}

/// Small pure-integer programs checked against full enumeration.
#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut solved = 0;
    for _ in 0..60 {
        let n = rng.random_range(2..=5);
        let mut m = ModelIR::new("ip");
        let mut ub = Vec::new();
        for j in 0..n {
            let u = rng.random_range(1..=3);
            ub.push(u);
            m.add_var(format!("z{j}"), 0.0, u as f64, true, rng.random_range(-7..=7) as f64);
        }
        for i in 0..rng.random_range(1..=4) {
            let coeffs: Vec<(VarId, f64)> = (0..n)
                .map(|j| (VarId(j), rng.random_range(-4..=6) as f64))
                .collect();
            let sense = if rng.random_bool(0.8) { Sense::Le } else { Sense::Ge };
            m.add_constraint(format!("r{i}"), coeffs, sense, rng.random_range(-2..=9) as f64);
        }
        // enumeration
        let mut best: Option<f64> = None;
        let mut point = vec![0usize; n];
        loop {
            let vals: Vec<f64> = point.iter().map(|&p| p as f64).collect();
            if m.is_feasible(&vals, 1e-9) {
                let o = m.objective_value(&vals);
                if best.is_none_or(|b| o < b) {
                    best = Some(o);
                }
            }
            let mut k = 0;
            while k < n {
                point[k] += 1;
                if point[k] <= ub[k] {
                    break;
                }
                point[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        let r = solve_mip(&m, &SearchOptions::default()).unwrap();
        match best {
            Some(b) => {
                solved += 1;
                assert_eq!(r.status, MipStatus::Optimal);
                assert_eq!(r.objective, Some(b));
                assert!(m.is_feasible(r.values.as_ref().unwrap(), 1e-6));
            }
            None => assert_eq!(r.status, MipStatus::Infeasible),
        }
    }
    assert!(solved > 20);
}

struct PairCut(VarId, VarId);

impl CutCallback for PairCut {
    fn lazy(&self, values: &[f64]) -> Vec<Row> {
        if values[self.0 .0] + values[self.1 .0] > 1.5 {
            vec![Row::new(
                "pair",
                vec![(self.0, 1.0), (self.1, 1.0)],
                Sense::Le,
                1.0,
            )]
        } else {
            Vec::new()
        }
    }
}

#[test]
fn lazy_cut_equals_upfront_cut() {
    // uncut optimum takes items 1 and 2; the cut forces 0 and 2
    let (m, ..) = knapsack();
    let cut = PairCut(VarId(1), VarId(2));
    let upfront = m.add_rows([Row::new("pair", vec![(VarId(1), 1.0), (VarId(2), 1.0)], Sense::Le, 1.0)]).unwrap();
    let a = solve_mip(&upfront, &SearchOptions::default()).unwrap();
    let b = solve_mip(
        &m,
        &SearchOptions {
            callback: Some(&cut),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(b.objective, Some(-17.0));
    assert_eq!(b.added_rows.len(), 1);
    for p in &b.pool {
        assert!(upfront.is_feasible(&p.values, 1e-6));
    }
}

#[test]
fn fixing_and_redundant_rows() {
    let (m, ..) = knapsack();
    let base = solve_mip(&m, &SearchOptions::default()).unwrap();
    let inc = base.values.clone().unwrap();

    let fixed = m.fix_variable(VarId(1), 0.0).unwrap();
    let mut bounded = m.clone();
    bounded.vars[1].upper = 0.0;
    let a = solve_mip(&fixed, &SearchOptions::default()).unwrap();
    let b = solve_mip(&bounded, &SearchOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);

    let redundant = m
        .add_rows([Row::new("slack", vec![(VarId(0), 1.0), (VarId(2), 1.0)], Sense::Le, 5.0)])
        .unwrap();
    let r = solve_mip(&redundant, &SearchOptions::default()).unwrap();
    assert_eq!(r.objective, base.objective);

    let mut pinned = m.clone();
    for (j, &v) in inc.iter().enumerate() {
        pinned = pinned.fix_variable(VarId(j), v).unwrap();
    }
    let p = solve_mip(&pinned, &SearchOptions::default()).unwrap();
    assert_eq!(p.objective, base.objective);
}

#[test]
fn search_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut m = ModelIR::new("det");
    let vars: Vec<VarId> = (0..12)
        .map(|j| m.add_binary(format!("b{j}"), -(rng.random_range(1..20) as f64)))
        .collect();
    for i in 0..3 {
        let coeffs = vars
            .iter()
            .map(|&v| (v, rng.random_range(1..10) as f64))
            .collect();
        m.add_constraint(format!("c{i}"), coeffs, Sense::Le, 25.0);
    }
    let a = solve_mip(&m, &SearchOptions::default()).unwrap();
    let b = solve_mip(&m, &SearchOptions::default()).unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.status, MipStatus::Optimal);
}

#[test]
fn pool_threshold_collects_accepted_solutions() {
    let (m, ..) = knapsack();
    let r = solve_mip(
        &m,
        &SearchOptions {
            pool_threshold: Some(0.0),
            node_order: NodeOrder::DepthFirst,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!r.pool.is_empty());
    for p in &r.pool {
        assert!(p.objective <= 1e-9);
        assert!(m.is_feasible(&p.values, 1e-6));
    }
}
