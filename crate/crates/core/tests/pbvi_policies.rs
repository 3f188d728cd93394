use std::collections::BTreeMap;

use sse_core::baselines::{follower_best_response, measured_exploitability};
use sse_core::benchmarks::{self, build};
use sse_core::occupancy::{evaluate_joint_policy, LeaderPolicy};
use sse_core::pbvi::{solve_sse, SolverConfig, Variant};

fn cfg(variant: Variant) -> SolverConfig {
    SolverConfig {
        variant,
        ..SolverConfig::default()
    }
}

#[test]
fn extracted_policies_are_unexploitable_up_to_horizon_four() {
    for name in benchmarks::NAMES {
        for l in 1..=4 {
            let g = build(name, l).unwrap();
            let mut values = BTreeMap::new();
            for variant in [Variant::H, Variant::S] {
                let res = solve_sse(&g, cfg(variant)).unwrap();
                let e = measured_exploitability(&g, &res.policy.leader, res.value).unwrap();
                assert!(e.abs() <= 1e-6, "{name} {l} {variant:?}: exploitability {e}");
                let (vl, _) = evaluate_joint_policy(&g, &res.policy.leader, &res.policy.follower).unwrap();
                assert!((vl - res.value).abs() <= 1e-6, "{name} {l} {variant:?}: joint {vl} vs {}", res.value);
                values.insert(format!("{variant:?}"), res.value);
            }
            assert!(values["H"] >= values["S"] - 1e-6, "{name} {l}: {values:?}");
        }
    }
}

#[test]
fn centipede_four_matches_the_published_value() {
    let g = build("centipede", 4).unwrap();
    let res = solve_sse(&g, cfg(Variant::H)).unwrap();
    assert!((res.value - 8.0 / 3.0).abs() < 1e-6, "{}", res.value);
}

#[test]
fn match_three_needs_history() {
    let g = build("match", 3).unwrap();
    let h = solve_sse(&g, cfg(Variant::H)).unwrap();
    let s = solve_sse(&g, cfg(Variant::S)).unwrap();
    assert!(h.value.abs() < 1e-6);
    assert!((s.value + 1000.0).abs() < 1e-6);
    // Some state is reached by two leader histories that play differently.
    let pil = &h.policy.leader;
    let differs = pil.rules.iter().any(|rule| {
        let mut by_state: BTreeMap<usize, Vec<&Vec<f64>>> = BTreeMap::new();
        for (&hl, row) in &rule.rows {
            by_state.entry(pil.histories.leader.state(hl)).or_default().push(row);
        }
        by_state.values().any(|rows| rows.windows(2).any(|w| w[0] != w[1]))
    });
    assert!(differs);
}

#[test]
fn stored_policy_round_trips() {
    let g = build("centipede", 3).unwrap();
    let res = solve_sse(&g, cfg(Variant::H)).unwrap();
    let text = serde_json::to_string(&res.policy.leader.to_json()).unwrap();
    let back = LeaderPolicy::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.to_json(), res.policy.leader.to_json());
    let e = measured_exploitability(&g, &back, res.value).unwrap();
    assert!(e.abs() <= 1e-9);
    let set = follower_best_response(&g, &back, 1 << 16).unwrap();
    assert!((set.sse_value() - res.value).abs() <= 1e-9);
}

#[test]
fn repeated_solves_are_identical() {
    let g = build("patrolling", 3).unwrap();
    let a = solve_sse(&g, SolverConfig { pool_size: 3, ..cfg(Variant::H) }).unwrap();
    let b = solve_sse(&g, SolverConfig { pool_size: 3, ..cfg(Variant::H) }).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.vf_size(), b.vf_size());
    assert_eq!(a.policy.leader.to_json(), b.policy.leader.to_json());
}
