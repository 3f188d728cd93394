use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sse_core::baselines::{best_response, follower_best_response};
use sse_core::credible::{credible_transition, filter, hausdorff_distance, terminal_reward, CredibleSet};
use sse_core::occupancy::{LeaderPolicy, LeaderRule};
use sse_core::pbvi::exploitability_bound;
use sse_core::{validate_game, Game, Histories, HistoryMode};

fn random_game(seed: u64, ns: usize, nl: usize, nf: usize, horizon: usize) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let mut g = Game::new("random", names("s", ns), names("a", nl), names("b", nf), 0, 1.0, horizon);
    for s in 0..ns {
        for al in 0..nl {
            for af in 0..nf {
                let s2 = rng.gen_range(0..ns);
                if ns > 1 && rng.gen_bool(0.3) {
                    let s3 = (s2 + 1) % ns;
                    g.set_transition(s, al, af, &[(s2, 0.5), (s3, 0.5)]);
                } else {
                    g.set_transition(s, al, af, &[(s2, 1.0)]);
                }
                for s2 in 0..ns {
                    g.set_reward(s, al, af, s2, rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64);
                }
            }
        }
    }
    g
}

fn random_markov(g: &Game, seed: u64) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nl = g.n_leader_actions();
    (0..g.horizon)
        .map(|_| {
            (0..g.n_states())
                .map(|_| {
                    let w: Vec<f64> = (0..nl).map(|_| rng.gen_range(0..=3) as f64 + 0.5).collect();
                    let total: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / total).collect()
                })
                .collect()
        })
        .collect()
}

fn stage_rule(hist: &Histories, c: &CredibleSet, dist: &[Vec<f64>]) -> LeaderRule {
    let mut rule = LeaderRule::new(c.stage);
    for o in &c.members {
        for hl in o.leader_histories() {
            rule.rows.insert(hl, dist[hist.leader.state(hl)].clone());
        }
    }
    rule
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filtering_keeps_the_terminal_reward(
        seed in any::<u64>(),
        ns in 1usize..=3,
        nl in 1usize..=2,
        nf in 1usize..=2,
        horizon in 1usize..=3,
    ) {
        let g = random_game(seed, ns, nl, nf, horizon);
        let dist = random_markov(&g, seed ^ 1);
        let hist = Histories::new(HistoryMode::Full);
        let mut plain = CredibleSet::initial(&g, &hist);
        let mut kept = plain.clone();
        for t in 0..horizon {
            let rule = stage_rule(&hist, &plain, &dist[t]);
            let rule_kept = stage_rule(&hist, &kept, &dist[t]);
            let next = credible_transition(&g, &hist, &plain, &rule, 1 << 10);
            prop_assume!(next.is_ok());
            plain = next.unwrap();
            kept = filter(&g, &credible_transition(&g, &hist, &kept, &rule_kept, 1 << 10).unwrap());
            prop_assert!(kept.len() <= plain.len());
            let again = filter(&g, &kept);
            prop_assert_eq!(again.len(), kept.len());
        }
        prop_assert!((terminal_reward(&g, &plain) - terminal_reward(&g, &kept)).abs() < 1e-9);
    }

    #[test]
    fn best_response_agrees_with_enumeration(
        seed in any::<u64>(),
        ns in 1usize..=3,
        horizon in 1usize..=3,
    ) {
        let g = random_game(seed, ns, 2, 2, horizon);
        prop_assert!(validate_game(&g).is_empty());
        let hist = Arc::new(Histories::new(HistoryMode::Full));
        let pil = LeaderPolicy::markov(&g, hist, &random_markov(&g, seed ^ 2)).unwrap();
        let dp = best_response(&g, &pil).unwrap();
        let set = follower_best_response(&g, &pil, 1 << 16);
        prop_assume!(set.is_ok());
        let set = set.unwrap();
        prop_assert!((dp.value_follower - set.value_follower).abs() < 1e-9);
        prop_assert!((dp.value_leader - set.sse_value()).abs() < 1e-9);
    }

    #[test]
    fn hausdorff_is_a_metric_on_samples(seed in any::<u64>(), ns in 1usize..=3) {
        let g = random_game(seed, ns, 2, 2, 2);
        let hist = Histories::new(HistoryMode::Full);
        let c0 = CredibleSet::initial(&g, &hist);
        let dist = random_markov(&g, seed ^ 3);
        let a = credible_transition(&g, &hist, &c0, &stage_rule(&hist, &c0, &dist[0]), 1 << 10).unwrap();
        let mut pure = dist[1].clone();
        for row in &mut pure {
            row.iter_mut().enumerate().for_each(|(i, p)| *p = if i == 0 { 1.0 } else { 0.0 });
        }
        let b = credible_transition(&g, &hist, &c0, &stage_rule(&hist, &c0, &pure), 1 << 10).unwrap();
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let (ab, ba) = (hausdorff_distance(&a, &b).unwrap(), hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn bound_is_linear_in_sigma_and_grows_with_horizon(
        m in 0.01f64..10.0,
        gamma in 0.01f64..0.99,
        l in 1usize..60,
        sigma in 0.0f64..1.0,
    ) {
        let b = exploitability_bound(m, gamma, l, sigma).unwrap();
        let b2 = exploitability_bound(m, gamma, l, 2.0 * sigma).unwrap();
        prop_assert!((b2 - 2.0 * b).abs() <= 1e-12 * b2.abs().max(1.0));
        prop_assert!(exploitability_bound(m, gamma, l + 1, sigma).unwrap() >= b);
        prop_assert_eq!(exploitability_bound(m, gamma, l, 0.0).unwrap(), 0.0);
    }
}
