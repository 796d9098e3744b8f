mod common;

use std::collections::HashMap;

use psqlab::agents::{
    construct_target, rlsvi_noise_std, sample_argmax, ucb_bonus, vanilla_target, PsqlAgent, RlsviAgent, TargetRule,
};
use psqlab::environments::{build_chain, ChainSpec};
use psqlab::harness::{run_agent, run_episode, CallCounts};
use psqlab::mdp::{solve_optimal, TabularMdp};
use psqlab::posterior::{hoeffding_variance, InitValue, PosteriorTable, VarianceConstants, VarianceMode};
use psqlab::prelude::*;

fn env_of(mdp: &TabularMdp, episodes: usize) -> EnvInfo {
    EnvInfo {
        horizon: mdp.horizon(),
        num_states: mdp.num_states(),
        num_actions: mdp.num_actions(),
        episodes,
    }
}

fn chain(p: f64, length: usize) -> TabularMdp {
    build_chain(&ChainSpec { p, length, horizon: 32 }).unwrap()
}

#[test]
fn degenerate_posteriors_pick_the_best_mean() {
    let mut rng = RngStream::from_seed(1);
    for _ in 0..100 {
        assert_eq!(sample_argmax(&[0.1, 0.7, 0.3], &[0.0; 3], &mut rng), 1);
    }
    // exact ties go to the lowest index
    assert_eq!(sample_argmax(&[0.5, 0.5], &[0.0, 0.0], &mut rng), 0);
}

#[test]
fn symmetric_posteriors_split_evenly() {
    let mut rng = RngStream::from_seed(2);
    let n = 100_000;
    let zeros = (0..n).filter(|_| sample_argmax(&[0.3, 0.3], &[0.5, 0.5], &mut rng) == 0).count();
    let freq = zeros as f64 / n as f64;
    assert!((freq - 0.5).abs() <= 0.01, "{freq}");
}

#[test]
fn joint_rescaling_keeps_choices() {
    let means = [0.2, 0.5, 0.45, -0.1];
    let vars = [0.3, 0.05, 0.1, 1.0];
    for c in [0.5, 4.0, 1024.0] {
        let scaled_means: Vec<f64> = means.iter().map(|m| m * c).collect();
        let scaled_vars: Vec<f64> = vars.iter().map(|v| v * c * c).collect();
        let mut a = RngStream::from_seed(33);
        let mut b = RngStream::from_seed(33);
        for _ in 0..10_000 {
            assert_eq!(
                sample_argmax(&means, &vars, &mut a),
                sample_argmax(&scaled_means, &scaled_vars, &mut b)
            );
        }
    }
}

fn point_mass_table(mean: f64) -> PosteriorTable {
    let constants = VarianceConstants {
        sigma_sq: Some(1e-300),
        ..VarianceConstants::default()
    };
    PosteriorTable::new(3, 2, 2, InitValue::VMax(mean), VarianceMode::HoeffdingTheoretical, constants)
}

#[test]
fn targets_with_point_mass_posteriors() {
    let t = point_mass_table(0.4);
    let mut rng = RngStream::from_seed(4);
    assert!((construct_target(&t, &mut rng, 0.1, 2, 1, 1) - 0.5).abs() < 1e-12);
    assert!((vanilla_target(&t, &mut rng, 0.1, 2, 1) - 0.5).abs() < 1e-12);
    // past the horizon the target is the reward
    assert_eq!(construct_target(&t, &mut rng, 0.1, 4, 1, 16), 0.1);
    assert_eq!(vanilla_target(&t, &mut rng, 0.1, 4, 1), 0.1);
}

#[test]
fn targets_use_next_state_argmax() {
    // means differ per action; the optimistic target follows the mean argmax
    let mut t = point_mass_table(0.0);
    t.record(2, 1, 1, 0.8, 0.0);
    let mut rng = RngStream::from_seed(5);
    assert!((construct_target(&t, &mut rng, 0.0, 2, 1, 3) - 0.8).abs() < 1e-12);
}

#[test]
fn repeated_transition_follows_fixed_point_iteration() {
    // one state, one action, two steps; next-step variance is negligible
    let (r1, r2) = (0.25, 0.5);
    let mdp = TabularMdp::from_fn(2, 1, 1, 0, |_, _, _| vec![1.0], |h, _, _| if h == 1 { r1 } else { r2 }).unwrap();
    let mut cfg = AgentConfig::theoretical(AgentKind::Psql, 2).with_samples(3);
    cfg.constants.sigma_sq = Some(1e-300);
    let mut agent = PsqlAgent::new(&cfg, &env_of(&mdp, 50)).unwrap();
    let mut rng = RngStream::from_seed(6);
    let mut counts = CallCounts::default();
    let mut oracle = f64::NAN;
    let mut last_gap = f64::INFINITY;
    for n in 1..=50u64 {
        agent.begin_episode();
        run_episode(&mdp, &mut agent, &mut rng, &mut counts);
        let q = agent.estimate(1, 0, 0);
        oracle = if n == 1 {
            // the first target still sees the initial step-2 value H
            r1 + 2.0
        } else {
            let alpha = 3.0 / (2.0 + n as f64);
            (1.0 - alpha) * oracle + alpha * (r1 + r2)
        };
        assert!((q - oracle).abs() < 1e-12, "n={n}: {q} vs {oracle}");
        let gap = (q - (r1 + r2)).abs();
        assert!(gap <= last_gap);
        last_gap = gap;
        assert_eq!(agent.estimate(2, 0, 0), r2);
    }
}

#[test]
fn counts_equal_visits() {
    let mdp = chain(0.8, 9);
    for kind in [AgentKind::Psql, AgentKind::PsqlStar, AgentKind::PsqlBernstein] {
        let cfg = AgentConfig::experiment(kind).with_seed(3);
        let mut agent = build_agent(&cfg, &env_of(&mdp, 200), None).unwrap();
        let mut rng = RngStream::from_seed(8);
        let mut counts = CallCounts::default();
        let mut visits: HashMap<(usize, usize, usize), u64> = HashMap::new();
        for k in 1..=200 {
            agent.begin_episode();
            let record = run_episode(&mdp, agent.as_mut(), &mut rng, &mut counts);
            for t in &record.trajectory {
                *visits.entry((t.h, t.state, t.action)).or_default() += 1;
            }
            let table = agent.posterior().unwrap();
            assert_eq!(table.total_count(), (k * 32) as u64);
        }
        let table = agent.posterior().unwrap();
        for h in 1..=32 {
            for s in 0..mdp.num_states() {
                for a in 0..2 {
                    assert_eq!(table.count(h, s, a), visits.get(&(h, s, a)).copied().unwrap_or(0));
                }
            }
        }
    }
}

#[test]
fn bernstein_agent_variance_never_exceeds_hoeffding() {
    let mdp = chain(0.75, 8);
    for cfg in [
        AgentConfig::experiment(AgentKind::PsqlBernstein).with_samples(4),
        AgentConfig::theoretical(AgentKind::PsqlBernstein, 32).with_samples(4),
    ] {
        let mut agent = build_agent(&cfg, &env_of(&mdp, 300), None).unwrap();
        run_agent(&mdp, agent.as_mut(), 300, &mut RngStream::from_seed(2), RegretMode::Realized).unwrap();
        let table = agent.posterior().unwrap();
        for h in 1..=32 {
            for s in 0..mdp.num_states() {
                for a in 0..2 {
                    assert!(table.variance(h, s, a) <= hoeffding_variance(table.count(h, s, a), 32, None));
                }
            }
        }
    }
}

#[test]
fn every_agent_is_deterministic_given_its_seed() {
    let mdp = chain(0.85, 10);
    let truth = solve_optimal(&mdp).unwrap();
    for kind in AgentKind::ALL {
        let play = || {
            let cfg = AgentConfig::experiment(kind).with_seed(77);
            let mut agent = build_agent(&cfg, &env_of(&mdp, 100), Some(&truth)).unwrap();
            run_agent(&mdp, agent.as_mut(), 100, &mut RngStream::from_seed(5), RegretMode::Realized).unwrap()
        };
        assert_eq!(play(), play(), "{}", kind.name());
    }
}

#[test]
fn every_agent_honours_the_call_contract_in_both_modes() {
    let mdp = chain(0.9, 7);
    let truth = solve_optimal(&mdp).unwrap();
    for kind in AgentKind::ALL {
        for mode in [RegretMode::Realized, RegretMode::Exact] {
            let cfg = AgentConfig::experiment(kind).with_seed(1);
            let mut agent = build_agent(&cfg, &env_of(&mdp, 20), Some(&truth)).unwrap();
            let (values, counts) = run_agent(&mdp, agent.as_mut(), 20, &mut RngStream::from_seed(1), mode).unwrap();
            assert_eq!(values.len(), 20);
            assert_eq!((counts.select_action, counts.observe), (640, 640));
        }
    }
}

#[test]
fn committed_policy_is_followed() {
    let mdp = chain(0.8, 8);
    let truth = solve_optimal(&mdp).unwrap();
    for kind in AgentKind::ALL {
        let cfg = AgentConfig::experiment(kind).with_seed(12);
        let mut agent = build_agent(&cfg, &env_of(&mdp, 30), Some(&truth)).unwrap();
        let mut rng = RngStream::from_seed(3);
        let mut counts = CallCounts::default();
        for _ in 0..30 {
            agent.begin_episode();
            let policy = agent.commit_policy();
            let record = run_episode(&mdp, agent.as_mut(), &mut rng, &mut counts);
            for t in &record.trajectory {
                assert_eq!(t.action, policy.action(t.h, t.state), "{}", kind.name());
            }
        }
    }
}

#[test]
fn ucb_bonus_example_and_limits() {
    let log_term = (8.0 * 2.0 * 3.2e5 / 0.05f64).ln();
    assert!((log_term - 18.44).abs() < 0.01);
    assert!((ucb_bonus(0.01, 1.0, log_term, 100) - 0.04294).abs() < 5e-5);
    assert!(ucb_bonus(0.01, 1.0, log_term, 1 << 40) < 1e-5);
    assert_eq!(ucb_bonus(0.0, 1.0, log_term, 3), 0.0);
}

#[test]
fn ucbql_estimates_stay_clipped() {
    let mdp = chain(0.7, 12);
    let mut agent = build_agent(&AgentConfig::experiment(AgentKind::Ucbql), &env_of(&mdp, 500), None).unwrap();
    let mut rng = RngStream::from_seed(4);
    let mut counts = CallCounts::default();
    for _ in 0..500 {
        agent.begin_episode();
        run_episode(&mdp, agent.as_mut(), &mut rng, &mut counts);
        for h in 1..=32 {
            for s in 0..mdp.num_states() {
                for a in 0..2 {
                    let q = agent.estimate(h, s, a);
                    assert!((0.0..=1.0).contains(&q));
                }
            }
        }
    }
}

#[test]
fn zero_bonus_ucbql_is_plain_q_learning() {
    let mdp = TabularMdp::from_fn(2, 1, 1, 0, |_, _, _| vec![1.0], |h, _, _| 0.2 * h as f64).unwrap();
    let mut cfg = AgentConfig::experiment(AgentKind::Ucbql);
    cfg.c_ucb = 0.0;
    let mut agent = build_agent(&cfg, &env_of(&mdp, 20), None).unwrap();
    let mut rng = RngStream::from_seed(1);
    let mut counts = CallCounts::default();
    let (mut q1, mut q2) = (1.0f64, 1.0f64);
    for n in 1..=20u64 {
        agent.begin_episode();
        run_episode(&mdp, agent.as_mut(), &mut rng, &mut counts);
        let alpha = 3.0 / (2.0 + n as f64);
        let v2 = q2.min(1.0);
        q1 = ((1.0 - alpha) * q1 + alpha * (0.2 + v2)).clamp(0.0, 1.0);
        q2 = ((1.0 - alpha) * q2 + alpha * 0.4).clamp(0.0, 1.0);
        assert!((agent.estimate(1, 0, 0) - q1).abs() < 1e-12);
        assert!((agent.estimate(2, 0, 0) - q2).abs() < 1e-12);
    }
}

#[test]
fn rlsvi_noise_example() {
    let log_term = (8.0 * 2.0 * 3.2e5 / 0.05f64).ln();
    assert!((rlsvi_noise_std(0.005, 1.0, log_term, 0) - 0.3036).abs() < 5e-4);
    assert!(rlsvi_noise_std(0.005, 1.0, log_term, 99) < rlsvi_noise_std(0.005, 1.0, log_term, 0));
}

#[test]
fn noiseless_rlsvi_becomes_optimal_on_a_deterministic_chain() {
    let mdp = chain(1.0, 7);
    let v_star = solve_optimal(&mdp).unwrap().v(1, 0);
    let mut cfg = AgentConfig::experiment(AgentKind::Rlsvi);
    cfg.c_rlsvi = 1e-300;
    let mut agent = RlsviAgent::new(&cfg, &env_of(&mdp, 400));
    let (returns, _) = run_agent(&mdp, &mut agent, 400, &mut RngStream::from_seed(2), RegretMode::Realized).unwrap();
    assert!(returns[300..].iter().all(|r| *r == v_star));
    for h in 1..=32 {
        for s in 0..mdp.num_states() {
            for a in 0..2 {
                if let Some(row) = agent.empirical_row(h, s, a) {
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn staged_randql_starts_at_the_step_cap() {
    let mdp = chain(0.8, 9);
    let agent = build_agent(&AgentConfig::experiment(AgentKind::StagedRandQl), &env_of(&mdp, 10), None).unwrap();
    for h in 1..=32 {
        for s in 0..mdp.num_states() {
            assert_eq!(agent.estimate(h, s, 1), (32 - h) as f64 / 32.0);
        }
    }
}

#[test]
fn oracle_agent_has_no_regret_on_a_deterministic_chain() {
    let mdp = chain(1.0, 11);
    let truth = solve_optimal(&mdp).unwrap();
    let mut agent = build_agent(&AgentConfig::experiment(AgentKind::Oracle), &env_of(&mdp, 50), Some(&truth)).unwrap();
    let (returns, _) = run_agent(&mdp, agent.as_mut(), 50, &mut RngStream::from_seed(1), RegretMode::Realized).unwrap();
    let regret = cumulative_regret(truth.v(1, 0), &returns);
    assert!(regret.iter().all(|r| r.abs() <= 1e-12));
    assert!(build_agent(&AgentConfig::experiment(AgentKind::Oracle), &env_of(&mdp, 5), None).is_err());
}

#[test]
fn psql_default_sample_count_follows_the_formula() {
    let mdp = chain(0.8, 6);
    let env = env_of(&mdp, 10_000);
    let agent = PsqlAgent::new(&AgentConfig::experiment(AgentKind::Psql), &env).unwrap();
    let j = psqlab::posterior::compute_j(0.05, mdp.num_states(), 2, env.total_steps(), 32).unwrap();
    assert_eq!(agent.rule(), TargetRule::Optimistic { samples: j });
    let star = PsqlAgent::new(&AgentConfig::experiment(AgentKind::PsqlStar), &env).unwrap();
    assert_eq!(star.rule(), TargetRule::Vanilla);
}

#[test]
fn invalid_configs_rejected() {
    let env = EnvInfo {
        horizon: 4,
        num_states: 3,
        num_actions: 2,
        episodes: 10,
    };
    let mut cfg = AgentConfig::experiment(AgentKind::Psql);
    cfg.constants.delta = 1.5;
    assert!(build_agent(&cfg, &env, None).is_err());
    let cfg = AgentConfig::experiment(AgentKind::Psql).with_samples(0);
    assert!(build_agent(&cfg, &env, None).is_err());
    let mut cfg = AgentConfig::experiment(AgentKind::Rlsvi);
    cfg.c_rlsvi = -1.0;
    assert!(build_agent(&cfg, &env, None).is_err());
    assert!(AgentKind::parse("bogus").is_err());
}
