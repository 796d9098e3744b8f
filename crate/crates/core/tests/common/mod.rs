//! Independent oracles shared by the integration suites. Nothing in here
//! calls the library's solvers.
#![allow(dead_code)]

use psqlab::mdp::TabularMdp;
use psqlab::rng::RngStream;

/// Random MDP with the given shape; rows are normalized random weights.
pub fn random_mdp(rng: &mut RngStream, horizon: usize, num_states: usize, num_actions: usize) -> TabularMdp {
    let mut raw = Vec::new();
    for _ in 0..horizon * num_states * num_actions {
        let w: Vec<f64> = (0..num_states).map(|_| rng.uniform() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        raw.push(w.into_iter().map(|x| x / total).collect::<Vec<_>>());
    }
    let rewards: Vec<f64> = (0..horizon * num_states * num_actions).map(|_| rng.uniform()).collect();
    let mut i = 0;
    let mut j = 0;
    TabularMdp::from_fn(
        horizon,
        num_states,
        num_actions,
        0,
        |_, _, _| {
            i += 1;
            raw[i - 1].clone()
        },
        |_, _, _| {
            j += 1;
            rewards[j - 1]
        },
    )
    .unwrap()
}

/// Random small shape: H in 1..=3, S in 1..=3, A in 1..=2.
pub fn random_small_mdp(rng: &mut RngStream) -> TabularMdp {
    let h = 1 + rng.index(3);
    let s = 1 + rng.index(3);
    let a = 1 + rng.index(2);
    random_mdp(rng, h, s, a)
}

/// Expected return from `(h, s)` under a deterministic policy given as a
/// closure, by explicit recursion over every successor path.
pub fn path_value(mdp: &TabularMdp, policy: &dyn Fn(usize, usize) -> usize, h: usize, s: usize) -> f64 {
    if h > mdp.horizon() {
        return 0.0;
    }
    let a = policy(h, s);
    let mut total = mdp.reward(h, s, a);
    for (next, p) in mdp.transition_row(h, s, a).iter().enumerate() {
        if *p > 0.0 {
            total += p * path_value(mdp, policy, h + 1, next);
        }
    }
    total
}

/// Decodes policy number `code` into an action table over `(h, s)`.
pub fn decode_policy(code: usize, horizon: usize, num_states: usize, num_actions: usize) -> Vec<usize> {
    let mut c = code;
    (0..horizon * num_states)
        .map(|_| {
            let a = c % num_actions;
            c /= num_actions;
            a
        })
        .collect()
}

/// `Q*` by exhaustive enumeration of all `A^(S·H)` deterministic policies.
/// Returned as `q[h-1][s][a]`.
pub fn exhaustive_q(mdp: &TabularMdp) -> Vec<Vec<Vec<f64>>> {
    let (hz, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let count = na.pow((hz * ns) as u32);
    let mut q = vec![vec![vec![f64::NEG_INFINITY; na]; ns]; hz];
    for code in 0..count {
        let table = decode_policy(code, hz, ns, na);
        let pol = |h: usize, s: usize| table[(h - 1) * ns + s];
        for h in 1..=hz {
            for s in 0..ns {
                for a in 0..na {
                    let mut value = mdp.reward(h, s, a);
                    for (next, p) in mdp.transition_row(h, s, a).iter().enumerate() {
                        value += p * path_value(mdp, &pol, h + 1, next);
                    }
                    if value > q[h - 1][s][a] {
                        q[h - 1][s][a] = value;
                    }
                }
            }
        }
    }
    q
}

/// Best return reachable on a deterministic MDP, by forward simulation of
/// every action from every reachable state, tracking the best return per
/// state.
pub fn deterministic_best_return(mdp: &TabularMdp) -> f64 {
    use std::collections::BTreeMap;
    let mut frontier = BTreeMap::from([(mdp.start_state(), 0.0f64)]);
    for h in 1..=mdp.horizon() {
        let mut next_frontier: BTreeMap<usize, f64> = BTreeMap::new();
        for (&s, &ret) in &frontier {
            for a in 0..mdp.num_actions() {
                let row = mdp.transition_row(h, s, a);
                let next = row.iter().position(|p| *p == 1.0).expect("deterministic row");
                let total = ret + mdp.reward(h, s, a);
                let slot = next_frontier.entry(next).or_insert(f64::NEG_INFINITY);
                *slot = slot.max(total);
            }
        }
        frontier = next_frontier;
    }
    frontier.values().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Pearson chi-squared statistic for observed counts against probabilities
/// (zero-probability categories must have zero counts).
pub fn chi_squared(observed: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cats = 0usize;
    for (o, p) in observed.iter().zip(probs) {
        if *p > 0.0 {
            let e = *p * n as f64;
            stat += (*o as f64 - e).powi(2) / e;
            cats += 1;
        } else {
            assert_eq!(*o, 0, "draw in a zero-probability category");
        }
    }
    (stat, cats.saturating_sub(1))
}

/// Upper critical value of the chi-squared distribution.
pub fn chi_squared_critical(dof: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Expected maximum of `k` i.i.d. standard normals,
/// `∫ x · k φ(x) Φ(x)^(k-1) dx`, by composite Simpson on [-12, 12].
pub fn expected_max_of_normals(k: usize) -> f64 {
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};
    let nd = Normal::standard();
    let f = |x: f64| x * k as f64 * nd.pdf(x) * nd.cdf(x).powi(k as i32 - 1);
    simpson(f, -12.0, 12.0, 20_000)
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let step = (b - a) / m as f64;
    let mut total = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += w * f(a + i as f64 * step);
    }
    total * step / 3.0
}

/// The chain benchmark used by the ordering checks: tuned constants,
/// 10 instances, `episodes` episodes, plus `psql` and `psql-bernstein` with
/// four target samples.
pub fn chain_benchmark(episodes: usize, seed: u64) -> psqlab::harness::ExperimentConfig {
    use psqlab::prelude::*;
    let mut config = ExperimentConfig::new(
        EnvFamily::Chain(ChainRanges::default()),
        &["psql-star", "rlsvi", "ucbql", "staged-randql"],
        episodes,
        10,
        seed,
    )
    .unwrap();
    config
        .agents
        .push(AgentConfig::experiment(AgentKind::Psql).with_samples(4).with_label("psql-j4"));
    config
        .agents
        .push(AgentConfig::experiment(AgentKind::PsqlBernstein).with_samples(4).with_label("psql-bernstein-j4"));
    config
}

/// Least-squares slope of `ln R(k)` against `ln k` on 50 log-spaced points
/// in `[from, K]`.
pub fn loglog_slope(curve: &[f64], from: usize) -> f64 {
    let k_max = curve.len() as f64;
    let pts: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let k = (from as f64 * (k_max / from as f64).powf(i as f64 / 49.0)).round() as usize;
            ((k as f64).ln(), curve[k - 1].max(1e-12).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The entropy-regularized ELBO for a Gaussian candidate `N(m, s2)` with
/// prior `N(prior_mean, σ²/(n-1))`, likelihood `N(θ, σ²/(H+1))` on `z` and
/// entropy weight `H/n`, in closed form.
pub fn relbo_objective(m: f64, s2: f64, prior_mean: f64, n: u64, sigma_sq: f64, z: f64, horizon: usize) -> f64 {
    use std::f64::consts::{E, PI};
    let tau2 = sigma_sq / (horizon as f64 + 1.0);
    let p2 = sigma_sq / (n as f64 - 1.0);
    let lambda = horizon as f64 / n as f64;
    let expected_loglik = -0.5 * (2.0 * PI * tau2).ln() - ((z - m).powi(2) + s2) / (2.0 * tau2);
    let kl = 0.5 * (p2 / s2).ln() + (s2 + (m - prior_mean).powi(2)) / (2.0 * p2) - 0.5;
    let entropy = 0.5 * (2.0 * PI * E * s2).ln();
    expected_loglik - kl + lambda * entropy
}

/// The same objective by quadrature of
/// `∫ q (ℓ - log q + log p - λ log q) dθ`.
pub fn relbo_quadrature(m: f64, s2: f64, prior_mean: f64, n: u64, sigma_sq: f64, z: f64, horizon: usize) -> f64 {
    let log_normal = |x: f64, mu: f64, var: f64| -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mu).powi(2) / (2.0 * var);
    let tau2 = sigma_sq / (horizon as f64 + 1.0);
    let p2 = sigma_sq / (n as f64 - 1.0);
    let lambda = horizon as f64 / n as f64;
    let s = s2.sqrt();
    let f = |theta: f64| {
        let lq = log_normal(theta, m, s2);
        lq.exp() * (log_normal(z, theta, tau2) - lq + log_normal(theta, prior_mean, p2) - lambda * lq)
    };
    simpson(f, m - 14.0 * s, m + 14.0 * s, 40_000)
}
