//! Checks the closed-form regularized-ELBO posterior against a brute-force
//! grid search over Gaussian candidates.
//!
//!     cargo run --release --example relbo_posterior

use std::f64::consts::{E, PI};

use psqlab::posterior::relbo_posterior;

/// Objective for candidate `N(m, s2)`: expected log-likelihood of `z`
/// minus KL to the prior plus `H/n` times the entropy.
fn objective(m: f64, s2: f64, prior: f64, n: u64, sigma_sq: f64, z: f64, horizon: usize) -> f64 {
    let tau2 = sigma_sq / (horizon as f64 + 1.0);
    let p2 = sigma_sq / (n as f64 - 1.0);
    let lambda = horizon as f64 / n as f64;
    let loglik = -0.5 * (2.0 * PI * tau2).ln() - ((z - m).powi(2) + s2) / (2.0 * tau2);
    let kl = 0.5 * (p2 / s2).ln() + (s2 + (m - prior).powi(2)) / (2.0 * p2) - 0.5;
    loglik - kl + lambda * 0.5 * (2.0 * PI * E * s2).ln()
}

fn main() {
    for (prior, n, sigma_sq, z, horizon) in [(0.5, 5, 1.0, 0.9, 4), (0.0, 40, 0.2, 1.0, 32), (2.0, 3, 3.0, -1.0, 1)] {
        let closed = relbo_posterior(prior, n - 1, sigma_sq, z, horizon);
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=800 {
            let m = closed.mean - 1.0 + i as f64 * 0.0025;
            for j in 0..=400 {
                let s2 = closed.variance * (0.5 + j as f64 * 0.0025);
                let v = objective(m, s2, prior, n, sigma_sq, z, horizon);
                if v > best.0 {
                    best = (v, m, s2);
                }
            }
        }
        println!(
            "H={horizon:2} n={n:2}: closed form N({:.4}, {:.4}), grid argmax N({:.4}, {:.4})",
            closed.mean, closed.variance, best.1, best.2
        );
    }
}
