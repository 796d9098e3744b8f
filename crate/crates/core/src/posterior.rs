//! Posterior and schedule mathematics shared by the sampling agents.
//!
//! The posterior over `Q_h(s, a)` is Gaussian with mean `Q̂` (a Q-learning
//! running estimate with step size `(H + 1) / (H + n)`) and a variance given
//! by one of three schedules:
//!
//! * `HoeffdingTheoretical`: `σ² / (n + 1)` with `σ² = 64 H³` by default,
//! * `Tuned`: `c · V_max² / max(1, n)`,
//! * `Bernstein`: the squared Bernstein standard deviation, clamped from
//!   above by a base schedule (one of the two above).

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Step size `(H + 1) / (H + n)` for the `n`-th update (`n >= 1`).
pub fn learning_rate(n: u64, horizon: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "learning rate is defined for visit counts n >= 1".into(),
        ));
    }
    Ok(step_size(n, horizon))
}

#[inline]
pub(crate) fn step_size(n: u64, horizon: usize) -> f64 {
    let hz = horizon as f64;
    (hz + 1.0) / (hz + n as f64)
}

/// One Q-learning step: `(1 - α_n) q̂ + α_n z`, where `n` is the visit
/// count after incrementing.
#[inline]
pub fn update_mean(q_hat: f64, z: f64, n: u64, horizon: usize) -> f64 {
    debug_assert!(n >= 1);
    let alpha = step_size(n, horizon);
    (1.0 - alpha) * q_hat + alpha * z
}

/// Weights `[α_n⁰, α_n¹, …, α_nⁿ]` with `α_nⁱ = α_i Π_{j=i+1..n} (1 - α_j)`
/// and `α_n⁰ = Π_{j=1..n} (1 - α_j)`.
pub fn alpha_weights(n: usize, horizon: usize) -> Vec<f64> {
    let mut weights = vec![0.0; n + 1];
    // walk backwards accumulating the tail product
    let mut tail = 1.0;
    for i in (1..=n).rev() {
        let alpha = step_size(i as u64, horizon);
        weights[i] = alpha * tail;
        tail *= 1.0 - alpha;
    }
    weights[0] = tail;
    weights
}

/// Which variance schedule a posterior table uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarianceMode {
    HoeffdingTheoretical,
    Tuned,
    Bernstein,
}

impl VarianceMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "hoeffding" | "hoeffding_theoretical" | "hoeffding-theoretical" => Ok(Self::HoeffdingTheoretical),
            "tuned" => Ok(Self::Tuned),
            "bernstein" => Ok(Self::Bernstein),
            other => Err(Error::Config(format!("unknown variance mode `{other}`"))),
        }
    }
}

/// Constants behind the variance schedules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceConstants {
    /// `σ²` of the theoretical schedule; `None` means `64 H³`.
    pub sigma_sq: Option<f64>,
    pub c_tuned: f64,
    pub c_bernstein: f64,
    pub v_max: f64,
    pub delta: f64,
    /// Upper clamp used by the Bernstein schedule.
    pub bernstein_clamp: ClampSchedule,
}

impl Default for VarianceConstants {
    fn default() -> Self {
        VarianceConstants {
            sigma_sq: None,
            c_tuned: 0.02,
            c_bernstein: 1.0,
            v_max: 1.0,
            delta: 0.05,
            bernstein_clamp: ClampSchedule::HoeffdingTheoretical,
        }
    }
}

/// Base schedule the Bernstein variance is clamped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClampSchedule {
    HoeffdingTheoretical,
    Tuned,
}

/// `64 H³`, the theoretical posterior scale.
pub fn theoretical_sigma_sq(horizon: usize) -> f64 {
    64.0 * (horizon as f64).powi(3)
}

/// `σ² / (n + 1)`.
#[inline]
pub fn hoeffding_variance(n: u64, horizon: usize, sigma_sq: Option<f64>) -> f64 {
    sigma_sq.unwrap_or_else(|| theoretical_sigma_sq(horizon)) / (n as f64 + 1.0)
}

/// `c · V_max² / max(1, n)`.
#[inline]
pub fn tuned_variance(n: u64, c: f64, v_max: f64) -> f64 {
    c * v_max * v_max / (n.max(1) as f64)
}

/// Running sums of `z - r` and `(z - r)²` for one `(h, s, a)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BernsteinAccumulators {
    pub mu: f64,
    pub gamma: f64,
}

impl BernsteinAccumulators {
    pub fn update(&mut self, z: f64, r: f64) {
        let d = z - r;
        self.mu += d;
        self.gamma += d * d;
    }

    /// Per-sample variance `γ/n - (μ/n)²` of the next-step values, floored at 0.
    pub fn empirical_variance(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("empirical variance needs n >= 1".into()));
        }
        let n = n as f64;
        let mean = self.mu / n;
        Ok((self.gamma / n - mean * mean).max(0.0))
    }
}

/// Log factors of the Bernstein schedule: `η = log(SAKH/δ)` and
/// `χ = log(JSAT/δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernsteinLogs {
    pub eta: f64,
    pub chi: f64,
    pub num_states: usize,
    pub num_actions: usize,
}

impl BernsteinLogs {
    pub fn new(num_states: usize, num_actions: usize, episodes: usize, horizon: usize, samples: usize, delta: f64) -> Self {
        let (s, a, k, h) = (num_states as f64, num_actions as f64, episodes as f64, horizon as f64);
        let t = k * h;
        BernsteinLogs {
            eta: (s * a * k * h / delta).ln(),
            chi: (samples as f64 * s * a * t / delta).ln(),
            num_states,
            num_actions,
        }
    }
}

/// Unclamped Bernstein standard deviation
/// `c (√(H/(n+1) · (b + H) · η) + √(H⁷ S A η) · χ / (n+1))`.
pub fn bernstein_std(n: u64, horizon: usize, empirical_var: f64, c: f64, logs: &BernsteinLogs) -> f64 {
    let hz = horizon as f64;
    let n1 = n as f64 + 1.0;
    let sa = (logs.num_states * logs.num_actions) as f64;
    c * ((hz / n1 * (empirical_var + hz) * logs.eta).sqrt() + (hz.powi(7) * sa * logs.eta).sqrt() * logs.chi / n1)
}

/// Posterior variance at visit count `n` under the given schedule.
///
/// `stats` and `logs` are required in Bernstein mode and ignored otherwise.
pub fn variance(
    n: u64,
    horizon: usize,
    mode: VarianceMode,
    constants: &VarianceConstants,
    stats: Option<&BernsteinAccumulators>,
    logs: Option<&BernsteinLogs>,
) -> Result<f64> {
    match mode {
        VarianceMode::HoeffdingTheoretical => Ok(hoeffding_variance(n, horizon, constants.sigma_sq)),
        VarianceMode::Tuned => Ok(tuned_variance(n, constants.c_tuned, constants.v_max)),
        VarianceMode::Bernstein => {
            let (Some(stats), Some(logs)) = (stats, logs) else {
                return Err(Error::InvalidArgument(
                    "bernstein variance needs accumulators and log factors".into(),
                ));
            };
            let b = if n == 0 { 0.0 } else { stats.empirical_variance(n)? };
            let sd = bernstein_std(n, horizon, b, constants.c_bernstein, logs);
            Ok((sd * sd).min(clamp_variance(n, horizon, constants)))
        }
    }
}

#[inline]
pub(crate) fn clamp_variance(n: u64, horizon: usize, constants: &VarianceConstants) -> f64 {
    match constants.bernstein_clamp {
        ClampSchedule::HoeffdingTheoretical => hoeffding_variance(n, horizon, constants.sigma_sq),
        ClampSchedule::Tuned => tuned_variance(n, constants.c_tuned, constants.v_max),
    }
}

/// `e⁻⁴`, the slack probability in the single-sample optimism bound.
pub const DELTA_PRIME: f64 = 0.018_315_638_888_734_18;

/// `p₁ = Φ(-1) - δ/H - δ'`.
pub fn optimism_probability(delta: f64, horizon: usize) -> f64 {
    let phi = Normal::standard().cdf(-1.0);
    phi - delta / horizon as f64 - DELTA_PRIME
}

/// Number of target samples `J = ⌈log(SAT/δ) / log(1/(1 - p₁))⌉`.
pub fn compute_j(delta: f64, num_states: usize, num_actions: usize, total_steps: usize, horizon: usize) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1)")));
    }
    let p1 = optimism_probability(delta, horizon);
    if p1 <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "p1 = Phi(-1) - delta/H - e^-4 = {p1} must be positive; use a smaller delta for H = {horizon}"
        )));
    }
    compute_j_with_p1(p1, delta, num_states, num_actions, total_steps)
}

/// `J` for an explicit `p₁ ∈ (0, 1]`.
pub fn compute_j_with_p1(p1: f64, delta: f64, num_states: usize, num_actions: usize, total_steps: usize) -> Result<usize> {
    if !(p1 > 0.0 && p1 <= 1.0) {
        return Err(Error::InvalidArgument(format!("p1 = {p1} outside (0, 1]")));
    }
    let numerator = ((num_states * num_actions) as f64 * total_steps as f64 / delta).ln();
    let denominator = -(1.0 - p1).ln();
    // p1 = 1 gives an infinite denominator: one sample always suffices
    Ok(((numerator / denominator).ceil() as usize).max(1))
}

/// A Gaussian posterior over one Q-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPosterior {
    pub mean: f64,
    pub variance: f64,
    pub count: u64,
}

/// Closed-form maximizer of the entropy-regularized ELBO.
///
/// Prior `N(prior_mean, σ²/(n-1))`, likelihood `N(θ, σ²/(H+1))` for the
/// target `z`, entropy weight `H/n`. The optimum is `N(μ_n, σ²/n)` with
/// `μ_n = (1 - α_n) μ_{n-1} + α_n z` and `α_n = (H+1)/(H+n)`. With `H = 0`
/// the regularizer vanishes and this is the plain conjugate update.
pub fn relbo_posterior(prior_mean: f64, prior_count: u64, sigma_sq: f64, z: f64, horizon: usize) -> GaussianPosterior {
    let n = prior_count + 1;
    GaussianPosterior {
        mean: update_mean(prior_mean, z, n, horizon),
        variance: sigma_sq / n as f64,
        count: n,
    }
}

/// Initial value for posterior means / value estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitValue {
    /// `H` at every step.
    Horizon,
    /// `V_max` at every step.
    VMax(f64),
    /// `(H - h) / H` at step `h`.
    StepCap,
}

impl InitValue {
    pub fn value(&self, h: usize, horizon: usize) -> f64 {
        match *self {
            InitValue::Horizon => horizon as f64,
            InitValue::VMax(v) => v,
            InitValue::StepCap => (horizon - h.min(horizon)) as f64 / horizon as f64,
        }
    }
}

/// Per-`(h, s, a)` posterior state for one agent run.
///
/// Rows for `h = 1..=H` hold the running estimates; the row `h = H + 1` is
/// permanently zero so lookups one step ahead need no special case.
#[derive(Clone, Debug)]
pub struct PosteriorTable {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    mean: Vec<f64>,
    count: Vec<u64>,
    mode: VarianceMode,
    constants: VarianceConstants,
    clip: Option<(f64, f64)>,
    bernstein: Option<(Vec<BernsteinAccumulators>, BernsteinLogs)>,
}

impl PosteriorTable {
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        init: InitValue,
        mode: VarianceMode,
        constants: VarianceConstants,
    ) -> Self {
        let mut mean = vec![0.0; (horizon + 1) * num_states * num_actions];
        for h in 1..=horizon {
            let v = init.value(h, horizon);
            let start = (h - 1) * num_states * num_actions;
            mean[start..start + num_states * num_actions].fill(v);
        }
        PosteriorTable {
            horizon,
            num_states,
            num_actions,
            count: vec![0; mean.len()],
            mean,
            mode,
            constants,
            clip: None,
            bernstein: None,
        }
    }

    /// Clip stored estimates into `[lo, hi]` after each update.
    pub fn with_clip(mut self, lo: f64, hi: f64) -> Self {
        self.clip = Some((lo, hi));
        self
    }

    /// Enables Bernstein accumulators (required for `VarianceMode::Bernstein`).
    pub fn with_bernstein(mut self, logs: BernsteinLogs) -> Self {
        self.bernstein = Some((vec![BernsteinAccumulators::default(); self.mean.len()], logs));
        self
    }

    #[inline]
    fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        ((h - 1) * self.num_states + s) * self.num_actions + a
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn mode(&self) -> VarianceMode {
        self.mode
    }

    pub fn constants(&self) -> &VarianceConstants {
        &self.constants
    }

    #[inline]
    pub fn mean(&self, h: usize, s: usize, a: usize) -> f64 {
        self.mean[self.idx(h, s, a)]
    }

    #[inline]
    pub fn count(&self, h: usize, s: usize, a: usize) -> u64 {
        self.count[self.idx(h, s, a)]
    }

    /// Means of all actions at `(h, s)`.
    #[inline]
    pub fn means_at(&self, h: usize, s: usize) -> &[f64] {
        let i = self.idx(h, s, 0);
        &self.mean[i..i + self.num_actions]
    }

    pub fn accumulators(&self, h: usize, s: usize, a: usize) -> Option<&BernsteinAccumulators> {
        let i = self.idx(h, s, a);
        self.bernstein.as_ref().map(|(acc, _)| &acc[i])
    }

    /// Posterior variance at `(h, s, a)`; zero on the terminal row.
    pub fn variance(&self, h: usize, s: usize, a: usize) -> f64 {
        if h > self.horizon {
            return 0.0;
        }
        let i = self.idx(h, s, a);
        let n = self.count[i];
        match self.mode {
            VarianceMode::HoeffdingTheoretical => hoeffding_variance(n, self.horizon, self.constants.sigma_sq),
            VarianceMode::Tuned => tuned_variance(n, self.constants.c_tuned, self.constants.v_max),
            VarianceMode::Bernstein => {
                let (acc, logs) = self
                    .bernstein
                    .as_ref()
                    .expect("bernstein mode requires accumulators");
                let b = if n == 0 { 0.0 } else { acc[i].empirical_variance(n).unwrap_or(0.0) };
                let sd = bernstein_std(n, self.horizon, b, self.constants.c_bernstein, logs);
                (sd * sd).min(clamp_variance(n, self.horizon, &self.constants))
            }
        }
    }

    /// Records target `z` (with reward `r`) for `(h, s, a)`: increments the
    /// count, applies the Q-learning step and, when enabled, the Bernstein
    /// accumulators. Returns the new count.
    pub fn record(&mut self, h: usize, s: usize, a: usize, z: f64, r: f64) -> u64 {
        let i = self.idx(h, s, a);
        self.count[i] += 1;
        let n = self.count[i];
        let mut q = update_mean(self.mean[i], z, n, self.horizon);
        if let Some((lo, hi)) = self.clip {
            q = q.clamp(lo, hi);
        }
        self.mean[i] = q;
        if let Some((acc, _)) = self.bernstein.as_mut() {
            acc[i].update(z, r);
        }
        n
    }

    /// Sum of all visit counts.
    pub fn total_count(&self) -> u64 {
        self.count.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learning_rate_examples() {
        assert_eq!(learning_rate(1, 32).unwrap(), 1.0);
        assert_eq!(learning_rate(33, 32).unwrap(), 33.0 / 65.0);
        assert!(learning_rate(0, 32).is_err());
        let mut prev = 1.0;
        for n in 2..2000 {
            let a = learning_rate(n, 32).unwrap();
            assert!(a < prev && a > 0.0);
            prev = a;
        }
    }

    #[test]
    fn update_mean_examples() {
        assert_eq!(update_mean(0.3, 0.9, 1, 32), 0.9);
        assert_eq!(update_mean(0.4, 0.4, 17, 32), 0.4);
        // H = 1: α_1 = 1, α_2 = 2/3
        let q = update_mean(0.0, 1.0, 1, 1);
        assert_eq!(update_mean(q, 1.0, 2, 1), 1.0);
    }

    #[test]
    fn alpha_weight_examples() {
        assert_eq!(alpha_weights(0, 5), vec![1.0]);
        assert_eq!(alpha_weights(1, 5), vec![0.0, 1.0]);
        let w = alpha_weights(2, 1);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((w[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let c = VarianceConstants::default();
        assert_eq!(variance(7, 2, VarianceMode::HoeffdingTheoretical, &c, None, None).unwrap(), 64.0);
        assert_eq!(variance(0, 32, VarianceMode::Tuned, &c, None, None).unwrap(), 0.02);
        assert_eq!(variance(1, 32, VarianceMode::Tuned, &c, None, None).unwrap(), 0.02);
        assert!(variance(1, 32, VarianceMode::Bernstein, &c, None, None).is_err());
    }

    #[test]
    fn bernstein_is_clamped_by_hoeffding() {
        let c = VarianceConstants::default();
        let logs = BernsteinLogs::new(8, 2, 10_000, 32, 124, 0.05);
        let acc = BernsteinAccumulators::default();
        for n in [0u64, 1, 10, 1_000, 1_000_000_000_000] {
            let vb = variance(n, 32, VarianceMode::Bernstein, &c, Some(&acc), Some(&logs)).unwrap();
            assert!(vb <= hoeffding_variance(n, 32, None));
        }
        // with a tiny Bernstein constant the Bernstein branch wins
        let small = VarianceConstants {
            c_bernstein: 1e-6,
            ..c
        };
        let vb = variance(10, 32, VarianceMode::Bernstein, &small, Some(&acc), Some(&logs)).unwrap();
        assert!(vb < hoeffding_variance(10, 32, None));
    }

    #[test]
    fn empirical_variance_examples() {
        let mut acc = BernsteinAccumulators::default();
        assert!(acc.empirical_variance(0).is_err());
        acc.update(0.5, 0.5);
        acc.update(1.5, 0.5);
        assert_eq!((acc.mu, acc.gamma), (1.0, 1.0));
        assert_eq!(acc.empirical_variance(2).unwrap(), 0.25);
        let mut flat = BernsteinAccumulators::default();
        for _ in 0..5 {
            flat.update(0.7, 0.2);
        }
        assert!(flat.empirical_variance(5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn j_examples() {
        let p1 = optimism_probability(0.05, 32);
        assert!((p1 - 0.138_777_115).abs() < 1e-8);
        assert_eq!(compute_j(0.05, 8, 2, 320_000, 32).unwrap(), 124);
        assert!(compute_j(0.025, 8, 2, 320_000, 32).unwrap() > 124);
        assert!(compute_j(0.9, 8, 2, 320_000, 1).is_err());
        assert!(compute_j(0.0, 8, 2, 320_000, 32).is_err());
        assert_eq!(compute_j_with_p1(1.0, 0.05, 8, 2, 320_000).unwrap(), 1);
        let mut prev = usize::MAX;
        for p1 in [0.05, 0.1, 0.2, 0.5, 0.9, 0.999] {
            let j = compute_j_with_p1(p1, 0.05, 8, 2, 320_000).unwrap();
            assert!(j <= prev);
            prev = j;
        }
    }

    #[test]
    fn relbo_reduces_to_bayes_without_regularizer() {
        let post = relbo_posterior(0.2, 3, 1.0, 1.0, 0);
        assert!((post.mean - (0.75 * 0.2 + 0.25 * 1.0)).abs() < 1e-15);
        assert_eq!(post.count, 4);
        assert_eq!(post.variance, 0.25);
        let post = relbo_posterior(0.2, 3, 1.0, 1.0, 8);
        assert_eq!(post.mean, update_mean(0.2, 1.0, 4, 8));
    }

    #[test]
    fn table_initialization_and_record() {
        let mut t = PosteriorTable::new(4, 2, 2, InitValue::StepCap, VarianceMode::Tuned, VarianceConstants::default());
        assert_eq!(t.mean(1, 0, 0), 0.75);
        assert_eq!(t.mean(4, 1, 1), 0.0);
        assert_eq!(t.mean(5, 1, 1), 0.0);
        assert_eq!(t.variance(5, 0, 0), 0.0);
        assert_eq!(t.record(2, 1, 0, 0.3, 0.0), 1);
        assert_eq!(t.mean(2, 1, 0), 0.3);
        assert_eq!(t.total_count(), 1);
        let mut clipped = PosteriorTable::new(4, 1, 1, InitValue::Horizon, VarianceMode::Tuned, VarianceConstants::default())
            .with_clip(0.0, 1.0);
        clipped.record(1, 0, 0, 3.0, 0.0);
        assert_eq!(clipped.mean(1, 0, 0), 1.0);
    }

    #[test]
    fn variance_mode_parsing() {
        assert_eq!(VarianceMode::parse("tuned").unwrap(), VarianceMode::Tuned);
        assert_eq!(VarianceMode::parse("bernstein").unwrap(), VarianceMode::Bernstein);
        assert!(VarianceMode::parse("gaussian").is_err());
    }
}
