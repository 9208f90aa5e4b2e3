//! Seeded Monte-Carlo estimation of outage, throughput and SNR CDFs.
//!
//! Trial `t` of a run with master seed `s` draws from ChaCha8 stream `t` of
//! key `s`, so every estimate depends only on `(s, trials, config)` and not
//! on how trials are spread over worker threads. Trials are processed in
//! fixed-size chunks whose partial results are merged in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    fill_snr, fill_snr_imperfect, relay_power, sample_estimates_into, sample_gamma, sample_realization_into,
    ChannelRealization, CsiErrorModel, LinkBudget, Matrix, NetworkTopology,
};
use crate::selection::{descending_order, maxmin_on_order, naive_on_order, random_pairs, Scheme, Scratch};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Smallest trial count accepted by the outage and throughput estimators.
pub const MIN_TRIALS: u64 = 1_000;

const CHUNK: u64 = 4096;

/// Independent random stream `stream` under master key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalKind {
    /// Wilson score interval for a binomial proportion.
    Wilson,
    /// Normal approximation around a sample mean.
    Normal,
}

/// A Monte-Carlo estimate with its 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
    /// Standard error of `mean`.
    pub std_error: f64,
    pub kind: IntervalKind,
}

impl McEstimate {
    pub fn from_proportion(successes: u64, trials: u64, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        let (ci_low, ci_high) = wilson(p, trials, Z95);
        McEstimate {
            mean: p,
            ci_low,
            ci_high,
            trials,
            seed,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            kind: IntervalKind::Wilson,
        }
    }

    pub fn from_moments(mean: f64, variance: f64, trials: u64, seed: u64) -> Self {
        let se = (variance.max(0.0) / trials as f64).sqrt();
        McEstimate {
            mean,
            ci_low: mean - Z95 * se,
            ci_high: mean + Z95 * se,
            trials,
            seed,
            std_error: se,
            kind: IntervalKind::Normal,
        }
    }

    /// Interval at `z` standard errors, of the same kind as the 95% one.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        match self.kind {
            IntervalKind::Wilson => wilson(self.mean, self.trials, z),
            IntervalKind::Normal => (self.mean - z * self.std_error, self.mean + z * self.std_error),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    pub fn contains_at(&self, x: f64, z: f64) -> bool {
        let (lo, hi) = self.interval(z);
        lo <= x && x <= hi
    }
}

fn wilson(p: f64, n: u64, z: f64) -> (f64, f64) {
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Two-proportion z statistic for `a` against `b` with a pooled variance.
pub fn two_proportion_z(a: &McEstimate, b: &McEstimate) -> f64 {
    let (na, nb) = (a.trials as f64, b.trials as f64);
    let pooled = (a.mean * na + b.mean * nb) / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (a.mean - b.mean) / se
}

/// Channel-state model used to build each trial's SNR matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Csi {
    Perfect,
    /// Selection and SNRs use estimated Rayleigh channels.
    Imperfect(CsiErrorModel),
}

/// Everything needed to turn a trial index into per-user effective SNRs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: NetworkTopology,
    pub budget: LinkBudget,
    pub scheme: Scheme,
    pub csi: Csi,
}

impl Scenario {
    pub fn new(topology: NetworkTopology, budget: LinkBudget, scheme: Scheme) -> Self {
        Scenario {
            topology,
            budget,
            scheme,
            csi: Csi::Perfect,
        }
    }

    pub fn with_csi(mut self, errmodel: CsiErrorModel) -> Result<Self> {
        errmodel.validate(&self.topology)?;
        self.csi = Csi::Imperfect(errmodel);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.budget.validate()?;
        if let Csi::Imperfect(e) = &self.csi {
            e.validate(&self.topology)?;
        }
        Ok(())
    }
}

struct TrialScratch {
    real: ChannelRealization,
    snr: Matrix,
    order: Vec<usize>,
    sel: Scratch,
    pairs: Vec<(usize, usize)>,
}

impl TrialScratch {
    fn new(t: &NetworkTopology) -> Self {
        TrialScratch {
            real: ChannelRealization::zeros(t.users, t.relays),
            snr: Matrix::zeros(t.users, t.relays),
            order: Vec::with_capacity(t.entries()),
            sel: Scratch::default(),
            pairs: Vec::with_capacity(t.users),
        }
    }
}

/// Fill `out[u]` with the effective SNR of user `u` in trial `t`.
fn run_trial(sc: &Scenario, seed: u64, t: u64, s: &mut TrialScratch, out: &mut [f64]) {
    let topo = &sc.topology;
    let mut rng = stream_rng(seed, t);
    match &sc.csi {
        Csi::Perfect => {
            sample_realization_into(topo, &mut rng, &mut s.real);
            fill_snr(&s.real, topo, &sc.budget, &mut s.snr);
        }
        Csi::Imperfect(e) => {
            sample_estimates_into(e, &mut rng, &mut s.real);
            fill_snr_imperfect(&s.real, e, topo, &sc.budget, &mut s.snr);
        }
    }
    let (m, n) = (topo.users, topo.relays);
    match sc.scheme {
        Scheme::MaxMin => {
            descending_order(s.snr.as_slice(), &mut s.order);
            maxmin_on_order(m, n, &s.order, &mut s.sel, &mut s.pairs);
        }
        Scheme::Naive => {
            descending_order(s.snr.as_slice(), &mut s.order);
            naive_on_order(m, n, &s.order, &mut s.sel, &mut s.pairs);
        }
        Scheme::Random => random_pairs(m, n, &mut rng, &mut s.sel, &mut s.pairs),
    }
    for &(u, j) in &s.pairs {
        out[u] = s.snr[(u, j)];
    }
}

/// Run `trials` trials in fixed chunks, folding each chunk's per-user
/// effective SNRs into an accumulator, and return the chunk accumulators in
/// chunk order.
fn run_chunks<A, F>(sc: &Scenario, trials: u64, seed: u64, init: impl Fn() -> A + Sync, step: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut A, &[f64]) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let mut scratch = TrialScratch::new(&sc.topology);
            let mut eff = vec![0.0; sc.topology.users];
            let start = c * CHUNK;
            for t in start..(start + CHUNK).min(trials) {
                run_trial(sc, seed, t, &mut scratch, &mut eff);
                step(&mut acc, &eff);
            }
            acc
        })
        .collect()
}

fn check_trials(trials: u64, min: u64) -> Result<()> {
    if trials < min {
        return Err(Error::InvalidTrials { trials, min });
    }
    Ok(())
}

/// Per-user outage `ℙ[γ_(u) ≤ γ_th]` with Wilson intervals.
pub fn estimate_outage(sc: &Scenario, gamma_th: f64, trials: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_trials(trials, MIN_TRIALS)?;
    sc.validate()?;
    if !(gamma_th >= 0.0) {
        return Err(Error::domain("estimate_outage", format!("threshold {gamma_th} must be >= 0")));
    }
    let users = sc.topology.users;
    let parts = run_chunks(
        sc,
        trials,
        seed,
        || vec![0u64; users],
        |acc, eff| {
            for (c, &g) in acc.iter_mut().zip(eff) {
                if g <= gamma_th {
                    *c += 1;
                }
            }
        },
    );
    let mut counts = vec![0u64; users];
    for p in parts {
        for (c, x) in counts.iter_mut().zip(p) {
            *c += x;
        }
    }
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_proportion(c, trials, seed))
        .collect())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-user average throughput `E[(1/2M) log2(1 + γ_(u))]` in bits per
/// channel use, with normal intervals.
pub fn estimate_throughput(sc: &Scenario, trials: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_trials(trials, MIN_TRIALS)?;
    sc.validate()?;
    let users = sc.topology.users;
    let scale = 1.0 / (2.0 * users as f64);
    let parts = run_chunks(
        sc,
        trials,
        seed,
        || vec![(CompensatedSum::default(), CompensatedSum::default()); users],
        |acc, eff| {
            for ((s1, s2), &g) in acc.iter_mut().zip(eff) {
                let tau = scale * g.ln_1p() / std::f64::consts::LN_2;
                s1.add(tau);
                s2.add(tau * tau);
            }
        },
    );
    let mut totals = vec![(CompensatedSum::default(), CompensatedSum::default()); users];
    for p in parts {
        for ((a1, a2), (b1, b2)) in totals.iter_mut().zip(p) {
            a1.add(b1.value());
            a2.add(b2.value());
        }
    }
    let n = trials as f64;
    Ok(totals
        .into_iter()
        .map(|(s1, s2)| {
            let mean = s1.value() / n;
            let var = (s2.value() / n - mean * mean) * n / (n - 1.0);
            McEstimate::from_moments(mean, var, trials, seed)
        })
        .collect())
}

/// Empirical CDF of one end-to-end SNR `γ_ij` on an ascending grid.
pub fn estimate_cdf(
    topology: &NetworkTopology,
    budget: &LinkBudget,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    check_trials(trials, 1)?;
    topology.validate()?;
    budget.validate()?;
    if grid.windows(2).any(|w| !(w[0] <= w[1])) || grid.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("estimate_cdf", "grid must be sorted ascending"));
    }
    let m = topology.shape();
    let pl1 = topology.path_loss(topology.d1);
    let pl2 = topology.path_loss(topology.d2);
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; grid.len()];
            let start = c * CHUNK;
            for t in start..(start + CHUNK).min(trials) {
                let mut rng = stream_rng(seed, t);
                let h1 = sample_gamma(m, topology.omega_h1, &mut rng);
                let h2 = sample_gamma(m, topology.omega_h2, &mut rng);
                let f = sample_gamma(m, topology.omega_f, &mut rng);
                let g = (budget.lambda1 * h1 / pl1).min(relay_power(f, budget, topology) * h2 / pl2);
                let first = grid.partition_point(|&x| x < g);
                for c in &mut counts[first..] {
                    *c += 1;
                }
            }
            counts
        })
        .collect();
    let mut counts = vec![0u64; grid.len()];
    for p in parts {
        for (c, x) in counts.iter_mut().zip(p) {
            *c += x;
        }
    }
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_proportion(c, trials, seed))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a = stream_rng(5, 0).next_u64();
        let b = stream_rng(5, 0).next_u64();
        let c = stream_rng(5, 1).next_u64();
        let d = stream_rng(6, 0).next_u64();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn wilson_brackets_mean() {
        for (k, n) in [(0u64, 1000u64), (1, 1000), (500, 1000), (1000, 1000)] {
            let e = McEstimate::from_proportion(k, n, 0);
            assert!(e.ci_low <= e.mean && e.mean <= e.ci_high, "{e:?}");
            assert!(e.ci_low >= 0.0 && e.ci_high <= 1.0);
        }
        let wide = McEstimate::from_proportion(300, 1000, 0).interval(3.0);
        let narrow = McEstimate::from_proportion(300, 1000, 0);
        assert!(wide.0 < narrow.ci_low && wide.1 > narrow.ci_high);
    }

    #[test]
    fn interval_shrinks_with_trials() {
        let a = McEstimate::from_proportion(100, 1_000, 0);
        let b = McEstimate::from_proportion(10_000, 100_000, 0);
        let wa = a.ci_high - a.ci_low;
        let wb = b.ci_high - b.ci_low;
        assert!((wa / wb - 10.0).abs() < 0.05);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn rejects_small_trial_counts() {
        let sc = Scenario::new(
            NetworkTopology::new(1, 1, 1).unwrap(),
            LinkBudget::common(10.0, 1.0).unwrap(),
            Scheme::MaxMin,
        );
        assert!(matches!(estimate_outage(&sc, 1.0, 999, 0), Err(Error::InvalidTrials { .. })));
        assert!(estimate_throughput(&sc, 10, 0).is_err());
        assert!(estimate_cdf(&sc.topology, &sc.budget, &[1.0, 0.5], 100, 0).is_err());
    }

    #[test]
    fn zero_threshold_never_in_outage() {
        let sc = Scenario::new(
            NetworkTopology::new(2, 3, 2).unwrap(),
            LinkBudget::common(10.0, 1.0).unwrap(),
            Scheme::MaxMin,
        );
        let est = estimate_outage(&sc, 0.0, 2000, 3).unwrap();
        assert!(est.iter().all(|e| e.mean == 0.0));
    }
}
