//! Relay selection schemes and rank-placement probabilities.
//!
//! Every scheme here depends on the SNR matrix only through the ordering of
//! its entries. Selection therefore runs on an *order*: the list of matrix
//! positions (row-major `user * N + relay`) sorted from largest to smallest
//! SNR. Ties are broken towards the lower position index, i.e. lower user
//! first, then lower relay.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SnrMatrix;
use crate::montecarlo::stream_rng;

/// Largest `M·N` for which all `(MN)!` rank permutations are enumerated.
pub const MAX_EXACT_ENTRIES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Lexicographic max-min fair (bottleneck) assignment.
    #[serde(rename = "maxmin")]
    MaxMin,
    /// Users pick their best free relay in index order.
    Naive,
    /// Uniformly random injective assignment.
    Random,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::MaxMin => "maxmin",
            Scheme::Naive => "naive",
            Scheme::Random => "random",
        }
    }

    /// Number of ranks a user can occupy: `(M-1)N + 1` under max-min,
    /// all `MN` otherwise.
    pub fn rank_support(self, users: usize, relays: usize) -> usize {
        match self {
            Scheme::MaxMin => (users - 1) * relays + 1,
            Scheme::Naive | Scheme::Random => users * relays,
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "maxmin" => Ok(Scheme::MaxMin),
            "naive" => Ok(Scheme::Naive),
            "random" => Ok(Scheme::Random),
            other => Err(format!("unknown scheme `{other}` (expected maxmin, naive or random)")),
        }
    }
}

/// Outcome of a relay-selection round.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `relay_of[u]` is the relay serving user `u`; no relay appears twice.
    pub relay_of: Vec<usize>,
    /// Effective SNR `γ_(u)` of each user.
    pub effective_snr: Vec<f64>,
    /// 1-based position of each user's SNR among all `MN` entries.
    pub global_rank: Vec<usize>,
}

fn check_shape(snr: &SnrMatrix) -> Result<()> {
    if snr.users() > snr.relays() {
        return Err(Error::Dimension(format!(
            "{} users cannot be served by {} relays without sharing",
            snr.users(),
            snr.relays()
        )));
    }
    Ok(())
}

/// Positions sorted by descending SNR, ties by ascending position.
pub(crate) fn descending_order(values: &[f64], order: &mut Vec<usize>) {
    order.clear();
    order.extend(0..values.len());
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
}

fn build_assignment(snr: &SnrMatrix, order: &[usize], pairs: &[(usize, usize)]) -> Assignment {
    let n = snr.relays();
    let mut rank_of = vec![0usize; order.len()];
    for (r, &pos) in order.iter().enumerate() {
        rank_of[pos] = r + 1;
    }
    let mut relay_of = vec![0; snr.users()];
    let mut effective_snr = vec![0.0; snr.users()];
    let mut global_rank = vec![0; snr.users()];
    for &(u, j) in pairs {
        relay_of[u] = j;
        effective_snr[u] = snr.get(u, j);
        global_rank[u] = rank_of[u * n + j];
    }
    Assignment {
        relay_of,
        effective_snr,
        global_rank,
    }
}

/// Max-min fair assignment.
///
/// The smallest assigned SNR is the largest achievable over all injective
/// assignments; the user/relay pair attaining it is fixed and the remaining
/// `(M-1) × (N-1)` problem is solved the same way.
pub fn maxmin_assign(snr: &SnrMatrix) -> Result<Assignment> {
    check_shape(snr)?;
    let mut order = Vec::new();
    descending_order(snr.matrix().as_slice(), &mut order);
    let mut scratch = Scratch::default();
    let mut pairs = Vec::with_capacity(snr.users());
    maxmin_on_order(snr.users(), snr.relays(), &order, &mut scratch, &mut pairs);
    Ok(build_assignment(snr, &order, &pairs))
}

/// User 1 takes its best relay, user 2 the best of the rest, and so on.
pub fn naive_assign(snr: &SnrMatrix) -> Result<Assignment> {
    check_shape(snr)?;
    let mut order = Vec::new();
    descending_order(snr.matrix().as_slice(), &mut order);
    let mut pairs = Vec::with_capacity(snr.users());
    let mut scratch = Scratch::default();
    naive_on_order(snr.users(), snr.relays(), &order, &mut scratch, &mut pairs);
    Ok(build_assignment(snr, &order, &pairs))
}

/// Uniformly random injective assignment, ignoring the SNR values.
pub fn random_assign<R: Rng + ?Sized>(snr: &SnrMatrix, rng: &mut R) -> Result<Assignment> {
    check_shape(snr)?;
    let mut order = Vec::new();
    descending_order(snr.matrix().as_slice(), &mut order);
    let mut pairs = Vec::with_capacity(snr.users());
    let mut scratch = Scratch::default();
    random_pairs(snr.users(), snr.relays(), rng, &mut scratch, &mut pairs);
    Ok(build_assignment(snr, &order, &pairs))
}

pub fn assign<R: Rng + ?Sized>(scheme: Scheme, snr: &SnrMatrix, rng: &mut R) -> Result<Assignment> {
    match scheme {
        Scheme::MaxMin => maxmin_assign(snr),
        Scheme::Naive => naive_assign(snr),
        Scheme::Random => random_assign(snr, rng),
    }
}

/// Reusable buffers for the order-based selection routines.
#[derive(Debug, Default)]
pub(crate) struct Scratch {
    user_free: Vec<bool>,
    relay_free: Vec<bool>,
    cand: Vec<usize>,
    adj: Vec<Vec<usize>>,
    match_relay: Vec<usize>,
    seen: Vec<bool>,
    perm: Vec<usize>,
    rank_of: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Scratch {
    fn reset(&mut self, users: usize, relays: usize) {
        self.user_free.clear();
        self.user_free.resize(users, true);
        self.relay_free.clear();
        self.relay_free.resize(relays, true);
        if self.adj.len() < users {
            self.adj.resize_with(users, Vec::new);
        }
    }

    /// Whether the first `len` candidate edges saturate every free user.
    fn saturates(&mut self, len: usize, users: usize, relays: usize, free_users: usize) -> bool {
        for a in self.adj.iter_mut().take(users) {
            a.clear();
        }
        for &pos in &self.cand[..len] {
            self.adj[pos / relays].push(pos % relays);
        }
        self.match_relay.clear();
        self.match_relay.resize(relays, NONE);
        let mut matched = 0;
        for u in 0..users {
            if !self.user_free[u] {
                continue;
            }
            if self.adj[u].is_empty() {
                return false;
            }
            self.seen.clear();
            self.seen.resize(relays, false);
            if augment(u, &self.adj, &mut self.match_relay, &mut self.seen) {
                matched += 1;
            } else {
                return false;
            }
        }
        matched == free_users
    }
}

fn augment(u: usize, adj: &[Vec<usize>], match_relay: &mut [usize], seen: &mut [bool]) -> bool {
    for &j in &adj[u] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if match_relay[j] == NONE || augment(match_relay[j], adj, match_relay, seen) {
            match_relay[j] = u;
            return true;
        }
    }
    false
}

/// Lexicographic bottleneck assignment on a descending order of positions.
/// Pushes `(user, relay)` pairs in the order they are fixed (worst first).
pub(crate) fn maxmin_on_order(
    users: usize,
    relays: usize,
    order: &[usize],
    s: &mut Scratch,
    pairs: &mut Vec<(usize, usize)>,
) {
    s.reset(users, relays);
    pairs.clear();
    let mut free_users = users;
    while free_users > 0 {
        s.cand.clear();
        for &pos in order {
            if s.user_free[pos / relays] && s.relay_free[pos % relays] {
                s.cand.push(pos);
            }
        }
        // The full candidate set is a complete bipartite graph with at least
        // as many relays as users, so it always saturates.
        let (mut lo, mut hi) = (free_users, s.cand.len());
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if s.saturates(mid, users, relays, free_users) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let pos = s.cand[lo - 1];
        let (u, j) = (pos / relays, pos % relays);
        s.user_free[u] = false;
        s.relay_free[j] = false;
        pairs.push((u, j));
        free_users -= 1;
    }
}

pub(crate) fn naive_on_order(
    users: usize,
    relays: usize,
    order: &[usize],
    s: &mut Scratch,
    pairs: &mut Vec<(usize, usize)>,
) {
    s.reset(users, relays);
    pairs.clear();
    s.rank_of.clear();
    s.rank_of.resize(order.len(), 0);
    for (r, &pos) in order.iter().enumerate() {
        s.rank_of[pos] = r;
    }
    for u in 0..users {
        let best = (0..relays)
            .filter(|&j| s.relay_free[j])
            .min_by_key(|&j| s.rank_of[u * relays + j])
            .expect("relays >= users leaves a free relay");
        s.relay_free[best] = false;
        pairs.push((u, best));
    }
}

pub(crate) fn random_pairs<R: Rng + ?Sized>(
    users: usize,
    relays: usize,
    rng: &mut R,
    s: &mut Scratch,
    pairs: &mut Vec<(usize, usize)>,
) {
    pairs.clear();
    s.perm.clear();
    s.perm.extend(0..relays);
    for u in 0..users {
        let k = rng.random_range(u..relays);
        s.perm.swap(u, k);
        pairs.push((u, s.perm[u]));
    }
}

fn pairs_on_order<R: Rng + ?Sized>(
    scheme: Scheme,
    users: usize,
    relays: usize,
    order: &[usize],
    rng: &mut R,
    s: &mut Scratch,
    pairs: &mut Vec<(usize, usize)>,
) {
    match scheme {
        Scheme::MaxMin => maxmin_on_order(users, relays, order, s, pairs),
        Scheme::Naive => naive_on_order(users, relays, order, s, pairs),
        Scheme::Random => random_pairs(users, relays, rng, s, pairs),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PkMethod {
    ExactEnumeration,
    MonteCarlo,
}

/// `ℙ(γ_(u) = γ^(k))` for one user, `k = 1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankPlacementDistribution {
    /// `probs[k-1]` is the probability of landing on the `k`-th largest entry.
    pub probs: Vec<f64>,
    pub method: PkMethod,
    /// Number of sampled permutations; 0 for exact enumeration.
    pub trials: u64,
    /// Raw tallies, present for enumeration and sampling alike.
    pub counts: Vec<u64>,
    /// Denominator of `counts`.
    pub total: u64,
}

impl RankPlacementDistribution {
    fn from_counts(counts: Vec<u64>, total: u64, method: PkMethod, trials: u64) -> Self {
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        RankPlacementDistribution {
            probs,
            method,
            trials,
            counts,
            total,
        }
    }

    /// Average over users; appropriate for schemes symmetric in the user index.
    pub fn pooled(per_user: &[RankPlacementDistribution]) -> Result<Self> {
        let first = per_user
            .first()
            .ok_or_else(|| Error::Dimension("no distributions to pool".into()))?;
        let len = first.counts.len();
        if per_user.iter().any(|d| d.counts.len() != len) {
            return Err(Error::Dimension("distributions differ in length".into()));
        }
        let mut counts = vec![0u64; len];
        let mut total = 0u64;
        for d in per_user {
            for (c, x) in counts.iter_mut().zip(&d.counts) {
                *c += x;
            }
            total += d.total;
        }
        Ok(Self::from_counts(counts, total, first.method, first.trials))
    }

    /// Probability of the `k`-th largest entry (1-based); 0 outside the support.
    pub fn prob(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.probs.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Half-width of a normal-approximation confidence interval on each entry
    /// at `z` standard errors; zero for exact enumeration.
    pub fn half_width(&self, z: f64) -> Vec<f64> {
        match self.method {
            PkMethod::ExactEnumeration => vec![0.0; self.probs.len()],
            PkMethod::MonteCarlo => self
                .probs
                .iter()
                .map(|&p| z * (p * (1.0 - p) / self.total as f64).sqrt())
                .collect(),
        }
    }
}

/// Rank-placement probabilities of every user under `scheme`.
///
/// With i.i.d. continuous entries, the rank pattern of the SNR matrix is a
/// uniformly random permutation, so the schemes are run on rank matrices
/// directly. Exact mode visits all `(MN)!` permutations; Monte-Carlo mode
/// samples `trials` of them, each from its own stream of `seed`.
pub fn rank_placement_probs(
    users: usize,
    relays: usize,
    scheme: Scheme,
    method: PkMethod,
    trials: u64,
    seed: u64,
) -> Result<Vec<RankPlacementDistribution>> {
    if users == 0 || relays < users {
        return Err(Error::Dimension(format!(
            "need 1 <= M <= N, got M={users}, N={relays}"
        )));
    }
    let mn = users * relays;
    let support = scheme.rank_support(users, relays);
    match method {
        PkMethod::ExactEnumeration => {
            if mn > MAX_EXACT_ENTRIES {
                return Err(Error::EnumerationTooLarge {
                    entries: mn,
                    limit: MAX_EXACT_ENTRIES,
                });
            }
            let (counts, total) = if scheme == Scheme::Random {
                // The relay is picked independently of the uniformly random
                // rank pattern, so every rank is equally likely.
                let per = (1..mn as u64).product::<u64>();
                (vec![vec![per; mn]; users], per * mn as u64)
            } else {
                enumerate_counts(users, relays, scheme)
            };
            Ok(counts
                .into_iter()
                .map(|c| trim_support(c, support))
                .map(|c| RankPlacementDistribution::from_counts(c, total, method, 0))
                .collect())
        }
        PkMethod::MonteCarlo => {
            if trials == 0 {
                return Err(Error::InvalidTrials { trials, min: 1 });
            }
            let counts = sample_counts(users, relays, scheme, trials, seed);
            Ok(counts
                .into_iter()
                .map(|c| trim_support(c, support))
                .map(|c| RankPlacementDistribution::from_counts(c, trials, method, trials))
                .collect())
        }
    }
}

fn trim_support(mut counts: Vec<u64>, support: usize) -> Vec<u64> {
    debug_assert!(counts[support..].iter().all(|&c| c == 0), "rank outside scheme support");
    counts.truncate(support);
    counts
}

fn tally(
    users: usize,
    relays: usize,
    order: &[usize],
    pairs: &[(usize, usize)],
    rank_of: &mut [usize],
    counts: &mut [Vec<u64>],
) {
    for (r, &pos) in order.iter().enumerate() {
        rank_of[pos] = r;
    }
    debug_assert_eq!(pairs.len(), users);
    for &(u, j) in pairs {
        counts[u][rank_of[u * relays + j]] += 1;
    }
}

/// Tallies over all `(MN)!` orders; work is split by the position holding
/// rank 1 so each shard is an independent Heap's-algorithm sweep.
fn enumerate_counts(users: usize, relays: usize, scheme: Scheme) -> (Vec<Vec<u64>>, u64) {
    let mn = users * relays;
    let shards: Vec<Vec<Vec<u64>>> = (0..mn)
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![vec![0u64; mn]; users];
            let mut order: Vec<usize> = std::iter::once(first).chain((0..mn).filter(|&p| p != first)).collect();
            let mut s = Scratch::default();
            let mut pairs = Vec::with_capacity(users);
            let mut rank_of = vec![0usize; mn];
            // Random is handled in closed form; this rng is never consulted.
            let mut unused = stream_rng(0, 0);
            let mut visit = |order: &[usize]| {
                pairs_on_order(scheme, users, relays, order, &mut unused, &mut s, &mut pairs);
                tally(users, relays, order, &pairs, &mut rank_of, &mut counts);
            };
            heap_permutations(&mut order, 1, &mut visit);
            counts
        })
        .collect();
    let mut counts = vec![vec![0u64; mn]; users];
    for shard in shards {
        for (acc, c) in counts.iter_mut().zip(shard) {
            for (a, x) in acc.iter_mut().zip(c) {
                *a += x;
            }
        }
    }
    let total = (1..=mn as u64).product();
    (counts, total)
}

/// Visit every permutation of `items[fixed..]` (iterative Heap's algorithm).
fn heap_permutations(items: &mut [usize], fixed: usize, visit: &mut impl FnMut(&[usize])) {
    let n = items.len() - fixed;
    visit(items);
    if n < 2 {
        return;
    }
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(fixed, fixed + i);
            } else {
                items.swap(fixed + c[i], fixed + i);
            }
            visit(items);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

const PK_CHUNK: u64 = 8192;

fn sample_counts(users: usize, relays: usize, scheme: Scheme, trials: u64, seed: u64) -> Vec<Vec<u64>> {
    let mn = users * relays;
    let chunks = trials.div_ceil(PK_CHUNK);
    let shards: Vec<Vec<Vec<u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![vec![0u64; mn]; users];
            let mut s = Scratch::default();
            let mut pairs = Vec::with_capacity(users);
            let mut rank_of = vec![0usize; mn];
            let mut order: Vec<usize> = Vec::with_capacity(mn);
            let start = c * PK_CHUNK;
            let end = (start + PK_CHUNK).min(trials);
            for t in start..end {
                let mut rng = stream_rng(seed, t);
                order.clear();
                order.extend(0..mn);
                for i in (1..mn).rev() {
                    let k = rng.random_range(0..=i);
                    order.swap(i, k);
                }
                pairs_on_order(scheme, users, relays, &order, &mut rng, &mut s, &mut pairs);
                tally(users, relays, &order, &pairs, &mut rank_of, &mut counts);
            }
            counts
        })
        .collect();
    let mut counts = vec![vec![0u64; mn]; users];
    for shard in shards {
        for (acc, c) in counts.iter_mut().zip(shard) {
            for (a, x) in acc.iter_mut().zip(c) {
                *a += x;
            }
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snr(rows: &[Vec<f64>]) -> SnrMatrix {
        SnrMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn single_user_takes_best_relay() {
        let s = snr(&[vec![0.3, 2.5, 1.1]]);
        let a = maxmin_assign(&s).unwrap();
        assert_eq!(a.relay_of, vec![1]);
        assert_eq!(a.global_rank, vec![1]);
        assert_eq!(naive_assign(&s).unwrap(), a);
    }

    #[test]
    fn two_by_two_maxmin_and_naive() {
        let s = snr(&[vec![4.0, 3.0], vec![2.0, 1.0]]);
        let a = maxmin_assign(&s).unwrap();
        assert_eq!(a.relay_of, vec![1, 0]);
        assert_eq!(a.effective_snr, vec![3.0, 2.0]);
        assert_eq!(a.global_rank, vec![2, 3]);

        let n = naive_assign(&s).unwrap();
        assert_eq!(n.relay_of, vec![0, 1]);
        assert_eq!(n.effective_snr, vec![4.0, 1.0]);
        assert_eq!(n.global_rank, vec![1, 4]);
    }

    #[test]
    fn too_many_users_is_rejected() {
        let s = snr(&[vec![1.0], vec![2.0]]);
        assert!(matches!(maxmin_assign(&s), Err(Error::Dimension(_))));
        assert!(matches!(naive_assign(&s), Err(Error::Dimension(_))));
        let mut rng = stream_rng(1, 0);
        assert!(random_assign(&s, &mut rng).is_err());
    }

    #[test]
    fn ties_prefer_lower_indices() {
        let s = snr(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let a = maxmin_assign(&s).unwrap();
        let mut relays = a.relay_of.clone();
        relays.sort();
        assert_eq!(relays, vec![0, 1]);
        assert_eq!(maxmin_assign(&s).unwrap(), a);
        assert_eq!(naive_assign(&s).unwrap().relay_of, vec![0, 1]);
    }

    #[test]
    fn random_is_injective_and_seeded() {
        let s = snr(&[vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0], vec![9.0, 10.0, 11.0, 12.0]]);
        let a = random_assign(&s, &mut stream_rng(9, 3)).unwrap();
        let b = random_assign(&s, &mut stream_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        let mut r = a.relay_of.clone();
        r.sort();
        r.dedup();
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn single_user_pk_is_degenerate() {
        for n in 1..5 {
            let pk = rank_placement_probs(1, n, Scheme::MaxMin, PkMethod::ExactEnumeration, 0, 0).unwrap();
            assert_eq!(pk[0].probs, vec![1.0]);
        }
    }

    #[test]
    fn enumeration_limit() {
        let err = rank_placement_probs(3, 4, Scheme::MaxMin, PkMethod::ExactEnumeration, 0, 0).unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { entries: 12, .. }));
        let err = rank_placement_probs(2, 2, Scheme::MaxMin, PkMethod::MonteCarlo, 0, 0).unwrap_err();
        assert!(matches!(err, Error::InvalidTrials { .. }));
        assert!(rank_placement_probs(3, 2, Scheme::MaxMin, PkMethod::MonteCarlo, 10, 0).is_err());
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut items: Vec<usize> = (0..5).collect();
        let mut seen = std::collections::HashSet::new();
        heap_permutations(&mut items, 1, &mut |p: &[usize]| {
            assert_eq!(p[0], 0);
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn random_exact_is_uniform() {
        let pk = rank_placement_probs(2, 3, Scheme::Random, PkMethod::ExactEnumeration, 0, 0).unwrap();
        for d in &pk {
            assert_eq!(d.counts.iter().sum::<u64>(), d.total);
            assert!(d.probs.iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
        }
    }
}
