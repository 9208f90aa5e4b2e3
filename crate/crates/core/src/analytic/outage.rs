//! Per-user outage under rank-based relay selection.

use serde::Serialize;

use super::cdf::{cdf_min_snr, cdf_min_snr_floor, cdf_min_snr_imperfect, cdf_min_snr_imperfect_floor, g_of_m};
use super::order_stat::rank_mixture;
use crate::error::{Error, Result};
use crate::model::{CsiErrorModel, LinkBudget, NetworkTopology};
use crate::selection::RankPlacementDistribution;
use crate::specfun::ln_factorial;

/// Exact outage together with its two high-SNR approximations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageResult {
    pub exact: f64,
    /// `𝒜 Λ^{-mN}`; only defined when `Λ1 = Λ2 = Λ3`.
    pub asymptotic_case1: Option<f64>,
    /// Limit as `Λ2 → ∞` with `Λ1`, `Λ3` fixed.
    pub asymptotic_case2: Option<f64>,
    pub diversity_order: u32,
    pub array_gain: f64,
}

/// Outage of one user: `Σ_k ℙ(γ^(k)) F_(k)(γ_th)` with `F = F_γij`.
pub fn outage_probability(
    gamma_th: f64,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    pk: &RankPlacementDistribution,
) -> Result<f64> {
    topology.validate()?;
    budget.validate()?;
    let f = cdf_min_snr(gamma_th, topology, budget)?;
    rank_mixture(pk, topology.users, topology.relays, f)
}

/// `ℙ(γ_(u) = γ^((M-1)N+1))`, the chance a max-min user is left with the
/// lowest reachable rank.
///
/// This is `(c/M) Π_{i=1}^{N-1} (N-i)/(MN-i)` with `c = 2` when `M = N >= 2`
/// and `c = 1` when `N > M`; for a single user it is 1.
pub fn worst_case_rank_prob(users: usize, relays: usize) -> Result<f64> {
    if users == 0 || relays < users {
        return Err(Error::Dimension(format!("need 1 <= M <= N, got M={users}, N={relays}")));
    }
    if users == 1 {
        return Ok(1.0);
    }
    let mn = users * relays;
    let c = if users == relays { 2.0 } else { 1.0 };
    let prod: f64 = (1..relays).map(|i| (relays - i) as f64 / (mn - i) as f64).product();
    Ok(c / users as f64 * prod)
}

/// Array gain `𝒜` of the max-min user when `Λ1 = Λ2 = Λ3 = Λ → ∞`, so that
/// `P_o ≈ 𝒜 Λ^{-mN}`:
///
/// `𝒜 = ℙ_worst · (MN)! / (N! ((M-1)N)!) · (G(m) γ_th^m)^N`.
pub fn array_gain(gamma_th: f64, topology: &NetworkTopology) -> Result<f64> {
    topology.validate()?;
    if !(gamma_th > 0.0) {
        return Err(Error::domain("array_gain", format!("threshold {gamma_th} must be > 0")));
    }
    let (m, n) = (topology.users, topology.relays);
    let worst = worst_case_rank_prob(m, n)?;
    let ln_binom = ln_factorial(m * n) - ln_factorial(n) - ln_factorial((m - 1) * n);
    let g = g_of_m(topology)?;
    let mf = topology.shape() as f64;
    Ok(worst * (ln_binom + n as f64 * (g.ln() + mf * gamma_th.ln())).exp())
}

/// Diversity order `mN` of every max-min user.
pub fn diversity_order(topology: &NetworkTopology) -> u32 {
    topology.shape() * topology.relays as u32
}

/// `𝒜 Λ^{-mN}`.
pub fn asymptotic_outage_case1(gamma_th: f64, lambda: f64, topology: &NetworkTopology) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain("asymptotic_outage_case1", format!("Λ = {lambda} must be > 0")));
    }
    let a = array_gain(gamma_th, topology)?;
    Ok(a * (-(diversity_order(topology) as f64) * lambda.ln()).exp())
}

/// Outage floor reached as `Λ2 → ∞`; `budget.lambda2` is ignored.
pub fn asymptotic_outage_case2(
    gamma_th: f64,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    pk: &RankPlacementDistribution,
) -> Result<f64> {
    topology.validate()?;
    budget.validate()?;
    let f = cdf_min_snr_floor(gamma_th, topology, budget)?;
    rank_mixture(pk, topology.users, topology.relays, f)
}

/// Exact outage plus both asymptotes. The first asymptote is reported only
/// when all three power ratios coincide.
pub fn analyze_outage(
    gamma_th: f64,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    pk: &RankPlacementDistribution,
) -> Result<OutageResult> {
    let exact = outage_probability(gamma_th, topology, budget, pk)?;
    let common = budget.lambda1 == budget.lambda2 && budget.lambda2 == budget.lambda3;
    let asymptotic_case1 = if common {
        Some(asymptotic_outage_case1(gamma_th, budget.lambda1, topology)?)
    } else {
        None
    };
    Ok(OutageResult {
        exact,
        asymptotic_case1,
        asymptotic_case2: Some(asymptotic_outage_case2(gamma_th, topology, budget, pk)?),
        diversity_order: diversity_order(topology),
        array_gain: array_gain(gamma_th, topology)?,
    })
}

/// Outage when selection runs on estimated Rayleigh channels.
pub fn outage_probability_imperfect(
    gamma_th: f64,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    errmodel: &CsiErrorModel,
    pk: &RankPlacementDistribution,
) -> Result<f64> {
    topology.validate()?;
    budget.validate()?;
    let f = cdf_min_snr_imperfect(gamma_th, topology, budget, errmodel)?;
    rank_mixture(pk, topology.users, topology.relays, f)
}

/// Outage floor under imperfect CSI as `Λ → ∞`, driven only by the
/// error-to-estimate variance ratios of the two hops.
pub fn outage_floor_imperfect(
    gamma_th: f64,
    errmodel: &CsiErrorModel,
    users: usize,
    relays: usize,
    pk: &RankPlacementDistribution,
) -> Result<f64> {
    let f = cdf_min_snr_imperfect_floor(gamma_th, errmodel)?;
    rank_mixture(pk, users, relays, f)
}
