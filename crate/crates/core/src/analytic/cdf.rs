//! CDF of a single end-to-end SNR `γ_ij = min(γ_ij,1, γ_ij,2)`.

use crate::error::{Error, Result};
use crate::model::{CsiErrorModel, LinkBudget, NetworkTopology};
use crate::specfun::{factorial, gamma_pq_unchecked, gamma_q, ln_factorial, lower_incomplete_gamma, upper_incomplete_gamma};

const MAX_TERMS: usize = 100_000;

fn check_x(func: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(func, format!("argument x = {x} must be >= 0")));
    }
    Ok(())
}

/// `e^{-y} y^n / n!`
fn poisson_term(n: usize, y: f64) -> f64 {
    if y == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-y + n as f64 * y.ln() - ln_factorial(n)).exp()
}

/// Continuous part of `ℙ[γ_ij,2 <= x]`, i.e. the probability that the relay
/// power is set by the interference cap and the second hop fails.
///
/// With `r = Ω2Λ3 / (Ω3 x + Ω2Λ3)` and `s = mΛ3/(Ω3Λ2)` this equals
///
/// `Q(m, s) - Σ_{j<m} NB_j Q(m+j, s/r)`, where `NB_j = C(m+j-1, j) r^m (1-r)^j`,
///
/// which is the closed-form `g(x)/Γ(m)` term. Because the negative-binomial
/// weights sum to one, the same quantity is `Σ_{j>=m} NB_j Q(m+j, s/r)`, a sum
/// of positive terms; that form is used when `1 - r <= 1/2`, where the finite
/// form cancels.
pub(crate) fn capped_hop2_mass(m: u32, r: f64, s: f64) -> f64 {
    let one_minus_r = 1.0 - r;
    if one_minus_r <= 0.0 {
        return 0.0;
    }
    let y = s / r;
    let m_us = m as usize;
    if one_minus_r <= 0.5 {
        // NB_m = C(2m-1, m) r^m (1-r)^m
        let mut nb = (ln_factorial(2 * m_us - 1) - ln_factorial(m_us) - ln_factorial(m_us - 1)
            + m as f64 * (r.ln() + one_minus_r.ln()))
        .exp();
        let mut q = gamma_pq_unchecked(2 * m, y).1;
        let mut sum = 0.0;
        let mut j = m_us;
        for _ in 0..MAX_TERMS {
            let add = nb * q;
            sum += add;
            if nb < 1e-18 * sum.max(1e-300) && j > 2 * m_us {
                break;
            }
            // Q(n+1, y) = Q(n, y) + e^{-y} y^n / n!
            q += poisson_term(m_us + j, y);
            q = q.min(1.0);
            nb *= one_minus_r * (m_us + j) as f64 / (j + 1) as f64;
            j += 1;
            if nb == 0.0 {
                break;
            }
        }
        sum
    } else {
        let mut nb = r.powi(m as i32);
        let mut q = gamma_pq_unchecked(m, y).1;
        let mut head = 0.0;
        for j in 0..m_us {
            head += nb * q;
            q += poisson_term(m_us + j, y);
            nb *= one_minus_r * (m_us + j) as f64 / (j + 1) as f64;
        }
        (gamma_pq_unchecked(m, s).1 - head).max(0.0)
    }
}

/// CDF of `γ_ij` under Nakagami-`m` fading with the interference-limited
/// relay power:
///
/// `F(x) = P1 + Q1·[P(m, s)·P(m, mx/(Ω2Λ2)) + g(x)/Γ(m)]`
///
/// where `P1 = γ(m, mx/(Ω1Λ1))/Γ(m)`, `Q1 = 1 - P1` and `s = mΛ3/(Ω3Λ2)`.
/// `P(m, s)` is the probability that the relay transmits at its cap.
pub fn cdf_min_snr(x: f64, topology: &NetworkTopology, budget: &LinkBudget) -> Result<f64> {
    check_x("cdf_min_snr", x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    let m = topology.shape();
    let mf = m as f64;
    let (o1, o2, o3) = topology.scaled_gains();
    let (p1, q1) = gamma_pq_unchecked(m, mf * x / (o1 * budget.lambda1));
    let s = mf * budget.lambda3 / (o3 * budget.lambda2);
    let at_cap = gamma_pq_unchecked(m, s).0;
    let hop2_at_cap = gamma_pq_unchecked(m, mf * x / (o2 * budget.lambda2)).0;
    let r = o2 * budget.lambda3 / (o3 * x + o2 * budget.lambda3);
    let hop2 = at_cap * hop2_at_cap + capped_hop2_mass(m, r, s);
    Ok((p1 + q1 * hop2).min(1.0))
}

/// Limit of [`cdf_min_snr`] as `Λ2 → ∞` with `Λ1`, `Λ3` fixed:
///
/// `F(x) = 1 - Q1 Σ_{k<m} C(m+k-1, k) r^m (1-r)^k`.
///
/// `budget.lambda2` is ignored.
pub fn cdf_min_snr_floor(x: f64, topology: &NetworkTopology, budget: &LinkBudget) -> Result<f64> {
    check_x("cdf_min_snr_floor", x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    let m = topology.shape();
    let (o1, o2, o3) = topology.scaled_gains();
    let (p1, q1) = gamma_pq_unchecked(m, m as f64 * x / (o1 * budget.lambda1));
    let r = o2 * budget.lambda3 / (o3 * x + o2 * budget.lambda3);
    Ok((p1 + q1 * capped_hop2_mass(m, r, 0.0)).min(1.0))
}

/// The constant `G(m)` with `F(x) ≈ G(m) (x/Λ)^m` when `Λ1 = Λ2 = Λ3 = Λ → ∞`:
///
/// `G(m) = m^{m-1}/(Γ(m) Ω1^m) + (m^m γ(m, m/Ω3) + Ω3^m Γ(2m, m/Ω3)) / (m Γ(m)² Ω2^m)`.
pub fn g_of_m(topology: &NetworkTopology) -> Result<f64> {
    let m = topology.shape();
    let mf = m as f64;
    let mi = m as i32;
    let (o1, o2, o3) = topology.scaled_gains();
    let gm = factorial(m - 1);
    let first = mf.powi(mi - 1) / (gm * o1.powi(mi));
    let lower = lower_incomplete_gamma(m, mf / o3)?;
    let upper2m = upper_incomplete_gamma(2 * m, mf / o3)?;
    let second = (mf.powi(mi) * lower + o3.powi(mi) * upper2m) / (mf * gm * gm * o2.powi(mi));
    Ok(first + second)
}

fn require_rayleigh(func: &'static str, topology: &NetworkTopology) -> Result<()> {
    if topology.shape() != 1 {
        return Err(Error::domain(func, format!("requires Rayleigh fading (m = 1), got m = {}", topology.shape())));
    }
    Ok(())
}

/// CDF of `γ_ij` under Rayleigh fading when selection and power control use
/// estimated channels:
///
/// `F(x) = 1 - exp(-x [(Ω_e1 + d1^β/Λ1)/Ω_ĥ1 + (Ω_e2 + d2^β/Λ2)/Ω_ĥ2]) ·
///         (1 - e^{-d3^β Λ3/(Ω_f̂ Λ2)} / (1 + d3^β Ω_ĥ2 Λ3/(d2^β Ω_f̂ x)))`.
pub fn cdf_min_snr_imperfect(
    x: f64,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    errmodel: &CsiErrorModel,
) -> Result<f64> {
    check_x("cdf_min_snr_imperfect", x)?;
    require_rayleigh("cdf_min_snr_imperfect", topology)?;
    errmodel.validate(topology)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let pl1 = topology.path_loss(topology.d1);
    let pl2 = topology.path_loss(topology.d2);
    let pl3 = topology.path_loss(topology.d3);
    let rate = (errmodel.omega_e1 + pl1 / budget.lambda1) / errmodel.omega_hat_h1
        + (errmodel.omega_e2 + pl2 / budget.lambda2) / errmodel.omega_hat_h2;
    let tau = pl3 * budget.lambda3 / (errmodel.omega_hat_f * budget.lambda2);
    let kappa = pl3 * errmodel.omega_hat_h2 * budget.lambda3 / (pl2 * errmodel.omega_hat_f);
    let w = (-tau).exp() / (1.0 + kappa / x);
    // 1 - e^{-a}(1 - w) = (1 - e^{-a}) + e^{-a} w
    let decay = (-x * rate).exp();
    Ok((-(-x * rate).exp_m1() + decay * w).min(1.0))
}

/// Limit of [`cdf_min_snr_imperfect`] as `Λ1 = Λ2 = Λ3 → ∞`:
/// `1 - exp(-x (Ω_e1/Ω_ĥ1 + Ω_e2/Ω_ĥ2))`.
pub fn cdf_min_snr_imperfect_floor(x: f64, errmodel: &CsiErrorModel) -> Result<f64> {
    check_x("cdf_min_snr_imperfect_floor", x)?;
    let rate = errmodel.omega_e1 / errmodel.omega_hat_h1 + errmodel.omega_e2 / errmodel.omega_hat_h2;
    Ok(-(-x * rate).exp_m1())
}

/// Rayleigh special case written as `1 - e^{-ax}(b + c/(x+d))`, returned as
/// the constants `(a, b, c, d)`.
pub fn rayleigh_constants(topology: &NetworkTopology, budget: &LinkBudget) -> Result<(f64, f64, f64, f64)> {
    require_rayleigh("rayleigh_constants", topology)?;
    let (o1, o2, o3) = topology.scaled_gains();
    let a = 1.0 / (o1 * budget.lambda1) + 1.0 / (o2 * budget.lambda2);
    let b = -(-budget.lambda3 / (o3 * budget.lambda2)).exp_m1();
    let d = o2 * budget.lambda3 / o3;
    let c = d * (1.0 - b);
    Ok((a, b, c, d))
}

/// `Γ(m, s)/Γ(m)` exposed for callers that want the cap probability split.
pub fn relay_cap_probability(topology: &NetworkTopology, budget: &LinkBudget) -> Result<f64> {
    let (_, _, o3) = topology.scaled_gains();
    let m = topology.shape();
    gamma_q(m, m as f64 * budget.lambda3 / (o3 * budget.lambda2)).map(|q| 1.0 - q)
}
