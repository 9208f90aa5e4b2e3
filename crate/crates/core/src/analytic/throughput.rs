//! Average throughput under Rayleigh fading.

use serde::Serialize;

use super::cdf::rayleigh_constants;
use super::order_stat::{check_pk, ordered_sum, CANCELLATION_TOL};
use crate::error::{Error, Result};
use crate::model::{LinkBudget, NetworkTopology};
use crate::selection::RankPlacementDistribution;
use crate::specfun::{binomial, exp_scaled_en, ln_factorial};

const MAX_SERIES: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThroughputResult {
    /// Bits per channel use, including the half-duplex and `1/M` sharing factor.
    pub average_bpcu: f64,
}

/// `I_n(A) = e^A E_n(A)` for `n = start, start+1, ...`.
///
/// Upward recurrence `I_{n+1} = (1 - A I_n)/n` wherever it is stable
/// (`A <= n`), continued fraction otherwise.
struct ScaledEn {
    a: f64,
    n: u32,
    value: f64,
}

impl ScaledEn {
    fn new(start: u32, a: f64) -> Result<Self> {
        Ok(ScaledEn {
            a,
            n: start,
            value: exp_scaled_en(start, a)?,
        })
    }

    fn advance(&mut self) -> Result<()> {
        if self.a <= self.n as f64 {
            self.value = (1.0 - self.a * self.value) / self.n as f64;
            self.n += 1;
        } else {
            self.n += 1;
            self.value = exp_scaled_en(self.n, self.a)?;
        }
        Ok(())
    }
}

/// `h(j) = ∫₀^∞ e^{-at·x} / ((x+1)(x+d)^j) dx`.
///
/// * `d = 1`: `h(j) = e^{at} E_{j+1}(at)`.
/// * `d ≠ 1`: partial fractions give
///   `h(j) = (d-1)^{-j} [h(0) - Σ_{r=1}^{j} (d-1)^{r-1} d^{1-r} e^{d·at} E_r(d·at)]`,
///   with `h(0) = -e^{at} Ei(-at)`.
/// * near `d = 1` the partial fractions cancel, so the expansion
///   `h(j) = Σ_n (-1)^n C(j+n-1, n) (d-1)^n e^{at} E_{j+1+n}(at)` is used
///   for `-1/2 < d-1 < 2/5`.
pub fn h_integral(j: u32, at: f64, d: f64) -> Result<f64> {
    if !(at > 0.0) || !at.is_finite() {
        return Err(Error::domain("h_integral", format!("at = {at} must be finite and > 0")));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain("h_integral", format!("d = {d} must be finite and > 0")));
    }
    let delta = d - 1.0;
    if j == 0 || delta == 0.0 {
        return exp_scaled_en(j + 1, at);
    }
    if delta > -0.5 && delta < 0.4 {
        return h_near_unit(j, at, delta);
    }
    let h0 = exp_scaled_en(1, at)?;
    let da = d * at;
    let mut terms = Vec::with_capacity(j as usize + 1);
    terms.push(h0);
    let mut scale = 1.0;
    for r in 1..=j {
        let jr = d.powi(1 - r as i32) * exp_scaled_en(r, da)?;
        terms.push(-scale * jr);
        scale *= delta;
    }
    let (num, _) = ordered_sum(&mut terms);
    Ok(num / delta.powi(j as i32))
}

fn h_near_unit(j: u32, at: f64, delta: f64) -> Result<f64> {
    let mut en = ScaledEn::new(j + 1, at)?;
    let mut coef = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for n in 0..MAX_SERIES {
        let term = coef * en.value;
        let s = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - s) + term } else { (term - s) + sum };
        sum = s;
        if term.abs() < 1e-18 * sum.abs() && n > j as usize {
            break;
        }
        coef *= -delta * (j as usize + n) as f64 / (n + 1) as f64;
        en.advance()?;
    }
    Ok(sum + comp)
}

/// Average throughput of one user with Rayleigh fading:
///
/// `τ = 1/(2M ln 2) Σ_k ℙ(γ^(k)) Σ_{i=0}^{MN-k} (-1)^i (MN)! C(MN-k, i) / (t (k-1)! (MN-k)!) · q(t)`
///
/// where `t = k + i` and `q(t) = Σ_{j=0}^{t} C(t, j) b^{t-j} c^j h(j; a·t, d)`
/// is `∫ (1-F(x))^t/(1+x) dx` for `1 - F(x) = e^{-ax}(b + c/(x+d))`.
pub fn average_throughput(
    topology: &NetworkTopology,
    budget: &LinkBudget,
    pk: &RankPlacementDistribution,
) -> Result<ThroughputResult> {
    topology.validate()?;
    budget.validate()?;
    let (a, b, c, d) = rayleigh_constants(topology, budget)?;
    let mn = topology.entries();
    check_pk(pk, mn)?;

    let mut q = vec![0.0; mn + 1];
    for (t, qt) in q.iter_mut().enumerate().skip(1) {
        let at = a * t as f64;
        let mut terms = Vec::with_capacity(t + 1);
        for j in 0..=t {
            let w = binomial(t, j) * b.powi((t - j) as i32) * c.powi(j as i32);
            if w != 0.0 {
                terms.push(w * h_integral(j as u32, at, d)?);
            }
        }
        *qt = ordered_sum(&mut terms).0;
    }

    let ln_mn = ln_factorial(mn);
    let mut outer = Vec::with_capacity(pk.len());
    for (idx, &p) in pk.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let k = idx + 1;
        let mut terms = Vec::with_capacity(mn - k + 1);
        for i in 0..=(mn - k) {
            let t = k + i;
            let ln_coef = ln_mn + ln_factorial(mn - k) - ln_factorial(i) - ln_factorial(mn - k - i)
                - (t as f64).ln()
                - ln_factorial(k - 1)
                - ln_factorial(mn - k);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * ln_coef.exp() * q[t]);
        }
        // ∫ (1 - F_(k)(x))/(1+x) dx, which is nonnegative.
        let (v, _) = ordered_sum(&mut terms);
        if !(v >= -CANCELLATION_TOL) {
            return Err(Error::Cancellation {
                context: "throughput order-statistic sum",
                value: v,
            });
        }
        outer.push(p * v.max(0.0));
    }
    let total = ordered_sum(&mut outer).0;
    let users = topology.users as f64;
    Ok(ThroughputResult {
        average_bpcu: total / (2.0 * users * std::f64::consts::LN_2),
    })
}
