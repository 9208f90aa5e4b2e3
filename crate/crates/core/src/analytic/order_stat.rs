//! Order statistics of `MN` i.i.d. entries and rank-weighted mixtures.

use crate::error::{Error, Result};
use crate::selection::RankPlacementDistribution;
use crate::specfun::{ln_factorial, order_stat_coeff_unchecked};

/// Tolerance outside `[0, 1]` before a result is reported as cancelled.
pub const CANCELLATION_TOL: f64 = 1e-9;

/// Neumaier sum of `terms` taken in descending magnitude.
pub(crate) fn ordered_sum(terms: &mut [f64]) -> (f64, f64) {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut mass = 0.0f64;
    for &t in terms.iter() {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
        mass += t.abs();
    }
    (sum + comp, mass)
}

pub(crate) fn check_unit(context: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() || value < -CANCELLATION_TOL || value > 1.0 + CANCELLATION_TOL {
        return Err(Error::Cancellation {
            context,
            value,
        });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// CDF of the `k`-th largest of `users·relays` i.i.d. entries whose common CDF
/// at the point of interest is `cdf_point`:
///
/// `Σ_{i=0}^{k-1} (-1)^i c(MN, k, i) F^{MN-k+i+1}`.
pub fn cdf_kth_order(k: usize, users: usize, relays: usize, cdf_point: f64) -> Result<f64> {
    let mn = users * relays;
    if k == 0 || k > mn {
        return Err(Error::domain("cdf_kth_order", format!("need 1 <= k <= MN = {mn}, got k = {k}")));
    }
    if !(0.0..=1.0).contains(&cdf_point) {
        return Err(Error::domain("cdf_kth_order", format!("cdf_point {cdf_point} outside [0, 1]")));
    }
    kth_order_unchecked(k, mn, cdf_point)
}

/// Above this ratio of `Σ|terms|` to the result the alternating sum is
/// abandoned for the binomial form.
const MAX_AMPLIFICATION: f64 = 1e3;

pub(crate) fn kth_order_unchecked(k: usize, mn: usize, f: f64) -> Result<f64> {
    if f == 0.0 {
        return Ok(0.0);
    }
    if f == 1.0 {
        return Ok(1.0);
    }
    let mut terms: Vec<f64> = (0..k)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * order_stat_coeff_unchecked(mn, k, i) * f.powi((mn - k + i + 1) as i32)
        })
        .collect();
    let (value, mass) = ordered_sum(&mut terms);
    if mass > MAX_AMPLIFICATION * value.abs() {
        return check_unit("order-statistic CDF", binomial_form(k, mn, f));
    }
    check_unit("order-statistic CDF", value)
}

/// `ℙ[fewer than k of MN entries exceed x] = Σ_{j<k} C(MN, j) (1-F)^j F^{MN-j}`,
/// a sum of positive terms.
fn binomial_form(k: usize, mn: usize, f: f64) -> f64 {
    let ln_f = f.ln();
    let ln_g = (-f).ln_1p();
    let mut terms: Vec<f64> = (0..k)
        .map(|j| {
            (ln_factorial(mn) - ln_factorial(j) - ln_factorial(mn - j) + j as f64 * ln_g + (mn - j) as f64 * ln_f)
                .exp()
        })
        .collect();
    ordered_sum(&mut terms).0
}

pub(crate) fn check_pk(pk: &RankPlacementDistribution, mn: usize) -> Result<()> {
    if pk.is_empty() || pk.len() > mn {
        return Err(Error::Dimension(format!(
            "rank-placement vector has {} entries, expected 1..={mn}",
            pk.len()
        )));
    }
    Ok(())
}

/// `Σ_k pk[k] F_(k)(x)` where `F_(k)` is the CDF of the `k`-th largest of `MN`
/// entries with common CDF value `cdf_point`.
pub fn rank_mixture(pk: &RankPlacementDistribution, users: usize, relays: usize, cdf_point: f64) -> Result<f64> {
    let mn = users * relays;
    check_pk(pk, mn)?;
    if !(0.0..=1.0).contains(&cdf_point) {
        return Err(Error::domain("rank_mixture", format!("cdf_point {cdf_point} outside [0, 1]")));
    }
    let mut terms = Vec::with_capacity(pk.len());
    for (idx, &p) in pk.probs.iter().enumerate() {
        if p > 0.0 {
            terms.push(p * kth_order_unchecked(idx + 1, mn, cdf_point)?);
        }
    }
    let (value, _) = ordered_sum(&mut terms);
    check_unit("rank-weighted outage", value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes() {
        for &f in &[0.0, 0.1, 0.5, 0.93, 1.0] {
            let max = cdf_kth_order(1, 2, 3, f).unwrap();
            assert!((max - f64::powi(f, 6)).abs() < 1e-15);
            let min = cdf_kth_order(6, 2, 3, f).unwrap();
            assert!((min - (1.0 - f64::powi(1.0 - f, 6))).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_index() {
        assert!(cdf_kth_order(0, 2, 2, 0.5).is_err());
        assert!(cdf_kth_order(5, 2, 2, 0.5).is_err());
        assert!(cdf_kth_order(1, 2, 2, 1.5).is_err());
    }

    #[test]
    fn forms_agree_where_both_are_stable() {
        for k in 1..=6 {
            for &f in &[0.01, 0.3, 0.7] {
                let alt = kth_order_unchecked(k, 6, f).unwrap();
                assert!((alt - binomial_form(k, 6, f)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ordered_sum_recovers_small_difference() {
        let mut t = [1e16, 1.0, -1e16];
        assert_eq!(ordered_sum(&mut t).0, 1.0);
    }
}
