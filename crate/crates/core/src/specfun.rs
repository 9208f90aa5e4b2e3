//! Special functions for integer-shape gamma variates.
//!
//! Everything here works on integer shape `m`, so the incomplete gamma
//! functions reduce to finite Poisson sums. The exponential integral is only
//! ever needed in the scaled form `e^p Ei(-p)`, which stays bounded where
//! `e^p` alone would overflow.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_FACT_TABLE: usize = 1024;
const MAX_ITER: usize = 10_000;

/// Nakagami shape parameter, restricted to positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaShape(u32);

impl GammaShape {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("GammaShape::new", "shape m must be >= 1"));
        }
        Ok(GammaShape(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        t.push(0.0);
        // Exact products up to 170! then accumulate logs.
        let mut f = 1.0_f64;
        let mut acc = 0.0_f64;
        for n in 1..LN_FACT_TABLE {
            if n <= 170 {
                f *= n as f64;
                acc = f.ln();
            } else {
                acc += (n as f64).ln();
            }
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    let table = ln_fact_table();
    if n < table.len() {
        return table[n];
    }
    let mut acc = table[table.len() - 1];
    for k in table.len()..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// `n!` as a float; exact for `n <= 22`, `inf` past 170.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0_f64;
    for j in 0..k {
        c = c * (n - j) as f64 / (j + 1) as f64;
    }
    c.round_if_small()
}

trait RoundIfSmall {
    fn round_if_small(self) -> Self;
}

impl RoundIfSmall for f64 {
    // Products of small binomials are integers below 2^53; strip the
    // accumulated division noise.
    fn round_if_small(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

fn check_args(func: &'static str, m: u32, x: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain(func, "shape m must be >= 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(func, format!("argument x = {x} must be >= 0")));
    }
    Ok(())
}

/// Poisson head `e^{-x} Σ_{k<m} x^k/k!` (the regularized upper incomplete gamma).
fn poisson_head(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < 700.0 {
        let mut term = (-x).exp();
        let mut sum = term;
        for k in 1..m {
            term *= x / k as f64;
            sum += term;
        }
        sum
    } else {
        let lx = x.ln();
        (0..m)
            .map(|k| (-x + k as f64 * lx - ln_factorial(k as usize)).exp())
            .sum()
    }
}

/// Poisson tail `e^{-x} Σ_{k>=m} x^k/k!` (the regularized lower incomplete gamma).
/// Only used for `x < m + 1`, where the terms fall off geometrically.
fn poisson_tail(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = (-x + m as f64 * x.ln() - ln_factorial(m as usize)).exp();
    let mut sum = 0.0;
    let mut k = m as f64;
    for _ in 0..MAX_ITER {
        sum += term;
        k += 1.0;
        term *= x / k;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Regularized pair `(P(m,x), Q(m,x))` with `P + Q = 1`.
///
/// The smaller of the two is summed directly and the other is taken as its
/// complement, so both carry full relative accuracy in their tails.
pub fn gamma_pq(m: u32, x: f64) -> Result<(f64, f64)> {
    check_args("gamma_pq", m, x)?;
    Ok(gamma_pq_unchecked(m, x))
}

pub(crate) fn gamma_pq_unchecked(m: u32, x: f64) -> (f64, f64) {
    if x < m as f64 {
        let p = poisson_tail(m, x);
        (p, 1.0 - p)
    } else {
        let q = poisson_head(m, x);
        (1.0 - q, q)
    }
}

/// Regularized lower incomplete gamma `P(m, x) = γ(m, x)/Γ(m)`.
pub fn gamma_p(m: u32, x: f64) -> Result<f64> {
    gamma_pq(m, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma `Q(m, x) = Γ(m, x)/Γ(m)`.
pub fn gamma_q(m: u32, x: f64) -> Result<f64> {
    gamma_pq(m, x).map(|(_, q)| q)
}

/// Lower incomplete gamma `γ(m, x) = ∫₀ˣ t^{m-1} e^{-t} dt` for integer `m`.
pub fn lower_incomplete_gamma(m: u32, x: f64) -> Result<f64> {
    check_args("lower_incomplete_gamma", m, x)?;
    Ok(incomplete_pair(m, x).0)
}

/// Upper incomplete gamma `Γ(m, x) = ∫ₓ^∞ t^{m-1} e^{-t} dt` for integer `m`.
pub fn upper_incomplete_gamma(m: u32, x: f64) -> Result<f64> {
    check_args("upper_incomplete_gamma", m, x)?;
    Ok(incomplete_pair(m, x).1)
}

fn incomplete_pair(m: u32, x: f64) -> (f64, f64) {
    let full = factorial(m - 1);
    if x < m as f64 {
        let lower = full * poisson_tail(m, x);
        (lower, full - lower)
    } else {
        let upper = full * poisson_head(m, x);
        (full - upper, upper)
    }
}

/// `e^p · Ei(-p)` for `p > 0`.
///
/// Power series below `p = 1`, Lentz continued fraction above. The result is
/// strictly negative and tends to `-1/p` as `p` grows.
pub fn exp_scaled_ei(p: f64) -> Result<f64> {
    if !(p > 0.0) || p.is_infinite() {
        return Err(Error::domain(
            "exp_scaled_ei",
            format!("argument p = {p} must be finite and > 0"),
        ));
    }
    if p <= 1.0 {
        // Ei(-p) = γ + ln p + Σ (-p)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            term *= -p / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        Ok(p.exp() * (EULER_GAMMA + p.ln() + sum))
    } else {
        Ok(-exp_scaled_en_cf(1, p))
    }
}

/// `e^p · E_n(p) = ∫₀^∞ e^{-p t} (1+t)^{-n} dt` for `n >= 1`, `p > 0`.
///
/// For `p <= 1` this runs the upward recurrence
/// `I_{n+1} = (1 - p I_n)/n`, which is stable there since `p/n <= 1`.
pub fn exp_scaled_en(n: u32, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("exp_scaled_en", "order n must be >= 1"));
    }
    if !(p > 0.0) || p.is_infinite() {
        return Err(Error::domain(
            "exp_scaled_en",
            format!("argument p = {p} must be finite and > 0"),
        ));
    }
    if p > 1.0 {
        return Ok(exp_scaled_en_cf(n, p));
    }
    let mut value = -exp_scaled_ei(p)?;
    for k in 1..n {
        value = (1.0 - p * value) / k as f64;
    }
    Ok(value)
}

fn exp_scaled_en_cf(n: u32, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let n = n as f64;
    let mut b = x + n;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let a = -i * (n - 1.0 + i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Coefficient of `(-1)^i F^{MN-k+i+1}` in the CDF of the `k`-th largest of
/// `MN` i.i.d. variates:
///
/// `(MN)! C(k-1, i) / ((MN-k+i+1) (k-1)! (MN-k)!)`
///
/// Evaluated in log space; the sign is left to the caller.
pub fn order_stat_coeff(mn: usize, k: usize, i: usize) -> Result<f64> {
    if mn == 0 || k == 0 || k > mn || i >= k {
        return Err(Error::domain(
            "order_stat_coeff",
            format!("need 1 <= k <= MN and 0 <= i < k, got MN={mn}, k={k}, i={i}"),
        ));
    }
    Ok(order_stat_coeff_unchecked(mn, k, i))
}

pub(crate) fn order_stat_coeff_unchecked(mn: usize, k: usize, i: usize) -> f64 {
    let mu = mn - k + i + 1;
    // (MN)! / (i! (k-1-i)! (MN-k)!) is a multinomial count, hence an integer.
    let ln = ln_factorial(mn) - ln_factorial(i) - ln_factorial(k - 1 - i) - ln_factorial(mn - k);
    ln.exp().round_if_small() / mu as f64
}
