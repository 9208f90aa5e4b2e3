//! Reference implementations used only by the integration tests.
#![allow(dead_code)]

use underlay_relay::model::SnrMatrix;

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]` to relative
/// tolerance `rel`. Global strategy: the interval with the largest error
/// estimate is bisected until the summed estimate meets the tolerance or the
/// interval budget runs out.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let mut parts = vec![(a, b, gk15(&mut f, a, b))];
    for _ in 0..4000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel * total.abs() || err == 0.0 {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        parts.push((lo, mid, gk15(&mut f, lo, mid)));
        parts.push((mid, hi, gk15(&mut f, mid, hi)));
    }
    parts.iter().map(|p| p.2 .0).sum()
}

/// `∫_a^∞ f` via `x = a + t/(1-t)`, split into pieces so that the mapped
/// integrand stays well resolved.
pub fn integrate_to_inf(mut f: impl FnMut(f64) -> f64, a: f64, rel: f64) -> f64 {
    let mut g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let v = f(a + t / u) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let cuts = [0.0, 0.05, 0.2, 0.5, 0.8, 0.95, 0.99, 0.999, 1.0];
    cuts.windows(2).map(|w| integrate(&mut g, w[0], w[1], rel)).sum()
}

/// `ln Γ(x)` from statrs.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `γ(m, x)` by quadrature of `t^{m-1} e^{-t}`.
pub fn lower_gamma_quad(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let f = |t: f64| {
        if t == 0.0 {
            if m == 1 {
                1.0
            } else {
                0.0
            }
        } else {
            ((mf - 1.0) * t.ln() - t).exp()
        }
    };
    // Split at the mode to help the adaptive rule.
    let mode = (mf - 1.0).min(x);
    if mode > 0.0 && mode < x {
        integrate(f, 0.0, mode, 1e-15) + integrate(f, mode, x, 1e-15)
    } else {
        integrate(f, 0.0, x, 1e-15)
    }
}

/// `Γ(m, x)` by quadrature of `t^{m-1} e^{-t}` over `[x, ∞)`.
pub fn upper_gamma_quad(m: u32, x: f64) -> f64 {
    let mf = m as f64;
    integrate_to_inf(|t| if t == 0.0 && m > 1 { 0.0 } else { ((mf - 1.0) * t.ln() - t).exp() }, x, 1e-15)
}

/// `e^p Ei(-p) = -∫₀^∞ e^{-pt}/(1+t) dt`.
pub fn exp_scaled_ei_quad(p: f64) -> f64 {
    -integrate_to_inf(|t| (-p * t).exp() / (1.0 + t), 0.0, 1e-15)
}

/// `e^p Ei(-p)` from the convergent power series of `Ei`, summed with a
/// large number of terms in plain arithmetic; only sensible for small `p`.
pub fn exp_scaled_ei_series(p: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        term *= -p / k as f64;
        sum += term / k as f64;
    }
    p.exp() * (0.577_215_664_901_532_9 + p.ln() + sum)
}

/// Exact order-statistic coefficient as a reduced `u128` fraction.
pub fn order_stat_coeff_exact(mn: u32, k: u32, i: u32) -> f64 {
    fn fact(n: u32) -> u128 {
        (1..=n as u128).product()
    }
    fn binom(n: u32, k: u32) -> u128 {
        fact(n) / (fact(k) * fact(n - k))
    }
    let num = fact(mn) * binom(k - 1, i);
    let den = (mn - k + i + 1) as u128 * fact(k - 1) * fact(mn - k);
    let g = gcd(num, den);
    (num / g) as f64 / (den / g) as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Order-statistic coefficient from `ln Γ`.
pub fn order_stat_coeff_lgamma(mn: u32, k: u32, i: u32) -> f64 {
    let lf = |n: u32| ln_gamma(n as f64 + 1.0);
    (lf(mn) + lf(k - 1) - lf(i) - lf(k - 1 - i) - ((mn - k + i + 1) as f64).ln() - lf(k - 1) - lf(mn - k)).exp()
}

/// All injective user→relay maps with `users <= relays`.
pub fn injective_maps(users: usize, relays: usize) -> Vec<Vec<usize>> {
    fn rec(u: usize, users: usize, relays: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if u == users {
            out.push(cur.clone());
            return;
        }
        for j in 0..relays {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(u + 1, users, relays, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, users, relays, &mut vec![false; relays], &mut Vec::new(), &mut out);
    out
}

/// Largest achievable minimum SNR over all injective assignments.
pub fn brute_force_bottleneck(snr: &SnrMatrix) -> f64 {
    injective_maps(snr.users(), snr.relays())
        .iter()
        .map(|map| map.iter().enumerate().map(|(u, &j)| snr.get(u, j)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Regularized lower incomplete gamma from quadrature of the gamma density,
/// independent of the library.
pub fn gamma_cdf_quad(m: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    lower_gamma_quad(m, y) / ln_gamma(m as f64).exp()
}

/// Erlang CDF `1 - e^{-y} Σ_{k<m} y^k/k!`.
pub fn erlang_cdf(m: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y < m as f64 {
        // e^{-y} Σ_{k≥m} y^k/k!
        let mut term = (-y).exp();
        for k in 1..=m {
            term *= y / k as f64;
        }
        let mut sum = 0.0;
        let mut k = m;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            k += 1;
            term *= y / k as f64;
            if term == 0.0 {
                break;
            }
        }
        return sum;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= y / k as f64;
        sum += term;
    }
    1.0 - (-y).exp() * sum
}

/// `F_γij(x)` by conditioning on the path-loss-scaled interference gain
/// `g = |f|²/d3^β`:
///
/// `F(x) = ∫₀^∞ [1 - (1 - F_1(x)) (1 - F_2(x | Q(g)))] f_g(g) dg`
///
/// with Erlang hop CDFs and the outer integral done by quadrature.
pub struct ConditionalCdf {
    pub m: u32,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl ConditionalCdf {
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.m;
        let mf = m as f64;
        let lg = ln_gamma(mf);
        let hop1 = erlang_cdf(m, mf * x / (self.omega1 * self.lambda1));
        // g ~ Gamma(m, Ω3) density
        let dens = |g: f64| {
            if g <= 0.0 {
                return if m == 1 { 1.0 / self.omega3 } else { 0.0 };
            }
            let s = mf / self.omega3;
            (mf * s.ln() + (mf - 1.0) * g.ln() - s * g - lg).exp()
        };
        let q_of = |g: f64| {
            if g <= 0.0 {
                self.lambda2
            } else {
                self.lambda2.min(self.lambda3 / g)
            }
        };
        let integrand = |g: f64| {
            let hop2 = erlang_cdf(m, mf * x / (self.omega2 * q_of(g)));
            (hop1 + hop2 - hop1 * hop2) * dens(g)
        };
        let kink = self.lambda3 / self.lambda2;
        integrate(integrand, 0.0, kink, 1e-12) + integrate_to_inf(integrand, kink, 1e-12)
    }
}

/// SNR matrix with entries uniform on `[0, 10)`.
pub fn random_matrix(users: usize, relays: usize, rng: &mut impl rand::Rng) -> SnrMatrix {
    let rows: Vec<Vec<f64>> = (0..users)
        .map(|_| (0..relays).map(|_| rng.random::<f64>() * 10.0).collect())
        .collect();
    SnrMatrix::from_rows(&rows).unwrap()
}
