//! Incomplete gamma functions, the exponentially scaled exponential
//! integral and order-statistic coefficients.

use underlay_relay::specfun::{exp_scaled_ei, exp_scaled_en, gamma_pq, order_stat_coeff};

fn main() -> underlay_relay::Result<()> {
    println!("{:>4} {:>8} {:>22} {:>22}", "m", "x", "P(m,x)", "Q(m,x)");
    for m in [1, 2, 4] {
        for x in [1e-3, 0.5, 3.0, 20.0] {
            let (p, q) = gamma_pq(m, x)?;
            println!("{m:>4} {x:>8} {p:>22.15e} {q:>22.15e}");
        }
    }

    println!("\n{:>8} {:>22} {:>22}", "p", "e^p Ei(-p)", "e^p E_3(p)");
    for p in [1e-3, 0.1, 1.0, 10.0, 1e3] {
        println!("{p:>8} {:>22.15e} {:>22.15e}", exp_scaled_ei(p)?, exp_scaled_en(3, p)?);
    }

    // F_(k)(x) = sum_i c(MN,k,i) (-1)^i F^{MN-k+i+1}; for MN = 6, k = 3.
    println!("\ncoefficients for MN = 6, k = 3:");
    for i in 0..3 {
        println!("  i = {i}: {}", order_stat_coeff(6, 3, i)?);
    }
    Ok(())
}
