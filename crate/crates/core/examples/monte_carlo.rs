//! Seeded simulation: intervals, reproducibility and the empirical
//! distribution of one link.

use underlay_relay::analytic::cdf_min_snr;
use underlay_relay::model::{LinkBudget, NetworkTopology};
use underlay_relay::montecarlo::{estimate_cdf, estimate_outage, two_proportion_z, Scenario};
use underlay_relay::selection::Scheme;

fn main() -> underlay_relay::Result<()> {
    let topo = NetworkTopology::new(2, 3, 2)?;
    let budget = LinkBudget::from_db(10.0, 10.0, 10.0, 5.0)?;
    let sc = Scenario::new(topo.clone(), budget, Scheme::MaxMin);

    for trials in [1_000, 10_000, 100_000] {
        let e = estimate_outage(&sc, budget.gamma_th, trials, 42)?;
        println!(
            "{trials:>7} trials: user 1 {:.5} [{:.5}, {:.5}], user 2 {:.5}, z = {:.2}",
            e[0].mean,
            e[0].ci_low,
            e[0].ci_high,
            e[1].mean,
            two_proportion_z(&e[0], &e[1])
        );
    }
    let a = estimate_outage(&sc, budget.gamma_th, 50_000, 9)?;
    let b = estimate_outage(&sc, budget.gamma_th, 50_000, 9)?;
    println!("same seed, same result: {}", a == b);

    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let cdf = estimate_cdf(&topo, &budget, &grid, 200_000, 3)?;
    println!("\n{:>5} {:>10} {:>10}", "x", "empirical", "exact");
    for (x, e) in grid.iter().zip(&cdf) {
        println!("{x:>5} {:>10.5} {:>10.5}", e.mean, cdf_min_snr(*x, &topo, &budget)?);
    }
    Ok(())
}
