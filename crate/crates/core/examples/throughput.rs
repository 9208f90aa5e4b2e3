//! Average per-user throughput over Rayleigh fading against the relay
//! power limit.

use underlay_relay::analytic::average_throughput;
use underlay_relay::model::{LinkBudget, NetworkTopology};
use underlay_relay::montecarlo::{estimate_throughput, Scenario};
use underlay_relay::selection::{rank_placement_probs, PkMethod, Scheme};

fn main() -> underlay_relay::Result<()> {
    let topo = NetworkTopology::new(3, 4, 1)?;
    let pk = rank_placement_probs(3, 4, Scheme::MaxMin, PkMethod::MonteCarlo, 500_000, 4)?;

    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "Λ2 dB", "closed", "max-min", "naive u1", "naive u3");
    for db in (0..=40).step_by(10) {
        let b = LinkBudget::from_db(25.0, db as f64, 10.0, 5.0)?;
        let tau = average_throughput(&topo, &b, &pk[0])?.average_bpcu;
        let mm = estimate_throughput(&Scenario::new(topo.clone(), b, Scheme::MaxMin), 100_000, 1)?;
        let nv = estimate_throughput(&Scenario::new(topo.clone(), b, Scheme::Naive), 100_000, 1)?;
        println!("{db:>5} {tau:>10.4} {:>10.4} {:>10.4} {:>10.4}", mm[0].mean, nv[0].mean, nv[2].mean);
    }
    Ok(())
}
