//! With the source power and interference cap fixed, raising the relay's
//! own power limit drives outage to a floor.

use underlay_relay::analytic::{asymptotic_outage_case2, outage_probability};
use underlay_relay::model::{db_to_linear, LinkBudget, NetworkTopology};
use underlay_relay::selection::{rank_placement_probs, PkMethod, Scheme};

fn main() -> underlay_relay::Result<()> {
    let th = db_to_linear(5.0);
    let pk = rank_placement_probs(3, 3, Scheme::MaxMin, PkMethod::ExactEnumeration, 0, 0)?;
    for m in [1, 3] {
        let topo = NetworkTopology::new(3, 3, m)?;
        let floor = asymptotic_outage_case2(th, &topo, &LinkBudget::from_db(25.0, 0.0, 10.0, 5.0)?, &pk[0])?;
        println!("m = {m}, floor {floor:.6e}");
        for db in (0..=60).step_by(10) {
            let b = LinkBudget::from_db(25.0, db as f64, 10.0, 5.0)?;
            let p = outage_probability(th, &topo, &b, &pk[0])?;
            println!("  Λ2 = {db:>2} dB: {p:.6e} ({:+.2e} above floor)", p - floor);
        }
    }
    Ok(())
}
