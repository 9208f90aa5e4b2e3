//! Outage with channel-estimation error: full diversity is lost and the
//! curve saturates.

use underlay_relay::analytic::{outage_floor_imperfect, outage_probability, outage_probability_imperfect};
use underlay_relay::model::{db_to_linear, CsiErrorModel, LinkBudget, NetworkTopology};
use underlay_relay::montecarlo::{estimate_outage, Scenario};
use underlay_relay::selection::{rank_placement_probs, PkMethod, Scheme};

fn main() -> underlay_relay::Result<()> {
    let topo = NetworkTopology::new(3, 4, 1)?;
    let th = db_to_linear(5.0);
    let err = CsiErrorModel::from_error_ratios(&topo, 0.05, 0.05, 0.05)?;
    let pk = rank_placement_probs(3, 4, Scheme::MaxMin, PkMethod::MonteCarlo, 500_000, 3)?;
    let floor = outage_floor_imperfect(th, &err, 3, 4, &pk[0])?;

    println!("{:>5} {:>12} {:>12} {:>12}", "dB", "perfect", "imperfect", "simulated");
    for db in (0..=50).step_by(10) {
        let b = LinkBudget::common(db_to_linear(db as f64), th)?;
        let sc = Scenario::new(topo.clone(), b, Scheme::MaxMin).with_csi(err)?;
        let sim = estimate_outage(&sc, th, 100_000, db as u64)?;
        println!(
            "{db:>5} {:>12.4e} {:>12.4e} {:>12.4e}",
            outage_probability(th, &topo, &b, &pk[0])?,
            outage_probability_imperfect(th, &topo, &b, &err, &pk[0])?,
            sim[0].mean,
        );
    }
    println!("floor {floor:.4e}");
    Ok(())
}
