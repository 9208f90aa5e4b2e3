//! Outage of the three schemes against a common SNR, with the high-SNR
//! approximation for max-min.

use underlay_relay::analytic::{analyze_outage, outage_probability};
use underlay_relay::model::{db_to_linear, LinkBudget, NetworkTopology};
use underlay_relay::selection::{rank_placement_probs, PkMethod, Scheme};

fn main() -> underlay_relay::Result<()> {
    let topo = NetworkTopology::new(2, 3, 2)?;
    let th = db_to_linear(5.0);
    let pk = |s| rank_placement_probs(2, 3, s, PkMethod::ExactEnumeration, 0, 0);
    let (mm, nv, rr) = (pk(Scheme::MaxMin)?, pk(Scheme::Naive)?, pk(Scheme::Random)?);

    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "dB", "max-min", "asymptote", "naive u1", "naive u2", "random"
    );
    for db in (0..=40).step_by(5) {
        let b = LinkBudget::common(db_to_linear(db as f64), th)?;
        let r = analyze_outage(th, &topo, &b, &mm[0])?;
        println!(
            "{db:>5} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            r.exact,
            r.asymptotic_case1.unwrap_or(f64::NAN),
            outage_probability(th, &topo, &b, &nv[0])?,
            outage_probability(th, &topo, &b, &nv[1])?,
            outage_probability(th, &topo, &b, &rr[0])?,
        );
    }
    let r = analyze_outage(th, &topo, &LinkBudget::common(1e4, th)?, &mm[0])?;
    println!("\ndiversity order {}, array gain {:.4e}", r.diversity_order, r.array_gain);
    Ok(())
}
