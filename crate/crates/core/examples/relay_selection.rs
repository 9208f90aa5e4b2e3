//! Max-min, naive and random relay assignment on one sampled channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use underlay_relay::model::{sample_realization, snr_matrix, LinkBudget, NetworkTopology};
use underlay_relay::selection::{maxmin_assign, naive_assign, random_assign, Assignment};

fn show(name: &str, a: &Assignment) {
    let relays: Vec<String> = a.relay_of.iter().map(|r| format!("R{}", r + 1)).collect();
    let worst = a.effective_snr.iter().copied().fold(f64::INFINITY, f64::min);
    println!("{name:>8}: relays {:?}, ranks {:?}, bottleneck {worst:.3}", relays, a.global_rank);
}

fn main() -> underlay_relay::Result<()> {
    let topo = NetworkTopology::new(3, 4, 2)?;
    let budget = LinkBudget::from_db(15.0, 15.0, 10.0, 5.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let real = sample_realization(&topo, &mut rng);
    let snr = snr_matrix(&real, &topo, &budget)?;

    println!("end-to-end SNR (rows: users, columns: relays)");
    for u in 0..snr.users() {
        let row: Vec<String> = (0..snr.relays()).map(|r| format!("{:8.3}", snr.get(u, r))).collect();
        println!("  S{}: {}", u + 1, row.join(" "));
    }
    println!();
    show("max-min", &maxmin_assign(&snr)?);
    show("naive", &naive_assign(&snr)?);
    show("random", &random_assign(&snr, &mut rng)?);
    Ok(())
}
