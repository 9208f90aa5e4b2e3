//! Where in the global SNR ordering each scheme places a user's link.

use underlay_relay::analytic::worst_case_rank_prob;
use underlay_relay::selection::{rank_placement_probs, PkMethod, Scheme};

fn main() -> underlay_relay::Result<()> {
    let (m, n) = (2, 3);
    for scheme in [Scheme::MaxMin, Scheme::Naive, Scheme::Random] {
        let pk = rank_placement_probs(m, n, scheme, PkMethod::ExactEnumeration, 0, 0)?;
        println!("{} (M={m}, N={n}, all {} rank patterns)", scheme.name(), pk[0].total);
        for (u, d) in pk.iter().enumerate() {
            let row: Vec<String> = d.probs.iter().map(|p| format!("{p:.4}")).collect();
            println!("  user {}: {}", u + 1, row.join(" "));
        }
    }
    println!(
        "\nworst max-min rank (M-1)N+1 = {}: probability {}",
        (m - 1) * n + 1,
        worst_case_rank_prob(m, n)?
    );

    // Shapes too large to enumerate are sampled.
    let pk = rank_placement_probs(4, 4, Scheme::MaxMin, PkMethod::MonteCarlo, 200_000, 1)?;
    let hw = pk[0].half_width(3.0);
    println!("\nmax-min M=N=4, 200k sampled permutations, user 1:");
    for k in 1..=pk[0].len() {
        if pk[0].prob(k) > 0.0 {
            println!("  k={k:>2}: {:.5} ± {:.5}", pk[0].prob(k), hw[k - 1]);
        }
    }
    println!("  formula for k=13: {:.5}", worst_case_rank_prob(4, 4)?);
    Ok(())
}
