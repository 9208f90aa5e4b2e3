//! Closed-form outage and throughput.

mod cdf;
mod order_stat;
mod outage;
mod throughput;

pub use cdf::{
    cdf_min_snr, cdf_min_snr_floor, cdf_min_snr_imperfect, cdf_min_snr_imperfect_floor, g_of_m, rayleigh_constants,
    relay_cap_probability,
};
pub use order_stat::{cdf_kth_order, rank_mixture, CANCELLATION_TOL};
pub use outage::{
    analyze_outage, array_gain, asymptotic_outage_case1, asymptotic_outage_case2, diversity_order,
    outage_floor_imperfect, outage_probability, outage_probability_imperfect, worst_case_rank_prob, OutageResult,
};
pub use throughput::{average_throughput, h_integral, ThroughputResult};
