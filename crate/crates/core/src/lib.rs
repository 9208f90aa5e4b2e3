//! Dual-hop decode-and-forward relaying for underlay cognitive radio with
//! max-min fair relay selection.
//!
//! The crate has four layers:
//!
//! * [`specfun`]: incomplete gamma, scaled exponential integrals and
//!   order-statistic coefficients for integer shapes.
//! * [`model`]: network configuration, Nakagami-`m` channel sampling and the
//!   end-to-end SNR matrix under an interference cap.
//! * [`selection`]: max-min, naive and random relay selection plus the
//!   rank-placement probabilities they induce.
//! * [`analytic`] and [`montecarlo`]: closed-form outage and throughput, and
//!   a seeded simulator that checks them.
//!
//! [`experiment`] ties these together into JSON-configured sweeps that emit
//! CSV.

pub mod analytic;
pub mod error;
pub mod experiment;
pub mod model;
pub mod montecarlo;
pub mod selection;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ChannelRealization, CsiErrorModel, LinkBudget, NetworkTopology, SnrMatrix};
pub use montecarlo::{McEstimate, Scenario};
pub use selection::{Assignment, PkMethod, RankPlacementDistribution, Scheme};
