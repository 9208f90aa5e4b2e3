//! Network configuration, channel sampling and end-to-end SNR construction.
//!
//! All powers are carried as ratios to the noise power `N0`, so the source
//! power, relay power cap and interference cap appear only as `Λ1`, `Λ2`,
//! `Λ3`.

use std::ops::{Index, IndexMut};

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::specfun::GammaShape;

/// Convert decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Dense row-major matrix; rows are users, columns are relays.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::Dimension("matrix must be non-empty".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Geometry and fading statistics of the secondary network.
///
/// Nodes within a hop are co-located, so one distance per hop applies to
/// every user/relay pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    /// Number of secondary source/destination pairs `M`.
    pub users: usize,
    /// Number of relays `N`; must be at least `users`.
    pub relays: usize,
    pub m: GammaShape,
    /// Mean squared gain of source → relay channels.
    pub omega_h1: f64,
    /// Mean squared gain of relay → destination channels.
    pub omega_h2: f64,
    /// Mean squared gain of relay → primary receiver channels.
    pub omega_f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub path_loss_exponent: f64,
}

impl NetworkTopology {
    /// Unit mean gains, unit distances and no path loss.
    pub fn new(users: usize, relays: usize, m: u32) -> Result<Self> {
        let t = NetworkTopology {
            users,
            relays,
            m: GammaShape::new(m)?,
            omega_h1: 1.0,
            omega_h2: 1.0,
            omega_f: 1.0,
            d1: 1.0,
            d2: 1.0,
            d3: 1.0,
            path_loss_exponent: 0.0,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_gains(mut self, omega_h1: f64, omega_h2: f64, omega_f: f64) -> Result<Self> {
        self.omega_h1 = omega_h1;
        self.omega_h2 = omega_h2;
        self.omega_f = omega_f;
        self.validate()?;
        Ok(self)
    }

    pub fn with_distances(mut self, d1: f64, d2: f64, d3: f64, beta: f64) -> Result<Self> {
        self.d1 = d1;
        self.d2 = d2;
        self.d3 = d3;
        self.path_loss_exponent = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::config("users", "M must be >= 1"));
        }
        if self.relays < self.users {
            return Err(Error::config("relays", "N must be ≥ M"));
        }
        for (field, v) in [
            ("omega_h1", self.omega_h1),
            ("omega_h2", self.omega_h2),
            ("omega_f", self.omega_f),
            ("d1", self.d1),
            ("d2", self.d2),
            ("d3", self.d3),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.path_loss_exponent >= 0.0 && self.path_loss_exponent.is_finite()) {
            return Err(Error::config(
                "path_loss_exponent",
                format!("must be finite and >= 0, got {}", self.path_loss_exponent),
            ));
        }
        Ok(())
    }

    pub fn shape(&self) -> u32 {
        self.m.get()
    }

    /// `M·N`, the number of entries in the SNR matrix.
    pub fn entries(&self) -> usize {
        self.users * self.relays
    }

    pub fn path_loss(&self, d: f64) -> f64 {
        d.powf(self.path_loss_exponent)
    }

    /// Path-loss scaled mean gains `(Ω1, Ω2, Ω3) = (Ω_h1/d1^β, Ω_h2/d2^β, Ω_f/d3^β)`.
    pub fn scaled_gains(&self) -> (f64, f64, f64) {
        (
            self.omega_h1 / self.path_loss(self.d1),
            self.omega_h2 / self.path_loss(self.d2),
            self.omega_f / self.path_loss(self.d3),
        )
    }
}

/// Normalized power ratios and the outage threshold, all linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Source power over noise, `P/N0`.
    pub lambda1: f64,
    /// Relay power cap over noise, `Q_max/N0`.
    pub lambda2: f64,
    /// Interference cap at the primary receiver over noise, `I_max/N0`.
    pub lambda3: f64,
    pub gamma_th: f64,
}

impl LinkBudget {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64, gamma_th: f64) -> Result<Self> {
        let b = LinkBudget {
            lambda1,
            lambda2,
            lambda3,
            gamma_th,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn from_db(lambda1_db: f64, lambda2_db: f64, lambda3_db: f64, gamma_th_db: f64) -> Result<Self> {
        Self::new(
            db_to_linear(lambda1_db),
            db_to_linear(lambda2_db),
            db_to_linear(lambda3_db),
            db_to_linear(gamma_th_db),
        )
    }

    /// `Λ1 = Λ2 = Λ3 = Λ`.
    pub fn common(lambda: f64, gamma_th: f64) -> Result<Self> {
        Self::new(lambda, lambda, lambda, gamma_th)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("gamma_th", self.gamma_th),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Squared channel gains for one coherence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `|h_ij,1|²`
    pub h1: Matrix,
    /// `|h_ij,2|²`
    pub h2: Matrix,
    /// `|f_ij|²`, relay to primary receiver.
    pub f: Matrix,
}

impl ChannelRealization {
    pub fn zeros(users: usize, relays: usize) -> Self {
        ChannelRealization {
            h1: Matrix::zeros(users, relays),
            h2: Matrix::zeros(users, relays),
            f: Matrix::zeros(users, relays),
        }
    }
}

/// Channel estimation statistics for the Rayleigh imperfect-CSI model.
///
/// Each true channel is an estimate plus an independent error, so
/// `Ω_h = Ω_ĥ + Ω_e` per hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiErrorModel {
    pub omega_hat_h1: f64,
    pub omega_hat_h2: f64,
    pub omega_hat_f: f64,
    pub omega_e1: f64,
    pub omega_e2: f64,
    pub omega_e3: f64,
}

impl CsiErrorModel {
    /// Split each hop's mean gain by the error fraction `Ω_e/Ω`.
    pub fn from_error_ratios(topology: &NetworkTopology, r1: f64, r2: f64, r3: f64) -> Result<Self> {
        for (field, r) in [("csi.e1", r1), ("csi.e2", r2), ("csi.e3", r3)] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::config(field, format!("error ratio must lie in [0, 1), got {r}")));
            }
        }
        let model = CsiErrorModel {
            omega_hat_h1: topology.omega_h1 * (1.0 - r1),
            omega_hat_h2: topology.omega_h2 * (1.0 - r2),
            omega_hat_f: topology.omega_f * (1.0 - r3),
            omega_e1: topology.omega_h1 * r1,
            omega_e2: topology.omega_h2 * r2,
            omega_e3: topology.omega_f * r3,
        };
        model.validate(topology)?;
        Ok(model)
    }

    pub fn validate(&self, topology: &NetworkTopology) -> Result<()> {
        if topology.shape() != 1 {
            return Err(Error::config("m", "imperfect CSI is modelled for Rayleigh fading only (m = 1)"));
        }
        for (field, v) in [
            ("omega_hat_h1", self.omega_hat_h1),
            ("omega_hat_h2", self.omega_hat_h2),
            ("omega_hat_f", self.omega_hat_f),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and > 0, got {v}")));
            }
        }
        for (field, v) in [
            ("omega_e1", self.omega_e1),
            ("omega_e2", self.omega_e2),
            ("omega_e3", self.omega_e3),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        let tol = 1e-12;
        for (field, total, hat, err) in [
            ("omega_e1", topology.omega_h1, self.omega_hat_h1, self.omega_e1),
            ("omega_e2", topology.omega_h2, self.omega_hat_h2, self.omega_e2),
            ("omega_e3", topology.omega_f, self.omega_hat_f, self.omega_e3),
        ] {
            if ((hat + err) - total).abs() > tol * total {
                return Err(Error::config(
                    field,
                    format!("estimate variance {hat} plus error variance {err} must equal {total}"),
                ));
            }
        }
        Ok(())
    }
}

/// End-to-end SNRs `γ_ij` of every user/relay pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrMatrix(pub Matrix);

impl SnrMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.as_slice().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Dimension("SNR entries must be finite and >= 0".into()));
        }
        Ok(SnrMatrix(m))
    }

    pub fn users(&self) -> usize {
        self.0.rows()
    }

    pub fn relays(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, user: usize, relay: usize) -> f64 {
        self.0[(user, relay)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// One `G(m, Ω)` variate as the mean of `m` unit exponentials scaled by `Ω`.
#[inline]
pub fn sample_gamma<R: Rng + ?Sized>(m: u32, omega: f64, rng: &mut R) -> f64 {
    let mut s = 0.0;
    for _ in 0..m {
        let e: f64 = rng.sample(Exp1);
        s += e;
    }
    s * omega / m as f64
}

fn fill_gamma<R: Rng + ?Sized>(out: &mut Matrix, m: u32, omega: f64, rng: &mut R) {
    for v in out.as_mut_slice() {
        *v = sample_gamma(m, omega, rng);
    }
}

/// Draw `3·M·N` independent squared gains: all of `H1`, then `H2`, then `F`,
/// each in row-major order.
pub fn sample_realization<R: Rng + ?Sized>(topology: &NetworkTopology, rng: &mut R) -> ChannelRealization {
    let mut real = ChannelRealization::zeros(topology.users, topology.relays);
    sample_realization_into(topology, rng, &mut real);
    real
}

pub fn sample_realization_into<R: Rng + ?Sized>(
    topology: &NetworkTopology,
    rng: &mut R,
    out: &mut ChannelRealization,
) {
    let m = topology.shape();
    fill_gamma(&mut out.h1, m, topology.omega_h1, rng);
    fill_gamma(&mut out.h2, m, topology.omega_h2, rng);
    fill_gamma(&mut out.f, m, topology.omega_f, rng);
}

/// Draw estimated channels `|ĥ1|², |ĥ2|², |f̂|²` (Rayleigh) from the estimate
/// variances of `errmodel`.
pub fn sample_estimates<R: Rng + ?Sized>(
    topology: &NetworkTopology,
    errmodel: &CsiErrorModel,
    rng: &mut R,
) -> ChannelRealization {
    let mut real = ChannelRealization::zeros(topology.users, topology.relays);
    sample_estimates_into(errmodel, rng, &mut real);
    real
}

pub fn sample_estimates_into<R: Rng + ?Sized>(errmodel: &CsiErrorModel, rng: &mut R, out: &mut ChannelRealization) {
    fill_gamma(&mut out.h1, 1, errmodel.omega_hat_h1, rng);
    fill_gamma(&mut out.h2, 1, errmodel.omega_hat_h2, rng);
    fill_gamma(&mut out.f, 1, errmodel.omega_hat_f, rng);
}

/// Normalized relay transmit power `Q/N0 = min(Λ2, Λ3 d3^β / |f|²)`.
///
/// A zero interference gain leaves only the power cap.
pub fn relay_power(f_gain: f64, budget: &LinkBudget, topology: &NetworkTopology) -> f64 {
    if f_gain <= 0.0 {
        return budget.lambda2;
    }
    budget.lambda2.min(budget.lambda3 * topology.path_loss(topology.d3) / f_gain)
}

/// `γ_ij = min(Λ1 |h1|²/d1^β, (Q/N0) |h2|²/d2^β)` entry by entry.
pub fn snr_matrix(real: &ChannelRealization, topology: &NetworkTopology, budget: &LinkBudget) -> Result<SnrMatrix> {
    check_dims(real, topology)?;
    let mut out = Matrix::zeros(topology.users, topology.relays);
    fill_snr(real, topology, budget, &mut out);
    Ok(SnrMatrix(out))
}

pub(crate) fn fill_snr(real: &ChannelRealization, topology: &NetworkTopology, budget: &LinkBudget, out: &mut Matrix) {
    let pl1 = topology.path_loss(topology.d1);
    let pl2 = topology.path_loss(topology.d2);
    let h1 = real.h1.as_slice();
    let h2 = real.h2.as_slice();
    let f = real.f.as_slice();
    for (idx, v) in out.as_mut_slice().iter_mut().enumerate() {
        let hop1 = budget.lambda1 * h1[idx] / pl1;
        let hop2 = relay_power(f[idx], budget, topology) * h2[idx] / pl2;
        *v = hop1.min(hop2);
    }
}

/// End-to-end SNRs seen with estimated channels and Gaussian estimation
/// error:
///
/// `γ_ij,1 = Λ1 |ĥ1|² / (Λ1 Ω_e1 + d1^β)`,
/// `γ_ij,2 = Q̂ |ĥ2|² / (Q̂ Ω_e2 + d2^β)` with `Q̂` from `|f̂|²`.
pub fn snr_matrix_imperfect(
    est: &ChannelRealization,
    errmodel: &CsiErrorModel,
    topology: &NetworkTopology,
    budget: &LinkBudget,
) -> Result<SnrMatrix> {
    errmodel.validate(topology)?;
    check_dims(est, topology)?;
    let mut out = Matrix::zeros(topology.users, topology.relays);
    fill_snr_imperfect(est, errmodel, topology, budget, &mut out);
    Ok(SnrMatrix(out))
}

pub(crate) fn fill_snr_imperfect(
    est: &ChannelRealization,
    errmodel: &CsiErrorModel,
    topology: &NetworkTopology,
    budget: &LinkBudget,
    out: &mut Matrix,
) {
    let pl1 = topology.path_loss(topology.d1);
    let pl2 = topology.path_loss(topology.d2);
    let hop1_den = budget.lambda1 * errmodel.omega_e1 + pl1;
    let h1 = est.h1.as_slice();
    let h2 = est.h2.as_slice();
    let f = est.f.as_slice();
    for (idx, v) in out.as_mut_slice().iter_mut().enumerate() {
        let q = relay_power(f[idx], budget, topology);
        let hop1 = budget.lambda1 * h1[idx] / hop1_den;
        let hop2 = q * h2[idx] / (q * errmodel.omega_e2 + pl2);
        *v = hop1.min(hop2);
    }
}

fn check_dims(real: &ChannelRealization, topology: &NetworkTopology) -> Result<()> {
    let want = (topology.users, topology.relays);
    for (name, m) in [("h1", &real.h1), ("h2", &real.h2), ("f", &real.f)] {
        if (m.rows(), m.cols()) != want {
            return Err(Error::Dimension(format!(
                "{name} is {}x{}, topology needs {}x{}",
                m.rows(),
                m.cols(),
                want.0,
                want.1
            )));
        }
    }
    Ok(())
}
