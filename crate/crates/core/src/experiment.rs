//! JSON-configured experiments: figure-style sweeps, rank-placement tables
//! and a validation report comparing closed forms with simulation.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{
    asymptotic_outage_case1, asymptotic_outage_case2, average_throughput, outage_floor_imperfect,
    outage_probability, outage_probability_imperfect, worst_case_rank_prob,
};
use crate::error::{Error, Result};
use crate::model::{db_to_linear, CsiErrorModel, LinkBudget, NetworkTopology};
use crate::montecarlo::{estimate_outage, estimate_throughput, two_proportion_z, McEstimate, Scenario, MIN_TRIALS};
use crate::selection::{rank_placement_probs, PkMethod, RankPlacementDistribution, Scheme, MAX_EXACT_ENTRIES};

/// Header of every sweep CSV.
pub const SWEEP_HEADER: &str =
    "sweep_db,user,outage_exact,outage_asym1,outage_asym2,outage_mc,mc_ci_low,mc_ci_high,throughput_exact,throughput_mc";

/// Header of the rank-placement CSV.
pub const PK_HEADER: &str = "user,k,probability";

const DEFAULT_PK_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Outage,
    Throughput,
    Pk,
    Validate,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "outage" => Ok(Mode::Outage),
            "throughput" => Ok(Mode::Throughput),
            "pk" => Ok(Mode::Pk),
            "validate" => Ok(Mode::Validate),
            other => Err(Error::config("mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// `Λ1 = Λ2 = Λ3 = Λ`.
    LambdaAll,
    /// `Λ2` alone, with `Λ1` and `Λ3` taken from the config.
    Lambda2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

/// Channel-estimation error variance as a fraction of each hop's total gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiRatios {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

fn one() -> f64 {
    1.0
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub users: usize,
    pub relays: usize,
    pub m: u32,
    #[serde(default = "one")]
    pub omega_h1: f64,
    #[serde(default = "one")]
    pub omega_h2: f64,
    #[serde(default = "one")]
    pub omega_f: f64,
    #[serde(default = "one")]
    pub d1: f64,
    #[serde(default = "one")]
    pub d2: f64,
    #[serde(default = "one")]
    pub d3: f64,
    #[serde(default)]
    pub path_loss_exponent: f64,
    /// Ignored by `lambda_all` sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1_db: Option<f64>,
    /// Ignored by every sweep; kept for completeness of the budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda3_db: Option<f64>,
    pub gamma_th_db: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub mode: Mode,
    pub sweep: Sweep,
    /// Monte-Carlo trials per sweep point; 0 skips simulation.
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csi: Option<CsiRatios>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Sampled permutations when rank probabilities cannot be enumerated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pk_trials: Option<u64>,
}

fn default_scheme() -> Scheme {
    Scheme::MaxMin
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.topology()?;
        let s = &self.sweep;
        for (field, v) in [("sweep.start_db", s.start_db), ("sweep.stop_db", s.stop_db), ("sweep.step_db", s.step_db)] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if !(s.step_db > 0.0) {
            return Err(Error::config("sweep.step_db", "must be > 0"));
        }
        if s.stop_db < s.start_db {
            return Err(Error::config("sweep.stop_db", "must be >= sweep.start_db"));
        }
        if !self.gamma_th_db.is_finite() {
            return Err(Error::config("gamma_th_db", "must be finite"));
        }
        if s.variable == SweepVariable::Lambda2 {
            for (field, v) in [("lambda1_db", self.lambda1_db), ("lambda3_db", self.lambda3_db)] {
                match v {
                    None => return Err(Error::config(field, "required when sweeping lambda2")),
                    Some(x) if !x.is_finite() => return Err(Error::config(field, "must be finite")),
                    _ => {}
                }
            }
        }
        if self.trials != 0 && self.trials < MIN_TRIALS {
            return Err(Error::config("trials", format!("must be 0 or at least {MIN_TRIALS}")));
        }
        if self.pk_trials == Some(0) {
            return Err(Error::config("pk_trials", "must be > 0"));
        }
        if self.csi.is_some() {
            if self.m != 1 {
                return Err(Error::config("csi", format!("imperfect CSI requires m = 1, got m = {}", self.m)));
            }
            self.error_model()?;
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<NetworkTopology> {
        if self.users == 0 {
            return Err(Error::config("users", "must be >= 1"));
        }
        if self.relays < self.users {
            return Err(Error::config("relays", "N must be ≥ M"));
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be a positive integer"));
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
            return Err(Error::config("path_loss_exponent", "must be finite and >= 0"));
        }
        NetworkTopology::new(self.users, self.relays, self.m)?
            .with_gains(self.omega_h1, self.omega_h2, self.omega_f)?
            .with_distances(self.d1, self.d2, self.d3, self.path_loss_exponent)
    }

    pub fn error_model(&self) -> Result<Option<CsiErrorModel>> {
        match &self.csi {
            None => Ok(None),
            Some(c) => {
                for (field, v) in [("csi.e1", c.e1), ("csi.e2", c.e2), ("csi.e3", c.e3)] {
                    if !(0.0..1.0).contains(&v) {
                        return Err(Error::config(field, format!("error ratio must lie in [0, 1), got {v}")));
                    }
                }
                let topo = self.topology()?;
                CsiErrorModel::from_error_ratios(&topo, c.e1, c.e2, c.e3).map(Some)
            }
        }
    }

    /// Budget at sweep value `x_db`.
    pub fn budget_at(&self, x_db: f64) -> Result<LinkBudget> {
        let x = db_to_linear(x_db);
        let th = db_to_linear(self.gamma_th_db);
        match self.sweep.variable {
            SweepVariable::LambdaAll => LinkBudget::common(x, th),
            SweepVariable::Lambda2 => LinkBudget::new(
                db_to_linear(self.lambda1_db.unwrap_or(0.0)),
                x,
                db_to_linear(self.lambda3_db.unwrap_or(0.0)),
                th,
            ),
        }
    }

    pub fn gamma_th(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }
}

/// Read and validate a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_json(&text)
}

/// Per-user rank-placement probabilities: exact when the matrix has at most
/// [`MAX_EXACT_ENTRIES`] entries, sampled otherwise. Sampled estimates of the
/// user-symmetric schemes (max-min, random) are pooled over users.
pub fn rank_probabilities(cfg: &ExperimentConfig) -> Result<Vec<RankPlacementDistribution>> {
    let (m, n) = (cfg.users, cfg.relays);
    if m * n <= MAX_EXACT_ENTRIES {
        return rank_placement_probs(m, n, cfg.scheme, PkMethod::ExactEnumeration, 0, cfg.seed);
    }
    let trials = cfg.pk_trials.unwrap_or(DEFAULT_PK_TRIALS);
    let per_user = rank_placement_probs(m, n, cfg.scheme, PkMethod::MonteCarlo, trials, cfg.seed)?;
    match cfg.scheme {
        Scheme::Naive => Ok(per_user),
        Scheme::MaxMin | Scheme::Random => Ok(vec![RankPlacementDistribution::pooled(&per_user)?; m]),
    }
}

/// One CSV line of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepRow {
    pub sweep_db: f64,
    /// 1-based user index.
    pub user: usize,
    pub outage_exact: Option<f64>,
    pub outage_asym1: Option<f64>,
    pub outage_asym2: Option<f64>,
    pub outage_mc: Option<f64>,
    pub mc_ci_low: Option<f64>,
    pub mc_ci_high: Option<f64>,
    pub throughput_exact: Option<f64>,
    pub throughput_mc: Option<f64>,
}

fn cell(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(x) = v {
        write!(out, "{x}").unwrap();
    }
}

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        let mut s = format!("{},{}", self.sweep_db, self.user);
        for v in [
            self.outage_exact,
            self.outage_asym1,
            self.outage_asym2,
            self.outage_mc,
            self.mc_ci_low,
            self.mc_ci_high,
            self.throughput_exact,
            self.throughput_mc,
        ] {
            cell(&mut s, v);
        }
        s
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv_line());
        s.push('\n');
    }
    s
}

fn scenario(cfg: &ExperimentConfig, topo: &NetworkTopology, budget: LinkBudget) -> Result<Scenario> {
    let sc = Scenario::new(topo.clone(), budget, cfg.scheme);
    match cfg.error_model()? {
        Some(e) => sc.with_csi(e),
        None => Ok(sc),
    }
}

fn user_seed(cfg: &ExperimentConfig, point: usize) -> u64 {
    // Distinct master key per sweep point so points are independent.
    cfg.seed.wrapping_add((point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Evaluate every sweep point. Outage columns are filled in `outage` mode,
/// throughput columns in `throughput` mode.
pub fn sweep_rows(cfg: &ExperimentConfig, mode: Mode) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let topo = cfg.topology()?;
    let errmodel = cfg.error_model()?;
    let pk = rank_probabilities(cfg)?;
    let th = cfg.gamma_th();
    let mut rows = Vec::new();
    for (pi, &x_db) in cfg.sweep.points().iter().enumerate() {
        let budget = cfg.budget_at(x_db)?;
        let sc = scenario(cfg, &topo, budget)?;
        let seed = user_seed(cfg, pi);
        let mut point: Vec<SweepRow> = (0..cfg.users)
            .map(|u| SweepRow {
                sweep_db: x_db,
                user: u + 1,
                ..SweepRow::default()
            })
            .collect();
        match mode {
            Mode::Throughput => {
                let mc = if cfg.trials > 0 {
                    Some(estimate_throughput(&sc, cfg.trials, seed)?)
                } else {
                    None
                };
                for (u, row) in point.iter_mut().enumerate() {
                    if topo.shape() == 1 && errmodel.is_none() {
                        row.throughput_exact = Some(average_throughput(&topo, &budget, &pk[u])?.average_bpcu);
                    }
                    row.throughput_mc = mc.as_ref().map(|e| e[u].mean);
                    row.mc_ci_low = mc.as_ref().map(|e| e[u].ci_low);
                    row.mc_ci_high = mc.as_ref().map(|e| e[u].ci_high);
                }
            }
            _ => {
                let mc = if cfg.trials > 0 {
                    Some(estimate_outage(&sc, th, cfg.trials, seed)?)
                } else {
                    None
                };
                for (u, row) in point.iter_mut().enumerate() {
                    match &errmodel {
                        Some(e) => {
                            row.outage_exact = Some(outage_probability_imperfect(th, &topo, &budget, e, &pk[u])?);
                            row.outage_asym2 = Some(outage_floor_imperfect(th, e, cfg.users, cfg.relays, &pk[u])?);
                        }
                        None => {
                            row.outage_exact = Some(outage_probability(th, &topo, &budget, &pk[u])?);
                            match cfg.sweep.variable {
                                SweepVariable::LambdaAll if cfg.scheme == Scheme::MaxMin => {
                                    row.outage_asym1 = Some(asymptotic_outage_case1(th, budget.lambda1, &topo)?);
                                }
                                SweepVariable::Lambda2 => {
                                    row.outage_asym2 = Some(asymptotic_outage_case2(th, &topo, &budget, &pk[u])?);
                                }
                                _ => {}
                            }
                        }
                    }
                    if let Some(e) = &mc {
                        row.outage_mc = Some(e[u].mean);
                        row.mc_ci_low = Some(e[u].ci_low);
                        row.mc_ci_high = Some(e[u].ci_high);
                    }
                }
            }
        }
        rows.extend(point);
    }
    Ok(rows)
}

pub fn pk_csv(pk: &[RankPlacementDistribution]) -> String {
    let mut s = String::from(PK_HEADER);
    s.push('\n');
    for (u, d) in pk.iter().enumerate() {
        for (k, p) in d.probs.iter().enumerate() {
            writeln!(s, "{},{},{}", u + 1, k + 1, p).unwrap();
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            verdict,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<12} {}: {}", c.verdict, c.name, c.detail)?;
        }
        let fails = self.checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), fails)
    }
}

/// Number of standard errors used by the validation verdicts.
pub const VALIDATE_Z: f64 = 3.0;

/// Trials below which Monte-Carlo comparisons are reported as inconclusive.
pub const VALIDATE_MIN_TRIALS: u64 = 10_000;

/// Expected event count below which an outage comparison cannot resolve
/// anything.
const MIN_EVENTS: f64 = 10.0;

fn mc_verdict(exact: f64, est: &McEstimate) -> (Verdict, String) {
    let (lo, hi) = est.interval(VALIDATE_Z);
    let detail = format!("exact {exact:.6e}, mc {:.6e} [{lo:.3e}, {hi:.3e}]", est.mean);
    if est.trials < VALIDATE_MIN_TRIALS || exact * (est.trials as f64) < MIN_EVENTS {
        return (Verdict::Inconclusive, format!("{detail} (CI too wide)"));
    }
    if est.contains_at(exact, VALIDATE_Z) {
        (Verdict::Pass, detail)
    } else {
        (Verdict::Fail, detail)
    }
}

/// Least-squares slope of `y` on `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Diversity order of user `u` (0-based) expected for each scheme with
/// perfect CSI.
fn expected_diversity(cfg: &ExperimentConfig, u: usize) -> (f64, f64) {
    let m = cfg.m as f64;
    match cfg.scheme {
        Scheme::MaxMin => (m * cfg.relays as f64, 0.10),
        Scheme::Naive => (m * (cfg.relays - u) as f64, 0.15),
        Scheme::Random => (m, 0.15),
    }
}

/// Run every check that applies to `cfg`.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let mut rep = ValidationReport::default();
    let topo = cfg.topology()?;
    let errmodel = cfg.error_model()?;
    let pk = rank_probabilities(cfg)?;
    let th = cfg.gamma_th();
    let (m, n) = (cfg.users, cfg.relays);

    // Rank-placement probabilities.
    for (u, d) in pk.iter().enumerate() {
        let sum: f64 = d.probs.iter().sum();
        let exact = d.method == PkMethod::ExactEnumeration;
        let tol = if exact { 1e-12 } else { 1e-9 };
        let v = if (sum - 1.0).abs() <= tol { Verdict::Pass } else { Verdict::Fail };
        rep.push(format!("pk sums to one (user {})", u + 1), v, format!("sum {sum:.15}"));
        if cfg.scheme == Scheme::MaxMin {
            let worst = worst_case_rank_prob(m, n)?;
            let got = d.prob((m - 1) * n + 1);
            let (v, detail) = if exact {
                let v = if (got - worst).abs() <= 1e-12 { Verdict::Pass } else { Verdict::Fail };
                (v, format!("enumerated {got:.12}, formula {worst:.12}"))
            } else {
                let hw = d.half_width(VALIDATE_Z)[(m - 1) * n];
                let v = if (got - worst).abs() <= hw { Verdict::Pass } else { Verdict::Fail };
                (v, format!("sampled {got:.6} ± {hw:.1e}, formula {worst:.6}"))
            };
            rep.push(format!("worst-case rank probability (user {})", u + 1), v, detail);
        }
    }

    let points = cfg.sweep.points();
    let mut exact_curves: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (pi, &x_db) in points.iter().enumerate() {
        let budget = cfg.budget_at(x_db)?;
        let exact: Vec<f64> = (0..m)
            .map(|u| match &errmodel {
                Some(e) => outage_probability_imperfect(th, &topo, &budget, e, &pk[u]),
                None => outage_probability(th, &topo, &budget, &pk[u]),
            })
            .collect::<Result<_>>()?;
        for (u, &p) in exact.iter().enumerate() {
            exact_curves[u].push(p);
        }
        if cfg.scheme == Scheme::MaxMin {
            let spread = exact.iter().fold(0.0f64, |a, &p| a.max((p - exact[0]).abs()));
            let v = if spread <= 1e-12 { Verdict::Pass } else { Verdict::Fail };
            rep.push(format!("analytic fairness at {x_db} dB"), v, format!("max per-user spread {spread:.2e}"));
        }
        if cfg.trials == 0 {
            continue;
        }
        let sc = scenario(cfg, &topo, budget)?;
        let seed = user_seed(cfg, pi);
        if cfg.mode == Mode::Throughput {
            let mc = estimate_throughput(&sc, cfg.trials, seed)?;
            if topo.shape() == 1 && errmodel.is_none() {
                for u in 0..m {
                    let tau = average_throughput(&topo, &budget, &pk[u])?.average_bpcu;
                    let est = &mc[u];
                    let rel = (tau - est.mean).abs() / est.mean;
                    let inside = est.contains_at(tau, VALIDATE_Z);
                    let detail = format!("exact {tau:.6e}, mc {:.6e}, rel diff {rel:.2e}", est.mean);
                    let v = if cfg.trials < VALIDATE_MIN_TRIALS {
                        Verdict::Inconclusive
                    } else if inside && rel <= 0.01 {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    };
                    rep.push(format!("throughput vs simulation at {x_db} dB (user {})", u + 1), v, detail);
                }
            }
            continue;
        }
        let mc = estimate_outage(&sc, th, cfg.trials, seed)?;
        for u in 0..m {
            let (v, detail) = mc_verdict(exact[u], &mc[u]);
            rep.push(format!("outage vs simulation at {x_db} dB (user {})", u + 1), v, detail);
        }
        if cfg.scheme == Scheme::MaxMin && m > 1 {
            let mut worst = 0.0f64;
            for a in 0..m {
                for b in a + 1..m {
                    worst = worst.max(two_proportion_z(&mc[a], &mc[b]).abs());
                }
            }
            let v = if cfg.trials < VALIDATE_MIN_TRIALS {
                Verdict::Inconclusive
            } else if worst < VALIDATE_Z {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            rep.push(format!("simulated fairness at {x_db} dB"), v, format!("max |z| {worst:.2}"));
        }
    }

    match (&errmodel, cfg.sweep.variable) {
        (None, SweepVariable::LambdaAll) if cfg.mode != Mode::Throughput => {
            // Slope over the top of the sweep, at least 30 dB where possible.
            let sel: Vec<usize> = (0..points.len()).filter(|&i| points[i] >= 30.0 - 1e-9).collect();
            let sel = if sel.len() >= 2 {
                sel
            } else {
                (points.len().saturating_sub(3)..points.len()).collect()
            };
            if sel.len() >= 2 {
                let x: Vec<f64> = sel.iter().map(|&i| points[i] / 10.0).collect();
                for u in 0..m {
                    let y: Vec<f64> = sel.iter().map(|&i| exact_curves[u][i].log10()).collect();
                    let slope = ls_slope(&x, &y);
                    let (div, tol) = expected_diversity(cfg, u);
                    let rel = (slope + div).abs() / div;
                    let v = if rel <= tol { Verdict::Pass } else { Verdict::Fail };
                    rep.push(
                        format!("diversity order (user {})", u + 1),
                        v,
                        format!("slope {slope:.3} vs -{div} ({:.1}% off, tol {:.0}%)", rel * 100.0, tol * 100.0),
                    );
                }
            }
            if cfg.scheme == Scheme::MaxMin {
                let lambda = db_to_linear(60.0);
                let budget = LinkBudget::common(lambda, th)?;
                let exact = outage_probability(th, &topo, &budget, &pk[0])?;
                let asym = asymptotic_outage_case1(th, lambda, &topo)?;
                let ratio = asym / exact;
                let v = if (0.95..=1.05).contains(&ratio) { Verdict::Pass } else { Verdict::Fail };
                rep.push("array gain at 60 dB", v, format!("asymptotic/exact {ratio:.4}"));
            }
        }
        (None, SweepVariable::Lambda2) if cfg.mode != Mode::Throughput => {
            let budget = cfg.budget_at(60.0)?;
            for u in 0..m {
                let exact = outage_probability(th, &topo, &budget, &pk[u])?;
                let floor = asymptotic_outage_case2(th, &topo, &budget, &pk[u])?;
                let rel = (exact - floor).abs() / floor;
                let v = if rel <= 1e-3 { Verdict::Pass } else { Verdict::Fail };
                rep.push(
                    format!("outage floor in lambda2 (user {})", u + 1),
                    v,
                    format!("exact(60 dB) {exact:.6e}, floor {floor:.6e}, rel {rel:.2e}"),
                );
            }
        }
        (Some(e), _) => {
            let budget = LinkBudget::common(db_to_linear(80.0), th)?;
            for u in 0..m {
                let exact = outage_probability_imperfect(th, &topo, &budget, e, &pk[u])?;
                let floor = outage_floor_imperfect(th, e, m, n, &pk[u])?;
                let rel = (exact - floor).abs() / floor;
                let v = if rel <= 1e-3 { Verdict::Pass } else { Verdict::Fail };
                rep.push(
                    format!("imperfect-CSI floor (user {})", u + 1),
                    v,
                    format!("exact(80 dB) {exact:.6e}, floor {floor:.6e}, rel {rel:.2e}"),
                );
            }
        }
        _ => {}
    }
    Ok(rep)
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// CSV text, also written to `path` when one was given.
    Csv { text: String, path: Option<PathBuf> },
    Report(ValidationReport),
}

/// Run the configured mode, writing CSV output to `cfg.output` if set.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let text = match cfg.mode {
        Mode::Validate => return run_validate(cfg).map(Outcome::Report),
        Mode::Pk => pk_csv(&rank_probabilities(cfg)?),
        mode => sweep_csv(&sweep_rows(cfg, mode)?),
    };
    if let Some(p) = &cfg.output {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(p, &text)?;
    }
    Ok(Outcome::Csv {
        text,
        path: cfg.output.clone(),
    })
}

/// Write a sweep for `cfg` to `cfg.output`; convenience wrapper over [`run`].
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<String> {
    match run(cfg)? {
        Outcome::Csv { text, .. } => Ok(text),
        Outcome::Report(r) => Ok(r.to_string()),
    }
}
