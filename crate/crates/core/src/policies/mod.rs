//! Risk-aware bandit policies.
//!
//! Every policy scores arms with a lower confidence bound on the risk of
//! their loss distribution,
//!
//! ```text
//! index(a, t) = ρ̂(a) - bonus_scale · L · σ · (32 √(e ln t) + 512) / √N(a)
//! ```
//!
//! and pulls the arm with the smallest index, except that with probability
//! `β` it pulls a uniformly random arm instead. The variants differ in which
//! observations feed `ρ̂` and `N`:
//!
//! * [`RiskLcb`] keeps everything, optionally forgetting an arm's history
//!   when its change detector ([`DetectorKind`]) fires;
//! * [`DiscountedRiskLcb`] weights past observations by `γ^{age}`;
//! * [`SlidingWindowRiskLcb`] keeps only the last `τ` steps;
//! * [`OraclePolicy`] knows the true means and is the regret comparator.

mod baselines;
mod restart;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::env::{RewardTable, RiskTable, SwitchingBanditInstance};
use crate::error::{domain, Error, Result};
use crate::risk::{BinaryTally, RiskMeasure};

pub use baselines::{DiscountedRiskLcb, OraclePolicy, SlidingWindowRiskLcb};
pub use restart::{ArmState, DetectorKind, RiskLcb};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Forced-exploration schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    Fixed(f64),
    /// `β_t = min(1, √(A / t))`.
    Decaying,
}

impl BetaMode {
    pub fn at(&self, arms: usize, t: usize) -> f64 {
        match *self {
            BetaMode::Fixed(b) => b,
            BetaMode::Decaying => decaying_beta(arms, t),
        }
    }
}

/// Tunables shared by all policies. Fields a policy does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub measure: RiskMeasure,
    /// Lipschitz constant of the measure; `None` uses the measure's own.
    pub lipschitz: Option<f64>,
    /// Sub-Gaussian scale of the rewards.
    pub sigma: f64,
    /// Multiplier on the exploration width.
    pub bonus_scale: f64,
    pub beta: BetaMode,
    /// Pseudo-observation mass an arm starts (and restarts) with.
    pub n0: usize,
    /// Total loss carried by the pseudo-observation.
    pub s0: f64,
    /// False-alarm budget of the change detectors.
    pub delta: f64,
    /// Discount factor of [`DiscountedRiskLcb`]; 1 disables forgetting.
    pub gamma_discount: f64,
    /// Window length of [`SlidingWindowRiskLcb`].
    pub tau_window: usize,
    /// Optional bound on the R-BOCPD forecaster bank size.
    pub detector_cap: Option<usize>,
}

impl PolicyConfig {
    pub fn new(measure: RiskMeasure) -> Self {
        Self {
            measure,
            lipschitz: None,
            sigma: 0.5,
            bonus_scale: 1.0,
            beta: BetaMode::Fixed(0.0),
            n0: 1,
            s0: 0.5,
            delta: 0.05,
            gamma_discount: 1.0,
            tau_window: usize::MAX,
            detector_cap: None,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz.unwrap_or_else(|| self.measure.lipschitz())
    }

    pub fn validate(&self) -> Result<()> {
        self.measure.validate()?;
        let check = |ok: bool, what: String| if ok { Ok(()) } else { Err(domain(what)) };
        check(self.lipschitz.map_or(true, |l| l > 0.0), format!("lipschitz must be positive, got {:?}", self.lipschitz))?;
        check(self.sigma > 0.0, format!("sigma must be positive, got {}", self.sigma))?;
        check(self.bonus_scale >= 0.0, format!("bonus_scale must be non-negative, got {}", self.bonus_scale))?;
        if let BetaMode::Fixed(b) = self.beta {
            check((0.0..=1.0).contains(&b), format!("beta must lie in [0, 1], got {b}"))?;
        }
        check(self.n0 >= 1, "n0 must be at least 1".into())?;
        check(
            self.s0 > 0.0 && self.s0 <= self.n0 as f64,
            format!("s0 must lie in (0, n0], got {}", self.s0),
        )?;
        check(self.delta > 0.0 && self.delta < 1.0, format!("delta must lie in (0, 1), got {}", self.delta))?;
        check(
            self.gamma_discount > 0.0 && self.gamma_discount <= 1.0,
            format!("gamma_discount must lie in (0, 1], got {}", self.gamma_discount),
        )?;
        check(self.tau_window >= 1, "tau_window must be at least 1".into())?;
        Ok(())
    }
}

/// `min(1, √(A K_T / T))`, zero without changes.
pub fn default_beta(arms: usize, changes: usize, horizon: usize) -> f64 {
    if changes == 0 {
        return 0.0;
    }
    ((arms * changes) as f64 / horizon as f64).sqrt().min(1.0)
}

/// `min(1, √(A / t))`.
pub fn decaying_beta(arms: usize, t: usize) -> f64 {
    (arms as f64 / t as f64).sqrt().min(1.0)
}

/// `1 - ¼ √(K_T / T)`, or 1 (no discounting) without changes.
pub fn default_gamma(changes: usize, horizon: usize) -> f64 {
    if changes == 0 {
        return 1.0;
    }
    1.0 - 0.25 * (changes as f64 / horizon as f64).sqrt()
}

/// `⌈2 √(T ln T / K_T)⌉` capped at `T`, or `T` without changes.
pub fn default_tau(changes: usize, horizon: usize) -> usize {
    if changes == 0 {
        return horizon;
    }
    let t = horizon as f64;
    ((2.0 * (t * t.ln() / changes as f64).sqrt()).ceil() as usize).clamp(1, horizon)
}

// ---------------------------------------------------------------------------
// Indices and action selection
// ---------------------------------------------------------------------------

/// Confidence width for effective sample size `n` at time `t`.
pub fn exploration_width(n: f64, t: usize, cfg: &PolicyConfig) -> f64 {
    let log_t = (t.max(1) as f64).ln();
    let c = 32.0 * (std::f64::consts::E * log_t).sqrt() + 512.0;
    cfg.bonus_scale * cfg.lipschitz() * cfg.sigma * c / n.sqrt()
}

/// Index of an arm whose (possibly weighted) real observations are summarized
/// by `tally`. The pseudo-observation adds `n0` to the effective count.
pub fn tally_index(tally: &BinaryTally, t: usize, cfg: &PolicyConfig) -> f64 {
    if tally.weight <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let n0 = cfg.n0 as f64;
    let rho = tally.risk(&cfg.measure, n0, cfg.s0);
    if cfg.bonus_scale == 0.0 {
        return rho;
    }
    rho - exploration_width(n0 + tally.weight, t, cfg)
}

/// Risk-LCB index of an arm; `-∞` until it has a real observation.
pub fn risk_lcb_index(arm: &ArmState, t: usize, cfg: &PolicyConfig) -> f64 {
    tally_index(&arm.tally(), t, cfg)
}

/// Result of [`select_action`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub arm: usize,
    /// Drawn by the uniform forced-exploration branch.
    pub forced: bool,
}

/// With probability `beta` a uniformly random arm, otherwise the argmin of
/// `indices` (lowest id on ties).
pub fn select_action<R: Rng + ?Sized>(indices: &[f64], beta: f64, rng: &mut R) -> Choice {
    debug_assert!(!indices.is_empty());
    if beta > 0.0 && rng.random::<f64>() < beta {
        return Choice {
            arm: rng.random_range(0..indices.len()),
            forced: true,
        };
    }
    let mut arm = 0;
    for (a, &x) in indices.iter().enumerate().skip(1) {
        if x < indices[arm] {
            arm = a;
        }
    }
    Choice { arm, forced: false }
}

// ---------------------------------------------------------------------------
// Policies and the simulation loop
// ---------------------------------------------------------------------------

/// The implemented algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    RbocpdRiskLcb,
    RiskLcb,
    DiscountedRiskLcb,
    SlidingWindowRiskLcb,
    GlrRiskLcb,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::RbocpdRiskLcb,
        Algorithm::RiskLcb,
        Algorithm::DiscountedRiskLcb,
        Algorithm::SlidingWindowRiskLcb,
        Algorithm::GlrRiskLcb,
        Algorithm::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::RbocpdRiskLcb => "rbocpd_risk_lcb",
            Algorithm::RiskLcb => "risk_lcb",
            Algorithm::DiscountedRiskLcb => "discounted_risk_lcb",
            Algorithm::SlidingWindowRiskLcb => "sliding_window_risk_lcb",
            Algorithm::GlrRiskLcb => "glr_risk_lcb",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Whether the algorithm restarts arms on detected changes.
    pub fn uses_detector(&self) -> bool {
        matches!(self, Algorithm::RbocpdRiskLcb | Algorithm::GlrRiskLcb)
    }

    /// Build a fresh policy. The oracle needs the risk table of the instance
    /// it will face; the others ignore it.
    pub fn build(&self, arms: usize, cfg: &PolicyConfig, table: &RiskTable) -> Result<Box<dyn Policy>> {
        cfg.validate()?;
        Ok(match self {
            Algorithm::RbocpdRiskLcb => Box::new(RiskLcb::new(arms, *cfg, DetectorKind::Rbocpd)?),
            Algorithm::RiskLcb => Box::new(RiskLcb::new(arms, *cfg, DetectorKind::None)?),
            Algorithm::GlrRiskLcb => Box::new(RiskLcb::new(arms, *cfg, DetectorKind::Glr)?),
            Algorithm::DiscountedRiskLcb => Box::new(DiscountedRiskLcb::new(arms, *cfg)?),
            Algorithm::SlidingWindowRiskLcb => Box::new(SlidingWindowRiskLcb::new(arms, *cfg)?),
            Algorithm::Oracle => Box::new(OraclePolicy::new(table)),
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// A sequential decision maker over `1..=T`.
pub trait Policy: Send {
    /// Choose the arm for step `t`.
    fn select(&mut self, t: usize, rng: &mut dyn RngCore) -> Choice;

    /// Record the reward of `arm` at step `t`. Returns whether the arm's
    /// history was reset by a change detection.
    fn update(&mut self, t: usize, arm: usize, reward: bool) -> bool;

    fn restart_counts(&self) -> Vec<usize>;
}

/// Everything a policy did during one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTrace {
    pub arms: Vec<usize>,
    pub rewards: Vec<bool>,
    pub forced: Vec<bool>,
    /// `(arm, t)` of each restart, in time order.
    pub restarts: Vec<(usize, usize)>,
    pub restart_counts: Vec<usize>,
}

impl ActionTrace {
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn forced_fraction(&self) -> f64 {
        if self.forced.is_empty() {
            return 0.0;
        }
        self.forced.iter().filter(|&&f| f).count() as f64 / self.forced.len() as f64
    }
}

/// Run `policy` on `instance` for its whole horizon, drawing rewards from
/// `rewards` and exploration coins from `rng`.
pub fn simulate(
    policy: &mut dyn Policy,
    instance: &SwitchingBanditInstance,
    rewards: &RewardTable,
    rng: &mut dyn RngCore,
) -> ActionTrace {
    let horizon = instance.horizon();
    let mut trace = ActionTrace {
        arms: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        forced: Vec::with_capacity(horizon),
        restarts: Vec::new(),
        restart_counts: Vec::new(),
    };
    for t in 1..=horizon {
        let choice = policy.select(t, rng);
        let x = rewards.reward(instance, choice.arm, t);
        if policy.update(t, choice.arm, x) {
            trace.restarts.push((choice.arm, t));
        }
        trace.arms.push(choice.arm);
        trace.rewards.push(x);
        trace.forced.push(choice.forced);
    }
    trace.restart_counts = policy.restart_counts();
    trace
}
