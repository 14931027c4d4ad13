//! Forgetting baselines and the oracle.

use std::collections::VecDeque;

use rand::RngCore;

use super::{select_action, tally_index, Choice, Policy, PolicyConfig};
use crate::env::RiskTable;
use crate::error::Result;
use crate::risk::BinaryTally;

/// Risk-LCB on exponentially discounted observations: at step `t` an
/// observation made at step `s` weighs `γ^{t-s}`, and the effective count is
/// the discounted number of pulls.
#[derive(Debug, Clone)]
pub struct DiscountedRiskLcb {
    cfg: PolicyConfig,
    tallies: Vec<BinaryTally>,
    indices: Vec<f64>,
}

impl DiscountedRiskLcb {
    pub fn new(arms: usize, cfg: PolicyConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            tallies: vec![BinaryTally::default(); arms],
            indices: vec![0.0; arms],
        })
    }

    /// Discounted tallies as of the last update.
    pub fn tallies(&self) -> &[BinaryTally] {
        &self.tallies
    }
}

impl Policy for DiscountedRiskLcb {
    fn select(&mut self, t: usize, rng: &mut dyn RngCore) -> Choice {
        for (slot, tally) in self.indices.iter_mut().zip(&self.tallies) {
            *slot = tally_index(tally, t, &self.cfg);
        }
        select_action(&self.indices, self.cfg.beta.at(self.tallies.len(), t), rng)
    }

    fn update(&mut self, _t: usize, arm: usize, reward: bool) -> bool {
        let g = self.cfg.gamma_discount;
        if g < 1.0 {
            for tally in &mut self.tallies {
                tally.weight *= g;
                tally.ones *= g;
            }
        }
        self.tallies[arm].weight += 1.0;
        self.tallies[arm].ones += f64::from(u8::from(!reward));
        false
    }

    fn restart_counts(&self) -> Vec<usize> {
        vec![0; self.tallies.len()]
    }
}

/// Risk-LCB on the observations of the last `τ` steps only. An arm with no
/// pull inside the window gets index `-∞` and is sampled again.
#[derive(Debug, Clone)]
pub struct SlidingWindowRiskLcb {
    cfg: PolicyConfig,
    window: VecDeque<(usize, bool)>,
    tallies: Vec<BinaryTally>,
    indices: Vec<f64>,
}

impl SlidingWindowRiskLcb {
    pub fn new(arms: usize, cfg: PolicyConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            window: VecDeque::new(),
            tallies: vec![BinaryTally::default(); arms],
            indices: vec![0.0; arms],
        })
    }

    /// Per-arm tallies of the current window.
    pub fn tallies(&self) -> &[BinaryTally] {
        &self.tallies
    }
}

impl Policy for SlidingWindowRiskLcb {
    fn select(&mut self, t: usize, rng: &mut dyn RngCore) -> Choice {
        for (slot, tally) in self.indices.iter_mut().zip(&self.tallies) {
            *slot = tally_index(tally, t, &self.cfg);
        }
        select_action(&self.indices, self.cfg.beta.at(self.tallies.len(), t), rng)
    }

    fn update(&mut self, _t: usize, arm: usize, reward: bool) -> bool {
        let loss = !reward;
        self.window.push_back((arm, loss));
        self.tallies[arm].weight += 1.0;
        self.tallies[arm].ones += f64::from(u8::from(loss));
        if self.window.len() > self.cfg.tau_window {
            let (old, old_loss) = self.window.pop_front().expect("window is non-empty");
            self.tallies[old].weight -= 1.0;
            self.tallies[old].ones -= f64::from(u8::from(old_loss));
        }
        false
    }

    fn restart_counts(&self) -> Vec<usize> {
        vec![0; self.tallies.len()]
    }
}

/// Pulls the arm of smallest true risk at every step (lowest id on ties).
#[derive(Debug, Clone)]
pub struct OraclePolicy {
    arms: usize,
    best: Vec<usize>,
}

impl OraclePolicy {
    pub fn new(table: &RiskTable) -> Self {
        Self {
            arms: table.num_arms(),
            best: (1..=table.horizon()).map(|t| table.best_arm(t)).collect(),
        }
    }
}

impl Policy for OraclePolicy {
    fn select(&mut self, t: usize, _rng: &mut dyn RngCore) -> Choice {
        Choice {
            arm: self.best[t - 1],
            forced: false,
        }
    }

    fn update(&mut self, _t: usize, _arm: usize, _reward: bool) -> bool {
        false
    }

    fn restart_counts(&self) -> Vec<usize> {
        vec![0; self.arms]
    }
}
