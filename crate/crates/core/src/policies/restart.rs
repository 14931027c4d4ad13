//! Risk-LCB with optional per-arm change detection and restarts.

use rand::RngCore;

use super::{select_action, tally_index, Choice, Policy, PolicyConfig};
use crate::cpd::{ForecasterBank, GlrDetector};
use crate::error::Result;
use crate::risk::BinaryTally;

/// Which change detector watches each arm's reward stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    None,
    Rbocpd,
    Glr,
}

#[derive(Debug, Clone)]
enum Detector {
    None,
    Rbocpd(ForecasterBank),
    Glr(GlrDetector),
}

impl Detector {
    fn new(kind: DetectorKind, cfg: &PolicyConfig) -> Result<Self> {
        Ok(match kind {
            DetectorKind::None => Detector::None,
            DetectorKind::Rbocpd => Detector::Rbocpd(ForecasterBank::new(cfg.delta)?.with_cap(cfg.detector_cap)),
            DetectorKind::Glr => Detector::Glr(GlrDetector::new(cfg.delta)?),
        })
    }

    fn step(&mut self, reward: bool) -> bool {
        match self {
            Detector::None => false,
            Detector::Rbocpd(bank) => bank.step(reward).restart,
            Detector::Glr(glr) => glr.step(reward).restart,
        }
    }

    fn reset(&mut self) {
        match self {
            Detector::None => {}
            Detector::Rbocpd(bank) => bank.reset(),
            Detector::Glr(glr) => glr.reset(),
        }
    }
}

/// Per-arm bookkeeping since the last restart.
#[derive(Debug, Clone)]
pub struct ArmState {
    /// Pull count including the pseudo-observation mass.
    n: f64,
    /// Loss sum including the pseudo-observation's loss.
    s: f64,
    /// Real binary losses since the last restart.
    y: Vec<bool>,
    tally: BinaryTally,
    n0: f64,
    s0: f64,
    detector: Detector,
    restarts: usize,
}

impl ArmState {
    pub fn new(cfg: &PolicyConfig, detector: DetectorKind) -> Result<Self> {
        let n0 = cfg.n0 as f64;
        Ok(Self {
            n: n0,
            s: cfg.s0,
            y: Vec::new(),
            tally: BinaryTally::default(),
            n0,
            s0: cfg.s0,
            detector: Detector::new(detector, cfg)?,
            restarts: 0,
        })
    }

    pub fn pulls(&self) -> f64 {
        self.n
    }

    pub fn loss_sum(&self) -> f64 {
        self.s
    }

    pub fn losses(&self) -> &[bool] {
        &self.y
    }

    pub fn tally(&self) -> BinaryTally {
        self.tally
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    /// Record one reward; on a detection the arm forgets its history.
    /// Returns whether it restarted.
    pub fn observe(&mut self, reward: bool) -> bool {
        let loss = !reward;
        self.y.push(loss);
        self.n += 1.0;
        self.s += f64::from(u8::from(loss));
        self.tally.weight += 1.0;
        self.tally.ones += f64::from(u8::from(loss));
        // Detection is invariant under complementing the stream, so the
        // detector sees rewards directly.
        if self.detector.step(reward) {
            self.restart();
            true
        } else {
            false
        }
    }

    pub fn restart(&mut self) {
        self.n = self.n0;
        self.s = self.s0;
        self.y.clear();
        self.tally = BinaryTally::default();
        self.detector.reset();
        self.restarts += 1;
    }
}

/// Risk-LCB; with a detector this is the restarted variant, which also mixes
/// in forced exploration so that every arm's detector keeps being fed.
#[derive(Debug, Clone)]
pub struct RiskLcb {
    cfg: PolicyConfig,
    arms: Vec<ArmState>,
    indices: Vec<f64>,
}

impl RiskLcb {
    pub fn new(arms: usize, cfg: PolicyConfig, detector: DetectorKind) -> Result<Self> {
        cfg.validate()?;
        let states = (0..arms)
            .map(|_| ArmState::new(&cfg, detector))
            .collect::<Result<_>>()?;
        Ok(Self {
            cfg,
            arms: states,
            indices: vec![0.0; arms],
        })
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn indices(&mut self, t: usize) -> &[f64] {
        for (slot, arm) in self.indices.iter_mut().zip(&self.arms) {
            *slot = tally_index(&arm.tally, t, &self.cfg);
        }
        &self.indices
    }
}

impl Policy for RiskLcb {
    fn select(&mut self, t: usize, rng: &mut dyn RngCore) -> Choice {
        let beta = self.cfg.beta.at(self.arms.len(), t);
        self.indices(t);
        select_action(&self.indices, beta, rng)
    }

    fn update(&mut self, _t: usize, arm: usize, reward: bool) -> bool {
        self.arms[arm].observe(reward)
    }

    fn restart_counts(&self) -> Vec<usize> {
        self.arms.iter().map(|a| a.restarts).collect()
    }
}
