//! ρ-regret against the per-step risk-optimal arm, computed from true means.

use super::SwitchingBanditInstance;
use crate::error::{domain, Result};
use crate::risk::RiskMeasure;

/// True risks of every arm at every step, with the per-step minimum.
#[derive(Debug, Clone)]
pub struct RiskTable {
    arms: usize,
    horizon: usize,
    // risks[a * horizon + t - 1]
    risks: Vec<f64>,
    best: Vec<f64>,
    best_arm: Vec<usize>,
}

impl RiskTable {
    pub fn new(instance: &SwitchingBanditInstance, measure: &RiskMeasure) -> Result<Self> {
        measure.validate()?;
        let (arms, horizon) = (instance.num_arms(), instance.horizon());
        let mut risks = vec![0.0; arms * horizon];
        for a in 0..arms {
            for seg in instance.segments(a) {
                let rho = measure.of_bernoulli(1.0 - seg.mean)?;
                risks[a * horizon + seg.start - 1..a * horizon + seg.end].fill(rho);
            }
        }
        let mut best = vec![f64::INFINITY; horizon];
        let mut best_arm = vec![0; horizon];
        for a in 0..arms {
            let row = &risks[a * horizon..(a + 1) * horizon];
            for (i, &r) in row.iter().enumerate() {
                // strict comparison keeps the lowest id on ties
                if r < best[i] {
                    best[i] = r;
                    best_arm[i] = a;
                }
            }
        }
        Ok(Self {
            arms,
            horizon,
            risks,
            best,
            best_arm,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn risk(&self, arm: usize, t: usize) -> f64 {
        self.risks[arm * self.horizon + t - 1]
    }

    #[inline]
    pub fn best(&self, t: usize) -> f64 {
        self.best[t - 1]
    }

    /// Risk-optimal arm at `t`, lowest id on ties.
    #[inline]
    pub fn best_arm(&self, t: usize) -> usize {
        self.best_arm[t - 1]
    }

    #[inline]
    pub fn gap(&self, arm: usize, t: usize) -> f64 {
        self.risk(arm, t) - self.best(t)
    }

    /// Smallest positive suboptimality gap over all steps, if any.
    pub fn min_positive_gap(&self) -> Option<f64> {
        (1..=self.horizon)
            .flat_map(|t| (0..self.arms).map(move |a| (a, t)))
            .map(|(a, t)| self.gap(a, t))
            .filter(|&g| g > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Instantaneous and cumulative regret of one action sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub instantaneous: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn from_table(actions: &[usize], table: &RiskTable) -> Result<Self> {
        if actions.len() != table.horizon() {
            return Err(domain(format!(
                "trace has {} steps but the horizon is {}",
                actions.len(),
                table.horizon()
            )));
        }
        if let Some(&bad) = actions.iter().find(|&&a| a >= table.num_arms()) {
            return Err(domain(format!("arm {bad} out of range")));
        }
        let instantaneous: Vec<f64> = actions
            .iter()
            .enumerate()
            .map(|(i, &a)| table.gap(a, i + 1))
            .collect();
        let cumulative = instantaneous
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            instantaneous,
            cumulative,
        })
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Per-step ρ-regret of `actions` (0-based arms, one per step `1..=T`).
pub fn rho_regret(actions: &[usize], instance: &SwitchingBanditInstance, measure: &RiskMeasure) -> Result<RegretTrace> {
    RegretTrace::from_table(actions, &RiskTable::new(instance, measure)?)
}

/// The same total, computed segment by segment: over each stretch between
/// consecutive change points, the summed risk of the pulled arms minus the
/// stretch length times the stretch's best risk.
pub fn segment_regret(actions: &[usize], instance: &SwitchingBanditInstance, measure: &RiskMeasure) -> Result<f64> {
    if actions.len() != instance.horizon() {
        return Err(domain("trace length differs from the horizon"));
    }
    let mut bounds = vec![1];
    bounds.extend(instance.change_points());
    bounds.push(instance.horizon() + 1);
    let mut total = 0.0;
    for w in bounds.windows(2) {
        let (start, end) = (w[0], w[1]);
        let mut best = f64::INFINITY;
        for a in 0..instance.num_arms() {
            best = best.min(measure.of_bernoulli(1.0 - instance.checked_mean(a, start)?)?);
        }
        let mut pulled = 0.0;
        for t in start..end {
            pulled += measure.of_bernoulli(1.0 - instance.checked_mean(actions[t - 1], t)?)?;
        }
        total += pulled - (end - start) as f64 * best;
    }
    Ok(total)
}
