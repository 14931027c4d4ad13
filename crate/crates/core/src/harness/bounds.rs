//! Theory bounds evaluated on the instance of a config.

use super::config::{AlgorithmSpec, ExperimentConfig};
use super::runner::replication_instance;
use crate::cpd::DefaultEta;
use crate::env::RiskTable;
use crate::error::Result;
use crate::policies::{default_beta, Algorithm, BetaMode};
use crate::theory::{
    corollary_rate, delay_bound, nonstationary_pull_bound, risk_lcb_regret_bound, BoundInputs, DELAY_SCAN_CAP,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub bound: &'static str,
    pub value: f64,
    pub note: String,
}

/// One row per bound, evaluated on the config's first instance with the
/// tunings of `rbocpd_risk_lcb` (its `[[algorithm]]` entry if present).
///
/// * the stationary Risk-LCB bound is summed over the stretches between
///   change points, each with its own length and gaps;
/// * the detection delay assumes a change after `T / (K_T + 1)` samples of
///   the arm, at the smallest mean shift of the instance;
/// * the pull bound charges that delay to every change.
pub fn bounds_table(config: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let instance = replication_instance(config, 0)?;
    let (arms, horizon, changes) = (instance.num_arms(), instance.horizon(), instance.change_count());
    let spec = config
        .algorithms
        .iter()
        .find(|s| s.algorithm == Algorithm::RbocpdRiskLcb)
        .cloned()
        .unwrap_or(AlgorithmSpec {
            algorithm: Algorithm::RbocpdRiskLcb,
            overrides: Default::default(),
        });
    let cfg = config.policy_config(&spec, arms, changes, horizon)?;
    let beta = match cfg.beta {
        BetaMode::Fixed(b) => b,
        BetaMode::Decaying => default_beta(arms, changes, horizon),
    };
    let table = RiskTable::new(&instance, &config.measure)?;

    let mut bounds = vec![1];
    bounds.extend(instance.change_points());
    bounds.push(horizon + 1);
    let mut stationary = 0.0;
    for w in bounds.windows(2) {
        let gaps: Vec<f64> = (0..arms).map(|a| table.gap(a, w[0])).filter(|&g| g > 0.0).collect();
        if !gaps.is_empty() {
            stationary += risk_lcb_regret_bound(w[1] - w[0], cfg.lipschitz(), cfg.sigma, &gaps, arms)?;
        }
    }
    let mut rows = vec![BoundRow {
        bound: "risk_lcb_regret_bound",
        value: stationary,
        note: format!("{} stationary stretches", bounds.len() - 1),
    }];

    let min_gap = table.min_positive_gap();
    let min_change = instance.min_change_gap();
    let (delay, delay_note) = match min_change {
        None => (0.0, "no changes".to_string()),
        Some(lambda) => {
            let tau = (horizon / (changes + 1)).max(2);
            let d = delay_bound(lambda.min(1.0), tau, cfg.delta, &DefaultEta::new(cfg.delta)?, DELAY_SCAN_CAP)?;
            let note = if d.bounded {
                format!("shift {lambda:.4} after {tau} samples")
            } else {
                format!("unbounded at shift {lambda:.4} after {tau} samples (scan cap reported)")
            };
            (d.delay as f64, note)
        }
    };
    rows.push(BoundRow {
        bound: "detection_delay_bound",
        value: delay,
        note: delay_note,
    });

    let inputs = BoundInputs {
        horizon,
        arms,
        changes,
        lipschitz: cfg.lipschitz(),
        sigma: cfg.sigma,
        min_gap: min_gap.unwrap_or(f64::NAN),
        min_change: min_change.unwrap_or(1.0),
        beta,
        delta: cfg.delta,
    };
    let (pull, rate, note) = match min_gap {
        Some(g) => (
            nonstationary_pull_bound(&inputs, changes as f64 * delay),
            corollary_rate(&inputs),
            format!("min risk gap {g:.4}; beta {beta:.6}"),
        ),
        None => (0.0, 0.0, "all arms tie at every step".to_string()),
    };
    rows.push(BoundRow {
        bound: "nonstationary_pull_bound",
        value: pull,
        note: note.clone(),
    });
    rows.push(BoundRow {
        bound: "corollary_rate",
        value: rate,
        note,
    });
    Ok(rows)
}
