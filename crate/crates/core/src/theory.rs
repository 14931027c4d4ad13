//! Numeric evaluation of the regret, pull-count and detection-delay bounds.
//!
//! All logarithms are natural. `n(i, j) = j - i + 1` counts the steps in
//! `[i, j]`.

use crate::cpd::EtaSchedule;
use crate::error::{domain, Result};

/// `32 √(e ln T) + 512`, the constant in the Risk-LCB width.
pub fn width_constant(horizon: usize) -> f64 {
    32.0 * (std::f64::consts::E * (horizon.max(1) as f64).ln()).sqrt() + 512.0
}

/// Stationary ρ-regret bound of Risk-LCB over `T` rounds:
/// `Σ_a 4 L² σ² c(T)² / Δ_a + 28 A Δ_a` over the suboptimal arms' gaps.
pub fn risk_lcb_regret_bound(horizon: usize, lipschitz: f64, sigma: f64, gaps: &[f64], arms: usize) -> Result<f64> {
    if let Some(g) = gaps.iter().find(|&&g| g.is_nan() || g <= 0.0) {
        return Err(domain(format!("suboptimality gaps must be positive, got {g}")));
    }
    let c = width_constant(horizon);
    let lead = 4.0 * lipschitz * lipschitz * sigma * sigma * c * c;
    Ok(gaps.iter().map(|&g| lead / g + 28.0 * arms as f64 * g).sum())
}

/// `f(s, t) = ln n(1, s) + ln n(s, t + 1) - ½ ln n(1, t) + 9/8`.
pub fn f_term(s: usize, t: usize) -> Result<f64> {
    check_order(s, t)?;
    let (s, t) = (s as f64, t as f64);
    Ok(s.ln() + (t - s + 2.0).ln() - 0.5 * t.ln() + 1.125)
}

/// Deviation term `C(s, t, δ)` of the detection-delay analysis.
///
/// With `s = 1` there are no pre-change samples and the term is `+∞`.
/// Logarithms whose argument drops below one (tiny `t`) are clamped at zero.
pub fn confidence_c(s: usize, t: usize, delta: f64) -> Result<f64> {
    check_order(s, t)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if s == 1 {
        return Ok(f64::INFINITY);
    }
    let before = (s - 1) as f64;
    let after = (t - s + 1) as f64;
    let total = t as f64;
    let log_before = (2.0 * (s as f64).sqrt() / delta).ln().max(0.0);
    let log_total = total.ln();
    let log_after = (2.0 * total * (after + 1.0).sqrt() * log_total * log_total / (std::f64::consts::LN_2 * delta))
        .ln()
        .max(0.0);
    let a = ((1.0 + 1.0 / before) / before * log_before).sqrt();
    let b = ((1.0 + 1.0 / after) / after * log_after).sqrt();
    Ok(std::f64::consts::FRAC_1_SQRT_2 * (a + b))
}

fn check_order(s: usize, t: usize) -> Result<()> {
    if s == 0 || s > t {
        return Err(domain(format!("need 1 <= s <= t, got s={s} t={t}")));
    }
    Ok(())
}

/// Result of [`delay_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayBound {
    pub delay: usize,
    /// False when no `d` up to the scan cap satisfied the inequality; `delay`
    /// then holds the cap.
    pub bounded: bool,
}

/// Default scan cap of [`delay_bound`].
pub const DELAY_SCAN_CAP: usize = 1_000_000;

/// Smallest `d ≥ 1` with
///
/// ```text
/// d > (1 - C/Λ)^{-2} / (2Λ²) · (f - ln η) / (1 + (ln η - f) / (2 (τ - 1) (Λ - C)²))
/// ```
///
/// where `τ` is the change time in the detector's local clock (so `τ - 1`
/// pre-change samples), `C = C(τ, d + τ - 1, δ)`, `f = f(τ, d + τ - 1)` and
/// `η = η(1, τ, d + τ - 1)`. A `d` with `C ≥ Λ` or a non-positive
/// denominator never qualifies.
pub fn delay_bound<E: EtaSchedule>(lambda: f64, change_time: usize, delta: f64, eta: &E, cap: usize) -> Result<DelayBound> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(domain(format!("change gap must lie in (0, 1], got {lambda}")));
    }
    if change_time < 2 {
        return Err(domain("need at least one pre-change sample (change time >= 2)"));
    }
    let tau = change_time;
    let before = (tau - 1) as f64;
    for d in 1..=cap {
        let t = d + tau - 1;
        let c = confidence_c(tau, t, delta)?;
        if c >= lambda {
            continue;
        }
        let f = f_term(tau, t)?;
        let log_eta = eta.log_eta(1, tau, t);
        let denom = 1.0 + (log_eta - f) / (2.0 * before * (lambda - c).powi(2));
        if denom <= 0.0 {
            continue;
        }
        let lead = (1.0 - c / lambda).powi(-2) / (2.0 * lambda * lambda);
        if d as f64 > lead * (f - log_eta) / denom {
            return Ok(DelayBound { delay: d, bounded: true });
        }
    }
    Ok(DelayBound {
        delay: cap,
        bounded: false,
    })
}

/// Inputs of the non-stationary bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub horizon: usize,
    pub arms: usize,
    pub changes: usize,
    pub lipschitz: f64,
    pub sigma: f64,
    /// Smallest positive risk gap to the segment-optimal arm.
    pub min_gap: f64,
    /// Smallest mean shift at a change.
    pub min_change: f64,
    pub beta: f64,
    pub delta: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let ok = self.horizon >= 1
            && self.arms >= 2
            && self.lipschitz > 0.0
            && self.sigma > 0.0
            && self.min_gap > 0.0
            && self.min_change > 0.0
            && (0.0..=1.0).contains(&self.beta)
            && self.delta > 0.0
            && self.delta < 1.0;
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid bound inputs: {self:?}")))
        }
    }
}

/// Expected suboptimal pulls of one arm by the restarted policy:
/// `βT/A + Σ delays + (K_T + δ) [4 L² σ² c(T)² / Δ_min² + 28 A]`.
pub fn nonstationary_pull_bound(inputs: &BoundInputs, delay_sum: f64) -> f64 {
    let i = inputs;
    let c = width_constant(i.horizon);
    let bracket = 4.0 * i.lipschitz.powi(2) * i.sigma.powi(2) * c * c / i.min_gap.powi(2) + 28.0 * i.arms as f64;
    i.beta * i.horizon as f64 / i.arms as f64 + delay_sum + (i.changes as f64 + i.delta) * bracket
}

/// Order of the regret of the restarted policy with `β = √(A K_T / T)`:
/// `K_T L² σ² e ln T / Δ_min² + √(A K_T T)`.
pub fn corollary_rate(inputs: &BoundInputs) -> f64 {
    let i = inputs;
    let t = i.horizon as f64;
    i.changes as f64 * i.lipschitz.powi(2) * i.sigma.powi(2) * std::f64::consts::E * t.ln() / i.min_gap.powi(2)
        + (i.arms as f64 * i.changes as f64 * t).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpd::DefaultEta;

    fn inputs() -> BoundInputs {
        BoundInputs {
            horizon: 40000,
            arms: 5,
            changes: 6,
            lipschitz: 1.0 / 0.45,
            sigma: 0.5,
            min_gap: 0.1,
            min_change: 0.2,
            beta: 0.027386,
            delta: 0.05,
        }
    }

    #[test]
    fn stationary_bound_example() {
        let b = risk_lcb_regret_bound(1000, 1.0, 0.5, &[0.6], 2).unwrap();
        assert!((b - 705_636.0).abs() / 705_636.0 < 1e-3, "{b}");
        assert!(risk_lcb_regret_bound(1000, 1.0, 0.5, &[0.0], 2).is_err());
        let one = risk_lcb_regret_bound(1, 1.0, 0.5, &[1.0], 2).unwrap();
        assert!((one - (512.0f64.powi(2) + 56.0)).abs() < 1e-6);
    }

    #[test]
    fn first_term_halves_with_doubled_gaps() {
        let lead = |g: f64| risk_lcb_regret_bound(1000, 1.0, 0.5, &[g], 2).unwrap() - 56.0 * g;
        assert!((lead(0.2) / lead(0.4) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn f_and_c() {
        assert!((f_term(1, 1).unwrap() - 1.8181).abs() < 1e-3);
        assert!(f_term(3, 2).is_err());
        assert!(confidence_c(0, 2, 0.05).is_err());
        assert_eq!(confidence_c(1, 10, 0.05).unwrap(), f64::INFINITY);
        let c = |d: f64| confidence_c(50, 200, d).unwrap();
        assert!(c(0.01) > c(0.05) && c(0.05) > c(0.2));
        assert!(confidence_c(500, 1000, 0.05).unwrap() < confidence_c(50, 100, 0.05).unwrap());
    }

    #[test]
    fn delay_scaling() {
        let eta = DefaultEta::new(0.05).unwrap();
        let d = |l: f64, s: usize| delay_bound(l, s, 0.05, &eta, DELAY_SCAN_CAP).unwrap();
        // with 499 pre-change samples a 0.2 shift is out of reach of the bound
        assert!(!d(0.2, 500).bounded);
        assert!(d(0.4, 500).delay < d(0.2, 500).delay);
        let (d2, d4, d1) = (d(0.2, 2000), d(0.4, 2000), d(1.0, 2000));
        assert!(d2.bounded && d4.bounded && d1.bounded);
        assert!(d1.delay <= d4.delay && d4.delay < d2.delay);
        assert!(d1.delay < 100, "{d1:?}");
        let strict = DefaultEta::new(0.001).unwrap();
        assert!(delay_bound(0.4, 500, 0.001, &strict, DELAY_SCAN_CAP).unwrap().delay >= d(0.4, 500).delay);
        let capped = delay_bound(0.05, 20, 0.05, &eta, 50).unwrap();
        assert!(!capped.bounded && capped.delay == 50);
    }

    #[test]
    fn pull_bound_and_rate() {
        let stationary = BoundInputs { changes: 0, ..inputs() };
        let c = width_constant(40000);
        let bracket = 4.0 * stationary.lipschitz.powi(2) * 0.25 * c * c / 0.01 + 140.0;
        let want = stationary.beta * 8000.0 + 0.05 * bracket;
        assert!((nonstationary_pull_bound(&stationary, 0.0) - want).abs() < 1e-6 * want);

        let base = inputs();
        let quad = BoundInputs { horizon: 160000, ..base };
        let second = |i: &BoundInputs| (i.arms as f64 * i.changes as f64 * i.horizon as f64).sqrt();
        assert!((second(&quad) / second(&base) - 2.0).abs() < 1e-12);
        assert!(corollary_rate(&quad) > corollary_rate(&base));
        assert!(corollary_rate(&BoundInputs { changes: 7, ..base }) > corollary_rate(&base));
        assert!(corollary_rate(&BoundInputs { arms: 6, ..base }) > corollary_rate(&base));
        assert!(nonstationary_pull_bound(&base, 100.0).is_finite());
    }
}
