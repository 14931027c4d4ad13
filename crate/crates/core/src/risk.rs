//! Risk functionals on the loss scale.
//!
//! Every risk in this crate is oriented so that *lower is better*: rewards
//! `x ∈ [0, 1]` are turned into losses `1 - x` and policies minimize the risk
//! of the loss distribution.
//!
//! * `CVaR_α` averages the largest `α` fraction of the loss distribution,
//!   `(1/α) ∫_{1-α}^{1} F⁻¹(τ) dτ`. On an empirical sample this is an
//!   L-statistic: the top `⌊αn⌋` order statistics plus a fractional share of
//!   the next one.
//! * Mean-variance is `mean + γ · var` on losses, which is `1 - (μ - γσ²)` on
//!   rewards. Minimizing it is the same as maximizing the reward-scale
//!   criterion.

use std::cmp::Ordering;

use crate::error::{domain, Result};

/// Which risk functional to apply, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskMeasure {
    /// Conditional value-at-risk at level `alpha ∈ (0, 1]`.
    Cvar { alpha: f64 },
    /// `mean + gamma · variance` with `gamma ≥ 0`.
    MeanVariance { gamma: f64 },
}

impl RiskMeasure {
    pub fn cvar(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::Cvar { alpha })
    }

    pub fn mean_variance(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self::MeanVariance { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Cvar { alpha } => check_alpha(alpha),
            Self::MeanVariance { gamma } => check_gamma(gamma),
        }
    }

    /// Lipschitz constant with respect to the Wasserstein-1 distance between
    /// distributions supported on `[0, 1]`.
    ///
    /// For mean-variance this is `1 + 4γ`: the mean moves by at most `W₁` and
    /// the variance by at most `4 W₁` on the unit interval.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Self::Cvar { alpha } => 1.0 / alpha,
            Self::MeanVariance { gamma } => 1.0 + 4.0 * gamma,
        }
    }

    /// Closed-form risk of a Bernoulli loss with `P(loss = 1) = p_loss`.
    pub fn of_bernoulli(&self, p_loss: f64) -> Result<f64> {
        match *self {
            Self::Cvar { alpha } => bernoulli_cvar(p_loss, alpha),
            Self::MeanVariance { gamma } => bernoulli_mv(p_loss, gamma),
        }
    }

    /// Plug-in risk of an empirical loss sample.
    pub fn of_sample(&self, sample: &LossSample) -> Result<f64> {
        match *self {
            Self::Cvar { alpha } => match sample.weights() {
                Some(w) => weighted_empirical_cvar(sample.values(), w, alpha),
                None => empirical_cvar(sample.values(), alpha),
            },
            Self::MeanVariance { gamma } => empirical_mv(sample.values(), sample.weights(), gamma),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Cvar { alpha } => format!("CVaR(alpha={alpha})"),
            Self::MeanVariance { gamma } => format!("MV(gamma={gamma})"),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("CVaR level must lie in (0, 1], got {alpha}")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("mean-variance weight must be >= 0, got {gamma}")))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("loss probability must lie in [0, 1], got {p}")))
    }
}

/// A validated sample of losses in `[0, 1]`, optionally weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSample {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl LossSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_losses(&values)?;
        Ok(Self {
            values,
            weights: None,
        })
    }

    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_losses(&values)?;
        check_weights(&values, &weights)?;
        Ok(Self {
            values,
            weights: Some(weights),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_losses(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(domain("loss sample is empty"));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(domain(format!("loss {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_weights(values: &[f64], weights: &[f64]) -> Result<()> {
    if weights.len() != values.len() {
        return Err(domain(format!(
            "{} weights for {} values",
            weights.len(),
            values.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(domain("weights must be finite and nonnegative"));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(domain("weights sum to zero"));
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(domain("sample is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(domain("sample contains a non-finite value"));
    }
    Ok(())
}

fn descending(a: &f64, b: &f64) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

/// Empirical `CVaR_α`: `(1/α) ∫_{1-α}^{1} F_n⁻¹(τ) dτ` for the empirical CDF
/// `F_n` of `values`.
///
/// Accepts any finite reals, not only losses in `[0, 1]`.
pub fn empirical_cvar(values: &[f64], alpha: f64) -> Result<f64> {
    check_finite(values)?;
    check_alpha(alpha)?;

    let mut sorted = values.to_vec();
    sorted.sort_by(descending);

    let n = sorted.len();
    let mass = alpha * n as f64;
    let full = (mass.floor() as usize).min(n);
    let mut total: f64 = sorted[..full].iter().sum();
    if full < n {
        total += (mass - full as f64) * sorted[full];
    }
    Ok(total / mass)
}

/// Weighted empirical `CVaR_α`. Weights are normalized to total mass one and
/// the value straddling the `α` boundary contributes fractionally.
pub fn weighted_empirical_cvar(values: &[f64], weights: &[f64], alpha: f64) -> Result<f64> {
    check_finite(values)?;
    check_weights(values, weights)?;
    check_alpha(alpha)?;

    let total_weight: f64 = weights.iter().sum();
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| (v, w / total_weight))
        .collect();
    pairs.sort_by(|a, b| descending(&a.0, &b.0));

    let mut remaining = alpha;
    let mut captured = 0.0;
    for (v, w) in pairs {
        if remaining <= 0.0 {
            break;
        }
        let take = w.min(remaining);
        captured += take * v;
        remaining -= take;
    }
    Ok(captured / alpha)
}

/// `mean + γ · var` with the population (`1/n`) variance. With weights, the
/// mean and variance are those of the normalized weighted empirical measure.
pub fn empirical_mv(values: &[f64], weights: Option<&[f64]>, gamma: f64) -> Result<f64> {
    check_finite(values)?;
    check_gamma(gamma)?;

    let (mean, var) = match weights {
        None => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var)
        }
        Some(w) => {
            check_weights(values, w)?;
            let total: f64 = w.iter().sum();
            let mean = values.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total;
            let var = values
                .iter()
                .zip(w)
                .map(|(v, w)| w * (v - mean).powi(2))
                .sum::<f64>()
                / total;
            (mean, var)
        }
    };
    Ok(mean + gamma * var)
}

/// CVaR of a Bernoulli loss: the top `α` mass holds `min(p, α)` of ones.
pub fn bernoulli_cvar(p_loss: f64, alpha: f64) -> Result<f64> {
    check_probability(p_loss)?;
    check_alpha(alpha)?;
    Ok((p_loss / alpha).min(1.0))
}

pub fn bernoulli_mv(p_loss: f64, gamma: f64) -> Result<f64> {
    check_probability(p_loss)?;
    check_gamma(gamma)?;
    Ok(p_loss + gamma * p_loss * (1.0 - p_loss))
}

/// Sufficient statistics of a (possibly weighted) sample of binary losses,
/// plus an optional pseudo-observation of mass `prior_mass` carrying total
/// loss `prior_loss`.
///
/// Policies keep these running tallies instead of re-sorting their
/// observation buffers at every step. For CVaR only real observations count;
/// for mean-variance the pseudo-observation is folded in as one more weighted
/// atom at `prior_loss / prior_mass`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BinaryTally {
    /// Total weight of real observations.
    pub weight: f64,
    /// Total weight of real observations equal to one.
    pub ones: f64,
}

impl BinaryTally {
    pub fn risk(&self, measure: &RiskMeasure, prior_mass: f64, prior_loss: f64) -> f64 {
        debug_assert!(self.weight > 0.0);
        match *measure {
            RiskMeasure::Cvar { alpha } => (self.ones / self.weight / alpha).min(1.0),
            RiskMeasure::MeanVariance { gamma } => {
                let mass = prior_mass + self.weight;
                let mean = (prior_loss + self.ones) / mass;
                let second = if prior_mass > 0.0 {
                    prior_loss * prior_loss / prior_mass
                } else {
                    0.0
                };
                let moment2 = (second + self.ones) / mass;
                mean + gamma * (moment2 - mean * mean).max(0.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cvar_examples() {
        assert_eq!(empirical_cvar(&[1.0, 0.0, 0.0, 1.0], 0.5).unwrap(), 1.0);
        assert_eq!(empirical_cvar(&[0.7], 0.3).unwrap(), 0.7);
        let v = [0.1, 0.4, 0.35, 0.9];
        assert!(close(empirical_cvar(&v, 1.0).unwrap(), 1.75 / 4.0, 1e-15));
    }

    #[test]
    fn cvar_rejects_bad_input() {
        assert!(empirical_cvar(&[], 0.5).is_err());
        assert!(empirical_cvar(&[0.5], 0.0).is_err());
        assert!(empirical_cvar(&[0.5], 1.5).is_err());
        assert!(weighted_empirical_cvar(&[0.5, 0.2], &[0.0, 0.0], 0.5).is_err());
        assert!(weighted_empirical_cvar(&[0.5, 0.2], &[1.0], 0.5).is_err());
        assert!(LossSample::new(vec![1.2]).is_err());
    }

    #[test]
    fn weighted_cvar_examples() {
        assert_eq!(
            weighted_empirical_cvar(&[0.0, 1.0], &[1.0, 1.0], 0.5).unwrap(),
            1.0
        );
        let got = weighted_empirical_cvar(&[0.0, 1.0], &[0.9, 0.1], 0.2).unwrap();
        assert!(close(got, 0.5, 1e-12), "{got}");
        assert_eq!(weighted_empirical_cvar(&[0.3], &[7.0], 0.1).unwrap(), 0.3);
    }

    #[test]
    fn mv_examples() {
        let v = [0.2, 0.9, 0.4];
        assert!(close(empirical_mv(&v, None, 0.0).unwrap(), 0.5, 1e-15));
        assert!(close(empirical_mv(&[0.3; 3], None, 5.0).unwrap(), 0.3, 1e-15));
        assert_eq!(empirical_mv(&[0.0, 1.0], None, 1.0).unwrap(), 0.75);
        assert!(empirical_mv(&v, None, -1.0).is_err());
        assert!(empirical_mv(&[], None, 1.0).is_err());
    }

    #[test]
    fn bernoulli_closed_forms() {
        assert_eq!(bernoulli_cvar(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(bernoulli_cvar(0.37, 1.0).unwrap(), 0.37);
        assert!(close(bernoulli_cvar(0.3, 0.45).unwrap(), 2.0 / 3.0, 1e-15));
        assert_eq!(bernoulli_mv(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(bernoulli_mv(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(bernoulli_mv(0.42, 0.0).unwrap(), 0.42);
        assert_eq!(bernoulli_mv(0.5, 2.0).unwrap(), 1.0);
        assert!(bernoulli_cvar(1.1, 0.5).is_err());
        assert!(bernoulli_mv(0.5, -0.1).is_err());
    }

    #[test]
    fn lipschitz_constants() {
        assert!(close(RiskMeasure::cvar(0.45).unwrap().lipschitz(), 1.0 / 0.45, 1e-15));
        assert_eq!(RiskMeasure::cvar(1.0).unwrap().lipschitz(), 1.0);
        assert_eq!(RiskMeasure::mean_variance(0.0).unwrap().lipschitz(), 1.0);
        assert_eq!(RiskMeasure::mean_variance(0.5).unwrap().lipschitz(), 3.0);
    }

    #[test]
    fn mv_orientation_matches_reward_scale() {
        // argmin of p + γp(1-p) over losses == argmax of μ - γσ² over rewards.
        let gamma = 1.7;
        let p_losses = [0.15, 0.5, 0.62, 0.05, 0.9];
        let loss_argmin = (0..p_losses.len())
            .min_by(|&a, &b| {
                let ra = bernoulli_mv(p_losses[a], gamma).unwrap();
                let rb = bernoulli_mv(p_losses[b], gamma).unwrap();
                ra.partial_cmp(&rb).unwrap()
            })
            .unwrap();
        let reward_argmax = (0..p_losses.len())
            .max_by(|&a, &b| {
                let mv = |p: f64| (1.0 - p) - gamma * p * (1.0 - p);
                mv(p_losses[a]).partial_cmp(&mv(p_losses[b])).unwrap()
            })
            .unwrap();
        assert_eq!(loss_argmin, reward_argmax);
    }

    #[test]
    fn tally_matches_sample_functions() {
        let losses = [1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let tally = BinaryTally {
            weight: losses.len() as f64,
            ones: 3.0,
        };
        for alpha in [0.1, 0.45, 0.5, 1.0] {
            let m = RiskMeasure::cvar(alpha).unwrap();
            let want = empirical_cvar(&losses, alpha).unwrap();
            assert!(close(tally.risk(&m, 1.0, 0.5), want, 1e-12));
        }
        // Mean-variance folds the pseudo-observation in as a weighted atom.
        let m = RiskMeasure::mean_variance(2.0).unwrap();
        let mut values = losses.to_vec();
        let mut weights = vec![1.0; losses.len()];
        values.push(0.5);
        weights.push(1.0);
        let want = empirical_mv(&values, Some(&weights), 2.0).unwrap();
        assert!(close(tally.risk(&m, 1.0, 0.5), want, 1e-12));
    }

    proptest! {
        #[test]
        fn cvar_dominates_mean(values in prop::collection::vec(0.0f64..=1.0, 1..60), alpha in 0.01f64..=1.0) {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let c = empirical_cvar(&values, alpha).unwrap();
            prop_assert!(c >= mean - 1e-12);
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(c >= lo - 1e-12 && c <= hi + 1e-12);
        }

        #[test]
        fn cvar_non_increasing_in_alpha(values in prop::collection::vec(0.0f64..=1.0, 1..60), a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(empirical_cvar(&values, lo).unwrap() >= empirical_cvar(&values, hi).unwrap() - 1e-12);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            prop_assert!((empirical_cvar(&values, 1.0).unwrap() - mean).abs() <= 1e-12);
        }

        #[test]
        fn cvar_affine_equivariance(values in prop::collection::vec(-50.0f64..50.0, 1..40), scale in 0.0f64..20.0, shift in -100.0f64..100.0, alpha in 0.01f64..=1.0) {
            let moved: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
            let lhs = empirical_cvar(&moved, alpha).unwrap();
            let rhs = scale * empirical_cvar(&values, alpha).unwrap() + shift;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn equal_weights_reduce_to_unweighted(values in prop::collection::vec(0.0f64..=1.0, 1..50), w in 0.01f64..10.0, alpha in 0.01f64..=1.0) {
            let weights = vec![w; values.len()];
            let a = weighted_empirical_cvar(&values, &weights, alpha).unwrap();
            let b = empirical_cvar(&values, alpha).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn bernoulli_cvar_monotone(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, alpha in 0.01f64..=1.0) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(bernoulli_cvar(lo, alpha).unwrap() <= bernoulli_cvar(hi, alpha).unwrap());
        }
    }
}
