//! Piecewise-stationary Bernoulli bandit environments.
//!
//! Times are 1-based (`1..=T`) and arms are 0-based in the API. Files use
//! 1-based arms.

mod csv_io;
mod regret;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::risk::RiskMeasure;

pub use csv_io::{load_instance_csv, read_instance_csv, write_instance_csv, write_instance_csv_to};
pub use regret::{rho_regret, segment_regret, RegretTrace, RiskTable};

/// A stationary stretch `[start, end]` (inclusive) of one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub mean: f64,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// A change of one arm's mean at time `t` (the first step of the new segment).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Change {
    pub t: usize,
    pub arm: usize,
    pub from: f64,
    pub to: f64,
}

/// Per-arm piecewise-constant Bernoulli means over a horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingBanditInstance {
    horizon: usize,
    segments: Vec<Vec<Segment>>,
    // means[a * horizon + (t - 1)]
    means: Vec<f64>,
}

impl SwitchingBanditInstance {
    /// Validates that each arm's segments partition `[1, horizon]` in order
    /// and that all means lie in `[0, 1]`.
    pub fn new(horizon: usize, segments: Vec<Vec<Segment>>) -> Result<Self> {
        if segments.len() < 2 {
            return Err(domain(format!("need at least 2 arms, got {}", segments.len())));
        }
        if horizon == 0 {
            return Err(domain("horizon must be at least 1"));
        }
        for (a, segs) in segments.iter().enumerate() {
            let mut next = 1;
            for seg in segs {
                if seg.start != next || seg.end < seg.start {
                    return Err(domain(format!(
                        "arm {}: segment [{}, {}] does not continue at {next}",
                        a + 1,
                        seg.start,
                        seg.end
                    )));
                }
                if !(0.0..=1.0).contains(&seg.mean) {
                    return Err(domain(format!("arm {}: mean {} outside [0, 1]", a + 1, seg.mean)));
                }
                next = seg.end + 1;
            }
            if next != horizon + 1 {
                return Err(domain(format!(
                    "arm {}: segments cover [1, {}] instead of [1, {horizon}]",
                    a + 1,
                    next - 1
                )));
            }
        }
        let mut means = Vec::with_capacity(segments.len() * horizon);
        for segs in &segments {
            for seg in segs {
                means.extend(std::iter::repeat(seg.mean).take(seg.len()));
            }
        }
        Ok(Self {
            horizon,
            segments,
            means,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.segments.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn segments(&self, arm: usize) -> &[Segment] {
        &self.segments[arm]
    }

    /// Mean of `arm` at time `t`. Panics when out of range; see
    /// [`Self::checked_mean`].
    #[inline]
    pub fn mean(&self, arm: usize, t: usize) -> f64 {
        self.means[arm * self.horizon + t - 1]
    }

    pub fn checked_mean(&self, arm: usize, t: usize) -> Result<f64> {
        if arm >= self.num_arms() || t == 0 || t > self.horizon {
            return Err(domain(format!(
                "(arm {arm}, t {t}) outside {} arms x [1, {}]",
                self.num_arms(),
                self.horizon
            )));
        }
        Ok(self.mean(arm, t))
    }

    /// Every per-arm change where the mean actually moves, ordered by time
    /// then arm.
    pub fn changes(&self) -> Vec<Change> {
        let mut out = Vec::new();
        for (arm, segs) in self.segments.iter().enumerate() {
            for w in segs.windows(2) {
                if w[0].mean != w[1].mean {
                    out.push(Change {
                        t: w[1].start,
                        arm,
                        from: w[0].mean,
                        to: w[1].mean,
                    });
                }
            }
        }
        out.sort_by_key(|c| (c.t, c.arm));
        out
    }

    /// `K_T`: total number of per-arm changes.
    pub fn change_count(&self) -> usize {
        self.changes().len()
    }

    /// Distinct change-point times `c_k`.
    pub fn change_points(&self) -> Vec<usize> {
        let mut ts: Vec<usize> = self.changes().iter().map(|c| c.t).collect();
        ts.dedup();
        ts
    }

    /// Smallest absolute mean shift over all changes.
    pub fn min_change_gap(&self) -> Option<f64> {
        self.changes()
            .iter()
            .map(|c| (c.to - c.from).abs())
            .min_by(|a, b| a.total_cmp(b))
    }

    /// True when every change moves the mean by at least `lambda`.
    pub fn is_detectable(&self, lambda: f64) -> bool {
        self.changes().iter().all(|c| (c.to - c.from).abs() >= lambda)
    }
}

/// Knobs for [`generate_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub arms: usize,
    pub horizon: usize,
    /// Per-arm changes (local mode) or change times (global mode).
    pub changes: usize,
    pub lambda: f64,
    /// Minimum segment length; `None` means `T / (4 (K_T + 1))`.
    pub min_segment: Option<usize>,
    /// Apply every change point to all arms at once.
    pub global_switch: bool,
}

impl GeneratorParams {
    pub fn new(arms: usize, horizon: usize, changes: usize, lambda: f64) -> Self {
        Self {
            arms,
            horizon,
            changes,
            lambda,
            min_segment: None,
            global_switch: false,
        }
    }

    pub fn min_segment_or_default(&self) -> usize {
        self.min_segment
            .unwrap_or_else(|| (self.horizon / (4 * (self.changes + 1))).max(1))
    }
}

/// Draw a random switching instance.
///
/// In local mode every change picks a uniformly random arm; each arm's
/// change times are then uniform over configurations whose segments are all
/// at least `min_segment` long. Means are uniform on `[0, 1]` subject to
/// consecutive means of an arm differing by at least `lambda`.
pub fn generate_instance<R: Rng + ?Sized>(params: &GeneratorParams, rng: &mut R) -> Result<SwitchingBanditInstance> {
    let GeneratorParams {
        arms,
        horizon,
        changes,
        lambda,
        ..
    } = *params;
    if arms < 2 || horizon == 0 {
        return Err(domain("need at least 2 arms and a positive horizon"));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let min_seg = params.min_segment_or_default();
    if min_seg == 0 || (changes + 1).saturating_mul(min_seg) > horizon {
        return Err(domain(format!(
            "infeasible: {changes} changes with minimum segment {min_seg} do not fit in {horizon} steps"
        )));
    }

    let per_arm_times: Vec<Vec<usize>> = if params.global_switch {
        let times = spaced_times(changes, min_seg, horizon, rng);
        vec![times; arms]
    } else {
        let mut counts = vec![0usize; arms];
        for _ in 0..changes {
            counts[rng.random_range(0..arms)] += 1;
        }
        counts
            .iter()
            .map(|&k| spaced_times(k, min_seg, horizon, rng))
            .collect()
    };

    let segments = per_arm_times
        .iter()
        .map(|times| {
            let mut mean = draw_mean(None, lambda, rng);
            let mut start = 1;
            let mut segs = Vec::with_capacity(times.len() + 1);
            for &c in times {
                segs.push(Segment {
                    start,
                    end: c - 1,
                    mean,
                });
                mean = draw_mean(Some(mean), lambda, rng);
                start = c;
            }
            segs.push(Segment {
                start,
                end: horizon,
                mean,
            });
            segs
        })
        .collect();
    SwitchingBanditInstance::new(horizon, segments)
}

/// `k` change times in `(1, T]` leaving every segment at least `m` long,
/// uniform over such configurations (stars and bars on the slack).
fn spaced_times<R: Rng + ?Sized>(k: usize, m: usize, horizon: usize, rng: &mut R) -> Vec<usize> {
    let slack = horizon - (k + 1) * m;
    let mut offsets: Vec<usize> = (0..k).map(|_| rng.random_range(0..=slack)).collect();
    offsets.sort_unstable();
    offsets
        .iter()
        .enumerate()
        .map(|(j, &u)| 1 + (j + 1) * m + u)
        .collect()
}

/// Uniform draw from `{x ∈ [0, 1] : |x - prev| ≥ λ}`. When `λ > 1/2`, values
/// in `(1 - λ, λ)` are excluded everywhere since no successor could follow
/// them.
fn draw_mean<R: Rng + ?Sized>(prev: Option<f64>, lambda: f64, rng: &mut R) -> f64 {
    let mut intervals: Vec<(f64, f64)> = if lambda > 0.5 {
        vec![(0.0, 1.0 - lambda), (lambda, 1.0)]
    } else {
        vec![(0.0, 1.0)]
    };
    if let Some(p) = prev {
        intervals = intervals
            .into_iter()
            .flat_map(|(lo, hi)| [(lo, hi.min(p - lambda)), (lo.max(p + lambda), hi)])
            .filter(|(lo, hi)| hi > lo)
            .collect();
    }
    let total: f64 = intervals.iter().map(|(lo, hi)| hi - lo).sum();
    let mut u = rng.random::<f64>() * total;
    for &(lo, hi) in &intervals {
        if u <= hi - lo {
            return lo + u;
        }
        u -= hi - lo;
    }
    intervals.last().map(|&(_, hi)| hi).unwrap_or(0.5)
}

/// One Bernoulli reward draw for `arm` at time `t`.
pub fn sample_reward<R: Rng + ?Sized>(
    instance: &SwitchingBanditInstance,
    arm: usize,
    t: usize,
    rng: &mut R,
) -> Result<bool> {
    let mu = instance.checked_mean(arm, t)?;
    Ok(rng.random::<f64>() < mu)
}

/// Exact risk of the loss `1 - X` for `X ~ Bernoulli(μ(arm, t))`.
pub fn true_risk(instance: &SwitchingBanditInstance, arm: usize, t: usize, measure: &RiskMeasure) -> Result<f64> {
    let mu = instance.checked_mean(arm, t)?;
    measure.of_bernoulli(1.0 - mu)
}

/// Pre-drawn uniforms coupling rewards across policies.
///
/// Arm `a`'s uniforms come from ChaCha stream `a + 1` of `seed`, so any two
/// policies pulling the same arm at the same step see the same bit.
#[derive(Debug, Clone)]
pub struct RewardTable {
    horizon: usize,
    uniforms: Vec<f64>,
}

impl RewardTable {
    pub fn new(arms: usize, horizon: usize, seed: u64) -> Self {
        let mut uniforms = Vec::with_capacity(arms * horizon);
        for a in 0..arms {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(a as u64 + 1);
            uniforms.extend((0..horizon).map(|_| rng.random::<f64>()));
        }
        Self { horizon, uniforms }
    }

    #[inline]
    pub fn reward(&self, instance: &SwitchingBanditInstance, arm: usize, t: usize) -> bool {
        self.uniforms[arm * self.horizon + t - 1] < instance.mean(arm, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_arm(p_loss: [f64; 2], horizon: usize) -> SwitchingBanditInstance {
        let segs = p_loss
            .iter()
            .map(|p| {
                vec![Segment {
                    start: 1,
                    end: horizon,
                    mean: 1.0 - p,
                }]
            })
            .collect();
        SwitchingBanditInstance::new(horizon, segs).unwrap()
    }

    #[test]
    fn validation_rejects_gaps_and_overlaps() {
        let gap = vec![
            vec![Segment { start: 1, end: 4, mean: 0.5 }, Segment { start: 6, end: 10, mean: 0.2 }],
            vec![Segment { start: 1, end: 10, mean: 0.5 }],
        ];
        assert!(SwitchingBanditInstance::new(10, gap).is_err());
        let overlap = vec![
            vec![Segment { start: 1, end: 5, mean: 0.5 }, Segment { start: 5, end: 10, mean: 0.2 }],
            vec![Segment { start: 1, end: 10, mean: 0.5 }],
        ];
        assert!(SwitchingBanditInstance::new(10, overlap).is_err());
        let short = vec![vec![Segment { start: 1, end: 9, mean: 0.5 }]; 2];
        assert!(SwitchingBanditInstance::new(10, short).is_err());
        let bad_mean = vec![vec![Segment { start: 1, end: 10, mean: 1.5 }]; 2];
        assert!(SwitchingBanditInstance::new(10, bad_mean).is_err());
    }

    #[test]
    fn zero_changes_gives_single_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = generate_instance(&GeneratorParams::new(3, 500, 0, 0.2), &mut rng).unwrap();
        for a in 0..3 {
            assert_eq!(inst.segments(a).len(), 1);
        }
        assert_eq!(inst.change_count(), 0);
    }

    #[test]
    fn synthetic_shape() {
        let params = GeneratorParams {
            min_segment: Some(1000),
            ..GeneratorParams::new(5, 40_000, 6, 0.2)
        };
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = generate_instance(&params, &mut rng).unwrap();
            assert_eq!(inst.change_count(), 6);
            assert!(inst.is_detectable(0.2));
            for a in 0..5 {
                assert!(inst.segments(a).iter().all(|s| s.len() >= 1000));
            }
        }
    }

    #[test]
    fn global_switches_hit_every_arm() {
        let params = GeneratorParams {
            global_switch: true,
            ..GeneratorParams::new(4, 1000, 3, 0.3)
        };
        let inst = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(inst.change_points().len(), 3);
        assert_eq!(inst.change_count(), 12);
    }

    #[test]
    fn large_lambda_still_terminates() {
        let params = GeneratorParams::new(3, 2000, 10, 0.8);
        let inst = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert!(inst.is_detectable(0.8));
    }

    #[test]
    fn infeasible_is_rejected() {
        let params = GeneratorParams {
            min_segment: Some(100),
            ..GeneratorParams::new(2, 500, 5, 0.2)
        };
        assert!(generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let params = GeneratorParams::new(5, 10_000, 6, 0.2);
        let a = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = generate_instance(&params, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reward_sampling() {
        let inst = SwitchingBanditInstance::new(
            10,
            vec![
                vec![Segment { start: 1, end: 10, mean: 0.0 }],
                vec![Segment { start: 1, end: 10, mean: 1.0 }],
                vec![Segment { start: 1, end: 10, mean: 0.3 }],
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for t in 1..=10 {
            assert!(!sample_reward(&inst, 0, t, &mut rng).unwrap());
            assert!(sample_reward(&inst, 1, t, &mut rng).unwrap());
        }
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|i| sample_reward(&inst, 2, 1 + i % 10, &mut rng).unwrap())
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.3).abs() <= 3.0 * (0.21f64 / draws as f64).sqrt(), "{freq}");
        assert!(sample_reward(&inst, 3, 1, &mut rng).is_err());
        assert!(sample_reward(&inst, 0, 11, &mut rng).is_err());
        assert!(sample_reward(&inst, 0, 0, &mut rng).is_err());
    }

    #[test]
    fn true_risk_examples() {
        let inst = SwitchingBanditInstance::new(
            4,
            vec![
                vec![Segment { start: 1, end: 4, mean: 1.0 }],
                vec![Segment { start: 1, end: 4, mean: 0.7 }],
                vec![Segment { start: 1, end: 4, mean: 0.5 }],
            ],
        )
        .unwrap();
        let cvar = RiskMeasure::cvar(0.45).unwrap();
        assert_eq!(true_risk(&inst, 0, 1, &cvar).unwrap(), 0.0);
        assert!((true_risk(&inst, 1, 2, &cvar).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let mv = RiskMeasure::mean_variance(2.0).unwrap();
        assert_eq!(true_risk(&inst, 2, 3, &mv).unwrap(), 1.0);
        assert!(true_risk(&inst, 2, 5, &mv).is_err());
    }

    #[test]
    fn reward_table_is_coupled_and_seeded() {
        let inst = two_arm([0.4, 0.6], 100);
        let a = RewardTable::new(2, 100, 5);
        let b = RewardTable::new(2, 100, 5);
        let c = RewardTable::new(2, 100, 6);
        let bits = |tab: &RewardTable| (1..=100).map(|t| tab.reward(&inst, 0, t)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
    }
}
