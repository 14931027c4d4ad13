//! Change-point detection on binary streams.
//!
//! The main detector is a restarted Bayesian online change-point detector
//! (R-BOCPD). It aggregates one Laplace forecaster per candidate start `s` of
//! the current segment and signals a restart as soon as some challenger
//! `s > r` outweighs the origin forecaster `s = r`.
//!
//! Weights live in the log domain. For the origin,
//!
//! ```text
//! log ϑ(r, r, t) = -Σ_{u=r}^{t} l(r, u)
//! ```
//!
//! and for a challenger started at `s > r`,
//!
//! ```text
//! log ϑ(r, s, t) = log η(r, s, t) + log V(r:s) - Σ_{u=s}^{t} l(s, u)
//! log V(r:s)     = -Σ_{u=r}^{s-1} l(r, u)
//! ```
//!
//! where `l(s, u) = -log Lap(z_u | z_s..z_{u-1})` is the Laplace log-loss.
//! Only challengers carry the prior factor `η`, so the restart test reads
//! "the split Bayes factor exceeds `1/η(r, s, t)`".
//!
//! [`glr`] holds the Bernoulli generalized likelihood ratio detector used by
//! the GLR baseline.

pub mod glr;

use std::f64::consts::LN_2;

use crate::error::{domain, Result};

pub use glr::{bernoulli_kl, glr_detect, glr_statistic, glr_threshold, GlrDetector};

/// Laplace (add-one) predictive probability of bit `z` after observing `ones`
/// ones and `zeros` zeros.
pub fn laplace_predict(ones: u64, zeros: u64, z: bool) -> f64 {
    let hits = if z { ones } else { zeros };
    (hits as f64 + 1.0) / ((ones + zeros) as f64 + 2.0)
}

/// Prior factor `η(r, s, t)` of a challenger started at `s`, evaluated at
/// time `t` of a segment with origin `r`. Must lie in `(0, 1)`.
pub trait EtaSchedule: Clone + std::fmt::Debug + Send + Sync {
    fn log_eta(&self, r: usize, s: usize, t: usize) -> f64;

    /// Whether `log_eta` ignores `s`. The bank then evaluates the per-step
    /// ratio once instead of per candidate.
    fn independent_of_start(&self) -> bool {
        false
    }
}

/// `η(r, s, t) = δ / ((t - r + 1)(t - r + 2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultEta {
    delta: f64,
}

impl DefaultEta {
    pub fn new(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl EtaSchedule for DefaultEta {
    fn log_eta(&self, r: usize, _s: usize, t: usize) -> f64 {
        let n = (t - r + 1) as f64;
        self.delta.ln() - n.ln() - (n + 1.0).ln()
    }

    fn independent_of_start(&self) -> bool {
        true
    }
}

/// Checked evaluation of the default schedule.
pub fn eta_default(r: usize, s: usize, t: usize, delta: f64) -> Result<f64> {
    if !(r <= s && s <= t) || r == 0 {
        return Err(domain(format!(
            "eta requires 1 <= r <= s <= t, got r={r} s={s} t={t}"
        )));
    }
    Ok(DefaultEta::new(delta)?.log_eta(r, s, t).exp())
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("false-alarm budget must lie in (0, 1), got {delta}")))
    }
}

/// Outcome of one detector step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionReport {
    pub restart: bool,
    /// Start of the heaviest challenger when `restart` is set.
    pub trigger_s: Option<usize>,
    /// Local time of the test.
    pub t: usize,
}

/// Read-only view of one forecaster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecaster {
    pub start: usize,
    pub ones: u64,
    pub zeros: u64,
    pub log_weight: f64,
}

/// Incremental R-BOCPD state for one stream.
///
/// Forecaster 0 is always the origin `s = r`. Local times are 1-based.
#[derive(Debug, Clone)]
pub struct ForecasterBank<E: EtaSchedule = DefaultEta> {
    schedule: E,
    origin: usize,
    t: usize,
    starts: Vec<usize>,
    ones: Vec<u64>,
    log_weight: Vec<f64>,
    cap: Option<usize>,
    // ln(k) for k = 0.. ; grown on demand and kept across resets.
    ln: Vec<f64>,
}

impl ForecasterBank<DefaultEta> {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(Self::with_schedule(DefaultEta::new(delta)?))
    }
}

impl<E: EtaSchedule> ForecasterBank<E> {
    pub fn with_schedule(schedule: E) -> Self {
        Self {
            schedule,
            origin: 1,
            t: 0,
            starts: Vec::new(),
            ones: Vec::new(),
            log_weight: Vec::new(),
            cap: None,
            ln: vec![f64::NEG_INFINITY, 0.0],
        }
    }

    /// Keep at most `cap` forecasters (including the origin), dropping the
    /// lightest challengers first. `cap` must be at least 2.
    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.cap = cap.map(|c| c.max(2));
        self
    }

    pub fn schedule(&self) -> &E {
        &self.schedule
    }

    /// Local time: number of bits observed since the last reset.
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn forecasters(&self) -> impl Iterator<Item = Forecaster> + '_ {
        (0..self.starts.len()).map(move |i| {
            let n = (self.t + 1 - self.starts[i]) as u64;
            Forecaster {
                start: self.starts[i],
                ones: self.ones[i],
                zeros: n - self.ones[i],
                log_weight: self.log_weight[i],
            }
        })
    }

    /// Forget everything observed so far; the next bit starts a new segment.
    pub fn reset(&mut self) {
        self.t = 0;
        self.starts.clear();
        self.ones.clear();
        self.log_weight.clear();
    }

    fn grow_ln(&mut self, upto: usize) {
        while self.ln.len() <= upto {
            let k = self.ln.len();
            self.ln.push((k as f64).ln());
        }
    }

    /// Feed one bit and run the restart test.
    pub fn step(&mut self, z: bool) -> DetectionReport {
        self.t += 1;
        let t = self.t;
        let r = self.origin;
        self.grow_ln(t + 1);

        // Origin weight before this step is log V(r:t).
        let log_v = self.log_weight.first().copied().unwrap_or(0.0);
        let bit = u64::from(z);
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0;

        if !self.starts.is_empty() {
            let shared_ratio = if self.schedule.independent_of_start() {
                Some(self.schedule.log_eta(r, r, t) - self.schedule.log_eta(r, r, t - 1))
            } else {
                None
            };
            let ln = &self.ln;
            for i in 0..self.starts.len() {
                let s = self.starts[i];
                let n = t - s;
                let ones = self.ones[i] as usize;
                let hits = if z { ones } else { n - ones };
                let mut w = self.log_weight[i] + ln[hits + 1] - ln[n + 2];
                if i > 0 {
                    w += match shared_ratio {
                        Some(d) => d,
                        None => self.schedule.log_eta(r, s, t) - self.schedule.log_eta(r, s, t - 1),
                    };
                    if w > best {
                        best = w;
                        best_idx = i;
                    }
                }
                self.log_weight[i] = w;
                self.ones[i] += bit;
            }
        }

        // New forecaster s = t; it pays l(t, t) = ln 2 for its first bit.
        let fresh = if t == r {
            -LN_2
        } else {
            self.schedule.log_eta(r, t, t) + log_v - LN_2
        };
        self.starts.push(t);
        self.ones.push(bit);
        self.log_weight.push(fresh);
        if t > r && fresh > best {
            best = fresh;
            best_idx = self.starts.len() - 1;
        }

        let restart = t > r && best > self.log_weight[0];
        let trigger_s = restart.then(|| self.starts[best_idx]);
        self.prune();
        DetectionReport {
            restart,
            trigger_s,
            t,
        }
    }

    fn prune(&mut self) {
        let Some(cap) = self.cap else { return };
        while self.starts.len() > cap {
            let (idx, _) = self.log_weight[1..]
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &w)| if w < acc.1 { (i, w) } else { acc });
            let idx = idx + 1;
            self.starts.swap_remove(idx);
            self.ones.swap_remove(idx);
            self.log_weight.swap_remove(idx);
        }
    }
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Reference R-BOCPD: recomputes every weight from scratch at each time and
/// returns the first local time at which the restart test fires.
///
/// Each forecaster's Laplace likelihood is evaluated in closed form,
/// `Π Lap = n₁! n₀! / (n + 1)!`, rather than by accumulating predictive
/// losses. This is quadratic per time step in the worst case and exists to
/// cross-check [`ForecasterBank`].
pub fn rbocpd_batch<E: EtaSchedule>(bits: &[bool], schedule: &E) -> Result<Option<usize>> {
    if bits.is_empty() {
        return Err(domain("empty sequence"));
    }
    let n = bits.len();
    let lnf = ln_factorials(n + 1);
    let mut prefix_ones = vec![0usize; n + 1];
    for (i, &b) in bits.iter().enumerate() {
        prefix_ones[i + 1] = prefix_ones[i] + usize::from(b);
    }
    // log Laplace marginal likelihood of z_a..z_b (1-based, inclusive).
    let log_lik = |a: usize, b: usize| -> f64 {
        if b < a {
            return 0.0;
        }
        let ones = prefix_ones[b] - prefix_ones[a - 1];
        let len = b - a + 1;
        lnf[ones] + lnf[len - ones] - lnf[len + 1]
    };

    let r = 1;
    for t in 1..=n {
        let origin = log_lik(r, t);
        for s in (r + 1)..=t {
            let w = schedule.log_eta(r, s, t) + log_lik(r, s - 1) + log_lik(s, t);
            if w > origin {
                return Ok(Some(t));
            }
        }
    }
    Ok(None)
}
