//! Bernoulli generalized likelihood ratio (GLR) change detection.
//!
//! After `n` bits the statistic is
//!
//! ```text
//! sup_{1 ≤ s < n}  s · kl(μ̂(1:s), μ̂(1:n)) + (n - s) · kl(μ̂(s+1:n), μ̂(1:n))
//! ```
//!
//! and a change is declared once it exceeds `ln(3 n^{3/2} / δ)`.

use super::{check_delta, DetectionReport};
use crate::error::{domain, Result};

/// Bernoulli Kullback-Leibler divergence `kl(p, q)` with `0 · ln 0 = 0`.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    }
    term(p, q) + term(1.0 - p, 1.0 - q)
}

pub fn glr_threshold(n: usize, delta: f64) -> f64 {
    (3.0 * (n as f64).powf(1.5) / delta).ln()
}

/// GLR statistic of a whole sequence, computed from the divergence form.
pub fn glr_statistic(bits: &[bool]) -> f64 {
    let n = bits.len();
    let total: usize = bits.iter().filter(|&&b| b).count();
    let mean = total as f64 / n as f64;
    let mut ones_before = 0usize;
    let mut best = 0.0f64;
    for s in 1..n {
        ones_before += usize::from(bits[s - 1]);
        let before = ones_before as f64 / s as f64;
        let after = (total - ones_before) as f64 / (n - s) as f64;
        let stat = s as f64 * bernoulli_kl(before, mean)
            + (n - s) as f64 * bernoulli_kl(after, mean);
        best = best.max(stat);
    }
    best
}

/// First prefix length at which the GLR statistic exceeds its threshold.
pub fn glr_detect(bits: &[bool], delta: f64) -> Result<Option<usize>> {
    if bits.is_empty() {
        return Err(domain("empty sequence"));
    }
    check_delta(delta)?;
    Ok((2..=bits.len()).find(|&n| glr_statistic(&bits[..n]) > glr_threshold(n, delta)))
}

/// Incremental GLR detector.
///
/// Uses the entropy form of the statistic with a table of `k ln k`, so each
/// step costs one pass over the split points and no logarithms.
#[derive(Debug, Clone)]
pub struct GlrDetector {
    delta: f64,
    // prefix_ones[i] = ones among the first i bits.
    prefix_ones: Vec<usize>,
    xlnx: Vec<f64>,
}

impl GlrDetector {
    pub fn new(delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self {
            delta,
            prefix_ones: vec![0],
            xlnx: vec![0.0],
        })
    }

    pub fn time(&self) -> usize {
        self.prefix_ones.len() - 1
    }

    pub fn reset(&mut self) {
        self.prefix_ones.truncate(1);
    }

    fn grow(&mut self, upto: usize) {
        while self.xlnx.len() <= upto {
            let k = self.xlnx.len() as f64;
            self.xlnx.push(k * k.ln());
        }
    }

    /// Current value of the statistic and the best split (bits before the
    /// change).
    pub fn statistic(&self) -> (f64, usize) {
        let n = self.time();
        let x = &self.xlnx;
        let p = &self.prefix_ones;
        let total = p[n];
        // m · (-entropy) of a block with k ones among m bits.
        let block = |k: usize, m: usize| x[k] + x[m - k] - x[m];
        let whole = block(total, n);
        let mut best = 0.0f64;
        let mut split = 0;
        for (s, &before) in p.iter().enumerate().take(n).skip(1) {
            let stat = block(before, s) + block(total - before, n - s) - whole;
            if stat > best {
                best = stat;
                split = s;
            }
        }
        (best, split)
    }

    pub fn step(&mut self, z: bool) -> DetectionReport {
        let last = *self.prefix_ones.last().expect("prefix is never empty");
        self.prefix_ones.push(last + usize::from(z));
        let n = self.time();
        self.grow(n);
        let (stat, split) = self.statistic();
        let restart = n >= 2 && stat > glr_threshold(n, self.delta);
        DetectionReport {
            restart,
            trigger_s: restart.then_some(split + 1),
            t: n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_edge_cases() {
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
        assert_eq!(bernoulli_kl(0.0, 0.0), 0.0);
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
        assert_eq!(bernoulli_kl(0.5, 0.0), f64::INFINITY);
        let want = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((bernoulli_kl(0.5, 0.25) - want).abs() < 1e-15);
    }

    #[test]
    fn constant_sequences_have_zero_statistic() {
        for z in [false, true] {
            let bits = vec![z; 40];
            assert_eq!(glr_statistic(&bits), 0.0);
            assert_eq!(glr_detect(&bits, 0.05).unwrap(), None);
            let mut det = GlrDetector::new(0.05).unwrap();
            for &b in &bits {
                assert!(!det.step(b).restart);
                assert_eq!(det.statistic().0, 0.0);
            }
        }
    }

    #[test]
    fn single_bit_and_empty() {
        assert_eq!(glr_detect(&[true], 0.05).unwrap(), None);
        assert!(glr_detect(&[], 0.05).is_err());
        assert!(GlrDetector::new(1.5).is_err());
    }

    #[test]
    fn detects_step_change() {
        let mut bits = vec![false; 100];
        bits.extend(std::iter::repeat(true).take(100));
        let n = glr_detect(&bits, 0.05).unwrap().expect("must detect");
        assert!(n > 100 && n <= 200);
        let mut det = GlrDetector::new(0.05).unwrap();
        let report = bits.iter().map(|&b| det.step(b)).find(|r| r.restart).unwrap();
        assert_eq!(report.t, n);
        assert_eq!(report.trigger_s, Some(101));
    }

    #[test]
    fn incremental_matches_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for case in 0..60 {
            let len = rng.random_range(1..200);
            let cut = rng.random_range(0..=len);
            let (p, q) = (rng.random::<f64>(), rng.random::<f64>());
            let bits: Vec<bool> = (0..len)
                .map(|i| rng.random_bool(if i < cut { p } else { q }))
                .collect();
            let mut det = GlrDetector::new(0.05).unwrap();
            let inc = bits.iter().map(|&b| det.step(b)).find(|r| r.restart).map(|r| r.t);
            assert_eq!(inc, glr_detect(&bits, 0.05).unwrap(), "case {case}");
            let mut det = GlrDetector::new(0.05).unwrap();
            for &b in &bits {
                det.step(b);
            }
            let (a, b) = (det.statistic().0, glr_statistic(&bits));
            assert!(a >= 0.0 && (a - b).abs() <= 1e-9 * (1.0 + b), "{a} vs {b}");
        }
    }
}
