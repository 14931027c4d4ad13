//! Seeded, paired replications of an algorithm suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{EnvironmentSpec, ExperimentConfig};
use crate::env::{generate_instance, load_instance_csv, RegretTrace, RewardTable, RiskTable, SwitchingBanditInstance};
use crate::error::{Error, Result};
use crate::policies::{simulate, Algorithm, PolicyConfig};

/// ChaCha stream of the policies' exploration coins. Streams `1..=A` of the
/// same seed feed the reward table.
const ACTION_STREAM: u64 = 1 << 32;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RISKBANDIT_THREADS";

/// What happened to one algorithm in one replication, beyond its regret.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub replication: usize,
    pub t: usize,
    pub arm: usize,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Restart,
    ChangePoint,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Restart => "restart",
            EventKind::ChangePoint => "change_point",
        }
    }
}

/// Aggregated results of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Mean cumulative regret at `t = 1..=T`.
    pub mean: Vec<f64>,
    /// Sample standard deviation across replications (0 with one replication).
    pub std: Vec<f64>,
    /// Final cumulative regret of every replication.
    pub finals: Vec<f64>,
    /// Restart count of every replication, summed over arms.
    pub restarts: Vec<usize>,
    /// Mean fraction of forced-exploration pulls.
    pub forced_fraction: f64,
    pub events: Vec<Event>,
}

impl AlgorithmSummary {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.std.last().copied().unwrap_or(0.0)
    }

    pub fn mean_restarts(&self) -> f64 {
        self.restarts.iter().sum::<usize>() as f64 / self.restarts.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub arms: usize,
    pub horizon: usize,
    pub replications: usize,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl RunSummary {
    pub fn get(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }
}

/// The instance replication `i` runs on, with its seed.
pub fn replication_instance(config: &ExperimentConfig, replication: usize) -> Result<SwitchingBanditInstance> {
    match &config.environment {
        EnvironmentSpec::Synthetic(params) => {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(config, replication));
            generate_instance(params, &mut rng)
        }
        EnvironmentSpec::File(path) => load_instance_csv(path),
    }
}

pub fn replication_seed(config: &ExperimentConfig, replication: usize) -> u64 {
    config.base_seed.wrapping_add(replication as u64)
}

/// Regret, `(arm, t)` restarts and forced fraction of one algorithm.
type AlgorithmRun = (RegretTrace, Vec<(usize, usize)>, f64);

struct ReplicationResult {
    per_algorithm: Vec<AlgorithmRun>,
    changes: Vec<(usize, usize)>,
}

fn run_replication(
    config: &ExperimentConfig,
    replication: usize,
    fixed: Option<&SwitchingBanditInstance>,
) -> Result<ReplicationResult> {
    let owned;
    let instance = match fixed {
        Some(inst) => inst,
        None => {
            owned = replication_instance(config, replication)?;
            &owned
        }
    };
    let (arms, horizon) = (instance.num_arms(), instance.horizon());
    let changes = instance.change_count();
    let seed = replication_seed(config, replication);
    let table = RiskTable::new(instance, &config.measure)?;
    let rewards = RewardTable::new(arms, horizon, seed);
    let mut per_algorithm = Vec::with_capacity(config.algorithms.len());
    for spec in &config.algorithms {
        let cfg: PolicyConfig = config.policy_config(spec, arms, changes, horizon)?;
        let mut policy = spec.algorithm.build(arms, &cfg, &table)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ACTION_STREAM);
        let trace = simulate(policy.as_mut(), instance, &rewards, &mut rng);
        let regret = RegretTrace::from_table(&trace.arms, &table)?;
        let forced = trace.forced_fraction();
        per_algorithm.push((regret, trace.restarts, forced));
    }
    Ok(ReplicationResult {
        per_algorithm,
        changes: instance.changes().iter().map(|c| (c.t, c.arm)).collect(),
    })
}

/// Worker count: `RISKBANDIT_THREADS` if set to a positive integer, else the
/// machine's parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run every replication and aggregate. Does no file I/O besides reading an
/// instance file; see [`super::write_outputs`].
///
/// Replications run in parallel in batches and are folded in replication
/// order, so the result does not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    // Fail on an infeasible or unreadable environment before any run starts.
    let first = replication_instance(config, 0)?;
    let fixed = matches!(config.environment, EnvironmentSpec::File(_)).then_some(&first);
    let (arms, horizon) = (first.num_arms(), first.horizon());
    for spec in &config.algorithms {
        config.policy_config(spec, arms, first.change_count(), horizon)?;
    }

    let workers = worker_count();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let n_algos = config.algorithms.len();
    let mut acc: Vec<Accumulator> = (0..n_algos).map(|_| Accumulator::new(horizon)).collect();
    let mut events: Vec<Vec<Event>> = vec![Vec::new(); n_algos];
    let mut restarts: Vec<Vec<usize>> = vec![Vec::new(); n_algos];
    let mut forced: Vec<f64> = vec![0.0; n_algos];

    let batch = workers.max(1) * 2;
    let mut start = 0;
    while start < config.replications {
        let end = (start + batch).min(config.replications);
        let results: Vec<Result<ReplicationResult>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_replication(config, i, fixed))
                .collect()
        });
        for (offset, result) in results.into_iter().enumerate() {
            let replication = start + offset;
            let result = result?;
            for (j, (regret, rs, f)) in result.per_algorithm.into_iter().enumerate() {
                if regret.cumulative.len() != horizon {
                    return Err(Error::Config(
                        "all replications must share one horizon".into(),
                    ));
                }
                acc[j].push(&regret.cumulative);
                restarts[j].push(rs.len());
                forced[j] += f;
                events[j].extend(result.changes.iter().map(|&(t, arm)| Event {
                    replication,
                    t,
                    arm,
                    kind: EventKind::ChangePoint,
                }));
                events[j].extend(rs.iter().map(|&(arm, t)| Event {
                    replication,
                    t,
                    arm,
                    kind: EventKind::Restart,
                }));
            }
        }
        start = end;
    }

    let algorithms = config
        .algorithms
        .iter()
        .zip(acc)
        .zip(events)
        .zip(restarts)
        .zip(forced)
        .map(|((((spec, acc), mut ev), rs), f)| {
            ev.sort_by_key(|e| (e.replication, e.t, e.kind == EventKind::Restart, e.arm));
            let (mean, std, finals) = acc.finish();
            AlgorithmSummary {
                algorithm: spec.algorithm,
                mean,
                std,
                finals,
                restarts: rs,
                forced_fraction: f / config.replications as f64,
                events: ev,
            }
        })
        .collect();
    Ok(RunSummary {
        arms,
        horizon,
        replications: config.replications,
        algorithms,
    })
}

/// Running mean and variance per step (Welford), folded in a fixed order.
struct Accumulator {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    finals: Vec<f64>,
}

impl Accumulator {
    fn new(horizon: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; horizon],
            m2: vec![0.0; horizon],
            finals: Vec::new(),
        }
    }

    fn push(&mut self, xs: &[f64]) {
        self.count += 1.0;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(xs) {
            let d = x - *m;
            *m += d / self.count;
            *s += d * (x - *m);
        }
        self.finals.push(xs.last().copied().unwrap_or(0.0));
    }

    fn finish(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let denom = (self.count - 1.0).max(1.0);
        let std = self.m2.iter().map(|s| (s / denom).max(0.0).sqrt()).collect();
        (self.mean, std, self.finals)
    }
}
