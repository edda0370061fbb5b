//! Score distribution of a classifier that declares "relevant" with
//! probability one half, independently per example.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::{compute_metrics, Metric, MetricCounts};
use crate::stats;

pub const DEFAULT_SIMULATIONS: usize = 100;

/// Number of set bits among `n` fair coin flips.
fn heads(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let mut left = n;
    let mut count = 0u64;
    while left >= 64 {
        count += u64::from(rng.next_u64().count_ones());
        left -= 64;
    }
    if left > 0 {
        let mask = (1u64 << left) - 1;
        count += u64::from((rng.next_u64() & mask).count_ones());
    }
    count
}

/// Per-simulation generator: one ChaCha stream per simulation index.
fn sim_rng(seed: u64, sim: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sim as u64);
    rng
}

/// Counts of one simulated coin-flip classifier.
pub fn simulate_counts(positives: u64, total: u64, seed: u64, sim: usize) -> MetricCounts {
    let negatives = total - positives;
    let mut rng = sim_rng(seed, sim);
    let tp = heads(&mut rng, positives);
    let fp = heads(&mut rng, negatives);
    MetricCounts::new(tp, negatives - fp, fp, positives - tp)
}

/// The 99th percentile of each metric; `None` where the metric is undefined
/// in every simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineP99 {
    pub values: Vec<(Metric, Option<f64>)>,
}

impl BaselineP99 {
    pub fn get(&self, m: Metric) -> Option<f64> {
        self.values.iter().find(|(k, _)| *k == m).and_then(|(_, v)| *v)
    }
}

/// Simulated scores per metric, in simulation order.
pub fn simulated_scores(positives: u64, total: u64, sims: usize, seed: u64) -> Vec<(Metric, Vec<f64>)> {
    let reports: Vec<_> = (0..sims)
        .map(|s| compute_metrics(&simulate_counts(positives, total, seed, s)))
        .collect();
    Metric::ALL
        .iter()
        .map(|&m| (m, reports.iter().filter_map(|r| r.get(m)).collect()))
        .collect()
}

fn p99_of(scores: Vec<(Metric, Vec<f64>)>) -> BaselineP99 {
    BaselineP99 {
        values: scores
            .into_iter()
            .map(|(m, v)| (m, (!v.is_empty()).then(|| stats::percentile(&v, 99.0))))
            .collect(),
    }
}

/// p99 of every metric for a label with `positives` out of `total` examples.
pub fn random_baseline_p99(positives: u64, total: u64, sims: usize, seed: u64) -> BaselineP99 {
    assert!(total > 0 && positives <= total);
    p99_of(simulated_scores(positives, total, sims, seed))
}

/// p99 of the label-averaged metrics: each simulation flips coins for every
/// label and averages the defined per-label values.
pub fn random_baseline_p99_average(labels: &[(u64, u64)], sims: usize, seed: u64) -> BaselineP99 {
    let per_label: Vec<Vec<_>> = labels
        .iter()
        .enumerate()
        .map(|(i, &(p, n))| {
            let label_seed = seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (0..sims)
                .map(|s| compute_metrics(&simulate_counts(p, n, label_seed, s)))
                .collect()
        })
        .collect();
    let scores = Metric::ALL
        .iter()
        .map(|&m| {
            let v: Vec<f64> = (0..sims)
                .filter_map(|s| {
                    let vals: Vec<f64> = per_label.iter().filter_map(|r| r[s].get(m)).collect();
                    (!vals.is_empty()).then(|| stats::mean(&vals))
                })
                .collect();
            (m, v)
        })
        .collect();
    p99_of(scores)
}
