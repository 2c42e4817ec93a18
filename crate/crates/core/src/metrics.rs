//! Reported quantities: network success, offered throughput and goodput,
//! per-node success CDF, and aggregation over iterations.
//!
//! Two success averages are kept apart: `mean_success` is the mean over
//! iterations of each run's `succeeded / transmitted`; `pooled_success` is
//! `sum(succeeded) / sum(transmitted)` over all runs.

use serde::Serialize;

use crate::protocol::RunOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub node_id: u32,
    pub transmitted: u64,
    pub succeeded: u64,
}

impl NodeRecord {
    pub fn success(&self) -> Option<f64> {
        ratio(self.succeeded, self.transmitted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub iteration: u32,
    pub transmitted: u64,
    pub succeeded: u64,
    /// Simulated seconds.
    pub sim_time: f64,
    pub per_node: Vec<NodeRecord>,
}

impl RunMetrics {
    pub fn from_outcome(iteration: u32, outcome: &RunOutcome) -> Self {
        let per_node: Vec<NodeRecord> = outcome
            .per_node
            .iter()
            .enumerate()
            .map(|(i, t)| NodeRecord {
                node_id: i as u32,
                transmitted: t.transmitted,
                succeeded: t.succeeded,
            })
            .collect();
        RunMetrics {
            iteration,
            transmitted: per_node.iter().map(|n| n.transmitted).sum(),
            succeeded: per_node.iter().map(|n| n.succeeded).sum(),
            sim_time: outcome.horizon.as_secs_f64(),
            per_node,
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `succeeded / transmitted`, absent when nothing was transmitted.
pub fn network_success(run: &RunMetrics) -> Option<f64> {
    ratio(run.succeeded, run.transmitted)
}

/// Offered load in packets per second.
pub fn throughput(run: &RunMetrics) -> f64 {
    if run.sim_time > 0.0 {
        run.transmitted as f64 / run.sim_time
    } else {
        0.0
    }
}

/// Decoded packets per second.
pub fn goodput(run: &RunMetrics) -> f64 {
    if run.sim_time > 0.0 {
        run.succeeded as f64 / run.sim_time
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub value: f64,
    pub cdf: f64,
}

/// Pooled per-node success ratios, sorted, with the empirical CDF `i / n`.
/// Nodes that transmitted nothing contribute no sample.
pub fn node_success_cdf(runs: &[RunMetrics]) -> Vec<CdfPoint> {
    let samples = node_success_samples(runs);
    let n = samples.len() as f64;
    samples
        .into_iter()
        .enumerate()
        .map(|(i, value)| CdfPoint {
            value,
            cdf: (i + 1) as f64 / n,
        })
        .collect()
}

pub fn node_success_samples(runs: &[RunMetrics]) -> Vec<f64> {
    let mut samples: Vec<f64> = runs
        .iter()
        .flat_map(|r| r.per_node.iter().filter_map(NodeRecord::success))
        .collect();
    samples.sort_by(f64::total_cmp);
    samples
}

/// Mean and sample (n - 1) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_and_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let (_, sd) = mean_and_stddev(xs);
    sd * sd
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub iterations: usize,
    pub n_sim: u32,
    pub n_reported: u64,
    pub transmitted: u64,
    pub succeeded: u64,
    /// Mean over iterations of the per-run success ratio.
    pub mean_success: f64,
    pub success_stddev: f64,
    /// Ratio of sums over all iterations.
    pub pooled_success: f64,
    pub mean_throughput_pps: f64,
    pub mean_goodput_pps: f64,
    #[serde(skip)]
    pub cdf_samples: Vec<f64>,
}

pub fn aggregate(runs: &[RunMetrics], n_sim: u32, grid_multiplier: u32) -> Aggregate {
    assert!(!runs.is_empty(), "aggregate needs at least one run");
    let successes: Vec<f64> = runs.iter().filter_map(network_success).collect();
    let (mean_success, success_stddev) = mean_and_stddev(&successes);
    let throughputs: Vec<f64> = runs.iter().map(throughput).collect();
    let goodputs: Vec<f64> = runs.iter().map(goodput).collect();
    let transmitted = runs.iter().map(|r| r.transmitted).sum();
    let succeeded = runs.iter().map(|r| r.succeeded).sum();
    Aggregate {
        iterations: runs.len(),
        n_sim,
        n_reported: u64::from(grid_multiplier) * u64::from(n_sim),
        transmitted,
        succeeded,
        mean_success,
        success_stddev,
        pooled_success: ratio(succeeded, transmitted).unwrap_or(f64::NAN),
        mean_throughput_pps: mean_and_stddev(&throughputs).0,
        mean_goodput_pps: mean_and_stddev(&goodputs).0,
        cdf_samples: node_success_samples(runs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(transmitted: u64, succeeded: u64, sim_time: f64) -> RunMetrics {
        RunMetrics {
            iteration: 0,
            transmitted,
            succeeded,
            sim_time,
            per_node: vec![NodeRecord {
                node_id: 0,
                transmitted,
                succeeded,
            }],
        }
    }

    #[test]
    fn success_ratio() {
        assert_eq!(network_success(&run(100, 80, 1.0)), Some(0.8));
        assert_eq!(network_success(&run(100, 0, 1.0)), Some(0.0));
        assert_eq!(network_success(&run(0, 0, 1.0)), None);
    }

    #[test]
    fn throughput_values() {
        assert!((throughput(&run(100, 50, 3600.0)) - 0.027_777_8).abs() < 1e-6);
        assert!((goodput(&run(100, 50, 3600.0)) - 0.013_888_9).abs() < 1e-6);
        assert_eq!(throughput(&run(0, 0, 3600.0)), 0.0);
    }

    #[test]
    fn cdf_example() {
        let r = RunMetrics {
            iteration: 0,
            transmitted: 5,
            succeeded: 3,
            sim_time: 1.0,
            per_node: vec![
                NodeRecord {
                    node_id: 0,
                    transmitted: 1,
                    succeeded: 1,
                },
                NodeRecord {
                    node_id: 1,
                    transmitted: 2,
                    succeeded: 1,
                },
                NodeRecord {
                    node_id: 2,
                    transmitted: 2,
                    succeeded: 1,
                },
                NodeRecord {
                    node_id: 3,
                    transmitted: 0,
                    succeeded: 0,
                },
            ],
        };
        let cdf = node_success_cdf(&[r]);
        let got: Vec<(f64, f64)> = cdf.iter().map(|p| (p.value, p.cdf)).collect();
        assert_eq!(got, vec![(0.5, 1.0 / 3.0), (0.5, 2.0 / 3.0), (1.0, 1.0)]);
    }

    #[test]
    fn degenerate_cdf() {
        let cdf = node_success_cdf(&[run(5, 5, 1.0), run(3, 3, 1.0)]);
        assert!(cdf.iter().all(|p| p.value == 1.0));
        assert_eq!(cdf.last().unwrap().cdf, 1.0);
    }

    #[test]
    fn aggregate_single_and_pair() {
        let a = aggregate(&[run(10, 8, 100.0)], 1, 8);
        assert_eq!(a.mean_success, 0.8);
        assert_eq!(a.success_stddev, 0.0);
        assert_eq!(a.n_reported, 8);

        let a = aggregate(&[run(10, 8, 100.0), run(10, 6, 100.0)], 1, 8);
        assert!((a.mean_success - 0.7).abs() < 1e-12);
        assert!((a.success_stddev - 0.141_421_356).abs() < 1e-8);
        assert!((a.mean_throughput_pps - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pooled_is_ratio_of_sums() {
        let a = aggregate(&[run(10, 10, 1.0), run(30, 0, 1.0)], 1, 1);
        assert_eq!(a.pooled_success, 0.25);
        assert_eq!(a.mean_success, 0.5);
    }
}
