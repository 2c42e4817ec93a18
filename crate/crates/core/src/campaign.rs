//! Monte Carlo campaigns over a node-count sweep.
//!
//! Node `k` of the scenario with `n` simulated nodes, iteration `i`, draws
//! from `derive_stream(master_seed, stream_key(&[n, i, k]))`. The stream
//! depends only on the scenario's node count, not its position in the
//! sweep, so scenarios are independent of each other. Receiver and traffic
//! choice do not enter the key: a baseline and an ACRDA run with the same
//! seed see the same transmissions.

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::engine::{derive_stream, stream_key};
use crate::metrics::{self, Aggregate, RunMetrics};
use crate::protocol::{Node, RunOutcome, Simulation, TraceRecord};
use crate::Error;

/// One line of the main results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub iteration: u32,
    pub receiver: &'static str,
    pub traffic: &'static str,
    pub n_sim: u32,
    pub n_reported: u64,
    pub transmitted: u64,
    pub succeeded: u64,
    pub success_rate: Option<f64>,
    pub throughput_pps: f64,
    pub goodput_pps: f64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario_id: String,
    pub n_sim: u32,
    pub runs: Vec<RunMetrics>,
    pub traces: Vec<Option<Vec<TraceRecord>>>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub receiver: &'static str,
    pub traffic: &'static str,
    pub master_seed: u64,
    pub grid_multiplier: u32,
    pub scenarios: Vec<ScenarioResult>,
}

impl CampaignResult {
    /// Rows sorted by (scenario order, iteration).
    pub fn rows(&self) -> Vec<ResultRow> {
        self.scenarios
            .iter()
            .flat_map(|s| {
                s.runs.iter().map(move |r| ResultRow {
                    scenario_id: s.scenario_id.clone(),
                    iteration: r.iteration,
                    receiver: self.receiver,
                    traffic: self.traffic,
                    n_sim: s.n_sim,
                    n_reported: u64::from(self.grid_multiplier) * u64::from(s.n_sim),
                    transmitted: r.transmitted,
                    succeeded: r.succeeded,
                    success_rate: metrics::network_success(r),
                    throughput_pps: metrics::throughput(r),
                    goodput_pps: metrics::goodput(r),
                    master_seed: self.master_seed,
                })
            })
            .collect()
    }
}

pub fn scenario_id(n_sim: u32) -> String {
    format!("n{n_sim}")
}

/// Builds the nodes of one iteration with their derived streams.
pub fn build_nodes(cfg: &ScenarioConfig, n_sim: u32, iteration: u32) -> Result<Vec<Node>, Error> {
    (0..n_sim)
        .map(|k| {
            Ok(Node {
                id: k,
                traffic: Some(cfg.traffic_model()?),
                rng: derive_stream(
                    cfg.master_seed,
                    stream_key(&[u64::from(n_sim), u64::from(iteration), u64::from(k)]),
                ),
            })
        })
        .collect()
}

/// Runs a single iteration of the scenario with `n_sim` nodes.
pub fn run_iteration(cfg: &ScenarioConfig, n_sim: u32, iteration: u32) -> Result<RunOutcome, Error> {
    let sim = Simulation::new(cfg.sim_params()?, build_nodes(cfg, n_sim, iteration)?)?;
    sim.run()
}

/// Runs every (scenario, iteration) pair on `workers` threads. Output does
/// not depend on `workers`.
pub fn run_campaign(cfg: &ScenarioConfig, workers: usize) -> Result<CampaignResult, Error> {
    cfg.validate()?;
    let jobs: Vec<(usize, u32, u32)> = cfg
        .nodes_sim
        .iter()
        .enumerate()
        .flat_map(|(s, &n)| (0..cfg.iterations).map(move |i| (s, n, i)))
        .collect();

    let run = |&(_, n, i): &(usize, u32, u32)| run_iteration(cfg, n, i);
    let outcomes: Vec<Result<RunOutcome, Error>> = if workers <= 1 {
        jobs.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    };

    type Group = (Vec<RunMetrics>, Vec<Option<Vec<TraceRecord>>>);
    let mut grouped: Vec<Group> = vec![(Vec::new(), Vec::new()); cfg.nodes_sim.len()];
    for ((s, _, i), outcome) in jobs.into_iter().zip(outcomes) {
        let mut outcome = outcome?;
        grouped[s].0.push(RunMetrics::from_outcome(i, &outcome));
        grouped[s].1.push(outcome.trace.take());
    }
    let scenarios = cfg
        .nodes_sim
        .iter()
        .zip(grouped)
        .map(|(&n, (runs, traces))| ScenarioResult {
            scenario_id: scenario_id(n),
            n_sim: n,
            aggregate: metrics::aggregate(&runs, n, cfg.grid_multiplier),
            runs,
            traces,
        })
        .collect();

    Ok(CampaignResult {
        receiver: cfg.receiver().name(),
        traffic: cfg.traffic.name(),
        master_seed: cfg.master_seed,
        grid_multiplier: cfg.grid_multiplier,
        scenarios,
    })
}
