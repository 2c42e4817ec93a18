use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lrfhss_sim::campaign::run_campaign;
use lrfhss_sim::config::{parse_config, OutputFormat, ReceiverKind, ScenarioConfig};
use lrfhss_sim::output::{emit, EmitOptions};
use lrfhss_sim::Error;

/// Runs LR-FHSS network simulation campaigns and writes per-iteration results.
#[derive(Debug, Parser)]
#[command(name = "lrfhss-sim", version)]
struct Cli {
    /// Scenario file (`key = value` lines). Flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Simulated node counts, comma-separated (one scenario each).
    #[arg(long, value_name = "N[,N...]", value_delimiter = ',')]
    nodes: Option<Vec<u32>>,

    #[arg(long, value_name = "K")]
    iterations: Option<u32>,

    /// Simulated time per iteration.
    #[arg(long, value_name = "SECONDS")]
    sim_time: Option<f64>,

    /// exponential | uniform | constant_drift | markov2
    #[arg(long, value_name = "NAME")]
    traffic: Option<String>,

    /// baseline | acrda
    #[arg(long, value_name = "NAME")]
    receiver: Option<ReceiverKind>,

    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_name = "K")]
    workers: Option<usize>,

    /// Also write per-node tallies to `<output>_nodes.csv`.
    #[arg(long)]
    per_node: bool,

    /// Also write the fragment trace to `<output>_trace.csv`.
    #[arg(long)]
    trace: bool,

    /// Results file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,

    /// csv | json
    #[arg(long, value_name = "FORMAT")]
    format: Option<OutputFormat>,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(n) = &cli.nodes {
        cfg.nodes_sim = n.clone();
    }
    if let Some(k) = cli.iterations {
        cfg.iterations = k;
    }
    if let Some(t) = cli.sim_time {
        cfg.sim_time = t;
    }
    if let Some(name) = &cli.traffic {
        // Keep model parameters from the file when the name matches.
        let keep = cfg.traffic.name() == name.as_str();
        if !keep {
            cfg.traffic = name.parse()?;
        }
    }
    if let Some(r) = cli.receiver {
        cfg.receiver = r;
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.output {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    cfg.per_node |= cli.per_node;
    cfg.trace |= cli.trace;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = load(&cli)?;
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_campaign(&cfg, workers)?;
    let opts = EmitOptions {
        per_node: cfg.per_node,
        trace: cfg.trace,
    };
    if let Some(text) = emit(&result, cfg.format, cfg.output.as_deref(), opts)? {
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lrfhss-sim: {e}");
            ExitCode::FAILURE
        }
    }
}
