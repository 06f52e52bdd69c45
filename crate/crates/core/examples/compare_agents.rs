//! LUMB against UCB-MNL, Thompson-Beta and Thompson-Corr on shared seeds,
//! with results written to disk and exported for plotting.
//!
//! `cargo run --release --example compare_agents -- [output dir]`

use std::path::PathBuf;

use lumb::harness::{run_experiment_with_jobs, AgentKind, ExperimentConfig};
use lumb::plot::export_plot;

fn main() -> lumb::Result<()> {
    let root = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("lumb-compare"), PathBuf::from);
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut dirs = Vec::new();
    println!("{:>8} {:>14} {:>10}", "agent", "norm regret", "std");
    for agent in AgentKind::ALL {
        let config = ExperimentConfig {
            stride: 1000,
            output: root.join(agent.name()),
            ..ExperimentConfig::new(agent, 200, 5, 5, 20_000, 5)
        };
        let res = run_experiment_with_jobs(&config, jobs)?;
        res.write(&config, &config.output)?;
        let last = res.summary.last().expect("nonempty horizon");
        println!("{:>8} {:>14.2} {:>10.2}", agent.name(), last.mean[1], last.std[1]);
        dirs.push(config.output);
    }
    for file in export_plot(&dirs, &root.join("plots"))? {
        println!("wrote {}", file.display());
    }
    Ok(())
}
