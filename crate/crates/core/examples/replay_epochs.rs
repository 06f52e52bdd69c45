//! Epoch logs are enough to rebuild the LUMB estimate exactly.

use lumb::agent::parse_epoch_log;
use lumb::harness::{run_seed, AgentKind, ExperimentConfig};
use lumb::Lumb;

fn main() -> lumb::Result<()> {
    let config = ExperimentConfig::new(AgentKind::Lumb, 30, 4, 3, 5_000, 1);
    let run = run_seed(&config, 0)?;

    let log: String = run.episode.epochs.iter().map(|e| e.to_json_line()).collect::<lumb::Result<Vec<_>>>()?.join("\n");
    println!("first epochs:\n{}", log.lines().take(3).collect::<Vec<_>>().join("\n"));

    let records = parse_epoch_log(&log)?;
    let inst = &run.instance;
    let replayed = Lumb::replay(config.lumb_config(), inst.features(), inst.rewards(), inst.dim(), &records)?;
    let live = run.episode.final_theta.expect("LUMB keeps a parameter estimate");
    let gap = live.iter().zip(replayed.theta()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("{} epochs replayed, max |θ_live − θ_replay| = {gap:.2e}", records.len());
    Ok(())
}
