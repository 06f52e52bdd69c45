//! A single LUMB run: epochs, the ridge estimate and optimistic utilities.

use lumb::harness::{generate_instance, run_episode, true_optimum};
use lumb::{Lumb, LumbConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lumb::Result<()> {
    let (n, d, k, horizon) = (100, 5, 5, 50_000);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = generate_instance(n, d, &mut rng)?;
    let mut agent = Lumb::new(LumbConfig::fixed(1.0, k), inst.features(), inst.rewards(), d)?;

    let res = run_episode(&inst, &mut agent, k, horizon, 5_000, &mut rng)?;
    println!("optimal assortment {:?}, R(S*) = {:.4}", res.optimum.assortment.items(), res.optimum.value);
    println!("{:>7} {:>10} {:>10} {:>10}", "t", "regret", "theta_dev", "util_dev");
    for c in &res.metrics.checkpoints {
        println!("{:>7} {:>10.3} {:>10.4} {:>10.4}", c.t, c.cum_regret, c.theta_dev, c.util_dev);
    }
    println!("{} epochs closed", res.epochs.len());
    println!("θ* = {:.3?}", inst.theta_star());
    println!("θ  = {:.3?}", agent.theta());

    let last = res.epochs.last().expect("at least one epoch");
    println!("last epoch offered {:?}, picks {:?}", last.items.items(), last.picks);
    let best = true_optimum(&inst, k)?;
    for &i in best.assortment.items() {
        println!("item {i}: v = {:.3}, UCB = {:.3}", inst.utilities()[i], agent.ucb()[i]);
    }
    Ok(())
}
