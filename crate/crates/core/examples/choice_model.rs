//! Choice probabilities, sampled choices and one simulated epoch.

use lumb::harness::generate_instance;
use lumb::mnl::{choice_probabilities, expected_reward, sample_choice};
use lumb::{Assortment, ChoiceOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lumb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inst = generate_instance(8, 3, &mut rng)?;
    let s = Assortment::new(vec![1, 4, 6])?;

    let p = choice_probabilities(&inst, &s)?;
    for (&i, pi) in s.items().iter().zip(&p.items) {
        println!("item {i}: v = {:.3}, r = {:.3}, P = {pi:.4}", inst.utilities()[i], inst.rewards()[i]);
    }
    println!("no choice: P = {:.4}", p.none);
    println!("expected reward R(S) = {:.4}", expected_reward(&inst, &s, inst.utilities())?);

    let mut counts = vec![0u64; s.len() + 1];
    let n = 100_000;
    for _ in 0..n {
        match sample_choice(&inst, &s, &mut rng)? {
            ChoiceOutcome::Item(i) => counts[s.position(i).unwrap()] += 1,
            ChoiceOutcome::NoChoice => counts[s.len()] += 1,
        }
    }
    let freq: Vec<String> = counts.iter().map(|&c| format!("{:.4}", c as f64 / n as f64)).collect();
    println!("empirical frequencies over {n} draws: [{}]", freq.join(", "));

    // An epoch keeps offering S until the user walks away.
    let mut epoch = Vec::new();
    loop {
        let c = sample_choice(&inst, &s, &mut rng)?;
        epoch.push(c);
        if c == ChoiceOutcome::NoChoice {
            break;
        }
    }
    println!("one epoch: {epoch:?}");
    Ok(())
}
