//! Every agent honours the epoch protocol: the assortment stays fixed until
//! a no-choice outcome, records count picks exactly, and foreign items are
//! rejected.

use lumb::baselines::{Baseline, BaselineKind};
use lumb::harness::{generate_instance, AgentKind, ExperimentConfig};
use lumb::{Agent, ChoiceOutcome, Error, FixedAgent, Lumb, LumbConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn agents(features: &[f64], rewards: &[f64], dim: usize) -> Vec<Box<dyn Agent>> {
    let mut out: Vec<Box<dyn Agent>> =
        vec![Box::new(Lumb::new(LumbConfig::fixed(1.0, 3), features, rewards, dim).unwrap())];
    for kind in [BaselineKind::UcbMnl, BaselineKind::TsBeta, BaselineKind::TsCorr] {
        out.push(Box::new(Baseline::new(kind, rewards, 3, 11).unwrap()));
    }
    out
}

#[test]
fn scripted_epochs_are_recorded_faithfully() {
    let inst = generate_instance(12, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    for mut agent in agents(inst.features(), inst.rewards(), 3) {
        for l in 1..=20usize {
            let s = agent.assortment().unwrap().clone();
            assert!(s.len() <= 3, "{} offered {} items", agent.name(), s.len());
            let mut expected = vec![0u64; s.len()];
            // Pick each offered item (l mod 3) times, then leave.
            for (k, &i) in s.items().iter().enumerate() {
                for _ in 0..(l + k) % 3 {
                    let now = agent.assortment().unwrap().clone();
                    assert_eq!(now, s, "{} switched mid-epoch", agent.name());
                    assert!(agent.observe(ChoiceOutcome::Item(i)).unwrap().is_none());
                    expected[k] += 1;
                }
            }
            agent.assortment().unwrap();
            let rec = agent.observe(ChoiceOutcome::NoChoice).unwrap().expect("epoch closes");
            assert_eq!(rec.l, l);
            assert_eq!(rec.items, s);
            assert_eq!(rec.picks, expected);
            assert_eq!(rec.length, expected.iter().sum::<u64>() + 1);
        }
    }
}

#[test]
fn foreign_items_are_protocol_errors() {
    let inst = generate_instance(12, 3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    for mut agent in agents(inst.features(), inst.rewards(), 3) {
        let s = agent.assortment().unwrap().clone();
        let foreign = (0..12).find(|i| !s.contains(*i)).unwrap();
        assert!(matches!(agent.observe(ChoiceOutcome::Item(foreign)), Err(Error::Protocol(_))));
    }
}

#[test]
fn fixed_agent_cycles_its_schedule() {
    let schedule = vec![lumb::Assortment::new(vec![0]).unwrap(), lumb::Assortment::new(vec![1, 2]).unwrap()];
    let mut agent = FixedAgent::new("cycle", schedule.clone()).unwrap();
    for l in 0..6 {
        assert_eq!(agent.assortment().unwrap(), &schedule[l % 2]);
        agent.observe(ChoiceOutcome::NoChoice).unwrap().unwrap();
    }
}

#[test]
fn built_agents_carry_their_names() {
    let inst = generate_instance(10, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    for kind in AgentKind::ALL {
        let config = ExperimentConfig::new(kind, 10, 2, 2, 100, 1);
        assert_eq!(config.build_agent(&inst, 5).unwrap().name(), kind.name());
    }
}
