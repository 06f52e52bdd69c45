//! The epoch protocol every agent follows.
//!
//! An agent offers one assortment per epoch. The same assortment is offered
//! at every step until the user picks nothing; only then does the epoch close
//! and the agent update its statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mnl::{Assortment, ChoiceOutcome};

/// One closed epoch: the offered assortment, how often each offered item was
/// picked (aligned with `items`), and the number of steps including the
/// terminating no-choice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub l: usize,
    pub items: Assortment,
    pub picks: Vec<u64>,
    pub length: u64,
}

impl EpochRecord {
    pub fn validate(&self, n_items: usize) -> Result<()> {
        self.items.validate(n_items, None)?;
        if self.picks.len() != self.items.len() {
            return Err(Error::Protocol(format!(
                "epoch {}: {} pick counts for {} items",
                self.l,
                self.picks.len(),
                self.items.len()
            )));
        }
        if self.picks.iter().sum::<u64>() + 1 != self.length {
            return Err(Error::Protocol(format!(
                "epoch {}: picks sum to {} but length is {}",
                self.l,
                self.picks.iter().sum::<u64>(),
                self.length
            )));
        }
        Ok(())
    }

    /// Picks of `item` in this epoch; 0 when it was not offered.
    pub fn picks_of(&self, item: usize) -> u64 {
        self.items.position(item).map_or(0, |p| self.picks[p])
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Reads a JSON-lines epoch log.
pub fn parse_epoch_log(text: &str) -> Result<Vec<EpochRecord>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}

pub trait Agent {
    fn name(&self) -> &str;

    /// Assortment for the current step. Must stay fixed until the epoch closes.
    fn assortment(&mut self) -> Result<&Assortment>;

    /// Feeds back one step's outcome; returns the record when it closed the epoch.
    fn observe(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>>;

    /// Current estimate of the utility parameter, for agents that have one.
    fn theta_estimate(&self) -> Option<&[f64]> {
        None
    }

    /// Current point estimates of all item utilities, if the agent keeps any.
    fn utility_estimates(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Bookkeeping for the open epoch, shared by all agents.
#[derive(Debug, Clone)]
pub struct EpochTracker {
    index: usize,
    current: Option<Assortment>,
    counts: Vec<u64>,
    length: u64,
}

impl Default for EpochTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl EpochTracker {
    pub fn new() -> Self {
        Self { index: 1, current: None, counts: Vec::new(), length: 0 }
    }

    /// Index `l` of the open (or next) epoch, starting at 1.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn current(&self) -> Option<&Assortment> {
        self.current.as_ref()
    }

    /// Per-item picks so far in the open epoch, aligned with its items.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Returns the open epoch's assortment, opening one with `select` if needed.
    pub fn get_or_open(&mut self, select: impl FnOnce() -> Result<Assortment>) -> Result<&Assortment> {
        if self.current.is_none() {
            let s = select()?;
            self.counts = vec![0; s.len()];
            self.length = 0;
            self.current = Some(s);
        }
        Ok(self.current.as_ref().expect("epoch opened above"))
    }

    pub fn record(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>> {
        let Some(current) = self.current.as_ref() else {
            return Err(Error::Protocol("observation without an open epoch".into()));
        };
        match outcome {
            ChoiceOutcome::Item(i) => {
                let Some(pos) = current.position(i) else {
                    return Err(Error::Protocol(format!("item {i} chosen but not offered in {:?}", current.items())));
                };
                self.counts[pos] += 1;
                self.length += 1;
                Ok(None)
            }
            ChoiceOutcome::NoChoice => {
                let record = EpochRecord {
                    l: self.index,
                    items: self.current.take().expect("checked above"),
                    picks: std::mem::take(&mut self.counts),
                    length: self.length + 1,
                };
                self.index += 1;
                self.length = 0;
                Ok(Some(record))
            }
        }
    }
}

/// Offers a fixed cyclic schedule of assortments, one per epoch.
///
/// A one-entry schedule gives the oracle agent (offer `S*` forever) or the
/// empty agent; longer schedules give non-adaptive exploration policies.
#[derive(Debug, Clone)]
pub struct FixedAgent {
    name: String,
    schedule: Vec<Assortment>,
    tracker: EpochTracker,
}

impl FixedAgent {
    pub fn new(name: impl Into<String>, schedule: Vec<Assortment>) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::Config("fixed agent needs at least one assortment".into()));
        }
        Ok(Self { name: name.into(), schedule, tracker: EpochTracker::new() })
    }

    pub fn constant(name: impl Into<String>, s: Assortment) -> Self {
        Self { name: name.into(), schedule: vec![s], tracker: EpochTracker::new() }
    }
}

impl Agent for FixedAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn assortment(&mut self) -> Result<&Assortment> {
        let next = self.schedule[(self.tracker.index() - 1) % self.schedule.len()].clone();
        self.tracker.get_or_open(|| Ok(next))
    }

    fn observe(&mut self, outcome: ChoiceOutcome) -> Result<Option<EpochRecord>> {
        self.tracker.record(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> Assortment {
        Assortment::new(items.to_vec()).unwrap()
    }

    #[test]
    fn immediate_no_choice_closes_empty_epoch() {
        let mut t = EpochTracker::new();
        t.get_or_open(|| Ok(set(&[1, 4]))).unwrap();
        let rec = t.record(ChoiceOutcome::NoChoice).unwrap().unwrap();
        assert_eq!(rec, EpochRecord { l: 1, items: set(&[1, 4]), picks: vec![0, 0], length: 1 });
        assert_eq!(t.index(), 2);
        rec.validate(5).unwrap();
    }

    #[test]
    fn picks_are_counted_per_item() {
        let mut t = EpochTracker::new();
        t.get_or_open(|| Ok(set(&[2, 7]))).unwrap();
        for o in [ChoiceOutcome::Item(2), ChoiceOutcome::Item(2), ChoiceOutcome::Item(7)] {
            assert!(t.record(o).unwrap().is_none());
        }
        let rec = t.record(ChoiceOutcome::NoChoice).unwrap().unwrap();
        assert_eq!(rec.picks_of(2), 2);
        assert_eq!(rec.picks_of(7), 1);
        assert_eq!(rec.picks_of(3), 0);
        assert_eq!(rec.length, 4);
    }

    #[test]
    fn foreign_item_is_a_protocol_violation() {
        let mut t = EpochTracker::new();
        t.get_or_open(|| Ok(set(&[0]))).unwrap();
        assert!(matches!(t.record(ChoiceOutcome::Item(3)), Err(Error::Protocol(_))));
        let mut fresh = EpochTracker::new();
        assert!(matches!(fresh.record(ChoiceOutcome::NoChoice), Err(Error::Protocol(_))));
    }

    #[test]
    fn record_validation_catches_bad_sums() {
        let rec = EpochRecord { l: 1, items: set(&[0]), picks: vec![3], length: 3 };
        assert!(rec.validate(1).is_err());
    }

    #[test]
    fn epoch_log_lines_round_trip() {
        let recs = vec![
            EpochRecord { l: 1, items: set(&[0, 3]), picks: vec![1, 0], length: 2 },
            EpochRecord { l: 2, items: set(&[]), picks: vec![], length: 1 },
        ];
        let text: String = recs.iter().map(|r| r.to_json_line().unwrap() + "\n").collect();
        assert!(text.starts_with(r#"{"l":1,"items":[0,3],"picks":[1,0],"length":2}"#));
        assert_eq!(parse_epoch_log(&text).unwrap(), recs);
    }

    #[test]
    fn fixed_agent_cycles_its_schedule() {
        let mut a = FixedAgent::new("cycle", vec![set(&[0]), set(&[1])]).unwrap();
        assert_eq!(a.assortment().unwrap(), &set(&[0]));
        a.observe(ChoiceOutcome::Item(0)).unwrap();
        assert_eq!(a.assortment().unwrap(), &set(&[0]));
        a.observe(ChoiceOutcome::NoChoice).unwrap();
        assert_eq!(a.assortment().unwrap(), &set(&[1]));
    }
}
