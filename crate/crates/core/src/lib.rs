//! Simulation laboratory for multinomial-logit bandits with linear item
//! utilities.
//!
//! The crate is organised bottom-up:
//!
//! * [`mnl`]: the ground-truth choice model (probabilities, sampling,
//!   expected reward, pseudo-regret).
//! * [`assortment`]: exact capacitated assortment optimization, its LP form
//!   and a brute-force oracle, backed by the dense solver in [`simplex`].
//! * [`estimator`] and [`lumb`]: the LUMB agent, i.e. epoch counting, ridge
//!   regression on per-epoch pick counts and optimistic utilities.
//! * [`baselines`]: UCB-MNL, Thompson-Beta and Thompson-Corr behind the
//!   same [`agent::Agent`] contract.
//! * [`harness`]: synthetic instances, the episode loop, metrics and
//!   multi-seed experiments with on-disk results.
//! * [`validation`] and [`plot`]: statistical self-checks and plot-ready
//!   exports used by the `lumb` command-line tool.

pub mod agent;
pub mod assortment;
pub mod baselines;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod lumb;
pub mod mnl;
pub mod plot;
pub mod simplex;
pub mod stats;
pub mod validation;

pub use agent::{Agent, FixedAgent};
pub use assortment::{optimize_bruteforce, optimize_exact, optimize_lp, OptProblem, OptSolution};
pub use error::{Error, Result};
pub use lumb::{AlphaMode, EpochRecord, Lumb, LumbConfig};
pub use mnl::{Assortment, ChoiceOutcome, ProblemInstance};
