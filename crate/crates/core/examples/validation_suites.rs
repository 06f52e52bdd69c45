//! Runs the statistical self-check suites and prints their reports.
//!
//! `cargo run --release --example validation_suites -- [suite ...]`

use lumb::validation::{run_suite, Suite};

fn main() -> lumb::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let suites: Vec<Suite> = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse()).collect::<lumb::Result<_>>()?
    };
    for suite in suites {
        println!("{}", run_suite(suite, 0)?);
    }
    Ok(())
}
