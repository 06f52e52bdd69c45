//! Capacitated assortment optimization three ways: the parametric solver,
//! the LP reformulation and exhaustive enumeration.

use lumb::assortment::lp_build;
use lumb::simplex::Relation;
use lumb::{optimize_bruteforce, optimize_exact, optimize_lp, OptProblem};

fn main() -> lumb::Result<()> {
    let utilities = [0.9, 0.5, 1.4, 0.2, 0.7, 1.1];
    let rewards = [0.3, 0.9, 0.2, 1.0, 0.6, 0.4];
    for capacity in 1..=4 {
        let p = OptProblem::new(&utilities, &rewards, capacity)?;
        let exact = optimize_exact(&p)?;
        let lp = optimize_lp(&p)?;
        let brute = optimize_bruteforce(&p)?;
        println!(
            "K = {capacity}: exact {:?} ({:.6}), LP {:?} ({:.6}), enumeration {:?} ({:.6})",
            exact.assortment.items(),
            exact.value,
            lp.assortment.items(),
            lp.value,
            brute.assortment.items(),
            brute.value
        );
    }

    let p = OptProblem::new(&utilities, &rewards, 2)?;
    let program = lp_build(&p);
    println!(
        "LP for K = 2: {} variables, {} equality and {} inequality constraints",
        program.n_vars(),
        program.count(Relation::Eq),
        program.count(Relation::Le)
    );
    if let Some(w) = optimize_lp(&p)?.lp_weights {
        println!("weights w_0..w_N: {:.4?}", w);
    }

    // Adding items can lower the expected reward.
    println!("R({{1}}) = {:.4} vs R({{1, 2}}) = {:.4}", p.reward_of(&[1]), p.reward_of(&[1, 2]));
    Ok(())
}
