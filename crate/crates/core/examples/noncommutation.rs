//! Searching for points where two compositions disagree.

use aac_calculus::closed_form::{compositional_eval_with, noncommutation_gap, Noncommuting};
use aac_calculus::harness::find_witness;
use aac_calculus::{ModelInstance, Point};

fn main() -> aac_calculus::Result<()> {
    let inst = ModelInstance::worked();
    let pair = inst.split_pair();
    for which in [Noncommuting::Ex16, Noncommuting::Ex19] {
        let (f, g) = which.sides();
        let lhs = |x: &Point| compositional_eval_with(&pair, f, x);
        let rhs = |x: &Point| compositional_eval_with(&pair, g, x);
        match find_witness(&lhs, &rhs, 2, 100, 0, 1e-6)? {
            Some((x, gap)) => println!("{} {f} vs {g}: witness {x} gap {gap:.4}", which.tag()),
            None => println!("{} {f} vs {g}: no witness in 100 samples", which.tag()),
        }
        let at = Point::new(vec![2.0, 0.0])?;
        println!("   gap at (2, 0): {:.3e}", noncommutation_gap(&inst, which, &at)?);
    }
    Ok(())
}
