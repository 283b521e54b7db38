//! AAC iteration on the model pair, with its shadow sequence and rate.

use aac_calculus::{iterate, ModelInstance, Point};

fn main() -> aac_calculus::Result<()> {
    let pair = ModelInstance::worked().split_pair();
    let trace = iterate(&pair, &Point::new(vec![2.0, 0.0])?, 60, 1e-10)?;
    for (n, r) in trace.residuals.iter().enumerate().step_by(8) {
        println!("{n:>3}  x = {}  J x = {}  r = {r:.3e}", trace.iterates[n], trace.shadows[n]);
    }
    println!("converged = {} after {} steps at {}", trace.converged, trace.steps(), trace.last());
    println!("rate ~ {:.4}", trace.rate.unwrap_or(f64::NAN));
    Ok(())
}
