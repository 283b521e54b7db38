//! Closed-form constants and operators of the model pair, next to composition.

use aac_calculus::closed_form::{closed_form_eval, compositional_eval, constants};
use aac_calculus::{ASign, ClosedFormId, ModelInstance, Point};

fn main() -> aac_calculus::Result<()> {
    let inst = ModelInstance::worked();
    let c = constants(&inst);
    println!("k = {}  l = {}  c - b = {}", c.k, c.l, &c.c - &c.b);

    let x = Point::new(vec![2.0, 0.0])?;
    for sign in [ASign::MinusV, ASign::PlusV] {
        let inst = inst.with_sign(sign);
        println!("-- {sign}");
        for id in ClosedFormId::all() {
            let gap = closed_form_eval(&inst, id, &x)?.distance(&compositional_eval(&inst, id, &x)?);
            println!("{:<12} {gap:.3e}", id.tag());
        }
    }
    Ok(())
}
