//! Every evaluation path of the AAC operator and of R_Bg R_Ag on one input.

use aac_calculus::{ModelInstance, Order, Point, RbrForm, TForm};

fn main() -> aac_calculus::Result<()> {
    let pair = ModelInstance::worked().split_pair();
    let x = Point::new(vec![2.0, 0.0])?;
    for order in [Order::Forward, Order::Swapped] {
        for form in TForm::ALL {
            println!("{order:?} T {form:<7} {}", pair.aac(order, form, &x)?);
        }
        for form in RbrForm::ALL {
            println!("{order:?} RR {form:<7} {}", pair.rbr(order, form, &x)?);
        }
    }
    Ok(())
}
