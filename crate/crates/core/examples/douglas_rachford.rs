//! The two Douglas–Rachford expressions and the swapped operator.

use aac_calculus::linalg::orthonormalize;
use aac_calculus::splitting::{drs, drs_swapped};
use aac_calculus::{DrsForm, Operator, Point};

fn main() -> aac_calculus::Result<()> {
    let a = Operator::translated_identity(Point::new(vec![0.0, -1.0])?);
    let u = orthonormalize(2, &[Point::new(vec![1.0, 0.0])?])?;
    let b = Operator::project_affine(Point::new(vec![0.0, 2.0])?, u)?;
    let x = Point::new(vec![2.0, 0.0])?;

    println!("T_AB x (half sum)   = {}", drs(&a, &b, DrsForm::HalfSum, &x)?);
    println!("T_AB x (resolvents) = {}", drs(&a, &b, DrsForm::Resolvent, &x)?);
    println!("T_BA x              = {}", drs(&b, &a, DrsForm::HalfSum, &x)?);
    println!("Id + J_A R_B - J_B  = {}", drs_swapped(&a, &b, &x)?);
    Ok(())
}
