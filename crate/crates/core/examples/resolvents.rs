//! Resolvents and reflected resolvents of the leaf operator kinds.

use aac_calculus::linalg::orthonormalize;
use aac_calculus::operator::{perturbed_resolvent, reflected, resolvent};
use aac_calculus::{Matrix, Operator, PerturbationParams, Point};

fn main() -> aac_calculus::Result<()> {
    let x = Point::new(vec![3.0, -1.0])?;

    // rotation plus a PSD part: monotone but not symmetric
    let l = Matrix::from_rows(&[vec![1.0, -2.0], vec![2.0, 0.5]])?;
    let a = Operator::affine(l, Point::new(vec![0.5, 0.0])?)?;
    let ja = resolvent(&a)?;
    let y = ja.eval(&x)?;
    println!("J_A x        = {y}");
    println!("y + A y - x  = {:.2e}", (&y + &a.eval(&y)?).distance(&x));
    println!("R_A x        = {}", reflected(&a)?.eval(&x)?);

    let u = orthonormalize(2, &[Point::new(vec![1.0, 1.0])?])?;
    let b = Operator::project_affine(Point::new(vec![0.0, 2.0])?, u)?;
    println!("J_B x        = {}", resolvent(&b)?.eval(&x)?);

    let p = PerturbationParams::new(0.25, Point::new(vec![1.0, 1.0])?)?;
    println!("J_(A_g) x    = {}", perturbed_resolvent(&a, &p)?.eval(&x)?);

    let bad = Operator::affine(Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]])?, Point::zeros(2))?;
    println!("non-monotone: {}", resolvent(&bad).unwrap_err());
    Ok(())
}
