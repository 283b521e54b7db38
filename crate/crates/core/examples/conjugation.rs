//! R_Ag conjugates powers of T_(Ag,Bg) into powers of T_(Bg,Ag) when A is affine.

use aac_calculus::harness::{gen_instance, InstanceSpec, OperatorKind, WRule};
use aac_calculus::sampling::{normal_point, rng};

fn main() -> aac_calculus::Result<()> {
    let pair = gen_instance(&InstanceSpec {
        dim: 6,
        seed: 11,
        kind_a: OperatorKind::AffineRandom,
        kind_b: OperatorKind::Projector,
        gamma: 0.35,
        lambda: 0.8,
        w: WRule::Normal,
    })?;
    let x = normal_point(&mut rng(5), 6, 10.0);
    for n in [1, 2, 4, 8, 16, 32] {
        println!("n = {n:>2}  residual = {:.3e}", pair.conjugation_residual(n, &x)?);
    }
    let terms = pair.commutator_lemma25(&x)?;
    println!("commutator norms: {:.1e} {:.1e} {:.1e}", terms.lhs.norm(), terms.via_averaged.norm(), terms.via_base.norm());
    let (left, right) = pair.dr_commutator(&x)?;
    println!("T T' - T' T against reflections: {:.2e}", left.distance(&right));
    Ok(())
}
