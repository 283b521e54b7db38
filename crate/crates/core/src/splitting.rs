//! Douglas–Rachford and averaged-reflection (AAC) operators.
//!
//! Every algebraically equivalent expression of `T_{A_γ,B_γ}` and
//! `R_{B_γ}R_{A_γ}` is kept as its own evaluation path so that the forms can
//! be checked against each other numerically. The same code serves both
//! orders: [`Order::Swapped`] exchanges the roles of `A` and `B`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::operator::{
    perturbed_reflected, perturbed_resolvent, reflected, resolvent, AacParams, Operator,
    PerturbationParams,
};

/// Which of the two Douglas–Rachford expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DrsForm {
    /// `½(Id + R_B R_A)`
    HalfSum,
    /// `Id − J_A + J_B R_A`
    Resolvent,
}

/// Ordered pair selector: `Forward` is `(A_γ, B_γ)`, `Swapped` is `(B_γ, A_γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Forward,
    Swapped,
}

impl Order {
    pub fn flip(self) -> Order {
        match self {
            Order::Forward => Order::Swapped,
            Order::Swapped => Order::Forward,
        }
    }
}

/// Evaluation paths for the AAC operator `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TForm {
    /// `(1 − λ) Id + λ R_{B_γ} R_{A_γ}`
    Def,
    /// `Id + 2λ J_{B_γ} R_{A_γ} − 2λ J_{A_γ}`
    M4,
    /// `Id + 2λγ J_B R_{A_γ} − 2λγ J_A`
    M5,
    /// `Id + 2λγ (J_B R_{A_γ} − J_A)`
    M566,
    /// `T_{A,B} + (1 − 2λγ) J_A − J_B R_A + 2λγ J_B R_{A_γ}`
    M5676,
    /// `T_{B,A} + J_B − J_A R_B + 2λγ J_B R_{A_γ} − 2λγ J_A`
    M567S6,
}

impl TForm {
    pub const ALL: [TForm; 6] = [TForm::Def, TForm::M4, TForm::M5, TForm::M566, TForm::M5676, TForm::M567S6];

    pub fn tag(self) -> &'static str {
        match self {
            TForm::Def => "DEF",
            TForm::M4 => "M4",
            TForm::M5 => "M5",
            TForm::M566 => "M566",
            TForm::M5676 => "M5676",
            TForm::M567S6 => "M567S6",
        }
    }
}

/// Evaluation paths for `R_{B_γ} R_{A_γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RbrForm {
    /// Plain composition.
    Compose,
    /// `Id + 2 J_{B_γ} R_{A_γ} − 2 J_{A_γ}`
    M1,
    /// `Id + 2γ J_B R_{A_γ} − 2γ J_A`
    M2,
    /// `T_{A,B} + (1 − 2γ) J_A − J_B R_A + 2γ J_B R_{A_γ}`
    M3,
}

impl RbrForm {
    pub const ALL: [RbrForm; 4] = [RbrForm::Compose, RbrForm::M1, RbrForm::M2, RbrForm::M3];

    pub fn tag(self) -> &'static str {
        match self {
            RbrForm::Compose => "COMPOSE",
            RbrForm::M1 => "M1",
            RbrForm::M2 => "M2",
            RbrForm::M3 => "M3",
        }
    }
}

macro_rules! tag_parsing {
    ($ty:ty) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.pad(self.tag())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                <$ty>::ALL
                    .into_iter()
                    .find(|f| f.tag().eq_ignore_ascii_case(s))
                    .ok_or_else(|| Error::UnknownForm(s.to_string()))
            }
        }
    };
}

tag_parsing!(TForm);
tag_parsing!(RbrForm);

/// `J`, `R`, `J_γ` and `R_γ` of one operator.
#[derive(Debug, Clone)]
struct Resolvents {
    op: Operator,
    j: Operator,
    r: Operator,
    jg: Operator,
    rg: Operator,
}

impl Resolvents {
    fn new(op: &Operator, p: &PerturbationParams) -> Result<Self> {
        Ok(Resolvents {
            op: op.clone(),
            j: resolvent(op)?,
            r: reflected(op)?,
            jg: perturbed_resolvent(op, p)?,
            rg: perturbed_reflected(op, p)?,
        })
    }
}

fn unchecked(op: &Operator, x: &Point) -> Point {
    op.eval(x).expect("dimension validated when the pair was built")
}

/// Douglas–Rachford operator of an ordered pair of operators.
#[derive(Debug, Clone)]
pub struct DouglasRachford {
    ja: Operator,
    ra: Operator,
    jb: Operator,
    rb: Operator,
}

impl DouglasRachford {
    pub fn new(a: &Operator, b: &Operator) -> Result<Self> {
        Operator::compose(a, b)?;
        Ok(DouglasRachford { ja: resolvent(a)?, ra: reflected(a)?, jb: resolvent(b)?, rb: reflected(b)? })
    }

    /// `T_{A,B} x`.
    pub fn apply(&self, form: DrsForm, x: &Point) -> Result<Point> {
        let rax = self.ra.eval(x)?;
        Ok(match form {
            DrsForm::HalfSum => (x + &self.rb.eval(&rax)?) * 0.5,
            DrsForm::Resolvent => x - &self.ja.eval(x)? + self.jb.eval(&rax)?,
        })
    }

    /// `T_{B,A} x = x + J_A R_B x − J_B x`.
    pub fn apply_swapped(&self, x: &Point) -> Result<Point> {
        Ok(x + &self.ja.eval(&self.rb.eval(x)?)? - self.jb.eval(x)?)
    }
}

/// `T_{A,B} x` by the chosen form.
pub fn drs(a: &Operator, b: &Operator, form: DrsForm, x: &Point) -> Result<Point> {
    DouglasRachford::new(a, b)?.apply(form, x)
}

/// `T_{B,A} x` through `Id + J_A R_B − J_B`.
pub fn drs_swapped(a: &Operator, b: &Operator, x: &Point) -> Result<Point> {
    DouglasRachford::new(a, b)?.apply_swapped(x)
}

/// The three quantities of the commutator identity for `R_{A_γ} T − T' R_{A_γ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorTerms {
    /// `R_{A_γ} T_{A_γ,B_γ} x − T_{B_γ,A_γ} R_{A_γ} x`
    pub lhs: Point,
    /// `2(J_{A_γ} T x − (1 − λ) J_{A_γ} x − λ J_{A_γ} R_{B_γ} R_{A_γ} x)`
    pub via_averaged: Point,
    /// `2γ(J_A T x − (1 − λ) J_A x − λ J_A R_{B_γ} R_{A_γ} x)`
    pub via_base: Point,
}

/// Ordered pair `(A, B)` with the perturbation `(γ, w)` and relaxation `λ`.
#[derive(Debug, Clone)]
pub struct SplitPair {
    a: Resolvents,
    b: Resolvents,
    perturb: PerturbationParams,
    relax: AacParams,
}

struct Sides<'a> {
    first: &'a Resolvents,
    second: &'a Resolvents,
}

impl SplitPair {
    pub fn new(a: &Operator, b: &Operator, perturb: PerturbationParams, relax: AacParams) -> Result<Self> {
        let dim = Operator::compose(a, b)?.dim();
        if let Some(d) = dim {
            perturb.w().check_dim(d)?;
        }
        Ok(SplitPair {
            a: Resolvents::new(a, &perturb)?,
            b: Resolvents::new(b, &perturb)?,
            perturb,
            relax,
        })
    }

    /// The pair `(B, A)` with the same parameters.
    pub fn swapped(&self) -> SplitPair {
        SplitPair { a: self.b.clone(), b: self.a.clone(), perturb: self.perturb.clone(), relax: self.relax }
    }

    pub fn a(&self) -> &Operator {
        &self.a.op
    }

    pub fn b(&self) -> &Operator {
        &self.b.op
    }

    pub fn perturbation(&self) -> &PerturbationParams {
        &self.perturb
    }

    pub fn gamma(&self) -> f64 {
        self.perturb.gamma()
    }

    pub fn lambda(&self) -> f64 {
        self.relax.lambda()
    }

    /// Ambient dimension if any operator of the pair fixes one.
    pub fn dim(&self) -> Option<usize> {
        self.a.op.dim().or(self.b.op.dim()).or(Some(self.perturb.w().dim()))
    }

    pub fn j_a(&self) -> &Operator {
        &self.a.j
    }
    pub fn r_a(&self) -> &Operator {
        &self.a.r
    }
    pub fn j_b(&self) -> &Operator {
        &self.b.j
    }
    pub fn r_b(&self) -> &Operator {
        &self.b.r
    }
    /// `J_{A_γ}`
    pub fn jg_a(&self) -> &Operator {
        &self.a.jg
    }
    /// `R_{A_γ}`
    pub fn rg_a(&self) -> &Operator {
        &self.a.rg
    }
    /// `J_{B_γ}`
    pub fn jg_b(&self) -> &Operator {
        &self.b.jg
    }
    /// `R_{B_γ}`
    pub fn rg_b(&self) -> &Operator {
        &self.b.rg
    }

    fn sides(&self, order: Order) -> Sides<'_> {
        match order {
            Order::Forward => Sides { first: &self.a, second: &self.b },
            Order::Swapped => Sides { first: &self.b, second: &self.a },
        }
    }

    fn check(&self, x: &Point) -> Result<()> {
        match self.dim() {
            Some(d) => x.check_dim(d),
            None => Ok(()),
        }
    }

    /// Douglas–Rachford operator of the unperturbed pair in the given order.
    pub fn drs(&self, order: Order, form: DrsForm, x: &Point) -> Result<Point> {
        self.check(x)?;
        let s = self.sides(order);
        Ok(drs_unchecked(&s, form, x))
    }

    /// `T_{A_γ,B_γ} x` (or `T_{B_γ,A_γ} x`) by the chosen form.
    pub fn aac(&self, order: Order, form: TForm, x: &Point) -> Result<Point> {
        self.check(x)?;
        Ok(self.aac_unchecked(order, form, x))
    }

    fn aac_unchecked(&self, order: Order, form: TForm, x: &Point) -> Point {
        let Sides { first: f, second: s } = self.sides(order);
        let lam = self.lambda();
        let g = self.gamma();
        let lg2 = 2.0 * lam * g;
        match form {
            TForm::Def => {
                let rr = unchecked(&s.rg, &unchecked(&f.rg, x));
                (x * (1.0 - lam)).add_scaled(lam, &rr)
            }
            TForm::M4 => {
                let t = unchecked(&s.jg, &unchecked(&f.rg, x));
                x.add_scaled(2.0 * lam, &t).add_scaled(-2.0 * lam, &unchecked(&f.jg, x))
            }
            TForm::M5 => {
                let t = unchecked(&s.j, &unchecked(&f.rg, x));
                x.add_scaled(lg2, &t).add_scaled(-lg2, &unchecked(&f.j, x))
            }
            TForm::M566 => {
                let t = unchecked(&s.j, &unchecked(&f.rg, x)) - unchecked(&f.j, x);
                x.add_scaled(lg2, &t)
            }
            TForm::M5676 => {
                let sides = Sides { first: f, second: s };
                drs_unchecked(&sides, DrsForm::HalfSum, x)
                    .add_scaled(1.0 - lg2, &unchecked(&f.j, x))
                    .add_scaled(-1.0, &unchecked(&s.j, &unchecked(&f.r, x)))
                    .add_scaled(lg2, &unchecked(&s.j, &unchecked(&f.rg, x)))
            }
            TForm::M567S6 => {
                // T_{second,first} through Id + J_first R_second − J_second
                let reversed = x + &unchecked(&f.j, &unchecked(&s.r, x)) - unchecked(&s.j, x);
                reversed
                    .add_scaled(1.0, &unchecked(&s.j, x))
                    .add_scaled(-1.0, &unchecked(&f.j, &unchecked(&s.r, x)))
                    .add_scaled(lg2, &unchecked(&s.j, &unchecked(&f.rg, x)))
                    .add_scaled(-lg2, &unchecked(&f.j, x))
            }
        }
    }

    /// `R_{B_γ} R_{A_γ} x` (or `R_{A_γ} R_{B_γ} x`) by the chosen form.
    pub fn rbr(&self, order: Order, form: RbrForm, x: &Point) -> Result<Point> {
        self.check(x)?;
        Ok(self.rbr_unchecked(order, form, x))
    }

    fn rbr_unchecked(&self, order: Order, form: RbrForm, x: &Point) -> Point {
        let sides = self.sides(order);
        let (f, s) = (sides.first, sides.second);
        let g = self.gamma();
        match form {
            RbrForm::Compose => unchecked(&s.rg, &unchecked(&f.rg, x)),
            RbrForm::M1 => x
                .add_scaled(2.0, &unchecked(&s.jg, &unchecked(&f.rg, x)))
                .add_scaled(-2.0, &unchecked(&f.jg, x)),
            RbrForm::M2 => x
                .add_scaled(2.0 * g, &unchecked(&s.j, &unchecked(&f.rg, x)))
                .add_scaled(-2.0 * g, &unchecked(&f.j, x)),
            RbrForm::M3 => drs_unchecked(&sides, DrsForm::HalfSum, x)
                .add_scaled(1.0 - 2.0 * g, &unchecked(&f.j, x))
                .add_scaled(-1.0, &unchecked(&s.j, &unchecked(&f.r, x)))
                .add_scaled(2.0 * g, &unchecked(&s.j, &unchecked(&f.rg, x))),
        }
    }

    /// `T^n x` by repeated application of the defining form.
    pub fn power(&self, order: Order, n: usize, x: &Point) -> Result<Point> {
        self.check(x)?;
        Ok(self.power_unchecked(order, n, x))
    }

    fn power_unchecked(&self, order: Order, n: usize, x: &Point) -> Point {
        (0..n).fold(x.clone(), |y, _| self.aac_unchecked(order, TForm::Def, &y))
    }

    /// `‖R_{A_γ} T^n_{A_γ,B_γ} x − T^n_{B_γ,A_γ} R_{A_γ} x‖`.
    ///
    /// Vanishes (up to roundoff) whenever `A` is affine.
    pub fn conjugation_residual(&self, n: usize, x: &Point) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("conjugation residual needs n >= 1".into()));
        }
        self.check(x)?;
        let lhs = unchecked(&self.a.rg, &self.power_unchecked(Order::Forward, n, x));
        let rhs = self.power_unchecked(Order::Swapped, n, &unchecked(&self.a.rg, x));
        Ok(lhs.distance(&rhs))
    }

    /// Both sides of the commutator identity, plus its `γ J_A` rewriting.
    pub fn commutator_lemma25(&self, x: &Point) -> Result<CommutatorTerms> {
        self.check(x)?;
        let lam = self.lambda();
        let g = self.gamma();
        let rax = unchecked(&self.a.rg, x);
        let tx = self.aac_unchecked(Order::Forward, TForm::Def, x);
        let lhs = unchecked(&self.a.rg, &tx) - self.aac_unchecked(Order::Swapped, TForm::Def, &rax);
        let rbr = unchecked(&self.b.rg, &rax);
        let combo = |j: &Operator, scale: f64| {
            (unchecked(j, &tx)
                .add_scaled(-(1.0 - lam), &unchecked(j, x))
                .add_scaled(-lam, &unchecked(j, &rbr)))
                * scale
        };
        Ok(CommutatorTerms { lhs, via_averaged: combo(&self.a.jg, 2.0), via_base: combo(&self.a.j, 2.0 * g) })
    }

    /// `(λ⁻²(T T' − T' T) x, (R_{B_γ} R²_{A_γ} R_{B_γ} − R_{A_γ} R²_{B_γ} R_{A_γ}) x)`.
    pub fn dr_commutator(&self, x: &Point) -> Result<(Point, Point)> {
        self.check(x)?;
        let lam = self.lambda();
        let t = |o, y: &Point| self.aac_unchecked(o, TForm::Def, y);
        let tts = t(Order::Forward, &t(Order::Swapped, x));
        let tst = t(Order::Swapped, &t(Order::Forward, x));
        let left = (tts - tst) * (1.0 / (lam * lam));
        let (ra, rb) = (&self.a.rg, &self.b.rg);
        let brrb = unchecked(rb, &unchecked(ra, &unchecked(ra, &unchecked(rb, x))));
        let arra = unchecked(ra, &unchecked(rb, &unchecked(rb, &unchecked(ra, x))));
        Ok((left, brrb - arra))
    }

    /// `T_{A_γ,B_γ}` (or the swapped operator) as an expression tree.
    pub fn aac_operator(&self, order: Order) -> Result<Operator> {
        let Sides { first, second } = self.sides(order);
        let lam = self.lambda();
        let d = self.dim().expect("pair carries the dimension of w");
        let rr = Operator::compose(&second.rg, &first.rg)?;
        Operator::combine(1.0 - lam, &Operator::identity(), lam, &rr, Point::zeros(d))
    }
}

fn drs_unchecked(s: &Sides<'_>, form: DrsForm, x: &Point) -> Point {
    let rax = unchecked(&s.first.r, x);
    match form {
        DrsForm::HalfSum => (x + &unchecked(&s.second.r, &rax)) * 0.5,
        DrsForm::Resolvent => x - &unchecked(&s.first.j, x) + unchecked(&s.second.j, &rax),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormalize;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn assert_close(a: &Point, b: &Point, tol: f64) {
        assert!(a.distance(b) <= tol, "{a} vs {b}");
    }

    fn worked_ops() -> (Operator, Operator) {
        let a = Operator::translated_identity(p(&[0.0, -1.0]));
        let u = orthonormalize(2, &[p(&[1.0, 0.0])]).unwrap();
        let b = Operator::project_affine(p(&[0.0, 2.0]), u).unwrap();
        (a, b)
    }

    fn worked_pair() -> SplitPair {
        let (a, b) = worked_ops();
        SplitPair::new(
            &a,
            &b,
            PerturbationParams::new(0.5, p(&[1.0, 1.0])).unwrap(),
            AacParams::new(0.5).unwrap(),
        )
        .unwrap()
    }

    fn zero_pair(gamma: f64, lambda: f64) -> SplitPair {
        SplitPair::new(
            &Operator::zero(2),
            &Operator::zero(2),
            PerturbationParams::new(gamma, Point::zeros(2)).unwrap(),
            AacParams::new(lambda).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn drs_examples() {
        let z = Operator::zero(2);
        let x = p(&[3.0, -1.0]);
        for form in [DrsForm::HalfSum, DrsForm::Resolvent] {
            assert_close(&drs(&z, &z, form, &x).unwrap(), &x, 1e-15);
        }
        assert_close(&drs_swapped(&z, &z, &x).unwrap(), &x, 1e-15);

        let (a, b) = worked_ops();
        let x = p(&[2.0, 0.0]);
        for form in [DrsForm::HalfSum, DrsForm::Resolvent] {
            assert_close(&drs(&a, &b, form, &x).unwrap(), &p(&[1.0, -1.5]), 1e-14);
            assert_close(&drs(&b, &a, form, &x).unwrap(), &p(&[1.0, 0.5]), 1e-14);
        }
        assert_close(&drs_swapped(&a, &b, &x).unwrap(), &p(&[1.0, 0.5]), 1e-14);
    }

    #[test]
    fn aac_examples() {
        let x = p(&[3.0, -1.0]);
        let z = zero_pair(0.3, 1.0);
        // λ = 1, A = B = 0, w = 0: T = R_{0_γ}² = (2γ − 1)² Id
        let s = (2.0 * 0.3 - 1.0_f64).powi(2);
        for form in TForm::ALL {
            assert_close(&z.aac(Order::Forward, form, &x).unwrap(), &(&x * s), 1e-14);
        }

        let pair = worked_pair();
        let x = p(&[2.0, 0.0]);
        assert_close(&pair.rg_a().eval(&x).unwrap(), &p(&[0.0, 1.5]), 1e-15);
        assert_close(&pair.rg_b().eval(&p(&[0.0, 1.5])).unwrap(), &p(&[1.0, -1.0]), 1e-15);
        for form in TForm::ALL {
            assert_close(&pair.aac(Order::Forward, form, &x).unwrap(), &p(&[1.5, -0.5]), 1e-14);
            assert_close(&pair.aac(Order::Swapped, form, &x).unwrap(), &p(&[1.5, 1.0]), 1e-14);
        }
    }

    #[test]
    fn rbr_examples() {
        let z = zero_pair(0.5, 1.0);
        for form in RbrForm::ALL {
            assert_close(&z.rbr(Order::Forward, form, &p(&[4.0, 2.0])).unwrap(), &p(&[0.0, 0.0]), 1e-15);
        }
        let pair = worked_pair();
        for form in RbrForm::ALL {
            assert_close(&pair.rbr(Order::Forward, form, &p(&[2.0, 0.0])).unwrap(), &p(&[1.0, -1.0]), 1e-14);
        }
    }

    #[test]
    fn power_examples() {
        let pair = worked_pair();
        assert_eq!(pair.power(Order::Forward, 0, &p(&[7.0, 7.0])).unwrap(), p(&[7.0, 7.0]));
        assert_close(&pair.power(Order::Forward, 1, &p(&[2.0, 0.0])).unwrap(), &p(&[1.5, -0.5]), 1e-14);
        // fixed point of the affine map: x1 = 0.625 x1 + 0.25, x2 = 0.5 x2 − 0.5
        let limit = pair.power(Order::Forward, 200, &p(&[2.0, 0.0])).unwrap();
        assert_close(&limit, &p(&[2.0 / 3.0, -1.0]), 1e-12);
    }

    #[test]
    fn conjugation_examples() {
        let pair = worked_pair();
        let x = p(&[2.0, 0.0]);
        let lhs = pair.rg_a().eval(&pair.power(Order::Forward, 1, &x).unwrap()).unwrap();
        let rhs = pair.power(Order::Swapped, 1, &pair.rg_a().eval(&x).unwrap()).unwrap();
        assert_close(&lhs, &p(&[0.25, 1.75]), 1e-14);
        assert_close(&rhs, &p(&[0.25, 1.75]), 1e-14);
        assert!(pair.conjugation_residual(1, &x).unwrap() <= 1e-14);
        let x = p(&[-3.7, 12.25]);
        assert!(pair.conjugation_residual(5, &x).unwrap() <= 1e-8 * (1.0 + x.norm()));
        let z = zero_pair(0.4, 0.7);
        for n in [1, 3, 9] {
            assert!(z.conjugation_residual(n, &x).unwrap() <= 1e-15);
        }
        assert!(pair.conjugation_residual(0, &x).is_err());
    }

    #[test]
    fn commutator_examples() {
        let pair = worked_pair();
        let c = pair.commutator_lemma25(&p(&[2.0, 0.0])).unwrap();
        for v in [&c.lhs, &c.via_averaged, &c.via_base] {
            assert!(v.norm() <= 1e-12, "{v}");
        }
        let z = zero_pair(0.5, 0.5);
        let c = z.commutator_lemma25(&p(&[1.0, 2.0])).unwrap();
        assert_eq!(c.lhs, Point::zeros(2));
        assert_eq!(c.via_averaged, Point::zeros(2));
        assert_eq!(c.via_base, Point::zeros(2));
    }

    #[test]
    fn dr_commutator_examples() {
        let (a, _) = worked_ops();
        let same = SplitPair::new(
            &a,
            &a,
            PerturbationParams::new(0.3, p(&[1.0, -2.0])).unwrap(),
            AacParams::new(0.8).unwrap(),
        )
        .unwrap();
        let (l, r) = same.dr_commutator(&p(&[5.0, 1.0])).unwrap();
        assert!(l.norm() <= 1e-12 && r.norm() <= 1e-12);

        let pair = worked_pair();
        let x = p(&[2.0, 0.0]);
        let (l, r) = pair.dr_commutator(&x).unwrap();
        assert_close(&l, &r, 1e-12);
        // by hand: T' x = (1.5, 1), T x = (1.5, −0.5); T(1.5, 1) = (1.6875, −0.75), T'(1.5, −0.5) = (1.6875, 0)
        assert_close(&l, &p(&[0.0, -3.0]), 1e-12);
    }

    #[test]
    fn aac_operator_matches_pointwise() {
        let pair = worked_pair();
        let x = p(&[0.3, -4.0]);
        for order in [Order::Forward, Order::Swapped] {
            let t = pair.aac_operator(order).unwrap();
            assert_close(&t.eval(&x).unwrap(), &pair.aac(order, TForm::Def, &x).unwrap(), 1e-14);
        }
    }

    #[test]
    fn form_tags_round_trip() {
        for f in TForm::ALL {
            assert_eq!(f.tag().parse::<TForm>().unwrap(), f);
        }
        for f in RbrForm::ALL {
            assert_eq!(f.to_string().parse::<RbrForm>().unwrap(), f);
        }
        assert!(matches!("M9".parse::<TForm>(), Err(Error::UnknownForm(_))));
    }

    #[test]
    fn pair_rejects_mismatched_dimensions() {
        let (a, _) = worked_ops();
        let z3 = Operator::zero(3);
        let params = PerturbationParams::new(0.5, Point::zeros(2)).unwrap();
        assert!(SplitPair::new(&a, &z3, params.clone(), AacParams::new(1.0).unwrap()).is_err());
        let pair = worked_pair();
        assert!(pair.aac(Order::Forward, TForm::Def, &Point::zeros(3)).is_err());
    }
}
