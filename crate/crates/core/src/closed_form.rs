//! Closed-form oracles for the model pair `A = Id ∓ v`, `B = P_{a+U}`.
//!
//! The formulas below are written for `A = Id − v`. With [`ASign::PlusV`] the
//! operators are built from `Id + v` while the formulas stay the same, so the
//! two evaluation paths disagree.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{project_unchecked, Point, SubspaceBasis};
use crate::operator::{AacParams, Operator, PerturbationParams};
use crate::splitting::{DouglasRachford, DrsForm, Order, SplitPair, TForm};

/// Sign of the translation in `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ASign {
    /// `A = Id − v`
    MinusV,
    /// `A = Id + v`
    PlusV,
}

impl ASign {
    pub fn tag(self) -> &'static str {
        match self {
            ASign::MinusV => "MINUS_V",
            ASign::PlusV => "PLUS_V",
        }
    }
}

impl fmt::Display for ASign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for ASign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MINUS_V" => Ok(ASign::MinusV),
            "PLUS_V" => Ok(ASign::PlusV),
            _ => Err(Error::Config(format!("a_sign must be MINUS_V or PLUS_V, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelInstance {
    u: SubspaceBasis,
    a: Point,
    v: Point,
    w: Point,
    perturb: PerturbationParams,
    relax: AacParams,
    sign: ASign,
}

impl ModelInstance {
    pub fn new(u: SubspaceBasis, a: Point, v: Point, w: Point, gamma: f64, lambda: f64, sign: ASign) -> Result<Self> {
        let n = u.ambient_dim();
        a.check_dim(n)?;
        v.check_dim(n)?;
        w.check_dim(n)?;
        let pv = project_unchecked(&u, &v).norm();
        if pv > 1e-10 * v.norm() {
            return Err(Error::InvalidParameter(format!("v must lie in the orthogonal complement of U (|P_U v| = {pv:e})")));
        }
        Ok(ModelInstance {
            u,
            a,
            v,
            perturb: PerturbationParams::new(gamma, w.clone())?,
            w,
            relax: AacParams::new(lambda)?,
            sign,
        })
    }

    /// `n = 2`, `U = span{(1,0)}`, `a = (0,2)`, `v = (0,1)`, `w = (1,1)`, `γ = λ = ½`.
    pub fn worked() -> Self {
        let e1 = Point::new(vec![1.0, 0.0]).unwrap();
        ModelInstance::new(
            crate::linalg::orthonormalize(2, &[e1]).unwrap(),
            Point::new(vec![0.0, 2.0]).unwrap(),
            Point::new(vec![0.0, 1.0]).unwrap(),
            Point::new(vec![1.0, 1.0]).unwrap(),
            0.5,
            0.5,
            ASign::MinusV,
        )
        .unwrap()
    }

    /// Extra hypotheses of the second family of identities: `a ∈ U^⊥` and `a ≠ v`.
    pub fn validate_restricted(&self) -> Result<()> {
        let pa = project_unchecked(&self.u, &self.a).norm();
        if pa > 1e-10 * self.a.norm() {
            return Err(Error::InvalidParameter(format!("a must lie in the orthogonal complement of U (|P_U a| = {pa:e})")));
        }
        if self.a.distance(&self.v) <= 1e-8 {
            return Err(Error::InvalidParameter("a must differ from v".into()));
        }
        Ok(())
    }

    pub fn with_sign(&self, sign: ASign) -> Self {
        ModelInstance { sign, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.u.ambient_dim()
    }
    pub fn subspace(&self) -> &SubspaceBasis {
        &self.u
    }
    pub fn a(&self) -> &Point {
        &self.a
    }
    pub fn v(&self) -> &Point {
        &self.v
    }
    pub fn w(&self) -> &Point {
        &self.w
    }
    pub fn gamma(&self) -> f64 {
        self.perturb.gamma()
    }
    pub fn lambda(&self) -> f64 {
        self.relax.lambda()
    }
    pub fn sign(&self) -> ASign {
        self.sign
    }

    pub fn operator_a(&self) -> Operator {
        match self.sign {
            ASign::MinusV => Operator::translated_identity(-&self.v),
            ASign::PlusV => Operator::translated_identity(self.v.clone()),
        }
    }

    pub fn operator_b(&self) -> Operator {
        Operator::project_affine(self.a.clone(), self.u.clone()).expect("dimensions checked in new")
    }

    pub fn split_pair(&self) -> SplitPair {
        SplitPair::new(&self.operator_a(), &self.operator_b(), self.perturb.clone(), self.relax)
            .expect("model operators have closed-form resolvents")
    }

    fn pu(&self, x: &Point) -> Point {
        project_unchecked(&self.u, x)
    }

    fn pa_perp(&self) -> Point {
        &self.a - &self.pu(&self.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormConstants {
    pub k: Point,
    pub l: Point,
    pub h: Point,
    pub m: Point,
    pub s: Point,
    pub b: Point,
    pub c: Point,
}

/// The seven constant vectors, recomputed from the instance on every call.
pub fn constants(inst: &ModelInstance) -> ClosedFormConstants {
    let (g, lam) = (inst.gamma(), inst.lambda());
    let lg = lam * g;
    let (v, w) = (&inst.v, &inst.w);
    let pa = inst.pa_perp();
    let puw = inst.pu(w);
    let zero = Point::zeros(inst.dim());
    let sum = |terms: &[(f64, &Point)]| terms.iter().fold(zero.clone(), |acc, (c, p)| acc.add_scaled(*c, p));

    let k = sum(&[
        (lg * (2.0 * g - 1.0), v),
        (lg * 4.0 * (1.0 - g), w),
        (-lg * 2.0 * (1.0 - g), &puw),
        (-lg * 2.0, &pa),
    ]);
    let l = sum(&[(lg * 2.0 * (1.0 - g), &pa), (lg, v), (lg * 2.0 * (1.0 - g), w)]);
    let h = sum(&[
        (g * (lg * (2.0 * g - 3.0) + 1.0 + lam), v),
        (2.0 * (1.0 - g) * (1.0 - 2.0 * lg * (1.0 - g)), w),
        (2.0 * (1.0 - g) * lg * (1.0 - g), &puw),
        (2.0 * lg * (1.0 - g), &pa),
    ]);
    let m = sum(&[
        ((1.0 - 2.0 * g) * lg * (1.0 - 2.0 * g), v),
        ((1.0 - 2.0 * g) * lg * 2.0 * (1.0 - g), &puw),
        (-(1.0 - 2.0 * g) * lg * 4.0 * (1.0 - g), w),
        (2.0 * (1.0 - g), w),
        (2.0 * g * (lam - 1.0 - 2.0 * lg), &pa),
    ]);
    let s = sum(&[
        (lg, v),
        (2.0 * (lg * g - (2.0 * lam + 1.0) * g + 1.0), w),
        (-2.0 * g * (lam * (3.0 * g + 4.0) + 1.0), &pa),
        (2.0 * lg * (1.0 - g).powi(2), &puw),
    ]);
    let bc_a = -2.0 * g * (lg * (2.0 * g - 3.0) + lam + 1.0);
    let b = sum(&[
        (bc_a, &pa),
        (-2.0 * (g * (lg * (2.0 * g - 3.0) + 1.0) - 1.0), w),
        (lg * (2.0 * g - 1.0), v),
        (-2.0 * lg * g * (1.0 - g), &puw),
    ]);
    let c = sum(&[
        (bc_a, &pa),
        (-2.0 * (g * (lg * (2.0 * g - 3.0) + lam + 1.0) - 1.0), w),
        (lg * (2.0 * g - 1.0), v),
        (-2.0 * lg * g * (1.0 - g), &puw),
    ]);
    ClosedFormConstants { k, l, h, m, s, b, c }
}

/// Named closed-form operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormId {
    JA,
    RA,
    JAg,
    RAg,
    JB,
    RB,
    JBg,
    RBg,
    TAB,
    TBA,
    JbRa,
    JaRb,
    JbRag,
    JaRbg,
    TAgBg,
    TBgAg,
    /// `R_{A_γ} T_{A_γ,B_γ}`, equal to `T_{B_γ,A_γ} R_{A_γ}`
    RagT,
    /// `R_{B_γ} T_{A_γ,B_γ}`
    RbgTAgBg,
    /// `T_{B_γ,A_γ} R_{B_γ}`
    TBgAgRbg,
    /// `R_{B_γ} T_{B_γ,A_γ}`
    RbgTBgAg,
    /// `T_{A_γ,B_γ} R_{B_γ}`
    TAgBgRbg,
}

impl ClosedFormId {
    /// Resolvents, reflections and the two AAC operators of the model pair.
    pub const BASIC: [ClosedFormId; 16] = [
        ClosedFormId::JA,
        ClosedFormId::RA,
        ClosedFormId::JAg,
        ClosedFormId::RAg,
        ClosedFormId::JB,
        ClosedFormId::RB,
        ClosedFormId::JBg,
        ClosedFormId::RBg,
        ClosedFormId::TAB,
        ClosedFormId::TBA,
        ClosedFormId::JbRa,
        ClosedFormId::JaRb,
        ClosedFormId::JbRag,
        ClosedFormId::JaRbg,
        ClosedFormId::TAgBg,
        ClosedFormId::TBgAg,
    ];

    /// Compositions with a reflection, valid for `a ∈ U^⊥`.
    pub const COMPOSED: [ClosedFormId; 5] = [
        ClosedFormId::RagT,
        ClosedFormId::RbgTAgBg,
        ClosedFormId::TBgAgRbg,
        ClosedFormId::RbgTBgAg,
        ClosedFormId::TAgBgRbg,
    ];

    pub fn all() -> impl Iterator<Item = ClosedFormId> {
        Self::BASIC.into_iter().chain(Self::COMPOSED)
    }

    pub fn tag(self) -> &'static str {
        use ClosedFormId::*;
        match self {
            JA => "JA",
            RA => "RA",
            JAg => "JAg",
            RAg => "RAg",
            JB => "JB",
            RB => "RB",
            JBg => "JBg",
            RBg => "RBg",
            TAB => "TAB",
            TBA => "TBA",
            JbRa => "JB_RA",
            JaRb => "JA_RB",
            JbRag => "JB_RAg",
            JaRbg => "JA_RBg",
            TAgBg => "T_AgBg",
            TBgAg => "T_BgAg",
            RagT => "RAg_T",
            RbgTAgBg => "RBg_T_AgBg",
            TBgAgRbg => "T_BgAg_RBg",
            RbgTBgAg => "RBg_T_BgAg",
            TAgBgRbg => "T_AgBg_RBg",
        }
    }
}

impl fmt::Display for ClosedFormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for ClosedFormId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ClosedFormId::all().find(|id| id.tag() == s).ok_or_else(|| Error::UnknownForm(s.to_string()))
    }
}

/// Evaluates the named closed form at `x`.
///
/// `T_BgAg_RBg` uses the unsimplified constant
/// `2λγ(1−γ)(P⊥a + w) + (1 − λγ(3−2γ))(2(1−γ)w − 2γP⊥a) + 2λγ(1−γ)²P_U w + λγv`
/// in place of `s`; see [`ClosedFormConstants::s`] for the simplified vector.
pub fn closed_form_eval(inst: &ModelInstance, id: ClosedFormId, x: &Point) -> Result<Point> {
    x.check_dim(inst.dim())?;
    let (g, lam) = (inst.gamma(), inst.lambda());
    let lg = lam * g;
    let (v, w) = (&inst.v, &inst.w);
    let pa = inst.pa_perp();
    let pux = inst.pu(x);
    let half_xv = (x + v) * 0.5;
    let t_coef = 1.0 - lg * (3.0 - 2.0 * g);
    use ClosedFormId::*;
    let out = match id {
        JA => half_xv,
        RA => v.clone(),
        JAg => (&half_xv * g).add_scaled(1.0 - g, w),
        RAg => (v * g).add_scaled(-(1.0 - g), x).add_scaled(2.0 * (1.0 - g), w),
        JB => x.add_scaled(-0.5, &pux) - pa,
        RB => x - &pux - pa * 2.0,
        JBg => ((x.add_scaled(-0.5, &pux) - pa) * g).add_scaled(1.0 - g, w),
        RBg => (x * (2.0 * g - 1.0)).add_scaled(-g, &pux).add_scaled(-2.0 * g, &pa).add_scaled(2.0 * (1.0 - g), w),
        TAB => half_xv - pa,
        TBA => half_xv,
        JbRa => v - &pa,
        JaRb => half_xv.add_scaled(-0.5, &pux) - pa,
        JbRag => {
            let inner = (pux * 0.5 - x) - (inst.pu(w) - w * 2.0);
            (v * g).add_scaled(1.0 - g, &inner) - pa
        }
        JaRbg => ((x * (2.0 * g - 1.0)).add_scaled(-g, &pux).add_scaled(-2.0 * g, &pa).add_scaled(2.0 * (1.0 - g), w)
            + v)
            * 0.5,
        TAgBg => (x * t_coef).add_scaled(lg * (1.0 - g), &pux) + constants(inst).k,
        TBgAg => (x * t_coef).add_scaled(lg * (1.0 - g), &pux) + constants(inst).l,
        RagT => {
            let inner = (x * (lg * (3.0 - 2.0 * g) - 1.0)).add_scaled(-lg * (1.0 - g), &pux);
            inner * (1.0 - g) + constants(inst).h
        }
        RbgTAgBg => {
            let inner = (x * (lg * (3.0 - 2.0 * g) - 1.0)).add_scaled(-lg * (1.0 - g), &pux);
            inner * (1.0 - 2.0 * g) + constants(inst).m
        }
        TBgAgRbg => (x * (t_coef * (2.0 * g - 1.0)))
            .add_scaled(-g * (1.0 + lam - lg * (5.0 - 3.0 * g)), &pux)
            .add_scaled(2.0 * lg * (1.0 - g), &(&pa + w))
            .add_scaled(t_coef, &(w * (2.0 * (1.0 - g))).add_scaled(-2.0 * g, &pa))
            .add_scaled(2.0 * lg * (1.0 - g).powi(2), &inst.pu(w))
            .add_scaled(lg, v),
        RbgTBgAg | TAgBgRbg => {
            let cst = constants(inst);
            let tail = if id == RbgTBgAg { cst.b } else { cst.c };
            (x * ((2.0 * g - 1.0) * t_coef)).add_scaled(g * (lg * (5.0 - 3.0 * g) - lam - 1.0), &pux) + tail
        }
    };
    Ok(out)
}

/// Evaluates the operator named by `id` by composing resolvents of the model pair.
pub fn compositional_eval(inst: &ModelInstance, id: ClosedFormId, x: &Point) -> Result<Point> {
    x.check_dim(inst.dim())?;
    let pair = inst.split_pair();
    compositional_eval_with(&pair, id, x)
}

pub fn compositional_eval_with(pair: &SplitPair, id: ClosedFormId, x: &Point) -> Result<Point> {
    use ClosedFormId::*;
    let t = |o: Order, y: &Point| pair.aac(o, TForm::Def, y);
    match id {
        JA => pair.j_a().eval(x),
        RA => pair.r_a().eval(x),
        JAg => pair.jg_a().eval(x),
        RAg => pair.rg_a().eval(x),
        JB => pair.j_b().eval(x),
        RB => pair.r_b().eval(x),
        JBg => pair.jg_b().eval(x),
        RBg => pair.rg_b().eval(x),
        TAB => DouglasRachford::new(pair.a(), pair.b())?.apply(DrsForm::HalfSum, x),
        TBA => DouglasRachford::new(pair.b(), pair.a())?.apply(DrsForm::HalfSum, x),
        JbRa => pair.j_b().eval(&pair.r_a().eval(x)?),
        JaRb => pair.j_a().eval(&pair.r_b().eval(x)?),
        JbRag => pair.j_b().eval(&pair.rg_a().eval(x)?),
        JaRbg => pair.j_a().eval(&pair.rg_b().eval(x)?),
        TAgBg => t(Order::Forward, x),
        TBgAg => t(Order::Swapped, x),
        RagT => pair.rg_a().eval(&t(Order::Forward, x)?),
        RbgTAgBg => pair.rg_b().eval(&t(Order::Forward, x)?),
        TBgAgRbg => t(Order::Swapped, &pair.rg_b().eval(x)?),
        RbgTBgAg => pair.rg_b().eval(&t(Order::Swapped, x)?),
        TAgBgRbg => t(Order::Forward, &pair.rg_b().eval(x)?),
    }
}

/// Pairs of compositions whose equality is in question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Noncommuting {
    /// `R_{B_γ} T_{A_γ,B_γ}` against `T_{B_γ,A_γ} R_{B_γ}`
    Ex16,
    /// `R_{B_γ} T_{B_γ,A_γ}` against `T_{A_γ,B_γ} R_{B_γ}`
    Ex19,
}

impl Noncommuting {
    pub fn tag(self) -> &'static str {
        match self {
            Noncommuting::Ex16 => "EX16",
            Noncommuting::Ex19 => "EX19",
        }
    }

    pub fn sides(self) -> (ClosedFormId, ClosedFormId) {
        match self {
            Noncommuting::Ex16 => (ClosedFormId::RbgTAgBg, ClosedFormId::TBgAgRbg),
            Noncommuting::Ex19 => (ClosedFormId::RbgTBgAg, ClosedFormId::TAgBgRbg),
        }
    }
}

/// `‖f(x) − g(x)‖` for the two compositions, evaluated compositionally.
pub fn noncommutation_gap(inst: &ModelInstance, which: Noncommuting, x: &Point) -> Result<f64> {
    x.check_dim(inst.dim())?;
    let pair = inst.split_pair();
    let (f, g) = which.sides();
    Ok(compositional_eval_with(&pair, f, x)?.distance(&compositional_eval_with(&pair, g, x)?))
}
