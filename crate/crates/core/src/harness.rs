//! Random instances, sampled operator equality and the identity suites.
//!
//! Every suite draws its instances and sample points from ChaCha streams keyed
//! by `(seed, suite, member, instance)`, so reports do not depend on thread
//! scheduling or on which other suites were selected.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::closed_form::{closed_form_eval, compositional_eval_with, ASign, ClosedFormId, ModelInstance, Noncommuting};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, project_complement, solve_linear, Matrix, Point, SubspaceBasis};
use crate::operator::{affinity_witness, AacParams, Operator, PerturbationParams, PointMap};
use crate::sampling::{self, normal_point, StreamRng};
use crate::splitting::{DouglasRachford, DrsForm, Order, RbrForm, SplitPair, TForm};

/// Scale of sample points.
pub const SAMPLE_SCALE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    AffineRandom,
    TranslatedIdentity,
    Projector,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [OperatorKind::AffineRandom, OperatorKind::TranslatedIdentity, OperatorKind::Projector];

    pub fn tag(self) -> &'static str {
        match self {
            OperatorKind::AffineRandom => "AFFINE_RANDOM",
            OperatorKind::TranslatedIdentity => "TRANSLATED_IDENTITY",
            OperatorKind::Projector => "PROJECTOR",
        }
    }
}

/// How the anchor `w` is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum WRule {
    Normal,
    Fixed(Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub dim: usize,
    pub seed: u64,
    pub kind_a: OperatorKind,
    pub kind_b: OperatorKind,
    pub gamma: f64,
    pub lambda: f64,
    pub w: WRule,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 64 {
            return Err(Error::InvalidParameter(format!("dim must lie in 1..=64, got {}", self.dim)));
        }
        PerturbationParams::new(self.gamma, Point::zeros(self.dim))?;
        AacParams::new(self.lambda)?;
        if let WRule::Fixed(w) = &self.w {
            w.check_dim(self.dim)?;
        }
        Ok(())
    }
}

/// Orthonormal basis of a random subspace of the given rank.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<SubspaceBasis> {
    let vs: Vec<Point> = (0..rank).map(|_| normal_point(rng, dim, 1.0)).collect();
    orthonormalize(dim, &vs)
}

fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_vec(n, n, sampling::normal_vec(rng, n * n))
}

/// One random operator of the given kind.
pub fn gen_operator<R: Rng + ?Sized>(rng: &mut R, kind: OperatorKind, dim: usize) -> Result<Operator> {
    match kind {
        OperatorKind::AffineRandom => {
            let g = random_matrix(rng, dim);
            let h = random_matrix(rng, dim);
            let l = &g * g.transpose() / dim as f64 + (&h - h.transpose()) * 0.5;
            let c = normal_point(rng, dim, 1.0);
            Operator::affine(Matrix::from_dmatrix(l)?, c)
        }
        OperatorKind::TranslatedIdentity => {
            let rank = rng.random_range(0..dim);
            let u = random_subspace(rng, dim, rank)?;
            let v = project_complement(&u, &normal_point(rng, dim, 1.0))?;
            Ok(Operator::translated_identity(-&v))
        }
        OperatorKind::Projector => {
            let rank = rng.random_range(0..=dim);
            let u = random_subspace(rng, dim, rank)?;
            Operator::project_affine(normal_point(rng, dim, 1.0), u)
        }
    }
}

/// Builds the pair described by `spec`, deterministically in its seed.
pub fn gen_instance(spec: &InstanceSpec) -> Result<SplitPair> {
    spec.validate()?;
    let mut rng = sampling::rng(spec.seed);
    let a = gen_operator(&mut rng, spec.kind_a, spec.dim)?;
    let b = gen_operator(&mut rng, spec.kind_b, spec.dim)?;
    let w = match &spec.w {
        WRule::Normal => normal_point(&mut rng, spec.dim, 1.0),
        WRule::Fixed(w) => w.clone(),
    };
    SplitPair::new(&a, &b, PerturbationParams::new(spec.gamma, w)?, AacParams::new(spec.lambda)?)
}

/// Random model instance; with `restricted` set, `a ∈ U^⊥`, `U ≠ R^n` and `a ≠ v`.
pub fn random_model_instance<R: Rng + ?Sized>(rng: &mut R, dim: usize, restricted: bool, sign: ASign) -> Result<ModelInstance> {
    let rank = if restricted { rng.random_range(0..dim) } else { rng.random_range(0..=dim) };
    let u = random_subspace(rng, dim, rank)?;
    let v = if rank == dim { Point::zeros(dim) } else { project_complement(&u, &normal_point(rng, dim, 1.0))? };
    let raw_a = normal_point(rng, dim, 1.0);
    let a = if restricted { project_complement(&u, &raw_a)? } else { raw_a };
    let w = normal_point(rng, dim, 1.0);
    let (gamma, lambda) = random_params(rng);
    let inst = ModelInstance::new(u, a, v, w, gamma, lambda, sign)?;
    if restricted {
        inst.validate_restricted()?;
    }
    Ok(inst)
}

fn random_params<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.random_range(0.05..0.95), rng.random_range(0.1..=1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn tag(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

/// Whether a member asserts equality or its failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expectation {
    Equal,
    Differ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub instance: usize,
    pub point: Point,
    pub gap: f64,
}

/// Outcome of one checked identity.
///
/// For [`Expectation::Equal`], `max_gap` is the largest gap seen and the
/// witness is the worst sample whenever the check failed. For
/// [`Expectation::Differ`], `max_gap` is the smallest per-instance separation
/// and `tolerance` is the witness threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityReport {
    pub suite: String,
    pub member: String,
    pub expect: Expectation,
    pub instances: usize,
    pub samples: usize,
    pub max_gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl EqualityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Worst sample of one instance.
#[derive(Debug, Clone)]
struct Probe {
    gap: f64,
    point: Option<Point>,
    samples: usize,
}

fn worst_gap<R, F>(rng: &mut R, dim: usize, samples: usize, mut gap: F) -> Result<Probe>
where
    R: Rng + ?Sized,
    F: FnMut(&Point) -> Result<f64>,
{
    let mut probe = Probe { gap: 0.0, point: None, samples };
    for index in 0..samples {
        let x = normal_point(rng, dim, SAMPLE_SCALE);
        let g = gap(&x).map_err(|e| Error::Sample { index, source: Box::new(e) })?;
        if probe.point.is_none() || g > probe.gap {
            probe.gap = g;
            probe.point = Some(x);
        }
    }
    Ok(probe)
}

fn relative_gap(fx: &Point, gx: &Point) -> f64 {
    fx.distance(gx) / (1.0 + fx.norm())
}

fn equal_probe<R: Rng + ?Sized>(rng: &mut R, f: &dyn PointMap, g: &dyn PointMap, dim: usize, samples: usize) -> Result<Probe> {
    worst_gap(rng, dim, samples, |x| Ok(relative_gap(&f.apply(x)?, &g.apply(x)?)))
}

/// `‖f(x)‖ / (1 + ‖x‖)` as the gap against the zero map.
fn vanishing_probe<R: Rng + ?Sized>(rng: &mut R, f: &dyn PointMap, dim: usize, samples: usize) -> Result<Probe> {
    worst_gap(rng, dim, samples, |x| Ok(f.apply(x)?.norm() / (1.0 + x.norm())))
}

fn affinity_probe_of<R: RngCore + ?Sized>(rng: &mut R, f: &dyn PointMap, dim: usize, trials: usize) -> Result<Probe> {
    let found = affinity_witness(f, dim, trials, rng.next_u64())?;
    let (point, gap) = match found {
        Some((p, g)) => (Some(p), g),
        None => (None, 0.0),
    };
    Ok(Probe { gap, point, samples: trials * 3 })
}

/// Sampled comparison of two maps over points drawn as `10·N(0, I)`.
///
/// The gap is `‖f(x) − g(x)‖ / (1 + ‖f(x)‖)`.
pub fn operators_equal<F, G>(f: &F, g: &G, dim: usize, samples: usize, seed: u64, tol: f64) -> Result<EqualityReport>
where
    F: PointMap + ?Sized,
    G: PointMap + ?Sized,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("operators_equal needs at least one sample".into()));
    }
    let mut rng = sampling::rng(seed);
    let probe = worst_gap(&mut rng, dim, samples, |x| Ok(relative_gap(&f.apply(x)?, &g.apply(x)?)))?;
    let pass = probe.gap <= tol;
    Ok(EqualityReport {
        suite: String::new(),
        member: String::new(),
        expect: Expectation::Equal,
        instances: 1,
        samples,
        max_gap: probe.gap,
        tolerance: tol,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        witness: if pass { None } else { probe.point.map(|point| Witness { instance: 0, point, gap: probe.gap }) },
        note: None,
    })
}

/// First of `budget` sampled points where `‖f(x) − g(x)‖ > threshold`.
pub fn find_witness<F, G>(f: &F, g: &G, dim: usize, budget: usize, seed: u64, threshold: f64) -> Result<Option<(Point, f64)>>
where
    F: PointMap + ?Sized,
    G: PointMap + ?Sized,
{
    if budget == 0 {
        return Err(Error::InvalidParameter("witness search needs a budget of at least one".into()));
    }
    let mut rng = sampling::rng(seed);
    Ok(search_witness(&mut rng, f, g, dim, budget, threshold)?.0)
}

/// Returns the witness if any, and the largest gap seen with the number of samples used.
fn search_witness<R, F, G>(rng: &mut R, f: &F, g: &G, dim: usize, budget: usize, threshold: f64) -> Result<(Option<(Point, f64)>, f64, usize)>
where
    R: Rng + ?Sized,
    F: PointMap + ?Sized,
    G: PointMap + ?Sized,
{
    let mut best = 0.0_f64;
    for index in 0..budget {
        let x = normal_point(rng, dim, SAMPLE_SCALE);
        let gap = f
            .apply(&x)
            .and_then(|fx| Ok(fx.distance(&g.apply(&x)?)))
            .map_err(|e| Error::Sample { index, source: Box::new(e) })?;
        if gap > threshold {
            return Ok((Some((x, gap)), gap, index + 1));
        }
        best = best.max(gap);
    }
    Ok((None, best, budget))
}

/// The registered identity suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteId {
    Eq9DrsForms,
    Eq10Swap,
    Eq6ResolventAvg,
    Eq7ReflectedAvg,
    Lem22TForms,
    Lem22RbrForms,
    Prop21Affine,
    Ex23Oracles,
    Lem24JrCommute,
    Lem25Commutator,
    Thm26Conjugation,
    Lem27Rr1Rr4,
    Prop28Equalities,
    Prop28Nonequalities,
}

impl SuiteId {
    pub const ALL: [SuiteId; 14] = [
        SuiteId::Eq9DrsForms,
        SuiteId::Eq10Swap,
        SuiteId::Eq6ResolventAvg,
        SuiteId::Eq7ReflectedAvg,
        SuiteId::Lem22TForms,
        SuiteId::Lem22RbrForms,
        SuiteId::Prop21Affine,
        SuiteId::Ex23Oracles,
        SuiteId::Lem24JrCommute,
        SuiteId::Lem25Commutator,
        SuiteId::Thm26Conjugation,
        SuiteId::Lem27Rr1Rr4,
        SuiteId::Prop28Equalities,
        SuiteId::Prop28Nonequalities,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SuiteId::Eq9DrsForms => "EQ9_DRS_FORMS",
            SuiteId::Eq10Swap => "EQ10_SWAP",
            SuiteId::Eq6ResolventAvg => "EQ6_RESOLVENT_AVG",
            SuiteId::Eq7ReflectedAvg => "EQ7_REFLECTED_AVG",
            SuiteId::Lem22TForms => "LEM22_T_FORMS",
            SuiteId::Lem22RbrForms => "LEM22_RBR_FORMS",
            SuiteId::Prop21Affine => "PROP21_AFFINE",
            SuiteId::Ex23Oracles => "EX23_ORACLES",
            SuiteId::Lem24JrCommute => "LEM24_JR_COMMUTE",
            SuiteId::Lem25Commutator => "LEM25_COMMUTATOR",
            SuiteId::Thm26Conjugation => "THM26_CONJUGATION",
            SuiteId::Lem27Rr1Rr4 => "LEM27_RR1_RR4",
            SuiteId::Prop28Equalities => "PROP28_EQUALITIES",
            SuiteId::Prop28Nonequalities => "PROP28_NONEQUALITIES",
        }
    }

    fn index(self) -> u64 {
        SuiteId::ALL.iter().position(|s| *s == self).expect("registered") as u64
    }

    /// Parses a comma separated list of tags.
    pub fn parse_list(s: &str) -> Result<Vec<SuiteId>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for SuiteId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SuiteId::ALL
            .into_iter()
            .find(|id| id.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Single compositions.
    pub single: f64,
    /// Identities between multi-term forms.
    pub multi: f64,
    /// Identities involving operator powers.
    pub power: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { single: 1e-10, multi: 1e-9, power: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub samples: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    pub tolerances: Tolerances,
    pub witness_threshold: f64,
    pub witness_budget: usize,
    /// Instance 0 of the model suites; its sign is used throughout them.
    pub model: ModelInstance,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 100,
            samples: 16,
            dim_min: 1,
            dim_max: 16,
            tolerances: Tolerances::default(),
            witness_threshold: 1e-6,
            witness_budget: 100,
            model: ModelInstance::worked(),
        }
    }
}

impl SuiteConfig {
    fn validate(&self) -> Result<()> {
        if self.instances == 0 || self.samples == 0 || self.witness_budget == 0 {
            return Err(Error::InvalidParameter("instances, samples and witness budget must be positive".into()));
        }
        if self.dim_min == 0 || self.dim_min > self.dim_max || self.dim_max > 64 {
            return Err(Error::InvalidParameter(format!("bad dimension range {}..={}", self.dim_min, self.dim_max)));
        }
        Ok(())
    }

    fn dim_of(&self, instance: usize) -> usize {
        self.dim_min + instance % (self.dim_max - self.dim_min + 1)
    }
}

/// Reports of one suite, one per member.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub members: Vec<EqualityReport>,
}

impl SuiteReport {
    pub fn verdict(&self) -> Verdict {
        if self.members.iter().all(EqualityReport::passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

struct MemberSpec {
    name: String,
    expect: Expectation,
    tol: f64,
}

fn member(name: impl Into<String>, expect: Expectation, tol: f64) -> MemberSpec {
    MemberSpec { name: name.into(), expect, tol }
}

/// Per-instance result of a member: the probe plus, for `Differ`, whether the threshold was crossed.
struct Outcome {
    probe: Probe,
    found: bool,
}

impl From<Probe> for Outcome {
    fn from(probe: Probe) -> Self {
        Outcome { probe, found: false }
    }
}

struct Runner<'a> {
    cfg: &'a SuiteConfig,
    suite: SuiteId,
}

impl Runner<'_> {
    fn stream(&self, member: u64, instance: usize) -> StreamRng {
        sampling::stream(self.cfg.seed, ((self.suite.index() + 1) << 48) | (member << 32) | instance as u64)
    }

    /// Generates `count` instances and evaluates every member on each of them.
    fn run<I, M, C>(&self, count: usize, members: Vec<MemberSpec>, note: Option<String>, make: M, check: C) -> Result<SuiteReport>
    where
        I: Send,
        M: Fn(usize, &mut StreamRng) -> Result<I> + Sync,
        C: Fn(&I, usize, &mut StreamRng) -> Result<Outcome> + Sync,
    {
        let per_instance: Vec<Vec<Outcome>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let inst = make(i, &mut self.stream(0, i))?;
                (0..members.len()).map(|m| check(&inst, m, &mut self.stream(m as u64 + 1, i))).collect()
            })
            .collect::<Result<_>>()?;
        let reports = members
            .iter()
            .enumerate()
            .map(|(m, spec)| {
                let outcomes: Vec<&Outcome> = per_instance.iter().map(|row| &row[m]).collect();
                self.aggregate(spec, &outcomes, note.clone())
            })
            .collect();
        Ok(SuiteReport { suite: self.suite, members: reports })
    }

    fn aggregate(&self, spec: &MemberSpec, outcomes: &[&Outcome], note: Option<String>) -> EqualityReport {
        let samples = outcomes.iter().map(|o| o.probe.samples).sum();
        let witness_at = |i: usize| {
            let o = outcomes[i];
            o.probe.point.clone().map(|point| Witness { instance: i, point, gap: o.probe.gap })
        };
        let (max_gap, verdict, witness) = match spec.expect {
            Expectation::Equal => {
                let (worst, gap) = outcomes
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bg), (i, o)| if o.probe.gap > bg { (i, o.probe.gap) } else { (bi, bg) });
                let pass = gap <= spec.tol;
                (gap, if pass { Verdict::Pass } else { Verdict::Fail }, if pass { None } else { witness_at(worst) })
            }
            Expectation::Differ => {
                let (weakest, gap) = outcomes
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |(bi, bg), (i, o)| if o.probe.gap < bg { (i, o.probe.gap) } else { (bi, bg) });
                let pass = outcomes.iter().all(|o| o.found);
                let witness = if outcomes[weakest].found {
                    witness_at(weakest)
                } else {
                    outcomes.iter().position(|o| o.found).and_then(witness_at)
                };
                (gap, if pass { Verdict::Pass } else { Verdict::Fail }, witness)
            }
        };
        EqualityReport {
            suite: self.suite.tag().to_string(),
            member: spec.name.clone(),
            expect: spec.expect,
            instances: outcomes.len(),
            samples,
            max_gap,
            tolerance: spec.tol,
            verdict,
            witness,
            note,
        }
    }

    fn random_pair(&self, i: usize, rng: &mut StreamRng) -> Result<SplitPair> {
        let kinds = OperatorKind::ALL;
        let (gamma, lambda) = random_params(rng);
        let spec = InstanceSpec {
            dim: self.cfg.dim_of(i),
            seed: rng.next_u64(),
            kind_a: kinds[i % 3],
            kind_b: kinds[(i / 3) % 3],
            gamma,
            lambda,
            w: WRule::Normal,
        };
        gen_instance(&spec)
    }
}

fn dim_of(pair: &SplitPair) -> usize {
    pair.dim().expect("generated pairs carry a dimension")
}

/// Runs the selected suites in the given order.
pub fn run_suite(ids: &[SuiteId], cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    ids.iter().map(|&id| run_one(id, cfg)).collect()
}

/// [`run_suite`] with tags given by name.
pub fn run_suite_named(names: &[&str], cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    let ids = names.iter().map(|n| n.parse()).collect::<Result<Vec<SuiteId>>>()?;
    run_suite(&ids, cfg)
}

fn run_one(id: SuiteId, cfg: &SuiteConfig) -> Result<SuiteReport> {
    use Expectation::Equal;
    let r = Runner { cfg, suite: id };
    let n = cfg.samples;
    let tol = cfg.tolerances;
    let pair_maker = |i: usize, rng: &mut StreamRng| r.random_pair(i, rng);
    match id {
        SuiteId::Eq9DrsForms => r.run(cfg.instances, vec![member("HALF_SUM=RESOLVENT_FORM", Equal, tol.single)], None, pair_maker, |p, _, rng| {
            let drs = DouglasRachford::new(p.a(), p.b())?;
            let f = |x: &Point| drs.apply(DrsForm::HalfSum, x);
            let g = |x: &Point| drs.apply(DrsForm::Resolvent, x);
            equal_probe(rng, &f, &g, dim_of(p), n).map(Outcome::from)
        }),
        SuiteId::Eq10Swap => r.run(cfg.instances, vec![member("T_BA=ID+J_A_R_B-J_B", Equal, tol.single)], None, pair_maker, |p, _, rng| {
            let ab = DouglasRachford::new(p.a(), p.b())?;
            let ba = DouglasRachford::new(p.b(), p.a())?;
            let f = |x: &Point| ba.apply(DrsForm::HalfSum, x);
            let g = |x: &Point| ab.apply_swapped(x);
            equal_probe(rng, &f, &g, dim_of(p), n).map(Outcome::from)
        }),
        SuiteId::Eq6ResolventAvg => {
            let members = vec![member("J_Ag=INVERSE_OF_ID+A_g", Equal, tol.multi), member("J_Bg=INVERSE_OF_ID+B_g", Equal, tol.multi)];
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let (op, j) = if m == 0 { (p.a(), p.jg_a()) } else { (p.b(), p.jg_b()) };
                let dim = dim_of(p);
                let perturbed = op.perturbed(p.perturbation())?;
                let direct = direct_resolvent(&perturbed, dim)?;
                equal_probe(rng, j, &direct, dim, n).map(Outcome::from)
            })
        }
        SuiteId::Eq7ReflectedAvg => {
            let members = vec![member("R_Ag=2gJ_A+2(1-g)w-ID", Equal, tol.single), member("R_Bg=2gJ_B+2(1-g)w-ID", Equal, tol.single)];
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let (j, rg) = if m == 0 { (p.j_a(), p.rg_a()) } else { (p.j_b(), p.rg_b()) };
                let (g, w) = (p.gamma(), p.perturbation().w());
                let formula = |x: &Point| Ok((j.eval(x)? * (2.0 * g)).add_scaled(2.0 * (1.0 - g), w) - x);
                equal_probe(rng, rg, &formula, dim_of(p), n).map(Outcome::from)
            })
        }
        SuiteId::Lem22TForms => {
            let forms: Vec<(Order, TForm)> = [Order::Forward, Order::Swapped]
                .into_iter()
                .flat_map(|o| TForm::ALL[1..].iter().map(move |f| (o, *f)))
                .collect();
            let members = forms.iter().map(|(o, f)| member(format!("{}:{}=DEF", order_tag(*o), f), Equal, tol.multi)).collect();
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let (o, form) = forms[m];
                let f = |x: &Point| p.aac(o, form, x);
                let g = |x: &Point| p.aac(o, TForm::Def, x);
                equal_probe(rng, &f, &g, dim_of(p), n).map(Outcome::from)
            })
        }
        SuiteId::Lem22RbrForms => {
            let forms: Vec<(Order, RbrForm)> = [Order::Forward, Order::Swapped]
                .into_iter()
                .flat_map(|o| RbrForm::ALL[1..].iter().map(move |f| (o, *f)))
                .collect();
            let members = forms.iter().map(|(o, f)| member(format!("{}:{}=COMPOSE", order_tag(*o), f), Equal, tol.multi)).collect();
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let (o, form) = forms[m];
                let f = |x: &Point| p.rbr(o, form, x);
                let g = |x: &Point| p.rbr(o, RbrForm::Compose, x);
                equal_probe(rng, &f, &g, dim_of(p), n).map(Outcome::from)
            })
        }
        SuiteId::Prop21Affine => {
            let names = ["J_A", "R_A", "J_Ag", "R_Ag", "J_B", "R_B", "J_Bg", "R_Bg"];
            let members = names.iter().map(|s| member(format!("AFFINE:{s}"), Equal, tol.multi)).collect();
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let ops = [p.j_a(), p.r_a(), p.jg_a(), p.rg_a(), p.j_b(), p.r_b(), p.jg_b(), p.rg_b()];
                affinity_probe_of(rng, ops[m], dim_of(p), n).map(Outcome::from)
            })
        }
        SuiteId::Ex23Oracles => {
            let members = ClosedFormId::BASIC.iter().map(|id| member(id.tag(), Equal, tol.multi)).collect();
            let sign = cfg.model.sign();
            let note = Some(format!("a_sign={sign}"));
            r.run(
                cfg.instances,
                members,
                note,
                |i, rng| {
                    let inst = random_model_instance(rng, cfg.dim_of(i), false, sign)?;
                    let pair = inst.split_pair();
                    Ok((inst, pair))
                },
                |(inst, pair), m, rng| {
                    let id = ClosedFormId::BASIC[m];
                    let f = |x: &Point| closed_form_eval(inst, id, x);
                    let g = |x: &Point| compositional_eval_with(pair, id, x);
                    equal_probe(rng, &f, &g, inst.dim(), n).map(Outcome::from)
                },
            )
        }
        SuiteId::Lem24JrCommute => {
            let members = vec![member("J_Ag_R_Ag=R_Ag_J_Ag", Equal, tol.single), member("J_Bg_R_Bg=R_Bg_J_Bg", Equal, tol.single)];
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let (j, rf) = if m == 0 { (p.jg_a(), p.rg_a()) } else { (p.jg_b(), p.rg_b()) };
                let f = |x: &Point| j.eval(&rf.eval(x)?);
                let g = |x: &Point| rf.eval(&j.eval(x)?);
                equal_probe(rng, &f, &g, dim_of(p), n).map(Outcome::from)
            })
        }
        SuiteId::Lem25Commutator => {
            let members = vec![
                member("LHS=AVERAGED_FORM", Equal, tol.multi),
                member("AVERAGED_FORM=BASE_FORM", Equal, tol.multi),
                member("LHS_VANISHES", Equal, tol.multi),
            ];
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                let terms = |x: &Point| p.commutator_lemma25(x);
                let dim = dim_of(p);
                match m {
                    0 => equal_probe(rng, &|x: &Point| Ok(terms(x)?.lhs), &|x: &Point| Ok(terms(x)?.via_averaged), dim, n),
                    1 => equal_probe(rng, &|x: &Point| Ok(terms(x)?.via_averaged), &|x: &Point| Ok(terms(x)?.via_base), dim, n),
                    _ => vanishing_probe(rng, &|x: &Point| Ok(terms(x)?.lhs), dim, n),
                }
                .map(Outcome::from)
            })
        }
        SuiteId::Thm26Conjugation => {
            const POWERS: [usize; 6] = [1, 2, 4, 8, 16, 32];
            let members = POWERS.iter().map(|k| member(format!("N={k}"), Equal, tol.power)).collect();
            r.run(cfg.instances, members, None, pair_maker, |p, m, rng| {
                worst_gap(rng, dim_of(p), n, |x| Ok(p.conjugation_residual(POWERS[m], x)? / (1.0 + x.norm()))).map(Outcome::from)
            })
        }
        SuiteId::Lem27Rr1Rr4 => {
            let members = vec![
                member("RR0:T_AFFINE", Equal, tol.multi),
                member("RR0:T_SWAPPED_AFFINE", Equal, tol.multi),
                member("RR1:T_RBR=RBR_T", Equal, tol.multi),
                member("RR2:COMMUTATOR=REFLECTION_FORM", Equal, tol.multi),
                member("RR4:EQUAL_SQUARES_COMMUTE", Equal, tol.multi),
            ];
            r.run(
                cfg.instances,
                members,
                None,
                |i, rng| {
                    let pair = r.random_pair(i, rng)?;
                    let twin = SplitPair::new(pair.a(), pair.a(), pair.perturbation().clone(), AacParams::new(pair.lambda())?)?;
                    Ok((pair, twin))
                },
                |(p, twin), m, rng| {
                    let dim = dim_of(p);
                    match m {
                        0 | 1 => {
                            let order = if m == 0 { Order::Forward } else { Order::Swapped };
                            affinity_probe_of(rng, &|x: &Point| p.aac(order, TForm::Def, x), dim, n)
                        }
                        2 => {
                            let t = |x: &Point| p.aac(Order::Forward, TForm::Def, x);
                            let rbr = |x: &Point| p.rbr(Order::Forward, RbrForm::Compose, x);
                            equal_probe(rng, &|x: &Point| t(&rbr(x)?), &|x: &Point| rbr(&t(x)?), dim, n)
                        }
                        3 => equal_probe(rng, &|x: &Point| Ok(p.dr_commutator(x)?.0), &|x: &Point| Ok(p.dr_commutator(x)?.1), dim, n),
                        _ => vanishing_probe(rng, &|x: &Point| Ok(twin.dr_commutator(x)?.0), dim, n),
                    }
                    .map(Outcome::from)
                },
            )
        }
        SuiteId::Prop28Equalities => {
            cfg.model.validate_restricted()?;
            let sides: [(&str, ClosedFormId, Box<dyn Fn(&SplitPair, &Point) -> Result<Point> + Sync>); 6] = [
                ("RAg_T:LEFT", ClosedFormId::RagT, Box::new(|p, x| compositional_eval_with(p, ClosedFormId::RagT, x))),
                ("RAg_T:RIGHT", ClosedFormId::RagT, Box::new(|p, x| p.aac(Order::Swapped, TForm::Def, &p.rg_a().eval(x)?))),
                ("RBg_T_AgBg", ClosedFormId::RbgTAgBg, Box::new(|p, x| compositional_eval_with(p, ClosedFormId::RbgTAgBg, x))),
                ("T_BgAg_RBg", ClosedFormId::TBgAgRbg, Box::new(|p, x| compositional_eval_with(p, ClosedFormId::TBgAgRbg, x))),
                ("RBg_T_BgAg", ClosedFormId::RbgTBgAg, Box::new(|p, x| compositional_eval_with(p, ClosedFormId::RbgTBgAg, x))),
                ("T_AgBg_RBg", ClosedFormId::TAgBgRbg, Box::new(|p, x| compositional_eval_with(p, ClosedFormId::TAgBgRbg, x))),
            ];
            let members = sides.iter().map(|(name, _, _)| member(*name, Equal, tol.multi)).collect();
            let sign = cfg.model.sign();
            let note = Some(format!(
                "a_sign={sign}; instance 0 is the configured model; T_BgAg_RBg closed form uses the unsimplified constant \
                 2lg(1-g)(Pa+w) + (1-lg(3-2g))(2(1-g)w - 2gPa) + 2lg(1-g)^2 P_U w + lg v, checked against composition, in place of s"
            ));
            r.run(cfg.instances, members, note, |i, rng| model_or_random(cfg, i, rng, sign), |(inst, pair), m, rng| {
                let (_, id, side) = &sides[m];
                let f = |x: &Point| closed_form_eval(inst, *id, x);
                let g = |x: &Point| side(pair, x);
                equal_probe(rng, &f, &g, inst.dim(), n).map(Outcome::from)
            })
        }
        SuiteId::Prop28Nonequalities => {
            cfg.model.validate_restricted()?;
            let which = [Noncommuting::Ex16, Noncommuting::Ex19];
            let members = which.iter().map(|w| member(w.tag(), Expectation::Differ, cfg.witness_threshold)).collect();
            let sign = cfg.model.sign();
            let note = Some(format!("a_sign={sign}; instance 0 is the configured model; gap is absolute, budget {}", cfg.witness_budget));
            r.run(cfg.instances, members, note, |i, rng| model_or_random(cfg, i, rng, sign), |(inst, pair), m, rng| {
                let (fid, gid) = which[m].sides();
                let f = |x: &Point| compositional_eval_with(pair, fid, x);
                let g = |x: &Point| compositional_eval_with(pair, gid, x);
                let (found, best, used) = search_witness(rng, &f, &g, inst.dim(), cfg.witness_budget, cfg.witness_threshold)?;
                Ok(match found {
                    Some((x, gap)) => Outcome { probe: Probe { gap, point: Some(x), samples: used }, found: true },
                    None => Outcome { probe: Probe { gap: best, point: None, samples: used }, found: false },
                })
            })
        }
    }
}

fn model_or_random(cfg: &SuiteConfig, i: usize, rng: &mut StreamRng, sign: ASign) -> Result<(ModelInstance, SplitPair)> {
    let inst = if i == 0 { cfg.model.clone() } else { random_model_instance(rng, cfg.dim_of(i), true, sign)? };
    let pair = inst.split_pair();
    Ok((inst, pair))
}

fn order_tag(o: Order) -> &'static str {
    match o {
        Order::Forward => "AB",
        Order::Swapped => "BA",
    }
}

/// `(Id + F)⁻¹` for an affine `F`, with the matrix of `F` read off from its values at `0` and `e_i`.
fn direct_resolvent(f: &Operator, dim: usize) -> Result<impl Fn(&Point) -> Result<Point> + use<>> {
    let origin = f.eval(&Point::zeros(dim))?;
    let mut m = nalgebra::DMatrix::<f64>::identity(dim, dim);
    for i in 0..dim {
        let col = f.eval(&Point::basis(dim, i))? - &origin;
        for (r, c) in col.coords().iter().enumerate() {
            m[(r, i)] += c;
        }
    }
    let m = Matrix::from_dmatrix(m)?;
    Ok(move |x: &Point| solve_linear(&m, &(x - &origin)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_monotone_linear;
    use crate::operator::{resolvent, Node};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn small_cfg() -> SuiteConfig {
        SuiteConfig { instances: 12, samples: 4, dim_max: 6, ..SuiteConfig::default() }
    }

    #[test]
    fn affine_random_is_monotone() {
        for seed in [7, 8, 9] {
            let mut rng = sampling::rng(seed);
            for dim in [1, 4, 16] {
                let op = gen_operator(&mut rng, OperatorKind::AffineRandom, dim).unwrap();
                match op.node() {
                    Node::AffineMap { linear, .. } => assert!(is_monotone_linear(linear)),
                    _ => panic!("expected an affine map"),
                }
            }
        }
    }

    #[test]
    fn projector_resolvent_round_trip() {
        let mut rng = sampling::rng(1);
        let op = gen_operator(&mut rng, OperatorKind::Projector, 8).unwrap();
        let j = resolvent(&op).unwrap();
        let x = normal_point(&mut rng, 8, 10.0);
        let y = j.eval(&x).unwrap();
        assert!((&y + &op.eval(&y).unwrap()).distance(&x) <= 1e-10);
    }

    #[test]
    fn instances_are_deterministic() {
        let spec = InstanceSpec {
            dim: 5,
            seed: 42,
            kind_a: OperatorKind::AffineRandom,
            kind_b: OperatorKind::Projector,
            gamma: 0.4,
            lambda: 0.9,
            w: WRule::Normal,
        };
        let (p1, p2) = (gen_instance(&spec).unwrap(), gen_instance(&spec).unwrap());
        let x = p(&[1.0, -2.0, 3.0, 0.5, 0.0]);
        assert_eq!(p1.aac(Order::Forward, TForm::Def, &x).unwrap(), p2.aac(Order::Forward, TForm::Def, &x).unwrap());
        assert!(gen_instance(&InstanceSpec { dim: 65, ..spec.clone() }).is_err());
        assert!(gen_instance(&InstanceSpec { gamma: 1.0, ..spec }).is_err());
    }

    #[test]
    fn operators_equal_examples() {
        let id = Operator::identity();
        let rep = operators_equal(&id, &id, 3, 10, 0, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.max_gap, 0.0);
        assert!(rep.witness.is_none());

        let spec = InstanceSpec {
            dim: 6,
            seed: 3,
            kind_a: OperatorKind::AffineRandom,
            kind_b: OperatorKind::Projector,
            gamma: 0.5,
            lambda: 1.0,
            w: WRule::Normal,
        };
        let pair = gen_instance(&spec).unwrap();
        let f = |x: &Point| pair.drs(Order::Forward, DrsForm::HalfSum, x);
        let g = |x: &Point| pair.drs(Order::Forward, DrsForm::Resolvent, x);
        assert!(operators_equal(&f, &g, 6, 20, 1, 1e-10).unwrap().passed());

        let inst = ModelInstance::worked();
        let pair = inst.split_pair();
        let f = |x: &Point| compositional_eval_with(&pair, ClosedFormId::RbgTAgBg, x);
        let g = |x: &Point| compositional_eval_with(&pair, ClosedFormId::TBgAgRbg, x);
        let rep = operators_equal(&f, &g, 2, 10, 0, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let w = rep.witness.unwrap();
        assert!((relative_gap(&f(&w.point).unwrap(), &g(&w.point).unwrap()) - w.gap).abs() <= 1e-15);
    }

    #[test]
    fn operators_equal_attaches_sample_to_errors() {
        let f = |x: &Point| Ok(x.clone());
        let g = |_: &Point| -> Result<Point> { Err(Error::NonFinite("probe")) };
        match operators_equal(&f, &g, 2, 3, 0, 1e-9) {
            Err(Error::Sample { index: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn witness_examples() {
        let id = Operator::identity();
        assert!(find_witness(&id, &id, 3, 50, 0, 1e-6).unwrap().is_none());
        let inst = ModelInstance::worked();
        let pair = inst.split_pair();
        let f = |x: &Point| compositional_eval_with(&pair, ClosedFormId::RbgTAgBg, x);
        let g = |x: &Point| compositional_eval_with(&pair, ClosedFormId::TBgAgRbg, x);
        assert!(find_witness(&f, &g, 2, 100, 0, 1e-6).unwrap().is_some());
    }

    #[test]
    fn registry_is_complete() {
        let tags: Vec<&str> = SuiteId::ALL.iter().map(|s| s.tag()).collect();
        assert_eq!(
            tags,
            [
                "EQ9_DRS_FORMS",
                "EQ10_SWAP",
                "EQ6_RESOLVENT_AVG",
                "EQ7_REFLECTED_AVG",
                "LEM22_T_FORMS",
                "LEM22_RBR_FORMS",
                "PROP21_AFFINE",
                "EX23_ORACLES",
                "LEM24_JR_COMMUTE",
                "LEM25_COMMUTATOR",
                "THM26_CONJUGATION",
                "LEM27_RR1_RR4",
                "PROP28_EQUALITIES",
                "PROP28_NONEQUALITIES",
            ]
        );
        for t in tags {
            assert_eq!(t.parse::<SuiteId>().unwrap().tag(), t);
        }
        assert!(matches!("EQ99".parse::<SuiteId>(), Err(Error::UnknownSuite(_))));
        assert!(matches!(run_suite_named(&["NOPE"], &small_cfg()), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn small_identity_suites_pass() {
        let cfg = small_cfg();
        let ids = [SuiteId::Eq9DrsForms, SuiteId::Lem22TForms, SuiteId::Thm26Conjugation];
        for rep in run_suite(&ids, &cfg).unwrap() {
            assert_eq!(rep.verdict(), Verdict::Pass, "{rep:?}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = small_cfg();
        let ids = [SuiteId::Eq6ResolventAvg, SuiteId::Prop28Nonequalities];
        assert_eq!(run_suite(&ids, &cfg).unwrap(), run_suite(&ids, &cfg).unwrap());
        let alone = run_suite(&ids[1..], &cfg).unwrap();
        assert_eq!(alone[0], run_suite(&ids, &cfg).unwrap()[1]);
    }
}
