//! The `aac` command line: `verify`, `iterate` and `report`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::closed_form::{closed_form_eval, compositional_eval_with, ASign, ClosedFormId, ModelInstance, Noncommuting};
use crate::error::{Error, Result};
use crate::harness::{run_suite, Expectation, SuiteConfig, SuiteId, SuiteReport, Tolerances, Verdict};
use crate::iterate::{iterate, IterationTrace};
use crate::linalg::{orthonormalize, Point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "aac", version, about = "Resolvent and splitting-operator identity checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run identity suites and write one report per suite.
    Verify(CommonArgs),
    /// Run the AAC fixed-point iteration and write its trace.
    Iterate(CommonArgs),
    /// Tabulate closed-form against compositional values at the probe point.
    Report(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma separated suite tags.
    #[arg(long)]
    pub suites: Option<String>,
}

/// Flat key/value run configuration. Absent keys fall back to the worked instance.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub w: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    #[serde(rename = "U")]
    pub u: Option<Vec<Vec<f64>>>,
    pub a_sign: Option<String>,
    pub x0: Option<Vec<f64>>,
    pub probe: Option<Vec<f64>>,
    pub suites: Option<Vec<String>>,
    pub instances: Option<usize>,
    pub samples: Option<usize>,
    pub dim_min: Option<usize>,
    pub dim_max: Option<usize>,
    pub witness_budget: Option<usize>,
    pub witness_threshold: Option<f64>,
    pub tol_single: Option<f64>,
    pub tol_multi: Option<f64>,
    pub tol_power: Option<f64>,
    pub max_iters: Option<usize>,
    pub stop_tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validates the configuration and applies command line overrides.
    pub fn resolve(&self, args: &CommonArgs) -> Result<Resolved> {
        let default = ModelInstance::worked();
        let vec_or = |key: &str, given: &Option<Vec<f64>>, fallback: &Point| -> Result<Point> {
            match given {
                Some(c) => Point::new(c.clone()).map_err(|e| Error::Config(format!("{key}: {e}"))),
                None => Ok(fallback.clone()),
            }
        };
        let v = vec_or("v", &self.v, default.v())?;
        let a = vec_or("a", &self.a, default.a())?;
        let w = vec_or("w", &self.w, default.w())?;
        let dim = self.dim.unwrap_or(v.dim());
        for (key, p) in [("v", &v), ("a", &a), ("w", &w)] {
            if p.dim() != dim {
                return Err(Error::Config(format!("{key} has {} coordinates, expected dim = {dim}", p.dim())));
            }
        }
        let u = match &self.u {
            Some(rows) => {
                let vs = rows
                    .iter()
                    .map(|r| Point::new(r.clone()))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Config(format!("U: {e}")))?;
                orthonormalize(dim, &vs).map_err(|e| Error::Config(format!("U: {e}")))?
            }
            None if dim == default.dim() => default.subspace().clone(),
            None => return Err(Error::Config("U must be given when dim differs from the worked instance".into())),
        };
        let sign = match &self.a_sign {
            Some(s) => s.parse()?,
            None => ASign::MinusV,
        };
        let model = ModelInstance::new(u, a, v, w, self.gamma.unwrap_or(0.5), self.lambda.unwrap_or(0.5), sign)
            .map_err(|e| Error::Config(e.to_string()))?;

        let suites = match (&args.suites, &self.suites) {
            (Some(list), _) => SuiteId::parse_list(list)?,
            (None, Some(list)) => list.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            (None, None) => SuiteId::ALL.to_vec(),
        };
        if suites.iter().any(|s| matches!(s, SuiteId::Prop28Equalities | SuiteId::Prop28Nonequalities)) {
            model.validate_restricted().map_err(|e| Error::Config(e.to_string()))?;
        }
        if suites.contains(&SuiteId::Prop28Nonequalities) && model.w().norm() == 0.0 {
            return Err(Error::Config("degenerate parameters: w = 0 makes the non-equality suite vacuous".into()));
        }

        let base = SuiteConfig::default();
        let suite = SuiteConfig {
            seed: args.seed.or(self.seed).unwrap_or(base.seed),
            instances: self.instances.unwrap_or(base.instances),
            samples: self.samples.unwrap_or(base.samples),
            dim_min: self.dim_min.unwrap_or(base.dim_min),
            dim_max: self.dim_max.unwrap_or(base.dim_max),
            tolerances: Tolerances {
                single: self.tol_single.unwrap_or(base.tolerances.single),
                multi: self.tol_multi.unwrap_or(base.tolerances.multi),
                power: self.tol_power.unwrap_or(base.tolerances.power),
            },
            witness_threshold: self.witness_threshold.unwrap_or(base.witness_threshold),
            witness_budget: self.witness_budget.unwrap_or(base.witness_budget),
            model: model.clone(),
        };
        let zeros = Point::zeros(dim);
        let x0 = vec_or("x0", &self.x0, &zeros)?;
        let probe = vec_or("probe", &self.probe, &zeros)?;
        for (key, p) in [("x0", &x0), ("probe", &probe)] {
            if p.dim() != dim {
                return Err(Error::Config(format!("{key} has {} coordinates, expected dim = {dim}", p.dim())));
            }
        }
        let max_iters = self.max_iters.unwrap_or(1000);
        let stop_tol = self.stop_tol.unwrap_or(1e-10);
        if max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(stop_tol > 0.0) {
            return Err(Error::Config("stop_tol must be positive".into()));
        }
        let out = args.out.clone().or_else(|| self.out.clone()).unwrap_or_else(|| PathBuf::from("aac-out"));
        Ok(Resolved { model, suite, suites, x0, probe, max_iters, stop_tol, out })
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: ModelInstance,
    pub suite: SuiteConfig,
    pub suites: Vec<SuiteId>,
    pub x0: Point,
    pub probe: Point,
    pub max_iters: usize,
    pub stop_tol: f64,
    pub out: PathBuf,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn num_array(p: &Point) -> String {
    let items: Vec<String> = p.coords().iter().map(|c| num(*c)).collect();
    format!("[{}]", items.join(", "))
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

/// TOML text of one suite report, with fixed key order and number format.
pub fn render_suite(rep: &SuiteReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "suite = {}", quoted(rep.suite.tag()));
    let _ = writeln!(s, "verdict = {}", quoted(rep.verdict().tag()));
    for m in &rep.members {
        let _ = writeln!(s, "\n[[record]]");
        let _ = writeln!(s, "suite = {}", quoted(&m.suite));
        let _ = writeln!(s, "member = {}", quoted(&m.member));
        let expect = match m.expect {
            Expectation::Equal => "EQUAL",
            Expectation::Differ => "DIFFER",
        };
        let _ = writeln!(s, "expect = {}", quoted(expect));
        let _ = writeln!(s, "instances = {}", m.instances);
        let _ = writeln!(s, "samples = {}", m.samples);
        let _ = writeln!(s, "max_gap = {}", num(m.max_gap));
        let _ = writeln!(s, "tolerance = {}", num(m.tolerance));
        let _ = writeln!(s, "verdict = {}", quoted(m.verdict.tag()));
        if let Some(w) = &m.witness {
            let _ = writeln!(s, "witness_instance = {}", w.instance);
            let _ = writeln!(s, "witness_point = {}", num_array(&w.point));
            let _ = writeln!(s, "witness_gap = {}", num(w.gap));
        }
        if let Some(n) = &m.note {
            let _ = writeln!(s, "note = {}", quoted(n));
        }
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Runs the selected suites and writes `<out>/<SUITE>.toml`. Returns the reports.
pub fn cmd_verify(cfg: &Resolved) -> Result<Vec<SuiteReport>> {
    let reports = run_suite(&cfg.suites, &cfg.suite)?;
    for rep in &reports {
        write(&cfg.out.join(format!("{}.toml", rep.suite.tag())), &render_suite(rep))?;
    }
    Ok(reports)
}

/// CSV text of a trace: `n, x_1…x_d, shadow_1…shadow_d, residual`.
///
/// Row `n` carries `‖x_{n+1} − x_n‖`; the final row leaves the residual empty.
pub fn render_trace(trace: &IterationTrace) -> String {
    let d = trace.iterates[0].dim();
    let mut s = String::from("n");
    for i in 1..=d {
        let _ = write!(s, ",x_{i}");
    }
    for i in 1..=d {
        let _ = write!(s, ",shadow_{i}");
    }
    s.push_str(",residual\n");
    for (n, (x, sh)) in trace.iterates.iter().zip(&trace.shadows).enumerate() {
        let _ = write!(s, "{n}");
        for c in x.coords().iter().chain(sh.coords()) {
            let _ = write!(s, ",{}", num(*c));
        }
        match trace.residuals.get(n) {
            Some(r) => {
                let _ = writeln!(s, ",{}", num(*r));
            }
            None => s.push_str(",\n"),
        }
    }
    s
}

pub fn cmd_iterate(cfg: &Resolved) -> Result<IterationTrace> {
    let pair = cfg.model.split_pair();
    let trace = iterate(&pair, &cfg.x0, cfg.max_iters, cfg.stop_tol)?;
    write(&cfg.out.join("trace.csv"), &render_trace(&trace))?;
    Ok(trace)
}

/// One closed-form against compositional comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: String,
    pub closed_form: Point,
    pub compositional: Point,
    pub gap: f64,
}

/// Closed-form and compositional differences of a non-commuting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub id: String,
    pub closed_form_difference: Point,
    pub compositional_difference: Point,
    /// `‖compositional_difference‖`
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub sign: ASign,
    pub probe: Point,
    pub rows: Vec<ReportRow>,
    pub gaps: Vec<GapRow>,
}

pub fn build_report(inst: &ModelInstance, probe: &Point) -> Result<ReportTable> {
    let pair = inst.split_pair();
    let rows = ClosedFormId::all()
        .map(|id| {
            let cf = closed_form_eval(inst, id, probe)?;
            let comp = compositional_eval_with(&pair, id, probe)?;
            Ok(ReportRow { id: id.tag().to_string(), gap: cf.distance(&comp), closed_form: cf, compositional: comp })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps = [Noncommuting::Ex16, Noncommuting::Ex19]
        .into_iter()
        .map(|which| {
            let (f, g) = which.sides();
            let cf = closed_form_eval(inst, f, probe)? - closed_form_eval(inst, g, probe)?;
            let comp = compositional_eval_with(&pair, f, probe)? - compositional_eval_with(&pair, g, probe)?;
            Ok(GapRow { id: which.tag().to_string(), gap: comp.norm(), closed_form_difference: cf, compositional_difference: comp })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportTable { sign: inst.sign(), probe: probe.clone(), rows, gaps })
}

pub fn render_report(t: &ReportTable) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "a_sign = {}", quoted(t.sign.tag()));
    let _ = writeln!(s, "probe = {}", num_array(&t.probe));
    for r in &t.rows {
        let _ = writeln!(s, "\n[[row]]");
        let _ = writeln!(s, "id = {}", quoted(&r.id));
        let _ = writeln!(s, "closed_form = {}", num_array(&r.closed_form));
        let _ = writeln!(s, "compositional = {}", num_array(&r.compositional));
        let _ = writeln!(s, "gap = {}", num(r.gap));
    }
    for g in &t.gaps {
        let _ = writeln!(s, "\n[[noncommutation]]");
        let _ = writeln!(s, "id = {}", quoted(&g.id));
        let _ = writeln!(s, "closed_form_difference = {}", num_array(&g.closed_form_difference));
        let _ = writeln!(s, "closed_form_gap = {}", num(g.closed_form_difference.norm()));
        let _ = writeln!(s, "compositional_difference = {}", num_array(&g.compositional_difference));
        let _ = writeln!(s, "gap = {}", num(g.gap));
    }
    s
}

pub fn cmd_report(cfg: &Resolved) -> Result<ReportTable> {
    let table = build_report(&cfg.model, &cfg.probe)?;
    write(&cfg.out.join("report.toml"), &render_report(&table))?;
    Ok(table)
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_numerical() || matches!(e, Error::MonotonicityViolation { .. }) {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aac: {e}");
            exit_code_for(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32> {
    let (Command::Verify(args) | Command::Iterate(args) | Command::Report(args)) = cmd;
    let rc = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = rc.resolve(args)?;
    match cmd {
        Command::Verify(_) => {
            let reports = cmd_verify(&cfg)?;
            let mut ok = true;
            for rep in &reports {
                println!("{:<22} {}", rep.suite.tag(), rep.verdict());
                for m in rep.members.iter().filter(|m| !m.passed()) {
                    println!("  {:<34} FAIL max_gap={:.3e} tol={:.1e}", m.member, m.max_gap, m.tolerance);
                }
                ok &= rep.verdict() == Verdict::Pass;
            }
            println!("{} report(s) written to {}", reports.len(), cfg.out.display());
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Iterate(_) => {
            let trace = cmd_iterate(&cfg)?;
            println!("steps     {}", trace.steps());
            println!("last      {}", trace.last());
            println!("residual  {:.3e}", trace.residuals.last().copied().unwrap_or(0.0));
            match trace.rate {
                Some(r) => println!("rate      {r:.6}"),
                None => println!("rate      n/a"),
            }
            println!("converged {}", trace.converged);
            if trace.converged {
                Ok(EXIT_OK)
            } else {
                eprintln!("aac: not converged after {} iterations", trace.steps());
                Ok(EXIT_FAILED)
            }
        }
        Command::Report(_) => {
            let t = cmd_report(&cfg)?;
            println!("{:<12} {:>10}  closed form / composition", "id", "gap");
            for r in &t.rows {
                println!("{:<12} {:>10.3e}  {} / {}", r.id, r.gap, r.closed_form, r.compositional);
            }
            for g in &t.gaps {
                println!("{:<12} {:>10.3e}  closed-form difference {}", g.id, g.gap, g.closed_form_difference);
            }
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_errors_map_to_three() {
        assert_eq!(exit_code_for(&Error::NonFinite("x")), EXIT_NUMERICAL);
        let wrapped = Error::Sample { index: 4, source: Box::new(Error::NonFinite("x")) };
        assert_eq!(exit_code_for(&wrapped), EXIT_NUMERICAL);
        assert_eq!(exit_code_for(&Error::Config("bad".into())), EXIT_CONFIG);
        assert_eq!(exit_code_for(&Error::UnknownSuite("X".into())), EXIT_CONFIG);
    }

    #[test]
    fn defaults_resolve_to_worked_instance() {
        let cfg = RunConfig::default().resolve(&CommonArgs::default()).unwrap();
        assert_eq!(cfg.suites.len(), 14);
        assert_eq!(cfg.model.dim(), 2);
        assert_eq!(cfg.x0, Point::zeros(2));
        assert_eq!(cfg.stop_tol, 1e-10);
    }

    #[test]
    fn degenerate_w_is_rejected() {
        let rc = RunConfig::parse("w = [0.0, 0.0]\nsuites = [\"PROP28_NONEQUALITIES\"]").unwrap();
        assert!(matches!(rc.resolve(&CommonArgs::default()), Err(Error::Config(m)) if m.contains("degenerate")));
        let rc = RunConfig::parse("a = [0.0, 1.0]\nsuites = [\"PROP28_NONEQUALITIES\"]").unwrap();
        assert!(matches!(rc.resolve(&CommonArgs::default()), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_and_suites_are_rejected() {
        assert!(matches!(RunConfig::parse("gama = 0.3"), Err(Error::Config(_))));
        let args = CommonArgs { suites: Some("EQ9_DRS_FORMS,NOPE".into()), ..CommonArgs::default() };
        assert!(matches!(RunConfig::default().resolve(&args), Err(Error::UnknownSuite(s)) if s == "NOPE"));
    }

    #[test]
    fn full_config_parses() {
        let text = r#"
dim = 3
seed = 9
gamma = 0.3
lambda = 0.8
w = [1.0, 0.0, 2.0]
v = [0.0, 0.0, 1.0]
a = [0.0, 0.0, -1.0]
U = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]
a_sign = "PLUS_V"
x0 = [1.0, 1.0, 1.0]
probe = [0.5, 0.5, 0.5]
suites = ["EQ9_DRS_FORMS"]
max_iters = 50
stop_tol = 1e-9
tol_multi = 1e-8
"#;
        let args = CommonArgs { seed: Some(4), ..CommonArgs::default() };
        let cfg = RunConfig::parse(text).unwrap().resolve(&args).unwrap();
        assert_eq!(cfg.suite.seed, 4);
        assert_eq!(cfg.model.sign(), ASign::PlusV);
        assert_eq!(cfg.model.subspace().rank(), 2);
        assert_eq!(cfg.suite.tolerances.multi, 1e-8);
        assert_eq!(cfg.suites, vec![SuiteId::Eq9DrsForms]);
    }

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        let back: f64 = num(2.0 / 3.0).parse().unwrap();
        assert_eq!(back, 2.0 / 3.0);
    }

    #[test]
    fn worked_report_rows() {
        let probe = Point::new(vec![2.0, 0.0]).unwrap();
        let t = build_report(&ModelInstance::worked(), &probe).unwrap();
        let row = t.rows.iter().find(|r| r.id == "T_AgBg").unwrap();
        assert_eq!(row.closed_form, Point::new(vec![1.5, -0.5]).unwrap());
        assert!(row.gap <= 1e-14);
        let ex19 = t.gaps.iter().find(|g| g.id == "EX19").unwrap();
        assert!((ex19.closed_form_difference.norm() - 0.5_f64.sqrt()).abs() <= 1e-12);
        let text = render_report(&t);
        assert!(text.parse::<toml::Table>().is_ok());
    }
}
