//! Command implementations behind the `qdilate` binary.
//!
//! Every command returns an [`Output`]: the text to emit and whether all of
//! its checks passed. Input problems (unreadable files, malformed JSON,
//! bad flags) surface as [`CliError::Input`] and map to exit code 2.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdilate::ando::{
    special_ando_tuple, star_ando_tuple, verify_prop1, verify_prop2, verify_tuple,
};
use qdilate::hardy::Layout;
use qdilate::lifts::{
    douglas_lift, extract_ando_from_lift, minimality_check, nonisolifts_fixture, schaffer_lift,
    verify_lift, LiftRealization,
};
use qdilate::matcore::{cis, complex_serde, singular_values, MatrixJson, C64};
use qdilate::model::{
    canonical_unitary_pair, char_triple, fundamental_ops, model_ratio_test, truncation_for_tail,
    verify_canonical, verify_fundamental, verify_triple, CharFunction, DiskGrid, MODEL_TAIL_LIMIT,
};
use qdilate::pseudolift::{
    douglas_pseudo_lift, is_pseudo_lift, is_pseudo_triple, perturb_corner, perturb_off_diagonal,
    taylor_rigidity, uniqueness_test,
};
use qdilate::qpair::{cnu_decompose, parse_generator, PairFileError, QPair, DEFAULT_CNU_TOL};
use qdilate::report::{Check, CheckList, Environment, Report};
use qdilate::Error;

pub const STRUCTURAL_TOL: f64 = 1e-12;

/// Largest truncation the model suite will pick on its own.
const MODEL_TRUNC_CAP: usize = 400;

#[derive(Parser, Debug)]
#[command(
    name = "qdilate",
    version,
    about = "Dilations and models of q-commuting contraction pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a pair from a generator spec such as `clock-shift:n=4,scale=0.9`.
    Gen {
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites on a pair file.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of ando, schaffer, douglas, fundamental,
        /// canonical, triple, pseudo, model.
        #[arg(long, value_delimiter = ',', default_values_t = Suite::all())]
        suites: Vec<Suite>,
    },
    /// Build a Schäffer or Douglas lift and report its axioms.
    Lift {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: LiftChoice,
        /// Where to write the report; same as --out.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample the characteristic function on a disk grid into CSV.
    Charfn {
        #[arg(long)]
        pair: PathBuf,
        /// `RADIIxANGLES`, e.g. `32x64`.
        #[arg(long, default_value = "8x16")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic triple as JSON.
    Triple {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "4x8")]
        grid: String,
    },
    /// Douglas pseudo lift axioms, optionally after an off-diagonal perturbation.
    Pseudo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Reproduce a worked example.
    Demo {
        #[arg(value_enum, default_value_t = DemoName::Nonisolifts)]
        name: DemoName,
        #[arg(long, default_value_t = 8)]
        trunc: usize,
        /// Twist angle: q = e^{i theta}.
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub pair: PathBuf,
    #[arg(long, default_value_t = 24)]
    pub trunc: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ando,
    Schaffer,
    Douglas,
    Fundamental,
    Canonical,
    Triple,
    Pseudo,
    Model,
}

impl Suite {
    fn all() -> Vec<Suite> {
        Suite::value_variants().to_vec()
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Ando => "ando",
            Suite::Schaffer => "schaffer",
            Suite::Douglas => "douglas",
            Suite::Fundamental => "fundamental",
            Suite::Canonical => "canonical",
            Suite::Triple => "triple",
            Suite::Pseudo => "pseudo",
            Suite::Model => "model",
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LiftChoice {
    Schaffer,
    Douglas,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Nonisolifts,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

/// Text produced by a command, where it goes, and the verdict.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
    pub pass: bool,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    /// Writes `text` to `path` or stdout and `notes` to stderr.
    pub fn emit(&self) -> Result<(), CliError> {
        for n in &self.notes {
            eprintln!("{n}");
        }
        match &self.path {
            Some(p) => std::fs::write(p, &self.text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{}", self.text);
                Ok(())
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Gen { spec, seed, out } => cmd_gen(&spec, seed, out),
        Command::Verify { common, suites } => cmd_verify(&common, &suites),
        Command::Lift {
            common,
            kind,
            report,
        } => {
            let out = report.or(common.out.clone());
            cmd_lift(&Common { out, ..common }, kind)
        }
        Command::Charfn { pair, grid, out } => cmd_charfn(&pair, &grid, out),
        Command::Triple { common, grid } => cmd_triple(&common, &grid),
        Command::Pseudo { common, perturb } => cmd_pseudo(&common, perturb),
        Command::Demo {
            name: DemoName::Nonisolifts,
            trunc,
            theta,
            out,
        } => cmd_demo_nonisolifts(trunc, theta, out),
    }
}

fn environment(trunc: usize, tol: f64, seed: u64) -> Environment {
    Environment {
        trunc,
        tol,
        structural_tol: STRUCTURAL_TOL,
        seed,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn report_output(report: Report, path: Option<PathBuf>) -> Output {
    Output {
        pass: report.overall,
        text: to_json(&report),
        path,
        notes: Vec::new(),
    }
}

/// Reading a pair file: unreadable or malformed files are input errors, a
/// well-formed file describing an invalid pair is returned as `Err(check)`.
fn load_pair(path: &Path) -> Result<std::result::Result<QPair, Check>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    match QPair::from_json(&text) {
        Ok(p) => Ok(Ok(p)),
        Err(PairFileError::Syntax(e)) => Err(CliError::Input(format!("{}: {e}", path.display()))),
        Err(PairFileError::Invalid(e)) => Ok(Err(invalid_pair_check(&e))),
    }
}

fn invalid_pair_check(e: &Error) -> Check {
    Check {
        id: "pair.valid".into(),
        anchor: format!("|q| = 1, ||T_i|| <= 1, T1 T2 = q T2 T1: {e}"),
        residual: 1.0,
        tol: 0.0,
        pass: false,
    }
}

fn error_check(suite: &str, e: &Error) -> Check {
    Check {
        id: format!("{suite}.error"),
        anchor: e.to_string(),
        residual: 1.0,
        tol: 0.0,
        pass: false,
    }
}

fn skip_check(suite: &str, e: &Error) -> Check {
    Check {
        id: format!("{suite}.skipped"),
        anchor: format!("not applicable: {e}"),
        residual: 0.0,
        tol: 0.0,
        pass: true,
    }
}

pub fn cmd_gen(spec: &str, seed: u64, out: Option<PathBuf>) -> Result<Output, CliError> {
    let pair = parse_generator(spec, seed).map_err(|e| CliError::Input(e.to_string()))?;
    let t = pair.product();
    let summary = format!(
        "valid pair: dim {}, q = {:.15}{:+.15}i, ||T1|| = {:.12}, ||T2|| = {:.12}, rho(T) = {:.12}",
        pair.dim(),
        pair.q().re,
        pair.q().im,
        qdilate::matcore::op_norm(pair.t1()),
        qdilate::matcore::op_norm(pair.t2()),
        qdilate::matcore::spectral_radius(&t),
    );
    let mut text = pair.to_json();
    text.push('\n');
    Ok(Output {
        text,
        path: out,
        pass: true,
        notes: vec![summary],
    })
}

fn suite_checks(suite: Suite, pair: &QPair, trunc: usize, tol: f64) -> CheckList {
    let name = suite.name();
    let run = || -> qdilate::Result<CheckList> {
        match suite {
            Suite::Ando => {
                let tuple = special_ando_tuple(pair)?;
                let star = star_ando_tuple(pair)?;
                let mut out = verify_tuple(&tuple, pair, tol);
                out.extend(verify_prop1(&tuple, pair, tol));
                out.extend(verify_prop2(&star, pair, tol));
                Ok(out)
            }
            Suite::Schaffer => {
                let tuple = special_ando_tuple(pair)?;
                let lift = schaffer_lift(pair, &tuple, trunc)?;
                let mut out = lift_checks(&lift, pair, tol)?;
                out.extend(extract_ando_from_lift(&lift, pair, tol.max(1e-10))?.checks);
                Ok(out)
            }
            Suite::Douglas => {
                let lift = douglas_lift(pair, &star_ando_tuple(pair)?, trunc)?;
                lift_checks(&lift, pair, tol)
            }
            Suite::Fundamental => Ok(verify_fundamental(pair, &fundamental_ops(pair)?, tol)),
            Suite::Canonical => Ok(verify_canonical(pair, &canonical_unitary_pair(pair)?, tol)),
            Suite::Triple => verify_triple(pair, &char_triple(pair)?, &DiskGrid::default(), tol),
            Suite::Pseudo => pseudo_checks(pair, trunc, tol, None, 0),
            Suite::Model => {
                let t = pair.product();
                let unitary_dim = cnu_decompose(&t, DEFAULT_CNU_TOL)?.unitary_part.dim();
                if unitary_dim > 0 {
                    return Err(Error::NotCnu { unitary_dim });
                }
                let n = truncation_for_tail(&t, MODEL_TAIL_LIMIT, MODEL_TRUNC_CAP).ok_or(
                    Error::TailTooLarge {
                        tail: qdilate::model::truncation_tail(&t, MODEL_TRUNC_CAP),
                        limit: MODEL_TAIL_LIMIT,
                    },
                )?;
                model_ratio_test(pair, n.max(1))
            }
        }
    };
    match run() {
        Ok(c) => c,
        Err(e @ Error::NotCnu { .. }) if matches!(suite, Suite::Triple | Suite::Model) => {
            let mut out = CheckList::new();
            out.push(skip_check(name, &e));
            out
        }
        Err(e @ Error::TailTooLarge { .. }) if suite == Suite::Model => {
            let mut out = CheckList::new();
            out.push(skip_check(name, &e));
            out
        }
        Err(e) => {
            let mut out = CheckList::new();
            out.push(error_check(name, &e));
            out
        }
    }
}

fn lift_checks(lift: &LiftRealization, pair: &QPair, tol: f64) -> qdilate::Result<CheckList> {
    let mut out = verify_lift(lift, pair, tol)?;
    out.extend(minimality_check(lift, pair));
    Ok(out)
}

pub fn cmd_verify(common: &Common, suites: &[Suite]) -> Result<Output, CliError> {
    let env = environment(common.trunc, common.tol, common.seed);
    let pair = match load_pair(&common.pair)? {
        Ok(p) => p,
        Err(check) => {
            return Ok(report_output(
                Report::new("verify", vec![check], env),
                common.out.clone(),
            ))
        }
    };
    let mut wanted: Vec<Suite> = suites.to_vec();
    wanted.sort_by_key(|s| s.name());
    wanted.dedup();
    let results: Vec<CheckList> = std::thread::scope(|scope| {
        let handles: Vec<_> = wanted
            .iter()
            .map(|&s| {
                let pair = &pair;
                scope.spawn(move || suite_checks(s, pair, common.trunc, common.tol))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    let records = results.into_iter().flat_map(|c| c.checks).collect();
    let name = wanted
        .iter()
        .map(|s| s.name())
        .collect::<Vec<_>>()
        .join(",");
    Ok(report_output(
        Report::new(format!("verify:{name}"), records, env),
        common.out.clone(),
    ))
}

#[derive(Serialize)]
struct LayoutJson {
    head_dim: usize,
    fiber_dim: usize,
    max_degree: usize,
    tail_dim: usize,
    total_dim: usize,
}

impl From<Layout> for LayoutJson {
    fn from(l: Layout) -> Self {
        LayoutJson {
            head_dim: l.head_dim,
            fiber_dim: l.hardy.fiber_dim,
            max_degree: l.hardy.max_degree,
            tail_dim: l.tail_dim,
            total_dim: l.total_dim(),
        }
    }
}

#[derive(Serialize)]
struct LiftJson {
    report: Report,
    layout: LayoutJson,
    pi: MatrixJson,
    v1: MatrixJson,
    v2: MatrixJson,
}

pub fn cmd_lift(common: &Common, kind: LiftChoice) -> Result<Output, CliError> {
    let env = environment(common.trunc, common.tol, common.seed);
    let suite = match kind {
        LiftChoice::Schaffer => "lift:schaffer",
        LiftChoice::Douglas => "lift:douglas",
    };
    let pair = match load_pair(&common.pair)? {
        Ok(p) => p,
        Err(check) => {
            return Ok(report_output(
                Report::new(suite, vec![check], env),
                common.out.clone(),
            ))
        }
    };
    let lift = match kind {
        LiftChoice::Schaffer => schaffer_lift(&pair, &special_ando_tuple(&pair)?, common.trunc)?,
        LiftChoice::Douglas => douglas_lift(&pair, &star_ando_tuple(&pair)?, common.trunc)?,
    };
    let checks = lift_checks(&lift, &pair, common.tol)?;
    let report = Report::new(suite, checks.checks, env);
    let pass = report.overall;
    let body = LiftJson {
        report,
        layout: lift.layout().into(),
        pi: (&lift.pi).into(),
        v1: (&lift.v1.matrix).into(),
        v2: (&lift.v2.matrix).into(),
    };
    Ok(Output {
        text: to_json(&body),
        path: common.out.clone(),
        pass,
        notes: Vec::new(),
    })
}

/// `RADIIxANGLES` with both parts positive.
pub fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("grid '{s}' is not RADIIxANGLES"));
    let (r, a) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    if r == 0 || a == 0 {
        return Err(bad());
    }
    Ok((r, a))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn cmd_charfn(pair_path: &Path, grid: &str, out: Option<PathBuf>) -> Result<Output, CliError> {
    let (radii, angles) = parse_grid(grid)?;
    let pair = match load_pair(pair_path)? {
        Ok(p) => p,
        Err(check) => return Err(CliError::Input(check.anchor)),
    };
    let theta = CharFunction::new(&pair.product())?;
    let (d, ds) = (theta.defect().dim(), theta.defect_star().dim());
    let k = d.min(ds);
    let mut text = String::from("re_z,im_z");
    for i in 1..=k {
        write!(text, ",sv{i}").unwrap();
    }
    text.push_str(",delta_norm\n");
    let mut notes = Vec::new();
    if d == 0 {
        notes.push("note: the defect space of T is trivial; Theta has no entries".into());
        return Ok(Output {
            text,
            path: out,
            pass: true,
            notes,
        });
    }
    let mut row = |z: C64, delta: Option<f64>, sv: &[f64]| {
        write!(text, "{},{}", fmt_f(z.re), fmt_f(z.im)).unwrap();
        for s in sv.iter().take(k) {
            write!(text, ",{}", fmt_f(*s)).unwrap();
        }
        match delta {
            Some(x) => writeln!(text, ",{}", fmt_f(x)).unwrap(),
            None => text.push_str(",\n"),
        }
    };
    for z in DiskGrid::new(radii, angles).points() {
        let mut sv = singular_values(&theta.eval(z)?);
        sv.resize(k, 0.0);
        row(z, None, &sv);
    }
    let mut skipped = 0;
    for z in DiskGrid::circle(angles).points() {
        match (theta.eval(z), theta.delta(z)) {
            (Ok(th), Ok(delta)) => {
                let mut sv = singular_values(&th);
                sv.resize(k, 0.0);
                row(z, Some(qdilate::matcore::op_norm(&delta)), &sv);
            }
            (Err(Error::SingularResolvent { .. }), _)
            | (_, Err(Error::SingularResolvent { .. })) => skipped += 1,
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    if skipped > 0 {
        notes.push(format!(
            "note: {skipped} boundary points skipped where I - zT* is singular"
        ));
    }
    Ok(Output {
        text,
        path: out,
        pass: true,
        notes,
    })
}

#[derive(Serialize)]
struct ThetaSample {
    #[serde(with = "complex_serde")]
    z: C64,
    value: MatrixJson,
}

#[derive(Serialize)]
struct TripleJson {
    #[serde(with = "complex_serde")]
    q: C64,
    defect_dim: usize,
    defect_star_dim: usize,
    unitary_dim: usize,
    g1: MatrixJson,
    g2: MatrixJson,
    theta: Vec<ThetaSample>,
    report: Report,
}

pub fn cmd_triple(common: &Common, grid: &str) -> Result<Output, CliError> {
    let (radii, angles) = parse_grid(grid)?;
    let env = environment(common.trunc, common.tol, common.seed);
    let pair = match load_pair(&common.pair)? {
        Ok(p) => p,
        Err(check) => {
            return Ok(report_output(
                Report::new("triple", vec![check], env),
                common.out.clone(),
            ))
        }
    };
    let triple = char_triple(&pair)?;
    let grid = DiskGrid::new(radii, angles);
    let checks = verify_triple(&pair, &triple, &grid, common.tol)?;
    let mut theta = Vec::new();
    for z in grid.points() {
        theta.push(ThetaSample {
            z,
            value: (&triple.theta.eval(z)?).into(),
        });
    }
    let report = Report::new("triple", checks.checks, env);
    let pass = report.overall;
    let body = TripleJson {
        q: triple.q,
        defect_dim: triple.theta.defect().dim(),
        defect_star_dim: triple.theta.defect_star().dim(),
        unitary_dim: triple.unitary.dim(),
        g1: (&triple.fundamental.g1).into(),
        g2: (&triple.fundamental.g2).into(),
        theta,
        report,
    };
    Ok(Output {
        text: to_json(&body),
        path: common.out.clone(),
        pass,
        notes: Vec::new(),
    })
}

/// Pseudo-lift axioms, uniqueness and Taylor rigidity; with `perturb`, the
/// uniqueness test runs on the perturbed candidate instead.
fn pseudo_checks(
    pair: &QPair,
    trunc: usize,
    tol: f64,
    perturb: Option<f64>,
    seed: u64,
) -> qdilate::Result<CheckList> {
    let d = douglas_pseudo_lift(pair, trunc)?;
    let mut out = is_pseudo_triple(&d.triple, tol);
    out.extend(is_pseudo_lift(&d.pi, &d.triple, pair, tol)?);
    out.extend(taylor_rigidity(&d.triple, &d.fundamental, tol)?);
    let candidate = match perturb {
        None => d.triple.clone(),
        Some(eps) => perturb_off_diagonal(&d.triple, eps, seed, true)
            .unwrap_or_else(|_| perturb_corner(&d.triple, eps)),
    };
    for c in uniqueness_test(pair, &candidate, tol)?.checks {
        out.push(Check {
            id: format!("candidate.{}", c.id),
            ..c
        });
    }
    Ok(out)
}

pub fn cmd_pseudo(common: &Common, perturb: Option<f64>) -> Result<Output, CliError> {
    let env = environment(common.trunc, common.tol, common.seed);
    let pair = match load_pair(&common.pair)? {
        Ok(p) => p,
        Err(check) => {
            return Ok(report_output(
                Report::new("pseudo", vec![check], env),
                common.out.clone(),
            ))
        }
    };
    if let Some(eps) = perturb {
        if !eps.is_finite() {
            return Err(CliError::Input(format!("perturbation {eps} is not finite")));
        }
    }
    let checks = pseudo_checks(&pair, common.trunc, common.tol, perturb, common.seed)?;
    Ok(report_output(
        Report::new("pseudo", checks.checks, env),
        common.out.clone(),
    ))
}

pub fn cmd_demo_nonisolifts(
    trunc: usize,
    theta: f64,
    out: Option<PathBuf>,
) -> Result<Output, CliError> {
    let fx = nonisolifts_fixture(trunc, cis(theta)).map_err(|e| CliError::Input(e.to_string()))?;
    let mut records = fx.checks.checks;
    records.push(Check::at_least(
        "example.a.discriminator",
        "||V2 V1* - q V1* V2|| for A",
        fx.discriminator_a,
        0.0,
    ));
    records.push(Check::at_least(
        "example.b.discriminator",
        "||V2 V1* - q V1* V2|| for B",
        fx.discriminator_b,
        0.0,
    ));
    Ok(report_output(
        Report::new(
            "demo:nonisolifts",
            records,
            environment(trunc, STRUCTURAL_TOL, 0),
        ),
        out,
    ))
}
