//! Argument definitions and command dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equivar_core::chernweil::{
    validate_connection, verify_curvature, verify_basic_characteristic_forms, verify_weil_curvature, verify_moment_equivariance, verify_curvature_contractions, ChernError,
};
use equivar_core::eqmodels::{EqError, Tensor};
use equivar_core::ratlin::{LinAlgError, SparseVec};
use equivar_core::sdga::{builtin, builtin_connection, validate_bundle, validate_sdga, ModelError, ModelKind};
use equivar_core::weil::WeilAlgebra;
use equivar_core::{
    BundleModel, CartanElement, Connection, EquivariantComplex, InvariantPolynomial, LieAlgebraData, Polynomial,
    Rat, WeilModelElement,
};
use num::One;

use crate::document::{parse_lie_file, parse_lincomb_text, parse_model, BuildError, ModelDocument, ParseError};
use crate::expr::{eval, parse_expr, Interp};
use crate::report::{
    CheckEntry, ClassEntry, ErrorEntry, Report, Row, Table, EXIT_CHECK_FAILED, EXIT_INCONSISTENT, EXIT_OK, EXIT_PARSE,
};

#[derive(Parser, Debug)]
#[command(name = "equivar", version, about = "Exact equivariant cohomology and Chern-Weil classes of finite models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full axiom suite on a model.
    Validate(Common),
    /// Equivariant cohomology from the Cartan model.
    Cohomology(Common),
    /// Equivariant cohomology from the Weil model, cross-checked against Cartan.
    WeilCohomology(Common),
    /// Convert an element between the Cartan and Weil models.
    Mq(MqArgs),
    /// Chern-Weil form of an invariant polynomial and its class.
    Chern(BundleArgs),
    /// Curvature, moment maps and the equivariant curvatures.
    Curvature(BundleArgs),
    /// Identities relating curvature, moment maps and basic forms.
    PropChecks(BundleArgs),
    /// Print the model in the model file format.
    Export(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Builtin model name.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub builtin: Option<String>,
    /// Model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Acting Lie algebra: `u1`, `su2`, or a file with `dim` and `c` lines.
    #[arg(long)]
    pub lie: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub max_degree: u32,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Skip the axiom checks that normally run before a computation.
    #[arg(long)]
    pub no_validate: bool,
    /// Include wall-clock time in the report (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct MqArgs {
    #[command(flatten)]
    pub common: Common,
    /// Element in `u_i`, `theta_i` and basis names, e.g. `alpha - theta1`.
    #[arg(long)]
    pub element: String,
    #[arg(long, value_enum, default_value_t = Direction::ToWeil)]
    pub direction: Direction,
}

#[derive(Args, Debug, Clone)]
pub struct BundleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Invariant polynomial in `x1..xn`.
    #[arg(long)]
    pub poly: Option<String>,
    /// Connection components separated by `;`.
    #[arg(long)]
    pub connection: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToWeil,
    ToCartan,
}

/// An error that ends the command with the given exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub position: Option<(usize, usize)>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PARSE, kind: "usage", message: message.into(), position: None }
    }

    fn parse(e: ParseError) -> Self {
        Failure { code: EXIT_PARSE, kind: "parse", message: e.message, position: Some((e.line, e.column)) }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CHECK_FAILED, kind: "validation", message: message.into(), position: None }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INCONSISTENT, kind: "inconsistency", message: message.into(), position: None }
    }

    fn checks() -> Self {
        Failure::invalid("validation failed")
    }
}

impl From<EqError> for Failure {
    fn from(e: EqError) -> Self {
        match e {
            EqError::Weil(_) => Failure::invalid(e.to_string()),
            EqError::LinAlg(_) => Failure::internal(e.to_string()),
            EqError::CutoffExceeded { .. } | EqError::Inhomogeneous | EqError::NotThetaFree => {
                Failure::usage(e.to_string())
            }
        }
    }
}

impl From<LinAlgError> for Failure {
    fn from(e: LinAlgError) -> Self {
        Failure::internal(e.to_string())
    }
}

impl From<ChernError> for Failure {
    fn from(e: ChernError) -> Self {
        match e {
            ChernError::Eq(e) => e.into(),
            ChernError::NotClosed(_) | ChernError::Inconsistent(_) => Failure::internal(e.to_string()),
            ChernError::PolynomialArity { .. } | ChernError::PointDimension { .. } | ChernError::Model(_) => {
                Failure::usage(e.to_string())
            }
            _ => Failure::invalid(e.to_string()),
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Cohomology(_) => "cohomology",
            Command::WeilCohomology(_) => "weil-cohomology",
            Command::Mq(_) => "mq",
            Command::Chern(_) => "chern",
            Command::Curvature(_) => "curvature",
            Command::PropChecks(_) => "prop-checks",
            Command::Export(_) => "export",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Validate(c) | Command::Cohomology(c) | Command::WeilCohomology(c) | Command::Export(c) => c,
            Command::Mq(m) => &m.common,
            Command::Chern(b) | Command::Curvature(b) | Command::PropChecks(b) => &b.common,
        }
    }

    /// Canonical spelling of the invocation, with defaults filled in.
    pub fn echo(&self) -> String {
        let c = self.common();
        let mut parts = vec![self.name().to_string()];
        match (&c.builtin, &c.model) {
            (Some(b), _) => parts.push(format!("--builtin {b}")),
            (_, Some(p)) => parts.push(format!("--model {}", p.display())),
            _ => {}
        }
        if let Some(l) = &c.lie {
            parts.push(format!("--lie {l}"));
        }
        parts.push(format!("--max-degree {}", c.max_degree));
        match self {
            Command::Mq(m) => {
                parts.push(format!("--element {:?}", m.element));
                let d = match m.direction {
                    Direction::ToWeil => "to-weil",
                    Direction::ToCartan => "to-cartan",
                };
                parts.push(format!("--direction {d}"));
            }
            Command::Chern(b) | Command::Curvature(b) | Command::PropChecks(b) => {
                if let Some(p) = &b.poly {
                    parts.push(format!("--poly {p:?}"));
                }
                if let Some(k) = &b.connection {
                    parts.push(format!("--connection {k:?}"));
                }
            }
            _ => {}
        }
        if c.no_validate {
            parts.push("--no-validate".into());
        }
        parts.join(" ")
    }
}

struct Loaded {
    model: ModelKind,
    /// Basis names and degrees, for parsing flags.
    basis: Vec<(String, u32)>,
    connection: Option<Vec<SparseVec>>,
    polynomial: Option<String>,
}

fn lie_from_flag(flag: &str) -> Result<LieAlgebraData, Failure> {
    match flag {
        "u1" => Ok(LieAlgebraData::u1()),
        "su2" => Ok(LieAlgebraData::su2()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("--lie: cannot read `{path}`: {e}")))?;
            parse_lie_file(&text).map_err(Failure::parse)
        }
    }
}

fn load(c: &Common, report: &mut Report) -> Result<Loaded, Failure> {
    let lie = c.lie.as_deref().map(lie_from_flag).transpose()?;
    report.config("lie", c.lie.clone().unwrap_or_else(|| "model".into()));
    report.config("max_degree", c.max_degree.to_string());
    report.config("validate", if c.no_validate { "no" } else { "yes" });
    let (model, connection, polynomial) = if let Some(name) = &c.builtin {
        report.config("source", format!("builtin {name}"));
        let mut model = builtin(name).map_err(|e| Failure::usage(e.to_string()))?;
        if let Some(l) = lie {
            model = model.with_lie(l).map_err(|e| match e {
                ModelError::NonTrivialAction => Failure::usage(format!(
                    "`{name}` has a nontrivial action of its own Lie algebra, so --lie cannot replace it"
                )),
                other => Failure::usage(other.to_string()),
            })?;
        }
        (model, builtin_connection(name), None)
    } else {
        let path = c.model.as_ref().expect("clap enforces --builtin or --model");
        report.config("source", format!("file {}", path.display()));
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read `{}`: {e}", path.display())))?;
        let doc = parse_model(&text).map_err(Failure::parse)?;
        let model = doc.to_model(lie.as_ref()).map_err(|e| match e {
            BuildError::Invalid(e) => Failure::invalid(e.to_string()),
            BuildError::Usage(m) => Failure::usage(m),
        })?;
        let connection = doc.connection_vectors().transpose().map_err(Failure::usage)?;
        (model, connection, doc.polynomial.clone())
    };
    let m = model.sdga();
    let basis = m.names().iter().cloned().zip(m.degrees().iter().copied()).collect();
    Ok(Loaded { model, basis, connection, polynomial })
}

fn lie_check(name: &str, lie: &LieAlgebraData) -> CheckEntry {
    CheckEntry::single(name, lie.validate_lie().err().map(|v| v.to_string()), EXIT_CHECK_FAILED)
}

fn validation_checks(loaded: &Loaded) -> Result<Vec<CheckEntry>, Failure> {
    let m = loaded.model.sdga();
    let mut out = vec![lie_check("Lie algebra axioms for s", m.lie())];
    let weil = WeilAlgebra::build_unchecked(m.lie()).map_err(|e| Failure::internal(e.to_string()))?;
    let rep = weil.verify().map_err(|e| Failure::internal(e.to_string()))?;
    out.push(CheckEntry::from_report("Weil algebra identities", &rep, EXIT_CHECK_FAILED));
    match loaded.model.bundle() {
        Some(b) => {
            out.push(lie_check("Lie algebra axioms for g", b.g_lie()));
            out.push(CheckEntry::from_report("model axioms", &validate_bundle(b), EXIT_CHECK_FAILED));
            if let Some(theta) = &loaded.connection {
                match Connection::new_unchecked(b, theta.clone()) {
                    Ok(conn) => out.push(CheckEntry::from_report(
                        "connection conditions",
                        &validate_connection(&conn),
                        EXIT_CHECK_FAILED,
                    )),
                    Err(ChernError::Eq(EqError::Weil(_))) => {}
                    Err(e) => out.push(CheckEntry::single("connection conditions", Some(e.to_string()), EXIT_CHECK_FAILED)),
                }
            }
        }
        None => out.push(CheckEntry::from_report("model axioms", &validate_sdga(m), EXIT_CHECK_FAILED)),
    }
    Ok(out)
}

/// Validates unless disabled; a failed check ends the command.
fn prevalidate(c: &Common, loaded: &Loaded, report: &mut Report) -> Result<(), Failure> {
    if c.no_validate {
        return Ok(());
    }
    report.checks.extend(validation_checks(loaded)?);
    if report.checks_passed() {
        Ok(())
    } else {
        Err(Failure::checks())
    }
}

struct PolyInterp {
    n: usize,
}

impl Interp for PolyInterp {
    type V = Polynomial;
    fn number(&self, c: &Rat) -> Result<Polynomial, String> {
        Ok(Polynomial::constant(self.n, c.clone()))
    }
    fn name(&self, name: &str) -> Result<Polynomial, String> {
        let i = name
            .strip_prefix('x')
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|i| (1..=self.n).contains(i) && !name[1..].starts_with('0'))
            .ok_or_else(|| format!("unknown variable `{name}`; expected x1..x{}", self.n))?;
        Ok(Polynomial::var(self.n, i - 1))
    }
    fn add(&self, a: &Polynomial, b: &Polynomial) -> Result<Polynomial, String> {
        Ok(a + b)
    }
    fn neg(&self, a: &Polynomial) -> Polynomial {
        -a
    }
    fn mul(&self, a: &Polynomial, b: &Polynomial) -> Result<Polynomial, String> {
        Ok(a * b)
    }
}

fn expr_failure(what: &str, text: &str, e: crate::expr::ExprError) -> Failure {
    Failure {
        code: EXIT_PARSE,
        kind: "parse",
        message: format!("{what} `{text}`: {}", e.message),
        position: Some((1, e.offset + 1)),
    }
}

pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial, Failure> {
    let e = parse_expr(text).map_err(|e| expr_failure("polynomial", text, e))?;
    eval(&e, &PolyInterp { n }).map_err(|e| expr_failure("polynomial", text, e))
}

/// Elements of `W(s) (x) A`; model basis names shadow `u_i`/`theta_i`.
struct ElementInterp<'a> {
    cx: &'a EquivariantComplex,
}

impl Interp for ElementInterp<'_> {
    type V = Tensor;
    fn number(&self, c: &Rat) -> Result<Tensor, String> {
        Ok(self.cx.from_model(&self.cx.model().one()).scaled(c))
    }
    fn name(&self, name: &str) -> Result<Tensor, String> {
        let m = self.cx.model();
        if let Some(i) = m.find(name) {
            return Ok(self.cx.from_model(&SparseVec::unit(i)));
        }
        let l = self.cx.dim_s();
        let index = |prefix: &str| {
            name.strip_prefix(prefix)
                .filter(|s| !s.starts_with('0'))
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|i| (1..=l).contains(i))
        };
        let one = m.one();
        if let Some(i) = index("theta") {
            Ok(Tensor::term(self.cx.theta_monomial(i - 1), one))
        } else if let Some(i) = index("u") {
            Ok(Tensor::term(self.cx.u_monomial(i - 1), one))
        } else {
            Err(format!("unknown name `{name}`"))
        }
    }
    fn add(&self, a: &Tensor, b: &Tensor) -> Result<Tensor, String> {
        Ok(a.plus(b))
    }
    fn neg(&self, a: &Tensor) -> Tensor {
        a.scaled(&-Rat::one())
    }
    fn mul(&self, a: &Tensor, b: &Tensor) -> Result<Tensor, String> {
        Ok(self.cx.multiply(a, b))
    }
}

fn parse_element(text: &str, cx: &EquivariantComplex) -> Result<Tensor, Failure> {
    let e = parse_expr(text).map_err(|e| expr_failure("element", text, e))?;
    eval(&e, &ElementInterp { cx }).map_err(|e| expr_failure("element", text, e))
}

fn cohomology_table(
    title: &str,
    groups: impl Iterator<Item = Result<(u32, usize, Vec<String>), EqError>>,
) -> Result<Table, Failure> {
    let rows = groups
        .map(|g| g.map(|(degree, dimension, representatives)| Row { degree, dimension, representatives }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Table { title: title.to_string(), rows })
}

fn cartan_table(cx: &EquivariantComplex) -> Result<Table, Failure> {
    cohomology_table(
        "equivariant cohomology (Cartan model)",
        (0..=cx.cutoff()).map(|k| {
            let g = cx.equivariant_cohomology(k)?;
            Ok((k, g.dimension, g.representatives.iter().map(|r| cx.format(r)).collect()))
        }),
    )
}

fn weil_table(cx: &EquivariantComplex) -> Result<Table, Failure> {
    cohomology_table(
        "equivariant cohomology (Weil model)",
        (0..=cx.cutoff()).map(|k| {
            let g = cx.weil_basic_cohomology(k)?;
            Ok((k, g.dimension, g.representatives.iter().map(|r| cx.format(r)).collect()))
        }),
    )
}

fn bundle_of(loaded: &Loaded) -> Result<&BundleModel, Failure> {
    loaded
        .model
        .bundle()
        .ok_or_else(|| Failure::usage("this command needs a bundle model (one with a [lie_g] section)"))
}

fn connection_of(args: &BundleArgs, loaded: &Loaded, report: &mut Report) -> Result<Connection, Failure> {
    let bundle = bundle_of(loaded)?;
    let theta = match &args.connection {
        Some(text) => {
            let m = bundle.model();
            text.split(';')
                .map(|part| {
                    let terms = parse_lincomb_text(part.trim(), &loaded.basis).map_err(|e| Failure {
                        code: EXIT_PARSE,
                        kind: "parse",
                        message: format!("connection `{text}`: {}", e.message),
                        position: None,
                    })?;
                    let mut v = SparseVec::new();
                    for (name, c) in terms {
                        v.add_term(m.find(&name).expect("resolved"), &c);
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<_>, Failure>>()?
        }
        None => loaded
            .connection
            .clone()
            .ok_or_else(|| Failure::usage("no connection: pass --connection or add a [connection] section"))?,
    };
    let conn = Connection::new_unchecked(bundle, theta)?;
    report.config("connection", conn.format(conn.theta()));
    if !args.common.no_validate && args.connection.is_some() {
        let rep = validate_connection(&conn);
        report.checks.push(CheckEntry::from_report("connection conditions", &rep, EXIT_CHECK_FAILED));
        if !rep.passed() {
            return Err(Failure::checks());
        }
    }
    Ok(conn)
}

fn invariant_polynomial(text: &str, g: &LieAlgebraData, report: &mut Report) -> Result<InvariantPolynomial, Failure> {
    let p = parse_polynomial(text, g.dim())?;
    match InvariantPolynomial::new(p, g) {
        Ok(f) => Ok(f),
        Err(e) => {
            report
                .checks
                .push(CheckEntry::single(format!("Ad-invariance of {text}"), Some(e.to_string()), EXIT_CHECK_FAILED));
            Err(Failure::checks())
        }
    }
}

fn polynomial_text(args: &BundleArgs, loaded: &Loaded) -> Option<String> {
    args.poly.clone().or_else(|| loaded.polynomial.clone())
}

fn run_validate(c: &Common, report: &mut Report) -> Result<(), Failure> {
    let loaded = load(c, report)?;
    report.checks.extend(validation_checks(&loaded)?);
    if let (Some(text), Some(b)) = (&loaded.polynomial, loaded.model.bundle()) {
        let p = parse_polynomial(text, b.g_lie().dim())?;
        let r = InvariantPolynomial::new(p, b.g_lie()).err().map(|e| e.to_string());
        report.checks.push(CheckEntry::single(format!("Ad-invariance of {text}"), r, EXIT_CHECK_FAILED));
    }
    Ok(())
}

fn run_cohomology(c: &Common, weil: bool, report: &mut Report) -> Result<(), Failure> {
    let loaded = load(c, report)?;
    prevalidate(c, &loaded, report)?;
    let cx = EquivariantComplex::new(loaded.model.sdga().clone(), c.max_degree)?;
    let cartan = cartan_table(&cx)?;
    if !weil {
        report.tables.push(cartan);
        return Ok(());
    }
    let weil = weil_table(&cx)?;
    let mismatch = cartan
        .rows
        .iter()
        .zip(&weil.rows)
        .find(|(a, b)| a.dimension != b.dimension)
        .map(|(a, b)| format!("degree {}: Cartan {} vs Weil {}", a.degree, a.dimension, b.dimension));
    report.checks.push(CheckEntry::single("Cartan and Weil dimensions agree", mismatch, EXIT_INCONSISTENT));
    let mut bad = None;
    for k in 0..=c.max_degree {
        if !cx.mq_classes_agree(k)? {
            bad = Some(format!("degree {k}"));
            break;
        }
    }
    report.checks.push(CheckEntry::single("Mathai-Quillen maps match the classes", bad, EXIT_INCONSISTENT));
    report.tables.push(weil);
    Ok(())
}

fn run_mq(args: &MqArgs, report: &mut Report) -> Result<(), Failure> {
    let c = &args.common;
    let loaded = load(c, report)?;
    prevalidate(c, &loaded, report)?;
    let cx = EquivariantComplex::new(loaded.model.sdga().clone(), c.max_degree)?;
    let t = parse_element(&args.element, &cx)?;
    report.value("input", cx.format(&t));
    let same = |a: &Tensor, b: &Tensor, what: &str| {
        (a != b).then(|| format!("{what}: {} vs {}", cx.format(a), cx.format(b)))
    };
    match args.direction {
        Direction::ToWeil => {
            let a = CartanElement::new(t).map_err(Failure::from)?;
            let invariant = cx.is_invariant(&a);
            let inv_fail = (!invariant).then(|| format!("{} is not s-invariant", cx.format(&a)));
            report.checks.push(CheckEntry::single("input is s-invariant", inv_fail, EXIT_CHECK_FAILED));
            let w = cx.mq_to_weil(&a);
            report.value("weil", cx.format(&w));
            if invariant {
                let basic = cx.is_basic(&w);
                let fail = (!basic.is_basic()).then(|| format!("{basic:?}"));
                report.checks.push(CheckEntry::single("output is basic", fail, EXIT_INCONSISTENT));
                let lhs = cx.total_d(&w);
                let rhs = cx.mq_to_weil(&cx.cartan_d(&a));
                report.checks.push(CheckEntry::single(
                    "total d after the map equals the map after d_C",
                    same(&lhs, &rhs, "d"),
                    EXIT_INCONSISTENT,
                ));
                let back = cx.mq_to_cartan(&w);
                report.checks.push(CheckEntry::single(
                    "mapping back recovers the input",
                    same(&back, &a, "round trip"),
                    EXIT_INCONSISTENT,
                ));
            }
        }
        Direction::ToCartan => {
            let x = WeilModelElement::new(t);
            let basic = cx.is_basic(&x);
            let fail = (!basic.is_basic()).then(|| format!("{basic:?}"));
            let is_basic = fail.is_none();
            report.checks.push(CheckEntry::single("input is basic", fail, EXIT_CHECK_FAILED));
            let a = cx.mq_to_cartan(&x);
            report.value("cartan", cx.format(&a));
            if is_basic {
                let lhs = cx.mq_to_cartan(&WeilModelElement::new(cx.total_d(&x)));
                let rhs = cx.cartan_d(&a);
                report.checks.push(CheckEntry::single(
                    "d_C after the map equals the map after total d",
                    same(&lhs, &rhs, "d"),
                    EXIT_INCONSISTENT,
                ));
                let back = cx.mq_to_weil(&a);
                report.checks.push(CheckEntry::single(
                    "mapping back recovers the input",
                    same(&back, &x, "round trip"),
                    EXIT_INCONSISTENT,
                ));
            }
        }
    }
    Ok(())
}

fn run_chern(args: &BundleArgs, report: &mut Report) -> Result<(), Failure> {
    let c = &args.common;
    let loaded = load(c, report)?;
    prevalidate(c, &loaded, report)?;
    let conn = connection_of(args, &loaded, report)?;
    let text = polynomial_text(args, &loaded)
        .ok_or_else(|| Failure::usage("no polynomial: pass --poly or add a [polynomial] section"))?;
    report.config("polynomial", text.clone());
    let f = invariant_polynomial(&text, conn.bundle().g_lie(), report)?;
    let form = conn.chern_weil_form(&f)?;
    let analysis = form.analyze()?;
    let cx = form.complex();
    report.class = Some(ClassEntry {
        form: form.format(),
        degree: analysis.degree,
        zero: analysis.is_zero(),
        primitive: analysis.primitive.as_ref().map(|p| cx.format(p)),
        cohomology_dimension: analysis.cohomology_dimension,
    });
    Ok(())
}

fn run_curvature(args: &BundleArgs, report: &mut Report) -> Result<(), Failure> {
    let c = &args.common;
    let loaded = load(c, report)?;
    prevalidate(c, &loaded, report)?;
    let conn = connection_of(args, &loaded, report)?;
    report.checks.push(CheckEntry::from_report("curvature identities", &verify_curvature(&conn), EXIT_CHECK_FAILED));
    report.value("K", conn.format(&conn.curvature()));
    for (i, l) in conn.moments().iter().enumerate() {
        report.value(format!("L{}", i + 1), conn.format(l));
    }
    report.value("K_eq", conn.format_tensor(&conn.equivariant_curvature()));
    let w = conn.weil_equivariant_curvature()?;
    report.checks.push(CheckEntry::single("K_inf computed three ways agrees", None, EXIT_INCONSISTENT));
    report.value("K_inf", conn.format_tensor(&w.k_inf));
    Ok(())
}

fn run_prop_checks(args: &BundleArgs, report: &mut Report) -> Result<(), Failure> {
    let c = &args.common;
    let loaded = load(c, report)?;
    prevalidate(c, &loaded, report)?;
    let conn = connection_of(args, &loaded, report)?;
    let g = conn.bundle().g_lie().clone();
    if c.no_validate {
        let weil = WeilAlgebra::build_unchecked(conn.model().lie()).map_err(|e| Failure::internal(e.to_string()))?;
        let rep = weil.verify().map_err(|e| Failure::internal(e.to_string()))?;
        report.checks.push(CheckEntry::from_report("Weil algebra identities", &rep, EXIT_CHECK_FAILED));
    }
    report.checks.push(CheckEntry::from_report("moment maps transform equivariantly", &verify_moment_equivariance(&conn), EXIT_CHECK_FAILED));
    report.checks.push(CheckEntry::from_report("contractions of the curvature", &verify_curvature_contractions(&conn), EXIT_CHECK_FAILED));
    report.checks.push(CheckEntry::from_report("expansion of K_inf", &verify_weil_curvature(&conn)?, EXIT_INCONSISTENT));
    let polys: Vec<String> = match polynomial_text(args, &loaded) {
        Some(p) => vec![p],
        None if g.is_abelian() => vec!["x1".into(), "x1^2".into()],
        None => vec![(1..=g.dim()).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + ")],
    };
    report.config("polynomial", polys.join("; "));
    for text in &polys {
        let f = invariant_polynomial(text, &g, report)?;
        let rep = verify_basic_characteristic_forms(&conn, &f)?;
        report.checks.push(CheckEntry::from_report(format!("f(K_inf) is basic for f = {text}"), &rep, EXIT_CHECK_FAILED));
    }
    Ok(())
}

fn run_export(c: &Common, report: &mut Report) -> Result<(), Failure> {
    let loaded = load(c, report)?;
    let doc = ModelDocument::from_model(&loaded.model, loaded.connection.as_deref(), loaded.polynomial.as_deref());
    report.document = Some(doc.to_string());
    Ok(())
}

/// Runs a parsed command; the report carries the exit code.
pub fn run(cli: &Cli) -> Report {
    let start = Instant::now();
    let mut report = Report::new(cli.command.echo());
    let result = match &cli.command {
        Command::Validate(c) => run_validate(c, &mut report),
        Command::Cohomology(c) => run_cohomology(c, false, &mut report),
        Command::WeilCohomology(c) => run_cohomology(c, true, &mut report),
        Command::Mq(m) => run_mq(m, &mut report),
        Command::Chern(b) => run_chern(b, &mut report),
        Command::Curvature(b) => run_curvature(b, &mut report),
        Command::PropChecks(b) => run_prop_checks(b, &mut report),
        Command::Export(c) => run_export(c, &mut report),
    };
    report.exit_code = match result {
        Ok(()) => report.check_exit_code(),
        Err(f) => {
            let code = f.code.max(report.check_exit_code());
            report.error = Some(ErrorEntry {
                kind: f.kind.to_string(),
                message: f.message,
                line: f.position.map(|p| p.0),
                column: f.position.map(|p| p.1),
            });
            code
        }
    };
    if cli.command.common().timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    debug_assert!(report.exit_code != EXIT_OK || report.error.is_none());
    report
}

pub fn render(cli: &Cli, report: &Report) -> String {
    match cli.command.common().format {
        Format::Human => report.to_human(),
        Format::Machine => report.to_json(),
    }
}
