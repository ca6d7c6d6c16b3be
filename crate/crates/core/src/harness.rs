//! Scenario configs, prepackaged demos and the JSON report they produce.
//!
//! Exit codes: 0 when every check passes, 1 when one fails, 2 for config
//! errors.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cstar_algebra::{AlgebraContext, Element, NormMode, OrderMode};
use crate::cstar_class::{
    verify_cstar_class, verify_monotone_triple, verify_triple_membership, CStarFunction, MonotoneTriple, PositiveMap,
};
use crate::error::{Error, Result};
use crate::fixed_point::{
    check_contraction, check_owc, find_common_fixed_point, specialize, Coefficients, Comparison, MappingSystem,
    SearchDomain, SelfMap, SixMaps, Specialization,
};
use crate::integral_solver::{
    estimate_m1, random_inits, solve, verify_lipschitz_conditions, verify_owc_conditions, wrapped_system, GridDomain,
    InstanceSpec, IntegralSystem, SolveParams,
};
use crate::modular_metric::{
    check_axioms, check_lambda_monotonicity, check_sequence, d0_distance, dstar_distance, geometric_weighted_metric,
    multiplication_metric, scalar_diagonal_metric, Carrier, MetricClass, ModularMetric, Point,
};
use crate::sampling::{self, ConeSampler};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const DEFAULT_SAMPLES: usize = 1000;
const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Axioms,
    CstarClass,
    Contraction,
    FixedPoint,
    Integral,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Axioms => "axioms",
            Kind::CstarClass => "cstar_class",
            Kind::Contraction => "contraction",
            Kind::FixedPoint => "fixed_point",
            Kind::Integral => "integral",
        };
        f.write_str(s)
    }
}

/// A config file. `target` is parsed according to `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub target: Value,
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                s.schema_version
            )));
        }
        Ok(s)
    }

    pub fn apply(mut self, o: Overrides) -> Result<Self> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(n) = o.samples {
            self.samples = Some(n);
        }
        if let Some(t) = o.tol {
            self.tol = Some(t);
        }
        if self.samples == Some(0) {
            return Err(Error::Config("samples: must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tol: must be positive, got {t}")));
            }
        }
        Ok(self)
    }

    fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    fn target<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        let v = if self.target.is_null() {
            json!({})
        } else {
            self.target.clone()
        };
        serde_json::from_value(v).map_err(|e| Error::Config(format!("target: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub details: Value,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, details: impl Serialize) -> Self {
        Self {
            name: name.into(),
            passed,
            details: serde_json::to_value(details).unwrap_or(Value::Null),
        }
    }

    /// A check whose computation errored counts as failed.
    fn from_result(name: &str, r: Result<Check>) -> Self {
        r.unwrap_or_else(|e| Check::new(name, false, json!({ "error": e.to_string() })))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub scenario: Value,
    pub anchor: String,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Report {
    pub fn new(scenario: Value, anchor: impl Into<String>, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            scenario,
            anchor: anchor.into(),
            checks,
            passed,
            wall_clock_ms: None,
            timestamp: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

// ---- catalogs ----

fn split_params(field: &str, name: &str) -> Result<(String, Vec<f64>)> {
    let mut parts = name.split(':');
    let head = parts.next().unwrap_or_default().to_string();
    let params = parts
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Config(format!("{field}: bad number '{p}' in '{name}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((head, params))
}

fn arity(field: &str, name: &str, params: &[f64], want: usize) -> Result<()> {
    if params.len() == want {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: '{name}' takes {want} parameter(s)")))
    }
}

/// `identity`, `constant:c`, `affine:a:b`, `two_thirds_step`.
pub fn parse_self_map(field: &str, name: &str) -> Result<SelfMap> {
    let (head, p) = split_params(field, name)?;
    match head.as_str() {
        "identity" => arity(field, name, &p, 0).map(|_| SelfMap::identity()),
        "constant" => arity(field, name, &p, 1).map(|_| SelfMap::constant(p[0])),
        "affine" => arity(field, name, &p, 2).map(|_| SelfMap::affine(p[0], p[1])),
        "two_thirds_step" => arity(field, name, &p, 0).map(|_| SelfMap::two_thirds_step()),
        _ => Err(Error::Config(format!("{field}: unknown map '{name}'"))),
    }
}

/// `linear:k`, `square` (`A ↦ A²`).
pub fn parse_positive_map(field: &str, name: &str) -> Result<PositiveMap> {
    let (head, p) = split_params(field, name)?;
    match head.as_str() {
        "linear" => arity(field, name, &p, 1).map(|_| PositiveMap::linear(p[0])),
        "square" => {
            arity(field, name, &p, 0)?;
            Ok(PositiveMap::new("square", |a| (a * a).symmetrized()))
        }
        _ => Err(Error::Config(format!("{field}: unknown positive map '{name}'"))),
    }
}

/// `subtract`, `scale:m`, `phi_subtract:k` (`φ = k·A`), and the
/// non-members `sum` (`A + B`) and `reversed` (`B − A`).
pub fn parse_cstar_function(field: &str, name: &str) -> Result<CStarFunction> {
    let (head, p) = split_params(field, name)?;
    match head.as_str() {
        "subtract" => arity(field, name, &p, 0).map(|_| CStarFunction::subtract()),
        "scale" => {
            arity(field, name, &p, 1)?;
            CStarFunction::scale(p[0]).map_err(|e| Error::Config(format!("{field}: {e}")))
        }
        "phi_subtract" => {
            arity(field, name, &p, 1)?;
            Ok(CStarFunction::phi_subtract(PositiveMap::linear(p[0])))
        }
        "sum" => arity(field, name, &p, 0).map(|_| CStarFunction::new("sum", |a, b| a + b)),
        "reversed" => arity(field, name, &p, 0).map(|_| CStarFunction::new("reversed", |a, b| b - a)),
        _ => Err(Error::Config(format!("{field}: unknown function '{name}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum MetricSpec {
    #[serde(rename = "example_4_1")]
    ScalarDiagonal,
    #[serde(rename = "example_4_2")]
    GeometricWeighted { c: f64, alpha: f64 },
    #[serde(rename = "multiplication")]
    Multiplication { lo: f64, hi: f64, points: usize },
    /// Deliberately non-symmetric evaluator, for negative fixtures.
    #[serde(rename = "asymmetric")]
    Asymmetric,
}

impl MetricSpec {
    pub fn build(&self) -> Result<ModularMetric> {
        match *self {
            MetricSpec::ScalarDiagonal => Ok(scalar_diagonal_metric()),
            MetricSpec::GeometricWeighted { c, alpha } => geometric_weighted_metric(c, alpha),
            MetricSpec::Multiplication { lo, hi, points } => {
                multiplication_metric(&GridDomain::trapezoid(lo, hi, points)?)
            }
            MetricSpec::Asymmetric => Ok(asymmetric_metric()),
        }
    }
}

/// `diag(d, d)` with `d = |x − y|/λ`, doubled when `x > y`.
pub fn asymmetric_metric() -> ModularMetric {
    ModularMetric::new(
        "asymmetric",
        *scalar_diagonal_metric().ctx(),
        MetricClass::Modular,
        Carrier::default_reals(),
        |lambda, x, y| {
            let (x, y) = (x.as_scalar().unwrap_or(f64::NAN), y.as_scalar().unwrap_or(f64::NAN));
            let d = (x - y).abs() / lambda * if x > y { 2.0 } else { 1.0 };
            Ok(Element::diag(&[d, d]))
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsTarget {
    pub metric: MetricSpec,
    #[serde(default)]
    pub class: Option<MetricClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassTarget {
    pub function: String,
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_norm")]
    pub norm: NormMode,
    #[serde(default = "default_order")]
    pub order: OrderMode,
    #[serde(default)]
    pub complex: bool,
}

fn default_dim() -> usize {
    2
}

fn default_norm() -> NormMode {
    NormMode::Operator
}

fn default_order() -> OrderMode {
    OrderMode::Loewner
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    /// Multiple of the unit.
    Scalar(f64),
    Matrix(Element),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapsSpec {
    Six {
        i: String,
        j: String,
        r: String,
        s: String,
        t: String,
        u: String,
    },
    /// Inputs of a specialization, in its documented order.
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub psi: String,
    pub phi: String,
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub maps: MapsSpec,
    #[serde(default)]
    pub specialization: Option<Specialization>,
    pub coefficients: Vec<CoeffSpec>,
    pub triple: TripleSpec,
    pub metric: MetricSpec,
    #[serde(default)]
    pub comparison: Option<Comparison>,
    #[serde(default)]
    pub commuting: bool,
}

impl SystemSpec {
    pub fn build(&self) -> Result<MappingSystem> {
        let metric = self.metric.build()?;
        let dim = metric.ctx().dim;
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| match c {
                CoeffSpec::Scalar(k) => Element::scalar(dim, *k),
                CoeffSpec::Matrix(e) => e.clone(),
            })
            .collect::<Vec<_>>();
        let triple = MonotoneTriple::new(
            parse_positive_map("triple.psi", &self.triple.psi)?,
            parse_positive_map("triple.phi", &self.triple.phi)?,
            parse_cstar_function("triple.f", &self.triple.f)?,
        );
        let sys = match (&self.maps, self.specialization) {
            (MapsSpec::Six { i, j, r, s, t, u }, None) => {
                if coeffs.len() != 3 {
                    return Err(Error::Config(format!(
                        "coefficients: six-map systems take 3, got {}",
                        coeffs.len()
                    )));
                }
                let maps = SixMaps {
                    i: parse_self_map("maps.i", i)?,
                    j: parse_self_map("maps.j", j)?,
                    r: parse_self_map("maps.r", r)?,
                    s: parse_self_map("maps.s", s)?,
                    t: parse_self_map("maps.t", t)?,
                    u: parse_self_map("maps.u", u)?,
                };
                let c = Coefficients {
                    a: coeffs[0].clone(),
                    b: coeffs[1].clone(),
                    c: coeffs[2].clone(),
                };
                MappingSystem::new(maps, c, triple, metric)?
            }
            (MapsSpec::List(names), Some(level)) => {
                let maps = names
                    .iter()
                    .enumerate()
                    .map(|(k, n)| parse_self_map(&format!("maps[{k}]"), n))
                    .collect::<Result<Vec<_>>>()?;
                specialize(level, maps, coeffs, triple, metric)?
            }
            (MapsSpec::Six { .. }, Some(_)) => {
                return Err(Error::Config("maps: a specialization takes a list of maps".into()))
            }
            (MapsSpec::List(_), None) => {
                return Err(Error::Config("specialization: required when maps is a list".into()))
            }
        };
        Ok(sys
            .with_comparison(self.comparison.unwrap_or(Comparison::Order))
            .with_commuting_pairs(self.commuting))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointTarget {
    pub system: SystemSpec,
    pub domain: SearchDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralTarget {
    pub instance: InstanceSpec,
    #[serde(default = "default_inits")]
    pub inits: usize,
    /// Samples for the wrapped contraction check; the scenario's count by default.
    #[serde(default)]
    pub contraction_samples: Option<usize>,
    /// Known solution to compare against, by catalog name (`sine`).
    #[serde(default)]
    pub expected: Option<String>,
}

fn default_inits() -> usize {
    5
}

// ---- scenario execution ----

/// Everything a config asks for, resolved before any check runs so that
/// config errors surface as such.
enum Plan {
    Axioms(ModularMetric),
    Class {
        f: CStarFunction,
        triple: Option<MonotoneTriple>,
        ctx: AlgebraContext,
        complex: bool,
    },
    Contraction(MappingSystem),
    FixedPoint(MappingSystem, SearchDomain),
    Integral(IntegralSystem, IntegralTarget),
}

fn plan(s: &Scenario) -> Result<Plan> {
    Ok(match s.kind {
        Kind::Axioms => {
            let t: AxiomsTarget = s.target()?;
            let mut m = t.metric.build()?;
            if let Some(c) = t.class {
                m = m.with_class(c);
            }
            Plan::Axioms(m)
        }
        Kind::CstarClass => {
            let t: ClassTarget = s.target()?;
            let ctx = AlgebraContext::new(t.dim)?.with_norm(t.norm).with_order(t.order);
            let f = parse_cstar_function("function", &t.function)?;
            let triple = match (&t.psi, &t.phi) {
                (Some(psi), Some(phi)) => Some(MonotoneTriple::new(
                    parse_positive_map("psi", psi)?,
                    parse_positive_map("phi", phi)?,
                    f.clone(),
                )),
                (None, None) => None,
                _ => return Err(Error::Config("psi, phi: give both or neither".into())),
            };
            Plan::Class {
                f,
                triple,
                ctx,
                complex: t.complex,
            }
        }
        Kind::Contraction => Plan::Contraction(s.target::<SystemSpec>()?.build()?),
        Kind::FixedPoint => {
            let t: FixedPointTarget = s.target()?;
            Plan::FixedPoint(t.system.build()?, t.domain)
        }
        Kind::Integral => {
            let t: IntegralTarget = s.target()?;
            if t.inits == 0 {
                return Err(Error::Config("inits: must be positive".into()));
            }
            if let Some(e) = &t.expected {
                if e != "sine" {
                    return Err(Error::Config(format!("expected: unknown solution '{e}'")));
                }
            }
            Plan::Integral(t.instance.build()?, t)
        }
    })
}

/// Runs a parsed scenario. `Err` means a config error (exit 2).
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    let plan = plan(s)?;
    let seed = s.seed;
    let n = s.samples();
    let tol = s.tol();
    let echo = serde_json::to_value(s).expect("scenario serializes");
    let (anchor, checks) = match plan {
        Plan::Axioms(metric) => ("modular metric axioms", axiom_checks(&metric, seed, n)),
        Plan::Class {
            f,
            triple,
            ctx,
            complex,
        } => {
            let mut sampler = if complex {
                ConeSampler::complex(seed)
            } else {
                ConeSampler::new(seed)
            };
            let checks = match triple {
                Some(t) => verify_triple_membership(&t, &ctx, &mut sampler, n)
                    .iter()
                    .map(class_check)
                    .collect(),
                None => vec![class_check(&verify_cstar_class(&f, &ctx, &mut sampler, n))],
            };
            ("C*-class function and monotone triple", checks)
        }
        Plan::Contraction(sys) => {
            let c = Check::from_result("contraction", contraction_check(&sys, seed, n));
            ("generalized contraction condition", vec![c])
        }
        Plan::FixedPoint(sys, dom) => ("common fixed point search", fixed_point_checks(&sys, &dom, tol)),
        Plan::Integral(sys, t) => {
            let samples = t.contraction_samples.unwrap_or(n);
            (
                "nonlinear integral system",
                integral_checks(&sys, &t, seed, n, samples, tol.max(1e-8)).0,
            )
        }
    };
    Ok(Report::new(echo, anchor, checks))
}

fn axiom_checks(metric: &ModularMetric, seed: u64, n: usize) -> Vec<Check> {
    let mut sampler = metric.sampler(seed);
    let mut checks = Vec::new();
    match check_axioms(metric, &mut sampler, n) {
        Ok(reports) => {
            for r in reports {
                checks.push(Check::new(format!("axiom {:?}", r.axiom), r.passed, &r));
            }
        }
        Err(e) => checks.push(Check::new("axioms", false, json!({ "error": e.to_string() }))),
    }
    checks.push(Check::from_result(
        "rate monotonicity",
        check_lambda_monotonicity(metric, &mut sampler, n).map(|r| Check::new("rate monotonicity", r.passed, &r)),
    ));
    checks
}

fn class_check(r: &crate::cstar_class::ClassReport) -> Check {
    Check::new(r.subject.clone(), r.passed, r)
}

fn contraction_check(sys: &MappingSystem, seed: u64, n: usize) -> Result<Check> {
    let r = check_contraction(sys, &mut sys.metric().sampler(seed), n)?;
    Ok(Check::new("contraction", r.passed, &r))
}

fn fixed_point_checks(sys: &MappingSystem, dom: &SearchDomain, tol: f64) -> Vec<Check> {
    let r = find_common_fixed_point(sys, dom, tol);
    vec![Check::from_result(
        "common fixed point",
        r.map(|r| Check::new("common fixed point", r.found(), &r)),
    )]
}

/// Checks on an integral instance; also returns the solution when found.
fn integral_checks(
    sys: &IntegralSystem,
    t: &IntegralTarget,
    seed: u64,
    n: usize,
    contraction_samples: usize,
    tol: f64,
) -> (Vec<Check>, Option<Vec<f64>>) {
    let mut checks = Vec::new();
    checks.push(Check::from_result(
        "solvability",
        sys.solvability().map(|s| {
            let m1 = sys.m1().unwrap_or_else(|| estimate_m1(sys));
            Check::new(
                "solvability",
                s.ok && s.identity_holds,
                json!({ "m1": m1, "report": s }),
            )
        }),
    ));
    let mut rng = sampling::seeded(seed);
    checks.push(Check::from_result(
        "Lipschitz conditions",
        verify_lipschitz_conditions(sys, &mut rng, (-10.0, 10.0), n)
            .map(|r| Check::new("Lipschitz conditions", r.passed, &r)),
    ));
    let params = SolveParams {
        tol,
        ..SolveParams::default()
    };
    let solved = solve(sys, &random_inits(sys.grid().len(), t.inits, seed), params);
    let solution = solved.as_ref().ok().map(|r| r.solution.clone());
    checks.push(Check::from_result(
        "solve",
        solved.map(|r| Check::new("solve", r.agreed_across_inits, &r)),
    ));
    let Some(x) = solution.clone() else {
        return (checks, None);
    };
    if t.expected.as_deref() == Some("sine") {
        let err = sys
            .grid()
            .points()
            .iter()
            .zip(&x)
            .map(|(t, v)| ((PI * t).sin() - v).abs())
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "matches sin(pi t)",
            err <= tol,
            json!({ "sup_error": err, "tol": tol }),
        ));
    }
    checks.push(Check::from_result(
        "commutation at solution",
        verify_owc_conditions(sys, &x, tol).map(|r| Check::new("commutation at solution", r.si_ok && r.tj_ok, r)),
    ));
    match wrapped_system(sys) {
        Ok(wrapped) => {
            let mut sampler = crate::modular_metric::Sampler::new(
                Carrier::Ball {
                    center: Point::Grid(x.clone()),
                    radius: 1.0,
                },
                seed,
            );
            checks.push(Check::from_result(
                "wrapped contraction",
                check_contraction(&wrapped, &mut sampler, contraction_samples)
                    .map(|r| Check::new("wrapped contraction", r.passed, &r)),
            ));
            let mut points = vec![Point::Grid(x.clone())];
            points.extend(
                random_inits(sys.grid().len(), 4, seed.wrapping_add(1))
                    .into_iter()
                    .map(Point::Grid),
            );
            checks.push(Check::from_result(
                "wrapped fixed point",
                find_common_fixed_point(&wrapped, &SearchDomain::Points(points), tol).map(|r| {
                    let ok = r.point.as_ref() == Some(&Point::Grid(x.clone())) && r.unique_in_domain;
                    Check::new(
                        "wrapped fixed point",
                        ok,
                        json!({ "unique_in_domain": r.unique_in_domain, "residuals": r.residuals, "hits": r.hits }),
                    )
                }),
            ));
        }
        Err(e) => checks.push(Check::new(
            "wrapped contraction",
            false,
            json!({ "error": e.to_string() }),
        )),
    }
    (checks, solution)
}

// ---- demos ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demo {
    #[serde(rename = "example_3_2")]
    EntrywiseFunctions,
    PositivityCounterexample,
    #[serde(rename = "example_4_1_axioms")]
    ScalarAxioms,
    #[serde(rename = "example_4_2_axioms")]
    GeometricAxioms,
    #[serde(rename = "example_4_3_cauchy")]
    MultiplicationCauchy,
    #[serde(rename = "example_4_4")]
    WorkedFixedPoint,
    #[serde(rename = "theorem_5_1_canonical")]
    IntegralCanonical,
}

impl Demo {
    pub const ALL: [Demo; 7] = [
        Demo::EntrywiseFunctions,
        Demo::PositivityCounterexample,
        Demo::ScalarAxioms,
        Demo::GeometricAxioms,
        Demo::MultiplicationCauchy,
        Demo::WorkedFixedPoint,
        Demo::IntegralCanonical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Demo::EntrywiseFunctions => "example_3_2",
            Demo::PositivityCounterexample => "positivity_counterexample",
            Demo::ScalarAxioms => "example_4_1_axioms",
            Demo::GeometricAxioms => "example_4_2_axioms",
            Demo::MultiplicationCauchy => "example_4_3_cauchy",
            Demo::WorkedFixedPoint => "example_4_4",
            Demo::IntegralCanonical => "theorem_5_1_canonical",
        }
    }

    fn anchor(self) -> &'static str {
        match self {
            Demo::EntrywiseFunctions => "entrywise-difference and scaling functions on 2x2 real matrices",
            Demo::PositivityCounterexample => "product of two positive matrices that is not positive",
            Demo::ScalarAxioms => "diagonal scalar modular metric on the reals",
            Demo::GeometricAxioms => "weighted diagonal modular metric on a geometric sequence",
            Demo::MultiplicationCauchy => "multiplication-operator modular metric on grid functions",
            Demo::WorkedFixedPoint => "six-map worked example with common fixed point 2",
            Demo::IntegralCanonical => "integral system with solution sin(pi t)",
        }
    }
}

impl FromStr for Demo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Demo::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown demo '{s}'")))
    }
}

const DEMO_SEED: u64 = 0;

pub fn run_demo(demo: Demo) -> Report {
    let checks = match demo {
        Demo::EntrywiseFunctions => demo_entrywise_functions(),
        Demo::PositivityCounterexample => demo_positivity(),
        Demo::ScalarAxioms => demo_scalar_axioms(),
        Demo::GeometricAxioms => {
            let m = geometric_weighted_metric(0.5, 2.0).expect("valid parameters");
            axiom_checks(&m, DEMO_SEED, DEFAULT_SAMPLES)
        }
        Demo::MultiplicationCauchy => demo_multiplication(),
        Demo::WorkedFixedPoint => demo_worked_example(),
        Demo::IntegralCanonical => demo_integral().0,
    };
    let echo = json!({ "demo": demo.name(), "seed": DEMO_SEED });
    Report::new(echo, demo.anchor(), checks)
}

/// The canonical integral demo's solution alongside its report, for CSV output.
pub fn run_integral_demo() -> (Report, GridDomain, Option<Vec<f64>>) {
    let (checks, grid, x) = demo_integral();
    let echo = json!({ "demo": Demo::IntegralCanonical.name(), "seed": DEMO_SEED });
    (Report::new(echo, Demo::IntegralCanonical.anchor(), checks), grid, x)
}

fn demo_entrywise_functions() -> Vec<Check> {
    let ctx = AlgebraContext::new(2)
        .expect("dim 2")
        .with_norm(NormMode::Frobenius)
        .with_order(OrderMode::Entrywise);
    let mut checks = Vec::new();
    let subtract = CStarFunction::subtract();
    let value = subtract.apply(&Element::diag(&[3.0, 3.0]), &Element::diag(&[1.0, 1.0]));
    checks.push(Check::new(
        "subtract formula",
        value == Element::diag(&[2.0, 2.0]),
        json!({ "value": value }),
    ));
    let a = Element::from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]);
    let scaled = CStarFunction::scale(0.5)
        .expect("m in (0,1)")
        .apply(&a, &Element::identity(2));
    checks.push(Check::new(
        "scale formula",
        scaled == a.scale(0.5),
        json!({ "value": scaled }),
    ));
    let mut sampler = ConeSampler::new(DEMO_SEED);
    for f in [subtract, CStarFunction::scale(0.5).expect("m in (0,1)")] {
        checks.push(class_check(&verify_cstar_class(
            &f,
            &ctx,
            &mut sampler,
            DEFAULT_SAMPLES,
        )));
    }
    checks
}

pub fn positivity_counterexample() -> (Element, Element) {
    (
        Element::from_real_rows(2, &[3.0, 2.0, 2.0, 3.0]),
        Element::from_real_rows(2, &[1.0, -2.0, -2.0, 4.0]),
    )
}

fn demo_positivity() -> Vec<Check> {
    let ctx = AlgebraContext::new(2).expect("dim 2");
    let (a, b) = positivity_counterexample();
    let ab = &a * &b;
    let expected = Element::from_real_rows(2, &[-1.0, 2.0, -4.0, 8.0]);
    let spectrum = |e: &Element| {
        e.spectrum()
            .map(|s| s.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .unwrap_or_default()
    };
    vec![
        Check::new(
            "a positive",
            ctx.is_positive(&a),
            json!({ "a": a, "spectrum": spectrum(&a) }),
        ),
        Check::new(
            "b positive",
            ctx.is_positive(&b),
            json!({ "b": b, "spectrum": spectrum(&b) }),
        ),
        Check::new(
            "ab not positive",
            !ctx.is_positive(&ab),
            json!({ "ab": ab, "defect": ctx.positivity_defect(&ab) }),
        ),
        Check::new("ab entries", ab == expected, json!({ "expected": expected })),
    ]
}

fn demo_scalar_axioms() -> Vec<Check> {
    let metric = scalar_diagonal_metric();
    let mut checks = axiom_checks(&metric, DEMO_SEED, DEFAULT_SAMPLES);
    checks.push(Check::from_result(
        "derived distances",
        derived_distance_check(&metric, DEMO_SEED, 100),
    ));
    checks
}

/// `d⁰` and `d*` by bisection against `‖ω_λ‖ = √2|x−y|/λ`:
/// `d⁰ = (√2|x−y|)^{1/2}`, `d* = √2|x−y|`.
pub fn derived_distance_check(metric: &ModularMetric, seed: u64, pairs: usize) -> Result<Check> {
    let mut sampler = metric.sampler(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (x, y) = (sampler.point(), sampler.point());
        let gap = SQRT_2 * (x.as_scalar().unwrap_or(0.0) - y.as_scalar().unwrap_or(0.0)).abs();
        worst = worst
            .max((d0_distance(metric, &x, &y)? - gap.sqrt()).abs())
            .max((dstar_distance(metric, &x, &y)? - gap).abs());
    }
    Ok(Check::new(
        "derived distances",
        worst <= 1e-8,
        json!({ "pairs": pairs, "max_error": worst }),
    ))
}

fn demo_multiplication() -> Vec<Check> {
    let grid = GridDomain::trapezoid(0.0, 1.0, 64).expect("valid grid");
    let metric = multiplication_metric(&grid).expect("nonempty grid");
    let mut checks = axiom_checks(&metric, DEMO_SEED, DEFAULT_SAMPLES);
    let sine: Vec<f64> = grid.points().iter().map(|t| (PI * t).sin()).collect();
    let seq: Vec<Point> = (1..=200)
        .map(|k| Point::Grid(sine.iter().map(|v| v + 1.0 / k as f64).collect()))
        .collect();
    let lambdas = [0.5, 1.0, 2.0];
    checks.push(Check::from_result(
        "shifted sine converges",
        check_sequence(&metric, &seq, Some(&Point::Grid(sine.clone())), &lambdas, 0.05, 10)
            .map(|r| Check::new("shifted sine converges", r.convergent && r.cauchy, &r)),
    ));
    let alternating: Vec<Point> = (0..40)
        .map(|k| Point::Grid(vec![if k % 2 == 0 { 1.0 } else { -1.0 }; grid.len()]))
        .collect();
    checks.push(Check::from_result(
        "alternating sequence is not Cauchy",
        check_sequence(&metric, &alternating, None, &lambdas, 0.05, 10)
            .map(|r| Check::new("alternating sequence is not Cauchy", !r.cauchy, &r)),
    ));
    checks
}

pub const WORKED_EXAMPLE_STEP: f64 = 1e-3;

fn demo_worked_example() -> Vec<Check> {
    let sys = crate::fixed_point::constant_two_system();
    let tol = 1e-12;
    let mut checks = vec![Check::from_result(
        "contraction",
        contraction_check(&sys, DEMO_SEED, 500),
    )];
    let ctx = *sys.metric().ctx();
    let triple = verify_monotone_triple(sys.triple(), &ctx, &mut ConeSampler::new(DEMO_SEED), DEFAULT_SAMPLES);
    checks.push(class_check(&triple));
    let dom = SearchDomain::interval(-10.0, 10.0, WORKED_EXAMPLE_STEP);
    let two = Point::Scalar(2.0);
    for (label, f, g) in [
        ("owc (S, I)", sys.sr(), &sys.maps().i),
        ("owc (T, J)", sys.tu(), &sys.maps().j),
    ] {
        checks.push(Check::from_result(
            label,
            check_owc(f, g, &dom, tol).map(|r| Check::new(label, r.owc && r.witness.as_ref() == Some(&two), &r)),
        ));
    }
    checks.push(Check::from_result(
        "common fixed point",
        find_common_fixed_point(&sys, &dom, tol).map(|r| {
            let ok = r.point.as_ref() == Some(&two)
                && r.unique_in_domain
                && r.residuals.as_ref().is_some_and(|x| x.composite() <= tol);
            Check::new("common fixed point", ok, &r)
        }),
    ));
    checks
}

fn demo_integral() -> (Vec<Check>, GridDomain, Option<Vec<f64>>) {
    let spec = InstanceSpec::canonical(64);
    let sys = spec.build().expect("canonical instance");
    let t = IntegralTarget {
        instance: spec,
        inits: 5,
        contraction_samples: Some(500),
        expected: Some("sine".into()),
    };
    let (mut checks, x) = integral_checks(&sys, &t, DEMO_SEED, DEFAULT_SAMPLES, 500, 1e-8);
    let m1 = estimate_m1(&sys);
    checks.insert(
        0,
        Check::new(
            "M1 estimate",
            (m1 - 0.5).abs() <= 1e-3,
            json!({ "m1": m1, "expected": 0.5 }),
        ),
    );
    let triple = MonotoneTriple::new(
        PositiveMap::linear(0.5),
        PositiveMap::linear(0.25),
        CStarFunction::scale(std::f64::consts::FRAC_1_SQRT_2).expect("m in (0,1)"),
    );
    let ctx = AlgebraContext::new(4).expect("dim 4");
    checks.push(class_check(&verify_monotone_triple(
        &triple,
        &ctx,
        &mut ConeSampler::complex(DEMO_SEED),
        DEFAULT_SAMPLES,
    )));
    (checks, sys.grid().clone(), x)
}

/// Runs a scenario for an integral config and also returns the solution.
/// A solved grid function with its grid.
pub type Solution = Option<(GridDomain, Vec<f64>)>;

pub fn run_integral_scenario(s: &Scenario) -> Result<(Report, Solution)> {
    if s.kind != Kind::Integral {
        return run_scenario(s).map(|r| (r, None));
    }
    let Plan::Integral(sys, t) = plan(s)? else {
        unreachable!("integral kind plans an integral system")
    };
    let samples = t.contraction_samples.unwrap_or(s.samples());
    let (checks, x) = integral_checks(&sys, &t, s.seed, s.samples(), samples, s.tol().max(1e-8));
    let echo = serde_json::to_value(s).expect("scenario serializes");
    let report = Report::new(echo, "nonlinear integral system", checks);
    Ok((report, x.map(|x| (sys.grid().clone(), x))))
}
