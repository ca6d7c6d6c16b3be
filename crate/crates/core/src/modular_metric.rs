//! C*-algebra-valued modular metrics `ω: (0, ∞) × X × X → A₊`.
//!
//! Axioms are verified by seeded sampling, never proved: a passing
//! [`AxiomReport`] means no violation was found in the tested samples.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cstar_algebra::{AlgebraContext, Element, NormMode, OrderMode};
use crate::error::{Error, Result};
use crate::integral_solver::GridDomain;
use crate::sampling::{self, SampleRng};

/// Maximum number of witnesses kept per report. The full count is always kept.
pub const MAX_WITNESSES: usize = 8;

/// Rate used to approximate the `λ → ∞` limit in [`in_modular_space`].
pub const LARGE_RATE: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Scalar(f64),
    Vector(Vec<f64>),
    /// Samples of a function on a [`GridDomain`].
    Grid(Vec<f64>),
}

impl Point {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Point::Scalar(v) => std::slice::from_ref(v),
            Point::Vector(v) | Point::Grid(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn kind(&self) -> &'static str {
        match self {
            Point::Scalar(_) => "scalar",
            Point::Vector(_) => "vector",
            Point::Grid(_) => "grid",
        }
    }

    /// Same variant and same length.
    pub fn check_compatible(&self, other: &Point) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(Error::PointKind(format!("{} vs {}", self.kind(), other.kind())));
        }
        if self.len() != other.len() {
            return Err(Error::Shape {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// `max_i |p_i - q_i|`.
    pub fn sup_distance(&self, other: &Point) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values()
            .iter()
            .zip(other.values())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Same variant with `f` applied to every coordinate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        match self {
            Point::Scalar(v) => Point::Scalar(f(*v)),
            Point::Vector(v) => Point::Vector(v.iter().map(|&x| f(x)).collect()),
            Point::Grid(v) => Point::Grid(v.iter().map(|&x| f(x)).collect()),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Scalar(v) => write!(f, "{v}"),
            Point::Vector(v) | Point::Grid(v) => write!(f, "{}[{}]", self.kind(), v.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricClass {
    Modular,
    Pseudo,
    Strict,
    ConvexModular,
}

/// Where sample points come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    /// Real scalars, sampled uniformly on `[lo, hi]`.
    Reals {
        lo: f64,
        hi: f64,
    },
    /// `{c^-n : n = 1..=max_n}`.
    Geometric {
        c: f64,
        max_n: u32,
    },
    /// Grid functions with i.i.d. uniform entries on `[lo, hi]`.
    Grid {
        len: usize,
        lo: f64,
        hi: f64,
    },
    /// Real vectors with i.i.d. uniform entries.
    Vectors {
        len: usize,
        lo: f64,
        hi: f64,
    },
    Finite(Vec<Point>),
    /// `center` plus i.i.d. uniform perturbations on `[-radius, radius]`.
    Ball {
        center: Point,
        radius: f64,
    },
}

impl Carrier {
    pub fn default_reals() -> Self {
        Carrier::Reals { lo: -10.0, hi: 10.0 }
    }
}

/// Seeded source of points and rates.
pub struct Sampler {
    carrier: Carrier,
    lambda_range: (f64, f64),
    rng: SampleRng,
}

impl Sampler {
    /// Rates default to log-uniform on `[1e-3, 1e3]`.
    pub fn new(carrier: Carrier, seed: u64) -> Self {
        Self {
            carrier,
            lambda_range: (1e-3, 1e3),
            rng: sampling::seeded(seed),
        }
    }

    pub fn with_lambda_range(mut self, lo: f64, hi: f64) -> Self {
        assert!(lo > 0.0 && hi >= lo, "rate range must be positive");
        self.lambda_range = (lo, hi);
        self
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn rng(&mut self) -> &mut SampleRng {
        &mut self.rng
    }

    pub fn point(&mut self) -> Point {
        let rng = &mut self.rng;
        match &self.carrier {
            Carrier::Reals { lo, hi } => Point::Scalar(rng.gen_range(*lo..=*hi)),
            Carrier::Geometric { c, max_n } => {
                let n = rng.gen_range(1..=*max_n);
                Point::Scalar(c.powi(-(n as i32)))
            }
            Carrier::Grid { len, lo, hi } => Point::Grid((0..*len).map(|_| rng.gen_range(*lo..=*hi)).collect()),
            Carrier::Vectors { len, lo, hi } => Point::Vector((0..*len).map(|_| rng.gen_range(*lo..=*hi)).collect()),
            Carrier::Finite(points) => points[rng.gen_range(0..points.len())].clone(),
            Carrier::Ball { center, radius } => {
                let v: Vec<f64> = center
                    .values()
                    .iter()
                    .map(|c| c + rng.gen_range(-*radius..=*radius))
                    .collect();
                match center {
                    Point::Scalar(_) => Point::Scalar(v[0]),
                    Point::Vector(_) => Point::Vector(v),
                    Point::Grid(_) => Point::Grid(v),
                }
            }
        }
    }

    pub fn lambda(&mut self) -> f64 {
        sampling::log_uniform(&mut self.rng, self.lambda_range.0, self.lambda_range.1)
    }
}

pub type Evaluator = Arc<dyn Fn(f64, &Point, &Point) -> Result<Element> + Send + Sync>;

/// A map `(λ, x, y) ↦ ω_λ(x, y)` together with the algebra it lands in.
#[derive(Clone)]
pub struct ModularMetric {
    name: String,
    evaluator: Evaluator,
    ctx: AlgebraContext,
    claimed_class: MetricClass,
    carrier: Carrier,
}

impl fmt::Debug for ModularMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModularMetric")
            .field("name", &self.name)
            .field("ctx", &self.ctx)
            .field("claimed_class", &self.claimed_class)
            .field("carrier", &self.carrier)
            .finish()
    }
}

impl ModularMetric {
    pub fn new(
        name: impl Into<String>,
        ctx: AlgebraContext,
        claimed_class: MetricClass,
        carrier: Carrier,
        evaluator: impl Fn(f64, &Point, &Point) -> Result<Element> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            evaluator: Arc::new(evaluator),
            ctx,
            claimed_class,
            carrier,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ctx(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn claimed_class(&self) -> MetricClass {
        self.claimed_class
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    /// Same evaluator under a different norm/order/tolerance.
    pub fn with_ctx(mut self, ctx: AlgebraContext) -> Self {
        self.ctx = ctx;
        self
    }

    pub fn with_class(mut self, class: MetricClass) -> Self {
        self.claimed_class = class;
        self
    }

    pub fn sampler(&self, seed: u64) -> Sampler {
        Sampler::new(self.carrier.clone(), seed)
    }

    /// `ω_λ(x, y)`.
    pub fn eval(&self, lambda: f64, x: &Point, y: &Point) -> Result<Element> {
        if !(lambda > 0.0) {
            return Err(Error::Config(format!("rate must be positive, got {lambda}")));
        }
        (self.evaluator)(lambda, x, y)
    }

    /// `‖ω_λ(x, y)‖` in the metric's norm; `+inf` for the extended value.
    pub fn norm_at(&self, lambda: f64, x: &Point, y: &Point) -> Result<f64> {
        let w = self.eval(lambda, x, y)?;
        if w.is_infinite() {
            return Ok(f64::INFINITY);
        }
        self.ctx.norm(&w)
    }
}

fn scalar_arg(p: &Point) -> Result<f64> {
    p.as_scalar()
        .ok_or_else(|| Error::PointKind(format!("expected scalar, found {}", p.kind())))
}

/// `ω_λ(x, y) = diag(|x−y|/λ, |x−y|/λ)` on the reals, in `M₂(R)` with the
/// Frobenius norm and entrywise order.
pub fn scalar_diagonal_metric() -> ModularMetric {
    let ctx = AlgebraContext::new(2)
        .expect("dim 2")
        .with_norm(NormMode::Frobenius)
        .with_order(OrderMode::Entrywise);
    ModularMetric::new(
        "example_4_1",
        ctx,
        MetricClass::Modular,
        Carrier::default_reals(),
        |lambda, x, y| {
            let d = (scalar_arg(x)? - scalar_arg(y)?).abs() / lambda;
            Ok(Element::diag(&[d, d]))
        },
    )
}

/// `ω_λ(x, y) = diag(|x−y|/λ, α|x−y|/λ)` on `{c^-n : n ≥ 1}`.
pub fn geometric_weighted_metric(c: f64, alpha: f64) -> Result<ModularMetric> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Config(format!("c must lie in (0, 1), got {c}")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be a finite value >= 0, got {alpha}")));
    }
    let ctx = AlgebraContext::new(2)?
        .with_norm(NormMode::Frobenius)
        .with_order(OrderMode::Entrywise);
    let in_carrier = move |x: f64| {
        if !(x > 0.0) {
            return false;
        }
        let n = x.ln() / (1.0 / c).ln();
        n.round() >= 1.0 && (n - n.round()).abs() < 1e-9
    };
    Ok(ModularMetric::new(
        "example_4_2",
        ctx,
        MetricClass::Modular,
        Carrier::Geometric { c, max_n: 20 },
        move |lambda, x, y| {
            let (x, y) = (scalar_arg(x)?, scalar_arg(y)?);
            for p in [x, y] {
                if !in_carrier(p) {
                    return Err(Error::Config(format!("{p} is not of the form c^-n with c = {c}")));
                }
            }
            let d = (x - y).abs() / lambda;
            Ok(Element::diag(&[d, alpha * d]))
        },
    ))
}

/// Multiplication-operator metric on grid functions:
/// `ω_λ(f, g) = diag(|f(t_i) − g(t_i)| / λ)`, operator norm, Loewner order.
/// Its norm is the discrete sup-norm of `(f − g)/λ`.
pub fn multiplication_metric(grid: &GridDomain) -> Result<ModularMetric> {
    let n = grid.len();
    if n == 0 {
        return Err(Error::Config("grid must be nonempty".into()));
    }
    let ctx = AlgebraContext::new(n)?;
    Ok(ModularMetric::new(
        "multiplication",
        ctx,
        MetricClass::Modular,
        Carrier::Grid {
            len: n,
            lo: -10.0,
            hi: 10.0,
        },
        move |lambda, f, g| {
            for p in [f, g] {
                if !matches!(p, Point::Grid(_)) {
                    return Err(Error::PointKind(format!("expected grid, found {}", p.kind())));
                }
                if p.len() != n {
                    return Err(Error::Shape {
                        expected: n,
                        found: p.len(),
                    });
                }
            }
            let d: Vec<f64> = f
                .values()
                .iter()
                .zip(g.values())
                .map(|(a, b)| (a - b).abs() / lambda)
                .collect();
            Ok(Element::diag(&d))
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Every output lies in the positive cone.
    Positivity,
    /// `ω_λ(x, y) = θ` for all λ iff `x = y`.
    Identity,
    /// `ω_λ(x, x) = θ`.
    PseudoIdentity,
    /// `ω_λ(x, y) = θ` for some λ forces `x = y`.
    StrictIdentity,
    Symmetry,
    /// `ω_{λ+μ}(x, y) ⪯ ω_λ(x, z) + ω_μ(z, y)`.
    Triangle,
    /// `ω_{λ+μ}(x, y) ⪯ λ/(λ+μ) ω_λ(x, z) + μ/(λ+μ) ω_μ(z, y)`.
    ConvexTriangle,
    /// `ω_λ ⪯ ω_μ` for `μ < λ`.
    RateMonotone,
}

impl Axiom {
    /// Axioms that define a class, plus the positivity of outputs.
    pub fn for_class(class: MetricClass) -> &'static [Axiom] {
        use Axiom::*;
        match class {
            MetricClass::Modular => &[Positivity, Identity, Symmetry, Triangle],
            MetricClass::Pseudo => &[Positivity, PseudoIdentity, Symmetry, Triangle],
            MetricClass::Strict => &[Positivity, PseudoIdentity, StrictIdentity, Symmetry, Triangle],
            MetricClass::ConvexModular => &[Positivity, Identity, Symmetry, ConvexTriangle],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub lambda: f64,
    pub mu: Option<f64>,
    pub x: Point,
    pub y: Point,
    pub z: Option<Point>,
    /// Most-negative eigenvalue (or entry) of the defect for order axioms;
    /// the offending norm for equality axioms.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub samples: usize,
    pub violation_count: usize,
    /// First [`MAX_WITNESSES`] violations.
    pub violations: Vec<Violation>,
    pub passed: bool,
}

impl AxiomReport {
    fn new(axiom: Axiom) -> Self {
        Self {
            axiom,
            samples: 0,
            violation_count: 0,
            violations: Vec::new(),
            passed: true,
        }
    }

    fn record(&mut self, v: Violation) {
        self.violation_count += 1;
        self.passed = false;
        if self.violations.len() < MAX_WITNESSES {
            self.violations.push(v);
        }
    }
}

/// Runs every axiom of the metric's claimed class on `n_samples` draws.
pub fn check_axioms(metric: &ModularMetric, sampler: &mut Sampler, n_samples: usize) -> Result<Vec<AxiomReport>> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let axioms = Axiom::for_class(metric.claimed_class);
    let mut reports: Vec<AxiomReport> = axioms.iter().map(|&a| AxiomReport::new(a)).collect();
    let ctx = metric.ctx;
    let tol = ctx.positivity_tol;
    let norm = |e: &Element| -> Result<f64> {
        if e.is_infinite() {
            Ok(f64::INFINITY)
        } else {
            ctx.norm(e)
        }
    };

    for _ in 0..n_samples {
        let x = sampler.point();
        let y = sampler.point();
        let z = sampler.point();
        let lambda = sampler.lambda();
        let mu = sampler.lambda();
        let w_xy = metric.eval(lambda, &x, &y)?;
        let witness = |magnitude: f64, with_mu: bool, with_z: bool| Violation {
            lambda,
            mu: with_mu.then_some(mu),
            x: x.clone(),
            y: y.clone(),
            z: with_z.then(|| z.clone()),
            magnitude,
        };

        for report in reports.iter_mut() {
            report.samples += 1;
            match report.axiom {
                Axiom::Positivity => {
                    let defect = ctx.positivity_defect(&w_xy);
                    if defect < -tol {
                        report.record(witness(defect, false, false));
                    }
                }
                Axiom::Identity => {
                    let self_norm = norm(&metric.eval(lambda, &x, &x)?)?;
                    if self_norm > tol {
                        report.record(witness(self_norm, false, false));
                    } else if x != y {
                        // "zero for every rate" must fail somewhere on the probe set
                        let mut largest: f64 = 0.0;
                        for r in [lambda, mu, 1.0] {
                            largest = largest.max(norm(&metric.eval(r, &x, &y)?)?);
                        }
                        if largest <= tol {
                            report.record(witness(largest, true, false));
                        }
                    }
                }
                Axiom::PseudoIdentity => {
                    let self_norm = norm(&metric.eval(lambda, &x, &x)?)?;
                    if self_norm > tol {
                        report.record(witness(self_norm, false, false));
                    }
                }
                Axiom::StrictIdentity => {
                    if x != y {
                        let n = norm(&w_xy)?;
                        if n <= tol {
                            report.record(witness(n, false, false));
                        }
                    }
                }
                Axiom::Symmetry => {
                    let w_yx = metric.eval(lambda, &y, &x)?;
                    let gap = match (w_xy.is_infinite(), w_yx.is_infinite()) {
                        (true, true) => 0.0,
                        (false, false) => ctx.norm(&(&w_xy - &w_yx))?,
                        _ => f64::INFINITY,
                    };
                    if gap > tol {
                        report.record(witness(gap, false, false));
                    }
                }
                Axiom::Triangle | Axiom::ConvexTriangle => {
                    let lhs = metric.eval(lambda + mu, &x, &y)?;
                    let left = metric.eval(lambda, &x, &z)?;
                    let right = metric.eval(mu, &z, &y)?;
                    let rhs = if report.axiom == Axiom::Triangle {
                        &left + &right
                    } else {
                        let s = lambda + mu;
                        &left.scale(lambda / s) + &right.scale(mu / s)
                    };
                    if !ctx.leq(&lhs, &rhs) {
                        report.record(witness(ctx.order_defect(&lhs, &rhs), true, true));
                    }
                }
                Axiom::RateMonotone => unreachable!("not part of any class list"),
            }
        }
    }
    Ok(reports)
}

/// Checks that `λ ↦ ω_λ(x, y)` is non-increasing.
pub fn check_lambda_monotonicity(
    metric: &ModularMetric,
    sampler: &mut Sampler,
    n_samples: usize,
) -> Result<AxiomReport> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let ctx = metric.ctx;
    let mut report = AxiomReport::new(Axiom::RateMonotone);
    for _ in 0..n_samples {
        let x = sampler.point();
        let y = sampler.point();
        let (a, b) = (sampler.lambda(), sampler.lambda());
        let (small, large) = if a <= b { (a, b) } else { (b, a) };
        report.samples += 1;
        let at_large = metric.eval(large, &x, &y)?;
        let at_small = metric.eval(small, &x, &y)?;
        if !ctx.leq(&at_large, &at_small) {
            report.record(Violation {
                lambda: large,
                mu: Some(small),
                x,
                y,
                z: None,
                magnitude: ctx.order_defect(&at_large, &at_small),
            });
        }
    }
    Ok(report)
}

const RATE_FLOOR: f64 = 1e-12;
const RATE_CEILING: f64 = 1e12;
const RATE_TOL: f64 = 1e-10;

/// `inf { λ > 0 : ‖ω_λ(x, y)‖ ≤ threshold(λ) }` by doubling then bisection.
///
/// Assumes the predicate is monotone in λ, which holds for metrics that pass
/// [`check_lambda_monotonicity`].
fn rate_infimum(metric: &ModularMetric, x: &Point, y: &Point, threshold: impl Fn(f64) -> f64) -> Result<f64> {
    let holds = |lambda: f64| -> Result<bool> { Ok(metric.norm_at(lambda, x, y)? <= threshold(lambda)) };
    if holds(RATE_FLOOR)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !holds(hi)? {
        hi *= 2.0;
        if hi > RATE_CEILING {
            return Err(Error::Divergence(format!(
                "‖ω_λ(x, y)‖ stays above the threshold up to λ = {RATE_CEILING:e}"
            )));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { RATE_FLOOR };
    while hi - lo > RATE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `d⁰(x, y) = inf { λ > 0 : ‖ω_λ(x, y)‖ ≤ λ }`.
pub fn d0_distance(metric: &ModularMetric, x: &Point, y: &Point) -> Result<f64> {
    rate_infimum(metric, x, y, |lambda| lambda)
}

/// `d*(x, y) = inf { λ > 0 : ‖ω_λ(x, y)‖ ≤ 1 }`.
pub fn dstar_distance(metric: &ModularMetric, x: &Point, y: &Point) -> Result<f64> {
    rate_infimum(metric, x, y, |_| 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub convergent: bool,
    pub cauchy: bool,
    /// `max ‖ω_λ(x_m, x_n)‖` over all pairs and all tested rates.
    pub bounded_diameter: f64,
    /// Largest `‖ω_λ(x_n, limit)‖` on the tail; `None` without a limit.
    pub tail_limit_norm: Option<f64>,
    pub tail_pair_norm: f64,
}

/// Convergence, Cauchy and boundedness diagnostics on the last `tail` terms.
pub fn check_sequence(
    metric: &ModularMetric,
    seq: &[Point],
    limit: Option<&Point>,
    lambdas: &[f64],
    tol: f64,
    tail: usize,
) -> Result<SequenceReport> {
    if seq.is_empty() {
        return Err(Error::Config("sequence must be nonempty".into()));
    }
    if lambdas.is_empty() {
        return Err(Error::Config("rate set must be nonempty".into()));
    }
    let start = seq.len().saturating_sub(tail.max(1));
    let tail_terms = &seq[start..];

    let mut tail_limit_norm = None;
    if let Some(l) = limit {
        let mut worst: f64 = 0.0;
        for &lambda in lambdas {
            for x in tail_terms {
                worst = worst.max(metric.norm_at(lambda, x, l)?);
            }
        }
        tail_limit_norm = Some(worst);
    }

    let mut tail_pair: f64 = 0.0;
    let mut diameter: f64 = 0.0;
    for &lambda in lambdas {
        for i in 0..seq.len() {
            for j in (i + 1)..seq.len() {
                let n = metric.norm_at(lambda, &seq[i], &seq[j])?;
                diameter = diameter.max(n);
                if i >= start {
                    tail_pair = tail_pair.max(n);
                }
            }
        }
    }
    Ok(SequenceReport {
        convergent: tail_limit_norm.is_some_and(|n| n < tol),
        cauchy: tail_pair < tol,
        bounded_diameter: diameter,
        tail_limit_norm,
        tail_pair_norm: tail_pair,
    })
}

/// Approximate membership in `X_ω` around `base`: `‖ω_λ(x, base)‖ < tol` at
/// `λ = 1e6`, standing in for the `λ → ∞` limit.
pub fn in_modular_space(metric: &ModularMetric, x: &Point, base: &Point, tol: f64) -> Result<bool> {
    Ok(metric.norm_at(LARGE_RATE, x, base)? < tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Point {
        Point::Scalar(v)
    }

    fn broken_asymmetric() -> ModularMetric {
        let ctx = AlgebraContext::new(2).unwrap();
        ModularMetric::new(
            "broken",
            ctx,
            MetricClass::Modular,
            Carrier::default_reals(),
            |_, x, y| Ok(Element::diag(&[x.as_scalar().unwrap() - y.as_scalar().unwrap(), 0.0])),
        )
    }

    #[test]
    fn scalar_diagonal_values() {
        let m = scalar_diagonal_metric();
        assert_eq!(m.eval(1.0, &s(3.0), &s(1.0)).unwrap(), Element::diag(&[2.0, 2.0]));
        assert_eq!(m.eval(2.0, &s(3.0), &s(1.0)).unwrap(), Element::diag(&[1.0, 1.0]));
        assert_eq!(m.eval(0.7, &s(-4.5), &s(-4.5)).unwrap(), Element::zero(2));
        assert!(m.eval(0.0, &s(1.0), &s(2.0)).is_err());
        assert!(m.eval(1.0, &s(1.0), &Point::Grid(vec![1.0])).is_err());
    }

    #[test]
    fn geometric_values_and_validation() {
        let m = geometric_weighted_metric(0.5, 2.0).unwrap();
        assert_eq!(m.eval(1.0, &s(2.0), &s(4.0)).unwrap(), Element::diag(&[2.0, 4.0]));
        assert_eq!(m.eval(3.0, &s(8.0), &s(8.0)).unwrap(), Element::zero(2));
        let flat = geometric_weighted_metric(0.5, 0.0).unwrap();
        let w = flat.eval(0.3, &s(2.0), &s(16.0)).unwrap();
        assert_eq!(w.entries()[(1, 1)].re, 0.0);
        assert!(m.eval(1.0, &s(3.0), &s(4.0)).is_err());
        assert!(m.eval(1.0, &s(1.0), &s(4.0)).is_err());
        assert!(geometric_weighted_metric(1.0, 1.0).is_err());
        assert!(geometric_weighted_metric(0.0, 1.0).is_err());
        assert!(geometric_weighted_metric(0.5, -1.0).is_err());
    }

    #[test]
    fn multiplication_values() {
        let grid = GridDomain::trapezoid(0.0, 1.0, 3).unwrap();
        let m = multiplication_metric(&grid).unwrap();
        let f = Point::Grid(vec![1.0, 2.0, 3.0]);
        let g = Point::Grid(vec![1.0, 1.0, 1.0]);
        assert_eq!(m.eval(1.0, &f, &g).unwrap(), Element::diag(&[0.0, 1.0, 2.0]));
        assert_eq!(m.eval(1.0, &f, &f).unwrap(), Element::zero(3));
        assert!(matches!(
            m.eval(1.0, &f, &Point::Grid(vec![1.0])),
            Err(Error::Shape { expected: 3, found: 1 })
        ));

        let grid2 = GridDomain::trapezoid(0.0, 1.0, 2).unwrap();
        let m2 = multiplication_metric(&grid2).unwrap();
        let f = Point::Grid(vec![4.0, 0.0]);
        let g = Point::Grid(vec![0.0, 0.0]);
        let oracle = f.sup_distance(&g).unwrap() / 2.0;
        assert_eq!(m2.norm_at(2.0, &f, &g).unwrap(), 2.0);
        assert_eq!(oracle, 2.0);
    }

    #[test]
    fn builtins_pass_axioms() {
        let m = scalar_diagonal_metric();
        let reports = check_axioms(&m, &mut m.sampler(7), 500).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.passed && r.samples == 500), "{reports:?}");
    }

    #[test]
    fn asymmetric_evaluator_flagged() {
        let m = broken_asymmetric();
        let reports = check_axioms(&m, &mut m.sampler(1), 200).unwrap();
        let sym = reports.iter().find(|r| r.axiom == Axiom::Symmetry).unwrap();
        assert!(!sym.passed);
        let w = &sym.violations[0];
        assert_ne!(w.x, w.y);
        assert!(w.magnitude > 0.0);
        assert_eq!(sym.passed, sym.violations.is_empty());
    }

    #[test]
    fn single_point_carrier_passes() {
        let m = ModularMetric::new(
            "single",
            AlgebraContext::new(1).unwrap(),
            MetricClass::Strict,
            Carrier::Finite(vec![s(0.0)]),
            |_, _, _| Ok(Element::zero(1)),
        );
        let reports = check_axioms(&m, &mut m.sampler(3), 50).unwrap();
        assert!(reports.iter().all(|r| r.passed));
        assert!(check_lambda_monotonicity(&m, &mut m.sampler(3), 50).unwrap().passed);
    }

    #[test]
    fn triangle_violation_detected() {
        // rate-free squared distance: (x−y)² > (x−z)² + (z−y)² for z between x and y
        let ctx = AlgebraContext::new(1).unwrap();
        let m = ModularMetric::new(
            "square",
            ctx,
            MetricClass::Modular,
            Carrier::default_reals(),
            |_, x, y| {
                let d = x.as_scalar().unwrap() - y.as_scalar().unwrap();
                Ok(Element::diag(&[d * d]))
            },
        );
        let reports = check_axioms(&m, &mut m.sampler(5), 500).unwrap();
        let tri = reports.iter().find(|r| r.axiom == Axiom::Triangle).unwrap();
        assert!(!tri.passed);
        assert!(tri.violations[0].magnitude < 0.0);
        assert!(tri.violations[0].z.is_some());
    }

    #[test]
    fn monotonicity_examples() {
        let m = scalar_diagonal_metric();
        let ctx = m.ctx();
        let w2 = m.eval(2.0, &s(3.0), &s(1.0)).unwrap();
        let w1 = m.eval(1.0, &s(3.0), &s(1.0)).unwrap();
        assert!(ctx.leq(&w2, &w1));
        assert!(check_lambda_monotonicity(&m, &mut m.sampler(2), 300).unwrap().passed);

        let increasing = ModularMetric::new(
            "increasing",
            AlgebraContext::new(1).unwrap(),
            MetricClass::Modular,
            Carrier::default_reals(),
            |l, x, y| {
                Ok(Element::diag(&[
                    l * (x.as_scalar().unwrap() - y.as_scalar().unwrap()).abs()
                ]))
            },
        );
        let r = check_lambda_monotonicity(&increasing, &mut increasing.sampler(2), 100).unwrap();
        assert!(!r.passed);
        let v = &r.violations[0];
        assert!(v.lambda > v.mu.unwrap());
    }

    #[test]
    fn distances_closed_forms() {
        let m = scalar_diagonal_metric();
        let d0 = d0_distance(&m, &s(3.0), &s(1.0)).unwrap();
        assert!((d0 - (2.0 * 2f64.sqrt()).sqrt()).abs() < 1e-8, "{d0}");
        assert!((d0 - 1.68179).abs() < 1e-5);
        let ds = dstar_distance(&m, &s(3.0), &s(1.0)).unwrap();
        assert!((ds - 2.0 * 2f64.sqrt()).abs() < 1e-8);
        assert_eq!(d0_distance(&m, &s(1.5), &s(1.5)).unwrap(), 0.0);
        assert_eq!(dstar_distance(&m, &s(1.5), &s(1.5)).unwrap(), 0.0);

        let grid = GridDomain::trapezoid(0.0, 1.0, 5).unwrap();
        let mm = multiplication_metric(&grid).unwrap();
        let f = Point::Grid(vec![3.0; 5]);
        let g = Point::Grid(vec![0.75; 5]);
        let d: f64 = 2.25;
        assert!((d0_distance(&mm, &f, &g).unwrap() - d.sqrt()).abs() < 1e-8);
        assert!((dstar_distance(&mm, &f, &g).unwrap() - d).abs() < 1e-8);
    }

    #[test]
    fn distance_diverges_on_infinite_metric() {
        let m = ModularMetric::new(
            "infinite",
            AlgebraContext::new(1).unwrap(),
            MetricClass::Modular,
            Carrier::default_reals(),
            |_, x, y| Ok(if x == y { Element::zero(1) } else { Element::infinite(1) }),
        );
        assert!(matches!(d0_distance(&m, &s(0.0), &s(1.0)), Err(Error::Divergence(_))));
    }

    #[test]
    fn sequences() {
        let m = scalar_diagonal_metric();
        let constant = vec![s(2.0); 20];
        let r = check_sequence(&m, &constant, Some(&s(2.0)), &[1.0], 1e-12, 10).unwrap();
        assert!(r.convergent && r.cauchy && r.bounded_diameter == 0.0);

        let harmonic: Vec<Point> = (1..=1000).map(|n| s(1.0 / n as f64)).collect();
        let r = check_sequence(&m, &harmonic, Some(&s(0.0)), &[1.0], 1e-1, 100).unwrap();
        assert!(r.convergent);
        // largest tail term is n = 901: ‖ω_1(1/901, 0)‖ = √2/901
        assert!((r.tail_limit_norm.unwrap() - 2f64.sqrt() / 901.0).abs() < 1e-15);

        let alternating: Vec<Point> = (1..=50).map(|n| s(if n % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let r = check_sequence(&m, &alternating, None, &[1.0], 1e-1, 20).unwrap();
        assert!(!r.cauchy && !r.convergent);
        assert!((r.tail_pair_norm - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modular_space_membership() {
        let m = scalar_diagonal_metric();
        assert!(in_modular_space(&m, &s(5.0), &s(0.0), 1e-3).unwrap());
        assert!(!in_modular_space(&m, &s(1e7), &s(0.0), 1e-3).unwrap());
    }
}
