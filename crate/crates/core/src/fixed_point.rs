//! Six-map systems `(I, J, R, S, T, U)` over a modular metric, the
//! generalized contraction condition, coincidence points, occasional weak
//! compatibility and common-fixed-point search.
//!
//! The search is a grid scan with local refinement, not Picard iteration:
//! the compatibility-based argument supplies coincidence points, not
//! iterates. Uniqueness is only ever certified inside the searched domain at
//! its resolution.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::checks::{CheckMethod, Clause, PropertyReport};
use crate::cstar_algebra::Element;
use crate::cstar_class::MonotoneTriple;
use crate::error::{Error, Result};
use crate::modular_metric::{ModularMetric, Point, Sampler};

/// Slack on the upper coefficient bound `‖a‖² + ‖b‖² + ‖c‖² ≤ 1`, absorbing
/// rounding in coefficients such as `√q · 1_A`.
const COEFF_SLACK: f64 = 1e-12;

#[derive(Clone)]
pub struct SelfMap {
    name: String,
    eval: Arc<dyn Fn(&Point) -> Point + Send + Sync>,
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SelfMap({})", self.name)
    }
}

impl SelfMap {
    pub fn new(name: impl Into<String>, eval: impl Fn(&Point) -> Point + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |p| p.clone())
    }

    /// `x ↦ c` on scalars.
    pub fn constant(c: f64) -> Self {
        Self::new(format!("constant:{c}"), move |p| p.map(|_| c))
    }

    /// `x ↦ slope·x + offset`, coordinatewise.
    pub fn affine(slope: f64, offset: f64) -> Self {
        Self::new(format!("affine:{slope}:{offset}"), move |p| {
            p.map(|x| slope * x + offset)
        })
    }

    /// `2x/3` below 2, `2` at 2, `0` above 2.
    pub fn two_thirds_step() -> Self {
        Self::new("two_thirds_step", |p| {
            p.map(|x| {
                if x < 2.0 {
                    2.0 * x / 3.0
                } else if x == 2.0 {
                    2.0
                } else {
                    0.0
                }
            })
        })
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &SelfMap, inner: &SelfMap) -> Self {
        let (o, i) = (outer.eval.clone(), inner.eval.clone());
        Self {
            name: format!("{}∘{}", outer.name, inner.name),
            eval: Arc::new(move |p| o(&i(p))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, p: &Point) -> Point {
        (self.eval)(p)
    }
}

#[derive(Debug, Clone)]
pub struct SixMaps {
    pub i: SelfMap,
    pub j: SelfMap,
    pub r: SelfMap,
    pub s: SelfMap,
    pub t: SelfMap,
    pub u: SelfMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: Element,
    pub b: Element,
    pub c: Element,
}

impl Coefficients {
    pub fn only_a(a: Element) -> Self {
        let dim = a.dim();
        Self {
            a,
            b: Element::zero(dim),
            c: Element::zero(dim),
        }
    }
}

/// How the two sides of the contraction condition are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `ψ(ω_λ(SRx, TUy)) ⪯ F(ψ(M), φ(M))` in the metric's order.
    Order,
    /// `‖ψ(ω_λ(SRx, TUy))‖ ≤ ‖F(ψ(M), φ(M))‖`.
    Norm,
}

/// Hypotheses of the common-fixed-point theorem for six self-maps.
#[derive(Debug, Clone)]
pub struct MappingSystem {
    maps: SixMaps,
    sr: SelfMap,
    tu: SelfMap,
    coeffs: Coefficients,
    triple: MonotoneTriple,
    metric: ModularMetric,
    comparison: Comparison,
    commuting_pairs: bool,
}

impl MappingSystem {
    /// Fails unless `0 < ‖a‖² + ‖b‖² + ‖c‖² ≤ 1` in the metric's norm.
    pub fn new(maps: SixMaps, coeffs: Coefficients, triple: MonotoneTriple, metric: ModularMetric) -> Result<Self> {
        let ctx = metric.ctx();
        let mut total = 0.0;
        for (name, e) in [("a", &coeffs.a), ("b", &coeffs.b), ("c", &coeffs.c)] {
            if e.dim() != ctx.dim {
                return Err(Error::Shape {
                    expected: ctx.dim,
                    found: e.dim(),
                });
            }
            let n = ctx
                .norm(e)
                .map_err(|_| Error::Config(format!("coefficient {name} must be finite")))?;
            total += n * n;
        }
        if !(total > 0.0 && total <= 1.0 + COEFF_SLACK) {
            return Err(Error::Config(format!(
                "coefficients need 0 < ‖a‖² + ‖b‖² + ‖c‖² ≤ 1, got {total}"
            )));
        }
        let sr = SelfMap::compose(&maps.s, &maps.r);
        let tu = SelfMap::compose(&maps.t, &maps.u);
        Ok(Self {
            maps,
            sr,
            tu,
            coeffs,
            triple,
            metric,
            comparison: Comparison::Order,
            commuting_pairs: false,
        })
    }

    pub fn with_comparison(mut self, comparison: Comparison) -> Self {
        self.comparison = comparison;
        self
    }

    /// Declares `(S,R), (S,I), (R,I), (T,J), (T,U), (U,J)` commuting, which
    /// upgrades the conclusion to a fixed point of all six maps.
    pub fn with_commuting_pairs(mut self, commuting: bool) -> Self {
        self.commuting_pairs = commuting;
        self
    }

    pub fn maps(&self) -> &SixMaps {
        &self.maps
    }

    pub fn sr(&self) -> &SelfMap {
        &self.sr
    }

    pub fn tu(&self) -> &SelfMap {
        &self.tu
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn triple(&self) -> &MonotoneTriple {
        &self.triple
    }

    pub fn metric(&self) -> &ModularMetric {
        &self.metric
    }

    pub fn comparison(&self) -> Comparison {
        self.comparison
    }

    /// `‖a‖² + ‖b‖² + ‖c‖²`.
    pub fn coefficient_mass(&self) -> f64 {
        let ctx = self.metric.ctx();
        [&self.coeffs.a, &self.coeffs.b, &self.coeffs.c]
            .iter()
            .map(|e| ctx.norm(e).map(|n| n * n).unwrap_or(f64::INFINITY))
            .sum()
    }

    /// Exchanges the roles of `(SR, I)` and `(TU, J)`.
    pub fn swapped(&self) -> Result<Self> {
        let m = &self.maps;
        let maps = SixMaps {
            i: m.j.clone(),
            j: m.i.clone(),
            r: m.u.clone(),
            s: m.t.clone(),
            t: m.s.clone(),
            u: m.r.clone(),
        };
        Ok(
            Self::new(maps, self.coeffs.clone(), self.triple.clone(), self.metric.clone())?
                .with_comparison(self.comparison)
                .with_commuting_pairs(self.commuting_pairs),
        )
    }

    fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        self.metric.norm_at(1.0, p, q)
    }
}

fn congruence(a: &Element, x: &Element) -> Result<Element> {
    Ok(&(&a.involution()? * x) * a)
}

/// `M(x, y) = a* ω_λ(Ix, Jy) a + b* ω_λ(SRx, Jy) b + c* ω_{2λ}(TUy, Ix) c`.
pub fn m_value(sys: &MappingSystem, x: &Point, y: &Point, lambda: f64) -> Result<Element> {
    let m = &sys.maps;
    let ix = m.i.apply(x);
    let jy = m.j.apply(y);
    let srx = sys.sr.apply(x);
    let tuy = sys.tu.apply(y);
    let w = &sys.metric;
    let first = congruence(&sys.coeffs.a, &w.eval(lambda, &ix, &jy)?)?;
    let second = congruence(&sys.coeffs.b, &w.eval(lambda, &srx, &jy)?)?;
    let third = congruence(&sys.coeffs.c, &w.eval(2.0 * lambda, &tuy, &ix)?)?;
    Ok((&(&first + &second) + &third).symmetrized())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointWitness {
    pub x: Point,
    pub y: Point,
    pub lambda: f64,
    pub magnitude: f64,
}

pub type ContractionReport = PropertyReport<PointWitness>;

pub const CONTRACTION_CLAUSE: &str = "psi(w(SRx,TUy)) <= F(psi(M),phi(M))";
pub const FINITE_CLAUSE: &str = "||w(SRx,TUy)|| < inf";
pub const M_POSITIVE_CLAUSE: &str = "M(x,y) >= 0";

/// Samples `(x, y, λ)` and asserts the contraction inequality, finiteness of
/// `ω_λ(SRx, TUy)`, and positivity of `M(x, y)`.
pub fn check_contraction(sys: &MappingSystem, sampler: &mut Sampler, n_samples: usize) -> Result<ContractionReport> {
    let ctx = *sys.metric.ctx();
    let tol = ctx.positivity_tol;
    let method = CheckMethod::Sampled;
    let mut contraction = Clause::new(CONTRACTION_CLAUSE, method);
    if sys.comparison == Comparison::Norm {
        contraction.clause = "||psi(w(SRx,TUy))|| <= ||F(psi(M),phi(M))||".into();
    }
    let mut finite = Clause::new(FINITE_CLAUSE, method);
    let mut m_pos = Clause::new(M_POSITIVE_CLAUSE, method);

    for _ in 0..n_samples {
        let x = sampler.point();
        let y = sampler.point();
        let lambda = sampler.lambda();
        let w = |magnitude| PointWitness {
            x: x.clone(),
            y: y.clone(),
            lambda,
            magnitude,
        };
        let base = sys.metric.eval(lambda, &sys.sr.apply(&x), &sys.tu.apply(&y))?;
        let m = m_value(sys, &x, &y, lambda)?;

        finite.tick();
        let base_norm = if base.is_infinite() {
            f64::INFINITY
        } else {
            ctx.norm(&base)?
        };
        if !base_norm.is_finite() {
            finite.record(w(base_norm));
        }

        m_pos.tick();
        if !ctx.is_positive(&m) {
            m_pos.record(w(ctx.positivity_defect(&m)));
        }

        let t = &sys.triple;
        let lhs = t.psi.apply(&base);
        let rhs = t.f.apply(&t.psi.apply(&m), &t.phi.apply(&m));
        contraction.tick();
        match sys.comparison {
            Comparison::Order => {
                if !ctx.leq(&lhs, &rhs) {
                    contraction.record(w(ctx.order_defect(&lhs, &rhs)));
                }
            }
            Comparison::Norm => {
                let l = if lhs.is_infinite() {
                    f64::INFINITY
                } else {
                    ctx.norm(&lhs)?
                };
                let r = if rhs.is_infinite() {
                    f64::INFINITY
                } else {
                    ctx.norm(&rhs)?
                };
                if !(l <= r + tol * (1.0 + r)) {
                    contraction.record(w(r - l));
                }
            }
        }
    }
    let subject = format!("contraction over {}", sys.metric.name());
    Ok(PropertyReport::new(subject, vec![contraction, finite, m_pos]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchDomain {
    Points(Vec<Point>),
    /// Scalars `lo + (hi − lo)·k/N`, `N = round((hi − lo)/step)`, with
    /// `refine_depth` bisection steps on sign changes.
    Interval {
        lo: f64,
        hi: f64,
        step: f64,
        refine_depth: u32,
    },
}

impl SearchDomain {
    pub fn interval(lo: f64, hi: f64, step: f64) -> Self {
        SearchDomain::Interval {
            lo,
            hi,
            step,
            refine_depth: 60,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SearchDomain::Points(p) if p.is_empty() => Err(Error::Config("search domain has no points".into())),
            SearchDomain::Interval { lo, hi, step, .. } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    Err(Error::Config(format!(
                        "search interval [{lo}, {hi}] is empty or unbounded"
                    )))
                } else if !(*step > 0.0) {
                    Err(Error::Config(format!("grid step must be positive, got {step}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn grid(&self) -> Option<(Vec<f64>, f64)> {
        match *self {
            SearchDomain::Interval { lo, hi, step, .. } => {
                let n = ((hi - lo) / step).round().max(1.0) as usize;
                let xs = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
                Some((xs, (hi - lo) / n as f64))
            }
            SearchDomain::Points(_) => None,
        }
    }
}

fn scalar_of(p: &Point) -> Result<f64> {
    p.as_scalar()
        .ok_or_else(|| Error::PointKind("interval domains need scalar maps".into()))
}

/// Points where `‖fx − gx‖_∞ ≤ tol`.
///
/// Interval domains return every grid hit plus bisection refinements of sign
/// changes in `fx − gx`; refinements within one step of a hit are dropped.
pub fn find_coincidence_points(f: &SelfMap, g: &SelfMap, dom: &SearchDomain, tol: f64) -> Result<Vec<Point>> {
    dom.validate()?;
    let residual = |p: &Point| f.apply(p).sup_distance(&g.apply(p));
    match dom {
        SearchDomain::Points(points) => {
            let mut hits: Vec<Point> = Vec::new();
            for p in points {
                if residual(p)? <= tol && !hits.contains(p) {
                    hits.push(p.clone());
                }
            }
            Ok(hits)
        }
        SearchDomain::Interval { refine_depth, .. } => {
            let (xs, h) = dom.grid().expect("interval");
            let signed = |x: f64| -> Result<f64> {
                let p = Point::Scalar(x);
                Ok(scalar_of(&f.apply(&p))? - scalar_of(&g.apply(&p))?)
            };
            let values = xs.iter().map(|&x| signed(x)).collect::<Result<Vec<_>>>()?;
            let mut hits: Vec<f64> = xs
                .iter()
                .zip(&values)
                .filter(|(_, v)| v.abs() <= tol)
                .map(|(&x, _)| x)
                .collect();
            let mut refined = Vec::new();
            for k in 0..xs.len() - 1 {
                let (va, vb) = (values[k], values[k + 1]);
                if va.abs() <= tol || vb.abs() <= tol || va.signum() == vb.signum() {
                    continue;
                }
                let (mut a, mut b, mut fa) = (xs[k], xs[k + 1], va);
                for _ in 0..*refine_depth {
                    let mid = 0.5 * (a + b);
                    let fm = signed(mid)?;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                let x = 0.5 * (a + b);
                if signed(x)?.abs() <= tol {
                    refined.push(x);
                }
            }
            for x in refined {
                if hits.iter().all(|&y| (x - y).abs() >= h) {
                    hits.push(x);
                }
            }
            hits.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            Ok(hits.into_iter().map(Point::Scalar).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OwcReport {
    pub owc: bool,
    pub witness: Option<Point>,
    pub coincidence_points: usize,
    /// `‖f(g u) − g(f u)‖_∞` at the witness.
    pub commutation_residual: Option<f64>,
}

/// Occasional weak compatibility: some coincidence point where `f` and `g`
/// commute within `tol`.
pub fn check_owc(f: &SelfMap, g: &SelfMap, dom: &SearchDomain, tol: f64) -> Result<OwcReport> {
    let points = find_coincidence_points(f, g, dom, tol)?;
    for u in &points {
        let gap = f.apply(&g.apply(u)).sup_distance(&g.apply(&f.apply(u)))?;
        if gap <= tol {
            return Ok(OwcReport {
                owc: true,
                witness: Some(u.clone()),
                coincidence_points: points.len(),
                commutation_residual: Some(gap),
            });
        }
    }
    Ok(OwcReport {
        owc: false,
        witness: None,
        coincidence_points: points.len(),
        commutation_residual: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub sr: f64,
    pub tu: f64,
    pub i: f64,
    pub j: f64,
    /// `S, R, T, U` residuals; only with commuting pairs declared.
    pub six_map: Option<[f64; 4]>,
}

impl Residuals {
    pub fn composite(&self) -> f64 {
        self.sr.max(self.tu).max(self.i).max(self.j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub point: Option<Point>,
    /// Exactly one isolated solution in the searched domain at its resolution.
    pub unique_in_domain: bool,
    /// One representative per cluster of adjacent hits.
    pub candidates: Vec<Point>,
    /// Total number of grid or list points passing `tol`.
    pub hits: usize,
    pub residuals: Option<Residuals>,
    pub six_map_fixed: Option<bool>,
    pub owc_sr_i: bool,
    pub owc_tu_j: bool,
    pub warnings: Vec<String>,
}

impl FixedPointReport {
    pub fn found(&self) -> bool {
        self.point.is_some()
    }
}

fn residuals_at(sys: &MappingSystem, w: &Point, six: bool) -> Result<Residuals> {
    let m = &sys.maps;
    let six_map = if six {
        Some([
            sys.dist(&m.s.apply(w), w)?,
            sys.dist(&m.r.apply(w), w)?,
            sys.dist(&m.t.apply(w), w)?,
            sys.dist(&m.u.apply(w), w)?,
        ])
    } else {
        None
    };
    Ok(Residuals {
        sr: sys.dist(&sys.sr.apply(w), w)?,
        tu: sys.dist(&sys.tu.apply(w), w)?,
        i: sys.dist(&m.i.apply(w), w)?,
        j: sys.dist(&m.j.apply(w), w)?,
        six_map,
    })
}

/// Locates `w` with `SRw = TUw = Iw = Jw = w` (distances `‖ω_1(·, w)‖ ≤ tol`).
///
/// Candidates come from an exhaustive scan of the domain plus the refined
/// coincidence points of `(SR, I)` and `(TU, J)`. Adjacent grid hits are
/// clustered and represented by their centroid. Not finding a point is a
/// report outcome, not an error.
pub fn find_common_fixed_point(sys: &MappingSystem, dom: &SearchDomain, tol: f64) -> Result<FixedPointReport> {
    dom.validate()?;
    let mut warnings = Vec::new();
    let owc_sr_i = check_owc(&sys.sr, &sys.maps.i, dom, tol)?.owc;
    let owc_tu_j = check_owc(&sys.tu, &sys.maps.j, dom, tol)?.owc;
    if !owc_sr_i {
        warnings.push("(SR, I) not shown occasionally weakly compatible on this domain".into());
    }
    if !owc_tu_j {
        warnings.push("(TU, J) not shown occasionally weakly compatible on this domain".into());
    }
    let composite = |p: &Point| residuals_at(sys, p, false).map(|r| r.composite());

    // clusters of candidate points, each a list of members
    let mut clusters: Vec<Vec<Point>> = Vec::new();
    let mut hits = 0;
    match dom {
        SearchDomain::Points(points) => {
            for p in points {
                if composite(p)? <= tol && !clusters.iter().any(|c| c[0] == *p) {
                    hits += 1;
                    clusters.push(vec![p.clone()]);
                }
            }
        }
        SearchDomain::Interval { .. } => {
            let (xs, h) = dom.grid().expect("interval");
            let mut current: Vec<Point> = Vec::new();
            for &x in &xs {
                let p = Point::Scalar(x);
                if composite(&p)? <= tol {
                    hits += 1;
                    current.push(p);
                } else if !current.is_empty() {
                    clusters.push(std::mem::take(&mut current));
                }
            }
            if !current.is_empty() {
                clusters.push(current);
            }
            let mut extra = find_coincidence_points(&sys.sr, &sys.maps.i, dom, tol)?;
            extra.extend(find_coincidence_points(&sys.tu, &sys.maps.j, dom, tol)?);
            for p in extra {
                let x = scalar_of(&p)?;
                let near_existing = clusters
                    .iter()
                    .any(|c| c.iter().any(|q| (q.as_scalar().expect("scalar") - x).abs() < h));
                if !near_existing && composite(&p)? <= tol {
                    hits += 1;
                    clusters.push(vec![p]);
                }
            }
        }
    }

    let representative = |c: &Vec<Point>| -> Point {
        if c.len() == 1 {
            return c[0].clone();
        }
        let n = c.len() as f64;
        let dim = c[0].len();
        let mean: Vec<f64> = (0..dim)
            .map(|k| c.iter().map(|p| p.values()[k]).sum::<f64>() / n)
            .collect();
        match &c[0] {
            Point::Scalar(_) => Point::Scalar(mean[0]),
            Point::Vector(_) => Point::Vector(mean),
            Point::Grid(_) => Point::Grid(mean),
        }
    };
    let candidates: Vec<Point> = clusters.iter().map(representative).collect();
    let unique_in_domain = clusters.len() == 1 && clusters[0].len() == 1;

    let mut best: Option<(Point, f64)> = None;
    for c in &candidates {
        let r = composite(c)?;
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((c.clone(), r));
        }
    }
    let point = best.map(|(p, _)| p);
    let residuals = point
        .as_ref()
        .map(|w| residuals_at(sys, w, sys.commuting_pairs))
        .transpose()?;
    let six_map_fixed = residuals
        .as_ref()
        .and_then(|r| r.six_map)
        .map(|s| s.iter().all(|&v| v <= tol));
    if point.is_none() {
        warnings.push("no common fixed point found within tolerance".into());
    } else if !unique_in_domain {
        warnings.push(format!(
            "{} candidate clusters, {hits} hits: not unique in domain",
            candidates.len()
        ));
    }
    Ok(FixedPointReport {
        point,
        unique_in_domain,
        candidates,
        hits,
        residuals,
        six_map_fixed,
        owc_sr_i,
        owc_tu_j,
        warnings,
    })
}

/// Which substitution turns the six-map theorem into a smaller statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Specialization {
    /// Maps `[S, T, I, J]`, coefficients `[a, b, c]`; `R = U = identity`.
    IdentityInner,
    /// Maps `[S, T]`, coefficients `[a, b, c]`; `I = J = S`, outer maps `T`.
    SinglePair,
    /// Maps `[S, T]`, coefficient `[a]`; as `SinglePair` with `b = c = θ`.
    SinglePairSingleCoeff,
}

/// Builds the general system with the specialization's substitutions.
pub fn specialize(
    level: Specialization,
    maps: Vec<SelfMap>,
    coeffs: Vec<Element>,
    triple: MonotoneTriple,
    metric: ModularMetric,
) -> Result<MappingSystem> {
    let (want_maps, want_coeffs) = match level {
        Specialization::IdentityInner => (4, 3),
        Specialization::SinglePair => (2, 3),
        Specialization::SinglePairSingleCoeff => (2, 1),
    };
    if maps.len() != want_maps || coeffs.len() != want_coeffs {
        return Err(Error::Config(format!(
            "{level:?} takes {want_maps} maps and {want_coeffs} coefficients, got {} and {}",
            maps.len(),
            coeffs.len()
        )));
    }
    let id = SelfMap::identity();
    let six = match level {
        Specialization::IdentityInner => SixMaps {
            s: maps[0].clone(),
            t: maps[1].clone(),
            i: maps[2].clone(),
            j: maps[3].clone(),
            r: id.clone(),
            u: id,
        },
        Specialization::SinglePair | Specialization::SinglePairSingleCoeff => SixMaps {
            i: maps[0].clone(),
            j: maps[0].clone(),
            s: maps[1].clone(),
            t: maps[1].clone(),
            r: id.clone(),
            u: id,
        },
    };
    let coeffs = match level {
        Specialization::SinglePairSingleCoeff => Coefficients::only_a(coeffs[0].clone()),
        _ => Coefficients {
            a: coeffs[0].clone(),
            b: coeffs[1].clone(),
            c: coeffs[2].clone(),
        },
    };
    MappingSystem::new(six, coeffs, triple, metric)
}

/// The worked scalar example: `S = T ≡ 2`, `Jx = 4 − x`, `I` the
/// two-thirds step map, triple `(2A, A, A − B)`, over the diagonal scalar
/// metric with `a = b = c = 0.4·1_A` (Frobenius mass 0.96).
pub fn constant_two_system() -> MappingSystem {
    use crate::cstar_class::{CStarFunction, PositiveMap};
    let metric = crate::modular_metric::scalar_diagonal_metric();
    let k = Element::scalar(2, 0.4);
    specialize(
        Specialization::IdentityInner,
        vec![
            SelfMap::constant(2.0),
            SelfMap::constant(2.0),
            SelfMap::two_thirds_step(),
            SelfMap::affine(-1.0, 4.0),
        ],
        vec![k.clone(), k.clone(), k],
        MonotoneTriple::new(
            PositiveMap::linear(2.0),
            PositiveMap::linear(1.0),
            CStarFunction::subtract(),
        ),
        metric,
    )
    .expect("coefficient mass 0.96")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cstar_algebra::{AlgebraContext, NormMode};
    use crate::cstar_class::{CStarFunction, PositiveMap};
    use crate::modular_metric::scalar_diagonal_metric;

    fn s(v: f64) -> Point {
        Point::Scalar(v)
    }

    fn id_triple() -> MonotoneTriple {
        MonotoneTriple::new(
            PositiveMap::linear(1.0),
            PositiveMap::linear(1.0),
            CStarFunction::subtract(),
        )
    }

    fn all_identity(a: Element) -> MappingSystem {
        let id = SelfMap::identity();
        MappingSystem::new(
            SixMaps {
                i: id.clone(),
                j: id.clone(),
                r: id.clone(),
                s: id.clone(),
                t: id.clone(),
                u: id,
            },
            Coefficients::only_a(a),
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap()
    }

    #[test]
    fn builtin_maps() {
        let i = SelfMap::two_thirds_step();
        assert_eq!(i.apply(&s(-3.0)), s(-2.0));
        assert_eq!(i.apply(&s(2.0)), s(2.0));
        assert_eq!(i.apply(&s(2.5)), s(0.0));
        assert_eq!(SelfMap::affine(-1.0, 4.0).apply(&s(1.0)), s(3.0));
        let c = SelfMap::compose(&SelfMap::affine(2.0, 0.0), &SelfMap::affine(1.0, 1.0));
        assert_eq!(c.apply(&s(3.0)), s(8.0));
    }

    #[test]
    fn m_value_examples() {
        let sys = constant_two_system();
        for lambda in [1e-3, 0.5, 7.0] {
            assert_eq!(m_value(&sys, &s(2.0), &s(2.0), lambda).unwrap(), Element::zero(2));
        }
        // b = c = θ reduces to a* ω_λ(Ix, Jy) a
        let a = Element::scalar(2, 0.5);
        let sys = all_identity(a.clone());
        let m = m_value(&sys, &s(3.0), &s(1.0), 2.0).unwrap();
        let w = sys.metric().eval(2.0, &s(3.0), &s(1.0)).unwrap();
        assert_eq!(m, &(&a * &w) * &a);
        // a = 1_A under the operator norm gives ω itself
        let metric = scalar_diagonal_metric().with_ctx(AlgebraContext::new(2).unwrap());
        let id = SelfMap::identity();
        let sys = MappingSystem::new(
            SixMaps {
                i: id.clone(),
                j: id.clone(),
                r: id.clone(),
                s: id.clone(),
                t: id.clone(),
                u: id,
            },
            Coefficients::only_a(Element::identity(2)),
            id_triple(),
            metric,
        )
        .unwrap();
        assert_eq!(
            m_value(&sys, &s(3.0), &s(1.0), 1.0).unwrap(),
            sys.metric().eval(1.0, &s(3.0), &s(1.0)).unwrap()
        );
    }

    #[test]
    fn coefficient_constraint() {
        let id = SelfMap::identity();
        let maps = SixMaps {
            i: id.clone(),
            j: id.clone(),
            r: id.clone(),
            s: id.clone(),
            t: id.clone(),
            u: id,
        };
        let metric = scalar_diagonal_metric().with_ctx(AlgebraContext::new(2).unwrap().with_norm(NormMode::Operator));
        // ‖a‖² + ‖b‖² = 1.5
        let bad = Coefficients {
            a: Element::identity(2),
            b: Element::scalar(2, 0.5f64.sqrt()),
            c: Element::zero(2),
        };
        assert!(MappingSystem::new(maps.clone(), bad, id_triple(), metric.clone()).is_err());
        let zero = Coefficients::only_a(Element::zero(2));
        assert!(MappingSystem::new(maps.clone(), zero, id_triple(), metric.clone()).is_err());
        let wrong_dim = Coefficients::only_a(Element::identity(3));
        assert!(matches!(
            MappingSystem::new(maps, wrong_dim, id_triple(), metric),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn worked_example_contraction_passes() {
        let sys = constant_two_system();
        let r = check_contraction(&sys, &mut sys.metric().sampler(0), 300).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.clauses[0].samples, 300);
    }

    #[test]
    fn identity_system_violates_contraction() {
        let sys = all_identity(Element::scalar(2, 1.0 / 2f64.sqrt()));
        let r = check_contraction(&sys, &mut sys.metric().sampler(4), 100).unwrap();
        let c = r.clause(CONTRACTION_CLAUSE).unwrap();
        assert!(!c.passed);
        assert_ne!(c.witnesses[0].x, c.witnesses[0].y);
        assert!(r.clause(M_POSITIVE_CLAUSE).unwrap().passed);
    }

    #[test]
    fn contraction_holds_at_shared_fixed_point() {
        let sys = all_identity(Element::scalar(2, 0.5));
        let mut sampler = Sampler::new(crate::modular_metric::Carrier::Finite(vec![s(1.0)]), 3);
        assert!(check_contraction(&sys, &mut sampler, 20).unwrap().passed);
    }

    #[test]
    fn coincidence_examples() {
        let dom = SearchDomain::interval(-10.0, 10.0, 1e-3);
        let hits = find_coincidence_points(&SelfMap::constant(2.0), &SelfMap::two_thirds_step(), &dom, 1e-12).unwrap();
        assert_eq!(hits, vec![s(2.0)]);

        let small = SearchDomain::interval(0.0, 1.0, 0.25);
        let all = find_coincidence_points(&SelfMap::identity(), &SelfMap::identity(), &small, 1e-12).unwrap();
        assert_eq!(all.len(), 5);

        // x = 4 − x, with the root placed off-grid by the step
        let dom = SearchDomain::interval(-10.0, 10.0, 0.3);
        let hits = find_coincidence_points(&SelfMap::identity(), &SelfMap::affine(-1.0, 4.0), &dom, 1e-12).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits[0].as_scalar().unwrap() - 2.0).abs() < 1e-12);

        assert!(find_coincidence_points(
            &SelfMap::identity(),
            &SelfMap::identity(),
            &SearchDomain::Points(vec![]),
            1.0
        )
        .is_err());
        assert!(find_coincidence_points(
            &SelfMap::identity(),
            &SelfMap::identity(),
            &SearchDomain::interval(1.0, 1.0, 0.1),
            1.0
        )
        .is_err());
    }

    #[test]
    fn owc_examples() {
        let dom = SearchDomain::interval(-10.0, 10.0, 1e-2);
        let r = check_owc(&SelfMap::constant(2.0), &SelfMap::two_thirds_step(), &dom, 1e-12).unwrap();
        assert!(r.owc);
        assert_eq!(r.witness, Some(s(2.0)));
        let r = check_owc(&SelfMap::constant(2.0), &SelfMap::affine(-1.0, 4.0), &dom, 1e-12).unwrap();
        assert_eq!(r.witness, Some(s(2.0)));

        let f = SelfMap::affine(0.5, 1.0);
        assert!(check_owc(&f, &f, &dom, 1e-12).unwrap().owc);

        let r = check_owc(&SelfMap::affine(1.0, 1.0), &SelfMap::affine(1.0, 2.0), &dom, 1e-12).unwrap();
        assert!(!r.owc && r.witness.is_none() && r.coincidence_points == 0);
    }

    #[test]
    fn worked_example_fixed_point() {
        let sys = constant_two_system();
        let r = find_common_fixed_point(&sys, &SearchDomain::interval(-10.0, 10.0, 1e-2), 1e-12).unwrap();
        assert_eq!(r.point, Some(s(2.0)));
        assert!(r.unique_in_domain && r.owc_sr_i && r.owc_tu_j);
        assert!(r.residuals.unwrap().composite() <= 1e-12);
    }

    #[test]
    fn identity_maps_are_not_unique() {
        let sys = all_identity(Element::scalar(2, 0.1));
        let r = find_common_fixed_point(&sys, &SearchDomain::interval(-1.0, 1.0, 0.1), 1e-12).unwrap();
        assert!(r.found());
        assert!(!r.unique_in_domain);
        assert_eq!(r.hits, 21);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn not_found_is_a_report() {
        let sys = specialize(
            Specialization::SinglePairSingleCoeff,
            vec![SelfMap::identity(), SelfMap::affine(1.0, 1.0)],
            vec![Element::scalar(2, 0.5)],
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap();
        let r = find_common_fixed_point(&sys, &SearchDomain::interval(-5.0, 5.0, 0.1), 1e-12).unwrap();
        assert!(!r.found() && !r.unique_in_domain);
        assert!(r.residuals.is_none());
    }

    #[test]
    fn halving_map_fixed_point() {
        let a = Element::scalar(2, 1.0 / 2f64.sqrt());
        let sys = specialize(
            Specialization::SinglePairSingleCoeff,
            vec![SelfMap::identity(), SelfMap::affine(0.5, 0.0)],
            vec![a],
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap();
        let r = find_common_fixed_point(&sys, &SearchDomain::interval(-10.0, 10.0, 1e-2), 1e-12).unwrap();
        assert_eq!(r.point, Some(s(0.0)));
        assert!(r.unique_in_domain);
    }

    #[test]
    fn specialization_substitutions() {
        let sys = specialize(
            Specialization::IdentityInner,
            vec![
                SelfMap::constant(2.0),
                SelfMap::constant(3.0),
                SelfMap::affine(2.0, 0.0),
                SelfMap::affine(3.0, 0.0),
            ],
            vec![Element::scalar(2, 0.5), Element::zero(2), Element::zero(2)],
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap();
        assert_eq!(sys.maps().r.apply(&s(7.0)), s(7.0));
        assert_eq!(sys.maps().u.apply(&s(7.0)), s(7.0));
        assert_eq!(sys.sr().apply(&s(7.0)), s(2.0));

        let sys = specialize(
            Specialization::SinglePairSingleCoeff,
            vec![SelfMap::affine(2.0, 0.0), SelfMap::affine(0.5, 0.0)],
            vec![Element::scalar(2, 0.5)],
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap();
        let m = sys.maps();
        assert_eq!(m.i.apply(&s(1.0)), s(2.0));
        assert_eq!(m.j.apply(&s(1.0)), s(2.0));
        assert_eq!(m.s.apply(&s(1.0)), s(0.5));
        assert_eq!(m.t.apply(&s(1.0)), s(0.5));
        assert_eq!(sys.coeffs().b, Element::zero(2));
        assert_eq!(sys.coeffs().c, Element::zero(2));

        let err = specialize(
            Specialization::SinglePair,
            vec![SelfMap::identity()],
            vec![Element::scalar(2, 0.5)],
            id_triple(),
            scalar_diagonal_metric(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn single_map_system_is_self_compatible() {
        let t = SelfMap::affine(0.5, 1.0);
        let sys = specialize(
            Specialization::SinglePair,
            vec![t.clone(), t.clone()],
            vec![Element::scalar(2, 0.5), Element::zero(2), Element::zero(2)],
            id_triple(),
            scalar_diagonal_metric(),
        )
        .unwrap();
        let dom = SearchDomain::interval(-10.0, 10.0, 1e-2);
        assert!(check_owc(sys.sr(), &sys.maps().i, &dom, 1e-12).unwrap().owc);
        let r = find_common_fixed_point(&sys, &dom, 1e-12).unwrap();
        assert_eq!(r.point, Some(s(2.0)));
    }

    #[test]
    fn swapped_roles_same_fixed_point() {
        let sys = constant_two_system();
        let dom = SearchDomain::interval(-10.0, 10.0, 1e-2);
        let a = find_common_fixed_point(&sys, &dom, 1e-12).unwrap();
        let b = find_common_fixed_point(&sys.swapped().unwrap(), &dom, 1e-12).unwrap();
        assert_eq!(a.point, b.point);
    }

    #[test]
    fn commuting_pairs_report_six_map_residuals() {
        let sys = constant_two_system().with_commuting_pairs(true);
        let r = find_common_fixed_point(&sys, &SearchDomain::interval(-10.0, 10.0, 1e-2), 1e-12).unwrap();
        assert_eq!(r.six_map_fixed, Some(true));
    }

    #[test]
    fn finite_point_domain() {
        let sys = constant_two_system();
        let dom = SearchDomain::Points(vec![s(0.0), s(2.0), s(5.0), s(2.0)]);
        let r = find_common_fixed_point(&sys, &dom, 1e-12).unwrap();
        assert_eq!(r.point, Some(s(2.0)));
        assert!(r.unique_in_domain);
    }
}
