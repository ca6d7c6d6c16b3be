//! Discretized integral system
//! `x(t) = w(t) + k(t, x(t)) + μ ∫_E n(t, s) h(s, x(s)) ds` on a closed
//! interval, its hypotheses, and a pointwise solver.
//!
//! The maps follow the pairing used in the existence argument: `S` and `I`
//! use `k₁, h₁`; `T` and `J` use `k₂, h₂`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{CheckMethod, Clause, PropertyReport};
use crate::cstar_algebra::{Complex64, Element};
use crate::cstar_class::{CStarFunction, MonotoneTriple, PositiveMap};
use crate::error::{Error, Result};
use crate::fixed_point::{specialize, Comparison, MappingSystem, SelfMap, Specialization};
use crate::modular_metric::{multiplication_metric, Point};
use crate::sampling::{self, SampleRng};

/// Quadrature nodes and weights on a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    lo: f64,
    hi: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl GridDomain {
    /// `n` equispaced nodes with composite trapezoid weights.
    pub fn trapezoid(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {n}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let weights = (0..n).map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h }).collect();
        Ok(Self {
            lo,
            hi,
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Pointwise function `(s, x) ↦ value`, also used for kernels `(t, s)`.
pub type PointFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Relative slack on the sampled Lipschitz inequalities, which hold with
/// equality for linear functions.
const LIPSCHITZ_RTOL: f64 = 1e-10;
/// Bracket half-width beyond which root expansion gives up.
const BRACKET_LIMIT: f64 = 1e6;

#[derive(Clone)]
pub struct IntegralSystem {
    grid: GridDomain,
    w: Vec<f64>,
    /// `kernel[(i, j)] = n(t_i, s_j)`.
    kernel: DMatrix<f64>,
    k1: PointFn,
    k2: PointFn,
    h1: PointFn,
    h2: PointFn,
    mu: Complex64,
    m1: Option<f64>,
    l1: Option<f64>,
    l2: Option<f64>,
}

impl fmt::Debug for IntegralSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralSystem")
            .field("grid", &self.grid.interval())
            .field("points", &self.grid.len())
            .field("mu", &self.mu)
            .field("m1", &self.m1)
            .field("l1", &self.l1)
            .field("l2", &self.l2)
            .finish_non_exhaustive()
    }
}

impl IntegralSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: GridDomain,
        w: Vec<f64>,
        kernel: impl Fn(f64, f64) -> f64,
        k1: PointFn,
        k2: PointFn,
        h1: PointFn,
        h2: PointFn,
        mu: Complex64,
    ) -> Result<Self> {
        if w.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                found: w.len(),
            });
        }
        let p = grid.points();
        let kernel = DMatrix::from_fn(p.len(), p.len(), |i, j| kernel(p[i], p[j]));
        Ok(Self {
            grid,
            w,
            kernel,
            k1,
            k2,
            h1,
            h2,
            mu,
            m1: None,
            l1: None,
            l2: None,
        })
    }

    pub fn with_m1(mut self, m1: f64) -> Result<Self> {
        if !(m1 >= 0.0 && m1.is_finite()) {
            return Err(Error::Config(format!("M1 must be finite and nonnegative, got {m1}")));
        }
        self.m1 = Some(m1);
        Ok(self)
    }

    pub fn with_l1(mut self, l1: f64) -> Result<Self> {
        if !(l1 > 1.0 && l1.is_finite()) {
            return Err(Error::Config(format!("L1 must exceed 1, got {l1}")));
        }
        self.l1 = Some(l1);
        Ok(self)
    }

    pub fn with_l2(mut self, l2: f64) -> Result<Self> {
        if !(l2 > 0.0 && l2.is_finite()) {
            return Err(Error::Config(format!("L2 must be positive, got {l2}")));
        }
        self.l2 = Some(l2);
        Ok(self)
    }

    /// Replaces `w`, keeping everything else.
    pub fn with_w(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.grid.len() {
            return Err(Error::Shape {
                expected: self.grid.len(),
                found: w.len(),
            });
        }
        self.w = w;
        Ok(self)
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn m1(&self) -> Option<f64> {
        self.m1
    }

    pub fn l1(&self) -> Option<f64> {
        self.l1
    }

    pub fn l2(&self) -> Option<f64> {
        self.l2
    }

    pub fn k1(&self) -> &PointFn {
        &self.k1
    }

    fn real_mu(&self) -> Result<f64> {
        if self.mu.im != 0.0 {
            return Err(Error::Precondition(format!(
                "maps on real grid functions need real mu, got {}",
                self.mu
            )));
        }
        Ok(self.mu.re)
    }

    /// `t_i ↦ Σ_j n(t_i, s_j) h(s_j, x_j) weight_j`.
    pub fn integral(&self, h: &PointFn, x: &[f64]) -> Vec<f64> {
        let s = self.grid.points();
        let hw: Vec<f64> = (0..s.len()).map(|j| h(s[j], x[j]) * self.grid.weights()[j]).collect();
        (0..s.len())
            .map(|i| (0..s.len()).map(|j| self.kernel[(i, j)] * hw[j]).sum())
            .collect()
    }

    fn outer(&self, h: &PointFn, mu: f64, x: &[f64]) -> Vec<f64> {
        let int = self.integral(h, x);
        (0..x.len()).map(|i| x[i] - self.w[i] - mu * int[i]).collect()
    }

    fn pointwise(&self, k: &PointFn, x: &[f64]) -> Vec<f64> {
        self.grid.points().iter().zip(x).map(|(&t, &v)| k(t, v)).collect()
    }

    /// `x − w − k₁(·, x) − μ ∫ n h₁(·, x)`.
    pub fn equation_residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mu = self.real_mu()?;
        let int = self.integral(&self.h1, x);
        Ok((0..x.len())
            .map(|i| x[i] - self.w[i] - (self.k1)(self.grid.points()[i], x[i]) - mu * int[i])
            .collect())
    }

    /// `(1 + |μ| L₂ M₁)/L₁` from the supplied constants, with `M₁`
    /// estimated by quadrature when absent.
    pub fn solvability(&self) -> Result<Solvability> {
        let l1 = self.l1.ok_or_else(|| Error::Config("L1 not supplied".into()))?;
        let l2 = self.l2.ok_or_else(|| Error::Config("L2 not supplied".into()))?;
        let m1 = self.m1.unwrap_or_else(|| estimate_m1(self));
        check_solvability(self.mu, l1, l2, m1, self.grid.len())
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `sup_s ∫ |n(t, s)| dt` by quadrature over grid columns.
pub fn estimate_m1(sys: &IntegralSystem) -> f64 {
    let w = sys.grid.weights();
    (0..sys.grid.len())
        .map(|j| (0..w.len()).map(|i| sys.kernel[(i, j)].abs() * w[i]).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzWitness {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

pub type LipschitzReport = PropertyReport<LipschitzWitness>;

pub const CONDITION_B: &str = "|k1(s,x) - k2(s,y)|/sqrt(2) >= L1|x-y|";
pub const CONDITION_C: &str = "|h1(s,x) - h2(s,y)| <= L2|x-y|";

fn draw(rng: &mut SampleRng, sys: &IntegralSystem, range: (f64, f64)) -> (f64, f64, f64) {
    let (lo, hi) = sys.grid.interval();
    (
        rng.gen_range(lo..=hi),
        rng.gen_range(range.0..=range.1),
        rng.gen_range(range.0..=range.1),
    )
}

/// Samples `(s, x, y)` with `s ∈ E` and `x, y ∈ range` and asserts the
/// lower Lipschitz bound on `k` and the upper one on `h`.
pub fn verify_lipschitz_conditions(
    sys: &IntegralSystem,
    rng: &mut SampleRng,
    range: (f64, f64),
    n_samples: usize,
) -> Result<LipschitzReport> {
    let l1 = sys.l1.ok_or_else(|| Error::Config("L1 not supplied".into()))?;
    let l2 = sys.l2.ok_or_else(|| Error::Config("L2 not supplied".into()))?;
    let mut b = Clause::new(CONDITION_B, CheckMethod::Sampled);
    let mut c = Clause::new(CONDITION_C, CheckMethod::Sampled);
    for _ in 0..n_samples {
        let (s, x, y) = draw(rng, sys, range);
        let gap = (x - y).abs();
        let lhs = ((sys.k1)(s, x) - (sys.k2)(s, y)).abs() / std::f64::consts::SQRT_2;
        let rhs = l1 * gap;
        b.tick();
        if lhs < rhs * (1.0 - LIPSCHITZ_RTOL) {
            b.record(LipschitzWitness { s, x, y, lhs, rhs });
        }
        let lhs = ((sys.h1)(s, x) - (sys.h2)(s, y)).abs();
        let rhs = l2 * gap;
        c.tick();
        if lhs > rhs * (1.0 + LIPSCHITZ_RTOL) + f64::MIN_POSITIVE {
            c.record(LipschitzWitness { s, x, y, lhs, rhs });
        }
    }
    Ok(PropertyReport::new("Lipschitz conditions", vec![b, c]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    /// Smallest sampled `|k₁ − k₂|/(√2 |x − y|)`.
    pub l1: f64,
    /// Largest sampled `|h₁ − h₂|/|x − y|`.
    pub l2: f64,
    pub method: CheckMethod,
}

/// Sampled bounds on the Lipschitz constants; never a certificate.
pub fn estimate_lipschitz(
    sys: &IntegralSystem,
    rng: &mut SampleRng,
    range: (f64, f64),
    n_samples: usize,
) -> LipschitzEstimate {
    let (mut l1, mut l2) = (f64::INFINITY, 0.0f64);
    for _ in 0..n_samples {
        let (s, x, y) = draw(rng, sys, range);
        let gap = (x - y).abs();
        if gap == 0.0 {
            continue;
        }
        l1 = l1.min(((sys.k1)(s, x) - (sys.k2)(s, y)).abs() / (std::f64::consts::SQRT_2 * gap));
        l2 = l2.max(((sys.h1)(s, x) - (sys.h2)(s, y)).abs() / gap);
    }
    LipschitzEstimate {
        l1,
        l2,
        method: CheckMethod::Heuristic,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solvability {
    /// `(1 + |μ| L₂ M₁)/L₁`.
    pub bound: f64,
    pub ok: bool,
    /// `√bound · 1_A`.
    pub coefficient: Element,
    /// `‖coefficient‖²` in the operator norm.
    pub coefficient_norm_sq: f64,
    /// `‖coefficient‖² = bound` within 1e-12.
    pub identity_holds: bool,
}

pub fn check_solvability(mu: Complex64, l1: f64, l2: f64, m1: f64, dim: usize) -> Result<Solvability> {
    if !(l1 > 1.0) || !(l2 > 0.0) || !(m1 >= 0.0) {
        return Err(Error::Config(format!(
            "need L1 > 1, L2 > 0, M1 >= 0; got L1 = {l1}, L2 = {l2}, M1 = {m1}"
        )));
    }
    let bound = (1.0 + mu.norm() * l2 * m1) / l1;
    let coefficient = Element::scalar(dim, bound.sqrt());
    let ctx = crate::cstar_algebra::AlgebraContext::new(dim)?;
    let norm = ctx.norm(&coefficient)?;
    let coefficient_norm_sq = norm * norm;
    Ok(Solvability {
        bound,
        ok: bound <= 1.0,
        coefficient,
        coefficient_norm_sq,
        identity_holds: (coefficient_norm_sq - bound).abs() <= 1e-12,
    })
}

/// `S, T, I, J` as maps on grid functions.
#[derive(Debug, Clone)]
pub struct IntegralMaps {
    pub s: SelfMap,
    pub t: SelfMap,
    pub i: SelfMap,
    pub j: SelfMap,
}

fn grid_map(
    name: &str,
    sys: &Arc<IntegralSystem>,
    f: impl Fn(&IntegralSystem, &[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> SelfMap {
    let sys = sys.clone();
    SelfMap::new(name, move |p| {
        let v = p.values();
        if v.len() == sys.grid.len() {
            Point::Grid(f(&sys, v))
        } else {
            Point::Grid(vec![f64::NAN; v.len()])
        }
    })
}

/// `Sx = x − w − μ∫n h₁(·,x)`, `Tx = x − w − μ∫n h₂(·,x)`,
/// `Ix = k₁(·, x)`, `Jx = k₂(·, x)`.
pub fn build_maps(sys: &IntegralSystem) -> Result<IntegralMaps> {
    let mu = sys.real_mu()?;
    let shared = Arc::new(sys.clone());
    Ok(IntegralMaps {
        s: grid_map("S", &shared, move |s, x| s.outer(&s.h1, mu, x)),
        t: grid_map("T", &shared, move |s, x| s.outer(&s.h2, mu, x)),
        i: grid_map("I", &shared, |s, x| s.pointwise(&s.k1, x)),
        j: grid_map("J", &shared, |s, x| s.pointwise(&s.k2, x)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutationReport {
    /// `‖I(S c) − S(I c)‖_∞`.
    pub si_residual: f64,
    /// `‖J(T c) − T(J c)‖_∞`.
    pub tj_residual: f64,
    pub si_ok: bool,
    pub tj_ok: bool,
}

/// Commutation of `(S, I)` and `(T, J)` at a coincidence point.
pub fn verify_owc_conditions(sys: &IntegralSystem, candidate: &[f64], tol: f64) -> Result<CommutationReport> {
    if candidate.len() != sys.grid.len() {
        return Err(Error::Shape {
            expected: sys.grid.len(),
            found: candidate.len(),
        });
    }
    let maps = build_maps(sys)?;
    let c = Point::Grid(candidate.to_vec());
    let pair = |f: &SelfMap, g: &SelfMap, label: &str| -> Result<f64> {
        let gap = f.apply(&c).sup_distance(&g.apply(&c))?;
        if !(gap <= tol) {
            return Err(Error::Precondition(format!(
                "candidate is not a coincidence point of ({label}): residual {gap:e}"
            )));
        }
        g.apply(&f.apply(&c)).sup_distance(&f.apply(&g.apply(&c)))
    };
    let si_residual = pair(&maps.s, &maps.i, "S, I")?;
    let tj_residual = pair(&maps.t, &maps.j, "T, J")?;
    Ok(CommutationReport {
        si_residual,
        tj_residual,
        si_ok: si_residual <= tol,
        tj_ok: tj_residual <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    /// Bisection steps per grid point.
    pub max_iter: usize,
    pub tol: f64,
    /// Reserved for a damped fallback iteration; the bracketing path ignores it.
    pub damping: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-8,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MapResiduals {
    pub s: f64,
    pub t: f64,
    pub i: f64,
    pub j: f64,
    /// Sup-norm residual of the integral equation itself.
    pub equation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub residuals: MapResiduals,
    pub agreed_across_inits: bool,
    /// Largest sup distance between the solution from any init and the first.
    pub init_spread: f64,
    pub solvability: Option<Solvability>,
    pub warnings: Vec<String>,
}

/// Root of `ξ ↦ k(t, ξ) − ξ`, bracketed outward from `center`.
pub fn pointwise_root(k: &PointFn, t: f64, center: f64, max_iter: usize) -> Result<f64> {
    let f = |xi: f64| k(t, xi) - xi;
    let fc = f(center);
    if fc == 0.0 {
        return Ok(center);
    }
    let mut r = 1.0;
    let (mut lo, mut hi, mut flo) = loop {
        let (a, b) = (center - r, center + r);
        let (fa, fb) = (f(a), f(b));
        if !fa.is_finite() || !fb.is_finite() {
            return Err(Error::Divergence(format!("non-finite residual near t = {t}")));
        }
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() != fb.signum() {
            // tighten to the half containing the sign change
            if fc.signum() != fa.signum() {
                break (a, center, fa);
            }
            break (center, b, fc);
        }
        r *= 2.0;
        if r > BRACKET_LIMIT {
            return Err(Error::Divergence(format!(
                "no sign change within {BRACKET_LIMIT:e} of {center} at t = {t}"
            )));
        }
    };
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `k₁(t, x(t)) = x(t)` pointwise from each init, then verifies the
/// four fixed-point residuals and the equation residual against `tol`.
pub fn solve(sys: &IntegralSystem, inits: &[Vec<f64>], params: SolveParams) -> Result<SolveReport> {
    if inits.is_empty() {
        return Err(Error::Config("solve needs at least one init".into()));
    }
    let n = sys.grid.len();
    let mut warnings = Vec::new();
    let solvability = match sys.solvability() {
        Ok(s) => {
            if !s.ok {
                warnings.push(format!("solvability bound {} exceeds 1", s.bound));
            }
            Some(s)
        }
        Err(e) => {
            warnings.push(format!("solvability not checked: {e}"));
            None
        }
    };
    let mut solutions = Vec::with_capacity(inits.len());
    for init in inits {
        if init.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: init.len(),
            });
        }
        let x = sys
            .grid
            .points()
            .iter()
            .zip(init)
            .map(|(&t, &c)| pointwise_root(&sys.k1, t, c, params.max_iter))
            .collect::<Result<Vec<f64>>>()?;
        solutions.push(x);
    }
    let x = solutions[0].clone();
    let init_spread = solutions.iter().map(|s| sup_dist(s, &x)).fold(0.0, f64::max);
    let agreed_across_inits = init_spread <= params.tol;
    if !agreed_across_inits {
        warnings.push(format!("inits disagree by {init_spread:e}"));
    }

    let maps = build_maps(sys)?;
    let p = Point::Grid(x.clone());
    let res = |m: &SelfMap| m.apply(&p).sup_distance(&p);
    let residuals = MapResiduals {
        s: res(&maps.s)?,
        t: res(&maps.t)?,
        i: res(&maps.i)?,
        j: res(&maps.j)?,
        equation: sys.equation_residual(&x)?.iter().fold(0.0, |m, v| m.max(v.abs())),
    };
    for (check, r) in [
        ("Ix = x", residuals.i),
        ("Jx = x", residuals.j),
        ("Sx = x", residuals.s),
        ("Tx = x", residuals.t),
        ("integral equation", residuals.equation),
    ] {
        if !(r <= params.tol) {
            return Err(Error::InconsistentInstance {
                check: check.into(),
                residual: r,
                tol: params.tol,
            });
        }
    }
    Ok(SolveReport {
        solution: x,
        residuals,
        agreed_across_inits,
        init_spread,
        solvability,
        warnings,
    })
}

/// `count` grid functions with i.i.d. entries uniform on `[-5, 5]`.
pub fn random_inits(len: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = sampling::seeded(seed);
    (0..count)
        .map(|_| (0..len).map(|_| rng.gen_range(-5.0..=5.0)).collect())
        .collect()
}

/// The six-map system with `R = U = identity`, `a = √bound · 1_A`,
/// `b = c = θ`, `ψ(B) = B/2`, `φ(B) = B/4`, `F(A, B) = A/√2` over the
/// multiplication metric, compared in norm.
pub fn wrapped_system(sys: &IntegralSystem) -> Result<MappingSystem> {
    let solv = sys.solvability()?;
    let maps = build_maps(sys)?;
    let metric = multiplication_metric(&sys.grid)?;
    let zero = Element::zero(sys.grid.len());
    let triple = MonotoneTriple::new(
        PositiveMap::linear(0.5),
        PositiveMap::linear(0.25),
        CStarFunction::scale(std::f64::consts::FRAC_1_SQRT_2)?,
    );
    Ok(specialize(
        Specialization::IdentityInner,
        vec![maps.s, maps.t, maps.i, maps.j],
        vec![solv.coefficient, zero.clone(), zero],
        triple,
        metric,
    )?
    .with_comparison(Comparison::Norm))
}

/// Named-catalog description of an instance, as read from configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub interval: [f64; 2],
    pub points: usize,
    /// `product` (t·s), `product_square` (t²·s), `constant:c`, `zero`.
    pub kernel: String,
    /// Functions of `(s, x)`: `linear:a`, `affine_sine:a:b`
    /// (`a·x − b·sin(πs)`), `square`, `zero`.
    pub k1: String,
    pub k2: String,
    pub h1: String,
    pub h2: String,
    pub mu: f64,
    #[serde(default)]
    pub mu_im: f64,
    /// `consistent_sine` (`−μ∫n h₁(·, sin(π·))`), `constant:c`, `zero`.
    pub w: String,
    #[serde(default)]
    pub w_offset: f64,
    #[serde(default)]
    pub m1: Option<f64>,
    #[serde(default)]
    pub l1: Option<f64>,
    #[serde(default)]
    pub l2: Option<f64>,
}

fn parse_params(field: &str, name: &str, rest: &[&str], want: usize) -> Result<Vec<f64>> {
    if rest.len() != want {
        return Err(Error::Config(format!("{field}: '{name}' takes {want} parameter(s)")));
    }
    rest.iter()
        .map(|r| {
            r.parse::<f64>()
                .map_err(|_| Error::Config(format!("{field}: bad number '{r}' in '{name}'")))
        })
        .collect()
}

pub fn parse_kernel(field: &str, name: &str) -> Result<PointFn> {
    let parts: Vec<&str> = name.split(':').collect();
    Ok(match parts[0] {
        "product" => {
            parse_params(field, name, &parts[1..], 0)?;
            Arc::new(|t, s| t * s)
        }
        "product_square" => {
            parse_params(field, name, &parts[1..], 0)?;
            Arc::new(|t, s| t * t * s)
        }
        "constant" => {
            let c = parse_params(field, name, &parts[1..], 1)?[0];
            Arc::new(move |_, _| c)
        }
        "zero" => Arc::new(|_, _| 0.0),
        _ => return Err(Error::Config(format!("{field}: unknown kernel '{name}'"))),
    })
}

pub fn parse_function(field: &str, name: &str) -> Result<PointFn> {
    let parts: Vec<&str> = name.split(':').collect();
    Ok(match parts[0] {
        "linear" => {
            let a = parse_params(field, name, &parts[1..], 1)?[0];
            Arc::new(move |_, x| a * x)
        }
        "affine_sine" => {
            let p = parse_params(field, name, &parts[1..], 2)?;
            let (a, b) = (p[0], p[1]);
            Arc::new(move |s, x| a * x - b * (std::f64::consts::PI * s).sin())
        }
        "square" => {
            parse_params(field, name, &parts[1..], 0)?;
            Arc::new(|_, x| x * x)
        }
        "zero" => Arc::new(|_, _| 0.0),
        _ => return Err(Error::Config(format!("{field}: unknown function '{name}'"))),
    })
}

impl InstanceSpec {
    /// `E = [0, 1]`, `n = ts`, `k₁ = k₂ = 2x − sin(πs)`, `h₁ = h₂ = x`,
    /// `μ = 0.2`, consistent `w`, `L₁ = √2`, `L₂ = 1`; solution `sin(πt)`.
    pub fn canonical(points: usize) -> Self {
        Self {
            interval: [0.0, 1.0],
            points,
            kernel: "product".into(),
            k1: "affine_sine:2:1".into(),
            k2: "affine_sine:2:1".into(),
            h1: "linear:1".into(),
            h2: "linear:1".into(),
            mu: 0.2,
            mu_im: 0.0,
            w: "consistent_sine".into(),
            w_offset: 0.0,
            m1: None,
            l1: Some(std::f64::consts::SQRT_2),
            l2: Some(1.0),
        }
    }

    pub fn build(&self) -> Result<IntegralSystem> {
        let grid = GridDomain::trapezoid(self.interval[0], self.interval[1], self.points)?;
        let kernel = parse_kernel("kernel", &self.kernel)?;
        let mu = Complex64::new(self.mu, self.mu_im);
        let k1 = parse_function("k1", &self.k1)?;
        let k2 = parse_function("k2", &self.k2)?;
        let h1 = parse_function("h1", &self.h1)?;
        let h2 = parse_function("h2", &self.h2)?;
        let mut sys = IntegralSystem::new(
            grid.clone(),
            vec![0.0; grid.len()],
            |t, s| kernel(t, s),
            k1,
            k2,
            h1.clone(),
            h2,
            mu,
        )?;
        let parts: Vec<&str> = self.w.split(':').collect();
        let mut w = match parts[0] {
            "zero" => vec![0.0; grid.len()],
            "constant" => vec![parse_params("w", &self.w, &parts[1..], 1)?[0]; grid.len()],
            "consistent_sine" => {
                parse_params("w", &self.w, &parts[1..], 0)?;
                let mu = sys
                    .real_mu()
                    .map_err(|_| Error::Config("w: consistent_sine needs real mu".into()))?;
                let g: Vec<f64> = grid.points().iter().map(|s| (std::f64::consts::PI * s).sin()).collect();
                sys.integral(&h1, &g).into_iter().map(|v| -mu * v).collect()
            }
            _ => return Err(Error::Config(format!("w: unknown function '{}'", self.w))),
        };
        w.iter_mut().for_each(|v| *v += self.w_offset);
        sys = sys.with_w(w)?;
        if let Some(m1) = self.m1 {
            sys = sys.with_m1(m1)?;
        }
        if let Some(l1) = self.l1 {
            sys = sys.with_l1(l1)?;
        }
        if let Some(l2) = self.l2 {
            sys = sys.with_l2(l2)?;
        }
        Ok(sys)
    }
}

/// Writes `t,x` rows.
pub fn write_solution_csv<W: std::io::Write>(out: W, grid: &GridDomain, x: &[f64]) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["t", "x"]).map_err(io)?;
    for (t, v) in grid.points().iter().zip(x) {
        wtr.write_record([t.to_string(), v.to_string()]).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}
