//! C*-class functions, the control families `Ψ` and `Φ_u`, and monotone
//! triples `(ψ, φ, F)`.
//!
//! A C*-class function `F: A₊ × A₊ → A` satisfies `F(A, B) ⪯ A`, and
//! `F(A, B) = A` only when `A = θ` or `B = θ`. The first condition is
//! sampled. The second is an exact-equality implication: it is settled from
//! the closed form for built-ins and probed by near-equality otherwise.
//! Continuity of `ψ`, `φ` and `F` is recorded as an assumption.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::checks::{CheckMethod, Clause, PropertyReport};
use crate::cstar_algebra::{AlgebraContext, Element};
use crate::error::{Error, Result};
use crate::sampling::ConeSampler;

/// `‖F(A, B) − A‖` below this counts as equality in the heuristic probe.
pub const NEAR_EQUAL: f64 = 1e-8;
/// Arguments with norm above this count as nonzero in the heuristic probe.
pub const NONZERO: f64 = 1e-4;
/// Outputs with norm at or below this count as θ for `ψ` / `φ` probes.
pub const NEAR_ZERO: f64 = 1e-12;

type Unary = Arc<dyn Fn(&Element) -> Element + Send + Sync>;
type Binary = Arc<dyn Fn(&Element, &Element) -> Element + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// `A ↦ k·A`
    Linear(f64),
    Custom,
}

/// A self-map of the positive cone, used for both `ψ ∈ Ψ` and `φ ∈ Φ_u`.
#[derive(Clone)]
pub struct PositiveMap {
    name: String,
    kind: MapKind,
    eval: Unary,
}

pub type PsiFunction = PositiveMap;
pub type PhiFunction = PositiveMap;

impl fmt::Debug for PositiveMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PositiveMap({})", self.name)
    }
}

impl PositiveMap {
    pub fn new(name: impl Into<String>, eval: impl Fn(&Element) -> Element + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            kind: MapKind::Custom,
            eval: Arc::new(eval),
        }
    }

    pub fn linear(k: f64) -> Self {
        Self {
            name: format!("linear:{k}"),
            kind: MapKind::Linear(k),
            eval: Arc::new(move |a| a.scale(k)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn apply(&self, a: &Element) -> Element {
        (self.eval)(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    /// `F(A, B) = A − B`
    Subtract,
    /// `F(A, B) = m·A`, `0 < m < 1`
    Scale(f64),
    /// `F(U, V) = U − φ(U)`
    PhiSubtract,
    Custom,
}

#[derive(Clone)]
pub struct CStarFunction {
    name: String,
    kind: FunctionKind,
    eval: Binary,
}

impl fmt::Debug for CStarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CStarFunction({})", self.name)
    }
}

impl CStarFunction {
    /// A user-supplied candidate. Membership is not assumed; run
    /// [`verify_cstar_class`].
    pub fn new(name: impl Into<String>, eval: impl Fn(&Element, &Element) -> Element + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            kind: FunctionKind::Custom,
            eval: Arc::new(eval),
        }
    }

    pub fn subtract() -> Self {
        Self {
            name: "subtract".into(),
            kind: FunctionKind::Subtract,
            eval: Arc::new(|a, b| a - b),
        }
    }

    pub fn scale(m: f64) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::Config(format!("scale factor must lie in (0, 1), got {m}")));
        }
        Ok(Self {
            name: format!("scale:{m}"),
            kind: FunctionKind::Scale(m),
            eval: Arc::new(move |a, _| a.scale(m)),
        })
    }

    pub fn phi_subtract(phi: PhiFunction) -> Self {
        Self {
            name: format!("phi_subtract({})", phi.name()),
            kind: FunctionKind::PhiSubtract,
            eval: Arc::new(move |u, _| u - &phi.apply(u)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn apply(&self, a: &Element, b: &Element) -> Element {
        (self.eval)(a, b)
    }
}

/// `(ψ, φ, F)` with the composite `A ↦ F(ψ(A), φ(A))`.
#[derive(Debug, Clone)]
pub struct MonotoneTriple {
    pub psi: PsiFunction,
    pub phi: PhiFunction,
    pub f: CStarFunction,
}

impl MonotoneTriple {
    pub fn new(psi: PsiFunction, phi: PhiFunction, f: CStarFunction) -> Self {
        Self { psi, phi, f }
    }

    pub fn image(&self, a: &Element) -> Element {
        self.f.apply(&self.psi.apply(a), &self.phi.apply(a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementWitness {
    pub a: Element,
    pub b: Option<Element>,
    /// Order defect, or the offending norm for equality probes.
    pub magnitude: f64,
}

pub type ClassReport = PropertyReport<ElementWitness>;

fn witness(a: &Element, b: Option<&Element>, magnitude: f64) -> ElementWitness {
    ElementWitness {
        a: a.clone(),
        b: b.cloned(),
        magnitude,
    }
}

fn norm_or_inf(ctx: &AlgebraContext, e: &Element) -> f64 {
    ctx.norm(e).unwrap_or(f64::INFINITY)
}

fn continuity(name: &str) -> Clause<ElementWitness> {
    Clause::new(format!("{name} is continuous"), CheckMethod::Assumed)
}

/// Checks `F(A, B) ⪯ A` on sampled positive pairs and the equality clause.
pub fn verify_cstar_class(
    f: &CStarFunction,
    ctx: &AlgebraContext,
    sampler: &mut ConeSampler,
    n_samples: usize,
) -> ClassReport {
    let mut below = Clause::new("F(A,B) <= A", CheckMethod::Sampled);
    let equality_method = match f.kind {
        FunctionKind::Subtract | FunctionKind::Scale(_) => CheckMethod::Analytic,
        FunctionKind::PhiSubtract | FunctionKind::Custom => CheckMethod::Heuristic,
    };
    let mut equality = Clause::new("F(A,B) = A implies A = 0 or B = 0", equality_method);

    for k in 0..n_samples {
        let a = sampler.positive(ctx);
        // exercise the boundary B = θ now and then
        let b = if k % 17 == 0 { ctx.zero() } else { sampler.positive(ctx) };
        let fab = f.apply(&a, &b);
        below.tick();
        if !ctx.leq(&fab, &a) {
            below.record(witness(&a, Some(&b), ctx.order_defect(&fab, &a)));
        }
        if equality_method == CheckMethod::Heuristic {
            equality.tick();
            let gap = norm_or_inf(ctx, &(&fab - &a));
            if gap < NEAR_EQUAL && norm_or_inf(ctx, &a) > NONZERO && norm_or_inf(ctx, &b) > NONZERO {
                equality.record(witness(&a, Some(&b), gap));
            }
        }
    }
    PropertyReport::new(f.name(), vec![below, equality, continuity("F")])
}

/// `ψ ∈ Ψ`: non-decreasing, `ψ(T) = θ` exactly when `T = θ`.
pub fn verify_psi(psi: &PsiFunction, ctx: &AlgebraContext, sampler: &mut ConeSampler, n_samples: usize) -> ClassReport {
    let mut codomain = Clause::new("psi(T) >= 0", CheckMethod::Sampled);
    let mut monotone = Clause::new("A <= B implies psi(A) <= psi(B)", CheckMethod::Sampled);
    let mut at_zero = Clause::new("psi(0) = 0", CheckMethod::Sampled);
    let mut only_zero = Clause::new("psi(T) = 0 implies T = 0", CheckMethod::Heuristic);

    let zero = ctx.zero();
    let pz = psi.apply(&zero);
    at_zero.tick();
    if pz.is_infinite() || pz.max_abs_entry() != 0.0 {
        at_zero.record(witness(&zero, None, norm_or_inf(ctx, &pz)));
    }

    for _ in 0..n_samples {
        let (a, b) = sampler.ordered_pair(ctx);
        let (pa, pb) = (psi.apply(&a), psi.apply(&b));
        codomain.tick();
        if !ctx.is_positive(&pa) {
            codomain.record(witness(&a, None, ctx.positivity_defect(&pa)));
        }
        monotone.tick();
        if !ctx.leq(&pa, &pb) {
            monotone.record(witness(&a, Some(&b), ctx.order_defect(&pa, &pb)));
        }
        only_zero.tick();
        let n = norm_or_inf(ctx, &pa);
        if norm_or_inf(ctx, &a) > NONZERO && n <= NEAR_ZERO {
            only_zero.record(witness(&a, None, n));
        }
    }
    PropertyReport::new(
        psi.name(),
        vec![codomain, monotone, at_zero, only_zero, continuity("psi")],
    )
}

/// `φ ∈ Φ_u`: non-decreasing, `φ(T) ≻ θ` for `T ≻ θ`, `φ(θ) ⪰ θ`.
pub fn verify_phi(phi: &PhiFunction, ctx: &AlgebraContext, sampler: &mut ConeSampler, n_samples: usize) -> ClassReport {
    let mut monotone = Clause::new("A <= B implies phi(A) <= phi(B)", CheckMethod::Sampled);
    let mut at_zero = Clause::new("phi(0) >= 0", CheckMethod::Sampled);
    let mut strict = Clause::new("T > 0 implies phi(T) > 0", CheckMethod::Heuristic);

    let zero = ctx.zero();
    let pz = phi.apply(&zero);
    at_zero.tick();
    if !ctx.is_positive(&pz) {
        at_zero.record(witness(&zero, None, ctx.positivity_defect(&pz)));
    }

    for _ in 0..n_samples {
        let (a, b) = sampler.ordered_pair(ctx);
        let (pa, pb) = (phi.apply(&a), phi.apply(&b));
        monotone.tick();
        if !ctx.leq(&pa, &pb) {
            monotone.record(witness(&a, Some(&b), ctx.order_defect(&pa, &pb)));
        }
        // sampled positives are nonzero by construction
        strict.tick();
        let n = norm_or_inf(ctx, &pa);
        if !ctx.is_positive(&pa) || n <= NEAR_ZERO {
            let magnitude = if ctx.is_positive(&pa) {
                n
            } else {
                ctx.positivity_defect(&pa)
            };
            strict.record(witness(&a, None, magnitude));
        }
    }
    PropertyReport::new(phi.name(), vec![monotone, at_zero, strict, continuity("phi")])
}

/// `A ⪯ B ⟹ F(ψ(A), φ(A)) ⪯ F(ψ(B), φ(B))` on sampled ordered pairs.
pub fn verify_monotone_triple(
    triple: &MonotoneTriple,
    ctx: &AlgebraContext,
    sampler: &mut ConeSampler,
    n_samples: usize,
) -> ClassReport {
    let mut clause = Clause::new(
        "A <= B implies F(psi(A),phi(A)) <= F(psi(B),phi(B))",
        CheckMethod::Sampled,
    );
    for _ in 0..n_samples {
        let (a, b) = sampler.ordered_pair(ctx);
        let (ia, ib) = (triple.image(&a), triple.image(&b));
        clause.tick();
        if !ctx.leq(&ia, &ib) {
            clause.record(witness(&a, Some(&b), ctx.order_defect(&ia, &ib)));
        }
    }
    let subject = format!("({}, {}, {})", triple.psi.name(), triple.phi.name(), triple.f.name());
    PropertyReport::new(subject, vec![clause])
}

/// Membership of every component plus the monotonicity of the composite.
pub fn verify_triple_membership(
    triple: &MonotoneTriple,
    ctx: &AlgebraContext,
    sampler: &mut ConeSampler,
    n_samples: usize,
) -> Vec<ClassReport> {
    vec![
        verify_psi(&triple.psi, ctx, sampler, n_samples),
        verify_phi(&triple.phi, ctx, sampler, n_samples),
        verify_cstar_class(&triple.f, ctx, sampler, n_samples),
        verify_monotone_triple(triple, ctx, sampler, n_samples),
    ]
}
