//! Finite-dimensional model of a unital C*-algebra.
//!
//! Elements are `n x n` complex matrices with conjugate transpose as the
//! involution. An [`AlgebraContext`] fixes the matrix size, which norm is in
//! use (operator or Frobenius) and which order defines the positive cone
//! (Loewner or entrywise). Elements may also carry a `+inf` marker, used for
//! modular values in the extended codomain.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Largest singular value. Satisfies the C*-identity.
    Operator,
    /// Root of the sum of squared moduli.
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    /// `a <= b` iff `b - a` is self-adjoint with nonnegative spectrum.
    Loewner,
    /// `a <= b` iff every entry of `b - a` is real and nonnegative.
    Entrywise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraContext {
    pub dim: usize,
    pub norm_mode: NormMode,
    pub order_mode: OrderMode,
    pub positivity_tol: f64,
}

impl AlgebraContext {
    /// Operator norm, Loewner order, default tolerance.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("algebra dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            norm_mode: NormMode::Operator,
            order_mode: OrderMode::Loewner,
            positivity_tol: DEFAULT_POSITIVITY_TOL,
        })
    }

    pub fn with_norm(mut self, norm_mode: NormMode) -> Self {
        self.norm_mode = norm_mode;
        self
    }

    pub fn with_order(mut self, order_mode: OrderMode) -> Self {
        self.order_mode = order_mode;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0) {
            return Err(Error::Config(format!("positivity tolerance must be >= 0, got {tol}")));
        }
        self.positivity_tol = tol;
        Ok(self)
    }

    pub fn zero(&self) -> Element {
        Element::zero(self.dim)
    }

    pub fn one(&self) -> Element {
        Element::identity(self.dim)
    }

    pub fn norm(&self, a: &Element) -> Result<f64> {
        a.norm(self.norm_mode)
    }

    /// Membership in the positive cone under this context's order.
    ///
    /// The infinite element counts as positive.
    pub fn is_positive(&self, a: &Element) -> bool {
        self.positivity_defect(a) >= -self.positivity_tol
    }

    /// Signed distance into the cone: the smallest eigenvalue (Loewner) or the
    /// smallest entry (entrywise). Asymmetry or imaginary parts count as
    /// negative mass. `+inf` for the infinite element.
    pub fn positivity_defect(&self, a: &Element) -> f64 {
        if a.infinite {
            return f64::INFINITY;
        }
        match self.order_mode {
            OrderMode::Loewner => {
                let asym = a.asymmetry();
                let lowest = min_hermitian_eigenvalue(&a.hermitian_part());
                if asym > self.positivity_tol {
                    lowest.min(-asym)
                } else {
                    lowest
                }
            }
            OrderMode::Entrywise => a.entries.iter().fold(f64::INFINITY, |acc, z| {
                let imag = if z.im.abs() > self.positivity_tol {
                    -z.im.abs()
                } else {
                    f64::INFINITY
                };
                acc.min(z.re).min(imag)
            }),
        }
    }

    /// `a <= b` in this context's order.
    pub fn leq(&self, a: &Element, b: &Element) -> bool {
        match (a.infinite, b.infinite) {
            (_, true) => true,
            (true, false) => false,
            (false, false) => self.is_positive(&(b - a)),
        }
    }

    /// Defect of `b - a`, i.e. how far the pair is from satisfying `a <= b`.
    pub fn order_defect(&self, a: &Element, b: &Element) -> f64 {
        match (a.infinite, b.infinite) {
            (_, true) => f64::INFINITY,
            (true, false) => f64::NEG_INFINITY,
            (false, false) => self.positivity_defect(&(b - a)),
        }
    }

    /// The unique positive square root, computed on the eigenbasis of the
    /// Hermitian part. Eigenvalues in `[-tol, 0)` are clamped to zero.
    pub fn positive_sqrt(&self, a: &Element) -> Result<Element> {
        if a.infinite {
            return Err(Error::ExtendedValue);
        }
        let tol = self.positivity_tol;
        let asym = a.asymmetry();
        if asym > tol {
            return Err(Error::NotSelfAdjoint { asymmetry: asym });
        }
        let clamp = |v: f64| -> Result<f64> {
            if v < -tol {
                Err(Error::NotPositive { eigenvalue: v, tol })
            } else {
                Ok(v.max(0.0).sqrt())
            }
        };
        if a.is_diagonal() {
            let d = a
                .entries
                .diagonal()
                .iter()
                .map(|z| clamp(z.re))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Element::diag(&d));
        }
        let eig = SymmetricEigen::new(a.hermitian_part());
        let roots = eig.eigenvalues.iter().map(|&v| clamp(v)).collect::<Result<Vec<_>>>()?;
        let v = &eig.eigenvectors;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            roots.len(),
            roots.iter().map(|&r| Complex64::new(r, 0.0)),
        ));
        let s = v * d * v.adjoint();
        Ok(Element::from_matrix(s).symmetrized())
    }

    /// `|a| = (a* a)^(1/2)`.
    pub fn abs(&self, a: &Element) -> Result<Element> {
        let aa = &a.involution()? * a;
        self.positive_sqrt(&aa.symmetrized())
    }

    /// Checks the three unit-ball facts of a unital C*-algebra for a positive `a`
    /// under the operator norm:
    /// `x <= 1 <=> ||x|| <= 1`, the resolvent bound `||a (1 - a)^-1|| < 1`
    /// when `||a|| < 1/2`, and positivity of `a b` for a commuting positive `b`.
    pub fn unit_lemma_report(&self, a: &Element, partner: Option<&Element>) -> UnitLemmaReport {
        let ctx = self.with_norm(NormMode::Operator).with_order(OrderMode::Loewner);
        let tol = ctx.positivity_tol;
        let mut report = UnitLemmaReport::default();
        if a.infinite || !ctx.is_positive(a) {
            report.notes.push("input is not a finite positive element".into());
            return report;
        }
        let norm = match ctx.norm(a) {
            Ok(n) => n,
            Err(e) => {
                report.notes.push(e.to_string());
                return report;
            }
        };
        let below_unit = ctx.leq(a, &ctx.one());
        let in_ball = norm <= 1.0 + tol;
        report.unit_ball_equivalence = Some(below_unit == in_ball);

        if norm < 0.5 {
            let resolvent = (&ctx.one() - a).entries.clone().try_inverse();
            report.resolvent_bound = Some(match resolvent {
                Some(inv) => {
                    let prod = Element::from_matrix(&a.entries * inv);
                    prod.norm(NormMode::Operator).map(|n| n < 1.0).unwrap_or(false)
                }
                None => false,
            });
        } else {
            report
                .notes
                .push(format!("resolvent clause needs ||a|| < 1/2, got {norm}"));
        }

        match partner {
            Some(b) if !b.infinite && ctx.is_positive(b) => {
                let ab = a * b;
                let ba = b * a;
                let scale = 1.0 + ab.max_abs_entry();
                if (&ab - &ba).max_abs_entry() <= tol * scale {
                    report.commuting_product_positive = Some(ctx.is_positive(&ab.symmetrized()));
                } else {
                    report.notes.push("partner does not commute with a".into());
                }
            }
            Some(_) => report.notes.push("partner is not a finite positive element".into()),
            None => {}
        }
        report
    }
}

/// Outcome of [`AlgebraContext::unit_lemma_report`]. `None` marks a clause that
/// does not apply to the given input.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UnitLemmaReport {
    pub unit_ball_equivalence: Option<bool>,
    pub resolvent_bound: Option<bool>,
    pub commuting_product_positive: Option<bool>,
    pub notes: Vec<String>,
}

impl UnitLemmaReport {
    pub fn all_applicable_hold(&self) -> bool {
        [
            self.unit_ball_equivalence,
            self.resolvent_bound,
            self.commuting_product_positive,
        ]
        .iter()
        .all(|c| c.unwrap_or(true))
    }
}

/// An element of the matrix algebra, possibly the extended value `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    entries: DMatrix<Complex64>,
    infinite: bool,
}

impl Element {
    /// The zero element θ.
    pub fn zero(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    /// The unit 1_A.
    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    /// `k * 1_A`.
    pub fn scalar(dim: usize, k: f64) -> Self {
        Self::identity(dim).scale(k)
    }

    pub fn infinite(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
            infinite: true,
        }
    }

    pub fn from_matrix(entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "algebra elements are square matrices");
        Self {
            entries,
            infinite: false,
        }
    }

    /// Builds a real matrix from row-major values.
    pub fn from_real_rows(dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), dim * dim, "expected {} values", dim * dim);
        Self::from_matrix(DMatrix::from_row_iterator(
            dim,
            dim,
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.entries[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entry of `|a - a*|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.entries + self.entries.adjoint()).scale(0.5)
    }

    /// Replaces the element with its Hermitian part; clears rounding asymmetry.
    pub fn symmetrized(&self) -> Self {
        if self.infinite {
            return self.clone();
        }
        Self::from_matrix(self.hermitian_part())
    }

    pub fn scale(&self, k: f64) -> Self {
        if self.infinite {
            return if k == 0.0 { Self::zero(self.dim()) } else { self.clone() };
        }
        Self::from_matrix(self.entries.scale(k))
    }

    /// Conjugate transpose.
    pub fn involution(&self) -> Result<Self> {
        if self.infinite {
            return Err(Error::ExtendedValue);
        }
        Ok(Self::from_matrix(self.entries.adjoint()))
    }

    pub fn norm(&self, mode: NormMode) -> Result<f64> {
        if self.infinite {
            return Err(Error::ExtendedValue);
        }
        Ok(match mode {
            NormMode::Frobenius => self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            NormMode::Operator => {
                if self.is_diagonal() {
                    self.entries.diagonal().iter().fold(0.0, |acc, z| acc.max(z.norm()))
                } else {
                    self.entries
                        .clone()
                        .singular_values()
                        .iter()
                        .fold(0.0, |acc: f64, &s| acc.max(s))
                }
            }
        })
    }

    /// Eigenvalues with multiplicity.
    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        if self.infinite {
            return Err(Error::ExtendedValue);
        }
        if self.is_diagonal() {
            return Ok(self.entries.diagonal().iter().copied().collect());
        }
        if self.asymmetry() == 0.0 {
            return Ok(SymmetricEigen::new(self.entries.clone())
                .eigenvalues
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect());
        }
        if let Some(ev) = self.entries.eigenvalues() {
            return Ok(ev.iter().copied().collect());
        }
        // Real matrix whose complex Schur form did not split: use the real
        // quasi-triangular route.
        let real = self.entries.map(|z| z.re);
        Ok(real.complex_eigenvalues().iter().copied().collect())
    }

    /// Trace inner product `tr(a* b)` real part; used for Frobenius-style checks.
    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

fn min_hermitian_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || h[(i, j)] == Complex64::new(0.0, 0.0)));
    if diagonal {
        return h.diagonal().iter().fold(f64::INFINITY, |acc, z| acc.min(z.re));
    }
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

// Arithmetic. `+inf` absorbs addition and is annihilated by θ.

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        if self.infinite || rhs.infinite {
            return Element::infinite(self.dim());
        }
        Element::from_matrix(&self.entries + &rhs.entries)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        if self.infinite || rhs.infinite {
            return Element::infinite(self.dim());
        }
        Element::from_matrix(&self.entries - &rhs.entries)
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        let zero = |e: &Element| !e.infinite && e.entries.iter().all(|z| *z == Complex64::new(0.0, 0.0));
        if zero(self) || zero(rhs) {
            return Element::zero(self.dim());
        }
        if self.infinite || rhs.infinite {
            return Element::infinite(self.dim());
        }
        Element::from_matrix(&self.entries * &rhs.entries)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Element {
            type Output = Element;
            fn $m(self, rhs: Element) -> Element {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Element> for Element {
            type Output = Element;
            fn $m(self, rhs: &Element) -> Element {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

// Row-major nested arrays of `[re, im]` pairs; the extended value is
// `{"infinite": dim}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ElementRepr {
    Matrix(Vec<Vec<[f64; 2]>>),
    Infinite { infinite: usize },
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.infinite {
            ElementRepr::Infinite { infinite: self.dim() }
        } else {
            let n = self.dim();
            ElementRepr::Matrix(
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im])
                            .collect()
                    })
                    .collect(),
            )
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ElementRepr::deserialize(deserializer)? {
            ElementRepr::Infinite { infinite } => Ok(Element::infinite(infinite)),
            ElementRepr::Matrix(rows) => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(D::Error::custom("matrix must be square and non-empty"));
                }
                Ok(Element::from_matrix(DMatrix::from_fn(n, n, |i, j| {
                    Complex64::new(rows[i][j][0], rows[i][j][1])
                })))
            }
        }
    }
}
