use cstar_modular::cstar_algebra::{AlgebraContext, Complex64, Element, NormMode, OrderMode};
use cstar_modular::integral_solver::GridDomain;
use cstar_modular::modular_metric::{
    geometric_weighted_metric, multiplication_metric, scalar_diagonal_metric, ModularMetric, Point,
};
use cstar_modular::sampling::{random_matrix, seeded, ConeSampler};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(dim: usize, entries: &[(f64, f64)]) -> Element {
    Element::from_matrix(DMatrix::from_fn(dim, dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        Complex64::new(re, im)
    }))
}

fn element() -> impl Strategy<Value = Element> {
    (1usize..=4).prop_flat_map(|dim| {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), dim * dim).prop_map(move |v| matrix(dim, &v))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn operator_norm_c_star_identity(a in element()) {
        let ctx = AlgebraContext::new(a.dim()).unwrap();
        let n = ctx.norm(&a).unwrap();
        let nn = ctx.norm(&(&a.involution().unwrap() * &a)).unwrap();
        prop_assert!((nn - n * n).abs() <= 1e-10 * (1.0 + n * n));
    }

    #[test]
    fn involution_preserves_norm(a in element()) {
        let star = a.involution().unwrap();
        for mode in [NormMode::Operator, NormMode::Frobenius] {
            prop_assert!((a.norm(mode).unwrap() - star.norm(mode).unwrap()).abs() <= 1e-12 * (1.0 + a.norm(mode).unwrap()));
        }
        prop_assert_eq!(star.involution().unwrap(), a);
    }

    #[test]
    fn norm_is_subadditive_and_submultiplicative(a in element(), seed in 0u64..1000) {
        let b = random_matrix(&mut seeded(seed), a.dim(), true);
        let ctx = AlgebraContext::new(a.dim()).unwrap();
        let (na, nb) = (ctx.norm(&a).unwrap(), ctx.norm(&b).unwrap());
        prop_assert!(ctx.norm(&(&a + &b)).unwrap() <= na + nb + 1e-12);
        prop_assert!(ctx.norm(&(&a * &b)).unwrap() <= na * nb * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn gram_matrices_are_positive(a in element()) {
        let ctx = AlgebraContext::new(a.dim()).unwrap();
        let g = &a.involution().unwrap() * &a;
        prop_assert!(ctx.is_positive(&g));
    }

    #[test]
    fn scalar_metric_symmetric(x in -100.0..100.0f64, y in -100.0..100.0f64, lambda in 1e-3..1e3f64) {
        let m = scalar_diagonal_metric();
        let (px, py) = (Point::Scalar(x), Point::Scalar(y));
        prop_assert_eq!(m.eval(lambda, &px, &py).unwrap(), m.eval(lambda, &py, &px).unwrap());
    }

    #[test]
    fn grid_metric_symmetric_and_sup_norm(
        f in prop::collection::vec(-10.0..10.0f64, 16),
        g in prop::collection::vec(-10.0..10.0f64, 16),
        lambda in 1e-2..1e2f64,
    ) {
        let m = multiplication_metric(&GridDomain::trapezoid(0.0, 1.0, 16).unwrap()).unwrap();
        let (pf, pg) = (Point::Grid(f.clone()), Point::Grid(g.clone()));
        prop_assert_eq!(m.eval(lambda, &pf, &pg).unwrap(), m.eval(lambda, &pg, &pf).unwrap());
        let sup = f.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!((m.norm_at(lambda, &pf, &pg).unwrap() - sup / lambda).abs() <= 1e-12 * (1.0 + sup / lambda));
    }

    #[test]
    fn geometric_metric_symmetric(n in 1i32..=20, k in 1i32..=20, lambda in 1e-3..1e3f64) {
        let m: ModularMetric = geometric_weighted_metric(0.5, 2.0).unwrap();
        let (x, y) = (Point::Scalar(0.5f64.powi(-n)), Point::Scalar(0.5f64.powi(-k)));
        prop_assert_eq!(m.eval(lambda, &x, &y).unwrap(), m.eval(lambda, &y, &x).unwrap());
    }
}

#[test]
fn square_roots_of_sampled_positives() {
    for (dim, complex) in [(2, false), (3, true), (4, true)] {
        let ctx = AlgebraContext::new(dim).unwrap();
        let mut sampler = if complex {
            ConeSampler::complex(9)
        } else {
            ConeSampler::new(9)
        };
        for _ in 0..1000 {
            let a = sampler.positive(&ctx);
            let s = ctx.positive_sqrt(&a).unwrap();
            assert!(ctx.is_positive(&s));
            let back = &s * &s;
            let err = ctx.norm(&(&back - &a)).unwrap();
            assert!(err <= 1e-9 * (1.0 + ctx.norm(&a).unwrap()), "dim {dim}: {err}");
        }
    }
}

#[test]
fn loewner_order_is_a_partial_order() {
    let ctx = AlgebraContext::new(3).unwrap();
    let mut sampler = ConeSampler::complex(2);
    for _ in 0..300 {
        let (a, b) = sampler.ordered_pair(&ctx);
        let c = &b + &sampler.positive(&ctx);
        assert!(ctx.leq(&a, &a));
        assert!(ctx.leq(&a, &b) && ctx.leq(&b, &c) && ctx.leq(&a, &c));
        if a != b && ctx.norm(&(&b - &a)).unwrap() > 1e-6 {
            assert!(!ctx.leq(&b, &a));
        }
    }
}

#[test]
fn entrywise_order_is_a_partial_order() {
    let ctx = AlgebraContext::new(2).unwrap().with_order(OrderMode::Entrywise);
    let mut sampler = ConeSampler::new(4);
    for _ in 0..300 {
        let (a, b) = sampler.ordered_pair(&ctx);
        let c = &b + &sampler.positive(&ctx);
        assert!(ctx.leq(&a, &a) && ctx.leq(&a, &b) && ctx.leq(&a, &c));
        if ctx.norm(&(&b - &a)).unwrap() > 1e-6 {
            assert!(!ctx.leq(&b, &a));
        }
    }
}

/// `det(A − λI)` by cofactor expansion, real symmetric input.
fn char_poly(a: &[Vec<f64>], lambda: f64) -> f64 {
    let n = a.len();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[i][j] - if i == j { lambda } else { 0.0 }).collect())
        .collect();
    det(&m)
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

/// Sign-change scan of the characteristic polynomial on `[-r, r]` plus
/// bisection; misses nothing when eigenvalues are farther apart than the step.
fn eigen_scan(a: &[Vec<f64>]) -> Vec<f64> {
    let r: f64 = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    let steps = 200_000;
    let h = 2.0 * r / steps as f64;
    let mut roots = Vec::new();
    let mut prev = char_poly(a, -r);
    for k in 1..=steps {
        let x = -r + k as f64 * h;
        let cur = char_poly(a, x);
        if prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (x - h, x);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if char_poly(a, mid).signum() == char_poly(a, lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    roots
}

#[test]
fn spectrum_matches_characteristic_polynomial_scan() {
    let mut rng = seeded(17);
    for dim in [2, 3] {
        for _ in 0..10 {
            let b = random_matrix(&mut rng, dim, false);
            let sym = (&b + &b.involution().unwrap()).scale(0.5);
            let rows: Vec<Vec<f64>> = (0..dim)
                .map(|i| (0..dim).map(|j| sym.entries()[(i, j)].re).collect())
                .collect();
            let oracle = eigen_scan(&rows);
            let mut got: Vec<f64> = sym.spectrum().unwrap().iter().map(|z| z.re).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(oracle.len(), dim, "{rows:?}");
            for (g, o) in got.iter().zip(&oracle) {
                assert!((g - o).abs() < 1e-9, "{got:?} vs {oracle:?}");
            }
        }
    }
}

#[test]
fn operator_norm_matches_closed_form_2x2() {
    // σ_max² is the top root of λ² − tr(A*A)λ + det(A*A)
    let mut rng = seeded(23);
    for _ in 0..200 {
        let a = random_matrix(&mut rng, 2, false);
        let e = a.entries();
        let (p, q, r, s) = (e[(0, 0)].re, e[(0, 1)].re, e[(1, 0)].re, e[(1, 1)].re);
        let tr = p * p + q * q + r * r + s * s;
        let d = (p * s - q * r).powi(2);
        let top = (0.5 * tr + (0.25 * tr * tr - d).max(0.0).sqrt()).sqrt();
        assert!((a.norm(NormMode::Operator).unwrap() - top).abs() <= 1e-12 * (1.0 + top));
    }
}

#[test]
fn diagonal_norms_match_max_abs() {
    let mut rng = seeded(31);
    use rand::Rng;
    for _ in 0..200 {
        let d: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(Element::diag(&d).norm(NormMode::Operator).unwrap(), max);
    }
}
