//! Seeded samplers for algebra elements and scalars.
//!
//! Every randomized check in the crate draws from a [`ChaCha8Rng`] built by
//! [`seeded`], so reports are reproducible from the seed alone.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cstar_algebra::{AlgebraContext, Complex64, Element, OrderMode};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw on `[lo, hi]`, both positive.
pub fn log_uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo > 0.0 && hi >= lo);
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// Dense matrix with entries uniform on `[-1, 1]` (real and imaginary parts).
pub fn random_matrix(rng: &mut SampleRng, dim: usize, complex: bool) -> Element {
    Element::from_matrix(DMatrix::from_fn(dim, dim, |_, _| {
        let re = rng.gen_range(-1.0..=1.0);
        let im = if complex { rng.gen_range(-1.0..=1.0) } else { 0.0 };
        Complex64::new(re, im)
    }))
}

/// A nonzero element of the positive cone of `ctx`.
///
/// Loewner: `s · B*B` with `B` random, rank-deficient one time in five.
/// Entrywise: nonnegative real entries. The scale `s` is log-uniform on
/// `[1e-2, 1e2]`.
pub fn random_positive(rng: &mut SampleRng, ctx: &AlgebraContext, complex: bool) -> Element {
    let scale = log_uniform(rng, 1e-2, 1e2);
    match ctx.order_mode {
        OrderMode::Loewner => {
            let b = random_matrix(rng, ctx.dim, complex);
            let b = if ctx.dim > 1 && rng.gen_bool(0.2) {
                // keep only the first row: B*B has rank one
                let mut m = b.into_entries();
                for i in 1..ctx.dim {
                    m.row_mut(i).fill(Complex64::new(0.0, 0.0));
                }
                Element::from_matrix(m)
            } else {
                b
            };
            (&b.involution().expect("finite") * &b).symmetrized().scale(scale)
        }
        OrderMode::Entrywise => Element::from_matrix(DMatrix::from_fn(ctx.dim, ctx.dim, |_, _| {
            Complex64::new(rng.gen_range(0.0..=1.0) * scale, 0.0)
        })),
    }
}

/// `(A, B)` with `A <= B` in `ctx`: `B = A + P` for a random positive `P`.
/// One pair in ten has `P = θ`.
pub fn random_ordered_pair(rng: &mut SampleRng, ctx: &AlgebraContext, complex: bool) -> (Element, Element) {
    let a = random_positive(rng, ctx, complex);
    if rng.gen_bool(0.1) {
        return (a.clone(), a);
    }
    let p = random_positive(rng, ctx, complex);
    let b = &a + &p;
    (a, b)
}

/// Draws positive elements and ordered pairs for a fixed context.
pub struct ConeSampler {
    rng: SampleRng,
    complex: bool,
}

impl ConeSampler {
    /// Real matrices.
    pub fn new(seed: u64) -> Self {
        Self {
            rng: seeded(seed),
            complex: false,
        }
    }

    /// Complex matrices; in dimension one this samples the nonnegative reals
    /// inside `C`.
    pub fn complex(seed: u64) -> Self {
        Self {
            rng: seeded(seed),
            complex: true,
        }
    }

    pub fn positive(&mut self, ctx: &AlgebraContext) -> Element {
        random_positive(&mut self.rng, ctx, self.complex)
    }

    pub fn ordered_pair(&mut self, ctx: &AlgebraContext) -> (Element, Element) {
        random_ordered_pair(&mut self.rng, ctx, self.complex)
    }

    pub fn rng(&mut self) -> &mut SampleRng {
        &mut self.rng
    }
}
