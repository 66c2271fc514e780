//! Seeded random operators for the verification suite and the shipped
//! random scenario.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{Operator, StateVector};

pub fn random_matrix(rng: &mut impl Rng, dim: usize) -> Operator {
    Operator::from_fn(dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
    .expect("square by construction")
}

/// Unit-Frobenius-norm Hermitian matrix.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> Operator {
    let a = random_matrix(rng, dim);
    let h = (&a + &a.adjoint()).scale_re(0.5);
    let n = h.frob_norm();
    h.scale_re(1.0 / n.max(1e-12))
}

/// G†G + ridge·1 with standard-normal complex G: positive-definite with a
/// conditioning floor.
pub fn random_pd(rng: &mut impl Rng, dim: usize, ridge: f64) -> Operator {
    let g = random_matrix(rng, dim);
    &(&g.adjoint() * &g) + &Operator::identity(dim).scale_re(ridge)
}

pub fn random_state(rng: &mut impl Rng, dim: usize) -> StateVector {
    let comps: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    StateVector::from_components(&comps)
        .expect("nonempty")
        .normalized()
}

/// Smooth random drive H(t) = A + B·cos(νt) + C·sin(νt), terms unit-normed,
/// ν in [0.5, 2).
pub fn random_fourier(
    rng: &mut impl Rng,
    dim: usize,
) -> (Operator, Operator, Operator, f64) {
    let base = random_hermitian(rng, dim);
    let cos_term = random_hermitian(rng, dim);
    let sin_term = random_hermitian(rng, dim);
    let nu = rng.random_range(0.5..2.0);
    (base, cos_term, sin_term, nu)
}
