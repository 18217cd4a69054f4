#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use weakmeas_core::operators::c64;
use weakmeas_core::{CMatrix, DensityMatrix, HermitianOperator, MeasurementSetup};

pub fn random_matrix<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| c64(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = random_matrix(dim, rng);
    HermitianOperator::from_products((&g + g.adjoint()) * c64(0.5, 0.0)).unwrap()
}

/// Full-rank random state `GG†/tr(GG†)`.
pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = random_matrix(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_propagated(m / c64(tr, 0.0)).unwrap()
}

pub fn random_setup<R: Rng>(dim: usize, lambda: f64, rng: &mut R) -> MeasurementSetup {
    MeasurementSetup::new(random_hermitian(dim, rng), random_hermitian(dim, rng), lambda).unwrap()
}
