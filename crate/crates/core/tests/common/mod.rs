#![allow(dead_code)]

use discern_core::{ComplexVector, HermitianOperator};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let adj = g.adjoint();
    HermitianOperator::new((g + adj).unscale(2.0)).unwrap()
}

/// Random Hermitian with unit Frobenius norm.
pub fn random_direction<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let h = random_hermitian(rng, dim);
    let n = h.frobenius_norm();
    h.scale_shift(1.0 / n, 0.0)
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::new(
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        )
        .unwrap();
        if v.norm() > 1e-3 {
            return v.normalized().unwrap();
        }
    }
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}
