//! Seeded random inputs. Every draw comes from a ChaCha8 stream selected by
//! `(seed, stream)`, so point `i` of a run does not depend on how many
//! points come before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cforms::{masks, CliffordForm, CliffordFormField, Form, Frame};
use crate::jet::{n_coeffs, Jet, MvJet};
use crate::metric::MetricSpec;
use crate::stal::Multivector;

/// Generator for one stream of a seeded run.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Point `index`, uniform per coordinate in the metric's sample box.
pub fn sample_point(spec: &MetricSpec, seed: u64, index: u64) -> [f64; 4] {
    let mut rng = stream(seed, index);
    std::array::from_fn(|i| {
        let (lo, hi) = spec.sample[i];
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    })
}

pub fn sample_points(spec: &MetricSpec, n: usize, seed: u64) -> Vec<[f64; 4]> {
    (0..n as u64).map(|i| sample_point(spec, seed, i)).collect()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

pub fn multivector(rng: &mut ChaCha8Rng) -> Multivector {
    Multivector::from_coeffs(std::array::from_fn(|_| unit(rng)))
}

/// Random homogeneous multivector of grade `k`.
pub fn homogeneous(rng: &mut ChaCha8Rng, k: usize) -> Multivector {
    let mut m = Multivector::ZERO;
    for &mask in masks(k) {
        m[mask as usize] = unit(rng);
    }
    m
}

fn value(rng: &mut ChaCha8Rng, grade: Option<usize>) -> Multivector {
    match grade {
        Some(k) => homogeneous(rng, k),
        None => multivector(rng),
    }
}

/// Random Clifford-valued p-form; `grade` restricts the values.
pub fn clifford_form(rng: &mut ChaCha8Rng, p: usize, grade: Option<usize>) -> CliffordForm {
    Form::from_fn(p, Frame::Coordinate, |_| value(rng, grade))
}

/// Random multivector jet of order `ord`.
pub fn multivector_jet(rng: &mut ChaCha8Rng, ord: usize, grade: Option<usize>) -> MvJet {
    MvJet::from_coeffs((0..n_coeffs(ord)).map(|_| value(rng, grade)).collect())
}

/// Random Clifford-valued p-form field with polynomial component germs.
pub fn clifford_field(rng: &mut ChaCha8Rng, p: usize, ord: usize, grade: Option<usize>) -> CliffordFormField {
    Form::from_fn(p, Frame::Coordinate, |_| multivector_jet(rng, ord, grade))
}

/// Random scalar jet of order `ord`.
pub fn scalar_jet(rng: &mut ChaCha8Rng, ord: usize) -> Jet<f64> {
    Jet::from_coeffs((0..n_coeffs(ord)).map(|_| unit(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn points_are_reproducible_and_independent_of_count() {
        let spec = fixtures::schwarzschild();
        let a = sample_points(&spec, 5, 42);
        let b = sample_points(&spec, 3, 42);
        assert_eq!(&a[..3], &b[..]);
        assert_ne!(a, sample_points(&spec, 5, 43));
    }

    #[test]
    fn points_stay_in_the_box() {
        let spec = fixtures::schwarzschild();
        for p in sample_points(&spec, 200, 1) {
            for i in 0..4 {
                let (lo, hi) = spec.sample[i];
                assert!(p[i] >= lo && (p[i] < hi || lo == hi));
            }
        }
    }

    #[test]
    fn homogeneous_has_one_grade() {
        let mut rng = stream(3, 0);
        for k in 0..=4 {
            let m = homogeneous(&mut rng, k);
            assert_eq!((m - m.grade(k).unwrap()).max_abs(), 0.0);
        }
    }
}
