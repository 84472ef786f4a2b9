//! Seeded test corpora: random samples, trigonometric polynomials and
//! coefficient vectors. Every stream is a ChaCha8 generator keyed by a `u64`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::field::{synth, Domain, SampledField};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn split(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Standard complex Gaussian with `E|g|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Unstructured samples with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_field(domain: Domain, seed: u64) -> SampledField {
    let mut r = rng(seed);
    let values = (0..domain.len())
        .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect();
    SampledField::from_parts_unchecked(domain, values)
}

/// Shape of a random trigonometric polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolySpec {
    /// Largest `|m_a|` on any axis.
    pub band: i64,
    pub mean_zero: bool,
    /// Conjugate-symmetric coefficients, so the samples are real.
    pub real: bool,
}

/// Random coefficient list with Gaussian coefficients on `|m_a| <= band`.
pub fn random_coefficients(dim: usize, spec: PolySpec, seed: u64) -> Vec<(Vec<i64>, Complex64)> {
    let mut r = rng(seed);
    let side = (2 * spec.band + 1) as usize;
    let count = side.pow(dim as u32);
    let mut out: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for idx in 0..count {
        let mut m = Vec::with_capacity(dim);
        let mut rest = idx;
        for _ in 0..dim {
            m.push((rest % side) as i64 - spec.band);
            rest /= side;
        }
        let c = complex_gaussian(&mut r);
        if spec.mean_zero && m.iter().all(|&v| v == 0) {
            continue;
        }
        out.push((m, c));
    }
    if spec.real {
        // average each coefficient with the conjugate of its mirror
        let lookup: Vec<Complex64> = out.iter().map(|(_, c)| *c).collect();
        let pos = |m: &[i64]| out.iter().position(|(k, _)| k.as_slice() == m);
        let mirrored: Vec<Complex64> = out
            .iter()
            .map(|(m, c)| {
                let neg: Vec<i64> = m.iter().map(|v| -v).collect();
                let j = pos(&neg).expect("band is symmetric");
                0.5 * (c + lookup[j].conj())
            })
            .collect();
        for (entry, c) in out.iter_mut().zip(mirrored) {
            entry.1 = c;
        }
    }
    out
}

pub fn random_trig_poly(domain: Domain, spec: PolySpec, seed: u64) -> Result<SampledField> {
    synth(domain, &random_coefficients(domain.dim(), spec, seed))
}

/// Complex vector of length `k` with unit `l2` norm.
pub fn random_unit_vector(k: usize, seed: u64) -> Vec<Complex64> {
    let mut r = rng(seed);
    let v: Vec<Complex64> = (0..k).map(|_| complex_gaussian(&mut r)).collect();
    let norm = libm::sqrt(v.iter().map(|c| c.norm_sqr()).sum());
    v.into_iter().map(|c| c / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::transform;

    #[test]
    fn streams_are_reproducible() {
        let d = Domain::torus(1, 16).unwrap();
        assert_eq!(random_field(d, 4), random_field(d, 4));
        assert_ne!(random_field(d, 4), random_field(d, 5));
        let a: u64 = split(1, 0).random();
        let b: u64 = split(1, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn real_mean_zero_polynomial() {
        let d = Domain::torus(2, 16).unwrap();
        let spec = PolySpec {
            band: 3,
            mean_zero: true,
            real: true,
        };
        let f = random_trig_poly(d, spec, 9).unwrap();
        assert!(f.values().iter().all(|v| v.im.abs() < 1e-12));
        assert!(f.mean().norm() < 1e-12);
        let s = transform(&f);
        assert!(s.coeff(&[4, 0]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let v = random_unit_vector(8, 2);
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
