//! Corpus-level stability of constants that are only known to exist.

use lpsq_core::kernels::{PoissonDerivative, SemigroupKind};
use lpsq_core::maximal::{carleson_bmo_ratio, carleson_corpus_member, CubeFamily};
use lpsq_core::sqfun::{g_semigroup, hp_norm, Derivative};
use lpsq_core::{field::lp_norm, Domain, LogTimeGrid};

const CORPUS: u64 = 50;
const SEED: u64 = 2024;

fn carleson_constant(samples: usize) -> f64 {
    let d = Domain::torus(1, samples).unwrap();
    let cubes = CubeFamily::new(d, 1, 5).unwrap();
    let grid = LogTimeGrid::new(1e-4, 1.0, 160).unwrap();
    let phi = PoissonDerivative { dim: 1 };
    (0..CORPUS)
        .map(|i| {
            let f = carleson_corpus_member(d, 8, SEED, i).unwrap();
            carleson_bmo_ratio(&f, &phi, &cubes, &grid).unwrap()
        })
        .fold(0.0, f64::max)
}

#[test]
fn carleson_bmo_bound_is_stable_under_refinement() {
    let (coarse, fine) = (carleson_constant(128), carleson_constant(256));
    assert!(coarse.is_finite() && coarse > 0.0);
    assert!((fine / coarse - 1.0).abs() < 0.2, "{coarse} vs {fine}");
}

/// `C` with `||G f||_1 / ||f||_{H_1}` in `[1/C, C]` over the corpus.
fn h1_constant(samples: usize) -> f64 {
    let d = Domain::torus(1, samples).unwrap();
    let grid = LogTimeGrid::new(1e-4, 1e2, 256).unwrap();
    let (mut lo, mut hi) = (f64::MAX, 0.0f64);
    for i in 0..CORPUS {
        let f = carleson_corpus_member(d, 8, SEED + 1, i).unwrap();
        let g = g_semigroup(&f, SemigroupKind::Poisson, Derivative::Time, &grid).unwrap();
        let r = lp_norm(&g, 1.0).unwrap() / hp_norm(&f, 1.0, 1.0, &grid).unwrap();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi.max(1.0 / lo)
}

#[test]
fn h1_equivalence_constant_is_stable() {
    let (coarse, fine) = (h1_constant(128), h1_constant(256));
    assert!(coarse < 10.0, "{coarse}");
    assert!((fine / coarse - 1.0).abs() < 0.1, "{coarse} vs {fine}");
}
