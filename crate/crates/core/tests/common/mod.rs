#![allow(dead_code)]

use qre_core::problem::{AffinePiece, OutputMap, Polyhedron, PwlComponent, RobustProblem};
use qre_core::sample::{RawSample, SortedSample};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn point<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random sample on `[0, 4]^n` with values in `[0, 5]`.
pub fn random_sample<R: Rng>(
    rng: &mut R,
    n: usize,
    j: usize,
    l: f64,
    monotone: bool,
) -> SortedSample {
    let points = (0..j).map(|_| point(rng, n, 0.0, 4.0)).collect();
    let values = (0..j).map(|_| rng.gen_range(0.0..5.0)).collect();
    SortedSample::new(RawSample::new(points, values, l, monotone)).unwrap()
}

pub fn mixed_sample<R: Rng>(rng: &mut R) -> SortedSample {
    let n = rng.gen_range(1..=3);
    let j = rng.gen_range(1..=16);
    let l = rng.gen_range(0.1..5.0);
    let monotone = rng.gen_bool(0.5);
    random_sample(rng, n, j, l, monotone)
}

/// Unit box in `ℝ^t`, sometimes cut by `Σ z ≤ r`, with a random output map:
/// concave piecewise-linear for monotone samples, affine otherwise.
pub fn random_problem<R: Rng>(rng: &mut R, t: usize, n: usize, monotone: bool) -> RobustProblem {
    let (a, b) = if rng.gen_bool(0.5) {
        (vec![vec![1.0; t]], vec![rng.gen_range(0.3..t as f64)])
    } else {
        (Vec::new(), Vec::new())
    };
    let domain = Polyhedron::new(a, b, vec![0.0; t], vec![1.0; t]).unwrap();
    let comps = (0..n)
        .map(|_| {
            let pieces = if monotone { rng.gen_range(1..=3) } else { 1 };
            PwlComponent {
                pieces: (0..pieces)
                    .map(|_| AffinePiece {
                        a: point(rng, t, -1.0, 2.0),
                        beta: rng.gen_range(0.0..3.0),
                    })
                    .collect(),
            }
        })
        .collect();
    RobustProblem::new(domain, OutputMap::Components(comps)).unwrap()
}

/// Uniform point of the problem's decision set (rejection from its box).
pub fn feasible_point<R: Rng>(rng: &mut R, rp: &RobustProblem) -> Vec<f64> {
    loop {
        let z: Vec<f64> = rp
            .domain
            .lo
            .iter()
            .zip(&rp.domain.hi)
            .map(|(l, h)| rng.gen_range(*l..=*h))
            .collect();
        if rp.domain.contains(&z, 0.0) {
            return z;
        }
    }
}

/// Like [`mixed_sample`] but with values drawn from `{0, 1, 2, 3}` so that
/// ties are common.
pub fn tied_sample<R: Rng>(rng: &mut R) -> SortedSample {
    let n = rng.gen_range(1..=3);
    let j = rng.gen_range(1..=12);
    let points = (0..j).map(|_| point(rng, n, 0.0, 4.0)).collect();
    let values = (0..j).map(|_| f64::from(rng.gen_range(0u8..4))).collect();
    let l = rng.gen_range(0.1..5.0);
    let monotone = rng.gen_bool(0.5);
    SortedSample::new(RawSample::new(points, values, l, monotone)).unwrap()
}
