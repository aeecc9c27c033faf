//! Seeded sampling helpers. All randomness in the crate flows through a
//! `ChaCha8Rng` so runs are reproducible from a single `u64` seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Element, Tuple};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coordinates uniform in `[-1, 1]`.
pub fn random_element(alg: &Algebra, rng: &mut SeededRng) -> Element {
    let coords = (0..alg.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    alg.element(coords).expect("dimension matches")
}

pub fn random_tuple(alg: &Algebra, n: usize, rng: &mut SeededRng) -> Tuple {
    Tuple((0..n).map(|_| random_element(alg, rng)).collect())
}
