//! Shared inputs for the benchmarks.

use conjpair::channels::sample_rng;
use conjpair::diagram::DiagramElement;
use conjpair::symgroup::factorial;
use conjpair::Permutation;
use rand::Rng;

/// `count` diagrams on `4r` points from uniformly random permutations of `S_{2r}`.
pub fn random_diagrams(r: usize, count: usize, seed: u64) -> Vec<DiagramElement> {
    let mut rng = sample_rng(seed, 0);
    let size = factorial(2 * r) as usize;
    (0..count)
        .map(|_| {
            let sigma = Permutation::from_lex_rank(2 * r, rng.random_range(0..size));
            DiagramElement::from_permutation(&sigma).expect("degree 2r")
        })
        .collect()
}
