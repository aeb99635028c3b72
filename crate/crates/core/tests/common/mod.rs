#![allow(dead_code)]

use condcompat::{
    conditionals_from_joint, validate_problem, ConditionalArray, JointDistribution, Limits,
    ProblemSpec, Rational, ValidatedProblem,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn problem(dims: Vec<usize>, sets: Vec<Vec<usize>>) -> ValidatedProblem {
    validate_problem(&ProblemSpec::new(dims, sets), Limits::default()).unwrap()
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

/// A random valid problem with `n <= 3`, `d_k <= 3`, `m <= 3`.
pub fn random_problem(rng: &mut ChaCha8Rng) -> ValidatedProblem {
    let n = *[1, 2, 2, 3, 3, 3].choose(rng).unwrap();
    let dims: Vec<usize> = (0..n)
        .map(|_| *[1, 2, 2, 3, 3].choose(rng).unwrap())
        .collect();
    let mut m = rng.gen_range(1..=3);
    loop {
        for _ in 0..50 {
            let sets: Vec<Vec<usize>> = (0..m)
                .map(|_| {
                    let mask: u32 = rng.gen_range(0..(1 << n) - 1);
                    (0..n)
                        .filter(|k| mask >> k & 1 == 1)
                        .map(|k| k + 1)
                        .collect()
                })
                .collect();
            if let Ok(p) =
                validate_problem(&ProblemSpec::new(dims.clone(), sets), Limits::default())
            {
                return p;
            }
        }
        m -= 1;
    }
}

pub fn random_positive_joint(rng: &mut ChaCha8Rng, cells: usize) -> JointDistribution {
    JointDistribution::from_weights(
        (0..cells)
            .map(|_| Rational::from_integer(rng.gen_range(1..=9)))
            .collect(),
    )
    .unwrap()
}

pub fn conditionals_of(
    joint: &JointDistribution,
    problem: &ValidatedProblem,
) -> Vec<ConditionalArray> {
    conditionals_from_joint(joint, problem).unwrap().arrays
}

/// Moves mass between two cells of one slice, keeping every slice sum at 1.
/// Returns false if no conditional has a slice with two cells.
pub fn perturb(
    rng: &mut ChaCha8Rng,
    arrays: &mut [ConditionalArray],
    problem: &ValidatedProblem,
) -> bool {
    let mut choices = Vec::new();
    for i in 0..problem.m() {
        for (s, cells) in problem.slices(i).into_iter().enumerate() {
            if cells.len() >= 2 {
                choices.push((i, s, cells));
            }
        }
    }
    let Some((i, _, cells)) = choices.choose(rng).cloned() else {
        return false;
    };
    let pair: Vec<&usize> = cells.choose_multiple(rng, 2).collect();
    let (from, to) = (*pair[0], *pair[1]);
    let entries = arrays[i].entries_mut();
    let delta = &entries[from] * &Rational::new(1, rng.gen_range(2..=5));
    entries[from] = &entries[from] - &delta;
    entries[to] = &entries[to] + &delta;
    true
}

/// Arrays on a random support pattern that meets every slice of every
/// conditional, each slice filled with random positive weights.
pub fn random_sparse(rng: &mut ChaCha8Rng, problem: &ValidatedProblem) -> Vec<ConditionalArray> {
    let cells = problem.cell_count();
    let mut support: Vec<bool> = (0..cells).map(|_| rng.gen_bool(0.5)).collect();
    for i in 0..problem.m() {
        for slice in problem.slices(i) {
            if !slice.iter().any(|&c| support[c]) {
                support[*slice.choose(rng).unwrap()] = true;
            }
        }
    }
    (0..problem.m())
        .map(|i| {
            let mut entries = vec![Rational::zero(); cells];
            for slice in problem.slices(i) {
                let weights: Vec<(usize, Rational)> = slice
                    .iter()
                    .filter(|&&c| support[c])
                    .map(|&c| (c, Rational::from_integer(rng.gen_range(1..=4))))
                    .collect();
                let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();
                for (c, w) in weights {
                    entries[c] = &w / &total;
                }
            }
            ConditionalArray::new(i, entries)
        })
        .collect()
}

/// Conditionals of a joint with random zeros; slices of zero mass are
/// refilled uniformly so every array stays a full conditional.
pub fn sparse_joint_conditionals(
    rng: &mut ChaCha8Rng,
    problem: &ValidatedProblem,
) -> Vec<ConditionalArray> {
    let cells = problem.cell_count();
    let mut weights: Vec<Rational> = (0..cells)
        .map(|_| {
            if rng.gen_bool(0.4) {
                Rational::zero()
            } else {
                Rational::from_integer(rng.gen_range(1..=5))
            }
        })
        .collect();
    if weights.iter().all(|w| w.is_zero()) {
        weights[0] = Rational::one();
    }
    let joint = JointDistribution::from_weights(weights).unwrap();
    let result = conditionals_from_joint(&joint, problem).unwrap();
    let mut arrays = result.arrays;
    for (i, s) in result.degenerate {
        let slice = problem.cells_in_slice(i, s);
        let share = Rational::new(1, slice.len() as i64);
        for c in slice {
            arrays[i].entries_mut()[c] = share.clone();
        }
    }
    arrays
}
