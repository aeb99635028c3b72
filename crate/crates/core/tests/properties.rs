mod common;

use std::collections::{BTreeSet, VecDeque};

use common::{conditionals_of, perturb, random_positive_joint, random_problem, random_sparse};
use condcompat::{
    build_graph, build_matrix, check_compatibility_oracle, enumerate_circuits_bruteforce,
    enumerate_induced_circuits, evaluate_binomial, generators, symmetry_group,
    verify_kernel_membership, Binomial, CheckOptions, CompatGraph, EnumerationCaps, Rational,
    TheoremChecker,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn caps() -> EnumerationCaps {
    EnumerationCaps::default()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

/// Whether the edge `a`-`b` lies on no cycle.
fn is_bridge(graph: &CompatGraph, a: usize, b: usize) -> bool {
    let mut seen = vec![false; graph.vertex_count()];
    let mut queue = VecDeque::from([a]);
    seen[a] = true;
    while let Some(v) = queue.pop_front() {
        for &w in graph.neighbors(v) {
            if (v == a && w == b) || seen[w] {
                continue;
            }
            if w == b {
                return false;
            }
            seen[w] = true;
            queue.push_back(w);
        }
    }
    true
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn enumeration_matches_bruteforce(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let graph = build_graph(&p).unwrap();
        prop_assume!(graph.vertex_count() <= 24);
        let fast = enumerate_induced_circuits(&graph, caps()).unwrap();
        let slow = enumerate_circuits_bruteforce(&graph, caps()).unwrap();
        prop_assert_eq!(fast.circuits, slow.circuits);
    }

    #[test]
    fn generators_are_squarefree_kernel_binomials(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let matrix = build_matrix(&p).unwrap();
        for b in &generators(&p, caps()).unwrap().binomials {
            prop_assert!(b.is_squarefree());
            prop_assert!(b.monomials_disjoint());
            prop_assert!(verify_kernel_membership(b, &matrix).unwrap());
        }
    }

    #[test]
    fn generators_vanish_on_joint_conditionals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let arrays = conditionals_of(&random_positive_joint(&mut rng, p.cell_count()), &p);
        for b in &generators(&p, caps()).unwrap().binomials {
            prop_assert!(evaluate_binomial(b, &arrays).unwrap().is_zero());
        }
    }

    #[test]
    fn generator_set_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let set = generators(&p, caps()).unwrap();
        let original: BTreeSet<&Binomial> = set.binomials.iter().collect();
        for g in symmetry_group(&p) {
            let map = g.column_map(&p).unwrap();
            let image: BTreeSet<Binomial> = set.binomials.iter().map(|b| g.apply(b, &map)).collect();
            prop_assert_eq!(image.iter().collect::<BTreeSet<_>>(), original.clone());
        }
    }

    #[test]
    fn perturbing_a_cycle_edge_breaks_compatibility(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let graph = build_graph(&p).unwrap();
        let mut arrays = conditionals_of(&random_positive_joint(&mut rng, p.cell_count()), &p);
        let mut candidates = Vec::new();
        for i in 0..p.m() {
            for slice in p.slices(i) {
                for &a in &slice {
                    let (cell, u) = graph.edge_endpoints(i * p.cell_count() + a);
                    if slice.len() >= 2 && !is_bridge(&graph, cell, u) {
                        candidates.push((i, a, slice.clone()));
                    }
                }
            }
        }
        prop_assume!(!candidates.is_empty());
        let (i, a, slice) = candidates[rng.gen_range(0..candidates.len())].clone();
        let b = *slice.iter().find(|&&c| c != a).unwrap();
        let entries = arrays[i].entries_mut();
        let delta = &entries[a] * &Rational::new(1, 3);
        entries[a] = &entries[a] - &delta;
        entries[b] = &entries[b] + &delta;
        let theorem = TheoremChecker::new(&p, caps()).unwrap().check(&arrays, CheckOptions::default()).unwrap();
        prop_assert!(!theorem.compatible);
        prop_assert!(!check_compatibility_oracle(&arrays, &p).unwrap().compatible);
    }

    #[test]
    fn deciders_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng);
        let arrays = match seed % 3 {
            0 => conditionals_of(&random_positive_joint(&mut rng, p.cell_count()), &p),
            1 => {
                let mut arrays = conditionals_of(&random_positive_joint(&mut rng, p.cell_count()), &p);
                perturb(&mut rng, &mut arrays, &p);
                arrays
            }
            _ => random_sparse(&mut rng, &p),
        };
        let theorem = TheoremChecker::new(&p, caps()).unwrap().check(&arrays, CheckOptions::default()).unwrap();
        let oracle = check_compatibility_oracle(&arrays, &p).unwrap();
        prop_assert_eq!(theorem.compatible, oracle.compatible);
        if let (Some(t), Some(o)) = (&theorem.reconstruction, &oracle.reconstruction) {
            prop_assert_eq!(t, o);
        }
        if let Some(w) = &oracle.witness {
            if let Some(b) = w.binomial() {
                prop_assert!(!evaluate_binomial(b, &arrays).unwrap().is_zero());
            }
        }
    }
}
