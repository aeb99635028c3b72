//! Relabeling symmetries of a problem and the orbits they induce on the
//! generator set.
//!
//! An element permutes the variables (only among variables with equal level
//! counts, and only so that the family of conditioning sets is preserved)
//! and permutes the levels of each variable. It acts on cells, on
//! conditionals (by their conditioning sets) and hence on indeterminates.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use crate::conditional::{check_shape, ConditionalArray};
use crate::error::{Error, Result};
use crate::ideal::{Binomial, GeneratorSet};
use crate::problem::ValidatedProblem;
use crate::rational::Rational;

/// `variables[k]` is the image of variable `k`; `levels[k][l]` the image of
/// level `l` of variable `k` (all 0-based). A cell `x` maps to `y` with
/// `y[variables[k]] = levels[k][x[k]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SymmetryElement {
    pub variables: Vec<usize>,
    pub levels: Vec<Vec<usize>>,
}

impl SymmetryElement {
    pub fn identity(problem: &ValidatedProblem) -> Self {
        SymmetryElement {
            variables: (0..problem.n()).collect(),
            levels: problem.dims().iter().map(|&d| (0..d).collect()).collect(),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &SymmetryElement) -> SymmetryElement {
        let variables = first.variables.iter().map(|&k| self.variables[k]).collect();
        let levels = (0..first.variables.len())
            .map(|k| {
                first.levels[k]
                    .iter()
                    .map(|&l| self.levels[first.variables[k]][l])
                    .collect()
            })
            .collect();
        SymmetryElement { variables, levels }
    }

    pub fn is_valid_for(&self, problem: &ValidatedProblem) -> bool {
        let n = problem.n();
        let mut seen = vec![false; n];
        for (k, &img) in self.variables.iter().enumerate() {
            if img >= n || seen[img] || problem.dims()[img] != problem.dims()[k] {
                return false;
            }
            seen[img] = true;
        }
        self.variables.len() == n
            && self.levels.len() == n
            && self.levels.iter().zip(problem.dims()).all(|(perm, &d)| {
                let mut s: Vec<usize> = perm.clone();
                s.sort_unstable();
                s == (0..d).collect::<Vec<_>>()
            })
            && self.conditional_map(problem).is_ok()
    }

    pub fn map_cell(&self, problem: &ValidatedProblem, cell: usize) -> usize {
        let levels = problem.cell_levels(cell);
        let mut image = vec![0; levels.len()];
        for (k, &l) in levels.iter().enumerate() {
            image[self.variables[k]] = self.levels[k][l - 1] + 1;
        }
        problem
            .cell_index(&image)
            .expect("permuted cell is in range")
    }

    /// Conditional `i` goes to the conditional whose set is the image of
    /// `B_i`.
    pub fn conditional_map(&self, problem: &ValidatedProblem) -> Result<Vec<usize>> {
        (0..problem.m())
            .map(|i| {
                let mut image: Vec<usize> = problem
                    .conditioning(i)
                    .iter()
                    .map(|&k| self.variables[k])
                    .collect();
                image.sort_unstable();
                problem.conditional_with_set(&image).ok_or_else(|| {
                    Error::AmbiguousAction(format!(
                        "conditioning set {:?} has no image in the family",
                        problem.conditioning_labels(i)
                    ))
                })
            })
            .collect()
    }

    /// Column permutation induced on the indeterminates.
    pub fn column_map(&self, problem: &ValidatedProblem) -> Result<Vec<usize>> {
        let conditionals = self.conditional_map(problem)?;
        let cells = problem.cell_count();
        let cell_map: Vec<usize> = (0..cells).map(|c| self.map_cell(problem, c)).collect();
        Ok((0..problem.column_count())
            .map(|col| conditionals[col / cells] * cells + cell_map[col % cells])
            .collect())
    }

    pub fn apply(&self, binomial: &Binomial, column_map: &[usize]) -> Binomial {
        binomial.map_columns(|c| column_map[c])
    }

    /// Relabels a tuple of conditional arrays: the array of conditional `i`
    /// becomes the array of its image, with cells moved accordingly.
    pub fn apply_to_arrays(
        &self,
        problem: &ValidatedProblem,
        arrays: &[ConditionalArray],
    ) -> Result<Vec<ConditionalArray>> {
        check_shape(arrays, problem)?;
        let conditionals = self.conditional_map(problem)?;
        let mut out: Vec<Vec<Rational>> =
            vec![vec![Rational::zero(); problem.cell_count()]; problem.m()];
        for (i, array) in arrays.iter().enumerate() {
            for (c, value) in array.entries().iter().enumerate() {
                out[conditionals[i]][self.map_cell(problem, c)] = value.clone();
            }
        }
        Ok(out
            .into_iter()
            .enumerate()
            .map(|(i, e)| ConditionalArray::new(i, e))
            .collect())
    }
}

/// Generators: variable transpositions that respect level counts and the
/// conditioning family, plus adjacent level transpositions of each variable.
pub fn symmetry_group(problem: &ValidatedProblem) -> Vec<SymmetryElement> {
    let identity = SymmetryElement::identity(problem);
    let mut out = Vec::new();
    let n = problem.n();
    for a in 0..n {
        for b in (a + 1)..n {
            if problem.dims()[a] != problem.dims()[b] {
                continue;
            }
            let mut g = identity.clone();
            g.variables.swap(a, b);
            if g.conditional_map(problem).is_ok() {
                out.push(g);
            }
        }
    }
    for k in 0..n {
        for l in 0..problem.dims()[k].saturating_sub(1) {
            let mut g = identity.clone();
            g.levels[k].swap(l, l + 1);
            out.push(g);
        }
    }
    out
}

/// Order of the group generated by `generators`, by closure. Returns `None`
/// if it exceeds `cap`.
pub fn group_order(
    problem: &ValidatedProblem,
    generators: &[SymmetryElement],
    cap: usize,
) -> Option<usize> {
    let identity = SymmetryElement::identity(problem);
    let mut seen = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = h.compose(&g);
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(next);
            }
        }
    }
    Some(seen.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    /// Index of the least member in the generator set.
    pub representative: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitPartition {
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn to_json(&self, set: &GeneratorSet, problem: &ValidatedProblem) -> serde_json::Value {
        let orbits: Vec<serde_json::Value> = self
            .orbits
            .iter()
            .map(|o| {
                let rep = &set.binomials[o.representative];
                serde_json::json!({
                    "size": o.members.len(),
                    "degree": rep.degree(),
                    "representative": rep.render(problem),
                    "members": crate::one_based(&o.members),
                })
            })
            .collect();
        serde_json::json!({ "generators": set.len(), "orbit_count": self.len(), "orbits": orbits })
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Partitions the generators into orbits under the group generated by
/// [`symmetry_group`]. Orbits are listed by least member.
pub fn symmetry_orbits(set: &GeneratorSet, problem: &ValidatedProblem) -> Result<OrbitPartition> {
    let maps: Vec<Vec<usize>> = symmetry_group(problem)
        .iter()
        .map(|g| g.column_map(problem))
        .collect::<Result<_>>()?;
    let mut parent: Vec<usize> = (0..set.len()).collect();
    for (k, b) in set.binomials.iter().enumerate() {
        for map in &maps {
            let image = b.map_columns(|c| map[c]);
            let j = set.position(&image).ok_or_else(|| {
                Error::Internal(format!(
                    "symmetry image of {} is not a generator",
                    b.render(problem)
                ))
            })?;
            let (rk, rj) = (find(&mut parent, k), find(&mut parent, j));
            if rk != rj {
                parent[rk.max(rj)] = rk.min(rj);
            }
        }
    }
    let mut orbits: Vec<Orbit> = Vec::new();
    let mut slot = vec![usize::MAX; set.len()];
    for k in 0..set.len() {
        let root = find(&mut parent, k);
        if slot[root] == usize::MAX {
            slot[root] = orbits.len();
            orbits.push(Orbit {
                representative: k,
                members: Vec::new(),
            });
        }
        orbits[slot[root]].members.push(k);
    }
    Ok(OrbitPartition { orbits })
}
