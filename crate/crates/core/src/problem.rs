//! Problem instances: level counts per variable and the family of
//! conditioning sets.
//!
//! Cells are enumerated in lexicographic order of their 1-based level tuples
//! (last variable fastest). Every row, column and vertex ordering in the crate
//! derives from this order. Conditionals are addressed by their 0-based
//! position in the family; conditioning sets are stored 0-based internally and
//! reported 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `m * cellCount`, the number of indeterminates.
pub const DEFAULT_MAX_COLUMNS: usize = 1 << 20;

/// Raw problem description. Variable indices in `conditioning` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dims: Vec<usize>,
    pub conditioning: Vec<Vec<usize>>,
}

impl ProblemSpec {
    pub fn new(dims: Vec<usize>, conditioning: Vec<Vec<usize>>) -> Self {
        ProblemSpec { dims, conditioning }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_columns: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_columns: DEFAULT_MAX_COLUMNS,
        }
    }
}

/// A cell of the table as 1-based levels `(j_1, ..., j_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cell(pub Vec<usize>);

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_levels(f, &self.0)
    }
}

pub(crate) fn write_levels(f: &mut fmt::Formatter<'_>, levels: &[usize]) -> fmt::Result {
    f.write_str("[")?;
    for (k, level) in levels.iter().enumerate() {
        if k > 0 {
            f.write_str(",")?;
        }
        write!(f, "{level}")?;
    }
    f.write_str("]")
}

/// A problem whose conditioning family has been checked to be an antichain
/// with nonempty left-hand sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedProblem {
    dims: Vec<usize>,
    conditioning: Vec<Vec<usize>>,
    free: Vec<Vec<usize>>,
    cell_count: usize,
    slice_counts: Vec<usize>,
    strides: Vec<usize>,
    slice_of: Vec<Vec<usize>>,
}

fn is_subset(small: &[usize], large: &[usize]) -> bool {
    small.iter().all(|k| large.binary_search(k).is_ok())
}

pub fn validate_problem(spec: &ProblemSpec, limits: Limits) -> Result<ValidatedProblem> {
    let n = spec.dims.len();
    if n == 0 {
        return Err(Error::InvalidProblem(
            "at least one variable is required".into(),
        ));
    }
    if let Some(k) = spec.dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidProblem(format!(
            "variable {} has zero levels",
            k + 1
        )));
    }
    if spec.conditioning.is_empty() {
        return Err(Error::InvalidProblem(
            "at least one conditional is required".into(),
        ));
    }
    for (i, set) in spec.conditioning.iter().enumerate() {
        if let Some(&k) = set.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::InvalidProblem(format!(
                "conditioning set {} names variable {k}, outside 1..={n}",
                i + 1
            )));
        }
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProblem(format!(
                "conditioning set {} {:?} is not strictly increasing",
                i + 1,
                set
            )));
        }
    }

    let sets = &spec.conditioning;
    for a in 0..sets.len() {
        for b in (a + 1)..sets.len() {
            if sets[a] == sets[b] {
                return Err(Error::DuplicateConditioningSet {
                    first: a + 1,
                    second: b + 1,
                    set: sets[a].clone(),
                });
            }
        }
    }
    for a in 0..sets.len() {
        for b in 0..sets.len() {
            if a != b && is_subset(&sets[a], &sets[b]) {
                return Err(Error::ContainmentViolation {
                    subset: a + 1,
                    superset: b + 1,
                    subset_set: sets[a].clone(),
                    superset_set: sets[b].clone(),
                });
            }
        }
    }
    if let Some(i) = sets.iter().position(|set| set.len() == n) {
        return Err(Error::EmptyLeftSide { conditional: i + 1 });
    }

    let m = sets.len();
    let cell_count = spec
        .dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let columns = cell_count.and_then(|c| c.checked_mul(m));
    let cell_count = match columns {
        Some(cols) if cols <= limits.max_columns => cell_count.unwrap(),
        Some(cols) => {
            return Err(Error::SizeCapExceeded {
                columns: cols,
                cap: limits.max_columns,
            })
        }
        None => {
            return Err(Error::SizeCapExceeded {
                columns: usize::MAX,
                cap: limits.max_columns,
            })
        }
    };

    let conditioning: Vec<Vec<usize>> = sets
        .iter()
        .map(|set| set.iter().map(|k| k - 1).collect())
        .collect();
    let free = conditioning
        .iter()
        .map(|set| (0..n).filter(|k| set.binary_search(k).is_err()).collect())
        .collect();
    let slice_counts: Vec<usize> = conditioning
        .iter()
        .map(|set| set.iter().map(|&k| spec.dims[k]).product())
        .collect();

    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * spec.dims[k + 1];
    }

    let mut problem = ValidatedProblem {
        dims: spec.dims.clone(),
        conditioning,
        free,
        cell_count,
        slice_counts,
        strides,
        slice_of: Vec::new(),
    };
    problem.slice_of = (0..m)
        .map(|i| {
            (0..cell_count)
                .map(|c| problem.compute_slice(i, c))
                .collect()
        })
        .collect();
    Ok(problem)
}

impl ValidatedProblem {
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    /// Number of conditionals.
    pub fn m(&self) -> usize {
        self.conditioning.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    /// `D_{B_i}`, the number of distinct conditioning tuples of conditional `i`.
    pub fn slice_count(&self, i: usize) -> usize {
        self.slice_counts[i]
    }

    pub fn slice_counts(&self) -> &[usize] {
        &self.slice_counts
    }

    /// Conditioning set of conditional `i`, 0-based variable indices.
    pub fn conditioning(&self, i: usize) -> &[usize] {
        &self.conditioning[i]
    }

    /// Free (left-hand) variables of conditional `i`, 0-based.
    pub fn free_variables(&self, i: usize) -> &[usize] {
        &self.free[i]
    }

    /// Conditioning set of conditional `i` with 1-based variable indices.
    pub fn conditioning_labels(&self, i: usize) -> Vec<usize> {
        self.conditioning[i].iter().map(|k| k + 1).collect()
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            dims: self.dims.clone(),
            conditioning: (0..self.m()).map(|i| self.conditioning_labels(i)).collect(),
        }
    }

    /// Number of indeterminates, `m * cellCount`.
    pub fn column_count(&self) -> usize {
        self.m() * self.cell_count
    }

    pub fn cell_levels(&self, cell: usize) -> Vec<usize> {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(&d, &stride)| (cell / stride) % d + 1)
            .collect()
    }

    pub fn cell(&self, cell: usize) -> Cell {
        Cell(self.cell_levels(cell))
    }

    /// Index of a cell given its 1-based levels.
    pub fn cell_index(&self, levels: &[usize]) -> Option<usize> {
        if levels.len() != self.n() {
            return None;
        }
        let mut index = 0;
        for ((&level, &d), &stride) in levels.iter().zip(&self.dims).zip(&self.strides) {
            if level == 0 || level > d {
                return None;
            }
            index += (level - 1) * stride;
        }
        Some(index)
    }

    fn compute_slice(&self, i: usize, cell: usize) -> usize {
        let mut index = 0;
        for &k in &self.conditioning[i] {
            let level = (cell / self.strides[k]) % self.dims[k];
            index = index * self.dims[k] + level;
        }
        index
    }

    /// Index of the `B_i`-tuple of `cell` among conditional `i`'s slices, in
    /// lexicographic order.
    pub fn slice_index(&self, i: usize, cell: usize) -> usize {
        self.slice_of[i][cell]
    }

    /// 1-based levels of slice `slice` of conditional `i`.
    pub fn slice_levels(&self, i: usize, slice: usize) -> Vec<usize> {
        let set = &self.conditioning[i];
        let mut levels = vec![0; set.len()];
        let mut rest = slice;
        for (pos, &k) in set.iter().enumerate().rev() {
            levels[pos] = rest % self.dims[k] + 1;
            rest /= self.dims[k];
        }
        levels
    }

    /// Cells (ascending) whose `B_i`-tuple is `slice`.
    pub fn cells_in_slice(&self, i: usize, slice: usize) -> Vec<usize> {
        (0..self.cell_count)
            .filter(|&c| self.slice_of[i][c] == slice)
            .collect()
    }

    /// All slices of conditional `i` as lists of cells.
    pub fn slices(&self, i: usize) -> Vec<Vec<usize>> {
        let mut slices = vec![Vec::new(); self.slice_counts[i]];
        for c in 0..self.cell_count {
            slices[self.slice_of[i][c]].push(c);
        }
        slices
    }

    /// Position of the conditional whose conditioning set (0-based) is `set`.
    pub fn conditional_with_set(&self, set: &[usize]) -> Option<usize> {
        self.conditioning.iter().position(|s| s == set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn validate(dims: Vec<usize>, sets: Vec<Vec<usize>>) -> Result<ValidatedProblem> {
        validate_problem(&ProblemSpec::new(dims, sets), Limits::default())
    }

    #[test]
    fn singleton_family_on_binary_cube() {
        let p = validate(vec![2, 2, 2], vec![vec![3], vec![2], vec![1]]).unwrap();
        assert_eq!(p.cell_count(), 8);
        assert_eq!(p.slice_counts(), &[2, 2, 2]);
    }

    #[test]
    fn pair_family_on_binary_cube() {
        let p = validate(vec![2, 2, 2], vec![vec![1, 2], vec![1, 3], vec![2, 3]]).unwrap();
        assert_eq!(p.cell_count(), 8);
        assert_eq!(p.slice_counts(), &[4, 4, 4]);
    }

    #[test]
    fn containment_rejected() {
        let err = validate(vec![2, 2], vec![vec![1], vec![1, 2]]).unwrap_err();
        assert!(matches!(
            err,
            Error::ContainmentViolation {
                subset: 1,
                superset: 2,
                ..
            }
        ));
    }

    #[test]
    fn duplicate_rejected() {
        let err = validate(vec![2, 2], vec![vec![1], vec![1]]).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateConditioningSet {
                first: 1,
                second: 2,
                ..
            }
        ));
    }

    #[test]
    fn empty_left_side_rejected() {
        let err = validate(vec![2, 2], vec![vec![1, 2]]).unwrap_err();
        assert_eq!(err, Error::EmptyLeftSide { conditional: 1 });
    }

    #[test]
    fn malformed_specs_rejected() {
        assert!(matches!(
            validate(vec![], vec![vec![]]),
            Err(Error::InvalidProblem(_))
        ));
        assert!(matches!(
            validate(vec![2, 0], vec![vec![1]]),
            Err(Error::InvalidProblem(_))
        ));
        assert!(matches!(
            validate(vec![2, 2], vec![]),
            Err(Error::InvalidProblem(_))
        ));
        assert!(matches!(
            validate(vec![2, 2], vec![vec![3]]),
            Err(Error::InvalidProblem(_))
        ));
        assert!(matches!(
            validate(vec![2, 2, 2], vec![vec![2, 1]]),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn size_cap() {
        let spec = ProblemSpec::new(vec![10, 10, 10], vec![vec![1], vec![2]]);
        let err = validate_problem(&spec, Limits { max_columns: 1000 }).unwrap_err();
        assert_eq!(
            err,
            Error::SizeCapExceeded {
                columns: 2000,
                cap: 1000
            }
        );
        let huge = ProblemSpec::new(vec![usize::MAX, 3], vec![vec![1]]);
        assert!(validate_problem(&huge, Limits::default())
            .unwrap_err()
            .is_cap());
    }

    #[test]
    fn constant_variable_allowed() {
        let p = validate(vec![1, 3], vec![vec![2], vec![1]]).unwrap();
        assert_eq!(p.cell_count(), 3);
        assert_eq!(p.slice_counts(), &[3, 1]);
    }

    #[test]
    fn cell_and_slice_indexing() {
        let p = validate(vec![2, 3, 2], vec![vec![1, 3], vec![2]]).unwrap();
        for c in 0..p.cell_count() {
            let levels = p.cell_levels(c);
            assert_eq!(p.cell_index(&levels), Some(c));
            let s = p.slice_index(0, c);
            assert_eq!(p.slice_levels(0, s), vec![levels[0], levels[2]]);
            assert_eq!(p.slice_levels(1, p.slice_index(1, c)), vec![levels[1]]);
        }
        assert_eq!(p.cell_levels(0), vec![1, 1, 1]);
        assert_eq!(p.cell_levels(1), vec![1, 1, 2]);
        assert_eq!(p.cell_levels(2), vec![1, 2, 1]);
        assert_eq!(p.cells_in_slice(1, 0), vec![0, 1, 6, 7]);
        assert_eq!(p.cell_index(&[3, 1, 1]), None);
    }
}
