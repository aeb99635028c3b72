//! Conditional arrays, joint distributions, and the three entrywise
//! conditions (nonnegativity, shared zero pattern, unit margins).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Cell, ValidatedProblem};
use crate::rational::Rational;

/// Dense full conditional `C^i`, entries in lexicographic cell order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalArray {
    index: usize,
    entries: Vec<Rational>,
}

impl ConditionalArray {
    pub fn new(index: usize, entries: Vec<Rational>) -> Self {
        ConditionalArray { index, entries }
    }

    /// Fills every cell with `f(levels)`, levels 1-based.
    pub fn from_fn<F>(problem: &ValidatedProblem, index: usize, mut f: F) -> Self
    where
        F: FnMut(&[usize]) -> Rational,
    {
        let entries = (0..problem.cell_count())
            .map(|c| f(&problem.cell_levels(c)))
            .collect();
        ConditionalArray { index, entries }
    }

    /// Position of this conditional in the family (0-based).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Rational] {
        &mut self.entries
    }

    pub fn get(&self, cell: usize) -> &Rational {
        &self.entries[cell]
    }
}

/// A probability table over all cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    entries: Vec<Rational>,
}

impl JointDistribution {
    /// Checks nonnegativity and that the entries sum to exactly one.
    pub fn new(entries: Vec<Rational>) -> Result<Self> {
        if let Some(pos) = entries.iter().position(Rational::is_negative) {
            return Err(Error::InvalidDistribution(format!(
                "entry {pos} is negative"
            )));
        }
        let total: Rational = entries.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(JointDistribution { entries })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let total: Rational = weights.iter().sum();
        if !total.is_positive() {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        JointDistribution::new(weights.iter().map(|w| w / &total).collect())
    }

    pub fn uniform(cell_count: usize) -> Self {
        let value = Rational::new(1, cell_count as i64);
        JointDistribution {
            entries: vec![value; cell_count],
        }
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.entries
    }
}

/// Where a condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Cell(Cell),
    /// 1-based `B_i`-tuple.
    Slice(Vec<usize>),
}

/// First violation of one of the three entrywise conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionViolation {
    /// 1, 2 or 3.
    pub condition: u8,
    /// 0-based conditional index.
    pub conditional: usize,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionReport {
    pub nonnegative: Option<ConditionViolation>,
    pub zero_pattern: Option<ConditionViolation>,
    pub margins: Option<ConditionViolation>,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.first_violation().is_none()
    }

    /// Lowest-numbered failing condition.
    pub fn first_violation(&self) -> Option<&ConditionViolation> {
        self.nonnegative
            .as_ref()
            .or(self.zero_pattern.as_ref())
            .or(self.margins.as_ref())
    }
}

pub(crate) fn check_shape(arrays: &[ConditionalArray], problem: &ValidatedProblem) -> Result<()> {
    if arrays.len() != problem.m() {
        return Err(Error::ShapeMismatch(format!(
            "expected {} conditional arrays, got {}",
            problem.m(),
            arrays.len()
        )));
    }
    for (pos, array) in arrays.iter().enumerate() {
        if array.index != pos {
            return Err(Error::ShapeMismatch(format!(
                "array at position {} claims conditional index {}",
                pos + 1,
                array.index + 1
            )));
        }
        if array.entries.len() != problem.cell_count() {
            return Err(Error::ShapeMismatch(format!(
                "conditional {} has {} entries, expected {}",
                pos + 1,
                array.entries.len(),
                problem.cell_count()
            )));
        }
    }
    Ok(())
}

pub fn check_conditions_123(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
) -> Result<ConditionReport> {
    check_shape(arrays, problem)?;
    let mut report = ConditionReport::default();

    'outer: for array in arrays {
        for (c, value) in array.entries.iter().enumerate() {
            if value.is_negative() {
                report.nonnegative = Some(ConditionViolation {
                    condition: 1,
                    conditional: array.index,
                    location: Location::Cell(problem.cell(c)),
                });
                break 'outer;
            }
        }
    }

    for c in 0..problem.cell_count() {
        let first_zero = arrays[0].entries[c].is_zero();
        if let Some(other) = arrays.iter().find(|a| a.entries[c].is_zero() != first_zero) {
            report.zero_pattern = Some(ConditionViolation {
                condition: 2,
                conditional: other.index,
                location: Location::Cell(problem.cell(c)),
            });
            break;
        }
    }

    'margins: for array in arrays {
        let i = array.index;
        let mut sums = vec![Rational::zero(); problem.slice_count(i)];
        for (c, value) in array.entries.iter().enumerate() {
            sums[problem.slice_index(i, c)] += value;
        }
        for (slice, sum) in sums.iter().enumerate() {
            if !sum.is_one() {
                report.margins = Some(ConditionViolation {
                    condition: 3,
                    conditional: i,
                    location: Location::Slice(problem.slice_levels(i, slice)),
                });
                break 'margins;
            }
        }
    }

    Ok(report)
}

/// Conditionals of a joint, with the slices whose marginal mass was zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointConditionals {
    pub arrays: Vec<ConditionalArray>,
    /// `(conditional, slice)` pairs that were all zero in the joint; the
    /// corresponding conditional entries are set to zero.
    pub degenerate: Vec<(usize, usize)>,
}

impl JointConditionals {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate.is_empty()
    }
}

/// Divides the joint by each `B_i`-marginal.
pub fn conditionals_from_joint(
    joint: &JointDistribution,
    problem: &ValidatedProblem,
) -> Result<JointConditionals> {
    if joint.entries.len() != problem.cell_count() {
        return Err(Error::ShapeMismatch(format!(
            "joint has {} entries, expected {}",
            joint.entries.len(),
            problem.cell_count()
        )));
    }
    let mut arrays = Vec::with_capacity(problem.m());
    let mut degenerate = Vec::new();
    for i in 0..problem.m() {
        let mut marginal = vec![Rational::zero(); problem.slice_count(i)];
        for (c, value) in joint.entries.iter().enumerate() {
            marginal[problem.slice_index(i, c)] += value;
        }
        for (slice, mass) in marginal.iter().enumerate() {
            if mass.is_zero() {
                degenerate.push((i, slice));
            }
        }
        let entries = joint
            .entries
            .iter()
            .enumerate()
            .map(|(c, value)| {
                let mass = &marginal[problem.slice_index(i, c)];
                if mass.is_zero() {
                    Rational::zero()
                } else {
                    value / mass
                }
            })
            .collect();
        arrays.push(ConditionalArray::new(i, entries));
    }
    Ok(JointConditionals { arrays, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{validate_problem, Limits, ProblemSpec};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn bivariate(d1: usize, d2: usize) -> ValidatedProblem {
        validate_problem(
            &ProblemSpec::new(vec![d1, d2], vec![vec![2], vec![1]]),
            Limits::default(),
        )
        .unwrap()
    }

    fn array(index: usize, values: &[&str]) -> ConditionalArray {
        ConditionalArray::new(index, values.iter().map(|s| q(s)).collect())
    }

    /// The 3x3 pair from the bivariate counterexample: C conditions on the
    /// column variable, D on the row variable.
    fn counterexample() -> Vec<ConditionalArray> {
        vec![
            array(
                0,
                &["1/2", "1/2", "0", "0", "1/2", "1/2", "1/2", "0", "1/2"],
            ),
            array(
                1,
                &["1/3", "2/3", "0", "0", "1/3", "2/3", "1/3", "0", "2/3"],
            ),
        ]
    }

    #[test]
    fn counterexample_passes_entrywise_conditions() {
        let report = check_conditions_123(&counterexample(), &bivariate(3, 3)).unwrap();
        assert!(report.passes(), "{report:?}");
    }

    #[test]
    fn negative_entry_detected() {
        let mut arrays = counterexample();
        arrays[0].entries_mut()[0] = q("-1/2");
        let report = check_conditions_123(&arrays, &bivariate(3, 3)).unwrap();
        let v = report.nonnegative.unwrap();
        assert_eq!(v.conditional, 0);
        assert_eq!(v.location, Location::Cell(Cell(vec![1, 1])));
    }

    #[test]
    fn zero_pattern_and_margin_violations() {
        let arrays = vec![
            array(0, &["1", "0", "0", "1"]),
            array(1, &["1", "1/2", "0", "1/2"]),
        ];
        let report = check_conditions_123(&arrays, &bivariate(2, 2)).unwrap();
        assert!(report.nonnegative.is_none());
        let zero = report.zero_pattern.clone().unwrap();
        assert_eq!(
            (zero.conditional, zero.location),
            (1, Location::Cell(Cell(vec![1, 2])))
        );
        let margin = report.margins.clone().unwrap();
        assert_eq!(
            (margin.conditional, margin.location),
            (1, Location::Slice(vec![1]))
        );
        assert_eq!(report.first_violation().unwrap().condition, 2);
    }

    #[test]
    fn shape_mismatch() {
        let arrays = vec![array(0, &["1", "0", "0", "1"])];
        assert!(matches!(
            check_conditions_123(&arrays, &bivariate(2, 2)),
            Err(Error::ShapeMismatch(_))
        ));
        let arrays = vec![array(0, &["1", "0", "0"]), array(1, &["1", "0", "0", "1"])];
        assert!(matches!(
            check_conditions_123(&arrays, &bivariate(2, 2)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn uniform_joint_gives_quarter_conditionals() {
        let p = validate_problem(
            &ProblemSpec::new(vec![2, 2, 2], vec![vec![3], vec![2], vec![1]]),
            Limits::default(),
        )
        .unwrap();
        let out = conditionals_from_joint(&JointDistribution::uniform(8), &p).unwrap();
        assert!(!out.is_degenerate());
        for a in &out.arrays {
            assert!(a.entries().iter().all(|v| *v == q("1/4")));
        }
    }

    #[test]
    fn bayes_division_on_two_by_two() {
        let joint = JointDistribution::new(vec![q("1/8"), q("1/8"), q("1/8"), q("5/8")]).unwrap();
        let out = conditionals_from_joint(&joint, &bivariate(2, 2)).unwrap();
        let expect_c: Vec<Rational> = ["1/2", "1/6", "1/2", "5/6"].iter().map(|s| q(s)).collect();
        let expect_d: Vec<Rational> = ["1/2", "1/2", "1/6", "5/6"].iter().map(|s| q(s)).collect();
        assert_eq!(out.arrays[0].entries(), &expect_c[..]);
        assert_eq!(out.arrays[1].entries(), &expect_d[..]);
        // re-multiplying by the column and row sums recovers the joint
        let col = [q("1/4"), q("3/4")];
        let row = [q("1/4"), q("3/4")];
        for c in 0..4 {
            assert_eq!(&expect_c[c] * &col[c % 2], joint.entries()[c]);
            assert_eq!(&expect_d[c] * &row[c / 2], joint.entries()[c]);
        }
    }

    #[test]
    fn zero_column_is_flagged_degenerate() {
        let joint = JointDistribution::new(vec![q("1/2"), q("0"), q("1/2"), q("0")]).unwrap();
        let p = validate_problem(
            &ProblemSpec::new(vec![2, 2], vec![vec![2]]),
            Limits::default(),
        )
        .unwrap();
        let out = conditionals_from_joint(&joint, &p).unwrap();
        assert_eq!(out.degenerate, vec![(0, 1)]);
        assert!(out.arrays[0].get(1).is_zero() && out.arrays[0].get(3).is_zero());
        assert!(!check_conditions_123(&out.arrays, &p).unwrap().passes());
    }

    #[test]
    fn joint_validation() {
        assert!(JointDistribution::new(vec![q("1/2"), q("1/3")]).is_err());
        assert!(JointDistribution::new(vec![q("3/2"), q("-1/2")]).is_err());
        let j = JointDistribution::from_weights(vec![q("1"), q("3")]).unwrap();
        assert_eq!(j.entries(), &[q("1/4"), q("3/4")]);
    }
}
