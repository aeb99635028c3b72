//! The two compatibility deciders.
//!
//! [`TheoremChecker`] runs the three entrywise conditions and then evaluates
//! every induced-circuit binomial. [`check_compatibility_oracle`] never looks
//! at the generator set: it propagates the ratio constraints
//! `P_a / P_b = C^i_a / C^i_b` over the support and reports the first cycle
//! on which they disagree. Both hand compatible inputs to
//! [`reconstruct_joint`].

use std::collections::VecDeque;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::conditional::{
    check_conditions_123, conditionals_from_joint, ConditionViolation, ConditionalArray,
    JointDistribution, Location,
};
use crate::error::{Error, Result};
use crate::graph::{build_graph, canonicalize_circuit, Circuit, CompatGraph, EnumerationCaps};
use crate::ideal::{
    binomial_from_circuit, evaluate_unchecked, generators_for_graph, Binomial, GeneratorSet,
};
use crate::problem::ValidatedProblem;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// One of the three entrywise conditions failed.
    Condition(ConditionViolation),
    /// A generator of the compatibility ideal does not vanish.
    Binomial { binomial: Binomial, value: Rational },
    /// Ratio propagation found an inconsistent cycle, reduced to an induced
    /// circuit whose binomial does not vanish.
    InconsistentCycle {
        circuit: Circuit,
        binomial: Binomial,
        value: Rational,
    },
}

impl Witness {
    pub fn to_json(&self, problem: &ValidatedProblem) -> Value {
        match self {
            Witness::Condition(v) => {
                let location = match &v.location {
                    Location::Cell(cell) => json!({ "cell": cell }),
                    Location::Slice(levels) => json!({ "slice": levels }),
                };
                json!({
                    "kind": "condition",
                    "condition": v.condition,
                    "conditional": v.conditional + 1,
                    "location": location,
                })
            }
            Witness::Binomial { binomial, value } => json!({
                "kind": "binomial",
                "binomial": binomial.render(problem),
                "degree": binomial.degree(),
                "value": value.to_string(),
            }),
            Witness::InconsistentCycle {
                circuit,
                binomial,
                value,
            } => json!({
                "kind": "inconsistent_cycle",
                "cycle": crate::one_based(circuit.vertices()),
                "binomial": binomial.render(problem),
                "degree": binomial.degree(),
                "value": value.to_string(),
            }),
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            Witness::Condition(_) => None,
            Witness::Binomial { value, .. } | Witness::InconsistentCycle { value, .. } => {
                Some(value)
            }
        }
    }

    pub fn binomial(&self) -> Option<&Binomial> {
        match self {
            Witness::Condition(_) => None,
            Witness::Binomial { binomial, .. } | Witness::InconsistentCycle { binomial, .. } => {
                Some(binomial)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub compatible: bool,
    pub witness: Option<Witness>,
    /// Every further violated generator, filled only on request.
    pub extra_witnesses: Vec<Witness>,
    pub reconstruction: Option<JointDistribution>,
    /// Number of free component weights in the reconstruction.
    pub degrees_of_freedom: usize,
}

impl Verdict {
    fn incompatible(witness: Witness) -> Self {
        Verdict {
            compatible: false,
            witness: Some(witness),
            extra_witnesses: Vec::new(),
            reconstruction: None,
            degrees_of_freedom: 0,
        }
    }

    fn compatible(joint: JointDistribution, dof: usize) -> Self {
        Verdict {
            compatible: true,
            witness: None,
            extra_witnesses: Vec::new(),
            reconstruction: Some(joint),
            degrees_of_freedom: dof,
        }
    }

    /// `{compatible, witness, joint, dof}` with rationals as strings and the
    /// joint nested by variable (outermost index = variable 1).
    pub fn to_json(&self, problem: &ValidatedProblem) -> Value {
        let mut out = json!({
            "compatible": self.compatible,
            "witness": self.witness.as_ref().map(|w| w.to_json(problem)),
            "joint": self.reconstruction.as_ref().map(|j| nest_rationals(j.entries(), problem.dims())),
            "dof": self.degrees_of_freedom,
        });
        if !self.extra_witnesses.is_empty() {
            out["all_witnesses"] = Value::Array(
                self.extra_witnesses
                    .iter()
                    .map(|w| w.to_json(problem))
                    .collect(),
            );
        }
        out
    }
}

/// Nests a flat lexicographic table into JSON arrays of rational strings.
pub fn nest_rationals(values: &[Rational], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => Value::String(values[0].to_string()),
        Some((&d, rest)) => {
            let stride = values.len() / d.max(1);
            Value::Array(
                (0..d)
                    .map(|k| nest_rationals(&values[k * stride..(k + 1) * stride], rest))
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Evaluate every generator and report all violations.
    pub all_witnesses: bool,
}

/// Theorem-based decider with the generator set computed once.
#[derive(Debug, Clone)]
pub struct TheoremChecker {
    problem: ValidatedProblem,
    graph: CompatGraph,
    generators: GeneratorSet,
}

impl TheoremChecker {
    pub fn new(problem: &ValidatedProblem, caps: EnumerationCaps) -> Result<Self> {
        let graph = build_graph(problem)?;
        let generators = generators_for_graph(&graph, caps)?;
        Ok(TheoremChecker {
            problem: problem.clone(),
            graph,
            generators,
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn graph(&self) -> &CompatGraph {
        &self.graph
    }

    pub fn check(&self, arrays: &[ConditionalArray], options: CheckOptions) -> Result<Verdict> {
        let report = check_conditions_123(arrays, &self.problem)?;
        if let Some(v) = report.first_violation() {
            return Ok(Verdict::incompatible(Witness::Condition(v.clone())));
        }
        let cells = self.problem.cell_count();
        let binomials = &self.generators.binomials;
        let eval = |b: &Binomial| evaluate_unchecked(b, arrays, cells);

        let violations: Vec<Witness> = if options.all_witnesses {
            #[cfg(feature = "parallel")]
            let values: Vec<Rational> = binomials.par_iter().map(eval).collect();
            #[cfg(not(feature = "parallel"))]
            let values: Vec<Rational> = binomials.iter().map(eval).collect();
            binomials
                .iter()
                .zip(values)
                .filter(|(_, v)| !v.is_zero())
                .map(|(b, value)| Witness::Binomial {
                    binomial: b.clone(),
                    value,
                })
                .collect()
        } else {
            #[cfg(feature = "parallel")]
            let first = binomials.par_iter().position_first(|b| !eval(b).is_zero());
            #[cfg(not(feature = "parallel"))]
            let first = binomials.iter().position(|b| !eval(b).is_zero());
            first
                .map(|k| Witness::Binomial {
                    binomial: binomials[k].clone(),
                    value: eval(&binomials[k]),
                })
                .into_iter()
                .collect()
        };

        let mut violations = violations.into_iter();
        if let Some(first) = violations.next() {
            let mut verdict = Verdict::incompatible(first);
            verdict.extra_witnesses = violations.collect();
            return Ok(verdict);
        }
        match reconstruct_with_graph(arrays, &self.problem, &self.graph, None) {
            Ok((joint, dof)) => Ok(Verdict::compatible(joint, dof)),
            Err(Error::IncompatibleInput) => Err(Error::DeciderDisagreement(
                "every generator vanishes but ratio propagation is inconsistent".into(),
            )),
            Err(e) => Err(e),
        }
    }
}

pub fn check_compatibility_theorem(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
    caps: EnumerationCaps,
) -> Result<Verdict> {
    TheoremChecker::new(problem, caps)?.check(arrays, CheckOptions::default())
}

/// Multiplicative potentials on the support: cell vertices carry `P`, slice
/// vertices carry `U`, and every support edge must satisfy `P * U = C`.
struct Propagation {
    value: Vec<Option<Rational>>,
    /// Component of each support cell; `usize::MAX` off the support.
    component: Vec<usize>,
    components: usize,
    conflict: Option<Vec<usize>>,
}

fn edge_weight<'a>(
    graph: &CompatGraph,
    arrays: &'a [ConditionalArray],
    a: usize,
    b: usize,
) -> &'a Rational {
    let column = graph.edge_column(a, b).expect("adjacent vertices");
    let cells = graph.cell_count();
    arrays[column / cells].get(column % cells)
}

fn path_to_root(parent: &[usize], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while parent[v] != v {
        v = parent[v];
        path.push(v);
    }
    path
}

/// Assumes conditions 1-3 hold.
fn propagate(arrays: &[ConditionalArray], graph: &CompatGraph) -> Propagation {
    let n = graph.vertex_count();
    let cells = graph.cell_count();
    let mut value: Vec<Option<Rational>> = vec![None; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut component = vec![usize::MAX; cells];
    let mut components = 0;
    let mut queue = VecDeque::new();

    for root in 0..cells {
        if value[root].is_some() || arrays[0].get(root).is_zero() {
            continue;
        }
        value[root] = Some(Rational::one());
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            if v < cells {
                component[v] = components;
            }
            let here = value[v].clone().expect("queued vertices carry a value");
            for &w in graph.neighbors(v) {
                let weight = edge_weight(graph, arrays, v, w);
                if weight.is_zero() {
                    continue;
                }
                match &value[w] {
                    None => {
                        value[w] = Some(weight / &here);
                        parent[w] = v;
                        queue.push_back(w);
                    }
                    Some(there) => {
                        if &(&here * there) != weight {
                            let mut up = path_to_root(&parent, v);
                            let mut down = path_to_root(&parent, w);
                            while up.len() > 1
                                && down.len() > 1
                                && up[up.len() - 2] == down[down.len() - 2]
                            {
                                up.pop();
                                down.pop();
                            }
                            down.pop();
                            down.reverse();
                            up.extend(down);
                            return Propagation {
                                value,
                                component,
                                components,
                                conflict: Some(up),
                            };
                        }
                    }
                }
            }
        }
        components += 1;
    }
    Propagation {
        value,
        component,
        components,
        conflict: None,
    }
}

fn circuit_value(
    graph: &CompatGraph,
    arrays: &[ConditionalArray],
    walk: &[usize],
) -> Result<(Circuit, Binomial, Rational)> {
    let circuit = canonicalize_circuit(graph, walk)?;
    let binomial = binomial_from_circuit(graph, &circuit)?;
    let value = evaluate_unchecked(&binomial, arrays, graph.cell_count());
    Ok((circuit, binomial, value))
}

/// Splits an inconsistent support cycle along chords until it is induced.
/// Every chord touches a support cell, so both halves stay on the support
/// and at least one of them is still inconsistent.
fn reduce_to_induced(
    graph: &CompatGraph,
    arrays: &[ConditionalArray],
    cycle: Vec<usize>,
) -> Result<(Circuit, Binomial, Rational)> {
    let mut current = cycle;
    loop {
        let n = current.len();
        let chord = (0..n).find_map(|a| {
            ((a + 2)..n)
                .filter(|&b| !(a == 0 && b == n - 1))
                .find(|&b| graph.adjacent(current[a], current[b]))
                .map(|b| (a, b))
        });
        let Some((a, b)) = chord else {
            let found = circuit_value(graph, arrays, &current)?;
            if found.2.is_zero() {
                return Err(Error::Internal("reduced cycle is consistent".into()));
            }
            return Ok(found);
        };
        let left: Vec<usize> = current[a..=b].to_vec();
        let right: Vec<usize> = current[b..].iter().chain(&current[..=a]).copied().collect();
        let (_, _, left_value) = circuit_value(graph, arrays, &left)?;
        current = if !left_value.is_zero() { left } else { right };
    }
}

/// Ratio-propagation decider, independent of the generator set.
pub fn check_compatibility_oracle(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
) -> Result<Verdict> {
    let report = check_conditions_123(arrays, problem)?;
    if let Some(v) = report.first_violation() {
        return Ok(Verdict::incompatible(Witness::Condition(v.clone())));
    }
    let graph = build_graph(problem)?;
    let propagation = propagate(arrays, &graph);
    if let Some(cycle) = propagation.conflict {
        let (circuit, binomial, value) = reduce_to_induced(&graph, arrays, cycle)?;
        return Ok(Verdict::incompatible(Witness::InconsistentCycle {
            circuit,
            binomial,
            value,
        }));
    }
    let (joint, dof) = assemble(arrays, problem, &propagation, None)?;
    Ok(Verdict::compatible(joint, dof))
}

/// Builds a joint from compatible conditionals. Each support component gets
/// total mass proportional to its weight (equal by default). Returns the
/// joint and `components - 1`.
pub fn reconstruct_joint(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
    weights: Option<&[Rational]>,
) -> Result<(JointDistribution, usize)> {
    let graph = build_graph(problem)?;
    reconstruct_with_graph(arrays, problem, &graph, weights)
}

fn reconstruct_with_graph(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
    graph: &CompatGraph,
    weights: Option<&[Rational]>,
) -> Result<(JointDistribution, usize)> {
    if !check_conditions_123(arrays, problem)?.passes() {
        return Err(Error::IncompatibleInput);
    }
    let propagation = propagate(arrays, graph);
    if propagation.conflict.is_some() {
        return Err(Error::IncompatibleInput);
    }
    assemble(arrays, problem, &propagation, weights)
}

/// Number of connected support components, i.e. one more than the degrees
/// of freedom of the reconstruction. Requires conditions 1-3.
pub fn support_components(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
) -> Result<usize> {
    if !check_conditions_123(arrays, problem)?.passes() {
        return Err(Error::IncompatibleInput);
    }
    let graph = build_graph(problem)?;
    Ok(propagate(arrays, &graph).components)
}

fn assemble(
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
    propagation: &Propagation,
    weights: Option<&[Rational]>,
) -> Result<(JointDistribution, usize)> {
    let k = propagation.components;
    let weights: Vec<Rational> = match weights {
        Some(w) if w.len() != k => {
            return Err(Error::WeightCountMismatch {
                expected: k,
                got: w.len(),
            })
        }
        Some(w) => {
            if let Some(index) = w.iter().position(|x| !x.is_positive()) {
                return Err(Error::NonPositiveWeight { index: index + 1 });
            }
            w.to_vec()
        }
        None => vec![Rational::one(); k],
    };
    let weight_total: Rational = weights.iter().sum();
    let mut mass = vec![Rational::zero(); k];
    for (c, &comp) in propagation.component.iter().enumerate() {
        if comp != usize::MAX {
            mass[comp] += propagation.value[c].as_ref().unwrap();
        }
    }
    let scale: Vec<Rational> = (0..k)
        .map(|j| &weights[j] / &(&mass[j] * &weight_total))
        .collect();
    let entries = propagation
        .component
        .iter()
        .enumerate()
        .map(|(c, &comp)| {
            if comp == usize::MAX {
                Rational::zero()
            } else {
                propagation.value[c].as_ref().unwrap() * &scale[comp]
            }
        })
        .collect();
    let joint = JointDistribution::new(entries)?;
    let back = conditionals_from_joint(&joint, problem)?;
    if back.is_degenerate()
        || back
            .arrays
            .iter()
            .zip(arrays)
            .any(|(a, b)| a.entries() != b.entries())
    {
        return Err(Error::Internal(
            "reconstructed joint does not reproduce the conditionals".into(),
        ));
    }
    Ok((joint, k.saturating_sub(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{validate_problem, Limits, ProblemSpec};

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn array(index: usize, values: &[&str]) -> ConditionalArray {
        ConditionalArray::new(index, values.iter().map(|s| q(s)).collect())
    }

    fn bivariate(d1: usize, d2: usize) -> ValidatedProblem {
        validate_problem(
            &ProblemSpec::new(vec![d1, d2], vec![vec![2], vec![1]]),
            Limits::default(),
        )
        .unwrap()
    }

    fn identity_pair() -> Vec<ConditionalArray> {
        vec![
            array(0, &["1", "0", "0", "1"]),
            array(1, &["1", "0", "0", "1"]),
        ]
    }

    #[test]
    fn diagonal_support_has_one_degree_of_freedom() {
        let p = bivariate(2, 2);
        let v = check_compatibility_oracle(&identity_pair(), &p).unwrap();
        assert!(v.compatible);
        assert_eq!(v.degrees_of_freedom, 1);
        assert_eq!(support_components(&identity_pair(), &p).unwrap(), 2);
        let joint = v.reconstruction.unwrap();
        assert_eq!(joint.entries(), &[q("1/2"), q("0"), q("0"), q("1/2")]);
    }

    #[test]
    fn weighted_reconstruction() {
        let p = bivariate(2, 2);
        let (joint, dof) =
            reconstruct_joint(&identity_pair(), &p, Some(&[q("1"), q("3")])).unwrap();
        assert_eq!(dof, 1);
        assert_eq!(joint.entries(), &[q("1/4"), q("0"), q("0"), q("3/4")]);
        // its conditionals are the identity pair again
        let back = conditionals_from_joint(&joint, &p).unwrap();
        assert_eq!(back.arrays, identity_pair());
        assert_eq!(
            reconstruct_joint(&identity_pair(), &p, Some(&[q("1")])).unwrap_err(),
            Error::WeightCountMismatch {
                expected: 2,
                got: 1
            }
        );
        assert_eq!(
            reconstruct_joint(&identity_pair(), &p, Some(&[q("1"), q("0")])).unwrap_err(),
            Error::NonPositiveWeight { index: 2 }
        );
    }

    #[test]
    fn uniform_pair_reconstructs_uniform() {
        let p = bivariate(2, 2);
        let half = array(0, &["1/2", "1/2", "1/2", "1/2"]);
        let arrays = vec![
            half.clone(),
            ConditionalArray::new(1, half.entries().to_vec()),
        ];
        let (joint, dof) = reconstruct_joint(&arrays, &p, None).unwrap();
        assert_eq!(dof, 0);
        assert_eq!(joint, JointDistribution::uniform(4));
    }

    #[test]
    fn counterexample_rejected_by_both() {
        let p = bivariate(3, 3);
        let arrays = vec![
            array(
                0,
                &["1/2", "1/2", "0", "0", "1/2", "1/2", "1/2", "0", "1/2"],
            ),
            array(
                1,
                &["1/3", "2/3", "0", "0", "1/3", "2/3", "1/3", "0", "2/3"],
            ),
        ];
        let theorem = check_compatibility_theorem(&arrays, &p, EnumerationCaps::default()).unwrap();
        assert!(!theorem.compatible);
        let w = theorem.witness.unwrap();
        assert_eq!(w.binomial().unwrap().degree(), 6);
        assert_eq!(w.value().unwrap().abs(), q("1/108"));

        let oracle = check_compatibility_oracle(&arrays, &p).unwrap();
        assert!(!oracle.compatible);
        let w = oracle.witness.unwrap();
        assert!(matches!(w, Witness::InconsistentCycle { .. }));
        assert_eq!(w.value().unwrap().abs(), q("1/108"));
        assert_eq!(
            reconstruct_joint(&arrays, &p, None).unwrap_err(),
            Error::IncompatibleInput
        );
    }

    #[test]
    fn margin_failure_short_circuits() {
        let p = bivariate(2, 2);
        let arrays = vec![
            array(0, &["1/2", "1/2", "1/2", "1/2"]),
            array(1, &["1/2", "1/4", "1/2", "1/2"]),
        ];
        let v = check_compatibility_theorem(&arrays, &p, EnumerationCaps::default()).unwrap();
        match v.witness {
            Some(Witness::Condition(c)) => assert_eq!((c.condition, c.conditional), (3, 1)),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(v.reconstruction.is_none());
    }

    #[test]
    fn all_witnesses_lists_every_violation() {
        let p = bivariate(2, 3);
        let arrays = vec![
            array(0, &["1/2", "1/3", "1/4", "1/2", "2/3", "3/4"]),
            array(1, &["1/3", "1/3", "1/3", "1/3", "1/3", "1/3"]),
        ];
        let checker = TheoremChecker::new(&p, EnumerationCaps::default()).unwrap();
        let fast = checker.check(&arrays, CheckOptions::default()).unwrap();
        let full = checker
            .check(
                &arrays,
                CheckOptions {
                    all_witnesses: true,
                },
            )
            .unwrap();
        assert_eq!(fast.witness, full.witness);
        assert!(fast.extra_witnesses.is_empty());
        assert_eq!(1 + full.extra_witnesses.len(), 3);
    }

    #[test]
    fn nested_json() {
        let values: Vec<Rational> = (1..=6).map(|k| Rational::new(k, 21)).collect();
        let v = nest_rationals(&values, &[2, 3]);
        assert_eq!(v, json!([["1/21", "2/21", "1/7"], ["4/21", "5/21", "2/7"]]));
    }
}
