//! Exact compatibility checking for full conditional distributions.
//!
//! A tuple of full conditionals `p(x_{A_i} | x_{B_i})` on discrete variables
//! is compatible when some joint distribution has all of them as its
//! conditionals. This crate builds the 0/1 matrix and bipartite graph whose
//! induced circuits give the binomial equations cutting out the compatible
//! tuples, evaluates those binomials exactly, and cross-checks every verdict
//! against an independent ratio-propagation reconstruction.

pub mod conditional;
pub mod decide;
pub mod error;
pub mod graph;
pub mod ideal;
pub mod incidence;
pub mod problem;
pub mod rational;
pub mod symmetry;

pub use conditional::{
    check_conditions_123, conditionals_from_joint, ConditionReport, ConditionViolation,
    ConditionalArray, JointConditionals, JointDistribution, Location,
};
pub use decide::{
    check_compatibility_oracle, check_compatibility_theorem, reconstruct_joint, support_components,
    CheckOptions, TheoremChecker, Verdict, Witness,
};
pub use error::{Error, Result};
pub use graph::{
    build_graph, canonicalize_circuit, enumerate_circuits_bruteforce, enumerate_induced_circuits,
    Circuit, CircuitSet, CompatGraph, EnumerationCaps,
};
pub use ideal::{
    binomial_from_circuit, evaluate_binomial, generators, verify_kernel_membership, Binomial,
    GeneratorSet,
};
pub use incidence::{
    build_matrix, minor_unimodularity_probe, verify_graphical_unimodular, ColLabel,
    IncidenceMatrix, ProbeReport, RowLabel, StructureReport,
};
pub use problem::{validate_problem, Cell, Limits, ProblemSpec, ValidatedProblem};
pub use rational::Rational;
pub use symmetry::{symmetry_group, symmetry_orbits, OrbitPartition, SymmetryElement};

/// Serialized forms use 1-based positions throughout.
pub(crate) fn one_based(ids: &[usize]) -> Vec<usize> {
    ids.iter().map(|i| i + 1).collect()
}
