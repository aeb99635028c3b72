//! Circuit binomials: the generators of the compatibility ideal.
//!
//! An indeterminate `C^i_cell` is identified with its column index in the
//! incidence matrix (`i * cellCount + cell`, `i` 0-based). A monomial is a
//! sorted list of distinct columns.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::conditional::{check_shape, ConditionalArray};
use crate::error::{Error, Result};
use crate::graph::{
    build_graph, enumerate_induced_circuits, Circuit, CompatGraph, EnumerationCaps,
};
use crate::incidence::IncidenceMatrix;
use crate::problem::ValidatedProblem;
use crate::rational::Rational;

/// `plus - minus`, both squarefree, disjoint, and `plus < minus`
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binomial {
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl Binomial {
    /// Orients two monomials canonically. Inputs need not be sorted.
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Self {
        a.sort_unstable();
        b.sort_unstable();
        if a <= b {
            Binomial { plus: a, minus: b }
        } else {
            Binomial { plus: b, minus: a }
        }
    }

    pub fn plus(&self) -> &[usize] {
        &self.plus
    }

    pub fn minus(&self) -> &[usize] {
        &self.minus
    }

    pub fn degree(&self) -> usize {
        self.plus.len()
    }

    pub fn is_squarefree(&self) -> bool {
        let strict = |m: &[usize]| m.windows(2).all(|w| w[0] < w[1]);
        strict(&self.plus) && strict(&self.minus)
    }

    pub fn monomials_disjoint(&self) -> bool {
        self.plus
            .iter()
            .all(|c| self.minus.binary_search(c).is_err())
    }

    /// Applies a column relabeling and re-orients.
    pub fn map_columns(&self, f: impl Fn(usize) -> usize) -> Binomial {
        Binomial::new(
            self.plus.iter().map(|&c| f(c)).collect(),
            self.minus.iter().map(|&c| f(c)).collect(),
        )
    }

    /// Renders like `C[1,1,1]*D[2,1,1] - C[2,1,1]*D[1,1,1]`.
    pub fn render(&self, problem: &ValidatedProblem) -> String {
        let monomial = |cols: &[usize]| -> String {
            if cols.is_empty() {
                return "1".into();
            }
            let factors: Vec<String> = cols
                .iter()
                .map(|&c| indeterminate_name(problem, c))
                .collect();
            factors.join("*")
        };
        format!("{} - {}", monomial(&self.plus), monomial(&self.minus))
    }
}

/// Letters `C, D, E, ...` while they last, `C{i}` (1-based) beyond that.
pub fn conditional_name(i: usize, m: usize) -> String {
    if m <= 24 {
        char::from(b'C' + i as u8).to_string()
    } else {
        format!("C{}", i + 1)
    }
}

pub fn indeterminate_name(problem: &ValidatedProblem, column: usize) -> String {
    let i = column / problem.cell_count();
    let cell = column % problem.cell_count();
    let mut out = conditional_name(i, problem.m());
    let _ = write!(out, "{}", problem.cell(cell));
    out
}

/// Odd-position edges against even-position edges.
pub fn binomial_from_circuit(graph: &CompatGraph, circuit: &Circuit) -> Result<Binomial> {
    if circuit.len() % 2 == 1 {
        return Err(Error::NotAlternating);
    }
    let mut odd = Vec::with_capacity(circuit.len() / 2);
    let mut even = Vec::with_capacity(circuit.len() / 2);
    for (k, (a, b)) in circuit.edges().enumerate() {
        if graph.is_cell_vertex(a) == graph.is_cell_vertex(b) {
            return Err(Error::NotAlternating);
        }
        let column = graph.edge_column(a, b).ok_or(Error::NotAlternating)?;
        if k % 2 == 0 {
            odd.push(column);
        } else {
            even.push(column);
        }
    }
    Ok(Binomial::new(odd, even))
}

/// One binomial per induced circuit, sorted by (degree, canonical form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    pub binomials: Vec<Binomial>,
    /// `circuits[k]` is the source of `binomials[k]`.
    pub circuits: Vec<Circuit>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.binomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.binomials.is_empty()
    }

    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for b in &self.binomials {
            *hist.entry(b.degree()).or_insert(0) += 1;
        }
        hist
    }

    pub fn position(&self, binomial: &Binomial) -> Option<usize> {
        self.binomials
            .binary_search_by(|b| generator_order(b, binomial))
            .ok()
    }

    pub fn to_json(&self, problem: &ValidatedProblem) -> serde_json::Value {
        #[derive(Serialize)]
        struct Entry {
            degree: usize,
            binomial: String,
            circuit: Vec<usize>,
        }
        let entries: Vec<Entry> = self
            .binomials
            .iter()
            .zip(&self.circuits)
            .map(|(b, c)| Entry {
                degree: b.degree(),
                binomial: b.render(problem),
                circuit: crate::one_based(c.vertices()),
            })
            .collect();
        serde_json::json!({
            "total": self.len(),
            "degree_histogram": self.degree_histogram(),
            "generators": entries,
        })
    }
}

fn generator_order(a: &Binomial, b: &Binomial) -> std::cmp::Ordering {
    a.degree().cmp(&b.degree()).then_with(|| a.cmp(b))
}

pub fn generators(problem: &ValidatedProblem, caps: EnumerationCaps) -> Result<GeneratorSet> {
    let graph = build_graph(problem)?;
    generators_for_graph(&graph, caps)
}

pub fn generators_for_graph(graph: &CompatGraph, caps: EnumerationCaps) -> Result<GeneratorSet> {
    let circuits = enumerate_induced_circuits(graph, caps)?;
    let mut pairs: Vec<(Binomial, Circuit)> = circuits
        .circuits
        .into_iter()
        .map(|c| binomial_from_circuit(graph, &c).map(|b| (b, c)))
        .collect::<Result<_>>()?;
    pairs.sort_by(|x, y| generator_order(&x.0, &y.0));
    pairs.dedup_by(|x, y| x.0 == y.0);
    let (binomials, circuits) = pairs.into_iter().unzip();
    Ok(GeneratorSet {
        binomials,
        circuits,
    })
}

fn entry(arrays: &[ConditionalArray], cells: usize, column: usize) -> &Rational {
    arrays[column / cells].get(column % cells)
}

/// Exact value of `plus - minus` at the given arrays.
pub fn evaluate_binomial(binomial: &Binomial, arrays: &[ConditionalArray]) -> Result<Rational> {
    let cells = arrays.first().map_or(0, |a| a.entries().len());
    if arrays.iter().any(|a| a.entries().len() != cells) {
        return Err(Error::ShapeMismatch("arrays differ in size".into()));
    }
    let limit = arrays.len() * cells;
    if let Some(&c) = binomial
        .plus
        .iter()
        .chain(&binomial.minus)
        .find(|&&c| c >= limit)
    {
        return Err(Error::ShapeMismatch(format!(
            "indeterminate {c} outside {limit} columns"
        )));
    }
    Ok(evaluate_unchecked(binomial, arrays, cells))
}

pub(crate) fn evaluate_unchecked(
    binomial: &Binomial,
    arrays: &[ConditionalArray],
    cells: usize,
) -> Rational {
    let plus: Rational = binomial
        .plus
        .iter()
        .map(|&c| entry(arrays, cells, c))
        .product();
    let minus: Rational = binomial
        .minus
        .iter()
        .map(|&c| entry(arrays, cells, c))
        .product();
    plus - minus
}

/// Evaluates against arrays already validated for `problem`.
pub fn evaluate_for_problem(
    binomial: &Binomial,
    arrays: &[ConditionalArray],
    problem: &ValidatedProblem,
) -> Result<Rational> {
    check_shape(arrays, problem)?;
    evaluate_binomial(binomial, arrays)
}

/// `A * plus == A * minus` with exponent vectors over the columns.
pub fn verify_kernel_membership(binomial: &Binomial, matrix: &IncidenceMatrix) -> Result<bool> {
    let mut u = vec![0i64; matrix.col_count()];
    let mut v = vec![0i64; matrix.col_count()];
    for (cols, vec) in [(&binomial.plus, &mut u), (&binomial.minus, &mut v)] {
        for &c in cols {
            let slot = vec.get_mut(c).ok_or_else(|| {
                Error::ShapeMismatch(format!(
                    "indeterminate {c} outside {} columns",
                    matrix.col_count()
                ))
            })?;
            *slot += 1;
        }
    }
    Ok(matrix.apply(&u)? == matrix.apply(&v)?)
}
