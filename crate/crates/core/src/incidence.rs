//! The 0/1 matrix whose toric ideal is the compatibility ideal.
//!
//! Rows come in `m + 1` blocks: block 0 has one row per cell (the joint
//! parameters), block `i` has one row per `B_i`-tuple (the missing marginal
//! of conditional `i`). Columns are the indeterminates `C^i_cell`,
//! conditional-major then lexicographic by cell. Column `(i, cell)` has a one
//! in the block-0 row of `cell` and in the block-`i` row of `cell`'s
//! `B_i`-tuple.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Cell, ValidatedProblem};

/// Dense storage cap for [`build_matrix`].
pub const DEFAULT_MAX_MATRIX_ENTRIES: usize = 1 << 24;
/// Column cap for [`minor_unimodularity_probe`].
pub const DEFAULT_PROBE_CAP: usize = 32;

/// Row label: `block` 0 carries a full cell, block `i >= 1` a `B_i`-tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RowLabel {
    pub block: usize,
    pub levels: Vec<usize>,
}

/// Column label: 1-based conditional index and cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ColLabel {
    pub conditional: usize,
    pub cell: Cell,
}

fn dashed(levels: &[usize]) -> String {
    let parts: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
    parts.join("-")
}

impl RowLabel {
    pub fn short(&self) -> String {
        format!("{}:{}", self.block, dashed(&self.levels))
    }
}

impl ColLabel {
    pub fn short(&self) -> String {
        format!("{}:{}", self.conditional, dashed(&self.cell.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: Vec<RowLabel>,
    cols: Vec<ColLabel>,
    entries: Vec<Vec<i64>>,
}

/// Row offset of block `i + 1` (conditional `i`) in the matrix, equal to the
/// first vertex id of that block in the graph.
pub(crate) fn block_offsets(problem: &ValidatedProblem) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(problem.m());
    let mut next = problem.cell_count();
    for i in 0..problem.m() {
        offsets.push(next);
        next += problem.slice_count(i);
    }
    offsets
}

pub fn build_matrix(problem: &ValidatedProblem) -> Result<IncidenceMatrix> {
    build_matrix_capped(problem, DEFAULT_MAX_MATRIX_ENTRIES)
}

pub fn build_matrix_capped(
    problem: &ValidatedProblem,
    max_entries: usize,
) -> Result<IncidenceMatrix> {
    let cells = problem.cell_count();
    let row_count = cells + problem.slice_counts().iter().sum::<usize>();
    let col_count = problem.column_count();
    match row_count.checked_mul(col_count) {
        Some(total) if total <= max_entries => {}
        other => {
            return Err(Error::SizeCapExceeded {
                columns: other.unwrap_or(usize::MAX),
                cap: max_entries,
            })
        }
    }

    let mut rows = Vec::with_capacity(row_count);
    rows.extend((0..cells).map(|c| RowLabel {
        block: 0,
        levels: problem.cell_levels(c),
    }));
    for i in 0..problem.m() {
        rows.extend((0..problem.slice_count(i)).map(|s| RowLabel {
            block: i + 1,
            levels: problem.slice_levels(i, s),
        }));
    }

    let offsets = block_offsets(problem);
    let mut cols = Vec::with_capacity(col_count);
    let mut entries = vec![vec![0i64; col_count]; row_count];
    for i in 0..problem.m() {
        for c in 0..cells {
            let col = i * cells + c;
            cols.push(ColLabel {
                conditional: i + 1,
                cell: problem.cell(c),
            });
            entries[c][col] = 1;
            entries[offsets[i] + problem.slice_index(i, c)][col] = 1;
        }
    }
    Ok(IncidenceMatrix {
        rows,
        cols,
        entries,
    })
}

impl IncidenceMatrix {
    /// Wraps an arbitrary labeled integer matrix, e.g. to run the structural
    /// checks on something that is not an `A_{Δ,d}`.
    pub fn from_parts(
        rows: Vec<RowLabel>,
        cols: Vec<ColLabel>,
        entries: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if entries.len() != rows.len() || entries.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::ShapeMismatch(format!(
                "entries do not form a {}x{} matrix",
                rows.len(),
                cols.len()
            )));
        }
        Ok(IncidenceMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Unlabeled matrix: every row in block 0, columns labeled by position.
    pub fn from_entries(entries: Vec<Vec<i64>>) -> Result<Self> {
        let width = entries.first().map_or(0, Vec::len);
        let rows = (0..entries.len())
            .map(|r| RowLabel {
                block: 0,
                levels: vec![r + 1],
            })
            .collect();
        let cols = (0..width)
            .map(|c| ColLabel {
                conditional: 1,
                cell: Cell(vec![c + 1]),
            })
            .collect();
        IncidenceMatrix::from_parts(rows, cols, entries)
    }

    pub fn rows(&self) -> &[RowLabel] {
        &self.rows
    }

    pub fn cols(&self) -> &[ColLabel] {
        &self.cols
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col]
    }

    /// Rows holding a nonzero entry in `col`.
    pub fn column_support(&self, col: usize) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| self.entries[r][col] != 0)
            .collect()
    }

    /// `A * x` for an integer vector indexed by column.
    pub fn apply(&self, x: &[i64]) -> Result<Vec<i64>> {
        if x.len() != self.col_count() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.col_count()
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Dense CSV: a header row of column labels, then one line per row
    /// starting with the row label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for col in &self.cols {
            out.push(',');
            out.push_str(&col.short());
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.entries) {
            out.push_str(&label.short());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Labels plus, for every column, the rows of its two ones.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            row_count: usize,
            col_count: usize,
            rows: &'a [RowLabel],
            cols: &'a [ColLabel],
            columns: Vec<Vec<usize>>,
        }
        let columns = (0..self.col_count())
            .map(|c| crate::one_based(&self.column_support(c)))
            .collect();
        serde_json::to_value(Doc {
            row_count: self.row_count(),
            col_count: self.col_count(),
            rows: &self.rows,
            cols: &self.cols,
            columns,
        })
        .expect("matrix serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureViolation {
    NonBinaryEntry { row: usize, col: usize, value: i64 },
    OnesInColumn { col: usize, count: usize },
    SameSide { col: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub passes: bool,
    pub violation: Option<StructureViolation>,
}

/// Checks the graphical-unimodular shape: 0/1 entries, two ones per column,
/// one of them in block 0 and the other outside it.
pub fn verify_graphical_unimodular(matrix: &IncidenceMatrix) -> StructureReport {
    let fail = |violation| StructureReport {
        passes: false,
        violation: Some(violation),
    };
    for (r, row) in matrix.entries.iter().enumerate() {
        if let Some(c) = row.iter().position(|&v| v != 0 && v != 1) {
            return fail(StructureViolation::NonBinaryEntry {
                row: r,
                col: c,
                value: row[c],
            });
        }
    }
    for col in 0..matrix.col_count() {
        let support = matrix.column_support(col);
        if support.len() != 2 {
            return fail(StructureViolation::OnesInColumn {
                col,
                count: support.len(),
            });
        }
        let in_first = support
            .iter()
            .filter(|&&r| matrix.rows[r].block == 0)
            .count();
        if in_first != 1 {
            return fail(StructureViolation::SameSide { col });
        }
    }
    StructureReport {
        passes: true,
        violation: None,
    }
}

/// Fraction-free (Bareiss) elimination. Returns the rank and, for square
/// input, the determinant.
fn bareiss(mut a: Vec<Vec<BigInt>>) -> (usize, BigInt) {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    let mut sign = 1i32;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        if pivot != rank {
            a.swap(pivot, rank);
            sign = -sign;
        }
        for r in (rank + 1)..rows {
            for c in (col + 1)..cols {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    let det = if rows == cols && rank == rows {
        if rows == 0 {
            BigInt::from(1)
        } else if sign < 0 {
            -prev
        } else {
            prev
        }
    } else {
        BigInt::zero()
    };
    (rank, det)
}

fn to_big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

pub fn rank(matrix: &IncidenceMatrix) -> usize {
    bareiss(to_big(&matrix.entries)).0
}

pub fn determinant(square: &[Vec<i64>]) -> BigInt {
    bareiss(to_big(square)).1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub rank: usize,
    pub samples: usize,
    /// Multiset of `|det|` over the sampled maximal square submatrices,
    /// keyed by the decimal value.
    pub abs_determinants: BTreeMap<String, usize>,
    /// True iff every sampled `|det|` is 0 or 1.
    pub passes: bool,
}

/// Samples `samples` square submatrices of size `rank(A)` and records their
/// absolute determinants. Deterministic for a given seed.
pub fn minor_unimodularity_probe(
    matrix: &IncidenceMatrix,
    samples: usize,
    seed: u64,
) -> Result<ProbeReport> {
    minor_unimodularity_probe_capped(matrix, samples, seed, DEFAULT_PROBE_CAP)
}

pub fn minor_unimodularity_probe_capped(
    matrix: &IncidenceMatrix,
    samples: usize,
    seed: u64,
    cap: usize,
) -> Result<ProbeReport> {
    if matrix.col_count() > cap {
        return Err(Error::ProbeCapExceeded {
            columns: matrix.col_count(),
            cap,
        });
    }
    let rank = rank(matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<BigInt, usize> = BTreeMap::new();
    for _ in 0..samples {
        let mut rows = sample(&mut rng, matrix.row_count(), rank).into_vec();
        let mut cols = sample(&mut rng, matrix.col_count(), rank).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        let sub: Vec<Vec<i64>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| matrix.entries[r][c]).collect())
            .collect();
        *counts.entry(determinant(&sub).abs()).or_default() += 1;
    }
    let one = BigInt::from(1);
    let passes = counts.keys().all(|v| v.is_zero() || *v == one);
    Ok(ProbeReport {
        rank,
        samples,
        abs_determinants: counts
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        passes,
    })
}
