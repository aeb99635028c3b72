//! The bipartite compatibility graph and its induced (chordless) circuits.
//!
//! Vertex ids coincide with the row indices of the incidence matrix: cell
//! vertices first in lexicographic cell order, then the slice vertices of
//! each conditional. Edge `(i, cell)` joins the cell vertex to the slice
//! vertex of `cell`'s `B_i`-tuple, and has the matrix column index as its id.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::{block_offsets, RowLabel};
use crate::problem::ValidatedProblem;

pub const DEFAULT_MAX_CIRCUITS: usize = 1_000_000;
pub const DEFAULT_ORACLE_CAP: usize = 40;

/// Hard limits for circuit enumeration. Exceeding either aborts with an
/// error; results are never silently truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationCaps {
    pub max_circuits: usize,
    /// Maximum circuit length in edges. Finding a longer induced circuit is
    /// an error.
    pub max_length: Option<usize>,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            max_circuits: DEFAULT_MAX_CIRCUITS,
            max_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatGraph {
    labels: Vec<RowLabel>,
    cell_count: usize,
    m: usize,
    offsets: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

pub fn build_graph(problem: &ValidatedProblem) -> Result<CompatGraph> {
    let cells = problem.cell_count();
    let offsets = block_offsets(problem);
    let vertex_count = cells + problem.slice_counts().iter().sum::<usize>();
    let mut labels = Vec::with_capacity(vertex_count);
    labels.extend((0..cells).map(|c| RowLabel {
        block: 0,
        levels: problem.cell_levels(c),
    }));
    for i in 0..problem.m() {
        labels.extend((0..problem.slice_count(i)).map(|s| RowLabel {
            block: i + 1,
            levels: problem.slice_levels(i, s),
        }));
    }
    let mut adjacency = vec![Vec::new(); vertex_count];
    for c in 0..cells {
        for (i, &offset) in offsets.iter().enumerate() {
            let u = offset + problem.slice_index(i, c);
            adjacency[c].push(u);
            adjacency[u].push(c);
        }
    }
    // cell lists are built in ascending order; slice lists too since cells
    // are visited in order
    Ok(CompatGraph {
        labels,
        cell_count: cells,
        m: problem.m(),
        offsets,
        adjacency,
    })
}

impl CompatGraph {
    /// Builds a graph directly from adjacency lists, for tests and oracles.
    /// Vertices `0..cell_count` form one side.
    pub fn from_adjacency(cell_count: usize, mut adjacency: Vec<Vec<usize>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let labels = (0..adjacency.len())
            .map(|v| RowLabel {
                block: usize::from(v >= cell_count),
                levels: vec![v + 1],
            })
            .collect();
        CompatGraph {
            labels,
            cell_count,
            m: 1,
            offsets: vec![cell_count],
            adjacency,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency[..self.cell_count].iter().map(Vec::len).sum()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn is_cell_vertex(&self, v: usize) -> bool {
        v < self.cell_count
    }

    pub fn label(&self, v: usize) -> &RowLabel {
        &self.labels[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// 0-based conditional owning slice vertex `v`.
    pub fn conditional_of(&self, v: usize) -> usize {
        debug_assert!(!self.is_cell_vertex(v));
        self.offsets.partition_point(|&o| o <= v) - 1
    }

    /// Column (indeterminate) index of the edge between a cell vertex and a
    /// slice vertex, in either order.
    pub fn edge_column(&self, a: usize, b: usize) -> Option<usize> {
        let (cell, slice) = if self.is_cell_vertex(a) {
            (a, b)
        } else {
            (b, a)
        };
        if !self.is_cell_vertex(cell) || self.is_cell_vertex(slice) || !self.adjacent(cell, slice) {
            return None;
        }
        Some(self.conditional_of(slice) * self.cell_count + cell)
    }

    /// Endpoints `(cell vertex, slice vertex)` of edge `column`.
    pub fn edge_endpoints(&self, column: usize) -> (usize, usize) {
        let i = column / self.cell_count;
        let cell = column % self.cell_count;
        let slice = *self.adjacency[cell]
            .iter()
            .find(|&&u| self.conditional_of(u) == i)
            .expect("every cell meets every conditional");
        (cell, slice)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count()];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.vertex_count() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// True iff the graph has no cycle at all.
    pub fn is_forest(&self) -> bool {
        self.edge_count() + self.component_count() == self.vertex_count()
    }

    fn conditional_name(&self, i: usize) -> String {
        crate::ideal::conditional_name(i, self.m)
    }

    /// Graphviz rendering: cell vertices as boxes, slice vertices as
    /// ellipses, edges labeled by their indeterminate.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph compat {\n");
        let _ = writeln!(
            out,
            "  // {} vertices ({} cells), {} edges",
            self.vertex_count(),
            self.cell_count,
            self.edge_count()
        );
        if self.is_forest() {
            out.push_str("  // acyclic: 0 circuits\n");
        }
        for v in 0..self.vertex_count() {
            let label = &self.labels[v];
            let levels: Vec<String> = label.levels.iter().map(|l| l.to_string()).collect();
            if self.is_cell_vertex(v) {
                let _ = writeln!(out, "  v{v} [shape=box, label=\"{}\"];", levels.join(""));
            } else {
                let _ = writeln!(
                    out,
                    "  v{v} [shape=ellipse, label=\"({}, ({}))\"];",
                    label.block,
                    levels.join(",")
                );
            }
        }
        for c in 0..self.cell_count {
            let cell: Vec<String> = self.labels[c]
                .levels
                .iter()
                .map(|l| l.to_string())
                .collect();
            for &u in &self.adjacency[c] {
                let _ = writeln!(
                    out,
                    "  v{c} -- v{u} [label=\"{}[{}]\"];",
                    self.conditional_name(self.conditional_of(u)),
                    cell.join(",")
                );
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Vertex<'a> {
            id: usize,
            block: usize,
            levels: &'a [usize],
        }
        #[derive(Serialize)]
        struct Edge {
            column: usize,
            conditional: usize,
            cell_vertex: usize,
            slice_vertex: usize,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            vertex_count: usize,
            edge_count: usize,
            cell_vertices: Vec<Vertex<'a>>,
            slice_vertices: Vec<Vertex<'a>>,
            edges: Vec<Edge>,
        }
        let vertex = |v: usize| Vertex {
            id: v + 1,
            block: self.labels[v].block,
            levels: &self.labels[v].levels,
        };
        let mut edges = Vec::with_capacity(self.edge_count());
        for column in 0..self.m * self.cell_count {
            let (c, u) = self.edge_endpoints(column);
            edges.push(Edge {
                column: column + 1,
                conditional: column / self.cell_count + 1,
                cell_vertex: c + 1,
                slice_vertex: u + 1,
            });
        }
        serde_json::to_value(Doc {
            vertex_count: self.vertex_count(),
            edge_count: self.edge_count(),
            cell_vertices: (0..self.cell_count).map(vertex).collect(),
            slice_vertices: (self.cell_count..self.vertex_count()).map(vertex).collect(),
            edges,
        })
        .expect("graph serializes")
    }
}

/// A simple cycle, stored by its vertices in canonical order: starting at
/// the least vertex and continuing toward its smaller cycle neighbor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Circuit {
    vertices: Vec<usize>,
}

impl Circuit {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Number of edges (equal to the number of vertices).
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Consecutive vertex pairs, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    /// Chord-free with respect to `graph`.
    pub fn is_chordless(&self, graph: &CompatGraph) -> bool {
        let n = self.vertices.len();
        for a in 0..n {
            for b in (a + 2)..n {
                if a == 0 && b == n - 1 {
                    continue;
                }
                if graph.adjacent(self.vertices[a], self.vertices[b]) {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn from_canonical(vertices: Vec<usize>) -> Self {
        Circuit { vertices }
    }
}

/// Rotates and reflects a closed walk into canonical form, checking that it
/// is a simple cycle of `graph`. A trailing repeat of the first vertex is
/// accepted.
pub fn canonicalize_circuit(graph: &CompatGraph, walk: &[usize]) -> Result<Circuit> {
    let mut walk = walk.to_vec();
    if walk.len() > 1 && walk.first() == walk.last() {
        walk.pop();
    }
    let n = walk.len();
    if n < 4 || n % 2 == 1 {
        return Err(Error::NotACycle(format!(
            "a cycle needs an even length of at least 4, got {n}"
        )));
    }
    if let Some(&v) = walk.iter().find(|&&v| v >= graph.vertex_count()) {
        return Err(Error::NotACycle(format!("vertex {v} does not exist")));
    }
    let mut sorted = walk.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotACycle("a vertex repeats".into()));
    }
    for k in 0..n {
        let (a, b) = (walk[k], walk[(k + 1) % n]);
        if !graph.adjacent(a, b) {
            return Err(Error::NotACycle(format!(
                "vertices {a} and {b} are not adjacent"
            )));
        }
    }
    let start = (0..n).min_by_key(|&k| walk[k]).unwrap();
    let forward = walk[(start + 1) % n];
    let backward = walk[(start + n - 1) % n];
    let vertices = if forward < backward {
        (0..n).map(|k| walk[(start + k) % n]).collect()
    } else {
        (0..n).map(|k| walk[(start + n - k) % n]).collect()
    };
    Ok(Circuit { vertices })
}

/// Induced circuits in canonical order with a length histogram.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircuitSet {
    pub circuits: Vec<Circuit>,
    /// Circuit length (edges) to count.
    pub histogram: BTreeMap<usize, usize>,
}

impl CircuitSet {
    fn from_cycles(mut cycles: Vec<Vec<usize>>) -> Self {
        cycles.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        cycles.dedup();
        let mut histogram = BTreeMap::new();
        for c in &cycles {
            *histogram.entry(c.len()).or_insert(0) += 1;
        }
        CircuitSet {
            circuits: cycles.into_iter().map(Circuit::from_canonical).collect(),
            histogram,
        }
    }

    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    pub fn to_json(&self, graph: &CompatGraph) -> serde_json::Value {
        let circuits: Vec<serde_json::Value> = self
            .circuits
            .iter()
            .map(|c| {
                let labels: Vec<String> = c.vertices().iter().map(|&v| graph.label(v).short()).collect();
                serde_json::json!({ "length": c.len(), "vertices": crate::one_based(c.vertices()), "labels": labels })
            })
            .collect();
        serde_json::json!({
            "total": self.len(),
            "histogram": self.histogram,
            "circuits": circuits,
        })
    }
}

struct Budget<'a> {
    caps: EnumerationCaps,
    found: &'a AtomicUsize,
}

impl Budget<'_> {
    fn record(&self) -> Result<()> {
        let found = self.found.fetch_add(1, Ordering::Relaxed) + 1;
        if found > self.caps.max_circuits {
            return Err(Error::CircuitCapExceeded {
                found: found - 1,
                cap: self.caps.max_circuits,
            });
        }
        Ok(())
    }

    fn exhausted(&self) -> bool {
        self.found.load(Ordering::Relaxed) > self.caps.max_circuits
    }
}

/// Chordless cycles whose least vertex is `start`, each reported once in
/// canonical orientation.
fn chordless_from(graph: &CompatGraph, start: usize, budget: &Budget) -> Result<Vec<Vec<usize>>> {
    let n = graph.vertex_count();
    let mut out = Vec::new();
    let mut near_start = vec![false; n];
    for &w in graph.neighbors(start) {
        near_start[w] = true;
    }
    // number of path vertices other than `start` adjacent to each vertex
    let mut blocked = vec![0u32; n];
    let mut on_path = vec![false; n];
    let mut path = vec![start];
    let mut cursor = vec![0usize];
    on_path[start] = true;

    while let Some(&top) = path.last() {
        if budget.exhausted() {
            return Err(Error::CircuitCapExceeded {
                found: budget.found.load(Ordering::Relaxed).saturating_sub(1),
                cap: budget.caps.max_circuits,
            });
        }
        let depth = path.len() - 1;
        let pos = cursor[depth];
        let Some(&w) = graph.neighbors(top).get(pos) else {
            path.pop();
            cursor.pop();
            on_path[top] = false;
            if depth > 0 {
                for &x in graph.neighbors(top) {
                    blocked[x] -= 1;
                }
            }
            continue;
        };
        cursor[depth] += 1;
        if w <= start || on_path[w] {
            continue;
        }
        if depth > 0 && blocked[w] != 1 {
            continue;
        }
        if depth > 0 && near_start[w] {
            if depth >= 2 && path[1] < w {
                if let Some(cap) = budget.caps.max_length {
                    if path.len() + 1 > cap {
                        return Err(Error::LengthCapExceeded { cap });
                    }
                }
                budget.record()?;
                let mut cycle = path.clone();
                cycle.push(w);
                out.push(cycle);
            }
            continue;
        }
        path.push(w);
        cursor.push(0);
        on_path[w] = true;
        for &x in graph.neighbors(w) {
            blocked[x] += 1;
        }
    }
    Ok(out)
}

/// Every chordless simple cycle of the graph, deduplicated and sorted by
/// (length, canonical vertex sequence).
pub fn enumerate_induced_circuits(
    graph: &CompatGraph,
    caps: EnumerationCaps,
) -> Result<CircuitSet> {
    let found = AtomicUsize::new(0);
    let budget = Budget {
        caps,
        found: &found,
    };
    let starts: Vec<usize> = (0..graph.vertex_count()).collect();
    #[cfg(feature = "parallel")]
    let per_start: Vec<Result<Vec<Vec<usize>>>> = starts
        .par_iter()
        .map(|&s| chordless_from(graph, s, &budget))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let per_start: Vec<Result<Vec<Vec<usize>>>> = starts
        .iter()
        .map(|&s| chordless_from(graph, s, &budget))
        .collect();

    let mut cycles = Vec::new();
    let mut first_error = None;
    for result in per_start {
        match result {
            Ok(found) => cycles.extend(found),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        return Err(match e {
            Error::CircuitCapExceeded { cap, .. } => Error::CircuitCapExceeded { found: cap, cap },
            other => other,
        });
    }
    Ok(CircuitSet::from_cycles(cycles))
}

/// Test oracle: all simple cycles by exhaustive path search, then the
/// chordless ones. Refuses graphs above `DEFAULT_ORACLE_CAP` vertices.
pub fn enumerate_circuits_bruteforce(
    graph: &CompatGraph,
    caps: EnumerationCaps,
) -> Result<CircuitSet> {
    enumerate_circuits_bruteforce_capped(graph, caps, DEFAULT_ORACLE_CAP)
}

pub fn enumerate_circuits_bruteforce_capped(
    graph: &CompatGraph,
    caps: EnumerationCaps,
    vertex_cap: usize,
) -> Result<CircuitSet> {
    if graph.vertex_count() > vertex_cap {
        return Err(Error::OracleCapExceeded {
            vertices: graph.vertex_count(),
            cap: vertex_cap,
        });
    }
    fn extend(
        graph: &CompatGraph,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let start = path[0];
        let top = *path.last().unwrap();
        for &w in graph.neighbors(top) {
            if w == start && path.len() >= 3 && path[1] < top {
                out.push(path.clone());
            }
            if w > start && !on_path[w] {
                path.push(w);
                on_path[w] = true;
                extend(graph, path, on_path, out);
                on_path[w] = false;
                path.pop();
            }
        }
    }
    let mut all = Vec::new();
    let mut on_path = vec![false; graph.vertex_count()];
    for s in 0..graph.vertex_count() {
        let mut path = vec![s];
        on_path[s] = true;
        extend(graph, &mut path, &mut on_path, &mut all);
        on_path[s] = false;
    }
    let chordless: Vec<Vec<usize>> = all
        .into_iter()
        .map(Circuit::from_canonical)
        .filter(|c| c.is_chordless(graph))
        .map(|c| c.vertices)
        .collect();
    if let Some(cap) = caps.max_length {
        if chordless.iter().any(|c| c.len() > cap) {
            return Err(Error::LengthCapExceeded { cap });
        }
    }
    if chordless.len() > caps.max_circuits {
        return Err(Error::CircuitCapExceeded {
            found: caps.max_circuits,
            cap: caps.max_circuits,
        });
    }
    Ok(CircuitSet::from_cycles(chordless))
}
