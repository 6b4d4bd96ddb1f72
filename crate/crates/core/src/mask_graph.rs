//! Observation masks and their bipartite completion graphs.
//!
//! Row `i` of an `m x n` mask is the blue vertex `i`, column `j` is the red
//! vertex `m + j`. Every known entry `(i, j)` is one edge, oriented from blue
//! to red. For rank one, an entry is uniquely reconstructible exactly when its
//! two endpoints lie in the same connected component.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(row, col)` position in the matrix, 0-based.
pub type Entry = (usize, usize);

/// The set of observed positions of an `m x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    rows: usize,
    cols: usize,
    /// Known positions, sorted row-major.
    known: Vec<Entry>,
}

impl Mask {
    /// Builds a mask from a list of known positions.
    ///
    /// Out-of-range and duplicate positions are rejected.
    pub fn new(rows: usize, cols: usize, known: impl IntoIterator<Item = Entry>) -> Result<Self> {
        let mut known: Vec<Entry> = known.into_iter().collect();
        for &(i, j) in &known {
            if i >= rows || j >= cols {
                return Err(Error::OutOfRange(i, j, rows, cols));
            }
        }
        known.sort_unstable();
        if let Some(w) = known.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEntry(w[0].0, w[0].1));
        }
        Ok(Mask { rows, cols, known })
    }

    /// Builds a mask from a dense 0/1 pattern; every row must have the same length.
    pub fn from_pattern(pattern: &[Vec<bool>]) -> Result<Self> {
        let rows = pattern.len();
        let cols = pattern.first().map_or(0, Vec::len);
        if let Some(bad) = pattern.iter().position(|r| r.len() != cols) {
            return Err(Error::InvalidArgument(format!(
                "row {bad} has {} cells, expected {cols}",
                pattern[bad].len()
            )));
        }
        let known = pattern.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &k)| k)
                .map(move |(j, _)| (i, j))
        });
        Mask::new(rows, cols, known)
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        let known = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .collect();
        Mask { rows, cols, known }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn known(&self) -> &[Entry] {
        &self.known
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn contains(&self, entry: Entry) -> bool {
        self.known.binary_search(&entry).is_ok()
    }

    /// A copy of this mask with `entry` unobserved.
    pub fn without(&self, entry: Entry) -> Self {
        let known = self.known.iter().copied().filter(|&e| e != entry).collect();
        Mask {
            rows: self.rows,
            cols: self.cols,
            known,
        }
    }
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns false if they were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Counts of one connected component of the completion graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSize {
    pub blue: usize,
    pub red: usize,
    pub edges: usize,
}

/// The bipartite graph whose bipartite adjacency matrix is the mask.
#[derive(Debug, Clone)]
pub struct CompletionGraph {
    rows: usize,
    cols: usize,
    edges: Vec<Entry>,
    edge_ids: HashMap<Entry, usize>,
    /// Per vertex: `(neighbour vertex, edge id)`.
    adjacency: Vec<Vec<(usize, usize)>>,
    /// Per vertex component label, numbered in order of first vertex.
    component: Vec<usize>,
    components: Vec<ComponentSize>,
}

impl CompletionGraph {
    /// Builds the completion graph of `mask`. Edges keep the mask's row-major order.
    pub fn build(mask: &Mask) -> Self {
        let (rows, cols) = (mask.rows(), mask.cols());
        let nv = rows + cols;
        let edges = mask.known().to_vec();
        let mut adjacency = vec![Vec::new(); nv];
        let mut uf = UnionFind::new(nv);
        let mut edge_ids = HashMap::with_capacity(edges.len());
        for (id, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push((rows + j, id));
            adjacency[rows + j].push((i, id));
            uf.union(i, rows + j);
            edge_ids.insert((i, j), id);
        }

        let mut label_of_root = HashMap::new();
        let mut component = Vec::with_capacity(nv);
        let mut components: Vec<ComponentSize> = Vec::new();
        for v in 0..nv {
            let root = uf.find(v);
            let label = *label_of_root.entry(root).or_insert_with(|| {
                components.push(ComponentSize {
                    blue: 0,
                    red: 0,
                    edges: 0,
                });
                components.len() - 1
            });
            if v < rows {
                components[label].blue += 1;
            } else {
                components[label].red += 1;
            }
            component.push(label);
        }
        for &(i, _) in &edges {
            components[component[i]].edges += 1;
        }

        CompletionGraph {
            rows,
            cols,
            edges,
            edge_ids,
            adjacency,
            component,
            components,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_vertices(&self) -> usize {
        self.rows + self.cols
    }

    /// Known entries in row-major order; the position is the edge id.
    pub fn edges(&self) -> &[Entry] {
        &self.edges
    }

    pub fn edge_id(&self, entry: Entry) -> Option<usize> {
        self.edge_ids.get(&entry).copied()
    }

    pub fn has_edge(&self, entry: Entry) -> bool {
        self.edge_ids.contains_key(&entry)
    }

    pub fn blue(&self, row: usize) -> usize {
        row
    }

    pub fn red(&self, col: usize) -> usize {
        self.rows + col
    }

    /// Vertex endpoints `(blue, red)` of an entry.
    pub fn endpoints(&self, (i, j): Entry) -> (usize, usize) {
        (i, self.rows + j)
    }

    pub(crate) fn neighbours(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    pub fn component_id(&self, vertex: usize) -> usize {
        self.component[vertex]
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component_size(&self, label: usize) -> ComponentSize {
        self.components[label]
    }

    fn check_entry(&self, (i, j): Entry) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            Err(Error::OutOfRange(i, j, self.rows, self.cols))
        } else {
            Ok(())
        }
    }

    /// Whether `entry` lies in the rank-one transitive closure of the graph.
    pub fn is_reconstructible(&self, entry: Entry) -> Result<bool> {
        self.check_entry(entry)?;
        let (b, r) = self.endpoints(entry);
        Ok(self.component[b] == self.component[r])
    }

    /// All reconstructible positions, known or not, in row-major order.
    pub fn reconstructible_set(&self) -> Vec<Entry> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.component[i] == self.component[self.rows + j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Component partition as sorted vertex lists, independent of labelling.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.components.len()];
        for (v, &c) in self.component.iter().enumerate() {
            parts[c].push(v);
        }
        parts.sort();
        parts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(rows: usize, cols: usize, known: &[Entry]) -> CompletionGraph {
        CompletionGraph::build(&Mask::new(rows, cols, known.iter().copied()).unwrap())
    }

    #[test]
    fn full_two_by_two_is_connected() {
        let g = CompletionGraph::build(&Mask::full(2, 2));
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.num_components(), 1);
        assert_eq!(g.reconstructible_set().len(), 4);
    }

    #[test]
    fn single_edge_leaves_isolated_vertices() {
        let g = graph(2, 2, &[(0, 0)]);
        assert_eq!(g.num_components(), 3);
        assert_eq!(g.component_id(g.blue(0)), g.component_id(g.red(0)));
        assert_ne!(g.component_id(g.blue(1)), g.component_id(g.red(1)));
        assert!(!g.is_reconstructible((1, 1)).unwrap());
        assert_eq!(g.reconstructible_set(), vec![(0, 0)]);
    }

    #[test]
    fn three_entries_close_the_four_cycle() {
        let g = graph(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        assert!(g.is_reconstructible((1, 1)).unwrap());
    }

    #[test]
    fn diagonal_mask_is_fully_disconnected() {
        let g = graph(3, 3, &[(0, 0), (1, 1), (2, 2)]);
        assert!(!g.is_reconstructible((0, 1)).unwrap());
        assert_eq!(g.num_components(), 3);
        assert_eq!(g.reconstructible_set(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn empty_mask_has_no_edges() {
        let g = graph(3, 2, &[]);
        assert_eq!(g.num_components(), 5);
        assert!(g.reconstructible_set().is_empty());
    }

    #[test]
    fn two_components_count_products() {
        // {row0,row1,col0} and {row2,col1,col2}
        let g = graph(3, 3, &[(0, 0), (1, 0), (2, 1), (2, 2)]);
        assert_eq!(g.num_components(), 2);
        // 2*1 + 1*2
        assert_eq!(g.reconstructible_set().len(), 4);
    }

    #[test]
    fn out_of_range_query_is_an_error() {
        let g = graph(2, 2, &[(0, 0)]);
        assert_eq!(
            g.is_reconstructible((2, 0)),
            Err(Error::OutOfRange(2, 0, 2, 2))
        );
    }

    #[test]
    fn duplicates_and_out_of_range_are_rejected() {
        assert_eq!(
            Mask::new(2, 2, [(0, 1), (0, 1)]),
            Err(Error::DuplicateEntry(0, 1))
        );
        assert_eq!(
            Mask::new(2, 2, [(0, 2)]),
            Err(Error::OutOfRange(0, 2, 2, 2))
        );
    }

    #[test]
    fn edges_are_row_major() {
        let g = graph(2, 3, &[(1, 2), (0, 1), (1, 0)]);
        assert_eq!(g.edges(), &[(0, 1), (1, 0), (1, 2)]);
        assert_eq!(g.edge_id((1, 0)), Some(1));
    }

    #[test]
    fn component_sizes_add_up() {
        let g = graph(3, 3, &[(0, 0), (1, 0), (2, 1), (2, 2)]);
        let c = g.component_size(g.component_id(0));
        assert_eq!(
            c,
            ComponentSize {
                blue: 2,
                red: 1,
                edges: 2
            }
        );
    }
}
