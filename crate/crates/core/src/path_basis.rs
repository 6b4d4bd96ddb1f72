//! Integer edge chains and bases of the oriented `i`–`j` path space.
//!
//! A chain assigns an integer coefficient to each edge. Traversing an edge
//! from its blue (row) end to its red (column) end contributes `+1`, the other
//! direction `-1`. A chain is an `i`–`j` path-space element when the signed
//! coefficients around every vertex sum to one at blue `i` and red `j` and to
//! zero elsewhere. Evaluated on log-entries of an exact rank-one matrix, every
//! such chain gives `log A_ij`.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_graph::{CompletionGraph, Entry, UnionFind};

/// A sparse integer combination of edges, sorted by entry, zero terms dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathChain {
    coeffs: Vec<(Entry, i64)>,
}

impl PathChain {
    pub fn from_terms(terms: impl IntoIterator<Item = (Entry, i64)>) -> Self {
        let mut coeffs: Vec<(Entry, i64)> = terms.into_iter().collect();
        coeffs.sort_unstable_by_key(|&(e, _)| e);
        let mut merged: Vec<(Entry, i64)> = Vec::with_capacity(coeffs.len());
        for (e, c) in coeffs {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        PathChain { coeffs: merged }
    }

    /// The single-edge chain `x_e`.
    pub fn edge(entry: Entry) -> Self {
        PathChain {
            coeffs: vec![(entry, 1)],
        }
    }

    pub fn terms(&self) -> &[(Entry, i64)] {
        &self.coeffs
    }

    pub fn coeff(&self, entry: Entry) -> i64 {
        self.coeffs
            .binary_search_by_key(&entry, |&(e, _)| e)
            .map_or(0, |k| self.coeffs[k].1)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of absolute coefficients; the edge count of a simple path.
    pub fn weight(&self) -> u64 {
        self.coeffs.iter().map(|&(_, c)| c.unsigned_abs()).sum()
    }

    pub fn add(&self, other: &PathChain) -> PathChain {
        PathChain::from_terms(self.coeffs.iter().chain(other.coeffs.iter()).copied())
    }

    pub fn sub(&self, other: &PathChain) -> PathChain {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PathChain {
        PathChain {
            coeffs: self.coeffs.iter().map(|&(e, c)| (e, -c)).collect(),
        }
    }

    /// Signed vertex sums: `(per row, per column)`.
    pub fn vertex_sums(&self, rows: usize, cols: usize) -> (Vec<i64>, Vec<i64>) {
        let mut blue = vec![0; rows];
        let mut red = vec![0; cols];
        for &((i, j), c) in &self.coeffs {
            blue[i] += c;
            red[j] += c;
        }
        (blue, red)
    }

    /// Vertex sums equal `scale` at blue `i` and red `j`, zero elsewhere.
    fn has_boundary(&self, rows: usize, cols: usize, (ti, tj): Entry, scale: i64) -> bool {
        let (blue, red) = self.vertex_sums(rows, cols);
        blue.iter()
            .enumerate()
            .all(|(u, &s)| s == if u == ti { scale } else { 0 })
            && red
                .iter()
                .enumerate()
                .all(|(w, &s)| s == if w == tj { scale } else { 0 })
    }

    /// Exact check that this chain is an `i`–`j` path-space element.
    pub fn satisfies_boundary(&self, rows: usize, cols: usize, target: Entry) -> bool {
        self.has_boundary(rows, cols, target, 1)
    }

    pub fn is_cycle(&self, rows: usize, cols: usize) -> bool {
        self.has_boundary(rows, cols, (0, 0), 0)
    }

    /// `sum_e c_e * f(e)`.
    pub fn evaluate(&self, mut f: impl FnMut(Entry) -> f64) -> f64 {
        self.coeffs.iter().map(|&(e, c)| c as f64 * f(e)).sum()
    }
}

/// A spanning forest over an explicit edge list.
#[derive(Debug, Clone)]
pub struct SpanningForest {
    rows: usize,
    edges: Vec<Entry>,
    in_forest: Vec<bool>,
    /// Per vertex: `(parent vertex, edge index)`; `None` at tree roots.
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    root: Vec<usize>,
}

impl SpanningForest {
    /// Kruskal-style forest: edges are offered in `order`, kept when they join two trees.
    fn build(rows: usize, cols: usize, edges: Vec<Entry>, order: &[usize]) -> Self {
        let nv = rows + cols;
        let mut uf = UnionFind::new(nv);
        let mut in_forest = vec![false; edges.len()];
        let mut tree_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for &k in order {
            let (i, j) = edges[k];
            let (b, r) = (i, rows + j);
            if uf.union(b, r) {
                in_forest[k] = true;
                tree_adj[b].push((r, k));
                tree_adj[r].push((b, k));
            }
        }

        let mut parent = vec![None; nv];
        let mut depth = vec![0; nv];
        let mut root = vec![usize::MAX; nv];
        let mut queue = VecDeque::new();
        for start in 0..nv {
            if root[start] != usize::MAX {
                continue;
            }
            root[start] = start;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &(w, k) in &tree_adj[v] {
                    if root[w] == usize::MAX {
                        root[w] = start;
                        parent[w] = Some((v, k));
                        depth[w] = depth[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }

        SpanningForest {
            rows,
            edges,
            in_forest,
            parent,
            depth,
            root,
        }
    }

    pub fn edges(&self) -> &[Entry] {
        &self.edges
    }

    /// The entries of the forest's edges, in edge-list order.
    pub fn tree_edges(&self) -> Vec<Entry> {
        self.edges
            .iter()
            .zip(&self.in_forest)
            .filter(|(_, &t)| t)
            .map(|(&e, _)| e)
            .collect()
    }

    pub fn contains(&self, entry: Entry) -> bool {
        self.index_of(entry).is_some_and(|k| self.in_forest[k])
    }

    fn index_of(&self, entry: Entry) -> Option<usize> {
        self.edges.iter().position(|&e| e == entry)
    }

    fn same_tree(&self, a: usize, b: usize) -> bool {
        self.root[a] == self.root[b]
    }

    fn is_blue(&self, v: usize) -> bool {
        v < self.rows
    }

    /// Fundamental cycle of the non-tree edge at `index`, `+1` on that edge.
    fn cycle_of(&self, index: usize) -> Result<PathChain> {
        let (i, j) = self.edges[index];
        if self.in_forest[index] {
            return Err(Error::InvalidArgument(format!(
                "edge ({i}, {j}) is a forest edge and has no fundamental cycle"
            )));
        }
        let (b, r) = (i, self.rows + j);
        if !self.same_tree(b, r) {
            return Err(Error::InvalidArgument(format!(
                "endpoints of edge ({i}, {j}) lie in different trees"
            )));
        }

        // Close the cycle by walking the tree from red `r` back to blue `b`.
        let mut terms = vec![((i, j), 1)];
        let (mut x, mut y) = (r, b);
        while x != y {
            if self.depth[x] >= self.depth[y] {
                let (p, k) = self.parent[x].expect("non-root has a parent");
                terms.push((self.edges[k], if self.is_blue(x) { 1 } else { -1 }));
                x = p;
            } else {
                let (p, k) = self.parent[y].expect("non-root has a parent");
                terms.push((self.edges[k], if self.is_blue(y) { -1 } else { 1 }));
                y = p;
            }
        }
        Ok(PathChain::from_terms(terms))
    }
}

/// Spanning forest of the completion graph that leaves out `avoid` unless it is a bridge.
pub fn spanning_forest(graph: &CompletionGraph, avoid: Option<Entry>) -> SpanningForest {
    let order: Vec<usize> = (0..graph.edges().len()).collect();
    forest_in_order(graph, graph.edges().to_vec(), &order, avoid)
}

fn forest_in_order(
    graph: &CompletionGraph,
    edges: Vec<Entry>,
    order: &[usize],
    avoid: Option<Entry>,
) -> SpanningForest {
    let avoid_idx = avoid.and_then(|a| edges.iter().position(|&e| e == a));
    let mut ordered: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| Some(k) != avoid_idx)
        .collect();
    ordered.extend(avoid_idx);
    SpanningForest::build(graph.rows(), graph.cols(), edges, &ordered)
}

/// Fundamental cycle of a non-forest edge: `+1` on `edge`, zero vertex sums everywhere.
pub fn fundamental_cycle(forest: &SpanningForest, edge: Entry) -> Result<PathChain> {
    let k = forest.index_of(edge).ok_or_else(|| {
        Error::InvalidArgument(format!("edge {edge:?} is not in the forest's edge list"))
    })?;
    forest.cycle_of(k)
}

/// An ordered basis of the `i`–`j` path space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBasis {
    pub target: Entry,
    pub chains: Vec<PathChain>,
}

impl PathBasis {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Sorted union of the chains' supports.
    pub fn support(&self) -> Vec<Entry> {
        let mut edges: Vec<Entry> = self
            .chains
            .iter()
            .flat_map(|c| c.terms().iter().map(|&(e, _)| e))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// The edge-by-chain coefficient matrix, rows indexed by [`PathBasis::support`].
    pub fn coefficient_matrix(&self) -> (Vec<Entry>, DMatrix<i64>) {
        let edges = self.support();
        let mut c = DMatrix::zeros(edges.len(), self.chains.len());
        for (col, chain) in self.chains.iter().enumerate() {
            for &(e, v) in chain.terms() {
                let row = edges.binary_search(&e).expect("edge in support");
                c[(row, col)] = v;
            }
        }
        (edges, c)
    }
}

/// Basis of the oriented path space for `entry`, using the graph's stored edge order.
///
/// Returns an empty basis when the entry is not reconstructible.
pub fn path_space_basis(graph: &CompletionGraph, entry: Entry) -> Result<PathBasis> {
    let order: Vec<usize> = (0..graph.edges().len()).collect();
    path_space_basis_with_order(graph, entry, &order)
}

/// As [`path_space_basis`], with the spanning forest grown by offering the
/// graph's edges in `order` (a permutation of edge ids).
pub fn path_space_basis_with_order(
    graph: &CompletionGraph,
    entry: Entry,
    order: &[usize],
) -> Result<PathBasis> {
    let empty = PathBasis {
        target: entry,
        chains: Vec::new(),
    };
    if !graph.is_reconstructible(entry)? {
        return Ok(empty);
    }
    if order.len() != graph.edges().len() {
        return Err(Error::InvalidArgument(format!(
            "edge order has {} ids, graph has {} edges",
            order.len(),
            graph.edges().len()
        )));
    }
    let (rows, cols) = (graph.rows(), graph.cols());
    let observed = graph.has_edge(entry);

    let mut edges = graph.edges().to_vec();
    let mut order = order.to_vec();
    if !observed {
        // dummy copy of the target edge; offered last, so it never enters the forest
        order.push(edges.len());
        edges.push(entry);
    }
    let forest = forest_in_order(graph, edges, &order, Some(entry));
    let target_idx = forest.index_of(entry).expect("target is in the edge list");
    let (b, _) = graph.endpoints(entry);

    let cycle_edges: Vec<usize> = (0..forest.edges.len())
        .filter(|&k| k != target_idx && !forest.in_forest[k])
        .filter(|&k| forest.same_tree(forest.edges[k].0, b))
        .collect();

    let canonical = |raw: PathChain| -> PathChain {
        if raw.has_boundary(rows, cols, entry, -1) {
            raw.neg()
        } else {
            raw
        }
    };

    let x = PathChain::edge(entry);
    let mut chains = Vec::with_capacity(cycle_edges.len() + 1);
    if observed {
        chains.push(canonical(x.neg()));
        if !forest.in_forest[target_idx] {
            chains.push(canonical(forest.cycle_of(target_idx)?.sub(&x)));
        }
        for &k in &cycle_edges {
            chains.push(canonical(forest.cycle_of(k)?.sub(&x)));
        }
    } else {
        let tree_path = forest.cycle_of(target_idx)?.sub(&x);
        for &k in &cycle_edges {
            chains.push(canonical(forest.cycle_of(k)?.sub(&tree_path)));
        }
        chains.insert(0, canonical(tree_path));
    }

    for chain in &chains {
        debug_assert!(chain.satisfies_boundary(rows, cols, entry));
        if !observed {
            assert_eq!(
                chain.coeff(entry),
                0,
                "dummy edge leaked into a basis chain"
            );
        }
    }
    Ok(PathBasis {
        target: entry,
        chains,
    })
}

/// A minimum-edge-count simple path from row `i` to column `j`, if one exists.
pub fn shortest_path_chain(graph: &CompletionGraph, entry: Entry) -> Result<Option<PathChain>> {
    if !graph.is_reconstructible(entry)? {
        return Ok(None);
    }
    let (src, dst) = graph.endpoints(entry);
    let nv = graph.num_vertices();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    let mut queue = VecDeque::from([src]);
    seen[src] = true;
    while let Some(v) = queue.pop_front() {
        if v == dst {
            break;
        }
        for &(w, k) in graph.neighbours(v) {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, k));
                queue.push_back(w);
            }
        }
    }
    let mut terms = Vec::new();
    let mut v = dst;
    while let Some((p, k)) = prev[v] {
        // traversed p -> v
        terms.push((graph.edges()[k], if p < graph.rows() { 1 } else { -1 }));
        v = p;
    }
    Ok(Some(PathChain::from_terms(terms)))
}
