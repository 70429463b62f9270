//! Vertex-ordered undirected simple graphs.
//!
//! Vertices are identified by their position in the declaration order; labels
//! are kept alongside. The order is part of the value: two graphs with the same
//! edges but different vertex orders compare unequal, and every operation here
//! preserves (or inherits) the order of its inputs.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Upper bound on the number of vertices, fixed by the width of [`VertexSet`].
pub const MAX_VERTICES: usize = 64;

/// A set of vertices of one host graph, stored as a bitmask over vertex indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn from_bits(bits: u64) -> Self {
        VertexSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(1 << v)
    }

    /// The first `n` vertices.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, v: usize) -> bool {
        v < 64 && self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1 << v);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VertexSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VertexSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Two sets overlap when they intersect and neither contains the other.
    pub fn overlaps(self, other: Self) -> bool {
        self.intersects(other) && !self.is_subset(other) && !other.is_subset(self)
    }

    /// Smallest vertex index in the set.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Vertex indices in ascending (vertex-order) order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Whether `label` can be used as a vertex label.
///
/// Labels are single printable tokens; characters used by the tree, set and
/// mark syntaxes are rejected.
pub fn is_valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label.ends_with(':')
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !c.is_control() && !"()#,{}*[]".contains(c))
}

/// An undirected simple graph with an explicit vertex order.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Vec<VertexSet>,
}

impl Graph {
    /// An edgeless graph on `labels`, in the given order.
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut g = Graph {
            labels: Vec::new(),
            index: HashMap::new(),
            adj: Vec::new(),
        };
        for l in labels {
            g.push_vertex(l.as_ref())?;
        }
        Ok(g)
    }

    /// A graph from labels and an edge list over those labels.
    pub fn from_edges<S: AsRef<str>>(labels: &[S], edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = Graph::new(labels)?;
        for &(u, v) in edges {
            g.add_edge_by_label(u, v)?;
        }
        Ok(g)
    }

    pub fn complete<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Ok(Graph::new(labels)?.complement())
    }

    /// Path through `labels` in order.
    pub fn path<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut g = Graph::new(labels)?;
        for i in 1..g.n() {
            g.add_edge(i - 1, i);
        }
        Ok(g)
    }

    /// Cycle through `labels` in order (at least three vertices for a simple cycle).
    pub fn cycle<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut g = Graph::path(labels)?;
        if g.n() >= 3 {
            g.add_edge(g.n() - 1, 0);
        }
        Ok(g)
    }

    fn push_vertex(&mut self, label: &str) -> Result<usize> {
        if !is_valid_label(label) {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        if self.index.contains_key(label) {
            return Err(Error::DuplicateVertex(label.to_string()));
        }
        if self.labels.len() == MAX_VERTICES {
            return Err(Error::TooManyVertices(MAX_VERTICES + 1));
        }
        let v = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), v);
        self.adj.push(VertexSet::EMPTY);
        Ok(v)
    }

    /// Adds the edge `uv` by index. Panics on a self-loop or out-of-range index.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v, "self-loop");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].remove(v);
        self.adj[v].remove(u);
    }

    pub fn add_edge_by_label(&mut self, u: &str, v: &str) -> Result<()> {
        let a = self.require(u)?;
        let b = self.require(v)?;
        if a == b {
            return Err(Error::SelfLoop(u.to_string()));
        }
        self.add_edge(a, b);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Index of `label`, or [`Error::UnknownVertex`].
    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.adj[u]
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Set of the named vertices; fails on an unknown label.
    pub fn set_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<VertexSet> {
        labels.iter().map(|l| self.require(l.as_ref())).collect()
    }

    /// Labels of `set` in vertex order.
    pub fn set_labels(&self, set: VertexSet) -> Vec<&str> {
        set.iter().map(|v| self.label(v)).collect()
    }

    /// Renders `set` as `{a,b,c}` in vertex order.
    pub fn fmt_set(&self, set: VertexSet) -> String {
        format!("{{{}}}", self.set_labels(set).join(","))
    }

    pub fn complement(&self) -> Graph {
        let all = self.vertex_set();
        let adj = (0..self.n())
            .map(|v| {
                all.difference(self.adj[v])
                    .difference(VertexSet::singleton(v))
            })
            .collect();
        Graph {
            labels: self.labels.clone(),
            index: self.index.clone(),
            adj,
        }
    }

    /// Subgraph induced by `set`; vertex order is inherited.
    pub fn induced_subgraph(&self, set: VertexSet) -> Graph {
        let keep: Vec<usize> = set.iter().filter(|&v| v < self.n()).collect();
        let mut g = Graph::new(&keep.iter().map(|&v| self.label(v)).collect::<Vec<_>>())
            .expect("labels of a valid graph are valid");
        for (i, &u) in keep.iter().enumerate() {
            for (j, &v) in keep.iter().enumerate().skip(i + 1) {
                if self.adjacent(u, v) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Subgraph induced by the named vertices.
    pub fn induced_by_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Graph> {
        Ok(self.induced_subgraph(self.set_of(labels)?))
    }

    /// Graph with vertex `v` deleted.
    pub fn without_vertex(&self, v: usize) -> Graph {
        let mut keep = self.vertex_set();
        keep.remove(v);
        self.induced_subgraph(keep)
    }

    /// BFS layers `[N0, N1, ..., Nk]` around `x`.
    ///
    /// `N0` is the neighbourhood of `x` (possibly empty) and `Nj` holds the
    /// vertices at distance `j + 1`. Vertices unreachable from `x` are gathered
    /// into one final layer.
    pub fn bfs_layers(&self, x: usize) -> Vec<VertexSet> {
        let mut seen = VertexSet::singleton(x);
        let mut layers = Vec::new();
        let mut frontier = self.adj[x];
        layers.push(frontier);
        seen = seen.union(frontier);
        loop {
            let next = frontier
                .iter()
                .fold(VertexSet::EMPTY, |acc, v| acc.union(self.adj[v]))
                .difference(seen);
            if next.is_empty() {
                break;
            }
            seen = seen.union(next);
            layers.push(next);
            frontier = next;
        }
        let rest = self.vertex_set().difference(seen);
        if !rest.is_empty() {
            layers.push(rest);
        }
        layers
    }

    /// Same as [`Graph::bfs_layers`] with the pivot given by label.
    pub fn bfs_layers_from(&self, x: &str) -> Result<Vec<VertexSet>> {
        Ok(self.bfs_layers(self.require(x)?))
    }

    fn concat(&self, other: &Graph, cross: bool) -> Result<Graph> {
        if let Some(dup) = other.labels.iter().find(|l| self.index.contains_key(*l)) {
            return Err(Error::LabelCollision(dup.clone()));
        }
        if self.n() + other.n() > MAX_VERTICES {
            return Err(Error::TooManyVertices(self.n() + other.n()));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut g = Graph::new(&labels)?;
        let off = self.n();
        for (u, v) in self.edges() {
            g.add_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.add_edge(u + off, v + off);
        }
        if cross {
            for u in 0..self.n() {
                for v in 0..other.n() {
                    g.add_edge(u, v + off);
                }
            }
        }
        Ok(g)
    }

    /// Union of the two graphs plus every edge between them.
    pub fn join(&self, other: &Graph) -> Result<Graph> {
        self.concat(other, true)
    }

    pub fn disjoint_union(&self, other: &Graph) -> Result<Graph> {
        self.concat(other, false)
    }

    /// Parses the `.mdg` text format.
    ///
    /// ```text
    /// vertices: a b c
    /// a b   # one edge per line
    /// b c
    /// ```
    ///
    /// A line holding a single label also declares a vertex, appended to the
    /// order.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut g: Option<Graph> = None;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |e: Error| match e {
                Error::Parse { .. } => e,
                other => Error::parse(line_no, other.to_string()),
            };
            if let Some(rest) = line.strip_prefix("vertices:") {
                if g.is_some() {
                    return Err(Error::parse(line_no, "repeated `vertices:` header"));
                }
                let labels: Vec<&str> = rest.split_whitespace().collect();
                g = Some(Graph::new(&labels).map_err(wrap)?);
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let graph = g.get_or_insert_with(|| Graph::new::<&str>(&[]).unwrap());
            match toks.as_slice() {
                [v] => {
                    graph.push_vertex(v).map_err(wrap)?;
                }
                [u, v] => graph.add_edge_by_label(u, v).map_err(wrap)?,
                _ => {
                    return Err(Error::parse(
                        line_no,
                        format!("expected `<label> <label>`, got `{line}`"),
                    ))
                }
            }
        }
        g.ok_or_else(|| Error::parse(0, "no vertices declared"))
    }

    /// Canonical `.mdg` text: header in vertex order, then edges by index pair.
    pub fn to_mdg(&self) -> String {
        let mut out = String::from("vertices:");
        for l in &self.labels {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
        for (u, v) in self.edges() {
            out.push_str(&self.labels[u]);
            out.push(' ');
            out.push_str(&self.labels[v]);
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph({})", self.to_mdg().trim_end().replace('\n', "; "))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_mdg())
    }
}

/// Default label for vertex `i` in generated graphs: `a`..`z`, then `v26`, `v27`, ...
pub fn generated_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("v{i}")
    }
}
