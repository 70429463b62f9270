//! The refinement step of the pivot-based decomposition algorithm, and a
//! checker for its claimed invariant.
//!
//! Around a pivot `x` the vertex set is laid out as an ordered forest
//! `T(N0), x, T(N1), ..., T(Nk)`, where `N0` is the neighbourhood of `x`, the
//! later `Nj` are BFS distance layers, and every `T(..)` is the decomposition
//! tree of the induced subgraph. Refinement then walks the vertices; each one
//! splits forest nodes along the far endpoints of its active edges and marks
//! what it touched with the direction of the split.
//!
//! Nodes live in an arena and are never removed, so node ids are stable and
//! marks recorded on a node survive its replacement. A root replaced by a
//! split is flagged dead and is no longer reachable from the forest entries.
//!
//! The checker compares the refined forest with the oracle's strong modules:
//! a strong module avoiding the pivot is expected to appear as a node none of
//! whose children are marked.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::oracle::Oracle;
use crate::tree::{MDTree, NodeKind};

pub type NodeId = usize;

/// Direction of a split, and of the mark it leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    fn letter(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accumulated split directions on a node. Empty means unmarked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Mark {
    left: bool,
    right: bool,
}

impl Mark {
    pub fn is_marked(self) -> bool {
        self.left || self.right
    }

    pub fn has(self, side: Side) -> bool {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn add(&mut self, side: Side) {
        match side {
            Side::Left => self.left = true,
            Side::Right => self.right = true,
        }
    }

    /// `""`, `"*L"`, `"*R"` or `"*LR"`.
    pub fn suffix(self) -> &'static str {
        match (self.left, self.right) {
            (false, false) => "",
            (true, false) => "*L",
            (false, true) => "*R",
            (true, true) => "*LR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FKind {
    Leaf(usize),
    Inner(NodeKind),
}

/// A forest node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FNode {
    pub kind: FKind,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub mark: Mark,
    pub leafset: VertexSet,
    pub alive: bool,
}

impl FNode {
    pub fn is_prime(&self) -> bool {
        self.kind == FKind::Inner(NodeKind::Prime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Tree(NodeId),
    Pivot,
}

/// The ordered list of trees around a pivot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedForest {
    nodes: Vec<FNode>,
    entries: Vec<Entry>,
    pivot: usize,
}

/// Builds `T(N0), x, T(N1), ..., T(Nk)` for pivot `x`, each layer tree computed
/// by the oracle on the induced subgraph. An empty `N0` contributes no entry.
pub fn build_ordered_forest(oracle: &Oracle, g: &Graph, x: usize) -> Result<OrderedForest> {
    if x >= g.n() {
        return Err(Error::UnknownVertex(format!("#{x}")));
    }
    oracle.check_size(g)?;
    let layers = g.bfs_layers(x);
    let mut forest = OrderedForest {
        nodes: Vec::new(),
        entries: Vec::new(),
        pivot: x,
    };
    for (j, layer) in layers.iter().enumerate() {
        if !layer.is_empty() {
            let tree = oracle.build_md_tree(&g.induced_subgraph(*layer))?;
            let root = forest.add_tree(g, &tree, None)?;
            forest.entries.push(Entry::Tree(root));
        }
        if j == 0 {
            forest.entries.push(Entry::Pivot);
        }
    }
    Ok(forest)
}

impl OrderedForest {
    fn add_tree(&mut self, g: &Graph, t: &MDTree, parent: Option<NodeId>) -> Result<NodeId> {
        let id = self.nodes.len();
        match t {
            MDTree::Leaf(l) => {
                let v = g.require(l)?;
                self.nodes.push(FNode {
                    kind: FKind::Leaf(v),
                    children: vec![],
                    parent,
                    mark: Mark::default(),
                    leafset: VertexSet::singleton(v),
                    alive: true,
                });
            }
            MDTree::Node { kind, children } => {
                self.nodes.push(FNode {
                    kind: FKind::Inner(*kind),
                    children: vec![],
                    parent,
                    mark: Mark::default(),
                    leafset: VertexSet::EMPTY,
                    alive: true,
                });
                let mut ids = Vec::with_capacity(children.len());
                let mut leafset = VertexSet::EMPTY;
                for c in children {
                    let cid = self.add_tree(g, c, Some(id))?;
                    leafset = leafset.union(self.nodes[cid].leafset);
                    ids.push(cid);
                }
                self.nodes[id].children = ids;
                self.nodes[id].leafset = leafset;
            }
        }
        Ok(id)
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn pivot_position(&self) -> usize {
        self.entries
            .iter()
            .position(|e| *e == Entry::Pivot)
            .expect("forest has a pivot slot")
    }

    pub fn node(&self, id: NodeId) -> &FNode {
        &self.nodes[id]
    }

    /// Number of nodes ever created, dead ones included.
    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Roots of the forest trees, left to right.
    pub fn roots(&self) -> Vec<NodeId> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                Entry::Tree(r) => Some(*r),
                Entry::Pivot => None,
            })
            .collect()
    }

    fn roots_on(&self, side: Side) -> Vec<NodeId> {
        let p = self.pivot_position();
        self.entries
            .iter()
            .enumerate()
            .filter(|(i, _)| match side {
                Side::Left => *i < p,
                Side::Right => *i > p,
            })
            .filter_map(|(_, e)| match e {
                Entry::Tree(r) => Some(*r),
                Entry::Pivot => None,
            })
            .collect()
    }

    /// Live nodes reachable from the entries, in preorder.
    pub fn live_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        for r in self.roots() {
            self.preorder(r, &mut out);
        }
        out
    }

    fn preorder(&self, id: NodeId, out: &mut Vec<NodeId>) {
        out.push(id);
        for &c in &self.nodes[id].children {
            self.preorder(c, out);
        }
    }

    /// Leaves left to right, the pivot excluded.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.live_nodes()
            .into_iter()
            .filter_map(|id| match self.nodes[id].kind {
                FKind::Leaf(v) => Some(v),
                FKind::Inner(_) => None,
            })
            .collect()
    }

    /// Root of the tree holding vertex `v`, with its entry index.
    fn entry_of(&self, v: usize) -> Option<(usize, NodeId)> {
        self.entries.iter().enumerate().find_map(|(i, e)| match e {
            Entry::Tree(r) if self.nodes[*r].leafset.contains(v) => Some((i, *r)),
            _ => None,
        })
    }

    /// Every (node, direction) mark in the arena, dead nodes included.
    pub fn marks(&self) -> BTreeSet<(NodeId, Side)> {
        let mut out = BTreeSet::new();
        for (id, n) in self.nodes.iter().enumerate() {
            for side in [Side::Left, Side::Right] {
                if n.mark.has(side) {
                    out.insert((id, side));
                }
            }
        }
        out
    }

    /// True when some child of `id` carries a mark.
    pub fn has_marked_child(&self, id: NodeId) -> bool {
        self.nodes[id]
            .children
            .iter()
            .any(|&c| self.nodes[c].mark.is_marked())
    }

    /// Forest text: trees in the tree format with mark suffixes, the pivot as `[x]`.
    pub fn render(&self, g: &Graph) -> String {
        let mut parts = Vec::new();
        for e in &self.entries {
            match e {
                Entry::Pivot => parts.push(format!("[{}]", g.label(self.pivot))),
                Entry::Tree(r) => {
                    let mut s = String::new();
                    self.render_node(g, *r, &mut s);
                    parts.push(s);
                }
            }
        }
        parts.join(" ")
    }

    fn render_node(&self, g: &Graph, id: NodeId, out: &mut String) {
        let n = &self.nodes[id];
        match n.kind {
            FKind::Leaf(v) => {
                out.push_str(g.label(v));
                out.push_str(n.mark.suffix());
            }
            FKind::Inner(kind) => {
                out.push('(');
                out.push_str(kind.as_str());
                out.push_str(n.mark.suffix());
                for &c in &n.children {
                    out.push(' ');
                    self.render_node(g, c, out);
                }
                out.push(')');
            }
        }
    }

    fn describe(&self, g: &Graph, id: NodeId) -> String {
        let n = &self.nodes[id];
        let kind = match n.kind {
            FKind::Leaf(_) => "leaf",
            FKind::Inner(k) => k.as_str(),
        };
        format!("#{id} {kind} {}", g.fmt_set(n.leafset))
    }

    /// Refines the whole forest by `set`, all splits and marks
    /// taking direction `side`.
    pub fn refine_by_set(&mut self, set: VertexSet, side: Side) -> Result<Vec<RefineEvent>> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        if set.contains(self.pivot) {
            return Err(Error::PivotInSet(format!("#{}", self.pivot)));
        }
        let mut events = Vec::new();
        let roots = self.roots();
        self.refine_trees(&roots, set, side, &mut events);
        Ok(events)
    }

    fn refine_trees(
        &mut self,
        roots: &[NodeId],
        set: VertexSet,
        side: Side,
        events: &mut Vec<RefineEvent>,
    ) {
        let mut maximal = Vec::new();
        for &r in roots {
            self.maximal_subtrees(r, set, &mut maximal);
        }
        let mut parents: Vec<NodeId> = Vec::new();
        for &t in &maximal {
            events.push(RefineEvent::SubtreeIdentified {
                node: t,
                leafset: self.nodes[t].leafset,
            });
            if let Some(p) = self.nodes[t].parent {
                if !parents.contains(&p) {
                    parents.push(p);
                }
            }
        }
        let (prime, degenerate): (Vec<NodeId>, Vec<NodeId>) =
            parents.into_iter().partition(|&p| self.nodes[p].is_prime());

        for p in degenerate {
            let (a, b): (Vec<NodeId>, Vec<NodeId>) = self.nodes[p]
                .children
                .iter()
                .partition(|c| maximal.contains(c));
            let FKind::Inner(kind) = self.nodes[p].kind else {
                unreachable!("parents are internal")
            };
            let at_root = self.nodes[p].parent.is_none();
            let (ta, tb) = self.apply_split(p, &a, &b, side);
            events.push(RefineEvent::SplitApplied {
                parent: p,
                kind,
                at_root,
                side,
                a,
                b,
                ta,
                tb,
            });
            for t in [ta, tb] {
                self.mark(t, side, None, events);
                self.mark_ancestors(t, side, events);
            }
        }
        for p in prime {
            for c in self.nodes[p].children.clone() {
                self.mark(c, side, None, events);
            }
            self.mark(p, side, None, events);
            self.mark_ancestors(p, side, events);
        }
    }

    fn maximal_subtrees(&self, id: NodeId, set: VertexSet, out: &mut Vec<NodeId>) {
        let ls = self.nodes[id].leafset;
        if ls.is_subset(set) {
            out.push(id);
        } else if ls.intersects(set) {
            for &c in &self.nodes[id].children {
                self.maximal_subtrees(c, set, out);
            }
        }
    }

    fn new_node(&mut self, kind: NodeKind, children: &[NodeId]) -> NodeId {
        let id = self.nodes.len();
        let leafset = children
            .iter()
            .fold(VertexSet::EMPTY, |s, &c| s.union(self.nodes[c].leafset));
        self.nodes.push(FNode {
            kind: FKind::Inner(kind),
            children: children.to_vec(),
            parent: None,
            mark: Mark::default(),
            leafset,
            alive: true,
        });
        for &c in children {
            self.nodes[c].parent = Some(id);
        }
        id
    }

    /// Splits the children of `p` into the groups `a` and `b`. A group of more
    /// than one tree is unified under a new root of `p`'s kind. A root `p` is
    /// replaced in the entry list by the two groups in split order; otherwise
    /// the two groups become `p`'s only children.
    fn apply_split(
        &mut self,
        p: NodeId,
        a: &[NodeId],
        b: &[NodeId],
        side: Side,
    ) -> (NodeId, NodeId) {
        let FKind::Inner(kind) = self.nodes[p].kind else {
            panic!("split of a leaf")
        };
        let mut group = |g: &[NodeId]| {
            if g.len() == 1 {
                g[0]
            } else {
                self.new_node(kind, g)
            }
        };
        let ta = group(a);
        let tb = group(b);
        if self.nodes[p].parent.is_none() {
            let idx = self
                .entries
                .iter()
                .position(|e| *e == Entry::Tree(p))
                .expect("root node is a forest entry");
            let pair = match side {
                Side::Left => [Entry::Tree(ta), Entry::Tree(tb)],
                Side::Right => [Entry::Tree(tb), Entry::Tree(ta)],
            };
            self.entries.splice(idx..=idx, pair);
            self.nodes[ta].parent = None;
            self.nodes[tb].parent = None;
            self.nodes[p].alive = false;
            self.nodes[p].children.clear();
        } else {
            self.nodes[p].children = vec![ta, tb];
            self.nodes[ta].parent = Some(p);
            self.nodes[tb].parent = Some(p);
        }
        (ta, tb)
    }

    /// Marks `id`; a newly marked prime node passes the mark to its children.
    fn mark(
        &mut self,
        id: NodeId,
        side: Side,
        from: Option<NodeId>,
        events: &mut Vec<RefineEvent>,
    ) {
        if self.nodes[id].mark.has(side) {
            return;
        }
        self.nodes[id].mark.add(side);
        let leafset = self.nodes[id].leafset;
        events.push(match from {
            None => RefineEvent::NodeMarked {
                node: id,
                side,
                leafset,
            },
            Some(from) => RefineEvent::PrimePropagation {
                from,
                node: id,
                side,
                leafset,
            },
        });
        if self.nodes[id].is_prime() {
            for c in self.nodes[id].children.clone() {
                self.mark(c, side, Some(id), events);
            }
        }
    }

    fn mark_ancestors(&mut self, id: NodeId, side: Side, events: &mut Vec<RefineEvent>) {
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            self.mark(p, side, None, events);
            cur = self.nodes[p].parent;
        }
    }

    /// Re-applies one recorded event. Marks are set without propagation since
    /// propagated marks are recorded as events of their own.
    pub fn apply_event(&mut self, event: &RefineEvent) -> Result<()> {
        match event {
            RefineEvent::SplitApplied {
                parent,
                a,
                b,
                side,
                ta,
                tb,
                ..
            } => {
                if *parent >= self.nodes.len() || !self.nodes[*parent].alive {
                    return Err(Error::Search(format!("replay: node #{parent} is not live")));
                }
                let got = self.apply_split(*parent, a, b, *side);
                if got != (*ta, *tb) {
                    return Err(Error::Search(format!(
                        "replay: split of #{parent} diverged"
                    )));
                }
            }
            RefineEvent::NodeMarked { node, side, .. }
            | RefineEvent::PrimePropagation { node, side, .. } => {
                let n = self
                    .nodes
                    .get_mut(*node)
                    .ok_or_else(|| Error::Search(format!("replay: unknown node #{node}")))?;
                n.mark.add(*side);
            }
            RefineEvent::VertexProcessed { .. }
            | RefineEvent::SubtreeIdentified { .. }
            | RefineEvent::SelfRefine { .. } => {}
        }
        Ok(())
    }
}

/// One step of a refinement run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefineEvent {
    /// `vertex` starts its step; `set` is the far side of its active edges.
    VertexProcessed {
        vertex: usize,
        position: Side,
        set: VertexSet,
    },
    /// The step's set reaches into the tree that holds the vertex itself.
    SelfRefine {
        vertex: usize,
        root: NodeId,
    },
    SubtreeIdentified {
        node: NodeId,
        leafset: VertexSet,
    },
    SplitApplied {
        parent: NodeId,
        kind: NodeKind,
        at_root: bool,
        side: Side,
        a: Vec<NodeId>,
        b: Vec<NodeId>,
        ta: NodeId,
        tb: NodeId,
    },
    NodeMarked {
        node: NodeId,
        side: Side,
        leafset: VertexSet,
    },
    PrimePropagation {
        from: NodeId,
        node: NodeId,
        side: Side,
        leafset: VertexSet,
    },
}

impl RefineEvent {
    pub fn kind_name(&self) -> &'static str {
        match self {
            RefineEvent::VertexProcessed { .. } => "vertex-processed",
            RefineEvent::SelfRefine { .. } => "self-refine",
            RefineEvent::SubtreeIdentified { .. } => "subtree-identified",
            RefineEvent::SplitApplied { .. } => "split-applied",
            RefineEvent::NodeMarked { .. } => "node-marked",
            RefineEvent::PrimePropagation { .. } => "prime-propagation",
        }
    }

    /// Payload text. `forest` only supplies node kinds, which never change, so
    /// any forest of the same run will do.
    pub fn payload(&self, g: &Graph, forest: &OrderedForest) -> String {
        let ids = |v: &[NodeId]| {
            v.iter()
                .map(|i| format!("#{i}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            RefineEvent::VertexProcessed {
                vertex,
                position,
                set,
            } => {
                format!("{} {} X={}", g.label(*vertex), position, g.fmt_set(*set))
            }
            RefineEvent::SelfRefine { vertex, root } => {
                format!("{} {}", g.label(*vertex), forest.describe(g, *root))
            }
            RefineEvent::SubtreeIdentified { node, .. } => forest.describe(g, *node),
            RefineEvent::SplitApplied {
                parent,
                kind,
                at_root,
                side,
                a,
                b,
                ta,
                tb,
            } => format!(
                "#{parent} {kind} {} {side} A=[{}] B=[{}] Ta=#{ta} Tb=#{tb}",
                if *at_root { "root" } else { "inner" },
                ids(a),
                ids(b)
            ),
            RefineEvent::NodeMarked { node, side, .. } => {
                format!("{} {}", forest.describe(g, *node), side.letter())
            }
            RefineEvent::PrimePropagation {
                from, node, side, ..
            } => {
                format!("#{from} -> {} {}", forest.describe(g, *node), side.letter())
            }
        }
    }
}

/// Renders a trace as `<step#> <event-kind> <payload>` lines, steps from 1.
pub fn render_trace(g: &Graph, forest: &OrderedForest, events: &[RefineEvent]) -> Vec<String> {
    events
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{} {} {}", i + 1, e.kind_name(), e.payload(g, forest)))
        .collect()
}

/// Edges incident to the pivot or joining two different BFS layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveEdgeSet {
    edges: BTreeSet<(usize, usize)>,
}

impl ActiveEdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Far endpoints of the active edges at `v`.
    pub fn incident(&self, v: usize) -> VertexSet {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

pub fn active_edges(g: &Graph, x: usize) -> ActiveEdgeSet {
    let layers = g.bfs_layers(x);
    let layer_of = |v: usize| layers.iter().position(|l| l.contains(v));
    let edges = g
        .edges()
        .filter(|&(u, v)| u == x || v == x || layer_of(u) != layer_of(v))
        .collect();
    ActiveEdgeSet { edges }
}

/// Initial forest, final forest and the full event trace of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefineRun {
    pub initial: OrderedForest,
    pub forest: OrderedForest,
    pub order: Vec<usize>,
    pub events: Vec<RefineEvent>,
}

impl RefineRun {
    pub fn trace(&self, g: &Graph) -> Vec<String> {
        render_trace(g, &self.forest, &self.events)
    }

    /// Rebuilds the final forest from the initial one and the events.
    pub fn replay(&self) -> Result<OrderedForest> {
        let mut f = self.initial.clone();
        for e in &self.events {
            f.apply_event(e)?;
        }
        Ok(f)
    }
}

/// Non-pivot vertices in left-to-right leaf order of the initial forest.
pub fn default_order(oracle: &Oracle, g: &Graph, x: usize) -> Result<Vec<usize>> {
    Ok(build_ordered_forest(oracle, g, x)?.leaf_order())
}

/// Runs the refinement loop over `order`, or the default order.
///
/// A vertex left of the pivot refines every tree with left splits. A vertex
/// right of the pivot refines trees left of the pivot with left splits and
/// trees right of it with right splits.
pub fn refine_all(
    oracle: &Oracle,
    g: &Graph,
    x: usize,
    order: Option<&[usize]>,
) -> Result<RefineRun> {
    let initial = build_ordered_forest(oracle, g, x)?;
    let order = match order {
        Some(o) => {
            check_order(g, x, o)?;
            o.to_vec()
        }
        None => initial.leaf_order(),
    };
    let active = active_edges(g, x);
    let mut forest = initial.clone();
    let mut events = Vec::new();
    for &v in &order {
        let mut set = active.incident(v);
        set.remove(v);
        set.remove(x);
        let (entry_idx, own_root) = forest
            .entry_of(v)
            .expect("every non-pivot vertex is in a tree");
        let position = if entry_idx < forest.pivot_position() {
            Side::Left
        } else {
            Side::Right
        };
        events.push(RefineEvent::VertexProcessed {
            vertex: v,
            position,
            set,
        });
        if set.is_empty() {
            continue;
        }
        if forest.nodes[own_root].leafset.intersects(set) {
            events.push(RefineEvent::SelfRefine {
                vertex: v,
                root: own_root,
            });
        }
        match position {
            Side::Left => {
                let roots = forest.roots();
                forest.refine_trees(&roots, set, Side::Left, &mut events);
            }
            Side::Right => {
                let left = forest.roots_on(Side::Left);
                let right = forest.roots_on(Side::Right);
                forest.refine_trees(&left, set, Side::Left, &mut events);
                forest.refine_trees(&right, set, Side::Right, &mut events);
            }
        }
    }
    Ok(RefineRun {
        initial,
        forest,
        order,
        events,
    })
}

fn check_order(g: &Graph, x: usize, order: &[usize]) -> Result<()> {
    let mut seen = VertexSet::EMPTY;
    for &v in order {
        if v >= g.n() {
            return Err(Error::BadOrder(format!("vertex #{v} out of range")));
        }
        if v == x {
            return Err(Error::BadOrder(format!(
                "contains the pivot {}",
                g.label(x)
            )));
        }
        if seen.contains(v) {
            return Err(Error::BadOrder(format!("{} repeated", g.label(v))));
        }
        seen.insert(v);
    }
    let mut want = g.vertex_set();
    want.remove(x);
    if seen != want {
        return Err(Error::BadOrder(format!(
            "missing {}",
            g.fmt_set(want.difference(seen))
        )));
    }
    Ok(())
}

/// Disagreement between unmarked-children nodes and strong modules avoiding
/// the pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMismatch {
    /// A forest node without marked children that is not such a strong module.
    UnmarkedNotStrong(VertexSet),
    /// Such a strong module with no forest node free of marked children.
    StrongNotUnmarked(VertexSet),
}

/// Outcome of comparing refinement against the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma4Report {
    pub pivot: usize,
    pub order: Vec<usize>,
    /// Leafsets of live forest nodes with no marked child, in preorder.
    pub unmarked_leafsets: Vec<VertexSet>,
    /// Strong modules not containing the pivot, ascending bitmask order.
    pub target_family: Vec<VertexSet>,
    /// Target modules whose forest node has a marked child.
    pub violations_necessary: Vec<VertexSet>,
    pub violations_exact: Vec<ExactMismatch>,
    pub trace: Vec<String>,
    pub final_forest: String,
}

impl Lemma4Report {
    pub fn violates(&self) -> bool {
        !self.violations_necessary.is_empty()
    }
}

/// Runs refinement and checks the refined forest against the strong modules.
pub fn lemma4_check(
    oracle: &Oracle,
    g: &Graph,
    x: usize,
    order: Option<&[usize]>,
) -> Result<Lemma4Report> {
    let run = refine_all(oracle, g, x, order)?;
    lemma4_from_run(oracle, g, &run)
}

pub fn lemma4_from_run(oracle: &Oracle, g: &Graph, run: &RefineRun) -> Result<Lemma4Report> {
    let forest = &run.forest;
    let x = forest.pivot();
    let target_family: Vec<VertexSet> = oracle
        .strong_modules(g)?
        .into_iter()
        .filter(|m| !m.contains(x))
        .collect();
    let live = forest.live_nodes();
    let unmarked_leafsets: Vec<VertexSet> = live
        .iter()
        .filter(|&&id| !forest.has_marked_child(id))
        .map(|&id| forest.node(id).leafset)
        .collect();
    let violations_necessary = target_family
        .iter()
        .copied()
        .filter(|&m| {
            live.iter()
                .any(|&id| forest.node(id).leafset == m && forest.has_marked_child(id))
        })
        .collect();
    let mut violations_exact: Vec<ExactMismatch> = unmarked_leafsets
        .iter()
        .filter(|s| !target_family.contains(s))
        .map(|&s| ExactMismatch::UnmarkedNotStrong(s))
        .collect();
    violations_exact.extend(
        target_family
            .iter()
            .filter(|m| !unmarked_leafsets.contains(m))
            .map(|&m| ExactMismatch::StrongNotUnmarked(m)),
    );
    Ok(Lemma4Report {
        pivot: x,
        order: run.order.clone(),
        unmarked_leafsets,
        target_family,
        violations_necessary,
        violations_exact,
        trace: run.trace(g),
        final_forest: forest.render(g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn oracle() -> Oracle {
        Oracle::default()
    }

    #[test]
    fn forest_of_sample_graph() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        let f = build_ordered_forest(&oracle(), &g, i).unwrap();
        assert_eq!(
            f.render(&g),
            "(series a (prime b c e (parallel g h)) d) [i] f"
        );
        assert_eq!(f.pivot_position(), 1);
    }

    #[test]
    fn forest_of_small_graphs() {
        let k2 = Graph::path(&["u", "v"]).unwrap();
        assert_eq!(
            build_ordered_forest(&oracle(), &k2, 0).unwrap().render(&k2),
            "v [u]"
        );
        let p3 = Graph::path(&["u", "v", "w"]).unwrap();
        assert_eq!(
            build_ordered_forest(&oracle(), &p3, 0).unwrap().render(&p3),
            "v [u] w"
        );
        let iso = Graph::new(&["u", "v", "w"]).unwrap();
        assert_eq!(
            build_ordered_forest(&oracle(), &iso, 0)
                .unwrap()
                .render(&iso),
            "[u] (parallel v w)"
        );
        let k1 = Graph::new(&["u"]).unwrap();
        assert_eq!(
            build_ordered_forest(&oracle(), &k1, 0).unwrap().render(&k1),
            "[u]"
        );
    }

    #[test]
    fn active_edges_of_sample_graph() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        let act = active_edges(&g, i);
        assert_eq!(act.len(), 12);
        let f = g.require("f").unwrap();
        assert_eq!(
            act.incident(f),
            g.set_of(&["b", "c", "e", "g", "h"]).unwrap()
        );
        assert_eq!(act.incident(i), g.neighbors(i));
        let k2 = Graph::path(&["u", "v"]).unwrap();
        assert_eq!(
            active_edges(&k2, 0).iter().collect::<Vec<_>>(),
            vec![(0, 1)]
        );
    }

    #[test]
    fn sample_step_for_f() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        let mut f = build_ordered_forest(&oracle(), &g, i).unwrap();
        let x = g.set_of(&fixtures::SAMPLE_VIOLATION).unwrap();
        let events = f.refine_by_set(x, Side::Left).unwrap();
        assert_eq!(
            f.render(&g),
            "(prime*L b*L c*L e*L (parallel*L g h)) (series*L a d) [i] f"
        );
        assert!(matches!(events[0], RefineEvent::SubtreeIdentified { .. }));
        assert!(matches!(
            events[1],
            RefineEvent::SplitApplied { at_root: true, .. }
        ));
    }

    #[test]
    fn refine_by_set_rejects_pivot_and_empty() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        let mut f = build_ordered_forest(&oracle(), &g, i).unwrap();
        assert!(matches!(
            f.refine_by_set(g.set_of(&["i", "f"]).unwrap(), Side::Left),
            Err(Error::PivotInSet(_))
        ));
        assert_eq!(
            f.refine_by_set(VertexSet::EMPTY, Side::Left),
            Err(Error::EmptySet)
        );
    }

    #[test]
    fn whole_leaf_entry_is_left_alone() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        let mut f = build_ordered_forest(&oracle(), &g, i).unwrap();
        let before = f.clone();
        let events = f
            .refine_by_set(g.set_of(&["f"]).unwrap(), Side::Right)
            .unwrap();
        assert_eq!(events.len(), 1);
        assert!(matches!(events[0], RefineEvent::SubtreeIdentified { .. }));
        assert_eq!(f, before);
    }

    #[test]
    fn prime_parent_marks_without_restructuring() {
        // P4 p-q-r-s is prime; the pivot t sees all of it.
        let g = Graph::path(&["p", "q", "r", "s"])
            .unwrap()
            .join(&Graph::new(&["t"]).unwrap())
            .unwrap();
        let t = g.require("t").unwrap();
        let mut f = build_ordered_forest(&oracle(), &g, t).unwrap();
        assert_eq!(f.render(&g), "(prime p q r s) [t]");
        let events = f
            .refine_by_set(g.set_of(&["p", "q"]).unwrap(), Side::Left)
            .unwrap();
        assert_eq!(f.render(&g), "(prime*L p*L q*L r*L s*L) [t]");
        assert!(!events
            .iter()
            .any(|e| matches!(e, RefineEvent::SplitApplied { .. })));
    }

    #[test]
    fn inner_split_keeps_parent() {
        // Two stacked degenerate levels: parallel(series(a,b,c), d) seen from pivot p.
        let inner = Graph::complete(&["a", "b", "c"]).unwrap();
        let g0 = inner.disjoint_union(&Graph::new(&["d"]).unwrap()).unwrap();
        let g = g0.join(&Graph::new(&["p"]).unwrap()).unwrap();
        let p = g.require("p").unwrap();
        let mut f = build_ordered_forest(&oracle(), &g, p).unwrap();
        assert_eq!(f.render(&g), "(parallel (series a b c) d) [p]");
        f.refine_by_set(g.set_of(&["a"]).unwrap(), Side::Left)
            .unwrap();
        assert_eq!(
            f.render(&g),
            "(parallel*L (series*L a*L (series*L b c)) d) [p]"
        );
        f.refine_by_set(g.set_of(&["d"]).unwrap(), Side::Right)
            .unwrap();
        assert_eq!(f.render(&g), "(series*LR a*L (series*L b c)) d*R [p]");
    }

    #[test]
    fn right_split_reverses_entry_order() {
        let g = Graph::from_edges(&["p", "q", "a", "b"], &[("p", "q"), ("q", "a"), ("q", "b")])
            .unwrap();
        let (p, a) = (g.require("p").unwrap(), g.require("a").unwrap());
        let mut f = build_ordered_forest(&oracle(), &g, p).unwrap();
        assert_eq!(f.render(&g), "q [p] (parallel a b)");
        f.refine_by_set(VertexSet::singleton(a), Side::Right)
            .unwrap();
        assert_eq!(f.render(&g), "q [p] b*R a*R");
    }

    #[test]
    fn order_validation() {
        let g = fixtures::sample_graph();
        let i = g.require("i").unwrap();
        assert!(refine_all(&oracle(), &g, i, Some(&[0, 1])).is_err());
        assert!(refine_all(&oracle(), &g, i, Some(&[0, 1, 2, 3, 4, 5, 6, 7, 8])).is_err());
        assert!(refine_all(&oracle(), &g, i, Some(&[0, 0, 1, 2, 3, 4, 5, 6])).is_err());
        let ok: Vec<usize> = (0..8).collect();
        assert!(refine_all(&oracle(), &g, i, Some(&ok)).is_ok());
    }

    #[test]
    fn complete_graph_never_marks() {
        let g = Graph::complete(&["a", "b", "c"]).unwrap();
        for x in 0..3 {
            let run = refine_all(&oracle(), &g, x, None).unwrap();
            assert!(run.forest.marks().is_empty());
        }
    }

    #[test]
    fn replay_rebuilds_final_forest() {
        let g = fixtures::sample_graph();
        for x in 0..g.n() {
            let run = refine_all(&oracle(), &g, x, None).unwrap();
            assert_eq!(run.replay().unwrap(), run.forest);
        }
    }

    #[test]
    fn mark_suffixes() {
        let mut m = Mark::default();
        assert_eq!(m.suffix(), "");
        m.add(Side::Right);
        assert_eq!(m.suffix(), "*R");
        m.add(Side::Left);
        assert_eq!(m.suffix(), "*LR");
    }
}
