#![allow(dead_code)]

use mdtool::falsify::{all_labeled_graphs, random_graphs};
use mdtool::{Graph, MDTree, NodeKind, VertexSet};

pub const CORPUS_SEED: u64 = 2008;

/// 500 seeded random graphs with 1..=8 vertices, then every labelled graph on
/// 1..=4 vertices.
pub fn corpus() -> Vec<Graph> {
    let mut gs = random_graphs(CORPUS_SEED, 500, 1, 8, 0.5);
    for n in 1..=4 {
        gs.extend(all_labeled_graphs(n));
    }
    gs
}

fn components(g: &Graph, set: VertexSet, complement: bool) -> Vec<VertexSet> {
    let mut left = set;
    let mut out = Vec::new();
    while let Some(start) = left.first() {
        let mut comp = VertexSet::singleton(start);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in left.iter() {
                if v != u && !comp.contains(v) && g.adjacent(u, v) != complement {
                    comp.insert(v);
                    stack.push(v);
                }
            }
        }
        left = left.difference(comp);
        out.push(comp);
    }
    out
}

fn is_module_within(g: &Graph, m: VertexSet, within: VertexSet) -> bool {
    within.difference(m).iter().all(|v| {
        let seen = m.iter().filter(|&u| g.adjacent(u, v)).count();
        seen == 0 || seen == m.len()
    })
}

/// Decomposition by the classical recursion: split disconnected parts into a
/// parallel node, co-disconnected parts into a series node, and otherwise
/// take the maximal proper modules as the children of a prime node.
pub fn recursive_decomposition(g: &Graph, set: VertexSet) -> MDTree {
    if set.len() == 1 {
        return MDTree::leaf(g.label(set.first().unwrap()));
    }
    let comps = components(g, set, false);
    let (kind, parts) = if comps.len() > 1 {
        (NodeKind::Parallel, comps)
    } else {
        let co = components(g, set, true);
        if co.len() > 1 {
            (NodeKind::Series, co)
        } else {
            let members: Vec<usize> = set.iter().collect();
            let proper: Vec<VertexSet> = (1u64..(1 << members.len()) - 1)
                .map(|mask| {
                    members
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect::<VertexSet>()
                })
                .filter(|&m| is_module_within(g, m, set))
                .collect();
            let maximal: Vec<VertexSet> = proper
                .iter()
                .copied()
                .filter(|&m| !proper.iter().any(|&o| o != m && m.is_subset(o)))
                .collect();
            (NodeKind::Prime, maximal)
        }
    };
    MDTree::node(
        kind,
        parts
            .into_iter()
            .map(|p| recursive_decomposition(g, p))
            .collect(),
    )
}
