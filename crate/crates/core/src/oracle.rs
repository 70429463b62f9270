//! Exact, exponential-time modular decomposition.
//!
//! Modules are found by enumerating every vertex subset, strong modules by
//! pairwise overlap tests, and the tree by nesting the strong modules under
//! inclusion. Nothing here depends on the refinement machinery, so the results
//! can serve as ground truth for it.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::tree::{MDTree, NodeKind};

/// Default cap on the number of vertices handled by the oracle.
pub const DEFAULT_MAX_N: usize = 16;

/// Environment variable overriding [`DEFAULT_MAX_N`].
pub const MAX_N_ENV: &str = "MDTOOL_MAX_N";

/// A vertex outside a set that distinguishes two of its members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Distinguisher {
    pub outside: usize,
    pub adjacent: usize,
    pub non_adjacent: usize,
}

/// First vertex of `within \ m` that sees part but not all of `m`.
pub fn distinguisher_within(g: &Graph, m: VertexSet, within: VertexSet) -> Option<Distinguisher> {
    within.difference(m).iter().find_map(|v| {
        let seen = g.neighbors(v).intersection(m);
        if seen.is_empty() || seen == m {
            None
        } else {
            Some(Distinguisher {
                outside: v,
                adjacent: seen.first().unwrap(),
                non_adjacent: m.difference(seen).first().unwrap(),
            })
        }
    })
}

pub fn distinguisher(g: &Graph, m: VertexSet) -> Option<Distinguisher> {
    distinguisher_within(g, m, g.vertex_set())
}

/// Whether `m` is a module of `g`, with a distinguishing witness when it is not.
pub fn module_check(g: &Graph, m: VertexSet) -> Result<(bool, Option<Distinguisher>)> {
    if m.is_empty() {
        return Err(Error::EmptySet);
    }
    if !m.is_subset(g.vertex_set()) {
        return Err(Error::UnknownVertex(format!(
            "#{}",
            m.difference(g.vertex_set()).first().unwrap()
        )));
    }
    let d = distinguisher(g, m);
    Ok((d.is_none(), d))
}

pub fn is_module(g: &Graph, m: VertexSet) -> Result<bool> {
    Ok(module_check(g, m)?.0)
}

/// Smallest module of `g` containing `seed`, by repeatedly absorbing distinguishers.
pub fn module_closure(g: &Graph, seed: VertexSet) -> VertexSet {
    let mut m = seed;
    while let Some(d) = distinguisher(g, m) {
        m.insert(d.outside);
    }
    m
}

/// Kind of the quotient of the module `parts` jointly cover.
///
/// Series when the quotient (one representative per part) is complete,
/// parallel when it is edgeless, prime otherwise.
pub fn quotient_kind(g: &Graph, parts: &[VertexSet]) -> Result<NodeKind> {
    if parts.len() < 2 {
        return Err(Error::InvalidPartition("need at least two parts".into()));
    }
    let mut union = VertexSet::EMPTY;
    for &p in parts {
        if p.is_empty() {
            return Err(Error::InvalidPartition("empty part".into()));
        }
        if p.intersects(union) {
            return Err(Error::InvalidPartition(format!(
                "{} overlaps another part",
                g.fmt_set(p)
            )));
        }
        if !p.is_subset(g.vertex_set()) {
            return Err(Error::InvalidPartition("part outside the graph".into()));
        }
        union = union.union(p);
    }
    for &p in parts {
        if let Some(d) = distinguisher_within(g, p, union) {
            return Err(Error::InvalidPartition(format!(
                "{} is not a module: {} distinguishes {} and {}",
                g.fmt_set(p),
                g.label(d.outside),
                g.label(d.adjacent),
                g.label(d.non_adjacent)
            )));
        }
    }
    let reps: Vec<usize> = parts.iter().map(|p| p.first().unwrap()).collect();
    Ok(kind_of_quotient(g, &reps))
}

fn kind_of_quotient(g: &Graph, reps: &[usize]) -> NodeKind {
    let pairs = reps.len() * (reps.len() - 1) / 2;
    let edges = reps
        .iter()
        .enumerate()
        .flat_map(|(i, &u)| reps[i + 1..].iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| g.adjacent(u, v))
        .count();
    if edges == pairs {
        NodeKind::Series
    } else if edges == 0 {
        NodeKind::Parallel
    } else {
        NodeKind::Prime
    }
}

/// Brute-force decomposition oracle with a vertex-count cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    max_n: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl Oracle {
    pub fn new(max_n: usize) -> Self {
        Oracle { max_n }
    }

    /// Oracle whose cap is read from `MDTOOL_MAX_N` when set and valid.
    pub fn from_env() -> Self {
        std::env::var(MAX_N_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Oracle::new)
            .unwrap_or_default()
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn check_size(&self, g: &Graph) -> Result<()> {
        if g.n() > self.max_n {
            Err(Error::SizeLimit {
                n: g.n(),
                limit: self.max_n,
            })
        } else {
            Ok(())
        }
    }

    /// Every nonempty module of `g`, in ascending bitmask order.
    pub fn all_modules(&self, g: &Graph) -> Result<Vec<VertexSet>> {
        self.check_size(g)?;
        let n = g.n();
        Ok((1u64..(1u64 << n))
            .map(VertexSet::from_bits)
            .filter(|&m| distinguisher(g, m).is_none())
            .collect())
    }

    /// Modules overlapping no other module, in ascending bitmask order.
    pub fn strong_modules(&self, g: &Graph) -> Result<Vec<VertexSet>> {
        let modules = self.all_modules(g)?;
        let all = g.vertex_set();
        // Singletons and V never overlap anything.
        let nontrivial: Vec<VertexSet> = modules
            .iter()
            .copied()
            .filter(|m| m.len() > 1 && *m != all)
            .collect();
        Ok(modules
            .into_iter()
            .filter(|&m| {
                m.len() == 1 || m == all || !nontrivial.iter().any(|&other| m.overlaps(other))
            })
            .collect())
    }

    /// The modular decomposition tree, children in canonical order.
    pub fn build_md_tree(&self, g: &Graph) -> Result<MDTree> {
        if g.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let strong = self.strong_modules(g)?;
        Ok(build_node(g, &strong, g.vertex_set()))
    }

    /// Whether the complement's tree is this tree with series and parallel swapped.
    pub fn dual_check(&self, g: &Graph) -> Result<bool> {
        let (tree, co_tree) = self.dual_pair(g)?;
        Ok(tree.dual().canonical(g)? == co_tree)
    }

    /// Trees of `g` and of its complement.
    pub fn dual_pair(&self, g: &Graph) -> Result<(MDTree, MDTree)> {
        Ok((self.build_md_tree(g)?, self.build_md_tree(&g.complement())?))
    }
}

fn build_node(g: &Graph, strong: &[VertexSet], set: VertexSet) -> MDTree {
    if set.len() == 1 {
        return MDTree::leaf(g.label(set.first().unwrap()));
    }
    let proper: Vec<VertexSet> = strong
        .iter()
        .copied()
        .filter(|&s| s != set && s.is_subset(set))
        .collect();
    let mut children: Vec<VertexSet> = proper
        .iter()
        .copied()
        .filter(|&s| !proper.iter().any(|&t| t != s && s.is_subset(t)))
        .collect();
    children.sort_by_key(|c| c.first());
    let kind =
        quotient_kind(g, &children).expect("maximal strong submodules partition a strong module");
    MDTree::node(
        kind,
        children
            .into_iter()
            .map(|c| build_node(g, strong, c))
            .collect(),
    )
}

/// What a [`Violation`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    /// Leaves are not exactly the vertex set; witnesses are missing labels
    /// followed by repeated ones.
    LeavesNotV,
    /// A node's leafset is not a module; witnesses are the distinguishing
    /// vertex, a neighbour inside and a non-neighbour inside.
    NotAModule,
    /// Quotient disagrees with the node kind; witnesses are representatives of
    /// the offending children.
    WrongKind,
    /// Series under series or parallel under parallel; no witnesses.
    NotMaximal,
    /// Internal node with fewer than two children; no witnesses.
    Arity,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::LeavesNotV => "LEAVES_NOT_V",
            ViolationCode::NotAModule => "NOT_A_MODULE",
            ViolationCode::WrongKind => "WRONG_KIND",
            ViolationCode::NotMaximal => "NOT_MAXIMAL",
            ViolationCode::Arity => "ARITY",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reason a claimed tree is not the modular decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub subject: VertexSet,
    pub witnesses: Vec<String>,
    pub message: String,
}

impl Violation {
    /// `CODE {subject} [witnesses] message` on one line.
    pub fn render(&self, g: &Graph) -> String {
        format!(
            "{} {} [{}] {}",
            self.code,
            g.fmt_set(self.subject),
            self.witnesses.join(","),
            self.message
        )
    }
}

/// Checks a claimed tree against `g`. Empty iff it is the decomposition tree.
pub fn validate_tree(g: &Graph, t: &MDTree) -> Result<Vec<Violation>> {
    let leaves = t.leaves();
    let mut seen = VertexSet::EMPTY;
    let mut repeated = Vec::new();
    for l in &leaves {
        let v = g.require(l)?;
        if seen.contains(v) {
            repeated.push(l.to_string());
        }
        seen.insert(v);
    }
    let missing = g.vertex_set().difference(seen);
    if !missing.is_empty() || !repeated.is_empty() {
        let mut witnesses: Vec<String> = g
            .set_labels(missing)
            .into_iter()
            .map(str::to_string)
            .collect();
        witnesses.extend(repeated);
        return Ok(vec![Violation {
            code: ViolationCode::LeavesNotV,
            subject: seen,
            witnesses,
            message: format!(
                "leaves do not form the vertex set ({} missing, {} repeated)",
                missing.len(),
                leaves.len() + missing.len() - g.n()
            ),
        }]);
    }

    let mut out = Vec::new();
    for node in t.nodes() {
        let MDTree::Node { kind, children } = node else {
            continue;
        };
        let kind = *kind;
        let subject = node.leafset(g)?;
        if children.len() < 2 {
            out.push(Violation {
                code: ViolationCode::Arity,
                subject,
                witnesses: vec![],
                message: format!("{kind} node has {} child", children.len()),
            });
        }
        if let Some(d) = distinguisher(g, subject) {
            out.push(Violation {
                code: ViolationCode::NotAModule,
                subject,
                witnesses: vec![
                    g.label(d.outside).into(),
                    g.label(d.adjacent).into(),
                    g.label(d.non_adjacent).into(),
                ],
                message: format!(
                    "{} is adjacent to {} but not to {}",
                    g.label(d.outside),
                    g.label(d.adjacent),
                    g.label(d.non_adjacent)
                ),
            });
        }
        let mut parts: Vec<VertexSet> = children
            .iter()
            .map(|c| c.leafset(g))
            .collect::<Result<_>>()?;
        parts.sort_by_key(|p| p.first());
        for c in children {
            if c.kind() == Some(kind) && kind.is_degenerate() {
                out.push(Violation {
                    code: ViolationCode::NotMaximal,
                    subject: c.leafset(g)?,
                    witnesses: vec![],
                    message: format!("{kind} node directly under a {kind} node"),
                });
            }
        }
        if parts.len() >= 2 {
            out.extend(kind_violations(g, kind, subject, &parts));
        }
    }
    Ok(out)
}

fn kind_violations(
    g: &Graph,
    kind: NodeKind,
    subject: VertexSet,
    parts: &[VertexSet],
) -> Vec<Violation> {
    let reps: Vec<usize> = parts.iter().map(|p| p.first().unwrap()).collect();
    let mut out = Vec::new();
    let wrong = |witnesses: Vec<usize>, message: String| Violation {
        code: ViolationCode::WrongKind,
        subject,
        witnesses: witnesses
            .into_iter()
            .map(|v| g.label(v).to_string())
            .collect(),
        message,
    };
    match kind {
        NodeKind::Series | NodeKind::Parallel => {
            let want_edge = kind == NodeKind::Series;
            for (i, &u) in reps.iter().enumerate() {
                for &v in &reps[i + 1..] {
                    if g.adjacent(u, v) != want_edge {
                        let what = if want_edge {
                            "non-adjacent"
                        } else {
                            "adjacent"
                        };
                        out.push(wrong(
                            vec![u, v],
                            format!(
                                "{kind} node has {what} children {} and {}",
                                g.label(u),
                                g.label(v)
                            ),
                        ));
                    }
                }
            }
        }
        NodeKind::Prime => {
            let quotient = g.induced_subgraph(reps.iter().copied().collect());
            match kind_of_quotient(&quotient, &(0..reps.len()).collect::<Vec<_>>()) {
                NodeKind::Prime => {
                    if let Some(m) = nontrivial_module(&quotient) {
                        let ws: Vec<usize> = m.iter().map(|i| reps[i]).collect();
                        let names: Vec<&str> = ws.iter().map(|&v| g.label(v)).collect();
                        out.push(wrong(
                            ws.clone(),
                            format!(
                                "prime quotient has the nontrivial module {{{}}}",
                                names.join(",")
                            ),
                        ));
                    }
                }
                other => out.push(wrong(
                    reps.clone(),
                    format!(
                        "prime node quotient is {}",
                        if other == NodeKind::Series {
                            "complete"
                        } else {
                            "edgeless"
                        }
                    ),
                )),
            }
        }
    }
    out
}

/// Some module other than V and the singletons, if one exists.
fn nontrivial_module(g: &Graph) -> Option<VertexSet> {
    let all = g.vertex_set();
    (0..g.n())
        .flat_map(|u| (u + 1..g.n()).map(move |v| (u, v)))
        .map(|(u, v)| module_closure(g, VertexSet::singleton(u).union(VertexSet::singleton(v))))
        .find(|&m| m != all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(crate::graph::generated_label).collect()
    }

    #[test]
    fn module_witness_on_sample_graph() {
        let g = fixtures::sample_graph();
        let gh = g.set_of(&["g", "h"]).unwrap();
        assert!(is_module(&g, gh).unwrap());
        assert!(is_module(&g, g.vertex_set()).unwrap());
        let (ok, w) = module_check(&g, g.set_of(&["b", "c"]).unwrap()).unwrap();
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(
            (
                g.label(w.outside),
                g.label(w.adjacent),
                g.label(w.non_adjacent)
            ),
            ("e", "b", "c")
        );
        assert_eq!(module_check(&g, VertexSet::EMPTY), Err(Error::EmptySet));
    }

    #[test]
    fn modules_of_small_graphs() {
        let k3 = Graph::complete(&labels(3)).unwrap();
        assert_eq!(Oracle::default().all_modules(&k3).unwrap().len(), 7);
        let p4 = Graph::path(&labels(4)).unwrap();
        let ms = Oracle::default().all_modules(&p4).unwrap();
        assert_eq!(ms.len(), 5);
        assert!(ms.iter().all(|m| m.len() == 1 || *m == p4.vertex_set()));
        assert_eq!(Oracle::default().strong_modules(&p4).unwrap(), ms);
        let k1 = Graph::new(&["v"]).unwrap();
        assert_eq!(
            Oracle::default().strong_modules(&k1).unwrap(),
            vec![VertexSet::singleton(0)]
        );
    }

    #[test]
    fn size_limit_is_enforced() {
        let g = Graph::new(&labels(5)).unwrap();
        assert_eq!(
            Oracle::new(4).all_modules(&g),
            Err(Error::SizeLimit { n: 5, limit: 4 })
        );
        assert!(Oracle::new(4)
            .build_md_tree(&g)
            .unwrap_err()
            .is_size_limit());
    }

    #[test]
    fn quotient_kinds_of_sample_modules() {
        let g = fixtures::sample_graph();
        let s = |l: &[&str]| g.set_of(l).unwrap();
        assert_eq!(
            quotient_kind(
                &g,
                &[s(&["b", "c", "e", "g", "h"]), s(&["a", "d", "f", "i"])]
            )
            .unwrap(),
            NodeKind::Series
        );
        assert_eq!(
            quotient_kind(&g, &[s(&["f"]), s(&["a", "d", "i"])]).unwrap(),
            NodeKind::Parallel
        );
        assert_eq!(
            quotient_kind(&g, &[s(&["b"]), s(&["c"]), s(&["e"]), s(&["g", "h"])]).unwrap(),
            NodeKind::Prime
        );
        assert!(quotient_kind(&g, &[s(&["b", "c"]), s(&["e"])]).is_err());
        assert!(quotient_kind(&g, &[s(&["b"])]).is_err());
        assert!(quotient_kind(&g, &[s(&["b", "c"]), s(&["c"])]).is_err());
    }

    #[test]
    fn trees_of_complete_and_edgeless() {
        let o = Oracle::default();
        let k3 = Graph::complete(&labels(3)).unwrap();
        assert_eq!(o.build_md_tree(&k3).unwrap().to_string(), "(series a b c)");
        let e3 = Graph::new(&labels(3)).unwrap();
        assert_eq!(
            o.build_md_tree(&e3).unwrap().to_string(),
            "(parallel a b c)"
        );
        assert_eq!(
            o.build_md_tree(&Graph::new(&["a"]).unwrap())
                .unwrap()
                .to_string(),
            "a"
        );
        assert_eq!(
            o.build_md_tree(&Graph::new::<&str>(&[]).unwrap()),
            Err(Error::EmptyGraph)
        );
    }

    #[test]
    fn validate_flags_each_code() {
        let k3 = Graph::complete(&labels(3)).unwrap();
        let codes = |g: &Graph, t: &str| -> Vec<ViolationCode> {
            validate_tree(g, &MDTree::parse(t).unwrap())
                .unwrap()
                .into_iter()
                .map(|v| v.code)
                .collect()
        };
        assert!(codes(&k3, "(series c a b)").is_empty());
        assert_eq!(
            codes(&k3, "(parallel a b c)"),
            vec![ViolationCode::WrongKind; 3]
        );
        assert_eq!(codes(&k3, "(series a b)"), vec![ViolationCode::LeavesNotV]);
        assert_eq!(
            codes(&k3, "(series a b b c)"),
            vec![ViolationCode::LeavesNotV]
        );
        assert_eq!(
            codes(&k3, "(series a (series b c))"),
            vec![ViolationCode::NotMaximal]
        );
        assert_eq!(
            codes(&k3, "(series a (prime b c))"),
            vec![ViolationCode::WrongKind]
        );
        assert_eq!(
            codes(&k3, "(series (series a b c))"),
            vec![ViolationCode::Arity, ViolationCode::NotMaximal]
        );
        assert!(validate_tree(&k3, &MDTree::leaf("z")).is_err());

        let p3 = Graph::path(&labels(3)).unwrap();
        let found = codes(&p3, "(parallel (series a b) c)");
        assert!(found.contains(&ViolationCode::NotAModule));
        let p4 = Graph::path(&labels(4)).unwrap();
        assert!(codes(&p4, "(prime a b c d)").is_empty());
        let c4 = Graph::cycle(&labels(4)).unwrap();
        assert_eq!(
            codes(&c4, "(prime a b c d)"),
            vec![ViolationCode::WrongKind]
        );
    }

    #[test]
    fn closure_finds_smallest_module() {
        let g = fixtures::sample_graph();
        let bc = g.set_of(&["b", "c"]).unwrap();
        assert_eq!(
            module_closure(&g, bc),
            g.set_of(&["b", "c", "e", "g", "h"]).unwrap()
        );
    }
}
