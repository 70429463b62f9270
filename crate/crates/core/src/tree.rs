//! Modular decomposition trees and their text, JSON and DOT renderings.
//!
//! Text form: `tree := <label> | "(" kind tree+ ")"` with
//! `kind := series | parallel | prime`. Kinds are case-insensitive on input
//! and lowercase on output.

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Kind of an internal decomposition node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Series,
    Parallel,
    Prime,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Series => "series",
            NodeKind::Parallel => "parallel",
            NodeKind::Prime => "prime",
        }
    }

    /// Series and parallel exchanged; prime is fixed.
    pub fn dual(self) -> NodeKind {
        match self {
            NodeKind::Series => NodeKind::Parallel,
            NodeKind::Parallel => NodeKind::Series,
            NodeKind::Prime => NodeKind::Prime,
        }
    }

    pub fn is_degenerate(self) -> bool {
        self != NodeKind::Prime
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "series" => Ok(NodeKind::Series),
            "parallel" => Ok(NodeKind::Parallel),
            "prime" => Ok(NodeKind::Prime),
            _ => Err(format!("unknown node kind `{s}`")),
        }
    }
}

/// A rooted decomposition tree with labelled leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MDTree {
    Leaf(String),
    Node {
        kind: NodeKind,
        children: Vec<MDTree>,
    },
}

impl MDTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        MDTree::Leaf(label.into())
    }

    pub fn node(kind: NodeKind, children: Vec<MDTree>) -> Self {
        MDTree::Node { kind, children }
    }

    /// `None` for leaves.
    pub fn kind(&self) -> Option<NodeKind> {
        match self {
            MDTree::Leaf(_) => None,
            MDTree::Node { kind, .. } => Some(*kind),
        }
    }

    pub fn children(&self) -> &[MDTree] {
        match self {
            MDTree::Leaf(_) => &[],
            MDTree::Node { children, .. } => children,
        }
    }

    /// Leaf labels in left-to-right order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            MDTree::Leaf(l) => out.push(l),
            MDTree::Node { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(MDTree::size).sum::<usize>()
    }

    /// Leafset of this node in `g`; fails on a label missing from `g`.
    pub fn leafset(&self, g: &Graph) -> Result<VertexSet> {
        self.leaves().into_iter().map(|l| g.require(l)).collect()
    }

    /// All nodes in preorder.
    pub fn nodes(&self) -> Vec<&MDTree> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let n = out[i];
            i += 1;
            out.splice(i..i, n.children().iter());
        }
        out
    }

    /// Children reordered recursively by the vertex-order position of each
    /// child's minimum leaf.
    pub fn canonical(&self, g: &Graph) -> Result<MDTree> {
        Ok(self.canonical_keyed(g)?.0)
    }

    fn canonical_keyed(&self, g: &Graph) -> Result<(MDTree, usize)> {
        match self {
            MDTree::Leaf(l) => Ok((self.clone(), g.require(l)?)),
            MDTree::Node { kind, children } => {
                let mut keyed = children
                    .iter()
                    .map(|c| c.canonical_keyed(g))
                    .collect::<Result<Vec<_>>>()?;
                keyed.sort_by_key(|(_, k)| *k);
                let key = keyed.iter().map(|(_, k)| *k).min().unwrap_or(usize::MAX);
                let children = keyed.into_iter().map(|(t, _)| t).collect();
                Ok((
                    MDTree::Node {
                        kind: *kind,
                        children,
                    },
                    key,
                ))
            }
        }
    }

    /// Canonical text form; equal strings mean equal trees up to child order.
    pub fn canonical_string(&self, g: &Graph) -> Result<String> {
        Ok(self.canonical(g)?.to_string())
    }

    /// Series and parallel swapped throughout.
    pub fn dual(&self) -> MDTree {
        match self {
            MDTree::Leaf(_) => self.clone(),
            MDTree::Node { kind, children } => MDTree::Node {
                kind: kind.dual(),
                children: children.iter().map(MDTree::dual).collect(),
            },
        }
    }

    /// Parses the tree text format.
    pub fn parse(text: &str) -> Result<MDTree> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let tree = parse_tree(&tokens, &mut pos)?;
        if let Some(t) = tokens.get(pos) {
            return Err(Error::parse(t.line, format!("trailing input `{}`", t.text)));
        }
        Ok(tree)
    }

    /// Nested `{kind, children}` / `{leaf}` objects.
    pub fn to_json(&self) -> Value {
        match self {
            MDTree::Leaf(l) => json!({ "leaf": l }),
            MDTree::Node { kind, children } => json!({
                "kind": kind.as_str(),
                "children": children.iter().map(MDTree::to_json).collect::<Vec<_>>(),
            }),
        }
    }

    /// Graphviz digraph, parent to child edges, coloured by node kind.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph md {\n  node [fontname=\"Helvetica\"];\n");
        let mut next = 0usize;
        self.write_dot(&mut out, &mut next);
        out.push_str("}\n");
        out
    }

    fn write_dot(&self, out: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        match self {
            MDTree::Leaf(l) => {
                out.push_str(&format!("  n{id} [label=\"{l}\", shape=circle];\n"));
            }
            MDTree::Node { kind, children } => {
                let color = match kind {
                    NodeKind::Series => "blue",
                    NodeKind::Parallel => "red",
                    NodeKind::Prime => "green",
                };
                out.push_str(&format!(
                    "  n{id} [label=\"{kind}\", shape=box, color={color}];\n"
                ));
                for c in children {
                    let cid = c.write_dot(out, next);
                    out.push_str(&format!("  n{id} -> n{cid};\n"));
                }
            }
        }
        id
    }
}

impl fmt::Display for MDTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MDTree::Leaf(l) => f.write_str(l),
            MDTree::Node { kind, children } => {
                write!(f, "({kind}")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for MDTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MDTree::parse(s)
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = line.split('#').next().unwrap_or("");
        let mut start = None;
        for (i, c) in line.char_indices() {
            if c == '(' || c == ')' || c.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push(Token {
                        text: &line[s..i],
                        line: line_no,
                    });
                }
                if !c.is_whitespace() {
                    out.push(Token {
                        text: &line[i..i + 1],
                        line: line_no,
                    });
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push(Token {
                text: &line[s..],
                line: line_no,
            });
        }
    }
    out
}

fn parse_tree(tokens: &[Token<'_>], pos: &mut usize) -> Result<MDTree> {
    let last_line = tokens.last().map_or(1, |t| t.line);
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::parse(last_line, "unexpected end of tree"))?;
    *pos += 1;
    match tok.text {
        ")" => Err(Error::parse(tok.line, "unexpected `)`")),
        "(" => {
            let kt = tokens
                .get(*pos)
                .ok_or_else(|| Error::parse(last_line, "missing node kind"))?;
            let kind = kt
                .text
                .parse::<NodeKind>()
                .map_err(|m| Error::parse(kt.line, m))?;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(Error::parse(last_line, "unclosed `(`")),
                    Some(t) if t.text == ")" => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_tree(tokens, pos)?),
                }
            }
            if children.is_empty() {
                return Err(Error::parse(kt.line, "node without children"));
            }
            Ok(MDTree::Node { kind, children })
        }
        label => {
            if !crate::graph::is_valid_label(label) {
                return Err(Error::parse(
                    tok.line,
                    format!("invalid leaf label `{label}`"),
                ));
            }
            Ok(MDTree::Leaf(label.to_string()))
        }
    }
}
