//! Search for graphs, pivots and orders on which refinement marks a child of
//! a strong module that avoids the pivot.
//!
//! Random instances come from PCG32 (`rand_pcg::Pcg32`, XSH-RR output,
//! multiplier `6364136223846793005`) seeded with `Pcg32::new(seed, RANDOM_STREAM)`.
//! For each instance the vertex count is `n_min + next_u32() % (n_max - n_min + 1)`,
//! then each pair `(u, v)`, `u < v`, in lexicographic order becomes an edge when
//! `next_u32() < floor(p * 2^32)`.

use itertools::Itertools;
use rand_pcg::rand_core::Rng;
use rand_pcg::Pcg32;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::graph::{generated_label, Graph};
use crate::oracle::Oracle;
use crate::refine::{default_order, lemma4_check, Lemma4Report};

/// Largest vertex count enumerated in exhaustive mode.
pub const EXHAUSTIVE_MAX_N: usize = 6;

/// Largest vertex count for which every processing order is tried.
pub const PERMUTATION_MAX_N: usize = 7;

/// PCG stream selector used for random instances (the PCG reference default).
pub const RANDOM_STREAM: u64 = 0x0a02_bdbf_7bb3_c0a7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotChoice {
    All,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    Default,
    AllPermutations,
}

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub mode: SearchMode,
    pub n_min: usize,
    pub n_max: usize,
    /// Number of generated graphs in random mode.
    pub instance_count: usize,
    pub seed: u64,
    pub pivots: PivotChoice,
    pub orders: OrderChoice,
    pub edge_probability: f64,
    /// Graphs evaluated ahead of the generated ones, as instances `0..`.
    pub planted: Vec<Graph>,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            mode: SearchMode::Random,
            n_min: 1,
            n_max: 8,
            instance_count: 100,
            seed: 0,
            pivots: PivotChoice::All,
            orders: OrderChoice::Default,
            edge_probability: 0.5,
            planted: Vec::new(),
        }
    }
}

/// A self-contained, replayable counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    /// The graph in `.mdg` form.
    pub graph: String,
    pub pivot: String,
    pub order: Vec<String>,
    /// Violating strong modules, each listed in vertex order.
    pub violations: Vec<Vec<String>>,
    pub seed: Option<u64>,
    pub instance_index: u64,
}

impl Finding {
    pub fn from_report(
        g: &Graph,
        report: &Lemma4Report,
        seed: Option<u64>,
        instance_index: u64,
    ) -> Self {
        Finding {
            graph: g.to_mdg(),
            pivot: g.label(report.pivot).to_string(),
            order: report
                .order
                .iter()
                .map(|&v| g.label(v).to_string())
                .collect(),
            violations: report
                .violations_necessary
                .iter()
                .map(|&m| g.set_labels(m).into_iter().map(str::to_string).collect())
                .collect(),
            seed,
            instance_index,
        }
    }

    pub fn parse_graph(&self) -> Result<Graph> {
        Graph::parse(&self.graph)
    }

    /// Re-runs the check recorded by this finding.
    pub fn replay(&self, oracle: &Oracle) -> Result<Lemma4Report> {
        let g = self.parse_graph()?;
        let x = g.require(&self.pivot)?;
        let order = self
            .order
            .iter()
            .map(|l| g.require(l))
            .collect::<Result<Vec<_>>>()?;
        lemma4_check(oracle, &g, x, Some(&order))
    }

    /// Whether replaying yields exactly the recorded violations.
    pub fn reproduces(&self, oracle: &Oracle) -> Result<bool> {
        let g = self.parse_graph()?;
        let report = self.replay(oracle)?;
        Ok(
            Finding::from_report(&g, &report, self.seed, self.instance_index).violations
                == self.violations,
        )
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("findings serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Finding> {
        serde_json::from_str(line).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

/// Processing order with `first` moved to the front of the default order.
pub fn order_with_first(oracle: &Oracle, g: &Graph, x: usize, first: usize) -> Result<Vec<usize>> {
    let mut order = default_order(oracle, g, x)?;
    order.retain(|&v| v != first);
    order.insert(0, first);
    Ok(order)
}

/// The counterexample graph with pivot `i` and `f` processed first.
pub fn run_bundled_fixture(oracle: &Oracle) -> Result<Finding> {
    let g = fixtures::sample_graph();
    let x = g.require(fixtures::SAMPLE_PIVOT)?;
    let f = g.require(fixtures::SAMPLE_FIRST_VERTEX)?;
    let order = order_with_first(oracle, &g, x, f)?;
    let report = lemma4_check(oracle, &g, x, Some(&order))?;
    Ok(Finding::from_report(&g, &report, None, 0))
}

fn check_spec(oracle: &Oracle, spec: &SearchSpec) -> Result<()> {
    if spec.n_min == 0 || spec.n_min > spec.n_max {
        return Err(Error::Search(format!(
            "invalid vertex range {}..={}",
            spec.n_min, spec.n_max
        )));
    }
    if !(0.0..=1.0).contains(&spec.edge_probability) {
        return Err(Error::Search(format!(
            "edge probability {} outside [0, 1]",
            spec.edge_probability
        )));
    }
    let largest = spec
        .planted
        .iter()
        .map(Graph::n)
        .chain([spec.n_max])
        .max()
        .unwrap_or(0);
    if spec.mode == SearchMode::Exhaustive && spec.n_max > EXHAUSTIVE_MAX_N {
        return Err(Error::SizeLimit {
            n: spec.n_max,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    if spec.orders == OrderChoice::AllPermutations && largest > PERMUTATION_MAX_N {
        return Err(Error::SizeLimit {
            n: largest,
            limit: PERMUTATION_MAX_N,
        });
    }
    oracle_cap(oracle, largest)
}

fn oracle_cap(oracle: &Oracle, n: usize) -> Result<()> {
    if n > oracle.max_n() {
        Err(Error::SizeLimit {
            n,
            limit: oracle.max_n(),
        })
    } else {
        Ok(())
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(generated_label).collect()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

/// Every labelled graph on `n` vertices; bit `k` of the index selects pair `k`.
pub fn all_labeled_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let ps = pairs(n);
    let ls = labels(n);
    (0u64..1 << ps.len()).map(move |mask| {
        let mut g = Graph::new(&ls).expect("generated labels are valid");
        for (k, &(u, v)) in ps.iter().enumerate() {
            if mask >> k & 1 == 1 {
                g.add_edge(u, v);
            }
        }
        g
    })
}

/// `count` seeded random graphs with `n_min..=n_max` vertices.
pub fn random_graphs(seed: u64, count: usize, n_min: usize, n_max: usize, p: f64) -> Vec<Graph> {
    let mut rng = Pcg32::new(seed, RANDOM_STREAM);
    let span = (n_max - n_min + 1) as u32;
    let threshold = (p * 4_294_967_296.0).floor() as u64;
    (0..count)
        .map(|_| {
            let n = n_min + (rng.next_u32() % span) as usize;
            let mut g = Graph::new(&labels(n)).expect("generated labels are valid");
            for (u, v) in pairs(n) {
                if u64::from(rng.next_u32()) < threshold {
                    g.add_edge(u, v);
                }
            }
            g
        })
        .collect()
}

/// Runs the sweep. Output order is instance, then pivot, then order, whatever
/// the scheduling.
pub fn search(oracle: &Oracle, spec: &SearchSpec) -> Result<Vec<Finding>> {
    check_spec(oracle, spec)?;
    let mut instances: Vec<Graph> = spec.planted.clone();
    match spec.mode {
        SearchMode::Exhaustive => {
            for n in spec.n_min..=spec.n_max {
                instances.extend(all_labeled_graphs(n));
            }
        }
        SearchMode::Random => instances.extend(random_graphs(
            spec.seed,
            spec.instance_count,
            spec.n_min,
            spec.n_max,
            spec.edge_probability,
        )),
    }
    let per_instance: Vec<Result<Vec<Finding>>> = instances
        .par_iter()
        .enumerate()
        .map(|(idx, g)| search_instance(oracle, spec, g, idx as u64))
        .collect();
    let mut out = Vec::new();
    for r in per_instance {
        out.extend(r?);
    }
    Ok(out)
}

fn search_instance(
    oracle: &Oracle,
    spec: &SearchSpec,
    g: &Graph,
    idx: u64,
) -> Result<Vec<Finding>> {
    let seed = (spec.mode == SearchMode::Random).then_some(spec.seed);
    let pivots: Vec<usize> = match spec.pivots {
        PivotChoice::All => (0..g.n()).collect(),
        PivotChoice::First => vec![0],
    };
    let mut out = Vec::new();
    for x in pivots {
        let orders: Vec<Option<Vec<usize>>> = match spec.orders {
            OrderChoice::Default => vec![None],
            OrderChoice::AllPermutations => {
                let rest: Vec<usize> = (0..g.n()).filter(|&v| v != x).collect();
                let k = rest.len();
                rest.into_iter().permutations(k).map(Some).collect()
            }
        };
        for order in orders {
            let report = lemma4_check(oracle, g, x, order.as_deref())?;
            if report.violates() {
                out.push(Finding::from_report(g, &report, seed, idx));
            }
        }
    }
    Ok(out)
}

/// Greedily deletes non-pivot vertices while the finding still violates.
/// The result is minimal under single-vertex deletion.
pub fn minimize(oracle: &Oracle, f: &Finding) -> Result<Finding> {
    let report = f.replay(oracle)?;
    if !report.violates() {
        return Err(Error::Search("finding does not violate".into()));
    }
    let mut g = f.parse_graph()?;
    let mut order: Vec<String> = f.order.clone();
    let mut current = Finding::from_report(&g, &report, f.seed, f.instance_index);
    'outer: loop {
        for v in 0..g.n() {
            if g.label(v) == f.pivot {
                continue;
            }
            let smaller = g.without_vertex(v);
            let removed = g.label(v).to_string();
            let smaller_order: Vec<String> =
                order.iter().filter(|l| **l != removed).cloned().collect();
            let x = smaller.require(&f.pivot)?;
            let idx = smaller_order
                .iter()
                .map(|l| smaller.require(l))
                .collect::<Result<Vec<_>>>()?;
            let r = lemma4_check(oracle, &smaller, x, Some(&idx))?;
            if r.violates() {
                current = Finding::from_report(&smaller, &r, f.seed, f.instance_index);
                g = smaller;
                order = smaller_order;
                continue 'outer;
            }
        }
        return Ok(current);
    }
}
