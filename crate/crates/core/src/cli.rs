//! The `mdtool` command line.
//!
//! Exit status: 0 success / no violation, 1 violation or invalid tree found,
//! 2 usage or format error, 3 size limit exceeded. Payload goes to stdout,
//! diagnostics to stderr.

use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::falsify::{self, Finding, OrderChoice, PivotChoice, SearchMode, SearchSpec};
use crate::graph::Graph;
use crate::oracle::{validate_tree, Oracle};
use crate::refine::{default_order, lemma4_check, refine_all, ExactMismatch};
use crate::tree::MDTree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SIZE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mdtool",
    version,
    about = "Modular decomposition oracle and refinement falsifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Tree,
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PivotsArg {
    All,
    First,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrdersArg {
    Default,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the modular decomposition tree of a graph.
    Decompose {
        graph: String,
        #[arg(long, value_enum, default_value = "tree")]
        format: Format,
    },
    /// Check a claimed tree against a graph.
    Validate { graph: String, tree: String },
    /// Print the complement graph.
    Complement { graph: String },
    /// Check that the complement decomposes to the series/parallel-swapped tree.
    DualCheck { graph: String },
    /// Run refinement around a pivot and print the trace and final forest.
    Refine {
        graph: String,
        #[arg(long)]
        pivot: String,
        /// Comma-separated processing order; a prefix is completed in default order.
        #[arg(long)]
        order: Option<String>,
    },
    /// Compare refinement with the strong modules not containing the pivot.
    Lemma4 {
        graph: String,
        #[arg(long)]
        pivot: String,
        #[arg(long)]
        order: Option<String>,
        #[arg(long)]
        trace: bool,
        /// Also report the two-way correspondence mismatches.
        #[arg(long)]
        exact: bool,
    },
    /// Search for refinement counterexamples, printed as JSON lines.
    Falsify {
        /// `paper-fixture`, or a file of JSON-line findings.
        #[arg(long)]
        replay: Option<String>,
        #[arg(long, value_enum, default_value = "random")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "all")]
        pivots: PivotsArg,
        #[arg(long, value_enum, default_value = "default")]
        orders: OrdersArg,
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
        /// Graph file evaluated before the generated instances; repeatable.
        #[arg(long)]
        plant: Vec<String>,
        /// Shrink every finding by greedy vertex deletion.
        #[arg(long)]
        minimize: bool,
    },
}

/// Failure of a command, already mapped to an exit status.
struct Failure {
    status: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_size_limit() {
            EXIT_SIZE
        } else {
            EXIT_USAGE
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        status: EXIT_USAGE,
        message: message.into(),
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String, Failure> {
        if path == "-" {
            if self.stdin_used {
                return Err(usage("stdin given for more than one file"));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin
                .read_to_string(&mut s)
                .map_err(|e| usage(format!("stdin: {e}")))?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))
        }
    }

    fn graph(&mut self, path: &str) -> Result<Graph, Failure> {
        let text = self.read(path)?;
        Graph::parse(&text).map_err(|e| {
            let f = Failure::from(e);
            Failure {
                message: format!("{path}: {}", f.message),
                ..f
            }
        })
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
        }
    };
    let mut payload = Vec::new();
    let mut io = Io {
        stdin,
        stdin_used: false,
    };
    let status = match execute(cli.command, &mut io, &mut payload) {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(err, "mdtool: {}", f.message);
            f.status
        }
    };
    let _ = out.write_all(&payload);
    let _ = out.flush();
    status
}

fn resolve_order(
    oracle: &Oracle,
    g: &Graph,
    x: usize,
    spec: Option<&str>,
) -> Result<Vec<usize>, Failure> {
    let mut order = Vec::new();
    if let Some(spec) = spec {
        for l in spec.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let v = g.require(l)?;
            if v == x {
                return Err(usage(format!("order contains the pivot `{l}`")));
            }
            if order.contains(&v) {
                return Err(usage(format!("`{l}` repeated in order")));
            }
            order.push(v);
        }
    }
    for v in default_order(oracle, g, x)? {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    Ok(order)
}

fn labels_joined(g: &Graph, vs: &[usize]) -> String {
    vs.iter().map(|&v| g.label(v)).collect::<Vec<_>>().join(",")
}

fn execute(cmd: Command, io: &mut Io<'_>, out: &mut Vec<u8>) -> Result<i32, Failure> {
    let oracle = Oracle::from_env();
    let w = |out: &mut Vec<u8>, s: &str| {
        out.extend_from_slice(s.as_bytes());
        out.push(b'\n');
    };
    match cmd {
        Command::Decompose { graph, format } => {
            let g = io.graph(&graph)?;
            let t = oracle.build_md_tree(&g)?;
            match format {
                Format::Tree => w(out, &t.to_string()),
                Format::Dot => out.extend_from_slice(t.to_dot().as_bytes()),
                Format::Json => w(out, &t.to_json().to_string()),
            }
            Ok(EXIT_OK)
        }
        Command::Validate { graph, tree } => {
            let g = io.graph(&graph)?;
            let text = io.read(&tree)?;
            let t = MDTree::parse(&text).map_err(|e| usage(format!("{tree}: {e}")))?;
            let violations = validate_tree(&g, &t)?;
            if violations.is_empty() {
                w(out, "OK");
                Ok(EXIT_OK)
            } else {
                for v in &violations {
                    w(out, &v.render(&g));
                }
                Ok(EXIT_VIOLATION)
            }
        }
        Command::Complement { graph } => {
            let g = io.graph(&graph)?;
            out.extend_from_slice(g.complement().to_mdg().as_bytes());
            Ok(EXIT_OK)
        }
        Command::DualCheck { graph } => {
            let g = io.graph(&graph)?;
            let (t, co) = oracle.dual_pair(&g)?;
            w(out, &format!("tree: {t}"));
            w(out, &format!("complement: {co}"));
            if oracle.dual_check(&g)? {
                w(out, "OK");
                Ok(EXIT_OK)
            } else {
                w(out, "MISMATCH");
                Ok(EXIT_VIOLATION)
            }
        }
        Command::Refine {
            graph,
            pivot,
            order,
        } => {
            let g = io.graph(&graph)?;
            let x = g.require(&pivot)?;
            let order = resolve_order(&oracle, &g, x, order.as_deref())?;
            let run = refine_all(&oracle, &g, x, Some(&order))?;
            w(out, &format!("initial: {}", run.initial.render(&g)));
            for line in run.trace(&g) {
                w(out, &line);
            }
            w(out, &format!("forest: {}", run.forest.render(&g)));
            Ok(EXIT_OK)
        }
        Command::Lemma4 {
            graph,
            pivot,
            order,
            trace,
            exact,
        } => {
            let g = io.graph(&graph)?;
            let x = g.require(&pivot)?;
            let order = resolve_order(&oracle, &g, x, order.as_deref())?;
            let report = lemma4_check(&oracle, &g, x, Some(&order))?;
            w(out, &format!("pivot: {}", g.label(x)));
            w(out, &format!("order: {}", labels_joined(&g, &report.order)));
            for m in &report.violations_necessary {
                w(out, &format!("violation: {}", g.fmt_set(*m)));
            }
            if exact {
                for m in &report.violations_exact {
                    let line = match m {
                        ExactMismatch::UnmarkedNotStrong(s) => {
                            format!("exact: unmarked-not-strong {}", g.fmt_set(*s))
                        }
                        ExactMismatch::StrongNotUnmarked(s) => {
                            format!("exact: strong-not-unmarked {}", g.fmt_set(*s))
                        }
                    };
                    w(out, &line);
                }
            }
            if trace {
                w(out, "trace:");
                for line in &report.trace {
                    w(out, line);
                }
                w(out, &format!("forest: {}", report.final_forest));
            }
            Ok(if report.violates() {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            })
        }
        Command::Falsify {
            replay,
            mode,
            n_min,
            n_max,
            count,
            seed,
            pivots,
            orders,
            edge_prob,
            plant,
            minimize,
        } => {
            let findings = match replay.as_deref() {
                Some("paper-fixture") => vec![falsify::run_bundled_fixture(&oracle)?],
                Some(path) => {
                    let text = io.read(path)?;
                    let mut found = Vec::new();
                    for line in text.lines().filter(|l| !l.trim().is_empty()) {
                        let f = Finding::from_json_line(line)
                            .map_err(|e| usage(format!("{path}: {e}")))?;
                        let g = f.parse_graph()?;
                        let report = f.replay(&oracle)?;
                        if report.violates() {
                            found.push(Finding::from_report(&g, &report, f.seed, f.instance_index));
                        }
                    }
                    found
                }
                None => {
                    let planted = plant
                        .iter()
                        .map(|p| io.graph(p))
                        .collect::<Result<Vec<_>, _>>()?;
                    let spec = SearchSpec {
                        mode: match mode {
                            ModeArg::Exhaustive => SearchMode::Exhaustive,
                            ModeArg::Random => SearchMode::Random,
                        },
                        n_min,
                        n_max,
                        instance_count: count,
                        seed,
                        pivots: match pivots {
                            PivotsArg::All => PivotChoice::All,
                            PivotsArg::First => PivotChoice::First,
                        },
                        orders: match orders {
                            OrdersArg::Default => OrderChoice::Default,
                            OrdersArg::All => OrderChoice::AllPermutations,
                        },
                        edge_probability: edge_prob,
                        planted,
                    };
                    falsify::search(&oracle, &spec)?
                }
            };
            for f in &findings {
                let f = if minimize {
                    falsify::minimize(&oracle, f)?
                } else {
                    f.clone()
                };
                w(out, &f.to_json_line());
            }
            Ok(if findings.is_empty() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
    }
}
