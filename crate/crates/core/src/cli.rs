//! Command-line front end. [`run`] takes the argument vector and explicit
//! streams so it can be driven from tests.
//!
//! Exit codes: 0 on success, 1 on a domain error (unstable model, failed
//! check, bad file), 2 on a usage error.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::builder::{
    local_orthogonality_graph, orthogonality_graph, sampled_graph, sampled_graph_experimental, DEFAULT_TOL,
};
use crate::empirical::assumption_density_check_pairs;
use crate::error::Error;
use crate::graph::{
    implied_statements, m_separated, parse_edge_list, to_dot, to_edge_list, GraphKind, MixedGraph,
    SeparationQuery, VertexSet,
};
use crate::kernels::stability_margin;
use crate::model::{build_state_space, reference_ou_spec, McarSpec, STRICT_EIG_FLOOR};
use crate::simulate::{simulate_euler_levy, simulate_exact_gaussian, LevyDriver};

#[derive(Debug, Parser)]
#[command(name = "mcar-graphs", version, about = "Orthogonality graphs of Levy-driven MCAR processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print order, stability margin and the smallest eigenvalue of Sigma_L.
    Validate { model: PathBuf },
    /// Compute a graph from a model file.
    Graph {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "og")]
        kind: GraphArg,
        /// Sampling interval, required for `--kind sampled`.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "edges")]
        out: OutArg,
        /// Allow `--kind sampled` for p > 1.
        #[arg(long)]
        experimental: bool,
    },
    /// Test A ⋈ B | C in a graph file (`-` reads standard input).
    Msep {
        graph: PathBuf,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// List the statements a graph implies for a query.
    Implied {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "og")]
        kind: ImpliedArg,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Simulate a path and write it as CSV (`-` writes standard output).
    Simulate {
        model: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `brownian` (exact) or `cpoisson:<rate>` (Euler, jumps N(0, Sigma_L / rate)).
        #[arg(long, default_value = "brownian")]
        driver: String,
        /// Euler sub-steps per grid step for jump drivers.
        #[arg(long, default_value_t = 10)]
        substeps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the spectral density bound for every singleton-versus-rest split.
    CheckAssumption {
        model: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        lmax: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Rebuild the three-dimensional reference example and compare its graphs.
    #[command(name = "reproduce-figure1")]
    ReproduceFigure1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphArg {
    Og,
    Local,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ImpliedArg {
    Og,
    Local,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutArg {
    Dot,
    Edges,
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// Vertex count, overriding the file header.
    #[arg(long)]
    n: Option<usize>,
    /// Query in the form `A=1,2 B=3 C=4`.
    #[arg(value_name = "SET=LIST")]
    sets: Vec<String>,
}

/// Failure of a command: usage problems exit 2, everything else exits 1.
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.into())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Runs the command line `args` (including the program name).
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    2
                }
            };
        }
    };
    let result = dispatch(cli.command, stdin, stdout, stderr);
    let _ = stdout.flush();
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Validate { model } => validate(&model, out, err),
        Command::Graph { model, kind, h, tol, out: fmt, experimental } => {
            let spec = McarSpec::from_path(&model)?;
            let report = match kind {
                GraphArg::Og => orthogonality_graph(&spec, tol)?,
                GraphArg::Local => local_orthogonality_graph(&spec, tol)?,
                GraphArg::Sampled => {
                    let h = h.ok_or_else(|| Failure::Usage("--kind sampled requires --h".into()))?;
                    if experimental {
                        sampled_graph_experimental(&spec, h, tol)?
                    } else {
                        sampled_graph(&spec, h, tol)?
                    }
                }
            };
            let text = match fmt {
                OutArg::Dot => to_dot(&report.graph),
                OutArg::Edges => to_edge_list(&report.graph),
            };
            out.write_all(text.as_bytes())?;
            Ok(0)
        }
        Command::Msep { graph, query } => {
            let g = read_graph(&graph, query.n, stdin)?;
            let q = parse_query(&query)?;
            let sep = m_separated(&g, &q)?;
            writeln!(out, "{}", if sep { "SEPARATED" } else { "CONNECTED" })?;
            Ok(0)
        }
        Command::Implied { graph, kind, query } => {
            let g = read_graph(&graph, query.n, stdin)?;
            let q = parse_query(&query)?;
            let kind = match kind {
                ImpliedArg::Og => GraphKind::Og,
                ImpliedArg::Local => GraphKind::LocalOg,
            };
            write!(out, "{}", implied_statements(&g, &q, kind)?)?;
            Ok(0)
        }
        Command::Simulate { model, h, steps, seed, driver, substeps, out: path } => {
            let spec = McarSpec::from_path(&model)?;
            let ss = build_state_space(&spec)?;
            let sample = match parse_driver(&driver)? {
                None => simulate_exact_gaussian(&ss, h, steps, seed)?,
                Some(rate) => {
                    let jumps = LevyDriver::CompoundPoisson { rate, jump_cov: &ss.sigma_l / rate };
                    simulate_euler_levy(&ss, &jumps, h, steps, substeps, seed)?
                }
            };
            for w in &sample.warnings {
                writeln!(err, "warning: {w}")?;
            }
            if path.as_os_str() == "-" {
                sample.write_csv(out)?;
            } else {
                let mut file = BufWriter::new(File::create(&path)?);
                sample.write_csv(&mut file)?;
                file.flush()?;
            }
            Ok(0)
        }
        Command::CheckAssumption { model, lmax, step } => {
            let spec = McarSpec::from_path(&model)?;
            let ss = build_state_space(&spec)?;
            let all: VertexSet = (1..=ss.k).collect();
            let pairs: Vec<(VertexSet, VertexSet)> = (1..=ss.k)
                .filter(|_| ss.k > 1)
                .map(|v| {
                    let a: VertexSet = [v].into();
                    let b = all.difference(&a).copied().collect();
                    (a, b)
                })
                .collect();
            if pairs.is_empty() {
                writeln!(out, "no disjoint pairs for k = {}", ss.k)?;
                return Ok(0);
            }
            let reports = assumption_density_check_pairs(&ss, &pairs, lmax, step)?;
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{r}")?;
            }
            Ok(if reports.iter().all(|r| r.satisfied) { 0 } else { 1 })
        }
        Command::ReproduceFigure1 => reproduce_figure1(out),
    }
}

fn validate(model: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let spec = McarSpec::from_path(model)?;
    let margin = stability_margin(&spec.companion())?;
    let min_eig = spec.sigma_min_eigenvalue()?;
    writeln!(out, "k {}", spec.k)?;
    writeln!(out, "p {}", spec.p)?;
    writeln!(out, "stability_margin {margin:.12e}")?;
    writeln!(out, "sigma_L_min_eigenvalue {min_eig:.12e}")?;
    let causal = margin < 0.0;
    let strict = min_eig > STRICT_EIG_FLOOR;
    writeln!(out, "causal {causal}")?;
    writeln!(out, "strict {strict}")?;
    if !causal {
        writeln!(err, "model is not causal")?;
    }
    if !strict {
        writeln!(err, "Levy covariance is not positive definite")?;
    }
    Ok(if causal && strict { 0 } else { 1 })
}

fn edge_summary(g: &MixedGraph) -> String {
    let mut parts: Vec<String> = g.directed_edges().map(|(a, b)| format!("D {a} {b}")).collect();
    parts.extend(g.undirected_edges().map(|(a, b)| format!("U {a} {b}")));
    parts.join(", ")
}

fn reproduce_figure1(out: &mut dyn Write) -> CmdResult {
    let spec = reference_ou_spec();
    let og = orthogonality_graph(&spec, DEFAULT_TOL)?.graph;
    let local = local_orthogonality_graph(&spec, DEFAULT_TOL)?.graph;
    let expected_og = MixedGraph::from_edges(3, &[(1, 2), (1, 3), (2, 3), (3, 2)], &[(1, 2), (1, 3), (2, 3)])?;
    let expected_local = MixedGraph::from_edges(3, &[(1, 3), (2, 3), (3, 2)], &[(1, 3)])?;
    let mut ok = true;
    for (label, got, want) in [("OG", &og, &expected_og), ("LOCAL", &local, &expected_local)] {
        if got == want {
            writeln!(out, "{label}: {} — MATCH", edge_summary(got))?;
        } else {
            ok = false;
            writeln!(out, "{label}: {} — MISMATCH (expected {})", edge_summary(got), edge_summary(want))?;
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn read_graph(path: &Path, n: Option<usize>, stdin: &mut dyn Read) -> std::result::Result<MixedGraph, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path)?
    };
    Ok(parse_edge_list(&text, n)?)
}

fn parse_vertices(text: &str) -> std::result::Result<VertexSet, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Failure::Usage(format!("bad vertex `{s}`"))))
        .collect()
}

fn parse_query(q: &QueryArgs) -> std::result::Result<SeparationQuery, Failure> {
    let mut sets = [q.a.clone(), q.b.clone(), q.c.clone()];
    for item in &q.sets {
        let (name, list) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected SET=LIST, got `{item}`")))?;
        let slot = match name {
            "A" | "a" => 0,
            "B" | "b" => 1,
            "C" | "c" => 2,
            _ => return Err(Failure::Usage(format!("unknown set `{name}`, expected A, B or C"))),
        };
        if sets[slot].is_some() {
            return Err(Failure::Usage(format!("set {name} given twice")));
        }
        sets[slot] = Some(list.to_string());
    }
    let [a, b, c] = sets;
    let a = parse_vertices(&a.ok_or_else(|| Failure::Usage("missing set A".into()))?)?;
    let b = parse_vertices(&b.ok_or_else(|| Failure::Usage("missing set B".into()))?)?;
    let c = parse_vertices(c.as_deref().unwrap_or(""))?;
    Ok(SeparationQuery::new(a, b, c)?)
}

/// `brownian` gives `None`, `cpoisson:<rate>` gives the jump rate.
fn parse_driver(text: &str) -> std::result::Result<Option<f64>, Failure> {
    if text == "brownian" {
        return Ok(None);
    }
    let rate = text
        .strip_prefix("cpoisson:")
        .and_then(|r| r.parse::<f64>().ok())
        .ok_or_else(|| Failure::Usage(format!("unknown driver `{text}`, expected brownian or cpoisson:<rate>")))?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Failure::Usage(format!("jump rate must be positive, got {rate}")));
    }
    Ok(Some(rate))
}
