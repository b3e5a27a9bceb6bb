//! Line-oriented graph files.
//!
//! ```text
//! # comment
//! g <n> <m> <W>
//! b <v> <b_v>        (optional, default 1)
//! e <u> <v> <w>      (stream order)
//! ```
//!
//! The same format stores subgraphs: a subgraph file lists its member edges
//! with the parent's header values for `n` and `W`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{Capacities, EdgeId, GraphError, MultiGraph, Subgraph, Vertex, Weight};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `g <n> <m> <W>` header")]
    MissingHeader,
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCount { declared: usize, found: usize },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ParseError {
    /// Line number the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::Graph { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Parsed graph file.
#[derive(Clone, Debug)]
pub struct GraphFile {
    pub graph: MultiGraph,
    pub caps: Capacities,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<GraphFile, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut graph: Option<MultiGraph> = None;
    let mut caps: Option<Capacities> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let kind = toks.next().unwrap();
        match kind {
            "g" => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                let n: usize = field(toks.next(), line, "vertex count")?;
                let m: usize = field(toks.next(), line, "edge count")?;
                let w: Weight = field(toks.next(), line, "weight cap")?;
                let g = MultiGraph::new(n, w).map_err(|source| ParseError::Graph { line, source })?;
                header = Some((n, m));
                graph = Some(g);
                caps = Some(Capacities::ones(n));
            }
            "b" => {
                let caps = caps.as_mut().ok_or_else(|| syntax(line, "capacity before header"))?;
                let v: Vertex = field(toks.next(), line, "vertex")?;
                let b: u32 = field(toks.next(), line, "capacity")?;
                caps.set(v, b)
                    .map_err(|source| ParseError::Graph { line, source })?;
            }
            "e" => {
                let g = graph.as_mut().ok_or_else(|| syntax(line, "edge before header"))?;
                let u: Vertex = field(toks.next(), line, "endpoint")?;
                let v: Vertex = field(toks.next(), line, "endpoint")?;
                let w: Weight = field(toks.next(), line, "weight")?;
                g.add_edge(u, v, w)
                    .map_err(|source| ParseError::Graph { line, source })?;
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
        if toks.next().is_some() {
            return Err(syntax(line, "trailing tokens"));
        }
    }

    let (_, declared) = header.ok_or(ParseError::MissingHeader)?;
    let graph = graph.unwrap();
    if graph.m() != declared {
        return Err(ParseError::EdgeCount {
            declared,
            found: graph.m(),
        });
    }
    Ok(GraphFile {
        graph,
        caps: caps.unwrap(),
    })
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<GraphFile, ParseError> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text)
}

/// Serialises the given edges of `graph` (in the given order) with the
/// graph's header values and every non-unit capacity.
pub fn write_edges<I>(graph: &MultiGraph, caps: &Capacities, edges: I) -> String
where
    I: IntoIterator<Item = EdgeId>,
{
    let ids: Vec<EdgeId> = edges.into_iter().collect();
    let mut out = String::new();
    writeln!(out, "g {} {} {}", graph.n(), ids.len(), graph.w_cap()).unwrap();
    for v in 0..caps.len() {
        if caps.get(v) != 1 {
            writeln!(out, "b {} {}", v, caps.get(v)).unwrap();
        }
    }
    for id in ids {
        let e = graph.edge(id);
        writeln!(out, "e {} {} {}", e.u, e.v, e.w).unwrap();
    }
    out
}

pub fn write_graph(graph: &MultiGraph, caps: &Capacities) -> String {
    write_edges(graph, caps, graph.edges().iter().map(|e| e.id))
}

pub fn write_subgraph(h: &Subgraph<'_>, caps: &Capacities) -> String {
    write_edges(h.graph(), caps, h.edge_ids())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContainmentError {
    #[error("subgraph has {sub} vertices, graph has {graph}")]
    VertexCount { sub: usize, graph: usize },
    #[error("subgraph edge ({u}, {v}, {w}) is not an unused edge of the graph")]
    Missing { u: Vertex, v: Vertex, w: Weight },
}

/// Matches the edges of `sub` against `graph` as a multiset, assigning each
/// subgraph edge the smallest unused graph edge id with the same endpoints
/// and weight.
pub fn embed_subgraph(graph: &MultiGraph, sub: &MultiGraph) -> Result<Vec<EdgeId>, ContainmentError> {
    use std::collections::HashMap;
    if sub.n() != graph.n() {
        return Err(ContainmentError::VertexCount {
            sub: sub.n(),
            graph: graph.n(),
        });
    }
    let mut pool: HashMap<(Vertex, Vertex, Weight), std::collections::VecDeque<EdgeId>> =
        HashMap::new();
    for e in graph.edges() {
        let (u, v) = e.pair();
        pool.entry((u, v, e.w)).or_default().push_back(e.id);
    }
    let mut out = Vec::with_capacity(sub.m());
    for e in sub.edges() {
        let (u, v) = e.pair();
        let id = pool
            .get_mut(&(u, v, e.w))
            .and_then(|q| q.pop_front())
            .ok_or(ContainmentError::Missing { u, v, w: e.w })?;
        out.push(id);
    }
    out.sort_unstable();
    Ok(out)
}
