//! d-uniform multihypergraphs, degree sequences, and the fixture text format.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A d-uniform multihypergraph on `n` vertices.
///
/// Edges are multisets of exactly `d` vertex slots; the same vertex may fill
/// several slots of one edge, and identical edges may repeat. Slots are kept
/// sorted so equal edges compare equal. Storage is a flat slot array, `d`
/// entries per edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiHypergraph {
    n: usize,
    d: usize,
    slots: Vec<usize>,
}

impl MultiHypergraph {
    /// Builds a hypergraph, validating arity and vertex ranges and sorting
    /// each edge's slots.
    pub fn new<I, E>(n: usize, d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = usize>,
    {
        if n == 0 {
            return Err(Error::invalid("hypergraph needs at least one vertex"));
        }
        if d < 2 {
            return Err(Error::invalid(format!("edge arity d={d} must be >= 2")));
        }
        let mut slots = Vec::new();
        for (i, edge) in edges.into_iter().enumerate() {
            let start = slots.len();
            slots.extend(edge);
            let got = slots.len() - start;
            if got != d {
                return Err(Error::invalid(format!(
                    "edge {i} has {got} slots, expected {d}"
                )));
            }
            if let Some(&v) = slots[start..].iter().find(|&&v| v >= n) {
                return Err(Error::invalid(format!(
                    "edge {i} references vertex {v}, but n={n}"
                )));
            }
            slots[start..].sort_unstable();
        }
        Ok(MultiHypergraph { n, d, slots })
    }

    /// An edgeless hypergraph.
    pub fn empty(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, std::iter::empty::<Vec<usize>>())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.slots.len() / self.d
    }

    /// The sorted slot list of edge `i`.
    pub fn edge(&self, i: usize) -> &[usize] {
        &self.slots[i * self.d..(i + 1) * self.d]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[usize]> {
        self.slots.chunks_exact(self.d)
    }

    /// Per-vertex count of edge-slot incidences. An edge containing a vertex
    /// twice contributes two to that vertex's degree.
    pub fn degree_sequence(&self) -> DegreeSequence {
        let mut degrees = vec![0usize; self.n];
        for &v in &self.slots {
            degrees[v] += 1;
        }
        DegreeSequence { degrees }
    }

    /// Size of the largest connected component; vertices in no edge count as
    /// singleton components. Union-find over edge slots, so repeated vertices
    /// and multi-edges are harmless.
    pub fn largest_component_size(&self) -> usize {
        let mut uf = UnionFind::new(self.n);
        for edge in self.edges() {
            for pair in edge.windows(2) {
                uf.union(pair[0], pair[1]);
            }
        }
        uf.largest_set_size()
    }

    /// Writes the fixture format: a header line `n d`, then one edge per
    /// line as `d` space-separated vertex indices.
    pub fn write_fixture<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n, self.d)?;
        for edge in self.edges() {
            let line: Vec<String> = edge.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn to_fixture_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_fixture(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("fixture is ascii")
    }

    /// Parses the fixture format produced by [`Self::write_fixture`].
    pub fn parse_fixture<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty fixture, expected `n d` header"))?
            .1?;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), 1, "vertex count")?;
        let d: usize = parse_field(parts.next(), 1, "edge arity")?;
        if parts.next().is_some() {
            return Err(parse_err(1, "header has trailing fields"));
        }
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let edge: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| parse_err(idx + 1, format!("bad vertex index `{tok}`")))
                })
                .collect::<Result<_>>()?;
            if edge.len() != d {
                return Err(parse_err(
                    idx + 1,
                    format!("edge has {} slots, expected {d}", edge.len()),
                ));
            }
            edges.push(edge);
        }
        MultiHypergraph::new(n, d, edges)
    }

    pub fn parse_fixture_str(s: &str) -> Result<Self> {
        Self::parse_fixture(s.as_bytes())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_field(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("bad {what}")))
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::io("<stream>", e)
    }
}

/// Per-vertex slot-incidence counts; the sum always equals `d * |edges|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    pub degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn sum(&self) -> usize {
        self.degrees.iter().sum()
    }
}

/// Disjoint-set forest with path compression and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, id: usize) -> usize {
        let mut root = id;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut node = id;
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            self.parent[ra] = rb;
            self.size[rb] += self.size[ra];
        } else {
            self.parent[rb] = ra;
            self.size[ra] += self.size[rb];
        }
    }

    pub fn largest_set_size(&mut self) -> usize {
        (0..self.parent.len())
            .map(|v| {
                let r = self.find(v);
                self.size[r]
            })
            .max()
            .unwrap_or(0)
    }
}
