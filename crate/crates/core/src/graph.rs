//! Simple graphs on at most 64 vertices.
//!
//! Each adjacency row is a single `u64`, so neighborhood tests, clique and
//! coclique checks are a handful of bit operations. Besides the container
//! itself this module holds the two text formats (edge list and graph6),
//! partitions into cliques and cocliques, the binary chromatic number, Turán
//! numbers and a small catalog of named graphs.

use std::fmt;

use thiserror::Error;

/// Largest supported vertex count.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph6 byte {byte}: {msg}")]
    Graph6 { byte: usize, msg: String },
    #[error("{0} vertices requested; supported range is 1..=64")]
    Capacity(usize),
    #[error("catalog: {0}")]
    Catalog(String),
}

/// A finite simple graph on the vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimpleGraph {
    n: usize,
    rows: Vec<u64>,
}

impl SimpleGraph {
    /// The edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_VERTICES {
            return Err(GraphError::Capacity(n));
        }
        Ok(SimpleGraph { n, rows: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(GraphError::Parse {
                    line: 0,
                    msg: format!("invalid edge {u} {v} for {n} vertices"),
                });
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    /// Build from an arbitrary symmetric predicate; only `u < v` is queried.
    pub fn from_fn(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Result<Self, GraphError> {
        let mut g = Self::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                if adjacent(u, v) {
                    g.set_edge(u, v, true);
                }
            }
        }
        Ok(g)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    /// Bit mask with one bit per vertex.
    #[inline]
    pub fn vertex_mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    /// Adds or removes the edge `{u, v}`.
    ///
    /// Panics if `u == v` or either endpoint is out of range.
    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        assert!(u < self.n && v < self.n, "vertex out of range");
        assert_ne!(u, v, "self-loops are not allowed");
        if present {
            self.rows[u] |= 1 << v;
            self.rows[v] |= 1 << u;
        } else {
            self.rows[u] &= !(1 << v);
            self.rows[v] &= !(1 << u);
        }
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        let present = self.has_edge(u, v);
        self.set_edge(u, v, !present);
    }

    /// Neighborhood of `u` as a bit mask.
    #[inline]
    pub fn neighbors(&self, u: usize) -> u64 {
        self.rows[u]
    }

    #[inline]
    pub(crate) fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn degree(&self, u: usize) -> usize {
        self.rows[u].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| (u + 1..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> SimpleGraph {
        let all = self.vertex_mask();
        let rows = (0..self.n).map(|u| !self.rows[u] & all & !(1 << u)).collect();
        SimpleGraph { n: self.n, rows }
    }

    /// The subgraph induced by `vertices`, relabelled `0..vertices.len()` in
    /// the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<SimpleGraph, GraphError> {
        SimpleGraph::from_fn(vertices.len(), |i, j| self.has_edge(vertices[i], vertices[j]))
    }

    /// True when every pair inside `mask` is adjacent.
    pub fn is_clique(&self, mask: u64) -> bool {
        bits(mask).all(|u| mask & !(1 << u) & !self.rows[u] == 0)
    }

    /// True when no pair inside `mask` is adjacent.
    pub fn is_coclique(&self, mask: u64) -> bool {
        bits(mask).all(|u| mask & self.rows[u] == 0)
    }

    /// Disjoint union; vertices of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &SimpleGraph) -> Result<SimpleGraph, GraphError> {
        let n = self.n + other.n;
        let mut g = SimpleGraph::new(n)?;
        for (u, v) in self.edges() {
            g.set_edge(u, v, true);
        }
        for (u, v) in other.edges() {
            g.set_edge(u + self.n, v + self.n, true);
        }
        Ok(g)
    }

    /// Edge-list text: the vertex count, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Standard graph6 encoding without header or trailing newline.
    pub fn to_graph6(&self) -> String {
        let mut out = Vec::new();
        let n = self.n;
        if n <= 62 {
            out.push(n as u8 + 63);
        } else {
            out.push(126);
            out.push(((n >> 12) & 63) as u8 + 63);
            out.push(((n >> 6) & 63) as u8 + 63);
            out.push((n & 63) as u8 + 63);
        }
        let mut acc = 0u8;
        let mut filled = 0;
        for v in 1..n {
            for u in 0..v {
                acc = acc << 1 | self.has_edge(u, v) as u8;
                filled += 1;
                if filled == 6 {
                    out.push(acc + 63);
                    acc = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            out.push((acc << (6 - filled)) + 63);
        }
        String::from_utf8(out).expect("graph6 output is ASCII")
    }
}

impl fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimpleGraph({}, {:?})", self.n, self.edges().collect::<Vec<_>>())
    }
}

impl fmt::Display for SimpleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

/// Iterate the set bit positions of a mask, lowest first.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

// ---------------------------------------------------------------------------
// Text formats

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Graph6,
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<SimpleGraph, GraphError> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::Graph6 => parse_graph6(text),
    }
}

fn parse_edge_list(text: &str) -> Result<SimpleGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or(GraphError::Parse { line: 1, msg: "missing vertex count".into() })?;
    let n: usize = header
        .parse()
        .map_err(|_| GraphError::Parse { line, msg: format!("expected vertex count, found {header:?}") })?;
    let mut g = SimpleGraph::new(n)?;

    for (line, text) in lines {
        let err = |msg: String| GraphError::Parse { line, msg };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected \"u v\", found {text:?}")));
        }
        let u: usize = fields[0].parse().map_err(|_| err(format!("bad vertex {:?}", fields[0])))?;
        let v: usize = fields[1].parse().map_err(|_| err(format!("bad vertex {:?}", fields[1])))?;
        if u == v {
            return Err(err(format!("self-loop at vertex {u}")));
        }
        if u > v {
            return Err(err(format!("edge {u} {v} must be written with u < v")));
        }
        if v >= n {
            return Err(err(format!("vertex {v} out of range for {n} vertices")));
        }
        if g.has_edge(u, v) {
            return Err(err(format!("duplicate edge {u} {v}")));
        }
        g.set_edge(u, v, true);
    }
    Ok(g)
}

fn parse_graph6(text: &str) -> Result<SimpleGraph, GraphError> {
    let text = text.trim_end_matches(['\n', '\r']);
    let (offset, body) = match text.strip_prefix(">>graph6<<") {
        Some(rest) => (10, rest.as_bytes()),
        None => (0, text.as_bytes()),
    };
    let err = |i: usize, msg: &str| GraphError::Graph6 { byte: offset + i, msg: msg.to_string() };

    if let Some(i) = body.iter().position(|&b| !(63..=126).contains(&b)) {
        return Err(err(i, "byte outside the printable graph6 range 63..=126"));
    }
    let first = *body.first().ok_or_else(|| err(0, "empty input"))?;
    let (n, mut pos) = if first < 126 {
        ((first - 63) as usize, 1)
    } else {
        if body.len() < 4 {
            return Err(err(body.len(), "truncated vertex count"));
        }
        if body[1] == 126 {
            return Err(GraphError::Capacity(usize::MAX));
        }
        let n = body[1..4].iter().fold(0usize, |acc, &b| acc << 6 | (b - 63) as usize);
        (n, 4)
    };
    let mut g = SimpleGraph::new(n)?;

    let pairs = n * (n - 1) / 2;
    let expected = pairs.div_ceil(6);
    if body.len() - pos != expected {
        return Err(err(body.len().min(pos + expected), &format!("expected {expected} data bytes for {n} vertices")));
    }
    let mut bit = 0;
    for v in 1..n {
        for u in 0..v {
            let byte = body[pos + bit / 6] - 63;
            if byte >> (5 - bit % 6) & 1 == 1 {
                g.set_edge(u, v, true);
            }
            bit += 1;
        }
    }
    pos += bit / 6;
    if bit % 6 != 0 {
        let pad_mask = (1u8 << (6 - bit % 6)) - 1;
        if (body[pos] - 63) & pad_mask != 0 {
            return Err(err(pos, "non-zero padding bits"));
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Catalog

pub fn complete(n: usize) -> Result<SimpleGraph, GraphError> {
    SimpleGraph::from_fn(n, |_, _| true)
}

pub fn edgeless(n: usize) -> Result<SimpleGraph, GraphError> {
    SimpleGraph::new(n)
}

pub fn cycle(n: usize) -> Result<SimpleGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::Catalog(format!("C_n needs n >= 3, got {n}")));
    }
    SimpleGraph::from_fn(n, |u, v| v - u == 1 || (u == 0 && v == n - 1))
}

pub fn path(n: usize) -> Result<SimpleGraph, GraphError> {
    SimpleGraph::from_fn(n, |u, v| v - u == 1)
}

pub fn complete_bipartite(m: usize, n: usize) -> Result<SimpleGraph, GraphError> {
    SimpleGraph::from_fn(m + n, |u, v| u < m && v >= m)
}

/// An `a`-clique plus `b` isolated vertices; the clique occupies `0..a`.
pub fn clique_plus_coclique(a: usize, b: usize) -> Result<SimpleGraph, GraphError> {
    SimpleGraph::from_fn(a + b, |u, v| u < a && v < a)
}

/// The square of the 9-cycle with the triangle `{0, 3, 6}` added.
pub fn h9() -> SimpleGraph {
    SimpleGraph::from_fn(9, |u, v| {
        let d = (v - u) % 9;
        matches!(d, 1 | 2 | 7 | 8) || (u % 3 == 0 && v % 3 == 0)
    })
    .expect("9 vertices")
}

/// Triangle `{0, 1, 2}` with the pendant edge `{2, 3}`.
pub fn co_p3_k1() -> SimpleGraph {
    SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).expect("4 vertices")
}

/// Look up a named graph.
///
/// Names: `K_a_plus_E_b(a,b)`, `complement_K_a_plus_E_b(a,b)`, `K_m_n(m,n)`,
/// `H9`, `coP3K1`, `C_n(n)`, `K_n(n)`, `E_n(n)`.
pub fn catalog(name: &str, params: &[usize]) -> Result<SimpleGraph, GraphError> {
    let arity = |want: usize| -> Result<(), GraphError> {
        if params.len() == want {
            Ok(())
        } else {
            Err(GraphError::Catalog(format!("{name} takes {want} parameter(s), got {}", params.len())))
        }
    };
    match name {
        "K_a_plus_E_b" => {
            arity(2)?;
            clique_plus_coclique(params[0], params[1])
        }
        "complement_K_a_plus_E_b" => {
            arity(2)?;
            Ok(clique_plus_coclique(params[0], params[1])?.complement())
        }
        "K_m_n" => {
            arity(2)?;
            complete_bipartite(params[0], params[1])
        }
        "H9" => {
            arity(0)?;
            Ok(h9())
        }
        "coP3K1" => {
            arity(0)?;
            Ok(co_p3_k1())
        }
        "C_n" => {
            arity(1)?;
            cycle(params[0])
        }
        "K_n" => {
            arity(1)?;
            complete(params[0])
        }
        "E_n" => {
            arity(1)?;
            edgeless(params[0])
        }
        "P_n" => {
            arity(1)?;
            path(params[0])
        }
        _ => Err(GraphError::Catalog(format!("unknown graph {name:?}"))),
    }
}

/// Resolve a catalog reference such as `H9`, `K33`, `K_m_n(3,3)` or `C_n(5)`.
pub fn catalog_ref(reference: &str) -> Result<SimpleGraph, GraphError> {
    let reference = reference.trim();
    match reference {
        "K33" => return catalog("K_m_n", &[3, 3]),
        "claw" => return catalog("K_m_n", &[1, 3]),
        _ => {}
    }
    let (name, params) = match reference.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| GraphError::Catalog(format!("missing ')' in {reference:?}")))?;
            let params = inner
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| GraphError::Catalog(format!("bad parameter {s:?} in {reference:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (name.trim(), params)
        }
        None => (reference, Vec::new()),
    };
    catalog(name, &params)
}

// ---------------------------------------------------------------------------
// Clique / coclique partitions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartKind {
    Clique,
    Coclique,
}

/// A partition of the vertex set into `cliques` clique parts followed by
/// `cocliques` coclique parts. Parts may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    cliques: usize,
    cocliques: usize,
    assignment: Vec<usize>,
}

impl PartitionSpec {
    pub fn cliques(&self) -> usize {
        self.cliques
    }

    pub fn cocliques(&self) -> usize {
        self.cocliques
    }

    pub fn part_count(&self) -> usize {
        self.cliques + self.cocliques
    }

    pub fn kind(&self, part: usize) -> PartKind {
        if part < self.cliques {
            PartKind::Clique
        } else {
            PartKind::Coclique
        }
    }

    /// Part index of every vertex.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Vertices of each part, in part order.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.part_count()];
        for (v, &p) in self.assignment.iter().enumerate() {
            parts[p].push(v);
        }
        parts
    }

    /// Checks the partition against `g`.
    pub fn is_valid_for(&self, g: &SimpleGraph) -> bool {
        if self.assignment.len() != g.order() || self.assignment.iter().any(|&p| p >= self.part_count()) {
            return false;
        }
        self.parts().iter().enumerate().all(|(i, part)| {
            let mask = part.iter().fold(0u64, |m, &v| m | 1 << v);
            match self.kind(i) {
                PartKind::Clique => g.is_clique(mask),
                PartKind::Coclique => g.is_coclique(mask),
            }
        })
    }
}

/// Search for a partition of `V(g)` into at most `cocliques` cocliques and at
/// most `cliques` cliques.
///
/// Vertices are placed in descending-degree order and clique parts are tried
/// before coclique parts, so the witness is deterministic.
pub fn find_partition(g: &SimpleGraph, cocliques: usize, cliques: usize) -> Option<PartitionSpec> {
    let n = g.order();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));

    let parts = cliques + cocliques;
    let mut masks = vec![0u64; parts];
    let mut assignment = vec![usize::MAX; n];

    fn place(
        g: &SimpleGraph,
        order: &[usize],
        idx: usize,
        cliques: usize,
        masks: &mut [u64],
        assignment: &mut [usize],
    ) -> bool {
        let Some(&v) = order.get(idx) else { return true };
        let nbrs = g.neighbors(v);
        let mut tried_empty_clique = false;
        let mut tried_empty_coclique = false;
        for p in 0..masks.len() {
            let clique = p < cliques;
            let mask = masks[p];
            if mask == 0 {
                // empty parts of one kind are interchangeable
                let seen = if clique { &mut tried_empty_clique } else { &mut tried_empty_coclique };
                if *seen {
                    continue;
                }
                *seen = true;
            }
            let fits = if clique { mask & !nbrs == 0 } else { mask & nbrs == 0 };
            if !fits {
                continue;
            }
            masks[p] |= 1 << v;
            assignment[v] = p;
            if place(g, order, idx + 1, cliques, masks, assignment) {
                return true;
            }
            masks[p] &= !(1 << v);
        }
        false
    }

    place(g, &order, 0, cliques, &mut masks, &mut assignment).then_some(PartitionSpec { cliques, cocliques, assignment })
}

/// The least `m` such that for every `c` in `0..=m` the vertices split into
/// `c` cliques and `m - c` cocliques.
pub fn binary_chromatic(g: &SimpleGraph) -> usize {
    (1..)
        .find(|&m| (0..=m).all(|c| find_partition(g, m - c, c).is_some()))
        .expect("m = n always succeeds with singleton parts")
}

/// Edge count of the balanced complete `k`-partite graph on `n` vertices,
/// i.e. the maximum number of edges without a `(k+1)`-clique.
pub fn turan_number(n: u64, k: u64) -> u64 {
    assert!(k >= 1, "turan_number needs k >= 1");
    let q = n / k;
    let r = n % k;
    // r parts of size q+1, k-r parts of size q
    let sum_sq = r * (q + 1) * (q + 1) + (k - r) * q * q;
    (n * n - sum_sq) / 2
}
