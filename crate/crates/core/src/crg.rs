//! Colored regularity graphs.
//!
//! A CRG is a complete graph whose vertices are white or black and whose
//! edges are white, gray or black. It is a template for editing a large
//! graph: partition the vertices into one class per CRG vertex, then make
//! white classes and white pairs empty, black classes and black pairs
//! complete, and leave gray pairs alone.
//!
//! A simple graph `H` *maps into* a CRG `K` when its vertices can be sent to
//! `K` such that every edge of `H` lands on a common black vertex or on a
//! black or gray edge, and every non-edge lands on a common white vertex or
//! on a white or gray edge. A CRG is admissible for `Forb(H)` exactly when
//! `H` does not map into it.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{bits, find_partition, binary_chromatic, SimpleGraph};

/// Largest supported CRG order.
pub const MAX_CRG_VERTICES: usize = 24;

/// Backtracking nodes granted to a homomorphism search by default.
pub const DEFAULT_HOM_BUDGET: u64 = 10_000_000;

/// Largest order accepted by exhaustive enumeration.
pub const MAX_ENUMERATION_ORDER: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrgError {
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("CRG order {0} outside the supported range 1..={MAX_CRG_VERTICES}")]
    Capacity(usize),
    #[error("exhaustive enumeration supports orders up to {MAX_ENUMERATION_ORDER}, got {0}")]
    EnumerationCapacity(usize),
    #[error("homomorphism search exhausted its budget of {budget} nodes for a {order}-vertex graph into\n{crg}")]
    Indeterminate { budget: u64, order: usize, crg: String },
    #[error("the forbidden-graph list is empty")]
    EmptyFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexColor {
    White,
    Black,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeColor {
    White,
    Gray,
    Black,
}

impl VertexColor {
    pub fn swapped(self) -> Self {
        match self {
            VertexColor::White => VertexColor::Black,
            VertexColor::Black => VertexColor::White,
        }
    }

    fn as_edge(self) -> EdgeColor {
        match self {
            VertexColor::White => EdgeColor::White,
            VertexColor::Black => EdgeColor::Black,
        }
    }

    fn symbol(self) -> char {
        match self {
            VertexColor::White => 'w',
            VertexColor::Black => 'b',
        }
    }
}

impl EdgeColor {
    pub fn swapped(self) -> Self {
        match self {
            EdgeColor::White => EdgeColor::Black,
            EdgeColor::Gray => EdgeColor::Gray,
            EdgeColor::Black => EdgeColor::White,
        }
    }

    fn symbol(self) -> char {
        match self {
            EdgeColor::White => 'w',
            EdgeColor::Gray => 'g',
            EdgeColor::Black => 'b',
        }
    }
}

/// A colored regularity graph on `1..=24` vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Crg {
    vertices: Vec<VertexColor>,
    // row-major k*k, symmetric; the diagonal is unused
    edges: Vec<EdgeColor>,
}

impl Crg {
    /// Build from vertex colors and an edge-color function queried for
    /// `i < j` only.
    pub fn from_fn(
        vertices: Vec<VertexColor>,
        mut edge: impl FnMut(usize, usize) -> EdgeColor,
    ) -> Result<Crg, CrgError> {
        let k = vertices.len();
        if k == 0 || k > MAX_CRG_VERTICES {
            return Err(CrgError::Capacity(k));
        }
        let mut edges = vec![EdgeColor::Gray; k * k];
        for i in 0..k {
            for j in i + 1..k {
                let c = edge(i, j);
                edges[i * k + j] = c;
                edges[j * k + i] = c;
            }
        }
        Ok(Crg { vertices, edges })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> VertexColor {
        self.vertices[i]
    }

    /// Color of the edge `{i, j}`. Panics when `i == j`.
    #[inline]
    pub fn edge(&self, i: usize, j: usize) -> EdgeColor {
        assert_ne!(i, j, "a CRG has no loops");
        self.edges[i * self.order() + j]
    }

    pub fn set_vertex(&mut self, i: usize, color: VertexColor) {
        self.vertices[i] = color;
    }

    pub fn set_edge(&mut self, i: usize, j: usize, color: EdgeColor) {
        assert_ne!(i, j, "a CRG has no loops");
        let k = self.order();
        self.edges[i * k + j] = color;
        self.edges[j * k + i] = color;
    }

    pub fn vertex_colors(&self) -> &[VertexColor] {
        &self.vertices
    }

    pub fn white_vertices(&self) -> usize {
        self.vertices.iter().filter(|&&c| c == VertexColor::White).count()
    }

    pub fn black_vertices(&self) -> usize {
        self.order() - self.white_vertices()
    }

    /// Unordered pairs `(i, j)`, `i < j`, with their colors.
    pub fn edge_list(&self) -> impl Iterator<Item = (usize, usize, EdgeColor)> + '_ {
        let k = self.order();
        (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j, self.edge(i, j))))
    }

    pub fn count_edges(&self, color: EdgeColor) -> usize {
        self.edge_list().filter(|&(_, _, c)| c == color).count()
    }

    pub fn white_edges(&self) -> usize {
        self.count_edges(EdgeColor::White)
    }

    pub fn gray_edges(&self) -> usize {
        self.count_edges(EdgeColor::Gray)
    }

    pub fn black_edges(&self) -> usize {
        self.count_edges(EdgeColor::Black)
    }

    /// Exchange white and black on vertices and edges; gray stays gray.
    ///
    /// `H` maps into `K` exactly when the complement of `H` maps into the
    /// swapped `K`.
    pub fn swapped(&self) -> Crg {
        Crg {
            vertices: self.vertices.iter().map(|c| c.swapped()).collect(),
            edges: self.edges.iter().map(|c| c.swapped()).collect(),
        }
    }

    /// The CRG induced on `vertices`, relabelled in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Crg, CrgError> {
        Crg::from_fn(vertices.iter().map(|&v| self.vertex(v)).collect(), |i, j| {
            self.edge(vertices[i], vertices[j])
        })
    }

    /// Position of this CRG in the enumeration order of its vertex count.
    pub fn index(&self) -> u64 {
        let vcode = self
            .vertices
            .iter()
            .fold(0u64, |acc, &c| acc << 1 | (c == VertexColor::Black) as u64);
        let ecode = self.edge_list().fold(0u64, |acc, (_, _, c)| acc * 3 + c as u64);
        vcode * pow3(pair_count(self.order())) + ecode
    }

    /// Inverse of [`Crg::index`].
    pub fn from_index(k: usize, index: u64) -> Result<Crg, CrgError> {
        if k == 0 || k > MAX_CRG_VERTICES {
            return Err(CrgError::Capacity(k));
        }
        let pairs = pair_count(k);
        assert!(k <= 12 && index < crg_count(k), "index out of range");
        let trits = pow3(pairs);
        let vcode = index / trits;
        let mut ecode = index % trits;
        let vertices = (0..k)
            .map(|i| if vcode >> (k - 1 - i) & 1 == 1 { VertexColor::Black } else { VertexColor::White })
            .collect();
        let mut colors = vec![EdgeColor::Gray; pairs];
        for slot in colors.iter_mut().rev() {
            *slot = match ecode % 3 {
                0 => EdgeColor::White,
                1 => EdgeColor::Gray,
                _ => EdgeColor::Black,
            };
            ecode /= 3;
        }
        let mut it = colors.into_iter();
        Crg::from_fn(vertices, |_, _| it.next().expect("pair count"))
    }

    /// The normalized text encoding, ending in a newline.
    pub fn to_text(&self) -> String {
        let k = self.order();
        let mut out = format!("crg {k}\n");
        out.extend(self.vertices.iter().map(|c| c.symbol()));
        out.push('\n');
        for i in 0..k.saturating_sub(1) {
            out.extend((i + 1..k).map(|j| self.edge(i, j).symbol()));
            out.push('\n');
        }
        out
    }

    /// True when some color-preserving bijection maps `self` onto `other`.
    pub fn is_isomorphic(&self, other: &Crg) -> bool {
        let k = self.order();
        if k != other.order()
            || self.white_vertices() != other.white_vertices()
            || [EdgeColor::White, EdgeColor::Gray, EdgeColor::Black]
                .iter()
                .any(|&c| self.count_edges(c) != other.count_edges(c))
        {
            return false;
        }
        let mut image = vec![usize::MAX; k];
        let mut used = 0u32;

        fn extend(a: &Crg, b: &Crg, i: usize, image: &mut [usize], used: &mut u32) -> bool {
            let k = a.order();
            if i == k {
                return true;
            }
            for t in 0..k {
                if *used >> t & 1 == 1 || a.vertex(i) != b.vertex(t) {
                    continue;
                }
                if (0..i).all(|j| a.edge(i, j) == b.edge(t, image[j])) {
                    image[i] = t;
                    *used |= 1 << t;
                    if extend(a, b, i + 1, image, used) {
                        return true;
                    }
                    *used &= !(1 << t);
                }
            }
            false
        }
        extend(self, other, 0, &mut image, &mut used)
    }

    /// Smallest [`Crg::index`] over all vertex relabellings; an isomorphism
    /// invariant. Cost is `k!`, so only small orders are accepted.
    pub fn canonical_index(&self) -> u64 {
        let k = self.order();
        assert!(k <= 8, "canonical_index is exhaustive over k! relabellings");
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = u64::MAX;
        permute(&mut perm, 0, &mut |p| {
            let relabelled = self.induced(p).expect("same order");
            best = best.min(relabelled.index());
        });
        best
    }
}

fn permute(perm: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

impl fmt::Debug for Crg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Crg({:?})", self.to_text().replace('\n', "/"))
    }
}

impl fmt::Display for Crg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn pair_count(k: usize) -> usize {
    k * (k.saturating_sub(1)) / 2
}

fn pow3(e: usize) -> u64 {
    3u64.pow(e as u32)
}

/// Number of CRGs on exactly `k` labelled vertices: `2^k 3^(k choose 2)`.
pub fn crg_count(k: usize) -> u64 {
    (1u64 << k) * pow3(pair_count(k))
}

/// Parse the CRG text format.
///
/// ```text
/// crg <k>
/// <k vertex colors over {w,b}>
/// <row 0: colors of {0,1} .. {0,k-1} over {w,g,b}>
/// ...
/// <row k-2: color of {k-2,k-1}>
/// ```
///
/// Upper case and CRLF line endings are accepted; [`Crg::to_text`] emits
/// the normalized form.
pub fn parse_crg(text: &str) -> Result<Crg, CrgError> {
    let err = |line: usize, column: usize, msg: String| CrgError::Parse { line, column, msg };
    let lowered = text.to_ascii_lowercase();
    let mut lines: Vec<&str> = lowered.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }

    let header = lines.first().ok_or_else(|| err(1, 1, "empty input".into()))?;
    let k: usize = header
        .strip_prefix("crg ")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or_else(|| err(1, 1, format!("expected \"crg <k>\", found {header:?}")))?;
    if k == 0 || k > MAX_CRG_VERTICES {
        return Err(CrgError::Capacity(k));
    }
    if lines.len() != k + 1 {
        return Err(err(lines.len().min(k + 1) + 1, 1, format!("expected {} lines for k = {k}, found {}", k + 1, lines.len())));
    }

    let vline = lines[1];
    if vline.chars().count() != k {
        return Err(err(2, 1, format!("expected {k} vertex colors, found {}", vline.chars().count())));
    }
    let vertices = vline
        .chars()
        .enumerate()
        .map(|(i, ch)| match ch {
            'w' => Ok(VertexColor::White),
            'b' => Ok(VertexColor::Black),
            _ => Err(err(2, i + 1, format!("bad vertex color {ch:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut pairs = Vec::with_capacity(pair_count(k));
    for i in 0..k - 1 {
        let row = lines[i + 2];
        let want = k - 1 - i;
        if row.chars().count() != want {
            return Err(err(i + 3, 1, format!("row {i} needs {want} edge colors, found {}", row.chars().count())));
        }
        for (col, ch) in row.chars().enumerate() {
            pairs.push(match ch {
                'w' => EdgeColor::White,
                'g' => EdgeColor::Gray,
                'b' => EdgeColor::Black,
                _ => return Err(err(i + 3, col + 1, format!("bad edge color {ch:?}"))),
            });
        }
    }
    let mut it = pairs.into_iter();
    Crg::from_fn(vertices, |_, _| it.next().expect("row lengths checked"))
}

/// `K(a, c)`: `a` white vertices followed by `c` black vertices, all edges
/// gray.
pub fn gray_complete(a: usize, c: usize) -> Result<Crg, CrgError> {
    let vertices = std::iter::repeat_n(VertexColor::White, a)
        .chain(std::iter::repeat_n(VertexColor::Black, c))
        .collect();
    Crg::from_fn(vertices, |_, _| EdgeColor::Gray)
}

/// Split every vertex into `copies` vertices of the same color; copies of
/// one vertex are joined in that vertex's color, copies of distinct vertices
/// inherit the original edge color.
pub fn blow_up(k: &Crg, copies: usize) -> Result<Crg, CrgError> {
    assert!(copies >= 1, "blow_up needs at least one copy");
    let order = k.order() * copies;
    if order > MAX_CRG_VERTICES {
        return Err(CrgError::Capacity(order));
    }
    let vertices = (0..order).map(|v| k.vertex(v / copies)).collect();
    Crg::from_fn(vertices, |i, j| {
        let (a, b) = (i / copies, j / copies);
        if a == b {
            k.vertex(a).as_edge()
        } else {
            k.edge(a, b)
        }
    })
}

/// Merge vertices `u`, `v` whenever `u`, `v` and `{u, v}` share one color and
/// every other vertex sees `u` and `v` in the same color. Each class keeps
/// its smallest vertex; the relation is an equivalence and one pass is
/// already idempotent.
pub fn quotient(k: &Crg) -> Crg {
    let n = k.order();
    let equivalent = |u: usize, v: usize| {
        k.vertex(u) == k.vertex(v)
            && k.edge(u, v) == k.vertex(u).as_edge()
            && (0..n).filter(|&w| w != u && w != v).all(|w| k.edge(u, w) == k.edge(v, w))
    };
    let mut representatives: Vec<usize> = Vec::new();
    for v in 0..n {
        if !representatives.iter().any(|&r| equivalent(r, v)) {
            representatives.push(v);
        }
    }
    k.induced(&representatives).expect("non-empty subset")
}

// ---------------------------------------------------------------------------
// Colored homomorphisms

/// A vertex map `V(H) -> V(K)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomWitness {
    pub mapping: Vec<usize>,
}

impl HomWitness {
    /// Check both homomorphism clauses for every pair of `h`.
    pub fn is_valid(&self, h: &SimpleGraph, k: &Crg) -> bool {
        let n = h.order();
        if self.mapping.len() != n || self.mapping.iter().any(|&t| t >= k.order()) {
            return false;
        }
        (0..n).all(|x| {
            (x + 1..n).all(|y| {
                let (s, t) = (self.mapping[x], self.mapping[y]);
                pair_allowed(k, s, t, h.has_edge(x, y))
            })
        })
    }
}

fn pair_allowed(k: &Crg, s: usize, t: usize, adjacent: bool) -> bool {
    if s == t {
        k.vertex(s) == if adjacent { VertexColor::Black } else { VertexColor::White }
    } else {
        let c = k.edge(s, t);
        c == EdgeColor::Gray || c == if adjacent { EdgeColor::Black } else { EdgeColor::White }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomOutcome {
    Found(HomWitness),
    /// Exhaustive search finished: no homomorphism exists.
    NotFound,
    BudgetExhausted,
}

impl HomOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, HomOutcome::Found(_))
    }
}

/// Exhaustive backtracking search for a colored homomorphism `h -> k`.
///
/// `budget` bounds the number of tentative vertex assignments. Vertices of
/// `h` are placed in descending-degree order; targets are tried least-loaded
/// first, and a forward-checking domain per unplaced vertex prunes dead ends.
pub fn hom_search(h: &SimpleGraph, k: &Crg, budget: u64) -> HomOutcome {
    assert!(budget > 0, "hom_search needs a positive budget");
    let kk = k.order();
    // allowed[adjacent][t]: targets s such that a pair mapped to (t, s) is fine
    let mut allowed = [vec![0u32; kk], vec![0u32; kk]];
    for (adj, table) in allowed.iter_mut().enumerate() {
        for (t, mask) in table.iter_mut().enumerate() {
            *mask = (0..kk).filter(|&s| pair_allowed(k, t, s, adj == 1)).fold(0, |m, s| m | 1 << s);
        }
    }

    let n = h.order();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(h.degree(v)));

    let mut search = HomSearch {
        h,
        order: &order,
        allowed: &allowed,
        mapping: vec![usize::MAX; n],
        load: vec![0; kk],
        nodes: 0,
        budget,
    };
    let all = if kk == 32 { u32::MAX } else { (1u32 << kk) - 1 };
    let domains = vec![all; n];
    match search.extend(0, &domains) {
        Some(true) => HomOutcome::Found(HomWitness { mapping: search.mapping }),
        Some(false) => HomOutcome::NotFound,
        None => HomOutcome::BudgetExhausted,
    }
}

struct HomSearch<'a> {
    h: &'a SimpleGraph,
    order: &'a [usize],
    allowed: &'a [Vec<u32>; 2],
    mapping: Vec<usize>,
    load: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl HomSearch<'_> {
    /// `None` when the budget runs out.
    fn extend(&mut self, idx: usize, domains: &[u32]) -> Option<bool> {
        let Some(&v) = self.order.get(idx) else { return Some(true) };
        let mut targets: Vec<usize> = bits(domains[v] as u64).collect();
        targets.sort_by_key(|&t| self.load[t]);

        let mut next = domains.to_vec();
        for t in targets {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            let mut dead = false;
            for &w in &self.order[idx + 1..] {
                let adj = self.h.has_edge(v, w) as usize;
                next[w] = domains[w] & self.allowed[adj][t];
                if next[w] == 0 {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            self.mapping[v] = t;
            self.load[t] += 1;
            if self.extend(idx + 1, &next)? {
                return Some(true);
            }
            self.load[t] -= 1;
            self.mapping[v] = usize::MAX;
        }
        Some(false)
    }
}

/// `hom_search` with the default budget, turning exhaustion into an error.
pub fn maps_to(h: &SimpleGraph, k: &Crg) -> Result<bool, CrgError> {
    match hom_search(h, k, DEFAULT_HOM_BUDGET) {
        HomOutcome::Found(_) => Ok(true),
        HomOutcome::NotFound => Ok(false),
        HomOutcome::BudgetExhausted => Err(CrgError::Indeterminate {
            budget: DEFAULT_HOM_BUDGET,
            order: h.order(),
            crg: k.to_text(),
        }),
    }
}

/// True when no graph of `forbidden` maps into `k`, i.e. `k` is admissible
/// for the property forbidding all of them as induced subgraphs.
pub fn in_family(forbidden: &[SimpleGraph], k: &Crg) -> Result<bool, CrgError> {
    if forbidden.is_empty() {
        return Err(CrgError::EmptyFamily);
    }
    for h in forbidden {
        if maps_to(h, k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Gray tableau

/// The `(a, c)` pairs with `a + c <= limit` for which `h` does not map into
/// `K(a, c)`, together with the binary chromatic data derived from them.
///
/// `h` maps into `K(a, c)` exactly when its vertices split into `a`
/// cocliques and `c` cliques, so membership is decided by partition search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    pub limit: usize,
    /// `(cocliques, cliques)` pairs with no homomorphism.
    pub cells: BTreeSet<(usize, usize)>,
    pub chi_b: usize,
    /// Least `c` in `0..=k` with `K(k - c, c)` admissible, `k = chi_b - 1`.
    pub c_min: usize,
    /// Greatest such `c`.
    pub c_max: usize,
}

impl Tableau {
    pub fn contains(&self, cocliques: usize, cliques: usize) -> bool {
        self.cells.contains(&(cocliques, cliques))
    }

    /// `chi_b - 1`.
    pub fn k(&self) -> usize {
        self.chi_b - 1
    }

    /// The admissible all-gray CRGs `K(a, c)` of the tableau.
    pub fn gray_portfolio(&self) -> Vec<Crg> {
        self.cells
            .iter()
            .map(|&(a, c)| gray_complete(a, c).expect("cells have 1 <= a + c <= limit"))
            .collect()
    }
}

pub fn tableau(h: &SimpleGraph, limit: usize) -> Tableau {
    assert!(limit >= 1, "tableau needs limit >= 1");
    let mut cells = BTreeSet::new();
    for total in 1..=limit {
        for c in 0..=total {
            if find_partition(h, total - c, c).is_none() {
                cells.insert((total - c, c));
            }
        }
    }
    let chi_b = binary_chromatic(h);
    let k = chi_b - 1;
    let admissible: Vec<usize> = if k == 0 {
        vec![0]
    } else {
        (0..=k).filter(|&c| find_partition(h, k - c, c).is_none()).collect()
    };
    Tableau {
        limit,
        cells,
        chi_b,
        c_min: *admissible.first().expect("chi_b is minimal, so level k has a failing split"),
        c_max: *admissible.last().expect("non-empty"),
    }
}

// ---------------------------------------------------------------------------
// Enumeration

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateOptions {
    /// Keep only the first CRG of every isomorphism class.
    pub dedup_isomorphic: bool,
}

/// Every CRG on exactly `k` vertices whose index lies in `range`, in index
/// order, that no forbidden graph maps into. An empty `forbidden` list keeps
/// everything. Disjoint ranges can be filtered by independent workers.
pub fn filter_range(k: usize, range: std::ops::Range<u64>, forbidden: &[SimpleGraph]) -> Result<Vec<Crg>, CrgError> {
    if k > MAX_ENUMERATION_ORDER {
        return Err(CrgError::EnumerationCapacity(k));
    }
    let mut out = Vec::new();
    for index in range {
        let crg = Crg::from_index(k, index)?;
        if forbidden.is_empty() || in_family(forbidden, &crg)? {
            out.push(crg);
        }
    }
    Ok(out)
}

/// All admissible CRGs with at most `kmax` vertices, ordered by vertex
/// count and then by [`Crg::index`].
pub fn enumerate_crgs(kmax: usize, forbidden: &[SimpleGraph]) -> Result<Vec<Crg>, CrgError> {
    enumerate_crgs_with(kmax, forbidden, EnumerateOptions::default())
}

pub fn enumerate_crgs_with(
    kmax: usize,
    forbidden: &[SimpleGraph],
    options: EnumerateOptions,
) -> Result<Vec<Crg>, CrgError> {
    use rayon::prelude::*;

    if kmax > MAX_ENUMERATION_ORDER {
        return Err(CrgError::EnumerationCapacity(kmax));
    }
    const CHUNK: u64 = 4096;
    let mut all = Vec::new();
    for k in 1..=kmax {
        let total = crg_count(k);
        let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
        let filtered: Vec<Vec<Crg>> = chunks
            .par_iter()
            .map(|&c| filter_range(k, c * CHUNK..((c + 1) * CHUNK).min(total), forbidden))
            .collect::<Result<_, _>>()?;
        let mut seen = BTreeSet::new();
        for crg in filtered.into_iter().flatten() {
            if !options.dedup_isomorphic || seen.insert(crg.canonical_index()) {
                all.push(crg);
            }
        }
    }
    Ok(all)
}
