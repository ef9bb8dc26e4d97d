//! Graphs on `n` labelled vertices stored as a packed edge-indicator bitset.
//!
//! Vertices are 0-based. Edges `{i, j}` with `i < j` are ranked in
//! colexicographic order, `rank(i, j) = j(j-1)/2 + i`, so the ranks of a graph
//! on `n` vertices are a prefix of the ranks on `n + 1` vertices. Triples
//! `i < j < k` use the matching colex rank `C(k,3) + C(j,2) + i`.
//!
//! Besides the indicator storage this module holds the per-triple quantities
//! the Stein coupling is built from: the centred indicators `X_v`, the
//! neighbourhoods `ν_v` (triples sharing an edge with `v`) and the local sums
//! `Y_v`, `Y_{v,w}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

#[inline]
pub fn edge_total(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[inline]
pub fn triple_total(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Size of `ν_v`: the triple itself plus `n - 3` completions of each of its
/// three edges.
#[inline]
pub fn neighborhood_size(n: usize) -> usize {
    3 * (n - 3) + 1
}

/// An unordered vertex pair, stored ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    lo: u32,
    hi: u32,
}

impl EdgeId {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput(format!("edge ({a}, {b}) is a loop")));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Ok(EdgeId { lo: lo as u32, hi: hi as u32 })
    }

    #[inline]
    pub fn lo(self) -> usize {
        self.lo as usize
    }

    #[inline]
    pub fn hi(self) -> usize {
        self.hi as usize
    }

    /// Colex rank without range checking.
    #[inline]
    pub fn rank(self) -> usize {
        let j = self.hi as usize;
        j * (j - 1) / 2 + self.lo as usize
    }

    /// Inverse of [`EdgeId::rank`].
    pub fn from_rank(rank: usize) -> Self {
        // largest j with j(j-1)/2 <= rank
        let mut j = ((1.0 + (1.0 + 8.0 * rank as f64).sqrt()) / 2.0) as usize;
        while j * (j - 1) / 2 > rank {
            j -= 1;
        }
        while (j + 1) * j / 2 <= rank {
            j += 1;
        }
        EdgeId { lo: (rank - j * (j - 1) / 2) as u32, hi: j as u32 }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// Canonical rank of `e` among the `C(n,2)` pairs on `n` vertices.
pub fn edge_rank(e: EdgeId, n: usize) -> Result<usize> {
    if e.hi() >= n {
        return Err(Error::InvalidInput(format!("edge {e} has a vertex outside [0, {n})")));
    }
    Ok(e.rank())
}

/// A vertex triple, stored strictly ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct TripleId([u32; 3]);

impl TryFrom<[usize; 3]> for TripleId {
    type Error = Error;
    fn try_from(v: [usize; 3]) -> Result<Self> {
        TripleId::new(v[0], v[1], v[2])
    }
}

impl From<TripleId> for [usize; 3] {
    fn from(t: TripleId) -> Self {
        t.vertices()
    }
}

impl TripleId {
    /// Builds a triple from three distinct labels given in any order.
    pub fn new(a: usize, b: usize, c: usize) -> Result<Self> {
        let mut v = [a, b, c];
        v.sort_unstable();
        if v[0] == v[1] || v[1] == v[2] {
            return Err(Error::InvalidInput(format!("triple ({a}, {b}, {c}) repeats a vertex")));
        }
        Ok(TripleId([v[0] as u32, v[1] as u32, v[2] as u32]))
    }

    #[inline]
    pub fn vertices(self) -> [usize; 3] {
        [self.0[0] as usize, self.0[1] as usize, self.0[2] as usize]
    }

    #[inline]
    pub fn max_vertex(self) -> usize {
        self.0[2] as usize
    }

    #[inline]
    pub fn contains(self, x: usize) -> bool {
        self.0.iter().any(|&u| u as usize == x)
    }

    /// The three induced edges `{v1v2, v1v3, v2v3}`.
    #[inline]
    pub fn edges(self) -> [EdgeId; 3] {
        let [a, b, c] = self.0;
        [EdgeId { lo: a, hi: b }, EdgeId { lo: a, hi: c }, EdgeId { lo: b, hi: c }]
    }

    /// Number of shared vertices.
    #[inline]
    pub fn overlap(self, other: TripleId) -> usize {
        self.0.iter().filter(|&&u| other.0.contains(&u)).count()
    }

    /// Colex rank among all triples.
    #[inline]
    pub fn rank(self) -> usize {
        let [i, j, k] = self.vertices();
        triple_total(k) + j * (j - 1) / 2 + i
    }

    pub fn from_rank(rank: usize) -> Self {
        let mut k = 2;
        while triple_total(k + 1) <= rank {
            k += 1;
        }
        let rest = rank - triple_total(k);
        let e = EdgeId::from_rank(rest);
        TripleId([e.lo, e.hi, k as u32])
    }

    /// All triples on `n` vertices in rank order.
    pub fn all(n: usize) -> impl Iterator<Item = TripleId> {
        (0..triple_total(n)).map(TripleId::from_rank)
    }

    fn check_range(self, n: usize) -> Result<()> {
        if self.max_vertex() >= n {
            Err(Error::InvalidInput(format!("triple {self} has a vertex outside [0, {n})")))
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for TripleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

/// A simple undirected graph: vertex count plus one bit per edge rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("n", &self.n).field("edges", &self.edge_count()).finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, bits: vec![0; edge_total(n).div_ceil(64)] }
    }

    pub fn complete(n: usize) -> Self {
        let total = edge_total(n);
        let mut bits = vec![u64::MAX; total.div_ceil(64)];
        if total % 64 != 0 {
            if let Some(last) = bits.last_mut() {
                *last = (1u64 << (total % 64)) - 1;
            }
        }
        Graph { n, bits }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<Self> {
        let mut bits = vec![0u64; edge_total(n).div_ceil(64)];
        for (a, b) in edges {
            let r = edge_rank(EdgeId::new(a, b)?, n)?;
            bits[r / 64] |= 1 << (r % 64);
        }
        Ok(Graph { n, bits })
    }

    /// Wraps a raw rank bitset; the caller guarantees bits past `C(n,2)` are clear.
    pub(crate) fn from_raw(n: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), edge_total(n).div_ceil(64));
        Graph { n, bits }
    }

    /// Graph whose edge set is the low `C(n,2)` bits of `mask` (n ≤ 11).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(edge_total(n) <= 64);
        Graph { n, bits: if edge_total(n) == 0 { vec![] } else { vec![mask] } }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn bits(&self) -> &[u64] {
        &self.bits
    }

    #[inline]
    pub fn has_rank(&self, r: usize) -> bool {
        (self.bits[r / 64] >> (r % 64)) & 1 == 1
    }

    #[inline]
    pub fn has_edge(&self, e: EdgeId) -> bool {
        e.hi() < self.n && self.has_rank(e.rank())
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..edge_total(self.n)).filter(|&r| self.has_rank(r)).map(EdgeId::from_rank)
    }

    #[inline]
    pub fn has_triangle(&self, v: TripleId) -> bool {
        v.edges().iter().all(|&e| self.has_edge(e))
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_graph(self)
    }

    /// Serializes to the fixture text format: `n` on the first line, then one
    /// `i j` edge per line in rank order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for e in self.edges() {
            out.push_str(&format!("{} {}\n", e.lo(), e.hi()));
        }
        out
    }
}

impl FromStr for Graph {
    type Err = Error;

    /// Parses the fixture text format. Blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("vertex count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .ok_or_else(|| Error::Parse(format!("edge line `{line}` needs two labels")))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("edge line `{line}`: {e}")))
            };
            let (a, b) = (next()?, next()?);
            if it.next().is_some() {
                return Err(Error::Parse(format!("edge line `{line}` has trailing fields")));
            }
            edges.push((a, b));
        }
        Graph::from_edges(n, edges)
    }
}

/// Row-bitset adjacency matrix, `words` machine words per row.
#[derive(Clone, Debug)]
pub struct Adjacency {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Adjacency {
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        let mut r = 0;
        // walk ranks in colex order: (0,1), (0,2), (1,2), (0,3), ...
        for j in 1..n {
            for i in 0..j {
                if g.has_rank(r) {
                    rows[i * words + j / 64] |= 1 << (j % 64);
                    rows[j * words + i / 64] |= 1 << (i % 64);
                }
                r += 1;
            }
        }
        Adjacency { n, words, rows }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has(&self, i: usize, j: usize) -> bool {
        (self.rows[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Number of common neighbours of `i` and `j`.
    #[inline]
    pub fn codegree(&self, i: usize, j: usize) -> u32 {
        self.row(i).iter().zip(self.row(j)).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// Triangles via row intersections: each triangle `i < j < k` is counted
    /// once at its smallest edge `ij`.
    pub fn triangle_count(&self) -> u64 {
        let mut total = 0u64;
        for i in 0..self.n {
            let ri = self.row(i);
            for (wj, &word) in ri.iter().enumerate() {
                // neighbours j > i
                let mut w = if wj < i / 64 {
                    0
                } else if wj == i / 64 {
                    word & upper_mask(i % 64)
                } else {
                    word
                };
                while w != 0 {
                    let j = wj * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    let rj = self.row(j);
                    let start = j / 64;
                    let mut c = (ri[start] & rj[start] & upper_mask(j % 64)).count_ones();
                    for t in start + 1..self.words {
                        c += (ri[t] & rj[t]).count_ones();
                    }
                    total += c as u64;
                }
            }
        }
        total
    }
}

/// Bits strictly above position `b` within a word.
#[inline]
fn upper_mask(b: usize) -> u64 {
    if b >= 63 {
        0
    } else {
        u64::MAX << (b + 1)
    }
}

/// Exact number of triangles.
pub fn triangle_count(g: &Graph) -> u64 {
    g.adjacency().triangle_count()
}

#[inline]
fn centered(present: bool, p3: f64) -> f64 {
    if present {
        1.0 - p3
    } else {
        -p3
    }
}

/// `X_v = I_{v1v2} I_{v1v3} I_{v2v3} - p³`.
pub fn centered_indicator(g: &Graph, p: f64, v: TripleId) -> Result<f64> {
    check_probability(p)?;
    v.check_range(g.n())?;
    Ok(centered(g.has_triangle(v), p * p * p))
}

fn push_neighbors(v: TripleId, n: usize, out: &mut BTreeSet<TripleId>) {
    out.insert(v);
    for e in v.edges() {
        for x in (0..n).filter(|&x| !v.contains(x)) {
            out.insert(TripleId::new(e.lo(), e.hi(), x).expect("distinct by construction"));
        }
    }
}

/// `ν_v = {u : |u ∩ v| ≥ 2}` (which includes `v`), or with `w` given,
/// `ν_{v,w} = ν_v ∪ ν_w`. `w` must itself lie in `ν_v`. Sorted by rank.
pub fn neighborhood(v: TripleId, n: usize, w: Option<TripleId>) -> Result<Vec<TripleId>> {
    crate::error::check_vertex_count(n)?;
    v.check_range(n)?;
    let mut set = BTreeSet::new();
    push_neighbors(v, n, &mut set);
    if let Some(w) = w {
        w.check_range(n)?;
        if v.overlap(w) < 2 {
            return Err(Error::InvalidInput(format!("{w} is not in the neighbourhood of {v}")));
        }
        push_neighbors(w, n, &mut set);
    }
    let mut out: Vec<_> = set.into_iter().collect();
    out.sort_by_key(|t| t.rank());
    Ok(out)
}

/// `Y_v = Σ_{u∈ν_v} X_u`, or `Y_{v,w}` summed over `ν_{v,w}` when `w` is given.
pub fn local_sum(g: &Graph, p: f64, v: TripleId, w: Option<TripleId>) -> Result<f64> {
    check_probability(p)?;
    let p3 = p * p * p;
    Ok(neighborhood(v, g.n(), w)?.into_iter().map(|u| centered(g.has_triangle(u), p3)).sum())
}

/// `|M(v_1, …, v_k)|`: the number of distinct edges induced by the triples.
pub fn edge_union_size(triples: &[TripleId]) -> usize {
    triples.iter().flat_map(|t| t.edges()).collect::<BTreeSet<_>>().len()
}

/// `W = (T - C(n,3)p³)/σ`.
pub fn w_statistic(g: &Graph, p: f64, sigma: f64) -> Result<f64> {
    check_probability(p)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must be positive")));
    }
    let mean = triple_total(g.n()) as f64 * p * p * p;
    Ok((triangle_count(g) as f64 - mean) / sigma)
}
