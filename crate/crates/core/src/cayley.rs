//! Cayley digraphs `Cay(Z_n, S)` and the small digraph toolkit the searches use.
//!
//! Arcs are `(g, g + s)` for `s` in `S`. Adjacency is kept as one `u64` word
//! per vertex, so `n <= 64`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::config::HARD_MAX_N;
use crate::error::{Error, Result};
use crate::perm::Perm;

#[inline]
fn bits(mut w: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if w == 0 {
            None
        } else {
            let i = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i)
        }
    })
}

/// A subset of `Z_n \ {0}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConnectionSet {
    n: usize,
    mask: u64,
}

impl ConnectionSet {
    pub fn new<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Result<Self> {
        if n == 0 || n > HARD_MAX_N {
            return Err(Error::domain(format!("modulus {n} outside 1..={HARD_MAX_N}")));
        }
        let mut mask = 0u64;
        for s in members {
            if s == 0 {
                return Err(Error::domain("0 cannot be a member of a connection set"));
            }
            if s >= n {
                return Err(Error::domain(format!("member {s} out of range for n = {n}")));
            }
            mask |= 1 << s;
        }
        Ok(ConnectionSet { n, mask })
    }

    /// Bit `s` set iff `s` is a member. Bit 0 is never set.
    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if n == 0 || n > HARD_MAX_N || mask & 1 != 0 || mask & !full != 0 {
            return Err(Error::domain(format!("mask {mask:#x} invalid for n = {n}")));
        }
        Ok(ConnectionSet { n, mask })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, s: usize) -> bool {
        s < self.n && self.mask >> s & 1 == 1
    }

    /// Members in ascending order.
    pub fn members(&self) -> Vec<usize> {
        bits(self.mask).collect()
    }

    /// `S = -S`, i.e. the Cayley digraph is an undirected graph.
    pub fn inverse_closed(&self) -> bool {
        self.members().iter().all(|&s| self.contains(self.n - s))
    }

    /// `gcd(n, S) = 1`, i.e. `S` generates `Z_n`.
    pub fn generating(&self) -> bool {
        self.members().iter().fold(self.n, |g, &s| g.gcd(&s)) == 1
    }

    /// The image `k*S` under a multiplier.
    pub fn scaled(&self, k: usize) -> ConnectionSet {
        let mut mask = 0;
        for s in bits(self.mask) {
            mask |= 1 << (s * k % self.n);
        }
        ConnectionSet { n: self.n, mask }
    }

    /// The image of `S` under an arbitrary permutation fixing 0.
    pub fn mapped(&self, p: &Perm) -> Result<ConnectionSet> {
        ConnectionSet::new(self.n, bits(self.mask).map(|s| p.apply(s)))
    }

    /// Lexicographic order on the ascending member lists.
    pub fn lex_cmp(&self, other: &ConnectionSet) -> std::cmp::Ordering {
        let a = self.members();
        let b = other.members();
        a.cmp(&b)
    }
}

impl fmt::Display for ConnectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.n)?;
        for (i, s) in bits(self.mask).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConnectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConnectionSet({self})")
    }
}

/// Parses the instance encoding `n:s1,s2,...`, e.g. `8:1,2,5` or `4:`.
///
/// Members must be strictly ascending and there is no whitespace.
impl FromStr for ConnectionSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let err = |position: usize, message: &str| Error::Parse {
            position,
            message: message.to_string(),
        };
        let colon = text.find(':').ok_or_else(|| err(text.len(), "expected ':'"))?;
        let head = &text[..colon];
        if head.is_empty() || !head.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err(0, "expected a decimal modulus"));
        }
        let n: usize = head.parse().map_err(|_| err(0, "modulus too large"))?;
        if n == 0 || n > HARD_MAX_N {
            return Err(err(0, &format!("modulus must lie in 1..={HARD_MAX_N}")));
        }
        let body = &text[colon + 1..];
        let mut members = Vec::new();
        if !body.is_empty() {
            let mut pos = colon + 1;
            for item in body.split(',') {
                if item.is_empty() || !item.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(err(pos, "expected a decimal member"));
                }
                let s: usize = item.parse().map_err(|_| err(pos, "member too large"))?;
                if s == 0 {
                    return Err(err(pos, "0 cannot be a member"));
                }
                if s >= n {
                    return Err(err(pos, "member out of range"));
                }
                if members.last().is_some_and(|&last| last >= s) {
                    return Err(err(pos, "members must be strictly ascending"));
                }
                members.push(s);
                pos += item.len() + 1;
            }
        }
        ConnectionSet::new(n, members)
    }
}

impl TryFrom<String> for ConnectionSet {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConnectionSet> for String {
    fn from(s: ConnectionSet) -> String {
        s.to_string()
    }
}

/// A digraph on at most 64 vertices, stored as out- and in-neighbour bit rows.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Digraph {
    n: usize,
    out: Vec<u64>,
    inn: Vec<u64>,
}

impl Digraph {
    pub fn empty(n: usize) -> Self {
        assert!(n <= HARD_MAX_N, "at most {HARD_MAX_N} vertices");
        Digraph {
            n,
            out: vec![0; n],
            inn: vec![0; n],
        }
    }

    pub fn from_arcs<I: IntoIterator<Item = (usize, usize)>>(n: usize, arcs: I) -> Self {
        let mut g = Digraph::empty(n);
        for (u, v) in arcs {
            g.add_arc(u, v);
        }
        g
    }

    pub fn add_arc(&mut self, u: usize, v: usize) {
        self.out[u] |= 1 << v;
        self.inn[v] |= 1 << u;
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn out_row(&self, v: usize) -> u64 {
        self.out[v]
    }

    #[inline]
    pub fn in_row(&self, v: usize) -> u64 {
        self.inn[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out[u] >> v & 1 == 1
    }

    pub fn out_neighbors(&self, v: usize) -> Vec<usize> {
        bits(self.out[v]).collect()
    }

    pub fn in_neighbors(&self, v: usize) -> Vec<usize> {
        bits(self.inn[v]).collect()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].count_ones() as usize
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].count_ones() as usize
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| bits(self.out[u]).map(move |v| (u, v)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.out == self.inn
    }

    /// The image digraph with arcs `(p(u), p(v))`.
    pub fn relabeled(&self, p: &Perm) -> Digraph {
        assert_eq!(p.degree(), self.n, "degree mismatch");
        Digraph::from_arcs(self.n, self.arcs().map(|(u, v)| (p.apply(u), p.apply(v))))
    }

    /// True iff `p` maps the arc set onto itself.
    pub fn is_automorphism(&self, p: &Perm) -> bool {
        if p.degree() != self.n {
            return false;
        }
        (0..self.n).all(|u| {
            let image = bits(self.out[u]).fold(0u64, |acc, v| acc | 1 << p.apply(v));
            image == self.out[p.apply(u)]
        })
    }

    /// True iff `p` is an arc bijection from `self` onto `other`.
    pub fn is_isomorphism_to(&self, other: &Digraph, p: &Perm) -> bool {
        p.degree() == self.n
            && other.n == self.n
            && self.arc_count() == other.arc_count()
            && (0..self.n).all(|u| {
                let image = bits(self.out[u]).fold(0u64, |acc, v| acc | 1 << p.apply(v));
                image == other.out[p.apply(u)]
            })
    }

    /// Vertices reachable from `v` along out-arcs.
    pub fn reachable(&self, v: usize) -> u64 {
        let mut seen = 1u64 << v;
        let mut frontier = seen;
        while frontier != 0 {
            let next = bits(frontier).fold(0, |acc, u| acc | self.out[u]) & !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    pub fn is_strongly_connected(&self) -> bool {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        self.n == 0 || (0..self.n).all(|v| self.reachable(v) == full)
    }

    /// Connected, symmetric, loopless and 2-regular: an undirected cycle.
    pub fn is_undirected_cycle(&self) -> bool {
        self.n >= 3
            && self.is_symmetric()
            && (0..self.n).all(|v| self.out_degree(v) == 2 && !self.has_arc(v, v))
            && self.is_strongly_connected()
    }
}

/// `Cay(Z_n, S)` with its connection set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyDigraph {
    connection: ConnectionSet,
    graph: Digraph,
}

impl CayleyDigraph {
    pub fn new(connection: ConnectionSet) -> Self {
        let n = connection.n();
        let mut graph = Digraph::empty(n);
        for g in 0..n {
            for s in bits(connection.mask()) {
                graph.add_arc(g, (g + s) % n);
            }
        }
        CayleyDigraph { connection, graph }
    }

    pub fn n(&self) -> usize {
        self.connection.n()
    }

    pub fn connection(&self) -> &ConnectionSet {
        &self.connection
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }
}

/// Builds `Cay(Z_n, S)`.
pub fn build(n: usize, members: &[usize]) -> Result<CayleyDigraph> {
    Ok(CayleyDigraph::new(ConnectionSet::new(n, members.iter().copied())?))
}

/// `x -> x + g mod n`.
pub fn right_translation(n: usize, g: usize) -> Perm {
    Perm::from_fn(n, |x| (x + g) % n).expect("translation is a bijection")
}

/// Vertices grouped by out-distance from `v`; layer 0 is `{v}`. Unreachable
/// vertices are omitted. On symmetric digraphs this is ordinary graph distance.
pub fn distance_layers(g: &Digraph, v: usize) -> Vec<Vec<usize>> {
    let mut dist = vec![usize::MAX; g.order()];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    let mut layers: Vec<Vec<usize>> = vec![vec![v]];
    while let Some(u) = queue.pop_front() {
        for w in g.out_neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                if layers.len() <= dist[w] {
                    layers.push(Vec::new());
                }
                layers[dist[w]].push(w);
                queue.push_back(w);
            }
        }
    }
    for layer in &mut layers {
        layer.sort_unstable();
    }
    layers
}

/// The sub-digraph induced on `vertices`. Vertex `i` of the result stands for
/// `vertices[i]`.
#[derive(Clone, Debug)]
pub struct InducedSubdigraph {
    pub vertices: Vec<usize>,
    pub graph: Digraph,
}

pub fn induced(g: &Digraph, vertices: &[usize]) -> InducedSubdigraph {
    let k = vertices.len();
    let mut sub = Digraph::empty(k);
    for (i, &u) in vertices.iter().enumerate() {
        for (j, &v) in vertices.iter().enumerate() {
            if g.has_arc(u, v) {
                sub.add_arc(i, j);
            }
        }
    }
    InducedSubdigraph {
        vertices: vertices.to_vec(),
        graph: sub,
    }
}

/// All arcs of `g` from `from` into `to`.
pub fn induced_bipartite(g: &Digraph, from: &[usize], to: &[usize]) -> Vec<(usize, usize)> {
    from.iter()
        .flat_map(|&u| to.iter().filter(move |&&v| g.has_arc(u, v)).map(move |&v| (u, v)))
        .collect()
}
