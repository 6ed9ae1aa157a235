//! Automorphism groups of small digraphs by colour refinement and
//! individualization backtracking.
//!
//! The search walks one reference path down to a discrete partition, then,
//! bottom-up, decides for every vertex of each target cell whether some
//! automorphism fixing the earlier base points maps the base point onto it.
//! The product of the resulting orbit lengths is the exact group order, so the
//! order is known even when the group is far too large to enumerate.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::One;

use crate::cayley::Digraph;
use crate::config::DEFAULT_ORDER_CAP;
use crate::error::{Error, Result};
use crate::perm::{Perm, PermGroup};

/// Largest order accepted by [`brute_force_aut`].
pub const BRUTE_FORCE_MAX_N: usize = 8;

fn bits(mut w: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (w != 0).then(|| {
            let i = w.trailing_zeros() as usize;
            w &= w - 1;
            i
        })
    })
}

/// A vertex colouring; colour ids are `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    color: Vec<usize>,
    rounds: usize,
}

impl Coloring {
    pub fn uniform(n: usize) -> Self {
        Coloring {
            color: vec![0; n],
            rounds: 0,
        }
    }

    /// Vertex `v` alone in class 0, everything else in class 1.
    pub fn individualized(n: usize, v: usize) -> Self {
        Coloring {
            color: (0..n).map(|u| usize::from(u != v)).collect(),
            rounds: 0,
        }
    }

    pub fn from_colors(color: Vec<usize>) -> Self {
        Coloring { color, rounds: 0 }
    }

    pub fn color(&self, v: usize) -> usize {
        self.color[v]
    }

    pub fn colors(&self) -> &[usize] {
        &self.color
    }

    /// Refinement rounds that produced this colouring.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Classes in colour order, each sorted.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut ids: Vec<usize> = self.color.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.iter()
            .map(|&c| (0..self.color.len()).filter(|&v| self.color[v] == c).collect())
            .collect()
    }

    pub fn num_classes(&self) -> usize {
        self.classes().len()
    }

    fn cells(&self) -> Vec<u64> {
        self.classes()
            .into_iter()
            .map(|c| c.into_iter().fold(0u64, |m, v| m | 1 << v))
            .collect()
    }
}

/// Splits cells by (out-count, in-count) signatures against every cell until
/// nothing splits. Sub-cells are ordered by signature, so the result depends
/// only on the digraph up to relabeling. Returns the number of rounds.
fn refine_cells(g: &Digraph, cells: &mut Vec<u64>, trace: &mut impl Hasher) -> usize {
    let mut rounds = 0;
    let mut sig: Vec<(Vec<u8>, usize)> = Vec::new();
    loop {
        rounds += 1;
        let mut next = Vec::with_capacity(cells.len());
        for &cell in cells.iter() {
            if cell.count_ones() == 1 {
                next.push(cell);
                continue;
            }
            sig.clear();
            for v in bits(cell) {
                let out = g.out_row(v);
                let inn = g.in_row(v);
                let s: Vec<u8> = cells
                    .iter()
                    .flat_map(|&c| [(out & c).count_ones() as u8, (inn & c).count_ones() as u8])
                    .collect();
                sig.push((s, v));
            }
            sig.sort_unstable();
            let mut start = 0;
            while start < sig.len() {
                let mut end = start;
                let mut mask = 0u64;
                while end < sig.len() && sig[end].0 == sig[start].0 {
                    mask |= 1 << sig[end].1;
                    end += 1;
                }
                sig[start].0.hash(trace);
                (end - start).hash(trace);
                next.push(mask);
                start = end;
            }
        }
        let split = next.len() != cells.len();
        *cells = next;
        if !split {
            break;
        }
    }
    cells.iter().map(|c| c.count_ones()).collect::<Vec<_>>().hash(trace);
    rounds
}

/// The coarsest stable refinement of `initial`: two vertices keep a colour
/// only if their in- and out-neighbour colour counts agree.
pub fn refine(g: &Digraph, initial: &Coloring) -> Coloring {
    assert_eq!(initial.color.len(), g.order(), "colouring size");
    let mut cells = initial.cells();
    let mut sink = DefaultHasher::new();
    let rounds = refine_cells(g, &mut cells, &mut sink);
    let mut color = vec![0; g.order()];
    for (i, &c) in cells.iter().enumerate() {
        for v in bits(c) {
            color[v] = i;
        }
    }
    Coloring {
        color,
        rounds: initial.rounds + rounds,
    }
}

/// An ordered partition reached in the search tree.
#[derive(Clone)]
struct Node {
    cells: Vec<u64>,
    trace: u64,
}

impl Node {
    fn refined(g: &Digraph, mut cells: Vec<u64>, parent_trace: u64) -> Node {
        let mut h = DefaultHasher::new();
        parent_trace.hash(&mut h);
        refine_cells(g, &mut cells, &mut h);
        Node {
            cells,
            trace: h.finish(),
        }
    }

    fn is_discrete(&self, n: usize) -> bool {
        self.cells.len() == n
    }

    fn individualize(&self, g: &Digraph, cell: usize, v: usize) -> Node {
        let mut cells = Vec::with_capacity(self.cells.len() + 1);
        cells.extend_from_slice(&self.cells[..cell]);
        cells.push(1 << v);
        cells.push(self.cells[cell] & !(1 << v));
        cells.extend_from_slice(&self.cells[cell + 1..]);
        Node::refined(g, cells, self.trace)
    }

    /// First largest non-singleton cell.
    fn target_cell(&self) -> usize {
        let mut best = 0;
        let mut best_size = 1;
        for (i, c) in self.cells.iter().enumerate() {
            let size = c.count_ones();
            if size > best_size {
                best = i;
                best_size = size;
            }
        }
        best
    }

    fn leaf_order(&self) -> Vec<usize> {
        self.cells.iter().map(|c| c.trailing_zeros() as usize).collect()
    }
}

struct Search<'a> {
    g: &'a Digraph,
    ref_traces: Vec<u64>,
    ref_targets: Vec<usize>,
    ref_leaf: Vec<usize>,
    generators: Vec<Perm>,
    orbit_lengths: Vec<usize>,
    nodes: usize,
}

impl Search<'_> {
    fn orbit(&self, v: usize) -> u64 {
        let mut seen = 1u64 << v;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u64;
            for x in bits(frontier) {
                for p in &self.generators {
                    next |= 1 << p.apply(x);
                }
            }
            next &= !seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    fn first_path(&mut self, node: Node) {
        self.nodes += 1;
        self.ref_traces.push(node.trace);
        let n = self.g.order();
        if node.is_discrete(n) {
            self.ref_leaf = node.leaf_order();
            return;
        }
        let ci = node.target_cell();
        self.ref_targets.push(ci);
        let depth = self.ref_targets.len() - 1;
        let cell = node.cells[ci];
        let v = cell.trailing_zeros() as usize;
        self.first_path(node.individualize(self.g, ci, v));

        // Every generator found so far fixes the base points above this level.
        let mut orbit = self.orbit(v);
        for w in bits(cell) {
            if orbit >> w & 1 == 1 {
                continue;
            }
            let child = node.individualize(self.g, ci, w);
            if let Some(p) = self.find(child, depth + 1) {
                self.generators.push(p);
                orbit = self.orbit(v);
            }
        }
        debug_assert_eq!(orbit & !cell, 0);
        self.orbit_lengths.push(orbit.count_ones() as usize);
    }

    /// Looks for a leaf below `node` equivalent to the reference leaf.
    fn find(&mut self, node: Node, depth: usize) -> Option<Perm> {
        self.nodes += 1;
        if self.ref_traces.get(depth) != Some(&node.trace) {
            return None;
        }
        let n = self.g.order();
        if node.is_discrete(n) {
            if depth + 1 != self.ref_traces.len() {
                return None;
            }
            let mut images = vec![0; n];
            for (&a, b) in self.ref_leaf.iter().zip(node.leaf_order()) {
                images[a] = b;
            }
            let p = Perm::from_images(images).ok()?;
            return self.g.is_automorphism(&p).then_some(p);
        }
        let ci = *self.ref_targets.get(depth)?;
        let cell = *node.cells.get(ci)?;
        for x in bits(cell) {
            if let Some(p) = self.find(node.individualize(self.g, ci, x), depth + 1) {
                return Some(p);
            }
        }
        None
    }
}

/// Result of an automorphism search, with statistics.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub group: PermGroup,
    /// Base points of the reference path, in order.
    pub base: Vec<usize>,
    /// Orbit length of each base point under the stabilizer of the earlier ones.
    pub orbit_lengths: Vec<usize>,
    pub nodes: usize,
}

/// Generators and exact order of `Aut(g)`; the element list is available on
/// demand when the order is at most `order_cap`.
pub fn automorphism_search(g: &Digraph, order_cap: usize) -> SearchOutcome {
    let n = g.order();
    if n == 0 {
        return SearchOutcome {
            group: PermGroup::with_order(0, Vec::new(), BigUint::one(), order_cap),
            base: Vec::new(),
            orbit_lengths: Vec::new(),
            nodes: 0,
        };
    }
    let mut root_cells = vec![if n == 64 { u64::MAX } else { (1u64 << n) - 1 }];
    let root = {
        let mut h = DefaultHasher::new();
        refine_cells(g, &mut root_cells, &mut h);
        Node {
            cells: root_cells,
            trace: h.finish(),
        }
    };
    let mut s = Search {
        g,
        ref_traces: Vec::new(),
        ref_targets: Vec::new(),
        ref_leaf: Vec::new(),
        generators: Vec::new(),
        orbit_lengths: Vec::new(),
        nodes: 0,
    };
    s.first_path(root.clone());
    s.orbit_lengths.reverse();

    let mut base = Vec::new();
    let mut node = root;
    for &ci in &s.ref_targets {
        let v = node.cells[ci].trailing_zeros() as usize;
        base.push(v);
        node = node.individualize(g, ci, v);
    }

    for p in &s.generators {
        assert!(g.is_automorphism(p), "search produced a non-automorphism");
    }
    let order = s
        .orbit_lengths
        .iter()
        .fold(BigUint::one(), |acc, &k| acc * BigUint::from(k));
    SearchOutcome {
        group: PermGroup::with_order(n, s.generators, order, order_cap),
        base,
        orbit_lengths: s.orbit_lengths,
        nodes: s.nodes,
    }
}

/// `Aut(g)` with the default order cap.
pub fn automorphism_group(g: &Digraph) -> PermGroup {
    automorphism_search(g, DEFAULT_ORDER_CAP).group
}

pub fn automorphism_group_with_cap(g: &Digraph, order_cap: usize) -> PermGroup {
    automorphism_search(g, order_cap).group
}

/// The point stabilizer `{a in A : a(v) = v}`; needs `A`'s element list.
pub fn stabilizer_of(a: &PermGroup, v: usize) -> Result<PermGroup> {
    let fixed: Vec<Perm> = a
        .elements()?
        .iter()
        .filter(|p| p.apply(v) == v)
        .cloned()
        .collect();
    Ok(PermGroup::from_closed_elements(a.degree(), fixed, a.order_cap()))
}

/// Visits every permutation of `0..n` (Heap's algorithm).
pub(crate) fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// `Aut(g)` by testing all `n!` permutations; `n <= 8` only.
pub fn brute_force_aut(g: &Digraph) -> Result<PermGroup> {
    let n = g.order();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Capacity {
            what: "brute-force automorphism enumeration",
            limit: BRUTE_FORCE_MAX_N,
            reached: n,
        });
    }
    if n == 0 {
        return Ok(PermGroup::with_order(0, Vec::new(), BigUint::one(), DEFAULT_ORDER_CAP));
    }
    let mut found = Vec::new();
    for_each_permutation(n, |images| {
        let p = Perm::from_images(images.iter().copied()).expect("Heap's algorithm yields permutations");
        if g.is_automorphism(&p) {
            found.push(p);
        }
    });
    Ok(PermGroup::from_closed_elements(n, found, DEFAULT_ORDER_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{build, right_translation, ConnectionSet, CayleyDigraph};

    fn order(g: &PermGroup) -> u64 {
        g.order().try_into().unwrap()
    }

    #[test]
    fn refine_keeps_vertex_transitive_uniform() {
        for (n, s) in [(8, vec![1]), (8, vec![1, 2, 5]), (12, vec![1, 5, 7])] {
            let g = build(n, &s).unwrap();
            let c = refine(g.graph(), &Coloring::uniform(n));
            assert_eq!(c.num_classes(), 1);
        }
    }

    #[test]
    fn refine_is_idempotent_and_finer() {
        let g = build(12, &[1, 3, 4]).unwrap();
        let init = Coloring::individualized(12, 0);
        let once = refine(g.graph(), &init);
        let twice = refine(g.graph(), &once);
        assert_eq!(once.classes(), twice.classes());
        for class in once.classes() {
            let c0 = init.color(class[0]);
            assert!(class.iter().all(|&v| init.color(v) == c0));
        }
    }

    #[test]
    fn refine_is_stable() {
        let g = build(10, &[1, 2, 6]).unwrap();
        let c = refine(g.graph(), &Coloring::individualized(10, 3));
        for u in 0..10 {
            for v in 0..10 {
                if c.color(u) != c.color(v) {
                    continue;
                }
                for class in c.classes() {
                    let count = |row: u64| class.iter().filter(|&&w| row >> w & 1 == 1).count();
                    assert_eq!(count(g.graph().out_row(u)), count(g.graph().out_row(v)));
                    assert_eq!(count(g.graph().in_row(u)), count(g.graph().in_row(v)));
                }
            }
        }
    }

    #[test]
    fn small_groups() {
        assert_eq!(order(&automorphism_group(build(8, &[1]).unwrap().graph())), 8);
        assert_eq!(order(&automorphism_group(build(8, &[1, 2, 5]).unwrap().graph())), 16);
        assert_eq!(order(&automorphism_group(build(4, &[1, 3]).unwrap().graph())), 8);
        assert_eq!(order(&automorphism_group(build(5, &[]).unwrap().graph())), 120);
    }

    #[test]
    fn symmetric_group_order_beyond_cap() {
        let g = build(20, &[]).unwrap();
        let a = automorphism_group(g.graph());
        let expected: BigUint = (1..=20u32).map(BigUint::from).product();
        assert_eq!(*a.order(), expected);
        assert!(a.elements().is_err());
        let k = build(64, &(1..64).collect::<Vec<_>>()).unwrap();
        let a = automorphism_group(k.graph());
        let expected: BigUint = (1..=64u32).map(BigUint::from).product();
        assert_eq!(*a.order(), expected);
    }

    #[test]
    fn brute_force_examples() {
        let e = Digraph::empty(3);
        assert_eq!(order(&brute_force_aut(&e).unwrap()), 6);
        assert_eq!(order(&brute_force_aut(build(5, &[1]).unwrap().graph()).unwrap()), 5);
        let g = build(8, &[1, 2, 5]).unwrap();
        let bf = brute_force_aut(g.graph()).unwrap();
        let search = automorphism_group(g.graph());
        assert_eq!(bf.sorted_elements().unwrap(), search.sorted_elements().unwrap());
        assert!(brute_force_aut(&Digraph::empty(9)).is_err());
    }

    #[test]
    fn stabilizers() {
        let r = automorphism_group(build(8, &[1]).unwrap().graph());
        assert_eq!(order(&stabilizer_of(&r, 3).unwrap()), 1);
        let a = automorphism_group(build(8, &[1, 2, 5]).unwrap().graph());
        let st = stabilizer_of(&a, 0).unwrap();
        assert_eq!(order(&st), 2);
        let five = Perm::from_fn(8, |x| 5 * x % 8).unwrap();
        assert!(st.contains(&five).unwrap());
    }

    #[test]
    fn translations_lie_in_aut() {
        for text in ["12:1,4,6", "15:3,5,6,9,10,12", "16:1,2,9", "9:1,4,7"] {
            let s: ConnectionSet = text.parse().unwrap();
            let g = CayleyDigraph::new(s);
            let a = automorphism_group(g.graph());
            assert!(a.generators().iter().all(|p| g.graph().is_automorphism(p)));
            if let Ok(els) = a.elements() {
                assert!(els.contains(&right_translation(s.n(), 1)));
            }
        }
    }

    #[test]
    fn non_vertex_transitive_digraph() {
        // directed path 0 -> 1 -> 2 plus an isolated vertex 3: rigid
        let g = Digraph::from_arcs(4, [(0, 1), (1, 2)]);
        assert_eq!(order(&automorphism_group(&g)), 1);
        // two disjoint directed triangles and a loose vertex
        let g = Digraph::from_arcs(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let a = automorphism_group(&g);
        assert_eq!(order(&a), 18);
        assert_eq!(a.sorted_elements().unwrap(), brute_force_aut(&g).unwrap().sorted_elements().unwrap());
    }

    #[test]
    fn heap_visits_all() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }
}
