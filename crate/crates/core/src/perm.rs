//! Permutations on `{0, .., n-1}` and permutation groups given by generators.
//!
//! Composition is left-to-right: `p.then(&q)` applies `p` first, so the image
//! of `x` is `q(p(x))`. Conjugation `h^g` means `g^-1 h g` in that order.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::config::DEFAULT_ORDER_CAP;
use crate::error::{Error, Result};

/// Largest supported degree; points are stored as bytes.
pub const MAX_DEGREE: usize = 256;

/// A bijection on `{0, .., degree-1}`. Serializes as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Perm {
    images: Box<[u8]>,
}

impl TryFrom<Vec<usize>> for Perm {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Perm::from_images(images)
    }
}

impl From<Perm> for Vec<usize> {
    fn from(p: Perm) -> Self {
        p.images().collect()
    }
}

impl Perm {
    pub fn identity(degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "degree {degree} exceeds {MAX_DEGREE}");
        Perm {
            images: (0..degree).map(|i| i as u8).collect(),
        }
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn from_images<I>(images: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let images: Vec<usize> = images.into_iter().collect();
        let n = images.len();
        if n == 0 || n > MAX_DEGREE {
            return Err(Error::NotAPermutation(format!("degree {n} out of range")));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::NotAPermutation(format!(
                    "image {x} repeated or out of range"
                )));
            }
            seen[x] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|x| x as u8).collect(),
        })
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1, 2]]` is `0->1->2->0`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                if x >= degree || y >= degree || touched[x] {
                    return Err(Error::NotAPermutation(format!(
                        "cycle point {x} repeated or out of range"
                    )));
                }
                touched[x] = true;
                images[x] = y;
            }
        }
        Perm::from_images(images)
    }

    /// Builds `x -> f(x)` on `degree` points, checking bijectivity.
    pub fn from_fn(degree: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Perm::from_images((0..degree).map(f))
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.images.iter().map(|&x| x as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self` first, then `q`.
    pub fn compose(&self, q: &Perm) -> Result<Perm> {
        if self.degree() != q.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: q.degree(),
            });
        }
        Ok(self.then(q))
    }

    /// Unchecked form of [`Perm::compose`]; panics on a degree mismatch.
    pub fn then(&self, q: &Perm) -> Perm {
        assert_eq!(self.degree(), q.degree(), "degree mismatch in composition");
        Perm {
            images: self.images.iter().map(|&x| q.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Perm {
            images: inv.into_boxed_slice(),
        }
    }

    /// `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Perm) -> Perm {
        g.inverse().then(self).then(g)
    }

    pub fn pow(&self, mut k: u64) -> Perm {
        let mut base = self.clone();
        let mut acc = Perm::identity(self.degree());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        acc
    }

    /// Disjoint cycles, each starting at its least point, fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    /// Least `k >= 1` with `self^k = id`: the lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }

    /// True when the permutation is a single cycle through all points.
    pub fn is_full_cycle(&self) -> bool {
        let n = self.degree();
        let mut x = 0;
        for step in 1..=n {
            x = self.apply(x);
            if x == 0 {
                return step == n;
            }
        }
        false
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images().collect::<Vec<_>>())
    }
}

impl fmt::Display for Perm {
    /// Cycle notation without fixed points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for c in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

pub fn compose(p: &Perm, q: &Perm) -> Result<Perm> {
    p.compose(q)
}

pub fn order_of(p: &Perm) -> u64 {
    p.order()
}

#[derive(Debug)]
struct ElementTable {
    list: Vec<Perm>,
    index: HashMap<Perm, usize>,
}

impl ElementTable {
    fn new(list: Vec<Perm>) -> Self {
        let index = list
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        ElementTable { list, index }
    }
}

/// A finite permutation group given by generators, with an exact order.
///
/// The element list is materialized lazily and only when the order is at most
/// `order_cap`.
#[derive(Debug, Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    order: BigUint,
    order_cap: usize,
    elements: OnceLock<Option<Arc<ElementTable>>>,
}

/// Closes `gens` under composition. Fails once more than `cap` elements are found.
fn closure(degree: usize, gens: &[Perm], cap: usize) -> Result<Vec<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::new();
    let mut list = vec![id.clone()];
    seen.insert(id);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in gens {
            let next = list[i].then(g);
            if seen.contains(&next) {
                continue;
            }
            if list.len() >= cap {
                return Err(Error::Capacity {
                    what: "group closure",
                    limit: cap,
                    reached: list.len() + 1,
                });
            }
            seen.insert(next.clone());
            queue.push_back(list.len());
            list.push(next);
        }
    }
    Ok(list)
}

impl PermGroup {
    /// The trivial group on `degree` points.
    pub fn trivial(degree: usize) -> Self {
        let id = Perm::identity(degree);
        let g = PermGroup::with_order(degree, Vec::new(), BigUint::one(), DEFAULT_ORDER_CAP);
        let _ = g.elements.set(Some(Arc::new(ElementTable::new(vec![id]))));
        g
    }

    /// A group whose exact order is already known, e.g. from an automorphism search.
    pub(crate) fn with_order(
        degree: usize,
        generators: Vec<Perm>,
        order: BigUint,
        order_cap: usize,
    ) -> Self {
        PermGroup {
            degree,
            generators,
            order,
            order_cap,
            elements: OnceLock::new(),
        }
    }

    /// Builds a group from a complete, closed element list. Generators are
    /// picked greedily from the list.
    pub(crate) fn from_closed_elements(degree: usize, mut list: Vec<Perm>, order_cap: usize) -> Self {
        list.sort();
        let mut generators = Vec::new();
        let mut span: HashSet<Perm> = HashSet::from([Perm::identity(degree)]);
        for p in &list {
            if !span.contains(p) {
                generators.push(p.clone());
                span = closure(degree, &generators, usize::MAX)
                    .expect("uncapped closure")
                    .into_iter()
                    .collect();
            }
        }
        debug_assert_eq!(span.len(), list.len());
        let g = PermGroup::with_order(degree, generators, BigUint::from(list.len()), order_cap);
        let _ = g.elements.set(Some(Arc::new(ElementTable::new(list))));
        g
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn order_cap(&self) -> usize {
        self.order_cap
    }

    /// The order as a `usize`, if it fits under the cap.
    pub fn small_order(&self) -> Option<usize> {
        self.order.to_usize().filter(|&k| k <= self.order_cap)
    }

    fn table(&self) -> Option<&Arc<ElementTable>> {
        self.elements
            .get_or_init(|| {
                let k = self.small_order()?;
                let list = closure(self.degree, &self.generators, k.max(1))
                    .expect("closure exceeded the known group order");
                Some(Arc::new(ElementTable::new(list)))
            })
            .as_ref()
    }

    /// All elements, or a capacity error when the order exceeds the cap.
    pub fn elements(&self) -> Result<&[Perm]> {
        self.table().map(|t| t.list.as_slice()).ok_or(Error::Capacity {
            what: "element list",
            limit: self.order_cap,
            reached: self.order.to_usize().unwrap_or(usize::MAX),
        })
    }

    /// True when the element list exists or can be built under the cap.
    pub fn has_elements(&self) -> bool {
        self.table().is_some()
    }

    /// True when the element list has already been built.
    pub fn elements_materialized(&self) -> bool {
        matches!(self.elements.get(), Some(Some(_)))
    }

    /// Membership test; needs the element list.
    pub fn contains(&self, p: &Perm) -> Result<bool> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: p.degree(),
            });
        }
        let table = self.table().ok_or(Error::Capacity {
            what: "membership test",
            limit: self.order_cap,
            reached: self.order.to_usize().unwrap_or(usize::MAX),
        })?;
        Ok(table.index.contains_key(p))
    }

    /// Elements sorted, for set comparisons.
    pub fn sorted_elements(&self) -> Result<Vec<Perm>> {
        let mut v = self.elements()?.to_vec();
        v.sort();
        Ok(v)
    }

    /// Orbit of a point under the generators.
    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        seen[x] = true;
        let mut out = vec![x];
        let mut i = 0;
        while i < out.len() {
            let y = out[i];
            for g in &self.generators {
                let z = g.apply(y);
                if !seen[z] {
                    seen[z] = true;
                    out.push(z);
                }
            }
            i += 1;
        }
        out.sort_unstable();
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.orbit(0).len() == self.degree
    }
}

/// The group generated by `gens`, with its elements cached.
///
/// Fails with a capacity error carrying the partial count when the closure
/// would exceed `order_cap` elements.
pub fn group_from_generators(degree: usize, gens: Vec<Perm>, order_cap: usize) -> Result<PermGroup> {
    if let Some(bad) = gens.iter().find(|g| g.degree() != degree) {
        return Err(Error::DegreeMismatch {
            left: degree,
            right: bad.degree(),
        });
    }
    let list = closure(degree, &gens, order_cap)?;
    let g = PermGroup::with_order(degree, gens, BigUint::from(list.len()), order_cap);
    let _ = g.elements.set(Some(Arc::new(ElementTable::new(list))));
    Ok(g)
}

/// True iff `g^-1 h g` lies in `h_group` for every generator pair.
///
/// `h_group` must have its element list available. Membership of the
/// generators of `h_group` in `g_group` is checked when `g_group`'s elements
/// are already materialized; otherwise it is taken on trust.
pub fn is_normal_subgroup(g_group: &PermGroup, h_group: &PermGroup) -> Result<bool> {
    if g_group.degree() != h_group.degree() {
        return Err(Error::DegreeMismatch {
            left: g_group.degree(),
            right: h_group.degree(),
        });
    }
    if g_group.elements_materialized() {
        for h in h_group.generators() {
            if !g_group.contains(h)? {
                return Err(Error::domain(format!("generator {h} is not in the ambient group")));
            }
        }
    }
    for g in g_group.generators() {
        for h in h_group.generators() {
            if !h_group.contains(&h.conjugate_by(g))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Canonical key of a cyclic subgroup: its sorted element list.
fn cyclic_key(generator: &Perm) -> Vec<Perm> {
    let mut v = Vec::new();
    let mut x = Perm::identity(generator.degree());
    loop {
        v.push(x.clone());
        x = x.then(generator);
        if x.is_identity() {
            break;
        }
    }
    v.sort();
    v
}

/// Generator of a single-generator group, or the identity for the trivial group.
fn cyclic_generator(h: &PermGroup) -> Result<Perm> {
    match h.generators() {
        [] => Ok(Perm::identity(h.degree())),
        [g] => Ok(g.clone()),
        _ => Err(Error::domain("expected a cyclic group given by one generator")),
    }
}

/// Orbit of a cyclic subgroup under conjugation by `g_group`, with a
/// conjugating element for every subgroup reached. Stops early at `target`.
fn conjugation_orbit(
    g_group: &PermGroup,
    start: &Perm,
    target: Option<&[Perm]>,
    limit: usize,
) -> Result<Vec<(Vec<Perm>, Perm)>> {
    let key0 = cyclic_key(start);
    let mut index: HashMap<Vec<Perm>, usize> = HashMap::new();
    let mut orbit = vec![(key0.clone(), start.clone(), Perm::identity(start.degree()))];
    index.insert(key0, 0);
    let mut i = 0;
    while i < orbit.len() {
        if target.is_some_and(|t| orbit[i].0 == t) {
            break;
        }
        for g in g_group.generators() {
            let gen = orbit[i].1.conjugate_by(g);
            let key = cyclic_key(&gen);
            if index.contains_key(&key) {
                continue;
            }
            if orbit.len() >= limit {
                return Err(Error::Capacity {
                    what: "conjugacy class of subgroups",
                    limit,
                    reached: orbit.len() + 1,
                });
            }
            let t = orbit[i].2.then(g);
            index.insert(key.clone(), orbit.len());
            orbit.push((key, gen, t));
        }
        i += 1;
    }
    Ok(orbit.into_iter().map(|(k, _, t)| (k, t)).collect())
}

/// Finds `t` in `g_group` with `h1^t = h2`, or `None` if the two cyclic
/// subgroups are not conjugate in `g_group`.
///
/// Works on generators only: it walks the conjugacy class of `h1`, which
/// fails with a capacity error past the group's order cap. The returned
/// witness is verified before it is handed back.
pub fn are_conjugate_cyclic(g_group: &PermGroup, h1: &PermGroup, h2: &PermGroup) -> Result<Option<Perm>> {
    let a = cyclic_generator(h1)?;
    let b = cyclic_generator(h2)?;
    let target = cyclic_key(&b);
    let orbit = conjugation_orbit(g_group, &a, Some(&target), g_group.order_cap())?;
    let Some((_, t)) = orbit.into_iter().find(|(k, _)| *k == target) else {
        return Ok(None);
    };
    if cyclic_key(&a.conjugate_by(&t)) != target {
        return Err(Error::Inconsistent("conjugating witness failed verification".into()));
    }
    Ok(Some(t))
}

/// The set of conjugates of a cyclic subgroup inside `g_group`, as sorted
/// element lists.
pub fn conjugacy_class_keys(g_group: &PermGroup, generator: &Perm) -> Result<HashSet<Vec<Perm>>> {
    Ok(conjugation_orbit(g_group, generator, None, g_group.order_cap())?
        .into_iter()
        .map(|(k, _)| k)
        .collect())
}

/// Sorted element list of the cyclic group generated by `generator`.
pub fn cyclic_subgroup_elements(generator: &Perm) -> Vec<Perm> {
    cyclic_key(generator)
}

/// The distinct cyclic subgroups of `g_group` generated by a full `n`-cycle.
///
/// Each subgroup is returned with its lexicographically least generator as
/// its only generator, and the list is sorted by that generator.
pub fn regular_cyclic_subgroups(g_group: &PermGroup) -> Result<Vec<PermGroup>> {
    let n = g_group.degree();
    let mut best: HashMap<Vec<Perm>, Perm> = HashMap::new();
    for p in g_group.elements()? {
        if !p.is_full_cycle() {
            continue;
        }
        let key = cyclic_key(p);
        best.entry(key)
            .and_modify(|g| {
                if p < g {
                    *g = p.clone();
                }
            })
            .or_insert_with(|| p.clone());
    }
    let mut subgroups: Vec<(Perm, Vec<Perm>)> = best.into_iter().map(|(k, g)| (g, k)).collect();
    subgroups.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(subgroups
        .into_iter()
        .map(|(g, list)| {
            let grp = PermGroup::with_order(n, vec![g], BigUint::from(list.len()), g_group.order_cap());
            let _ = grp.elements.set(Some(Arc::new(ElementTable::new(list))));
            grp
        })
        .collect())
}
