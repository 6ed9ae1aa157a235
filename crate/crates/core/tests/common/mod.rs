//! Slow, self-contained reference computations used to check the library.
//! Nothing here calls into the search or group code under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Adjacency matrix of `Cay(n, S)`: `adj[u][v]` iff `v - u` is in `S`.
pub fn cayley_matrix(n: usize, s: &[usize]) -> Vec<Vec<bool>> {
    (0..n)
        .map(|u| (0..n).map(|v| s.contains(&((v + n - u) % n))).collect())
        .collect()
}

pub fn is_auto(adj: &[Vec<bool>], p: &[usize]) -> bool {
    let n = adj.len();
    (0..n).all(|u| (0..n).all(|v| adj[u][v] == adj[p[u]][p[v]]))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                cur.push(x);
                rec(cur, used, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Every automorphism, by testing all `n!` permutations.
pub fn brute_automorphisms(adj: &[Vec<bool>]) -> BTreeSet<Vec<usize>> {
    permutations(adj.len()).into_iter().filter(|p| is_auto(adj, p)).collect()
}

/// Automorphisms fixing `v`, by extending partial maps one vertex at a time
/// and checking arcs among the mapped vertices.
pub fn automorphisms_fixing(adj: &[Vec<bool>], v: usize) -> Vec<Vec<usize>> {
    let n = adj.len();
    let order: Vec<usize> = std::iter::once(v).chain((0..n).filter(|&x| x != v)).collect();
    let mut img = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = Vec::new();
    fn rec(
        adj: &[Vec<bool>],
        order: &[usize],
        k: usize,
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == order.len() {
            out.push(img.clone());
            return;
        }
        let x = order[k];
        let candidates: Vec<usize> = if k == 0 { vec![x] } else { (0..adj.len()).collect() };
        for y in candidates {
            if used[y] {
                continue;
            }
            let ok = order[..k]
                .iter()
                .all(|&w| adj[w][x] == adj[img[w]][y] && adj[x][w] == adj[y][img[w]])
                && adj[x][x] == adj[y][y];
            if ok {
                img[x] = y;
                used[y] = true;
                rec(adj, order, k + 1, img, used, out);
                used[y] = false;
                img[x] = usize::MAX;
            }
        }
    }
    rec(adj, &order, 0, &mut img, &mut used, &mut out);
    out
}

pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    p.iter().map(|&x| q[x]).collect()
}

/// True iff `p` is a single cycle through all points.
pub fn is_n_cycle(p: &[usize]) -> bool {
    let n = p.len();
    let mut x = 0;
    for step in 1..=n {
        x = p[x];
        if x == 0 {
            return step == n;
        }
    }
    false
}

/// Sorted element set of the cyclic group generated by `p`.
pub fn cyclic_group(p: &[usize]) -> BTreeSet<Vec<usize>> {
    let id: Vec<usize> = (0..p.len()).collect();
    let mut out = BTreeSet::new();
    let mut x = id.clone();
    loop {
        out.insert(x.clone());
        x = compose(&x, p);
        if x == id {
            break;
        }
    }
    out
}

/// Number of distinct cyclic subgroups generated by `n`-cycles in `group`.
pub fn count_regular_cyclic(group: &BTreeSet<Vec<usize>>) -> usize {
    group
        .iter()
        .filter(|p| is_n_cycle(p))
        .map(|p| cyclic_group(p))
        .collect::<BTreeSet<_>>()
        .len()
}

pub fn units(n: usize) -> Vec<usize> {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    if n == 1 {
        return vec![1];
    }
    (1..n).filter(|&k| gcd(k, n) == 1).collect()
}

pub fn scale(n: usize, s: &[usize], k: usize) -> BTreeSet<usize> {
    s.iter().map(|&x| x * k % n).collect()
}

/// All `T` with `Cay(n, T)` isomorphic to `Cay(n, S)`, by relabeling with
/// every permutation and keeping the images that are again circulant.
pub fn isomorphic_circulants(n: usize, s: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let adj = cayley_matrix(n, s);
    let mut out = BTreeSet::new();
    for p in permutations(n) {
        let mut img = vec![vec![false; n]; n];
        for u in 0..n {
            for v in 0..n {
                img[p[u]][p[v]] = adj[u][v];
            }
        }
        let t: Vec<usize> = (1..n).filter(|&x| img[0][x]).collect();
        if img == cayley_matrix(n, &t) {
            out.insert(t.into_iter().collect());
        }
    }
    out
}

/// The CI property straight from the definition.
pub fn is_ci_by_definition(n: usize, s: &[usize]) -> bool {
    let orbit: BTreeSet<BTreeSet<usize>> = units(n).into_iter().map(|k| scale(n, s, k)).collect();
    isomorphic_circulants(n, s).is_subset(&orbit)
}

/// True iff `p` is `x -> k x + a` for some `k`, `a`.
pub fn is_affine(p: &[usize]) -> bool {
    let n = p.len();
    let a = p[0];
    let k = (p[1 % n] + n - a) % n;
    (0..n).all(|x| p[x] == (k * x + a) % n)
}

/// Distances from `v` by breadth-first search over out-arcs.
pub fn distances(adj: &[Vec<bool>], v: usize) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut d = vec![None; n];
    d[v] = Some(0);
    let mut frontier = vec![v];
    let mut k = 0;
    while !frontier.is_empty() {
        k += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for w in 0..n {
                if adj[u][w] && d[w].is_none() {
                    d[w] = Some(k);
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    d
}
