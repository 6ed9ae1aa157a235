//! Closed-form witness families and the classification predicates.
//!
//! In the graph family `Z_n = Z_{2^s} x Z_m`; the pair `(u, v)` is the
//! element of `Z_n` congruent to `u` mod `2^s` and `v` mod `m`.

use crate::arith::mod_inverse;
use crate::cayley::ConnectionSet;
use crate::config::HARD_MAX_N;
use crate::error::{Error, Result};
use crate::perm::Perm;

/// The directed witness on `Z_{2^r}`: `S = {1, 2, 2^(r-1)+1}`.
pub fn li_digraph_witness(r: u32) -> Result<ConnectionSet> {
    if r < 3 {
        return Err(Error::domain(format!("r = {r} must be at least 3")));
    }
    let n = 1usize
        .checked_shl(r)
        .filter(|&n| n <= HARD_MAX_N)
        .ok_or_else(|| Error::domain(format!("2^{r} exceeds {HARD_MAX_N}")))?;
    ConnectionSet::new(n, [1, 2, n / 2 + 1])
}

fn graph_params(s: u32, m: usize) -> Result<(usize, usize)> {
    if s < 3 {
        return Err(Error::domain(format!("s = {s} must be at least 3")));
    }
    if m % 2 == 0 {
        return Err(Error::domain(format!("m = {m} must be odd")));
    }
    let two = 1usize
        .checked_shl(s)
        .ok_or_else(|| Error::domain("2^s overflows"))?;
    let n = two
        .checked_mul(m)
        .filter(|&n| n <= HARD_MAX_N)
        .ok_or_else(|| Error::domain(format!("2^{s}*{m} exceeds {HARD_MAX_N}")))?;
    if n == 8 {
        return Err(Error::domain("2^s*m = 8 is excluded"));
    }
    Ok((two, n))
}

/// The element of `Z_{two*m}` with residues `u` mod `two` and `v` mod `m`.
fn crt_pair(two: usize, m: usize, u: usize, v: usize) -> usize {
    let n = two * m;
    if m == 1 {
        return u % two;
    }
    let inv = mod_inverse(two as u64, m as u64).expect("2^s is a unit mod odd m") as usize;
    let t = (v % m + m - u % m) * inv % m;
    (u % two + two * t) % n
}

/// The undirected witness on `Z_{2^s m}`: `S` is `+-(1,1)`, `+-(2,2)` and
/// `+-(2^(s-1)+1, 1)`, six elements in all.
pub fn graph_witness(s: u32, m: usize) -> Result<ConnectionSet> {
    let (two, n) = graph_params(s, m)?;
    let half = two / 2;
    let mut members = Vec::with_capacity(6);
    for (u, v) in [(1, 1), (2, 2), (half + 1, 1)] {
        let x = crt_pair(two, m, u, v);
        members.push(x);
        members.push((n - x) % n);
    }
    members.sort_unstable();
    members.dedup();
    if members.len() != 6 {
        return Err(Error::domain(format!("connection set for (s, m) = ({s}, {m}) collapses")));
    }
    ConnectionSet::new(n, members)
}

/// `(u, v) -> ((2^(s-1)+1) u + 1, v + 1)`, a regular cyclic automorphism of
/// the graph witness outside the translation group.
pub fn second_regular_generator(s: u32, m: usize) -> Result<Perm> {
    let (two, n) = graph_params(s, m)?;
    let half = two / 2;
    Perm::from_fn(n, |x| {
        let u = ((half + 1) * (x % two) + 1) % two;
        let v = (x % m + 1) % m;
        crt_pair(two, m, u, v)
    })
}

/// Every normal Cayley digraph of `Z_n` is CI exactly when `8` does not divide `n`.
pub fn ndci_predicate(n: u64) -> bool {
    n % 8 != 0
}

/// Every normal Cayley graph of `Z_n` is CI exactly when `n = 8` or `8` does not divide `n`.
pub fn nci_predicate(n: u64) -> bool {
    n == 8 || n % 8 != 0
}

fn odd_squarefree(k: u64) -> bool {
    if k == 0 || k % 2 == 0 {
        return false;
    }
    let mut k = k;
    let mut p = 3;
    while p * p <= k {
        if k % p == 0 {
            k /= p;
            if k % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// `Z_n` is a DCI-group iff `n` is `k`, `2k` or `4k` with `k` odd and square-free.
pub fn muzychuk_dci(n: u64) -> bool {
    [1, 2, 4].iter().any(|&c| n % c == 0 && odd_squarefree(n / c))
}

/// `Z_n` is a CI-group iff it is a DCI-group or `n` is 8, 9 or 18.
pub fn muzychuk_ci(n: u64) -> bool {
    muzychuk_dci(n) || matches!(n, 8 | 9 | 18)
}
