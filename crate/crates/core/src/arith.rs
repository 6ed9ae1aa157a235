//! Arithmetic of `Z_n`: CRT coordinates, multipliers, and the affine group.
//!
//! `Z_n` is split as a product of prime-power cyclic factors. Factors are
//! ordered with the odd primes descending and the 2-part last, so factor
//! indices are stable across reports.

use num_integer::Integer;

use crate::config::DEFAULT_ORDER_CAP;
use crate::error::{Error, Result};
use crate::perm::{group_from_generators, Perm, PermGroup};

/// One factor `p^r` of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

/// The factorization of `n` together with the CRT bijection
/// `Z_n <-> Z_{p1^r1} x ... x Z_{pm^rm}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtContext {
    n: u64,
    factors: Vec<PrimePower>,
    /// `idempotents[i]` is `1` mod the i-th factor and `0` mod the others.
    idempotents: Vec<u64>,
}

fn factorize(mut n: u64) -> Vec<PrimePower> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut r = 0;
            while n % p == 0 {
                n /= p;
                r += 1;
            }
            out.push(PrimePower { prime: p, exponent: r });
        }
        p += 1;
    }
    if n > 1 {
        out.push(PrimePower { prime: n, exponent: 1 });
    }
    out
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

pub fn is_unit(k: u64, n: u64) -> bool {
    k.gcd(&n) == 1
}

/// Units of `Z_n` as least positive residues. For `n = 1` this is `[1]`.
pub fn units(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![1];
    }
    (1..n).filter(|&k| is_unit(k, n)).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(1, |acc, f| acc * (f.prime - 1) * f.prime.pow(f.exponent - 1))
}

/// Least `e >= 1` with `k^e = 1 (mod n)`.
pub fn multiplicative_order(k: u64, n: u64) -> Result<u64> {
    if !is_unit(k, n) {
        return Err(Error::domain(format!("{k} is not a unit mod {n}")));
    }
    let mut e = 1;
    let mut x = k % n;
    while x != 1 % n {
        x = x * k % n;
        e += 1;
    }
    Ok(e)
}

impl CrtContext {
    pub fn new(n: u64) -> Self {
        assert!(n >= 1, "modulus must be positive");
        let mut factors = factorize(n);
        factors.sort_by(|a, b| match (a.prime == 2, b.prime == 2) {
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            _ => b.prime.cmp(&a.prime),
        });
        let idempotents = factors
            .iter()
            .map(|f| {
                let m = f.modulus();
                let rest = n / m;
                rest * mod_inverse(rest % m, m).expect("coprime factors") % n
            })
            .collect();
        CrtContext {
            n,
            factors,
            idempotents,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    /// Residues of `x` modulo each factor.
    pub fn to_coords(&self, x: u64) -> Vec<u64> {
        self.factors.iter().map(|f| x % f.modulus()).collect()
    }

    pub fn from_coords(&self, coords: &[u64]) -> u64 {
        assert_eq!(coords.len(), self.factors.len(), "coordinate count");
        let n = self.n as u128;
        coords
            .iter()
            .zip(&self.idempotents)
            .fold(0u128, |acc, (&c, &e)| (acc + c as u128 * e as u128) % n) as u64
    }

    /// The unit acting as `k_t` on coordinate `t` and as 1 on every other.
    pub fn lift_component_unit(&self, t: usize, k_t: u64) -> u64 {
        let mut coords: Vec<u64> = self.factors.iter().map(|f| 1 % f.modulus()).collect();
        coords[t] = k_t % self.factors[t].modulus();
        self.from_coords(&coords)
    }

    /// A small generating set of the unit group, chosen greedily.
    pub fn unit_generators(&self) -> Vec<u64> {
        let n = self.n;
        let mut span = vec![1 % n.max(1)];
        let mut gens = Vec::new();
        for k in units(n) {
            if span.contains(&(k % n)) {
                continue;
            }
            gens.push(k);
            let mut i = 0;
            while i < span.len() {
                for &g in &gens {
                    let y = span[i] * g % n;
                    if !span.contains(&y) {
                        span.push(y);
                    }
                }
                i += 1;
            }
        }
        gens
    }
}

pub fn crt_decompose(n: u64) -> CrtContext {
    CrtContext::new(n)
}

/// The map `x -> k*x + shift`, with `k` a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffinePair {
    pub shift: u64,
    pub multiplier: u64,
}

impl AffinePair {
    pub fn to_perm(&self, n: u64) -> Perm {
        Perm::from_fn(n as usize, |x| ((self.multiplier * x as u64 + self.shift) % n) as usize)
            .expect("affine map with unit multiplier is a bijection")
    }

    /// CRT coordinates of the multiplier, one component automorphism per factor.
    pub fn multiplier_components(&self, ctx: &CrtContext) -> Vec<u64> {
        ctx.to_coords(self.multiplier)
    }
}

/// `x -> k*x mod n`.
pub fn unit_to_perm(ctx: &CrtContext, k: u64) -> Result<Perm> {
    if !is_unit(k, ctx.n) {
        return Err(Error::domain(format!("{k} is not a unit mod {}", ctx.n)));
    }
    Ok(AffinePair { shift: 0, multiplier: k % ctx.n.max(1) }.to_perm(ctx.n))
}

/// Multiplier of the order-`p` automorphism on factor `t = p^r`: it acts as
/// `p^(r-1) + 1` on coordinate `t` and as 1 elsewhere.
pub fn component_multiplier(ctx: &CrtContext, t: usize) -> Result<u64> {
    let f = ctx
        .factors
        .get(t)
        .ok_or_else(|| Error::domain(format!("factor index {t} out of range")))?;
    if f.prime == 2 || f.exponent < 2 {
        return Err(Error::domain(format!(
            "factor {}^{} has no component automorphism of order {}",
            f.prime, f.exponent, f.prime
        )));
    }
    Ok(ctx.lift_component_unit(t, f.prime.pow(f.exponent - 1) + 1))
}

pub fn component_automorphism(ctx: &CrtContext, t: usize) -> Result<Perm> {
    unit_to_perm(ctx, component_multiplier(ctx, t)?)
}

/// `Hol(Z_n)`: all affine maps `x -> k*x + a`, of order `n * phi(n)`.
pub fn holomorph(ctx: &CrtContext) -> PermGroup {
    let n = ctx.n;
    let mut gens = vec![AffinePair { shift: 1 % n, multiplier: 1 % n }.to_perm(n)];
    for k in ctx.unit_generators() {
        gens.push(unit_to_perm(ctx, k).expect("generator is a unit"));
    }
    let cap = (n * euler_phi(n)) as usize;
    group_from_generators(n as usize, gens, cap.max(DEFAULT_ORDER_CAP))
        .expect("holomorph fits its own order")
}

/// Reads `p` as `x -> k*x + a` if it is affine.
pub fn decompose_affine(p: &Perm, ctx: &CrtContext) -> Option<AffinePair> {
    let n = ctx.n;
    if p.degree() as u64 != n {
        return None;
    }
    let shift = p.apply(0) as u64;
    let multiplier = if n == 1 {
        1
    } else {
        (p.apply(1) as u64 + n - shift) % n
    };
    if !is_unit(multiplier, n) {
        return None;
    }
    let pair = AffinePair { shift, multiplier };
    (0..n)
        .all(|x| p.apply(x as usize) as u64 == (multiplier * x + shift) % n)
        .then_some(pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn phi_by_gcd(n: u64) -> u64 {
        (1..=n).filter(|&k| k.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn factor_order() {
        assert!(CrtContext::new(1).factors().is_empty());
        let ctx = CrtContext::new(24);
        assert_eq!(
            ctx.factors(),
            &[PrimePower { prime: 3, exponent: 1 }, PrimePower { prime: 2, exponent: 3 }]
        );
        assert_eq!(ctx.to_coords(17), vec![2, 1]);
        let ctx = CrtContext::new(360);
        let pp: Vec<_> = ctx.factors().iter().map(|f| (f.prime, f.exponent)).collect();
        assert_eq!(pp, [(5, 1), (3, 2), (2, 3)]);
    }

    #[test]
    fn crt_round_trip() {
        for n in 1..=64 {
            let ctx = CrtContext::new(n);
            let prod: u64 = ctx.factors().iter().map(|f| f.modulus()).product();
            assert_eq!(prod, n);
            for x in 0..n {
                assert_eq!(ctx.from_coords(&ctx.to_coords(x)), x);
            }
        }
    }

    #[test]
    fn unit_perms() {
        assert!(unit_to_perm(&CrtContext::new(8), 1).unwrap().is_identity());
        assert_eq!(unit_to_perm(&CrtContext::new(8), 5).unwrap().order(), 2);
        assert_eq!(unit_to_perm(&CrtContext::new(9), 4).unwrap().order(), 3);
        assert!(unit_to_perm(&CrtContext::new(8), 2).is_err());
        for n in 2..=30 {
            let ctx = CrtContext::new(n);
            for k in units(n) {
                let p = unit_to_perm(&ctx, k).unwrap();
                assert_eq!(p.order(), multiplicative_order(k, n).unwrap());
            }
        }
    }

    #[test]
    fn component_automorphisms() {
        let ctx = CrtContext::new(9);
        assert_eq!(component_multiplier(&ctx, 0).unwrap(), 4);
        let ctx = CrtContext::new(18);
        assert_eq!(component_multiplier(&ctx, 0).unwrap(), 13);
        let ctx = CrtContext::new(45);
        let t = ctx.factors().iter().position(|f| f.prime == 3).unwrap();
        assert_eq!(component_multiplier(&ctx, t).unwrap(), 31);
        let d = component_automorphism(&ctx, t).unwrap();
        assert_eq!(d.order(), 3);
        let five = ctx.factors().iter().position(|f| f.prime == 5).unwrap();
        for x in 0..45 {
            assert_eq!(ctx.to_coords(d.apply(x as usize) as u64)[five], ctx.to_coords(x)[five]);
        }
        // 2-part and square-free factors are out of scope
        assert!(component_multiplier(&CrtContext::new(8), 0).is_err());
        assert!(component_multiplier(&CrtContext::new(15), 0).is_err());
    }

    #[test]
    fn component_automorphism_shape() {
        for n in 2..=64u64 {
            let ctx = CrtContext::new(n);
            for (t, f) in ctx.factors().iter().enumerate() {
                let Ok(d) = component_automorphism(&ctx, t) else { continue };
                assert_eq!(d.order(), f.prime);
                for x in 0..n {
                    let diff = (d.apply(x as usize) as u64 + n - x) % n;
                    assert_eq!(diff % (n / f.prime), 0, "n={n} x={x}");
                }
            }
        }
    }

    #[test]
    fn holomorph_orders() {
        assert_eq!(*holomorph(&CrtContext::new(2)).order(), BigUint::from(2u32));
        assert_eq!(*holomorph(&CrtContext::new(8)).order(), BigUint::from(32u32));
        assert_eq!(*holomorph(&CrtContext::new(12)).order(), BigUint::from(48u32));
        for n in 1..=32 {
            let h = holomorph(&CrtContext::new(n));
            assert_eq!(*h.order(), BigUint::from(n * phi_by_gcd(n)), "n={n}");
            assert_eq!(euler_phi(n), phi_by_gcd(n));
        }
    }

    #[test]
    fn affine_decomposition() {
        let ctx = CrtContext::new(8);
        assert_eq!(
            decompose_affine(&Perm::identity(8), &ctx),
            Some(AffinePair { shift: 0, multiplier: 1 })
        );
        let p = AffinePair { shift: 1, multiplier: 5 }.to_perm(8);
        assert_eq!(decompose_affine(&p, &ctx), Some(AffinePair { shift: 1, multiplier: 5 }));
        let swap = Perm::from_cycles(4, &[&[0, 1]]).unwrap();
        assert_eq!(decompose_affine(&swap, &CrtContext::new(4)), None);
    }

    #[test]
    fn holomorph_elements_decompose() {
        for n in 1..=20 {
            let ctx = CrtContext::new(n);
            for k in units(n) {
                let pair = decompose_affine(&unit_to_perm(&ctx, k).unwrap(), &ctx).unwrap();
                assert_eq!(pair, AffinePair { shift: 0, multiplier: k });
            }
            for h in holomorph(&ctx).elements().unwrap() {
                let pair = decompose_affine(h, &ctx).expect("holomorph element is affine");
                assert_eq!(&pair.to_perm(n), h);
                assert_eq!(ctx.from_coords(&pair.multiplier_components(&ctx)), pair.multiplier % n);
            }
        }
    }
}
