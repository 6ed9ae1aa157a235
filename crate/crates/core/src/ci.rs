//! Normality and CI decisions for `Cay(Z_n, S)`, with certificates.
//!
//! Normality is decided two ways and the answers are cross-checked: by
//! comparing the vertex stabilizer `A_0` with the multiplier group
//! `Aut(Z_n, S)`, and by testing whether the translations are normalized by
//! every generator of `A`. CI is decided by Babai's criterion (all regular
//! cyclic subgroups of `A` are conjugate) and, for normal digraphs, by
//! uniqueness of the regular cyclic subgroup.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{component_multiplier, decompose_affine, units, unit_to_perm, CrtContext};
use crate::cayley::{right_translation, CayleyDigraph, ConnectionSet};
use crate::error::{Error, Result};
use crate::perm::{
    are_conjugate_cyclic, conjugacy_class_keys, cyclic_subgroup_elements, group_from_generators, is_normal_subgroup,
    regular_cyclic_subgroups, Perm, PermGroup,
};
use crate::search::for_each_permutation;

/// Largest modulus accepted by [`is_ci_exhaustive`].
pub const EXHAUSTIVE_MAX_N: usize = 8;

/// The translation group `R(Z_n)`, elements cached.
pub fn translation_group(n: usize) -> PermGroup {
    group_from_generators(n, vec![right_translation(n, 1 % n)], n.max(1))
        .expect("cyclic group of order n")
}

/// `Aut(Z_n, S)`: the units `k` with `k*S = S`. Always contains 1.
pub fn aut_gs(s: &ConnectionSet) -> Vec<u64> {
    let n = s.n();
    units(n as u64)
        .into_iter()
        .filter(|&k| s.scaled(k as usize) == *s)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalityCertificate {
    pub verdict: bool,
    /// `|A_0| = |A| / n`.
    pub stabilizer_order: BigUint,
    pub aut_gs_order: usize,
    /// An automorphism fixing 0 that is not a multiplier; present iff non-normal.
    pub offending_element: Option<Perm>,
}

fn is_translation(p: &Perm) -> bool {
    let n = p.degree();
    let a = p.apply(0);
    (0..n).all(|x| p.apply(x) == (x + a) % n)
}

/// Decides normality of `gamma` given its automorphism group `aut`.
///
/// Both routes are computed; disagreement is reported as
/// [`Error::Inconsistent`]. Neither route needs `aut`'s element list.
pub fn is_normal(gamma: &CayleyDigraph, aut: &PermGroup) -> Result<NormalityCertificate> {
    let n = gamma.n();
    if aut.degree() != n {
        return Err(Error::DegreeMismatch {
            left: n,
            right: aut.degree(),
        });
    }
    let order = aut.order();
    if order % BigUint::from(n) != BigUint::from(0u32) {
        return Err(Error::Inconsistent(format!(
            "|Aut| = {order} is not a multiple of n = {n}"
        )));
    }
    let stabilizer_order = order / BigUint::from(n);
    let multipliers = aut_gs(gamma.connection());
    let by_stabilizer = stabilizer_order == BigUint::from(multipliers.len());

    let r = translation_group(n);
    let by_normalizer = is_normal_subgroup(aut, &r)?;
    if by_stabilizer != by_normalizer {
        return Err(Error::Inconsistent(format!(
            "normality routes disagree on {}: stabilizer {by_stabilizer}, normalizer {by_normalizer}",
            gamma.connection()
        )));
    }

    let offending_element = if by_stabilizer {
        None
    } else {
        let shift = right_translation(n, 1);
        let g = aut
            .generators()
            .iter()
            .find(|g| !is_translation(&shift.conjugate_by(g)))
            .ok_or_else(|| Error::Inconsistent("non-normal but every generator normalizes R".into()))?;
        let back = right_translation(n, (n - g.apply(0)) % n);
        let p = g.then(&back);
        let ctx = CrtContext::new(n as u64);
        if p.apply(0) != 0 || !gamma.graph().is_automorphism(&p) || decompose_affine(&p, &ctx).is_some() {
            return Err(Error::Inconsistent("offending element failed verification".into()));
        }
        Some(p)
    };

    Ok(NormalityCertificate {
        verdict: by_stabilizer,
        stabilizer_order,
        aut_gs_order: multipliers.len(),
        offending_element,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiVerdict {
    pub is_ci: bool,
    pub regular_subgroup_count: usize,
    /// A connection set with `Cay(n, S) ~ Cay(n, T)` but no multiplier taking `S` to `T`.
    pub witness_t: Option<ConnectionSet>,
    /// The isomorphism `Cay(n, S) -> Cay(n, T)`.
    pub witness_iso: Option<Perm>,
}

/// Relabels vertices along the orbit of 0 under `x`'s generator and reads off
/// the new connection set. Verified before returning.
fn witness_from_subgroup(gamma: &CayleyDigraph, x: &PermGroup) -> Result<(ConnectionSet, Perm)> {
    let n = gamma.n();
    let g = x
        .generators()
        .first()
        .ok_or_else(|| Error::domain("regular subgroup without a generator"))?;
    let mut labels = vec![0; n];
    let mut v = 0;
    for k in 0..n {
        labels[v] = k;
        v = g.apply(v);
    }
    let iso = Perm::from_images(labels)?;
    let s = gamma.connection();
    let t = s.mapped(&iso)?;
    let target = CayleyDigraph::new(t);
    if !gamma.graph().is_isomorphism_to(target.graph(), &iso) {
        return Err(Error::Inconsistent(format!("relabeling of {s} is not an isomorphism onto {t}")));
    }
    if units(n as u64).into_iter().any(|k| s.scaled(k as usize) == t) {
        return Err(Error::Inconsistent(format!("witness {t} is a multiplier image of {s}")));
    }
    Ok((t, iso))
}

fn first_non_conjugate(aut: &PermGroup, subgroups: &[PermGroup]) -> Result<Option<usize>> {
    let n = aut.degree();
    let class = conjugacy_class_keys(aut, &right_translation(n, 1 % n))?;
    Ok(subgroups
        .iter()
        .position(|x| !class.contains(&cyclic_subgroup_elements(&x.generators()[0]))))
}

/// Whether the cyclic group generated by `g` is conjugate in `aut` to the
/// translations. The conjugating element is verified when found.
pub fn conjugate_to_translations(aut: &PermGroup, g: &Perm) -> Result<bool> {
    let n = aut.degree();
    let r = translation_group(n);
    let h = group_from_generators(n, vec![g.clone()], aut.order_cap())?;
    Ok(are_conjugate_cyclic(aut, &h, &r)?.is_some())
}

/// Babai's criterion: CI iff every regular cyclic subgroup of `aut` is
/// conjugate to the translations. Needs `aut`'s element list.
pub fn is_ci_babai(gamma: &CayleyDigraph, aut: &PermGroup) -> Result<CiVerdict> {
    let subgroups = regular_cyclic_subgroups(aut)?;
    let bad = first_non_conjugate(aut, &subgroups)?;
    let (witness_t, witness_iso) = match bad {
        Some(i) => {
            let (t, iso) = witness_from_subgroup(gamma, &subgroups[i])?;
            (Some(t), Some(iso))
        }
        None => (None, None),
    };
    Ok(CiVerdict {
        is_ci: bad.is_none(),
        regular_subgroup_count: subgroups.len(),
        witness_t,
        witness_iso,
    })
}

/// For a normal digraph: CI iff the translations are the only regular cyclic
/// subgroup.
pub fn is_ci_normal(
    gamma: &CayleyDigraph,
    aut: &PermGroup,
    normality: &NormalityCertificate,
) -> Result<CiVerdict> {
    if !normality.verdict {
        return Err(Error::domain(format!("{} is not normal", gamma.connection())));
    }
    let n = gamma.n();
    let subgroups = regular_cyclic_subgroups(aut)?;
    let r_key = cyclic_subgroup_elements(&right_translation(n, 1 % n));
    let other = subgroups
        .iter()
        .find(|x| cyclic_subgroup_elements(&x.generators()[0]) != r_key);
    let (witness_t, witness_iso) = match other {
        Some(x) => {
            let (t, iso) = witness_from_subgroup(gamma, x)?;
            (Some(t), Some(iso))
        }
        None => (None, None),
    };
    Ok(CiVerdict {
        is_ci: subgroups.len() == 1,
        regular_subgroup_count: subgroups.len(),
        witness_t,
        witness_iso,
    })
}

/// A Cayley-isomorphic but not multiplier-equivalent connection set, taken
/// from the first regular cyclic subgroup not conjugate to the translations.
pub fn non_ci_witness(gamma: &CayleyDigraph, aut: &PermGroup) -> Result<Option<(ConnectionSet, Perm)>> {
    let subgroups = regular_cyclic_subgroups(aut)?;
    match first_non_conjugate(aut, &subgroups)? {
        Some(i) => witness_from_subgroup(gamma, &subgroups[i]).map(Some),
        None => Ok(None),
    }
}

/// A connection set `T` with `Cay(n, S) ~ Cay(n, T)` and `T` not a multiplier
/// image of `S`, found by trying all `n!` vertex bijections. `n <= 8` only.
pub fn exhaustive_ci_counterexample(s: &ConnectionSet) -> Result<Option<ConnectionSet>> {
    let n = s.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::Capacity {
            what: "exhaustive CI check",
            limit: EXHAUSTIVE_MAX_N,
            reached: n,
        });
    }
    let full = (1u64 << n) - 1;
    let rotate = |t: u64, g: usize| {
        if g == 0 {
            t
        } else {
            ((t << g) | (t >> (n - g))) & full
        }
    };
    let rows: Vec<u64> = (0..n).map(|g| rotate(s.mask(), g)).collect();
    let mut cayley_images: Vec<u64> = Vec::new();
    let mut image = vec![0u64; n];
    for_each_permutation(n, |sigma| {
        for (u, &row) in rows.iter().enumerate() {
            let mut img = 0;
            for (v, &target) in sigma.iter().enumerate() {
                if row >> v & 1 == 1 {
                    img |= 1 << target;
                }
            }
            image[sigma[u]] = img;
        }
        let t = image[0];
        if (0..n).all(|g| image[g] == rotate(t, g)) && !cayley_images.contains(&t) {
            cayley_images.push(t);
        }
    });
    let orbit: Vec<u64> = units(n as u64)
        .into_iter()
        .map(|k| s.scaled(k as usize).mask())
        .collect();
    cayley_images.sort_unstable();
    cayley_images
        .into_iter()
        .find(|t| !orbit.contains(t))
        .map(|t| ConnectionSet::from_mask(n, t))
        .transpose()
}

/// The CI definition checked directly: every Cayley digraph of `Z_n`
/// isomorphic to `Cay(n, S)` comes from a multiplier. `n <= 8` only.
pub fn is_ci_exhaustive(s: &ConnectionSet) -> Result<bool> {
    Ok(exhaustive_ci_counterexample(s)?.is_none())
}

/// An order-`p` multiplier acting only on one odd prime-power factor of
/// `Z_n` and preserving `S`. Its existence forces non-normality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCertificate {
    pub factor_index: usize,
    pub prime: u64,
    pub exponent: u32,
    pub multiplier: u64,
    pub delta: Perm,
}

/// The least factor index `t` (odd `p`, `r >= 2`) whose component
/// automorphism preserves `S`, if any.
pub fn component_nonnormality_check(ctx: &CrtContext, s: &ConnectionSet) -> Option<ComponentCertificate> {
    ctx.factors().iter().enumerate().find_map(|(t, f)| {
        let k = component_multiplier(ctx, t).ok()?;
        (s.scaled(k as usize) == *s).then(|| ComponentCertificate {
            factor_index: t,
            prime: f.prime,
            exponent: f.exponent,
            multiplier: k,
            delta: unit_to_perm(ctx, k).expect("component multiplier is a unit"),
        })
    })
}

/// The subgroup of `Z_n` of a given order: the multiples of `n / order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorSubgroup {
    pub n: usize,
    pub order: usize,
}

impl DivisorSubgroup {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if order == 0 || n % order != 0 {
            return Err(Error::domain(format!("{order} does not divide {n}")));
        }
        Ok(DivisorSubgroup { n, order })
    }

    pub fn step(&self) -> usize {
        self.n / self.order
    }

    pub fn contains(&self, x: usize) -> bool {
        x % self.step() == 0
    }

    pub fn elements(&self) -> Vec<usize> {
        (0..self.n).step_by(self.step()).collect()
    }

    pub fn is_subgroup_of(&self, other: &DivisorSubgroup) -> bool {
        self.n == other.n && other.order % self.order == 0
    }
}

/// Data for the generalized-wreath non-normality test: `1 < H <= K < Z_n`,
/// `S \ K` a union of `H`-cosets, `x` outside `K`, and `y` in `H` with
/// `2y != 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathCertificate {
    pub k: DivisorSubgroup,
    pub h: DivisorSubgroup,
    pub x: usize,
    pub y: usize,
    pub cosets_ok: bool,
}

fn outside_is_union_of_cosets(s: &ConnectionSet, k: &DivisorSubgroup, h: &DivisorSubgroup) -> bool {
    let n = s.n();
    s.members()
        .into_iter()
        .filter(|&m| !k.contains(m))
        .all(|m| h.elements().into_iter().all(|e| s.contains((m + e) % n)))
}

impl WreathCertificate {
    pub fn new(s: &ConnectionSet, k_order: usize, h_order: usize, x: usize, y: usize) -> Result<Self> {
        let n = s.n();
        let k = DivisorSubgroup::new(n, k_order)?;
        let h = DivisorSubgroup::new(n, h_order)?;
        Ok(WreathCertificate {
            k,
            h,
            x: x % n,
            y: y % n,
            cosets_ok: outside_is_union_of_cosets(s, &k, &h),
        })
    }
}

/// The hypothesis a rejected certificate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WreathRejection {
    ModulusMismatch,
    HNotInsideK,
    HTrivial,
    KNotProper,
    NotUnionOfCosets,
    XInsideK,
    YOutsideH,
    /// `y = -y`, so conjugation by `x` inverts `y` in an abelian group.
    YSelfInverse,
}

impl fmt::Display for WreathRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            WreathRejection::ModulusMismatch => "subgroups live in a different Z_n",
            WreathRejection::HNotInsideK => "H is not contained in K",
            WreathRejection::HTrivial => "H is trivial",
            WreathRejection::KNotProper => "K is the whole group",
            WreathRejection::NotUnionOfCosets => "S \\ K is not a union of H-cosets",
            WreathRejection::XInsideK => "x lies in K",
            WreathRejection::YOutsideH => "y is not in H",
            WreathRejection::YSelfInverse => "y = -y",
        };
        f.write_str(msg)
    }
}

/// Validates every hypothesis of the certificate against `S`, recomputing the
/// coset condition. `Ok(())` means `Cay(n, S)` is non-normal.
pub fn wreath_check(s: &ConnectionSet, cert: &WreathCertificate) -> std::result::Result<(), WreathRejection> {
    let n = s.n();
    let (k, h) = (&cert.k, &cert.h);
    if k.n != n || h.n != n {
        return Err(WreathRejection::ModulusMismatch);
    }
    if h.order <= 1 {
        return Err(WreathRejection::HTrivial);
    }
    if !h.is_subgroup_of(k) {
        return Err(WreathRejection::HNotInsideK);
    }
    if k.order >= n {
        return Err(WreathRejection::KNotProper);
    }
    if !outside_is_union_of_cosets(s, k, h) {
        return Err(WreathRejection::NotUnionOfCosets);
    }
    if k.contains(cert.x % n) {
        return Err(WreathRejection::XInsideK);
    }
    if !h.contains(cert.y % n) {
        return Err(WreathRejection::YOutsideH);
    }
    if 2 * cert.y % n == 0 {
        return Err(WreathRejection::YSelfInverse);
    }
    Ok(())
}

/// Searches all subgroup pairs for an acceptable certificate, smallest `K`
/// first, then smallest `H`. Uses `x = 1` and `y = n / |H|`.
pub fn find_wreath_certificate(s: &ConnectionSet) -> Option<WreathCertificate> {
    let n = s.n();
    let divisors: Vec<usize> = (1..n).filter(|d| n % d == 0).collect();
    for &ko in &divisors {
        for &ho in divisors.iter().filter(|&&d| d > 2 && ko % d == 0) {
            let cert = WreathCertificate::new(s, ko, ho, 1, n / ho).ok()?;
            if wreath_check(s, &cert).is_ok() {
                return Some(cert);
            }
        }
    }
    None
}

/// The certificate a component automorphism induces: `K` of index `p`, `H` of
/// order `p`, `x` the unit vector of factor `t`, `y = p^(r-1) x`.
pub fn wreath_from_component(ctx: &CrtContext, s: &ConnectionSet, comp: &ComponentCertificate) -> Result<WreathCertificate> {
    let n = ctx.n() as usize;
    let p = comp.prime as usize;
    let mut unit = vec![0u64; ctx.factors().len()];
    unit[comp.factor_index] = 1;
    let x = ctx.from_coords(&unit) as usize;
    let y = x * p.pow(comp.exponent - 1) % n;
    WreathCertificate::new(s, n / p, p, x, y)
}

/// The permutation adding `h` on the coset `K + x` and fixing everything
/// else. It is checked to be an automorphism of `gamma` fixing 0, and, when
/// `2h != 0`, not affine.
pub fn extension_automorphism(gamma: &CayleyDigraph, cert: &WreathCertificate, h: usize) -> Result<Perm> {
    let n = gamma.n();
    wreath_check(gamma.connection(), cert).map_err(|r| Error::domain(format!("wreath hypothesis failed: {r}")))?;
    if !cert.h.contains(h % n) {
        return Err(Error::domain(format!("{h} is not in H")));
    }
    let in_coset = |v: usize| cert.k.contains((v + n - cert.x) % n);
    let p = Perm::from_fn(n, |v| if in_coset(v) { (v + h) % n } else { v })?;
    if !gamma.graph().is_automorphism(&p) || p.apply(0) != 0 {
        return Err(Error::Inconsistent(format!(
            "extension by {h} on {} + K is not an automorphism fixing 0",
            cert.x
        )));
    }
    if 2 * h % n != 0 && decompose_affine(&p, &CrtContext::new(n as u64)).is_some() {
        return Err(Error::Inconsistent(format!("extension by {h} is affine")));
    }
    Ok(p)
}

/// `|A_0|` as a machine integer, when it fits.
pub fn stabilizer_order_small(cert: &NormalityCertificate) -> Option<u64> {
    cert.stabilizer_order.to_u64()
}
