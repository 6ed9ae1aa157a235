//! Orbit-reduced sweeps over connection sets, per-instance reports, theorem
//! verification and a JSON-lines result cache.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{units, CrtContext};
use crate::cayley::{CayleyDigraph, ConnectionSet};
use crate::ci::{
    component_nonnormality_check, extension_automorphism, find_wreath_certificate, is_ci_babai,
    is_ci_normal, is_normal, wreath_check, wreath_from_component, ComponentCertificate,
    WreathCertificate, EXHAUSTIVE_MAX_N,
};
use crate::config::{max_n, DEFAULT_ORDER_CAP};
use crate::constructions::{nci_predicate, ndci_predicate};
use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::search::automorphism_group_with_cap;

/// Largest `n` swept without a bound on `|S|`.
pub const FULL_SWEEP_MAX_N: usize = 16;
/// Largest `n` swept at all.
pub const BOUNDED_SWEEP_MAX_N: usize = 24;

/// A canonical connection set with the size of its multiplier orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Representative {
    pub set: ConnectionSet,
    pub orbit_size: usize,
}

/// One representative per orbit of `x -> kx` on subsets of `Z_n \ {0}`, the
/// lexicographically least member, in lexicographic order. `max_size` bounds
/// `|S|`.
pub fn orbit_representatives(n: usize, max_size: Option<usize>) -> Result<Vec<Representative>> {
    if n == 0 || n > crate::config::HARD_MAX_N {
        return Err(Error::domain(format!("n = {n} out of range")));
    }
    if n > 32 {
        return Err(Error::Budget(format!("2^{} subsets of Z_{n} cannot be enumerated", n - 1)));
    }
    let mult = units(n as u64);
    let limit = max_size.unwrap_or(n);
    let mut reps: Vec<Representative> = (0..1u64 << (n - 1))
        .into_par_iter()
        .filter(|m| m.count_ones() as usize <= limit)
        .filter_map(|m| {
            let s = ConnectionSet::from_mask(n, m << 1).expect("mask within range");
            let mut images: Vec<u64> = Vec::with_capacity(mult.len());
            for &k in &mult {
                let t = s.scaled(k as usize);
                if t.lex_cmp(&s) == Ordering::Less {
                    return None;
                }
                images.push(t.mask());
            }
            images.sort_unstable();
            images.dedup();
            Some(Representative {
                set: s,
                orbit_size: images.len(),
            })
        })
        .collect();
    reps.sort_by(|a, b| a.set.lex_cmp(&b.set));
    Ok(reps)
}

/// A verdict that may have been skipped for budget reasons. Serializes as a
/// JSON boolean or the string `"skipped"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
pub enum Decision {
    Known(bool),
    Skipped,
}

impl Decision {
    pub fn known(self) -> Option<bool> {
        match self {
            Decision::Known(b) => Some(b),
            Decision::Skipped => None,
        }
    }
}

impl From<Decision> for serde_json::Value {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Known(b) => serde_json::Value::Bool(b),
            Decision::Skipped => serde_json::Value::String("skipped".into()),
        }
    }
}

impl TryFrom<serde_json::Value> for Decision {
    type Error = String;

    fn try_from(v: serde_json::Value) -> std::result::Result<Self, String> {
        match v {
            serde_json::Value::Bool(b) => Ok(Decision::Known(b)),
            serde_json::Value::String(s) if s == "skipped" => Ok(Decision::Skipped),
            other => Err(format!("expected a boolean or \"skipped\", got {other}")),
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Known(b) => write!(f, "{b}"),
            Decision::Skipped => f.write_str("skipped"),
        }
    }
}

/// Evidence attached to a report. Every item was checked when produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// A component multiplier preserving `S`.
    Component(ComponentCertificate),
    /// A generalized wreath structure and the non-affine automorphism it yields.
    Wreath {
        certificate: WreathCertificate,
        automorphism: Perm,
    },
    /// An automorphism fixing 0 that is not a multiplier.
    NonAffine { automorphism: Perm },
    /// An isomorphism onto `Cay(n, T)` with `T` not a multiplier image of `S`.
    NonCi { t: ConnectionSet, isomorphism: Perm },
}

/// The full analysis of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub n: usize,
    pub s: ConnectionSet,
    pub orbit_size: usize,
    pub inverse_closed: bool,
    pub generating: bool,
    /// `|Aut(Cay(n, S))|` in decimal.
    pub aut_order: String,
    pub normal: Decision,
    pub ci: Decision,
    pub regular_subgroup_count: Option<usize>,
    pub witness_t: Option<ConnectionSet>,
    /// Whether the component non-normality check fired.
    pub component_check: bool,
    /// `|A_0|`, as a number when it fits in 64 bits and as a decimal string otherwise.
    pub stab_order: serde_json::Value,
    pub certificates: Vec<Certificate>,
}

impl InstanceReport {
    /// A normal instance whose CI check failed.
    pub fn is_normal_non_ci(&self) -> bool {
        self.normal == Decision::Known(true) && self.ci == Decision::Known(false)
    }
}

/// [`classify_with_cap`] with the default order cap.
pub fn classify(s: &ConnectionSet) -> Result<InstanceReport> {
    classify_with_cap(s, DEFAULT_ORDER_CAP)
}

/// Analyzes `Cay(n, S)`: component pre-check, automorphism group, normality
/// and, for normal instances or `n <= 8`, the CI property.
///
/// Any disagreement between independent checks is an [`Error::Inconsistent`].
pub fn classify_with_cap(s: &ConnectionSet, order_cap: usize) -> Result<InstanceReport> {
    let n = s.n();
    let ctx = CrtContext::new(n as u64);
    let gamma = CayleyDigraph::new(*s);
    let mut certificates = Vec::new();

    let component = component_nonnormality_check(&ctx, s);
    if let Some(comp) = &component {
        let wreath = wreath_from_component(&ctx, s, comp)?;
        wreath_check(s, &wreath)
            .map_err(|r| Error::Inconsistent(format!("component certificate for {s} gives a bad wreath: {r}")))?;
        let automorphism = extension_automorphism(&gamma, &wreath, wreath.y)?;
        certificates.push(Certificate::Component(comp.clone()));
        certificates.push(Certificate::Wreath {
            certificate: wreath,
            automorphism,
        });
    }

    let aut = automorphism_group_with_cap(gamma.graph(), order_cap);
    let normality = is_normal(&gamma, &aut)?;
    if component.is_some() && normality.verdict {
        return Err(Error::Inconsistent(format!(
            "{s}: component multiplier preserves S but the digraph is normal"
        )));
    }
    if let Some(p) = &normality.offending_element {
        certificates.push(Certificate::NonAffine { automorphism: p.clone() });
        if component.is_none() {
            if let Some(w) = find_wreath_certificate(s) {
                let automorphism = extension_automorphism(&gamma, &w, w.y)?;
                certificates.push(Certificate::Wreath {
                    certificate: w,
                    automorphism,
                });
            }
        }
    }

    let verdict = if normality.verdict {
        Some(is_ci_normal(&gamma, &aut, &normality)?)
    } else if n <= EXHAUSTIVE_MAX_N {
        Some(is_ci_babai(&gamma, &aut)?)
    } else {
        None
    };
    if let Some(v) = &verdict {
        if let (Some(t), Some(iso)) = (v.witness_t, v.witness_iso.clone()) {
            certificates.push(Certificate::NonCi { t, isomorphism: iso });
        }
    }

    let stab_order = match normality.stabilizer_order.to_u64() {
        Some(k) => serde_json::Value::from(k),
        None => serde_json::Value::String(normality.stabilizer_order.to_string()),
    };
    let orbit_size = {
        let mut images: Vec<u64> = units(n as u64).into_iter().map(|k| s.scaled(k as usize).mask()).collect();
        images.sort_unstable();
        images.dedup();
        images.len()
    };
    Ok(InstanceReport {
        n,
        s: *s,
        orbit_size,
        inverse_closed: s.inverse_closed(),
        generating: s.generating(),
        aut_order: aut.order().to_string(),
        normal: Decision::Known(normality.verdict),
        ci: verdict.as_ref().map_or(Decision::Skipped, |v| Decision::Known(v.is_ci)),
        regular_subgroup_count: verdict.as_ref().map(|v| v.regular_subgroup_count),
        witness_t: verdict.and_then(|v| v.witness_t),
        component_check: component.is_some(),
        stab_order,
        certificates,
    })
}

/// Sweep parameters.
#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Bound on `|S|`; required for `17 <= n <= 24`.
    pub max_size: Option<usize>,
    /// Only inverse-closed sets.
    pub graphs_only: bool,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub cache: Option<PathBuf>,
    pub order_cap: Option<usize>,
}

/// Refuses sweeps that cannot finish at desk scale.
pub fn check_feasible(n: usize, max_size: Option<usize>) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    if n > max_n() {
        return Err(Error::Budget(format!("n = {n} exceeds the configured bound {}", max_n())));
    }
    if n > BOUNDED_SWEEP_MAX_N {
        return Err(Error::Budget(format!(
            "sweeps are limited to n <= {BOUNDED_SWEEP_MAX_N}; got n = {n}"
        )));
    }
    if n > FULL_SWEEP_MAX_N && max_size.is_none() {
        return Err(Error::Budget(format!(
            "n = {n} > {FULL_SWEEP_MAX_N} needs a bound on |S|"
        )));
    }
    Ok(())
}

/// Reports cached in a JSON-lines file, keyed by the instance text.
pub struct ReportCache {
    entries: HashMap<String, InstanceReport>,
    writer: Option<Mutex<File>>,
}

impl ReportCache {
    /// An in-memory cache that persists nothing.
    pub fn in_memory() -> Self {
        ReportCache {
            entries: HashMap::new(),
            writer: None,
        }
    }

    /// Loads `path` if it exists and opens it for appending. Lines that do
    /// not parse are skipped with a warning.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(path).map_err(|e| io_error(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| io_error(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<InstanceReport>(&line) {
                    Ok(r) => {
                        entries.insert(r.s.to_string(), r);
                    }
                    Err(e) => log::warn!("{}:{}: skipping corrupt cache line: {e}", path.display(), i + 1),
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| io_error(path, e))?;
        Ok(ReportCache {
            entries,
            writer: Some(Mutex::new(file)),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, s: &ConnectionSet) -> Option<&InstanceReport> {
        self.entries.get(&s.to_string())
    }

    fn append(&self, report: &InstanceReport) -> Result<()> {
        if let Some(w) = &self.writer {
            let line = serde_json::to_string(report).expect("reports serialize");
            let mut f = w.lock().unwrap_or_else(|e| e.into_inner());
            writeln!(f, "{line}").map_err(|e| Error::Budget(format!("cache write failed: {e}")))?;
        }
        Ok(())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Budget(format!("{}: {e}", path.display()))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Budget(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Classifies every orbit representative of `Z_n`, reusing and extending the
/// cache when one is given. Reports come back sorted by `S`.
pub fn sweep(n: usize, opts: &SweepOptions) -> Result<Vec<InstanceReport>> {
    check_feasible(n, opts.max_size)?;
    let cache = match &opts.cache {
        Some(p) => ReportCache::open(p)?,
        None => ReportCache::in_memory(),
    };
    sweep_with_cache(n, opts, &cache)
}

pub fn sweep_with_cache(n: usize, opts: &SweepOptions, cache: &ReportCache) -> Result<Vec<InstanceReport>> {
    check_feasible(n, opts.max_size)?;
    let cap = opts.order_cap.unwrap_or(DEFAULT_ORDER_CAP);
    with_pool(opts.jobs, || {
        let reps = orbit_representatives(n, opts.max_size)?;
        let reps: Vec<_> = reps
            .into_iter()
            .filter(|r| !opts.graphs_only || r.set.inverse_closed())
            .collect();
        let mut reports = reps
            .par_iter()
            .map(|r| match cache.get(&r.set) {
                Some(hit) => Ok(hit.clone()),
                None => {
                    let report = classify_with_cap(&r.set, cap)?;
                    cache.append(&report)?;
                    Ok(report)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        reports.sort_by(|a, b| a.s.lex_cmp(&b.s));
        log::info!("n = {n}: {} representatives classified", reports.len());
        Ok(reports)
    })?
}

/// Which family of Cayley digraphs a theorem check ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Digraph,
    Graph,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digraph" => Ok(Mode::Digraph),
            "graph" => Ok(Mode::Graph),
            other => Err(Error::domain(format!("unknown mode {other:?}"))),
        }
    }
}

/// The sweep outcome for one `n`, compared with the classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub n: usize,
    pub mode: Mode,
    /// No normal non-CI digraph was found; set in digraph mode.
    pub digraph_ndci_observed: Option<bool>,
    /// No normal non-CI graph was found; set in graph mode.
    pub graph_nci_observed: Option<bool>,
    /// The value the classification predicts for this `n` and mode.
    pub predicted: bool,
    /// Normal instances whose CI check failed, as canonical sets.
    pub counterexamples: Vec<ConnectionSet>,
    pub representatives: usize,
    /// The sweep was bounded by `|S|` and so cannot confirm "no counterexample".
    pub incomplete: bool,
}

impl TheoremVerdict {
    pub fn observed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// Whether the sweep matches the prediction. For an incomplete sweep an
    /// observed absence is only a lower bound.
    pub fn agrees(&self) -> bool {
        self.observed() == self.predicted
    }
}

/// Sweeps each `n` in `from..=to` and compares the presence of normal non-CI
/// instances with the classification predicate for `mode`.
pub fn verify_theorem(from: usize, to: usize, mode: Mode, opts: &SweepOptions) -> Result<Vec<TheoremVerdict>> {
    let mut out = Vec::new();
    for n in from..=to {
        let local = SweepOptions {
            graphs_only: opts.graphs_only || mode == Mode::Graph,
            ..opts.clone()
        };
        let reports = sweep(n, &local)?;
        let counterexamples: Vec<ConnectionSet> = reports
            .iter()
            .filter(|r| r.is_normal_non_ci())
            .map(|r| r.s)
            .collect();
        let observed = counterexamples.is_empty();
        let (predicted, d, g) = match mode {
            Mode::Digraph => (ndci_predicate(n as u64), Some(observed), None),
            Mode::Graph => (nci_predicate(n as u64), None, Some(observed)),
        };
        let incomplete = opts.max_size.is_some_and(|k| k < n - 1);
        if incomplete {
            log::warn!("n = {n}: sweep bounded by |S| <= {}, verdict incomplete", opts.max_size.unwrap_or(0));
        }
        out.push(TheoremVerdict {
            n,
            mode,
            digraph_ndci_observed: d,
            graph_nci_observed: g,
            predicted,
            counterexamples,
            representatives: reports.len(),
            incomplete,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Burnside: the number of orbits is the mean number of fixed subsets,
    /// and `x -> kx` fixes `2^c` subsets where `c` counts its cycles on `Z_n \ {0}`.
    fn burnside(n: usize) -> usize {
        let us = units(n as u64);
        let total: usize = us
            .iter()
            .map(|&k| {
                let mut seen = vec![false; n];
                let mut cycles = 0;
                for x in 1..n {
                    if !seen[x] {
                        cycles += 1;
                        let mut y = x;
                        while !seen[y] {
                            seen[y] = true;
                            y = y * k as usize % n;
                        }
                    }
                }
                1usize << cycles
            })
            .sum();
        total / us.len()
    }

    #[test]
    fn representative_counts() {
        assert_eq!(orbit_representatives(3, None).unwrap().len(), 3);
        assert_eq!(orbit_representatives(8, None).unwrap().len(), 48);
        assert_eq!(orbit_representatives(5, None).unwrap().len(), 6);
        for n in 1..=14 {
            let reps = orbit_representatives(n, None).unwrap();
            assert_eq!(reps.len(), burnside(n), "n = {n}");
            let covered: usize = reps.iter().map(|r| r.orbit_size).sum();
            assert_eq!(covered, 1 << (n - 1), "n = {n}");
        }
    }

    #[test]
    fn representatives_are_least() {
        let reps = orbit_representatives(8, None).unwrap();
        assert_eq!(reps[0].set.to_string(), "8:");
        assert!(reps.iter().any(|r| r.set.to_string() == "8:1,2,5"));
        assert!(!reps.iter().any(|r| r.set.to_string() == "8:3,6,7"));
        let bounded = orbit_representatives(8, Some(2)).unwrap();
        assert!(bounded.iter().all(|r| r.set.len() <= 2));
    }

    #[test]
    fn classify_examples() {
        let r = classify(&"8:1,2,5".parse().unwrap()).unwrap();
        assert_eq!(r.normal, Decision::Known(true));
        assert_eq!(r.ci, Decision::Known(false));
        assert_eq!(r.aut_order, "16");
        assert_eq!(r.witness_t.unwrap().to_string(), "8:1,5,6");
        assert_eq!(r.regular_subgroup_count, Some(2));

        let r = classify(&"8:1".parse().unwrap()).unwrap();
        assert_eq!((r.normal, r.ci, r.aut_order.as_str()), (Decision::Known(true), Decision::Known(true), "8"));

        let r = classify(&"9:1,4,7".parse().unwrap()).unwrap();
        assert_eq!(r.normal, Decision::Known(false));
        assert_eq!(r.ci, Decision::Skipped);
        assert!(r.component_check);
        assert!(r.certificates.iter().any(|c| matches!(c, Certificate::Wreath { .. })));
    }

    #[test]
    fn report_json_shape() {
        let r = classify(&"8:1,2,5".parse().unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["n"], 8);
        assert_eq!(v["s"], "8:1,2,5");
        assert_eq!(v["aut_order"], "16");
        assert_eq!(v["normal"], true);
        assert_eq!(v["ci"], false);
        assert_eq!(v["witness_t"], "8:1,5,6");
        assert_eq!(v["component_check"], false);
        assert_eq!(v["stab_order"], 2);
        let back: InstanceReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        let skipped = classify(&"9:1,4,7".parse().unwrap()).unwrap();
        assert_eq!(serde_json::to_value(&skipped).unwrap()["ci"], "skipped");
    }

    #[test]
    fn feasibility() {
        assert!(check_feasible(16, None).is_ok());
        assert!(matches!(check_feasible(17, None), Err(Error::Budget(_))));
        assert!(check_feasible(20, Some(3)).is_ok());
        assert!(matches!(check_feasible(25, Some(2)), Err(Error::Budget(_))));
    }

    #[test]
    fn small_theorem_sweep() {
        let v = verify_theorem(1, 9, Mode::Digraph, &SweepOptions::default()).unwrap();
        for t in &v {
            assert!(t.agrees(), "{t:?}");
        }
        assert!(v[7].counterexamples.iter().any(|s| s.to_string() == "8:1,2,5"));
    }
}
