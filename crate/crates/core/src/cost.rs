//! Cost ledger and classically executed, quantum-charged search primitives.
//!
//! Searches find their answer by an ordinary scan, but the ledger is charged
//! as if the scan were a quantum search: `⌈√N⌉` times the cost of one
//! predicate evaluation. Predicates may themselves run searches; the inner
//! charges are not booked directly but observed as the evaluation's unit
//! cost, so nesting composes multiplicatively.

use std::ops::{Add, AddAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

/// Work counters for one run. All counters only ever grow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    pub oracle_queries_a: u64,
    pub oracle_queries_b: u64,
    /// Charged quantum-search cost.
    pub quantum_units: u64,
    /// Tree nodes touched in the collision store.
    pub ds_ops: u64,
    /// Classical simulation work that the quantum model does not pay for.
    pub classical_ops: u64,
}

impl CostLedger {
    pub fn merge(&mut self, other: &CostLedger) {
        *self += *other;
    }

    pub fn oracle_queries(&self) -> u64 {
        self.oracle_queries_a + self.oracle_queries_b
    }

    /// Adds every counter of `other` except `quantum_units`.
    fn absorb_classical(&mut self, other: &CostLedger) {
        self.oracle_queries_a += other.oracle_queries_a;
        self.oracle_queries_b += other.oracle_queries_b;
        self.ds_ops += other.ds_ops;
        self.classical_ops += other.classical_ops;
    }
}

impl Add for CostLedger {
    type Output = CostLedger;

    fn add(mut self, rhs: CostLedger) -> CostLedger {
        self += rhs;
        self
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, rhs: CostLedger) {
        self.oracle_queries_a += rhs.oracle_queries_a;
        self.oracle_queries_b += rhs.oracle_queries_b;
        self.quantum_units += rhs.quantum_units;
        self.ds_ops += rhs.ds_ops;
        self.classical_ops += rhs.classical_ops;
    }
}

/// Search behaviour shared by a whole run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Probability that one search invocation reports "not found" even
    /// though a marked element exists.
    pub p_fail: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            p_fail: 0.0,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn exact(seed: u64) -> Self {
        SearchConfig { p_fail: 0.0, seed }
    }

    pub fn with_failure(p_fail: f64, seed: u64) -> Self {
        SearchConfig { p_fail, seed }
    }

    /// Number of invocations a caller should spend before trusting a
    /// "not found" answer for a problem of the given size: enough to push
    /// the miss probability below `size^-3`.
    pub fn attempts_for(&self, size: usize) -> u32 {
        if self.p_fail <= 0.0 || self.p_fail >= 1.0 {
            return 1;
        }
        let size = size.max(2) as f64;
        let t = (3.0 * size.ln() / (1.0 / self.p_fail).ln()).ceil();
        (t as u32).max(1)
    }
}

/// Mutable state of a run's searches: the failure model and the RNG.
#[derive(Clone, Debug)]
pub struct SearchContext {
    config: SearchConfig,
    rng: ChaCha8Rng,
}

impl SearchContext {
    pub fn new(config: SearchConfig) -> Self {
        SearchContext {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Attempts to spend per search for a problem of this size.
    pub fn attempts_for(&self, size: usize) -> u32 {
        self.config.attempts_for(size)
    }

    fn injected_failure(&mut self) -> bool {
        self.config.p_fail > 0.0 && self.rng.gen_bool(self.config.p_fail.min(1.0))
    }
}

/// `⌈√n⌉`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let s = n.isqrt();
    if s * s == n {
        s
    } else {
        s + 1
    }
}

/// A search predicate over `0..domain_size`.
///
/// `declared_unit` is the charge for one evaluation: 1 for a plain oracle or
/// store test, or the inner search's cost when the predicate nests a search.
/// The predicate must not observe changes to the underlying state while one
/// search invocation is in progress.
pub struct Predicate<F> {
    pub domain_size: usize,
    pub declared_unit: u64,
    pub evaluate: F,
}

impl<F> Predicate<F>
where
    F: FnMut(usize, &mut SearchContext, &mut CostLedger) -> Result<bool>,
{
    pub fn new(domain_size: usize, declared_unit: u64, evaluate: F) -> Self {
        Predicate {
            domain_size,
            declared_unit,
            evaluate,
        }
    }
}

/// One search invocation.
///
/// Scans the domain in a fresh uniformly random order and returns the first
/// index the predicate accepts, so the answer is uniform over the marked set.
/// With probability `p_fail` the answer is discarded and `None` returned.
///
/// Charges `⌈√N⌉ · u` quantum units where `u` is the larger of the declared
/// unit and the biggest quantum charge observed inside one evaluation. The
/// evaluations themselves only add to the classical counters.
pub fn grover_search<F>(
    pred: &mut Predicate<F>,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Option<usize>>
where
    F: FnMut(usize, &mut SearchContext, &mut CostLedger) -> Result<bool>,
{
    let n = pred.domain_size;
    let mut order: Vec<usize> = (0..n).collect();
    let mut unit = pred.declared_unit;
    let mut found = None;
    for t in 0..n {
        // Incremental Fisher-Yates: position t gets a uniform pick of the rest.
        let pick = ctx.rng.gen_range(t..n);
        order.swap(t, pick);
        let idx = order[t];

        let mut scratch = CostLedger::default();
        let hit = (pred.evaluate)(idx, ctx, &mut scratch)?;
        unit = unit.max(scratch.quantum_units);
        ledger.absorb_classical(&scratch);
        ledger.classical_ops += 1;
        if hit {
            found = Some(idx);
            break;
        }
    }
    ledger.quantum_units += ceil_sqrt(n as u64) * unit;
    if found.is_some() && ctx.injected_failure() {
        return Ok(None);
    }
    Ok(found)
}

/// Repeats [`grover_search`] up to `attempts` times until it finds something.
pub fn grover_search_amplified<F>(
    pred: &mut Predicate<F>,
    attempts: u32,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Option<usize>>
where
    F: FnMut(usize, &mut SearchContext, &mut CostLedger) -> Result<bool>,
{
    for _ in 0..attempts.max(1) {
        if let Some(x) = grover_search(pred, ctx, ledger)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Extremum finding: the index in `0..domain_size` with the largest key among
/// those passing `filter`, ties going to the smallest index.
///
/// Charged `⌈√N⌉` quantum units (unit-cost key and filter). Subject to the
/// same injected failure as [`grover_search`].
pub fn find_max_by_key<K, KF, FF>(
    domain_size: usize,
    mut key: KF,
    mut filter: FF,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Option<usize>>
where
    K: Ord,
    KF: FnMut(usize, &mut CostLedger) -> Result<K>,
    FF: FnMut(usize, &mut CostLedger) -> Result<bool>,
{
    let mut best: Option<(K, usize)> = None;
    for idx in 0..domain_size {
        ledger.classical_ops += 1;
        if !filter(idx, ledger)? {
            continue;
        }
        let k = key(idx, ledger)?;
        if best.as_ref().is_none_or(|(bk, _)| k > *bk) {
            best = Some((k, idx));
        }
    }
    ledger.quantum_units += ceil_sqrt(domain_size as u64);
    if best.is_some() && ctx.injected_failure() {
        return Ok(None);
    }
    Ok(best.map(|(_, idx)| idx))
}

/// [`find_max_by_key`] repeated until it answers, at most `attempts` times.
pub fn find_max_by_key_amplified<K, KF, FF>(
    domain_size: usize,
    mut key: KF,
    mut filter: FF,
    attempts: u32,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Option<usize>>
where
    K: Ord,
    KF: FnMut(usize, &mut CostLedger) -> Result<K>,
    FF: FnMut(usize, &mut CostLedger) -> Result<bool>,
{
    for _ in 0..attempts.max(1) {
        if let Some(x) = find_max_by_key(domain_size, &mut key, &mut filter, ctx, ledger)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}
