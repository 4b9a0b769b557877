//! Random-permutation block decomposition.
//!
//! Permuting the rows of `A` and the columns of `B` uniformly at random and
//! cutting the product into `r × r` blocks spreads the non-zeros so that the
//! block holding any given non-zero has at most `Δ` non-zeros with
//! probability at least 9/10. Each block product is then handed to a
//! capped sub-algorithm, and the whole procedure is repeated to drive the
//! miss probability down.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolmat::{brute_force_product, BoolMatrix, EntrySet, MatrixView, WitnessedEntry};
use crate::cost::{CostLedger, SearchContext};
use crate::error::{Error, Result};
use crate::finder::find_up_to_lambda_entries;

/// Per-block non-zero threshold
/// `Δ = 10·(L·⌈n/r⌉²/(n−1)² + 2⌈n/r⌉ − 1)`.
///
/// Also checks the simplified domination `Δ ≤ 100·(n + L/r)/r` for `n ≥ 3`.
pub fn delta_bound(n: usize, r: usize, bound: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::input(format!(
            "block threshold needs n >= 2, got {n}"
        )));
    }
    if r == 0 || r > n {
        return Err(Error::input(format!(
            "block count r = {r} must lie in 1..={n}"
        )));
    }
    let w = n.div_ceil(r) as f64;
    let nm1 = (n - 1) as f64;
    let delta = 10.0 * (bound as f64 * w * w / (nm1 * nm1) + 2.0 * w - 1.0);
    if n >= 3 {
        let simple = simplified_delta(n, r, bound);
        if delta > simple {
            return Err(Error::logic(format!(
                "threshold {delta} exceeds 100(n + L/r)/r = {simple}"
            )));
        }
    }
    Ok(delta)
}

/// `100·(n + L/r)/r`.
pub fn simplified_delta(n: usize, r: usize, bound: usize) -> f64 {
    let r = r as f64;
    100.0 * (n as f64 + bound as f64 / r) / r
}

/// `max(1, ⌈3·log₁₀ n⌉)` repetitions, which makes `(1/10)^reps ≤ n⁻³`.
pub fn default_reps(n: usize) -> usize {
    ((3.0 * (n.max(1) as f64).log10()).ceil() as usize).max(1)
}

/// Permutations, partitions and threshold for one round of the reduction.
///
/// `sigma[i]` is the position row `i` of `A` moves to; `tau[j]` likewise for
/// columns of `B`. Both axes are cut into `r` contiguous blocks whose sizes
/// differ by at most one.
#[derive(Clone, Debug)]
pub struct BlockPlan {
    n: usize,
    r: usize,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    tau: Vec<usize>,
    tau_inv: Vec<usize>,
    bounds: Vec<usize>,
    bound: usize,
    delta: f64,
}

fn invert(perm: &[usize]) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        if p >= perm.len() || inv[p] != usize::MAX {
            return None;
        }
        inv[p] = i;
    }
    Some(inv)
}

impl BlockPlan {
    pub fn new(
        n: usize,
        r: usize,
        bound: usize,
        sigma: Vec<usize>,
        tau: Vec<usize>,
    ) -> Result<Self> {
        let delta = delta_bound(n, r, bound)?;
        if sigma.len() != n || tau.len() != n {
            return Err(Error::input("permutation length differs from n"));
        }
        let sigma_inv = invert(&sigma).ok_or_else(|| Error::input("sigma is not a permutation"))?;
        let tau_inv = invert(&tau).ok_or_else(|| Error::input("tau is not a permutation"))?;
        let bounds = (0..=r).map(|s| s * n / r).collect();
        Ok(BlockPlan {
            n,
            r,
            sigma,
            sigma_inv,
            tau,
            tau_inv,
            bounds,
            bound,
            delta,
        })
    }

    /// Plan with independent uniform permutations.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, bound: usize, rng: &mut R) -> Result<Self> {
        let mut sigma: Vec<usize> = (0..n).collect();
        let mut tau = sigma.clone();
        sigma.shuffle(rng);
        tau.shuffle(rng);
        Self::new(n, r, bound, sigma, tau)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `⌊Δ⌋`: a block holds "at most Δ" non-zeros iff it holds at most this many.
    pub fn sub_cap(&self) -> usize {
        self.delta.floor() as usize
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn tau(&self) -> &[usize] {
        &self.tau
    }

    /// Permuted positions covered by block `s`.
    pub fn block(&self, s: usize) -> Range<usize> {
        self.bounds[s]..self.bounds[s + 1]
    }

    /// Block containing permuted position `p`.
    pub fn block_of(&self, p: usize) -> usize {
        self.bounds.partition_point(|&x| x <= p) - 1
    }

    /// Original row indices of `A` forming row block `s`.
    pub fn rows_of_block(&self, s: usize) -> &[usize] {
        &self.sigma_inv[self.block(s)]
    }

    /// Original column indices of `B` forming column block `t`.
    pub fn cols_of_block(&self, t: usize) -> &[usize] {
        &self.tau_inv[self.block(t)]
    }

    /// Maps an entry of block product `(s, t)` back to original coordinates.
    pub fn unmap(&self, s: usize, t: usize, e: WitnessedEntry) -> WitnessedEntry {
        WitnessedEntry {
            i: self.rows_of_block(s)[e.i],
            j: self.cols_of_block(t)[e.j],
            k: e.k,
        }
    }
}

/// Row blocks `A*_s` of the row-permuted `A` and column blocks `B*_t` of the
/// column-permuted `B`, as index remappings over the originals.
pub fn block_views<'p>(
    a: &MatrixView<'p>,
    b: &MatrixView<'p>,
    plan: &'p BlockPlan,
) -> (Vec<MatrixView<'p>>, Vec<MatrixView<'p>>) {
    let rows = (0..plan.r)
        .map(|s| a.select_rows(plan.rows_of_block(s)))
        .collect();
    let cols = (0..plan.r)
        .map(|t| b.select_cols(plan.cols_of_block(t)))
        .collect();
    (rows, cols)
}

/// Parameters of [`reduce_and_multiply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceParams {
    /// Promised upper bound `L ≥ n` on the product's non-zeros.
    pub bound: usize,
    /// Blocks per axis.
    pub r: usize,
    /// Entry cap handed to the sub-algorithm; `⌊Δ⌋` when absent.
    pub sub_cap: Option<usize>,
    pub reps: usize,
}

impl ReduceParams {
    pub fn new(bound: usize, r: usize, n: usize) -> Self {
        ReduceParams {
            bound,
            r,
            sub_cap: None,
            reps: default_reps(n),
        }
    }
}

/// A capped block multiplier: computes up to `cap` non-zeros of `A·B`, never
/// reporting a false entry.
pub trait SubAlgorithm {
    fn multiply(
        &mut self,
        a: &MatrixView<'_>,
        b: &MatrixView<'_>,
        cap: usize,
        ctx: &mut SearchContext,
        ledger: &mut CostLedger,
    ) -> Result<EntrySet>;
}

impl<F> SubAlgorithm for F
where
    F: FnMut(
        &MatrixView<'_>,
        &MatrixView<'_>,
        usize,
        &mut SearchContext,
        &mut CostLedger,
    ) -> Result<EntrySet>,
{
    fn multiply(
        &mut self,
        a: &MatrixView<'_>,
        b: &MatrixView<'_>,
        cap: usize,
        ctx: &mut SearchContext,
        ledger: &mut CostLedger,
    ) -> Result<EntrySet> {
        self(a, b, cap, ctx, ledger)
    }
}

/// The "up to λ entries" collision-search product as a block multiplier.
pub struct CollisionProduct;

impl SubAlgorithm for CollisionProduct {
    fn multiply(
        &mut self,
        a: &MatrixView<'_>,
        b: &MatrixView<'_>,
        cap: usize,
        ctx: &mut SearchContext,
        ledger: &mut CostLedger,
    ) -> Result<EntrySet> {
        find_up_to_lambda_entries(a, b, cap, ctx, ledger)
    }
}

/// Multiplies via `reps` rounds of random blocking with the collision-search
/// product on each block.
pub fn reduce_and_multiply(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    params: ReduceParams,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<EntrySet> {
    reduce_and_multiply_with(a, b, params, &mut CollisionProduct, ctx, ledger)
}

/// [`reduce_and_multiply`] with a caller-chosen block multiplier.
///
/// `A` must be `n × m` and `B` `m × n`. When searches can fail, every block
/// call is repeated `default_reps(n) + 1` times and the results united.
pub fn reduce_and_multiply_with<S: SubAlgorithm + ?Sized>(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    params: ReduceParams,
    sub: &mut S,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<EntrySet> {
    let n = a.rows();
    if b.cols() != n || a.cols() != b.rows() {
        return Err(Error::input(format!(
            "reduction needs an n x m times m x n product, got {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if params.bound < n {
        return Err(Error::input(format!(
            "bound L = {} must be at least n = {n}",
            params.bound
        )));
    }
    if params.reps == 0 {
        return Err(Error::input("at least one repetition is required"));
    }
    let delta = delta_bound(n, params.r, params.bound)?;
    let cap = params.sub_cap.unwrap_or(delta.floor() as usize).max(1);
    let block_reps = if ctx.config().p_fail > 0.0 {
        default_reps(n) + 1
    } else {
        1
    };

    let mut found = EntrySet::new();
    for _ in 0..params.reps {
        let plan = BlockPlan::random(n, params.r, params.bound, ctx.rng())?;
        let (row_blocks, col_blocks) = block_views(a, b, &plan);
        for (s, a_block) in row_blocks.iter().enumerate() {
            for (t, b_block) in col_blocks.iter().enumerate() {
                for _ in 0..block_reps {
                    let local = sub.multiply(a_block, b_block, cap, ctx, ledger)?;
                    for e in local.iter() {
                        found.insert(plan.unmap(s, t, e));
                    }
                }
            }
        }
    }
    Ok(found)
}

/// Monte Carlo harness for the per-entry block-threshold bound.
#[derive(Clone, Debug)]
pub struct Lemma3Experiment {
    n: usize,
    entries: Vec<(usize, usize)>,
}

/// Outcome of [`Lemma3Experiment::run`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma3Summary {
    pub trials: usize,
    pub hits: usize,
    pub frequency: f64,
    /// `0.9 − 3·√(0.09/trials)`.
    pub threshold: f64,
    pub delta: f64,
}

impl Lemma3Summary {
    pub fn passed(&self) -> bool {
        self.frequency >= self.threshold
    }
}

/// `0.9 − 3·√(0.09/trials)`: the guaranteed rate minus three binomial
/// standard deviations.
pub fn lemma3_threshold(trials: usize) -> f64 {
    0.9 - 3.0 * (0.09 / trials.max(1) as f64).sqrt()
}

impl Lemma3Experiment {
    pub fn new(a: &BoolMatrix, b: &BoolMatrix) -> Result<Self> {
        if a.rows() != b.cols() {
            return Err(Error::input("product must be square"));
        }
        let product = brute_force_product(a, b)?;
        Ok(Self::from_entries(a.rows(), product.keys().collect()))
    }

    /// Experiment on an `n × n` matrix given by its non-zero coordinates.
    pub fn from_entries(n: usize, entries: Vec<(usize, usize)>) -> Self {
        Lemma3Experiment { n, entries }
    }

    pub fn ell(&self) -> usize {
        self.entries.len()
    }

    /// One trial for non-zero `(i, j)`: draw σ, τ and report whether the
    /// block holding `(σ(i), τ(j))` has at most `Δ` non-zeros (with `L = ℓ`).
    pub fn trial<R: Rng + ?Sized>(
        &self,
        r: usize,
        entry: (usize, usize),
        rng: &mut R,
    ) -> Result<bool> {
        if !self.entries.contains(&entry) {
            return Err(Error::input(format!(
                "({}, {}) is not a non-zero of the product",
                entry.0 + 1,
                entry.1 + 1
            )));
        }
        let plan = BlockPlan::random(self.n, r, self.entries.len(), rng)?;
        Ok(self.block_load(&plan, entry) <= plan.sub_cap())
    }

    fn block_load(&self, plan: &BlockPlan, (i, j): (usize, usize)) -> usize {
        let s = plan.block_of(plan.sigma[i]);
        let t = plan.block_of(plan.tau[j]);
        self.entries
            .iter()
            .filter(|&&(x, y)| plan.block_of(plan.sigma[x]) == s && plan.block_of(plan.tau[y]) == t)
            .count()
    }

    /// `trials` trials, each on a uniformly chosen non-zero.
    pub fn run(&self, r: usize, trials: usize, seed: u64) -> Result<Lemma3Summary> {
        if self.entries.is_empty() {
            return Err(Error::input("product has no non-zero entries"));
        }
        let delta = delta_bound(self.n, r, self.entries.len())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0;
        for _ in 0..trials {
            let entry = self.entries[rng.gen_range(0..self.entries.len())];
            if self.trial(r, entry, &mut rng)? {
                hits += 1;
            }
        }
        Ok(Lemma3Summary {
            trials,
            hits,
            frequency: hits as f64 / trials.max(1) as f64,
            threshold: lemma3_threshold(trials),
            delta,
        })
    }
}

/// Single trial on the product of `a` and `b` for the non-zero `entry`.
pub fn lemma3_trial(
    a: &BoolMatrix,
    b: &BoolMatrix,
    r: usize,
    entry: (usize, usize),
    seed: u64,
) -> Result<bool> {
    let exp = Lemma3Experiment::new(a, b)?;
    exp.trial(r, entry, &mut ChaCha8Rng::seed_from_u64(seed))
}
