//! Top-level multiplication: regime selection for a known λ, λ doubling when
//! the output size is unknown, and the block reduction that runs a capped
//! multiplier on an `n²`-bounded instance.

use std::fmt;

use serde::Serialize;

use crate::blocking::{
    default_reps, delta_bound, reduce_and_multiply, reduce_and_multiply_with, ReduceParams,
};
use crate::boolmat::{EntrySet, MatrixView};
use crate::cost::{CostLedger, SearchContext};
use crate::error::{Error, Result};
use crate::finder::find_up_to_lambda_entries;

/// Default constant in the block count `r = ⌈c·n/√λ⌉` of [`theorem2_multiply`].
pub const THEOREM2_DEFAULT_C: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One collision-search product with cap λ.
    Direct,
    /// Random blocking with `r = ⌈√(λ/n)⌉`.
    Reduce,
    /// Blocking with `L = n²`, `r = ⌈c·n/√λ⌉` and a cap-λ multiplier per block.
    Theorem2,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Direct => "direct",
            Mode::Reduce => "reduce",
            Mode::Theorem2 => "theorem2",
        })
    }
}

/// Block-reduction parameters actually used by a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockParams {
    pub r: usize,
    pub delta: f64,
    pub reps: usize,
}

/// Result of one fixed-λ multiplication.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub entries: EntrySet,
    pub mode: Mode,
    pub params: Option<BlockParams>,
}

/// One round of the λ-doubling schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round {
    pub lambda: usize,
    pub found: usize,
    pub ledger: CostLedger,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub entries: EntrySet,
    /// Cumulative over all rounds.
    pub ledger: CostLedger,
    pub lambda_final: usize,
    pub mode: Mode,
    pub params: Option<BlockParams>,
    pub seed: u64,
    pub rounds: Vec<Round>,
}

/// Smallest `r ≥ 1` with `r² · den ≥ num`, i.e. `⌈√(num/den)⌉`.
fn ceil_sqrt_ratio(num: u128, den: u128) -> usize {
    let mut r = ((num as f64 / den as f64).sqrt().floor() as u128).max(1);
    while r * r * den < num {
        r += 1;
    }
    while r > 1 && (r - 1) * (r - 1) * den >= num {
        r -= 1;
    }
    r as usize
}

/// Block count `⌈√(λ/n)⌉` of the reduce regime.
pub fn reduce_block_count(n: usize, lambda: usize) -> usize {
    ceil_sqrt_ratio(lambda as u128, n as u128)
}

fn check_product(a: &MatrixView<'_>, b: &MatrixView<'_>) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::input(format!(
            "dimension mismatch: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Multiplies assuming the product has at most `lambda` non-zeros.
///
/// `λ ≤ max(rows, cols)` (or a non-square output) runs one collision-search
/// product; larger λ on a square output goes through the block reduction
/// with `r = ⌈√(λ/n)⌉`, `L = λ`, and the default repetition count.
pub fn multiply_known_lambda(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    lambda: usize,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Outcome> {
    check_product(a, b)?;
    let (rows, cols) = (a.rows(), b.cols());
    if lambda == 0 || lambda > rows * cols {
        return Err(Error::input(format!(
            "lambda = {lambda} outside 1..={}",
            rows * cols
        )));
    }
    if lambda <= rows.max(cols) || rows != cols {
        let entries = find_up_to_lambda_entries(a, b, lambda, ctx, ledger)?;
        return Ok(Outcome {
            entries,
            mode: Mode::Direct,
            params: None,
        });
    }
    let n = rows;
    let r = reduce_block_count(n, lambda);
    let params = ReduceParams::new(lambda, r, n);
    let delta = delta_bound(n, r, lambda)?;
    let entries = reduce_and_multiply(a, b, params, ctx, ledger)?;
    Ok(Outcome {
        entries,
        mode: Mode::Reduce,
        params: Some(BlockParams {
            r,
            delta,
            reps: params.reps,
        }),
    })
}

/// Multiplies without knowing the output size: λ = 2, 4, 8, … until a round
/// returns fewer than λ entries (or λ reaches the output size).
pub fn multiply_auto(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    ctx: &mut SearchContext,
) -> Result<RunReport> {
    check_product(a, b)?;
    let cells = a.rows() * b.cols();
    let mut ledger = CostLedger::default();
    let mut rounds = Vec::new();
    let mut lambda = 2usize;
    loop {
        let lam = lambda.min(cells);
        let mut round = CostLedger::default();
        let outcome = multiply_known_lambda(a, b, lam, ctx, &mut round)?;
        ledger += round;
        rounds.push(Round {
            lambda: lam,
            found: outcome.entries.len(),
            ledger: round,
        });
        if outcome.entries.len() < lam || lam == cells {
            return Ok(RunReport {
                entries: outcome.entries,
                ledger,
                lambda_final: lam,
                mode: outcome.mode,
                params: outcome.params,
                seed: ctx.config().seed,
                rounds,
            });
        }
        lambda *= 2;
    }
}

/// Block count `⌈c·n/√λ⌉` for the `L = n²` reduction.
pub fn theorem2_block_count(n: usize, lambda: usize, c: usize) -> usize {
    let cn = (c * n) as u128;
    ceil_sqrt_ratio(cn * cn, lambda as u128)
}

/// Whether `100n/r + 100n²/r² ≤ λ` with `r ≤ n`.
fn theorem2_fits(n: usize, lambda: usize, r: usize) -> bool {
    let (nf, rf) = (n as f64, r as f64);
    r >= 1 && r <= n && 100.0 * nf / rf + 100.0 * nf * nf / (rf * rf) <= lambda as f64
}

/// Smallest constant `c` for which the `L = n²` reduction is admissible, if any.
pub fn theorem2_required_c(n: usize, lambda: usize) -> Option<usize> {
    (1..)
        .map_while(|c| {
            let r = theorem2_block_count(n, lambda, c);
            (r <= n || c == 1).then_some((c, r))
        })
        .find(|&(_, r)| theorem2_fits(n, lambda, r))
        .map(|(c, _)| c)
}

/// Computes the full product of two `n × n` matrices by blocking with
/// `L = n²` and `r = ⌈c·n/√λ⌉`, running [`multiply_known_lambda`] with cap λ
/// on every block.
///
/// The constant must make every block threshold fit under λ:
/// `100n/r + 100n²/r² ≤ λ` with `r ≤ n`. Otherwise the call fails with an
/// input error naming the smallest admissible `c`.
pub fn theorem2_multiply(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    lambda: usize,
    c: usize,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Outcome> {
    check_product(a, b)?;
    let n = a.rows();
    if b.cols() != n {
        return Err(Error::input("block reduction needs a square product"));
    }
    if lambda < n || lambda > n * n {
        return Err(Error::input(format!(
            "lambda = {lambda} outside {n}..={}",
            n * n
        )));
    }
    let r = theorem2_block_count(n, lambda, c.max(1));
    if !theorem2_fits(n, lambda, r) {
        let hint = match theorem2_required_c(n, lambda) {
            Some(req) => format!("use c >= {req}"),
            None => "no constant c works for this n and lambda".to_string(),
        };
        return Err(Error::input(format!(
            "c = {c} gives r = {r}, which violates 100n/r + 100n^2/r^2 <= lambda with r <= n; {hint}"
        )));
    }
    let bound = n * n;
    let delta = delta_bound(n, r, bound)?;
    let params = ReduceParams {
        bound,
        r,
        sub_cap: Some(lambda),
        reps: default_reps(n),
    };
    let mut capped = |va: &MatrixView<'_>,
                      vb: &MatrixView<'_>,
                      cap: usize,
                      ctx: &mut SearchContext,
                      l: &mut CostLedger|
     -> Result<EntrySet> {
        let cap = cap.min(va.rows() * vb.cols());
        Ok(multiply_known_lambda(va, vb, cap, ctx, l)?.entries)
    };
    let entries = reduce_and_multiply_with(a, b, params, &mut capped, ctx, ledger)?;
    Ok(Outcome {
        entries,
        mode: Mode::Theorem2,
        params: Some(BlockParams {
            r,
            delta,
            reps: params.reps,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolmat::{brute_force_product, generate_planted, BoolMatrix, PlantMode};
    use crate::cost::SearchConfig;

    fn ctx(seed: u64) -> SearchContext {
        SearchContext::new(SearchConfig::exact(seed))
    }

    #[test]
    fn block_count_arithmetic() {
        assert_eq!(reduce_block_count(32, 256), 3);
        assert_eq!(reduce_block_count(32, 33), 2);
        assert_eq!(reduce_block_count(32, 32), 1);
        assert_eq!(reduce_block_count(64, 64 * 64), 8);
        assert_eq!(theorem2_block_count(64, 64 * 64, 1), 1);
        assert_eq!(theorem2_block_count(64, 64 * 64, 15), 15);
        assert_eq!(theorem2_block_count(64, 512, 15), 43);
    }

    #[test]
    fn regime_selection() {
        let inst = generate_planted(32, 16, PlantMode::Rectangles, 1).unwrap();
        let mut l = CostLedger::default();
        let o =
            multiply_known_lambda(&inst.a.view(), &inst.b.view(), 16, &mut ctx(1), &mut l).unwrap();
        assert_eq!(o.mode, Mode::Direct);
        let o = multiply_known_lambda(&inst.a.view(), &inst.b.view(), 256, &mut ctx(1), &mut l)
            .unwrap();
        assert_eq!(o.mode, Mode::Reduce);
        assert_eq!(o.params.unwrap().r, 3);
        let bad = multiply_known_lambda(&inst.a.view(), &inst.b.view(), 0, &mut ctx(1), &mut l);
        assert!(matches!(bad, Err(Error::Input(_))));
    }

    #[test]
    fn regime_boundary_has_no_gap() {
        for seed in 0..5 {
            let inst = generate_planted(24, 24, PlantMode::Rectangles, seed).unwrap();
            let want = brute_force_product(&inst.a, &inst.b).unwrap();
            for lambda in [24, 25] {
                let mut l = CostLedger::default();
                let o = multiply_known_lambda(
                    &inst.a.view(),
                    &inst.b.view(),
                    lambda,
                    &mut ctx(seed),
                    &mut l,
                )
                .unwrap();
                assert!(o.entries.same_keys(&want), "lambda {lambda} seed {seed}");
            }
        }
    }

    #[test]
    fn dense_known_lambda_matches_brute_force() {
        let inst = generate_planted(64, 512, PlantMode::Rectangles, 3).unwrap();
        let mut l = CostLedger::default();
        let o = multiply_known_lambda(&inst.a.view(), &inst.b.view(), 512, &mut ctx(3), &mut l)
            .unwrap();
        assert_eq!(o.mode, Mode::Reduce);
        assert!(o
            .entries
            .same_keys(&brute_force_product(&inst.a, &inst.b).unwrap()));
    }

    #[test]
    fn doubling_stops_early_on_zero_product() {
        let z = BoolMatrix::zeros(8, 8);
        let r = multiply_auto(&z.view(), &z.view(), &mut ctx(0)).unwrap();
        assert!(r.entries.is_empty());
        assert_eq!(r.lambda_final, 2);
        assert_eq!(r.rounds.len(), 1);
    }

    #[test]
    fn doubling_trace_for_two_entries() {
        let inst = generate_planted(16, 2, PlantMode::Rectangles, 4).unwrap();
        let r = multiply_auto(&inst.a.view(), &inst.b.view(), &mut ctx(4)).unwrap();
        let trace: Vec<_> = r.rounds.iter().map(|x| (x.lambda, x.found)).collect();
        assert_eq!(trace, vec![(2, 2), (4, 2)]);
        assert_eq!(r.lambda_final, 4);
        let total = r
            .rounds
            .iter()
            .fold(CostLedger::default(), |acc, x| acc + x.ledger);
        assert_eq!(total, r.ledger);
    }

    #[test]
    fn doubling_matches_brute_force() {
        for seed in 0..50u64 {
            let n = [8, 16, 32, 64][seed as usize % 4];
            let ell = (seed as usize * 37) % (n * n / 4 + 1);
            let mode = if seed % 3 == 0 {
                PlantMode::Bernoulli
            } else {
                PlantMode::Rectangles
            };
            let inst = generate_planted(n, ell, mode, seed).unwrap();
            let r = multiply_auto(&inst.a.view(), &inst.b.view(), &mut ctx(seed)).unwrap();
            let want = brute_force_product(&inst.a, &inst.b).unwrap();
            assert!(r.entries.same_keys(&want), "seed {seed}");
            assert!(r.lambda_final >= r.entries.len());
            assert!(r.lambda_final <= 2 * r.entries.len().max(1) * 2);
        }
    }

    #[test]
    fn full_output_stops_at_cell_count() {
        let ones = BoolMatrix::ones(3, 3);
        let r = multiply_auto(&ones.view(), &ones.view(), &mut ctx(2)).unwrap();
        assert_eq!(r.entries.len(), 9);
        assert_eq!(r.lambda_final, 9);
    }

    #[test]
    fn theorem2_parameters() {
        assert!(theorem2_fits(
            64,
            512,
            theorem2_block_count(64, 512, THEOREM2_DEFAULT_C)
        ));
        assert_eq!(theorem2_required_c(64, 64), None);
        let c = theorem2_required_c(64, 512).unwrap();
        assert!(c <= THEOREM2_DEFAULT_C);
        assert!(!theorem2_fits(
            64,
            512,
            theorem2_block_count(64, 512, c - 1)
        ));
    }

    #[test]
    fn theorem2_recovers_product() {
        let inst = generate_planted(64, 1024, PlantMode::Rectangles, 5).unwrap();
        let mut l = CostLedger::default();
        let o = theorem2_multiply(
            &inst.a.view(),
            &inst.b.view(),
            512,
            THEOREM2_DEFAULT_C,
            &mut ctx(5),
            &mut l,
        )
        .unwrap();
        assert_eq!(o.mode, Mode::Theorem2);
        assert!(o
            .entries
            .same_keys(&brute_force_product(&inst.a, &inst.b).unwrap()));
    }

    #[test]
    fn theorem2_reports_required_constant() {
        let id = BoolMatrix::identity(64);
        let mut l = CostLedger::default();
        let err =
            theorem2_multiply(&id.view(), &id.view(), 512, 2, &mut ctx(0), &mut l).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Input(_)));
        assert!(msg.contains("use c >="), "{msg}");
        let err =
            theorem2_multiply(&id.view(), &id.view(), 64, 15, &mut ctx(0), &mut l).unwrap_err();
        assert!(err.to_string().contains("no constant"));
    }
}
