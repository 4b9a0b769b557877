//! Collision search on the shrinking bipartite graph, and the product
//! algorithm that finds up to λ non-zero entries by repeatedly searching for
//! collisions and deleting the edges it has reported.
//!
//! A *k-collision* is an edge `(i, j)` of the graph with `A[i,k] = B[k,j] = 1`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::boolmat::{EntrySet, MatrixView, OracleHandle, Side, WitnessedEntry};
use crate::cost::{
    ceil_sqrt, find_max_by_key_amplified, grover_search_amplified, CostLedger, Predicate,
    SearchContext,
};
use crate::error::{Error, Result};
use crate::store::CollisionStore;

static COUNTING_BOUND_CHECKS: AtomicU64 = AtomicU64::new(0);

/// How many times the missing-edge counting bound has been checked in this
/// process. Each check either passed or aborted the search with a logic error.
pub fn counting_bound_checks() -> u64 {
    COUNTING_BOUND_CHECKS.load(Ordering::Relaxed)
}

/// One collision-search problem: find a `witness`-collision in `store`.
///
/// Promise: at most `missing_edge_budget` edges have been removed.
pub struct CollisionQuery<'q, 'a> {
    pub store: &'q CollisionStore,
    pub oracle_a: &'q OracleHandle<'a>,
    pub oracle_b: &'q OracleHandle<'a>,
    pub witness: usize,
    pub missing_edge_budget: usize,
}

/// Upper bound on the quantum units one [`find_k_collision`] call can charge
/// when it is not retrying after injected failures.
pub fn collision_unit_bound(left: usize, right: usize, budget: usize) -> u64 {
    ceil_sqrt(left as u64) + ceil_sqrt(right as u64) + ceil_sqrt(budget as u64)
}

/// Finds one k-collision, or `None` if there is none (or a search failed).
///
/// 1. Extremum search for the marked left vertex `u` of largest degree.
/// 2. Search the right side for a marked vertex adjacent to `u`.
/// 3. Otherwise every collision lies in `I' × (J \ N(u))`, where `I'` holds
///    the left vertices of degree at most `deg(u)`; search that product set,
///    whose size is at most the number of missing edges.
///
/// Charges `⌈√|I|⌉ + ⌈√|J|⌉ + ⌈√(|I'|·|J \ N(u)|)⌉` quantum units.
pub fn find_k_collision(
    q: &CollisionQuery<'_, '_>,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<Option<(usize, usize)>> {
    let store = q.store;
    let (left, right) = (store.left_len(), store.right_len());
    let k = q.witness;
    if store.removed_count() > q.missing_edge_budget {
        return Err(Error::logic(format!(
            "promise broken: {} edges missing, budget {}",
            store.removed_count(),
            q.missing_edge_budget
        )));
    }
    let attempts = ctx.attempts_for(left + right);

    let Some(u) = find_max_by_key_amplified(
        left,
        |i, l| store.degree(i, l),
        |i, l| Ok(q.oracle_a.query(l, i, k)),
        attempts,
        ctx,
        ledger,
    )?
    else {
        return Ok(None);
    };

    let mut adjacent = Predicate::new(
        right,
        1,
        |j: usize, _: &mut SearchContext, l: &mut CostLedger| -> Result<bool> {
            Ok(q.oracle_b.query(l, k, j) && store.is_connected(u, j, l)?)
        },
    );
    if let Some(j) = grover_search_amplified(&mut adjacent, attempts, ctx, ledger)? {
        return Ok(Some((u, j)));
    }

    let d = store.degree(u, ledger)?;
    let low_degree = store.count_left_with_degree_at_most(d, ledger);
    let outside = right - d;
    COUNTING_BOUND_CHECKS.fetch_add(1, Ordering::Relaxed);
    if low_degree * outside > store.removed_count() {
        return Err(Error::logic(format!(
            "counting bound violated: {low_degree} * {outside} > {} missing edges",
            store.removed_count()
        )));
    }
    if outside == 0 {
        return Ok(None);
    }

    let mut pair = Predicate::new(
        low_degree * outside,
        1,
        |idx: usize, _: &mut SearchContext, l: &mut CostLedger| -> Result<bool> {
            let i = store.nth_left_with_degree_at_most(idx / outside, d, l)?;
            let j = store.nth_nonneighbor(idx % outside, u, l)?;
            Ok(q.oracle_a.query(l, i, k)
                && q.oracle_b.query(l, k, j)
                && store.is_connected(i, j, l)?)
        },
    );
    let hit = grover_search_amplified(&mut pair, attempts, ctx, ledger)?;
    match hit {
        None => Ok(None),
        Some(idx) => {
            let i = store.nth_left_with_degree_at_most(idx / outside, d, ledger)?;
            let j = store.nth_nonneighbor(idx % outside, u, ledger)?;
            Ok(Some((i, j)))
        }
    }
}

/// Computes up to `lambda` non-zero entries of `A·B`.
///
/// The witness range is cut into `min(λ, n)` contiguous groups. For each
/// group the algorithm searches for a witness with a collision (a search
/// whose predicate is itself a collision search), reports the collision,
/// deletes its edge, and repeats until the group is exhausted.
///
/// With exact searches and at most `lambda` non-zeros the result is the
/// whole product. Every returned entry is a true non-zero with a valid
/// witness regardless.
pub fn find_up_to_lambda_entries(
    a: &MatrixView<'_>,
    b: &MatrixView<'_>,
    lambda: usize,
    ctx: &mut SearchContext,
    ledger: &mut CostLedger,
) -> Result<EntrySet> {
    if a.cols() != b.rows() {
        return Err(Error::input(format!(
            "dimension mismatch: {}x{} times {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if lambda == 0 {
        return Err(Error::input("lambda must be at least 1"));
    }
    let (rows, inner, cols) = (a.rows(), a.cols(), b.cols());
    let oracle_a = OracleHandle::new(a.clone(), Side::A);
    let oracle_b = OracleHandle::new(b.clone(), Side::B);
    let mut store = CollisionStore::build_complete(rows, cols, ledger)?;
    let mut found = EntrySet::new();

    let groups = lambda.min(inner);
    let width = inner.div_ceil(groups);
    let attempts = ctx.attempts_for(rows.max(cols).max(inner));

    'groups: for start in (0..inner).step_by(width) {
        let end = (start + width).min(inner);
        let mut misses = 0;
        loop {
            if found.len() >= lambda {
                break 'groups;
            }
            // The store is frozen during one outer search, so its current
            // missing-edge count is a valid promise for every inner search.
            let budget = store.removed_count();
            let unit = collision_unit_bound(rows, cols, budget);
            let hit = {
                let store = &store;
                let (oa, ob) = (&oracle_a, &oracle_b);
                let mut has_collision = Predicate::new(
                    end - start,
                    unit,
                    |x: usize, ctx: &mut SearchContext, l: &mut CostLedger| -> Result<bool> {
                        let q = CollisionQuery {
                            store,
                            oracle_a: oa,
                            oracle_b: ob,
                            witness: start + x,
                            missing_edge_budget: budget,
                        };
                        Ok(find_k_collision(&q, ctx, l)?.is_some())
                    },
                );
                grover_search_amplified(&mut has_collision, attempts, ctx, ledger)?
            };
            let Some(x) = hit else { break };
            let k = start + x;
            let q = CollisionQuery {
                store: &store,
                oracle_a: &oracle_a,
                oracle_b: &oracle_b,
                witness: k,
                missing_edge_budget: budget,
            };
            match find_k_collision(&q, ctx, ledger)? {
                Some((i, j)) => {
                    found.insert(WitnessedEntry { i, j, k });
                    store.remove_edge(i, j, ledger)?;
                    misses = 0;
                }
                None => {
                    misses += 1;
                    if misses >= attempts {
                        break;
                    }
                }
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolmat::{brute_force_product, generate_planted, BoolMatrix, PlantMode};
    use crate::cost::SearchConfig;

    fn run_query(
        a: &BoolMatrix,
        b: &BoolMatrix,
        store: &CollisionStore,
        k: usize,
        seed: u64,
    ) -> Option<(usize, usize)> {
        let oa = OracleHandle::new(a, Side::A);
        let ob = OracleHandle::new(b, Side::B);
        let q = CollisionQuery {
            store,
            oracle_a: &oa,
            oracle_b: &ob,
            witness: k,
            missing_edge_budget: store.removed_count(),
        };
        let mut ctx = SearchContext::new(SearchConfig::exact(seed));
        find_k_collision(&q, &mut ctx, &mut CostLedger::default()).unwrap()
    }

    #[test]
    fn phase_two_hit_uses_largest_degree_vertex() {
        // Column 1 of A = (1,0,1), row 1 of B = (0,1,1).
        let a = BoolMatrix::from_rows(&[[0, 1, 0], [0, 0, 0], [0, 1, 0]]);
        let b = BoolMatrix::from_rows(&[[0, 0, 0], [0, 1, 1], [0, 0, 0]]);
        let store = CollisionStore::build_complete(3, 3, &mut CostLedger::default()).unwrap();
        let mut seen = [false; 3];
        for seed in 0..40 {
            let (i, j) = run_query(&a, &b, &store, 1, seed).unwrap();
            assert_eq!(i, 0, "tie on degree goes to the smallest index");
            assert!(j == 1 || j == 2);
            seen[j] = true;
        }
        assert!(
            seen[1] && seen[2],
            "both marked right vertices are reachable"
        );
    }

    #[test]
    fn unmarked_column_has_no_collision() {
        let a = BoolMatrix::from_rows(&[[1, 0], [1, 0]]);
        let b = BoolMatrix::ones(2, 2);
        let store = CollisionStore::build_complete(2, 2, &mut CostLedger::default()).unwrap();
        assert_eq!(run_query(&a, &b, &store, 1, 0), None);
    }

    #[test]
    fn removed_edge_hides_the_only_collision() {
        let a = BoolMatrix::from_rows(&[[1, 0, 0], [0, 0, 0], [0, 0, 0]]);
        let b = BoolMatrix::from_rows(&[[0, 0, 1], [0, 0, 0], [0, 0, 0]]);
        let mut ledger = CostLedger::default();
        let mut store = CollisionStore::build_complete(3, 3, &mut ledger).unwrap();
        assert_eq!(run_query(&a, &b, &store, 0, 0), Some((0, 2)));
        store.remove_edge(0, 2, &mut ledger).unwrap();
        assert_eq!(run_query(&a, &b, &store, 0, 0), None);
    }

    #[test]
    fn phase_three_finds_collision_off_the_max_vertex() {
        // Vertex 0 is marked with the largest degree but has lost its edge to
        // the only marked right vertex; vertex 1 still has it.
        let a = BoolMatrix::from_rows(&[[1, 0], [1, 0], [0, 0]]);
        let b = BoolMatrix::from_rows(&[[0, 1, 0], [0, 0, 0]]);
        let mut ledger = CostLedger::default();
        let mut store = CollisionStore::build_complete(3, 3, &mut ledger).unwrap();
        store.remove_edge(0, 1, &mut ledger).unwrap();
        store.remove_edge(1, 0, &mut ledger).unwrap();
        for seed in 0..10 {
            assert_eq!(run_query(&a, &b, &store, 0, seed), Some((1, 1)));
        }
    }

    #[test]
    fn collision_search_agrees_with_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..300 {
            let n = rng.gen_range(1..7);
            let a = BoolMatrix::from_fn(n, n, |_, _| rng.gen_bool(0.4));
            let b = BoolMatrix::from_fn(n, n, |_, _| rng.gen_bool(0.4));
            let mut ledger = CostLedger::default();
            let mut store = CollisionStore::build_complete(n, n, &mut ledger).unwrap();
            for i in 0..n {
                for j in 0..n {
                    if rng.gen_bool(0.3) {
                        store.remove_edge(i, j, &mut ledger).unwrap();
                    }
                }
            }
            for k in 0..n {
                let exists = (0..n).any(|i| {
                    (0..n).any(|j| {
                        a.get(i, k) && b.get(k, j) && store.is_connected(i, j, &mut ledger).unwrap()
                    })
                });
                let got = run_query(&a, &b, &store, k, trial);
                assert_eq!(got.is_some(), exists, "trial {trial} k {k}");
                if let Some((i, j)) = got {
                    assert!(a.get(i, k) && b.get(k, j));
                    assert!(store.is_connected(i, j, &mut ledger).unwrap());
                }
            }
        }
    }

    #[test]
    fn collision_cost_bound() {
        let inst = generate_planted(32, 20, PlantMode::Rectangles, 5).unwrap();
        let mut ledger = CostLedger::default();
        let mut store = CollisionStore::build_complete(32, 32, &mut ledger).unwrap();
        let product = brute_force_product(&inst.a, &inst.b).unwrap();
        for e in product.iter().take(15) {
            store.remove_edge(e.i, e.j, &mut ledger).unwrap();
        }
        let oa = OracleHandle::new(&inst.a, Side::A);
        let ob = OracleHandle::new(&inst.b, Side::B);
        let mut ctx = SearchContext::new(SearchConfig::exact(1));
        for k in 0..32 {
            let q = CollisionQuery {
                store: &store,
                oracle_a: &oa,
                oracle_b: &ob,
                witness: k,
                missing_edge_budget: 15,
            };
            let mut l = CostLedger::default();
            find_k_collision(&q, &mut ctx, &mut l).unwrap();
            assert!(l.quantum_units <= collision_unit_bound(32, 32, 15));
        }
    }

    fn product(a: &BoolMatrix, b: &BoolMatrix, lambda: usize, seed: u64) -> (EntrySet, CostLedger) {
        let mut ctx = SearchContext::new(SearchConfig::exact(seed));
        let mut ledger = CostLedger::default();
        let got =
            find_up_to_lambda_entries(&a.view(), &b.view(), lambda, &mut ctx, &mut ledger).unwrap();
        (got, ledger)
    }

    #[test]
    fn identity_product() {
        let id = BoolMatrix::identity(4);
        let (got, _) = product(&id, &id, 4, 0);
        let want: Vec<_> = (0..4).map(|i| WitnessedEntry::new(i, i, i)).collect();
        assert_eq!(got.iter().collect::<Vec<_>>(), want);
    }

    #[test]
    fn zero_product_costs_one_sweep() {
        let n = 8;
        let (got, ledger) = product(&BoolMatrix::zeros(n, n), &BoolMatrix::ones(n, n), 8, 0);
        assert!(got.is_empty());
        // One empty search per witness group, each charged √|group| × inner
        // unit; nothing has been removed, so the unit has no missing-edge term.
        let unit = collision_unit_bound(n, n, 0);
        assert_eq!(ledger.quantum_units, n as u64 * unit);
    }

    #[test]
    fn planted_instance_is_recovered() {
        let inst = generate_planted(64, 32, PlantMode::Rectangles, 9).unwrap();
        let (got, _) = product(&inst.a, &inst.b, 64, 9);
        let want = brute_force_product(&inst.a, &inst.b).unwrap();
        assert!(got.same_keys(&want));
        assert_eq!(got.first_invalid(&inst.a, &inst.b), None);
    }

    #[test]
    fn overflow_returns_a_sound_subset() {
        let inst = generate_planted(16, 100, PlantMode::Rectangles, 2).unwrap();
        let (got, _) = product(&inst.a, &inst.b, 10, 2);
        assert_eq!(got.len(), 10);
        let want = brute_force_product(&inst.a, &inst.b).unwrap();
        assert!(got.keys().all(|(i, j)| want.contains(i, j)));
        assert_eq!(got.first_invalid(&inst.a, &inst.b), None);
    }

    #[test]
    fn rectangular_views() {
        let a = BoolMatrix::from_fn(5, 7, |i, j| (i + j) % 4 == 0);
        let b = BoolMatrix::from_fn(7, 3, |i, j| (i * j) % 3 == 1);
        let want = brute_force_product(&a, &b).unwrap();
        let (got, _) = product(&a, &b, 15, 4);
        assert!(got.same_keys(&want));
    }

    #[test]
    fn completeness_over_random_instances() {
        let mut runs = 0;
        for n in [8usize, 16, 32, 64] {
            for seed in 0..50u64 {
                let mode = if seed % 2 == 0 {
                    PlantMode::Rectangles
                } else {
                    PlantMode::Bernoulli
                };
                let inst = generate_planted(n, (seed as usize * 7) % (n + 1), mode, seed).unwrap();
                let lambda = inst.ell.max(1) + (seed as usize % 3);
                let (got, _) = product(&inst.a, &inst.b, lambda, seed);
                let want = brute_force_product(&inst.a, &inst.b).unwrap();
                assert!(got.same_keys(&want), "n={n} seed={seed}");
                assert_eq!(got.first_invalid(&inst.a, &inst.b), None);
                runs += 1;
            }
        }
        assert!(runs >= 200);
    }
}
