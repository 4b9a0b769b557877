use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{brute_force_product, BoolMatrix};
use crate::error::{Error, Result};

/// How [`generate_planted`] shapes the product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlantMode {
    /// I.i.d. entries with density solved for the target count; the realised
    /// count is measured.
    Bernoulli,
    /// Row-disjoint rectangles `R_t × S_t`, each behind its own witness
    /// column, so the count is exact.
    Rectangles,
}

impl std::str::FromStr for PlantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(PlantMode::Bernoulli),
            "rectangles" => Ok(PlantMode::Rectangles),
            other => Err(Error::input(format!(
                "unknown plant mode `{other}` (expected bernoulli or rectangles)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub a: BoolMatrix,
    pub b: BoolMatrix,
    /// Number of non-zeros of `a · b`, measured by brute force.
    pub ell: usize,
}

/// Generates `n × n` factors whose product has (about, for Bernoulli)
/// `target_ell` non-zero entries. Deterministic in `seed`.
pub fn generate_planted(
    n: usize,
    target_ell: usize,
    mode: PlantMode,
    seed: u64,
) -> Result<PlantedInstance> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    if target_ell as u128 > (n as u128) * (n as u128) {
        return Err(Error::input(format!(
            "target ell {target_ell} exceeds n^2 = {}",
            n * n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = match mode {
        PlantMode::Rectangles => plant_rectangles(n, target_ell, &mut rng)?,
        PlantMode::Bernoulli => plant_bernoulli(n, target_ell, &mut rng),
    };
    let ell = brute_force_product(&a, &b)?.len();
    if mode == PlantMode::Rectangles && ell != target_ell {
        return Err(Error::logic(format!(
            "rectangle plant produced {ell} non-zeros, wanted {target_ell}"
        )));
    }
    Ok(PlantedInstance { a, b, ell })
}

fn plant_rectangles(
    n: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(BoolMatrix, BoolMatrix)> {
    let mut a = BoolMatrix::zeros(n, n);
    let mut b = BoolMatrix::zeros(n, n);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    let mut witnesses: Vec<usize> = (0..n).collect();
    witnesses.shuffle(rng);
    let columns: Vec<usize> = (0..n).collect();

    let mut left = target;
    let mut free_rows = n;
    let mut next_row = 0;
    for &k in &witnesses {
        if left == 0 {
            break;
        }
        // Keep `left <= free_rows * n` so the remainder always fits.
        let w_lo = left.saturating_sub((free_rows - 1) * n).max(1);
        let w_hi = n.min(left);
        if w_lo > w_hi {
            return Err(Error::input(format!(
                "cannot plant {target} non-zeros in an {n}x{n} product"
            )));
        }
        let w = rng.gen_range(w_lo..=w_hi);
        let mut h_max = free_rows.min(left / w);
        if w < n {
            h_max = h_max.min((free_rows * n - left) / (n - w));
        }
        let h = rng.gen_range(1..=h_max);

        for &i in &rows[next_row..next_row + h] {
            a.set(i, k, true);
        }
        for &j in columns.choose_multiple(rng, w) {
            b.set(k, j, true);
        }
        next_row += h;
        free_rows -= h;
        left -= h * w;
    }
    if left != 0 {
        return Err(Error::input(format!(
            "cannot plant {target} non-zeros in an {n}x{n} product"
        )));
    }
    Ok((a, b))
}

/// Expected non-zero count of the product of two i.i.d. density-`p` factors.
fn expected_nonzeros(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf * nf * (1.0 - (1.0 - p * p).powf(nf))
}

fn plant_bernoulli(n: usize, target: usize, rng: &mut ChaCha8Rng) -> (BoolMatrix, BoolMatrix) {
    let goal = target as f64;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected_nonzeros(n, mid) < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = if target == 0 { 0.0 } else { hi };
    let a = BoolMatrix::from_fn(n, n, |_, _| rng.gen_bool(p));
    let b = BoolMatrix::from_fn(n, n, |_, _| rng.gen_bool(p));
    (a, b)
}
