use osbmm::bench::{cell_seed, fit_loglog_slope};
use osbmm::blocking::Lemma3Experiment;
use osbmm::driver::{multiply_auto, multiply_known_lambda, Mode};
use osbmm::{
    brute_force_product, generate_planted, BoolMatrix, CostLedger, PlantMode, SearchConfig,
    SearchContext,
};
use serde::Serialize;

/// Largest side for which matrices are included in the run summary.
pub const MAX_DRAWN: usize = 64;
/// Keeps a page click from freezing the tab.
pub const MAX_N: usize = 256;

#[derive(Serialize)]
struct RoundOut {
    lambda: usize,
    found: usize,
    quantum_units: u64,
}

#[derive(Serialize)]
struct RunOut {
    n: usize,
    ell: usize,
    lambda_final: usize,
    mode: Mode,
    correct: bool,
    ledger: CostLedger,
    rounds: Vec<RoundOut>,
    /// 1-based `[i, j, k]`, row-major, at most 256.
    entries: Vec<[usize; 3]>,
    a: Option<Vec<String>>,
    b: Option<Vec<String>>,
    product: Option<Vec<String>>,
}

fn rows_of(m: &BoolMatrix) -> Vec<String> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| if m.get(i, j) { '1' } else { '0' })
                .collect()
        })
        .collect()
}

fn plant_mode(s: &str) -> Result<PlantMode, String> {
    s.parse().map_err(|e: osbmm::Error| e.to_string())
}

fn check_n(n: usize) -> Result<(), String> {
    if n == 0 || n > MAX_N {
        return Err(format!("n must be in 1..={MAX_N}"));
    }
    Ok(())
}

pub fn multiply_run(n: usize, ell: usize, plant: &str, seed: u64) -> Result<String, String> {
    check_n(n)?;
    let inst = generate_planted(n, ell, plant_mode(plant)?, seed).map_err(|e| e.to_string())?;
    let mut ctx = SearchContext::new(SearchConfig::exact(seed));
    let report =
        multiply_auto(&inst.a.view(), &inst.b.view(), &mut ctx).map_err(|e| e.to_string())?;
    let truth = brute_force_product(&inst.a, &inst.b).map_err(|e| e.to_string())?;
    let correct = report.entries.same_keys(&truth)
        && report.entries.first_invalid(&inst.a, &inst.b).is_none();
    let drawn = n <= MAX_DRAWN;
    let product = drawn.then(|| {
        let mut p = BoolMatrix::zeros(n, n);
        for (i, j) in truth.keys() {
            p.set(i, j, true);
        }
        rows_of(&p)
    });
    let out = RunOut {
        n,
        ell: inst.ell,
        lambda_final: report.lambda_final,
        mode: report.mode,
        correct,
        ledger: report.ledger,
        rounds: report
            .rounds
            .iter()
            .map(|r| RoundOut {
                lambda: r.lambda,
                found: r.found,
                quantum_units: r.ledger.quantum_units,
            })
            .collect(),
        entries: report
            .entries
            .iter()
            .take(256)
            .map(|e| [e.i + 1, e.j + 1, e.k + 1])
            .collect(),
        a: drawn.then(|| rows_of(&inst.a)),
        b: drawn.then(|| rows_of(&inst.b)),
        product,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LemmaOut {
    ell: usize,
    delta: f64,
    trials: usize,
    hits: usize,
    frequency: f64,
    threshold: f64,
    passed: bool,
}

/// `family` is `random` (Bernoulli planted product) or `row` (all non-zeros
/// in one row).
pub fn lemma_frequency(
    n: usize,
    r: usize,
    ell: usize,
    trials: usize,
    seed: u64,
    family: &str,
) -> Result<String, String> {
    check_n(n)?;
    let exp = match family {
        "random" => {
            let inst =
                generate_planted(n, ell, PlantMode::Bernoulli, seed).map_err(|e| e.to_string())?;
            Lemma3Experiment::new(&inst.a, &inst.b).map_err(|e| e.to_string())?
        }
        "row" => {
            if ell == 0 || ell > n {
                return Err(format!("row family needs 1 <= ell <= n, got {ell}"));
            }
            Lemma3Experiment::from_entries(n, (0..ell).map(|j| (0, j)).collect())
        }
        other => return Err(format!("unknown family `{other}`")),
    };
    let s = exp.run(r, trials, seed).map_err(|e| e.to_string())?;
    let out = LemmaOut {
        ell: exp.ell(),
        delta: s.delta,
        trials: s.trials,
        hits: s.hits,
        frequency: s.frequency,
        threshold: s.threshold,
        passed: s.passed(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PointOut {
    ell: usize,
    mode: Mode,
    mean_units: f64,
}

#[derive(Serialize)]
struct CurveOut {
    n: usize,
    points: Vec<PointOut>,
    slope: Option<f64>,
}

/// Mean `quantum_units` over `trials` planted instances per ℓ, plus the
/// log-log slope over all runs.
pub fn scaling_curve(
    n: usize,
    ells: &str,
    trials: usize,
    seed: u64,
    known_lambda: bool,
) -> Result<String, String> {
    check_n(n)?;
    let ells: Vec<usize> = ells
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("bad ell value `{s}`")))
        .collect::<Result<_, _>>()?;
    if ells.is_empty() || trials == 0 {
        return Err("need at least one ell value and one trial".into());
    }
    let mut points = Vec::new();
    let mut all = Vec::new();
    for &ell in &ells {
        let mut total = 0.0;
        let mut mode = Mode::Direct;
        for t in 0..trials {
            let s = cell_seed(seed, n, ell, t);
            let inst =
                generate_planted(n, ell, PlantMode::Rectangles, s).map_err(|e| e.to_string())?;
            let (a, b) = (inst.a.view(), inst.b.view());
            let mut ctx = SearchContext::new(SearchConfig::exact(s));
            let units = if known_lambda {
                let mut l = CostLedger::default();
                let out = multiply_known_lambda(&a, &b, inst.ell.max(1), &mut ctx, &mut l)
                    .map_err(|e| e.to_string())?;
                mode = out.mode;
                l.quantum_units
            } else {
                let r = multiply_auto(&a, &b, &mut ctx).map_err(|e| e.to_string())?;
                mode = r.mode;
                r.ledger.quantum_units
            };
            total += units as f64;
            all.push((inst.ell as f64, units as f64));
        }
        points.push(PointOut {
            ell,
            mode,
            mean_units: total / trials as f64,
        });
    }
    let out = CurveOut {
        n,
        points,
        slope: fit_loglog_slope(&all),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}
