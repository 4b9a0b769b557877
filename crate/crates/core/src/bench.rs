//! Scaling benchmarks: planted instances, one [`multiply_auto`] run per
//! `(n, ℓ, trial)`, CSV output and log-log slope fits.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::boolmat::{generate_planted, PlantMode};
use crate::cost::{CostLedger, SearchConfig, SearchContext};
use crate::driver::{multiply_auto, multiply_known_lambda, RunReport};
use crate::error::{Error, Result};

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub ell: usize,
    pub lambda_final: usize,
    pub mode: String,
    pub quantum_units: u64,
    #[serde(rename = "oracle_queries_A")]
    pub oracle_queries_a: u64,
    #[serde(rename = "oracle_queries_B")]
    pub oracle_queries_b: u64,
    pub ds_ops: u64,
    pub classical_ops: u64,
    pub wall_ms: f64,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "n,ell,lambda_final,mode,quantum_units,oracle_queries_A,oracle_queries_B,ds_ops,classical_ops,wall_ms,seed";

impl BenchRecord {
    pub fn from_report(n: usize, ell: usize, report: &RunReport, wall_ms: f64) -> Self {
        BenchRecord {
            n,
            ell,
            lambda_final: report.lambda_final,
            mode: report.mode.to_string(),
            quantum_units: report.ledger.quantum_units,
            oracle_queries_a: report.ledger.oracle_queries_a,
            oracle_queries_b: report.ledger.oracle_queries_b,
            ds_ops: report.ledger.ds_ops,
            classical_ops: report.ledger.classical_ops,
            wall_ms,
            seed: report.seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub n_list: Vec<usize>,
    pub ell_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub plant: PlantMode,
    pub p_fail: f64,
    /// Run the known-λ algorithm with `λ = ℓ` instead of λ doubling.
    pub known_lambda: bool,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
}

impl BenchConfig {
    pub fn new(n_list: Vec<usize>, ell_list: Vec<usize>, trials: usize, seed: u64) -> Self {
        BenchConfig {
            n_list,
            ell_list,
            trials,
            seed,
            plant: PlantMode::Rectangles,
            p_fail: 0.0,
            known_lambda: false,
            workers: 0,
        }
    }
}

/// Seed of one `(n, ℓ, trial)` cell, independent of the order cells run in.
pub fn cell_seed(seed: u64, n: usize, ell: usize, trial: usize) -> u64 {
    let mut z = seed;
    for x in [n as u64, ell as u64, trial as u64] {
        z = z.wrapping_add(x).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Runs one planted instance through [`multiply_auto`].
pub fn run_cell(
    n: usize,
    ell: usize,
    seed: u64,
    plant: PlantMode,
    p_fail: f64,
) -> Result<BenchRecord> {
    run_cell_with(n, ell, seed, plant, p_fail, false)
}

/// Like [`run_cell`]; with `known_lambda` the product is computed by
/// [`multiply_known_lambda`] with `λ = max(1, ℓ)`, a single round.
pub fn run_cell_with(
    n: usize,
    ell: usize,
    seed: u64,
    plant: PlantMode,
    p_fail: f64,
    known_lambda: bool,
) -> Result<BenchRecord> {
    let inst = generate_planted(n, ell, plant, seed)?;
    let config = if p_fail > 0.0 {
        SearchConfig::with_failure(p_fail, seed)
    } else {
        SearchConfig::exact(seed)
    };
    let mut ctx = SearchContext::new(config);
    let start = Instant::now();
    let (a, b) = (inst.a.view(), inst.b.view());
    let report = if known_lambda {
        let lambda = inst.ell.max(1);
        let mut ledger = CostLedger::default();
        let out = multiply_known_lambda(&a, &b, lambda, &mut ctx, &mut ledger)?;
        RunReport {
            entries: out.entries,
            ledger,
            lambda_final: lambda,
            mode: out.mode,
            params: out.params,
            seed,
            rounds: Vec::new(),
        }
    } else {
        multiply_auto(&a, &b, &mut ctx)?
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRecord::from_report(n, inst.ell, &report, wall_ms))
}

/// One record per `(n, ℓ, trial)` in that order. Cells run on worker threads
/// but the result does not depend on scheduling (apart from `wall_ms`).
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let mut cells = Vec::new();
    for &n in &config.n_list {
        for &ell in &config.ell_list {
            if ell > n * n {
                return Err(Error::input(format!(
                    "ell = {ell} exceeds n^2 = {} for n = {n}",
                    n * n
                )));
            }
            for trial in 0..config.trials {
                cells.push((n, ell, cell_seed(config.seed, n, ell, trial)));
            }
        }
    }
    let workers = match config.workers {
        0 => std::thread::available_parallelism().map_or(1, |w| w.get()),
        w => w,
    }
    .min(cells.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<BenchRecord>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, ell, seed)) = cells.get(idx) else {
                    break;
                };
                let rec = run_cell_with(
                    n,
                    ell,
                    seed,
                    config.plant,
                    config.p_fail,
                    config.known_lambda,
                );
                slots.lock().unwrap()[idx] = Some(rec);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Appends records to a CSV file, writing the header only if the file is new
/// or empty.
pub fn append_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    write_csv(&mut file, records, fresh)?;
    file.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Io(e.into()))?;
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct `x` values or any non-positive coordinate.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        let mut buf = Vec::new();
        let rec = run_cell(8, 4, 1, PlantMode::Rectangles, 0.0).unwrap();
        write_csv(&mut buf, &[rec], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn row_count_and_positive_units() {
        let cfg = BenchConfig::new(vec![64], vec![4, 16, 64], 3, 9);
        let recs = run_bench(&cfg).unwrap();
        assert_eq!(recs.len(), 9);
        assert!(recs.iter().all(|r| r.quantum_units > 0));
        let ells: Vec<_> = recs.iter().map(|r| r.ell).collect();
        assert_eq!(ells, vec![4, 4, 4, 16, 16, 16, 64, 64, 64]);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let mut cfg = BenchConfig::new(vec![16, 32], vec![8, 40], 2, 3);
        cfg.workers = 1;
        let one = run_bench(&cfg).unwrap();
        cfg.workers = 4;
        let four = run_bench(&cfg).unwrap();
        let strip = |v: Vec<BenchRecord>| {
            v.into_iter()
                .map(|r| BenchRecord { wall_ms: 0.0, ..r })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(one), strip(four));
    }

    #[test]
    fn append_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let rec = run_cell(8, 2, 0, PlantMode::Rectangles, 0.0).unwrap();
        append_csv(&path, std::slice::from_ref(&rec)).unwrap();
        append_csv(&path, &[rec.clone(), rec]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("n,")).count(), 1);
        assert_eq!(read_csv(&path).unwrap().len(), 3);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = (1..6)
            .map(|i| (i as f64, 3.0 * (i as f64).powf(1.5)))
            .collect();
        assert!((fit_loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(fit_loglog_slope(&[(2.0, 1.0), (2.0, 5.0)]), None);
        assert_eq!(fit_loglog_slope(&[(0.0, 1.0), (2.0, 5.0)]), None);
    }
}
