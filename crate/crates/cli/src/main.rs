use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use osbmm::bench::{append_csv, fit_loglog_slope, run_bench, write_csv, BenchConfig, BenchRecord};
use osbmm::blocking::{default_reps, reduce_and_multiply, Lemma3Experiment, ReduceParams};
use osbmm::boolmat::io::{read_matrix_file, write_matrix_file};
use osbmm::driver::{
    multiply_auto, reduce_block_count, theorem2_multiply, BlockParams, Mode, RunReport,
    THEOREM2_DEFAULT_C,
};
use osbmm::finder::find_up_to_lambda_entries;
use osbmm::{generate_planted, CostLedger, Error, PlantMode, SearchConfig, SearchContext};

#[derive(Parser)]
#[command(
    name = "osbmm",
    version,
    about = "Output-sensitive Boolean matrix multiplication with a quantum cost model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write two n x n BMM1 files whose product has a planted number of non-zeros.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, value_enum, default_value_t = Plant::Rectangles)]
        mode: Plant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_a: PathBuf,
        #[arg(long)]
        out_b: PathBuf,
    },
    /// Multiply two BMM1 files and list the non-zero entries as `i j k`.
    Multiply {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = RunMode::Auto)]
        mode: RunMode,
        /// Output-size bound; required for every mode except auto.
        #[arg(long)]
        lambda: Option<usize>,
        /// Block-count constant for theorem2 mode.
        #[arg(long, default_value_t = THEOREM2_DEFAULT_C)]
        c: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        p_fail: f64,
        /// Append one benchmark row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run planted instances over a grid of sizes and write CSV rows.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        ell_list: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Plant::Rectangles)]
        plant: Plant,
        #[arg(long, default_value_t = 0.0)]
        p_fail: f64,
        /// Use the known-lambda algorithm with lambda = ell instead of doubling.
        #[arg(long)]
        known_lambda: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Print the log-log slope of quantum_units against this column.
        #[arg(long, value_enum)]
        fit: Option<FitAxis>,
        /// CSV file to append to; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of the per-block load bound under random permutations.
    ValidateLemma {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Family::Random)]
        family: Family,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Plant {
    Bernoulli,
    Rectangles,
}

impl From<Plant> for PlantMode {
    fn from(p: Plant) -> Self {
        match p {
            Plant::Bernoulli => PlantMode::Bernoulli,
            Plant::Rectangles => PlantMode::Rectangles,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Auto,
    Direct,
    Reduce,
    Theorem2,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitAxis {
    Ell,
    N,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// Bernoulli planted product with about `ell` non-zeros.
    Random,
    /// All `ell` non-zeros in the first row.
    Row,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        Error::Input(_) | Error::RankOutOfRange { .. } | Error::Io(_) => 3,
        Error::Logic(_) => 4,
    }
}

fn search_config(p_fail: f64, seed: u64) -> Result<SearchConfig, Error> {
    if !(0.0..1.0).contains(&p_fail) {
        return Err(Error::Input(format!(
            "--p-fail must be in [0, 1), got {p_fail}"
        )));
    }
    Ok(if p_fail > 0.0 {
        SearchConfig::with_failure(p_fail, seed)
    } else {
        SearchConfig::exact(seed)
    })
}

fn require_lambda(lambda: Option<usize>) -> Result<usize, Error> {
    lambda.ok_or_else(|| Error::Input("--lambda is required for this mode".into()))
}

fn print_ledger(out: &mut impl Write, report: &RunReport) -> io::Result<()> {
    let l = &report.ledger;
    writeln!(
        out,
        "mode {} lambda {} entries {}",
        report.mode,
        report.lambda_final,
        report.entries.len()
    )?;
    if let Some(BlockParams { r, delta, reps }) = report.params {
        writeln!(out, "blocks r {r} delta {delta:.2} reps {reps}")?;
    }
    writeln!(
        out,
        "quantum_units {} oracle_queries_A {} oracle_queries_B {} ds_ops {} classical_ops {}",
        l.quantum_units, l.oracle_queries_a, l.oracle_queries_b, l.ds_ops, l.classical_ops
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen {
            n,
            ell,
            mode,
            seed,
            out_a,
            out_b,
        } => {
            let inst = generate_planted(n, ell, mode.into(), seed)?;
            write_matrix_file(&inst.a, &out_a)?;
            write_matrix_file(&inst.b, &out_b)?;
            println!("{}", inst.ell);
        }
        Command::Multiply {
            a,
            b,
            mode,
            lambda,
            c,
            seed,
            p_fail,
            csv,
        } => {
            let (ma, mb) = (read_matrix_file(&a)?, read_matrix_file(&b)?);
            let (va, vb) = (ma.view(), mb.view());
            let mut ctx = SearchContext::new(search_config(p_fail, seed)?);
            let start = std::time::Instant::now();
            let report = match mode {
                RunMode::Auto => multiply_auto(&va, &vb, &mut ctx)?,
                RunMode::Direct => {
                    let lambda = require_lambda(lambda)?;
                    let mut ledger = CostLedger::default();
                    let entries =
                        find_up_to_lambda_entries(&va, &vb, lambda, &mut ctx, &mut ledger)?;
                    single_round(entries, ledger, lambda, Mode::Direct, None, seed)
                }
                RunMode::Reduce => {
                    let lambda = require_lambda(lambda)?;
                    if ma.rows() != mb.cols() || ma.cols() != ma.rows() {
                        return Err(Error::Input("reduce mode needs two n x n matrices".into()));
                    }
                    let n = ma.rows();
                    let bound = lambda.max(n);
                    let r = reduce_block_count(n, bound);
                    let params = ReduceParams::new(bound, r, n);
                    let delta = osbmm::blocking::delta_bound(n, r, bound)?;
                    let mut ledger = CostLedger::default();
                    let entries = reduce_and_multiply(&va, &vb, params, &mut ctx, &mut ledger)?;
                    let bp = BlockParams {
                        r,
                        delta,
                        reps: default_reps(n),
                    };
                    single_round(entries, ledger, bound, Mode::Reduce, Some(bp), seed)
                }
                RunMode::Theorem2 => {
                    let lambda = require_lambda(lambda)?;
                    let mut ledger = CostLedger::default();
                    let out = theorem2_multiply(&va, &vb, lambda, c, &mut ctx, &mut ledger)?;
                    single_round(out.entries, ledger, lambda, out.mode, out.params, seed)
                }
            };
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let stdout = io::stdout();
            let mut out = io::BufWriter::new(stdout.lock());
            for e in report.entries.iter() {
                writeln!(out, "{e}")?;
            }
            out.flush()?;
            print_ledger(&mut io::stderr(), &report)?;
            if let Some(path) = csv {
                let rec =
                    BenchRecord::from_report(ma.rows(), report.entries.len(), &report, wall_ms);
                append_csv(&path, &[rec])?;
            }
        }
        Command::Bench {
            n_list,
            ell_list,
            trials,
            seed,
            plant,
            p_fail,
            known_lambda,
            workers,
            fit,
            out,
        } => {
            search_config(p_fail, seed)?;
            let mut cfg = BenchConfig::new(n_list, ell_list, trials, seed);
            cfg.plant = plant.into();
            cfg.p_fail = p_fail;
            cfg.known_lambda = known_lambda;
            cfg.workers = workers;
            let records = run_bench(&cfg)?;
            match out {
                Some(path) => append_csv(&path, &records)?,
                None => write_csv(io::stdout().lock(), &records, true)?,
            }
            if let Some(axis) = fit {
                let pts: Vec<(f64, f64)> = records
                    .iter()
                    .map(|r| {
                        let x = match axis {
                            FitAxis::Ell => r.ell,
                            FitAxis::N => r.n,
                        };
                        (x as f64, r.quantum_units as f64)
                    })
                    .collect();
                match fit_loglog_slope(&pts) {
                    Some(s) => eprintln!("slope {s:.4}"),
                    None => eprintln!("slope undefined (need two distinct positive x values)"),
                }
            }
        }
        Command::ValidateLemma {
            n,
            r,
            ell,
            trials,
            seed,
            family,
        } => {
            let exp = match family {
                Family::Random => {
                    let inst = generate_planted(n, ell, PlantMode::Bernoulli, seed)?;
                    Lemma3Experiment::new(&inst.a, &inst.b)?
                }
                Family::Row => {
                    if ell == 0 || ell > n {
                        return Err(Error::Input(format!(
                            "row family needs 1 <= ell <= n, got {ell}"
                        )));
                    }
                    Lemma3Experiment::from_entries(n, (0..ell).map(|j| (0, j)).collect())
                }
            };
            let s = exp.run(r, trials, seed)?;
            println!(
                "ell {} delta {:.2} trials {} hits {} frequency {:.4} threshold {:.4} {}",
                exp.ell(),
                s.delta,
                s.trials,
                s.hits,
                s.frequency,
                s.threshold,
                if s.passed() { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(())
}

fn single_round(
    entries: osbmm::EntrySet,
    ledger: CostLedger,
    lambda: usize,
    mode: Mode,
    params: Option<BlockParams>,
    seed: u64,
) -> RunReport {
    RunReport {
        entries,
        ledger,
        lambda_final: lambda,
        mode,
        params,
        seed,
        rounds: Vec::new(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
