mod json;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use tsketch::{
    best_rank1_toeplitz_bruteforce, best_rank_k, domination_check, evaluate_true_error, gen_instance, recover,
    run_suites, universal_tau_bounds, DominationReport, Family, FourierFactor, InstanceSpec, LevBounds, Mode,
    RecoveryConfig, SymToeplitz,
};

#[derive(Parser)]
#[command(name = "tsketch", version, about = "Sample-efficient Toeplitz low-rank approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test instance (matrix plus generating factor).
    Gen(GenArgs),
    /// Recover a Fourier factor from sampled lags of a Toeplitz matrix.
    Recover(RecoverArgs),
    /// Dense best rank-k error (eigendecomposition).
    Baseline(BaselineArgs),
    /// Run the structural and leverage self-check suites.
    Verify(VerifyArgs),
    /// Universal leverage-score bounds and a domination check.
    Levscores(LevArgs),
    /// Recovery sweep over dimensions, emitted as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct OutArg {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value = "circulant")]
    family: Family,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    #[arg(long, default_value = "greedy")]
    mode: Mode,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    r1: Option<usize>,
    #[arg(long)]
    r2: Option<usize>,
    /// Clip negative weights and refit the survivors.
    #[arg(long)]
    project_psd: bool,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> RecoveryConfig {
        RecoveryConfig {
            k: self.k,
            eps: self.eps,
            delta: self.delta,
            mode: self.mode,
            m1: self.m1,
            m2: self.m2,
            r1: self.r1,
            r2: self.r2,
            gamma: self.gamma,
            seed,
            project_psd: self.project_psd,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct RecoverArgs {
    /// Instance or matrix JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random cases per suite.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Run only the named suite (repeatable).
    #[arg(long)]
    suite: Vec<String>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct LevArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Column budget; defaults to 2k.
    #[arg(long)]
    r: Option<usize>,
    /// Random frequency sets in the domination check.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Instances per dimension (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Largest d for which the dense opt_err column is computed.
    #[arg(long, default_value_t = 1024)]
    opt_max_d: usize,
    #[command(flatten)]
    out: OutArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<tsketch::Error>() {
                Some(tsketch::Error::ExplosionGuard { .. }) => ExitCode::from(3),
                Some(tsketch::Error::InvalidConfig(_) | tsketch::Error::BadRank { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("TSKETCH_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("TSKETCH_THREADS={v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Gen(a) => {
            let spec = InstanceSpec { family: a.instance.family, d: a.d, k: a.k, sigma: a.instance.sigma, seed: a.instance.seed };
            let inst = gen_instance(&spec)?;
            #[derive(Serialize)]
            struct Out<'a> {
                spec: InstanceSpec,
                matrix: &'a SymToeplitz,
                factor: &'a FourierFactor,
            }
            emit(&a.out, &Out { spec, matrix: &inst.matrix, factor: &inst.factor })?;
        }
        Command::Recover(a) => {
            let t = load_matrix(&a.input)?;
            let out = recover(&t, &a.solver.config(a.seed))?;
            emit(&a.out, &out)?;
        }
        Command::Baseline(a) => {
            let t = load_matrix(&a.input)?;
            let bk = best_rank_k(&t, a.k)?;
            let norm = t.frobenius_norm();
            let mut v = serde_json::json!({
                "d": t.dim(),
                "k": a.k,
                "error": bk.error,
                "relative_error": if norm > 0.0 { bk.error / norm } else { 0.0 },
            });
            // Toeplitz-constrained rank-1 optimum for tiny inputs.
            if a.k == 1 && t.dim() <= tsketch::spectral::BRUTE_FORCE_MAX_D {
                let (toep, err) = best_rank1_toeplitz_bruteforce(&t)?;
                v["toeplitz_rank1"] = serde_json::json!({ "error": err, "first_column": toep.first_column() });
            }
            emit(&a.out, &v)?;
        }
        Command::Verify(a) => {
            let rep = run_suites(a.seed, a.trials, &a.suite)?;
            emit(&a.out, &rep)?;
            if !rep.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Levscores(a) => {
            let r = a.r.unwrap_or(2 * a.k).clamp(1, a.d.max(1));
            let bounds = universal_tau_bounds(a.d, r)?;
            let dom = domination_check(&bounds, a.trials, a.seed)?;
            #[derive(Serialize)]
            struct Out {
                bounds: LevBounds,
                constant: f64,
                domination: DominationReport,
            }
            let pass = dom.pass;
            emit(&a.out, &Out { constant: bounds.constant(), bounds, domination: dom })?;
            if !pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench(a) => bench(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn load_matrix(path: &Path) -> Result<SymToeplitz> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let m = match v {
        Value::Object(mut o) if o.contains_key("matrix") => o.remove("matrix").unwrap_or(Value::Null),
        Value::Array(col) => serde_json::json!({ "d": col.len(), "first_column": col }),
        other => other,
    };
    let t: SymToeplitz = serde_json::from_value(m).context("expected a symmetric Toeplitz matrix")?;
    if t.dim() == 0 {
        bail!("matrix is empty");
    }
    Ok(t)
}

fn emit<T: Serialize>(out: &OutArg, value: &T) -> Result<()> {
    write_text(out, &json::to_string(value)?)
}

fn write_text(out: &OutArg, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

struct BenchRow {
    d: usize,
    distinct_lags: usize,
    err: f64,
    opt_err: Option<f64>,
    wall_ms: f64,
}

// Fixed sampling budget so the fraction of lags read falls as d grows.
const BENCH_M: usize = 48;
const BENCH_R2: usize = 4;

fn bench(a: &BenchArgs) -> Result<()> {
    if a.trials == 0 {
        return Err(tsketch::Error::InvalidConfig("--trials must be positive".into()).into());
    }
    let mut solver = a.solver.clone();
    solver.m1 = solver.m1.or(Some(BENCH_M));
    solver.m2 = solver.m2.or(Some(BENCH_M));
    solver.r1 = solver.r1.or(Some(solver.k));
    solver.r2 = solver.r2.or(Some(BENCH_R2));
    let jobs: Vec<(usize, u64)> =
        a.d.iter().flat_map(|&d| (0..a.trials as u64).map(move |i| (d, i))).collect();
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(d, i)| -> Result<BenchRow> {
            let seed = a.instance.seed.wrapping_add(i);
            let spec = InstanceSpec { family: a.instance.family, d, k: solver.k, sigma: a.instance.sigma, seed };
            let inst = gen_instance(&spec)?;
            let norm = inst.matrix.frobenius_norm();
            let start = Instant::now();
            let out = recover(&inst.matrix, &solver.config(seed))?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let err = evaluate_true_error(&inst.matrix, &out.factor)? / norm;
            let opt_err = if d <= a.opt_max_d {
                Some(best_rank_k(&inst.matrix, (2 * solver.k).min(d))?.error / norm)
            } else {
                None
            };
            Ok(BenchRow { d, distinct_lags: out.ledger.distinct(), err, opt_err, wall_ms })
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("d,k,eps,mode,distinct_lags,err,opt_err,ratio,wall_ms\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.3}\n",
            r.d,
            solver.k,
            json::float(solver.eps),
            mode_name(solver.mode),
            r.distinct_lags,
            json::float(r.err),
            r.opt_err.map(json::float).unwrap_or_default(),
            json::float(r.distinct_lags as f64 / r.d as f64),
            r.wall_ms,
        ));
    }
    write_text(&a.out, &csv)
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exhaustive => "exhaustive",
        Mode::Greedy => "greedy",
    }
}
