//! Command-line front end. Writes JSON and CSV only.
//!
//! Exit codes: 0 success, 1 a computation failed, 2 bad usage or input.
//! Set `OFFLOAD_LOG=debug` for progress messages on standard error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bargaining::{self, NbsConfig};
use crate::error::{ModelError, SolveError};
use crate::model::json::{format_g17, to_canonical_json};
use crate::model::{GroupingStructure, Protocol, Scenario};
use crate::optimizer::{socially_optimal, OptimizerConfig};
use crate::oracle;
use crate::scenario::{self, GeneratorSpec};
use crate::stackelberg;

#[derive(Debug, Parser)]
#[command(name = "offload", version, about = "Welfare-optimal data offloading and Nash-bargaining payoff division")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario.
    Gen(GenArgs),
    /// Divide the optimal welfare by bargaining.
    Bargain(BargainArgs),
    /// Solve the operator's pricing problem.
    Stackelberg(StackelbergArgs),
    /// Compare the social optimum with the pricing equilibrium.
    Compare(CompareArgs),
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub apos: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Generator settings as JSON; `--seed` and `--apos` override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    #[value(name = "one2one")]
    One2One,
    Sequential,
    Concurrent,
}

#[derive(Debug, clap::Args)]
pub struct BargainArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    /// Bargaining order as a comma list of 1-based APO indices; defaults to 1..N.
    #[arg(long, conflicts_with = "groups")]
    pub order: Option<String>,
    /// Ordered blocks, e.g. `[1],[2,3],[4]`.
    #[arg(long)]
    pub groups: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-APO rows `index,block,x,pi,z`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Cross-check against the brute-force oracles (up to three APOs).
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, clap::Args)]
pub struct StackelbergArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-APO rows `index,theta,c,x_nbs,x_ne`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Theta,
    C,
}

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-APO rows `index,theta,c,x_nbs,x_ne`; one row per sweep point when sweeping.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Vary one parameter of one APO.
    #[arg(long, value_enum, requires_all = ["apo", "range"])]
    pub sweep: Option<SweepParam>,
    /// 1-based APO index for `--sweep`.
    #[arg(long, requires = "sweep")]
    pub apo: Option<usize>,
    /// `start:end:step`, inclusive of `end` up to rounding.
    #[arg(long, requires = "sweep")]
    pub range: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => Failure::Usage(m.to_string()),
            SolveError::Config(m) => Failure::Usage(format!("configuration error: {m}")),
            SolveError::WrongSize { .. } => Failure::Usage(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))
}

/// Parses process arguments and runs; returns the exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("OFFLOAD_LOG")).try_init();
    run(std::env::args_os())
}

/// Runs with explicit arguments (the first is the program name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Bargain(a) => cmd_bargain(&a),
        Command::Stackelberg(a) => cmd_stackelberg(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Compute(m)) => {
            eprintln!("failed: {m}");
            1
        }
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<GeneratorSpec>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => GeneratorSpec::default(),
    };
    spec.seed = a.seed;
    spec.n_apos = a.apos as usize;
    let s = scenario::generate(&spec)?;
    scenario::save(&s, &a.out).map_err(|e| Failure::Compute(e.to_string()))?;
    log::info!("wrote {} APOs to {}", s.n(), a.out.display());
    Ok(())
}

fn parse_grouping(a: &BargainArgs, n: usize) -> Result<GroupingStructure, Failure> {
    if let Some(g) = &a.groups {
        return Ok(GroupingStructure::parse(g, n)?);
    }
    if let Some(o) = &a.order {
        let order = o
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Failure::Usage(format!("bad --order entry `{t}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(GroupingStructure::from_order(&order, n)?);
    }
    Ok(GroupingStructure::singletons(n))
}

fn cmd_bargain(a: &BargainArgs) -> Result<(), Failure> {
    let s = scenario::load(&a.scenario)?;
    let n = s.n();
    let protocol = match a.protocol {
        ProtocolArg::One2One => Protocol::OneToOne,
        ProtocolArg::Sequential => Protocol::Sequential,
        ProtocolArg::Concurrent => Protocol::Concurrent,
    };
    let grouping = if protocol == Protocol::OneToOne {
        if n != 1 {
            return Err(Failure::Usage(format!("one2one needs exactly one APO, scenario has {n}")));
        }
        GroupingStructure::singletons(1)
    } else {
        parse_grouping(a, n)?
    };
    let cfg = NbsConfig { mc_samples: a.mc_samples, seed: a.seed, workers: a.workers.max(1), ..Default::default() };
    let out = bargaining::bargain(&s, &grouping, protocol, &cfg)?;
    let residual = out.budget_residual();
    if residual.abs() > 1e-9 * out.welfare.abs().max(1.0) {
        return Err(Failure::Compute(format!("budget residual {residual:e}")));
    }
    write_file(&a.out, &out.to_json())?;
    if let Some(csv) = &a.csv {
        let block_of = grouping.block_of(n);
        let mut text = String::from("index,block,x,pi,z\n");
        for (i, block) in block_of.iter().enumerate() {
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                i + 1,
                block + 1,
                format_g17(out.x[i]),
                format_g17(out.pi[i]),
                format_g17(out.z[i])
            );
        }
        write_file(csv, &text)?;
    }
    if a.verify {
        verify(&s, &grouping, protocol, &out)?;
    }
    Ok(())
}

fn verify(
    s: &Scenario,
    grouping: &GroupingStructure,
    protocol: Protocol,
    out: &crate::BargainOutcome,
) -> Result<(), Failure> {
    let n = s.n();
    if n == 1 {
        let g = oracle::grid_nbs(s, 1000)?;
        let gap = (g.pi - out.pi[0]).abs();
        if gap > g.pi_cell + 1e-9 {
            return Err(Failure::Compute(format!("grid oracle payoff {} differs from {} by {gap:e}", g.pi, out.pi[0])));
        }
        eprintln!("verify: grid oracle agrees within {:e}", g.pi_cell);
        return Ok(());
    }
    let singletons = grouping.blocks().iter().all(|b| b.len() == 1);
    if protocol != Protocol::Sequential || n > 3 || !singletons {
        eprintln!("verify: skipped (oracle covers sequential bargaining of up to three single APOs)");
        return Ok(());
    }
    let order: Vec<usize> = grouping.blocks().iter().map(|b| b[0]).collect();
    let b = oracle::backward_induction_nbs(s, &out.x, &order, 20_000)?;
    let tol = n as f64 * b.step + 1e-9;
    for i in 0..n {
        if (b.pi[i] - out.pi[i]).abs() > tol {
            return Err(Failure::Compute(format!("APO {}: oracle {} vs {}", i + 1, b.pi[i], out.pi[i])));
        }
    }
    eprintln!("verify: backward induction agrees within {tol:e}");
    Ok(())
}

fn per_apo_csv(s: &Scenario, x_nbs: &[f64], x_ne: &[f64]) -> String {
    let mut text = String::from("index,theta,c,x_nbs,x_ne\n");
    for (i, apo) in s.apos.iter().enumerate() {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            i + 1,
            format_g17(apo.theta_n),
            format_g17(apo.c_n),
            format_g17(x_nbs[i]),
            format_g17(x_ne[i])
        );
    }
    text
}

#[derive(serde::Serialize)]
struct StackelbergReport<'a> {
    protocol: &'static str,
    x: &'a [f64],
    pi: &'a [f64],
    z: Vec<f64>,
    mno_payoff: f64,
    welfare: f64,
    p_star: &'a [f64],
    foc_residual: f64,
    binding: &'a [stackelberg::Binding],
}

fn cmd_stackelberg(a: &StackelbergArgs) -> Result<(), Failure> {
    let s = scenario::load(&a.scenario)?;
    let cfg = OptimizerConfig::default();
    let ne = stackelberg::mno_optimal_prices(&s, &cfg)?;
    if ne.foc_residual > 1e-6 {
        return Err(Failure::Compute(format!("first-order residual {:e} above 1e-6", ne.foc_residual)));
    }
    let report = StackelbergReport {
        protocol: "stackelberg",
        x: &ne.x,
        pi: &ne.apo_payoffs,
        z: ne.p_star.iter().zip(&ne.x).map(|(p, x)| p * x).collect(),
        mno_payoff: ne.mno_payoff,
        welfare: ne.welfare,
        p_star: &ne.p_star,
        foc_residual: ne.foc_residual,
        binding: &ne.binding,
    };
    write_file(&a.out, &to_canonical_json(&report).expect("report serializes"))?;
    if let Some(csv) = &a.csv {
        let x_nbs = socially_optimal(&s, &cfg)?;
        write_file(csv, &per_apo_csv(&s, &x_nbs, &ne.x))?;
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--range must be start:end:step with step > 0, got `{text}`"));
    let parts: Vec<f64> =
        text.split(':').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, end, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && end >= start && start.is_finite() && end.is_finite()) {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

#[derive(serde::Serialize)]
struct SweepPoint {
    value: f64,
    x_nbs: f64,
    x_ne: f64,
    weighted_difference: f64,
    welfare_gap: f64,
}

#[derive(serde::Serialize)]
struct SweepReport {
    parameter: &'static str,
    apo: usize,
    points: Vec<SweepPoint>,
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Failure> {
    let s = scenario::load(&a.scenario)?;
    let cfg = OptimizerConfig::default();
    let Some(param) = a.sweep else {
        let r = stackelberg::compare_nbs_ne(&s, &cfg)?;
        if r.welfare_gap < -1e-9 * r.welfare_nbs.abs().max(1.0) {
            return Err(Failure::Compute(format!("negative welfare gap {:e}", r.welfare_gap)));
        }
        write_file(&a.out, &to_canonical_json(&r).expect("report serializes"))?;
        if let Some(csv) = &a.csv {
            write_file(csv, &per_apo_csv(&s, &r.x_nbs, &r.x_ne))?;
        }
        return Ok(());
    };
    let apo = a.apo.expect("clap requires --apo");
    if apo == 0 || apo > s.n() {
        return Err(Failure::Usage(format!("--apo {apo} outside 1..{}", s.n())));
    }
    let i = apo - 1;
    let values = parse_range(a.range.as_deref().expect("clap requires --range"))?;
    let variants: Vec<Scenario> = values
        .iter()
        .map(|&v| {
            let mut t = s.clone();
            match param {
                SweepParam::Theta => t.apos[i].theta_n = v,
                SweepParam::C => t.apos[i].c_n = v,
            }
            let report = crate::model::validate(&t);
            if report.is_valid() {
                Ok(t)
            } else {
                Err(Failure::Usage(format!("sweep value {v}: {report}")))
            }
        })
        .collect::<Result<_, _>>()?;
    let results = parallel_in_order(&variants, a.workers, |t| stackelberg::compare_nbs_ne(t, &cfg));
    let mut points = Vec::with_capacity(values.len());
    let mut failures = Vec::new();
    for ((v, t), r) in values.iter().zip(&variants).zip(results) {
        match r {
            Ok(r) => points.push((
                t,
                SweepPoint {
                    value: *v,
                    x_nbs: r.x_nbs[i],
                    x_ne: r.x_ne[i],
                    weighted_difference: r.weighted_difference,
                    welfare_gap: r.welfare_gap,
                },
            )),
            Err(e) => failures.push(format!("value {v}: {e}")),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("sweep point failed: {f}");
        }
        return Err(Failure::Compute(format!("{} of {} sweep points failed", failures.len(), values.len())));
    }
    if let Some(csv) = &a.csv {
        let mut text = String::from("index,theta,c,x_nbs,x_ne\n");
        for (t, p) in &points {
            let _ = writeln!(
                text,
                "{apo},{},{},{},{}",
                format_g17(t.apos[i].theta_n),
                format_g17(t.apos[i].c_n),
                format_g17(p.x_nbs),
                format_g17(p.x_ne)
            );
        }
        write_file(csv, &text)?;
    }
    let report = SweepReport {
        parameter: match param {
            SweepParam::Theta => "theta",
            SweepParam::C => "c",
        },
        apo,
        points: points.into_iter().map(|(_, p)| p).collect(),
    };
    write_file(&a.out, &to_canonical_json(&report).expect("report serializes"))?;
    Ok(())
}

/// Maps `f` over `items` on up to `workers` threads, keeping input order.
fn parallel_in_order<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    bargaining::run_chunks(items.len(), workers, |k| f(&items[k]))
}
