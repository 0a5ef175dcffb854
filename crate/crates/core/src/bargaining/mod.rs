//! Nash-bargaining division of the social welfare between the operator and the APOs.
//!
//! The offload profile is always the social optimum. Protocols differ only in
//! how the welfare is split:
//!
//! * sequential: blocks bargain in order; block `k` receives half of its
//!   marginal welfare averaged over every agree/disagree pattern of the blocks
//!   after it;
//! * concurrent: every block receives half of its marginal welfare given that
//!   all others agree;
//! * one-to-one: a single APO receives half of the welfare.
//!
//! The operator keeps the rest. The split itself only needs a [`WelfareFn`],
//! so [`divide`] also accepts tabulated welfare functions.

mod marginal;

pub(crate) use marginal::run_chunks;
pub use marginal::MarginalEstimate;

use crate::error::SolveError;
use crate::model::{BargainOutcome, GroupingStructure, Protocol, Scenario};
use crate::optimizer::{socially_optimal, OptimizerConfig};
use crate::welfare::{profit_loss_unchecked, WelfareFn};

/// Payoffs that should be nonnegative may dip below zero by this much through rounding.
const SIGN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbsConfig {
    /// Blocks with at most this many later blocks are enumerated exactly.
    pub exact_cutoff: usize,
    /// Sample count for blocks beyond `exact_cutoff`.
    pub mc_samples: usize,
    pub seed: u64,
    /// Threads for enumeration and sampling. Results do not depend on it.
    pub workers: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for NbsConfig {
    fn default() -> Self {
        NbsConfig { exact_cutoff: 20, mc_samples: 100_000, seed: 0, workers: 1, optimizer: OptimizerConfig::default() }
    }
}

impl NbsConfig {
    fn check(&self, grouping: &GroupingStructure, protocol: Protocol) -> Result<(), SolveError> {
        if self.exact_cutoff > 40 {
            return Err(SolveError::Config(format!("exact_cutoff {} exceeds 40", self.exact_cutoff)));
        }
        let needs_mc = protocol == Protocol::Sequential && grouping.num_blocks() > self.exact_cutoff + 1;
        if needs_mc && self.mc_samples < 100 {
            return Err(SolveError::Config(format!("Monte Carlo needs at least 100 samples, got {}", self.mc_samples)));
        }
        Ok(())
    }
}

/// Welfare split for a fixed offload profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    /// Payoff of each block, in block order.
    pub block_pi: Vec<f64>,
    /// Payoff of each APO after the intra-block split.
    pub pi: Vec<f64>,
    pub mno_payoff: f64,
    pub welfare: f64,
    pub mc_stderr: Option<f64>,
}

fn zero_block(x: &[f64], block: &[usize]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &i in block {
        y[i] = 0.0;
    }
    y
}

/// `Psi(x*) - Psi(x* with the block zeroed)`: the block's marginal welfare when all others agree.
pub fn concurrent_marginal<W: WelfareFn + ?Sized>(w: &W, x_star: &[f64], block: &[usize]) -> f64 {
    w.value(x_star) - w.value(&zero_block(x_star, block))
}

/// Marginal welfare of block `k` averaged over the fair-coin agreement of all later blocks.
///
/// Exact when at most `cfg.exact_cutoff` blocks follow `k`; sampled otherwise.
pub fn virtual_marginal_welfare<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    k: usize,
    cfg: &NbsConfig,
) -> Result<MarginalEstimate, SolveError> {
    assert_eq!(x_star.len(), w.dim());
    cfg.check(grouping, Protocol::Sequential)?;
    Ok(estimate_block(w, x_star, grouping, k, cfg))
}

fn estimate_block<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    k: usize,
    cfg: &NbsConfig,
) -> MarginalEstimate {
    let later = grouping.num_blocks() - k - 1;
    if later <= cfg.exact_cutoff {
        MarginalEstimate { mean: marginal::exact(w, x_star, grouping, k, cfg.workers), stderr: None }
    } else {
        marginal::sampled(w, x_star, grouping, k, cfg.mc_samples, cfg.seed, cfg.workers)
    }
}

/// Splits each block's payoff among its members in proportion to their own
/// concurrent marginals, or equally when those are all zero.
fn split_blocks<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    block_pi: &[f64],
) -> Vec<f64> {
    let mut pi = vec![0.0; x_star.len()];
    for (block, &total) in grouping.blocks().iter().zip(block_pi) {
        if block.len() == 1 {
            pi[block[0]] = total;
            continue;
        }
        let weights: Vec<f64> = block.iter().map(|&i| concurrent_marginal(w, x_star, &[i]).max(0.0)).collect();
        let sum: f64 = weights.iter().sum();
        for (&i, &wt) in block.iter().zip(&weights) {
            pi[i] = if sum > 0.0 { total * wt / sum } else { total / block.len() as f64 };
        }
    }
    pi
}

/// Divides `Psi(x_star)` under `protocol`.
pub fn divide<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    protocol: Protocol,
    cfg: &NbsConfig,
) -> Result<Division, SolveError> {
    assert_eq!(x_star.len(), w.dim());
    cfg.check(grouping, protocol)?;
    let welfare = w.value(x_star);
    let mut mc_stderr: Option<f64> = None;
    let block_pi: Vec<f64> = match protocol {
        Protocol::OneToOne => {
            if grouping.num_blocks() != 1 {
                return Err(SolveError::WrongSize {
                    op: "one-to-one bargaining",
                    expected: 1,
                    got: grouping.num_blocks(),
                });
            }
            vec![welfare / 2.0]
        }
        Protocol::Concurrent => grouping.blocks().iter().map(|b| concurrent_marginal(w, x_star, b) / 2.0).collect(),
        Protocol::Sequential => (0..grouping.num_blocks())
            .map(|k| {
                let est = estimate_block(w, x_star, grouping, k, cfg);
                if let Some(se) = est.stderr {
                    mc_stderr = Some(mc_stderr.map_or(se / 2.0, |m| m.max(se / 2.0)));
                }
                est.mean / 2.0
            })
            .collect(),
    };
    let pi = split_blocks(w, x_star, grouping, &block_pi);
    let paid: f64 = block_pi.iter().sum();
    Ok(Division { block_pi, pi, mno_payoff: welfare - paid, welfare, mc_stderr })
}

/// `z_n = pi_n - Q_n(x_n)`: the transfer that leaves APO `n` with payoff `pi_n`.
pub fn payments_from_payoffs(s: &Scenario, x: &[f64], pi: &[f64]) -> Result<Vec<f64>, SolveError> {
    assert_eq!(x.len(), s.n());
    assert_eq!(pi.len(), s.n());
    let mut z = Vec::with_capacity(s.n());
    for (i, apo) in s.apos.iter().enumerate() {
        let zn = pi[i] - profit_loss_unchecked(apo, x[i]);
        if zn < -SIGN_SLACK {
            return Err(SolveError::Consistency(format!("negative payment {zn} for APO {}", i + 1)));
        }
        z.push(zn.max(0.0));
    }
    Ok(z)
}

/// Solves for the social optimum and divides it under `protocol`.
pub fn bargain(
    s: &Scenario,
    grouping: &GroupingStructure,
    protocol: Protocol,
    cfg: &NbsConfig,
) -> Result<BargainOutcome, SolveError> {
    let report = grouping.validate(s.n());
    if !report.is_valid() {
        return Err(crate::error::ModelError::Invalid(report).into());
    }
    let x = socially_optimal(s, &cfg.optimizer)?;
    let d = divide(s, &x, grouping, protocol, cfg)?;
    outcome_from_division(s, x, grouping, protocol, d)
}

fn outcome_from_division(
    s: &Scenario,
    x: Vec<f64>,
    grouping: &GroupingStructure,
    protocol: Protocol,
    d: Division,
) -> Result<BargainOutcome, SolveError> {
    let z = payments_from_payoffs(s, &x, &d.pi)?;
    Ok(BargainOutcome {
        protocol,
        grouping: grouping.clone(),
        x,
        pi: d.pi,
        block_pi: d.block_pi,
        z,
        mno_payoff: d.mno_payoff,
        welfare: d.welfare,
        mc_stderr: d.mc_stderr,
    })
}

/// Bargaining with a single APO: each side receives half of the optimal welfare.
pub fn one_to_one_nbs(s: &Scenario, cfg: &NbsConfig) -> Result<BargainOutcome, SolveError> {
    if s.n() != 1 {
        return Err(SolveError::WrongSize { op: "one-to-one bargaining", expected: 1, got: s.n() });
    }
    bargain(s, &GroupingStructure::singletons(1), Protocol::OneToOne, cfg)
}

pub fn sequential_nbs(
    s: &Scenario,
    grouping: &GroupingStructure,
    cfg: &NbsConfig,
) -> Result<BargainOutcome, SolveError> {
    bargain(s, grouping, Protocol::Sequential, cfg)
}

pub fn concurrent_nbs(
    s: &Scenario,
    grouping: &GroupingStructure,
    cfg: &NbsConfig,
) -> Result<BargainOutcome, SolveError> {
    bargain(s, grouping, Protocol::Concurrent, cfg)
}

/// How a block of the second grouping relates to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRole {
    /// Formed by merging two or more blocks of the first grouping.
    Merged,
    /// Unchanged, and some merged group bargains after it.
    Predecessor,
    /// Unchanged, with no merged group after it.
    Successor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDelta {
    /// 0-based APO indices of the block in the second grouping.
    pub members: Vec<usize>,
    pub role: BlockRole,
    /// Total payoff of these members under the first grouping.
    pub pi_a: f64,
    /// Block payoff under the second grouping.
    pub pi_b: f64,
    /// Whether the change matches what the role predicts: a weak gain for
    /// merged groups and their predecessors under sequential bargaining,
    /// no change for the rest. `None` when the groupings are not comparable.
    pub expected_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolComparison {
    pub protocol: Protocol,
    pub a: Division,
    pub b: Division,
    /// One entry per block of the second grouping, or empty if not comparable.
    pub blocks: Vec<BlockDelta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupingComparison {
    /// True when the second grouping merges runs of consecutive blocks of the first.
    pub is_coarsening: bool,
    pub sequential: ProtocolComparison,
    pub concurrent: ProtocolComparison,
}

/// For each block of `b`, the range of `a`'s blocks it merges, if `b` is an
/// order-preserving coarsening of `a`.
fn coarsening_map(a: &GroupingStructure, b: &GroupingStructure) -> Option<Vec<std::ops::Range<usize>>> {
    let mut ranges = Vec::new();
    let mut next = 0;
    for block in b.blocks() {
        let mut want: Vec<usize> = block.clone();
        want.sort_unstable();
        let start = next;
        let mut have: Vec<usize> = Vec::new();
        while have.len() < want.len() && next < a.num_blocks() {
            have.extend(&a.blocks()[next]);
            next += 1;
        }
        have.sort_unstable();
        if have != want {
            return None;
        }
        ranges.push(start..next);
    }
    (next == a.num_blocks()).then_some(ranges)
}

fn compare(
    w: &Scenario,
    x: &[f64],
    a: &GroupingStructure,
    b: &GroupingStructure,
    protocol: Protocol,
    map: Option<&[std::ops::Range<usize>]>,
    cfg: &NbsConfig,
) -> Result<ProtocolComparison, SolveError> {
    let da = divide(w, x, a, protocol, cfg)?;
    let db = divide(w, x, b, protocol, cfg)?;
    let mut blocks = Vec::new();
    if let Some(map) = map {
        let last_merged = map.iter().rposition(|r| r.len() > 1);
        for (k, range) in map.iter().enumerate() {
            let pi_a: f64 = da.block_pi[range.clone()].iter().sum();
            let pi_b = db.block_pi[k];
            let role = if range.len() > 1 {
                BlockRole::Merged
            } else if last_merged.is_some_and(|m| k < m) {
                BlockRole::Predecessor
            } else {
                BlockRole::Successor
            };
            let gains = pi_b >= pi_a - SIGN_SLACK;
            let same = (pi_b - pi_a).abs() <= SIGN_SLACK;
            let holds = match (protocol, role) {
                (_, BlockRole::Merged) => gains,
                (Protocol::Sequential, BlockRole::Predecessor) => gains,
                _ => same,
            };
            blocks.push(BlockDelta { members: b.blocks()[k].clone(), role, pi_a, pi_b, expected_holds: Some(holds) });
        }
    }
    Ok(ProtocolComparison { protocol, a: da, b: db, blocks })
}

/// Payoff changes from grouping `a` to grouping `b` under both protocols.
pub fn grouping_report(
    s: &Scenario,
    cfg: &NbsConfig,
    a: &GroupingStructure,
    b: &GroupingStructure,
) -> Result<GroupingComparison, SolveError> {
    let x = socially_optimal(s, &cfg.optimizer)?;
    let map = coarsening_map(a, b);
    Ok(GroupingComparison {
        is_coarsening: map.is_some(),
        sequential: compare(s, &x, a, b, Protocol::Sequential, map.as_deref(), cfg)?,
        concurrent: compare(s, &x, a, b, Protocol::Concurrent, map.as_deref(), cfg)?,
    })
}
