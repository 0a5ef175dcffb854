//! Problem instances: operator and access-point-owner parameters, groupings, outcomes.
//!
//! Types here carry no algorithms. Indices are 0-based in memory and 1-based
//! in every external format (JSON, CSV, CLI flags).

mod cost;
mod demand;
pub mod json;

pub use cost::{CostModel, CostShape};
pub use demand::DemandDistribution;

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ModelError;

/// Mobile network operator: traffic that cannot be offloaded and the serving cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnoParams {
    /// Non-offloadable traffic volume.
    pub s0: f64,
    /// Transmission efficiency for the non-offloadable traffic.
    pub theta0: f64,
    #[serde(rename = "cost")]
    pub cost_model: CostModel,
}

/// One access-point owner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApoParams {
    /// Operator traffic in this AP's coverage area (offloadable).
    #[serde(rename = "s")]
    pub s_n: f64,
    /// Operator-side efficiency for traffic in this area.
    #[serde(rename = "theta")]
    pub theta_n: f64,
    /// AP-side efficiency.
    #[serde(rename = "phi")]
    pub phi_n: f64,
    /// Total AP resource.
    #[serde(rename = "b")]
    pub b_n: f64,
    /// Revenue per unit of own demand served.
    #[serde(rename = "w")]
    pub w_n: f64,
    /// Cost per unit of resource used.
    #[serde(rename = "c")]
    pub c_n: f64,
    pub demand: DemandDistribution,
}

impl ApoParams {
    /// Upper end of the feasible offload interval `[0, min(S_n, phi_n * B_n)]`.
    pub fn offload_cap(&self) -> f64 {
        self.s_n.min(self.phi_n * self.b_n).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mno: MnoParams,
    pub apos: Vec<ApoParams>,
}

impl Scenario {
    /// Builds a scenario, rejecting it if any invariant is violated.
    pub fn new(mno: MnoParams, apos: Vec<ApoParams>) -> Result<Self, ModelError> {
        let s = Scenario { mno, apos };
        let report = validate(&s);
        if report.is_valid() {
            Ok(s)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn n(&self) -> usize {
        self.apos.len()
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        json::to_canonical_json(self).expect("scenario serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Where the violation sits, e.g. `apos[3].w` (1-based APO index).
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every violated scenario invariant; an empty report means valid.
pub fn validate(scenario: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mno = &scenario.mno;
    if !(mno.s0.is_finite() && mno.s0 >= 0.0) {
        report.push("mno.s0", "s0 >= 0 required");
    }
    if !(mno.theta0.is_finite() && mno.theta0 > 0.0) {
        report.push("mno.theta0", "theta0 > 0 required");
    }
    if let Err(e) = mno.cost_model.shape().check() {
        report.push("mno.cost", e);
    }
    if scenario.apos.is_empty() {
        report.push("apos", "at least one APO required");
    }
    for (i, apo) in scenario.apos.iter().enumerate() {
        let at = |field: &str| format!("apos[{}].{field}", i + 1);
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !(apo.s_n.is_finite() && apo.s_n >= 0.0) {
            report.push(at("s"), "s_n >= 0 required");
        }
        if !finite_pos(apo.theta_n) {
            report.push(at("theta"), "theta_n > 0 required");
        }
        if !finite_pos(apo.phi_n) {
            report.push(at("phi"), "phi_n > 0 required");
        }
        if !finite_pos(apo.b_n) {
            report.push(at("b"), "b_n > 0 required");
        }
        if !(apo.c_n.is_finite() && apo.c_n >= 0.0) {
            report.push(at("c"), "c_n >= 0 required");
        }
        if !(apo.w_n.is_finite() && apo.w_n > apo.c_n) {
            report.push(at("w"), "w_n > c_n required");
        }
        if let Err(e) = apo.demand.check() {
            report.push(at("demand"), e);
        }
    }
    report
}

/// Ordered partition of APOs into blocks that each bargain as one player.
///
/// Block order is the sequential bargaining order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupingStructure {
    blocks: Vec<Vec<usize>>,
}

impl GroupingStructure {
    /// `blocks` uses 0-based APO indices.
    pub fn new(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self, ModelError> {
        let g = GroupingStructure { blocks };
        let report = g.validate(n);
        if report.is_valid() {
            Ok(g)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn singletons(n: usize) -> Self {
        GroupingStructure { blocks: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn single_block(n: usize) -> Self {
        GroupingStructure { blocks: vec![(0..n).collect()] }
    }

    /// Singleton blocks visited in `order` (0-based).
    pub fn from_order(order: &[usize], n: usize) -> Result<Self, ModelError> {
        Self::new(order.iter().map(|&i| vec![i]).collect(), n)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block position of every APO.
    pub fn block_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                if i < n {
                    out[i] = k;
                }
            }
        }
        out
    }

    pub fn validate(&self, n: usize) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen = vec![false; n];
        let mut partition = true;
        for (k, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                report.push(format!("blocks[{}]", k + 1), "empty block");
            }
            for &i in block {
                if i >= n {
                    report.push(format!("blocks[{}]", k + 1), format!("APO {} out of range 1..{n}", i + 1));
                    partition = false;
                } else if seen[i] {
                    partition = false;
                } else {
                    seen[i] = true;
                }
            }
        }
        if !partition || seen.iter().any(|s| !s) {
            report.push("blocks", "not a partition");
        }
        report
    }

    /// 1-based block lists, as used in the JSON and CLI formats.
    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }

    /// Parses `[1],[2,3],[4]` (1-based).
    pub fn parse(text: &str, n: usize) -> Result<Self, ModelError> {
        let bad = |why: &str| ModelError::Grouping(format!("cannot parse groups `{text}`: {why}"));
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad("empty"));
        }
        let mut blocks = Vec::new();
        let mut rest = t.as_str();
        loop {
            let body = rest.strip_prefix('[').ok_or_else(|| bad("expected `[`"))?;
            let close = body.find(']').ok_or_else(|| bad("missing `]`"))?;
            let mut block = Vec::new();
            for tok in body[..close].split(',').filter(|s| !s.is_empty()) {
                let v: usize = tok.parse().map_err(|_| bad("indices must be positive integers"))?;
                if v == 0 {
                    return Err(bad("indices are 1-based"));
                }
                block.push(v - 1);
            }
            blocks.push(block);
            rest = &body[close + 1..];
            if rest.is_empty() {
                break;
            }
            rest = rest.strip_prefix(',').ok_or_else(|| bad("expected `,` between blocks"))?;
        }
        Self::new(blocks, n)
    }
}

impl fmt::Display for GroupingStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, i) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl Serialize for GroupingStructure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupingStructure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let one_based = Vec::<Vec<usize>>::deserialize(deserializer)?;
        let mut blocks = Vec::with_capacity(one_based.len());
        for b in one_based {
            let mut block = Vec::with_capacity(b.len());
            for i in b {
                block.push(i.checked_sub(1).ok_or_else(|| serde::de::Error::custom("APO indices are 1-based"))?);
            }
            blocks.push(block);
        }
        let n = blocks.iter().map(|b| b.len()).sum();
        GroupingStructure::new(blocks, n).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    OneToOne,
    Sequential,
    Concurrent,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::OneToOne => "one_to_one",
            Protocol::Sequential => "sequential",
            Protocol::Concurrent => "concurrent",
        })
    }
}

/// Result of a bargaining run. Per-APO vectors are indexed by APO (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainOutcome {
    pub protocol: Protocol,
    pub grouping: GroupingStructure,
    pub x: Vec<f64>,
    pub pi: Vec<f64>,
    /// Total payoff of each block, in block order.
    pub block_pi: Vec<f64>,
    pub z: Vec<f64>,
    pub mno_payoff: f64,
    pub welfare: f64,
    /// Largest Monte Carlo standard error of a block payoff, if any block was sampled.
    pub mc_stderr: Option<f64>,
}

impl BargainOutcome {
    pub fn to_json(&self) -> String {
        json::to_canonical_json(self).expect("outcome serializes")
    }

    /// `welfare - mno_payoff - sum(pi)`; zero up to rounding for every protocol.
    pub fn budget_residual(&self) -> f64 {
        self.welfare - self.mno_payoff - self.pi.iter().sum::<f64>()
    }
}
