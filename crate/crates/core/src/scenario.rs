//! Seeded generation of macrocell-with-hotspots scenarios, and scenario files.
//!
//! Units: traffic in Mbps, bandwidth in MHz, efficiencies in Mbps/MHz.
//!
//! Geometry is reduced to occupancy. Each mobile user lands in the coverage of
//! some AP with probability `h a / (h a + 1 - a)`, where `a` is the fraction of
//! the cell covered by APs and `h` is the hotspot density ratio, and otherwise
//! in the macro-only area. Users in AP coverage pick an AP uniformly.
//!
//! Every field draws from its own ChaCha stream, and per-AP fields are drawn in
//! AP order, so growing `n_apos` keeps the parameters of the first APs unchanged.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{self, ApoParams, CostModel, CostShape, DemandDistribution, MnoParams, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_apos: usize,
    pub seed: u64,
    /// Operator bandwidth; fixes the cost curvature so that `C'` doubles at this load.
    pub mno_bandwidth: f64,
    pub ap_bandwidth_choices: Vec<f64>,
    pub mu_count: usize,
    /// Per-user traffic choices in Kbps.
    pub per_mu_traffic_choices: Vec<f64>,
    pub hotspot_density_ratio: f64,
    pub cell_radius: f64,
    pub ap_radius: f64,
    /// Support of each APO's own resource demand.
    pub apo_demand: (f64, f64),
    pub theta_range: (f64, f64),
    pub theta0_range: (f64, f64),
    /// Linear coefficient `a` of the operator cost `a b + (a / 2 B_mno) b^2`.
    pub cost_scale: f64,
    /// Revenue per unit of own demand served, shared by all APOs.
    pub apo_revenue: f64,
    pub apo_cost_range: (f64, f64),
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            n_apos: 50,
            seed: 0,
            mno_bandwidth: 20.0,
            ap_bandwidth_choices: vec![1.0, 2.0, 5.5, 11.0],
            mu_count: 250,
            per_mu_traffic_choices: vec![0.0, 32.0, 64.0, 128.0, 256.0, 512.0],
            hotspot_density_ratio: 4.0,
            cell_radius: 500.0,
            ap_radius: 50.0,
            apo_demand: (0.0, 10.0),
            theta_range: (0.5, 4.0),
            theta0_range: (0.5, 4.0),
            cost_scale: 1.0,
            apo_revenue: 2.0,
            apo_cost_range: (0.2, 1.0),
        }
    }
}

impl GeneratorSpec {
    pub fn check(&self) -> Result<(), String> {
        let range_ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 <= r.1;
        if self.n_apos == 0 {
            return Err("n_apos must be at least 1".into());
        }
        if self.ap_bandwidth_choices.is_empty() || self.ap_bandwidth_choices.iter().any(|&b| b.is_nan() || b <= 0.0) {
            return Err("ap_bandwidth_choices must be nonempty and positive".into());
        }
        if self.per_mu_traffic_choices.is_empty() || self.per_mu_traffic_choices.iter().any(|&t| t.is_nan() || t < 0.0)
        {
            return Err("per_mu_traffic_choices must be nonempty and nonnegative".into());
        }
        if !(self.mno_bandwidth > 0.0 && self.cost_scale > 0.0 && self.hotspot_density_ratio > 0.0) {
            return Err("mno_bandwidth, cost_scale and hotspot_density_ratio must be positive".into());
        }
        if !(self.cell_radius > 0.0 && self.ap_radius > 0.0) {
            return Err("radii must be positive".into());
        }
        for (name, r) in [("theta_range", self.theta_range), ("theta0_range", self.theta0_range)] {
            if !(range_ok(r) && r.0 > 0.0) {
                return Err(format!("{name} must be a positive interval"));
            }
        }
        if !(range_ok(self.apo_demand) && self.apo_demand.0 >= 0.0 && self.apo_demand.0 < self.apo_demand.1) {
            return Err("apo_demand must satisfy 0 <= lo < hi".into());
        }
        let c = self.apo_cost_range;
        if !(range_ok(c) && c.0 >= 0.0 && c.1 < self.apo_revenue) {
            return Err("apo_cost_range must lie in [0, apo_revenue)".into());
        }
        Ok(())
    }

    /// Probability that a user sits in some AP's coverage.
    pub fn hotspot_probability(&self) -> f64 {
        let a = (self.n_apos as f64 * (self.ap_radius / self.cell_radius).powi(2)).min(1.0);
        let h = self.hotspot_density_ratio;
        h * a / (h * a + 1.0 - a)
    }
}

/// Stream ids, one per generated field.
mod stream {
    pub const THETA0: u64 = 1;
    pub const AP_THETA: u64 = 2;
    pub const AP_BANDWIDTH: u64 = 3;
    pub const AP_COST: u64 = 4;
    pub const MU_TRAFFIC: u64 = 5;
    pub const MU_PLACE: u64 = 6;
}

fn rng_for(seed: u64, field: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(field);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, r: (f64, f64)) -> f64 {
    if r.0 == r.1 {
        r.0
    } else {
        rng.random_range(r.0..r.1)
    }
}

/// Deterministic scenario for `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Scenario, ModelError> {
    spec.check().map_err(|message| {
        ModelError::Invalid(model::ValidationReport {
            violations: vec![model::Violation { path: "spec".into(), message }],
        })
    })?;
    let n = spec.n_apos;
    let theta0 = uniform(&mut rng_for(spec.seed, stream::THETA0), spec.theta0_range);
    let mut theta_rng = rng_for(spec.seed, stream::AP_THETA);
    let mut bw_rng = rng_for(spec.seed, stream::AP_BANDWIDTH);
    let mut cost_rng = rng_for(spec.seed, stream::AP_COST);
    let mut apos: Vec<ApoParams> = (0..n)
        .map(|_| {
            let bw = spec.ap_bandwidth_choices[bw_rng.random_range(0..spec.ap_bandwidth_choices.len())];
            ApoParams {
                s_n: 0.0,
                theta_n: uniform(&mut theta_rng, spec.theta_range),
                phi_n: 1.0,
                b_n: bw,
                w_n: spec.apo_revenue,
                c_n: uniform(&mut cost_rng, spec.apo_cost_range),
                demand: DemandDistribution::uniform(spec.apo_demand.0, spec.apo_demand.1),
            }
        })
        .collect();

    let p_hot = spec.hotspot_probability();
    let mut traffic_rng = rng_for(spec.seed, stream::MU_TRAFFIC);
    let mut place_rng = rng_for(spec.seed, stream::MU_PLACE);
    let mut s0 = 0.0;
    for _ in 0..spec.mu_count {
        let kbps = spec.per_mu_traffic_choices[traffic_rng.random_range(0..spec.per_mu_traffic_choices.len())];
        let mbps = kbps / 1000.0;
        if place_rng.random_bool(p_hot) {
            apos[place_rng.random_range(0..n)].s_n += mbps;
        } else {
            s0 += mbps;
        }
    }
    let a = spec.cost_scale;
    let mno = MnoParams {
        s0,
        theta0,
        cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a, q: a / (2.0 * spec.mno_bandwidth) }),
    };
    Scenario::new(mno, apos)
}

/// Number of users placed in AP coverage; mirrors the placement draws of [`generate`].
pub fn hotspot_user_count(spec: &GeneratorSpec) -> usize {
    let p_hot = spec.hotspot_probability();
    let mut traffic_rng = rng_for(spec.seed, stream::MU_TRAFFIC);
    let mut place_rng = rng_for(spec.seed, stream::MU_PLACE);
    let mut count = 0;
    for _ in 0..spec.mu_count {
        let _ = traffic_rng.random_range(0..spec.per_mu_traffic_choices.len());
        if place_rng.random_bool(p_hot) {
            let _ = place_rng.random_range(0..spec.n_apos);
            count += 1;
        }
    }
    count
}

pub fn save(scenario: &Scenario, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, scenario.to_json())
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

/// Reads and validates a scenario file.
pub fn load(path: &Path) -> Result<Scenario, ModelError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    let s = Scenario::from_json(&text)?;
    let report = model::validate(&s);
    if report.is_valid() {
        Ok(s)
    } else {
        Err(ModelError::Invalid(report))
    }
}
