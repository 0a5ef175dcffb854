//! Fixtures and checks shared by the integration tests.
#![allow(dead_code)]

use offload_bargain::bargaining::{self, grouping_report, NbsConfig};
use offload_bargain::optimizer::{socially_optimal, OptimizerConfig};
use offload_bargain::oracle::subset_mean_welfare;
use offload_bargain::welfare::WelfareFn;
use offload_bargain::{
    ApoParams, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Protocol, Scenario,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Four identical APOs whose welfare over the number offloading is (0, 1, 1.8, 2.4, 2.8).
pub fn golden_scenario() -> Scenario {
    let apo = ApoParams {
        s_n: 1.0,
        theta_n: 1.0,
        phi_n: 1.0,
        b_n: 12.0,
        w_n: 5.0,
        c_n: 1.0,
        demand: DemandDistribution::uniform(0.0, 10.0),
    };
    Scenario::new(
        MnoParams {
            s0: 0.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 1.3, q: 0.1 }),
        },
        vec![apo; 4],
    )
    .unwrap()
}

fn random_demand(r: &mut ChaCha8Rng, uniform_only: bool) -> DemandDistribution {
    let lo = r.random_range(0.0..2.0);
    let hi = lo + r.random_range(2.0..10.0);
    if uniform_only || r.random_bool(0.5) {
        return DemandDistribution::uniform(lo, hi);
    }
    let f = r.random_range(0.2..0.8);
    // Mass at least `f` on the first segment keeps the density nonincreasing.
    let u = f + (1.0 - f) * r.random_range(0.0..0.8);
    let mid = lo + (hi - lo) * f;
    DemandDistribution::piecewise(vec![(lo, 0.0), (mid, u), (hi, 1.0)])
}

pub fn random_apo(r: &mut ChaCha8Rng, phi_one: bool, uniform_only: bool) -> ApoParams {
    let w = r.random_range(2.0..6.0);
    ApoParams {
        s_n: r.random_range(0.5..5.0),
        theta_n: r.random_range(0.5..4.0),
        phi_n: if phi_one { 1.0 } else { r.random_range(0.5..1.5) },
        b_n: r.random_range(2.0..14.0),
        w_n: w,
        c_n: r.random_range(0.1..w - 0.1),
        demand: random_demand(r, uniform_only),
    }
}

/// Coupled strictly convex cost, so the optimum is unique.
pub fn random_coupled_shape(r: &mut ChaCha8Rng) -> CostShape {
    if r.random_bool(0.7) {
        CostShape::Quadratic { a: r.random_range(1.0..4.0), q: r.random_range(0.02..0.3) }
    } else {
        CostShape::Exponential { a: r.random_range(0.5..2.0), k: r.random_range(0.05..0.3) }
    }
}

pub fn random_scenario(r: &mut ChaCha8Rng, n: usize) -> Scenario {
    let shape = random_coupled_shape(r);
    let mno = MnoParams {
        s0: r.random_range(0.0..5.0),
        theta0: r.random_range(0.5..4.0),
        cost_model: CostModel::CoupledTotal(shape),
    };
    let apos = (0..n).map(|_| random_apo(r, false, false)).collect();
    Scenario::new(mno, apos).unwrap()
}

pub fn single_apo_scenario(r: &mut ChaCha8Rng) -> Scenario {
    random_scenario(r, 1)
}

pub fn exact_cfg() -> NbsConfig {
    NbsConfig { exact_cutoff: 20, ..NbsConfig::default() }
}

fn relabel(s: &Scenario, perm: &[usize]) -> Scenario {
    let apos = perm.iter().map(|&i| s.apos[i].clone()).collect();
    Scenario::new(s.mno.clone(), apos).unwrap()
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Checks the bargaining properties on one scenario with `n <= 8` APOs.
pub fn check_properties(s: &Scenario, r: &mut ChaCha8Rng) -> Result<(), String> {
    let n = s.n();
    let cfg = exact_cfg();
    let x = socially_optimal(s, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let psi = s.value(&x);
    let scale = psi.abs().max(1.0);
    let seq = |order: &[usize]| {
        bargaining::divide(s, &x, &GroupingStructure::from_order(order, n).unwrap(), Protocol::Sequential, &cfg)
            .unwrap()
    };
    let identity: Vec<usize> = (0..n).collect();

    // Early movers do at least as well: swap each adjacent pair of a random order.
    let mut order = identity.clone();
    order.shuffle(r);
    let base = seq(&order);
    for k in 0..n.saturating_sub(1) {
        let mut swapped = order.clone();
        swapped.swap(k, k + 1);
        let later = seq(&swapped);
        let a = order[k];
        ensure(base.pi[a] >= later.pi[a] - TOL * scale, || {
            format!("early mover: APO {a} gets {} at {k} but {} at {}", base.pi[a], later.pi[a], k + 1)
        })?;
    }

    // Operator payoff does not depend on the order and equals the subset mean.
    let mean = subset_mean_welfare(s, &x);
    for _ in 0..20 {
        let mut o = identity.clone();
        o.shuffle(r);
        let u = seq(&o).mno_payoff;
        ensure((u - base.mno_payoff).abs() <= TOL * scale, || {
            format!("order changed operator payoff: {u} vs {}", base.mno_payoff)
        })?;
    }
    ensure((base.mno_payoff - mean).abs() <= TOL * scale, || {
        format!("operator payoff {} vs subset mean {mean}", base.mno_payoff)
    })?;

    // Concurrent bargaining ignores labels and equals going last.
    let conc = bargaining::divide(s, &x, &GroupingStructure::singletons(n), Protocol::Concurrent, &cfg).unwrap();
    let mut perm = identity.clone();
    perm.shuffle(r);
    let t = relabel(s, &perm);
    let y: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
    let conc_t = bargaining::divide(&t, &y, &GroupingStructure::singletons(n), Protocol::Concurrent, &cfg).unwrap();
    for (j, &i) in perm.iter().enumerate() {
        ensure((conc_t.pi[j] - conc.pi[i]).abs() <= TOL * scale, || {
            format!("relabel: APO {i} {} vs {}", conc.pi[i], conc_t.pi[j])
        })?;
    }
    for i in 0..n {
        let mut o: Vec<usize> = identity.iter().copied().filter(|&j| j != i).collect();
        o.push(i);
        let last = seq(&o).pi[i];
        ensure((last - conc.pi[i]).abs() <= TOL * scale, || {
            format!("APO {i}: concurrent {} vs last {last}", conc.pi[i])
        })?;
    }

    // Merging a run of consecutive blocks helps the group and those before it.
    if n >= 2 {
        let start = r.random_range(0..n - 1);
        let end = r.random_range(start + 2..=n);
        let mut blocks: Vec<Vec<usize>> = order[..start].iter().map(|&i| vec![i]).collect();
        blocks.push(order[start..end].to_vec());
        blocks.extend(order[end..].iter().map(|&i| vec![i]));
        let a = GroupingStructure::from_order(&order, n).unwrap();
        let b = GroupingStructure::new(blocks, n).unwrap();
        let report = grouping_report(s, &cfg, &a, &b).map_err(|e| e.to_string())?;
        ensure(report.is_coarsening, || "merge not recognised as coarsening".into())?;
        for cmp in [&report.sequential, &report.concurrent] {
            for d in &cmp.blocks {
                ensure(d.expected_holds == Some(true), || {
                    format!("{:?} block {:?}: {:?}", cmp.protocol, d.members, d)
                })?;
            }
        }
    }
    Ok(())
}
