//! Build a small scenario, find the optimal offloads and split the welfare.

use offload_bargain::bargaining::{bargain, NbsConfig};
use offload_bargain::{
    ApoParams, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Protocol, Scenario,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apo = |s_n, theta_n, c_n| ApoParams {
        s_n,
        theta_n,
        phi_n: 1.0,
        b_n: 8.0,
        w_n: 3.0,
        c_n,
        demand: DemandDistribution::uniform(0.0, 10.0),
    };
    let scenario = Scenario::new(
        MnoParams {
            s0: 4.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 2.0, q: 0.1 }),
        },
        vec![apo(3.0, 1.0, 0.4), apo(2.0, 2.0, 0.6), apo(4.0, 1.5, 0.3)],
    )?;

    let out = bargain(&scenario, &GroupingStructure::singletons(3), Protocol::Sequential, &NbsConfig::default())?;
    println!("welfare {:.4}, operator keeps {:.4}", out.welfare, out.mno_payoff);
    for i in 0..3 {
        println!("APO {}: offloads {:.4}, payoff {:.4}, paid {:.4}", i + 1, out.x[i], out.pi[i], out.z[i]);
    }
    Ok(())
}
