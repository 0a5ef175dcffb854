//! Socially optimal offloads and how they move with one APO's efficiency.

use offload_bargain::optimizer::{kkt_violation, socially_optimal, OptimizerConfig};
use offload_bargain::{ApoParams, CostModel, CostShape, DemandDistribution, MnoParams, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = ApoParams {
        s_n: 6.0,
        theta_n: 1.0,
        phi_n: 1.0,
        b_n: 9.0,
        w_n: 3.0,
        c_n: 0.5,
        demand: DemandDistribution::uniform(1.0, 11.0),
    };
    let cfg = OptimizerConfig::default();
    for model in [
        CostModel::AdditivePerArea(CostShape::Quadratic { a: 1.5, q: 0.1 }),
        CostModel::CoupledTotal(CostShape::Quadratic { a: 1.5, q: 0.1 }),
    ] {
        println!("{}", if model.is_additive() { "per-area cost" } else { "total cost" });
        for theta in [0.5, 1.0, 2.0, 4.0] {
            let mut second = base.clone();
            second.theta_n = theta;
            let s = Scenario::new(MnoParams { s0: 3.0, theta0: 1.0, cost_model: model }, vec![base.clone(), second])?;
            let x = socially_optimal(&s, &cfg)?;
            println!("  theta2 = {theta}: x = [{:.4}, {:.4}], KKT gap {:.1e}", x[0], x[1], kkt_violation(&s, &x));
        }
    }
    Ok(())
}
