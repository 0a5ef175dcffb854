//! Evaluate the operator's cost saving, each APO's expected profit loss, and
//! the welfare gradient at a few offload profiles.

use offload_bargain::welfare::{apo_profit_loss, cost_reduction, social_welfare, welfare_gradient};
use offload_bargain::{ApoParams, CostModel, CostShape, DemandDistribution, MnoParams, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apo = ApoParams {
        s_n: 5.0,
        theta_n: 1.0,
        phi_n: 1.0,
        b_n: 10.0,
        w_n: 4.0,
        c_n: 1.0,
        demand: DemandDistribution::piecewise(vec![(0.0, 0.0), (4.0, 0.6), (12.0, 1.0)]),
    };
    let s = Scenario::new(
        MnoParams {
            s0: 2.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Exponential { a: 1.0, k: 0.2 }),
        },
        vec![apo.clone(), apo],
    )?;
    for x in [[0.0, 0.0], [1.0, 2.0], [5.0, 5.0]] {
        let g = welfare_gradient(&s, &x)?;
        println!(
            "x = {x:?}: R = {:.4}, Q1 = {:.4}, Psi = {:.4}, grad = [{:.4}, {:.4}]",
            cost_reduction(&s, &x)?,
            apo_profit_loss(&s.apos[0], x[0])?,
            social_welfare(&s, &x)?,
            g.g[0],
            g.g[1]
        );
    }
    // Offloads outside the box are rejected rather than clamped.
    println!("{}", social_welfare(&s, &[6.0, 0.0]).unwrap_err());
    Ok(())
}
