//! The operator sets per-APO prices and each APO best-responds.

use offload_bargain::optimizer::OptimizerConfig;
use offload_bargain::stackelberg::{apo_best_response, compare_nbs_ne, critical_price, mno_optimal_prices};
use offload_bargain::{ApoParams, CostModel, CostShape, DemandDistribution, MnoParams, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apo = |theta_n, c_n| ApoParams {
        s_n: 6.0,
        theta_n,
        phi_n: 1.0,
        b_n: 8.0,
        w_n: 2.0,
        c_n,
        demand: DemandDistribution::uniform(0.0, 10.0),
    };
    let a = apo(1.0, 0.5);
    println!("critical price {:.3}", critical_price(&a));
    for p in [0.5, 1.0, 1.5, 2.0] {
        println!("  p = {p}: offload {:.3}", apo_best_response(&a, p));
    }

    let s = Scenario::new(
        MnoParams {
            s0: 5.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 1.0, q: 0.05 }),
        },
        vec![a, apo(2.0, 0.3), apo(0.8, 0.9)],
    )?;
    let cfg = OptimizerConfig::default();
    let ne = mno_optimal_prices(&s, &cfg)?;
    println!("prices {:?}", ne.p_star);
    println!("offloads {:?} ({:?})", ne.x, ne.binding);
    let cmp = compare_nbs_ne(&s, &cfg)?;
    println!(
        "optimum {:?}; weighted difference {:.2}%, welfare gap {:.4}",
        cmp.x_nbs,
        100.0 * cmp.weighted_difference,
        cmp.welfare_gap
    );
    Ok(())
}
