//! Brute-force cross-checks of the closed-form payoffs.

use offload_bargain::bargaining::{divide, one_to_one_nbs, NbsConfig};
use offload_bargain::optimizer::socially_optimal;
use offload_bargain::oracle::{backward_induction_nbs, grid_nbs, subset_mean_welfare};
use offload_bargain::{
    ApoParams, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Protocol, Scenario,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apo = |s_n, c_n| ApoParams {
        s_n,
        theta_n: 1.0,
        phi_n: 1.0,
        b_n: 8.0,
        w_n: 4.0,
        c_n,
        demand: DemandDistribution::uniform(0.0, 10.0),
    };
    let mno = MnoParams {
        s0: 1.0,
        theta0: 1.0,
        cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 3.0, q: 0.2 }),
    };
    let cfg = NbsConfig::default();

    let one = Scenario::new(mno.clone(), vec![apo(6.0, 1.0)])?;
    let grid = grid_nbs(&one, 1000)?;
    println!(
        "one APO: closed form {:.5}, grid {:.5} (cell {:.1e})",
        one_to_one_nbs(&one, &cfg)?.pi[0],
        grid.pi,
        grid.pi_cell
    );

    let three = Scenario::new(mno, vec![apo(2.0, 1.0), apo(3.0, 0.5), apo(1.5, 2.0)])?;
    let x = socially_optimal(&three, &cfg.optimizer)?;
    let order = [2, 0, 1];
    let d = divide(&three, &x, &GroupingStructure::from_order(&order, 3)?, Protocol::Sequential, &cfg)?;
    let b = backward_induction_nbs(&three, &x, &order, 20_000)?;
    println!("three APOs: closed form {:?}", d.pi);
    println!("            induction   {:?}", b.pi);
    println!("operator {:.6}, subset mean {:.6}", d.mno_payoff, subset_mean_welfare(&three, &x));
    Ok(())
}
