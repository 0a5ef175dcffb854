//! Effect of letting APOs bargain as a group.

use offload_bargain::bargaining::{grouping_report, NbsConfig};
use offload_bargain::{ApoParams, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apo = ApoParams {
        s_n: 1.0,
        theta_n: 1.0,
        phi_n: 1.0,
        b_n: 12.0,
        w_n: 5.0,
        c_n: 1.0,
        demand: DemandDistribution::uniform(0.0, 10.0),
    };
    let s = Scenario::new(
        MnoParams {
            s0: 0.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 1.3, q: 0.1 }),
        },
        vec![apo; 4],
    )?;
    let before = GroupingStructure::singletons(4);
    let after = GroupingStructure::parse("[1],[2,3],[4]", 4)?;
    let report = grouping_report(&s, &NbsConfig::default(), &before, &after)?;
    println!("{before} -> {after}");
    for cmp in [&report.sequential, &report.concurrent] {
        println!("{}: operator {:.4} -> {:.4}", cmp.protocol, cmp.a.mno_payoff, cmp.b.mno_payoff);
        for d in &cmp.blocks {
            let members: Vec<usize> = d.members.iter().map(|i| i + 1).collect();
            println!("  {members:?} {:?}: {:.4} -> {:.4}", d.role, d.pi_a, d.pi_b);
        }
    }
    Ok(())
}
