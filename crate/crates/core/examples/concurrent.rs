//! Concurrent bargaining: every APO gets half its marginal contribution.

use offload_bargain::bargaining::{concurrent_marginal, concurrent_nbs, sequential_nbs, NbsConfig};
use offload_bargain::{ApoParams, CostModel, CostShape, DemandDistribution, GroupingStructure, MnoParams, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apos = (0..4)
        .map(|i| ApoParams {
            s_n: 2.0 + i as f64,
            theta_n: 1.0,
            phi_n: 1.0,
            b_n: 10.0,
            w_n: 3.0,
            c_n: 0.3 + 0.1 * i as f64,
            demand: DemandDistribution::uniform(0.0, 12.0),
        })
        .collect();
    let s = Scenario::new(
        MnoParams {
            s0: 2.0,
            theta0: 1.0,
            cost_model: CostModel::CoupledTotal(CostShape::Quadratic { a: 1.5, q: 0.1 }),
        },
        apos,
    )?;
    let g = GroupingStructure::singletons(4);
    let cfg = NbsConfig::default();
    let con = concurrent_nbs(&s, &g, &cfg)?;
    let seq = sequential_nbs(&s, &g, &cfg)?;
    for i in 0..4 {
        println!(
            "APO {}: concurrent {:.4} (marginal {:.4}), sequential {:.4}",
            i + 1,
            con.pi[i],
            concurrent_marginal(&s, &con.x, &[i]),
            seq.pi[i]
        );
    }
    println!("operator: concurrent {:.4}, sequential {:.4}", con.mno_payoff, seq.mno_payoff);
    Ok(())
}
