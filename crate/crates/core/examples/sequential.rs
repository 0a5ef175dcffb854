//! Sequential bargaining: earlier APOs capture more, the operator's share
//! does not depend on the order.

use offload_bargain::bargaining::{divide, NbsConfig};
use offload_bargain::welfare::SymmetricTableWelfare;
use offload_bargain::{GroupingStructure, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Four identical APOs; welfare depends only on how many offload.
    let w = SymmetricTableWelfare::new(4, vec![0.0, 1.0, 1.8, 2.4, 2.8]);
    let x = [1.0; 4];
    let cfg = NbsConfig::default();
    for order in [[0, 1, 2, 3], [3, 2, 1, 0]] {
        let g = GroupingStructure::from_order(&order, 4)?;
        let d = divide(&w, &x, &g, Protocol::Sequential, &cfg)?;
        let pi: Vec<String> = d.pi.iter().map(|v| format!("{v:.4}")).collect();
        println!("order {g}: pi = [{}], operator {:.4}", pi.join(", "), d.mno_payoff);
    }
    Ok(())
}
