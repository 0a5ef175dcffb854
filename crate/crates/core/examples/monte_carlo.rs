//! Exact enumeration against sampling for the first APO's averaged marginal
//! welfare when many APOs bargain after it.

use offload_bargain::bargaining::{virtual_marginal_welfare, NbsConfig};
use offload_bargain::optimizer::socially_optimal;
use offload_bargain::scenario::{generate, GeneratorSpec};
use offload_bargain::GroupingStructure;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = generate(&GeneratorSpec { seed: 1, n_apos: 18, ..GeneratorSpec::default() })?;
    let cfg = NbsConfig::default();
    let x = socially_optimal(&s, &cfg.optimizer)?;
    // Put the largest offloader first so its marginal is not trivially zero.
    let mut order: Vec<usize> = (0..s.n()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let g = GroupingStructure::from_order(&order, s.n())?;
    let exact = virtual_marginal_welfare(&s, &x, &g, 0, &cfg)?;
    println!("exact   {:.6}", exact.mean);
    for workers in [1, 4] {
        let sampled = NbsConfig { exact_cutoff: 8, mc_samples: 50_000, seed: 3, workers, ..cfg };
        let est = virtual_marginal_welfare(&s, &x, &g, 0, &sampled)?;
        println!("sampled {:.6} +- {:.6} ({workers} workers)", est.mean, est.stderr.unwrap_or(0.0));
    }
    Ok(())
}
