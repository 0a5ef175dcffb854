//! Generate a random hotspot scenario, save it and load it back.

use offload_bargain::scenario::{generate, hotspot_user_count, load, save, GeneratorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GeneratorSpec { seed: 7, n_apos: 20, ..GeneratorSpec::default() };
    let s = generate(&spec)?;
    println!("{} APOs, {} users in hotspots, macro-only traffic {:.3}", s.n(), hotspot_user_count(&spec), s.mno.s0);
    for (i, a) in s.apos.iter().take(5).enumerate() {
        println!("  APO {}: traffic {:.3}, bandwidth {}, theta {:.3}, c {:.3}", i + 1, a.s_n, a.b_n, a.theta_n, a.c_n);
    }
    let path = std::env::temp_dir().join("offload_generated.json");
    save(&s, &path)?;
    assert_eq!(load(&path)?, s);
    println!("round trip through {} is exact", path.display());
    Ok(())
}
