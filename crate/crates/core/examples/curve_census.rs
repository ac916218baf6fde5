//! Counts the mapping class orbit of a curve by length and
//! estimates its growth constant.
//!
//! cargo run --release --example curve_census -- aab 120

use curvecount::census::{type_census, CensusConfig};
use curvecount::hyperbolic::PuncturedTorusStructure;

fn main() -> curvecount::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed = args.first().map(String::as_str).unwrap_or("aab");
    let l_max: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(80.0);
    let cfg = CensusConfig::new(PuncturedTorusStructure::modular(), seed.parse()?, l_max);
    let r = type_census(&cfg)?;
    println!("seed {} (self-intersection {})", r.seed, r.seed_self_intersection);
    for row in &r.rows {
        println!("L = {:9.4}  N = {:8}  N/L^2 = {:.6}  certified {}", row.l, row.n, row.normalized(), row.certified);
    }
    if let Some((c, spread)) = r.growth_constant() {
        println!("N(L)/L^2 -> {c:.5} (spread {spread:.5})");
    }
    println!("{} classes explored, longest word {}", r.classes_discovered, r.max_word_length);
    Ok(())
}
