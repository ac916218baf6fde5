//! Counts simple closed geodesics by length and compares with the orbit
//! census of the simple seed `ab`.

use curvecount::census::{simple_count, type_census, CensusConfig, CountMode};
use curvecount::hyperbolic::PuncturedTorusStructure;

fn main() -> curvecount::Result<()> {
    let x = PuncturedTorusStructure::modular();
    let cfg = CensusConfig::new(x.clone(), "ab".parse()?, 22.0);
    let census = type_census(&cfg)?;
    for r in &census.rows {
        let simple = simple_count(&x, r.l, CountMode::Primitive);
        println!("L = {:8.4}  census {:5}  simple {:5}  certified {}", r.l, r.n, simple, r.certified);
    }
    Ok(())
}
