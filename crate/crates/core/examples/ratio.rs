//! Compares orbit counts of one curve on two punctured tori with the
//! corresponding ratio of simple curve counts.

use curvecount::census::{geometric_checkpoints, ratio_experiment};
use curvecount::hyperbolic::PuncturedTorusStructure;

fn main() -> curvecount::Result<()> {
    let x1 = PuncturedTorusStructure::from_traces(3.0, 3.0)?;
    let x2 = PuncturedTorusStructure::from_traces(3.0, 4.0)?;
    let l_max = 100.0;
    let table = ratio_experiment(&x1, &x2, &"aab".parse()?, l_max, &geometric_checkpoints(l_max, 1.25, 6))?;
    for r in &table.rows {
        println!(
            "L = {:8.3}  type ratio {:.4}  simple ratio {:.4}  difference {:.4}",
            r.l,
            r.type_ratio(),
            r.simple_ratio(),
            r.difference()
        );
    }
    Ok(())
}
