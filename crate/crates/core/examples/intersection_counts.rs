//! Counts curves in an orbit by intersection number with a filling
//! weighted multicurve instead of by length.

use curvecount::census::{intersection_census, Ladder, WeightedMulticurve};
use curvecount::freegroup::christoffel;

fn main() -> curvecount::Result<()> {
    let lambda = WeightedMulticurve::new(vec![(christoffel(1, 0)?, 1), (christoffel(0, 1)?, 1), (christoffel(1, 1)?, 1)])?;
    let checkpoints: Vec<f64> = [10.0, 20.0, 40.0, 80.0].to_vec();
    let ladder = Ladder { slack: 1.3, step: 1.15, steps: 8 };
    let r = intersection_census(&lambda, &"aab".parse()?, &checkpoints, ladder, 5_000_000)?;
    for row in &r.rows {
        println!("i <= {:5}  N = {:7}  N/L^2 = {:.5}  certified {}", row.l, row.n, row.normalized(), row.certified);
    }
    Ok(())
}
