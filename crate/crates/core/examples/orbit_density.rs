//! Counts the orbit of a lattice point under SL2(N) in scaled regions and
//! compares with the exact density.
//!
//! cargo run --release --example orbit_density -- 1 2

use curvecount::density::{density_estimate, Region};
use curvecount::lattice::{InvariantSet, LatticePoint};

fn main() -> curvecount::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (x, y) = match args[..] {
        [x, y] => (x, y),
        _ => (1, 1),
    };
    let set = InvariantSet::orbit(LatticePoint::new(x, y)?);
    for (name, region) in [("unit square", Region::unit_square()), ("x + y <= 1", Region::unit_triangle())] {
        let report = density_estimate(&set, &region, &[250, 500, 1000, 2000], 1e-9)?;
        let exact = report.exact_density.as_ref().unwrap();
        println!("orbit of ({x}, {y}) in {name}: exact {} = {:.9}", exact.symbolic(), exact.to_f64());
        for e in &report.empirical_counts {
            println!("  L = {:5}  count = {:9}  count/(L^2 area) = {:.9}", e.l, e.count, e.normalized);
        }
    }
    Ok(())
}
