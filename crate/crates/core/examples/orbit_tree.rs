//! Walks the Calkin-Wilf tree of an orbit: roots, children, and the
//! partition of a box into orbits of diagonal points.

use std::collections::BTreeMap;

use curvecount::lattice::{children, enumerate_orbit, orbit_root, LatticePoint, Norm};

fn main() -> curvecount::Result<()> {
    let p = LatticePoint::new(21, 13)?;
    println!("root of {p:?} is {:?}", orbit_root(p));
    let (l, r) = children(LatticePoint::new(2, 3)?)?;
    println!("children of (2, 3): {l:?} {r:?}");

    let orbit = enumerate_orbit(LatticePoint::new(1, 2)?, 12, Norm::Max)?;
    println!("orbit of (1, 2) with max(x, y) <= 12: {} points", orbit.len());

    // Every point of [1, n]^2 lies in the orbit of exactly one (g, g).
    let n = 60;
    let mut by_root: BTreeMap<u64, usize> = BTreeMap::new();
    for x in 1..=n {
        for y in 1..=n {
            let r = orbit_root(LatticePoint::new(x, y)?);
            assert_eq!(r.x(), r.y());
            *by_root.entry(r.x()).or_default() += 1;
        }
    }
    for (g, count) in by_root.iter().take(5) {
        println!("root ({g}, {g}) owns {count} points of [1, {n}]^2");
    }
    Ok(())
}
