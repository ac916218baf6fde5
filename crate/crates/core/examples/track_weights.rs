//! Switch equations, the crossing lower bound, and the defect map of the
//! torus track.

use curvecount::tracks::{crossing_lower_bound, switch_kernel, torus_defect_map, Track, WeightVector};

const TRACK: &str = "track v1
edge a track
edge b track
edge c track
edge d extra
vertex v1 c.start d.start | a.start b.start d.end
vertex v2 c.end | a.end b.end
crossing d d 1
";

fn main() -> curvecount::Result<()> {
    let torus = Track::torus();
    println!("switch kernel of the torus track: {:?}", switch_kernel(&torus));

    let t: Track = TRACK.parse()?;
    for d in 0..4 {
        let w = WeightVector(vec![1, 2, 3, d]);
        println!("omega = {w}: at least {} crossings", crossing_lower_bound(&t, &w)?);
    }

    let mut w = [1, 1, 3];
    for _ in 0..3 {
        let next = torus_defect_map(w)?;
        println!("{w:?} -> {next:?}");
        w = next;
    }
    Ok(())
}
