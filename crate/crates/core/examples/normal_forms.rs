//! Counts normal forms of k crossings on weighted train tracks and checks
//! them against 1, V/2 and V(V+6)/8.

use std::path::Path;

use curvecount::tracks::{count_normal_forms, NormalFormOptions, Track, WeightVector};

fn main() -> curvecount::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tracks");
    let fleet = [
        ("torus.track", vec![12, 13, 25]),
        ("v4.track", vec![13, 25, 13, 25, 12, 12]),
        ("v6.track", vec![12, 25, 24, 25, 37, 13, 12, 12, 13]),
    ];
    for (file, w) in fleet {
        let track: Track = std::fs::read_to_string(dir.join(file))?.parse()?;
        let w = WeightVector(w);
        for k in 0..=2 {
            let c = count_normal_forms(&track, &w, k, &NormalFormOptions::default())?;
            println!(
                "{file:12} V = {}  k = {k}  normal forms {:2}  expected {:2}  ({} open gap lines, {} tiles)",
                track.vertices().len(),
                c.count,
                c.closed_form.unwrap(),
                c.open_lines,
                c.tiles
            );
        }
    }
    Ok(())
}
