//! Realizes closed geodesics on a punctured torus with given traces and
//! reports lengths, crossings and angles.
//!
//! cargo run --release --example geodesics -- 3 4 aabb

use curvecount::freegroup::CyclicWord;
use curvecount::hyperbolic::{arc_self_intersection, PuncturedTorusStructure};

fn main() -> curvecount::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (x, y, word) = match &args[..] {
        [x, y, w] => (x.parse().unwrap(), y.parse().unwrap(), w.clone()),
        _ => (3.0, 3.0, "aabb".to_string()),
    };
    let s = PuncturedTorusStructure::from_traces(x, y)?;
    println!("traces {:?}, commutator trace {:.6}", s.traces(), s.commutator_trace());
    let w: CyclicWord = word.parse()?;
    let g = s.realize(&w)?;
    println!("{w}: length {:.9}, trace {:.6}", g.length, g.trace);
    println!("self-intersections {} (combinatorial count {})", g.self_intersection(), arc_self_intersection(&w)?);
    for c in &g.crossings {
        println!("  crossing at parameters ({:.6}, {:.6}), angle {:.6}", c.parameters.0, c.parameters.1, c.angle);
    }
    let v: CyclicWord = "ab".parse()?;
    println!("i(ab, {w}) = {}", s.intersection(&v, &w)?);
    Ok(())
}
