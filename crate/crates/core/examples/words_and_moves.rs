//! Cyclic words in the free group on a, b: canonical forms, Christoffel
//! words of slopes, and the mapping class moves acting on them.

use curvecount::freegroup::{christoffel, CyclicWord, MappingClass, Move};

fn main() -> curvecount::Result<()> {
    for (p, q) in [(1, 0), (0, 1), (1, 1), (2, 3), (3, 5), (-2, 5)] {
        let w = christoffel(p, q)?;
        println!("slope ({p:2}, {q}) -> {w:<10} homology {:?}", w.homology());
    }

    let w: CyclicWord = "baab".parse()?;
    println!("baab canonicalizes to {w}, primitive: {}", w.is_primitive());
    let sq: CyclicWord = "abab".parse()?;
    println!("abab = {} to the power {}", sq.primitive_root().0, sq.primitive_root().1);
    println!("commutator abAB peripheral: {}", CyclicWord::commutator_power(1).is_peripheral());

    let phi = MappingClass::from_moves(&[Move::T, Move::S, Move::T]);
    println!("T S T acts on homology by {:?} (det {})", phi.matrix(), phi.determinant());
    let seed: CyclicWord = "aab".parse()?;
    println!("T S T (aab) = {}", phi.apply(&seed));
    Ok(())
}
