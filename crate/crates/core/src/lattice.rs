//! The semigroup SL₂ℕ acting on the open positive quadrant of ℤ².
//!
//! SL₂ℕ is freely generated by `U = (1 1; 0 1)` and `D = (1 0; 1 1)`. Orbits
//! are binary trees: every point `(x, y)` has the two children `U·(x,y) =
//! (x+y, y)` and `D·(x,y) = (x, x+y)`, and walking back up the tree is the
//! subtractive Euclidean algorithm. The top of that walk is the orbit root,
//! which is always a diagonal point `(g, g)` with `g = gcd(x, y)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℕ₊², the torus coordinates of an integral measured lamination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    x: u64,
    y: u64,
}

impl LatticePoint {
    pub fn new(x: u64, y: u64) -> Result<Self> {
        if x == 0 || y == 0 {
            return Err(Error::NonPositivePoint { x, y });
        }
        Ok(Self { x, y })
    }

    #[inline]
    pub fn x(self) -> u64 {
        self.x
    }

    #[inline]
    pub fn y(self) -> u64 {
        self.y
    }

    pub fn norm(self, norm: Norm) -> Result<u64> {
        match norm {
            Norm::Sum => self
                .x
                .checked_add(self.y)
                .ok_or(Error::Overflow("computing a sum norm")),
            Norm::Max => Ok(self.x.max(self.y)),
        }
    }

    pub fn transpose(self) -> Self {
        Self { x: self.y, y: self.x }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Sum,
    Max,
}

/// One of the two free generators of SL₂ℕ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `(1 1; 0 1)`: `(x, y) ↦ (x + y, y)`.
    Upper,
    /// `(1 0; 1 1)`: `(x, y) ↦ (x, x + y)`.
    Lower,
}

/// A matrix `(a b; c d)` with non-negative entries and determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SemigroupElement {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

impl SemigroupElement {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let ad = (a as u128) * (d as u128);
        let bc = (b as u128) * (c as u128);
        if ad != bc + 1 {
            return Err(Error::Precondition(format!(
                "({a} {b}; {c} {d}) does not have determinant 1"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn generator(g: Generator) -> Self {
        match g {
            Generator::Upper => Self { a: 1, b: 1, c: 0, d: 1 },
            Generator::Lower => Self { a: 1, b: 0, c: 1, d: 1 },
        }
    }

    pub fn entries(self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_word(word: &[Generator]) -> Result<Self> {
        word.iter()
            .try_fold(Self::IDENTITY, |acc, &g| acc.mul(Self::generator(g)))
    }

    pub fn mul(self, rhs: Self) -> Result<Self> {
        let f = |p: u64, q: u64, r: u64, s: u64| -> Result<u64> {
            p.checked_mul(q)
                .and_then(|u| r.checked_mul(s).and_then(|v| u.checked_add(v)))
                .ok_or(Error::Overflow("multiplying semigroup elements"))
        };
        Ok(Self {
            a: f(self.a, rhs.a, self.b, rhs.c)?,
            b: f(self.a, rhs.b, self.b, rhs.d)?,
            c: f(self.c, rhs.a, self.d, rhs.c)?,
            d: f(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    pub fn transpose(self) -> Self {
        Self { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn apply(self, p: LatticePoint) -> Result<LatticePoint> {
        let f = |m: u64, n: u64| -> Result<u64> {
            m.checked_mul(p.x)
                .and_then(|u| n.checked_mul(p.y).and_then(|v| u.checked_add(v)))
                .ok_or(Error::Overflow("applying a semigroup element"))
        };
        LatticePoint::new(f(self.a, self.b)?, f(self.c, self.d)?)
    }

    /// The unique factorization as a word in the generators, leftmost factor
    /// first. Peels generators off the left by comparing rows.
    pub fn factor(self) -> Vec<Generator> {
        let mut m = self;
        let mut word = Vec::new();
        while m != Self::IDENTITY {
            // U·N has first row = row1 + row2, so its first row dominates.
            if m.a >= m.c && m.b >= m.d {
                word.push(Generator::Upper);
                m = Self { a: m.a - m.c, b: m.b - m.d, c: m.c, d: m.d };
            } else {
                word.push(Generator::Lower);
                m = Self { a: m.a, b: m.b, c: m.c - m.a, d: m.d - m.b };
            }
        }
        word
    }
}

/// Images of `p` under the two generators, `((x, x+y), (x+y, y))`.
pub fn children(p: LatticePoint) -> Result<(LatticePoint, LatticePoint)> {
    let s = p.norm(Norm::Sum)?;
    Ok((
        LatticePoint { x: p.x, y: s },
        LatticePoint { x: s, y: p.y },
    ))
}

/// The minimal point `q` with `p ∈ SL₂ℕ·q`.
pub fn orbit_root(p: LatticePoint) -> LatticePoint {
    let (mut x, mut y) = (p.x, p.y);
    while x != y {
        if x > y {
            let r = x % y;
            x = if r == 0 { y } else { r };
        } else {
            let r = y % x;
            y = if r == 0 { x } else { r };
        }
    }
    LatticePoint { x, y }
}

/// Whether `q` lies on the subtractive Euclid trajectory starting at `p`,
/// i.e. whether `p = A·q` for some `A ∈ SL₂ℕ`.
pub fn in_orbit(p: LatticePoint, q: LatticePoint) -> bool {
    let (mut x, mut y) = (p.x, p.y);
    loop {
        if (x, y) == (q.x, q.y) {
            return true;
        }
        match x.cmp(&y) {
            Ordering::Equal => return false,
            Ordering::Greater => {
                // Trajectory visits (x - k·y, y) for k = 1..=steps.
                let r = x % y;
                let last = if r == 0 { y } else { r };
                if q.y == y && q.x < x && q.x >= last && (x - q.x) % y == 0 {
                    return true;
                }
                x = last;
            }
            Ordering::Less => {
                let r = y % x;
                let last = if r == 0 { x } else { r };
                if q.x == x && q.y < y && q.y >= last && (y - q.y) % x == 0 {
                    return true;
                }
                y = last;
            }
        }
    }
}

/// Depth-first walk of the orbit tree below `root`. `descend` decides, for
/// each visited point, whether its subtree is explored further. Coordinates
/// never decrease down the tree, so callers may prune on any coordinate-wise
/// monotone bound.
pub fn walk_orbit<F>(root: LatticePoint, mut descend: F) -> Result<()>
where
    F: FnMut(LatticePoint) -> bool,
{
    let mut stack = vec![root];
    while let Some(p) = stack.pop() {
        if descend(p) {
            let (l, r) = children(p)?;
            stack.push(r);
            stack.push(l);
        }
    }
    Ok(())
}

/// All points of the orbit of `root` whose norm is at most `bound`, each
/// once, in lexicographic order.
pub fn enumerate_orbit(root: LatticePoint, bound: u64, norm: Norm) -> Result<Vec<LatticePoint>> {
    let mut out = Vec::new();
    if root.norm(norm)? > bound {
        return Ok(out);
    }
    let mut stack = vec![root];
    while let Some(p) = stack.pop() {
        out.push(p);
        let (l, r) = children(p)?;
        for c in [l, r] {
            if c.norm(norm)? <= bound {
                stack.push(c);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// A lazily generated family of orbit roots.
///
/// Implementations must return finitely many roots for every bound and must
/// report a bound on `Σ 1/(p·q)` over the roots they have not yet returned,
/// which is what makes truncating the family safe.
pub trait RootFamily: Send + Sync {
    fn name(&self) -> String;

    /// Roots `(p, q)` with `p + q <= sum_bound`, sorted.
    fn roots_up_to(&self, sum_bound: u64) -> Vec<LatticePoint>;

    /// Upper bound on `Σ 1/(p q)` over roots with `p + q > sum_bound`.
    fn tail_bound(&self, sum_bound: u64) -> f64;

    /// Exact density of the union of the orbits, when known in closed form.
    fn closed_form(&self) -> Option<crate::density::ExactDensity> {
        None
    }
}

/// The roots `(d·m, d·m)` for `d ≥ 1`: the set of points whose gcd is a
/// multiple of `m`. With `m = 1` this is all of ℕ₊².
#[derive(Clone, Copy, Debug)]
pub struct DiagonalMultiples {
    pub step: u64,
}

impl RootFamily for DiagonalMultiples {
    fn name(&self) -> String {
        if self.step == 1 {
            "all".to_string()
        } else {
            format!("gcd-multiple-of-{}", self.step)
        }
    }

    fn roots_up_to(&self, sum_bound: u64) -> Vec<LatticePoint> {
        let step = self.step.max(1);
        (1..)
            .map(|d| d * step)
            .take_while(|&g| 2 * g <= sum_bound)
            .map(|g| LatticePoint { x: g, y: g })
            .collect()
    }

    fn tail_bound(&self, sum_bound: u64) -> f64 {
        // Σ_{d > n} 1/(m d)² < 1/(m² n) where n = ⌊bound / 2m⌋.
        let step = self.step.max(1) as f64;
        let n = (sum_bound / (2 * self.step.max(1))) as f64;
        if n < 1.0 {
            return (std::f64::consts::PI.powi(2) / 6.0) / (step * step);
        }
        1.0 / (step * step * n)
    }

    fn closed_form(&self) -> Option<crate::density::ExactDensity> {
        let step = self.step.max(1);
        Some(crate::density::ExactDensity::Plain(num_rational::BigRational::new(
            1.into(),
            num_bigint::BigInt::from(step) * num_bigint::BigInt::from(step),
        )))
    }
}

/// Where an [`InvariantSet`] gets its orbit roots from.
pub enum Roots {
    Finite(Vec<LatticePoint>),
    Family(Box<dyn RootFamily>),
}

/// An SL₂ℕ-invariant subset of ℕ₊², stored as the disjoint union of the
/// orbits of its roots.
pub struct InvariantSet {
    roots: Roots,
}

impl fmt::Debug for InvariantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.roots {
            Roots::Finite(r) => f.debug_tuple("InvariantSet").field(r).finish(),
            Roots::Family(fam) => f.debug_tuple("InvariantSet").field(&fam.name()).finish(),
        }
    }
}

impl InvariantSet {
    /// Builds a set from explicit roots, rejecting any root that lies in the
    /// orbit of another.
    pub fn from_roots(mut roots: Vec<LatticePoint>) -> Result<Self> {
        roots.sort_unstable();
        roots.dedup();
        for (i, &p) in roots.iter().enumerate() {
            for (j, &q) in roots.iter().enumerate() {
                if i != j && in_orbit(p, q) {
                    return Err(Error::Precondition(format!(
                        "root {p} lies in the orbit of root {q}"
                    )));
                }
            }
        }
        Ok(Self { roots: Roots::Finite(roots) })
    }

    pub fn orbit(root: LatticePoint) -> Self {
        Self { roots: Roots::Finite(vec![root]) }
    }

    pub fn from_family(family: Box<dyn RootFamily>) -> Self {
        Self { roots: Roots::Family(family) }
    }

    /// All of ℕ₊², the union of the diagonal orbits.
    pub fn full_lattice() -> Self {
        Self::from_family(Box::new(DiagonalMultiples { step: 1 }))
    }

    pub fn roots(&self) -> &Roots {
        &self.roots
    }

    /// Roots that can reach a point with `x + y <= sum_bound`.
    pub fn roots_up_to(&self, sum_bound: u64) -> Vec<LatticePoint> {
        match &self.roots {
            Roots::Finite(r) => r
                .iter()
                .copied()
                .filter(|p| p.x.saturating_add(p.y) <= sum_bound)
                .collect(),
            Roots::Family(f) => f.roots_up_to(sum_bound),
        }
    }

    /// Membership by root lookup.
    pub fn contains(&self, p: LatticePoint) -> bool {
        let s = p.x.saturating_add(p.y);
        self.roots_up_to(s).into_iter().any(|r| in_orbit(p, r))
    }

    pub fn describe(&self) -> String {
        match &self.roots {
            Roots::Finite(r) => r
                .iter()
                .map(|p| format!("{},{}", p.x, p.y))
                .collect::<Vec<_>>()
                .join(";"),
            Roots::Family(f) => f.name(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: u64, y: u64) -> LatticePoint {
        LatticePoint::new(x, y).unwrap()
    }

    /// Step-by-step subtractive trajectory.
    fn trajectory(p: LatticePoint) -> Vec<LatticePoint> {
        let (mut x, mut y) = (p.x, p.y);
        let mut out = vec![p];
        while x != y {
            if x > y {
                x -= y
            } else {
                y -= x
            }
            out.push(pt(x, y));
        }
        out
    }

    #[test]
    fn root_examples() {
        assert_eq!(orbit_root(pt(5, 3)), pt(1, 1));
        assert_eq!(orbit_root(pt(7, 7)), pt(7, 7));
        assert_eq!(orbit_root(pt(10, 4)), pt(2, 2));
        assert_eq!(trajectory(pt(10, 4)), vec![pt(10, 4), pt(6, 4), pt(2, 4), pt(2, 2)]);
    }

    #[test]
    fn membership_examples() {
        assert!(in_orbit(pt(4, 2), pt(2, 2)));
        assert!(in_orbit(pt(9, 4), pt(9, 4)));
        assert!(!in_orbit(pt(2, 2), pt(1, 1)));
    }

    #[test]
    fn zero_coordinates_rejected() {
        assert!(LatticePoint::new(0, 3).is_err());
        assert!(LatticePoint::new(3, 0).is_err());
    }

    #[test]
    fn fast_membership_matches_subtractive_oracle() {
        for a in 1..=100u64 {
            for b in 1..=100u64 {
                let p = pt(a, b);
                let traj = trajectory(p);
                assert_eq!(orbit_root(p), *traj.last().unwrap());
                for c in 1..=100u64 {
                    for d in 1..=100u64 {
                        let q = pt(c, d);
                        assert_eq!(in_orbit(p, q), traj.contains(&q), "{p} {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn children_examples() {
        assert_eq!(children(pt(1, 1)).unwrap(), (pt(1, 2), pt(2, 1)));
        assert_eq!(children(pt(1, 2)).unwrap(), (pt(1, 3), pt(3, 2)));
        assert!(children(pt(u64::MAX, 1)).is_err());
    }

    #[test]
    fn depth_ten_tree_is_free_and_coprime() {
        let mut level = vec![pt(1, 1)];
        let mut all = level.clone();
        for _ in 0..10 {
            level = level
                .iter()
                .flat_map(|&p| {
                    let (l, r) = children(p).unwrap();
                    [l, r]
                })
                .collect();
            all.extend(&level);
        }
        assert_eq!(all.len(), (1 << 11) - 1);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
        assert!(all.iter().all(|p| num_integer::gcd(p.x, p.y) == 1));
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            enumerate_orbit(pt(1, 1), 3, Norm::Sum).unwrap(),
            vec![pt(1, 1), pt(1, 2), pt(2, 1)]
        );
        assert_eq!(enumerate_orbit(pt(2, 2), 4, Norm::Sum).unwrap(), vec![pt(2, 2)]);
        assert!(enumerate_orbit(pt(3, 3), 5, Norm::Sum).unwrap().is_empty());
        for l in [10u64, 100, 1000] {
            let n = enumerate_orbit(pt(1, 1), l, Norm::Sum).unwrap().len() as u64;
            assert!(2 * n <= l * l, "L={l}: {n}");
        }
    }

    #[test]
    fn max_norm_enumeration_is_coprime_box() {
        let pts = enumerate_orbit(pt(1, 1), 30, Norm::Max).unwrap();
        let expected: Vec<_> = (1..=30u64)
            .flat_map(|x| (1..=30u64).map(move |y| (x, y)))
            .filter(|&(x, y)| num_integer::gcd(x, y) == 1)
            .map(|(x, y)| pt(x, y))
            .collect();
        assert_eq!(pts, expected);
    }

    #[test]
    fn element_factorization_round_trips() {
        use Generator::*;
        let word = [Upper, Lower, Lower, Upper, Upper, Upper, Lower];
        let m = SemigroupElement::from_word(&word).unwrap();
        assert_eq!(m.factor(), word.to_vec());
        assert_eq!(SemigroupElement::IDENTITY.factor(), vec![]);
        assert!(SemigroupElement::new(2, 1, 1, 2).is_err());
        let t = m.transpose();
        assert!(SemigroupElement::new(t.a, t.b, t.c, t.d).is_ok());
    }

    #[test]
    fn invariant_set_rejects_nested_roots() {
        assert!(InvariantSet::from_roots(vec![pt(1, 1), pt(2, 3)]).is_err());
        assert!(InvariantSet::from_roots(vec![pt(1, 2), pt(2, 1)]).is_ok());
    }
}
