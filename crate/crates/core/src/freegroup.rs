//! Conjugacy classes in the free group `F₂ = ⟨a, b⟩`, the outer action of
//! the (extended) mapping class group on them, and Christoffel words.
//!
//! Capital letters denote inverses. A free homotopy class of unoriented
//! curve is a conjugacy class up to inversion, represented by a
//! [`CyclicWord`] in canonical form: the least rotation, minimized again over
//! the inverse word, in the letter order `a < A < b < B`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A generator or inverse generator of `F₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    AInv = 1,
    B = 2,
    BInv = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    #[inline]
    pub fn inverse(self) -> Self {
        Self::from_index(self as u8 ^ 1)
    }

    #[inline]
    pub fn from_index(i: u8) -> Self {
        match i & 3 {
            0 => Letter::A,
            1 => Letter::AInv,
            2 => Letter::B,
            _ => Letter::BInv,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }
}

/// Parses a string over `{a, A, b, B}`, ignoring whitespace.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            Letter::from_char(c)
                .ok_or_else(|| Error::InvalidWord(format!("unexpected character {c:?} in {s:?}")))
        })
        .collect()
}

pub fn letters_to_string(w: &[Letter]) -> String {
    w.iter().map(|l| l.to_char()).collect()
}

/// Free reduction.
pub fn free_reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Free then cyclic reduction.
pub fn cyclic_reduce(w: &[Letter]) -> Vec<Letter> {
    let r = free_reduce(w);
    let mut i = 0;
    let mut j = r.len();
    while j - i >= 2 && r[i] == r[j - 1].inverse() {
        i += 1;
        j -= 1;
    }
    r[i..j].to_vec()
}

pub fn inverse_word(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// Start index of the lexicographically least rotation (Booth).
pub fn least_rotation(w: &[Letter]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let s: Vec<Letter> = w.iter().chain(w.iter()).copied().collect();
    let mut f = vec![-1isize; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = s[j];
        let mut i = f[j - k - 1];
        while i != -1 && sj != s[k + i as usize + 1] {
            if sj < s[k + i as usize + 1] {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != s[k] {
            if sj < s[k] {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

fn rotated(w: &[Letter], start: usize) -> Vec<Letter> {
    w[start..].iter().chain(w[..start].iter()).copied().collect()
}

/// Smallest period of the cyclic word, from the KMP failure function.
fn primitive_root_len(w: &[Letter]) -> usize {
    let n = w.len();
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && w[i] != w[k] {
            k = fail[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

/// A conjugacy class of `F₂` up to inversion, stored in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// Cyclic reduction, least rotation, then minimum over inversion.
    pub fn canonicalize(w: &[Letter]) -> Result<Self> {
        let r = cyclic_reduce(w);
        if r.is_empty() {
            return Err(Error::InvalidWord("word reduces to the identity".into()));
        }
        Ok(Self::from_reduced(&r))
    }

    /// Canonical form of an already cyclically reduced, nonempty word.
    pub(crate) fn from_reduced(r: &[Letter]) -> Self {
        let fwd = rotated(r, least_rotation(r));
        let inv = inverse_word(r);
        let bwd = rotated(&inv, least_rotation(&inv));
        Self { letters: fwd.min(bwd) }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::canonicalize(&parse_letters(s)?)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Not a proper power.
    pub fn is_primitive(&self) -> bool {
        primitive_root_len(&self.letters) == self.letters.len()
    }

    /// `(root, exponent)` with `self = root^exponent` and `root` primitive.
    pub fn primitive_root(&self) -> (CyclicWord, usize) {
        let p = primitive_root_len(&self.letters);
        (
            CyclicWord::from_reduced(&self.letters[..p]),
            self.letters.len() / p,
        )
    }

    /// Abelianization: exponent sums of `a` and `b` (sign fixed by the
    /// canonical orientation).
    pub fn homology(&self) -> (i64, i64) {
        homology_of(&self.letters)
    }

    /// The commutator class `[a, b]^k`, which is the puncture for `k = 1`.
    pub fn commutator_power(k: usize) -> Self {
        let base = parse_letters("abAB").expect("static word");
        let w: Vec<Letter> = base.iter().copied().cycle().take(4 * k).collect();
        Self::from_reduced(&w)
    }

    /// True iff the class is a power of the puncture class `[a, b]^{±1}`.
    pub fn is_peripheral(&self) -> bool {
        self.letters.len() % 4 == 0 && *self == Self::commutator_power(self.letters.len() / 4)
    }
}

pub fn homology_of(w: &[Letter]) -> (i64, i64) {
    w.iter().fold((0, 0), |(x, y), l| match l {
        Letter::A => (x + 1, y),
        Letter::AInv => (x - 1, y),
        Letter::B => (x, y + 1),
        Letter::BInv => (x, y - 1),
    })
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&letters_to_string(&self.letters))
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord({self})")
    }
}

impl FromStr for CyclicWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for CyclicWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CyclicWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CyclicWord::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Generators of the extended mapping class group `Out(F₂) ≅ GL₂ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    /// `a ↦ ab, b ↦ b`.
    T,
    /// `a ↦ aB, b ↦ b`.
    TInv,
    /// `a ↦ b, b ↦ A`.
    S,
    /// `a ↦ B, b ↦ a`.
    SInv,
    /// `a ↦ A, b ↦ b`, orientation reversing.
    I,
}

impl Move {
    pub const ALL: [Move; 5] = [Move::T, Move::TInv, Move::S, Move::SInv, Move::I];

    /// Images of `a` and `b`.
    pub fn images(self) -> [Vec<Letter>; 2] {
        use Letter::*;
        match self {
            Move::T => [vec![A, B], vec![B]],
            Move::TInv => [vec![A, BInv], vec![B]],
            Move::S => [vec![B], vec![AInv]],
            Move::SInv => [vec![BInv], vec![A]],
            Move::I => [vec![AInv], vec![B]],
        }
    }

    /// Induced action on homology, acting on column vectors `(#a, #b)`.
    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Move::T => [[1, 0], [1, 1]],
            Move::TInv => [[1, 0], [-1, 1]],
            Move::S => [[0, -1], [1, 0]],
            Move::SInv => [[0, 1], [-1, 0]],
            Move::I => [[-1, 0], [0, 1]],
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Move::T => Move::TInv,
            Move::TInv => Move::T,
            Move::S => Move::SInv,
            Move::SInv => Move::S,
            Move::I => Move::I,
        }
    }
}

/// A composite `m₁ ∘ m₂ ∘ … ∘ m_k` of moves with its images of the
/// generators and its homology matrix cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingClass {
    moves: Vec<Move>,
    image_a: Vec<Letter>,
    image_b: Vec<Letter>,
    matrix: [[i64; 2]; 2],
}

fn mat_mul(x: [[i64; 2]; 2], y: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn substitute(w: &[Letter], image_a: &[Letter], image_b: &[Letter]) -> Vec<Letter> {
    let inv_a = inverse_word(image_a);
    let inv_b = inverse_word(image_b);
    let mut out = Vec::with_capacity(w.len() * 2);
    for l in w {
        let img: &[Letter] = match l {
            Letter::A => image_a,
            Letter::AInv => &inv_a,
            Letter::B => image_b,
            Letter::BInv => &inv_b,
        };
        for &x in img {
            if out.last() == Some(&x.inverse()) {
                out.pop();
            } else {
                out.push(x);
            }
        }
    }
    out
}

impl MappingClass {
    pub fn identity() -> Self {
        Self {
            moves: Vec::new(),
            image_a: vec![Letter::A],
            image_b: vec![Letter::B],
            matrix: [[1, 0], [0, 1]],
        }
    }

    /// `moves[0] ∘ moves[1] ∘ …`: the last move acts first.
    pub fn from_moves(moves: &[Move]) -> Self {
        moves
            .iter()
            .fold(Self::identity(), |acc, &m| acc.compose(&Self::single(m)))
    }

    pub fn single(m: Move) -> Self {
        let [ia, ib] = m.images();
        Self { moves: vec![m], image_a: ia, image_b: ib, matrix: m.matrix() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let image_a = substitute(&other.image_a, &self.image_a, &self.image_b);
        let image_b = substitute(&other.image_b, &self.image_a, &self.image_b);
        let mut moves = self.moves.clone();
        moves.extend_from_slice(&other.moves);
        Self { moves, image_a, image_b, matrix: mat_mul(self.matrix, other.matrix) }
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    pub fn determinant(&self) -> i64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// Image of an arbitrary word, freely reduced.
    pub fn apply_letters(&self, w: &[Letter]) -> Vec<Letter> {
        substitute(w, &self.image_a, &self.image_b)
    }

    /// Image of a conjugacy class.
    pub fn apply(&self, w: &CyclicWord) -> CyclicWord {
        let img = self.apply_letters(w.letters());
        CyclicWord::canonicalize(&img).expect("automorphisms map nontrivial classes to nontrivial classes")
    }
}

/// Image of a class under a single move.
pub fn apply_move(m: Move, w: &CyclicWord) -> CyclicWord {
    let [ia, ib] = m.images();
    let img = substitute(w.letters(), &ia, &ib);
    CyclicWord::canonicalize(&img).expect("automorphisms map nontrivial classes to nontrivial classes")
}

/// Oriented Christoffel word of the primitive slope `(p, q)` with `p, q >= 0`,
/// built by Stern–Brocot descent: the word of a mediant is the concatenation
/// of the words of its two parents.
fn christoffel_positive(p: u64, q: u64) -> Vec<Letter> {
    let (mut left, mut right) = (((1u64, 0u64), vec![Letter::A]), ((0u64, 1u64), vec![Letter::B]));
    if (p, q) == (1, 0) {
        return left.1;
    }
    if (p, q) == (0, 1) {
        return right.1;
    }
    loop {
        let m = (left.0 .0 + right.0 .0, left.0 .1 + right.0 .1);
        let mut word = left.1.clone();
        word.extend_from_slice(&right.1);
        if m == (p, q) {
            return word;
        }
        // Compare slopes q/p and m.1/m.0.
        if (q as u128) * (m.0 as u128) < (m.1 as u128) * (p as u128) {
            right = (m, word);
        } else {
            left = (m, word);
        }
    }
}

/// Normalizes a nonzero integer vector to the representative of its `±`
/// class with `q > 0`, or `q = 0, p > 0`.
pub fn normalize_slope(p: i64, q: i64) -> (i64, i64) {
    if q < 0 || (q == 0 && p < 0) {
        (-p, -q)
    } else {
        (p, q)
    }
}

/// An oriented word realizing the simple class of slope `(p, q)`, with
/// homology exactly the normalized `(p, q)`.
pub fn christoffel_letters(p: i64, q: i64) -> Result<Vec<Letter>> {
    if (p, q) == (0, 0) || num_integer::gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let (p, q) = normalize_slope(p, q);
    let w = christoffel_positive(p.unsigned_abs(), q.unsigned_abs());
    if p < 0 {
        Ok(w
            .into_iter()
            .map(|l| if l == Letter::A { Letter::AInv } else { l })
            .collect())
    } else {
        Ok(w)
    }
}

/// The simple class of slope `(p, q)`.
pub fn christoffel(p: i64, q: i64) -> Result<CyclicWord> {
    Ok(CyclicWord::from_reduced(&christoffel_letters(p, q)?))
}

/// Every canonical class of length `1..=max_len`, sorted by length then
/// letters.
pub fn canonical_words(max_len: usize) -> Vec<CyclicWord> {
    fn extend(w: &mut Vec<Letter>, max_len: usize, out: &mut Vec<CyclicWord>) {
        if !w.is_empty() && w[0] != w[w.len() - 1].inverse() {
            let c = CyclicWord::from_reduced(w);
            if c.letters == *w {
                out.push(c);
            }
        }
        if w.len() == max_len {
            return;
        }
        for l in Letter::ALL {
            if w.last() == Some(&l.inverse()) {
                continue;
            }
            w.push(l);
            extend(w, max_len, out);
            w.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), max_len, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(s: &str) -> CyclicWord {
        CyclicWord::parse(s).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(cw("a b B a").to_string(), "aa");
        assert_eq!(cw("ba").to_string(), "ab");
        assert_eq!(cw("AB").to_string(), "ab");
        assert!(CyclicWord::parse("aA").is_err());
        assert!(CyclicWord::parse("abBA").is_err());
        assert!(CyclicWord::parse("ax").is_err());
    }

    #[test]
    fn canonical_form_is_conjugation_and_inversion_invariant() {
        let w = parse_letters("aabAbbaB").unwrap();
        let c = CyclicWord::canonicalize(&w).unwrap();
        for k in 0..w.len() {
            assert_eq!(CyclicWord::canonicalize(&rotated(&w, k)).unwrap(), c);
        }
        assert_eq!(CyclicWord::canonicalize(&inverse_word(&w)).unwrap(), c);
        let mut conj = vec![Letter::B];
        conj.extend(&w);
        conj.push(Letter::BInv);
        assert_eq!(CyclicWord::canonicalize(&conj).unwrap(), c);
        assert_eq!(CyclicWord::canonicalize(c.letters()).unwrap(), c);
    }

    #[test]
    fn least_rotation_matches_brute_force() {
        let w = parse_letters("bBaAbabAaBb").unwrap();
        let brute = (0..w.len()).map(|k| rotated(&w, k)).min().unwrap();
        assert_eq!(rotated(&w, least_rotation(&w)), brute);
        let w = parse_letters("abab").unwrap();
        assert_eq!(rotated(&w, least_rotation(&w)), parse_letters("abab").unwrap());
    }

    #[test]
    fn peripheral_examples() {
        assert!(cw("aBAb").is_peripheral());
        assert!(cw("abAB").is_peripheral());
        assert!(cw("abABabAB").is_peripheral());
        assert!(!cw("ab").is_peripheral());
        assert!(!cw("aabb").is_peripheral());
        assert!(!cw("aabABB").is_peripheral());
        assert!(!cw("aBAb").is_primitive() || cw("aBAb").len() == 4);
    }

    #[test]
    fn primitivity() {
        assert!(cw("aab").is_primitive());
        assert!(!cw("abab").is_primitive());
        assert_eq!(cw("abab").primitive_root(), (cw("ab"), 2));
        assert_eq!(cw("aaa").primitive_root(), (cw("a"), 3));
    }

    #[test]
    fn move_examples() {
        assert_eq!(apply_move(Move::T, &cw("a")), cw("ab"));
        assert_eq!(apply_move(Move::T, &cw("b")), cw("b"));
        let w = cw("aab");
        let t = MappingClass::single(Move::T);
        let img = t.apply_letters(w.letters());
        let (x, y) = homology_of(w.letters());
        let m = t.matrix();
        assert_eq!(homology_of(&img), (m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y));
        assert_eq!(homology_of(&img), (2, 3));
    }

    #[test]
    fn moves_and_inverses_cancel() {
        for m in Move::ALL {
            let id = MappingClass::from_moves(&[m, m.inverse()]);
            assert_eq!(id.apply(&cw("aabAB")), cw("aabAB"));
            assert_eq!(MappingClass::single(m).determinant().abs(), 1);
        }
    }

    #[test]
    fn canonical_word_counts() {
        let words = canonical_words(3);
        let strs: Vec<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(&strs[..2], &["a", "b"]);
        // Length 2: aa, ab, aB, bb.
        assert_eq!(words.iter().filter(|w| w.len() == 2).count(), 4);
        for w in &words {
            assert_eq!(&CyclicWord::canonicalize(w.letters()).unwrap(), w);
        }
    }

    #[test]
    fn christoffel_examples() {
        assert_eq!(christoffel(1, 0).unwrap(), cw("a"));
        assert_eq!(christoffel(0, 1).unwrap(), cw("b"));
        assert_eq!(christoffel(1, 1).unwrap(), cw("ab"));
        assert_eq!(christoffel(2, 1).unwrap(), cw("aab"));
        assert_eq!(christoffel(-1, -1).unwrap(), cw("ab"));
        assert_eq!(christoffel_letters(-2, 1).unwrap(), parse_letters("AAb").unwrap());
        assert!(christoffel(2, 4).is_err());
        assert!(christoffel(0, 0).is_err());
    }

    #[test]
    fn christoffel_matches_floor_formula() {
        // Lower Christoffel word: letter i is b iff ⌊iq/n⌋ jumps.
        for p in 0..=12u64 {
            for q in 0..=12u64 {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let n = p + q;
                let oracle: Vec<Letter> = (1..=n)
                    .map(|i| if (i * q) / n > ((i - 1) * q) / n { Letter::B } else { Letter::A })
                    .collect();
                assert_eq!(christoffel_positive(p, q), oracle, "({p},{q})");
                assert_eq!(homology_of(&oracle), (p as i64, q as i64));
            }
        }
    }
}
