//! Cusped hyperbolic structures on the once-punctured torus.
//!
//! A structure is a representation `ρ: F₂ → SL₂ℝ` with `tr ρ[a, b] = −2`,
//! built from a trace pair `(x, y)`. Geodesic lengths come from traces.
//! Intersection numbers are computed two ways:
//!
//! * [`PuncturedTorusStructure::realize`] / [`PuncturedTorusStructure::intersection`]
//!   conjugate the axis of one curve to the imaginary axis and count lifts of
//!   the other curve whose axes cross it inside one period (floating point,
//!   with explicit margins).
//! * [`arc_self_intersection`] / [`arc_intersection`] count crossing arcs in
//!   an ideal quadrilateral fundamental domain using only the cyclic order of
//!   its sides (exact and metric independent).

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use twofloat::TwoFloat;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::freegroup::{free_reduce, inverse_word, CyclicWord, Letter};

type Mat = [[f64; 2]; 2];

const IDENTITY: Mat = [[1.0, 0.0], [0.0, 1.0]];

/// Relative widening of the one-period window along an axis.
const WINDOW_SLACK: f64 = 1e-6;

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn mat_inv(m: &Mat) -> Mat {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn trace(m: &Mat) -> f64 {
    m[0][0] + m[1][1]
}

/// A point of `∂ℍ² = ℝℙ¹` as a unit vector `(u, v)`, standing for `u / v`.
#[derive(Clone, Copy, Debug)]
struct Ideal([f64; 2]);

impl Ideal {
    fn new(u: f64, v: f64) -> Self {
        let n = u.hypot(v);
        Ideal([u / n, v / n])
    }

    fn moved(self, m: &Mat) -> Self {
        let [u, v] = self.0;
        Ideal::new(m[0][0] * u + m[0][1] * v, m[1][0] * u + m[1][1] * v)
    }

    /// Real coordinate; infinite when `v` vanishes.
    fn real(self) -> f64 {
        self.0[0] / self.0[1]
    }
}

/// Complex number in the upper half plane, as `(re, im)`.
fn mobius(m: &Mat, z: (f64, f64)) -> (f64, f64) {
    let (x, y) = z;
    let (nr, ni) = (m[0][0] * x + m[0][1], m[0][0] * y);
    let (dr, di) = (m[1][0] * x + m[1][1], m[1][0] * y);
    let den = dr * dr + di * di;
    ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
}

/// Matrices in double-double precision, for linking tests between nearly
/// parallel axes.
type DMat = [[TwoFloat; 2]; 2];

fn dmat(m: &Mat) -> DMat {
    m.map(|row| row.map(TwoFloat::from))
}

fn dmat_mul(x: &DMat, y: &DMat) -> DMat {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// Letter matrices with inverses recomputed in double-double, so that the
/// product over a reduced word is a homomorphism to working precision.
fn dd_letters(x: &PuncturedTorusStructure) -> [DMat; 4] {
    let inv = |m: &DMat| {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
    };
    let a = dmat(&x.ma);
    let b = dmat(&x.mb);
    let out = [a, inv(&a), b, inv(&b)];
    debug_assert_eq!((Letter::AInv.index(), Letter::BInv.index()), (1, 3));
    out
}

fn dd_word(letters: &[DMat; 4], w: &[Letter]) -> DMat {
    let one = TwoFloat::from(1.0);
    let zero = TwoFloat::from(0.0);
    w.iter().fold([[one, zero], [zero, one]], |acc, l| dmat_mul(&acc, &letters[l.index()]))
}

/// `(F, F⁻¹)`, `det F = 1`, for the map sending the repelling fixed point of `m` to 0
/// and the attracting one to ∞.
fn dd_axis_frame(m: &DMat) -> (DMat, DMat) {
    let t = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (t * t - TwoFloat::from(4.0) * det).sqrt();
    let big = if t.is_sign_negative() { (t - disc) / TwoFloat::from(2.0) } else { (t + disc) / TwoFloat::from(2.0) };
    let small = det / big;
    let eig = |mu: TwoFloat| {
        let v1 = (m[0][1], mu - m[0][0]);
        let v2 = (mu - m[1][1], m[1][0]);
        let n1 = v1.0 * v1.0 + v1.1 * v1.1;
        let n2 = v2.0 * v2.0 + v2.1 * v2.1;
        if n1 >= n2 {
            v1
        } else {
            v2
        }
    };
    let unit = |(u, v): (TwoFloat, TwoFloat)| {
        let n = (u * u + v * v).sqrt();
        (u / n, v / n)
    };
    let (mut ru, mut rv) = unit(eig(small));
    let (au, av) = unit(eig(big));
    let mut d = au * rv - ru * av;
    if d.is_sign_negative() {
        ru = -ru;
        rv = -rv;
        d = -d;
    }
    let s = d.sqrt();
    let f = [[rv / s, -ru / s], [-av / s, au / s]];
    let adj = [[au / s, ru / s], [av / s, rv / s]];
    (f, adj)
}

/// Eigenvectors of a hyperbolic matrix: `(repelling, attracting)`.
fn fixed_points(m: &Mat) -> (Ideal, Ideal) {
    let t = trace(m);
    let disc = (t * t - 4.0).max(0.0).sqrt();
    let big = 0.5 * (t + t.signum() * disc);
    let small = 1.0 / big;
    let eig = |mu: f64| {
        let v1 = (m[0][1], mu - m[0][0]);
        let v2 = (mu - m[1][1], m[1][0]);
        if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
            Ideal::new(v1.0, v1.1)
        } else {
            Ideal::new(v2.0, v2.1)
        }
    };
    (eig(small), eig(big))
}

/// The Möbius map sending `repelling ↦ 0` and `attracting ↦ ∞`, preserving
/// the upper half plane.
fn axis_frame(repelling: Ideal, attracting: Ideal) -> Mat {
    let [au, av] = attracting.0;
    let [mut ru, mut rv] = repelling.0;
    let mut det = au * rv - ru * av;
    if det < 0.0 {
        ru = -ru;
        rv = -rv;
        det = -det;
    }
    let s = det.sqrt();
    [[rv / s, -ru / s], [-av / s, au / s]]
}

/// A complete hyperbolic structure of finite area on the once-punctured
/// torus, given by the generator matrices.
#[derive(Clone, Debug, Serialize)]
pub struct PuncturedTorusStructure {
    x: f64,
    y: f64,
    z: f64,
    ma: Mat,
    mb: Mat,
    #[serde(skip)]
    letters: [Mat; 4],
    /// Cusp vertices of the fundamental quadrilateral, in cyclic order.
    #[serde(skip)]
    vertices: [Ideal; 4],
}

impl PuncturedTorusStructure {
    /// Builds the structure with `tr a = x`, `tr b = y`, and `tr ab` the
    /// smaller root of `z² − xyz + x² + y² = 0`.
    pub fn from_traces(x: f64, y: f64) -> Result<Self> {
        let reject = |reason: &str| Error::NotRealizable { x, y, reason: reason.into() };
        if !(x.is_finite() && y.is_finite()) || x <= 2.0 || y <= 2.0 {
            return Err(reject("both traces must exceed 2"));
        }
        let disc = x * x * y * y - 4.0 * (x * x + y * y);
        if disc < 0.0 {
            return Err(reject("the trace of ab would be complex"));
        }
        // Smaller root without cancellation: z₁ z₂ = x² + y².
        let big = 0.5 * (x * y + disc.sqrt());
        let z = (x * x + y * y) / big;
        if z <= 2.0 {
            return Err(reject("the trace of ab would not exceed 2"));
        }
        let lambda = 0.5 * (x + (x * x - 4.0).sqrt());
        let inv = 1.0 / lambda;
        let p = (z - y * inv) / (lambda - inv);
        let s = y - p;
        let ps1 = p * s - 1.0;
        let (q, r) = if ps1 >= 0.0 {
            (ps1.sqrt(), ps1.sqrt())
        } else {
            ((-ps1).sqrt(), -(-ps1).sqrt())
        };
        let ma = [[lambda, 0.0], [0.0, inv]];
        let mb = [[p, q], [r, s]];
        let letters = [ma, mat_inv(&ma), mb, mat_inv(&mb)];
        let mut out = Self { x, y, z, ma, mb, letters, vertices: [Ideal::new(1.0, 0.0); 4] };
        out.vertices = out.quadrilateral();
        Ok(out)
    }

    /// The modular torus, traces `(3, 3, 3)`.
    pub fn modular() -> Self {
        Self::from_traces(3.0, 3.0).expect("(3, 3) is realizable")
    }

    pub fn traces(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }

    pub fn generator_matrices(&self) -> (Mat, Mat) {
        (self.ma, self.mb)
    }

    pub fn matrix(&self, w: &[Letter]) -> Mat {
        w.iter()
            .fold(IDENTITY, |acc, l| mat_mul(&acc, &self.letters[l.index()]))
    }

    pub fn trace_of(&self, w: &[Letter]) -> f64 {
        trace(&self.matrix(w))
    }

    /// `tr ρ[a, b]`, which is `−2` up to rounding.
    pub fn commutator_trace(&self) -> f64 {
        use Letter::*;
        self.trace_of(&[A, B, AInv, BInv])
    }

    /// Fundamental quadrilateral: `p₀` fixed by the commutator, then
    /// `b⁻¹p₀`, `a⁻¹b⁻¹p₀`, `ba⁻¹b⁻¹p₀`. Side `σ_x` is glued to `σ_{x⁻¹}` by
    /// `ρ(x)`, and the tile `ρ(x)D` lies across `σ_x`.
    fn quadrilateral(&self) -> [Ideal; 4] {
        use Letter::*;
        let k = self.matrix(&[A, B, AInv, BInv]);
        let v1 = (k[0][1], -1.0 - k[0][0]);
        let v2 = (-1.0 - k[1][1], k[1][0]);
        let p0 = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
            Ideal::new(v1.0, v1.1)
        } else {
            Ideal::new(v2.0, v2.1)
        };
        [
            p0,
            p0.moved(&self.matrix(&[BInv])),
            p0.moved(&self.matrix(&[AInv, BInv])),
            p0.moved(&self.matrix(&[B, AInv, BInv])),
        ]
    }

    /// Endpoints of the side `σ_x` of the fundamental quadrilateral.
    fn side(&self, x: Letter) -> (Ideal, Ideal) {
        let v = &self.vertices;
        match x {
            Letter::A => (v[0], v[1]),
            Letter::BInv => (v[1], v[2]),
            Letter::AInv => (v[2], v[3]),
            Letter::B => (v[3], v[0]),
        }
    }

    /// Cusp vertices as real numbers (one may be infinite).
    pub fn cusp_vertices(&self) -> [f64; 4] {
        self.vertices.map(|p| p.real())
    }

    /// `2·arccosh(|tr ρ(w)| / 2)`.
    pub fn length(&self, w: &CyclicWord) -> Result<f64> {
        self.length_of_letters(w.letters())
    }

    pub fn length_of_letters(&self, w: &[Letter]) -> Result<f64> {
        let t = self.trace_of(w).abs();
        if t <= 2.0 + 1e-9 {
            return Err(Error::Peripheral { word: crate::freegroup::letters_to_string(w), trace: t });
        }
        Ok(2.0 * (t / 2.0).acosh())
    }

    fn check_curve(&self, w: &CyclicWord) -> Result<CurveData> {
        if w.is_peripheral() {
            return Err(Error::Peripheral { word: w.to_string(), trace: self.trace_of(w.letters()).abs() });
        }
        if !w.is_primitive() {
            return Err(Error::NotPrimitive(w.to_string()));
        }
        CurveData::new(self, w)
    }

    /// Geodesic representative of `w`: one period of arcs in the fundamental
    /// domain and every transverse self-crossing with its angle.
    pub fn realize(&self, w: &CyclicWord) -> Result<GeodesicRealization> {
        let data = self.check_curve(w)?;
        let (hits, radius) = stable_hits(self, &data, &data, true)?;
        // Each double point is seen once from each branch.
        let mut crossings: Vec<Crossing> = hits
            .iter()
            .filter(|h| h.base_param < h.other_param)
            .map(|h| Crossing { parameters: (h.base_param, h.other_param), angle: h.angle })
            .collect();
        if 2 * crossings.len() != hits.len() {
            return Err(Error::Unstable(format!(
                "{} ordered crossings of {w} do not pair up into double points",
                hits.len()
            )));
        }
        crossings.sort_by(|a, b| a.parameters.partial_cmp(&b.parameters).unwrap_or(Ordering::Equal));
        let period_arcs = (0..w.len()).map(|i| data.arc(self, i)).collect::<Result<Vec<_>>>()?;
        Ok(GeodesicRealization {
            word: w.clone(),
            length: data.length,
            trace: data.trace,
            period_arcs,
            crossings,
            enumeration_radius: radius,
        })
    }

    /// Geometric intersection number of two distinct primitive classes.
    pub fn intersection(&self, v: &CyclicWord, w: &CyclicWord) -> Result<usize> {
        if v == w {
            return Err(Error::Precondition(format!(
                "intersection needs distinct classes, got {v} twice; use realize for self-intersection"
            )));
        }
        let dv = self.check_curve(v)?;
        let dw = self.check_curve(w)?;
        Ok(stable_hits(self, &dv, &dw, false)?.0.len())
    }
}

/// Everything needed about one oriented closed geodesic.
struct CurveData {
    word: Vec<Letter>,
    length: f64,
    trace: f64,
    /// Frame sending the axis of `ρ(w)` to the imaginary axis.
    frame: Mat,
    frame_inv: Mat,
    /// Double-double frame and its adjugate.
    frame_dd: (DMat, DMat),
    /// Log-height where the axis enters the fundamental domain.
    t_in: f64,
    /// Fixed points of `ρ(w_j)` for each rotation `w_j`.
    rotation_axes: Vec<(Ideal, Ideal)>,
}

impl CurveData {
    fn new(x: &PuncturedTorusStructure, w: &CyclicWord) -> Result<Self> {
        let word = w.letters().to_vec();
        let n = word.len();
        let m = x.matrix(&word);
        let trace = m[0][0] + m[1][1];
        let length = x.length_of_letters(&word)?;
        let (rep, att) = fixed_points(&m);
        let frame = axis_frame(rep, att);
        let frame_inv = mat_inv(&frame);
        let entry = word[n - 1].inverse();
        let (p, q) = x.side(entry);
        let (c, d) = (p.moved(&frame).real(), q.moved(&frame).real());
        if !(c * d < 0.0) {
            return Err(Error::Unstable(format!("axis of {w} does not cross its entry side")));
        }
        let t_in = 0.5 * (-c * d).ln();
        let rotation_axes = (0..n)
            .map(|j| {
                let rot: Vec<Letter> = word[j..].iter().chain(&word[..j]).copied().collect();
                fixed_points(&x.matrix(&rot))
            })
            .collect();
        let frame_dd = dd_axis_frame(&dd_word(&dd_letters(x), &word));
        Ok(Self { word, length, trace, frame, frame_inv, frame_dd, t_in, rotation_axes })
    }

    /// Prefix of the bi-infinite periodic word of length `k` (negative `k`
    /// means the inverse of a suffix), freely reduced.
    fn prefix(&self, k: i64) -> Vec<Letter> {
        let n = self.word.len() as i64;
        if k >= 0 {
            (0..k).map(|i| self.word[(i % n) as usize]).collect()
        } else {
            (0..-k)
                .map(|i| self.word[((n - 1 - i % n) % n) as usize].inverse())
                .collect()
        }
    }

    /// Arc-length parameter in `[0, ℓ)` of a point on the base axis.
    fn param_of(&self, z: (f64, f64)) -> f64 {
        let (_, y) = mobius(&self.frame, z);
        let t = y.ln() - self.t_in;
        let r = t.rem_euclid(self.length);
        if self.length - r < WINDOW_SLACK * self.length.max(1.0) {
            0.0
        } else {
            r
        }
    }

    fn arc(&self, x: &PuncturedTorusStructure, i: usize) -> Result<Arc> {
        let n = self.word.len();
        let (rep, att) = self.rotation_axes[i];
        let frame = axis_frame(rep, att);
        let inv = mat_inv(&frame);
        let cut = |side: Letter| -> Result<(f64, f64)> {
            let (p, q) = x.side(side);
            let (c, d) = (p.moved(&frame).real(), q.moved(&frame).real());
            if !(c * d < 0.0) {
                return Err(Error::Unstable("period arc misses a side of the fundamental domain".into()));
            }
            Ok(mobius(&inv, (0.0, (-c * d).sqrt())))
        };
        let start = cut(self.word[(i + n - 1) % n].inverse())?;
        let end = cut(self.word[i])?;
        Ok(Arc { start: [start.0, start.1], end: [end.0, end.1] })
    }
}

struct Hit {
    base_param: f64,
    other_param: f64,
    angle: f64,
}

/// Lifts of `other` crossing the axis of `base`, one per orbit under
/// translation along the base axis, enumerated over tiles `−r..n+r`.
///
/// Two lifts lie in one orbit when they differ by conjugation by the base
/// word; orbits are joined exactly on the reduced words, so near-parallel
/// axes, whose crossing heights carry large rounding error, are not counted
/// twice or dropped at the ends of the period.
fn hits_with_radius(
    x: &PuncturedTorusStructure,
    base: &CurveData,
    other: &CurveData,
    same: bool,
    radius: i64,
) -> Result<Vec<Hit>> {
    let n = base.word.len() as i64;
    let m = other.word.len();
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    let mut lifts: Vec<(Vec<Letter>, Hit)> = Vec::new();
    let dd = dd_letters(x);
    for k in -radius..n + radius {
        let g = base.prefix(k);
        let g_inv = inverse_word(&g);
        for j in 0..m {
            let mut conj = g.clone();
            conj.extend(other.word[j..].iter().chain(&other.word[..j]));
            conj.extend(&g_inv);
            let conj = free_reduce(&conj);
            if same && conj == base.word {
                continue;
            }
            if !seen.insert(conj.clone()) {
                continue;
            }
            // The lift in the base frame; its axis links the imaginary axis
            // exactly when the off-diagonal entries share a sign.
            let (f, adj) = &base.frame_dd;
            let mm = dmat_mul(&dmat_mul(f, &dd_word(&dd, &conj)), adj);
            let (p, q) = (mm[0][1], mm[1][0]);
            if p.is_sign_positive() != q.is_sign_positive() || p.hi() == 0.0 || q.hi() == 0.0 {
                continue;
            }
            let t = (0.5 * (p / q).ln().hi()) - base.t_in;
            let tr = mm[0][0] + mm[1][1];
            let det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
            let disc = (tr * tr - TwoFloat::from(4.0) * det).sqrt();
            let angle = ((mm[0][0] - mm[1][1]).abs() / disc).hi().min(1.0).acos();
            let height = (p / q).sqrt().hi();
            // Same point seen on the other curve: undo g, then shift the
            // rotation back to the other curve's own base lift.
            let point = mobius(&base.frame_inv, (0.0, height));
            let mut back = other.word[..j].to_vec();
            back.extend(&g_inv);
            let point_other = mobius(&x.matrix(&back), point);
            let hit = Hit { base_param: t, other_param: other.param_of(point_other), angle };
            lifts.push((conj, hit));
        }
    }
    let index: HashMap<&[Letter], usize> = lifts.iter().enumerate().map(|(i, (w, _))| (w.as_slice(), i)).collect();
    let base_inv = inverse_word(&base.word);
    let mut parent: Vec<usize> = (0..lifts.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, (w, _)) in lifts.iter().enumerate() {
        let mut v = base.word.clone();
        v.extend(w);
        v.extend(&base_inv);
        if let Some(&j) = index.get(free_reduce(&v).as_slice()) {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    // Representative of each orbit: the member whose height is nearest the
    // middle of the period.
    let mid = 0.5 * base.length;
    let mut best: HashMap<usize, usize> = HashMap::new();
    for i in 0..lifts.len() {
        let r = root(&mut parent, i);
        let e = best.entry(r).or_insert(i);
        if (lifts[i].1.base_param - mid).abs() < (lifts[*e].1.base_param - mid).abs() {
            *e = i;
        }
    }
    let mut reps: Vec<usize> = best.into_values().collect();
    reps.sort_unstable();
    let slack = WINDOW_SLACK * base.length.max(1.0);
    Ok(reps
        .into_iter()
        .map(|i| {
            let h = &lifts[i].1;
            let t = h.base_param.rem_euclid(base.length);
            let t = if base.length - t < slack { 0.0 } else { t };
            Hit { base_param: t, other_param: h.other_param, angle: h.angle }
        })
        .collect())
}

/// Runs the enumeration at radius 1, then doubles the radius until two
/// successive counts agree.
fn stable_hits(
    x: &PuncturedTorusStructure,
    base: &CurveData,
    other: &CurveData,
    same: bool,
) -> Result<(Vec<Hit>, usize)> {
    let mut radius = 1;
    let mut prev = hits_with_radius(x, base, other, same, radius)?;
    while radius <= 8 {
        radius *= 2;
        let next = hits_with_radius(x, base, other, same, radius)?;
        if next.len() == prev.len() {
            return Ok((next, radius as usize));
        }
        prev = next;
    }
    Err(Error::Unstable(format!(
        "crossing count still changing at radius {radius} (last count {})",
        prev.len()
    )))
}

/// A geodesic segment inside the fundamental domain; endpoints in the upper
/// half plane as `[re, im]`.
#[derive(Clone, Debug, Serialize)]
pub struct Arc {
    pub start: [f64; 2],
    pub end: [f64; 2],
}

/// A transverse double point: arc-length positions of its two branches
/// along the curve and the unoriented angle in `(0, π/2]`.
#[derive(Clone, Debug, Serialize)]
pub struct Crossing {
    pub parameters: (f64, f64),
    pub angle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicRealization {
    pub word: CyclicWord,
    pub length: f64,
    pub trace: f64,
    pub period_arcs: Vec<Arc>,
    pub crossings: Vec<Crossing>,
    /// Tile radius at which the crossing count stabilized.
    pub enumeration_radius: usize,
}

impl GeodesicRealization {
    pub fn self_intersection(&self) -> usize {
        self.crossings.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Position of each side in the cyclic order around the fundamental domain.
fn side_position(l: Letter) -> u8 {
    match l {
        Letter::A => 0,
        Letter::BInv => 1,
        Letter::AInv => 2,
        Letter::B => 3,
    }
}

/// Compares two rays from the base tile in the circular order of the tree
/// boundary, cut just before side position 0.
fn compare_rays(r1: impl Fn(usize) -> Letter, r2: impl Fn(usize) -> Letter, depth: usize) -> Option<Ordering> {
    let key = |r: &dyn Fn(usize) -> Letter, i: usize| -> u8 {
        if i == 0 {
            side_position(r(0))
        } else {
            (side_position(r(i)) + 4 - side_position(r(i - 1).inverse())) % 4
        }
    };
    for i in 0..depth {
        match key(&r1, i).cmp(&key(&r2, i)) {
            Ordering::Equal => continue,
            o => return Some(o),
        }
    }
    None
}

/// Counts ordered pairs of lifts through the base tile whose endpoints
/// interleave, keeping a pair only when the base tile is the first tile the
/// two share along the first lift.
fn arc_pairs(v: &[Letter], w: &[Letter], same: bool) -> Result<usize> {
    let (n, m) = (v.len(), w.len());
    let depth = n + m + 4;
    let fwd = |u: &[Letter], i: usize| {
        let u = u.to_vec();
        move |k: usize| u[(i + k) % u.len()]
    };
    let bwd = |u: &[Letter], i: usize| {
        let u = u.to_vec();
        let len = u.len();
        move |k: usize| u[(i + len * (k / len + 1) - 1 - k) % len].inverse()
    };
    let mut count = 0;
    for i in 0..n {
        let prev_i = v[(i + n - 1) % n].inverse();
        for j in 0..m {
            if same && i == j {
                continue;
            }
            let prev_j = w[(j + m - 1) % m].inverse();
            if prev_i == prev_j || prev_i == w[j] {
                continue;
            }
            // Ends of lift i ordered, then locate the ends of lift j.
            let (p_out, p_in) = (fwd(v, i), bwd(v, i));
            let (q_out, q_in) = (fwd(w, j), bwd(w, j));
            let shared = || Error::Precondition("the two geodesics share an endpoint".into());
            let p_order = compare_rays(&p_out, &p_in, depth).ok_or_else(shared)?;
            let (lo, hi): (&dyn Fn(usize) -> Letter, &dyn Fn(usize) -> Letter) = if p_order == Ordering::Less {
                (&p_out, &p_in)
            } else {
                (&p_in, &p_out)
            };
            let inside = |q: &dyn Fn(usize) -> Letter| -> Result<bool> {
                let a = compare_rays(lo, q, depth).ok_or_else(shared)?;
                let b = compare_rays(q, hi, depth).ok_or_else(shared)?;
                Ok(a == Ordering::Less && b == Ordering::Less)
            };
            if inside(&q_out)? != inside(&q_in)? {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Self-intersection number of a primitive class, from arcs in the
/// fundamental domain.
pub fn arc_self_intersection(w: &CyclicWord) -> Result<usize> {
    if !w.is_primitive() {
        return Err(Error::NotPrimitive(w.to_string()));
    }
    if w.is_peripheral() {
        return Ok(0);
    }
    let ordered = arc_pairs(w.letters(), w.letters(), true)?;
    debug_assert!(ordered % 2 == 0);
    Ok(ordered / 2)
}

/// Geometric intersection number of two distinct primitive classes, from
/// arcs in the fundamental domain.
pub fn arc_intersection(v: &CyclicWord, w: &CyclicWord) -> Result<usize> {
    if v == w {
        return Err(Error::Precondition(format!("intersection needs distinct classes, got {v} twice")));
    }
    for u in [v, w] {
        if !u.is_primitive() {
            return Err(Error::NotPrimitive(u.to_string()));
        }
    }
    if v.is_peripheral() || w.is_peripheral() {
        return Ok(0);
    }
    arc_pairs(v.letters(), w.letters(), false)
}
