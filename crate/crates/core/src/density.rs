//! Densities of SL₂ℕ-invariant subsets of ℕ₊².
//!
//! The orbit of `(p, q)` has density `6 / (π² p q)` per unit area, and an
//! invariant set, being a disjoint union of orbits, has the sum of those as
//! its density. All bookkeeping is done with exact rationals: a density is
//! stored as the coefficient `c` in `c · 6/π²`, and π only appears when a
//! value is rendered as a float.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{walk_orbit, InvariantSet, LatticePoint, Roots};
use crate::output::{fmt_f64, CsvTable};

/// `6 / π²`.
pub const SIX_OVER_PI_SQUARED: f64 = 6.0 / (PI * PI);

/// Default certified remainder for truncated root families.
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-3;

/// Largest sum-norm up to which a root family is expanded while trying to
/// reach the truncation target.
pub const ROOT_BUDGET_SUM: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub enum ExactDensity {
    /// `c · 6/π²`.
    SixOverPiSquared(BigRational),
    /// A plain rational number.
    Plain(BigRational),
    /// A partial sum `c · 6/π²` whose neglected tail is at most `remainder`.
    Truncated { partial: BigRational, remainder: f64 },
}

impl ExactDensity {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::SixOverPiSquared(c) => ratio_f64(c) * SIX_OVER_PI_SQUARED,
            Self::Plain(r) => ratio_f64(r),
            Self::Truncated { partial, .. } => ratio_f64(partial) * SIX_OVER_PI_SQUARED,
        }
    }

    /// Rendering such as `3/2 * 6/pi^2`, `1/4`, or `>= 5/2 * 6/pi^2 (+1e-3)`.
    pub fn symbolic(&self) -> String {
        match self {
            Self::SixOverPiSquared(c) => format!("{c} * 6/pi^2"),
            Self::Plain(r) => r.to_string(),
            Self::Truncated { partial, remainder } => {
                format!("{partial} * 6/pi^2 + [0, {}]", fmt_f64(*remainder))
            }
        }
    }
}

impl fmt::Display for ExactDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbolic())
    }
}

pub(crate) fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Density of the single orbit `SL₂ℕ·root`, exactly `1/(p q)` times `6/π²`.
pub fn orbit_density(root: LatticePoint) -> ExactDensity {
    ExactDensity::SixOverPiSquared(BigRational::new(
        BigInt::one(),
        BigInt::from(root.x()) * BigInt::from(root.y()),
    ))
}

/// A bounded convex polygon with rational vertices inside the closed first
/// quadrant. Points on the boundary count as inside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    kind: RegionKind,
    /// Counter-clockwise vertices as `(numerator, denominator)` pairs.
    vertices: Vec<[(i64, i64); 2]>,
    /// Half-planes `a x + b y <= c`, scaled to integers.
    #[serde(skip)]
    halfplanes: Vec<(i128, i128, i128)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// `Δ_{a,b} = {a x + b y <= 1, x, y >= 0}`.
    Triangle { a: (i64, i64), b: (i64, i64) },
    Rectangle,
    Polygon,
}

impl Region {
    /// The triangle `{a x + b y <= 1}` in the first quadrant, for positive
    /// rationals `a = a.0 / a.1`, `b = b.0 / b.1`.
    pub fn triangle(a: (i64, i64), b: (i64, i64)) -> Result<Self> {
        if a.0 <= 0 || a.1 <= 0 || b.0 <= 0 || b.1 <= 0 {
            return Err(Error::InvalidRegion("triangle coefficients must be positive".into()));
        }
        let verts = vec![[(0, 1), (0, 1)], [(a.1, a.0), (0, 1)], [(0, 1), (b.1, b.0)]];
        Self::build(RegionKind::Triangle { a, b }, verts)
    }

    /// `Δ_{1,1}`, i.e. `x + y <= 1`.
    pub fn unit_triangle() -> Self {
        Self::triangle((1, 1), (1, 1)).expect("valid triangle")
    }

    /// `[x0, x1] × [y0, y1]` with rational corners.
    pub fn rectangle(x0: (i64, i64), x1: (i64, i64), y0: (i64, i64), y1: (i64, i64)) -> Result<Self> {
        let verts = vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        Self::build(RegionKind::Rectangle, verts)
    }

    pub fn unit_square() -> Self {
        Self::rectangle((0, 1), (1, 1), (0, 1), (1, 1)).expect("valid square")
    }

    /// A convex polygon from counter-clockwise rational vertices.
    pub fn polygon(vertices: Vec<[(i64, i64); 2]>) -> Result<Self> {
        Self::build(RegionKind::Polygon, vertices)
    }

    /// Same region scaled by the rational factor `num / den`.
    pub fn scaled(&self, num: i64, den: i64) -> Result<Self> {
        if num <= 0 || den <= 0 {
            return Err(Error::InvalidRegion("scale factor must be positive".into()));
        }
        let verts = self
            .vertices
            .iter()
            .map(|v| [(v[0].0 * num, v[0].1 * den), (v[1].0 * num, v[1].1 * den)])
            .collect();
        Self::build(RegionKind::Polygon, verts)
    }

    fn build(kind: RegionKind, vertices: Vec<[(i64, i64); 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidRegion("need at least three vertices".into()));
        }
        for v in &vertices {
            for &(n, d) in v {
                if d <= 0 {
                    return Err(Error::InvalidRegion("denominators must be positive".into()));
                }
                if n < 0 {
                    return Err(Error::InvalidRegion(
                        "region must lie in the closed first quadrant".into(),
                    ));
                }
            }
        }
        let exact: Vec<(BigRational, BigRational)> = vertices
            .iter()
            .map(|v| (ratio(v[0].0, v[0].1), ratio(v[1].0, v[1].1)))
            .collect();
        let n = exact.len();
        let mut halfplanes = Vec::with_capacity(n);
        for i in 0..n {
            let (x0, y0) = &exact[i];
            let (x1, y1) = &exact[(i + 1) % n];
            let (x2, y2) = &exact[(i + 2) % n];
            // Convexity: every turn is a strict left turn.
            let turn = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1);
            if !turn.is_positive() {
                return Err(Error::InvalidRegion(
                    "vertices must be in strictly convex counter-clockwise order".into(),
                ));
            }
            // Inside of the directed edge (x0,y0)->(x1,y1):
            // (y1 - y0) x - (x1 - x0) y <= (y1 - y0) x0 - (x1 - x0) y0.
            let a = y1 - y0;
            let b = -(x1 - x0);
            let c = &a * x0 + &b * y0;
            let lcm = [&a, &b, &c]
                .iter()
                .fold(BigInt::one(), |acc, r| num_integer::Integer::lcm(&acc, r.denom()));
            let to_int = |r: &BigRational| -> Result<i128> {
                (r * BigRational::from_integer(lcm.clone()))
                    .to_integer()
                    .to_i128()
                    .ok_or(Error::Overflow("scaling region half-planes"))
            };
            halfplanes.push((to_int(&a)?, to_int(&b)?, to_int(&c)?));
        }
        let region = Self { kind, vertices, halfplanes };
        if !region.area().is_positive() {
            return Err(Error::InvalidRegion("region must have positive area".into()));
        }
        Ok(region)
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    fn exact_vertices(&self) -> Vec<(BigRational, BigRational)> {
        self.vertices
            .iter()
            .map(|v| (ratio(v[0].0, v[0].1), ratio(v[1].0, v[1].1)))
            .collect()
    }

    /// Exact area by the shoelace formula.
    pub fn area(&self) -> BigRational {
        let v = self.exact_vertices();
        let n = v.len();
        let mut twice = BigRational::zero();
        for i in 0..n {
            let (x0, y0) = &v[i];
            let (x1, y1) = &v[(i + 1) % n];
            twice += x0 * y1 - x1 * y0;
        }
        twice / BigRational::from_integer(2.into())
    }

    pub fn perimeter(&self) -> f64 {
        let v: Vec<(f64, f64)> = self
            .exact_vertices()
            .iter()
            .map(|(x, y)| (ratio_f64(x), ratio_f64(y)))
            .collect();
        (0..v.len())
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % v.len()]);
                ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
            })
            .sum()
    }

    /// Bounding box corner `(max x, max y)` of the region scaled by `l`,
    /// rounded down to integers.
    fn scaled_box(&self, l: u64) -> (u64, u64) {
        let floor = |(n, d): (i64, i64)| -> u64 {
            ((n as i128 * l as i128) / d as i128).max(0) as u64
        };
        let mx = self.vertices.iter().map(|v| floor(v[0])).max().unwrap_or(0);
        let my = self.vertices.iter().map(|v| floor(v[1])).max().unwrap_or(0);
        (mx, my)
    }

    /// Whether `(x, y)` lies in the closed region scaled by `l`.
    #[inline]
    pub fn contains_scaled(&self, x: u64, y: u64, l: u64) -> bool {
        let (x, y, l) = (x as i128, y as i128, l as i128);
        self.halfplanes.iter().all(|&(a, b, c)| a * x + b * y <= c * l)
    }

    /// Upper bound `L² A + L P / 2 + 1` on the number of lattice points in the
    /// region scaled by `L`, valid for convex sets.
    pub fn lattice_point_bound(&self, l: u64) -> f64 {
        let l = l as f64;
        l * l * ratio_f64(&self.area()) + l * self.perimeter() / 2.0 + 1.0
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            RegionKind::Triangle { a, b } => {
                format!("triangle({}/{},{}/{})", a.0, a.1, b.0, b.1)
            }
            RegionKind::Rectangle | RegionKind::Polygon => {
                let pts: Vec<String> = self
                    .vertices
                    .iter()
                    .map(|v| format!("{}/{}:{}/{}", v[0].0, v[0].1, v[1].0, v[1].1))
                    .collect();
                format!("polygon({})", pts.join(" "))
            }
        }
    }
}

/// Number of points of `SL₂ℕ·root` inside the region scaled by `l`.
pub fn count_orbit_in_region(root: LatticePoint, region: &Region, l: u64) -> Result<u64> {
    let (bx, by) = region.scaled_box(l);
    let mut count = 0u64;
    walk_orbit(root, |p| {
        if p.x() > bx || p.y() > by {
            return false;
        }
        if region.contains_scaled(p.x(), p.y(), l) {
            count += 1;
        }
        true
    })?;
    Ok(count)
}

/// `|I ∩ L·U|`, by a pruned walk of the orbit tree of every root that can
/// reach the scaled bounding box.
pub fn count_in_region(set: &InvariantSet, region: &Region, l: u64) -> Result<u64> {
    let (bx, by) = region.scaled_box(l);
    let sum_bound = bx
        .checked_add(by)
        .ok_or(Error::Overflow("bounding the scaled region"))?;
    let roots: Vec<LatticePoint> = set
        .roots_up_to(sum_bound)
        .into_iter()
        .filter(|r| r.x() <= bx && r.y() <= by)
        .collect();
    roots
        .par_iter()
        .map(|&r| count_orbit_in_region(r, region, l))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Exact density of an invariant set, truncating infinite root families once
/// the certified tail falls below `epsilon`.
pub fn exact_density(set: &InvariantSet, epsilon: f64) -> Result<ExactDensity> {
    match set.roots() {
        Roots::Finite(roots) => {
            let mut c = BigRational::zero();
            for r in roots {
                c += BigRational::new(BigInt::one(), BigInt::from(r.x()) * BigInt::from(r.y()));
            }
            Ok(ExactDensity::SixOverPiSquared(c))
        }
        Roots::Family(family) => {
            if let Some(closed) = family.closed_form() {
                return Ok(closed);
            }
            let mut bound = 64u64;
            loop {
                let tail = family.tail_bound(bound) * SIX_OVER_PI_SQUARED;
                if tail <= epsilon {
                    let mut c = BigRational::zero();
                    for r in family.roots_up_to(bound) {
                        c += BigRational::new(
                            BigInt::one(),
                            BigInt::from(r.x()) * BigInt::from(r.y()),
                        );
                    }
                    return Ok(ExactDensity::Truncated { partial: c, remainder: tail });
                }
                if bound >= ROOT_BUDGET_SUM {
                    return Err(Error::Truncation(format!(
                        "family {} still has tail {} > {} at root norm {}",
                        family.name(),
                        tail,
                        epsilon,
                        bound
                    )));
                }
                bound *= 2;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCount {
    pub l: u64,
    pub count: u64,
    /// `count / (L² vol(U))`, an estimate of the density.
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub set: String,
    pub region: String,
    pub region_area: BigRational,
    pub exact_density: Option<ExactDensity>,
    pub empirical_counts: Vec<EmpiricalCount>,
    /// `Σ L²/(2pq)` over the roots, the a-priori bound on the count in
    /// `x + y <= L` divided by `L²`, when the root set is finite.
    pub tail_bound_used: Option<BigRational>,
    pub truncation_epsilon: f64,
}

/// Counts at every `L` of the schedule plus the exact density.
pub fn density_estimate(
    set: &InvariantSet,
    region: &Region,
    schedule: &[u64],
    epsilon: f64,
) -> Result<DensityReport> {
    if schedule.is_empty() {
        return Err(Error::Precondition("empty L schedule".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] == 0 {
        return Err(Error::Precondition("L schedule must be positive and increasing".into()));
    }
    let area = region.area();
    let area_f = ratio_f64(&area);
    let mut empirical_counts = Vec::with_capacity(schedule.len());
    for &l in schedule {
        let count = count_in_region(set, region, l)?;
        let lf = l as f64;
        empirical_counts.push(EmpiricalCount {
            l,
            count,
            normalized: count as f64 / (lf * lf * area_f),
        });
    }
    let exact = exact_density(set, epsilon)?;
    let tail_bound_used = match set.roots() {
        Roots::Finite(roots) => Some(roots.iter().fold(BigRational::zero(), |acc, r| {
            acc + BigRational::new(BigInt::one(), BigInt::from(2u64 * r.x()) * BigInt::from(r.y()))
        })),
        Roots::Family(_) => None,
    };
    Ok(DensityReport {
        set: set.describe(),
        region: region.describe(),
        region_area: area,
        exact_density: Some(exact),
        empirical_counts,
        tail_bound_used,
        truncation_epsilon: epsilon,
    })
}

#[derive(Serialize)]
struct DensityJson<'a> {
    format: &'static str,
    set: &'a str,
    region: &'a str,
    region_area: String,
    exact_density: Option<String>,
    exact_density_value: Option<String>,
    tail_bound_used: Option<String>,
    truncation_epsilon: String,
    empirical_counts: Vec<EmpiricalJson>,
}

#[derive(Serialize)]
struct EmpiricalJson {
    l: u64,
    count: u64,
    normalized: String,
    abs_error: Option<String>,
}

impl DensityReport {
    pub fn exact_value(&self) -> Option<f64> {
        self.exact_density.as_ref().map(ExactDensity::to_f64)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut table = CsvTable::new(&["L", "count", "normalized", "exact_density", "abs_error"]);
        let exact = self.exact_value();
        for e in &self.empirical_counts {
            table.row(vec![
                e.l.to_string(),
                e.count.to_string(),
                fmt_f64(e.normalized),
                exact.map(fmt_f64).unwrap_or_default(),
                exact.map(|x| fmt_f64((e.normalized - x).abs())).unwrap_or_default(),
            ]);
        }
        table.render()
    }

    pub fn to_json(&self) -> Result<String> {
        let exact = self.exact_value();
        let doc = DensityJson {
            format: "curvecount-density/1",
            set: &self.set,
            region: &self.region,
            region_area: self.region_area.to_string(),
            exact_density: self.exact_density.as_ref().map(ExactDensity::symbolic),
            exact_density_value: exact.map(fmt_f64),
            tail_bound_used: self.tail_bound_used.as_ref().map(|r| r.to_string()),
            truncation_epsilon: fmt_f64(self.truncation_epsilon),
            empirical_counts: self
                .empirical_counts
                .iter()
                .map(|e| EmpiricalJson {
                    l: e.l,
                    count: e.count,
                    normalized: fmt_f64(e.normalized),
                    abs_error: exact.map(|x| fmt_f64((e.normalized - x).abs())),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: u64, y: u64) -> LatticePoint {
        LatticePoint::new(x, y).unwrap()
    }

    #[test]
    fn orbit_density_examples() {
        assert_eq!(orbit_density(pt(1, 1)), ExactDensity::SixOverPiSquared(ratio(1, 1)));
        assert!((orbit_density(pt(1, 1)).to_f64() - 0.607927101854).abs() < 1e-9);
        assert_eq!(orbit_density(pt(1, 2)), ExactDensity::SixOverPiSquared(ratio(1, 2)));
    }

    #[test]
    fn diagonal_densities_sum_to_one() {
        // Partial sums of 6/(π² d²) plus the integral tail 6/(π² n).
        let n = 100_000u64;
        let partial: f64 = (1..=n).map(|d| orbit_density(pt(d, d)).to_f64()).sum();
        let tail = SIX_OVER_PI_SQUARED / n as f64;
        assert!(partial <= 1.0 && 1.0 <= partial + tail, "{partial}");
    }

    #[test]
    fn count_examples() {
        let tri = Region::unit_triangle();
        assert_eq!(count_in_region(&InvariantSet::orbit(pt(1, 1)), &tri, 4).unwrap(), 5);
        assert_eq!(count_in_region(&InvariantSet::orbit(pt(2, 2)), &tri, 4).unwrap(), 1);
        assert_eq!(count_in_region(&InvariantSet::orbit(pt(1, 1)), &tri, 1).unwrap(), 0);
        let far = Region::rectangle((5, 1), (6, 1), (5, 1), (6, 1)).unwrap();
        assert_eq!(count_in_region(&InvariantSet::full_lattice(), &far, 1).unwrap(), 4);
        let thin = Region::rectangle((1, 3), (2, 3), (1, 3), (2, 3)).unwrap();
        assert_eq!(count_in_region(&InvariantSet::full_lattice(), &thin, 1).unwrap(), 0);
    }

    #[test]
    fn full_lattice_square_is_exact() {
        let sq = Region::unit_square();
        let set = InvariantSet::full_lattice();
        for l in [1u64, 7, 50, 300] {
            assert_eq!(count_in_region(&set, &sq, l).unwrap(), l * l);
        }
        let report = density_estimate(&set, &sq, &[10, 20], 1e-3).unwrap();
        assert_eq!(report.exact_density, Some(ExactDensity::Plain(ratio(1, 1))));
        assert!(report.empirical_counts.iter().all(|e| e.normalized == 1.0));
    }

    #[test]
    fn region_validation() {
        assert!(Region::triangle((0, 1), (1, 1)).is_err());
        assert!(Region::polygon(vec![[(0, 1), (0, 1)], [(1, 1), (1, 1)], [(2, 1), (2, 1)]]).is_err());
        assert!(Region::polygon(vec![[(0, 1), (0, 1)], [(0, 1), (1, 1)], [(1, 1), (0, 1)]]).is_err());
        assert!(Region::rectangle((-1, 1), (1, 1), (0, 1), (1, 1)).is_err());
        assert_eq!(Region::triangle((1, 1), (2, 1)).unwrap().area(), ratio(1, 4));
        assert_eq!(Region::unit_square().area(), ratio(1, 1));
    }

    #[test]
    fn schedule_validation() {
        let set = InvariantSet::orbit(pt(1, 1));
        let sq = Region::unit_square();
        assert!(density_estimate(&set, &sq, &[], 1e-3).is_err());
        assert!(density_estimate(&set, &sq, &[10, 5], 1e-3).is_err());
    }

    #[test]
    fn counts_respect_convex_lattice_bound() {
        let tri = Region::triangle((1, 1), (2, 3)).unwrap();
        let set = InvariantSet::full_lattice();
        for l in [3u64, 17, 120] {
            let c = count_in_region(&set, &tri, l).unwrap() as f64;
            assert!(c <= tri.lattice_point_bound(l));
        }
    }

    #[test]
    fn truncated_family_is_certified() {
        struct Odd;
        impl crate::lattice::RootFamily for Odd {
            fn name(&self) -> String {
                "odd-diagonal".into()
            }
            fn roots_up_to(&self, b: u64) -> Vec<LatticePoint> {
                (0..).map(|k| 2 * k + 1).take_while(|&d| 2 * d <= b).map(|d| pt(d, d)).collect()
            }
            fn tail_bound(&self, b: u64) -> f64 {
                let n = (b / 2).max(1) as f64;
                1.0 / n
            }
        }
        let set = InvariantSet::from_family(Box::new(Odd));
        let d = exact_density(&set, 1e-3).unwrap();
        // Σ_{d odd} 6/(π² d²) = 6/π² · π²/8 = 3/4.
        match &d {
            ExactDensity::Truncated { remainder, .. } => {
                assert!(*remainder <= 1e-3);
                assert!(d.to_f64() <= 0.75 && 0.75 <= d.to_f64() + remainder);
            }
            other => panic!("{other:?}"),
        }
    }
}
