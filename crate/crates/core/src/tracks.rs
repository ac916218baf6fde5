//! Train tracks with extra (possibly self-crossing) edges as weighted
//! graphs: switch equations, the crossing lower bound, the defect map of the
//! torus track, and counting of crossing placements in normal form.
//!
//! # Track files
//!
//! ```text
//! track v1
//! # comments start with '#'
//! edge a track
//! edge b track
//! edge c track
//! edge d extra
//! vertex v1 c.start | a.start b.start
//! vertex v2 c.end | a.end b.end
//! crossing d d 1
//! ```
//!
//! `edge NAME track|extra` declares edges in weight order. `vertex NAME
//! ENDS | ENDS` lists the germs on the two sides of a switch, each side in
//! transverse order; an end is `EDGE.start` or `EDGE.end`. `crossing E F N`
//! sets `ι(E, F) = N` for extra edges.
//!
//! # Normal forms
//!
//! Each track edge `e` carries a band of `ω(e)` strands and `N` leaves. The
//! gaps between adjacent strands, cut by the leaves, are tiles. Gaps continue
//! across switches, except the gap between the two small branches, which
//! ends at an exceptional segment. A maximal chain of tiles is a gap line:
//! open if it ends at exceptional segments, closed (an annulus) otherwise.
//! `k` crossings sit in distinct tiles, no two in vertically adjacent tiles
//! of one column. A crossing may move to the next tile of its gap line.
//! Normal forms are the move classes that never put two crossings next to
//! each other on a line (a bigon) and keep every crossing on an open line.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

pub const TRACK_FORMAT: &str = "track v1";
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EndKind {
    Start,
    End,
}

/// One end of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: EndKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub name: String,
    /// Part of the train track proper, as opposed to an extra edge.
    pub on_track: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Vertex {
    pub name: String,
    pub plus: Vec<EdgeEnd>,
    pub minus: Vec<EdgeEnd>,
}

impl Vertex {
    /// Exceptional segments: one fewer than the germs merging on each side.
    pub fn exceptional_segments(&self) -> usize {
        self.plus.len().saturating_sub(1) + self.minus.len().saturating_sub(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Track {
    edges: Vec<Edge>,
    vertices: Vec<Vertex>,
    /// `ι(e, e′)` keyed by `(min, max)` edge index.
    crossings: BTreeMap<(usize, usize), u64>,
}

impl Track {
    pub fn new(edges: Vec<Edge>, vertices: Vec<Vertex>, crossings: BTreeMap<(usize, usize), u64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTrack(m));
        if vertices.is_empty() {
            return bad("no vertices".into());
        }
        let mut seen: HashMap<EdgeEnd, usize> = HashMap::new();
        for (vi, v) in vertices.iter().enumerate() {
            if v.plus.is_empty() || v.minus.is_empty() {
                return bad(format!("vertex {} needs germs on both sides", v.name));
            }
            for g in v.plus.iter().chain(&v.minus) {
                if g.edge >= edges.len() {
                    return bad(format!("vertex {} uses an unknown edge", v.name));
                }
                if seen.insert(*g, vi).is_some() {
                    return bad(format!("edge end {:?} of {} attached twice", g.end, edges[g.edge].name));
                }
            }
            let track_germs = |side: &[EdgeEnd]| side.iter().filter(|g| edges[g.edge].on_track).count();
            let (p, m) = (track_germs(&v.plus), track_germs(&v.minus));
            if p + m != 0 && !((p, m) == (1, 2) || (p, m) == (2, 1)) {
                return bad(format!("vertex {} is not a trivalent switch of the track ({p} | {m})", v.name));
            }
        }
        for (i, e) in edges.iter().enumerate() {
            for end in [EndKind::Start, EndKind::End] {
                if !seen.contains_key(&EdgeEnd { edge: i, end }) {
                    return bad(format!("edge {} has a free {:?}", e.name, end));
                }
            }
        }
        for &(i, j) in crossings.keys() {
            if i > j || j >= edges.len() {
                return bad("crossing table keys must be (min, max) edge indices".into());
            }
            if edges[i].on_track || edges[j].on_track {
                return bad(format!(
                    "crossing table entry ({}, {}) involves a track edge",
                    edges[i].name, edges[j].name
                ));
            }
        }
        // Connectivity through edges.
        let mut adj = vec![Vec::new(); vertices.len()];
        for e in 0..edges.len() {
            let a = seen[&EdgeEnd { edge: e, end: EndKind::Start }];
            let b = seen[&EdgeEnd { edge: e, end: EndKind::End }];
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut reached = vec![false; vertices.len()];
        let mut queue = VecDeque::from([0]);
        reached[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !reached[w] {
                    reached[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return bad("track is disconnected".into());
        }
        Ok(Self { edges, vertices, crossings })
    }

    /// The torus track: edges `a, b, c` and two switches where `c` splits
    /// into `a` and `b`.
    pub fn torus() -> Self {
        TORUS_TRACK.parse().expect("built-in torus track parses")
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn crossing(&self, e: usize, f: usize) -> u64 {
        self.crossings.get(&(e.min(f), e.max(f))).copied().unwrap_or(0)
    }

    /// Switch matrix `W`: one row per vertex, `+1` per plus-side germ and
    /// `−1` per minus-side germ.
    pub fn switch_matrix(&self) -> Vec<Vec<i64>> {
        self.vertices
            .iter()
            .map(|v| {
                let mut row = vec![0i64; self.edges.len()];
                for g in &v.plus {
                    row[g.edge] += 1;
                }
                for g in &v.minus {
                    row[g.edge] -= 1;
                }
                row
            })
            .collect()
    }

    pub fn switch_defects(&self, w: &WeightVector) -> Vec<i64> {
        self.switch_matrix()
            .iter()
            .map(|row| row.iter().zip(&w.0).map(|(a, &b)| a * b as i64).sum())
            .collect()
    }

    pub fn satisfies_switch_equations(&self, w: &WeightVector) -> bool {
        w.0.len() == self.edges.len() && self.switch_defects(w).iter().all(|&d| d == 0)
    }

    pub fn is_train_track(&self) -> bool {
        self.edges.iter().all(|e| e.on_track)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{TRACK_FORMAT}\n");
        for e in &self.edges {
            s += &format!("edge {} {}\n", e.name, if e.on_track { "track" } else { "extra" });
        }
        let end = |g: &EdgeEnd| {
            format!("{}.{}", self.edges[g.edge].name, if g.end == EndKind::Start { "start" } else { "end" })
        };
        for v in &self.vertices {
            let p: Vec<String> = v.plus.iter().map(end).collect();
            let m: Vec<String> = v.minus.iter().map(end).collect();
            s += &format!("vertex {} {} | {}\n", v.name, p.join(" "), m.join(" "));
        }
        for (&(i, j), &n) in &self.crossings {
            s += &format!("crossing {} {} {}\n", self.edges[i].name, self.edges[j].name, n);
        }
        s
    }
}

const TORUS_TRACK: &str = "track v1
edge a track
edge b track
edge c track
vertex v1 c.start | a.start b.start
vertex v2 c.end | a.end b.end
";

impl FromStr for Track {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut edges: Vec<Edge> = Vec::new();
        let mut vertices = Vec::new();
        let mut crossings = BTreeMap::new();
        let mut header = false;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |message: String| Error::TrackSyntax { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if !header {
                if content != TRACK_FORMAT {
                    return Err(err(format!("expected header {TRACK_FORMAT:?}")));
                }
                header = true;
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            let edge_of = |name: &str, edges: &[Edge]| {
                edges
                    .iter()
                    .position(|e| e.name == name)
                    .ok_or_else(|| err(format!("unknown edge {name:?}")))
            };
            match words[0] {
                "edge" => {
                    let [_, name, kind] = words[..] else {
                        return Err(err("usage: edge NAME track|extra".into()));
                    };
                    if edges.iter().any(|e| e.name == name) {
                        return Err(err(format!("edge {name:?} declared twice")));
                    }
                    let on_track = match kind {
                        "track" => true,
                        "extra" => false,
                        _ => return Err(err(format!("edge kind must be track or extra, got {kind:?}"))),
                    };
                    edges.push(Edge { name: name.to_string(), on_track });
                }
                "vertex" => {
                    if words.len() < 2 {
                        return Err(err("usage: vertex NAME ENDS | ENDS".into()));
                    }
                    let rest = &words[2..];
                    let bar = rest
                        .iter()
                        .position(|w| *w == "|")
                        .ok_or_else(|| err("vertex needs a '|' between its two sides".into()))?;
                    let parse_end = |w: &str| -> Result<EdgeEnd> {
                        let (name, which) = w.rsplit_once('.').ok_or_else(|| err(format!("bad edge end {w:?}")))?;
                        let end = match which {
                            "start" => EndKind::Start,
                            "end" => EndKind::End,
                            _ => return Err(err(format!("bad edge end {w:?}"))),
                        };
                        Ok(EdgeEnd { edge: edge_of(name, &edges)?, end })
                    };
                    let plus = rest[..bar].iter().map(|w| parse_end(w)).collect::<Result<Vec<_>>>()?;
                    let minus = rest[bar + 1..].iter().map(|w| parse_end(w)).collect::<Result<Vec<_>>>()?;
                    vertices.push(Vertex { name: words[1].to_string(), plus, minus });
                }
                "crossing" => {
                    let [_, e, f, k] = words[..] else {
                        return Err(err("usage: crossing EDGE EDGE COUNT".into()));
                    };
                    let (i, j) = (edge_of(e, &edges)?, edge_of(f, &edges)?);
                    let k: u64 = k.parse().map_err(|_| err(format!("bad crossing count {k:?}")))?;
                    crossings.insert((i.min(j), i.max(j)), k);
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        if !header {
            return Err(Error::TrackSyntax { line: 0, message: "empty track file".into() });
        }
        Track::new(edges, vertices, crossings)
    }
}

/// Non-negative integer weights, one per edge in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeightVector(pub Vec<u64>);

impl WeightVector {
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad weight {x:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(WeightVector)
    }

    pub fn shifted(&self, by: &[u64], m: u64) -> Self {
        WeightVector(self.0.iter().zip(by).map(|(a, b)| a + m * b).collect())
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// An integer basis of `ker W`, from the reduced row echelon form with
/// pivots chosen from the last column backwards.
pub fn switch_kernel(track: &Track) -> Vec<Vec<i64>> {
    let w = track.switch_matrix();
    let n = track.edges.len();
    let mut rows: Vec<Vec<Ratio<i64>>> = w
        .iter()
        .map(|r| r.iter().map(|&x| Ratio::from_integer(x)).collect())
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0;
    for col in (0..n).rev() {
        let Some(pr) = (next_row..rows.len()).find(|&r| rows[r][col] != Ratio::from_integer(0)) else {
            continue;
        };
        rows.swap(next_row, pr);
        let pv = rows[next_row][col];
        for x in rows[next_row].iter_mut() {
            *x /= pv;
        }
        for r in 0..rows.len() {
            if r != next_row && rows[r][col] != Ratio::from_integer(0) {
                let f = rows[r][col];
                for c in 0..n {
                    let sub = f * rows[next_row][c];
                    rows[r][c] -= sub;
                }
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
    }
    let pivot_cols: HashSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
    (0..n)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![Ratio::from_integer(0i64); n];
            v[free] = Ratio::from_integer(1);
            for &(r, c) in &pivots {
                v[c] = -rows[r][free];
            }
            let lcm = v.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
            let ints: Vec<i64> = v.iter().map(|x| (x * lcm).to_integer()).collect();
            let g = ints.iter().fold(0i64, |acc, &x| acc.gcd(&x)).max(1);
            ints.iter().map(|x| x / g).collect()
        })
        .collect()
}

/// A strictly positive switch solution: the first combination of the kernel
/// basis, with coefficients `1..=max_coefficient`, that is positive on
/// every edge.
pub fn positive_switch_solution(track: &Track, max_coefficient: i64) -> Option<Vec<u64>> {
    let basis = switch_kernel(track);
    let n = track.edges.len();
    let mut coeff = vec![1i64; basis.len()];
    loop {
        let v: Vec<i64> = (0..n).map(|i| basis.iter().zip(&coeff).map(|(b, c)| b[i] * c).sum()).collect();
        if v.iter().all(|&x| x > 0) {
            return Some(v.into_iter().map(|x| x as u64).collect());
        }
        let i = (0..coeff.len()).find(|&i| coeff[i] < max_coefficient)?;
        coeff[i] += 1;
        for c in &mut coeff[..i] {
            *c = 1;
        }
    }
}

/// `Σ ι(e, e′)·ω(e)·ω(e′)` over unordered pairs of extra edges, diagonal
/// pairs included once.
pub fn crossing_lower_bound(track: &Track, w: &WeightVector) -> Result<u64> {
    if !track.satisfies_switch_equations(w) {
        return Err(Error::Precondition(format!("weights {w} violate the switch equations")));
    }
    let mut total: u64 = 0;
    for (&(i, j), &k) in &track.crossings {
        let term = k
            .checked_mul(w.0[i])
            .and_then(|x| x.checked_mul(w.0[j]))
            .ok_or(Error::Overflow("summing the crossing lower bound"))?;
        total = total.checked_add(term).ok_or(Error::Overflow("summing the crossing lower bound"))?;
    }
    Ok(total)
}

/// On the torus track, `ρ = ω(c) − ω(a) − ω(b)` and
/// `π(ω) = (ω(a) + ρ, ω(b) + ρ, ω(c) + ρ)`.
pub fn torus_defect_map(w: [u64; 3]) -> Result<[u64; 3]> {
    let [a, b, c] = w;
    let ab = a.checked_add(b).ok_or(Error::Overflow("adding torus weights"))?;
    if c < ab {
        return Err(Error::Precondition(format!("negative defect: {c} < {a} + {b}")));
    }
    let rho = c - ab;
    let add = |x: u64| x.checked_add(rho).ok_or(Error::Overflow("applying the defect map"));
    Ok([add(a)?, add(b)?, add(c)?])
}

/// The tiled band complex of a weighted train track.
#[derive(Clone, Debug)]
pub struct Tiling {
    weights: Vec<u64>,
    leaves: usize,
    /// First tile id of each edge; tile `(e, r, c)` is
    /// `offset[e] + r·leaves + c`.
    offset: Vec<usize>,
    line_of: Vec<u32>,
    pos_of: Vec<u32>,
    lines: Vec<GapLine>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapLine {
    pub closed: bool,
    pub tiles: Vec<usize>,
}

/// Position of an edge's strand `i` in the transverse order at a switch,
/// facing from the big side to the small side.
fn local_strand(end: EdgeEnd, i: usize, w: usize, big: bool) -> usize {
    let same = if big { end.end == EndKind::End } else { end.end == EndKind::Start };
    if same {
        i
    } else {
        w - 1 - i
    }
}

impl Tiling {
    pub fn new(track: &Track, w: &WeightVector, leaves: usize) -> Result<Self> {
        if !track.is_train_track() {
            return Err(Error::InvalidTrack("normal forms are defined on train tracks without extra edges".into()));
        }
        if !track.satisfies_switch_equations(w) {
            return Err(Error::Precondition(format!("weights {w} violate the switch equations")));
        }
        if leaves == 0 {
            return Err(Error::Precondition("need at least one leaf per edge".into()));
        }
        let weights = w.0.clone();
        if let Some(e) = weights.iter().position(|&x| x < 2) {
            return Err(Error::Precondition(format!("edge {} needs weight at least 2", track.edges[e].name)));
        }
        let n_edges = weights.len();
        let mut offset = Vec::with_capacity(n_edges + 1);
        let mut total = 0usize;
        for &x in &weights {
            offset.push(total);
            total += (x as usize - 1) * leaves;
        }
        offset.push(total);
        // link[(edge, end, gap)] = continuation, or None at a cusp.
        let mut link: HashMap<(usize, EndKind, usize), Option<(usize, EndKind, usize)>> = HashMap::new();
        for v in &track.vertices {
            let (big, small) = if v.plus.len() == 1 { (v.plus[0], &v.minus) } else { (v.minus[0], &v.plus) };
            let (s1, s2) = (small[0], small[1]);
            let (wb, w1, w2) = (weights[big.edge] as usize, weights[s1.edge] as usize, weights[s2.edge] as usize);
            let mut big_at = vec![0usize; wb];
            for i in 0..wb {
                big_at[local_strand(big, i, wb, true)] = i;
            }
            let mut small_at = vec![(s1, 0usize); wb];
            for i in 0..w1 {
                small_at[local_strand(s1, i, w1, false)] = (s1, i);
            }
            for i in 0..w2 {
                small_at[w1 + local_strand(s2, i, w2, false)] = (s2, i);
            }
            for j in 0..wb - 1 {
                let gb = big_at[j].min(big_at[j + 1]);
                if j == w1 - 1 {
                    link.insert((big.edge, big.end, gb), None);
                } else {
                    let ((se, a), (_, b)) = (small_at[j], small_at[j + 1]);
                    let gs = a.min(b);
                    link.insert((big.edge, big.end, gb), Some((se.edge, se.end, gs)));
                    link.insert((se.edge, se.end, gs), Some((big.edge, big.end, gb)));
                }
            }
        }
        let tile = |e: usize, r: usize, c: usize| offset[e] + r * leaves + c;
        let mut line_of = vec![u32::MAX; total];
        let mut pos_of = vec![0u32; total];
        let mut lines = Vec::new();
        for e in 0..n_edges {
            for r in 0..weights[e] as usize - 1 {
                if line_of[tile(e, r, 0)] != u32::MAX {
                    continue;
                }
                // Walk backwards to an end, or all the way round.
                let (mut ce, mut cr, mut forward) = (e, r, false);
                let mut closed = false;
                loop {
                    let side = if forward { EndKind::End } else { EndKind::Start };
                    match link[&(ce, side, cr)] {
                        None => break,
                        Some((ne, nend, nr)) => {
                            ce = ne;
                            cr = nr;
                            forward = nend == EndKind::Start;
                            if (ce, cr) == (e, r) {
                                closed = true;
                                break;
                            }
                        }
                    }
                }
                // Then forwards, collecting tiles.
                forward = !forward;
                let start = (ce, cr);
                let id = lines.len() as u32;
                let mut tiles = Vec::new();
                loop {
                    for k in 0..leaves {
                        let c = if forward { k } else { leaves - 1 - k };
                        let t = tile(ce, cr, c);
                        line_of[t] = id;
                        pos_of[t] = tiles.len() as u32;
                        tiles.push(t);
                    }
                    let side = if forward { EndKind::End } else { EndKind::Start };
                    match link[&(ce, side, cr)] {
                        None => break,
                        Some((ne, nend, nr)) => {
                            ce = ne;
                            cr = nr;
                            forward = nend == EndKind::Start;
                            if (ce, cr) == start {
                                break;
                            }
                        }
                    }
                }
                lines.push(GapLine { closed, tiles });
            }
        }
        Ok(Self { weights, leaves, offset, line_of, pos_of, lines })
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn tile_count(&self) -> usize {
        self.line_of.len()
    }

    pub fn lines(&self) -> &[GapLine] {
        &self.lines
    }

    pub fn open_lines(&self) -> usize {
        self.lines.iter().filter(|l| !l.closed).count()
    }

    pub fn tile(&self, edge: usize, row: usize, col: usize) -> Option<usize> {
        if edge >= self.weights.len() || row + 1 >= self.weights[edge] as usize || col >= self.leaves {
            return None;
        }
        Some(self.offset[edge] + row * self.leaves + col)
    }

    /// `(edge, row, column)` of a tile.
    pub fn coordinates(&self, t: usize) -> (usize, usize, usize) {
        let e = self.offset.partition_point(|&o| o <= t) - 1;
        let local = t - self.offset[e];
        (e, local / self.leaves, local % self.leaves)
    }

    pub fn line_of(&self, t: usize) -> usize {
        self.line_of[t] as usize
    }

    pub fn position(&self, t: usize) -> usize {
        self.pos_of[t] as usize
    }

    /// Tiles directly above and below in the same column.
    fn vertical_neighbours(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        let (e, r, c) = self.coordinates(t);
        [r.checked_sub(1), Some(r + 1)]
            .into_iter()
            .flatten()
            .filter_map(move |r2| self.tile(e, r2, c))
    }

    /// Distinct tiles, no two vertically adjacent.
    pub fn is_valid(&self, tiles: &[usize]) -> bool {
        let set: HashSet<usize> = tiles.iter().copied().collect();
        set.len() == tiles.len() && tiles.iter().all(|&t| self.vertical_neighbours(t).all(|u| !set.contains(&u)))
    }

    /// Tiles next to `t` along its gap line.
    fn line_neighbours(&self, t: usize) -> Vec<usize> {
        let line = &self.lines[self.line_of(t)];
        let (p, n) = (self.position(t), line.tiles.len());
        let mut out = Vec::with_capacity(2);
        if line.closed {
            out.push(line.tiles[(p + n - 1) % n]);
            out.push(line.tiles[(p + 1) % n]);
        } else {
            if p > 0 {
                out.push(line.tiles[p - 1]);
            }
            if p + 1 < n {
                out.push(line.tiles[p + 1]);
            }
        }
        out
    }
}

/// A placement of crossings in the tiling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NormalFormState {
    /// Sorted tile ids.
    pub crossings: Vec<usize>,
}

impl NormalFormState {
    pub fn new(tiling: &Tiling, mut crossings: Vec<usize>) -> Result<Self> {
        crossings.sort_unstable();
        if crossings.iter().any(|&t| t >= tiling.tile_count()) || !tiling.is_valid(&crossings) {
            return Err(Error::Precondition("crossings must occupy distinct, non-adjacent tiles".into()));
        }
        Ok(Self { crossings })
    }

    /// Runs of crossings in consecutive positions of one gap line, each with
    /// whether it reaches an exceptional segment.
    fn runs(&self, tiling: &Tiling) -> Vec<(usize, Vec<usize>, bool)> {
        let mut by_line: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in &self.crossings {
            by_line.entry(tiling.line_of(t)).or_default().push(tiling.position(t));
        }
        let mut out = Vec::new();
        for (l, mut ps) in by_line {
            ps.sort_unstable();
            let line = &tiling.lines[l];
            let n = line.tiles.len();
            let mut runs: Vec<Vec<usize>> = Vec::new();
            for p in ps {
                match runs.last_mut() {
                    Some(r) if *r.last().unwrap() + 1 == p => r.push(p),
                    _ => runs.push(vec![p]),
                }
            }
            if line.closed && runs.len() > 1 && runs[0][0] == 0 && *runs.last().unwrap().last().unwrap() == n - 1 {
                let first = runs.remove(0);
                runs.last_mut().unwrap().extend(first);
            }
            for r in runs {
                let touches = !line.closed && (r.contains(&0) || r.contains(&(n - 1)));
                out.push((l, r, touches));
            }
        }
        out
    }

    /// Tiles in runs that do not reach an exceptional segment.
    pub fn complexity(&self, tiling: &Tiling) -> usize {
        self.runs(tiling).iter().filter(|(_, _, t)| !t).map(|(_, r, _)| r.len()).sum()
    }
}

/// Shifts every run not touching an exceptional segment one tile towards
/// the start of its line (or back, if that is blocked) until the complexity
/// vanishes. A repeated state means some run circles a closed annulus of
/// tiles, which only happens for a non-primitive component.
pub fn reduce_to_normal_form(tiling: &Tiling, state: &NormalFormState, budget: usize) -> Result<NormalFormState> {
    let mut cur = state.clone();
    let mut seen = HashSet::new();
    for _ in 0..budget {
        let runs = cur.runs(tiling);
        let Some((l, run, _)) = runs.into_iter().find(|(_, _, touches)| !touches) else {
            return Ok(cur);
        };
        if !seen.insert(cur.clone()) {
            return Err(Error::NotPrimitive(format!(
                "crossings circle the closed tile annulus of gap line {l}"
            )));
        }
        let line = &tiling.lines[l];
        let n = line.tiles.len();
        let moved = |delta: isize| -> Option<NormalFormState> {
            let mut set: Vec<usize> = cur.crossings.clone();
            for &p in &run {
                let q = p as isize + delta;
                let q = if line.closed { q.rem_euclid(n as isize) } else if q < 0 || q >= n as isize { return None } else { q };
                let t = line.tiles[p];
                let i = set.iter().position(|&x| x == t).expect("run tiles are crossings");
                set[i] = line.tiles[q as usize];
            }
            set.sort_unstable();
            tiling.is_valid(&set).then_some(NormalFormState { crossings: set })
        };
        cur = moved(-1).or_else(|| moved(1)).ok_or_else(|| {
            Error::Precondition(format!("run on gap line {l} is blocked in both directions"))
        })?;
    }
    Err(Error::Budget { what: "reducing to normal form".into(), budget })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exact component count by sweeping the position grid of each pair of
    /// open gap lines (k ≤ 2).
    Sweep,
    /// Breadth-first closure over all valid placements (any k; small
    /// tilings only).
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct NormalFormOptions {
    /// Leaves per edge; defaults to `max(200k, 8)`.
    pub leaves: Option<usize>,
    pub method: Option<Method>,
    pub budget: usize,
}

impl Default for NormalFormOptions {
    fn default() -> Self {
        Self { leaves: None, method: None, budget: DEFAULT_STATE_BUDGET }
    }
}

pub fn default_leaves(k: usize) -> usize {
    (200 * k).max(8)
}

/// `1`, `V/2`, `V(V+6)/8` for `k = 0, 1, 2`.
pub fn closed_form(vertices: usize, k: usize) -> Option<u64> {
    let v = vertices as u64;
    match k {
        0 => Some(1),
        1 => Some(v / 2),
        2 => Some(v * (v + 6) / 8),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormCount {
    pub k: usize,
    pub count: u64,
    pub representatives: Vec<NormalFormState>,
    pub method: Method,
    pub leaves: usize,
    pub tiles: usize,
    pub open_lines: usize,
    pub closed_lines: usize,
    pub closed_form: Option<u64>,
}

/// Number of normal-form classes of `k` crossings on the weighted track.
pub fn count_normal_forms(track: &Track, w: &WeightVector, k: usize, opts: &NormalFormOptions) -> Result<NormalFormCount> {
    for (e, edge) in track.edges.iter().enumerate() {
        let x = *w.0.get(e).ok_or_else(|| Error::Precondition(format!("{} weights for {} edges", w.0.len(), track.edges.len())))?;
        if edge.on_track && x < k as u64 + 2 {
            return Err(Error::Threshold { edge: edge.name.clone(), weight: x, required: k as u64 + 2 });
        }
    }
    if w.0.len() != track.edges.len() {
        return Err(Error::Precondition(format!("{} weights for {} edges", w.0.len(), track.edges.len())));
    }
    let leaves = opts.leaves.unwrap_or_else(|| default_leaves(k));
    let tiling = Tiling::new(track, w, leaves)?;
    let method = opts.method.unwrap_or(if k <= 2 { Method::Sweep } else { Method::Exhaustive });
    let reps = match (method, k) {
        (_, 0) => vec![NormalFormState { crossings: Vec::new() }],
        (Method::Sweep, 1) => tiling
            .lines
            .iter()
            .filter(|l| !l.closed)
            .map(|l| NormalFormState { crossings: vec![l.tiles[0]] })
            .collect(),
        (Method::Sweep, 2) => sweep_pairs(&tiling),
        (Method::Sweep, _) => {
            return Err(Error::Precondition("the sweep handles at most two crossings".into()));
        }
        (Method::Exhaustive, _) => exhaustive(&tiling, k, opts.budget)?,
    };
    Ok(NormalFormCount {
        k,
        count: reps.len() as u64,
        representatives: reps,
        method,
        leaves,
        tiles: tiling.tile_count(),
        open_lines: tiling.open_lines(),
        closed_lines: tiling.lines.len() - tiling.open_lines(),
        closed_form: closed_form(track.vertices.len(), k),
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root, so the first-created element stays the root.
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.parent[hi] = lo;
        }
    }
}

/// Two-crossing classes. For open lines `i ≤ j`, cell `(p, q)` of the grid
/// of positions is a placement; each row `p` splits into free intervals of
/// `q`, and intervals of consecutive rows that overlap are joined.
fn sweep_pairs(tiling: &Tiling) -> Vec<NormalFormState> {
    let open: Vec<usize> = (0..tiling.lines.len()).filter(|&l| !tiling.lines[l].closed).collect();
    let mut reps = Vec::new();
    for (a, &i) in open.iter().enumerate() {
        for &j in &open[a..] {
            let (li, lj) = (&tiling.lines[i], &tiling.lines[j]);
            let (ni, nj) = (li.tiles.len(), lj.tiles.len());
            let same = i == j;
            let mut uf = UnionFind::new();
            // (q_lo, q_hi inclusive, id, row) per interval, current and previous row.
            let mut first_cell: Vec<(usize, usize)> = Vec::new();
            let mut bad: Vec<bool> = Vec::new();
            let mut prev: Vec<(usize, usize, usize)> = Vec::new();
            for p in 0..ni {
                let lo = if same { p + 1 } else { 0 };
                let mut blocked: Vec<usize> = tiling
                    .vertical_neighbours(li.tiles[p])
                    .filter(|&u| tiling.line_of(u) == j)
                    .map(|u| tiling.position(u))
                    .filter(|&q| q >= lo)
                    .collect();
                blocked.sort_unstable();
                let mut cur = Vec::new();
                let mut start = lo;
                for b in blocked.into_iter().chain(std::iter::once(nj)) {
                    if b > start {
                        let id = uf.add();
                        first_cell.push((p, start));
                        bad.push(same && start == p + 1);
                        cur.push((start, b - 1, id));
                    }
                    start = start.max(b + 1);
                }
                // Join with overlapping intervals of the previous row.
                let (mut x, mut y) = (0, 0);
                while x < prev.len() && y < cur.len() {
                    let (a0, a1, ida) = prev[x];
                    let (b0, b1, idb) = cur[y];
                    if a0.max(b0) <= a1.min(b1) {
                        uf.union(ida, idb);
                    }
                    if a1 < b1 {
                        x += 1;
                    } else {
                        y += 1;
                    }
                }
                prev = cur;
            }
            let n = uf.parent.len();
            let mut root_bad = vec![false; n];
            for id in 0..n {
                if bad[id] {
                    let r = uf.find(id);
                    root_bad[r] = true;
                }
            }
            for id in 0..n {
                if uf.find(id) == id && !root_bad[id] {
                    let (p, q) = first_cell[id];
                    let mut c = vec![li.tiles[p], lj.tiles[q]];
                    c.sort_unstable();
                    reps.push(NormalFormState { crossings: c });
                }
            }
        }
    }
    reps
}

/// Every valid placement of `k` crossings on open lines, closed under
/// moves; classes with a bigon are dropped.
fn exhaustive(tiling: &Tiling, k: usize, budget: usize) -> Result<Vec<NormalFormState>> {
    let open_tiles: Vec<usize> = (0..tiling.tile_count())
        .filter(|&t| !tiling.lines[tiling.line_of(t)].closed)
        .collect();
    let mut states: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut order: Vec<Vec<usize>> = Vec::new();
    // Enumerate k-subsets in lexicographic order.
    let n = open_tiles.len();
    if k > n {
        return Ok(Vec::new());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let cfg: Vec<usize> = idx.iter().map(|&i| open_tiles[i]).collect();
        if tiling.is_valid(&cfg) {
            if states.len() >= budget {
                return Err(Error::Budget { what: format!("enumerating placements of {k} crossings"), budget });
            }
            states.insert(cfg.clone(), order.len());
            order.push(cfg);
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { break };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let mut uf = UnionFind::new();
    for _ in 0..order.len() {
        uf.add();
    }
    let mut bad = vec![false; order.len()];
    for (id, cfg) in order.iter().enumerate() {
        let set: HashSet<usize> = cfg.iter().copied().collect();
        for m in 0..k {
            for nb in tiling.line_neighbours(cfg[m]) {
                if set.contains(&nb) {
                    bad[id] = true;
                    continue;
                }
                let mut d = cfg.clone();
                d[m] = nb;
                d.sort_unstable();
                if let Some(&other) = states.get(&d) {
                    uf.union(id, other);
                }
            }
        }
    }
    let mut root_bad = vec![false; order.len()];
    for id in 0..order.len() {
        if bad[id] {
            let r = uf.find(id);
            root_bad[r] = true;
        }
    }
    Ok((0..order.len())
        .filter(|&id| uf.find(id) == id && !root_bad[id])
        .map(|id| NormalFormState { crossings: order[id].clone() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(leaves: usize, method: Method) -> NormalFormOptions {
        NormalFormOptions { leaves: Some(leaves), method: Some(method), budget: DEFAULT_STATE_BUDGET }
    }

    #[test]
    fn torus_kernel() {
        let t = Track::torus();
        let k = switch_kernel(&t);
        assert_eq!(k, vec![vec![0, 1, 1], vec![1, 0, 1]].into_iter().rev().collect::<Vec<_>>());
        for v in &k {
            let w = WeightVector(v.iter().map(|&x| x as u64).collect());
            assert!(t.satisfies_switch_equations(&w));
        }
    }

    #[test]
    fn track_text_round_trips() {
        let t = Track::torus();
        let again: Track = t.to_text().parse().unwrap();
        assert_eq!(again.to_text(), t.to_text());
    }

    #[test]
    fn degenerate_tracks_rejected() {
        assert!("track v1\nedge a track\nvertex v a.start | a.end\n".parse::<Track>().is_err());
        assert!("track v1\nedge a track\n".parse::<Track>().is_err());
        assert!("nonsense".parse::<Track>().is_err());
        let e = "track v1\nedge a track\nvertex v a.start | a.bogus\n".parse::<Track>().unwrap_err();
        assert!(matches!(e, Error::TrackSyntax { line: 3, .. }));
    }

    #[test]
    fn crossing_bound_examples() {
        let t: Track = "track v1
edge a track
edge b track
edge c track
edge d extra
vertex v1 c.start d.start | a.start b.start d.end
vertex v2 c.end | a.end b.end
crossing d d 1
"
        .parse()
        .unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(crossing_lower_bound(&t, &WeightVector(vec![1, 1, 2, 0])).unwrap(), 0);
        assert_eq!(crossing_lower_bound(&t, &WeightVector(vec![1, 1, 2, 1])).unwrap(), 1);
        assert_eq!(crossing_lower_bound(&t, &WeightVector(vec![1, 1, 2, 2])).unwrap(), 4);
        assert!(crossing_lower_bound(&t, &WeightVector(vec![1, 1, 3, 2])).is_err());
    }

    #[test]
    fn defect_map_examples() {
        assert_eq!(torus_defect_map([1, 0, 1]).unwrap(), [1, 0, 1]);
        assert_eq!(torus_defect_map([1, 1, 3]).unwrap(), [2, 2, 4]);
        assert!(torus_defect_map([2, 2, 3]).is_err());
    }

    #[test]
    fn torus_counts_small_tilings_agree() {
        let t = Track::torus();
        for w in [[4, 5, 9], [5, 4, 9], [4, 7, 11]] {
            let w = WeightVector(w.to_vec());
            for k in 0..=2 {
                let a = count_normal_forms(&t, &w, k, &opts(8, Method::Sweep)).unwrap();
                let b = count_normal_forms(&t, &w, k, &opts(8, Method::Exhaustive)).unwrap();
                assert_eq!(a.count, b.count, "{w} k={k}");
                assert_eq!(a.count, closed_form(2, k).unwrap(), "{w} k={k}");
            }
        }
    }

    #[test]
    fn torus_threshold_and_examples() {
        let t = Track::torus();
        let w = WeightVector(vec![12, 12, 24]);
        let d = NormalFormOptions::default();
        assert_eq!(count_normal_forms(&t, &w, 0, &d).unwrap().count, 1);
        assert_eq!(count_normal_forms(&t, &w, 1, &d).unwrap().count, 1);
        let e = count_normal_forms(&t, &WeightVector(vec![2, 2, 4]), 2, &d).unwrap_err();
        assert!(matches!(e, Error::Threshold { required: 4, .. }));
    }

    #[test]
    fn reduction_examples() {
        let t = Track::torus();
        let w = WeightVector(vec![4, 5, 9]);
        let tiling = Tiling::new(&t, &w, 8).unwrap();
        let open = tiling.lines.iter().position(|l| !l.closed).unwrap();
        let line = &tiling.lines[open];
        let s0 = NormalFormState::new(&tiling, vec![line.tiles[0]]).unwrap();
        assert_eq!(s0.complexity(&tiling), 0);
        assert_eq!(reduce_to_normal_form(&tiling, &s0, 100).unwrap(), s0);
        let s1 = NormalFormState::new(&tiling, vec![line.tiles[1]]).unwrap();
        assert_eq!(s1.complexity(&tiling), 1);
        let r = reduce_to_normal_form(&tiling, &s1, 100).unwrap();
        assert_eq!(r, s0);
        assert_eq!(r.complexity(&tiling), 0);
    }

    #[test]
    fn closed_annulus_is_detected() {
        // (4, 4, 8) is twice a primitive class: the tiling has closed lines.
        let t = Track::torus();
        let tiling = Tiling::new(&t, &WeightVector(vec![4, 4, 8]), 8).unwrap();
        let closed = tiling.lines.iter().find(|l| l.closed).expect("a closed gap line");
        let s = NormalFormState::new(&tiling, vec![closed.tiles[3]]).unwrap();
        assert!(matches!(reduce_to_normal_form(&tiling, &s, 10_000), Err(Error::NotPrimitive(_))));
    }
}
