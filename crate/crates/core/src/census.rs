//! Mapping class orbits of curves on the punctured torus, counted by
//! hyperbolic length or by intersection with a filling multicurve.
//!
//! Sub-level sets of an orbit need not be connected under the generator
//! moves. The census therefore explores the component of the seed inside
//! `{value ≤ θ}` for `θ = slack·L`, reports classes with value `≤ L`, and
//! certifies a checkpoint when raising the exploration bound by the
//! certification step does not change the count.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::freegroup::{apply_move, normalize_slope, CyclicWord, Move};
use crate::hyperbolic::{arc_intersection, arc_self_intersection, PuncturedTorusStructure};
use crate::output::{fmt_f64, CsvTable, ARTIFACT_VERSION};

pub const DEFAULT_SLACK: f64 = 1.3;
pub const DEFAULT_CERTIFICATION_STEP: f64 = 1.15;
pub const DEFAULT_CHECKPOINT_RATIO: f64 = 1.25;
pub const DEFAULT_CHECKPOINT_COUNT: usize = 8;
pub const DEFAULT_MAX_CLASSES: usize = 20_000_000;
/// How many times a checkpoint may raise its slack by the certification
/// step before it is reported uncertified.
pub const DEFAULT_MAX_SLACK_STEPS: u32 = 8;
/// Every this many counted classes, the self-intersection number is
/// rechecked against the seed's.
pub const IOTA_SAMPLE_STRIDE: usize = 50;

const SNAPSHOT_FORMAT: &str = "curvecount-census-snapshot/1";

type Mat = [[f64; 2]; 2];

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

fn length_from_trace(t: f64) -> f64 {
    2.0 * (t.abs() / 2.0).max(1.0).acosh()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMode {
    /// Primitive classes `(p, q)/±1`.
    Primitive,
    /// Every nonzero `(p, q)/±1`, a multiple `n·(p', q')` having length
    /// `n·ℓ(p', q')`.
    AllIntegral,
}

/// Lengths of all simple closed geodesics of length `≤ l`, one per slope.
/// Stern–Brocot descent in both quadrants; the length grows along every
/// branch, so a branch is cut at the first slope longer than `l`.
pub fn simple_lengths(x: &PuncturedTorusStructure, l: f64) -> Vec<f64> {
    let (ma, mb) = x.generator_matrices();
    let ma_inv = [[ma[1][1], -ma[0][1]], [-ma[1][0], ma[0][0]]];
    let mut out = Vec::new();
    for m in [ma, mb] {
        let len = length_from_trace(m[0][0] + m[1][1]);
        if len <= l {
            out.push(len);
        }
    }
    for left in [ma, ma_inv] {
        let mut stack = vec![(left, mb)];
        while let Some((u, v)) = stack.pop() {
            let m = mat_mul(&u, &v);
            let len = length_from_trace(m[0][0] + m[1][1]);
            if len > l {
                continue;
            }
            out.push(len);
            stack.push((u, m));
            stack.push((m, v));
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Number of simple classes (or simple multicurves with parallel
/// components) of length at most `l`.
pub fn simple_count(x: &PuncturedTorusStructure, l: f64, mode: CountMode) -> u64 {
    let lengths = simple_lengths(x, l);
    match mode {
        CountMode::Primitive => lengths.len() as u64,
        CountMode::AllIntegral => lengths.iter().map(|&len| (l / len).floor() as u64).sum(),
    }
}

/// `l_max / ratio^j` for `j = count−1, …, 0`.
pub fn geometric_checkpoints(l_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).rev().map(|j| l_max / ratio.powi(j as i32)).collect()
}

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub structure: PuncturedTorusStructure,
    pub seed: CyclicWord,
    pub l_max: f64,
    pub slack: f64,
    pub certification_step: f64,
    pub checkpoints: Vec<f64>,
    pub max_slack_steps: u32,
    /// Exploration stops, flagging the result incomplete, past this many
    /// discovered classes.
    pub max_classes: usize,
}

impl CensusConfig {
    pub fn new(structure: PuncturedTorusStructure, seed: CyclicWord, l_max: f64) -> Self {
        Self {
            structure,
            seed,
            l_max,
            slack: DEFAULT_SLACK,
            certification_step: DEFAULT_CERTIFICATION_STEP,
            checkpoints: geometric_checkpoints(l_max, DEFAULT_CHECKPOINT_RATIO, DEFAULT_CHECKPOINT_COUNT),
            max_slack_steps: DEFAULT_MAX_SLACK_STEPS,
            max_classes: DEFAULT_MAX_CLASSES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_max.is_finite() && self.l_max > 0.0) {
            return Err(Error::Config(format!("L_max must be positive, got {}", self.l_max)));
        }
        if !(self.slack >= 1.0) || !(self.certification_step > 1.0) {
            return Err(Error::Config(format!(
                "need slack >= 1 and certification step > 1, got {} and {}",
                self.slack, self.certification_step
            )));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("no checkpoints".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints[0] <= 0.0 || *self.checkpoints.last().unwrap() > self.l_max * (1.0 + 1e-12) {
            return Err(Error::Config("checkpoints must lie in (0, L_max]".into()));
        }
        if self.seed.is_peripheral() {
            return Err(Error::Peripheral {
                word: self.seed.to_string(),
                trace: self.structure.trace_of(self.seed.letters()).abs(),
            });
        }
        if !self.seed.is_primitive() {
            return Err(Error::NotPrimitive(self.seed.to_string()));
        }
        Ok(())
    }

    pub fn ladder(&self) -> Ladder {
        Ladder { slack: self.slack, step: self.certification_step, steps: self.max_slack_steps }
    }
}

/// Slack levels `slack·step^k`, `k = 0..=steps`. A checkpoint `L` is
/// certified at the first level whose count equals the next level's.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ladder {
    pub slack: f64,
    pub step: f64,
    pub steps: u32,
}

impl Ladder {
    pub fn level(&self, k: u32) -> f64 {
        self.slack * self.step.powi(k as i32)
    }

    fn bound(&self, c: f64, k: u32) -> f64 {
        c * self.level(k)
    }

    /// Exploration bounds, ascending and deduplicated.
    fn thresholds(&self, checkpoints: &[f64]) -> Vec<f64> {
        let mut t: Vec<f64> = checkpoints
            .iter()
            .flat_map(|&c| (0..=self.steps).map(move |k| self.bound(c, k)))
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}

fn threshold_index(thresholds: &[f64], t: f64) -> usize {
    thresholds
        .iter()
        .position(|&x| x == t)
        .expect("threshold list built from the same products")
}

#[derive(Clone, Copy, Debug)]
struct Node {
    value: f64,
    /// Index of the first exploration bound whose component contains it.
    joined: Option<u32>,
}

/// Incremental exploration of seed components of sub-level sets.
struct Explorer<F> {
    value: F,
    nodes: HashMap<CyclicWord, Node>,
    blocked: BinaryHeap<Reverse<(u64, CyclicWord)>>,
    thresholds: Vec<f64>,
    done: usize,
    max_classes: usize,
    exhausted: bool,
}

impl<F> Explorer<F>
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    /// Starts from a local minimum of the functional reached from the seed
    /// by greedy moves, so small bounds still see the bottom of the orbit.
    fn new(value: F, seed: &CyclicWord, thresholds: Vec<f64>, max_classes: usize) -> Result<Self> {
        let (seed, v) = descend(&value, seed)?;
        let seed = &seed;
        let mut e = Self {
            value,
            nodes: HashMap::new(),
            blocked: BinaryHeap::new(),
            thresholds,
            done: 0,
            max_classes,
            exhausted: false,
        };
        e.nodes.insert(seed.clone(), Node { value: v, joined: None });
        e.blocked.push(Reverse((v.to_bits(), seed.clone())));
        Ok(e)
    }

    /// Rebuilds from a saved node list, recomputing values.
    fn restore(value: F, saved: Vec<(CyclicWord, Option<u32>)>, thresholds: Vec<f64>, done: usize, max_classes: usize) -> Result<Self> {
        let values: Vec<f64> = saved
            .par_iter()
            .map(|(w, _)| value(w))
            .collect::<Result<Vec<_>>>()?;
        let mut e = Self {
            value,
            nodes: HashMap::with_capacity(saved.len()),
            blocked: BinaryHeap::new(),
            thresholds,
            done,
            max_classes,
            exhausted: false,
        };
        for ((w, joined), v) in saved.into_iter().zip(values) {
            if joined.is_none() {
                e.blocked.push(Reverse((v.to_bits(), w.clone())));
            }
            e.nodes.insert(w, Node { value: v, joined });
        }
        Ok(e)
    }

    /// Closes the component for the next bound. Returns false once the
    /// class budget is exhausted.
    fn advance(&mut self) -> Result<bool> {
        if self.exhausted || self.done >= self.thresholds.len() {
            return Ok(false);
        }
        let idx = self.done as u32;
        let theta = self.thresholds[self.done];
        let mut frontier = Vec::new();
        while let Some(Reverse((bits, _))) = self.blocked.peek() {
            if f64::from_bits(*bits) > theta {
                break;
            }
            let Reverse((_, w)) = self.blocked.pop().expect("peeked");
            self.nodes.get_mut(&w).expect("blocked nodes are recorded").joined = Some(idx);
            frontier.push(w);
        }
        while !frontier.is_empty() {
            frontier.sort();
            let mut images: Vec<CyclicWord> = frontier
                .par_iter()
                .flat_map_iter(|w| Move::ALL.into_iter().map(move |m| apply_move(m, w)))
                .collect();
            images.sort();
            images.dedup();
            images.retain(|w| !self.nodes.contains_key(w));
            let values: Vec<f64> = images
                .par_iter()
                .map(|w| (self.value)(w))
                .collect::<Result<Vec<_>>>()?;
            let mut next = Vec::new();
            for (w, v) in images.into_iter().zip(values) {
                if v <= theta {
                    self.nodes.insert(w.clone(), Node { value: v, joined: Some(idx) });
                    next.push(w);
                } else {
                    self.nodes.insert(w.clone(), Node { value: v, joined: None });
                    self.blocked.push(Reverse((v.to_bits(), w)));
                }
            }
            if self.nodes.len() > self.max_classes {
                self.exhausted = true;
                return Ok(false);
            }
            frontier = next;
        }
        self.done += 1;
        Ok(true)
    }

    /// Classes with value `≤ l` inside the component for bound index `idx`.
    fn count(&self, l: f64, idx: usize) -> u64 {
        self.nodes
            .values()
            .filter(|n| n.value <= l && n.joined.is_some_and(|j| (j as usize) <= idx))
            .count() as u64
    }

    fn counted_classes(&self, l: f64, idx: usize) -> Vec<&CyclicWord> {
        let mut v: Vec<&CyclicWord> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.value <= l && n.joined.is_some_and(|j| (j as usize) <= idx))
            .map(|(w, _)| w)
            .collect();
        v.sort();
        v
    }

    fn saved_nodes(&self) -> Vec<(CyclicWord, Option<u32>)> {
        let mut v: Vec<(CyclicWord, Option<u32>)> = self.nodes.iter().map(|(w, n)| (w.clone(), n.joined)).collect();
        v.sort();
        v
    }

    fn max_word_length(&self) -> usize {
        self.nodes.keys().map(|w| w.len()).max().unwrap_or(0)
    }
}

/// Repeatedly moves to the smallest neighbour (ties broken by word) while
/// that strictly lowers the value.
fn descend<F>(value: &F, seed: &CyclicWord) -> Result<(CyclicWord, f64)>
where
    F: Fn(&CyclicWord) -> Result<f64>,
{
    let mut cur = seed.clone();
    let mut v = value(&cur)?;
    loop {
        let mut best: Option<(f64, CyclicWord)> = None;
        for m in Move::ALL {
            let w = apply_move(m, &cur);
            let x = value(&w)?;
            if best.as_ref().is_none_or(|(bx, bw)| x < *bx || (x == *bx && w < *bw)) {
                best = Some((x, w));
            }
        }
        match best {
            Some((x, w)) if x < v => {
                cur = w;
                v = x;
            }
            _ => return Ok((cur, v)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckpointRow {
    pub l: f64,
    pub n: u64,
    /// Slack level the count was taken at.
    pub slack: f64,
    pub certified: bool,
}

impl CheckpointRow {
    pub fn normalized(&self) -> f64 {
        self.n as f64 / (self.l * self.l)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusResult {
    pub seed: CyclicWord,
    /// What the count is measured by, e.g. `length` or `intersection`.
    pub functional: String,
    pub ladder: Ladder,
    pub rows: Vec<CheckpointRow>,
    pub classes_discovered: usize,
    pub classes_in_component: usize,
    pub max_word_length: usize,
    pub budget_exhausted: bool,
    pub seed_self_intersection: usize,
    /// Number of counted classes whose self-intersection was rechecked.
    pub self_intersection_samples: usize,
    /// Crossing angles of the seed geodesic, when a structure is involved.
    pub seed_angles: Vec<f64>,
}

impl CensusResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(&["L", "N", "N/L^2", "certified", "slack"]);
        for r in &self.rows {
            t.row(vec![
                fmt_f64(r.l),
                r.n.to_string(),
                fmt_f64(r.normalized()),
                r.certified.to_string(),
                fmt_f64(r.slack),
            ]);
        }
        t.render()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn last_certified(&self) -> Option<&CheckpointRow> {
        self.rows.iter().rev().find(|r| r.certified)
    }

    /// Estimate of `lim N(L)/L²` from the last certified checkpoints:
    /// `(value at the last one, max − min over the last three)`.
    pub fn growth_constant(&self) -> Option<(f64, f64)> {
        let cert: Vec<f64> = self.rows.iter().filter(|r| r.certified).map(|r| r.normalized()).collect();
        let last = *cert.last()?;
        let tail = &cert[cert.len().saturating_sub(3)..];
        let spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - tail.iter().cloned().fold(f64::INFINITY, f64::min);
        Some((last, spread))
    }
}

enum Resolution {
    Done(CheckpointRow),
    Pending,
}

fn resolve<F>(e: &Explorer<F>, c: f64, ladder: &Ladder) -> Resolution
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    let idx = |k| threshold_index(&e.thresholds, ladder.bound(c, k));
    let mut n = e.count(c, idx(0));
    for k in 0..ladder.steps {
        let next = idx(k + 1);
        if next >= e.done {
            return Resolution::Pending;
        }
        let m = e.count(c, next);
        if m == n {
            return Resolution::Done(CheckpointRow { l: c, n, slack: ladder.level(k), certified: true });
        }
        n = m;
    }
    Resolution::Done(CheckpointRow { l: c, n, slack: ladder.level(ladder.steps), certified: false })
}

fn needs_more<F>(e: &Explorer<F>, checkpoints: &[f64], ladder: &Ladder) -> bool
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    checkpoints
        .iter()
        .any(|&c| matches!(resolve(e, c, ladder), Resolution::Pending))
}

/// Rows for every checkpoint; ones left pending (budget or interruption)
/// carry the count at the highest explored level, uncertified.
fn rows_from<F>(e: &Explorer<F>, checkpoints: &[f64], ladder: &Ladder) -> Vec<CheckpointRow>
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    checkpoints
        .iter()
        .map(|&c| match resolve(e, c, ladder) {
            Resolution::Done(row) => row,
            Resolution::Pending => {
                let k = (0..=ladder.steps)
                    .rev()
                    .find(|&k| threshold_index(&e.thresholds, ladder.bound(c, k)) < e.done);
                match k {
                    Some(k) => CheckpointRow {
                        l: c,
                        n: e.count(c, threshold_index(&e.thresholds, ladder.bound(c, k))),
                        slack: ladder.level(k),
                        certified: false,
                    },
                    None => CheckpointRow { l: c, n: 0, slack: ladder.level(0), certified: false },
                }
            }
        })
        .collect()
}

/// Rechecks `ι` on every [`IOTA_SAMPLE_STRIDE`]-th counted class.
fn check_iota<F>(e: &Explorer<F>, l: f64, idx: usize, iota: usize) -> Result<usize>
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    let classes = e.counted_classes(l, idx);
    let sample: Vec<&CyclicWord> = classes.into_iter().step_by(IOTA_SAMPLE_STRIDE).collect();
    sample.par_iter().try_for_each(|w| {
        let i = arc_self_intersection(w)?;
        if i != iota {
            return Err(Error::Precondition(format!(
                "orbit class {w} has self-intersection {i}, seed has {iota}"
            )));
        }
        Ok(())
    })?;
    Ok(sample.len())
}

/// Saved state of an interrupted type census.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub artifact_version: String,
    pub traces: [String; 2],
    pub seed: CyclicWord,
    pub l_max: String,
    pub slack: String,
    pub certification_step: String,
    pub max_slack_steps: u32,
    pub checkpoints: Vec<String>,
    pub thresholds_done: usize,
    pub nodes: Vec<(CyclicWord, Option<u32>)>,
    /// SHA-256 of the JSON encoding of `nodes`.
    pub digest: String,
}

fn digest_nodes(nodes: &[(CyclicWord, Option<u32>)]) -> Result<String> {
    let bytes = serde_json::to_vec(nodes)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl Snapshot {
    fn matches(&self, cfg: &CensusConfig) -> bool {
        let (x, y, _) = cfg.structure.traces();
        self.traces == [fmt_f64(x), fmt_f64(y)]
            && self.seed == cfg.seed
            && self.l_max == fmt_f64(cfg.l_max)
            && self.slack == fmt_f64(cfg.slack)
            && self.certification_step == fmt_f64(cfg.certification_step)
            && self.max_slack_steps == cfg.max_slack_steps
            && self.checkpoints == cfg.checkpoints.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>()
    }

    /// The configuration the snapshot was taken with (budget left default).
    pub fn config(&self) -> Result<CensusConfig> {
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Snapshot(format!("bad number {s:?}")))
        };
        let structure = PuncturedTorusStructure::from_traces(num(&self.traces[0])?, num(&self.traces[1])?)?;
        let mut cfg = CensusConfig::new(structure, self.seed.clone(), num(&self.l_max)?);
        cfg.slack = num(&self.slack)?;
        cfg.certification_step = num(&self.certification_step)?;
        cfg.max_slack_steps = self.max_slack_steps;
        cfg.checkpoints = self.checkpoints.iter().map(|c| num(c)).collect::<Result<_>>()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s: Snapshot = serde_json::from_str(&fs::read_to_string(path)?)?;
        if s.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("unknown format {:?}", s.format)));
        }
        if digest_nodes(&s.nodes)? != s.digest {
            return Err(Error::Snapshot("visited-set digest mismatch".into()));
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(self)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// Controls persistence of a long census.
#[derive(Clone, Debug, Default)]
pub struct SnapshotPolicy<'a> {
    /// Written after every completed exploration bound.
    pub path: Option<&'a Path>,
    /// Stop (as if interrupted) after this many bounds in this call.
    pub stop_after: Option<usize>,
}

/// Counts the mapping class orbit of the seed by hyperbolic length.
pub fn type_census(cfg: &CensusConfig) -> Result<CensusResult> {
    type_census_resumable(cfg, None, SnapshotPolicy::default())
}

/// [`type_census`] with optional resume state and snapshotting.
pub fn type_census_resumable(
    cfg: &CensusConfig,
    resume: Option<Snapshot>,
    policy: SnapshotPolicy<'_>,
) -> Result<CensusResult> {
    cfg.validate()?;
    let x = &cfg.structure;
    let value = |w: &CyclicWord| x.length(w);
    let ladder = cfg.ladder();
    let thresholds = ladder.thresholds(&cfg.checkpoints);
    let mut e = match resume {
        Some(s) => {
            if !s.matches(cfg) {
                return Err(Error::Snapshot("snapshot was taken with a different configuration".into()));
            }
            Explorer::restore(value, s.nodes, thresholds, s.thresholds_done, cfg.max_classes)?
        }
        None => Explorer::new(value, &cfg.seed, thresholds, cfg.max_classes)?,
    };
    let mut steps = 0;
    while policy.stop_after.is_none_or(|s| steps < s) && needs_more(&e, &cfg.checkpoints, &ladder) && e.advance()? {
        steps += 1;
        if let Some(p) = policy.path {
            let nodes = e.saved_nodes();
            let (tx, ty, _) = x.traces();
            Snapshot {
                format: SNAPSHOT_FORMAT.into(),
                artifact_version: ARTIFACT_VERSION.into(),
                traces: [fmt_f64(tx), fmt_f64(ty)],
                seed: cfg.seed.clone(),
                l_max: fmt_f64(cfg.l_max),
                slack: fmt_f64(cfg.slack),
                certification_step: fmt_f64(cfg.certification_step),
                max_slack_steps: cfg.max_slack_steps,
                checkpoints: cfg.checkpoints.iter().map(|&c| fmt_f64(c)).collect(),
                thresholds_done: e.done,
                digest: digest_nodes(&nodes)?,
                nodes,
            }
            .save(p)?;
        }
    }
    let iota = arc_self_intersection(&cfg.seed)?;
    let seed_angles = x.realize(&cfg.seed).map(|r| r.crossings.iter().map(|c| c.angle).collect()).unwrap_or_default();
    finish(&e, cfg.seed.clone(), "length", &cfg.checkpoints, ladder, iota, seed_angles)
}

fn finish<F>(
    e: &Explorer<F>,
    seed: CyclicWord,
    functional: &str,
    checkpoints: &[f64],
    ladder: Ladder,
    iota: usize,
    seed_angles: Vec<f64>,
) -> Result<CensusResult>
where
    F: Fn(&CyclicWord) -> Result<f64> + Sync,
{
    let rows = rows_from(e, checkpoints, &ladder);
    let samples = if e.done > 0 {
        let last = *checkpoints.last().expect("validated nonempty");
        check_iota(e, last, e.done - 1, iota)?
    } else {
        0
    };
    Ok(CensusResult {
        seed,
        functional: functional.into(),
        ladder,
        rows,
        classes_discovered: e.nodes.len(),
        classes_in_component: e.nodes.values().filter(|n| n.joined.is_some()).count(),
        max_word_length: e.max_word_length(),
        budget_exhausted: e.exhausted,
        seed_self_intersection: iota,
        self_intersection_samples: samples,
        seed_angles,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub l: f64,
    pub type_counts: (u64, u64),
    pub simple_counts: (u64, u64),
    pub certified: bool,
}

impl RatioRow {
    pub fn type_ratio(&self) -> f64 {
        self.type_counts.0 as f64 / self.type_counts.1 as f64
    }

    pub fn simple_ratio(&self) -> f64 {
        self.simple_counts.0 as f64 / self.simple_counts.1 as f64
    }

    pub fn difference(&self) -> f64 {
        (self.type_ratio() - self.simple_ratio()).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioTable {
    pub seed: CyclicWord,
    pub rows: Vec<RatioRow>,
    pub censuses: (CensusResult, CensusResult),
}

impl RatioTable {
    pub fn final_certified(&self) -> Option<&RatioRow> {
        self.rows.iter().rev().find(|r| r.certified && r.type_counts.1 > 0 && r.simple_counts.1 > 0)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(&[
            "L", "type_1", "type_2", "type_ratio", "simple_1", "simple_2", "simple_ratio", "difference", "certified",
        ]);
        for r in &self.rows {
            t.row(vec![
                fmt_f64(r.l),
                r.type_counts.0.to_string(),
                r.type_counts.1.to_string(),
                fmt_f64(r.type_ratio()),
                r.simple_counts.0.to_string(),
                r.simple_counts.1.to_string(),
                fmt_f64(r.simple_ratio()),
                fmt_f64(r.difference()),
                r.certified.to_string(),
            ]);
        }
        t.render()
    }
}

/// Orbit counts of one seed on two structures, next to the simple-curve
/// counts on the same structures.
pub fn ratio_experiment(
    x1: &PuncturedTorusStructure,
    x2: &PuncturedTorusStructure,
    seed: &CyclicWord,
    l_max: f64,
    checkpoints: &[f64],
) -> Result<RatioTable> {
    let cfg = |x: &PuncturedTorusStructure| {
        let mut c = CensusConfig::new(x.clone(), seed.clone(), l_max);
        c.checkpoints = checkpoints.to_vec();
        c
    };
    let (c1, c2) = (cfg(x1), cfg(x2));
    let (r1, r2) = rayon::join(|| type_census(&c1), || type_census(&c2));
    let (r1, r2) = (r1?, r2?);
    let rows = r1
        .rows
        .iter()
        .zip(&r2.rows)
        .map(|(a, b)| RatioRow {
            l: a.l,
            type_counts: (a.n, b.n),
            simple_counts: (
                simple_count(x1, a.l, CountMode::Primitive),
                simple_count(x2, a.l, CountMode::Primitive),
            ),
            certified: a.certified && b.certified,
        })
        .collect();
    Ok(RatioTable { seed: seed.clone(), rows, censuses: (r1, r2) })
}

/// A weighted multicurve with simple, pairwise distinct components.
#[derive(Clone, Debug)]
pub struct WeightedMulticurve {
    components: Vec<(CyclicWord, u64)>,
}

impl WeightedMulticurve {
    /// Rejects non-simple or repeated components, zero weights, and
    /// multicurves that do not fill (fewer than two distinct slopes).
    pub fn new(components: Vec<(CyclicWord, u64)>) -> Result<Self> {
        let mut slopes = Vec::new();
        for (w, weight) in &components {
            if *weight == 0 {
                return Err(Error::Precondition(format!("component {w} has weight 0")));
            }
            if w.is_peripheral() || !w.is_primitive() || arc_self_intersection(w)? != 0 {
                return Err(Error::Precondition(format!("component {w} is not a simple essential curve")));
            }
            let (p, q) = w.homology();
            let s = normalize_slope(p, q);
            if slopes.contains(&s) {
                return Err(Error::Precondition(format!("slope {s:?} appears twice")));
            }
            slopes.push(s);
        }
        if slopes.len() < 2 {
            return Err(Error::Precondition(
                "multicurve does not fill: it needs components of at least two distinct slopes".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn scaled(&self, t: u64) -> Self {
        Self { components: self.components.iter().map(|(w, k)| (w.clone(), k * t)).collect() }
    }

    /// `Σ wᵢ·ι(λᵢ, γ)` for a primitive class `γ`.
    pub fn pairing(&self, gamma: &CyclicWord) -> Result<u64> {
        let mut total = 0;
        for (w, k) in &self.components {
            let i = if w == gamma { 0 } else { arc_intersection(w, gamma)? as u64 };
            total += k * i;
        }
        Ok(total)
    }
}

/// Counts classes `γ` in the orbit of the seed with `ι(λ₀, γ) ≤ l`.
pub fn intersection_count(lambda: &WeightedMulticurve, seed: &CyclicWord, l: f64) -> Result<CensusResult> {
    let ladder = Ladder { slack: DEFAULT_SLACK, step: DEFAULT_CERTIFICATION_STEP, steps: DEFAULT_MAX_SLACK_STEPS };
    intersection_census(lambda, seed, &[l], ladder, DEFAULT_MAX_CLASSES)
}

pub fn intersection_census(
    lambda: &WeightedMulticurve,
    seed: &CyclicWord,
    checkpoints: &[f64],
    ladder: Ladder,
    max_classes: usize,
) -> Result<CensusResult> {
    if seed.is_peripheral() || !seed.is_primitive() {
        return Err(Error::Precondition(format!("seed {seed} must be primitive and non-peripheral")));
    }
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] < 0.0 {
        return Err(Error::Config("checkpoints must be nonnegative and strictly increasing".into()));
    }
    let value = |w: &CyclicWord| lambda.pairing(w).map(|v| v as f64);
    let mut e = Explorer::new(value, seed, ladder.thresholds(checkpoints), max_classes)?;
    while needs_more(&e, checkpoints, &ladder) && e.advance()? {}
    let iota = arc_self_intersection(seed)?;
    finish(&e, seed.clone(), "intersection", checkpoints, ladder, iota, Vec::new())
}
