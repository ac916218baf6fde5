//! End-to-end checks with fixed tolerances. Runs without the libtest
//! harness so that every check prints its `[PASS]` or `[FAIL]` line.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use curvecount::census::{
    geometric_checkpoints, ratio_experiment, simple_count, type_census, CensusConfig, CountMode,
};
use curvecount::density::{count_in_region, Region};
use curvecount::freegroup::{canonical_words, christoffel, normalize_slope};
use curvecount::hyperbolic::{arc_self_intersection, PuncturedTorusStructure};
use curvecount::lattice::{children, enumerate_orbit, orbit_root, InvariantSet, LatticePoint, Norm};
use curvecount::tracks::{closed_form, count_normal_forms, torus_defect_map, NormalFormOptions, Track, WeightVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn pt(x: u64, y: u64) -> LatticePoint {
    LatticePoint::new(x, y).unwrap()
}

fn orbit_of_one_one_fills_the_unit_square_at_six_over_pi_squared() {
    let t = Instant::now();
    let l = 2000u64;
    let n = count_in_region(&InvariantSet::orbit(pt(1, 1)), &Region::unit_square(), l).unwrap();
    let elapsed = t.elapsed();
    let d = n as f64 / (l * l) as f64;
    let err = (d - 6.0 / (PI * PI)).abs();
    report(
        "unit square density of the (1,1) orbit",
        err <= 0.002 && elapsed < Duration::from_secs(5),
        format!("count {n}, count/L^2 = {d:.6}, error {err:.2e} (tol 2e-3), {elapsed:.2?} (limit 5s)"),
    );
}

fn orbit_of_one_two_in_the_triangle() {
    let t = Instant::now();
    let l = 4000u64;
    let n = count_in_region(&InvariantSet::orbit(pt(1, 2)), &Region::unit_triangle(), l).unwrap();
    let elapsed = t.elapsed();
    let d = n as f64 / (l * l) as f64;
    let target = 3.0 / (2.0 * PI * PI);
    let rel = (d / target - 1.0).abs();
    report(
        "triangle density of the (1,2) orbit",
        rel < 0.01 && elapsed < Duration::from_secs(10),
        format!("count/L^2 = {d:.6} vs {target:.6}, relative error {rel:.2e} (tol 1e-2), {elapsed:.2?} (limit 10s)"),
    );
}

fn triangle_counts_obey_the_tail_bound() {
    let l_max = 2000u64;
    let mut worst = 0.0f64;
    let mut ok = true;
    for (p, q) in [(1, 1), (1, 2), (2, 3), (3, 5)] {
        let mut by_sum = vec![0u64; l_max as usize + 1];
        for x in enumerate_orbit(pt(p, q), l_max, Norm::Sum).unwrap() {
            by_sum[(x.x() + x.y()) as usize] += 1;
        }
        let mut count = 0u64;
        for l in 1..=l_max {
            count += by_sum[l as usize];
            let lhs = 2 * p * q * count;
            ok &= lhs <= l * l;
            worst = worst.max(lhs as f64 / (l * l) as f64);
        }
    }
    report(
        "2pq * count <= L^2 for L <= 2000",
        ok,
        format!("largest 2pq*count/L^2 = {worst:.6}"),
    );
}

fn diagonal_roots_partition_and_calkin_wilf_splitting() {
    // Partition of [1, 500]^2 by orbit roots.
    let n = 500u64;
    let mut owned = vec![0u64; n as usize + 1];
    let mut partition_ok = true;
    for x in 1..=n {
        for y in 1..=n {
            let r = orbit_root(pt(x, y));
            partition_ok &= r.x() == r.y() && r.x() == num_gcd(x, y);
            owned[r.x() as usize] += 1;
        }
    }
    for g in 1..=n {
        let in_box = enumerate_orbit(pt(g, g), n, Norm::Max).unwrap().len() as u64;
        partition_ok &= in_box == owned[g as usize];
    }
    partition_ok &= owned.iter().sum::<u64>() == n * n;

    // A subtree is its root plus the two child subtrees, disjointly.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bound = 400;
    let mut split_ok = true;
    for _ in 0..200 {
        let r = pt(rng.gen_range(1..60), rng.gen_range(1..60));
        let (a, b) = children(r).unwrap();
        let whole: HashSet<LatticePoint> = enumerate_orbit(r, bound, Norm::Sum).unwrap().into_iter().collect();
        let left: HashSet<LatticePoint> = enumerate_orbit(a, bound, Norm::Sum).unwrap().into_iter().collect();
        let right: HashSet<LatticePoint> = enumerate_orbit(b, bound, Norm::Sum).unwrap().into_iter().collect();
        split_ok &= left.is_disjoint(&right) && !left.contains(&r) && !right.contains(&r);
        split_ok &= whole.len() == 1 + left.len() + right.len();
        split_ok &= left.iter().chain(&right).all(|p| whole.contains(p));
    }

    // Set level: each off-diagonal point of [1, 100]^2 is a child of exactly
    // one point, and diagonal points of none.
    let m = 100usize;
    let mut hits = vec![vec![0u32; m + 1]; m + 1];
    for x in 1..=m as u64 {
        for y in 1..=m as u64 {
            let (a, b) = children(pt(x, y)).unwrap();
            for c in [a, b] {
                if c.x() as usize <= m && c.y() as usize <= m {
                    hits[c.x() as usize][c.y() as usize] += 1;
                }
            }
        }
    }
    let mut set_ok = true;
    for x in 1..=m {
        for y in 1..=m {
            set_ok &= hits[x][y] == u32::from(x != y);
        }
    }
    report(
        "orbit partition and tree splitting",
        partition_ok && split_ok && set_ok,
        format!("partition of [1,500]^2 {partition_ok}, 200 random subtrees {split_ok}, [1,100]^2 set splitting {set_ok}"),
    );
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn normal_form_counts_match_closed_forms() {
    let t = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tracks");
    let fleet = [
        ("torus.track", vec![12, 13, 25]),
        ("v4.track", vec![13, 25, 13, 25, 12, 12]),
        ("v6.track", vec![12, 25, 24, 25, 37, 13, 12, 12, 13]),
    ];
    let mut ok = true;
    let mut seen = Vec::new();
    for (file, w) in fleet {
        let track: Track = fs::read_to_string(dir.join(file)).unwrap().parse().unwrap();
        let v = track.vertices().len();
        let w = WeightVector(w);
        assert!(w.0.iter().all(|&x| x >= 12));
        for k in 0..=2 {
            let c = count_normal_forms(&track, &w, k, &NormalFormOptions::default()).unwrap();
            ok &= Some(c.count) == closed_form(v, k);
            seen.push(format!("V={v},k={k}:{}", c.count));
        }
    }
    let elapsed = t.elapsed();
    report(
        "normal forms 1, V/2, V(V+6)/8",
        ok && elapsed < Duration::from_secs(60),
        format!("{} in {elapsed:.2?} (limit 60s)", seen.join(" ")),
    );
}

fn defect_map_preserves_switches_and_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = true;
    for _ in 0..100_000 {
        let a = rng.gen_range(0..1_000_000u64);
        let b = rng.gen_range(0..1_000_000u64);
        let c = a + b + rng.gen_range(0..1_000_000u64);
        let p = torus_defect_map([a, b, c]).unwrap();
        ok &= p[2] == p[0] + p[1];
        ok &= torus_defect_map(p).unwrap() == p;
    }
    report("defect map on 1e5 random triples", ok, "switch equality and idempotence checked exactly".into());
}

fn self_intersection_methods_agree() {
    let t = Instant::now();
    let words: Vec<_> = canonical_words(10)
        .into_iter()
        .filter(|w| w.is_primitive() && !w.is_peripheral())
        .collect();
    let mut disagreements = 0usize;
    for (x, y) in [(3.0, 3.0), (3.0, 4.0)] {
        let s = PuncturedTorusStructure::from_traces(x, y).unwrap();
        for w in &words {
            let geometric = s.realize(w).unwrap().self_intersection();
            if geometric != arc_self_intersection(w).unwrap() {
                disagreements += 1;
            }
        }
    }
    let mut simple_ok = true;
    for p in 0..=20i64 {
        for q in 0..=20 - p {
            if num_gcd(p as u64, q as u64) == 1 {
                simple_ok &= arc_self_intersection(&christoffel(p, q).unwrap()).unwrap() == 0;
            }
        }
    }
    let s = PuncturedTorusStructure::from_traces(3.0, 3.0).unwrap();
    let mut slopes = Vec::new();
    for p in -8i64..=8 {
        for q in 0..=8i64 {
            if num_gcd(p.unsigned_abs(), q as u64) == 1 && normalize_slope(p, q) == (p, q) && !slopes.contains(&(p, q)) {
                slopes.push((p, q));
            }
        }
    }
    let mut pairs_ok = true;
    for (i, &(p, q)) in slopes.iter().enumerate() {
        for &(r, u) in &slopes[i + 1..] {
            let got = s.intersection(&christoffel(p, q).unwrap(), &christoffel(r, u).unwrap()).unwrap();
            pairs_ok &= got as i64 == (p * u - q * r).abs();
        }
    }
    let elapsed = t.elapsed();
    report(
        "axis linking agrees with the fundamental domain count",
        disagreements == 0 && simple_ok && pairs_ok && elapsed < Duration::from_secs(300),
        format!(
            "{} words x 2 structures, {disagreements} disagreements; Christoffel words simple {simple_ok}; \
             {} slope pairs |ps-qr| {pairs_ok}; {elapsed:.2?} (limit 300s)",
            words.len(),
            slopes.len() * (slopes.len() - 1) / 2
        ),
    );
}

fn census_of_a_simple_seed_matches_simple_counts() {
    let x = PuncturedTorusStructure::modular();
    let r = type_census(&CensusConfig::new(x.clone(), "ab".parse().unwrap(), 22.0)).unwrap();
    let mut ok = r.rows.iter().any(|row| row.certified);
    let mut cells = Vec::new();
    for row in r.rows.iter().filter(|row| row.certified) {
        let s = simple_count(&x, row.l, CountMode::Primitive);
        ok &= s == row.n;
        cells.push(format!("{:.2}:{}/{}", row.l, row.n, s));
    }
    report("census of ab equals the simple count up to L=22", ok, cells.join(" "));
}

fn growth_of_the_aab_orbit_stabilizes() {
    let r = type_census(&CensusConfig::new(PuncturedTorusStructure::modular(), "aab".parse().unwrap(), 120.0)).unwrap();
    let certified: Vec<_> = r.rows.iter().filter(|row| row.certified).collect();
    let ok_rows = certified.len() >= 2;
    let (prev, last) = if ok_rows {
        (certified[certified.len() - 2].normalized(), certified[certified.len() - 1].normalized())
    } else {
        (f64::NAN, f64::NAN)
    };
    let change = ((last - prev) / prev).abs();
    let (c, spread) = r.growth_constant().unwrap_or((f64::NAN, f64::NAN));
    report(
        "N/L^2 of aab on the modular torus",
        ok_rows && change < 0.05,
        format!("last two N/L^2 {prev:.5}, {last:.5}, change {:.2}% (tol 5%); C ~ {c:.5}, spread {spread:.5}", 100.0 * change),
    );
}

fn type_ratio_tracks_simple_ratio() {
    let x1 = PuncturedTorusStructure::from_traces(3.0, 3.0).unwrap();
    let x2 = PuncturedTorusStructure::from_traces(3.0, 4.0).unwrap();
    let l_max = 100.0;
    let table = ratio_experiment(&x1, &x2, &"aab".parse().unwrap(), l_max, &geometric_checkpoints(l_max, 1.25, 8)).unwrap();
    // aab is simple, so its orbit is the simple curves; aabb is reported too.
    let other = ratio_experiment(&x1, &x2, &"aabb".parse().unwrap(), 80.0, &geometric_checkpoints(80.0, 1.25, 6)).unwrap();
    if let Some(r) = other.final_certified() {
        println!(
            "[INFO] aabb at L={:.2}: type ratio {:.4}, simple ratio {:.4}, |difference| {:.4}",
            r.l,
            r.type_ratio(),
            r.simple_ratio(),
            r.difference().abs()
        );
    }
    let row = table.final_certified();
    let d = row.map(|r| r.difference().abs()).unwrap_or(f64::NAN);
    report(
        "type ratio vs simple ratio, (3,3) against (3,4)",
        d < 0.10,
        match row {
            Some(r) => format!("L={:.2}: type {:.4}, simple {:.4}, |difference| {d:.4} (tol 0.10)", r.l, r.type_ratio(), r.simple_ratio()),
            None => "no certified checkpoint".into(),
        },
    );
}

fn outputs_do_not_depend_on_worker_count() {
    let mut same = true;
    let mut checked = Vec::new();
    let runs: [&[&str]; 2] = [
        &["census", "--traces", "3,4", "--seed", "aabb", "--Lmax", "40"],
        &["density", "--root", "1,2", "--region", "tri", "--L", "100,500,1000"],
    ];
    for args in runs {
        let mut bodies = Vec::new();
        for workers in ["1", "2", "4"] {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap();
            let mut argv = vec!["curvecount", "--out", out, "--workers", workers];
            argv.extend_from_slice(args);
            assert_eq!(curvecount::cli::run(argv), 0);
            let name = format!("{}.csv", args[0]);
            bodies.push(fs::read(dir.path().join(&name)).unwrap());
        }
        same &= bodies.windows(2).all(|w| w[0] == w[1]);
        checked.push(format!("{}.csv", args[0]));
    }
    report("byte-identical CSVs for 1, 2 and 4 workers", same, checked.join(", "));
}

fn main() {
    let checks: [(&str, fn()); 11] = [
        ("orbit_of_one_one_fills_the_unit_square_at_six_over_pi_squared", orbit_of_one_one_fills_the_unit_square_at_six_over_pi_squared),
        ("orbit_of_one_two_in_the_triangle", orbit_of_one_two_in_the_triangle),
        ("triangle_counts_obey_the_tail_bound", triangle_counts_obey_the_tail_bound),
        ("diagonal_roots_partition_and_calkin_wilf_splitting", diagonal_roots_partition_and_calkin_wilf_splitting),
        ("normal_form_counts_match_closed_forms", normal_form_counts_match_closed_forms),
        ("defect_map_preserves_switches_and_is_idempotent", defect_map_preserves_switches_and_is_idempotent),
        ("self_intersection_methods_agree", self_intersection_methods_agree),
        ("census_of_a_simple_seed_matches_simple_counts", census_of_a_simple_seed_matches_simple_counts),
        ("growth_of_the_aab_orbit_stabilizes", growth_of_the_aab_orbit_stabilizes),
        ("type_ratio_tracks_simple_ratio", type_ratio_tracks_simple_ratio),
        ("outputs_do_not_depend_on_worker_count", outputs_do_not_depend_on_worker_count),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        if std::panic::catch_unwind(check).is_err() {
            println!("[FAIL] {name}");
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance checks failed");
        std::process::exit(1);
    }
}
