use std::fs;
use std::path::Path;

use curvecount::tracks::{
    count_normal_forms, positive_switch_solution, switch_kernel, Method, NormalFormOptions, Track, WeightVector,
};
use proptest::prelude::*;

fn load(name: &str) -> Track {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tracks").join(name);
    fs::read_to_string(path).unwrap().parse().unwrap()
}

fn fleet() -> Vec<(Track, WeightVector)> {
    vec![
        (load("torus.track"), WeightVector(vec![12, 13, 25])),
        (load("v4.track"), WeightVector(vec![13, 25, 13, 25, 12, 12])),
        (load("v6.track"), WeightVector(vec![12, 25, 24, 25, 37, 13, 12, 12, 13])),
    ]
}

#[test]
fn fleet_matches_closed_forms() {
    for (t, w) in fleet() {
        assert!(t.satisfies_switch_equations(&w));
        for k in 0..=2 {
            let c = count_normal_forms(&t, &w, k, &NormalFormOptions::default()).unwrap();
            assert_eq!(Some(c.count), c.closed_form, "V={} k={k}", t.vertices().len());
        }
    }
}

#[test]
fn sweep_agrees_with_exhaustive_on_small_tilings() {
    let v4 = load("v4.track");
    let w = WeightVector(vec![5, 9, 5, 9, 4, 4]);
    for k in 0..=2 {
        let opts = |m| NormalFormOptions { leaves: Some(6), method: Some(m), ..Default::default() };
        let a = count_normal_forms(&v4, &w, k, &opts(Method::Sweep)).unwrap();
        let b = count_normal_forms(&v4, &w, k, &opts(Method::Exhaustive)).unwrap();
        assert_eq!(a.count, b.count, "k={k}");
    }
}

#[test]
fn kernel_vectors_satisfy_switches() {
    for (t, _) in fleet() {
        let basis = switch_kernel(&t);
        assert!(!basis.is_empty());
        for v in basis {
            let defects: Vec<i64> = t
                .switch_matrix()
                .iter()
                .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
                .collect();
            assert!(defects.iter().all(|&d| d == 0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Adding multiples of a positive switch solution leaves the count alone.
    #[test]
    fn count_is_independent_of_weight_shift(which in 0usize..3, k in 0usize..=2, m in 0u64..=2) {
        let (t, w) = fleet().swap_remove(which);
        let p = positive_switch_solution(&t, 4).expect("positive solution");
        let opts = NormalFormOptions::default();
        let base = count_normal_forms(&t, &w, k, &opts).unwrap().count;
        let shifted = count_normal_forms(&t, &w.shifted(&p, m), k, &opts).unwrap().count;
        prop_assert_eq!(base, shifted);
    }

    #[test]
    fn parsed_tracks_round_trip(which in 0usize..3) {
        let (t, _) = fleet().swap_remove(which);
        let again: Track = t.to_text().parse().unwrap();
        prop_assert_eq!(again.to_text(), t.to_text());
    }
}
