use num::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confsweep::fixtures;
use confsweep::oracle::{
    enumerate_combinatorial, exhaustive_isomorphism, naive_sweep_check, verify_realization, Homogeneous,
    RationalPoint,
};
use confsweep::reduce::{invariant_key, refinement_levels, reduce_with_jobs, Interner};
use confsweep::sweep::{enumerate_all, plan_tasks, Checkpoint, SweepOptions};
use confsweep::{are_isomorphic, is_self_dual, reduce_all, Configuration};

fn all_fixtures() -> Vec<(&'static str, Configuration)> {
    vec![
        ("fano", fixtures::fano()),
        ("mobius_kantor", fixtures::mobius_kantor()),
        ("pappus", fixtures::pappus()),
        ("pg_2_3", fixtures::projective_plane_3()),
        ("17_4", fixtures::config_17_4()),
        ("18_4_first", fixtures::first_18_4()),
        ("18_4_second", fixtures::second_18_4()),
    ]
}

fn random_relabel(c: &Configuration, rng: &mut ChaCha8Rng) -> (Configuration, Vec<usize>, Vec<usize>) {
    let mut points: Vec<usize> = (0..c.n()).collect();
    let mut lines: Vec<usize> = (0..c.n()).collect();
    points.shuffle(rng);
    lines.shuffle(rng);
    (c.relabel(&points, &lines), points, lines)
}

#[test]
fn invariant_key_survives_relabeling() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (name, c) in all_fixtures() {
        let mut interner = Interner::new();
        let key = invariant_key(&c, &mut interner);
        let levels = refinement_levels(&c, &mut interner);
        for _ in 0..100 {
            let (copy, _, _) = random_relabel(&c, &mut rng);
            let copy_levels = refinement_levels(&copy, &mut interner);
            assert_eq!(copy_levels.len(), levels.len(), "{name}");
            for (a, b) in levels.iter().zip(&copy_levels) {
                assert_eq!(a.histogram(), b.histogram(), "{name}");
            }
            assert_eq!(invariant_key(&copy, &mut interner), key, "{name}");
        }
    }
}

#[test]
fn isomorphism_witnesses_check_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, c) in all_fixtures() {
        for _ in 0..10 {
            let (copy, _, _) = random_relabel(&c, &mut rng);
            let iso = are_isomorphic(&c, &copy).unwrap_or_else(|| panic!("{name}: relabeled copy rejected"));
            assert!(iso.check(&c, &copy), "{name}");
        }
    }
    let first = fixtures::first_18_4();
    let second = fixtures::second_18_4();
    assert!(are_isomorphic(&first, &second).is_none());
}

fn assert_monotone(c: &Configuration) {
    let mut interner = Interner::new();
    let levels = refinement_levels(c, &mut interner);
    for pair in levels.windows(2) {
        assert!(pair[1].refines(&pair[0]));
        assert!(pair[1].cells() > pair[0].cells());
    }
}

#[test]
fn derivatives_refine_monotonically() {
    for (_, c) in all_fixtures() {
        assert_monotone(&c);
    }
    for n in [9, 10] {
        for out in enumerate_all(n, 3, &SweepOptions::default()).unwrap() {
            assert_monotone(&out.config);
        }
    }
}

#[test]
fn every_small_sweep_output_replays_on_wires() {
    for n in [9, 10] {
        let outputs = enumerate_all(n, 3, &SweepOptions::default()).unwrap();
        assert!(!outputs.is_empty());
        for out in outputs {
            let replayed = naive_sweep_check(&out.history, n, 3)
                .unwrap_or_else(|e| panic!("({n},3) history rejected: {e}"));
            assert_eq!(replayed.canonical(), out.config.canonical());
        }
    }
    for out in enumerate_all(17, 4, &SweepOptions::default()).unwrap() {
        assert_eq!(naive_sweep_check(&out.history, 17, 4).unwrap().canonical(), out.config.canonical());
    }
}

#[test]
fn reduce_is_idempotent() {
    let outputs = enumerate_all(10, 3, &SweepOptions::default()).unwrap();
    let first = reduce_all(outputs.into_iter().map(|o| o.config)).unwrap();
    let reps: Vec<Configuration> = first.classes.iter().map(|c| c.representative.clone()).collect();
    let second = reduce_all(reps.clone()).unwrap();
    assert_eq!(second.classes.len(), first.classes.len());
    for (a, b) in first.classes.iter().zip(&second.classes) {
        assert_eq!(a.representative, b.representative);
        assert_eq!(a.self_dual, b.self_dual);
        assert_eq!(b.members, 1);
    }
    let parallel = reduce_with_jobs(reps, 4).unwrap();
    assert_eq!(parallel, second);
}

#[test]
fn reduce_recovers_oracle_counts_from_relabeled_copies() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, k) in [(7, 3), (8, 3), (9, 3), (10, 3), (13, 4)] {
        let reps = enumerate_combinatorial(n, k).unwrap();
        let mut copies = Vec::new();
        for c in &reps {
            for _ in 0..5 {
                copies.push(random_relabel(c, &mut rng).0);
            }
        }
        copies.shuffle(&mut rng);
        let reduction = reduce_all(copies).unwrap();
        assert_eq!(reduction.classes.len(), reps.len(), "({n},{k})");
        for class in &reduction.classes {
            assert_eq!(class.members, 5);
            assert_eq!(class.self_dual, exhaustive_isomorphism(&class.representative, &class.representative.dualize()).is_some());
        }
    }
}

#[test]
fn sweep_classes_agree_with_the_oracle() {
    for n in [9, 10] {
        let swept = reduce_all(enumerate_all(n, 3, &SweepOptions::default()).unwrap().into_iter().map(|o| o.config)).unwrap();
        let oracle = enumerate_combinatorial(n, 3).unwrap();
        // Every swept class is combinatorial, so it matches exactly one oracle class.
        for class in &swept.classes {
            let hits = oracle.iter().filter(|o| exhaustive_isomorphism(&class.representative, o).is_some()).count();
            assert_eq!(hits, 1);
            assert_eq!(class.self_dual, is_self_dual(&class.representative));
        }
    }
}

#[test]
fn worker_count_does_not_change_output() {
    let one = enumerate_all(10, 3, &SweepOptions { jobs: 1, ..SweepOptions::default() }).unwrap();
    let eight = enumerate_all(10, 3, &SweepOptions { jobs: 8, ..SweepOptions::default() }).unwrap();
    assert_eq!(one, eight);
    let shallow = enumerate_all(10, 3, &SweepOptions { split_depth: 1, jobs: 3, ..SweepOptions::default() }).unwrap();
    let mut a: Vec<_> = one.iter().map(|o| o.config.canonical()).collect();
    let mut b: Vec<_> = shallow.iter().map(|o| o.config.canonical()).collect();
    a.sort();
    a.dedup();
    b.sort();
    b.dedup();
    assert_eq!(a, b);
}

#[test]
fn checkpoint_round_trips() {
    let tasks = plan_tasks(10, 3, 3, true).unwrap();
    let ckpt = Checkpoint::new(10, 3, 3, true, &tasks);
    let text = serde_json::to_string(&ckpt).unwrap();
    let back: Checkpoint = serde_json::from_str(&text).unwrap();
    let states = back.task_states().unwrap();
    assert_eq!(states.len(), tasks.len());
    for (a, b) in states.iter().zip(&tasks) {
        assert_eq!(a.order(), b.order());
        assert_eq!(a.counters(), b.counters());
    }
    assert_eq!(back.todo(), (0..tasks.len()).collect::<Vec<_>>());
}

fn pappus_points() -> Vec<RationalPoint> {
    let a = [Homogeneous::from_ints(0, 0, 1), Homogeneous::from_ints(1, 0, 1), Homogeneous::from_ints(3, 0, 1)];
    let b = [Homogeneous::from_ints(0, 1, 1), Homogeneous::from_ints(2, 1, 1), Homogeneous::from_ints(5, 1, 1)];
    let x = a[0].cross(&b[1]).cross(&a[1].cross(&b[0]));
    let y = a[0].cross(&b[2]).cross(&a[2].cross(&b[0]));
    let z = a[1].cross(&b[2]).cross(&a[2].cross(&b[1]));
    a.iter().chain(&b).cloned().chain([x, y, z]).collect()
}

fn small_fixture() -> impl Strategy<Value = Configuration> {
    prop_oneof![
        Just(fixtures::fano()),
        Just(fixtures::mobius_kantor()),
        Just(fixtures::pappus()),
        Just(fixtures::projective_plane_3()),
        Just(fixtures::config_17_4()),
    ]
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn relabeled() -> impl Strategy<Value = (Configuration, Configuration)> {
    small_fixture().prop_flat_map(|c| {
        let n = c.n();
        (Just(c), permutation(n), permutation(n)).prop_map(|(c, p, l)| {
            let copy = c.relabel(&p, &l);
            (c, copy)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_is_idempotent((_, copy) in relabeled()) {
        let once = copy.canonical();
        prop_assert_eq!(once.canonical(), once.clone());
        prop_assert!(once.verify().is_valid());
    }

    #[test]
    fn canonical_preserves_the_class((c, copy) in relabeled()) {
        let canon = copy.canonical();
        let iso = are_isomorphic(&c, &canon);
        prop_assert!(iso.is_some());
        prop_assert!(iso.unwrap().check(&c, &canon));
        if c.n() <= 9 {
            prop_assert!(exhaustive_isomorphism(&c, &canon).is_some());
        }
    }

    #[test]
    fn self_duality_is_relabeling_invariant((c, copy) in relabeled()) {
        prop_assert_eq!(is_self_dual(&c), is_self_dual(&copy));
    }

    #[test]
    fn realization_ignores_homogeneous_scale(scales in prop::collection::vec((1i64..50, 1i64..50, any::<bool>()), 18)) {
        let points = pappus_points();
        let c = fixtures::pappus();
        let lines: Vec<_> = c.lines().iter().map(|l| points[l[0]].cross(&points[l[1]])).collect();
        let factor = |(num, den, neg): (i64, i64, bool)| {
            BigRational::new((if neg { -num } else { num }).into(), den.into())
        };
        let scaled_points: Vec<_> = points.iter().zip(&scales).map(|(p, &s)| p.scale(&factor(s))).collect();
        let scaled_lines: Vec<_> = lines.iter().zip(&scales[9..]).map(|(l, &s)| l.scale(&factor(s))).collect();
        prop_assert_eq!(verify_realization(&scaled_points, &scaled_lines, &c), Ok(true));
    }
}
