//! One PASS/FAIL line per acceptance criterion. Long runs ((12,3) and (18,4))
//! only execute with `CONFSWEEP_LONG=1`; otherwise they print SKIP.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confsweep::fixtures;
use confsweep::oracle::{enumerate_combinatorial, naive_sweep_check};
use confsweep::reduce::{invariant_key, refinement_levels, Interner, Reduction};
use confsweep::sweep::{enumerate_all, enumerate_sweep, SweepOptions};
use confsweep::{are_isomorphic, automorphism_count, is_self_dual, reduce_all, Configuration, PartitionTable};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn jobs() -> usize {
    std::env::var("CONFSWEEP_JOBS").ok().and_then(|j| j.parse().ok()).unwrap_or(0)
}

fn long_runs() -> bool {
    std::env::var("CONFSWEEP_LONG").is_ok_and(|v| v == "1")
}

fn classes(n: usize, k: usize) -> Result<(Reduction, usize), String> {
    let opts = SweepOptions { jobs: jobs(), ..SweepOptions::default() };
    // Keep only distinct configurations: (12,3) emits about a million histories.
    let mut raw = 0;
    let mut distinct = BTreeSet::new();
    let mut bad = None;
    enumerate_sweep(n, k, &opts, |record| {
        raw += 1;
        match Configuration::from_record(&record.config) {
            Ok(c) => {
                distinct.insert(c);
            }
            Err(e) => bad = Some(e.to_string()),
        }
    })
    .map_err(|e| e.to_string())?;
    if let Some(e) = bad {
        return Err(e);
    }
    let reduction = reduce_all(distinct).map_err(|e| e.to_string())?;
    Ok((reduction, raw))
}

fn class_count(n: usize, k: usize, expected: usize, budget: Duration) -> Outcome {
    let started = Instant::now();
    match classes(n, k) {
        Ok((r, raw)) => {
            let took = started.elapsed();
            check(
                r.classes.len() == expected && took <= budget,
                format!("({n},{k}) -> {} classes from {raw} sweeps, expected {expected} [{:.1}s]", r.classes.len(), took.as_secs_f64()),
            )
        }
        Err(e) => Outcome::Fail(format!("({n},{k}): {e}")),
    }
}

fn partition_table() -> Outcome {
    let expected = ["4,0,0,0", "3,1,0,0", "3,0,1,0", "2,2,0,0", "2,0,2,0", "2,1,1,0", "2,1,0,1", "1,1,1,1"];
    match PartitionTable::new(17, 4) {
        Ok(t) => {
            let got: Vec<String> = t.tuples().iter().map(ToString::to_string).collect();
            check(got == expected, format!("(17,4) table [{}]", got.join(" ")))
        }
        Err(e) => Outcome::Fail(e.to_string()),
    }
}

fn non_existence(cases: &[(usize, usize)]) -> Outcome {
    let mut found = Vec::new();
    for &(n, k) in cases {
        match classes(n, k) {
            Ok((r, _)) => found.push(format!("({n},{k})={}", r.classes.len())),
            Err(e) => return Outcome::Fail(format!("({n},{k}): {e}")),
        }
    }
    check(found.iter().all(|f| f.ends_with("=0")), found.join(" "))
}

fn small_k3() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, expected) in [(9, 3), (10, 10), (11, 31)] {
        match class_count(n, 3, expected, Duration::from_secs(300)) {
            Outcome::Pass(d) => parts.push(d),
            Outcome::Fail(d) | Outcome::Skip(d) => {
                ok = false;
                parts.push(d)
            }
        }
    }
    check(ok, parts.join("; "))
}

fn unique_17_4() -> Outcome {
    let started = Instant::now();
    let (r, raw) = match classes(17, 4) {
        Ok(x) => x,
        Err(e) => return Outcome::Fail(e),
    };
    let took = started.elapsed();
    let figure = fixtures::config_17_4();
    let matches = r.classes.len() == 1 && are_isomorphic(&r.classes[0].representative, &figure).is_some();
    let self_dual = r.classes.first().is_some_and(|c| is_self_dual(&c.representative));
    check(
        matches && self_dual && took <= Duration::from_secs(600),
        format!(
            "{} class from {raw} sweeps, isomorphic to figure: {matches}, self-dual: {self_dual} [{:.1}s]",
            r.classes.len(),
            took.as_secs_f64()
        ),
    )
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, k, expected) in [(7, 3, 1), (8, 3, 1), (9, 3, 3), (13, 4, 1)] {
        let reps = match enumerate_combinatorial(n, k) {
            Ok(r) => r,
            Err(e) => return Outcome::Fail(format!("({n},{k}): {e}")),
        };
        let mut copies = Vec::new();
        for c in &reps {
            for _ in 0..4 {
                let mut p: Vec<usize> = (0..n).collect();
                let mut l: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                l.shuffle(&mut rng);
                copies.push(c.relabel(&p, &l));
            }
        }
        copies.shuffle(&mut rng);
        let reduced = reduce_all(copies).map(|r| r.classes.len()).unwrap_or(usize::MAX);
        ok &= reps.len() == expected && reduced == expected;
        parts.push(format!("c{k}({n}): oracle {} reduce {reduced} expected {expected}", reps.len()));
    }
    check(ok, parts.join("; "))
}

fn fixture_algebra() -> Outcome {
    let first = fixtures::first_18_4();
    let second = fixtures::second_18_4();
    let (a1, a2) = (automorphism_count(&first), automorphism_count(&second));
    let (d1, d2) = (is_self_dual(&first), is_self_dual(&second));
    check(
        a1 == 24 && a2 == 2 && d1 && d2,
        format!("|Aut| = {a1}, {a2} (expected 24, 2); self-dual {d1}, {d2}"),
    )
}

fn relabel_invariance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fixtures = [
        fixtures::fano(),
        fixtures::mobius_kantor(),
        fixtures::pappus(),
        fixtures::projective_plane_3(),
        fixtures::config_17_4(),
        fixtures::first_18_4(),
        fixtures::second_18_4(),
    ];
    for c in &fixtures {
        let mut interner = Interner::new();
        let key = invariant_key(c, &mut interner);
        for _ in 0..100 {
            let mut p: Vec<usize> = (0..c.n()).collect();
            let mut l: Vec<usize> = (0..c.n()).collect();
            p.shuffle(&mut rng);
            l.shuffle(&mut rng);
            if invariant_key(&c.relabel(&p, &l), &mut interner) != key {
                return Err(format!("({},{}) key changed under relabeling", c.n(), c.k()));
            }
        }
    }
    Ok(format!("{} fixtures x 100 relabelings", fixtures.len()))
}

fn monotone(configs: &[Configuration]) -> Result<String, String> {
    let mut interner = Interner::new();
    for c in configs {
        let levels = refinement_levels(c, &mut interner);
        if !levels.windows(2).all(|w| w[1].refines(&w[0])) {
            return Err("derivative level does not refine its predecessor".into());
        }
    }
    Ok(format!("{} configurations", configs.len()))
}

fn property_suites() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut note = |r: Result<String, String>, what: &str| match r {
        Ok(d) => parts.push(format!("{what}: {d}")),
        Err(d) => {
            ok = false;
            parts.push(format!("{what}: {d}"))
        }
    };

    note(relabel_invariance(), "relabeling");

    let mut sweeps = Vec::new();
    let mut replay = Ok(0usize);
    for n in [9, 10] {
        let outputs = enumerate_all(n, 3, &SweepOptions::default()).unwrap_or_default();
        for o in &outputs {
            match naive_sweep_check(&o.history, n, 3) {
                Ok(c) if c.canonical() == o.config.canonical() => replay = replay.map(|x| x + 1),
                Ok(_) => replay = Err(format!("({n},3) replay gives another configuration")),
                Err(e) => replay = Err(format!("({n},3) replay rejected: {e}")),
            }
        }
        sweeps.extend(outputs);
    }
    note(replay.map(|x| format!("{x} histories")), "wire replay");

    let mut configs: Vec<Configuration> = sweeps.iter().map(|o| o.config.clone()).collect();
    configs.push(fixtures::first_18_4());
    configs.push(fixtures::second_18_4());
    note(monotone(&configs), "refinement");

    let idempotent = reduce_all(sweeps.iter().filter(|o| o.config.n() == 10).map(|o| o.config.clone()))
        .and_then(|first| {
            let reps: Vec<_> = first.classes.iter().map(|c| c.representative.clone()).collect();
            reduce_all(reps.clone()).map(|second| {
                let again: Vec<_> = second.classes.iter().map(|c| c.representative.clone()).collect();
                (reps, again)
            })
        });
    note(
        match idempotent {
            Ok((a, b)) if a == b => Ok(format!("{} classes stable", a.len())),
            Ok(_) => Err("second reduction changed the classes".into()),
            Err(e) => Err(e.to_string()),
        },
        "reduce idempotence",
    );

    let one = enumerate_all(10, 3, &SweepOptions { jobs: 1, ..SweepOptions::default() });
    let eight = enumerate_all(10, 3, &SweepOptions { jobs: 8, ..SweepOptions::default() });
    let ser = |r: &Result<Vec<confsweep::sweep::SweepOutput>, _>| -> Option<String> {
        r.as_ref().ok().map(|v| v.iter().map(|o| serde_json::to_string(&o.to_record()).unwrap() + "\n").collect())
    };
    let (s1, s8) = (ser(&one), ser(&eight));
    note(
        if s1.is_some() && s1 == s8 { Ok("(10,3) streams identical".into()) } else { Err("streams differ".into()) },
        "jobs 1 vs 8",
    );

    check(ok, parts.join("; "))
}

type Criterion = (u32, &'static str, Box<dyn Fn() -> Outcome>);

fn main() -> ExitCode {
    let long = long_runs();
    let criteria: Vec<Criterion> = vec![
        (1, "partition table", Box::new(partition_table)),
        (2, "no (7_3), (8_3)", Box::new(|| non_existence(&[(7, 3), (8, 3)]))),
        (3, "small k=3 counts", Box::new(small_k3)),
        (
            4,
            "(12_3) count",
            Box::new(move || {
                if long {
                    class_count(12, 3, 229, Duration::from_secs(3600))
                } else {
                    Outcome::Skip("set CONFSWEEP_LONG=1".into())
                }
            }),
        ),
        (5, "no (13_4)..(16_4)", Box::new(|| non_existence(&[(13, 4), (14, 4), (15, 4), (16, 4)]))),
        (6, "(17_4) unique and self-dual", Box::new(unique_17_4)),
        (
            7,
            "(18_4) count",
            Box::new(move || {
                if long {
                    class_count(18, 4, 16, Duration::from_secs(12 * 3600))
                } else {
                    Outcome::Skip("set CONFSWEEP_LONG=1".into())
                }
            }),
        ),
        (8, "(19_4) count", Box::new(|| Outcome::Skip("excluded: weeks of computation".into()))),
        (9, "oracle agreement", Box::new(oracle_agreement)),
        (10, "fixture algebra", Box::new(fixture_algebra)),
        (11, "property suites", Box::new(property_suites)),
    ];

    let mut failed = 0;
    for (id, name, run) in &criteria {
        let (tag, detail) = match run() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} criterion {id:>2} {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
