//! One pass/fail line per acceptance criterion, written straight to stderr
//! so it shows without `--nocapture`.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use celab::basic::{uce_embed, OrbitAction, UceView};
use celab::descriptor::{ratcut_value, Descriptor};
use celab::harness::monotone::check_monotone;
use celab::harness::{gen_corpus_with, lookup, registry, verify_with, VerificationReport, VerifyOptions};
use celab::nce::{self, ltomega_decode, ltomega_encode, ltomega_to_e3, NceProgram};
use celab::numbering::encode;
use celab::pairing::{pair, unpair_big, MAX_TUPLE_LEN};
use celab::program::{column_of, run, Budget, SetProgram};
use celab::relations::hierarchy::hierarchy_graph;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn default_run(id: &str, seed: u64, size: usize, mutant: bool) -> Result<VerificationReport, String> {
    let red = lookup(id).ok_or_else(|| format!("no reduction {id}"))?;
    let corpus = gen_corpus_with(&red.source, red.shape, seed, size).map_err(|e| e.to_string())?;
    let opts = VerifyOptions {
        mutant,
        ..VerifyOptions::default()
    };
    verify_with(&red, &corpus, &opts).map_err(|e| e.to_string())
}

fn clean(r: &VerificationReport) -> Result<(), String> {
    ensure(r.is_clean(), || {
        let first = r.disagreements.first().map(|d| format!(": case {} {}", d.case, d.reason));
        format!(
            "{}: {} disagreements, {} unknowns{}",
            r.reduction,
            r.disagreements.len(),
            r.unknown_count(),
            first.unwrap_or_default()
        )
    })
}

/// Reflexive, symmetric, transitive closure of `pairs` on `0..n`.
fn closure(pairs: &[(u64, u64)], n: usize) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in pairs {
        m[a as usize][b as usize] = true;
        m[b as usize][a as usize] = true;
    }
    for k in 0..n {
        let via = m[k].clone();
        for row in m.iter_mut().filter(|row| row[k]) {
            for (x, &y) in row.iter_mut().zip(&via) {
                *x |= y;
            }
        }
    }
    m
}

fn random_pairs(rng: &mut ChaCha8Rng, max_pairs: usize, top: u64) -> Vec<(u64, u64)> {
    let k = rng.gen_range(0..=max_pairs);
    (0..k).map(|_| (rng.gen_range(0..=top), rng.gen_range(0..=top))).collect()
}

fn script_of(pairs: &[(u64, u64)], rng: &mut ChaCha8Rng) -> SetProgram {
    SetProgram::scheduled(pairs.iter().map(|&(a, b)| (pair(a, b), rng.gen_range(0..8))))
}

fn c1_biconditionals() -> Verdict {
    let start = Instant::now();
    let reds = registry();
    for red in &reds {
        clean(&default_run(red.id, 1, 50, false)?)?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(300), || format!("took {took:.1?}"))?;
    Ok(format!("{} reductions x 50 cases clean in {took:.1?}", reds.len()))
}

fn c2_tracked_families() -> Verdict {
    let r = default_run("e1_to_e0", 2, 25, false)?;
    clean(&r)?;
    Ok(format!("{} families of 4 inputs, lemmas at every stage, all pairs E1 <=> E0", r.cases))
}

fn c3_basic_module() -> Verdict {
    let r = default_run("basic_module", 2, 20, false)?;
    clean(&r)?;
    Ok(format!("{} settled pairs", r.cases))
}

fn c4_monotone() -> Verdict {
    let mut n = 0;
    for red in registry() {
        let Some(rep) = check_monotone(&red, 1, 50, 256) else { continue };
        ensure(rep.violations.is_empty(), || format!("{}: {:?}", rep.reduction, rep.violations.first()))?;
        ensure(rep.chains == 50, || format!("{}: {} chains", rep.reduction, rep.chains))?;
        n += 1;
    }
    ensure(n > 0, || "no monotone constructions".into())?;
    Ok(format!("{n} constructions, 50 chains each"))
}

fn c5_uce() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut budget = Budget::default();
    let mut codes = Vec::new();
    for _ in 0..30 {
        let pairs = random_pairs(&mut rng, 14, 30);
        let p = script_of(&pairs, &mut rng);
        let e = encode(&p);
        let want = closure(&pairs, 31);
        let mut view = UceView::new(8);
        for a in 0..=30u64 {
            for b in 0..=30u64 {
                let got = view
                    .related(&uce_embed(&e, a), &uce_embed(&e, b), &mut budget)
                    .map_err(|x| x.to_string())?;
                ensure(got == want[a as usize][b as usize], || format!("({a},{b}) in {pairs:?}: got {got}"))?;
            }
        }
        codes.push(e);
    }
    let mut view = UceView::new(8);
    for w in codes.windows(2).filter(|w| w[0] != w[1]) {
        let got = view.related(&uce_embed(&w[0], 1), &uce_embed(&w[1], 1), &mut budget).map_err(|x| x.to_string())?;
        ensure(!got, || "distinct relations share a class".into())?;
    }
    Ok("30 relations, 31x31 pairs each".into())
}

fn c6_orbits() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut budget = Budget::default();
    for inst in 0..30 {
        // at most four pairs: every class is reached by words of length 4
        let pairs = random_pairs(&mut rng, 4, 8);
        let p = script_of(&pairs, &mut rng);
        let act = OrbitAction::new(&p, 12, &mut budget).map_err(|e| e.to_string())?;
        let want = closure(&pairs, 10);
        for x in 0..10u64 {
            let class: BTreeSet<u64> = (0..10).filter(|&y| want[x as usize][y as usize]).collect();
            let orbit = act.orbit(x, 4);
            ensure(orbit == class, || format!("instance {inst}: orbit of {x} is {orbit:?}, class {class:?}"))?;
        }
        let letters: Vec<u64> = act.live_generators().iter().map(|&i| 2 * i + rng.gen_range(0..2)).collect();
        for _ in 0..20 {
            let len = if letters.is_empty() { 0 } else { rng.gen_range(0..=4) };
            let word: Vec<u64> = (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect();
            let x = rng.gen_range(0..10u64);
            let y = act.act(&word, x);
            ensure(y < 10 && want[x as usize][y as usize], || format!("instance {inst}: {word:?} moves {x} to {y}"))?;
        }
    }
    Ok("30 instances, depth 4".into())
}

fn c7_cuts() -> Verdict {
    let mut seen = BTreeSet::new();
    for mask in 0u64..128 {
        let set = Descriptor::finite((0..7).filter(|i| mask >> i & 1 == 1));
        seen.insert(ratcut_value(&set).map_err(|e| e.to_string())?);
    }
    ensure(seen.len() == 128, || format!("{} distinct cuts", seen.len()))?;
    Ok("128 distinct cuts".into())
}

fn c8_nce() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut budget = Budget::default();
    let tuple = |rng: &mut ChaCha8Rng| -> Vec<SetProgram> {
        (0..rng.gen_range(1..=4))
            .map(|_| SetProgram::scheduled((0..rng.gen_range(0..6)).map(|_| (rng.gen_range(0..12), rng.gen_range(0..12)))))
            .collect()
    };
    for _ in 0..100 {
        let ps = tuple(&mut rng);
        let ts = nce::traces(&NceProgram::from_programs(&ps), 40, &mut budget).map_err(|e| e.to_string())?;
        for k in 0..12 {
            let n = nce::toggles(&ts, k, 40);
            ensure(n <= ps.len() as u64, || format!("{k} toggles {n} times in a {}-tuple", ps.len()))?;
        }
    }
    let (settle, horizon) = (12, 600);
    for _ in 0..30 {
        let ps = tuple(&mut rng);
        let finals: Vec<BTreeSet<u64>> =
            ps.iter().map(|p| run(p, settle, &mut budget).map(|t| t.final_set())).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let none = BTreeSet::new();
        let limit: BTreeSet<u64> = (0..12)
            .filter(|k| (0..ps.len()).step_by(2).any(|i| finals[i].contains(k) && !finals.get(i + 1).unwrap_or(&none).contains(k)))
            .collect();
        // entries are paced to their value, so compare two late horizons
        let out = run(&ltomega_to_e3(&NceProgram::from_programs(&ps)), 2 * horizon, &mut budget).map_err(|e| e.to_string())?;
        let (early, late) = (out.at(horizon), out.at(2 * horizon));
        for k in 0..12 {
            let grows = column_of(&late, k).len() > column_of(&early, k).len();
            ensure(grows == limit.contains(&k), || format!("column {k}: grows {grows}, limit {limit:?}"))?;
        }
    }
    for _ in 0..1000 {
        let n = NceProgram {
            indices: (0..rng.gen_range(0..6)).map(|_| BigUint::from(rng.gen::<u64>())).collect(),
        };
        let code = ltomega_encode(&n);
        ensure(ltomega_decode(&code).as_ref() == Some(&n), || format!("{code} does not round trip"))?;
        // arbitrary codes decode unless they announce 64 or more components
        let raw = BigUint::from(rng.gen::<u64>()) * BigUint::from(rng.gen::<u32>()) + 1u32;
        match ltomega_decode(&raw) {
            Some(m) => ensure(ltomega_encode(&m) == raw, || format!("{raw} does not round trip"))?,
            None => ensure(unpair_big(&(&raw - 1u32)).0 >= BigUint::from(MAX_TUPLE_LEN), || format!("{raw} does not decode"))?,
        }
    }
    Ok("100 toggle bounds, 30 limits, 1000 codes".into())
}

fn c9_goldens() -> Verdict {
    let g = hierarchy_graph();
    ensure(g.to_dot() == include_str!("golden/hierarchy.dot"), || "dot differs".into())?;
    ensure(g.to_json() == include_str!("golden/hierarchy.json"), || "json differs".into())?;
    let edges: usize = g.diagrams.iter().map(|d| d.edges.len()).sum();
    Ok(format!("{} diagrams, {edges} edges", g.diagrams.len()))
}

fn c10_mutants() -> Verdict {
    let reds = registry();
    for red in &reds {
        let r = default_run(red.id, 1, 50, true)?;
        ensure(r.exit_code() == 2, || format!("{} mutant ({}) not caught", red.id, red.mutant))?;
    }
    Ok(format!("{} mutants caught", reds.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("reductions preserve and reflect on seed-1 corpora", c1_biconditionals),
        ("tracked E1 to E0 families", c2_tracked_families),
        ("basic module pairs", c3_basic_module),
        ("monotone on chains", c4_monotone),
        ("U_ce universality", c5_uce),
        ("orbit realization", c6_orbits),
        ("E_Q cut injectivity", c7_cuts),
        ("n-c.e. ladder", c8_nce),
        ("hierarchy goldens", c9_goldens),
        ("mutation suite", c10_mutants),
    ];
    let mut failed = Vec::new();
    // libtest has already written "test acceptance ... " without a newline
    let _ = writeln!(std::io::stderr().lock());
    for (i, (name, f)) in criteria.iter().enumerate() {
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let line = match &res {
            Ok(note) => format!("PASS {:>2} {name}: {note}", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("FAIL {:>2} {name}: {why}", i + 1)
            }
        };
        let _ = writeln!(std::io::stderr().lock(), "{line}");
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}

