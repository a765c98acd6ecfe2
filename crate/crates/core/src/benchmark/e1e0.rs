//! The uniform `E_1 → E_0` machine on a finite family `W_0..W_K`.
//!
//! Slice `C^{cj}` is column `<c,j>`: elements `<<c,j>,r>`. Slice `(c,j)`
//! activates at stage `c` with marker `r = 0` in output `j`. At each later
//! stage, in this order:
//!
//! 1. minima: `m^{ci} = min(W_i^c Δ W_j^c)` for `i < j`; if one is undefined
//!    or moved, the marker is retired into every output and advances.
//! 2. retirement: otherwise, if for some `k` in `(j, c]` the agreement of
//!    `W_k` and `W_j` on every `m^{ci}` held last stage and fails now, the
//!    marker is retired likewise.
//! 3. echo: for every `k` whose agreement fails last stage and holds now,
//!    the current marker enters output `k`.
//!
//! A fresh marker enters output `j` and every output `k` whose agreement
//! holds when it is chosen.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ops::{param, run_arg};
use crate::pairing::{pair, try_pair, unpair};
use crate::program::{Budget, EvalError, SetProgram, Stage, Trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    MinimumMoved,
    MarkerRetired,
    Echo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub stage: Stage,
    pub column: u64,
    pub slice: u64,
    pub kind: EventKind,
    /// The marker affected (retired, or echoed).
    pub marker: u64,
}

#[derive(Clone, Debug)]
struct SliceState {
    marker: u64,
    since: Stage,
    minima: Vec<Option<u64>>,
    /// Agreement with `W_j` for `k = j+1..=min(c,K)`.
    facts: Vec<bool>,
    /// Outputs currently holding the marker.
    holders: BTreeSet<usize>,
}

/// Input columns as sorted `(k, entry)` lists.
struct Columns(Vec<BTreeMap<u64, Vec<(u64, Stage)>>>);

impl Columns {
    fn new(inputs: &[Trace]) -> Self {
        Columns(
            inputs
                .iter()
                .map(|t| {
                    let mut m: BTreeMap<u64, Vec<(u64, Stage)>> = BTreeMap::new();
                    for (x, st) in t.iter() {
                        let (c, k) = unpair(x);
                        m.entry(c).or_default().push((k, st));
                    }
                    m
                })
                .collect(),
        )
    }

    fn has(&self, i: usize, c: u64, k: u64, t: Stage) -> bool {
        self.0[i]
            .get(&c)
            .and_then(|v| v.iter().find(|e| e.0 == k))
            .is_some_and(|e| e.1 <= t)
    }

    fn least_diff(&self, i: usize, j: usize, c: u64, t: Stage) -> Option<u64> {
        let at = |x: usize| -> BTreeSet<u64> {
            self.0[x]
                .get(&c)
                .into_iter()
                .flatten()
                .filter(|e| e.1 <= t)
                .map(|e| e.0)
                .collect()
        };
        let (a, b) = (at(i), at(j));
        a.symmetric_difference(&b).next().copied()
    }
}

/// A finished run: outputs, events and the final slice states.
#[derive(Clone, Debug)]
pub struct Run {
    pub upto: Stage,
    pub family: usize,
    pub outputs: Vec<Trace>,
    pub events: Vec<Event>,
    slices: BTreeMap<(u64, u64), SliceState>,
}

pub fn slice_element(c: u64, j: u64, r: u64) -> Result<u64, EvalError> {
    try_pair(c, j)
        .and_then(|cj| try_pair(cj, r))
        .ok_or(EvalError::Overflow("slice element"))
}

/// Runs the machine on `inputs` through stage `upto`. With `mutant` a
/// marker only ever enters output `j` before retirement.
pub fn run_machine(inputs: &[Trace], upto: Stage, mutant: bool, budget: &mut Budget) -> Result<Run, EvalError> {
    run_machine_tracked(inputs, upto, Stage::MAX, mutant, budget)
}

/// [`run_machine`] with only the columns `c ≤ max_column` activated. Each
/// slice reads its own input column only, so the tracked slices evolve
/// exactly as in the full run.
pub fn run_machine_tracked(
    inputs: &[Trace],
    upto: Stage,
    max_column: u64,
    mutant: bool,
    budget: &mut Budget,
) -> Result<Run, EvalError> {
    let kk = inputs.len();
    let cols = Columns::new(inputs);
    let mut outputs: Vec<Trace> = (0..kk).map(|_| Trace::new(upto)).collect();
    let mut events = Vec::new();
    let mut slices: BTreeMap<(u64, u64), SliceState> = BTreeMap::new();

    let facts_at = |c: u64, j: usize, minima: &[Option<u64>], t: Stage| -> Vec<bool> {
        let top = (c as usize).min(kk - 1);
        let defined: Option<Vec<u64>> = minima.iter().copied().collect();
        (j + 1..=top)
            .map(|k| match &defined {
                Some(ms) => ms.iter().all(|&m| cols.has(k, c, m, t) == cols.has(j, c, m, t)),
                None => false,
            })
            .collect()
    };

    for t in 0..=upto {
        if kk == 0 {
            break;
        }
        // activation of column t
        if t <= max_column {
            for j in 0..kk {
                let c = t;
                let minima = vec![None; j];
                let facts = facts_at(c, j, &minima, t);
                let marker = slice_element(c, j as u64, 0)?;
                let mut holders = BTreeSet::from([j]);
                for (i, &f) in facts.iter().enumerate() {
                    if f && !mutant {
                        holders.insert(j + 1 + i);
                    }
                }
                for &h in &holders {
                    outputs[h].add(marker, t);
                }
                slices.insert(
                    (c, j as u64),
                    SliceState {
                        marker,
                        since: t,
                        minima,
                        facts,
                        holders,
                    },
                );
            }
        }
        if t == 0 {
            continue;
        }
        let prev = t - 1;
        for (&(c, jj), st) in slices.iter_mut() {
            if c >= t {
                continue;
            }
            budget.tick(1 + jj)?;
            let j = jj as usize;
            let minima: Vec<Option<u64>> = (0..j).map(|i| cols.least_diff(i, j, c, prev)).collect();
            let moved = minima.iter().zip(&st.minima).any(|(new, old)| new.is_none() || new != old);
            let retire_kind = if moved {
                Some(EventKind::MinimumMoved)
            } else {
                let now = facts_at(c, j, &minima, t);
                if st.facts.iter().zip(&now).any(|(&was, &is)| was && !is) {
                    Some(EventKind::MarkerRetired)
                } else {
                    for (i, (&was, &is)) in st.facts.iter().zip(&now).enumerate() {
                        if !was && is && !mutant {
                            let k = j + 1 + i;
                            outputs[k].add(st.marker, t);
                            st.holders.insert(k);
                            events.push(Event {
                                stage: t,
                                column: c,
                                slice: jj,
                                kind: EventKind::Echo,
                                marker: st.marker,
                            });
                        }
                    }
                    st.facts = now;
                    None
                }
            };
            st.minima = minima;
            let Some(kind) = retire_kind else {
                continue;
            };
            for o in outputs.iter_mut() {
                o.add(st.marker, t);
            }
            events.push(Event {
                stage: t,
                column: c,
                slice: jj,
                kind,
                marker: st.marker,
            });
            let (_, r) = unpair(st.marker);
            st.marker = slice_element(c, jj, r + 1)?;
            st.since = t;
            st.facts = facts_at(c, j, &st.minima, t);
            st.holders = BTreeSet::from([j]);
            for (i, &f) in st.facts.iter().enumerate() {
                if f && !mutant {
                    st.holders.insert(j + 1 + i);
                }
            }
            for &h in &st.holders {
                outputs[h].add(st.marker, t);
            }
        }
    }
    Ok(Run {
        upto,
        family: kk,
        outputs,
        events,
        slices,
    })
}

/// Op entry point: args are the family, `params[0]` the output index.
pub fn eval(mutant: bool, args: &[SetProgram], params: &[u64], s: Stage, budget: &mut Budget) -> Result<Trace, EvalError> {
    let inputs: Vec<Trace> = (0..args.len())
        .map(|i| run_arg(args, i, s, budget))
        .collect::<Result<_, _>>()?;
    let i = param(params, 0) as usize;
    if i >= inputs.len() {
        return Ok(Trace::new(s));
    }
    let mut run = run_machine(&inputs, s, mutant, budget)?;
    Ok(run.outputs.swap_remove(i))
}

impl Run {
    /// Current marker of slice `(c,j)` and the stage it was chosen.
    pub fn marker(&self, c: u64, j: u64) -> Option<(u64, Stage)> {
        self.slices.get(&(c, j)).map(|s| (s.marker, s.since))
    }

    pub fn slice_members(&self, out: usize, c: u64, j: u64, t: Stage) -> BTreeSet<u64> {
        let cj = pair(c, j);
        self.outputs[out]
            .iter()
            .filter(|&(x, st)| st <= t && unpair(x).0 == cj)
            .map(|(x, _)| x)
            .collect()
    }

    /// Per-slice invariants at the final stage: retired markers in every
    /// output, later elements in none, the marker itself in output `j`.
    pub fn check_slices(&self) -> Result<(), String> {
        for (&(c, j), st) in &self.slices {
            let (_, r) = unpair(st.marker);
            for o in 0..self.family {
                let got = self.slice_members(o, c, j, self.upto);
                for x in &got {
                    let (_, rx) = unpair(*x);
                    if rx > r {
                        return Err(format!("output {o} holds future element {rx} of slice ({c},{j})"));
                    }
                }
                for rx in 0..r {
                    let x = slice_element(c, j, rx).map_err(|e| e.to_string())?;
                    if !got.contains(&x) {
                        return Err(format!("retired marker {rx} of slice ({c},{j}) missing from output {o}"));
                    }
                }
                if got.contains(&st.marker) != st.holders.contains(&o) {
                    return Err(format!("holder set of slice ({c},{j}) out of sync at output {o}"));
                }
            }
            if !st.holders.contains(&(j as usize)) {
                return Err(format!("marker of slice ({c},{j}) missing from output {j}"));
            }
        }
        Ok(())
    }

    /// Each slice's symmetric difference between two outputs at stage `t`
    /// has at most one element, the marker current at `t`.
    pub fn check_single_difference(&self, t: Stage) -> Result<(), String> {
        for &(c, j) in self.slices.keys() {
            if c > t {
                continue;
            }
            let sets: Vec<BTreeSet<u64>> = (0..self.family).map(|o| self.slice_members(o, c, j, t)).collect();
            let union: BTreeSet<u64> = sets.iter().flatten().copied().collect();
            let inter: BTreeSet<u64> = union.iter().copied().filter(|x| sets.iter().all(|s| s.contains(x))).collect();
            let diff: Vec<u64> = union.difference(&inter).copied().collect();
            if diff.len() > 1 {
                return Err(format!("slice ({c},{j}) differs on {} elements at stage {t}", diff.len()));
            }
            if let Some(&x) = diff.first() {
                let newest = union.iter().copied().max().unwrap();
                if x != newest {
                    return Err(format!("slice ({c},{j}) differs below its marker at stage {t}"));
                }
            }
        }
        Ok(())
    }

    /// [`Run::check_single_difference`] at every stage through `upto`, in
    /// one pass: element `x` of a slice is a difference during
    /// `[first entry, last entry)` over the outputs, and those intervals
    /// must be disjoint and each end before a larger element appears.
    pub fn check_single_difference_all(&self) -> Result<(), String> {
        let never = self.upto.saturating_add(1);
        let mut by_slice: BTreeMap<u64, BTreeMap<u64, Vec<Stage>>> = BTreeMap::new();
        for (o, out) in self.outputs.iter().enumerate() {
            for (x, st) in out.iter() {
                let e = by_slice.entry(unpair(x).0).or_default().entry(x).or_insert_with(|| vec![never; self.family]);
                e[o] = st;
            }
        }
        for (cj, elems) in by_slice {
            let (c, j) = unpair(cj);
            let spans: Vec<(u64, Stage, Stage)> = elems
                .iter()
                .map(|(&x, es)| (x, *es.iter().min().unwrap(), *es.iter().max().unwrap()))
                .collect();
            // least first appearance among larger elements
            let mut later_min = never;
            for &(x, lo, hi) in spans.iter().rev() {
                if lo < hi && later_min < hi {
                    return Err(format!("slice ({c},{j}) differs on {x} below its marker at stage {later_min}"));
                }
                later_min = later_min.min(lo);
            }
            let mut open: Vec<(Stage, Stage)> = spans.iter().filter(|s| s.1 < s.2).map(|s| (s.1, s.2)).collect();
            open.sort_unstable();
            for w in open.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(format!("slice ({c},{j}) differs on two elements at stage {}", w[1].0));
                }
            }
        }
        Ok(())
    }

    /// Markers only move up their slice.
    pub fn check_monotone(&self) -> Result<(), String> {
        let mut last: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for e in &self.events {
            if e.kind == EventKind::Echo {
                continue;
            }
            let (_, r) = unpair(e.marker);
            if let Some(&p) = last.get(&(e.column, e.slice)) {
                if r <= p {
                    return Err(format!("slice ({},{}) marker went from {p} to {r}", e.column, e.slice));
                }
            }
            last.insert((e.column, e.slice), r);
        }
        Ok(())
    }

    /// Outputs `m` and `n` differ on slice `(c,j)` at stage `t`.
    pub fn slice_differs(&self, m: usize, n: usize, c: u64, j: u64, t: Stage) -> bool {
        self.slice_members(m, c, j, t) != self.slice_members(n, c, j, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::Descriptor;
    use crate::program::run;

    fn traces(ds: &[&str], upto: Stage) -> Vec<Trace> {
        let mut b = Budget::default();
        ds.iter()
            .map(|d| {
                let (p, _) = d.parse::<Descriptor>().unwrap().compile();
                run(&p, upto, &mut b).unwrap()
            })
            .collect()
    }

    #[test]
    fn equal_inputs_give_equal_outputs_in_the_limit() {
        let ins = traces(&["columns(finite(0);1:finite(1))", "columns(finite(0);1:finite(1))"], 40);
        let run = run_machine(&ins, 40, false, &mut Budget::default()).unwrap();
        run.check_slices().unwrap();
        run.check_monotone().unwrap();
        for t in 0..=40 {
            run.check_single_difference(t).unwrap();
        }
        // slice (c,1) keeps moving: its differences are only the newest marker
        for c in 2..10 {
            let (_, since) = run.marker(c, 1).unwrap();
            assert_eq!(since, 40);
        }
        // slice (c,0) agrees once the echo lands
        for c in 1..10 {
            assert!(!run.slice_differs(0, 1, c, 0, 40), "column {c}");
        }
    }

    #[test]
    fn differing_columns_leave_a_stable_difference() {
        let ins = traces(&["columns(finite(0))", "columns(finite(1))"], 40);
        let run = run_machine(&ins, 40, false, &mut Budget::default()).unwrap();
        run.check_slices().unwrap();
        for c in 2..8 {
            let (_, since) = run.marker(c, 1).unwrap();
            assert!(since < 30, "column {c} marker still moving");
            assert!(run.slice_differs(0, 1, c, 1, 40));
        }
    }

    #[test]
    fn one_pass_check_matches_the_stagewise_one() {
        let fams: [&[&str]; 3] = [
            &["columns(finite(0))", "columns(finite(1))", "columns(finite(0);2:finite(3))"],
            &["columns(prog(0,2))", "columns(prog(1,2))"],
            &["columns(finite();0:finite(1))", "columns(finite())", "columns(finite(2))", "columns(finite())"],
        ];
        for fam in fams {
            let ins = traces(fam, 30);
            for mutant in [false, true] {
                let run = run_machine(&ins, 30, mutant, &mut Budget::default()).unwrap();
                let stagewise = (0..=30).try_for_each(|t| run.check_single_difference(t));
                assert_eq!(run.check_single_difference_all().is_ok(), stagewise.is_ok(), "{fam:?} {mutant}");
            }
        }
    }

    #[test]
    fn events_are_logged_in_stage_order() {
        let ins = traces(&["columns(finite(0))", "columns(finite(0))", "columns(finite(1))"], 20);
        let run = run_machine(&ins, 20, false, &mut Budget::default()).unwrap();
        assert!(run.events.windows(2).all(|w| w[0].stage <= w[1].stage));
        assert!(run.events.iter().any(|e| e.kind == EventKind::MinimumMoved));
    }
}
