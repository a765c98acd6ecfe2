//! Runs a reduction on every case of a corpus and checks the biconditional
//! `a E b ⟺ f(a) F f(b)` with settlement certificates.
//!
//! A side's output is trusted at its settlement stage `T` only if `M` more
//! stages change nothing on the window; otherwise the case is retried once
//! with twice the stages and four times the steps, then reported unknown.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::corpus::{Corpus, TestCase};
use super::registry::{self, Check, Kind, NatMap, Reduction, Settle};
use super::{default_budget, HarnessError, DEFAULT_WINDOW};
use crate::basic::{reduce_eqn_to_pi01, reduce_to_min_n, uce_embed, BasicError, OneRepair, OrbitAction, UceView};
use crate::benchmark::basic_module_pair;
use crate::benchmark::e1e0::run_machine_tracked;
use crate::descriptor::{Descriptor as D, Settlement};
use crate::nce::{self, NceProgram};
use crate::numbering;
use crate::pairing::{pair, unpair};
use crate::program::{run, Budget, EvalError, SetProgram, Stage, Trace};
use crate::relations::{nat_of, oracle_decide, RelationId};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Stage budget `S`.
    pub budget: u64,
    /// Observation window `M`.
    pub window: u64,
    /// Evaluation steps per run.
    pub steps: u64,
    pub mutant: bool,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: default_budget(),
            window: DEFAULT_WINDOW,
            steps: 20_000_000,
            mutant: false,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

/// One side of a case as the verifier saw it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SideTrace {
    pub label: String,
    pub predicted: Option<String>,
    pub settle: Stage,
    pub horizon: Stage,
    /// Output at the settlement stage, on the window.
    pub window: Vec<u64>,
    /// `(element, stage)` entering after settlement, up to twice the window.
    pub late: Vec<(u64, Stage)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CaseTrace {
    pub sides: Vec<SideTrace>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub case: u64,
    #[serde(rename = "descA")]
    pub desc_a: String,
    #[serde(rename = "descB")]
    pub desc_b: String,
    pub expected: bool,
    pub observed: Option<bool>,
    pub reason: String,
    pub trace: CaseTrace,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnknownCase {
    pub case: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub reduction: String,
    pub source: String,
    pub target: String,
    pub mutant: bool,
    pub seed: u64,
    pub cases: usize,
    pub agreements: usize,
    pub disagreements: Vec<Disagreement>,
    pub unknowns: Vec<UnknownCase>,
    pub budget: u64,
    pub window: u64,
    /// Kept out of the JSON so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl VerificationReport {
    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty() && self.unknowns.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// 0 clean, 2 any disagreement, 3 unknowns only.
    pub fn exit_code(&self) -> i32 {
        if !self.disagreements.is_empty() {
            2
        } else if !self.unknowns.is_empty() {
            3
        } else {
            0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Agree,
    Disagree {
        observed: Option<bool>,
        reason: String,
        trace: CaseTrace,
    },
    Unknown(String),
}

enum Halt {
    Retry(String),
    Done(Outcome),
}

type Att<T> = Result<T, Halt>;

fn fail<T>(observed: Option<bool>, reason: impl Into<String>, trace: CaseTrace) -> Att<T> {
    Err(Halt::Done(Outcome::Disagree {
        observed,
        reason: reason.into(),
        trace,
    }))
}

pub fn verify_reduction(id: &str, corpus: &Corpus, budget: u64, window: u64) -> Result<VerificationReport, HarnessError> {
    let red = registry::lookup(id).ok_or_else(|| HarnessError::UnknownReduction(id.to_string()))?;
    let opts = VerifyOptions {
        budget,
        window,
        ..VerifyOptions::default()
    };
    verify_with(&red, corpus, &opts)
}

pub fn verify_with(red: &Reduction, corpus: &Corpus, opts: &VerifyOptions) -> Result<VerificationReport, HarnessError> {
    if corpus.relation != red.source {
        return Err(HarnessError::WrongSource {
            reduction: red.id.to_string(),
            expected: red.source.to_string(),
            found: corpus.relation.to_string(),
        });
    }
    let start = Instant::now();
    let outcomes = map_cases(&corpus.cases, opts.parallel, |c| run_case(red, c, opts));
    let mut report = VerificationReport {
        reduction: red.id.to_string(),
        source: red.source.to_string(),
        target: red.target.to_string(),
        mutant: opts.mutant,
        seed: corpus.seed,
        cases: corpus.cases.len(),
        agreements: 0,
        disagreements: Vec::new(),
        unknowns: Vec::new(),
        budget: opts.budget,
        window: opts.window,
        wall_clock: Duration::ZERO,
    };
    for (case, o) in corpus.cases.iter().zip(outcomes) {
        match o {
            Outcome::Agree => report.agreements += 1,
            Outcome::Disagree { observed, reason, trace } => report.disagreements.push(Disagreement {
                case: case.index,
                desc_a: case.a.to_string(),
                desc_b: case.b.to_string(),
                expected: case.expected,
                observed,
                reason,
                trace,
            }),
            Outcome::Unknown(reason) => report.unknowns.push(UnknownCase { case: case.index, reason }),
        }
    }
    report.wall_clock = start.elapsed();
    Ok(report)
}

#[cfg(feature = "parallel")]
fn map_cases<F: Fn(&TestCase) -> Outcome + Sync>(cases: &[TestCase], parallel: bool, f: F) -> Vec<Outcome> {
    use rayon::prelude::*;
    if parallel {
        cases.par_iter().map(&f).collect()
    } else {
        cases.iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_cases<F: Fn(&TestCase) -> Outcome + Sync>(cases: &[TestCase], _parallel: bool, f: F) -> Vec<Outcome> {
    cases.iter().map(f).collect()
}

/// One case, escalating once.
pub fn run_case(red: &Reduction, case: &TestCase, opts: &VerifyOptions) -> Outcome {
    let mut why = String::new();
    for level in 0..2 {
        let cx = Cx { red, opts, level };
        match attempt(&cx, case) {
            Ok(o) | Err(Halt::Done(o)) => return o,
            Err(Halt::Retry(r)) => why = r,
        }
    }
    Outcome::Unknown(why)
}

struct Cx<'a> {
    red: &'a Reduction,
    opts: &'a VerifyOptions,
    level: u32,
}

impl Cx<'_> {
    fn m(&self) -> u64 {
        self.opts.window
    }

    fn stage_budget(&self) -> u64 {
        self.opts.budget << self.level
    }

    fn stretch(&self, t: Stage) -> Stage {
        t << self.level
    }

    fn budget(&self) -> Budget {
        Budget::new(self.opts.steps << (2 * self.level))
    }

    fn within(&self, upto: Stage) -> Att<()> {
        if upto > self.stage_budget() {
            return Err(Halt::Retry(format!(
                "horizon {upto} exceeds the stage budget {}",
                self.stage_budget()
            )));
        }
        Ok(())
    }

    fn exec(&self, p: &SetProgram, upto: Stage) -> Att<Trace> {
        self.within(upto)?;
        run(p, upto, &mut self.budget()).map_err(eval_halt)
    }
}

fn eval_halt(e: EvalError) -> Halt {
    match e {
        EvalError::BudgetExceeded { .. } => Halt::Retry(e.to_string()),
        other => Halt::Done(Outcome::Disagree {
            observed: None,
            reason: format!("evaluation failed: {other}"),
            trace: CaseTrace::default(),
        }),
    }
}

fn basic_halt(e: BasicError) -> Halt {
    match e {
        BasicError::Eval(e) => eval_halt(e),
        BasicError::SearchExhausted(_) => Halt::Retry(e.to_string()),
        other => Halt::Done(Outcome::Disagree {
            observed: None,
            reason: other.to_string(),
            trace: CaseTrace::default(),
        }),
    }
}

fn decide(r: &RelationId, a: &D, b: &D) -> Att<bool> {
    oracle_decide(r, a, b).map_err(|e| Halt::Done(Outcome::Unknown(format!("oracle for {r}: {e}"))))
}

fn verdict(case: &TestCase, observed: bool, trace: CaseTrace) -> Outcome {
    if observed == case.expected {
        Outcome::Agree
    } else {
        Outcome::Disagree {
            observed: Some(observed),
            reason: "target verdict differs from the source verdict".into(),
            trace,
        }
    }
}

fn attempt(cx: &Cx, case: &TestCase) -> Att<Outcome> {
    match cx.red.kind {
        Kind::Program {
            build,
            predict,
            check,
            settle,
        } => {
            let compiled = case.compiled();
            let mut sides = Vec::new();
            for (i, (p, st)) in compiled.into_iter().enumerate() {
                let d = case.descriptors()[i];
                let pred = predict(d).ok_or_else(|| no_prediction(d))?;
                let t = cx.stretch(settle_stage(settle, &st, cx.m()));
                let prog = build(p, cx.opts.mutant);
                sides.push((pred, t, prog));
            }
            program_sides(cx, case, check, sides)
        }
        Kind::Tuple { build, predict, check } => {
            let mut sides = Vec::new();
            for i in 0..2 {
                let d = case.descriptors()[i];
                let pred = predict(d).ok_or_else(|| no_prediction(d))?;
                let (progs, st) = compile_tuple(case, i)?;
                let t = cx.stretch(settle_stage(Settle::Window, &st, cx.m()));
                let prog = build(&NceProgram::from_programs(&progs), cx.opts.mutant);
                sides.push((pred, t, prog));
            }
            program_sides(cx, case, check, sides)
        }
        Kind::Pairwise => pairwise(cx, case),
        Kind::Family => family(cx, case),
        Kind::NceMap => nce_map(cx, case),
        Kind::Naturals(map) => naturals(cx, case, map),
    }
}

fn no_prediction(d: &D) -> Halt {
    Halt::Done(Outcome::Unknown(format!("no prediction for {d}")))
}

fn settle_stage(settle: Settle, st: &Settlement, m: u64) -> Stage {
    let w = match settle {
        Settle::Window => m,
        Settle::DoubleWindow => 2 * m,
    };
    st.stage(w).max(w) + 8
}

fn below(set: &BTreeSet<u64>, bound: u64) -> BTreeSet<u64> {
    set.range(..=bound).copied().collect()
}

fn side_trace(label: &str, pred: Option<&D>, tr: &Trace, t: Stage, m: u64) -> SideTrace {
    SideTrace {
        label: label.to_string(),
        predicted: pred.map(D::to_string),
        settle: t,
        horizon: tr.upto(),
        window: below(&tr.at(t), m).into_iter().collect(),
        late: tr.iter().filter(|&(x, st)| st > t && x <= 2 * m).collect(),
    }
}

fn show(xs: impl IntoIterator<Item = u64>) -> String {
    let v: Vec<String> = xs.into_iter().take(8).map(|x| x.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

enum SideCheck {
    Ok,
    Mismatch(String),
    Unstable(String),
}

fn check_side(target: &RelationId, check: Check, tr: &Trace, pred: &D, t: Stage, m: u64) -> Att<SideCheck> {
    let u = tr.upto();
    Ok(match check {
        Check::Exact => {
            let got = below(&tr.at(t), m);
            let later = below(&tr.at(u), m);
            let want = pred.members_below(m + 1);
            if got != later {
                SideCheck::Unstable(format!("changed on the window after stage {t}"))
            } else if got != want {
                SideCheck::Mismatch(format!(
                    "output differs from the prediction: missing {}, extra {}",
                    show(want.difference(&got).copied()),
                    show(got.difference(&want).copied())
                ))
            } else {
                SideCheck::Ok
            }
        }
        Check::Equivalent => {
            let got = tr.at(t);
            if got != tr.final_set() {
                SideCheck::Unstable(format!("output still growing after stage {t}"))
            } else if !decide(target, &D::Finite(got.clone()), pred)? {
                SideCheck::Mismatch(format!("output {} is not {target}-related to the prediction", show(got)))
            } else {
                SideCheck::Ok
            }
        }
        Check::Junk => {
            let want = pred.members_below(m + 1);
            let got = tr.at(t);
            let missing: Vec<u64> = want.iter().copied().filter(|x| !got.contains(x)).collect();
            let late: Vec<u64> = tr
                .iter()
                .filter(|&(x, st)| st > t && x <= 2 * m && !pred.contains(x))
                .map(|(x, _)| x)
                .collect();
            if !late.is_empty() {
                SideCheck::Mismatch(format!("elements outside the prediction after settlement: {}", show(late)))
            } else if !missing.is_empty() {
                let still = missing.iter().any(|x| !tr.contains_at(*x, u));
                let msg = format!("prediction missing from the output: {}", show(missing));
                if still {
                    SideCheck::Mismatch(msg)
                } else {
                    SideCheck::Unstable(msg)
                }
            } else {
                SideCheck::Ok
            }
        }
    })
}

fn program_sides(cx: &Cx, case: &TestCase, check: Check, sides: Vec<(D, Stage, SetProgram)>) -> Att<Outcome> {
    let m = cx.m();
    let target = &cx.red.target;
    let mut trace = CaseTrace::default();
    let mut problem: Option<String> = None;
    for (label, (pred, t, prog)) in ["A", "B"].iter().zip(&sides) {
        let tr = cx.exec(prog, t + m)?;
        trace.sides.push(side_trace(label, Some(pred), &tr, *t, m));
        match check_side(target, check, &tr, pred, *t, m)? {
            SideCheck::Ok => {}
            SideCheck::Unstable(r) => return Err(Halt::Retry(format!("side {label}: {r}"))),
            SideCheck::Mismatch(r) => {
                problem.get_or_insert(format!("side {label}: {r}"));
            }
        }
    }
    let observed = decide(target, &sides[0].0, &sides[1].0)?;
    if let Some(reason) = problem {
        return fail(Some(observed), reason, trace);
    }
    Ok(verdict(case, observed, trace))
}

/// Components of a tuple descriptor, columns `0..n` in key order.
pub fn tuple_components(d: &D) -> Vec<D> {
    match d {
        D::Columns { cols, .. } => cols.values().cloned().collect(),
        other => vec![other.clone()],
    }
}

fn compile_tuple(case: &TestCase, side: usize) -> Att<(Vec<SetProgram>, Settlement)> {
    let (spread, salt) = (case.spreads()[side], case.salts()[side]);
    let mut st = Settlement::fixed(0);
    let mut progs = Vec::new();
    for (k, c) in tuple_components(case.descriptors()[side]).iter().enumerate() {
        let k = k as u64;
        let (p, s) = c.compile_delayed((spread + 3 * k) % 13, salt * 8 + k);
        st = st.max(s);
        progs.push(p);
    }
    Ok((progs, st))
}

fn column_keys(d: &D) -> BTreeSet<u64> {
    match d {
        D::Columns { cols, .. } => cols.keys().copied().collect(),
        _ => BTreeSet::new(),
    }
}

/// Column `c` of a trace at stage `t`, elements `<c,k> ≤ lim`.
fn column_at(tr: &Trace, c: u64, t: Stage, lim: u64) -> BTreeSet<u64> {
    tr.iter()
        .filter(|&(x, st)| st <= t && x <= lim && unpair(x).0 == c)
        .map(|(x, _)| unpair(x).1)
        .collect()
}

fn sym(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> BTreeSet<u64> {
    a.symmetric_difference(b).copied().collect()
}

/// The basic module: the pair verdict sits in the first unlisted column,
/// listed columns must agree or differ finitely.
fn pairwise(cx: &Cx, case: &TestCase) -> Att<Outcome> {
    let m = cx.m();
    let [(pa, sa), (pb, sb)] = case.compiled();
    let t = cx.stretch(sa.max(sb).stage(m).max(m) + 8);
    let u = t + m;
    let (ta, tb) = (cx.exec(&pa, u)?, cx.exec(&pb, u)?);
    let (fij, fji) = basic_module_pair(&ta, &tb, cx.opts.mutant, &mut cx.budget()).map_err(eval_halt)?;
    let mut trace = CaseTrace {
        sides: vec![side_trace("f(i,j)", None, &fij, t, m), side_trace("f(j,i)", None, &fji, t, m)],
        notes: vec![],
    };
    let keys: BTreeSet<u64> = column_keys(&case.a).union(&column_keys(&case.b)).copied().collect();
    let cstar = keys.iter().max().map_or(0, |k| k + 1);
    let diff = |c: u64, st: Stage, lim: u64| sym(&column_at(&fij, c, st, lim), &column_at(&fji, c, st, lim));
    let (now, then) = (diff(cstar, u, m), diff(cstar, t, m));
    if now != then {
        return Err(Halt::Retry(format!("column {cstar} changed after stage {t}")));
    }
    for c in 0..cstar {
        let (ca, cb) = (case.a.column(c), case.b.column(c));
        let (Some(ca), Some(cb)) = (ca, cb) else { continue };
        let equal = decide(&RelationId::EqCe, &ca, &cb)?;
        let (d_u, d_t, d_far) = (diff(c, u, m), diff(c, t, m), diff(c, u, m + m / 2));
        let bad = if equal {
            (!d_u.is_empty()).then(|| format!("agreement column {c} differs on {}", show(d_u.clone())))
        } else if d_u.is_empty() {
            Some(format!("column {c} differs in the input but not in the output"))
        } else if d_t != d_u || d_far != d_u {
            Some(format!("column {c} keeps acquiring differences: {}", show(d_far.clone())))
        } else {
            None
        };
        if let Some(r) = bad {
            trace.notes.push(format!("column {cstar} differs on {}", show(now.clone())));
            return fail(Some(now.is_empty()), r, trace);
        }
    }
    trace.notes.push(format!("column {cstar} differs on {}", show(now.clone())));
    Ok(verdict(case, now.is_empty(), trace))
}

/// Columns `0..=FAMILY_REP` are tracked; column `FAMILY_REP` is beyond every
/// listed key and stands for all later columns.
pub const FAMILY_REP: u64 = 7;

pub fn with_column0(d: &D, v: u64) -> D {
    match d {
        D::Columns { cols, default } => {
            let mut cols = cols.clone();
            cols.insert(0, D::finite([v]));
            D::Columns {
                cols,
                default: default.clone(),
            }
        }
        other => other.clone(),
    }
}

/// The E_1 to E_0 machine on `[A, B, A', B']`, `A'` and `B'` differing from
/// `A` and `B` in column 0 only.
fn family(cx: &Cx, case: &TestCase) -> Att<Outcome> {
    let m = cx.m();
    let i = case.index;
    let fam = [
        case.a.clone(),
        case.b.clone(),
        with_column0(&case.a, i % 3),
        with_column0(&case.b, (i + 1) % 3),
    ];
    let sp = case.spreads();
    let spreads = [sp[0], sp[1], (sp[0] + 4) % 13, (sp[1] + 4) % 11];
    let wf = pair(FAMILY_REP, 8);
    let mut t = 0;
    let mut progs = Vec::new();
    for (k, d) in fam.iter().enumerate() {
        let (p, st) = d.compile_delayed(spreads[k], 4 * i + k as u64);
        t = t.max(st.stage(wf).max(wf) + 8);
        progs.push(p);
    }
    let t = cx.stretch(t);
    let u = t + m;
    let inputs = progs.iter().map(|p| cx.exec(p, u)).collect::<Att<Vec<Trace>>>()?;
    let run = run_machine_tracked(&inputs, u, FAMILY_REP, cx.opts.mutant, &mut cx.budget()).map_err(eval_halt)?;
    let mut trace = CaseTrace {
        sides: run
            .outputs
            .iter()
            .zip(&fam)
            .enumerate()
            .map(|(k, (o, d))| side_trace(&format!("f(W_{k})"), Some(d), o, t, m))
            .collect(),
        notes: vec![],
    };
    for r in [run.check_slices(), run.check_monotone(), run.check_single_difference_all()] {
        if let Err(e) = r {
            return fail(None, format!("structural: {e}"), trace);
        }
    }
    let n = fam.len();
    let stable = |c: u64, j: u64| run.marker(c, j).is_some_and(|(_, since)| since <= t);
    // equal columns give equal outputs on every settled slice of the column
    for c in 0..=FAMILY_REP {
        for a in 0..n {
            for b in a + 1..n.min(c as usize + 1) {
                let (Some(ca), Some(cb)) = (fam[a].column(c), fam[b].column(c)) else { continue };
                if !decide(&RelationId::EqCe, &ca, &cb)? {
                    continue;
                }
                for j in 0..n as u64 {
                    if stable(c, j) && run.slice_differs(a, b, c, j, u) {
                        return fail(None, format!("agreement slice ({c},{j}) differs between {a} and {b}"), trace);
                    }
                }
            }
        }
    }
    for j in 0..n as u64 {
        if let Some((_, since)) = run.marker(FAMILY_REP, j) {
            if since > t && since < u {
                return Err(Halt::Retry(format!("slice ({FAMILY_REP},{j}) settled at {since}, after {t}")));
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            let apart = (0..n as u64).any(|j| stable(FAMILY_REP, j) && run.slice_differs(a, b, FAMILY_REP, j, u));
            let want = decide(&RelationId::E1, &fam[a], &fam[b])?;
            trace.notes.push(format!("pair ({a},{b}): E1 {want}, E0 {}", !apart));
            if want == apart {
                let observed = (a, b) == (0, 1);
                return fail(
                    observed.then_some(!apart),
                    format!("pair ({a},{b}): E1 verdict {want} but E0 verdict {}", !apart),
                    trace,
                );
            }
        }
    }
    Ok(Outcome::Agree)
}

fn nce_desc(comps: Vec<D>) -> D {
    D::columns(D::empty(), comps.into_iter().enumerate().map(|(k, c)| (k as u64, c)).collect())
}

/// Embedding n-c.e. tuples into longer ones: the evaluated sets must agree
/// at every stage.
fn nce_map(cx: &Cx, case: &TestCase) -> Att<Outcome> {
    let m = cx.m();
    let mut images = Vec::new();
    let mut trace = CaseTrace::default();
    let mut problem = None;
    for side in 0..2 {
        let d = case.descriptors()[side];
        let (progs, st) = compile_tuple(case, side)?;
        let t = cx.stretch(settle_stage(Settle::Window, &st, m));
        let u = t + m;
        cx.within(u)?;
        let np = NceProgram::from_programs(&progs);
        let out = if cx.opts.mutant { nce::nce_embed_mutant(&np) } else { nce::nce_embed(&np) };
        let mut comps = tuple_components(d);
        if cx.opts.mutant {
            comps.insert(0, D::empty());
        } else {
            comps.push(D::empty());
        }
        let ts_in = nce::traces(&np, u, &mut cx.budget()).map_err(eval_halt)?;
        let ts_out = nce::traces(&out, u, &mut cx.budget()).map_err(eval_halt)?;
        let limit = crate::relations::oracle::nce_limit(d)
            .ok()
            .and_then(|e| e.members())
            .ok_or_else(|| no_prediction(d))?;
        let at_t = nce::eval_at(&ts_in, t);
        if at_t != nce::eval_at(&ts_in, u) {
            return Err(Halt::Retry(format!("tuple {side} still toggling after stage {t}")));
        }
        trace.sides.push(SideTrace {
            label: ["A", "B"][side].into(),
            predicted: Some(D::Finite(limit.clone()).to_string()),
            settle: t,
            horizon: u,
            window: below(&nce::eval_at(&ts_out, t), m).into_iter().collect(),
            late: vec![],
        });
        if at_t != limit {
            problem.get_or_insert(format!("tuple {side} evaluates to {} not its limit", show(at_t)));
        }
        if let Some(s) = (0..=u).find(|&s| nce::eval_at(&ts_in, s) != nce::eval_at(&ts_out, s)) {
            problem.get_or_insert(format!("side {side}: embedded tuple differs at stage {s}"));
        }
        images.push(nce_desc(comps));
    }
    let observed = decide(&cx.red.target, &images[0], &images[1])?;
    if let Some(r) = problem {
        return fail(Some(observed), r, trace);
    }
    Ok(verdict(case, observed, trace))
}

fn nat(d: &D) -> Att<u64> {
    nat_of(d).ok_or_else(|| Halt::Done(Outcome::Unknown(format!("{d} is not a natural"))))
}

/// `<a,b>` codes of the pairs of a finite relation descriptor.
fn relation_pairs(d: &D) -> BTreeSet<(u64, u64)> {
    match d {
        D::Finite(s) => s.iter().map(|&c| unpair(c)).collect(),
        _ => BTreeSet::new(),
    }
}

fn naturals(cx: &Cx, case: &TestCase, map: NatMap) -> Att<Outcome> {
    let (a, b) = (nat(&case.a)?, nat(&case.b)?);
    let mutant = cx.opts.mutant;
    let target = &cx.red.target;
    let mut trace = CaseTrace::default();
    let observed = match map {
        NatMap::MinN => {
            let w = vec![D::finite([0]), D::finite([1]), D::finite([2])];
            let mn = reduce_to_min_n(target, w).map_err(basic_halt)?;
            let f = |k: u64| mn.apply(k + mutant as u64).clone();
            trace.notes.push(format!("images {} {}", f(a), f(b)));
            decide(target, &f(a), &f(b))?
        }
        NatMap::EqnToPi01 => {
            let odds = D::Progression { a: 1, d: 2 };
            let diseq = D::union(D::product(odds.clone(), D::all()), D::product(D::all(), odds)).compile().0;
            let f = |k: u64| -> Att<u64> {
                if mutant {
                    return Ok(2 * k);
                }
                reduce_eqn_to_pi01(&diseq, k + 1, cx.stage_budget(), &mut cx.budget()).map_err(basic_halt)
            };
            let (x, y) = (f(a)?, f(b)?);
            trace.notes.push(format!("images {x} {y}"));
            decide(target, &D::finite([x]), &D::finite([y]))?
        }
        NatMap::TwoClass => {
            let f = |k: u64| if mutant { 2 * k } else { k + 1 };
            trace.notes.push(format!("images {} {}", f(a), f(b)));
            decide(target, &D::finite([f(a)]), &D::finite([f(b)]))?
        }
        NatMap::OneRepair => {
            let RelationId::OneClass(src) = &cx.red.source else {
                return Ok(Outcome::Unknown("source is not a one-class relation".into()));
            };
            let RelationId::OneClass(dst) = target else {
                return Ok(Outcome::Unknown("target is not a one-class relation".into()));
            };
            let src = src.clone();
            let pool = if mutant { D::all() } else { dst.clone() };
            let f = move |n: u64| if src.contains(n) { 0 } else { 2 * n + 1 };
            let mut g = OneRepair::new(f, pool.compile().0, cx.stage_budget());
            let mut budget = cx.budget();
            let x = g.apply(a, &mut budget).map_err(basic_halt)?;
            let y = g.apply(b, &mut budget).map_err(basic_halt)?;
            trace.notes.push(format!("images {x} {y}"));
            decide(target, &D::finite([x]), &D::finite([y]))?
        }
        NatMap::UceEmbed => {
            let RelationId::CeRelation(p) = &cx.red.source else {
                return Ok(Outcome::Unknown("source is not a c.e. relation".into()));
            };
            let (prog, st) = p.compile_delayed(case.spreads()[0], case.salts()[0]);
            let t = cx.stretch(st.stage(0) + 8);
            let u = t + cx.m();
            cx.within(u)?;
            let e = numbering::encode(&prog);
            let shift = mutant as u64;
            let (x, y) = (uce_embed(&e, a + shift), uce_embed(&e, b + shift));
            let mut budget = cx.budget();
            let now = UceView::new(t).related(&x, &y, &mut budget).map_err(eval_halt)?;
            let later = UceView::new(u).related(&x, &y, &mut budget).map_err(eval_halt)?;
            if now != later {
                return Err(Halt::Retry(format!("closure changed after stage {t}")));
            }
            trace.notes.push(format!("index e has {} bits", e.bits()));
            now
        }
        NatMap::Orbit => {
            let RelationId::CeRelation(p) = &cx.red.source else {
                return Ok(Outcome::Unknown("source is not a c.e. relation".into()));
            };
            let p = if mutant {
                D::finite(relation_pairs(p).into_iter().map(|(x, y)| pair(x, y + 1)).collect::<Vec<_>>())
            } else {
                p.clone()
            };
            let (prog, st) = p.compile_delayed(case.spreads()[0], case.salts()[0]);
            let t = cx.stretch(st.stage(0) + 8);
            let u = t + cx.m();
            cx.within(u)?;
            let mut budget = cx.budget();
            let now = OrbitAction::new(&prog, t, &mut budget).map_err(eval_halt)?.orbit(a, 4);
            let later = OrbitAction::new(&prog, u, &mut budget).map_err(eval_halt)?.orbit(a, 4);
            if now != later {
                return Err(Halt::Retry(format!("orbit of {a} changed after stage {t}")));
            }
            trace.notes.push(format!("orbit of {a}: {}", show(now.iter().copied())));
            now.contains(&b)
        }
    };
    Ok(verdict(case, observed, trace))
}
