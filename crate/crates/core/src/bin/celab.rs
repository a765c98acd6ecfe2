//! `celab`: list relations and reductions, run programs, apply and verify
//! reductions, and print the hierarchy diagrams.
//!
//! Exit codes: 0 ok, 2 disagreement, 3 unknown verdicts only, 4 input error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use celab::harness::{
    gen_corpus_with, lookup, registry, verify_with, Corpus, Kind, Reduction, Shape, VerifyOptions, BUDGET_ENV,
    DEFAULT_BUDGET, DEFAULT_WINDOW,
};
use celab::nce::{self, NceProgram};
use celab::numbering::encode;
use celab::ops::Op;
use celab::program::{approx, SetProgram};
use celab::relations::hierarchy::hierarchy_graph;
use celab::relations::RelationId;
use celab::sexpr::{parse_term, print_term};

const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "celab", version, about = "Reductions between equivalence relations on c.e. sets")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Relations with their levels, and the shipped reductions.
    List {
        #[arg(long, value_enum, default_value_t = ListFormat::Text)]
        format: ListFormat,
    },
    /// Print the stage-s approximation of a program term.
    Enumerate {
        #[arg(long)]
        term: String,
        #[arg(long, default_value_t = 0)]
        stage: u64,
    },
    /// Apply a reduction to one or more program terms.
    Reduce {
        #[arg(long)]
        reduction: String,
        /// Repeat for constructions taking a tuple or a family.
        #[arg(long, required = true)]
        term: Vec<String>,
        #[arg(long)]
        mutant: bool,
    },
    /// Check a reduction against a corpus and write the JSON report.
    Verify(VerifyArgs),
    /// Diagrams of the reducibility hierarchy.
    Hierarchy {
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a corpus, or read one back and re-check it.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    reduction: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    size: usize,
    /// Read cases from this file instead of generating them.
    #[arg(long, conflicts_with_all = ["seed", "size"])]
    corpus: Option<PathBuf>,
    #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: u64,
    /// Verify the registered mutant instead.
    #[arg(long)]
    mutant: bool,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, conflicts_with = "read")]
    relation: Option<String>,
    /// Use the source relation and sampler of this reduction.
    #[arg(long, conflicts_with_all = ["relation", "read"])]
    reduction: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    read: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli.verb) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(verb: Verb) -> Result<u8, InputError> {
    match verb {
        Verb::List { format } => list(format),
        Verb::Enumerate { term, stage } => {
            let p = parse_term(&term)?;
            emit(None, &show_set(&approx(&p, stage)?))?;
            Ok(0)
        }
        Verb::Reduce { reduction, term, mutant } => reduce(&reduction, &term, mutant),
        Verb::Verify(a) => verify(a),
        Verb::Hierarchy { format, out } => {
            let g = hierarchy_graph();
            let text = match format {
                GraphFormat::Json => g.to_json(),
                GraphFormat::Dot => g.to_dot(),
            };
            emit(out, &text)?;
            Ok(0)
        }
        Verb::Corpus(a) => corpus(a),
    }
}

fn find(id: &str) -> Result<Reduction, InputError> {
    lookup(id).ok_or_else(|| InputError(format!("unknown reduction {id:?}; see `celab list`")))
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), InputError> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => {
            let mut w = io::stdout().lock();
            match w.write_all(text.as_bytes()).and_then(|_| w.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn show_set(s: &BTreeSet<u64>) -> String {
    let xs: Vec<String> = s.iter().map(u64::to_string).collect();
    format!("{{{}}}", xs.join(", "))
}

#[derive(Serialize)]
struct RelationRow {
    id: String,
    name: String,
    level: &'static str,
}

#[derive(Serialize)]
struct ReductionRow {
    id: &'static str,
    source: String,
    target: String,
    monotone: bool,
    mutant: &'static str,
}

fn list(format: ListFormat) -> Result<u8, InputError> {
    let rels: Vec<RelationRow> = RelationId::catalogue()
        .into_iter()
        .map(|r| RelationRow {
            id: r.to_string(),
            name: r.display_name(),
            level: r.level(),
        })
        .collect();
    let reds: Vec<ReductionRow> = registry()
        .into_iter()
        .map(|r| ReductionRow {
            id: r.id,
            source: r.source.to_string(),
            target: r.target.to_string(),
            monotone: r.monotone,
            mutant: r.mutant,
        })
        .collect();
    let mut text = String::new();
    match format {
        ListFormat::Json => {
            let v = serde_json::json!({ "relations": rels, "reductions": reds });
            text = serde_json::to_string_pretty(&v)?;
        }
        ListFormat::Text => {
            text.push_str("relations:\n");
            for r in &rels {
                let _ = writeln!(text, "  {:<16} {:<14} {}", r.id, r.name, r.level);
            }
            text.push_str("reductions:\n");
            for r in &reds {
                let mono = if r.monotone { " (monotone)" } else { "" };
                let _ = writeln!(text, "  {:<22} {} -> {}{mono}", r.id, r.source, r.target);
            }
        }
    }
    emit(None, &text)?;
    Ok(0)
}

fn print_program(text: &mut String, p: &SetProgram) {
    let _ = writeln!(text, "{}\nindex {}", print_term(p), encode(p));
}

fn reduce(id: &str, terms: &[String], mutant: bool) -> Result<u8, InputError> {
    let red = find(id)?;
    let progs = terms.iter().map(|t| parse_term(t)).collect::<Result<Vec<_>, _>>()?;
    let mut text = String::new();
    let one = || match progs.as_slice() {
        [p] => Ok(p.clone()),
        _ => Err(InputError(format!("{id} takes exactly one --term"))),
    };
    match red.kind {
        Kind::Program { build, .. } => print_program(&mut text, &build(one()?, mutant)),
        Kind::Tuple { build, .. } => print_program(&mut text, &build(&NceProgram::from_programs(&progs), mutant)),
        Kind::NceMap => {
            let np = NceProgram::from_programs(&progs);
            let out = if mutant { nce::nce_embed_mutant(&np) } else { nce::nce_embed(&np) };
            for p in out.programs() {
                print_program(&mut text, &p);
            }
        }
        Kind::Pairwise => {
            let [a, b] = progs.as_slice() else {
                return Err(InputError(format!("{id} takes two --term values")));
            };
            for side in 0..2 {
                let args = vec![a.clone(), b.clone()];
                let p = if mutant {
                    SetProgram::mutant(Op::BasicModule, args, vec![side])
                } else {
                    SetProgram::comb(Op::BasicModule, args, vec![side])
                };
                print_program(&mut text, &p);
            }
        }
        Kind::Family => {
            for i in 0..progs.len() as u64 {
                let p = if mutant {
                    SetProgram::mutant(Op::E1ToE0, progs.clone(), vec![i])
                } else {
                    SetProgram::comb(Op::E1ToE0, progs.clone(), vec![i])
                };
                print_program(&mut text, &p);
            }
        }
        Kind::Naturals(_) => {
            return Err(InputError(format!("{id} maps naturals, not program terms; use `celab verify`")));
        }
    }
    emit(None, &text)?;
    Ok(0)
}

fn verify(a: VerifyArgs) -> Result<u8, InputError> {
    let red = find(&a.reduction)?;
    let corpus = match &a.corpus {
        Some(path) => Corpus::from_json(&fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?)?,
        None => gen_corpus_with(&red.source, red.shape, a.seed, a.size)?,
    };
    let opts = VerifyOptions {
        budget: a.budget,
        window: a.window,
        mutant: a.mutant,
        parallel: !a.sequential && cfg!(feature = "parallel"),
        ..VerifyOptions::default()
    };
    let report = verify_with(&red, &corpus, &opts)?;
    emit(a.out, &report.to_json())?;
    eprintln!(
        "{}: {} cases, {} agree, {} disagree, {} unknown in {:.2?}",
        report.reduction,
        report.cases,
        report.agreements,
        report.disagreements.len(),
        report.unknown_count(),
        report.wall_clock
    );
    Ok(report.exit_code() as u8)
}

fn corpus(a: CorpusArgs) -> Result<u8, InputError> {
    if let Some(path) = a.read {
        let text = fs::read_to_string(&path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        let c = Corpus::from_json(&text)?;
        let related = c.cases.iter().filter(|t| t.expected).count();
        let line = format!("{}: {} cases over {}, {related} related, seed {}", path.display(), c.len(), c.relation, c.seed);
        emit(None, &line)?;
        return Ok(0);
    }
    let (relation, shape) = match (&a.relation, &a.reduction) {
        (_, Some(id)) => {
            let red = find(id)?;
            (red.source, red.shape)
        }
        (Some(r), None) => {
            let r: RelationId = r.parse()?;
            let shape = Shape::default_for(&r)
                .ok_or_else(|| InputError(format!("no corpus sampler for relation {r}")))?;
            (r, shape)
        }
        (None, None) => return Err(InputError("give --relation, --reduction or --read".into())),
    };
    let c = gen_corpus_with(&relation, shape, a.seed, a.size)?;
    emit(a.out, &c.to_json())?;
    Ok(0)
}
