//! Text form of program terms.
//!
//! ```text
//! term := (script (STAGE (N ...)) ...)
//!       | (column C)
//!       | (op NAME [mutant] (args term ...) (params N ...))
//!       | (index CODE)
//! ```
//!
//! `NAME` is a construction name or a raw op code; `CODE` is decimal and
//! may exceed 64 bits. The `args` and `params` lists may be omitted when
//! empty. [`print_term`] writes the canonical form, which parses back to the
//! same term.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigUint;

use crate::ops::Op;
use crate::program::SetProgram;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("malformed term at byte {pos}: {msg}")]
pub struct TermError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, TermError> {
    Err(TermError { pos, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn read(src: &str) -> Result<Sexp, TermError> {
    let bytes = src.as_bytes();
    let mut i = 0;
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if done.is_some() {
            return err(i, "trailing input");
        }
        let item = match c {
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
                continue;
            }
            b')' => {
                let Some((items, start)) = stack.pop() else {
                    return err(i, "unbalanced ')'");
                };
                i += 1;
                Sexp::List(items, start)
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                Sexp::Atom(src[start..i].to_string(), start)
            }
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => done = Some(item),
        }
    }
    if let Some((_, start)) = stack.pop() {
        return err(start, "unclosed '('");
    }
    done.map_or_else(|| err(0, "empty input"), Ok)
}

fn nat(s: &Sexp) -> Result<u64, TermError> {
    match s {
        Sexp::Atom(a, p) => a.parse().or_else(|_| err(*p, format!("expected a natural, got {a:?}"))),
        Sexp::List(_, p) => err(*p, "expected a natural"),
    }
}

fn list(s: &Sexp) -> Result<&[Sexp], TermError> {
    match s {
        Sexp::List(items, _) => Ok(items),
        Sexp::Atom(_, p) => err(*p, "expected a list"),
    }
}

fn head(items: &[Sexp], pos: usize) -> Result<(&str, &[Sexp]), TermError> {
    match items.split_first() {
        Some((Sexp::Atom(h, _), rest)) => Ok((h, rest)),
        _ => err(pos, "expected a keyword"),
    }
}

fn term(s: &Sexp) -> Result<SetProgram, TermError> {
    let items = list(s)?;
    let (kw, rest) = head(items, s.pos())?;
    match kw {
        "script" => {
            let mut entries = Vec::new();
            for e in rest {
                let pair = list(e)?;
                let [stage, elems] = pair else {
                    return err(e.pos(), "expected (STAGE (N ...))");
                };
                let set = list(elems)?.iter().map(nat).collect::<Result<BTreeSet<u64>, _>>()?;
                entries.push((nat(stage)?, set));
            }
            Ok(SetProgram::Script(entries))
        }
        "column" => match rest {
            [c] => Ok(SetProgram::FullColumnOf(nat(c)?)),
            _ => err(s.pos(), "expected (column C)"),
        },
        "index" => match rest {
            [Sexp::Atom(a, p)] => a
                .parse::<BigUint>()
                .map(SetProgram::Indexed)
                .or_else(|_| err(*p, "expected a decimal code")),
            _ => err(s.pos(), "expected (index CODE)"),
        },
        "op" => {
            let Some((name, mut rest)) = rest.split_first() else {
                return err(s.pos(), "missing op name");
            };
            let Sexp::Atom(name, np) = name else {
                return err(name.pos(), "expected an op name");
            };
            let mut mutant = false;
            if let Some((Sexp::Atom(m, _), r)) = rest.split_first() {
                if m == "mutant" {
                    mutant = true;
                    rest = r;
                }
            }
            let code = match Op::from_name(name) {
                Some(op) => op.code(mutant),
                None => match name.parse::<u64>() {
                    Ok(c) if !mutant => c,
                    _ => return err(*np, format!("unknown op {name:?}")),
                },
            };
            let (mut args, mut params) = (Vec::new(), Vec::new());
            for part in rest {
                let items = list(part)?;
                let (kw, xs) = head(items, part.pos())?;
                match kw {
                    "args" => args = xs.iter().map(term).collect::<Result<_, _>>()?,
                    "params" => params = xs.iter().map(nat).collect::<Result<_, _>>()?,
                    other => return err(part.pos(), format!("unexpected {other:?}")),
                }
            }
            Ok(SetProgram::Combinator { op: code, args, params })
        }
        other => err(s.pos(), format!("unknown term {other:?}")),
    }
}

pub fn parse_term(src: &str) -> Result<SetProgram, TermError> {
    term(&read(src)?)
}

pub fn print_term(p: &SetProgram) -> String {
    let mut out = String::new();
    write_term(&mut out, p);
    out
}

fn write_term(out: &mut String, p: &SetProgram) {
    match p {
        SetProgram::Script(entries) => {
            out.push_str("(script");
            for (s, set) in entries {
                let elems: Vec<String> = set.iter().map(u64::to_string).collect();
                let _ = write!(out, " ({s} ({}))", elems.join(" "));
            }
            out.push(')');
        }
        SetProgram::FullColumnOf(c) => {
            let _ = write!(out, "(column {c})");
        }
        SetProgram::Indexed(i) => {
            let _ = write!(out, "(index {i})");
        }
        SetProgram::Combinator { op, args, params } => {
            match Op::from_code(*op) {
                Some((o, m)) => {
                    let _ = write!(out, "(op {}{}", o.name(), if m { " mutant" } else { "" });
                }
                None => {
                    let _ = write!(out, "(op {op}");
                }
            }
            if !args.is_empty() {
                out.push_str(" (args");
                for a in args {
                    out.push(' ');
                    write_term(out, a);
                }
                out.push(')');
            }
            if !params.is_empty() {
                let ps: Vec<String> = params.iter().map(u64::to_string).collect();
                let _ = write!(out, " (params {})", ps.join(" "));
            }
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::Descriptor;
    use crate::program::approx;
    use proptest::prelude::*;

    #[test]
    fn script_example() {
        let p = parse_term("(script (0 (5)))").unwrap();
        assert_eq!(approx(&p, 3).unwrap(), [5].into());
        assert_eq!(print_term(&p), "(script (0 (5)))");
    }

    #[test]
    fn combinators_and_codes() {
        let src = "(op eqce_to_e0 mutant (args (script (0 (1 3)) (2 (4))) (column 2)) (params 7))";
        let p = parse_term(src).unwrap();
        assert_eq!(print_term(&p), src);
        let big = "(index 123456789012345678901234567890)";
        assert_eq!(print_term(&parse_term(big).unwrap()), big);
        assert_eq!(print_term(&parse_term("(op 99999)").unwrap()), "(op 99999)");
        assert_eq!(parse_term("(script)").unwrap(), SetProgram::empty());
    }

    #[test]
    fn malformed_terms() {
        for bad in ["", "(", ")", "(script (0 5))", "(op nope)", "(column)", "(script) x", "(index -1)"] {
            assert!(parse_term(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn compiled_descriptors_round_trip() {
        for d in ["finite(1,3)", "columns(finite(2);1:cofinite(0))", "prog(3,4)", "tails(finite(5))"] {
            let (p, _) = d.parse::<Descriptor>().unwrap().compile();
            assert_eq!(parse_term(&print_term(&p)).unwrap(), p);
        }
    }

    fn arb_program() -> impl Strategy<Value = SetProgram> {
        let leaf = prop_oneof![
            proptest::collection::vec((0u64..20, proptest::collection::btree_set(0u64..50, 0..4)), 0..3)
                .prop_map(SetProgram::Script),
            (0u64..9).prop_map(SetProgram::FullColumnOf),
            any::<u64>().prop_map(|i| SetProgram::Indexed(BigUint::from(i))),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            (0u64..90, proptest::collection::vec(inner, 0..3), proptest::collection::vec(0u64..100, 0..3))
                .prop_map(|(op, args, params)| SetProgram::Combinator { op, args, params })
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_program()) {
            prop_assert_eq!(parse_term(&print_term(&p)).unwrap(), p);
        }
    }
}
